//! Finite quadratic modules (discriminant forms) in generator/Gram presentation.
//!
//! A module is `D = ⊕ ℤ/dᵢℤ` with a quadratic form given by its values on the
//! generators and the polarization `B(x, y) = Q(x+y) − Q(x) − Q(y)` on pairs.
//! Elements are addressed by a mixed-radix index with the first coordinate most
//! significant, so index order is lexicographic coordinate order.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{factorize, gcd, lcm, modulo};
use crate::cyclo::{gauss_sum, rational_sqrt, sqrt_cyclotomic, CycNumber};
use crate::error::{invalid, Error, Result};

/// An element of ℚ/ℤ in lowest terms with `0 ≤ num < den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mod1Rational {
    num: u64,
    den: u64,
}

impl Mod1Rational {
    pub const ZERO: Mod1Rational = Mod1Rational { num: 0, den: 1 };

    pub fn new(num: i64, den: u64) -> Self {
        assert!(den >= 1, "denominator must be positive");
        let n = modulo(num, den);
        if n == 0 {
            return Self::ZERO;
        }
        let g = gcd(n, den);
        Mod1Rational { num: n / g, den: den / g }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Numerator over a multiple `l` of the denominator.
    pub fn over(&self, l: u64) -> u64 {
        debug_assert_eq!(l % self.den, 0);
        self.num * (l / self.den)
    }

    pub fn add(&self, other: &Self) -> Self {
        let d = lcm(self.den, other.den);
        Self::new((self.over(d) + other.over(d)) as i64, d)
    }

    pub fn neg(&self) -> Self {
        Self::new(-(self.num as i64), self.den)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul_int(&self, k: i64) -> Self {
        let n = (self.num as i128 * k as i128).rem_euclid(self.den as i128);
        Self::new(n as i64, self.den)
    }

    /// e(self) = exp(2πi·self).
    pub fn exp(&self) -> CycNumber {
        CycNumber::e(self.num as i64, self.den)
    }
}

impl fmt::Display for Mod1Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl std::str::FromStr for Mod1Rational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("malformed ℚ/ℤ value {s:?}"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: i64 = n.parse().map_err(|_| bad())?;
        let d: u64 = d.parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        Ok(Self::new(n, d))
    }
}

impl Serialize for Mod1Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Mod1Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Coordinates of an element, `coords[i] ∈ [0, dᵢ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element {
    pub coords: Vec<u64>,
}

impl Element {
    pub fn new(coords: Vec<u64>) -> Self {
        Element { coords }
    }
}

#[derive(Serialize, Deserialize)]
struct FqModuleJson {
    orders: Vec<u64>,
    q_gen: Vec<Mod1Rational>,
    b_gram: Vec<Vec<Mod1Rational>>,
}

/// A non-degenerate finite quadratic module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FqModule {
    orders: Vec<u64>,
    q_gen: Vec<Mod1Rational>,
    b_gram: Vec<Vec<Mod1Rational>>,
    level: u64,
    order: usize,
    // L·Q(gᵢ) and L·B(gᵢ, gⱼ) modulo L = level
    q_num: Vec<u64>,
    b_num: Vec<Vec<u64>>,
    strides: Vec<usize>,
}

impl FqModule {
    /// Validates a presentation and rejects degenerate forms.
    pub fn new(
        orders: Vec<u64>,
        q_gen: Vec<Mod1Rational>,
        b_gram: Vec<Vec<Mod1Rational>>,
    ) -> Result<Self> {
        let m = Self::build(orders, q_gen, b_gram)?;
        if let Some(x) = m.radical_element() {
            return invalid(format!("degenerate form: {:?} lies in the radical", m.coords(x)));
        }
        Ok(m)
    }

    fn build(
        orders: Vec<u64>,
        q_gen: Vec<Mod1Rational>,
        b_gram: Vec<Vec<Mod1Rational>>,
    ) -> Result<Self> {
        let k = orders.len();
        if q_gen.len() != k || b_gram.len() != k || b_gram.iter().any(|r| r.len() != k) {
            return invalid("q_gen and b_gram must match the number of generators");
        }
        if orders.contains(&0) {
            return invalid("generator orders must be positive");
        }
        let mut order: usize = 1;
        for &d in &orders {
            order = order
                .checked_mul(d as usize)
                .ok_or_else(|| Error::InvalidArgument("module order overflows".into()))?;
        }
        for i in 0..k {
            if b_gram[i][i] != q_gen[i].mul_int(2) {
                return invalid(format!("B(g{i}, g{i}) must equal 2·Q(g{i})"));
            }
            if !q_gen[i].mul_int((orders[i] * orders[i]) as i64).is_zero() {
                return invalid(format!("Q is not well defined on generator {i}"));
            }
            for j in 0..k {
                if b_gram[i][j] != b_gram[j][i] {
                    return invalid("b_gram must be symmetric");
                }
                if !b_gram[i][j].mul_int(orders[i] as i64).is_zero() {
                    return invalid(format!("B(g{i}, g{j}) is not killed by the order of g{i}"));
                }
            }
        }
        let mut level = 1;
        for i in 0..k {
            level = lcm(level, q_gen[i].den());
            for j in i + 1..k {
                level = lcm(level, b_gram[i][j].den());
            }
        }
        let q_num = q_gen.iter().map(|q| q.over(level)).collect();
        let b_num = b_gram.iter().map(|r| r.iter().map(|b| b.over(level)).collect()).collect();
        let mut strides = vec![1usize; k];
        for i in (0..k.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * orders[i + 1] as usize;
        }
        Ok(FqModule { orders, q_gen, b_gram, level, order, q_num, b_num, strides })
    }

    /// The module with no generators.
    pub fn trivial() -> Self {
        Self::build(vec![], vec![], vec![]).expect("trivial module")
    }

    /// `(ℤ/Nℤ)²` with `Q(x, y) = xy/N`.
    pub fn hyperbolic(n: i64) -> Result<Self> {
        if n <= 0 {
            return invalid(format!("hyperbolic plane needs N ≥ 1, got {n}"));
        }
        let n = n as u64;
        let z = Mod1Rational::ZERO;
        let b = Mod1Rational::new(1, n);
        Self::new(vec![n, n], vec![z, z], vec![vec![z, b], vec![b, z]])
    }

    /// The discriminant form of `L_{N,N'}`: `(ℤ/N)² ⊕ (ℤ/N')²` with
    /// `Q(x, y, z, w) = xy/N + zw/N'`.
    pub fn lnn(n: i64, n_prime: i64) -> Result<Self> {
        Ok(Self::hyperbolic(n)?.direct_sum(&Self::hyperbolic(n_prime)?))
    }

    /// Orthogonal direct sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let k = self.rank() + other.rank();
        let mut b_gram = vec![vec![Mod1Rational::ZERO; k]; k];
        for (i, row) in self.b_gram.iter().enumerate() {
            b_gram[i][..row.len()].copy_from_slice(row);
        }
        let off = self.rank();
        for (i, row) in other.b_gram.iter().enumerate() {
            b_gram[off + i][off..].copy_from_slice(row);
        }
        let orders = [self.orders.clone(), other.orders.clone()].concat();
        let q_gen = [self.q_gen.clone(), other.q_gen.clone()].concat();
        Self::build(orders, q_gen, b_gram).expect("direct sum of valid modules")
    }

    /// The module spanned by a subset of the generators, with the induced form.
    pub fn sub_presentation(&self, gens: &[usize]) -> Result<Self> {
        if gens.iter().any(|&g| g >= self.rank()) {
            return invalid("generator index out of range");
        }
        Self::new(
            gens.iter().map(|&g| self.orders[g]).collect(),
            gens.iter().map(|&g| self.q_gen[g]).collect(),
            gens.iter().map(|&a| gens.iter().map(|&b| self.b_gram[a][b]).collect()).collect(),
        )
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn q_gen(&self) -> &[Mod1Rational] {
        &self.q_gen
    }

    pub fn b_gram(&self) -> &[Vec<Mod1Rational>] {
        &self.b_gram
    }

    /// Number of generators.
    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// |D|.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Smallest `N` with `N·Q(γ) ∈ ℤ` for all γ.
    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn index(&self, coords: &[u64]) -> usize {
        coords.iter().zip(&self.strides).map(|(&c, &s)| c as usize * s).sum()
    }

    pub fn coords(&self, idx: usize) -> Vec<u64> {
        self.orders
            .iter()
            .zip(&self.strides)
            .map(|(&d, &s)| ((idx / s) as u64) % d)
            .collect()
    }

    pub fn element(&self, idx: usize) -> Element {
        Element::new(self.coords(idx))
    }

    pub fn element_index(&self, x: &Element) -> Result<usize> {
        self.check(x)?;
        Ok(self.index(&x.coords))
    }

    /// Reduces arbitrary integer coordinates and returns the element index.
    pub fn index_of_ints(&self, coords: &[i64]) -> usize {
        coords
            .iter()
            .zip(&self.orders)
            .zip(&self.strides)
            .map(|((&c, &d), &s)| modulo(c, d) as usize * s)
            .sum()
    }

    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        let mut out = 0;
        for (&d, &s) in self.orders.iter().zip(&self.strides) {
            let d = d as usize;
            out += ((a / s % d + b / s % d) % d) * s;
        }
        out
    }

    pub fn neg_idx(&self, a: usize) -> usize {
        self.scale_idx(a, -1)
    }

    pub fn scale_idx(&self, a: usize, k: i64) -> usize {
        let mut out = 0;
        for (&d, &s) in self.orders.iter().zip(&self.strides) {
            let c = (a / s) as u64 % d;
            out += modulo((c as i128 * k as i128 % d as i128) as i64, d) as usize * s;
        }
        out
    }

    /// Order of the element with index `a`.
    pub fn element_order(&self, a: usize) -> u64 {
        self.coords(a)
            .iter()
            .zip(&self.orders)
            .fold(1, |acc, (&c, &d)| lcm(acc, d / gcd(c, d)))
    }

    fn check(&self, x: &Element) -> Result<()> {
        if x.coords.len() != self.rank() || x.coords.iter().zip(&self.orders).any(|(c, d)| c >= d) {
            return invalid(format!("{:?} is not an element of the module", x.coords));
        }
        Ok(())
    }

    /// `L·Q(γ) mod L` for the element with index `idx`, `L` the level.
    pub fn q_num_index(&self, idx: usize) -> u64 {
        self.q_num_coords(&self.coords(idx))
    }

    pub fn q_num_coords(&self, x: &[u64]) -> u64 {
        let l = self.level as u128;
        let mut acc: u128 = 0;
        for i in 0..x.len() {
            if x[i] == 0 {
                continue;
            }
            let xi = x[i] as u128;
            acc += xi * xi % l * self.q_num[i] as u128;
            for j in i + 1..x.len() {
                acc += xi * x[j] as u128 % l * self.b_num[i][j] as u128;
            }
            acc %= l;
        }
        (acc % l) as u64
    }

    /// `L·B(γ, δ) mod L`.
    pub fn b_num_coords(&self, x: &[u64], y: &[u64]) -> u64 {
        let l = self.level as u128;
        let mut acc: u128 = 0;
        for i in 0..x.len() {
            if x[i] == 0 {
                continue;
            }
            for j in 0..y.len() {
                acc += x[i] as u128 * y[j] as u128 % l * self.b_num[i][j] as u128;
            }
            acc %= l;
        }
        (acc % l) as u64
    }

    pub fn b_num_index(&self, a: usize, b: usize) -> u64 {
        self.b_num_coords(&self.coords(a), &self.coords(b))
    }

    pub fn is_isotropic_index(&self, idx: usize) -> bool {
        self.q_num_index(idx) == 0
    }

    pub fn q_value(&self, x: &Element) -> Result<Mod1Rational> {
        self.check(x)?;
        Ok(Mod1Rational::new(self.q_num_coords(&x.coords) as i64, self.level))
    }

    pub fn b_value(&self, x: &Element, y: &Element) -> Result<Mod1Rational> {
        self.check(x)?;
        self.check(y)?;
        Ok(Mod1Rational::new(self.b_num_coords(&x.coords, &y.coords) as i64, self.level))
    }

    /// Index of some nonzero element orthogonal to all of D, if any.
    fn radical_element(&self) -> Option<usize> {
        (1..self.order).find(|&x| {
            let c = self.coords(x);
            (0..self.rank()).all(|j| {
                let mut e = vec![0; self.rank()];
                e[j] = 1;
                self.b_num_coords(&c, &e) == 0
            })
        })
    }

    /// The `s ∈ ℤ/8ℤ` with `Σ_γ e(Q(γ)) = √|D|·e(s/8)`.
    pub fn signature_mod8(&self) -> Result<u8> {
        let g = gauss_sum(self);
        let n = self.order as u64;
        let root = match rational_sqrt(n) {
            Ok(r) => CycNumber::from_rational(r),
            Err(_) => sqrt_cyclotomic(n),
        };
        (0..8u8)
            .find(|&s| root.mul_ref(&CycNumber::root_of_unity(s as i64, 8)) == g)
            .ok_or_else(|| Error::Violation("Gauss sum is not √|D| times an 8th root of unity".into()))
    }

    /// Orthogonal splitting into p-primary parts.
    pub fn p_primary_decomposition(&self) -> Vec<PrimaryComponent> {
        let exponent = self.orders.iter().fold(1, |acc, &d| lcm(acc, d));
        let mut out = Vec::new();
        for (p, _) in factorize(exponent) {
            let mut gens = Vec::new();
            let mut multipliers = Vec::new();
            let mut orders = Vec::new();
            for (i, &d) in self.orders.iter().enumerate() {
                let mut pa = 1;
                while d % (pa * p) == 0 {
                    pa *= p;
                }
                if pa > 1 {
                    gens.push(i);
                    multipliers.push(d / pa);
                    orders.push(pa);
                }
            }
            let k = gens.len();
            let q_gen = (0..k)
                .map(|a| self.q_gen[gens[a]].mul_int((multipliers[a] * multipliers[a]) as i64))
                .collect();
            let b_gram = (0..k)
                .map(|a| {
                    (0..k)
                        .map(|b| {
                            self.b_gram[gens[a]][gens[b]]
                                .mul_int((multipliers[a] * multipliers[b]) as i64)
                        })
                        .collect()
                })
                .collect();
            let module = Self::build(orders, q_gen, b_gram).expect("p-part of a valid module");
            let mut pa = 1;
            while exponent % (pa * p) == 0 {
                pa *= p;
            }
            // CRT idempotent: 1 on the p-part, 0 on the complement
            let rest = exponent / pa;
            let idempotent = if rest == 1 {
                1
            } else {
                rest * crate::arith::mod_inverse(rest as i64, pa).expect("coprime") % exponent
            };
            out.push(PrimaryComponent {
                prime: p,
                module,
                generators: gens,
                multipliers,
                idempotent,
                parent_rank: self.rank(),
                parent_orders: self.orders.clone(),
            });
        }
        out
    }
}

/// The p-part of a module together with its embedding into the parent.
#[derive(Clone, Debug)]
pub struct PrimaryComponent {
    pub prime: u64,
    pub module: FqModule,
    /// Parent generator behind each component generator.
    pub generators: Vec<usize>,
    /// Component generator `j` is `multipliers[j]·g_{generators[j]}`.
    pub multipliers: Vec<u64>,
    idempotent: u64,
    parent_rank: usize,
    parent_orders: Vec<u64>,
}

impl PrimaryComponent {
    /// Image of a component element in the parent.
    pub fn embed(&self, c: &[u64]) -> Vec<u64> {
        let mut x = vec![0; self.parent_rank];
        for (j, &i) in self.generators.iter().enumerate() {
            x[i] = c[j] * self.multipliers[j] % self.parent_orders[i];
        }
        x
    }

    /// The p-part of a parent element, in component coordinates.
    pub fn project(&self, x: &[u64]) -> Vec<u64> {
        self.generators
            .iter()
            .enumerate()
            .map(|(j, &i)| {
                let d = self.parent_orders[i];
                let y = (x[i] as u128 * self.idempotent as u128 % d as u128) as u64;
                y / self.multipliers[j]
            })
            .collect()
    }
}

impl Serialize for FqModule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FqModuleJson {
            orders: self.orders.clone(),
            q_gen: self.q_gen.clone(),
            b_gram: self.b_gram.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FqModule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = FqModuleJson::deserialize(d)?;
        FqModule::new(raw.orders, raw.q_gen, raw.b_gram).map_err(serde::de::Error::custom)
    }
}

/// |Σ e(Q)|² as an exact rational, for the modulus check.
pub fn gauss_sum_norm(m: &FqModule) -> Option<crate::rational::Rational> {
    let g = gauss_sum(m);
    g.mul_ref(&g.conj()).as_rational()
}
