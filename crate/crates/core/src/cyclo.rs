//! Exact arithmetic in cyclotomic fields ℚ(ζ_M).
//!
//! A [`CycNumber`] is stored in the power basis `1, ζ_M, …, ζ_M^{φ(M)-1}`
//! obtained by reducing modulo the cyclotomic polynomial Φ_M. The canonical
//! form makes equality decidable; values of different conductors are compared
//! after promotion to the least common multiple.
//!
//! Reduction tables are cached per conductor in a process-wide map guarded by
//! a read/write lock. Filling is idempotent, so racing initializations are
//! harmless.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{divisors, euler_phi, exact_sqrt, factorize, lcm, mobius, modulo};
use crate::error::{Error, Result};
use crate::fqmod::FqModule;
use crate::linalg;
use crate::rational::{format_rational, parse_rational, Rational};

/// Coefficients of Φ_M, lowest degree first.
pub fn cyclotomic_polynomial(m: u64) -> Vec<i128> {
    let mut num = vec![1i128];
    let mut den = vec![1i128];
    for d in divisors(m) {
        let factor = |p: &Vec<i128>| -> Vec<i128> {
            // p * (x^d - 1)
            let d = d as usize;
            let mut out = vec![0i128; p.len() + d];
            for (i, &c) in p.iter().enumerate() {
                out[i + d] += c;
                out[i] -= c;
            }
            out
        };
        match mobius(m / d) {
            1 => num = factor(&num),
            -1 => den = factor(&den),
            _ => {}
        }
    }
    // exact division num / den; den is monic up to sign
    let lead = *den.last().unwrap();
    let mut rem = num;
    let qlen = rem.len() - den.len() + 1;
    let mut quot = vec![0i128; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + den.len() - 1] / lead;
        quot[i] = c;
        for (j, &dc) in den.iter().enumerate() {
            rem[i + j] -= c * dc;
        }
    }
    quot
}

struct Table {
    phi: usize,
    /// Canonical coordinates of ζ^e for `0 ≤ e < M`, as sparse integer terms.
    powers: Vec<Vec<(usize, i128)>>,
}

fn table(m: u64) -> Arc<Table> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<Table>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(t) = cache.read().unwrap().get(&m) {
        return t.clone();
    }
    let t = Arc::new(build_table(m));
    cache.write().unwrap().entry(m).or_insert(t).clone()
}

fn build_table(m: u64) -> Table {
    let phi = euler_phi(m) as usize;
    let poly = cyclotomic_polynomial(m);
    let mut powers = Vec::with_capacity(m as usize);
    let mut cur = vec![0i128; phi];
    cur[0] = 1;
    for _ in 0..m {
        powers.push(
            cur.iter()
                .enumerate()
                .filter(|(_, c)| **c != 0)
                .map(|(i, &c)| (i, c))
                .collect(),
        );
        // multiply by ζ and reduce the degree-φ term with Φ_M (monic)
        let top = cur[phi - 1];
        for i in (1..phi).rev() {
            cur[i] = cur[i - 1];
        }
        cur[0] = 0;
        if top != 0 {
            for i in 0..phi {
                cur[i] -= top * poly[i];
            }
        }
    }
    Table { phi, powers }
}

/// Canonical coordinates of `ζ_M^e` as sparse `(index, value)` pairs.
pub(crate) fn root_coords(m: u64, e: i64) -> Vec<(usize, i128)> {
    table(m).powers[modulo(e, m) as usize].clone()
}

pub(crate) fn phi(m: u64) -> usize {
    table(m).phi
}

/// Canonical integer coordinates of `Σ c_e ζ_M^e` for `e` in `[0, M)`.
pub(crate) fn reduce_integer(m: u64, group_ring: &[i128]) -> Vec<i128> {
    let t = table(m);
    let mut out = vec![0i128; t.phi];
    for (e, &c) in group_ring.iter().enumerate() {
        if c != 0 {
            for &(i, v) in &t.powers[e] {
                out[i] += c * v;
            }
        }
    }
    out
}

/// An element of ℚ(ζ_M) in canonical power-basis form.
#[derive(Clone, Debug)]
pub struct CycNumber {
    conductor: u64,
    coeffs: Vec<Rational>,
}

impl CycNumber {
    pub fn zero(conductor: u64) -> Self {
        let phi = euler_phi(conductor) as usize;
        CycNumber { conductor, coeffs: vec![Rational::zero(); phi] }
    }

    pub fn from_rational(r: Rational) -> Self {
        CycNumber { conductor: 1, coeffs: vec![r] }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    /// ζ_M^a.
    pub fn root_of_unity(a: i64, m: u64) -> Self {
        assert!(m >= 1, "conductor must be positive");
        Self::from_terms(m, [(a, Rational::one())])
    }

    /// e(num/den) = exp(2πi·num/den).
    pub fn e(num: i64, den: u64) -> Self {
        Self::root_of_unity(num, den)
    }

    /// Builds `Σ c·ζ_M^e` from arbitrary integer exponents.
    pub fn from_terms(m: u64, terms: impl IntoIterator<Item = (i64, Rational)>) -> Self {
        let t = table(m);
        let mut coeffs = vec![Rational::zero(); t.phi];
        for (e, c) in terms {
            if c.is_zero() {
                continue;
            }
            for &(i, v) in &t.powers[modulo(e, m) as usize] {
                coeffs[i] += &c * Rational::from_integer(BigInt::from(v));
            }
        }
        CycNumber { conductor: m, coeffs }
    }

    /// Reduces an integer group-ring vector `Σ_e c_e ζ_M^e` (`e < M`).
    pub fn from_group_ring(m: u64, group_ring: &[i128]) -> Self {
        let coeffs = reduce_integer(m, group_ring)
            .into_iter()
            .map(|c| Rational::from_integer(BigInt::from(c)))
            .collect();
        CycNumber { conductor: m, coeffs }
    }

    /// Reduces a rational group-ring vector `Σ_e c_e ζ_M^e` (`e < M`).
    pub fn from_rational_group_ring(m: u64, group_ring: &[Rational]) -> Self {
        let t = table(m);
        let mut coeffs = vec![Rational::zero(); t.phi];
        for (e, c) in group_ring.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for &(i, v) in &t.powers[e] {
                if v == 1 {
                    coeffs[i] += c;
                } else if v == -1 {
                    coeffs[i] -= c;
                } else {
                    coeffs[i] += c * Rational::from_integer(BigInt::from(v));
                }
            }
        }
        CycNumber { conductor: m, coeffs }
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// Canonical coordinates in the power basis of ℚ(ζ_M).
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Nonzero `(exponent, coefficient)` pairs of the canonical form.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|r| r.is_one())
    }

    /// The value as a rational number, if it lies in ℚ.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coeffs.iter().skip(1).all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Single-term value `c·ζ^e` as `(e, c)`, if the canonical form has one term.
    fn monomial(&self) -> Option<(usize, &Rational)> {
        let mut it = self.terms();
        let first = it.next()?;
        it.next().is_none().then_some(first)
    }

    /// Re-expresses the value in ℚ(ζ_{M'}) for a multiple `M'` of the conductor.
    pub fn promote(&self, target: u64) -> Result<Self> {
        if target % self.conductor != 0 {
            return Err(Error::InvalidArgument(format!(
                "cannot promote conductor {} to {}",
                self.conductor, target
            )));
        }
        Ok(self.promote_unchecked(target))
    }

    fn promote_unchecked(&self, target: u64) -> Self {
        if target == self.conductor {
            return self.clone();
        }
        let k = (target / self.conductor) as i64;
        Self::from_terms(target, self.terms().map(|(e, c)| (e as i64 * k, c.clone())))
    }

    /// The same value over the smallest conductor whose field contains it.
    pub fn simplified(&self) -> Self {
        if let Some(r) = self.as_rational() {
            return Self::from_rational(r);
        }
        for d in crate::arith::divisors(self.conductor) {
            if d == self.conductor {
                break;
            }
            if d % 4 == 2 || d == 1 {
                continue;
            }
            // columns: images of the power basis of ℚ(ζ_d), then the value itself
            let phi_d = euler_phi(d) as usize;
            let k = (self.conductor / d) as i64;
            let cols: Vec<CycNumber> = (0..phi_d as i64).map(|i| Self::root_of_unity(i * k, self.conductor)).collect();
            let rows: Vec<Vec<Rational>> = (0..self.coeffs.len())
                .map(|r| {
                    let mut row: Vec<Rational> = cols.iter().map(|c| c.coeffs[r].clone()).collect();
                    row.push(self.coeffs[r].clone());
                    row
                })
                .collect();
            let ech = crate::linalg::rref(rows, phi_d + 1);
            if ech.pivots.contains(&phi_d) {
                continue;
            }
            let mut coeffs = vec![Rational::zero(); phi_d];
            for (row, &p) in ech.rows.iter().zip(&ech.pivots) {
                coeffs[p] = row[phi_d].clone();
            }
            return CycNumber { conductor: d, coeffs };
        }
        self.clone()
    }

    fn common(&self, other: &Self) -> (Self, Self) {
        let m = lcm(self.conductor, other.conductor);
        (self.promote_unchecked(m), other.promote_unchecked(m))
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        if self.conductor == other.conductor {
            let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
            return CycNumber { conductor: self.conductor, coeffs };
        }
        let (a, b) = self.common(other);
        a.add_ref(&b)
    }

    pub fn sub_ref(&self, other: &Self) -> Self {
        self.add_ref(&other.neg_ref())
    }

    pub fn neg_ref(&self) -> Self {
        CycNumber { conductor: self.conductor, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        CycNumber { conductor: self.conductor, coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    /// Multiplication by ζ_M^k where `M` is the conductor.
    pub fn mul_root(&self, k: i64) -> Self {
        let m = self.conductor;
        Self::from_terms(m, self.terms().map(|(e, c)| (e as i64 + k, c.clone())))
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        if let Some(r) = other.as_rational() {
            return self.scale(&r);
        }
        if let Some(r) = self.as_rational() {
            return other.scale(&r);
        }
        if self.conductor != other.conductor {
            let (a, b) = self.common(other);
            return a.mul_ref(&b);
        }
        let m = self.conductor;
        if let Some((e, c)) = other.monomial() {
            return Self::from_terms(m, self.terms().map(|(i, a)| (i as i64 + e as i64, a * c)));
        }
        if let Some((e, c)) = self.monomial() {
            return Self::from_terms(m, other.terms().map(|(i, a)| (i as i64 + e as i64, a * c)));
        }
        let mut acc = vec![Rational::zero(); m as usize];
        for (i, a) in self.terms() {
            for (j, b) in other.terms() {
                acc[(i + j) % m as usize] += a * b;
            }
        }
        Self::from_rational_group_ring(m, &acc)
    }

    /// Complex conjugate (ζ ↦ ζ⁻¹).
    pub fn conj(&self) -> Self {
        Self::from_terms(self.conductor, self.terms().map(|(e, c)| (-(e as i64), c.clone())))
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(r) = self.as_rational() {
            return Ok(Self::from_rational(r.recip()));
        }
        if let Some((e, c)) = self.monomial() {
            return Ok(Self::from_terms(self.conductor, [(-(e as i64), c.recip())]));
        }
        // Solve x·y = 1 in the power basis: column j of the system is x·ζ^j.
        let phi = self.coeffs.len();
        let cols: Vec<Vec<Rational>> = (0..phi).map(|j| self.mul_root(j as i64).coeffs).collect();
        let a: Vec<Vec<Rational>> =
            (0..phi).map(|i| (0..phi).map(|j| cols[j][i].clone()).collect()).collect();
        let mut rhs = vec![Rational::zero(); phi];
        rhs[0] = Rational::one();
        let y = linalg::solve(&a, &rhs).ok_or(Error::DivisionByZero)?;
        Ok(CycNumber { conductor: self.conductor, coeffs: y })
    }

    pub fn div_ref(&self, other: &Self) -> Result<Self> {
        Ok(self.mul_ref(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = Self::from_int(1);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_ref(&base);
            }
        }
        Ok(acc)
    }

    /// Floating-point image under ζ_M ↦ exp(2πi/M), as `(re, im)`.
    pub fn to_complex(&self) -> (f64, f64) {
        let m = self.conductor as f64;
        self.terms().fold((0.0, 0.0), |(re, im), (e, c)| {
            let v = c.to_f64().unwrap_or(f64::NAN);
            let angle = std::f64::consts::TAU * e as f64 / m;
            (re + v * angle.cos(), im + v * angle.sin())
        })
    }
}

impl PartialEq for CycNumber {
    fn eq(&self, other: &Self) -> bool {
        if self.conductor == other.conductor {
            return self.coeffs == other.coeffs;
        }
        let (a, b) = self.common(other);
        a.coeffs == b.coeffs
    }
}

impl Eq for CycNumber {}

impl linalg::Scalar for CycNumber {
    fn zero() -> Self {
        CycNumber::zero(1)
    }
    fn one() -> Self {
        CycNumber::from_int(1)
    }
    fn is_zero(&self) -> bool {
        CycNumber::is_zero(self)
    }
    fn inverse(&self) -> Self {
        self.inv().expect("inverse of a nonzero element")
    }
    fn mul_ref(&self, other: &Self) -> Self {
        CycNumber::mul_ref(self, other)
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self = self.sub_ref(&CycNumber::mul_ref(a, b));
    }
    fn neg_ref(&self) -> Self {
        CycNumber::neg_ref(self)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $impl:ident) => {
        impl std::ops::$trait<&CycNumber> for &CycNumber {
            type Output = CycNumber;
            fn $method(self, rhs: &CycNumber) -> CycNumber {
                self.$impl(rhs)
            }
        }
        impl std::ops::$trait for CycNumber {
            type Output = CycNumber;
            fn $method(self, rhs: CycNumber) -> CycNumber {
                self.$impl(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);

impl std::ops::Neg for CycNumber {
    type Output = CycNumber;
    fn neg(self) -> CycNumber {
        self.neg_ref()
    }
}

impl fmt::Display for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.simplified();
        let mut first = true;
        for (e, c) in x.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if e == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}·ζ_{}^{e}", x.conductor)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct CycJson {
    conductor: u64,
    terms: Vec<(usize, String)>,
}

impl Serialize for CycNumber {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let x = self.simplified();
        CycJson {
            conductor: x.conductor,
            terms: x.terms().map(|(e, c)| (e, format_rational(c))).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycNumber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = CycJson::deserialize(d)?;
        if raw.conductor == 0 {
            return Err(D::Error::custom("conductor must be positive"));
        }
        let mut terms = Vec::with_capacity(raw.terms.len());
        for (e, c) in raw.terms {
            terms.push((e as i64, parse_rational(&c).map_err(D::Error::custom)?));
        }
        Ok(CycNumber::from_terms(raw.conductor, terms))
    }
}

/// √n for a perfect square `n`.
pub fn rational_sqrt(n: u64) -> Result<Rational> {
    if n == 0 {
        return Err(Error::InvalidArgument("rational_sqrt expects n ≥ 1".into()));
    }
    exact_sqrt(n)
        .map(|r| Rational::from_integer(BigInt::from(r)))
        .ok_or(Error::NotASquare(n))
}

/// The positive real square root of `n ≥ 1` as an element of a cyclotomic field,
/// built from quadratic Gauss sums (√2 = ζ₈ + ζ₈⁻¹).
pub fn sqrt_cyclotomic(n: u64) -> CycNumber {
    assert!(n >= 1);
    let mut acc = CycNumber::from_int(1);
    let mut square_part = 1u64;
    for (p, e) in factorize(n) {
        square_part *= p.pow(e / 2);
        if e % 2 == 1 {
            let root = if p == 2 {
                CycNumber::root_of_unity(1, 8).add_ref(&CycNumber::root_of_unity(-1, 8))
            } else {
                let g = CycNumber::from_terms(
                    p,
                    (0..p as i64).map(|x| (x * x, Rational::one())),
                );
                if p % 4 == 1 {
                    g
                } else {
                    // g = i·√p
                    g.mul_ref(&CycNumber::root_of_unity(-1, 4))
                }
            };
            acc = acc.mul_ref(&root);
        }
    }
    acc.scale(&Rational::from_integer(BigInt::from(square_part)))
}

/// Σ_{γ∈D} e(Q(γ)) as an element of ℚ(ζ_{lcm(8, level)}).
pub fn gauss_sum(m: &FqModule) -> CycNumber {
    let level = m.level();
    let mut counts = vec![0i128; level as usize];
    for idx in 0..m.order() {
        counts[m.q_num_index(idx) as usize] += 1;
    }
    CycNumber::from_group_ring(level, &counts).promote_unchecked(lcm(8, level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(2), vec![1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(105).len(), 49);
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(CycNumber::root_of_unity(2, 4), CycNumber::from_int(-1));
        let sum = (0..3).fold(CycNumber::zero(3), |acc, k| acc + CycNumber::root_of_unity(k, 3));
        assert!(sum.is_zero());
        for (a, b) in [(1, 2), (5, 7), (-3, 11)] {
            let lhs = CycNumber::root_of_unity(a, 12) * CycNumber::root_of_unity(b, 12);
            assert_eq!(lhs, CycNumber::root_of_unity(a + b, 12));
        }
    }

    #[test]
    fn promotion_and_inverse() {
        assert_eq!(CycNumber::root_of_unity(1, 2).promote(6).unwrap(), CycNumber::root_of_unity(3, 6));
        assert!(CycNumber::root_of_unity(1, 4).promote(6).is_err());
        let five = (0..5).fold(CycNumber::zero(5), |acc, k| acc + CycNumber::root_of_unity(k, 5));
        for m in [5, 10, 15, 60] {
            assert!(five.promote(m).unwrap().is_zero());
        }
        assert_eq!(CycNumber::root_of_unity(1, 8).inv().unwrap(), CycNumber::root_of_unity(7, 8));
        assert_eq!(CycNumber::zero(7).inv(), Err(Error::DivisionByZero));
        let x = CycNumber::from_terms(7, [(0, int(2)), (1, rat(1, 3)), (4, int(-5))]);
        assert!((x.clone() * x.inv().unwrap()).is_one());
    }

    #[test]
    fn mixed_conductors_compare_after_promotion() {
        let i = CycNumber::root_of_unity(1, 4);
        assert_eq!(i, CycNumber::root_of_unity(3, 12));
        let sum = CycNumber::root_of_unity(1, 3) + CycNumber::root_of_unity(1, 4);
        assert_eq!(sum.conductor(), 12);
    }

    #[test]
    fn square_roots() {
        assert_eq!(rational_sqrt(36).unwrap(), int(6));
        assert_eq!(rational_sqrt(1).unwrap(), int(1));
        assert_eq!(rational_sqrt(12), Err(Error::NotASquare(12)));
        for n in 1..=40u64 {
            let s = sqrt_cyclotomic(n);
            assert_eq!(s.mul_ref(&s), CycNumber::from_int(n as i64), "n = {n}");
            let (re, im) = s.to_complex();
            assert!((re - (n as f64).sqrt()).abs() < 1e-9 && im.abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn display_and_json() {
        let x = CycNumber::from_terms(5, [(0, rat(1, 2)), (2, int(-3))]);
        assert_eq!(x.to_string(), "1/2 + -3·ζ_5^2");
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, r#"{"conductor":5,"terms":[[0,"1/2"],[2,"-3/1"]]}"#);
        let back: CycNumber = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn simplification_finds_smallest_field() {
        let x = CycNumber::root_of_unity(3, 72).simplified();
        assert_eq!((x.conductor(), x.to_string()), (24, "1·ζ_24^1".to_string()));
        assert_eq!(CycNumber::root_of_unity(6, 12).simplified().conductor(), 1);
        let i = CycNumber::root_of_unity(3, 12).simplified();
        assert_eq!(i.conductor(), 4);
        assert_eq!(i, CycNumber::root_of_unity(3, 12));
        let sqrt2 = CycNumber::from_terms(24, [(3, int(1)), (21, int(1))]).simplified();
        assert_eq!(sqrt2.conductor(), 8);
        let z3 = CycNumber::root_of_unity(1, 6).simplified();
        assert_eq!(z3.conductor(), 3);
    }

    #[test]
    fn gauss_sums() {
        assert_eq!(gauss_sum(&FqModule::hyperbolic(2).unwrap()), CycNumber::from_int(2));
        assert_eq!(gauss_sum(&FqModule::trivial()), CycNumber::from_int(1));
        assert_eq!(gauss_sum(&FqModule::lnn(3, 1).unwrap()), CycNumber::from_int(3));
        let g = gauss_sum(&FqModule::lnn(6, 2).unwrap());
        assert_eq!(g.conductor(), 24);
        assert_eq!(g, CycNumber::from_int(12));
    }

    fn arb_cyc() -> impl Strategy<Value = CycNumber> {
        (
            prop::sample::select(vec![1u64, 3, 4, 5, 8, 12, 15]),
            prop::collection::vec((0i64..60, -6i64..7, 1i64..4), 0..5),
        )
            .prop_map(|(m, terms)| {
                CycNumber::from_terms(m, terms.into_iter().map(|(e, n, d)| (e, rat(n, d))))
            })
    }

    fn close(a: (f64, f64), b: (f64, f64)) -> bool {
        (a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn ring_laws(a in arb_cyc(), b in arb_cyc(), c in arb_cyc()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn inverses(a in arb_cyc()) {
            prop_assume!(!a.is_zero());
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }

        #[test]
        fn complex_embedding_agrees(a in arb_cyc(), b in arb_cyc()) {
            let (x, y) = (a.to_complex(), b.to_complex());
            let expected = (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0);
            prop_assert!(close((&a * &b).to_complex(), expected));
            prop_assert!(close(a.conj().to_complex(), (x.0, -x.1)));
        }

        #[test]
        fn canonical_form_is_stable(a in arb_cyc()) {
            let again = CycNumber::from_terms(
                a.conductor(),
                a.terms().map(|(e, c)| (e as i64, c.clone())).collect::<Vec<_>>(),
            );
            prop_assert_eq!(again.coeffs(), a.coeffs());
        }
    }
}
