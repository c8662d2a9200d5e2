//! The Weil representation on ℂ[D], its invariants and the averaging operator.
//!
//! `ρ(T)e_γ = e(Q(γ))e_γ` and `ρ(S)e_γ = e(sign/8)/√|D| · Σ_β e(−B(β, γ))e_β`.
//! By Milgram's formula `e(sign/8)/√|D| = g/|D|` with `g = Σ_γ e(Q(γ))`, so the
//! prefactor is carried as an exact cyclotomic scale and no square roots are
//! needed. Matrices and vectors store a scale times integer group-ring entries
//! `Σ_e c_e ζ_L^e` in canonical power-basis form, with `L` the level.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::arith::{factorize, is_prime, lcm, mod_inverse, modulo, pow_mod};
use crate::cyclo::{gauss_sum, reduce_integer, CycNumber};
use crate::error::{invalid, Error, Result};
use crate::fqmod::FqModule;
use crate::linalg::{self, rational_mod, rational_reconstruction, with_modulus, ModP};
use crate::rational::Rational;
use crate::subgroups::{enumerate_isotropic, enumerate_self_dual_isotropic, Subgroup};

/// A vector of ℂ[D] with exact cyclotomic coefficients, stored sparsely.
#[derive(Clone, Debug)]
pub struct GroupRingVector {
    parent: Arc<FqModule>,
    coeffs: BTreeMap<usize, CycNumber>,
}

impl GroupRingVector {
    pub fn zero(parent: &Arc<FqModule>) -> Self {
        GroupRingVector { parent: parent.clone(), coeffs: BTreeMap::new() }
    }

    /// `Σ_{γ ∈ S} e_γ`.
    pub fn indicator(parent: &Arc<FqModule>, support: &[usize]) -> Self {
        let coeffs = support.iter().map(|&i| (i, CycNumber::from_int(1))).collect();
        GroupRingVector { parent: parent.clone(), coeffs }
    }

    /// `e_γ`.
    pub fn basis(parent: &Arc<FqModule>, idx: usize) -> Self {
        Self::indicator(parent, &[idx])
    }

    pub fn from_integers(parent: &Arc<FqModule>, values: &[BigInt]) -> Self {
        let coeffs = values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (i, CycNumber::from_rational(Rational::from_integer(v.clone()))))
            .collect();
        GroupRingVector { parent: parent.clone(), coeffs }
    }

    pub fn from_i64(parent: &Arc<FqModule>, values: &[i64]) -> Self {
        let big: Vec<BigInt> = values.iter().map(|&v| BigInt::from(v)).collect();
        Self::from_integers(parent, &big)
    }

    pub fn from_map(parent: &Arc<FqModule>, coeffs: BTreeMap<usize, CycNumber>) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        GroupRingVector { parent: parent.clone(), coeffs }
    }

    pub fn parent(&self) -> &Arc<FqModule> {
        &self.parent
    }

    pub fn get(&self, idx: usize) -> CycNumber {
        self.coeffs.get(&idx).cloned().unwrap_or_else(|| CycNumber::zero(1))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &CycNumber)> {
        self.coeffs.iter().map(|(&i, c)| (i, c))
    }

    pub fn support_size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (&i, c) in &other.coeffs {
            let v = coeffs.get(&i).map_or_else(|| c.clone(), |a| a.add_ref(c));
            coeffs.insert(i, v);
        }
        Self::from_map(&self.parent, coeffs)
    }

    pub fn scale(&self, s: &CycNumber) -> Self {
        let coeffs = self.coeffs.iter().map(|(&i, c)| (i, c.mul_ref(s))).collect();
        Self::from_map(&self.parent, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&CycNumber::from_int(-1)))
    }

    /// Dense rational coordinates, if every coefficient is rational.
    pub fn to_rational_dense(&self) -> Option<Vec<Rational>> {
        let mut out = vec![Rational::zero(); self.parent.order()];
        for (&i, c) in &self.coeffs {
            out[i] = c.as_rational()?;
        }
        Some(out)
    }
}

impl PartialEq for GroupRingVector {
    fn eq(&self, other: &Self) -> bool {
        *self.parent == *other.parent && self.coeffs == other.coeffs
    }
}

impl Serialize for GroupRingVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<(Vec<u64>, &CycNumber)> =
            self.coeffs.iter().map(|(&i, c)| (self.parent.coords(i), c)).collect();
        let mut st = s.serialize_struct("GroupRingVector", 1)?;
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

fn canonicalize(m: u64, slot: &mut [i128]) {
    if slot.iter().all(|&c| c == 0) {
        return;
    }
    let r = reduce_integer(m, slot);
    slot.fill(0);
    slot[..r.len()].copy_from_slice(&r);
}

fn content(data: &[i128]) -> i128 {
    data.iter().fold(0i128, |g, &x| g.gcd(&x))
}

fn rational_of(n: i128) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exact cyclotomic value of a group-ring slot times a scale.
fn slot_value(m: u64, scale: &CycNumber, slot: &[i128]) -> CycNumber {
    CycNumber::from_group_ring(m, slot).mul_ref(scale)
}

/// Row `β` of the bilinear form as numerators `L·B(β, γ) mod L` for all γ.
fn b_row(m: &FqModule, beta: usize) -> Vec<u64> {
    let l = m.level();
    let bc = m.coords(beta);
    let k = m.rank();
    // c_j = L·B(β, g_j)
    let cj: Vec<u64> = (0..k)
        .map(|j| {
            let mut e = vec![0; k];
            e[j] = 1;
            m.b_num_coords(&bc, &e)
        })
        .collect();
    (0..m.order())
        .map(|g| {
            let gc = m.coords(g);
            gc.iter().zip(&cj).fold(0u64, |acc, (&x, &c)| (acc + x * c) % l)
        })
        .collect()
}

/// A matrix `scale · (Σ_e A_e ζ_L^e)` acting on ℂ[D].
#[derive(Clone, Debug)]
pub struct WeilMatrix {
    dim: usize,
    conductor: u64,
    scale: CycNumber,
    entries: Vec<i128>,
}

impl WeilMatrix {
    pub fn identity(dim: usize, conductor: u64) -> Self {
        let m = conductor as usize;
        let mut entries = vec![0i128; dim * dim * m];
        for i in 0..dim {
            entries[(i * dim + i) * m] = 1;
        }
        WeilMatrix { dim, conductor, scale: CycNumber::from_int(1), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    fn slot(&self, r: usize, c: usize) -> &[i128] {
        let m = self.conductor as usize;
        let off = (r * self.dim + c) * m;
        &self.entries[off..off + m]
    }

    /// Entry in row `r`, column `c`.
    pub fn entry(&self, r: usize, c: usize) -> CycNumber {
        slot_value(self.conductor, &self.scale, self.slot(r, c))
    }

    fn normalize(&mut self) {
        let m = self.conductor as usize;
        for s in self.entries.chunks_mut(m) {
            canonicalize(self.conductor, s);
        }
        let g = content(&self.entries);
        if g > 1 {
            for x in self.entries.iter_mut() {
                *x /= g;
            }
            self.scale = self.scale.scale(&rational_of(g));
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.conductor, other.conductor);
        let n = self.dim;
        let m = self.conductor as usize;
        let sparse = |w: &WeilMatrix| -> Vec<Vec<(usize, i128)>> {
            w.entries
                .chunks(m)
                .map(|s| s.iter().enumerate().filter(|(_, c)| **c != 0).map(|(e, &c)| (e, c)).collect())
                .collect()
        };
        let a = sparse(self);
        let b = sparse(other);
        let mut entries = vec![0i128; n * n * m];
        for r in 0..n {
            for k in 0..n {
                let ark = &a[r * n + k];
                if ark.is_empty() {
                    continue;
                }
                for c in 0..n {
                    let bkc = &b[k * n + c];
                    if bkc.is_empty() {
                        continue;
                    }
                    let out = &mut entries[(r * n + c) * m..(r * n + c + 1) * m];
                    for &(e1, c1) in ark {
                        for &(e2, c2) in bkc {
                            out[(e1 + e2) % m] += c1 * c2;
                        }
                    }
                }
            }
        }
        let mut w = WeilMatrix {
            dim: n,
            conductor: self.conductor,
            scale: self.scale.mul_ref(&other.scale),
            entries,
        };
        w.normalize();
        w
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::identity(self.dim, self.conductor), |acc, _| acc.mul(self))
    }

    /// Complex conjugate transpose.
    pub fn conj_transpose(&self) -> Self {
        let n = self.dim;
        let m = self.conductor as usize;
        let mut entries = vec![0i128; n * n * m];
        for r in 0..n {
            for c in 0..n {
                let src = self.slot(r, c);
                let dst = &mut entries[(c * n + r) * m..(c * n + r + 1) * m];
                for (e, &v) in src.iter().enumerate() {
                    dst[(m - e) % m] += v;
                }
            }
        }
        let mut w = WeilMatrix { dim: n, conductor: self.conductor, scale: self.scale.conj(), entries };
        w.normalize();
        w
    }

    /// Exact equality of the represented matrices.
    pub fn equals(&self, other: &Self) -> bool {
        if self.dim != other.dim || self.conductor != other.conductor {
            return false;
        }
        // a·A = b·B  ⇔  A = (b/a)·B; rational ratios compare integer data directly
        let ratio = match other.scale.div_ref(&self.scale) {
            Ok(r) => r,
            Err(_) => return other.entries.iter().all(|&x| x == 0) && self.scale.is_zero(),
        };
        if let Some(r) = ratio.as_rational() {
            let (p, q) = (r.numer().clone(), r.denom().clone());
            return self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(&x, &y)| BigInt::from(x) * &q == BigInt::from(y) * &p);
        }
        let m = self.conductor as usize;
        self.entries.chunks(m).zip(other.entries.chunks(m)).all(|(x, y)| {
            CycNumber::from_group_ring(self.conductor, x)
                == CycNumber::from_group_ring(self.conductor, y).mul_ref(&ratio)
        })
    }

    pub fn is_identity(&self) -> bool {
        self.equals(&Self::identity(self.dim, self.conductor))
    }

    /// `A·v`.
    pub fn apply(&self, v: &GroupRingVector) -> GroupRingVector {
        let n = self.dim;
        let mut coeffs = BTreeMap::new();
        for r in 0..n {
            let mut acc = CycNumber::zero(1);
            for (c, x) in v.iter() {
                let s = self.slot(r, c);
                if s.iter().any(|&e| e != 0) {
                    acc = acc.add_ref(&CycNumber::from_group_ring(self.conductor, s).mul_ref(x));
                }
            }
            coeffs.insert(r, acc.mul_ref(&self.scale));
        }
        GroupRingVector::from_map(v.parent(), coeffs)
    }
}

/// Precomputed data of the Weil representation of one module.
#[derive(Clone, Debug)]
pub struct WeilRep {
    module: Arc<FqModule>,
    level: u64,
    q: Vec<u64>,
    /// `g/|D| = e(sign/8)/√|D|`.
    s_scale: CycNumber,
}

impl WeilRep {
    pub fn new(module: &Arc<FqModule>) -> Self {
        let q = (0..module.order()).map(|i| module.q_num_index(i)).collect();
        let g = gauss_sum(module);
        let s_scale = g.scale(&Rational::new(BigInt::one(), BigInt::from(module.order())));
        WeilRep { module: module.clone(), level: module.level(), q, s_scale }
    }

    pub fn module(&self) -> &Arc<FqModule> {
        &self.module
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.module.order()
    }

    pub fn s_scale(&self) -> &CycNumber {
        &self.s_scale
    }

    pub fn is_isotropic(&self, idx: usize) -> bool {
        self.q[idx] == 0
    }

    pub fn isotropic_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.q[i] == 0).collect()
    }

    pub fn rho_t_power(&self, k: i64) -> WeilMatrix {
        let n = self.dim();
        let m = self.level as usize;
        let mut w = WeilMatrix::identity(n, self.level);
        w.entries.fill(0);
        for i in 0..n {
            let e = modulo(k * self.q[i] as i64, self.level) as usize;
            w.entries[(i * n + i) * m + e] = 1;
        }
        w.normalize();
        w
    }

    pub fn rho_t(&self) -> WeilMatrix {
        self.rho_t_power(1)
    }

    pub fn rho_s(&self) -> WeilMatrix {
        let n = self.dim();
        let m = self.level as usize;
        let mut entries = vec![0i128; n * n * m];
        for beta in 0..n {
            for (gamma, b) in b_row(&self.module, beta).into_iter().enumerate() {
                let e = (m - b as usize) % m;
                entries[(beta * n + gamma) * m + e] = 1;
            }
        }
        let mut w = WeilMatrix { dim: n, conductor: self.level, scale: self.s_scale.clone(), entries };
        w.normalize();
        w
    }

    /// `ρ` of an SL₂(ℤ) word, as a matrix.
    pub fn rho_word(&self, word: &Sl2Word) -> WeilMatrix {
        let s = self.rho_s();
        word.tokens.iter().fold(WeilMatrix::identity(self.dim(), self.level), |acc, t| match t {
            Sl2Token::S => acc.mul(&s),
            Sl2Token::T(k) => acc.mul(&self.rho_t_power(*k)),
        })
    }

    /// `ρ(mat)` for an integer matrix of determinant 1.
    pub fn rho(&self, mat: [[i64; 2]; 2]) -> Result<WeilMatrix> {
        Ok(self.rho_word(&sl2_word(mat)?))
    }

    /// `P_iso ∘ ρ(S)`: the T-average projects onto isotropic coordinates.
    pub fn averaging_operator(&self) -> WeilMatrix {
        let mut w = self.rho_s();
        let n = self.dim();
        let m = self.level as usize;
        for beta in (0..n).filter(|&b| !self.is_isotropic(b)) {
            w.entries[beta * n * m..(beta + 1) * n * m].fill(0);
        }
        w
    }

    fn pack(&self, v: &GroupRingVector) -> Packed {
        let mut m = self.level;
        for (_, c) in v.iter() {
            m = lcm(m, c.conductor());
        }
        let den = v.iter().fold(BigInt::one(), |acc, (_, c)| {
            c.coeffs().iter().fold(acc, |a, r| a.lcm(r.denom()))
        });
        let mu = m as usize;
        let mut data = vec![0i128; self.dim() * mu];
        for (i, c) in v.iter() {
            let c = c.promote(m).expect("conductor divides the lcm");
            for (e, r) in c.terms() {
                let x = (r * Rational::from_integer(den.clone())).to_integer();
                data[i * mu + e] = x.to_i128().expect("coefficient fits in i128");
            }
        }
        let scale = CycNumber::from_rational(Rational::new(BigInt::one(), den));
        Packed { conductor: m, scale, data }
    }

    fn unpack(&self, p: &Packed) -> GroupRingVector {
        let mu = p.conductor as usize;
        let coeffs = (0..self.dim())
            .filter_map(|i| {
                let slot = &p.data[i * mu..(i + 1) * mu];
                slot.iter().any(|&x| x != 0).then(|| (i, slot_value(p.conductor, &p.scale, slot)))
            })
            .collect();
        GroupRingVector::from_map(&self.module, coeffs)
    }

    fn packed_s(&self, p: &Packed) -> Packed {
        let n = self.dim();
        let mu = p.conductor as usize;
        let stretch = (p.conductor / self.level) as usize;
        let nonzero: Vec<usize> = (0..n).filter(|&g| p.data[g * mu..(g + 1) * mu].iter().any(|&x| x != 0)).collect();
        let mut data = vec![0i128; n * mu];
        for beta in 0..n {
            let row = b_row(&self.module, beta);
            let out = &mut data[beta * mu..(beta + 1) * mu];
            for &g in &nonzero {
                let shift = (mu - row[g] as usize * stretch) % mu;
                for (e, &x) in p.data[g * mu..(g + 1) * mu].iter().enumerate() {
                    if x != 0 {
                        out[(e + shift) % mu] += x;
                    }
                }
            }
        }
        let mut out = Packed { conductor: p.conductor, scale: p.scale.mul_ref(&self.s_scale), data };
        out.normalize();
        out
    }

    fn packed_t(&self, p: &Packed, k: i64) -> Packed {
        let mu = p.conductor as usize;
        let stretch = (p.conductor / self.level) as i64;
        let mut data = vec![0i128; p.data.len()];
        for g in 0..self.dim() {
            let shift = modulo(k * self.q[g] as i64 * stretch, p.conductor) as usize;
            for e in 0..mu {
                data[g * mu + (e + shift) % mu] = p.data[g * mu + e];
            }
        }
        let mut out = Packed { conductor: p.conductor, scale: p.scale.clone(), data };
        out.normalize();
        out
    }

    pub fn apply_s(&self, v: &GroupRingVector) -> GroupRingVector {
        self.unpack(&self.packed_s(&self.pack(v)))
    }

    pub fn apply_t(&self, v: &GroupRingVector, k: i64) -> GroupRingVector {
        self.unpack(&self.packed_t(&self.pack(v), k))
    }

    /// `ρ(word)·v`, applying the rightmost token first.
    pub fn apply_word(&self, word: &Sl2Word, v: &GroupRingVector) -> GroupRingVector {
        let mut p = self.pack(v);
        for t in word.tokens.iter().rev() {
            p = match t {
                Sl2Token::S => self.packed_s(&p),
                Sl2Token::T(k) => self.packed_t(&p, *k),
            };
        }
        self.unpack(&p)
    }

    pub fn apply(&self, mat: [[i64; 2]; 2], v: &GroupRingVector) -> Result<GroupRingVector> {
        Ok(self.apply_word(&sl2_word(mat)?, v))
    }

    /// Whether `ρ(S)v = v` holds exactly for an integer vector supported anywhere.
    fn fixed_by_s(&self, v: &[BigInt]) -> bool {
        let n = self.dim();
        let l = self.level as usize;
        let support: Vec<(usize, i128)> = v
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, x)| (i, x.to_i128().expect("small invariant coordinates")))
            .collect();
        let rational_scale = self.s_scale.as_rational();
        let mut slot = vec![0i128; l];
        for beta in 0..n {
            slot.fill(0);
            let row = b_row(&self.module, beta);
            for &(g, x) in &support {
                slot[(l - row[g] as usize) % l] += x;
            }
            let target = Rational::from_integer(v[beta].clone());
            let ok = match &rational_scale {
                // s·Σ = v_β with rational s: the group-ring sum must be rational
                Some(s) => {
                    canonicalize(self.level, &mut slot);
                    slot[1..].iter().all(|&x| x == 0) && s * rational_of(slot[0]) == target
                }
                None => slot_value(self.level, &self.s_scale, &slot) == CycNumber::from_rational(target),
            };
            if !ok {
                return false;
            }
        }
        true
    }

    /// Basis of the SL₂(ℤ)-invariants as primitive integer vectors.
    pub fn invariant_space(&self) -> InvariantSpace {
        self.modular_invariants().unwrap_or_else(|| self.exact_invariants())
    }

    /// Kernel over 𝔽_ℓ (an upper bound on the dimension) lifted to ℚ by rational
    /// reconstruction and certified by exact invariance checks.
    fn modular_invariants(&self) -> Option<InvariantSpace> {
        let iso = self.isotropic_indices();
        let n = self.dim();
        let conductor = lcm(self.level, self.s_scale.conductor());
        let (ell, omega) = ntt_prime(conductor);
        let kernel = with_modulus(ell, || {
            let powers: Vec<u64> = (0..conductor).map(|e| pow_mod(omega, e, ell)).collect();
            let image = |x: &CycNumber| -> Option<u64> {
                let x = x.promote(conductor).ok()?;
                let mut acc = 0u64;
                for (e, c) in x.terms() {
                    let c = rational_mod(c, ell)?;
                    acc = (acc as u128 + c as u128 * powers[e] as u128 % ell as u128) as u64 % ell;
                }
                Some(acc)
            };
            let s = image(&self.s_scale)?;
            let stretch = (conductor / self.level) as usize;
            let cu = conductor as usize;
            let rows: Vec<Vec<ModP>> = (0..n)
                .map(|beta| {
                    let row = b_row(&self.module, beta);
                    iso.iter()
                        .map(|&g| {
                            let e = (cu - row[g] as usize * stretch) % cu;
                            let mut v = ModP::new((s as u128 * powers[e] as u128 % ell as u128) as u64);
                            if g == beta {
                                v = ModP::new(v.value + ell - 1);
                            }
                            v
                        })
                        .collect()
                })
                .collect();
            let ech = linalg::rref(rows, iso.len());
            Some(ech.kernel())
        })?;
        let mut basis = Vec::with_capacity(kernel.len());
        for k in kernel {
            let rat: Option<Vec<Rational>> =
                k.iter().map(|x| rational_reconstruction(x.value, ell)).collect();
            let mut dense = vec![Rational::zero(); n];
            for (j, r) in rat?.into_iter().enumerate() {
                dense[iso[j]] = r;
            }
            let ints = linalg::primitive_integer_vector(&dense);
            if ints.iter().any(|x| x.abs() > BigInt::from(i64::MAX)) || !self.fixed_by_s(&ints) {
                return None;
            }
            basis.push(ints);
        }
        // reconstructed vectors keep the unit-pivot pattern, hence are independent
        Some(InvariantSpace { dimension: basis.len(), basis, method: KernelMethod::ModularCertified })
    }

    /// Exact elimination over the cyclotomic field.
    pub fn exact_invariants(&self) -> InvariantSpace {
        let iso = self.isotropic_indices();
        let n = self.dim();
        let l = self.level as usize;
        let rows: Vec<Vec<CycNumber>> = (0..n)
            .map(|beta| {
                let row = b_row(&self.module, beta);
                iso.iter()
                    .map(|&g| {
                        let e = (l - row[g] as usize) % l;
                        let v = CycNumber::root_of_unity(e as i64, self.level).mul_ref(&self.s_scale);
                        if g == beta {
                            v.sub_ref(&CycNumber::from_int(1))
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        let kernel = linalg::rref(rows, iso.len()).kernel();
        let basis: Vec<Vec<BigInt>> = kernel
            .into_iter()
            .map(|k| {
                let mut dense = vec![Rational::zero(); n];
                for (j, x) in k.into_iter().enumerate() {
                    dense[iso[j]] = x.as_rational().expect("invariants are rational");
                }
                linalg::primitive_integer_vector(&dense)
            })
            .collect();
        InvariantSpace { dimension: basis.len(), basis, method: KernelMethod::ExactCyclotomic }
    }
}

#[derive(Clone, Debug)]
struct Packed {
    conductor: u64,
    scale: CycNumber,
    data: Vec<i128>,
}

impl Packed {
    fn normalize(&mut self) {
        let m = self.conductor as usize;
        for s in self.data.chunks_mut(m) {
            canonicalize(self.conductor, s);
        }
        let g = content(&self.data);
        if g > 1 {
            for x in self.data.iter_mut() {
                *x /= g;
            }
            self.scale = self.scale.scale(&rational_of(g));
        }
    }
}

/// A prime `ℓ ≡ 1 (mod m)` just above 2⁶¹ and a primitive m-th root of unity mod ℓ.
fn ntt_prime(m: u64) -> (u64, u64) {
    let mut k = (1u64 << 61) / m;
    let ell = loop {
        let candidate = k * m + 1;
        if is_prime(candidate) {
            break candidate;
        }
        k += 1;
    };
    let primes: Vec<u64> = factorize(m).into_iter().map(|(p, _)| p).collect();
    let omega = (2..)
        .map(|x| pow_mod(x, (ell - 1) / m, ell))
        .find(|&w| primes.iter().all(|&p| pow_mod(w, m / p, ell) != 1))
        .expect("a primitive root exists");
    (ell, omega)
}

/// How an invariant basis was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    ModularCertified,
    ExactCyclotomic,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantSpace {
    pub dimension: usize,
    /// Primitive integer vectors indexed by element index.
    #[serde(serialize_with = "serialize_basis")]
    pub basis: Vec<Vec<BigInt>>,
    pub method: KernelMethod,
}

fn serialize_basis<S: Serializer>(basis: &[Vec<BigInt>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let as_strings: Vec<Vec<serde_json::Value>> = basis
        .iter()
        .map(|v| {
            v.iter()
                .map(|x| match x.to_i64() {
                    Some(i) => serde_json::Value::from(i),
                    None => serde_json::Value::from(x.to_string()),
                })
                .collect()
        })
        .collect();
    as_strings.serialize(s)
}

/// Invariant subspace of `ρ_D` for a module.
pub fn invariant_space(m: &Arc<FqModule>) -> InvariantSpace {
    WeilRep::new(m).invariant_space()
}

/// Exact rank over ℚ of integer row vectors.
pub fn rational_rank(rows: &[Vec<BigInt>]) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let rat: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect())
        .collect();
    linalg::rank(rat, ncols)
}

pub fn indicator_row(m: &FqModule, h: &Subgroup) -> Vec<BigInt> {
    let mut row = vec![BigInt::zero(); m.order()];
    for &e in h.elements() {
        row[e] = BigInt::one();
    }
    row
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpanReport {
    pub invariant_dimension: usize,
    pub family_size: usize,
    pub family_rank: usize,
    pub joint_rank: usize,
}

/// Checks `span{v^H : H self-dual isotropic} = invariants` by mutual ranks.
pub fn verify_self_dual_span(m: &Arc<FqModule>) -> Result<SpanReport> {
    let family = enumerate_self_dual_isotropic(m)?;
    if family.is_empty() {
        return Err(Error::Unsupported("the module has no self-dual isotropic subgroup".into()));
    }
    let rows: Vec<Vec<BigInt>> = family.iter().map(|h| indicator_row(m, h)).collect();
    let inv = invariant_space(m);
    let family_rank = rational_rank(&rows);
    let mut joint = rows.clone();
    joint.extend(inv.basis.iter().cloned());
    let report = SpanReport {
        invariant_dimension: inv.dimension,
        family_size: family.len(),
        family_rank,
        joint_rank: rational_rank(&joint),
    };
    if report.family_rank != report.invariant_dimension || report.joint_rank != report.family_rank {
        return Err(Error::Violation(format!("spans differ: {report:?}")));
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sl2Token {
    S,
    T(i64),
}

/// A product of `S` and `T^k` evaluating to `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sl2Word {
    pub tokens: Vec<Sl2Token>,
    pub target: [[i64; 2]; 2],
}

pub fn mat_mul(a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub const MAT_S: [[i64; 2]; 2] = [[0, -1], [1, 0]];

pub fn mat_t(k: i64) -> [[i64; 2]; 2] {
    [[1, k], [0, 1]]
}

impl Sl2Word {
    pub fn evaluate(&self) -> [[i64; 2]; 2] {
        self.tokens.iter().fold([[1, 0], [0, 1]], |acc, t| match t {
            Sl2Token::S => mat_mul(acc, MAT_S),
            Sl2Token::T(k) => mat_mul(acc, mat_t(*k)),
        })
    }
}

impl std::fmt::Display for Sl2Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.tokens.is_empty() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self
            .tokens
            .iter()
            .map(|t| match t {
                Sl2Token::S => "S".to_string(),
                Sl2Token::T(k) => format!("T^{k}"),
            })
            .collect();
        write!(f, "{}", parts.join("·"))
    }
}

/// Continued-fraction decomposition: repeatedly split off `T^k·S` until the
/// lower-left entry vanishes, then finish with `±T^m` (using `−I = S²`).
pub fn sl2_word(mat: [[i64; 2]; 2]) -> Result<Sl2Word> {
    let [[a, b], [c, d]] = mat;
    if a * d - b * c != 1 {
        return invalid(format!("{mat:?} does not have determinant 1"));
    }
    let mut tokens = Vec::new();
    let (mut a, mut b, mut c, mut d) = (a, b, c, d);
    while c != 0 {
        let k = a.div_euclid(c);
        // M = T^k·S·M' with M' = S⁻¹·T^{−k}·M
        let (a1, b1) = (a - k * c, b - k * d);
        if k != 0 {
            tokens.push(Sl2Token::T(k));
        }
        tokens.push(Sl2Token::S);
        (a, b, c, d) = (c, d, -a1, -b1);
    }
    if a == 1 {
        if b != 0 {
            tokens.push(Sl2Token::T(b));
        }
    } else {
        // [[−1, b], [0, −1]] = S²·T^{−b}
        tokens.push(Sl2Token::S);
        tokens.push(Sl2Token::S);
        if b != 0 {
            tokens.push(Sl2Token::T(-b));
        }
    }
    let _ = d;
    let word = Sl2Word { tokens, target: mat };
    debug_assert_eq!(word.evaluate(), mat);
    Ok(word)
}

/// Representative of `M_u` with lower row `(N, u mod N)` and upper row
/// `(u⁻¹, (u·u⁻¹ − 1)/N)`, residues taken in `[0, N)`. With the sign
/// convention of `ρ(S)` used here, `Γ₀(N)` sends isotropic `e_γ` to `e_{dγ}`.
pub fn mu_matrix(u: i64, n: u64) -> Result<[[i64; 2]; 2]> {
    if n == 0 {
        return invalid("N must be positive");
    }
    let Some(d) = mod_inverse(u, n) else {
        return invalid(format!("{u} is not a unit modulo {n}"));
    };
    if n == 1 {
        return Ok([[0, -1], [1, 1]]);
    }
    let a = d as i64;
    let d = modulo(u, n) as i64;
    let n = n as i64;
    Ok([[a, (a * d - 1) / n], [n, d]])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MuReport {
    pub u: i64,
    pub matrix: [[i64; 2]; 2],
    pub word: String,
    pub checked: usize,
    /// Isotropic elements whose image is not `e_{uγ}`.
    pub violations: Vec<Vec<u64>>,
}

/// Checks `ρ(M_u)e_γ = e_{uγ}` for every isotropic γ.
pub fn verify_mu(rep: &WeilRep, u: i64) -> Result<MuReport> {
    let matrix = mu_matrix(u, rep.level())?;
    let word = sl2_word(matrix)?;
    let m = rep.module();
    let mut violations = Vec::new();
    let iso = rep.isotropic_indices();
    for &g in &iso {
        let image = rep.apply_word(&word, &GroupRingVector::basis(m, g));
        let expected = GroupRingVector::basis(m, m.scale_idx(g, u));
        if image != expected {
            violations.push(m.coords(g));
        }
    }
    Ok(MuReport { u, matrix, word: word.to_string(), checked: iso.len(), violations })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PosetReport {
    pub isotropic_subgroups: usize,
    pub self_dual: usize,
    pub fixed_dimension: usize,
    pub self_dual_rank: usize,
}

/// Fixed space of the averaging operator on `span{v^H : H isotropic}` versus the
/// span of the self-dual ones; also checks `Mv^H = |H|/√|D| · 1_{iso ∩ H^⊥}` and
/// the triangular shape `Mv^H ∈ span{v^{H'} : H' ⊇ H}`.
pub fn verify_poset_basis(m: &Arc<FqModule>) -> Result<PosetReport> {
    let rep = WeilRep::new(m);
    let iso = enumerate_isotropic(m)?;
    let root = crate::cyclo::rational_sqrt(m.order() as u64)?;
    let mut images = Vec::with_capacity(iso.len());
    for h in &iso {
        let mv = {
            let s = rep.apply_s(&h.characteristic_vector());
            let kept = s.iter().filter(|(i, _)| rep.is_isotropic(*i)).map(|(i, c)| (i, c.clone())).collect();
            GroupRingVector::from_map(m, kept)
        };
        let perp = h.complement();
        let support: Vec<usize> = perp.elements().iter().copied().filter(|&i| rep.is_isotropic(i)).collect();
        let factor = Rational::from_integer(BigInt::from(h.order())) / &root;
        let expected = GroupRingVector::indicator(m, &support).scale(&CycNumber::from_rational(factor));
        if mv != expected {
            return Err(Error::Violation(format!("M v^H formula fails for {:?}", h.elements())));
        }
        let dense = mv.to_rational_dense().expect("rational image");
        let above: Vec<Vec<Rational>> = iso
            .iter()
            .filter(|k| h.is_subgroup_of(k))
            .map(|k| indicator_row(m, k).into_iter().map(Rational::from_integer).collect())
            .collect();
        let r0 = linalg::rank(above.clone(), m.order());
        let mut with = above;
        with.push(dense.clone());
        if linalg::rank(with, m.order()) != r0 {
            return Err(Error::Violation(format!("M v^H leaves the upper set of {:?}", h.elements())));
        }
        if (h.order() * h.order() == m.order()) != (mv == h.characteristic_vector()) {
            return Err(Error::Violation("diagonal coefficient 1 exactly on self-dual groups".into()));
        }
        images.push(dense);
    }
    // Σ c_H (Mv^H − v^H) = 0 parametrizes the fixed vectors Σ c_H v^H
    let diffs: Vec<Vec<Rational>> = iso
        .iter()
        .zip(&images)
        .map(|(h, img)| {
            let v = indicator_row(m, h);
            img.iter().zip(v).map(|(a, b)| a - Rational::from_integer(b)).collect()
        })
        .collect();
    let coefficients = linalg::left_kernel(&diffs, m.order());
    let fixed: Vec<Vec<Rational>> = coefficients
        .iter()
        .map(|c| {
            let mut acc = vec![Rational::zero(); m.order()];
            for (ch, h) in c.iter().zip(&iso) {
                if !ch.is_zero() {
                    for &e in h.elements() {
                        acc[e] += ch;
                    }
                }
            }
            acc
        })
        .collect();
    let self_dual: Vec<Vec<Rational>> = iso
        .iter()
        .filter(|h| h.order() * h.order() == m.order())
        .map(|h| indicator_row(m, h).into_iter().map(Rational::from_integer).collect())
        .collect();
    let fixed_dimension = linalg::rank(fixed.clone(), m.order());
    let self_dual_rank = linalg::rank(self_dual.clone(), m.order());
    let mut joint = fixed;
    joint.extend(self_dual.iter().cloned());
    let report = PosetReport {
        isotropic_subgroups: iso.len(),
        self_dual: self_dual.len(),
        fixed_dimension,
        self_dual_rank,
    };
    if linalg::rank(joint, m.order()) != fixed_dimension || fixed_dimension != self_dual_rank {
        return Err(Error::Violation(format!("fixed space differs from self-dual span: {report:?}")));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{sigma0, units_mod};
    use crate::subgroups::enumerate_subgroups;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn module(n: i64, np: i64) -> Arc<FqModule> {
        Arc::new(FqModule::lnn(n, np).unwrap())
    }

    fn random_sl2(rng: &mut ChaCha8Rng) -> [[i64; 2]; 2] {
        let mut m = [[1, 0], [0, 1]];
        for _ in 0..rng.gen_range(1..6) {
            let k = rng.gen_range(-4..=4);
            m = mat_mul(m, mat_t(k));
            if rng.gen_bool(0.7) {
                m = mat_mul(m, MAT_S);
            }
        }
        m
    }

    #[test]
    fn words_round_trip() {
        assert!(sl2_word([[1, 0], [0, 1]]).unwrap().tokens.is_empty());
        let st = mat_mul(MAT_S, mat_t(1));
        assert_eq!(sl2_word(st).unwrap().evaluate(), st);
        assert!(sl2_word([[1, 1], [1, 1]]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let m = random_sl2(&mut rng);
            assert_eq!(sl2_word(m).unwrap().evaluate(), m);
        }
        for m in [[[-1, 0], [0, -1]], [[-1, 3], [0, -1]], [[2, 1], [1, 1]], [[5, 2], [-3, -1]]] {
            assert_eq!(sl2_word(m).unwrap().evaluate(), m);
        }
    }

    #[test]
    fn s_on_d21() {
        let m = module(2, 1);
        let rep = WeilRep::new(&m);
        let e0 = GroupRingVector::basis(&m, 0);
        assert_eq!(rep.apply_t(&e0, 1), e0);
        let half = CycNumber::from_rational(crate::rational::rat(1, 2));
        let expected = GroupRingVector::indicator(&m, &[0, 1, 2, 3]).scale(&half);
        assert_eq!(rep.apply_s(&e0), expected);
        assert_eq!(rep.rho_s().apply(&e0), expected);
    }

    #[test]
    fn s_squared_is_negation() {
        for n in 1..=6 {
            let m = module(n, 1);
            let rep = WeilRep::new(&m);
            let s2 = rep.rho_s().pow(2);
            for g in 0..m.order() {
                let image = s2.apply(&GroupRingVector::basis(&m, g));
                assert_eq!(image, GroupRingVector::basis(&m, m.neg_idx(g)));
            }
        }
    }

    #[test]
    fn relations_small() {
        for (n, np) in [(2, 1), (3, 1), (4, 1), (2, 2)] {
            let rep = WeilRep::new(&module(n, np));
            let s = rep.rho_s();
            let t = rep.rho_t();
            assert!(s.pow(4).is_identity());
            let st = s.mul(&t);
            assert!(st.pow(3).equals(&s.pow(2)));
            assert!(s.mul(&s.conj_transpose()).is_identity());
            assert!(t.mul(&t.conj_transpose()).is_identity());
        }
    }

    #[test]
    fn matrices_agree_with_vector_action() {
        let m = module(3, 1);
        let rep = WeilRep::new(&m);
        let mat = [[2, 1], [1, 1]];
        let w = rep.rho(mat).unwrap();
        for g in [0, 1, 4, 7] {
            let v = GroupRingVector::basis(&m, g);
            assert_eq!(w.apply(&v), rep.apply(mat, &v).unwrap());
        }
    }

    #[test]
    fn s_on_characteristic_functions() {
        for (n, np) in [(4, 1), (2, 2), (6, 1)] {
            let m = module(n, np);
            let rep = WeilRep::new(&m);
            let root = crate::cyclo::rational_sqrt(m.order() as u64).unwrap();
            for h in enumerate_subgroups(&m).unwrap() {
                let factor = Rational::from_integer(BigInt::from(h.order())) / &root;
                let expected = h.complement().characteristic_vector().scale(&CycNumber::from_rational(factor));
                assert_eq!(rep.apply_s(&h.characteristic_vector()), expected);
            }
        }
    }

    #[test]
    fn invariant_dimensions() {
        assert_eq!(invariant_space(&module(6, 1)).dimension, 4);
        assert_eq!(invariant_space(&module(2, 2)).dimension, 5);
        assert_eq!(invariant_space(&Arc::new(FqModule::trivial())).dimension, 1);
        for n in 1..=8 {
            assert_eq!(invariant_space(&module(n, 1)).dimension as u64, sigma0(n as u64));
        }
    }

    #[test]
    fn modular_kernel_matches_exact_elimination() {
        for (n, np) in [(2, 1), (3, 1), (4, 1), (2, 2), (6, 1)] {
            let rep = WeilRep::new(&module(n, np));
            let fast = rep.invariant_space();
            assert_eq!(fast.method, KernelMethod::ModularCertified);
            let exact = rep.exact_invariants();
            assert_eq!(fast.basis, exact.basis);
        }
        // a module of odd signature has no invariants
        let odd = Arc::new(
            FqModule::new(
                vec![2],
                vec![crate::fqmod::Mod1Rational::new(1, 4)],
                vec![vec![crate::fqmod::Mod1Rational::new(1, 2)]],
            )
            .unwrap(),
        );
        assert_eq!(WeilRep::new(&odd).exact_invariants().dimension, 0);
    }

    #[test]
    fn invariants_fixed_by_random_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (n, np) in [(6, 1), (2, 2), (4, 2)] {
            let m = module(n, np);
            let rep = WeilRep::new(&m);
            let inv = rep.invariant_space();
            for _ in 0..20 {
                let g = random_sl2(&mut rng);
                for b in &inv.basis {
                    let v = GroupRingVector::from_integers(&m, b);
                    assert_eq!(rep.apply(g, &v).unwrap(), v);
                }
            }
        }
    }

    #[test]
    fn self_dual_span_small() {
        let r = verify_self_dual_span(&module(6, 1)).unwrap();
        assert_eq!((r.family_size, r.family_rank, r.invariant_dimension), (4, 4, 4));
        let r = verify_self_dual_span(&module(2, 2)).unwrap();
        assert_eq!((r.family_size, r.family_rank, r.invariant_dimension), (6, 5, 5));
        let r = verify_self_dual_span(&module(3, 3)).unwrap();
        assert_eq!((r.family_size, r.family_rank, r.invariant_dimension), (8, 7, 7));
    }

    #[test]
    fn mu_action_on_isotropic_vectors() {
        let m = module(5, 1);
        let rep = WeilRep::new(&m);
        let word = sl2_word(mu_matrix(2, 5).unwrap()).unwrap();
        let image = rep.apply_word(&word, &GroupRingVector::basis(&m, m.index(&[1, 0, 0, 0])));
        assert_eq!(image, GroupRingVector::basis(&m, m.index(&[2, 0, 0, 0])));
        for n in [1i64, 2, 3, 4, 5, 6, 8, 9, 12] {
            let rep = WeilRep::new(&module(n, 1));
            for u in units_mod(n as u64) {
                let r = verify_mu(&rep, u as i64).unwrap();
                assert!(r.violations.is_empty(), "N = {n}, u = {u}: {:?}", r.violations);
            }
        }
        for (n, np) in [(2, 2), (4, 2), (3, 3)] {
            let rep = WeilRep::new(&module(n, np));
            for u in units_mod(rep.level()) {
                assert!(verify_mu(&rep, u as i64).unwrap().violations.is_empty());
            }
        }
        assert!(mu_matrix(2, 4).is_err());
        assert_eq!(mu_matrix(1, 1).unwrap(), [[0, -1], [1, 1]]);
    }

    #[test]
    fn averaging_operator_on_trivial_subgroup() {
        for p in [2i64, 3, 5] {
            let m = module(p, 1);
            let rep = WeilRep::new(&m);
            let iso = rep.isotropic_indices();
            let image = rep.averaging_operator().apply(&GroupRingVector::basis(&m, 0));
            let expected = GroupRingVector::indicator(&m, &iso)
                .scale(&CycNumber::from_rational(crate::rational::rat(1, p)));
            assert_eq!(image, expected);
        }
    }

    #[test]
    fn poset_basis_fixed_space() {
        for (n, np) in [(4, 1), (6, 1), (2, 2), (8, 1), (4, 2), (3, 3)] {
            let r = verify_poset_basis(&module(n, np)).unwrap();
            assert_eq!(r.fixed_dimension, r.self_dual_rank);
        }
    }

    #[test]
    fn generator_sets_of_cyclic_isotropic_subgroups() {
        // at prime-power level, v^{H*} = v^H − v^{pH} for cyclic isotropic H = ⟨γ⟩
        for (n, np, p) in [(4i64, 1i64, 2i64), (8, 2, 2), (9, 3, 3), (3, 3, 3)] {
            let m = module(n, np);
            for g in (1..m.order()).filter(|&g| m.q_num_index(g) == 0) {
                let h = Subgroup::generated_by(&m, &[g]);
                let ph = Subgroup::generated_by(&m, &[m.scale_idx(g, p)]);
                let gens: Vec<usize> = h
                    .elements()
                    .iter()
                    .copied()
                    .filter(|&x| Subgroup::generated_by(&m, &[x]) == h)
                    .collect();
                let lhs = GroupRingVector::indicator(&m, &gens);
                assert_eq!(lhs, h.characteristic_vector().sub(&ph.characteristic_vector()));
            }
        }
    }
}
