//! Exact linear algebra over fields: row reduction, rank and kernels.
//!
//! The routines are generic over [`Scalar`], implemented for arbitrary-precision
//! rationals, cyclotomic numbers and residues modulo a word-sized prime.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{mul_mod, pow_mod};
use crate::rational::Rational;

/// Field element interface needed by Gaussian elimination.
pub trait Scalar: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    /// Multiplicative inverse; only called on nonzero values.
    fn inverse(&self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    /// `self -= a * b`
    fn sub_mul_assign(&mut self, a: &Self, b: &Self);
    fn neg_ref(&self) -> Self;
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn inverse(&self) -> Self {
        self.recip()
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn neg_ref(&self) -> Self {
        -self
    }
}

/// Reduced row echelon form of a matrix.
#[derive(Debug, Clone)]
pub struct Echelon<F> {
    pub rows: Vec<Vec<F>>,
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

impl<F: Scalar> Echelon<F> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Basis of `{v : A v = 0}`, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<F>> {
        let mut is_pivot = vec![false; self.ncols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        let mut out = Vec::new();
        for free in (0..self.ncols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![F::zero(); self.ncols];
            v[free] = F::one();
            for (row, &p) in self.rows.iter().zip(&self.pivots) {
                if !row[free].is_zero() {
                    v[p] = row[free].neg_ref();
                }
            }
            out.push(v);
        }
        out
    }
}

/// Gauss–Jordan elimination. Rows may have any length up to `ncols`.
pub fn rref<F: Scalar>(mut rows: Vec<Vec<F>>, ncols: usize) -> Echelon<F> {
    for r in rows.iter_mut() {
        r.resize(ncols, F::zero());
    }
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..ncols {
        if top == rows.len() {
            break;
        }
        let Some(found) = (top..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(top, found);
        let inv = rows[top][col].inverse();
        for x in rows[top].iter_mut().skip(col) {
            if !x.is_zero() {
                *x = x.mul_ref(&inv);
            }
        }
        let pivot_row = rows[top].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == top || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for c in col..ncols {
                if !pivot_row[c].is_zero() {
                    row[c].sub_mul_assign(&factor, &pivot_row[c]);
                }
            }
        }
        pivots.push(col);
        top += 1;
    }
    rows.truncate(top);
    Echelon { rows, pivots, ncols }
}

pub fn rank<F: Scalar>(rows: Vec<Vec<F>>, ncols: usize) -> usize {
    rref(rows, ncols).rank()
}

/// Basis of `{c : Σ cᵢ rowᵢ = 0}` (the left kernel).
pub fn left_kernel<F: Scalar>(rows: &[Vec<F>], ncols: usize) -> Vec<Vec<F>> {
    let transposed: Vec<Vec<F>> = (0..ncols)
        .map(|c| rows.iter().map(|r| r.get(c).cloned().unwrap_or_else(F::zero)).collect())
        .collect();
    rref(transposed, rows.len()).kernel()
}

/// Solves `A x = b` for square invertible `A`, returning `None` when singular.
pub fn solve<F: Scalar>(a: &[Vec<F>], b: &[F]) -> Option<Vec<F>> {
    let n = a.len();
    let augmented: Vec<Vec<F>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let ech = rref(augmented, n + 1);
    if ech.pivots.len() != n || ech.pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some(ech.rows.into_iter().map(|r| r[n].clone()).collect())
}

pub fn integer_rows_to_rational(rows: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect())
        .collect()
}

/// Scales a rational vector to the primitive integer vector on the same ray
/// whose first nonzero entry is positive.
pub fn primitive_integer_vector(v: &[Rational]) -> Vec<BigInt> {
    let den = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &den).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.into_iter().map(|x| x / &g * &sign).collect()
}

/// Residue modulo a prime below 2⁶³.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModP {
    pub value: u64,
}

thread_local! {
    static MODULUS: std::cell::Cell<u64> = const { std::cell::Cell::new(0) };
}

/// Runs `f` with the thread-local modulus used by [`ModP`] set to `p`.
pub fn with_modulus<R>(p: u64, f: impl FnOnce() -> R) -> R {
    let prev = MODULUS.with(|m| m.replace(p));
    let out = f();
    MODULUS.with(|m| m.set(prev));
    out
}

fn modulus() -> u64 {
    MODULUS.with(|m| m.get())
}

impl ModP {
    pub fn new(v: u64) -> Self {
        ModP { value: v % modulus() }
    }
}

impl Scalar for ModP {
    fn zero() -> Self {
        ModP { value: 0 }
    }
    fn one() -> Self {
        ModP { value: 1 }
    }
    fn is_zero(&self) -> bool {
        self.value == 0
    }
    fn inverse(&self) -> Self {
        let p = modulus();
        ModP { value: pow_mod(self.value, p - 2, p) }
    }
    fn mul_ref(&self, other: &Self) -> Self {
        ModP { value: mul_mod(self.value, other.value, modulus()) }
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        let p = modulus();
        let prod = mul_mod(a.value, b.value, p);
        self.value = if self.value >= prod { self.value - prod } else { self.value + p - prod };
    }
    fn neg_ref(&self) -> Self {
        let p = modulus();
        ModP { value: if self.value == 0 { 0 } else { p - self.value } }
    }
}

/// Recovers `n/d` from `a ≡ n/d (mod m)` with `|n|, d ≤ sqrt(m/2)`.
pub fn rational_reconstruction(a: u64, m: u64) -> Option<Rational> {
    let bound = ((m / 2) as f64).sqrt() as i128;
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 > bound {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if t1 == 0 || t1.abs() > bound {
        return None;
    }
    let (n, d) = if t1 < 0 { (-r1, -t1) } else { (r1, t1) };
    if (n.gcd(&d)) != 1 {
        return None;
    }
    Some(Rational::new(BigInt::from(n), BigInt::from(d)))
}

/// Image of a rational in ℤ/pℤ, if the denominator is invertible.
pub fn rational_mod(r: &Rational, p: u64) -> Option<u64> {
    let big_p = BigInt::from(p);
    let n = r.numer().mod_floor(&big_p).to_u64()?;
    let d = r.denom().mod_floor(&big_p).to_u64()?;
    (d != 0).then(|| mul_mod(n, pow_mod(d, p - 2, p), p))
}
