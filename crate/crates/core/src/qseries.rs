//! Truncated q-series with exponents in `(1/m)ℤ` and coefficients in `ℤ[ζ_M]`,
//! plus Dedekind eta expansions and eta quotients.
//!
//! Coefficients are kept as canonical integer coordinates over the power basis
//! of `ℚ(ζ_M)`. Every series met here (eta products, Borcherds products and
//! their quotients by unit leading terms) is integral, and this keeps the inner
//! loops on machine integers. Arithmetic is overflow-checked.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::arith::{lcm, modulo};
use crate::cyclo::{phi, reduce_integer, root_coords, CycNumber};
use crate::error::{invalid, Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};

type Coef = Vec<i128>;

fn overflow() -> Error {
    Error::ResourceLimit { size: u128::MAX as usize, bound: i128::MAX as usize }
}

fn coef_is_zero(c: &[i128]) -> bool {
    c.iter().all(|&x| x == 0)
}

fn coef_rational_part(c: &[i128]) -> Option<i128> {
    c[1..].iter().all(|&x| x == 0).then_some(c[0])
}

fn checked_add_assign(a: &mut [i128], b: &[i128]) -> Result<()> {
    for (x, &y) in a.iter_mut().zip(b) {
        *x = x.checked_add(y).ok_or_else(overflow)?;
    }
    Ok(())
}

fn checked_sub_assign(a: &mut [i128], b: &[i128]) -> Result<()> {
    for (x, &y) in a.iter_mut().zip(b) {
        *x = x.checked_sub(y).ok_or_else(overflow)?;
    }
    Ok(())
}

fn scale_coef(a: &[i128], s: i128) -> Result<Coef> {
    a.iter().map(|&x| x.checked_mul(s).ok_or_else(overflow)).collect()
}

/// Folds a group-ring accumulator `Σ acc_e ζ^e` into canonical coordinates,
/// refusing magnitudes that could overflow during reduction.
fn reduce_checked(m: u64, acc: &[i128]) -> Result<Coef> {
    if acc.iter().any(|x| x.unsigned_abs() > 1u128 << 100) {
        return Err(overflow());
    }
    Ok(reduce_integer(m, acc))
}

fn coef_mul(m: u64, a: &[i128], b: &[i128]) -> Result<Coef> {
    if let Some(s) = coef_rational_part(b) {
        return scale_coef(a, s);
    }
    if let Some(s) = coef_rational_part(a) {
        return scale_coef(b, s);
    }
    let mu = m as usize;
    let mut acc = vec![0i128; mu];
    for (i, &x) in a.iter().enumerate().filter(|(_, x)| **x != 0) {
        for (j, &y) in b.iter().enumerate().filter(|(_, y)| **y != 0) {
            let slot = &mut acc[(i + j) % mu];
            *slot = x.checked_mul(y).and_then(|p| slot.checked_add(p)).ok_or_else(overflow)?;
        }
    }
    reduce_checked(m, &acc)
}

/// `a·ζ_M^e`.
fn coef_mul_root(m: u64, a: &[i128], e: i64) -> Result<Coef> {
    let mut out = vec![0i128; a.len()];
    for (i, &x) in a.iter().enumerate().filter(|(_, x)| **x != 0) {
        for (k, v) in root_coords(m, e + i as i64) {
            out[k] = x.checked_mul(v).and_then(|p| out[k].checked_add(p)).ok_or_else(overflow)?;
        }
    }
    Ok(out)
}

fn coef_promote(m: u64, a: &[i128], target: u64) -> Coef {
    if m == target {
        return a.to_vec();
    }
    let stretch = (target / m) as usize;
    let mut acc = vec![0i128; target as usize];
    for (i, &x) in a.iter().enumerate() {
        acc[i * stretch] += x;
    }
    reduce_integer(target, &acc)
}

fn coef_to_cyc(m: u64, a: &[i128]) -> CycNumber {
    let mut acc = vec![0i128; m as usize];
    acc[..a.len()].copy_from_slice(a);
    CycNumber::from_group_ring(m, &acc)
}

/// Integral coordinates of `x` in `ℚ(ζ_m)`, if `x` lies in `ℤ[ζ_m]`.
fn coef_from_cyc(x: &CycNumber, m: u64) -> Result<Coef> {
    let x = x.promote(lcm(m, x.conductor()))?;
    if x.conductor() != m {
        return invalid(format!("coefficient of conductor {} does not fit ζ_{m}", x.conductor()));
    }
    x.coeffs()
        .iter()
        .map(|r| {
            if !r.is_integer() {
                return Err(Error::Unsupported("series coefficients must be cyclotomic integers".into()));
            }
            r.to_integer().to_i128().ok_or_else(overflow)
        })
        .collect()
}

/// If `c = ±ζ_M^k`, returns the coordinates of `c⁻¹`.
fn unit_inverse(m: u64, c: &[i128]) -> Option<Coef> {
    for k in 0..m as i64 {
        let r = coef_mul_root(m, c, -k).ok()?;
        if let Some(s) = coef_rational_part(&r) {
            if s == 1 || s == -1 {
                let mut base = vec![0i128; c.len()];
                base[0] = s;
                return coef_mul_root(m, &base, -k).ok();
            }
        }
    }
    None
}

fn ceil_num(r: &Rational, den: u64) -> i64 {
    let x = r * Rational::from_integer(BigInt::from(den));
    x.ceil().to_integer().to_i64().expect("truncation fits in i64")
}

fn exponent_num(r: &Rational, den: u64) -> Result<i64> {
    let x = r * Rational::from_integer(BigInt::from(den));
    if !x.is_integer() {
        return invalid(format!("exponent {} is not in (1/{den})ℤ", format_rational(r)));
    }
    x.to_integer().to_i64().ok_or_else(|| Error::InvalidArgument("exponent too large".into()))
}

/// A truncated series `Σ_{k < T} c_k q^{k/m}`; coefficients at exponents
/// `≥ T` are unknown.
#[derive(Clone, Debug)]
pub struct FracQSeries {
    exp_den: u64,
    conductor: u64,
    trunc: i64,
    terms: BTreeMap<i64, Coef>,
}

impl FracQSeries {
    pub fn zero(exp_den: u64, trunc: &Rational) -> Self {
        FracQSeries { exp_den, conductor: 1, trunc: ceil_num(trunc, exp_den), terms: BTreeMap::new() }
    }

    pub fn one(trunc: &Rational) -> Self {
        Self::monomial(&Rational::zero(), &CycNumber::from_int(1), 1, trunc).expect("1 is integral")
    }

    /// `c·q^e`, with exponents living in `(1/exp_den)ℤ` (refined if needed).
    pub fn monomial(e: &Rational, c: &CycNumber, exp_den: u64, trunc: &Rational) -> Result<Self> {
        let den = lcm(exp_den, e.denom().to_u64().ok_or_else(|| Error::InvalidArgument("denominator".into()))?);
        Self::from_terms(den, trunc, [(exponent_num(e, den)?, c.clone())])
    }

    /// Builds a series from `(numerator, coefficient)` pairs over `exp_den`.
    pub fn from_terms(
        exp_den: u64,
        trunc: &Rational,
        terms: impl IntoIterator<Item = (i64, CycNumber)>,
    ) -> Result<Self> {
        let terms: Vec<(i64, CycNumber)> = terms.into_iter().collect();
        let conductor = terms.iter().fold(1, |m, (_, c)| lcm(m, c.conductor()));
        let mut s = FracQSeries { exp_den, conductor, trunc: ceil_num(trunc, exp_den), terms: BTreeMap::new() };
        for (k, c) in terms {
            if k < s.trunc && !c.is_zero() {
                let coords = coef_from_cyc(&c, conductor)?;
                match s.terms.get_mut(&k) {
                    Some(old) => checked_add_assign(old, &coords)?,
                    None => {
                        s.terms.insert(k, coords);
                    }
                }
            }
        }
        s.prune();
        Ok(s)
    }

    fn prune(&mut self) {
        let t = self.trunc;
        self.terms.retain(|&k, c| k < t && !coef_is_zero(c));
    }

    pub fn exp_den(&self) -> u64 {
        self.exp_den
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn trunc(&self) -> Rational {
        Rational::new(BigInt::from(self.trunc), BigInt::from(self.exp_den))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn exponent(&self, k: i64) -> Rational {
        Rational::new(BigInt::from(k), BigInt::from(self.exp_den))
    }

    /// Coefficient of `q^e`; `None` at or beyond the truncation.
    pub fn coefficient(&self, e: &Rational) -> Option<CycNumber> {
        if *e >= self.trunc() {
            return None;
        }
        let x = e * Rational::from_integer(BigInt::from(self.exp_den));
        if !x.is_integer() {
            return Some(CycNumber::zero(1));
        }
        let k = x.to_integer().to_i64()?;
        Some(self.terms.get(&k).map_or_else(|| CycNumber::zero(1), |c| coef_to_cyc(self.conductor, c)))
    }

    pub fn terms(&self) -> Vec<(Rational, CycNumber)> {
        self.terms.iter().map(|(&k, c)| (self.exponent(k), coef_to_cyc(self.conductor, c))).collect()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn lead_num(&self) -> i64 {
        self.terms.keys().next().copied().unwrap_or(self.trunc)
    }

    /// Leading exponent and coefficient of a nonzero series.
    pub fn leading(&self) -> Option<(Rational, CycNumber)> {
        let (&k, c) = self.terms.iter().next()?;
        Some((self.exponent(k), coef_to_cyc(self.conductor, c)))
    }

    /// Re-expresses the series over `(1/den)ℤ` and `ℚ(ζ_cond)`; both must be multiples.
    pub fn refine(&self, den: u64, cond: u64) -> Self {
        assert!(den % self.exp_den == 0 && cond % self.conductor == 0);
        let f = (den / self.exp_den) as i64;
        FracQSeries {
            exp_den: den,
            conductor: cond,
            trunc: self.trunc * f,
            terms: self
                .terms
                .iter()
                .map(|(&k, c)| (k * f, coef_promote(self.conductor, c, cond)))
                .collect(),
        }
    }

    fn common(&self, other: &Self) -> (Self, Self) {
        let den = lcm(self.exp_den, other.exp_den);
        let cond = lcm(self.conductor, other.conductor);
        (self.refine(den, cond), other.refine(den, cond))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (mut a, b) = self.common(other);
        a.trunc = a.trunc.min(b.trunc);
        for (k, c) in b.terms {
            match a.terms.get_mut(&k) {
                Some(x) => checked_add_assign(x, &c)?,
                None => {
                    a.terms.insert(k, c);
                }
            }
        }
        a.prune();
        Ok(a)
    }

    pub fn neg(&self) -> Self {
        let mut s = self.clone();
        for c in s.terms.values_mut() {
            for x in c.iter_mut() {
                *x = -*x;
            }
        }
        s
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Product, valid below `min(T_a + lead_b, T_b + lead_a)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.common(other);
        let trunc = (a.trunc + b.lead_num()).min(b.trunc + a.lead_num());
        let m = a.conductor;
        let mut terms: BTreeMap<i64, Coef> = BTreeMap::new();
        for (&i, x) in &a.terms {
            for (&j, y) in &b.terms {
                if i + j >= trunc {
                    break;
                }
                let p = coef_mul(m, x, y)?;
                match terms.get_mut(&(i + j)) {
                    Some(acc) => checked_add_assign(acc, &p)?,
                    None => {
                        terms.insert(i + j, p);
                    }
                }
            }
        }
        let mut s = FracQSeries { exp_den: a.exp_den, conductor: m, trunc, terms };
        s.prune();
        Ok(s)
    }

    /// Multiplication by an exact constant in `ℤ[ζ]`.
    pub fn scale(&self, c: &CycNumber) -> Result<Self> {
        let m = lcm(self.conductor, c.conductor());
        let coords = coef_from_cyc(c, m)?;
        let base = self.refine(self.exp_den, m);
        let mut terms = BTreeMap::new();
        for (k, x) in base.terms {
            terms.insert(k, coef_mul(m, &x, &coords)?);
        }
        let mut s = FracQSeries { terms, ..base };
        s.prune();
        Ok(s)
    }

    /// Multiplicative inverse; the leading coefficient must be `±ζ^k`.
    pub fn inverse(&self) -> Result<Self> {
        let Some((&l, c)) = self.terms.iter().next() else {
            return Err(Error::DivisionByZero);
        };
        let m = self.conductor;
        let cinv = unit_inverse(m, c)
            .ok_or_else(|| Error::Unsupported("leading coefficient is not a root of unity".into()))?;
        // b = c·q^l·(1 + Σ_{k>0} u_k q^k), known for offsets k < R
        let r = self.trunc - l;
        let mut u: Vec<(i64, Coef)> = Vec::new();
        for (&k, x) in self.terms.iter().skip(1) {
            u.push((k - l, coef_mul(m, x, &cinv)?));
        }
        let mut w: BTreeMap<i64, Coef> = BTreeMap::new();
        let mut one = vec![0i128; phi(m)];
        one[0] = 1;
        w.insert(0, one);
        for n in 1..r {
            let mut acc = vec![0i128; phi(m)];
            for (k, uk) in &u {
                if *k > n {
                    break;
                }
                if let Some(wv) = w.get(&(n - k)) {
                    checked_sub_assign(&mut acc, &coef_mul(m, uk, wv)?)?;
                }
            }
            if !coef_is_zero(&acc) {
                w.insert(n, acc);
            }
        }
        let mut terms = BTreeMap::new();
        for (k, x) in w {
            terms.insert(k - l, coef_mul(m, &x, &cinv)?);
        }
        let mut s = FracQSeries { exp_den: self.exp_den, conductor: m, trunc: r - l, terms };
        s.prune();
        Ok(s)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.inverse()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.inverse()?.pow(-e);
        }
        let mut result = Self::one(&(self.trunc() - self.leading().map_or(Rational::zero(), |l| l.0)));
        let mut base = self.clone();
        let mut k = e;
        // result keeps infinite precision until the first multiplication
        let mut started = false;
        while k > 0 {
            if k & 1 == 1 {
                result = if started { result.mul(&base)? } else { base.clone() };
                started = true;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        if !started {
            // a⁰ = 1 to the relative precision of a
            result.exp_den = self.exp_den;
            result.trunc = self.trunc - self.lead_num();
        }
        Ok(result)
    }

    /// In-place multiplication by `(1 − ζ_m^e q^s)^power` with `s > 0`.
    pub fn mul_one_minus(&mut self, e: i64, m: u64, s: &Rational, power: i64) -> Result<()> {
        if !s.is_positive() {
            return invalid("step must be positive");
        }
        let den = lcm(self.exp_den, s.denom().to_u64().unwrap_or(1));
        let cond = lcm(self.conductor, m);
        if den != self.exp_den || cond != self.conductor {
            *self = self.refine(den, cond);
        }
        let step = exponent_num(s, den)?;
        let root_e = e * (cond / m) as i64;
        for _ in 0..power.unsigned_abs() {
            if power > 0 {
                let keys: Vec<i64> = self.terms.keys().rev().copied().collect();
                for k in keys {
                    if k + step >= self.trunc {
                        continue;
                    }
                    let shifted = coef_mul_root(cond, &self.terms[&k], root_e)?;
                    let slot = self.terms.entry(k + step).or_insert_with(|| vec![0; phi(cond)]);
                    checked_sub_assign(slot, &shifted)?;
                }
            } else {
                let Some(&start) = self.terms.keys().next() else { break };
                for k in start + step..self.trunc {
                    if let Some(prev) = self.terms.get(&(k - step)) {
                        let shifted = coef_mul_root(cond, prev, root_e)?;
                        let slot = self.terms.entry(k).or_insert_with(|| vec![0; phi(cond)]);
                        checked_add_assign(slot, &shifted)?;
                    }
                }
            }
            self.prune();
        }
        Ok(())
    }

    /// `q ↦ q^d` for a positive rational `d`.
    pub fn substitute(&self, d: &Rational) -> Result<Self> {
        if !d.is_positive() {
            return invalid("substitution exponent must be positive");
        }
        let (p, q) = (d.numer().to_i64().unwrap_or(0), d.denom().to_u64().unwrap_or(1));
        let den = self.exp_den * q;
        let terms = self.terms.iter().map(|(&k, c)| (k * p, c.clone())).collect();
        Ok(FracQSeries { exp_den: den, conductor: self.conductor, trunc: self.trunc * p, terms })
    }

    /// Multiplication by `q^e`.
    pub fn shift(&self, e: &Rational) -> Result<Self> {
        let den = lcm(self.exp_den, e.denom().to_u64().ok_or_else(|| Error::InvalidArgument("denominator".into()))?);
        let mut s = self.refine(den, self.conductor);
        let k = exponent_num(e, den)?;
        s.trunc += k;
        s.terms = s.terms.into_iter().map(|(j, c)| (j + k, c)).collect();
        Ok(s)
    }

    /// Divides by the leading monomial `c·q^l`, leaving `1 + O(q^{>0})`.
    pub fn normalize_monomial(&self) -> Result<Self> {
        match self.leading() {
            Some((l, _)) => self.normalize_leading()?.shift(&-l),
            None => Ok(self.clone()),
        }
    }

    /// Divides by the leading coefficient so that it becomes 1.
    pub fn normalize_leading(&self) -> Result<Self> {
        let Some(c) = self.terms.values().next() else {
            return Ok(self.clone());
        };
        let inv = unit_inverse(self.conductor, c)
            .ok_or_else(|| Error::Unsupported("leading coefficient is not a root of unity".into()))?;
        let mut terms = BTreeMap::new();
        for (&k, x) in &self.terms {
            terms.insert(k, coef_mul(self.conductor, x, &inv)?);
        }
        Ok(FracQSeries { terms, ..self.clone() })
    }

    /// Drops the terms at exponents `≥ t` (no-op if `t` is beyond the truncation).
    pub fn truncate(&self, t: &Rational) -> Self {
        let mut s = self.clone();
        s.trunc = s.trunc.min(ceil_num(t, s.exp_den));
        s.prune();
        s
    }

    /// First exponent below the common truncation where the series differ.
    pub fn first_mismatch(&self, other: &Self) -> Option<Rational> {
        let (a, b) = self.common(other);
        let t = a.trunc.min(b.trunc);
        let keys: std::collections::BTreeSet<i64> =
            a.terms.keys().chain(b.terms.keys()).copied().filter(|&k| k < t).collect();
        keys.into_iter().find(|k| a.terms.get(k) != b.terms.get(k)).map(|k| a.exponent(k))
    }

    /// Exact agreement on every exponent below both truncations.
    pub fn equals_to_precision(&self, other: &Self) -> bool {
        self.first_mismatch(other).is_none()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (e, c) in self.terms() {
            out.push_str(&format!("q^({}): {}\n", format_rational(&e), c));
        }
        out.push_str(&format!("O(q^({}))\n", format_rational(&self.trunc())));
        out
    }
}

impl fmt::Display for FracQSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl Serialize for FracQSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<(String, CycNumber)> =
            self.terms().into_iter().map(|(e, c)| (format_rational(&e), c)).collect();
        let mut st = s.serialize_struct("FracQSeries", 3)?;
        st.serialize_field("exp_den", &self.exp_den)?;
        st.serialize_field("trunc", &format_rational(&self.trunc()))?;
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

mod rational_str {
    use super::*;
    use serde::Deserializer;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// `η(dτ + r)^e`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaFactor {
    #[serde(with = "rational_str")]
    pub scale: Rational,
    #[serde(with = "rational_str")]
    pub shift: Rational,
    pub exponent: i64,
}

impl EtaFactor {
    pub fn new(scale: Rational, shift: Rational, exponent: i64) -> Self {
        EtaFactor { scale, shift, exponent }
    }

    pub fn simple(d: i64, exponent: i64) -> Self {
        Self::new(Rational::from_integer(BigInt::from(d)), Rational::zero(), exponent)
    }
}

impl fmt::Display for EtaFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = if self.scale.is_one() { String::new() } else { format_short(&self.scale) };
        let arg = if self.shift.is_zero() {
            format!("{d}τ")
        } else if self.shift.is_negative() {
            format!("{d}τ - {}", format_short(&-self.shift.clone()))
        } else {
            format!("{d}τ + {}", format_short(&self.shift))
        };
        if self.exponent == 1 {
            write!(f, "η({arg})")
        } else {
            write!(f, "η({arg})^{}", self.exponent)
        }
    }
}

fn format_short(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `prefactor · ∏ η(d_i τ + r_i)^{e_i}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtaQuotient {
    pub prefactor: CycNumber,
    pub factors: Vec<EtaFactor>,
}

impl EtaQuotient {
    pub fn new(prefactor: CycNumber, factors: Vec<EtaFactor>) -> Self {
        EtaQuotient { prefactor, factors }.simplified()
    }

    pub fn one() -> Self {
        Self::new(CycNumber::from_int(1), vec![])
    }

    /// Merges equal `(d, r mod 1)` factors, absorbing integer shifts into the
    /// prefactor via `η(τ + 1) = e(1/24)η(τ)`, and drops zero exponents.
    pub fn simplified(&self) -> Self {
        let mut prefactor = self.prefactor.clone();
        let mut merged: BTreeMap<(Rational, Rational), i64> = BTreeMap::new();
        for f in &self.factors {
            let whole = f.shift.floor();
            let frac = &f.shift - &whole;
            let k = whole.to_integer().to_i64().expect("small shift") * f.exponent;
            if k != 0 {
                prefactor = prefactor.mul_ref(&CycNumber::e(k, 24));
            }
            *merged.entry((f.scale.clone(), frac)).or_insert(0) += f.exponent;
        }
        let factors = merged
            .into_iter()
            .filter(|(_, e)| *e != 0)
            .map(|((scale, shift), exponent)| EtaFactor { scale, shift, exponent })
            .collect();
        EtaQuotient { prefactor, factors }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let factors = self.factors.iter().chain(&other.factors).cloned().collect();
        Self::new(self.prefactor.mul_ref(&other.prefactor), factors)
    }

    pub fn inverse(&self) -> Result<Self> {
        let factors = self.factors.iter().map(|f| EtaFactor { exponent: -f.exponent, ..f.clone() }).collect();
        Ok(Self::new(self.prefactor.inv()?, factors))
    }

    /// `Σ e_i d_i / 24`.
    pub fn leading_exponent(&self) -> Rational {
        self.factors
            .iter()
            .map(|f| &f.scale * Rational::from_integer(BigInt::from(f.exponent)))
            .sum::<Rational>()
            / Rational::from_integer(BigInt::from(24))
    }

    /// Leading coefficient `prefactor · ∏ e(r_i/24)^{e_i}`.
    pub fn leading_coefficient(&self) -> CycNumber {
        self.factors.iter().fold(self.prefactor.clone(), |acc, f| {
            let r = &f.shift * Rational::from_integer(BigInt::from(f.exponent));
            acc.mul_ref(&e_of(&(r / Rational::from_integer(BigInt::from(24)))))
        })
    }

    /// `½ Σ e_i`.
    pub fn weight(&self) -> Rational {
        Rational::new(BigInt::from(self.factors.iter().map(|f| f.exponent).sum::<i64>()), BigInt::from(2))
    }

    /// Expansion valid for all exponents below `trunc`.
    pub fn expand(&self, trunc: &Rational) -> Result<FracQSeries> {
        let lead = self.leading_exponent();
        let relative = trunc - &lead;
        let mut acc = FracQSeries::one(&relative).scale(&self.prefactor)?;
        for f in &self.factors {
            let t = &f.scale / Rational::from_integer(BigInt::from(24)) + &relative;
            let s = eta_series(&f.scale, &f.shift, &t)?;
            acc = acc.mul(&s.pow(f.exponent)?)?;
        }
        Ok(acc.truncate(trunc))
    }
}

impl fmt::Display for EtaQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.prefactor.is_one() {
            parts.push(format!("({})", self.prefactor));
        }
        parts.extend(self.factors.iter().map(|x| x.to_string()));
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" · "))
        }
    }
}

/// `e(x) = exp(2πix)` for rational `x`.
pub fn e_of(x: &Rational) -> CycNumber {
    let den = x.denom().to_u64().expect("small denominator");
    let num = x.numer().mod_floor(x.denom()).to_i64().expect("small numerator");
    CycNumber::e(num, den)
}

fn eta_setup(d: &Rational, r: &Rational, trunc: &Rational) -> Result<(u64, u64)> {
    if !d.is_positive() {
        return invalid("η scale must be positive");
    }
    let lead = d / Rational::from_integer(BigInt::from(24));
    if *trunc <= lead {
        return Err(Error::EmptySeries);
    }
    let exp_den = 24 * d.denom().to_u64().ok_or_else(|| Error::InvalidArgument("denominator".into()))?;
    let conductor = 24 * r.denom().to_u64().ok_or_else(|| Error::InvalidArgument("denominator".into()))?;
    Ok((exp_den, conductor))
}

/// `η(dτ + r) = e(r/24)·q^{d/24}·Σ_k (−1)^k e(r·g_k) q^{d·g_k}` with
/// pentagonal numbers `g_k = k(3k−1)/2`, truncated below `trunc`.
pub fn eta_series(d: &Rational, r: &Rational, trunc: &Rational) -> Result<FracQSeries> {
    let (exp_den, conductor) = eta_setup(d, r, trunc)?;
    let t = ceil_num(trunc, exp_den);
    let lead = exponent_num(&(d / Rational::from_integer(BigInt::from(24))), exp_den)?;
    let step = exponent_num(d, exp_den)?;
    // r = a/b, conductor = 24b: e(r/24) = ζ^a, e(r·g) = ζ^{24·a·g}
    let a = r.numer().mod_floor(r.denom()).to_i64().expect("small shift");
    let base = r.floor().to_integer().to_i64().expect("small shift");
    let a_full = a + base * r.denom().to_i64().expect("small denominator");
    let mut terms = Vec::new();
    for k in pentagonal_indices() {
        let g = k * (3 * k - 1) / 2;
        let exp = lead + step * g;
        if exp >= t {
            if g > 0 && k < 0 {
                break;
            }
            continue;
        }
        let sign = if k.rem_euclid(2) == 0 { 1 } else { -1 };
        let root = modulo(a_full + 24 * a * g, conductor);
        let c = CycNumber::root_of_unity(root as i64, conductor).scale(&Rational::from_integer(BigInt::from(sign)));
        terms.push((exp, c));
    }
    FracQSeries::from_terms(exp_den, trunc, terms)
}

/// `0, 1, −1, 2, −2, …` in order of increasing pentagonal number.
fn pentagonal_indices() -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..).flat_map(|k| [k, -k]))
}

/// The naive product `e(r/24) q^{d/24} ∏_{n ≥ 1} (1 − e(nr) q^{nd})`, used as an oracle.
pub fn eta_series_naive(d: &Rational, r: &Rational, trunc: &Rational) -> Result<FracQSeries> {
    let (exp_den, conductor) = eta_setup(d, r, trunc)?;
    let lead = d / Rational::from_integer(BigInt::from(24));
    let prefactor = e_of(&(r / Rational::from_integer(BigInt::from(24))));
    let mut s = FracQSeries::monomial(&lead, &prefactor, exp_den, trunc)?;
    let b = conductor / 24;
    let a = r.numer().mod_floor(r.denom()).to_i64().expect("small shift");
    let mut n = 1i64;
    loop {
        let step = d * Rational::from_integer(BigInt::from(n));
        if &lead + &step >= *trunc {
            break;
        }
        s.mul_one_minus(a * n, b, &step, 1)?;
        n += 1;
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub lhs: String,
    pub rhs: String,
    pub trunc: String,
    pub terms_compared: usize,
    pub passed: bool,
    pub first_mismatch: Option<String>,
}

/// Compares the expansions of two eta quotients on all exponents below `trunc`.
pub fn assert_identity(lhs: &EtaQuotient, rhs: &EtaQuotient, trunc: &Rational) -> Result<IdentityReport> {
    let a = lhs.expand(trunc)?;
    let b = rhs.expand(trunc)?;
    if a.trunc() < *trunc || b.trunc() < *trunc {
        return Err(Error::Incomparable("expansions fall short of the requested order".into()));
    }
    let mismatch = a.first_mismatch(&b);
    Ok(IdentityReport {
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        trunc: format_rational(trunc),
        terms_compared: a.len().max(b.len()),
        passed: mismatch.is_none(),
        first_mismatch: mismatch.map(|e| format_rational(&e)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    /// `∏_{n ≥ 1}(1 − qⁿ)` to order `t` by schoolbook multiplication of integer lists.
    fn euler_product(t: usize) -> Vec<i64> {
        let mut c = vec![0i64; t];
        c[0] = 1;
        for n in 1..t {
            for k in (n..t).rev() {
                c[k] -= c[k - n];
            }
        }
        c
    }

    #[test]
    fn eta_matches_euler_product() {
        let s = eta_series(&int(1), &int(0), &(int(300) + rat(1, 24))).unwrap();
        let expected = euler_product(300);
        for (n, &c) in expected.iter().enumerate() {
            let e = rat(1, 24) + int(n as i64);
            assert_eq!(s.coefficient(&e).unwrap(), CycNumber::from_int(c), "n = {n}");
        }
        let head: Vec<i64> = expected[..6].to_vec();
        assert_eq!(head, vec![1, -1, -1, 0, 0, 1]);
    }

    #[test]
    fn pentagonal_equals_naive() {
        for (d, r) in [(int(1), int(0)), (int(2), rat(1, 3)), (rat(1, 2), rat(-1, 5)), (int(3), rat(2, 7))] {
            let t = int(300);
            let a = eta_series(&d, &r, &t).unwrap();
            let b = eta_series_naive(&d, &r, &t).unwrap();
            assert!(a.equals_to_precision(&b), "d = {d}, r = {r}");
            assert_eq!(a.trunc(), b.trunc());
        }
    }

    #[test]
    fn leading_terms() {
        let s = eta_series(&int(1), &rat(1, 2), &int(3)).unwrap();
        let (e, c) = s.leading().unwrap();
        assert_eq!(e, rat(1, 24));
        assert_eq!(c, CycNumber::e(1, 48));
        let p = eta_series(&int(1), &int(0), &int(5)).unwrap().mul(&eta_series(&int(2), &int(0), &int(5)).unwrap()).unwrap();
        assert_eq!(p.leading().unwrap().0, rat(1, 8));
        assert!(eta_series(&int(24), &int(0), &int(1)).is_err());
    }

    #[test]
    fn substitution_and_shift_laws() {
        let t = int(40);
        let base = eta_series(&int(1), &int(0), &t).unwrap();
        for d in [2, 3, 5] {
            let direct = eta_series(&int(d), &int(0), &(t.clone() * int(d))).unwrap();
            assert!(direct.equals_to_precision(&base.substitute(&int(d)).unwrap()));
        }
        for r in [-2i64, 1, 3] {
            let shifted = eta_series(&int(2), &int(r), &t).unwrap();
            let expected = eta_series(&int(2), &int(0), &t).unwrap().scale(&CycNumber::e(r, 24)).unwrap();
            assert!(shifted.equals_to_precision(&expected));
        }
    }

    #[test]
    fn conductor_bound() {
        for n in [2i64, 3, 5, 12] {
            for a in 0..n {
                let s = eta_series(&int(1), &rat(a, n), &int(30)).unwrap();
                assert_eq!((24 * n as u64) % s.conductor(), 0);
            }
        }
    }

    #[test]
    fn arithmetic() {
        let t = int(50);
        let a = eta_series(&int(1), &rat(1, 3), &t).unwrap();
        let one = a.div(&a).unwrap();
        assert!(one.equals_to_precision(&FracQSeries::one(&int(10))));
        assert_eq!(one.trunc(), int(50) - rat(1, 24));
        let sq = a.mul(&a).unwrap();
        assert!(sq.equals_to_precision(&a.pow(2).unwrap()));
        assert!(a.pow(-2).unwrap().mul(&sq).unwrap().equals_to_precision(&FracQSeries::one(&int(10))));
        let zero_lead = FracQSeries::from_terms(1, &int(5), [(1, CycNumber::from_int(2))]).unwrap();
        assert!(zero_lead.inverse().is_err());
        assert!(FracQSeries::zero(1, &int(3)).inverse().is_err());
        assert!(a.pow(0).unwrap().equals_to_precision(&FracQSeries::one(&int(40))));
    }

    #[test]
    fn one_minus_factors() {
        let t = int(30);
        let mut s = FracQSeries::one(&t);
        s.mul_one_minus(1, 3, &int(2), 3).unwrap();
        s.mul_one_minus(1, 3, &int(2), -3).unwrap();
        assert!(s.equals_to_precision(&FracQSeries::one(&t)));
        let mut g = FracQSeries::one(&t);
        g.mul_one_minus(0, 1, &int(1), -1).unwrap();
        assert_eq!(g.len(), 30);
    }

    #[test]
    fn eta_identity_for_two() {
        let lhs = EtaQuotient::new(CycNumber::from_int(1), vec![EtaFactor::new(int(1), rat(1, 2), 1)]);
        let rhs = EtaQuotient::new(
            CycNumber::e(1, 48),
            vec![EtaFactor::simple(2, 3), EtaFactor::simple(1, -1), EtaFactor::simple(4, -1)],
        );
        let r = assert_identity(&lhs, &rhs, &int(200)).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(assert_identity(&lhs, &lhs, &int(3)).unwrap().passed);
        let wrong = EtaQuotient::new(CycNumber::from_int(1), rhs.factors.clone());
        assert!(!assert_identity(&lhs, &wrong, &int(20)).unwrap().passed);
    }

    #[test]
    fn quotient_bookkeeping() {
        let q = EtaQuotient::new(
            CycNumber::from_int(1),
            vec![EtaFactor::new(int(1), rat(3, 2), 1), EtaFactor::simple(2, 0), EtaFactor::new(int(1), rat(1, 2), 1)],
        );
        assert_eq!(q.factors, vec![EtaFactor::new(int(1), rat(1, 2), 2)]);
        assert_eq!(q.prefactor, CycNumber::e(1, 24));
        assert_eq!(q.leading_exponent(), rat(1, 12));
        assert_eq!(q.leading_coefficient(), CycNumber::e(1, 24).mul_ref(&CycNumber::e(1, 24)));
        let expanded = q.expand(&int(10)).unwrap();
        assert_eq!(expanded.leading().unwrap().1, q.leading_coefficient());
        assert_eq!(q.to_string(), format!("({}) · η(τ + 1/2)^2", CycNumber::e(1, 24)));
        let json = serde_json::to_string(&EtaFactor::simple(4, -1)).unwrap();
        assert_eq!(json, r#"{"scale":"4/1","shift":"0/1","exponent":-1}"#);
    }

    proptest! {
        #[test]
        fn leading_term_law(d1 in 1i64..5, d2 in 1i64..5, a in 0i64..6, b in 1i64..6) {
            let t = int(12);
            let x = eta_series(&int(d1), &rat(a, b), &t).unwrap();
            let y = eta_series(&int(d2), &rat(b, 7), &t).unwrap();
            let p = x.mul(&y).unwrap();
            let (lx, cx) = x.leading().unwrap();
            let (ly, cy) = y.leading().unwrap();
            let (lp, cp) = p.leading().unwrap();
            prop_assert_eq!(lp, lx + ly);
            prop_assert_eq!(cp, cx.mul_ref(&cy));
        }

        #[test]
        fn integer_shift_law(d in 1i64..6, r in -5i64..6) {
            let t = int(20);
            let shifted = eta_series(&int(d), &int(r), &t).unwrap();
            let expected = eta_series(&int(d), &int(0), &t).unwrap().scale(&CycNumber::e(r, 24)).unwrap();
            prop_assert!(shifted.equals_to_precision(&expected));
        }
    }
}
