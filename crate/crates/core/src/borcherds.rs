//! Borcherds products for `L_{N,N'} = H(N) ⊕ H(N')` at the cusp `(∞, ∞)`:
//! Weyl vectors, the split product `ψ₁(τ₁)ψ₂(τ₂)`, eta-quotient
//! identification and the eta identities obtained from relations.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{divisors, is_prime, mod_inverse, units_mod};
use crate::cyclo::CycNumber;
use crate::error::{invalid, Error, Result};
use crate::fqmod::FqModule;
use crate::linalg::rref;
use crate::lnn_catalog::{
    characteristic_rows, classify_params, exny0_first, exny0_second, family_exny0, family_exy_y, relations_np,
    selfdual_list_np, HxyzParams, SelfDualSpec,
};
use crate::qseries::{assert_identity, e_of, EtaFactor, EtaQuotient, FracQSeries, IdentityReport};
use crate::rational::{format_rational, int, rat, Rational};
use crate::weilrep::{indicator_row, GroupRingVector, WeilRep};

/// An integral vector in `ℂ[D_{N,N'}]` checked to be invariant under the Weil representation.
#[derive(Clone, Debug)]
pub struct InputForm {
    module: Arc<FqModule>,
    n: u64,
    n_prime: u64,
    coeffs: Vec<i64>,
}

impl InputForm {
    /// `coeffs` is indexed like the elements of `D_{N,N'}`.
    pub fn new(n: u64, n_prime: u64, coeffs: Vec<i64>) -> Result<Self> {
        if n == 0 || n_prime == 0 || n % n_prime != 0 {
            return invalid("need N' | N");
        }
        let module = Arc::new(FqModule::lnn(n as i64, n_prime as i64)?);
        if coeffs.len() != module.order() {
            return invalid(format!("expected {} coefficients, got {}", module.order(), coeffs.len()));
        }
        let v = GroupRingVector::from_i64(&module, &coeffs);
        let rep = WeilRep::new(&module);
        if rep.apply_t(&v, 1) != v || rep.apply_s(&v) != v {
            return Err(Error::Unsupported("vector is not invariant under the Weil representation".into()));
        }
        Ok(InputForm { module, n, n_prime, coeffs })
    }

    /// From a sparse map of coordinates `(a, b, c, d)` to coefficients.
    pub fn from_coords(n: u64, n_prime: u64, entries: &BTreeMap<[u64; 4], i64>) -> Result<Self> {
        let module = FqModule::lnn(n as i64, n_prime as i64)?;
        let mut coeffs = vec![0; module.order()];
        for (c, &v) in entries {
            let coords: Vec<i64> = c.iter().map(|&x| x as i64).collect();
            coeffs[module.index_of_ints(&coords)] += v;
        }
        Self::new(n, n_prime, coeffs)
    }

    /// `Σ αᵢ v^{Hᵢ}` over cataloged self-dual isotropic subgroups.
    pub fn from_specs(n: u64, n_prime: u64, combo: &[(i64, SelfDualSpec)]) -> Result<Self> {
        let module = Arc::new(FqModule::lnn(n as i64, n_prime as i64)?);
        let mut coeffs = vec![0i64; module.order()];
        for (alpha, spec) in combo {
            if spec.n() != n || spec.n_prime() != n_prime {
                return invalid(format!("{spec} does not live in D_{{{n},{n_prime}}}"));
            }
            for (c, x) in coeffs.iter_mut().zip(&characteristic_rows(&module, std::slice::from_ref(spec))[0]) {
                *c += alpha * x.to_i64().expect("0/1 entry");
            }
        }
        Self::new(n, n_prime, coeffs)
    }

    /// `Σ_{d|N} α_d v^{H_{d,0,N/d}}` on `D_{N,1}`.
    pub fn from_divisor_exponents(n: u64, alpha: &BTreeMap<u64, i64>) -> Result<Self> {
        let combo: Vec<(i64, SelfDualSpec)> = alpha
            .iter()
            .map(|(&d, &a)| Ok((a, divisor_spec(n, d)?)))
            .collect::<Result<_>>()?;
        Self::from_specs(n, 1, &combo)
    }

    pub fn module(&self) -> &Arc<FqModule> {
        &self.module
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn n_prime(&self) -> u64 {
        self.n_prime
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// `c_{(a,b,c,d)}` with coordinates reduced modulo `(N, N, N', N')`.
    pub fn coeff(&self, a: i64, b: i64, c: i64, d: i64) -> i64 {
        self.coeffs[self.module.index_of_ints(&[a, b, c, d])]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.n, self.n_prime) != (other.n, other.n_prime) {
            return invalid("forms live on different modules");
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(InputForm { coeffs, ..self.clone() })
    }
}

/// `v^{H_{d,0,N/d}}` as a spec over `D_{N,1}`.
pub fn divisor_spec(n: u64, d: u64) -> Result<SelfDualSpec> {
    if d == 0 || n % d != 0 {
        return invalid(format!("{d} does not divide {n}"));
    }
    let one = HxyzParams { n: 1, x: 1, y: 0, z: 1 };
    SelfDualSpec::new(HxyzParams { n, x: d, y: 0, z: n / d }, one, (0, 0), (0, 0))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeylVector {
    #[serde(serialize_with = "ser_rational")]
    pub rho_kappa_prime: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub rho_kappa: Rational,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

/// `ρ' = (1/24)Σ c_{(0,x,0,y)}` and `ρ = (1/24N')Σ c_{(0,x,y,0)}`.
pub fn weyl_vector(f: &InputForm) -> WeylVector {
    let (n, np) = (f.n as i64, f.n_prime as i64);
    let mut first = 0i64;
    let mut second = 0i64;
    for x in 0..n {
        for y in 0..np {
            first += f.coeff(0, x, 0, y);
            second += f.coeff(0, x, y, 0);
        }
    }
    WeylVector { rho_kappa_prime: rat(first, 24), rho_kappa: rat(second, 24 * np) }
}

/// `c₀ / 2`.
pub fn weight(f: &InputForm) -> Rational {
    rat(f.coeff(0, 0, 0, 0), 2)
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftResult {
    #[serde(serialize_with = "ser_rational")]
    pub weight: Rational,
    pub weyl: WeylVector,
    pub psi1: FracQSeries,
    pub psi2: FracQSeries,
    pub eta1: Option<EtaQuotient>,
    pub eta2: Option<EtaQuotient>,
    /// The overall constant of the product is not fixed by the expansion.
    pub constant: String,
}

/// `ψ₁ = q^{ρ'} ∏_{λ≥1} ∏_x (1 − ζ_N^x q^λ)^{c_{(0,x,0,λ)}}` below `trunc`.
pub fn psi1(f: &InputForm, trunc: &Rational) -> Result<FracQSeries> {
    let w = weyl_vector(f);
    let (n, np) = (f.n as i64, f.n_prime as i64);
    let mut s = FracQSeries::monomial(&w.rho_kappa_prime, &CycNumber::from_int(1), 24, trunc)?;
    let mut lambda = 1i64;
    while &w.rho_kappa_prime + int(lambda) < *trunc {
        for x in 0..n {
            let c = f.coeff(0, x, 0, lambda.rem_euclid(np));
            if c != 0 {
                s.mul_one_minus(x, f.n, &int(lambda), c)?;
            }
        }
        lambda += 1;
    }
    Ok(s)
}

/// `ψ₂ = q^{ρ/N'} ∏_{λ≥1} ∏_x (1 − ζ_N^x q^{λ/N'})^{c_{(0,x,λ,0)}}` below `trunc`.
pub fn psi2(f: &InputForm, trunc: &Rational) -> Result<FracQSeries> {
    let w = weyl_vector(f);
    let (n, np) = (f.n as i64, f.n_prime as i64);
    let lead = &w.rho_kappa / int(np);
    let mut s = FracQSeries::monomial(&lead, &CycNumber::from_int(1), 24 * f.n_prime, trunc)?;
    let mut lambda = 1i64;
    while &lead + rat(lambda, np) < *trunc {
        for x in 0..n {
            let c = f.coeff(0, x, lambda.rem_euclid(np), 0);
            if c != 0 {
                s.mul_one_minus(x, f.n, &rat(lambda, np), c)?;
            }
        }
        lambda += 1;
    }
    Ok(s)
}

/// Both product factors with `prec` powers of `q` beyond their leading exponents.
pub fn lift(f: &InputForm, prec: u64) -> Result<LiftResult> {
    let w = weyl_vector(f);
    let t1 = &w.rho_kappa_prime + int(prec as i64);
    let t2 = &w.rho_kappa / int(f.n_prime as i64) + int(prec as i64);
    let (eta1, eta2) = match eta_identify(f) {
        Ok((a, b)) => (Some(a), Some(b)),
        Err(Error::Unsupported(_)) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(LiftResult {
        weight: weight(f),
        weyl: w,
        psi1: psi1(f, &t1)?,
        psi2: psi2(f, &t2)?,
        eta1,
        eta2,
        constant: "undetermined".into(),
    })
}

/// Eta factors `(τ₁ side, τ₂ side)` of the lift of one cataloged subgroup.
pub fn eta_factors(spec: &SelfDualSpec) -> Result<(EtaFactor, EtaFactor)> {
    let (n, np) = (spec.n(), spec.n_prime());
    let (f, s) = (spec.first, spec.second);
    if f.y == 0 && s.y == 0 {
        let d = [f.x, f.z, s.x, s.z];
        let (d1, d2, d3, d4) = (f.x as i64, f.z as i64, s.x as i64, s.z as i64);
        for a in units_mod(np) {
            let a = a as i64;
            let inv = mod_inverse(a, np).unwrap_or(0) as i64;
            if exny0_first(n, np, d, a as u64).ok().as_ref() == Some(spec) {
                return Ok((
                    EtaFactor::new(int(d1 * d4), -rat(a * d1 * d2, n as i64), 1),
                    EtaFactor::new(rat(d1, d4), int(0), 1),
                ));
            }
            if exny0_second(n, np, d, a as u64).ok().as_ref() == Some(spec) {
                return Ok((
                    EtaFactor::new(rat(np as i64 * d1, d3), int(0), 1),
                    EtaFactor::new(rat(d1 * d3, np as i64), rat(inv * d1 * d2, n as i64), 1),
                ));
            }
        }
    }
    if n == np && f.y != 0 && family_exy_y(n, f, 1).ok().as_ref() == Some(spec) {
        let (x, y, z) = (f.x as i64, f.y as i64, f.z as i64);
        let nn = n as i64;
        return Ok((
            EtaFactor::new(int(x * z), rat(x * z, nn), 1),
            EtaFactor::new(rat(nn * x, z), -rat(y, z), 1),
        ));
    }
    Err(Error::Unsupported(format!("no eta form is known for {spec}")))
}

/// The cataloged subgroups used for decompositions on `D_{N,N'}`.
pub fn eta_catalog(n: u64, np: u64) -> Result<Vec<SelfDualSpec>> {
    let mut out = family_exny0(n, np)?;
    if n == np {
        for p in HxyzParams::all(n) {
            if p.y != 0 && classify_params(&p).is_coisotropic {
                if let Ok(s) = family_exy_y(n, p, 1) {
                    if !out.contains(&s) {
                        out.push(s);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Integer coefficients `α` with `f = Σ αᵢ v^{Hᵢ}` over [`eta_catalog`].
pub fn decompose(f: &InputForm) -> Result<Vec<(i64, SelfDualSpec)>> {
    let specs = eta_catalog(f.n, f.n_prime)?;
    let rows = characteristic_rows(&f.module, &specs);
    let k = specs.len();
    // columns: one per spec, then the target; rows: group elements
    let matrix: Vec<Vec<Rational>> = (0..f.module.order())
        .map(|e| {
            let mut r: Vec<Rational> = rows.iter().map(|row| Rational::from_integer(row[e].clone())).collect();
            r.push(int(f.coeffs[e]));
            r
        })
        .collect();
    let ech = rref(matrix, k + 1);
    if ech.pivots.contains(&k) {
        return Err(Error::Unsupported("form is outside the span of the cataloged subgroups".into()));
    }
    let mut out = Vec::new();
    for (row, &p) in ech.rows.iter().zip(&ech.pivots) {
        let a = &row[k];
        if a.is_zero() {
            continue;
        }
        if !a.is_integer() {
            return Err(Error::Unsupported("no integral decomposition found".into()));
        }
        out.push((a.to_integer().to_i64().expect("small coefficient"), specs[p].clone()));
    }
    Ok(out)
}

/// Symbolic eta quotients for `ψ₁` and `ψ₂`, each up to a constant.
pub fn eta_identify(f: &InputForm) -> Result<(EtaQuotient, EtaQuotient)> {
    let combo = decompose(f)?;
    eta_from_decomposition(&combo)
}

pub fn eta_from_decomposition(combo: &[(i64, SelfDualSpec)]) -> Result<(EtaQuotient, EtaQuotient)> {
    let mut one = Vec::new();
    let mut two = Vec::new();
    for (alpha, spec) in combo {
        let (a, b) = eta_factors(spec)?;
        one.push(EtaFactor { exponent: alpha * a.exponent, ..a });
        two.push(EtaFactor { exponent: alpha * b.exponent, ..b });
    }
    Ok((EtaQuotient::new(CycNumber::from_int(1), one), EtaQuotient::new(CycNumber::from_int(1), two)))
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftCheck {
    pub psi1_matches: bool,
    pub psi2_matches: bool,
    pub first_mismatch: Option<String>,
    #[serde(serialize_with = "ser_rational")]
    pub psi1_lead: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub psi2_lead: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub eta1_lead: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub eta2_lead: Rational,
}

impl LiftCheck {
    pub fn passed(&self) -> bool {
        self.psi1_matches && self.psi2_matches
    }
}

/// Compares `ψ₁, ψ₂` with the eta quotients after dividing each series by
/// its leading monomial, to `prec` powers of `q`.
pub fn check_lift_against_eta(f: &InputForm, prec: u64) -> Result<LiftCheck> {
    let lifted = lift(f, prec)?;
    let (e1, e2) = match (&lifted.eta1, &lifted.eta2) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        _ => return Err(Error::Unsupported("form has no eta identification".into())),
    };
    let p = int(prec as i64);
    let x1 = e1.expand(&(e1.leading_exponent() + &p))?.normalize_monomial()?;
    let x2 = e2.expand(&(e2.leading_exponent() + &p))?.normalize_monomial()?;
    let y1 = lifted.psi1.normalize_monomial()?;
    let y2 = lifted.psi2.normalize_monomial()?;
    let m1 = y1.first_mismatch(&x1);
    let m2 = y2.first_mismatch(&x2);
    let lead = |s: &FracQSeries| s.leading().map_or(Rational::zero(), |l| l.0);
    Ok(LiftCheck {
        psi1_matches: m1.is_none(),
        psi2_matches: m2.is_none(),
        first_mismatch: m1.or(m2).map(|e| format_rational(&e)),
        psi1_lead: lead(&lifted.psi1),
        psi2_lead: lead(&lifted.psi2),
        eta1_lead: e1.leading_exponent(),
        eta2_lead: e2.leading_exponent(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CharacterReport {
    pub weyl_first_integral: bool,
    pub weyl_second_integral: bool,
    pub weight_even: bool,
    pub square_product: bool,
    pub trivial: bool,
}

/// Sufficient conditions for a trivial character of the lift of
/// `Σ_{d|N} α_d v^{H_{d,0,N/d}}`: `Σ dα_d ≡ Σ (N/d)α_d ≡ 0 mod 24`, weight
/// `½Σα_d` even, and `∏ d^{α_d}` a rational square.
pub fn character_conditions(n: u64, alpha: &BTreeMap<u64, i64>) -> Result<CharacterReport> {
    if let Some(&d) = alpha.keys().find(|&&d| d == 0 || n % d != 0) {
        return invalid(format!("{d} does not divide {n}"));
    }
    let s1: i64 = alpha.iter().map(|(&d, &a)| d as i64 * a).sum();
    let s2: i64 = alpha.iter().map(|(&d, &a)| (n / d) as i64 * a).sum();
    let total: i64 = alpha.values().sum();
    // ∏ d^α is a square iff every prime appears to an even total power
    let mut primes: BTreeMap<u64, i64> = BTreeMap::new();
    for (&d, &a) in alpha {
        for (p, e) in crate::arith::factorize(d) {
            *primes.entry(p).or_insert(0) += e as i64 * a;
        }
    }
    let report = CharacterReport {
        weyl_first_integral: s1 % 24 == 0,
        weyl_second_integral: s2 % 24 == 0,
        weight_even: total % 4 == 0,
        square_product: primes.values().all(|e| e % 2 == 0),
        trivial: false,
    };
    Ok(CharacterReport {
        trivial: report.weyl_first_integral && report.weyl_second_integral && report.weight_even && report.square_product,
        ..report
    })
}

/// [`character_conditions`] for a form on `D_{N,1}`.
pub fn character_trivial_check(f: &InputForm) -> Result<CharacterReport> {
    if f.n_prime != 1 {
        return Err(Error::Unsupported("character criteria are implemented for N' = 1".into()));
    }
    let mut alpha = BTreeMap::new();
    for (a, spec) in decompose(f)? {
        if spec.first.y != 0 || spec.first.x * spec.first.z != f.n {
            return Err(Error::Unsupported(format!("{spec} is not of the form H_{{d,0,N/d}}")));
        }
        *alpha.entry(spec.first.x).or_insert(0) += a;
    }
    character_conditions(f.n, &alpha)
}

/// A nonzero exponent vector found by exhaustive search that satisfies
/// every trivial-character condition: `N = 2`, `α₁ = α₂ = 8`.
pub fn character_fixture() -> (u64, BTreeMap<u64, i64>) {
    (2, BTreeMap::from([(1, 8), (2, 8)]))
}

#[derive(Clone, Debug, Serialize)]
pub struct EtaIdentity {
    pub n: u64,
    pub p: u64,
    pub relation: Vec<i64>,
    /// `τ₁` side written as `numerator = constant · denominator`.
    pub numerator: EtaQuotient,
    pub denominator: EtaQuotient,
    pub constant: CycNumber,
    pub tau2_constant: CycNumber,
    pub report: IdentityReport,
    pub tau2_report: IdentityReport,
}

impl EtaIdentity {
    pub fn passed(&self) -> bool {
        self.report.passed && self.tau2_report.passed
    }

    pub fn rendered(&self) -> String {
        format!("{} = ({}) · {}", self.numerator, self.constant, self.denominator)
    }
}

fn split_sides(q: &EtaQuotient) -> (EtaQuotient, EtaQuotient) {
    let (pos, neg): (Vec<EtaFactor>, Vec<EtaFactor>) = q.factors.iter().cloned().partition(|f| f.exponent > 0);
    let neg = neg.into_iter().map(|f| EtaFactor { exponent: -f.exponent, ..f }).collect();
    (EtaQuotient::new(q.prefactor.clone(), pos), EtaQuotient::new(CycNumber::from_int(1), neg))
}

/// Proves a one-variable identity `A = C·B` to `prec` terms: the lift of a
/// relation is constant, so each side quotient `A/B` must expand to a constant.
fn constant_identity(q: &EtaQuotient, prec: u64) -> Result<(EtaQuotient, EtaQuotient, CycNumber, IdentityReport)> {
    if !q.leading_exponent().is_zero() {
        return Err(Error::Violation(format!("{q} has nonzero order {}", q.leading_exponent())));
    }
    let (num, den) = split_sides(q);
    let constant = q.leading_coefficient();
    let scaled = EtaQuotient::new(constant.clone(), den.factors.clone());
    let t = num.leading_exponent() + int(prec as i64);
    let report = assert_identity(&num, &scaled, &t)?;
    Ok((num, den, constant, report))
}

/// Lifts a relation among the generators of `D_{N,p}` to an eta identity in
/// each variable, fixing the constant by the leading coefficients.
pub fn relation_to_eta_identity(n: u64, p: u64, rel: &[i64], prec: u64) -> Result<EtaIdentity> {
    let specs = selfdual_list_np(n, p)?;
    if rel.len() != specs.len() {
        return invalid(format!("relation has {} entries, expected {}", rel.len(), specs.len()));
    }
    let module = Arc::new(FqModule::lnn(n as i64, p as i64)?);
    let mut sum = vec![BigInt::zero(); module.order()];
    for (a, spec) in rel.iter().zip(&specs) {
        let row = indicator_row(&module, &crate::lnn_catalog::assemble_in(&module, spec));
        for (s, x) in sum.iter_mut().zip(row) {
            *s += x * a;
        }
    }
    if sum.iter().any(|x| !x.is_zero()) {
        return invalid("not a relation among the characteristic functions");
    }
    let combo: Vec<(i64, SelfDualSpec)> =
        rel.iter().zip(&specs).filter(|(a, _)| **a != 0).map(|(&a, s)| (a, s.clone())).collect();
    let (e1, e2) = eta_from_decomposition(&combo)?;
    let (numerator, denominator, constant, report) = constant_identity(&e1, prec)?;
    let (_, _, tau2_constant, tau2_report) = constant_identity(&e2, prec)?;
    Ok(EtaIdentity {
        n,
        p,
        relation: rel.to_vec(),
        numerator,
        denominator,
        constant,
        tau2_constant,
        report,
        tau2_report,
    })
}

/// All relations of `D_{N,p}` lifted and verified.
pub fn verify_relations(n: u64, p: u64, prec: u64) -> Result<Vec<EtaIdentity>> {
    relations_np(n, p)?.iter().map(|r| relation_to_eta_identity(n, p, r, prec)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimeEtaReport {
    pub p: u64,
    pub identity: String,
    pub report: IdentityReport,
    pub lhs_leading: CycNumber,
    pub expected_constant: CycNumber,
    pub constant_matches: bool,
    /// The constant obtained from lifting the `D_{p,p}` relation.
    pub relation_constant: CycNumber,
    pub relation_passed: bool,
}

impl PrimeEtaReport {
    pub fn passed(&self) -> bool {
        self.report.passed && self.constant_matches && self.relation_passed
    }
}

/// `∏_{a=1}^{p−1} η(τ + a/p) = e((p−1)/48)·η(pτ)^{p+1}/(η(τ)η(p²τ))` to `prec` terms.
pub fn verify_prime_eta(p: u64, prec: u64) -> Result<PrimeEtaReport> {
    if !is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    let pi = p as i64;
    let lhs = EtaQuotient::new(
        CycNumber::from_int(1),
        (1..pi).map(|a| EtaFactor::new(int(1), rat(a, pi), 1)).collect(),
    );
    let expected_constant = e_of(&rat(pi - 1, 48));
    let rhs = EtaQuotient::new(
        expected_constant.clone(),
        vec![EtaFactor::simple(pi, pi + 1), EtaFactor::simple(1, -1), EtaFactor::simple(pi * pi, -1)],
    );
    let t = lhs.leading_exponent() + int(prec as i64);
    let report = assert_identity(&lhs, &rhs, &t)?;
    let lhs_leading = lhs.leading_coefficient();
    let constant_matches = lhs_leading == rhs.leading_coefficient() && rhs.leading_coefficient() == expected_constant;
    let rel = relations_np(p, p)?.remove(0);
    let lifted = relation_to_eta_identity(p, p, &rel, prec)?;
    Ok(PrimeEtaReport {
        p,
        identity: format!("{lhs} = {rhs}"),
        report,
        lhs_leading,
        relation_passed: lifted.passed() && lifted.constant == expected_constant,
        relation_constant: lifted.constant,
        expected_constant,
        constant_matches,
    })
}

/// Divisors `d` of `N` together with `v^{H_{d,0,N/d}}` as input forms.
pub fn divisor_basis(n: u64) -> Result<Vec<(u64, InputForm)>> {
    divisors(n)
        .into_iter()
        .map(|d| Ok((d, InputForm::from_divisor_exponents(n, &BTreeMap::from([(d, 1)]))?)))
        .collect()
}
