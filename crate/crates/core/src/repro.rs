//! The reproduction suite: each check recomputes one result
//! exactly and reports pass/fail with a one-line summary.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use serde::Serialize;

use crate::arith::{divisors, is_prime, sigma0};
use crate::borcherds::{check_lift_against_eta, divisor_basis, verify_prime_eta, weyl_vector};
use crate::cyclo::{rational_sqrt, CycNumber};
use crate::error::{Error, Result};
use crate::fqmod::FqModule;
use crate::linalg::left_kernel;
use crate::lnn_catalog::{
    assemble_in, characteristic_rows, classify_params, dimension_formula, dimension_np, hxyz_complement,
    hxyz_subgroup_in, relations_np, selfdual_list_np, HxyzParams,
};
use crate::qseries::{eta_series, eta_series_naive};
use crate::rational::{int, rat, Rational};
use crate::subgroups::{enumerate_self_dual_isotropic, enumerate_subgroups, Subgroup};
use crate::weilrep::{indicator_row, invariant_space, rational_rank, verify_self_dual_span, WeilRep};

/// The `D_{N,p}` pairs with a prime `p` used throughout.
pub const NP_PAIRS: [(u64, u64); 5] = [(2, 2), (3, 3), (4, 2), (6, 2), (6, 3)];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] criterion {}: {} ({:.1}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.detail
        )
    }
}

pub const TITLES: [&str; 9] = [
    "invariant dimensions of D_{N,1}, N <= 30",
    "self-dual isotropic subgroups span the invariants",
    "dimension formulas",
    "closed forms for H_{x,y,z} vs brute force",
    "catalog completeness for D_{N,p}",
    "Weil representation relations",
    "lift of v^{H_d} equals eta(d tau) in both variables",
    "prime eta identities",
    "pentagonal vs naive eta expansion",
];

/// Runs criterion `id` (1 to 9).
pub fn run(id: u8) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => criterion_invariant_dimensions(),
        2 => criterion_span(),
        3 => criterion_dimension_formulas(),
        4 => criterion_closed_forms(),
        5 => criterion_catalog(),
        6 => criterion_weil_relations(),
        7 => criterion_lift_eta(),
        8 => criterion_prime_eta(),
        9 => criterion_pentagonal(),
        _ => Err(Error::InvalidArgument(format!("no criterion {id}"))),
    };
    let (passed, detail) = match outcome {
        Ok(d) => (true, d),
        Err(e) => (false, e.to_string()),
    };
    CriterionResult {
        id,
        title: TITLES.get(id.wrapping_sub(1) as usize).copied().unwrap_or("unknown"),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=9).map(run).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Violation(msg()))
    }
}

fn lnn(n: u64, np: u64) -> Result<Arc<FqModule>> {
    Ok(Arc::new(FqModule::lnn(n as i64, np as i64)?))
}

pub fn criterion_invariant_dimensions() -> Result<String> {
    for n in 1..=30u64 {
        let m = lnn(n, 1)?;
        let inv = invariant_space(&m);
        let rows: Vec<Vec<BigInt>> = divisors(n)
            .iter()
            .map(|&d| indicator_row(&m, &hxyz_subgroup_in(&m, &HxyzParams { n, x: d, y: 0, z: n / d })))
            .collect();
        let family_rank = rational_rank(&rows);
        let mut joint = rows;
        joint.extend(inv.basis.iter().cloned());
        let s = sigma0(n) as usize;
        ensure(inv.dimension == s && family_rank == s && rational_rank(&joint) == s, || {
            format!("N = {n}: dim {}, family rank {family_rank}, sigma0 {s}", inv.dimension)
        })?;
    }
    Ok("dim = sigma0(N) and {v^{H_d}} is a basis for all N <= 30".into())
}

pub fn criterion_span() -> Result<String> {
    let mut modules: Vec<(u64, u64)> = (1..=12).map(|n| (n, 1)).collect();
    modules.extend(NP_PAIRS);
    for &(n, np) in &modules {
        verify_self_dual_span(&lnn(n, np)?).map_err(|e| Error::Violation(format!("D_{{{n},{np}}}: {e}")))?;
    }
    Ok(format!("{} modules, spans equal", modules.len()))
}

pub fn criterion_dimension_formulas() -> Result<String> {
    for (n, p) in NP_PAIRS {
        let exact = invariant_space(&lnn(n, p)?).dimension as u64;
        let closed = dimension_np(n, p)?;
        let product = dimension_formula(n, p)?;
        ensure(exact == closed && closed == product, || {
            format!("D_{{{n},{p}}}: kernel {exact}, (2p-3)sigma0(N/p)+2sigma0(N) = {closed}, product {product}")
        })?;
    }
    for (n, np) in [(4u64, 2u64), (6, 2), (12, 2)] {
        let exact = invariant_space(&lnn(n, np)?).dimension as u64;
        let formula = dimension_formula(n, np)?;
        ensure(exact == formula, || format!("D_{{{n},{np}}}: kernel {exact}, formula {formula}"))?;
    }
    // D_{30,6} through its p-primary parts
    let parts = FqModule::lnn(30, 6)?.p_primary_decomposition();
    let mut product = 1u64;
    let mut factors = Vec::new();
    for part in parts {
        let d = invariant_space(&Arc::new(part.module)).dimension as u64;
        factors.push(format!("{}:{d}", part.prime));
        product *= d;
    }
    let formula = dimension_formula(30, 6)?;
    ensure(product == formula, || format!("D_{{30,6}}: primary product {product}, formula {formula}"))?;
    Ok(format!("all pairs agree; D_{{30,6}} = {} = {formula}", factors.join(" x ")))
}

pub fn criterion_closed_forms() -> Result<String> {
    let mut checked = 0;
    for n in 1..=12u64 {
        let m = Arc::new(FqModule::hyperbolic(n as i64)?);
        for p in HxyzParams::all(n) {
            let h = hxyz_subgroup_in(&m, &p);
            ensure(hxyz_subgroup_in(&m, &hxyz_complement(&p)) == h.complement(), || format!("complement of {p}"))?;
            ensure(classify_params(&p) == h.classify(), || format!("classification of {p}"))?;
            checked += 1;
        }
        // every subgroup of (Z/N)² is some H_{x,y,z}
        let listed: BTreeSet<Vec<usize>> =
            HxyzParams::all(n).iter().map(|p| hxyz_subgroup_in(&m, p).elements().to_vec()).collect();
        let all: BTreeSet<Vec<usize>> = enumerate_subgroups(&m)?.iter().map(|h| h.elements().to_vec()).collect();
        ensure(listed == all, || format!("N = {n}: parametrization misses subgroups"))?;
    }
    Ok(format!("{checked} triples, zero discrepancies"))
}

fn element_set(h: &Subgroup) -> Vec<usize> {
    h.elements().to_vec()
}

pub fn criterion_catalog() -> Result<String> {
    let mut cases = 0;
    for n in 1..=6u64 {
        for p in divisors(n).into_iter().filter(|&p| is_prime(p)) {
            let m = lnn(n, p)?;
            let specs = selfdual_list_np(n, p)?;
            let listed: BTreeSet<Vec<usize>> = specs.iter().map(|s| element_set(&assemble_in(&m, s))).collect();
            let found: BTreeSet<Vec<usize>> = enumerate_self_dual_isotropic(&m)?.iter().map(element_set).collect();
            ensure(listed == found, || format!("D_{{{n},{p}}}: list and enumeration differ"))?;
            let expected = 2 * sigma0(n) + 2 * (p - 1) * sigma0(n / p);
            ensure(specs.len() as u64 == expected && listed.len() == specs.len(), || {
                format!("D_{{{n},{p}}}: {} generators, expected {expected}", specs.len())
            })?;
            let rows = characteristic_rows(&m, &specs);
            let rational: Vec<Vec<Rational>> =
                rows.iter().map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect();
            let nullity = left_kernel(&rational, m.order()).len() as u64;
            let rels = relations_np(n, p)?;
            let rel_rank = rational_rank(
                &rels.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect::<Vec<_>>(),
            ) as u64;
            let in_kernel = rels.iter().all(|r| {
                (0..m.order()).all(|e| rows.iter().zip(r).map(|(row, &c)| &row[e] * c).sum::<BigInt>() == BigInt::from(0))
            });
            ensure(nullity == sigma0(n / p) && rel_rank == nullity && in_kernel, || {
                format!("D_{{{n},{p}}}: nullity {nullity}, relations rank {rel_rank}, expected {}", sigma0(n / p))
            })?;
            cases += 1;
        }
    }
    Ok(format!("{cases} modules D_{{N,p}} with N <= 6"))
}

/// Modules `D_{N,N'}` with `|D| ≤ 144`.
pub fn small_modules() -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for n in 1..=12u64 {
        for np in divisors(n) {
            if n * np <= 12 {
                out.push((n, np));
            }
        }
    }
    out
}

pub fn criterion_weil_relations() -> Result<String> {
    let mut subgroups = 0;
    let modules = small_modules();
    for &(n, np) in &modules {
        let m = lnn(n, np)?;
        let rep = WeilRep::new(&m);
        let s = rep.rho_s();
        let t = rep.rho_t();
        let s2 = s.mul(&s);
        ensure(s2.mul(&s2).is_identity(), || format!("D_{{{n},{np}}}: S^4 != I"))?;
        let st = s.mul(&t);
        ensure(st.mul(&st).mul(&st).equals(&s2), || format!("D_{{{n},{np}}}: (ST)^3 != S^2"))?;
        ensure(s.mul(&s.conj_transpose()).is_identity() && t.mul(&t.conj_transpose()).is_identity(), || {
            format!("D_{{{n},{np}}}: not unitary")
        })?;
        let root = rational_sqrt(m.order() as u64)?;
        for h in enumerate_subgroups(&m)? {
            let factor = CycNumber::from_rational(Rational::from_integer(BigInt::from(h.order())) / &root);
            let expected = h.complement().characteristic_vector().scale(&factor);
            ensure(s.apply(&h.characteristic_vector()) == expected, || {
                format!("D_{{{n},{np}}}: S v^H != |H|/sqrt|D| v^(H perp)")
            })?;
            subgroups += 1;
        }
    }
    Ok(format!("{} modules, {subgroups} subgroups", modules.len()))
}

pub fn criterion_lift_eta() -> Result<String> {
    let mut cases = 0;
    for n in 1..=12u64 {
        for (d, f) in divisor_basis(n)? {
            let check = check_lift_against_eta(&f, 200)?;
            let w = weyl_vector(&f);
            let expected = rat(d as i64, 24);
            ensure(check.passed(), || format!("N = {n}, d = {d}: series differ at q^{:?}", check.first_mismatch))?;
            ensure(
                w.rho_kappa_prime == expected
                    && w.rho_kappa == expected
                    && check.psi1_lead == expected
                    && check.psi2_lead == expected
                    && check.eta1_lead == expected
                    && check.eta2_lead == expected,
                || format!("N = {n}, d = {d}: leading exponents {check:?}"),
            )?;
            cases += 1;
        }
    }
    Ok(format!("{cases} basis vectors, 200 terms each"))
}

pub fn criterion_prime_eta() -> Result<String> {
    let mut done = Vec::new();
    for p in [2u64, 3, 5, 7] {
        let r = verify_prime_eta(p, 200)?;
        ensure(r.passed(), || {
            format!("p = {p}: mismatch at {:?}, constant {}", r.report.first_mismatch, r.relation_constant)
        })?;
        done.push(format!("p={p}"));
    }
    Ok(format!("{} verified to 200 terms with constant e((p-1)/48)", done.join(",")))
}

pub fn criterion_pentagonal() -> Result<String> {
    let cases = [
        (int(1), int(0)),
        (int(2), int(0)),
        (int(1), rat(1, 2)),
        (int(1), rat(1, 3)),
        (int(3), rat(2, 7)),
        (rat(1, 2), rat(-1, 5)),
    ];
    for (d, r) in &cases {
        let t = d / int(24) + int(300);
        let a = eta_series(d, r, &t)?;
        let b = eta_series_naive(d, r, &t)?;
        ensure(a.trunc() == b.trunc() && a.equals_to_precision(&b), || {
            format!("eta({d} tau + {r}) differs at {:?}", a.first_mismatch(&b))
        })?;
    }
    Ok(format!("{} expansions agree to order 300", cases.len()))
}
