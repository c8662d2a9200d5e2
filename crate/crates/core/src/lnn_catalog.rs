//! Subgroups of `(ℤ/Nℤ)²` in `H_{x,y,z}` form and self-dual isotropic
//! subgroups of `D_{N,N'}` assembled from pairs of co-isotropic projections.
//!
//! Coordinates of `D_{N,N'}` are `(x, y, z, w)` with `Q = xy/N + zw/N'`.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::Serialize;

use crate::arith::{divisors, is_prime, is_square_free, mod_inverse, modulo, sigma0, units_mod};
use crate::error::{invalid, Error, Result};
use crate::fqmod::FqModule;
use crate::subgroups::{Subgroup, SubgroupClass};

/// `H_{x,y,z} = ⟨(x, y), (0, z)⟩ ⊂ (ℤ/Nℤ)²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HxyzParams {
    pub n: u64,
    pub x: u64,
    pub y: u64,
    pub z: u64,
}

impl HxyzParams {
    /// Normalizes arbitrary generators `(x, y), (0, z)` through the subgroup
    /// they generate, so `x` and `z` become divisors and `0 ≤ y < z`.
    pub fn new(n: u64, x: i64, y: i64, z: i64) -> Result<Self> {
        if n == 0 {
            return invalid("N must be positive");
        }
        let parent = Arc::new(FqModule::hyperbolic(n as i64)?);
        canonical_params(&Subgroup::from_coords(&parent, &[vec![x, y], vec![0, z]]))
    }

    /// Whether the triple is already in normal form.
    pub fn is_normalized(&self) -> bool {
        let n = self.n;
        n > 0
            && self.x >= 1
            && self.z >= 1
            && n % self.x == 0
            && n % self.z == 0
            && self.y < self.z
            && (n * self.y) % (self.x * self.z) == 0
    }

    pub fn order(&self) -> u64 {
        (self.n / self.x) * (self.n / self.z)
    }

    /// Every normalized triple for this `N`, ordered by `(x, z, y)`.
    pub fn all(n: u64) -> Vec<HxyzParams> {
        let mut out = Vec::new();
        for &x in &divisors(n) {
            for &z in &divisors(n) {
                for y in 0..z {
                    let p = HxyzParams { n, x, y, z };
                    if p.is_normalized() {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    /// Elements as coordinate pairs.
    pub fn elements(&self) -> Vec<(u64, u64)> {
        let n = self.n;
        let mut set = BTreeSet::new();
        for i in 0..n / self.x {
            for j in 0..n / self.z {
                set.insert(((i * self.x) % n, (i * self.y + j * self.z) % n));
            }
        }
        set.into_iter().collect()
    }
}

impl std::fmt::Display for HxyzParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "H_{{{},{},{}}} (N = {})", self.x, self.y, self.z, self.n)
    }
}

pub fn hxyz_subgroup_in(parent: &Arc<FqModule>, p: &HxyzParams) -> Subgroup {
    let (x, y, z) = (p.x as i64, p.y as i64, p.z as i64);
    Subgroup::from_coords(parent, &[vec![x, y], vec![0, z]])
}

/// The subgroup `H_{x,y,z}` of a freshly built `(ℤ/Nℤ)²`.
pub fn hxyz_subgroup(p: &HxyzParams) -> Result<Subgroup> {
    let parent = Arc::new(FqModule::hyperbolic(p.n as i64)?);
    Ok(hxyz_subgroup_in(&parent, p))
}

/// Normal form of a set of pairs closed under addition in `(ℤ/Nℤ)²`.
fn params_of_pairs(n: u64, pairs: &[(u64, u64)]) -> HxyzParams {
    let x = pairs.iter().map(|&(a, _)| if a == 0 { n } else { a }).min().unwrap_or(n);
    let x_mod = x % n;
    let y = pairs.iter().filter(|&&(a, _)| a == x_mod).map(|&(_, b)| b).min().unwrap_or(0);
    let z = pairs.iter().filter(|&&(a, b)| a == 0 && b != 0).map(|&(_, b)| b).min().unwrap_or(n);
    HxyzParams { n, x, y: y % z, z }
}

/// Reads off `x`, `y`, `z` by the minimality formulas.
pub fn canonical_params(h: &Subgroup) -> Result<HxyzParams> {
    let m = h.parent();
    if m.rank() != 2 || m.orders()[0] != m.orders()[1] || m.q_gen().iter().any(|q| !q.is_zero()) {
        return invalid("expected a subgroup of a hyperbolic plane (ℤ/Nℤ)²");
    }
    let n = m.orders()[0];
    let pairs: Vec<(u64, u64)> = h
        .elements()
        .iter()
        .map(|&e| {
            let c = m.coords(e);
            (c[0], c[1])
        })
        .collect();
    Ok(params_of_pairs(n, &pairs))
}

/// `H_{x,y,z}^⊥ = H_{N/z, −Ny/(xz), N/x}`.
pub fn hxyz_complement(p: &HxyzParams) -> HxyzParams {
    let n = p.n;
    let z2 = n / p.x;
    let shift = (n * p.y / (p.x * p.z)) as i64;
    HxyzParams { n, x: n / p.z, y: modulo(-shift, z2), z: z2 }
}

/// Flags from the closed-form criteria on `(x, y, z)`.
pub fn classify_params(p: &HxyzParams) -> SubgroupClass {
    let n = p.n;
    let (x, y, z) = (p.x, p.y, p.z);
    let is_self_orthogonal = (x * z) % n == 0 && (2 * x * y) % n == 0;
    SubgroupClass {
        is_isotropic: (x * z) % n == 0 && (x * y) % n == 0,
        is_self_orthogonal,
        is_self_dual: hxyz_complement(p) == *p,
        is_coisotropic: n % (x * z) == 0 && (n * y) % (x * z * z) == 0,
    }
}

/// Co-isotropic subgroups `H_{d₁,0,d₂}` with `d₁d₂ | N` for square-free `N`.
pub fn coisotropic_squarefree(n: u64) -> Result<Vec<HxyzParams>> {
    if !is_square_free(n) {
        return invalid(format!("{n} is not square-free"));
    }
    let mut out = Vec::new();
    for &x in &divisors(n) {
        for &z in &divisors(n) {
            if n % (x * z) == 0 {
                out.push(HxyzParams { n, x, y: 0, z });
            }
        }
    }
    Ok(out)
}

/// `H^{(a,b),(c,d)}_{(x,y,z),(x',y',z')}` in `D_{N,N'}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SelfDualSpec {
    pub first: HxyzParams,
    pub second: HxyzParams,
    pub ab: (u64, u64),
    pub cd: (u64, u64),
}

impl SelfDualSpec {
    pub fn new(first: HxyzParams, second: HxyzParams, ab: (i64, i64), cd: (i64, i64)) -> Result<Self> {
        let np = second.n;
        if first.n % np != 0 {
            return invalid(format!("N' = {np} does not divide N = {}", first.n));
        }
        if !first.is_normalized() || !second.is_normalized() {
            return invalid("parameters must be normalized");
        }
        if np * first.x * first.z != first.n * second.x * second.z {
            return invalid("N'xz = Nx'z' fails");
        }
        let red = |(a, b): (i64, i64)| (modulo(a, np), modulo(b, np));
        let (ab, cd) = (red(ab), red(cd));
        let members = second.elements();
        if !members.contains(&ab) || !members.contains(&cd) {
            return invalid("(a, b) and (c, d) must lie in H_{x',y',z'}");
        }
        Ok(SelfDualSpec { first, second, ab, cd })
    }

    pub fn n(&self) -> u64 {
        self.first.n
    }

    pub fn n_prime(&self) -> u64 {
        self.second.n
    }

    /// Replaces `(a, b)` and `(c, d)` by their lexicographically minimal
    /// representatives modulo `H_{x',y',z'}^⊥`.
    pub fn normalized(&self) -> Self {
        let np = self.n_prime();
        let perp = hxyz_complement(&self.second).elements();
        let least = |(a, b): (u64, u64)| {
            perp.iter().map(|&(u, v)| ((a + u) % np, (b + v) % np)).min().expect("nonempty")
        };
        SelfDualSpec { ab: least(self.ab), cd: least(self.cd), ..self.clone() }
    }

    /// Generators as integer coordinates.
    pub fn generators(&self) -> [[i64; 4]; 4] {
        let (f, s) = (&self.first, &self.second);
        let np = s.n as i64;
        let i = |v: u64| v as i64;
        [
            [i(f.x), i(f.y), i(self.ab.0), i(self.ab.1)],
            [0, i(f.z), i(self.cd.0), i(self.cd.1)],
            [0, 0, np / i(s.z), -(np * i(s.y)) / (i(s.x) * i(s.z))],
            [0, 0, 0, np / i(s.x)],
        ]
    }

    pub fn module(&self) -> Result<Arc<FqModule>> {
        Ok(Arc::new(FqModule::lnn(self.n() as i64, self.n_prime() as i64)?))
    }
}

impl std::fmt::Display for SelfDualSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (a, b) = (self.first, self.second);
        write!(
            f,
            "H_{{({},{},{}),({},{},{})}}^{{({},{}),({},{})}}",
            a.x, a.y, a.z, b.x, b.y, b.z, self.ab.0, self.ab.1, self.cd.0, self.cd.1
        )
    }
}

/// Builds the subgroup inside the given `D_{N,N'}`.
pub fn assemble_in(parent: &Arc<FqModule>, spec: &SelfDualSpec) -> Subgroup {
    let gens: Vec<Vec<i64>> = spec.generators().iter().map(|g| g.to_vec()).collect();
    Subgroup::from_coords(parent, &gens)
}

pub fn assemble(spec: &SelfDualSpec) -> Result<Subgroup> {
    Ok(assemble_in(&spec.module()?, spec))
}

/// The three congruences characterizing self-dual isotropic assemblies.
pub fn condsum_check(spec: &SelfDualSpec) -> bool {
    let (n, np) = (spec.n() as u128, spec.n_prime() as u128);
    let (x, y, z) = (spec.first.x as u128, spec.first.y as u128, spec.first.z as u128);
    let (a, b) = (spec.ab.0 as u128, spec.ab.1 as u128);
    let (c, d) = (spec.cd.0 as u128, spec.cd.1 as u128);
    let r = n / np;
    (r * a * b + x * y) % n == 0 && (c * d) % np == 0 && (r * (a * d + b * c) + x * z) % n == 0
}

/// First case of the `y = 0` family: `(ad₃, 0), (0, −a⁻¹d₄)`.
pub fn exny0_first(n: u64, np: u64, d: [u64; 4], a: u64) -> Result<SelfDualSpec> {
    let [d1, d2, d3, d4] = d;
    let (ab, cd) = exny0_pairs(n, np, d, a)?;
    SelfDualSpec::new(
        HxyzParams { n, x: d1, y: 0, z: d2 },
        HxyzParams { n: np, x: d3, y: 0, z: d4 },
        ab,
        cd,
    )
    .map(|s| s.normalized())
}

/// Second case: the two pairs swapped.
pub fn exny0_second(n: u64, np: u64, d: [u64; 4], a: u64) -> Result<SelfDualSpec> {
    let [d1, d2, d3, d4] = d;
    let (ab, cd) = exny0_pairs(n, np, d, a)?;
    SelfDualSpec::new(
        HxyzParams { n, x: d1, y: 0, z: d2 },
        HxyzParams { n: np, x: d3, y: 0, z: d4 },
        cd,
        ab,
    )
    .map(|s| s.normalized())
}

fn exny0_pairs(n: u64, np: u64, d: [u64; 4], a: u64) -> Result<((i64, i64), (i64, i64))> {
    let [d1, d2, d3, d4] = d;
    if n == 0 || np == 0 || n % np != 0 {
        return invalid("need N' | N");
    }
    if n % d1 != 0 || n % d2 != 0 || n % (d1 * d2) != 0 {
        return invalid("need d₁, d₂ | N and d₁d₂ | N");
    }
    if np % d3 != 0 || np % d4 != 0 || np % (d3 * d4) != 0 {
        return invalid("need d₃, d₄ | N' and d₃d₄ | N'");
    }
    if np * d1 * d2 != n * d3 * d4 {
        return invalid("need N'd₁d₂ = Nd₃d₄");
    }
    let Some(inv) = mod_inverse(a as i64, np) else {
        return invalid(format!("{a} is not a unit modulo {np}"));
    };
    let ab = ((a * d3) as i64, 0);
    let cd = (0, -((inv * d4) as i64));
    Ok((ab, cd))
}

/// All members of both `y = 0` families, normalized and without repeats.
pub fn family_exny0(n: u64, np: u64) -> Result<Vec<SelfDualSpec>> {
    if n == 0 || np == 0 || n % np != 0 {
        return invalid("need N' | N");
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &d1 in &divisors(n) {
        for &d2 in divisors(n).iter().filter(|&&d2| n % (d1 * d2) == 0) {
            for &d3 in &divisors(np) {
                for &d4 in divisors(np).iter().filter(|&&d4| np % (d3 * d4) == 0) {
                    if np * d1 * d2 != n * d3 * d4 {
                        continue;
                    }
                    for a in units_mod(np) {
                        for s in [
                            exny0_first(n, np, [d1, d2, d3, d4], a)?,
                            exny0_second(n, np, [d1, d2, d3, d4], a)?,
                        ] {
                            if seen.insert(s.clone()) {
                                out.push(s);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `H^{(−ux, u⁻¹y),(0, u⁻¹z)}_{(x,y,z),(x,−y,z)}` in `D_{N,N}`.
pub fn family_exy_y(n: u64, p: HxyzParams, u: i64) -> Result<SelfDualSpec> {
    if p.n != n || !p.is_normalized() {
        return invalid("parameters must be a normalized triple over N");
    }
    if p.y == 0 {
        return invalid("this family needs y ≠ 0");
    }
    if !classify_params(&p).is_coisotropic {
        return invalid(format!("{p} is not co-isotropic"));
    }
    let Some(inv) = mod_inverse(u, n) else {
        return invalid(format!("{u} is not a unit modulo {n}"));
    };
    let (x, y, z) = (p.x as i64, p.y as i64, p.z as i64);
    let second = HxyzParams::new(n, x, -y, z)?;
    let inv = inv as i64;
    let spec = SelfDualSpec::new(p, second, (-u * x, inv * y), (0, inv * z)).map_err(|_| {
        Error::InvalidArgument(format!("(−ux, u⁻¹y) is not in H_{{x,−y,z}} for u = {u}"))
    })?;
    Ok(spec.normalized())
}

fn check_np(n: u64, p: u64) -> Result<()> {
    if !is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    if n == 0 || n % p != 0 {
        return invalid(format!("{p} does not divide {n}"));
    }
    Ok(())
}

/// Generators of the invariants of `D_{N,p}` in a fixed order: `H_d ⊕ H_{1,0,p}`
/// and `H_d ⊕ H_{p,0,1}` for `d | N`, then the two twisted families over
/// `d' | N/p` with `a = 1, …, p−1`.
pub fn selfdual_list_np(n: u64, p: u64) -> Result<Vec<SelfDualSpec>> {
    check_np(n, p)?;
    let mut out = Vec::new();
    for second in [HxyzParams { n: p, x: 1, y: 0, z: p }, HxyzParams { n: p, x: p, y: 0, z: 1 }] {
        for &d in &divisors(n) {
            let first = HxyzParams { n, x: d, y: 0, z: n / d };
            out.push(SelfDualSpec::new(first, second, (0, 0), (0, 0))?);
        }
    }
    let sub = divisors(n / p);
    for &d in &sub {
        for a in 1..p {
            out.push(exny0_first(n, p, [d, n / (p * d), 1, 1], a)?);
        }
    }
    for &d in &sub {
        for a in 1..p {
            out.push(exny0_second(n, p, [d, n / (p * d), 1, 1], a)?);
        }
    }
    Ok(out)
}

/// One relation per `d' | N/p`, as coefficients over [`selfdual_list_np`].
pub fn relations_np(n: u64, p: u64) -> Result<Vec<Vec<i64>>> {
    check_np(n, p)?;
    let divs = divisors(n);
    let sub = divisors(n / p);
    let s0 = divs.len();
    let twisted = sub.len() * (p as usize - 1);
    let pos = |d: u64| divs.iter().position(|&x| x == d).expect("divisor");
    let mut out = Vec::new();
    for (j, &d) in sub.iter().enumerate() {
        let mut rel = vec![0i64; 2 * s0 + 2 * twisted];
        rel[pos(d)] += 1;
        rel[s0 + pos(d)] -= 1;
        rel[pos(p * d)] -= 1;
        rel[s0 + pos(p * d)] += 1;
        for a in 0..p as usize - 1 {
            rel[2 * s0 + j * (p as usize - 1) + a] -= 1;
            rel[2 * s0 + twisted + j * (p as usize - 1) + a] += 1;
        }
        out.push(rel);
    }
    Ok(out)
}

/// `(2p − 3)σ₀(N/p) + 2σ₀(N)`.
pub fn dimension_np(n: u64, p: u64) -> Result<u64> {
    check_np(n, p)?;
    Ok((2 * p - 3) * sigma0(n / p) + 2 * sigma0(n))
}

/// Invariant dimension of `D_{N,N'}` for square-free `N' | N`.
pub fn dimension_formula(n: u64, np: u64) -> Result<u64> {
    if n == 0 || np == 0 || n % np != 0 {
        return invalid("need N' | N");
    }
    if !is_square_free(np) {
        return invalid(format!("N' = {np} is not square-free"));
    }
    Ok(crate::arith::factorize(n)
        .into_iter()
        .map(|(p, e)| {
            let e = e as u64;
            if np % p == 0 {
                e * (2 * p - 1) + 2
            } else {
                e + 1
            }
        })
        .product())
}

/// Recovers `(x,y,z)`, `(x',y',z')` and minimal `(a,b)`, `(c,d)` from a
/// self-dual isotropic subgroup of `D_{N,N'}`.
pub fn reconstruct_spec(h: &Subgroup) -> Result<SelfDualSpec> {
    let m = h.parent();
    let o = m.orders();
    if m.rank() != 4 || o[0] != o[1] || o[2] != o[3] {
        return invalid("expected a subgroup of D_{N,N'}");
    }
    let (n, np) = (o[0], o[2]);
    if !h.is_isotropic() || h.order() * h.order() != m.order() {
        return Err(Error::Violation("subgroup is not self-dual isotropic".into()));
    }
    let coords: Vec<Vec<u64>> = h.elements().iter().map(|&e| m.coords(e)).collect();
    let pi1: BTreeSet<(u64, u64)> = coords.iter().map(|c| (c[0], c[1])).collect();
    let pi2: BTreeSet<(u64, u64)> = coords.iter().map(|c| (c[2], c[3])).collect();
    let first = params_of_pairs(n, &pi1.into_iter().collect::<Vec<_>>());
    let second = params_of_pairs(np, &pi2.into_iter().collect::<Vec<_>>());
    let over = |u: u64, v: u64| {
        coords.iter().filter(|c| c[0] == u % n && c[1] == v % n).map(|c| (c[2], c[3])).min()
    };
    let viol = || Error::Violation("projection lifts are missing".into());
    let ab = over(first.x, first.y).ok_or_else(viol)?;
    let cd = over(0, first.z).ok_or_else(viol)?;
    let spec = SelfDualSpec::new(first, second, (ab.0 as i64, ab.1 as i64), (cd.0 as i64, cd.1 as i64))
        .map_err(|e| Error::Violation(format!("projections inconsistent: {e}")))?;
    if assemble_in(m, &spec) != *h {
        return Err(Error::Violation(format!("{spec} does not reassemble the subgroup")));
    }
    Ok(spec)
}

/// Integer characteristic-function rows of a list of specs.
pub fn characteristic_rows(parent: &Arc<FqModule>, specs: &[SelfDualSpec]) -> Vec<Vec<BigInt>> {
    specs
        .iter()
        .map(|s| crate::weilrep::indicator_row(parent, &assemble_in(parent, s)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subgroups::{enumerate_self_dual_isotropic, enumerate_subgroups};
    use crate::weilrep::rational_rank;

    #[test]
    fn normal_forms() {
        let p = HxyzParams { n: 6, x: 2, y: 0, z: 3 };
        assert_eq!(hxyz_subgroup(&p).unwrap().order(), 6);
        assert_eq!(HxyzParams::new(4, 2, 1, 2).unwrap(), HxyzParams { n: 4, x: 2, y: 1, z: 2 });
        assert_eq!(hxyz_subgroup(&HxyzParams { n: 5, x: 5, y: 0, z: 5 }).unwrap().order(), 1);
        // ⟨(1, 3), (0, 4)⟩ in (ℤ/6)²: (0, 2) = 2·(1,3) − ... gives z = 2
        assert_eq!(HxyzParams::new(6, 1, 3, 4).unwrap(), HxyzParams { n: 6, x: 1, y: 1, z: 2 });
    }

    #[test]
    fn every_subgroup_has_unique_normal_form() {
        for n in 1..=12u64 {
            let m = Arc::new(FqModule::hyperbolic(n as i64).unwrap());
            let subs = enumerate_subgroups(&m).unwrap();
            let all = HxyzParams::all(n);
            assert_eq!(subs.len(), all.len(), "N = {n}");
            for h in &subs {
                let p = canonical_params(h).unwrap();
                assert!(p.is_normalized());
                assert_eq!(hxyz_subgroup_in(&m, &p), *h);
                assert_eq!(p.order() as usize, h.order());
            }
            for p in &all {
                assert_eq!(canonical_params(&hxyz_subgroup_in(&m, p)).unwrap(), *p);
            }
        }
    }

    #[test]
    fn complements_and_classes() {
        assert_eq!(
            hxyz_complement(&HxyzParams { n: 6, x: 2, y: 0, z: 3 }),
            HxyzParams { n: 6, x: 2, y: 0, z: 3 }
        );
        assert_eq!(
            hxyz_complement(&HxyzParams { n: 4, x: 2, y: 1, z: 2 }),
            HxyzParams { n: 4, x: 2, y: 1, z: 2 }
        );
        assert_eq!(
            hxyz_complement(&HxyzParams { n: 4, x: 4, y: 0, z: 4 }),
            HxyzParams { n: 4, x: 1, y: 0, z: 1 }
        );
        let c = classify_params(&HxyzParams { n: 4, x: 2, y: 1, z: 2 });
        assert!(c.is_self_dual && !c.is_isotropic);
        let c = classify_params(&HxyzParams { n: 6, x: 2, y: 0, z: 3 });
        assert!(c.is_self_dual && c.is_isotropic);
    }

    #[test]
    fn closed_forms_match_oracle() {
        for n in 1..=12u64 {
            let m = Arc::new(FqModule::hyperbolic(n as i64).unwrap());
            for p in HxyzParams::all(n) {
                let h = hxyz_subgroup_in(&m, &p);
                assert_eq!(hxyz_subgroup_in(&m, &hxyz_complement(&p)), h.complement(), "{p}");
                assert_eq!(classify_params(&p), h.classify(), "{p}");
            }
        }
    }

    #[test]
    fn squarefree_coisotropic() {
        for n in [1u64, 2, 3, 5, 6, 10] {
            let expected: BTreeSet<HxyzParams> =
                HxyzParams::all(n).into_iter().filter(|p| classify_params(p).is_coisotropic).collect();
            let got: BTreeSet<HxyzParams> = coisotropic_squarefree(n).unwrap().into_iter().collect();
            assert_eq!(got, expected);
        }
        assert!(coisotropic_squarefree(4).is_err());
    }

    #[test]
    fn condsum_against_oracle() {
        let spec = exny0_first(2, 2, [1, 1, 1, 1], 1).unwrap();
        assert!(condsum_check(&spec));
        let h = assemble(&spec).unwrap();
        assert!(h.is_isotropic() && h.order() == 4);
        // perturbing d breaks cd ≡ 0
        let bad = SelfDualSpec { cd: (1, 1), ..spec.clone() };
        assert!(!condsum_check(&bad));
        assert!(!assemble(&bad).unwrap().is_isotropic());
        // exhaustive over D_{4,2}: condsum ⇔ self-dual isotropic
        let m = Arc::new(FqModule::lnn(4, 2).unwrap());
        for f in HxyzParams::all(4).into_iter().filter(|p| classify_params(p).is_coisotropic) {
            for s in HxyzParams::all(2).into_iter().filter(|p| classify_params(p).is_coisotropic) {
                if 2 * f.x * f.z != 4 * s.x * s.z {
                    continue;
                }
                let members = s.elements();
                for &ab in &members {
                    for &cd in &members {
                        let spec = SelfDualSpec { first: f, second: s, ab, cd };
                        let c = assemble_in(&m, &spec).classify();
                        assert_eq!(condsum_check(&spec), c.is_isotropic && c.is_self_dual, "{spec}");
                    }
                }
            }
        }
    }

    #[test]
    fn exny0_family() {
        let fam = family_exny0(2, 2).unwrap();
        let m = Arc::new(FqModule::lnn(2, 2).unwrap());
        let got: BTreeSet<Vec<usize>> =
            fam.iter().map(|s| assemble_in(&m, s).elements().to_vec()).collect();
        assert_eq!(got.len(), 6);
        assert_eq!(fam.len(), 6);
        let all: BTreeSet<Vec<usize>> =
            enumerate_self_dual_isotropic(&m).unwrap().iter().map(|h| h.elements().to_vec()).collect();
        assert_eq!(got, all);
        for n in [1u64, 4, 6, 12] {
            let fam = family_exny0(n, 1).unwrap();
            let mut firsts: Vec<HxyzParams> = fam.iter().map(|s| s.first).collect();
            firsts.sort();
            let mut expected: Vec<HxyzParams> =
                divisors(n).into_iter().map(|d| HxyzParams { n, x: d, y: 0, z: n / d }).collect();
            expected.sort();
            assert_eq!(firsts, expected);
            assert!(fam.iter().all(condsum_check));
        }
        assert!(exny0_first(4, 2, [1, 1, 1, 1], 1).is_err());
    }

    #[test]
    fn exy_y_family() {
        // (4; 1,1,2) is co-isotropic with y ≠ 0
        let p = HxyzParams { n: 4, x: 1, y: 1, z: 2 };
        assert!(classify_params(&p).is_coisotropic);
        let spec = family_exy_y(4, p, 1).unwrap();
        assert!(condsum_check(&spec));
        let c = assemble(&spec).unwrap().classify();
        assert!(c.is_isotropic && c.is_self_dual);
        // (2,1,2) is self-dual but not co-isotropic
        assert!(family_exy_y(4, HxyzParams { n: 4, x: 2, y: 1, z: 2 }, 1).is_err());
        assert!(family_exy_y(4, HxyzParams { n: 4, x: 1, y: 0, z: 1 }, 1).is_err());
        for n in [4u64, 8, 9] {
            for p in HxyzParams::all(n).into_iter().filter(|p| p.y != 0 && classify_params(p).is_coisotropic) {
                for u in units_mod(n) {
                    if let Ok(spec) = family_exy_y(n, p, u as i64) {
                        let c = assemble(&spec).unwrap().classify();
                        assert!(condsum_check(&spec) && c.is_isotropic && c.is_self_dual, "{spec}");
                    }
                }
            }
        }
    }

    #[test]
    fn catalog_np_is_complete() {
        for (n, p) in [(2u64, 2u64), (3, 3), (4, 2), (5, 5), (6, 2), (6, 3)] {
            let list = selfdual_list_np(n, p).unwrap();
            assert_eq!(list.len() as u64, 2 * sigma0(n) + 2 * (p - 1) * sigma0(n / p));
            let m = Arc::new(FqModule::lnn(n as i64, p as i64).unwrap());
            let got: BTreeSet<Vec<usize>> =
                list.iter().map(|s| assemble_in(&m, s).elements().to_vec()).collect();
            assert_eq!(got.len(), list.len());
            let all: BTreeSet<Vec<usize>> =
                enumerate_self_dual_isotropic(&m).unwrap().iter().map(|h| h.elements().to_vec()).collect();
            assert_eq!(got, all, "(N, p) = ({n}, {p})");
            let rows = characteristic_rows(&m, &list);
            let rels = relations_np(n, p).unwrap();
            assert_eq!(rels.len() as u64, sigma0(n / p));
            for rel in &rels {
                let mut sum = vec![BigInt::from(0); m.order()];
                for (c, row) in rel.iter().zip(&rows) {
                    for (s, r) in sum.iter_mut().zip(row) {
                        *s += r * c;
                    }
                }
                assert!(sum.iter().all(|x| *x == BigInt::from(0)));
            }
            let rank = rational_rank(&rows);
            assert_eq!(rank as u64, dimension_np(n, p).unwrap());
            assert_eq!(rank + rels.len(), list.len());
            let rel_rows: Vec<Vec<BigInt>> = rels.iter().map(|r| r.iter().map(|&c| BigInt::from(c)).collect()).collect();
            assert_eq!(rational_rank(&rel_rows), rels.len());
        }
        assert!(selfdual_list_np(6, 4).is_err());
        assert!(selfdual_list_np(6, 5).is_err());
    }

    #[test]
    fn dimension_formulas() {
        assert_eq!(dimension_formula(6, 2).unwrap(), 10);
        assert_eq!(dimension_formula(4, 2).unwrap(), 8);
        assert_eq!(dimension_formula(30, 6).unwrap(), 70);
        for n in 1..=30 {
            assert_eq!(dimension_formula(n, 1).unwrap(), sigma0(n));
        }
        assert_eq!(dimension_np(2, 2).unwrap(), 5);
        assert_eq!(dimension_np(6, 3).unwrap(), 14);
        for (n, p) in [(2, 2), (4, 2), (6, 2), (6, 3), (12, 2), (12, 3)] {
            assert_eq!(dimension_np(n, p).unwrap(), dimension_formula(n, p).unwrap());
        }
        assert!(dimension_formula(8, 4).is_err());
        assert!(dimension_formula(6, 4).is_err());
    }

    #[test]
    fn reconstruction_round_trips() {
        for (n, np) in [(2i64, 2i64), (4, 2), (6, 1), (3, 3), (4, 4)] {
            let m = Arc::new(FqModule::lnn(n, np).unwrap());
            for h in enumerate_self_dual_isotropic(&m).unwrap() {
                let spec = reconstruct_spec(&h).unwrap();
                assert_eq!(assemble_in(&m, &spec), h);
                assert_eq!(spec, spec.normalized());
            }
        }
        // y = 0 members admit representatives with one of the pairs split
        for spec in family_exny0(4, 2).unwrap() {
            let h = assemble(&spec).unwrap();
            let back = reconstruct_spec(&h).unwrap();
            assert_eq!(back, spec);
            let m = h.parent();
            let coords: Vec<Vec<u64>> = h.elements().iter().map(|&e| m.coords(e)).collect();
            let (x, y, z) = (back.first.x % 4, back.first.y, back.first.z % 4);
            let lift = |u: u64, v: u64, k: usize| coords.iter().any(|c| c[0] == u && c[1] == v && c[k] == 0);
            // b = c = 0, or a = d = 0 in the swapped case
            assert!((lift(x, y, 3) && lift(0, z, 2)) || (lift(x, y, 2) && lift(0, z, 3)));
        }
        let m = Arc::new(FqModule::lnn(6, 1).unwrap());
        for h in enumerate_self_dual_isotropic(&m).unwrap() {
            let s = reconstruct_spec(&h).unwrap();
            assert_eq!(s.first.y, 0);
            assert_eq!(s.first.x * s.first.z, 6);
            assert_eq!((s.second, s.ab, s.cd), (HxyzParams { n: 1, x: 1, y: 0, z: 1 }, (0, 0), (0, 0)));
        }
    }

    #[test]
    fn y_zero_projections_come_from_the_family() {
        for (n, np) in [(2i64, 2i64), (4, 2), (6, 2), (8, 2), (4, 4), (8, 4)] {
            let m = Arc::new(FqModule::lnn(n, np).unwrap());
            let fam: BTreeSet<SelfDualSpec> = family_exny0(n as u64, np as u64).unwrap().into_iter().collect();
            for h in enumerate_self_dual_isotropic(&m).unwrap() {
                let s = reconstruct_spec(&h).unwrap();
                if s.first.y == 0 || s.second.y == 0 {
                    assert!(fam.contains(&s), "{s} missing for ({n}, {np})");
                }
            }
        }
    }
}
