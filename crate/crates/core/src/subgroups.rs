//! Subgroups of finite quadratic modules: closure, orthogonal complements,
//! classification and exhaustive enumeration.
//!
//! Subgroups are stored as sorted element-index sets plus a membership bitset.
//! Equality and hashing use the element set only; the generator list is
//! informational.

use std::collections::HashSet;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::arith::{gcd, lcm};
use crate::error::{invalid, Error, Result};
use crate::fqmod::{Element, FqModule};
use crate::weilrep::GroupRingVector;

/// Default bound on |D| for exhaustive enumeration.
pub const DEFAULT_MAX_ORDER: usize = 10_000;

/// The enumeration bound, overridable through `WEILREP_MAX_D`.
pub fn max_order_bound() -> usize {
    std::env::var("WEILREP_MAX_D")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&b| b > 0)
        .unwrap_or(DEFAULT_MAX_ORDER)
}

fn check_bound(m: &FqModule, bound: usize) -> Result<()> {
    if m.order() > bound {
        return Err(Error::ResourceLimit { size: m.order(), bound });
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Subgroup {
    parent: Arc<FqModule>,
    elements: Vec<usize>,
    bits: FixedBitSet,
    gens: Vec<usize>,
}

/// Classification flags of a subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SubgroupClass {
    pub is_isotropic: bool,
    pub is_self_orthogonal: bool,
    pub is_self_dual: bool,
    pub is_coisotropic: bool,
}

impl Subgroup {
    pub fn trivial(parent: &Arc<FqModule>) -> Self {
        let mut bits = FixedBitSet::with_capacity(parent.order());
        bits.insert(0);
        Subgroup { parent: parent.clone(), elements: vec![0], bits, gens: vec![] }
    }

    pub fn whole(parent: &Arc<FqModule>) -> Self {
        let gens = (0..parent.rank())
            .map(|i| {
                let mut c = vec![0; parent.rank()];
                c[i] = 1 % parent.orders()[i];
                parent.index(&c)
            })
            .filter(|&g| g != 0)
            .collect();
        let mut bits = FixedBitSet::with_capacity(parent.order());
        bits.insert_range(..);
        Subgroup { parent: parent.clone(), elements: (0..parent.order()).collect(), bits, gens }
    }

    /// The subgroup generated by the given element indices.
    pub fn generated_by(parent: &Arc<FqModule>, gens: &[usize]) -> Self {
        gens.iter().fold(Self::trivial(parent), |h, &g| h.adjoin(g))
    }

    pub fn from_coords(parent: &Arc<FqModule>, gens: &[Vec<i64>]) -> Self {
        let idx: Vec<usize> = gens.iter().map(|g| parent.index_of_ints(g)).collect();
        Self::generated_by(parent, &idx)
    }

    /// Builds a subgroup from its full element set, checking closure.
    pub fn from_elements(parent: &Arc<FqModule>, elements: &[usize]) -> Result<Self> {
        let mut bits = FixedBitSet::with_capacity(parent.order());
        for &e in elements {
            if e >= parent.order() {
                return invalid(format!("element index {e} out of range"));
            }
            bits.insert(e);
        }
        let mut sorted: Vec<usize> = bits.ones().collect();
        sorted.sort_unstable();
        let mut h = Self::trivial(parent);
        for &e in &sorted {
            if !h.contains(e) {
                h = h.adjoin(e);
            }
        }
        if h.bits != bits {
            return invalid("element set is not closed under addition");
        }
        Ok(h)
    }

    /// `⟨H, g⟩`, built as the union of the cosets `H + k·g`.
    pub fn adjoin(&self, g: usize) -> Self {
        if self.contains(g) {
            return self.clone();
        }
        let m = &self.parent;
        let mut bits = self.bits.clone();
        let mut elements = self.elements.clone();
        let mut shift = g;
        while !self.bits.contains(shift) {
            for &h in &self.elements {
                let x = m.add_idx(h, shift);
                bits.insert(x);
                elements.push(x);
            }
            shift = m.add_idx(shift, g);
        }
        elements.sort_unstable();
        let mut gens = self.gens.clone();
        gens.push(g);
        Subgroup { parent: self.parent.clone(), elements, bits, gens }
    }

    /// `H + K`.
    pub fn join(&self, other: &Subgroup) -> Self {
        other.gens.iter().fold(self.clone(), |h, &g| h.adjoin(g))
    }

    pub fn parent(&self) -> &Arc<FqModule> {
        &self.parent
    }

    /// Sorted element indices.
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn element_coords(&self) -> Vec<Element> {
        self.elements.iter().map(|&e| self.parent.element(e)).collect()
    }

    pub fn gens(&self) -> &[usize] {
        &self.gens
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.bits.contains(idx)
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.bits.is_subset(&other.bits)
    }

    /// Whether `γ` is orthogonal to every element of `H`.
    pub fn is_orthogonal_to(&self, idx: usize) -> bool {
        let m = &self.parent;
        let x = m.coords(idx);
        self.gens.iter().all(|&g| m.b_num_coords(&x, &m.coords(g)) == 0)
    }

    /// `H^⊥ = {γ : B(γ, β) = 0 for all β ∈ H}`.
    pub fn complement(&self) -> Subgroup {
        let m = &self.parent;
        let gens: Vec<Vec<u64>> = self.gens.iter().map(|&g| m.coords(g)).collect();
        let members: Vec<usize> = (0..m.order())
            .filter(|&x| {
                let c = m.coords(x);
                gens.iter().all(|g| m.b_num_coords(&c, g) == 0)
            })
            .collect();
        Self::from_elements(m, &members).expect("orthogonal complement is a subgroup")
    }

    pub fn is_isotropic(&self) -> bool {
        // Q vanishes on H and B vanishes on generator pairs
        self.elements.iter().all(|&e| self.parent.q_num_index(e) == 0)
            && self.gens.iter().all(|&g| self.is_orthogonal_to(g))
    }

    pub fn is_self_orthogonal(&self) -> bool {
        self.gens.iter().all(|&g| self.is_orthogonal_to(g))
    }

    pub fn classify(&self) -> SubgroupClass {
        let perp = self.complement();
        let is_self_orthogonal = self.is_subgroup_of(&perp);
        SubgroupClass {
            is_isotropic: is_self_orthogonal
                && self.elements.iter().all(|&e| self.parent.q_num_index(e) == 0),
            is_self_orthogonal,
            is_self_dual: perp == *self,
            is_coisotropic: perp.is_isotropic(),
        }
    }

    /// `v^H`, the 0/1 vector supported on H.
    pub fn characteristic_vector(&self) -> GroupRingVector {
        GroupRingVector::indicator(&self.parent, &self.elements)
    }

    /// Image of the subgroup under a homomorphism given on element coordinates.
    pub fn image(&self, target: &Arc<FqModule>, map: impl Fn(&[u64]) -> Vec<u64>) -> Subgroup {
        let gens: Vec<usize> =
            self.gens.iter().map(|&g| target.index(&map(&self.parent.coords(g)))).collect();
        Subgroup::generated_by(target, &gens)
    }
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.parent, &other.parent) || self.parent == other.parent)
            && self.bits == other.bits
    }
}

impl Eq for Subgroup {}

impl Hash for Subgroup {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.elements.hash(state);
    }
}

impl PartialOrd for Subgroup {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subgroup {
    /// By order, then lexicographically by sorted element list.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.order(), &self.elements).cmp(&(other.order(), &other.elements))
    }
}

impl Serialize for Subgroup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Subgroup", 3)?;
        st.serialize_field("order", &self.order())?;
        st.serialize_field("elements", &self.element_coords())?;
        st.serialize_field(
            "gens",
            &self.gens.iter().map(|&g| self.parent.element(g)).collect::<Vec<_>>(),
        )?;
        st.end()
    }
}

/// One representative per cyclic subgroup: the smallest index among its generators.
fn cyclic_representatives(m: &FqModule, filter: impl Fn(usize) -> bool) -> Vec<usize> {
    (1..m.order())
        .filter(|&g| filter(g))
        .filter(|&g| {
            let n = m.element_order(g);
            (2..n).all(|k| gcd(k, n) != 1 || m.scale_idx(g, k as i64) >= g)
        })
        .collect()
}

/// Every subgroup exactly once, sorted by order then element list.
pub fn enumerate_subgroups(m: &Arc<FqModule>) -> Result<Vec<Subgroup>> {
    enumerate_subgroups_bounded(m, max_order_bound())
}

pub fn enumerate_subgroups_bounded(m: &Arc<FqModule>, bound: usize) -> Result<Vec<Subgroup>> {
    check_bound(m, bound)?;
    let reps = cyclic_representatives(m, |_| true);
    Ok(layered_closure(m, |h| reps.iter().copied().filter(|&g| !h.contains(g)).collect()))
}

/// Every isotropic subgroup, grown one isotropic element of `H^⊥` at a time.
pub fn enumerate_isotropic(m: &Arc<FqModule>) -> Result<Vec<Subgroup>> {
    enumerate_isotropic_bounded(m, max_order_bound())
}

pub fn enumerate_isotropic_bounded(m: &Arc<FqModule>, bound: usize) -> Result<Vec<Subgroup>> {
    check_bound(m, bound)?;
    let reps = cyclic_representatives(m, |g| m.q_num_index(g) == 0);
    Ok(layered_closure(m, |h| {
        reps.iter().copied().filter(|&g| !h.contains(g) && h.is_orthogonal_to(g)).collect()
    }))
}

/// All `H` with `H = H^⊥` and `Q|_H = 0`.
pub fn enumerate_self_dual_isotropic(m: &Arc<FqModule>) -> Result<Vec<Subgroup>> {
    enumerate_self_dual_isotropic_bounded(m, max_order_bound())
}

pub fn enumerate_self_dual_isotropic_bounded(
    m: &Arc<FqModule>,
    bound: usize,
) -> Result<Vec<Subgroup>> {
    let isotropic = enumerate_isotropic_bounded(m, bound)?;
    // an isotropic H is self-dual iff |H|² = |D|, since H ⊆ H^⊥ and |H||H^⊥| = |D|
    Ok(isotropic.into_iter().filter(|h| h.order() * h.order() == m.order()).collect())
}

fn layered_closure(
    m: &Arc<FqModule>,
    extensions: impl Fn(&Subgroup) -> Vec<usize>,
) -> Vec<Subgroup> {
    let start = Subgroup::trivial(m);
    let mut seen: HashSet<FixedBitSet> = HashSet::new();
    seen.insert(start.bits.clone());
    let mut all = vec![start.clone()];
    let mut layer = vec![start];
    while !layer.is_empty() {
        let mut next = Vec::new();
        for h in &layer {
            for g in extensions(h) {
                let k = h.adjoin(g);
                if seen.insert(k.bits.clone()) {
                    next.push(k);
                }
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all.sort();
    all
}

/// A decomposition of the parent into two orthogonal blocks.
#[derive(Clone, Debug)]
pub enum Split {
    /// Each p-part against the sum of the remaining primary parts.
    PPrimary,
    /// Generators listed go to the first block, the rest to the second.
    Coordinates(Vec<usize>),
}

/// Outcome of the projection checks for one two-block split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockReport {
    pub first_block_order: usize,
    pub h1_order: usize,
    pub h2_order: usize,
    pub h1_perp_order: usize,
    pub h2_perp_order: usize,
    pub h1_coisotropic: bool,
    pub h2_coisotropic: bool,
    pub coprime: bool,
    pub h1_self_dual: bool,
    pub h2_self_dual: bool,
    /// Only meaningful for coprime blocks.
    pub splits_as_sum: bool,
}

struct Block {
    module: Arc<FqModule>,
    project: Box<dyn Fn(&[u64]) -> Vec<u64>>,
    embed: Box<dyn Fn(&[u64]) -> Vec<u64>>,
}

/// Projects a self-dual isotropic subgroup onto orthogonal blocks and checks
/// co-isotropy of the projections, the cardinality identity and, for blocks of
/// coprime order, that H is the sum of its projections.
pub fn projection_check(h: &Subgroup, split: &Split) -> Result<Vec<BlockReport>> {
    let class = h.classify();
    if !(class.is_isotropic && class.is_self_dual) {
        return invalid("projection_check expects a self-dual isotropic subgroup");
    }
    let m = h.parent();
    let pairs = match split {
        Split::PPrimary => primary_block_pairs(m),
        Split::Coordinates(first) => vec![coordinate_blocks(m, first)?],
    };
    let mut reports = Vec::new();
    for (b1, b2) in pairs {
        let h1 = h.image(&b1.module, &b1.project);
        let h2 = h.image(&b2.module, &b2.project);
        let p1 = h1.complement();
        let p2 = h2.complement();
        let coprime = gcd(b1.module.order() as u64, b2.module.order() as u64) == 1;
        let sum = {
            let lift = |s: &Subgroup, e: &dyn Fn(&[u64]) -> Vec<u64>| -> Vec<usize> {
                s.gens().iter().map(|&g| m.index(&e(&s.parent().coords(g)))).collect()
            };
            let mut gens = lift(&h1, &b1.embed);
            gens.extend(lift(&h2, &b2.embed));
            Subgroup::generated_by(m, &gens)
        };
        let report = BlockReport {
            first_block_order: b1.module.order(),
            h1_order: h1.order(),
            h2_order: h2.order(),
            h1_perp_order: p1.order(),
            h2_perp_order: p2.order(),
            h1_coisotropic: p1.is_isotropic(),
            h2_coisotropic: p2.is_isotropic(),
            coprime,
            h1_self_dual: p1 == h1,
            h2_self_dual: p2 == h2,
            splits_as_sum: sum == *h,
        };
        let n = h.order();
        let violated = !report.h1_coisotropic
            || !report.h2_coisotropic
            || h1.order() * p2.order() != n
            || h2.order() * p1.order() != n
            || (coprime && !(report.h1_self_dual && report.h2_self_dual && report.splits_as_sum));
        if violated {
            return Err(Error::Violation(format!("projection identities fail: {report:?}")));
        }
        reports.push(report);
    }
    Ok(reports)
}

fn coordinate_blocks(m: &Arc<FqModule>, first: &[usize]) -> Result<(Block, Block)> {
    let k = m.rank();
    let second: Vec<usize> = (0..k).filter(|i| !first.contains(i)).collect();
    for &i in first {
        for &j in &second {
            if !m.b_gram()[i][j].is_zero() {
                return invalid("blocks are not orthogonal");
            }
        }
    }
    let make = |gens: Vec<usize>| -> Result<Block> {
        let module = Arc::new(m.sub_presentation(&gens)?);
        let g2 = gens.clone();
        Ok(Block {
            module,
            project: Box::new(move |x: &[u64]| gens.iter().map(|&i| x[i]).collect()),
            embed: Box::new(move |c: &[u64]| {
                let mut x = vec![0; k];
                for (j, &i) in g2.iter().enumerate() {
                    x[i] = c[j];
                }
                x
            }),
        })
    };
    Ok((make(first.to_vec())?, make(second)?))
}

fn primary_block_pairs(m: &Arc<FqModule>) -> Vec<(Block, Block)> {
    let parts = Arc::new(m.p_primary_decomposition());
    let mut out = Vec::new();
    if parts.len() < 2 {
        return out;
    }
    for p in 0..parts.len() {
        let own = parts[p].clone();
        let own2 = own.clone();
        let rest: Vec<usize> = (0..parts.len()).filter(|&q| q != p).collect();
        let rest_module = rest
            .iter()
            .fold(FqModule::trivial(), |acc, &q| acc.direct_sum(&parts[q].module));
        let (pr, rr) = (parts.clone(), rest.clone());
        let (pe, re) = (parts.clone(), rest.clone());
        let parent = m.clone();
        let b1 = Block {
            module: Arc::new(own.module.clone()),
            project: Box::new(move |x: &[u64]| own.project(x)),
            embed: Box::new(move |c: &[u64]| own2.embed(c)),
        };
        let b2 = Block {
            module: Arc::new(rest_module),
            project: Box::new(move |x: &[u64]| rr.iter().flat_map(|&q| pr[q].project(x)).collect()),
            embed: Box::new(move |c: &[u64]| {
                let mut idx = 0;
                let mut off = 0;
                for &q in &re {
                    let r = pe[q].module.rank();
                    idx = parent.add_idx(idx, parent.index(&pe[q].embed(&c[off..off + r])));
                    off += r;
                }
                parent.coords(idx)
            }),
        };
        out.push((b1, b2));
    }
    out
}

/// Exponent of the parent group, i.e. the lcm of generator orders.
pub fn exponent(m: &FqModule) -> u64 {
    m.orders().iter().fold(1, |acc, &d| lcm(acc, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::sigma0;

    fn module(n: i64, np: i64) -> Arc<FqModule> {
        Arc::new(FqModule::lnn(n, np).unwrap())
    }

    /// Brute-force oracle: all subsets closed under addition, for tiny groups.
    fn subgroups_by_subsets(m: &FqModule) -> usize {
        let n = m.order();
        assert!(n <= 16);
        (0u32..1 << n)
            .filter(|mask| {
                let has = |i: usize| mask >> i & 1 == 1;
                has(0)
                    && (0..n).all(|a| !has(a) || (0..n).all(|b| !has(b) || has(m.add_idx(a, b))))
            })
            .count()
    }

    #[test]
    fn subgroup_counts() {
        assert_eq!(enumerate_subgroups(&module(2, 1)).unwrap().len(), 5);
        assert_eq!(enumerate_subgroups(&module(3, 1)).unwrap().len(), 6);
        assert_eq!(enumerate_subgroups(&Arc::new(FqModule::trivial())).unwrap().len(), 1);
        for (n, np) in [(2, 1), (3, 1), (4, 1), (2, 2)] {
            let m = module(n, np);
            assert_eq!(enumerate_subgroups(&m).unwrap().len(), subgroups_by_subsets(&m));
        }
        // (ℤ/2)⁴ has 1 + 15 + 35 + 15 + 1 subgroups
        assert_eq!(enumerate_subgroups(&module(2, 2)).unwrap().len(), 67);
    }

    #[test]
    fn resource_bound() {
        let err = enumerate_subgroups_bounded(&module(6, 2), 100).unwrap_err();
        assert_eq!(err, Error::ResourceLimit { size: 144, bound: 100 });
    }

    #[test]
    fn complements_and_classes() {
        let m = module(4, 1);
        let h = Subgroup::from_coords(&m, &[vec![2, 1, 0, 0], vec![0, 2, 0, 0]]);
        assert_eq!(h.order(), 4);
        assert_eq!(h.complement(), h);
        let c = h.classify();
        assert!(c.is_self_dual && !c.is_isotropic);
        assert_eq!(Subgroup::trivial(&m).complement(), Subgroup::whole(&m));
        assert_eq!(Subgroup::whole(&m).complement(), Subgroup::trivial(&m));

        let d2 = module(2, 1);
        let zero = Subgroup::trivial(&d2).classify();
        assert!(zero.is_isotropic && !zero.is_self_dual && !zero.is_coisotropic);
        let line = Subgroup::from_coords(&d2, &[vec![1, 0, 0, 0]]).classify();
        assert!(line.is_isotropic && line.is_self_dual && line.is_coisotropic);
    }

    #[test]
    fn self_dual_isotropic_catalogs() {
        let d6 = module(6, 1);
        let found = enumerate_self_dual_isotropic(&d6).unwrap();
        assert_eq!(found.len() as u64, sigma0(6));
        for d in [1i64, 2, 3, 6] {
            let h = Subgroup::from_coords(&d6, &[vec![d, 0, 0, 0], vec![0, 6 / d, 0, 0]]);
            assert!(found.contains(&h));
        }
        assert_eq!(enumerate_self_dual_isotropic(&module(2, 2)).unwrap().len(), 6);
        assert_eq!(enumerate_self_dual_isotropic(&module(1, 1)).unwrap().len(), 1);
        let h = Subgroup::from_coords(&d6, &[vec![2, 0, 0, 0], vec![0, 3, 0, 0]]);
        assert_eq!(h.characteristic_vector().support_size(), 6);
    }

    #[test]
    fn complement_laws_exhaustive() {
        for (n, np) in [(4, 1), (6, 1), (2, 2), (3, 3), (6, 2)] {
            let m = module(n, np);
            let all = enumerate_subgroups(&m).unwrap();
            for h in &all {
                let perp = h.complement();
                assert_eq!(h.order() * perp.order(), m.order());
                assert_eq!(&perp.complement(), h);
            }
            for h in all.iter().take(40) {
                for k in &all {
                    if h.is_subgroup_of(k) {
                        assert!(k.complement().is_subgroup_of(&h.complement()));
                    }
                }
            }
        }
    }

    #[test]
    fn maximal_isotropic_are_self_dual() {
        for (n, np) in [(2, 1), (4, 1), (6, 1), (2, 2), (4, 2), (3, 3), (6, 2), (6, 6)] {
            let m = module(n, np);
            let iso = enumerate_isotropic(&m).unwrap();
            let sd: Vec<&Subgroup> = iso.iter().filter(|h| h.order() * h.order() == m.order()).collect();
            assert!(!sd.is_empty());
            assert_eq!(m.signature_mod8().unwrap(), 0);
            for h in &iso {
                assert!(sd.iter().any(|s| h.is_subgroup_of(s)), "{:?} not contained", h.elements());
                let maximal = !iso.iter().any(|k| k.order() > h.order() && h.is_subgroup_of(k));
                assert_eq!(maximal, h.order() * h.order() == m.order());
                if maximal {
                    assert_eq!(h.complement(), *h);
                }
            }
        }
    }

    #[test]
    fn isotropic_enumeration_matches_filtered_subgroups() {
        for (n, np) in [(4, 1), (2, 2), (6, 2)] {
            let m = module(n, np);
            let filtered: Vec<Subgroup> =
                enumerate_subgroups(&m).unwrap().into_iter().filter(|h| h.classify().is_isotropic).collect();
            assert_eq!(filtered, enumerate_isotropic(&m).unwrap());
        }
    }

    #[test]
    fn projections() {
        let d6 = module(6, 1);
        for h in enumerate_self_dual_isotropic(&d6).unwrap() {
            let reports = projection_check(&h, &Split::PPrimary).unwrap();
            assert_eq!(reports.len(), 2);
            assert!(reports.iter().all(|r| r.coprime && r.splits_as_sum && r.h1_self_dual));
        }
        let d22 = module(2, 2);
        // the subgroup with generators (1,0,1,0) and (0,1,0,-1)
        let h = Subgroup::from_coords(&d22, &[vec![1, 0, 1, 0], vec![0, 1, 0, -1]]);
        let r = projection_check(&h, &Split::Coordinates(vec![0, 1])).unwrap();
        assert_eq!(r[0].h1_order * r[0].h2_perp_order, 4);
        assert!(r[0].h1_coisotropic && r[0].h2_coisotropic);
        for h in enumerate_self_dual_isotropic(&module(6, 2)).unwrap() {
            projection_check(&h, &Split::Coordinates(vec![0, 1])).unwrap();
            projection_check(&h, &Split::PPrimary).unwrap();
        }
        assert!(projection_check(&Subgroup::trivial(&d6), &Split::PPrimary).is_err());
    }
}
