use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use weilrep_core::arith::divisors;
use weilrep_core::borcherds::{psi1, psi2, weight, weyl_vector, InputForm};
use weilrep_core::lnn_catalog::{classify_params, hxyz_complement, hxyz_subgroup_in, HxyzParams};
use weilrep_core::qseries::{eta_series, FracQSeries};
use weilrep_core::rational::{int, rat};
use weilrep_core::subgroups::Subgroup;
use weilrep_core::weilrep::{invariant_space, mat_mul, mat_t, GroupRingVector, WeilRep, MAT_S};
use weilrep_core::{CycNumber, FqModule};

fn lnn_pair() -> impl Strategy<Value = (u64, u64)> {
    (1u64..=12).prop_flat_map(|n| (Just(n), proptest::sample::select(divisors(n)))).prop_filter("small", |(n, np)| n * np <= 24)
}

fn sl2() -> impl Strategy<Value = [[i64; 2]; 2]> {
    proptest::collection::vec((-4i64..=4, any::<bool>()), 1..6).prop_map(|steps| {
        steps.into_iter().fold([[1, 0], [0, 1]], |m, (k, s)| {
            let m = mat_mul(m, mat_t(k));
            if s {
                mat_mul(m, MAT_S)
            } else {
                m
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn polarization((n, np) in lnn_pair(), a in any::<u32>(), b in any::<u32>()) {
        let m = FqModule::lnn(n as i64, np as i64).unwrap();
        let (x, y) = (a as usize % m.order(), b as usize % m.order());
        let l = m.level();
        let q = |i: usize| m.q_num_index(i) as i64;
        let lhs = m.b_num_index(x, y) as i64;
        let rhs = (q(m.add_idx(x, y)) - q(x) - q(y)).rem_euclid(l as i64);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn complements((n, np) in lnn_pair(), gens in proptest::collection::vec(any::<u32>(), 0..3), extra in any::<u32>()) {
        let m = Arc::new(FqModule::lnn(n as i64, np as i64).unwrap());
        let gens: Vec<usize> = gens.iter().map(|&g| g as usize % m.order()).collect();
        let h = Subgroup::generated_by(&m, &gens);
        let perp = h.complement();
        prop_assert_eq!(h.order() * perp.order(), m.order());
        prop_assert_eq!(perp.complement(), h.clone());
        let k = h.adjoin(extra as usize % m.order());
        prop_assert!(k.complement().is_subgroup_of(&perp));
        if h.is_isotropic() && h.order() * h.order() == m.order() {
            prop_assert_eq!(m.signature_mod8().unwrap(), 0);
        }
    }

    #[test]
    fn closed_forms(n in 1u64..=12, pick in any::<u32>()) {
        let all = HxyzParams::all(n);
        let p = all[pick as usize % all.len()];
        let m = Arc::new(FqModule::hyperbolic(n as i64).unwrap());
        let h = hxyz_subgroup_in(&m, &p);
        prop_assert_eq!(classify_params(&p), h.classify());
        prop_assert_eq!(hxyz_subgroup_in(&m, &hxyz_complement(&p)), h.complement());
    }

    #[test]
    fn invariants_fixed_by_sl2(n in 1i64..=8, g in sl2()) {
        let m = Arc::new(FqModule::lnn(n, 1).unwrap());
        let rep = WeilRep::new(&m);
        for b in &invariant_space(&m).basis {
            let v = GroupRingVector::from_integers(&m, b);
            prop_assert_eq!(rep.apply(g, &v).unwrap(), v);
        }
    }

    #[test]
    fn series_division_round_trip(d1 in 1i64..4, d2 in 1i64..4, a in 0i64..5, b in 1i64..5) {
        let t = int(15);
        let x = eta_series(&int(d1), &rat(a, b), &t).unwrap();
        let y = eta_series(&int(d2), &rat(1, b + 1), &t).unwrap();
        let back = x.mul(&y).unwrap().div(&y).unwrap();
        prop_assert!(back.equals_to_precision(&x));
        prop_assert!(x.mul(&y).unwrap().equals_to_precision(&y.mul(&x).unwrap()));
        let one = FracQSeries::one(&int(5));
        prop_assert!(x.div(&x).unwrap().equals_to_precision(&one));
    }

    #[test]
    fn lift_is_multiplicative(n in 1u64..=8, a in proptest::collection::vec(-2i64..=2, 6), b in proptest::collection::vec(-2i64..=2, 6)) {
        let ds = divisors(n);
        let alpha: BTreeMap<u64, i64> = ds.iter().zip(&a).map(|(&d, &x)| (d, x)).collect();
        let beta: BTreeMap<u64, i64> = ds.iter().zip(&b).map(|(&d, &x)| (d, x)).collect();
        let f = InputForm::from_divisor_exponents(n, &alpha).unwrap();
        let g = InputForm::from_divisor_exponents(n, &beta).unwrap();
        let fg = f.add(&g).unwrap();
        let t = int(12);
        prop_assert!(psi1(&fg, &t).unwrap().equals_to_precision(&psi1(&f, &t).unwrap().mul(&psi1(&g, &t).unwrap()).unwrap()));
        prop_assert!(psi2(&fg, &t).unwrap().equals_to_precision(&psi2(&f, &t).unwrap().mul(&psi2(&g, &t).unwrap()).unwrap()));
        prop_assert_eq!(weight(&fg), rat(alpha.values().sum::<i64>() + beta.values().sum::<i64>(), 2));
        let w = weyl_vector(&fg);
        let s = psi1(&fg, &t).unwrap();
        if let Some((lead, c)) = s.leading() {
            prop_assert_eq!(lead, w.rho_kappa_prime.clone());
            prop_assert_eq!(c, CycNumber::from_int(1));
        }
    }
}
