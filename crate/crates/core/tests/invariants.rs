use std::f64::consts::LN_2;

use proptest::prelude::*;
use tsi_chain::analysis::{sweep, SweepAxis};
use tsi_chain::correlators::build_table;
use tsi_chain::model::{classify_phase, critical_fields, fermi_sea, ModelParams, Phase};
use tsi_chain::observables::{
    concurrence, entanglement_entropy, evaluate_point, spin_correlators, two_site_rdm, MetricSelection, SspMode,
};
use tsi_chain::oracle::{compare_point, ComparisonOutcome};
use tsi_chain::pfaffian::{pfaffian, SkewMatrix};
use tsi_chain::Complex64;

fn skew(dim: usize, entries: &[(f64, f64)]) -> SkewMatrix {
    let mut k = 0;
    SkewMatrix::from_upper(dim, |_, _| {
        let (re, im) = entries[k];
        k += 1;
        Complex64::new(re, im)
    })
    .unwrap()
}

fn skew_entries(dim: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim * (dim - 1) / 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pfaffian_squares_to_determinant((dim, entries) in (1usize..=12).prop_flat_map(|h| (Just(2 * h), skew_entries(2 * h)))) {
        let a = skew(dim, &entries);
        let pf = pfaffian(&a).unwrap();
        let det = a.to_dense().lu().determinant();
        prop_assert!((pf * pf - det).norm() <= 1e-9 * det.norm().max(1e-300));
    }

    #[test]
    fn pfaffian_scales_with_power_of_dimension(entries in skew_entries(6), s in 0.1..3.0f64) {
        let a = skew(6, &entries);
        let scaled: Vec<(f64, f64)> = entries.iter().map(|&(re, im)| (s * re, s * im)).collect();
        let b = skew(6, &scaled);
        let (pa, pb) = (pfaffian(&a).unwrap(), pfaffian(&b).unwrap());
        prop_assert!((pb - pa * s.powi(3)).norm() <= 1e-10 * (1.0 + pb.norm()));
    }

    #[test]
    fn sea_and_correlators_are_physical(alpha in 0.0..3.0f64, h in -1.0..3.0f64, n in 6usize..80) {
        let p = ModelParams::new(alpha, h, n).unwrap();
        let sea = fermi_sea(&p).unwrap();
        prop_assert!((0.0..=1.0).contains(&sea.filling));
        let table = build_table(&sea);
        let c = spin_correlators(&table, n - 1).unwrap();
        prop_assert!(c.mz.abs() <= 0.5 + 1e-12);
        for g in c.gxx.iter().chain(&c.gyy).chain(&c.gzz) {
            prop_assert!(g.abs() <= 0.25 + 1e-9);
        }
        // translation invariance of a periodic chain: G_n = G_{N-n}
        for r in 1..n / 2 {
            prop_assert!((c.gxx[r - 1] - c.gxx[n - r - 1]).abs() < 1e-9);
            prop_assert!((c.gzz[r - 1] - c.gzz[n - r - 1]).abs() < 1e-9);
        }
        for r in [1, 2] {
            let conc = concurrence(&two_site_rdm(&c, r).unwrap());
            prop_assert!((0.0..=1.0).contains(&conc));
        }
        for l in [1, n / 3, n / 2] {
            let s = entanglement_entropy(&table, l).unwrap();
            prop_assert!(s >= -1e-12 && s <= l as f64 * LN_2 + 1e-9);
        }
    }

    #[test]
    fn metrics_are_bounded(alpha in 0.0..3.0f64, h in 0.0..3.0f64, n in 8usize..64) {
        let r = evaluate_point(&ModelParams::new(alpha, h, n).unwrap(), MetricSelection::all(), SspMode::Exact).unwrap();
        prop_assert!(r.ssp.unwrap() > 0.0);
        prop_assert!(r.c_l1_scaled.unwrap() >= 0.0 && r.c_l1_scaled.unwrap() <= n as f64);
        prop_assert!(r.ee_half.unwrap() >= -1e-12);
    }

    #[test]
    fn fields_above_saturation_are_polarized(alpha in 0.0..3.0f64, dh in 0.01..2.0f64, n in 6usize..64) {
        let h = critical_fields(alpha).unwrap().into_iter().fold(0.0, f64::max) + dh;
        let p = ModelParams::new(alpha, h, n).unwrap();
        prop_assert_eq!(classify_phase(&p).unwrap().phase, Phase::Pm);
        prop_assert_eq!(fermi_sea(&p).unwrap().filling, 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn small_chains_match_exact_diagonalization(alpha in 0.0..3.0f64, h in 0.0..2.5f64, half in 3usize..=4) {
        let p = ModelParams::new(alpha, h, 2 * half).unwrap();
        let row = compare_point(&p);
        match row.outcome {
            ComparisonOutcome::Compared { deltas, .. } => prop_assert!(deltas.max() < 1e-8, "{deltas:?}"),
            ComparisonOutcome::SkippedDegenerate => {}
            ComparisonOutcome::Failed(e) => prop_assert!(false, "{e}"),
        }
    }
}

#[test]
fn sweeps_are_reproducible() {
    let template = ModelParams::new(0.0, 0.4, 40).unwrap();
    let axis = || SweepAxis::Alpha(vec![0.0, 0.7, 1.3, 2.2]);
    let a = sweep(&template, axis(), MetricSelection::all(), SspMode::Exact, "t").unwrap();
    let b = sweep(&template, axis(), MetricSelection::all(), SspMode::Exact, "t").unwrap();
    assert_eq!(a.points, b.points);
    assert_eq!(a.points.len(), 4);
}
