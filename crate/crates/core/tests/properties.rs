use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bottleneck_lab::channels::{flagged_mix, isometry_from_params, random_channel_params, stinespring_extend};
use bottleneck_lab::classical::{binary_entropy, binary_entropy_inverse, JointDistribution};
use bottleneck_lab::cli::output::{read_csv, to_csv, CurveRow};
use bottleneck_lab::curve::{linear_grid, lower_hull, second_difference_check, upper_hull, Envelope, Side};
use bottleneck_lab::quantum::random::{random_density, random_pure};
use bottleneck_lab::quantum::{
    embed_classical_joint, mutual_information, partial_trace, purify, rho3, subsystem_entropy, DensityOperator,
};
use bottleneck_lab::rate_region::purity_complement_check;
use bottleneck_lab::solver::equivalence_check;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bipartite(seed: u64, dx: usize, dy: usize) -> DensityOperator {
    let m = random_density(&mut rng(seed), dx * dy, "XY").matrix().clone();
    DensityOperator::with_labels(m, &[dx, dy], &["X", "Y"]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mutual_information_is_bounded(seed in any::<u64>(), dx in 1usize..4, dy in 1usize..4) {
        let rho = bipartite(seed, dx, dy);
        let i = mutual_information(&rho, &["X"], &["Y"]).unwrap();
        let sx = subsystem_entropy(&rho, &["X"]).unwrap();
        let sy = subsystem_entropy(&rho, &["Y"]).unwrap();
        prop_assert!(i >= 0.0);
        prop_assert!(i <= 2.0 * sx.min(sy) + 1e-9);
    }

    #[test]
    fn purification_round_trips(seed in any::<u64>(), d in 2usize..5) {
        let rho = random_density(&mut rng(seed), d, "A");
        let psi = purify(&rho, "R").unwrap();
        let back = partial_trace(&psi, &["A"]).unwrap();
        prop_assert!((back.matrix() - rho.matrix()).iter().all(|z| z.norm() <= 1e-10));
    }

    #[test]
    fn pure_tripartite_entropy_identity(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, de in 1usize..4) {
        let psi = random_pure(&mut rng(seed), &[da, db, de], &["A", "B", "E"]);
        let gap = subsystem_entropy(&psi, &["A"]).unwrap()
            - 0.5 * mutual_information(&psi, &["A"], &["B"]).unwrap()
            - 0.5 * mutual_information(&psi, &["A"], &["E"]).unwrap();
        prop_assert!(gap.abs() <= 1e-9);
    }

    #[test]
    fn classical_embedding_matches_shannon(seed in any::<u64>(), nx in 1usize..5, ny in 1usize..5) {
        let p = JointDistribution::random(&mut rng(seed), nx, ny).unwrap();
        let rho = embed_classical_joint(&p).unwrap();
        prop_assert!((subsystem_entropy(&rho, &["X", "Y"]).unwrap() - p.h_xy()).abs() <= 1e-10);
        prop_assert!((mutual_information(&rho, &["X"], &["Y"]).unwrap() - p.mutual_information()).abs() <= 1e-10);
    }

    #[test]
    fn any_parameters_give_an_isometry(theta in prop::collection::vec(-10.0f64..10.0, 36), d_in in 1usize..7) {
        let iso = isometry_from_params(&theta, d_in, 3, 2).unwrap();
        let m = iso.matrix();
        let g = m.adjoint() * m;
        for i in 0..d_in {
            for j in 0..d_in {
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((g[(i, j)].re - target).abs() <= 1e-10 && g[(i, j)].im.abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn channels_preserve_trace_and_obey_data_processing(seed in any::<u64>(), d_w in 1usize..4, d_v in 1usize..5) {
        prop_assume!(d_w * d_v >= 2);
        let theta = random_channel_params(seed, 2, d_w, d_v).unwrap();
        let iso = isometry_from_params(&theta, 2, d_w, d_v).unwrap();
        let rho = rho3(0.4).unwrap();
        let out = iso.apply(&rho, "X").unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() <= 1e-10);
        let i_yw = mutual_information(&out, &["Y"], &["W"]).unwrap();
        prop_assert!(i_yw <= mutual_information(&rho, &["X"], &["Y"]).unwrap() + 1e-9);
    }

    #[test]
    fn flagged_mixtures_split_both_informations(s0 in any::<u64>(), s1 in any::<u64>(), lambda in 0.0f64..=1.0) {
        let psi = purify(&rho3(0.4).unwrap(), "R").unwrap();
        let n0 = isometry_from_params(&random_channel_params(s0, 2, 2, 2).unwrap(), 2, 2, 2).unwrap();
        let n1 = isometry_from_params(&random_channel_params(s1, 2, 2, 2).unwrap(), 2, 2, 2).unwrap();
        let mix = flagged_mix(&n0, &n1, lambda).unwrap().stinespring().unwrap();
        let sig = |iso| stinespring_extend(iso, &psi, "X").unwrap();
        let (s, a, b) = (sig(&mix), sig(&n0), sig(&n1));
        for parts in [&["Y"][..], &["Y", "R"][..]] {
            let whole = mutual_information(&s, parts, &["W"]).unwrap();
            let split = lambda * mutual_information(&a, parts, &["W"]).unwrap()
                + (1.0 - lambda) * mutual_information(&b, parts, &["W"]).unwrap();
            prop_assert!((whole - split).abs() <= 1e-9);
        }
    }

    #[test]
    fn equivalence_and_purity_identities(seed in any::<u64>(), d_w in 1usize..4, d_v in 1usize..10) {
        let rho = bipartite(seed, 3, 2);
        prop_assume!(d_w * d_v >= 3);
        let iso = isometry_from_params(&random_channel_params(seed ^ 0x5a5a, 3, d_w, d_v).unwrap(), 3, d_w, d_v).unwrap();
        prop_assert!(equivalence_check(&iso, &rho).unwrap().gap <= 1e-8);
        let psi = purify(&rho, "R").unwrap();
        prop_assert!(purity_complement_check(&iso, &psi).unwrap() <= 1e-9);
    }

    #[test]
    fn hulls_are_convex(pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3..40)) {
        for (hull, sign) in [(lower_hull(&pts), 1.0), (upper_hull(&pts), -1.0)] {
            let xs: Vec<f64> = hull.iter().map(|&i| pts[i].0).collect();
            let ys: Vec<f64> = hull.iter().map(|&i| sign * pts[i].1).collect();
            prop_assert!(xs.windows(2).all(|w| w[1] > w[0]));
            if xs.len() >= 3 {
                prop_assert!(second_difference_check(&xs, &ys, 1e-12).unwrap().pass);
            }
        }
    }

    #[test]
    fn lower_envelope_lies_below_every_point(pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..30)) {
        let env = Envelope::new(pts.clone(), Side::LowerMinAbove).unwrap();
        for &(x, y) in &pts {
            // Every point is feasible at its own abscissa, so the envelope is no higher.
            let it = env.eval(x).unwrap();
            prop_assert!(it.value <= y + 1e-12);
            prop_assert!(it.achieved >= x - 1e-12);
        }
    }

    #[test]
    fn binary_entropy_inverse_round_trips(x in 0.0f64..=0.45) {
        prop_assert!((binary_entropy_inverse(binary_entropy(x)).unwrap() - x).abs() <= 1e-9);
    }

    #[test]
    fn linear_grids_hit_both_ends(lo in -5.0f64..5.0, span in 0.001f64..5.0, n in 2usize..60) {
        let g = linear_grid(lo, lo + span, n);
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!(g[0], lo);
        prop_assert_eq!(g[n - 1], lo + span);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn csv_round_trip_is_bit_exact(vals in prop::collection::vec((any::<f64>(), any::<bool>()), 1..20)) {
        let rows: Vec<CurveRow> = vals
            .iter()
            .filter(|(v, _)| v.is_finite())
            .map(|&(v, b)| CurveRow { abscissa: v, value: -v, achieved_constraint: v / 3.0, converged: b, reference: b.then_some(v * 0.5) })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, to_csv(&rows).unwrap()).unwrap();
        let back: Vec<CurveRow> = if rows.is_empty() { Vec::new() } else { read_csv(&p).unwrap() };
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert_eq!(a.abscissa.to_bits(), b.abscissa.to_bits());
            prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
            prop_assert_eq!(a.achieved_constraint.to_bits(), b.achieved_constraint.to_bits());
            prop_assert_eq!(a.reference.map(f64::to_bits), b.reference.map(f64::to_bits));
        }
    }
}
