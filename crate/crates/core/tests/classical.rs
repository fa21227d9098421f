use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bottleneck_lab::channels::ConditionalChannel;
use bottleneck_lab::classical::{
    bsc_ib_rate, classical_ib_curve, classical_ib_dual_curve, classical_pf_curve, multi_letter_pf_point,
    pf_lower_bound, ClassicalConfig, JointDistribution,
};
use bottleneck_lab::curve::{convexity_check, linear_grid, Witness};

fn cfg(restarts: usize, seed: u64) -> ClassicalConfig {
    ClassicalConfig { restarts, seed, ..ClassicalConfig::default() }
}

fn random_joint(seed: u64, nx: usize, ny: usize) -> JointDistribution {
    JointDistribution::random(&mut ChaCha8Rng::seed_from_u64(seed), nx, ny).unwrap()
}

/// `(I(X;W), I(Y;W))` of a classical witness.
fn informations(p: &JointDistribution, ch: &ConditionalChannel) -> (f64, f64) {
    let (nx, ny, nw) = (p.shape().0, p.shape().1, ch.outputs());
    let mut xw = vec![vec![0.0; nw]; nx];
    let mut yw = vec![vec![0.0; nw]; ny];
    for x in 0..nx {
        for y in 0..ny {
            for w in 0..nw {
                let m = p.get(x, y) * ch.get(x, w);
                xw[x][w] += m;
                yw[y][w] += m;
            }
        }
    }
    let mi = |t: Vec<Vec<f64>>| JointDistribution::new(t).unwrap().mutual_information();
    (mi(xw), mi(yw))
}

#[test]
fn ib_curve_is_nondecreasing_convex_and_replayable() {
    let p = random_joint(1, 3, 4);
    let grid = linear_grid(0.0, p.mutual_information(), 15);
    let c = classical_ib_curve(&p, 4, &grid, &cfg(8, 1)).unwrap();
    assert!(c.values().windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!(convexity_check(&c, 1e-6).unwrap().pass);
    for pt in &c.points {
        let Some(Witness::Classical(ch)) = &pt.witness else { panic!("classical witness expected") };
        let (i_xw, i_yw) = informations(&p, ch);
        assert!((i_xw - pt.value).abs() <= 1e-9);
        assert!(i_yw >= pt.abscissa - 1e-6);
    }
}

#[test]
fn primal_and_dual_sweeps_trace_the_same_curve() {
    let p = random_joint(3, 3, 3);
    let dual = classical_ib_dual_curve(&p, 4, &linear_grid(0.0, p.h_x(), 15), &cfg(8, 0)).unwrap();
    let interior: Vec<_> = dual.points.iter().filter(|q| q.value > 1e-9 && q.value < p.mutual_information() - 1e-6).collect();
    let mut targets: Vec<f64> = interior.iter().map(|q| q.value).collect();
    targets.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let primal = classical_ib_curve(&p, 4, &targets, &cfg(8, 0)).unwrap();
    for q in interior {
        let r = primal.interpolate(q.value).unwrap();
        assert!((r - q.achieved_constraint).abs() <= 2e-3, "R {r} vs {}", q.achieved_constraint);
    }
}

#[test]
fn extra_output_symbol_never_helps_beyond_sufficiency() {
    for s in 0..10u64 {
        let p = random_joint(100 + s, 3, 3);
        let g = linear_grid(0.0, p.mutual_information(), 9);
        let a = classical_ib_curve(&p, 5, &g, &cfg(6, s)).unwrap();
        let b = classical_ib_curve(&p, 6, &g, &cfg(6, s)).unwrap();
        for (x, y) in a.points.iter().zip(&b.points) {
            assert!(x.value - y.value <= 1e-3, "seed {s}: {} vs {}", x.value, y.value);
        }
    }
}

#[test]
fn bsc_both_crossovers_match_closed_form() {
    for delta in [0.1, 0.9] {
        let p = JointDistribution::bsc(delta).unwrap();
        let g = linear_grid(0.0, p.mutual_information(), 21);
        let c = classical_ib_curve(&p, 3, &g, &cfg(10, 0)).unwrap();
        for pt in &c.points {
            assert!((pt.value - bsc_ib_rate(pt.abscissa, delta).unwrap()).abs() <= 2e-3);
        }
    }
}

#[test]
fn privacy_funnel_bounds_and_convexity() {
    let p = random_joint(9, 3, 2);
    let g = linear_grid(0.0, p.h_x(), 13);
    let c = classical_pf_curve(&p, 4, &g, &cfg(6, 2)).unwrap();
    let hxy = p.h_x_given_y();
    for pt in &c.points {
        assert!(pt.value >= pf_lower_bound(pt.abscissa, hxy) - 1e-6);
    }
    assert!(convexity_check(&c, 1e-6).unwrap().pass);
    let pc = JointDistribution::perfectly_correlated(2).unwrap();
    let c = classical_pf_curve(&pc, 3, &linear_grid(0.0, 1.0, 11), &cfg(6, 0)).unwrap();
    assert!(c.points.iter().all(|pt| (pt.value - pt.abscissa).abs() <= 1e-3));
}

#[test]
fn one_letter_multi_letter_point_is_the_curve_value() {
    let p = JointDistribution::bsc(0.2).unwrap();
    let c = cfg(6, 0);
    let t = 0.6;
    let single = classical_pf_curve(&p, 3, &[t], &c).unwrap().points[0].value;
    let one = multi_letter_pf_point(&p, 1, t, 3, &c).unwrap();
    assert!((single - one).abs() <= 1e-9);
    assert!(multi_letter_pf_point(&p, 2, t, 3, &c).unwrap() <= single + 1e-6);
}
