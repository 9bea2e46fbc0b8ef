//! Ray-traced sampler against the analytic pointing, turbulence and
//! composite fading distributions.

use oris_link_core::mc::sim::{sample_fso_geometry, Simulator};
use oris_link_core::mc::stats::EmpiricalCdf;
use oris_link_core::params::{GeometryMode, SystemParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 200_000;

fn simulator(mode: GeometryMode) -> Simulator {
    Simulator::from_params(&SystemParams::default().with_geometry_mode(mode)).unwrap()
}

fn per_axis_std(v: &[f64]) -> f64 {
    // for a circular Gaussian spot, E[R²] = 2 s²
    (v.iter().map(|r| r * r).sum::<f64>() / (2.0 * v.len() as f64)).sqrt()
}

#[test]
fn transmitter_jitter_sweeps_the_whole_path() {
    let s = simulator(GeometryMode::SelfConsistent);
    let mut fso = s.pair.fso;
    fso.sigma_beta = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r: Vec<f64> = (0..1_000_000)
        .map(|_| sample_fso_geometry(&s.scene, &fso, &mut rng).displacement_r)
        .collect();
    let expected = fso.sigma_theta * (fso.l_ro + fso.l_ou);
    assert!((per_axis_std(&r) / expected - 1.0).abs() < 0.02);
}

#[test]
fn mirror_jitter_is_doubled_over_the_second_leg() {
    let s = simulator(GeometryMode::SelfConsistent);
    let mut fso = s.pair.fso;
    fso.sigma_theta = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let r: Vec<f64> = (0..1_000_000)
        .map(|_| sample_fso_geometry(&s.scene, &fso, &mut rng).displacement_r)
        .collect();
    let expected = 2.0 * fso.sigma_beta * fso.l_ou;
    assert!((per_axis_std(&r) / expected - 1.0).abs() < 0.02);
}

#[test]
fn ladder_self_consistent() {
    let s = simulator(GeometryMode::SelfConsistent);
    let fso = s.pair.fso;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut theta = Vec::with_capacity(N);
    let mut hp = Vec::with_capacity(N);
    let mut h = Vec::with_capacity(N);
    for _ in 0..N {
        let g = sample_fso_geometry(&s.scene, &fso, &mut rng);
        let ha = fso.sample_turbulence(&mut rng);
        theta.push(g.theta_u);
        hp.push(g.hp);
        h.push(fso.geometry.h_l * g.hp * ha);
    }
    let p1 = EmpiricalCdf::new(theta).unwrap().ks_test(|x| fso.jitter_angle_cdf(x));
    let p2 = EmpiricalCdf::new(hp).unwrap().ks_test(|x| fso.pointing_loss_cdf(x));
    let p3 = EmpiricalCdf::new(h).unwrap().ks_test(|x| fso.fading_cdf(x));
    assert!(p1.p_value > 0.01, "theta_u {p1:?}");
    assert!(p2.p_value > 0.01, "h_p {p2:?}");
    assert!(p3.p_value > 0.01, "h {p3:?}");
}

#[test]
fn l_ro_lever_exponent_is_rejected_by_the_scene() {
    // the scene's pointing loss follows the l_ou denominator
    let s = simulator(GeometryMode::PaperPrinted);
    let fso = s.pair.fso;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let hp: Vec<f64> = (0..N)
        .map(|_| sample_fso_geometry(&s.scene, &fso, &mut rng).hp)
        .collect();
    let r = EmpiricalCdf::new(hp).unwrap().ks_test(|x| fso.pointing_loss_cdf(x));
    assert!(r.p_value < 1e-6, "{r:?}");
}

#[test]
fn rotated_scene_gives_identical_statistics() {
    let s = simulator(GeometryMode::SelfConsistent);
    let axis = oris_link_core::mc::Vec3::new(0.3, 1.0, -0.7).normalized();
    let t = Simulator::new(s.scene.rotated(axis, 2.2), s.pair);
    let mut r1 = ChaCha8Rng::seed_from_u64(5);
    let mut r2 = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        let a = sample_fso_geometry(&s.scene, &s.pair.fso, &mut r1);
        let b = sample_fso_geometry(&t.scene, &t.pair.fso, &mut r2);
        assert!((a.displacement_r - b.displacement_r).abs() < 1e-9);
    }
}

#[test]
fn sampler_draws_match_link_samplers() {
    let s = simulator(GeometryMode::SelfConsistent);
    let fso = s.pair.fso;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ha: Vec<f64> = (0..N).map(|_| fso.sample_turbulence(&mut rng)).collect();
    let r = EmpiricalCdf::new(ha).unwrap().ks_test(|x| fso.turbulence_cdf(x));
    assert!(r.p_value > 0.01, "{r:?}");
    let rf = s.pair.rf;
    let nu: Vec<f64> = (0..N).map(|_| rf.sample_envelope(&mut rng)).collect();
    let r = EmpiricalCdf::new(nu).unwrap().ks_test(|x| rf.envelope_cdf(x));
    assert!(r.p_value > 0.01, "{r:?}");
}
