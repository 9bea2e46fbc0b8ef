use oris_link_core::mc::sim::{CampaignPlan, Metric, Simulator};
use oris_link_core::mc::stats::{wilson_interval, Z_99};
use oris_link_core::params::{db_to_linear, GeometryMode};
use oris_link_core::performance::{ber_exact_numeric, hop_ber, outage_exact};
use oris_link_core::SystemParams;

fn simulator(dbm: f64) -> Simulator {
    let p = SystemParams::default().with_geometry_mode(GeometryMode::SelfConsistent);
    Simulator::from_params(&p).unwrap().with_pt_dbm(dbm)
}

#[test]
fn per_hop_error_rates_match_quadrature() {
    for dbm in [25.0, 35.0] {
        let sim = simulator(dbm);
        let t = CampaignPlan::new(1_000_000, 11).unwrap().run(&sim, 1.0);
        let hb = hop_ber(&sim.pair, 128).unwrap();
        let (lo, hi) = wilson_interval(t.rf_bit_errors, t.trials, Z_99);
        assert!(lo <= hb.rf && hb.rf <= hi, "rf {dbm}: {} not in [{lo}, {hi}]", hb.rf);
        let (lo, hi) = wilson_interval(t.fso_bit_errors, t.trials, Z_99);
        assert!(lo <= hb.fso && hb.fso <= hi, "fso {dbm}: {} not in [{lo}, {hi}]", hb.fso);
    }
}

#[test]
fn end_to_end_estimates_bracket_analytics() {
    let gamma_th = db_to_linear(5.0);
    for dbm in [30.0, 40.0] {
        let sim = simulator(dbm);
        let t = CampaignPlan::new(1_000_000, 12).unwrap().run(&sim, gamma_th);
        let o = t.estimate(Metric::Outage, 12);
        let b = t.estimate(Metric::Ber, 12);
        assert!(o.brackets(outage_exact(&sim.pair, gamma_th)), "{dbm}: {o:?}");
        assert!(b.brackets(ber_exact_numeric(&sim.pair, 128).unwrap()), "{dbm}: {b:?}");
    }
}

#[test]
fn campaign_is_a_pure_function_of_seed() {
    let sim = simulator(30.0);
    let plan = CampaignPlan::new(150_000, 3).unwrap();
    let whole = plan.run(&sim, 2.0);
    let split = (0..plan.blocks())
        .rev()
        .map(|b| plan.run_block(&sim, 2.0, b))
        .fold(Default::default(), oris_link_core::mc::Tally::merge);
    assert_eq!(whole, split);
    assert_ne!(whole, CampaignPlan::new(150_000, 4).unwrap().run(&sim, 2.0));
}
