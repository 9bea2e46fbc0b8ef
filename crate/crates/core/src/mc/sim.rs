//! Trial-level simulation and reproducible campaigns.
//!
//! Trials are grouped in blocks of [`BLOCK_TRIALS`]. Block `b` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `b`, so the variates used by
//! any trial index depend only on `(seed, index)` and never on how blocks
//! are split between workers. Every trial consumes the same sequence of
//! draws whatever the parameters, so two campaigns with the same seed see
//! identical randomness.

use libm::{atan, sqrt};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::geometry::{build_scene, RayHit, SceneError, SceneGeometry};
use super::stats::{wilson_interval, Z_99};
use crate::fso::FsoLink;
use crate::params::{ParamError, SystemParams};
use crate::performance::LinkPair;

pub const BLOCK_TRIALS: u64 = 65_536;
pub const MIN_CAMPAIGN_TRIALS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("campaign needs at least {MIN_CAMPAIGN_TRIALS} trials, got {0}")]
    TooFewTrials(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Outage,
    Ber,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Outage => "outage",
            Metric::Ber => "ber",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "outage" => Some(Metric::Outage),
            "ber" => Some(Metric::Ber),
            _ => None,
        }
    }
}

/// One jittered pass through the scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryDraw {
    /// Radial offset on the receiving plane; infinite when the ray missed.
    pub displacement_r: f64,
    /// `atan(R / l_ou)`.
    pub theta_u: f64,
    pub hp: f64,
    pub missed: bool,
}

/// Draws beam tilts `~ N(0, σ_θ²)` and ORIS tilts `~ N(0, σ_β²)` on two axes
/// each, traces the ray and converts the offset to pointing loss.
pub fn sample_fso_geometry<R: Rng + ?Sized>(
    scene: &SceneGeometry,
    fso: &FsoLink,
    rng: &mut R,
) -> GeometryDraw {
    let t1: f64 = rng.sample(StandardNormal);
    let t2: f64 = rng.sample(StandardNormal);
    let b1: f64 = rng.sample(StandardNormal);
    let b2: f64 = rng.sample(StandardNormal);
    let theta = (fso.sigma_theta * t1, fso.sigma_theta * t2);
    let beta = (fso.sigma_beta * b1, fso.sigma_beta * b2);
    match scene.trace_jittered(theta, beta) {
        RayHit::Receiver { offset, .. } => GeometryDraw {
            displacement_r: offset,
            theta_u: atan(offset / fso.l_ou),
            hp: fso.pointing_loss(offset),
            missed: false,
        },
        RayHit::Missed => GeometryDraw {
            displacement_r: f64::INFINITY,
            theta_u: core::f64::consts::FRAC_PI_2,
            hp: 0.0,
            missed: true,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub gamma_rf: f64,
    pub gamma_fso: f64,
    pub rf_bit_error: bool,
    pub fso_bit_error: bool,
    pub displacement_r: f64,
    pub h_total: f64,
}

impl TrialOutcome {
    /// Exactly one hop flipped the bit.
    pub fn end_to_end_error(&self) -> bool {
        self.rf_bit_error != self.fso_bit_error
    }

    pub fn outage(&self, gamma_th: f64) -> bool {
        self.gamma_rf < gamma_th || self.gamma_fso < gamma_th
    }
}

/// Runs one trial for source bit `bit`.
///
/// The relay flips the bit with probability `κ_rf Q(√(ζ_rf γ_rf))` and
/// forwards its decision as OOK symbol `{0, 2P_o}`; the user compares
/// `α_m μ_k h s + n` with the genie threshold `α_m μ_k h P_o`.
pub fn run_trial<R: Rng + ?Sized>(
    scene: &SceneGeometry,
    pair: &LinkPair,
    rng: &mut R,
    bit: bool,
) -> TrialOutcome {
    let rf = &pair.rf;
    let fso = &pair.fso;

    let nu = rf.sample_envelope(rng);
    let gamma_rf = rf.snr(nu);
    let g_rf: f64 = rng.sample(StandardNormal);
    let u_rf: f64 = rng.random();
    let rf_bit_error =
        u_rf < pair.rf_mod.kappa && g_rf > sqrt(pair.rf_mod.zeta * gamma_rf);
    let relay_bit = bit != rf_bit_error;

    let geo = sample_fso_geometry(scene, fso, rng);
    let ha = fso.sample_turbulence(rng);
    let h_total = fso.geometry.h_l * geo.hp * ha;
    let gamma_fso = fso.optical_snr(h_total);
    let noise: f64 = rng.sample(StandardNormal);
    let p_o = fso.delta * fso.pt;
    let gain = fso.alpha_m * fso.mu_k * h_total;
    let symbol = if relay_bit { 2.0 * p_o } else { 0.0 };
    let received = gain * symbol + sqrt(fso.sigma_nk_sq) * noise;
    let decided = received > gain * p_o;

    TrialOutcome {
        gamma_rf,
        gamma_fso,
        rf_bit_error,
        fso_bit_error: decided != relay_bit,
        displacement_r: geo.displacement_r,
        h_total,
    }
}

/// Event counts over a set of trials. Merging is associative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tally {
    pub trials: u64,
    pub outages: u64,
    pub bit_errors: u64,
    pub rf_bit_errors: u64,
    pub fso_bit_errors: u64,
}

impl Tally {
    pub fn merge(self, o: Self) -> Self {
        Self {
            trials: self.trials + o.trials,
            outages: self.outages + o.outages,
            bit_errors: self.bit_errors + o.bit_errors,
            rf_bit_errors: self.rf_bit_errors + o.rf_bit_errors,
            fso_bit_errors: self.fso_bit_errors + o.fso_bit_errors,
        }
    }

    pub fn record(&mut self, t: &TrialOutcome, gamma_th: f64) {
        self.trials += 1;
        self.outages += u64::from(t.outage(gamma_th));
        self.bit_errors += u64::from(t.end_to_end_error());
        self.rf_bit_errors += u64::from(t.rf_bit_error);
        self.fso_bit_errors += u64::from(t.fso_bit_error);
    }

    pub fn count(&self, metric: Metric) -> u64 {
        match metric {
            Metric::Outage => self.outages,
            Metric::Ber => self.bit_errors,
        }
    }

    pub fn estimate(&self, metric: Metric, seed: u64) -> CampaignEstimate {
        let k = self.count(metric);
        let (ci_low, ci_high) = wilson_interval(k, self.trials, Z_99);
        CampaignEstimate {
            metric,
            estimate: k as f64 / self.trials as f64,
            ci_low,
            ci_high,
            trials: self.trials,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignEstimate {
    pub metric: Metric,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub seed: u64,
}

impl CampaignEstimate {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    pub fn brackets(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

/// A link pair placed in a concrete scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simulator {
    pub scene: SceneGeometry,
    pub pair: LinkPair,
}

impl Simulator {
    pub fn new(scene: SceneGeometry, pair: LinkPair) -> Self {
        Self { scene, pair }
    }

    pub fn from_params(p: &SystemParams) -> Result<Self, SimError> {
        let scene = build_scene(p.l_ro, p.l_ou, p.incidence_angle)?;
        Ok(Self::new(scene, LinkPair::from_params(p)?))
    }

    pub fn with_pt_dbm(&self, dbm: f64) -> Self {
        Self {
            pair: self.pair.with_pt_dbm(dbm),
            ..*self
        }
    }

    pub fn run_trial<R: Rng + ?Sized>(&self, rng: &mut R, bit: bool) -> TrialOutcome {
        run_trial(&self.scene, &self.pair, rng, bit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CampaignPlan {
    pub trials: u64,
    pub seed: u64,
}

impl CampaignPlan {
    pub fn new(trials: u64, seed: u64) -> Result<Self, SimError> {
        if trials < MIN_CAMPAIGN_TRIALS {
            return Err(SimError::TooFewTrials(trials));
        }
        Ok(Self { trials, seed })
    }

    pub fn blocks(&self) -> u64 {
        self.trials.div_ceil(BLOCK_TRIALS)
    }

    pub fn block_len(&self, block: u64) -> u64 {
        let start = block * BLOCK_TRIALS;
        BLOCK_TRIALS.min(self.trials.saturating_sub(start))
    }

    pub fn block_rng(&self, block: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(block);
        rng
    }

    pub fn run_block(&self, sim: &Simulator, gamma_th: f64, block: u64) -> Tally {
        let mut rng = self.block_rng(block);
        let mut tally = Tally::default();
        for _ in 0..self.block_len(block) {
            let bit: bool = rng.random();
            let t = sim.run_trial(&mut rng, bit);
            tally.record(&t, gamma_th);
        }
        tally
    }

    /// Runs the given blocks and merges their tallies.
    pub fn run_blocks<I: IntoIterator<Item = u64>>(
        &self,
        sim: &Simulator,
        gamma_th: f64,
        blocks: I,
    ) -> Tally {
        blocks
            .into_iter()
            .map(|b| self.run_block(sim, gamma_th, b))
            .fold(Tally::default(), Tally::merge)
    }

    pub fn run(&self, sim: &Simulator, gamma_th: f64) -> Tally {
        self.run_blocks(sim, gamma_th, 0..self.blocks())
    }
}

/// Single-threaded campaign returning the requested metric with its 99%
/// Wilson interval.
pub fn run_campaign(
    sim: &Simulator,
    metric: Metric,
    gamma_th: f64,
    trials: u64,
    seed: u64,
) -> Result<CampaignEstimate, SimError> {
    let plan = CampaignPlan::new(trials, seed)?;
    Ok(plan.run(sim, gamma_th).estimate(metric, seed))
}
