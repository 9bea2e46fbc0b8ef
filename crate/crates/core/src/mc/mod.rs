//! Physical Monte Carlo engine: jittered scene geometry, per-trial link
//! simulation and the statistics used to check it.

pub mod geometry;
pub mod sim;
pub mod stats;

pub use geometry::{build_scene, SceneGeometry, Vec3};
pub use sim::{run_campaign, CampaignEstimate, CampaignPlan, Metric, Simulator, Tally};
