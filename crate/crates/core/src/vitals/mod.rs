//! Chest-steered vital-sign extraction: range-bin selection, DC
//! compensation, beamforming, phase processing and RA/RAE comparison.

mod chain;
mod series;
mod steering;

pub use chain::{
    compare_ra_rae, extract_vitals, BeamMode, RaRaeComparison, VitalsConfig, VitalsResult,
    LOW_CONFIDENCE_PAPR_DB,
};
pub use series::{dc_compensate, select_range_bin, BinSeries, DcCorrection, DcMode};
pub use steering::{beamform_chirps, steering_vector, SteeringVector};
