use serde::{Deserialize, Serialize};

use super::calibration::PermGenParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermGenReport {
    pub elements: u64,
    pub num_pes: u64,
    /// Elements per cycle per PE after warmup, at most 1.
    pub rate: f64,
    pub stalled: bool,
    pub cycles: u64,
}

/// Fraction-MLE generator: one element per cycle per PE after warmup, unless
/// the inverse pool cannot keep up.
///
/// A unit accepts an inversion every `issue_interval` cycles and holds it
/// for `inverse_latency`, so `units · issue_interval / latency` inversions
/// complete per cycle.
pub fn model_permcheck_gen(elements: u64, num_pes: u64, p: &PermGenParams) -> PermGenReport {
    let num_pes = num_pes.max(1);
    let supply = p.inverse_units * p.issue_interval;
    let stalled = supply < p.inverse_latency;
    let rate = if stalled {
        supply as f64 / p.inverse_latency as f64
    } else {
        1.0
    };
    let steady = if elements == 0 {
        0
    } else {
        (elements as f64 / (num_pes as f64 * rate)).ceil() as u64
    };
    PermGenReport {
        elements,
        num_pes,
        rate,
        stalled,
        cycles: p.warmup_cycles + steady,
    }
}
