//! Analytical cycle, bandwidth and utilization model of the SumCheck unit.
//!
//! Round `r` works on tables of `N_r = 2^{μ-r+1}` entries. Each PE takes
//! `ceil(N_r / 2 / PEs)` pairs and runs every schedule step over them; a
//! step for a term with `K` extension points issues a pair every
//! `max(1, K / P)` cycles. Round 1 streams each fetched table once. Later
//! rounds fold the previous table on the fly, so they read two entries per
//! pair per table and write the folded table back, until the working set
//! fits in scratch.

mod calibration;
mod dse;
mod permgen;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::CompositePoly;
use crate::schedule::{build_schedule, HwShape, Schedule, ScheduleError};

pub use calibration::{AreaModel, Calibration, GridSpec, PermGenParams, CALIBRATION_ENV};
pub use dse::{dse, pareto_front, DesignScore, DseResult};
pub use permgen::{model_permcheck_gen, PermGenReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerfError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("invalid hardware config: {0}")]
    InvalidConfig(String),
    #[error("design grid is empty")]
    EmptyGrid,
    #[error("calibration: {0}")]
    Calibration(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HwConfig {
    pub shape: HwShape,
    pub bandwidth_gbps: f64,
    /// Elements per scratch buffer bank; one MLE tile.
    pub sram_bank_elems: usize,
    pub clock_ghz: f64,
    pub elem_bytes: usize,
    /// Pipeline fill and drain per step per tile.
    pub fill_drain_cycles: u64,
}

impl HwConfig {
    pub fn new(shape: HwShape, bandwidth_gbps: f64) -> Self {
        Self {
            shape,
            bandwidth_gbps,
            sram_bank_elems: 1 << 12,
            clock_ghz: 1.0,
            elem_bytes: 32,
            fill_drain_cycles: 16,
        }
    }

    pub fn check(&self) -> Result<(), PerfError> {
        self.shape.check()?;
        if !(self.bandwidth_gbps > 0.0 && self.clock_ghz > 0.0) {
            return Err(PerfError::InvalidConfig(
                "bandwidth and clock must be positive".into(),
            ));
        }
        if self.sram_bank_elems < 4 || self.elem_bytes == 0 {
            return Err(PerfError::InvalidConfig(
                "bank must hold at least two pairs".into(),
            ));
        }
        Ok(())
    }

    pub fn bytes_per_cycle(&self) -> f64 {
        self.bandwidth_gbps / self.clock_ghz
    }

    /// Modular multipliers: two update multipliers per engine and `E - 1` per lane.
    pub fn modmul_units(&self) -> u64 {
        let (e, p) = (self.shape.ees_per_pe as u64, self.shape.pls_per_pe as u64);
        self.shape.num_pes as u64 * (2 * e + p * (e - 1))
    }

    /// Scratch capacity in elements across all PEs.
    pub fn onchip_elems(&self) -> u64 {
        (self.shape.scratch_buffers * self.sram_bank_elems * self.shape.num_pes) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Compute,
    Bandwidth,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModmulCounts {
    pub product: u64,
    pub coeff: u64,
    pub update: u64,
    pub eq: u64,
}

impl ModmulCounts {
    pub fn total(&self) -> u64 {
        self.product + self.coeff + self.update + self.eq
    }

    fn add(&mut self, o: &ModmulCounts) {
        self.product += o.product;
        self.coeff += o.coeff;
        self.update += o.update;
        self.eq += o.eq;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub table_len: u64,
    pub compute_cycles: u64,
    pub dram_bytes: u64,
    pub bw_cycles: u64,
    pub fill_drain_cycles: u64,
    pub cycles: u64,
    pub bound: Bound,
    pub modmuls: ModmulCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfReport {
    pub gate: String,
    pub num_vars: usize,
    pub node_count: usize,
    pub max_term_nodes: usize,
    pub rounds: Vec<RoundReport>,
    /// Folds after the last round.
    pub final_update_muls: u64,
    pub total_cycles: u64,
    pub runtime_s: f64,
    pub utilization: f64,
    pub modmuls: ModmulCounts,
    pub modmul_units: u64,
}

/// Models one SumCheck of `poly` over `num_vars` variables.
pub fn model_sumcheck(
    poly: &CompositePoly,
    num_vars: usize,
    cfg: &HwConfig,
) -> Result<PerfReport, PerfError> {
    cfg.check()?;
    let sched = build_schedule(poly, cfg.shape)?;
    Ok(model_with_schedule(poly, num_vars, cfg, &sched))
}

/// Same as [`model_sumcheck`] with a prebuilt schedule for `cfg.shape`.
pub fn model_with_schedule(
    poly: &CompositePoly,
    num_vars: usize,
    cfg: &HwConfig,
    sched: &Schedule,
) -> PerfReport {
    let shape = cfg.shape;
    let pes = shape.num_pes as u64;
    let p = shape.pls_per_pe as u64;
    let eq_id = poly.zerocheck_factor().map(|i| poly.inputs[i].id.as_str());
    let fused = eq_id.is_some() && p >= 2;
    let inputs = poly.inputs.len() as u64;
    let distinct = sched.distinct_mles() as u64;
    let fetch_events: Vec<&str> = sched
        .warmup
        .iter()
        .chain(
            sched
                .steps
                .iter()
                .flat_map(|s| s.demand.iter().chain(&s.prefetch)),
        )
        .map(String::as_str)
        .collect();
    let fetches = fetch_events.len() as u64;
    let eq_fetches = eq_id.map_or(0, |id| {
        fetch_events.iter().filter(|f| **f == id).count() as u64
    });
    let steps = sched.steps.len() as u64;
    let product_per_pair: u64 = sched
        .steps
        .iter()
        .map(|s| (s.points * s.muls_per_point()) as u64)
        .sum();
    let coeff_per_round: u64 = poly.terms.iter().map(|t| t.degree() as u64 + 1).sum();
    let bpc = cfg.bytes_per_cycle();
    let eb = cfg.elem_bytes as u64;
    let fits = |elems_per_table: u64| distinct * elems_per_table <= cfg.onchip_elems();

    let mut rounds = Vec::with_capacity(num_vars);
    let mut totals = ModmulCounts::default();
    let mut total_cycles = 0u64;
    for r in 1..=num_vars {
        let n = 1u64 << (num_vars - r + 1);
        let pairs = n / 2;
        let per_pe = pairs.div_ceil(pes);
        let lanes = if r == 1 && fused { p - 1 } else { p };
        let slots: u64 = sched
            .steps
            .iter()
            .map(|s| (s.points as u64).max(lanes))
            .sum();
        let compute = (per_pe * slots).div_ceil(lanes);
        let (reads, writes) = if r == 1 {
            let streamed = if fused { fetches - eq_fetches } else { fetches };
            (streamed * n, if fused { n } else { 0 })
        } else {
            let reads = if fits(2 * n) { 0 } else { fetches * 2 * n };
            let writes = if fits(n) { 0 } else { distinct * n };
            (reads, writes)
        };
        let bytes = (reads + writes) * eb;
        let bw = (bytes as f64 / bpc).ceil() as u64;
        let tile_pairs = (cfg.sram_bank_elems as u64 / if r == 1 { 2 } else { 4 }).max(1);
        let fd = per_pe.div_ceil(tile_pairs) * steps * cfg.fill_drain_cycles;
        let cycles = compute.max(bw) + fd;
        let modmuls = ModmulCounts {
            product: pairs * product_per_pair,
            coeff: coeff_per_round,
            update: if r == 1 { 0 } else { inputs * n },
            eq: if r == 1 && eq_id.is_some() {
                (1u64 << num_vars) - 1
            } else {
                0
            },
        };
        totals.add(&modmuls);
        total_cycles += cycles;
        rounds.push(RoundReport {
            round: r,
            table_len: n,
            compute_cycles: compute,
            dram_bytes: bytes,
            bw_cycles: bw,
            fill_drain_cycles: fd,
            cycles,
            bound: if bw > compute {
                Bound::Bandwidth
            } else {
                Bound::Compute
            },
            modmuls,
        });
    }
    let final_update_muls = inputs;
    totals.update += final_update_muls;
    let units = cfg.modmul_units();
    let utilization = if total_cycles == 0 {
        0.0
    } else {
        (totals.total() as f64 / (units as f64 * total_cycles as f64)).min(1.0)
    };
    PerfReport {
        gate: poly.name.clone(),
        num_vars,
        node_count: sched.node_count(),
        max_term_nodes: sched.max_term_nodes(),
        rounds,
        final_update_muls,
        total_cycles,
        runtime_s: total_cycles as f64 / (cfg.clock_ghz * 1e9),
        utilization,
        modmuls: totals,
        modmul_units: units,
    }
}

/// Fraction of modular-multiplier cycles doing useful work.
pub fn model_utilization(
    poly: &CompositePoly,
    num_vars: usize,
    cfg: &HwConfig,
) -> Result<f64, PerfError> {
    Ok(model_sumcheck(poly, num_vars, cfg)?.utilization)
}
