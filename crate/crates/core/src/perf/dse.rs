use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::calibration::AreaModel;
use super::{model_with_schedule, HwConfig, PerfError};
use crate::gates::CompositePoly;
use crate::schedule::{build_schedule, HwShape, Schedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignScore {
    /// Position in the candidate list.
    pub index: usize,
    pub config: HwConfig,
    pub area_mm2: f64,
    pub runtimes_s: Vec<f64>,
    pub utilizations: Vec<f64>,
    pub mean_utilization: f64,
    pub geomean_runtime_s: f64,
    pub geomean_slowdown: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DseResult {
    pub lambda: f64,
    /// Area-feasible designs, best objective first.
    pub ranked: Vec<DesignScore>,
    /// Best design per bandwidth tier, ascending bandwidth.
    pub best_per_tier: Vec<DesignScore>,
    pub pareto_per_tier: Vec<(f64, Vec<DesignScore>)>,
    pub pareto_global: Vec<DesignScore>,
}

fn geomean(xs: &[f64]) -> f64 {
    (xs.iter().map(|x| x.ln()).sum::<f64>() / xs.len() as f64).exp()
}

/// Designs not dominated on (area, geomean runtime), ascending area.
pub fn pareto_front(designs: &[DesignScore]) -> Vec<DesignScore> {
    let mut sorted: Vec<&DesignScore> = designs.iter().collect();
    sorted.sort_by(|a, b| {
        a.area_mm2
            .total_cmp(&b.area_mm2)
            .then(a.geomean_runtime_s.total_cmp(&b.geomean_runtime_s))
            .then(a.index.cmp(&b.index))
    });
    let mut out: Vec<DesignScore> = Vec::new();
    let mut best = f64::INFINITY;
    for d in sorted {
        if d.geomean_runtime_s < best {
            best = d.geomean_runtime_s;
            out.push(d.clone());
        }
    }
    out
}

fn tier_key(bw: f64) -> u64 {
    bw.to_bits()
}

/// Ranks candidates by `λ·(1 − mean utilization) + (1 − λ)·geomean slowdown`.
///
/// Candidates over the area budget or with infeasible shapes are dropped.
/// Slowdown for a gate is runtime over the fastest remaining design with
/// the same bandwidth.
pub fn dse(
    candidates: &[HwConfig],
    gates: &[CompositePoly],
    num_vars: usize,
    lambda: f64,
    area: &AreaModel,
) -> Result<DseResult, PerfError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(PerfError::InvalidConfig(format!(
            "lambda {lambda} outside [0, 1]"
        )));
    }
    if gates.is_empty() {
        return Err(PerfError::InvalidConfig("no gates".into()));
    }
    let feasible: Vec<(usize, &HwConfig)> = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.check().is_ok() && area.area_mm2(c) <= area.budget_mm2)
        .collect();
    if feasible.is_empty() {
        return Err(PerfError::EmptyGrid);
    }

    // Schedules depend on E and the buffer budget only.
    let mut keys: Vec<(usize, usize, usize)> = feasible
        .iter()
        .map(|(_, c)| {
            (
                c.shape.ees_per_pe,
                c.shape.scratch_buffers,
                c.shape.accum_registers,
            )
        })
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let schedules: HashMap<(usize, usize, usize), Vec<Schedule>> = keys
        .par_iter()
        .map(|&(e, sb, acc)| {
            let shape = HwShape {
                num_pes: 1,
                ees_per_pe: e,
                pls_per_pe: 1,
                scratch_buffers: sb,
                accum_registers: acc,
            };
            let s: Result<Vec<Schedule>, PerfError> = gates
                .iter()
                .map(|g| build_schedule(g, shape).map_err(PerfError::from))
                .collect();
            s.map(|s| ((e, sb, acc), s))
        })
        .collect::<Result<_, _>>()?;

    let mut scores: Vec<DesignScore> = feasible
        .par_iter()
        .map(|&(index, cfg)| {
            let key = (
                cfg.shape.ees_per_pe,
                cfg.shape.scratch_buffers,
                cfg.shape.accum_registers,
            );
            let (runtimes_s, utilizations): (Vec<f64>, Vec<f64>) = gates
                .iter()
                .zip(&schedules[&key])
                .map(|(g, s)| {
                    let r = model_with_schedule(g, num_vars, cfg, s);
                    (r.runtime_s, r.utilization)
                })
                .unzip();
            DesignScore {
                index,
                config: *cfg,
                area_mm2: area.area_mm2(cfg),
                mean_utilization: utilizations.iter().sum::<f64>() / utilizations.len() as f64,
                geomean_runtime_s: geomean(&runtimes_s),
                runtimes_s,
                utilizations,
                geomean_slowdown: 0.0,
                objective: 0.0,
            }
        })
        .collect();

    let mut fastest: HashMap<u64, Vec<f64>> = HashMap::new();
    for s in &scores {
        let f = fastest
            .entry(tier_key(s.config.bandwidth_gbps))
            .or_insert_with(|| vec![f64::INFINITY; gates.len()]);
        for (m, r) in f.iter_mut().zip(&s.runtimes_s) {
            *m = m.min(*r);
        }
    }
    for s in &mut scores {
        let f = &fastest[&tier_key(s.config.bandwidth_gbps)];
        let slow: Vec<f64> = s.runtimes_s.iter().zip(f).map(|(r, m)| r / m).collect();
        s.geomean_slowdown = geomean(&slow);
        s.objective = lambda * (1.0 - s.mean_utilization) + (1.0 - lambda) * s.geomean_slowdown;
    }
    scores.sort_by(|a, b| {
        a.objective
            .total_cmp(&b.objective)
            .then(a.area_mm2.total_cmp(&b.area_mm2))
            .then(a.index.cmp(&b.index))
    });

    let mut tiers: Vec<f64> = scores.iter().map(|s| s.config.bandwidth_gbps).collect();
    tiers.sort_by(f64::total_cmp);
    tiers.dedup();
    let mut best_per_tier = Vec::new();
    let mut pareto_per_tier = Vec::new();
    for &bw in &tiers {
        let in_tier: Vec<DesignScore> = scores
            .iter()
            .filter(|s| s.config.bandwidth_gbps == bw)
            .cloned()
            .collect();
        best_per_tier.push(in_tier[0].clone());
        pareto_per_tier.push((bw, pareto_front(&in_tier)));
    }
    let pareto_global = pareto_front(&scores);
    Ok(DseResult {
        lambda,
        ranked: scores,
        best_per_tier,
        pareto_per_tier,
        pareto_global,
    })
}
