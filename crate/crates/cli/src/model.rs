//! Performance-model commands. Every report is CSV with a fixed header.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use phire_core::gates::sweep_gate;
use phire_core::perf::{
    dse, model_permcheck_gen, model_sumcheck, Bound, DesignScore, GridSpec, HwConfig,
};
use phire_core::schedule::{
    build_lane_plan, build_schedule_with, node_count, validate, LanePlan, PrefetchPolicy,
};
use phire_core::sumcheck::prove_gate;
use phire_core::witness::satisfying_binding;
use phire_core::{Schedule, Transcript};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{resolve_gate, resolve_gates, CalibrationArgs, HwArgs};
use crate::error::{CliError, Result};
use crate::protocol::DOMAIN;

pub const BENCH_HEADER: &[&str] = &[
    "gate",
    "name",
    "degree",
    "distinct_mles",
    "num_vars",
    "product_muls",
    "coeff_muls",
    "update_muls",
    "eq_muls",
    "total_muls",
    "nodes",
    "modeled_cycles",
    "runtime_s",
    "utilization",
];

pub const MODEL_HEADER: &[&str] = &[
    "gate",
    "config",
    "round",
    "table_len",
    "compute_cycles",
    "bw_cycles",
    "fill_drain_cycles",
    "cycles",
    "dram_bytes",
    "bound",
    "modmuls",
];

pub const DSE_HEADER: &[&str] = &[
    "kind",
    "tier_gbps",
    "index",
    "pes",
    "ees",
    "pls",
    "bank_elems",
    "bandwidth_gbps",
    "area_mm2",
    "mean_utilization",
    "geomean_runtime_s",
    "geomean_slowdown",
    "objective",
];

fn writer(out: &Option<PathBuf>) -> Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(
            std::fs::File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        ),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn config_label(c: &HwConfig) -> String {
    let s = &c.shape;
    format!(
        "pes{}-e{}-p{}-bank{}-bw{}",
        s.num_pes, s.ees_per_pe, s.pls_per_pe, c.sram_bank_elems, c.bandwidth_gbps
    )
}

fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

#[derive(Debug, Args)]
pub struct BenchCmd {
    /// `all`, or a comma-separated list of gate ids or files.
    #[arg(long, default_value = "all")]
    pub gates: String,
    #[arg(long, default_value_t = 16)]
    pub mu: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub hw: HwArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn bench(c: &BenchCmd) -> Result<()> {
    let gates = resolve_gates(&c.gates)?;
    let cfg = c.hw.config()?;
    let mut w = writer(&c.out)?;
    w.write_record(BENCH_HEADER)?;
    for (i, g) in gates.iter().enumerate() {
        let id = g.id.ok_or_else(|| {
            CliError::Malformed(format!("bench needs built-in gates, got `{}`", g.poly.name))
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed.wrapping_add(i as u64));
        let b = satisfying_binding(id, c.mu, &mut rng);
        let (_, stats) = prove_gate(&g.poly, &b, &mut Transcript::new(DOMAIN))?;
        let r = model_sumcheck(&g.poly, c.mu, &cfg)?;
        let coeff: u64 = stats.rounds.iter().map(|r| r.coeff_muls).sum();
        w.write_record([
            g.label(),
            g.poly.name.clone(),
            g.poly.degree().to_string(),
            g.poly.distinct_mles().to_string(),
            c.mu.to_string(),
            stats.total_product_muls().to_string(),
            coeff.to_string(),
            stats.total_update_muls().to_string(),
            stats.eq_muls.to_string(),
            stats.total_muls().to_string(),
            r.node_count.to_string(),
            r.total_cycles.to_string(),
            sci(r.runtime_s),
            fixed(r.utilization),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct ModelCmd {
    #[arg(long)]
    pub gate: String,
    #[arg(long, default_value_t = 20)]
    pub mu: usize,
    #[command(flatten)]
    pub hw: HwArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn model(c: &ModelCmd) -> Result<()> {
    let g = resolve_gate(&c.gate)?;
    let cfg = c.hw.config()?;
    let r = model_sumcheck(&g.poly, c.mu, &cfg)?;
    let label = config_label(&cfg);
    let mut w = writer(&c.out)?;
    w.write_record(MODEL_HEADER)?;
    for round in &r.rounds {
        w.write_record([
            g.label(),
            label.clone(),
            round.round.to_string(),
            round.table_len.to_string(),
            round.compute_cycles.to_string(),
            round.bw_cycles.to_string(),
            round.fill_drain_cycles.to_string(),
            round.cycles.to_string(),
            round.dram_bytes.to_string(),
            match round.bound {
                Bound::Compute => "compute".into(),
                Bound::Bandwidth => "bandwidth".into(),
            },
            round.modmuls.total().to_string(),
        ])?;
    }
    let compute: u64 = r.rounds.iter().map(|x| x.compute_cycles).sum();
    let bw: u64 = r.rounds.iter().map(|x| x.bw_cycles).sum();
    let fd: u64 = r.rounds.iter().map(|x| x.fill_drain_cycles).sum();
    let bytes: u64 = r.rounds.iter().map(|x| x.dram_bytes).sum();
    w.write_record([
        g.label(),
        label,
        "total".into(),
        String::new(),
        compute.to_string(),
        bw.to_string(),
        fd.to_string(),
        r.total_cycles.to_string(),
        bytes.to_string(),
        format!("util={}", fixed(r.utilization)),
        r.modmuls.total().to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct SweepCmd {
    #[arg(long, default_value_t = 2)]
    pub from: usize,
    #[arg(long, default_value_t = 30)]
    pub to: usize,
    #[arg(long, default_value_t = 20)]
    pub mu: usize,
    /// Bandwidth tiers in GB/s; defaults to the calibration grid.
    #[arg(long, value_delimiter = ',')]
    pub tiers: Vec<f64>,
    #[command(flatten)]
    pub hw: HwArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn sweep_degree(c: &SweepCmd) -> Result<()> {
    if c.from < 2 || c.to < c.from {
        return Err(CliError::Malformed(format!(
            "degree range {}..={} (need 2 <= from <= to)",
            c.from, c.to
        )));
    }
    let base = c.hw.config()?;
    let tiers = if c.tiers.is_empty() {
        c.hw.cal.load()?.grid.bandwidth_gbps
    } else {
        c.tiers.clone()
    };
    let e = base.shape.ees_per_pe;
    let mut header: Vec<String> = ["d", "degree", "nodes", "formula_nodes"]
        .map(String::from)
        .to_vec();
    header.extend(tiers.iter().map(|t| format!("runtime_s_{t}")));
    header.extend(["node_increment", "jump"].map(String::from));
    let mut w = writer(&c.out)?;
    w.write_record(&header)?;
    let mut prev: Option<(usize, f64)> = None;
    for d in c.from..=c.to {
        let g = sweep_gate(d);
        let mut row = vec![d.to_string(), g.degree().to_string()];
        let mut runtimes = Vec::new();
        let mut nodes = 0;
        for &bw in &tiers {
            let r = model_sumcheck(
                &g,
                c.mu,
                &HwConfig {
                    bandwidth_gbps: bw,
                    ..base
                },
            )?;
            nodes = r.max_term_nodes;
            runtimes.push(r.runtime_s);
        }
        let top = runtimes.last().copied().unwrap_or(0.0);
        row.push(nodes.to_string());
        row.push(node_count(g.degree(), e).to_string());
        row.extend(runtimes.iter().map(|&x| sci(x)));
        let (inc, jump) = match prev {
            Some((n, t)) => (nodes > n, top > 1.2 * t),
            None => (false, false),
        };
        row.push(u8::from(inc).to_string());
        row.push(u8::from(jump).to_string());
        w.write_record(&row)?;
        prev = Some((nodes, top));
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    NextStep,
    Balanced,
}

#[derive(Debug, Args)]
pub struct ScheduleCmd {
    #[arg(long)]
    pub gate: String,
    #[arg(long, value_enum, default_value_t = Policy::NextStep)]
    pub policy: Policy,
    /// Elements per tile used to size prefetch volume.
    #[arg(long, default_value_t = 1)]
    pub tile: usize,
    #[command(flatten)]
    pub hw: HwArgs,
    /// Write the schedule as JSON.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Serialize)]
struct StepLanes {
    step: usize,
    term: usize,
    plan: LanePlan,
}

#[derive(Serialize)]
struct ScheduleDump<'a> {
    schedule: &'a Schedule,
    node_count: usize,
    max_term_nodes: usize,
    fetches: usize,
    lane_plans: Vec<StepLanes>,
}

pub fn schedule(c: &ScheduleCmd) -> Result<()> {
    let g = resolve_gate(&c.gate)?;
    let cfg = c.hw.config()?;
    let policy = match c.policy {
        Policy::NextStep => PrefetchPolicy::NextStep,
        Policy::Balanced => PrefetchPolicy::Balanced,
    };
    let s = build_schedule_with(&g.poly, cfg.shape, policy, c.tile.max(1))?;
    validate(&s, &g.poly)
        .map_err(|e| CliError::Infeasible(format!("schedule check failed: {e}")))?;
    let lane_plans = s
        .steps
        .iter()
        .enumerate()
        .map(|(i, st)| StepLanes {
            step: i,
            term: st.term,
            plan: build_lane_plan(st.points, cfg.shape.pls_per_pe),
        })
        .collect();
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "gate {} E={} P={}: {} steps, {} tmp buffer(s), {} fetches",
        g.label(),
        cfg.shape.ees_per_pe,
        cfg.shape.pls_per_pe,
        s.node_count(),
        s.tmp_buffers_used,
        s.fetches()
    )?;
    for (i, st) in s.steps.iter().enumerate() {
        let ops: Vec<String> = st
            .operands
            .iter()
            .map(|o| match o {
                phire_core::schedule::Operand::Mle(id) => id.clone(),
                phire_core::schedule::Operand::Tmp => "Tmp".into(),
            })
            .collect();
        writeln!(
            out,
            "  step {i}: term {} K={} [{}]{} prefetch [{}]",
            st.term,
            st.points,
            ops.join(" "),
            if st.writes_tmp { " -> Tmp" } else { "" },
            st.prefetch.join(" ")
        )?;
    }
    if let Some(path) = &c.dump {
        let dump = ScheduleDump {
            schedule: &s,
            node_count: s.node_count(),
            max_term_nodes: s.max_term_nodes(),
            fetches: s.fetches(),
            lane_plans,
        };
        let f = std::fs::File::create(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::to_writer_pretty(f, &dump)?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct DseCmd {
    /// TOML file with `pes`, `ees`, `pls`, `bank_log2` and `bandwidth_gbps` lists;
    /// defaults to the calibration grid.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, default_value = "all")]
    pub gates: String,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<usize>,
    /// Area budget in mm²; defaults to the calibration value.
    #[arg(long)]
    pub budget: Option<f64>,
    #[command(flatten)]
    pub cal: CalibrationArgs,
    /// Best design per tier and the Pareto frontiers.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Every feasible design in rank order.
    #[arg(long)]
    pub ranked: Option<PathBuf>,
}

fn dse_row(kind: &str, tier: f64, d: &DesignScore) -> Vec<String> {
    let s = &d.config.shape;
    vec![
        kind.into(),
        tier.to_string(),
        d.index.to_string(),
        s.num_pes.to_string(),
        s.ees_per_pe.to_string(),
        s.pls_per_pe.to_string(),
        d.config.sram_bank_elems.to_string(),
        d.config.bandwidth_gbps.to_string(),
        fixed(d.area_mm2),
        fixed(d.mean_utilization),
        sci(d.geomean_runtime_s),
        fixed(d.geomean_slowdown),
        fixed(d.objective),
    ]
}

pub fn run_dse(c: &DseCmd) -> Result<()> {
    let mut cal = c.cal.load()?;
    if let Some(p) = &c.grid {
        let text = std::fs::read_to_string(p)
            .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        cal.grid = toml::from_str::<GridSpec>(&text)
            .map_err(|e| CliError::Malformed(format!("{}: {e}", p.display())))?;
    }
    if let Some(b) = c.budget {
        cal.area.budget_mm2 = b;
    }
    let gates: Vec<_> = resolve_gates(&c.gates)?
        .into_iter()
        .map(|g| g.poly)
        .collect();
    let lambda = c.lambda.unwrap_or(cal.dse.lambda);
    let mu = c.mu.unwrap_or(cal.dse.num_vars);
    let r = dse(&cal.grid_configs(), &gates, mu, lambda, &cal.area)?;
    let best = &r.ranked[0];
    println!(
        "best: pes={} E={} P={} bank={} bw={} area={:.2} util={:.3} objective={:.4}",
        best.config.shape.num_pes,
        best.config.shape.ees_per_pe,
        best.config.shape.pls_per_pe,
        best.config.sram_bank_elems,
        best.config.bandwidth_gbps,
        best.area_mm2,
        best.mean_utilization,
        best.objective
    );
    let mut w = writer(&c.out)?;
    w.write_record(DSE_HEADER)?;
    for d in &r.best_per_tier {
        w.write_record(dse_row("tier_best", d.config.bandwidth_gbps, d))?;
    }
    for (tier, front) in &r.pareto_per_tier {
        for d in front {
            w.write_record(dse_row("pareto_tier", *tier, d))?;
        }
    }
    for d in &r.pareto_global {
        w.write_record(dse_row("pareto_global", 0.0, d))?;
    }
    w.flush()?;
    if let Some(path) = &c.ranked {
        let mut w = writer(&Some(path.clone()))?;
        w.write_record(DSE_HEADER)?;
        for d in &r.ranked {
            w.write_record(dse_row("ranked", d.config.bandwidth_gbps, d))?;
        }
        w.flush()?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct PermGenCmd {
    /// Fraction-table elements to generate.
    #[arg(long)]
    pub elements: u64,
    #[arg(long, default_value_t = 1)]
    pub pes: u64,
    /// Inverse units; defaults to the calibration value.
    #[arg(long)]
    pub units: Option<u64>,
    #[command(flatten)]
    pub cal: CalibrationArgs,
}

pub fn permgen(c: &PermGenCmd) -> Result<()> {
    let mut p = c.cal.load()?.permgen;
    if let Some(u) = c.units {
        p.inverse_units = u;
    }
    let r = model_permcheck_gen(c.elements, c.pes, &p);
    println!(
        "elements {} pes {} units {} rate {:.4} stalled {} cycles {}",
        r.elements, r.num_pes, p.inverse_units, r.rate, r.stalled, r.cycles
    );
    Ok(())
}
