use std::path::{Path, PathBuf};

use clap::Args;
use phire_core::gates::{builtin_gate, parse_gate, GateId, BUILTIN_IDS};
use phire_core::perf::{Calibration, HwConfig};
use phire_core::CompositePoly;

use crate::error::{CliError, Result};

/// A gate named by built-in id (`0`..`23`, `opencheck`) or by a definition file.
#[derive(Debug, Clone)]
pub struct GateSel {
    pub id: Option<GateId>,
    pub poly: CompositePoly,
}

impl GateSel {
    pub fn label(&self) -> String {
        match self.id {
            Some(id) => id.to_string(),
            None => self.poly.name.clone(),
        }
    }
}

pub fn resolve_gate(s: &str) -> Result<GateSel> {
    if let Ok(id) = s.parse::<GateId>() {
        return Ok(GateSel {
            id: Some(id),
            poly: builtin_gate(id)?,
        });
    }
    let path = Path::new(s);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{s}: {e}")))?;
        return Ok(GateSel {
            id: None,
            poly: parse_gate(&text)?,
        });
    }
    Err(CliError::Malformed(format!(
        "`{s}` is neither a built-in gate id nor a gate file"
    )))
}

/// `all`, an empty string, or a comma-separated list of gates.
pub fn resolve_gates(s: &str) -> Result<Vec<GateSel>> {
    match s.trim() {
        "all" => BUILTIN_IDS
            .iter()
            .map(|id| resolve_gate(&id.to_string()))
            .collect(),
        "" => Ok(Vec::new()),
        list => list.split(',').map(|g| resolve_gate(g.trim())).collect(),
    }
}

#[derive(Debug, Clone, Args)]
pub struct CalibrationArgs {
    /// Calibration file with unit latencies, areas and the design grid.
    #[arg(long, env = "PHIRE_CALIBRATION")]
    pub calibration: Option<PathBuf>,
}

impl CalibrationArgs {
    pub fn load(&self) -> Result<Calibration> {
        Ok(match &self.calibration {
            Some(p) => Calibration::load(p)?,
            None => Calibration::default(),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct HwArgs {
    /// Hardware config file (TOML form of the full config); flags below override it.
    #[arg(long)]
    pub hw: Option<PathBuf>,
    #[arg(long)]
    pub pes: Option<usize>,
    /// Extension engines per PE.
    #[arg(long)]
    pub ees: Option<usize>,
    /// Product lanes per PE.
    #[arg(long)]
    pub pls: Option<usize>,
    /// log2 of the elements per scratch bank.
    #[arg(long)]
    pub bank_log2: Option<u32>,
    /// Off-chip bandwidth in GB/s.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    #[command(flatten)]
    pub cal: CalibrationArgs,
}

impl HwArgs {
    pub fn config(&self) -> Result<HwConfig> {
        let cal = self.cal.load()?;
        let mut cfg = match &self.hw {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                toml::from_str(&text)
                    .map_err(|e| CliError::Malformed(format!("{}: {e}", p.display())))?
            }
            None => cal.hw(4, 6, 5, 1 << 12, 1024.0),
        };
        if let Some(v) = self.pes {
            cfg.shape.num_pes = v;
        }
        if let Some(v) = self.ees {
            cfg.shape.ees_per_pe = v;
        }
        if let Some(v) = self.pls {
            cfg.shape.pls_per_pe = v;
        }
        if let Some(v) = self.bank_log2 {
            cfg.sram_bank_elems = 1usize
                .checked_shl(v)
                .ok_or_else(|| CliError::Infeasible(format!("bank_log2 {v}")))?;
        }
        if let Some(v) = self.bandwidth {
            cfg.bandwidth_gbps = v;
        }
        cfg.check()?;
        Ok(cfg)
    }
}
