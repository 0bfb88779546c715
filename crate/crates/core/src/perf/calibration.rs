use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HwConfig, PerfError};
use crate::schedule::HwShape;

/// Environment variable naming a calibration file that replaces the default.
pub const CALIBRATION_ENV: &str = "PHIRE_CALIBRATION";

const DEFAULT_TOML: &str = include_str!("../../config/calibration.toml");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaModel {
    pub modmul_mm2: f64,
    pub sram_mm2_per_mb: f64,
    pub budget_mm2: f64,
}

impl AreaModel {
    /// Datapath area: modular multipliers plus scratch SRAM, per PE.
    pub fn area_mm2(&self, cfg: &HwConfig) -> f64 {
        let s = &cfg.shape;
        let per_pe_mults = (2 * s.ees_per_pe + s.pls_per_pe * (s.ees_per_pe - 1)) as f64;
        let sram_mb =
            (s.scratch_buffers * cfg.sram_bank_elems * cfg.elem_bytes) as f64 / (1024.0 * 1024.0);
        s.num_pes as f64 * (per_pe_mults * self.modmul_mm2 + sram_mb * self.sram_mm2_per_mb)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermGenParams {
    pub inverse_latency: u64,
    /// Cycles between inversions issued to one unit.
    pub issue_interval: u64,
    pub inverse_units: u64,
    pub warmup_cycles: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DseParams {
    pub lambda: f64,
    pub num_vars: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub pes: Vec<usize>,
    pub ees: Vec<usize>,
    pub pls: Vec<usize>,
    pub bank_log2: Vec<u32>,
    pub bandwidth_gbps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub clock_ghz: f64,
    pub elem_bytes: usize,
    pub fill_drain_cycles: u64,
    pub scratch_buffers: usize,
    pub accum_registers: usize,
    pub area: AreaModel,
    pub permgen: PermGenParams,
    pub dse: DseParams,
    pub grid: GridSpec,
}

impl Default for Calibration {
    fn default() -> Self {
        Self::from_toml(DEFAULT_TOML).expect("bundled calibration parses")
    }
}

impl Calibration {
    pub fn from_toml(text: &str) -> Result<Self, PerfError> {
        toml::from_str(text).map_err(|e| PerfError::Calibration(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PerfError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PerfError::Calibration(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Loads the file named by [`CALIBRATION_ENV`] if set, else the bundled default.
    pub fn from_env() -> Result<Self, PerfError> {
        match std::env::var_os(CALIBRATION_ENV) {
            Some(p) => Self::load(Path::new(&p)),
            None => Ok(Self::default()),
        }
    }

    /// A config with this calibration's constants.
    pub fn hw(
        &self,
        num_pes: usize,
        ees: usize,
        pls: usize,
        bank_elems: usize,
        bandwidth_gbps: f64,
    ) -> HwConfig {
        HwConfig {
            shape: HwShape {
                num_pes,
                ees_per_pe: ees,
                pls_per_pe: pls,
                scratch_buffers: self.scratch_buffers,
                accum_registers: self.accum_registers,
            },
            bandwidth_gbps,
            sram_bank_elems: bank_elems,
            clock_ghz: self.clock_ghz,
            elem_bytes: self.elem_bytes,
            fill_drain_cycles: self.fill_drain_cycles,
        }
    }

    /// Every grid point, bandwidth outermost, then PEs, E, P and bank size.
    pub fn grid_configs(&self) -> Vec<HwConfig> {
        let g = &self.grid;
        let mut out = Vec::new();
        for &bw in &g.bandwidth_gbps {
            for &pes in &g.pes {
                for &e in &g.ees {
                    for &p in &g.pls {
                        for &b in &g.bank_log2 {
                            out.push(self.hw(pes, e, p, 1 << b, bw));
                        }
                    }
                }
            }
        }
        out
    }
}
