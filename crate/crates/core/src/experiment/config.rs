//! Experiment configuration, one TOML document per run.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::link::LinkConfig;
use crate::error::{Error, Result};
use crate::recon::{DeConfig, MetEnsemble};
use crate::security::{FiniteSizeParams, NoiseBudget};

/// One kind per figure or table of the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "backtoback")]
    BackToBack,
    #[serde(rename = "e2e")]
    EndToEnd,
    #[serde(rename = "fig3_acf")]
    Fig3Acf,
    #[serde(rename = "fig4_suppression_sweep")]
    Fig4SuppressionSweep,
    #[serde(rename = "fig5_keyrate_vs_N")]
    Fig5KeyrateVsN,
    #[serde(rename = "table2_fer")]
    Table2Fer,
    #[serde(rename = "table1_threshold")]
    Table1Threshold,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::BackToBack,
        ExperimentKind::EndToEnd,
        ExperimentKind::Fig3Acf,
        ExperimentKind::Fig4SuppressionSweep,
        ExperimentKind::Fig5KeyrateVsN,
        ExperimentKind::Table2Fer,
        ExperimentKind::Table1Threshold,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::BackToBack => "backtoback",
            ExperimentKind::EndToEnd => "e2e",
            ExperimentKind::Fig3Acf => "fig3_acf",
            ExperimentKind::Fig4SuppressionSweep => "fig4_suppression_sweep",
            ExperimentKind::Fig5KeyrateVsN => "fig5_keyrate_vs_N",
            ExperimentKind::Table2Fer => "table2_fer",
            ExperimentKind::Table1Threshold => "table1_threshold",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

/// Operating point for key accounting, in the units of the paper's table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SecurityConfig {
    pub va: f64,
    pub eta: f64,
    pub tau: f64,
    pub t_mpnu: f64,
    pub u_mpnu: f64,
    pub beta: f64,
    pub fer: f64,
    /// Complex symbols sent in the key run.
    pub n_symbols: u64,
    pub finite: FiniteSizeParams,
}

impl Default for SecurityConfig {
    fn default() -> Self {
        SecurityConfig {
            va: 0.27,
            eta: 0.24,
            tau: 0.68,
            t_mpnu: 31.40,
            u_mpnu: 0.73,
            beta: 0.9304,
            fer: 0.215,
            n_symbols: 1_000_000_000,
            finite: FiniteSizeParams::default(),
        }
    }
}

impl SecurityConfig {
    pub fn budget(&self) -> Result<NoiseBudget> {
        NoiseBudget::new(self.va, self.eta, self.tau, self.t_mpnu * 1e-3, self.u_mpnu * 1e-3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconConfig {
    /// Ensemble in the `nu = ...` / `rho = ...` text form; the rate-0.02
    /// ensemble when absent.
    pub ensemble: Option<PathBuf>,
    pub n: usize,
    pub snr: f64,
    pub md_dim: usize,
    pub max_iterations: usize,
    pub trials: usize,
    pub punctures: Vec<usize>,
    /// Parity-check matrices are cached here when set.
    pub cache_dir: Option<PathBuf>,
    pub de_bin_width: f64,
    pub de_max_llr: f64,
    pub de_max_iterations: usize,
    pub threshold_bracket: (f64, f64),
    pub threshold_resolution: f64,
}

impl Default for ReconConfig {
    fn default() -> Self {
        let fine = DeConfig::fine();
        ReconConfig {
            ensemble: None,
            n: 1_024_000,
            snr: 0.0443,
            md_dim: 8,
            max_iterations: 500,
            trials: 200,
            punctures: vec![318_000, 320_000, 325_000, 330_000, 335_000, 340_000, 345_000],
            cache_dir: None,
            de_bin_width: fine.bin_width,
            de_max_llr: fine.max_llr,
            de_max_iterations: fine.max_iterations,
            threshold_bracket: (5.85, 6.05),
            threshold_resolution: 0.01,
        }
    }
}

impl ReconConfig {
    pub fn load_ensemble(&self) -> Result<MetEnsemble> {
        match &self.ensemble {
            None => Ok(MetEnsemble::rate_002()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::from(e).context(p.display().to_string()))?;
                MetEnsemble::parse(&text)
            }
        }
    }

    pub fn de(&self) -> DeConfig {
        DeConfig {
            bin_width: self.de_bin_width,
            max_llr: self.de_max_llr,
            max_iterations: self.de_max_iterations,
            ..DeConfig::fine()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FramesConfig {
    pub frames: usize,
}

impl Default for FramesConfig {
    fn default() -> Self {
        FramesConfig { frames: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EndToEndConfig {
    pub frames: usize,
    /// Injected excess noise levels, mPNU. Every level sees the same frames.
    pub u_mpnu: Vec<f64>,
}

impl Default for EndToEndConfig {
    fn default() -> Self {
        EndToEndConfig { frames: 200, u_mpnu: vec![0.0, 1.0, 3.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcfConfig {
    pub orders: Vec<usize>,
    pub cutoff_hz: f64,
    pub frames: usize,
    pub symbols_per_frame: usize,
    pub max_lag: usize,
}

impl Default for AcfConfig {
    fn default() -> Self {
        AcfConfig { orders: vec![1, 3, 5], cutoff_hz: 190e3, frames: 10, symbols_per_frame: 20_000, max_lag: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub suppression_db: Vec<f64>,
    pub frames: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { suppression_db: (0..9).map(|i| 9.0 + 2.0 * i as f64).collect(), frames: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KeyrateConfig {
    /// Block sizes as powers of ten.
    pub log10_n: Vec<f64>,
    /// Onset search range.
    pub onset_range: (u64, u64),
}

impl Default for KeyrateConfig {
    fn default() -> Self {
        KeyrateConfig { log10_n: (0..=24).map(|i| 8.0 + 0.125 * i as f64).collect(), onset_range: (10_000_000, 100_000_000_000) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PaConfig {
    /// Reconciled bits hashed when no input file is given.
    pub input_bits: usize,
    /// Output length; by default the secret fraction of the key accounting.
    pub output_bits: Option<usize>,
}

impl Default for PaConfig {
    fn default() -> Self {
        PaConfig { input_bits: 1 << 20, output_bits: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub kind: Option<ExperimentKind>,
    /// Root seed in hex; the command line wins when both are given.
    pub seed: Option<String>,
    pub link: LinkConfig,
    pub security: SecurityConfig,
    pub reconciliation: ReconConfig,
    pub backtoback: FramesConfig,
    pub e2e: EndToEndConfig,
    pub fig3: AcfConfig,
    pub fig4: SweepConfig,
    pub fig5: KeyrateConfig,
    pub pa: PaConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: None,
            seed: None,
            link: LinkConfig::default(),
            security: SecurityConfig::default(),
            reconciliation: ReconConfig::default(),
            backtoback: FramesConfig::default(),
            e2e: EndToEndConfig::default(),
            fig3: AcfConfig::default(),
            fig4: SweepConfig::default(),
            fig5: KeyrateConfig::default(),
            pa: PaConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        Self::from_toml(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        self.security.budget()?;
        let r = &self.reconciliation;
        if !crate::recon::MD_DIMS.contains(&r.md_dim) {
            return Err(Error::Config(format!("md_dim {} is not one of 1, 2, 4, 8", r.md_dim)));
        }
        if !(r.snr > 0.0) || r.n == 0 {
            return Err(Error::Config("reconciliation needs snr > 0 and n > 0".into()));
        }
        let (lo, hi) = r.threshold_bracket;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Config(format!("threshold_bracket ({lo}, {hi}) must satisfy 0 < lo < hi")));
        }
        if self.fig3.orders.is_empty() || self.fig4.suppression_db.is_empty() || self.e2e.u_mpnu.is_empty() {
            return Err(Error::Config("sweep lists must not be empty".into()));
        }
        if self.e2e.u_mpnu.iter().any(|&u| !(u >= 0.0)) {
            return Err(Error::Config("injected excess noise must be non-negative".into()));
        }
        Ok(())
    }
}

/// Frame or trial count reduced by `scale`, never below one.
pub fn scaled(count: usize, scale: f64) -> usize {
    ((count as f64 * scale).round() as usize).max(1)
}
