//! Experiment configuration, read from JSON.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use l3blind::channel::ChannelModel;
use l3blind::detector::{PilotOptions, SolverOptions};
use l3blind::signal::{Constellation, ConstellationKind};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Polar iteration on the ℓ3 objective.
    L3,
    /// Same iteration on the ℓ4 objective.
    L4,
    /// Riemannian gradient ascent on the ℓ3 objective.
    Rgd,
    /// Sparse pilot channel estimate with zero forcing.
    Pilot,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::L3, Method::L4, Method::Rgd, Method::Pilot];

    pub fn name(self) -> &'static str {
        match self {
            Method::L3 => "l3",
            Method::L4 => "l4",
            Method::Rgd => "rgd",
            Method::Pilot => "pilot",
        }
    }

    pub(crate) fn seed_tag(self) -> u64 {
        match self {
            Method::L3 => 1,
            Method::L4 => 2,
            Method::Rgd => 3,
            Method::Pilot => 4,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| HarnessError::Config(format!("unknown method `{s}` (expected l3, l4, rgd or pilot)")))
    }
}

/// Parses a comma-separated method list such as `l3,pilot`.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut out = Vec::new();
    for part in list.split(',').filter(|p| !p.trim().is_empty()) {
        let m: Method = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(HarnessError::Config("empty method list".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingModel {
    Identity,
    /// 28 GHz log-distance path loss with log-normal shadowing.
    LogDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SnrDb,
    TLen,
    Theta,
    KUsers,
    NH,
    NPaths,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::TLen => "t_len",
            SweepAxis::Theta => "theta",
            SweepAxis::KUsers => "k_users",
            SweepAxis::NH => "n_h",
            SweepAxis::NPaths => "n_paths",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Settings of the frame-concentration experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConcentrationSettings {
    pub k_list: Vec<usize>,
    /// Tail-bound constant for each entry of `k_list`.
    pub c_list: Vec<f64>,
    pub t_list: Vec<usize>,
    pub delta2: f64,
    pub trials: usize,
}

impl Default for ConcentrationSettings {
    fn default() -> Self {
        Self {
            k_list: vec![4, 8],
            c_list: vec![0.416, 0.464],
            t_list: vec![50, 100, 150, 200, 300, 400, 600, 800, 1000, 1500, 2000],
            delta2: 0.1,
            trials: 1000,
        }
    }
}

/// One configuration of the convergence experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVariant {
    pub label: String,
    pub k_users: usize,
    pub m: usize,
    pub t_len: usize,
    pub theta: f64,
    /// Noise variance per receive entry.
    pub sigma2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceSettings {
    /// Defaults to the base point and its halved-θ, halved-K, halved-M
    /// and tenth-noise neighbours.
    pub variants: Option<Vec<ConvergenceVariant>>,
    pub k_users: usize,
    pub m: usize,
    pub t_len: usize,
    pub theta: f64,
    pub sigma2: f64,
    /// Normalized objective level whose first crossing is reported.
    pub target: f64,
}

impl Default for ConvergenceSettings {
    fn default() -> Self {
        Self { variants: None, k_users: 8, m: 512, t_len: 200, theta: 0.2, sigma2: 0.01, target: 0.9 }
    }
}

impl ConvergenceSettings {
    pub fn resolved_variants(&self) -> Vec<ConvergenceVariant> {
        if let Some(v) = &self.variants {
            return v.clone();
        }
        let base = ConvergenceVariant {
            label: "base".into(),
            k_users: self.k_users,
            m: self.m,
            t_len: self.t_len,
            theta: self.theta,
            sigma2: self.sigma2,
        };
        let mut out = vec![base.clone()];
        out.push(ConvergenceVariant { label: "half_theta".into(), theta: base.theta / 2.0, ..base.clone() });
        out.push(ConvergenceVariant { label: "half_k".into(), k_users: (base.k_users / 2).max(1), ..base.clone() });
        out.push(ConvergenceVariant { label: "half_m".into(), m: (base.m / 2).max(1), ..base.clone() });
        out.push(ConvergenceVariant { label: "tenth_noise".into(), sigma2: base.sigma2 / 10.0, ..base });
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub k_users: usize,
    pub t_len: usize,
    pub n_h: usize,
    pub n_v: usize,
    pub snr_db: f64,
    pub channel_model: ChannelModel,
    /// Bernoulli probability of the Bernoulli-Gaussian model.
    pub theta: f64,
    /// Paths per user of the clustered model.
    pub n_paths: usize,
    pub constellation: ConstellationKind,
    pub fading_model: FadingModel,
    /// Per-user transmit powers; all ones when absent.
    pub power: Option<Vec<f64>>,
    pub trials: usize,
    pub base_seed: u64,
    pub solver: SolverOptions,
    pub methods: Vec<Method>,
    pub pilot_len: usize,
    pub pilot: PilotOptions,
    pub sweep: Option<Sweep>,
    /// Store wall-clock times; breaks byte-identical reruns.
    pub record_timing: bool,
    pub concentration: ConcentrationSettings,
    pub convergence: ConvergenceSettings,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            k_users: 8,
            t_len: 240,
            n_h: 16,
            n_v: 16,
            snr_db: 20.0,
            channel_model: ChannelModel::BernoulliGaussian,
            theta: 0.1,
            n_paths: 5,
            constellation: ConstellationKind::Qpsk,
            fading_model: FadingModel::Identity,
            power: None,
            trials: 100,
            base_seed: 0,
            solver: SolverOptions::default(),
            methods: vec![Method::L3],
            pilot_len: 6,
            pilot: PilotOptions::default(),
            sweep: None,
            record_timing: false,
            concentration: ConcentrationSettings::default(),
            convergence: ConvergenceSettings::default(),
        }
    }
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SystemConfig = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn m(&self) -> usize {
        self.n_h * self.n_v
    }

    pub fn power_vec(&self) -> Vec<f64> {
        self.power.clone().unwrap_or_else(|| vec![1.0; self.k_users])
    }

    /// The configuration at sweep value `value`.
    pub fn at(&self, axis: SweepAxis, value: f64) -> Result<Self> {
        let as_count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(HarnessError::Config(format!("{} must be a positive integer, got {v}", axis.name())))
            }
        };
        let mut c = self.clone();
        c.sweep = None;
        match axis {
            SweepAxis::SnrDb => c.snr_db = value,
            SweepAxis::TLen => c.t_len = as_count(value)?,
            SweepAxis::Theta => c.theta = value,
            SweepAxis::KUsers => {
                c.k_users = as_count(value)?;
                c.power = None;
            }
            SweepAxis::NH => c.n_h = as_count(value)?,
            SweepAxis::NPaths => c.n_paths = as_count(value)?,
        }
        Ok(c)
    }

    /// Sweep points as `(axis, value)`, or a single unswept point.
    pub fn points(&self) -> Vec<(Option<SweepAxis>, f64)> {
        match &self.sweep {
            Some(s) => s.values.iter().map(|&v| (Some(s.axis), v)).collect(),
            None => vec![(None, f64::NAN)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(HarnessError::Config("sweep has no values".into()));
            }
            for &v in &s.values {
                self.at(s.axis, v)?.validate()?;
            }
            return Ok(());
        }
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.k_users == 0 || self.n_h == 0 || self.n_v == 0 {
            return bad("k_users, n_h and n_v must be positive".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        let header = Constellation::new(self.constellation).id_length(self.k_users);
        if self.t_len <= 1 + header {
            return bad(format!("t_len = {} must exceed 1 + header length {header}", self.t_len));
        }
        if self.t_len < self.k_users {
            return bad(format!("t_len = {} is below k_users = {}", self.t_len, self.k_users));
        }
        if self.m() < self.k_users {
            return bad(format!("M = {} is below k_users = {}", self.m(), self.k_users));
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db must be finite".into());
        }
        if self.channel_model == ChannelModel::BernoulliGaussian && !(self.theta > 0.0 && self.theta <= 1.0) {
            return bad(format!("theta must lie in (0, 1], got {}", self.theta));
        }
        if self.channel_model == ChannelModel::Clustered && self.n_paths == 0 {
            return bad("n_paths must be positive".into());
        }
        if let Some(p) = &self.power {
            if p.len() != self.k_users || p.iter().any(|v| !(*v > 0.0)) {
                return bad(format!("power needs {} positive entries", self.k_users));
            }
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        if self.methods.contains(&Method::Pilot) && (self.pilot_len == 0 || self.pilot_len >= self.t_len) {
            return bad(format!("pilot_len must lie in [1, t_len), got {}", self.pilot_len));
        }
        self.solver.validate().map_err(HarnessError::Core)?;
        Ok(())
    }

    /// FNV-1a hash of the canonical JSON form, as 16 hex digits.
    pub fn fingerprint(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}
