//! Experiment configurations, sweeps and CSV export.
//!
//! A config is a TOML document:
//!
//! ```toml
//! experiment = "qft_sweep"
//! seed = 7
//! instances = 1
//!
//! [noise]
//! kind = "bit_flip"
//! eps1 = 0.0003
//! eps2 = 0.003
//!
//! [grid]
//! qubits = [3, 4, 5, 6]
//! ```
//!
//! Grid axes not used by an experiment are ignored. When `grid.eps2` is
//! set, each point keeps the ratio `noise.eps1 / noise.eps2`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    instance_rng, qaoa_circuit_with, qft_circuit, qft_protected, rotation_chain, rotation_chain_protected, Protection,
    QaoaParams, QuboInstance,
};
use crate::circuit::{sof_of, Circuit, RunResult};
use crate::error::{Error, Result};
use crate::gates::rx;
use crate::noise::{ChannelKind, NoiseSpec};
use crate::qswitch::{build_switch, SwitchGate, SwitchSpec, SwitchVariant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    Table1,
    RotSweep,
    QftSweep,
    Qaoa1Sweep,
    QaoaMultistage,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 5] = [
        ExperimentId::Table1,
        ExperimentId::RotSweep,
        ExperimentId::QftSweep,
        ExperimentId::Qaoa1Sweep,
        ExperimentId::QaoaMultistage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Table1 => "table1",
            ExperimentId::RotSweep => "rot_sweep",
            ExperimentId::QftSweep => "qft_sweep",
            ExperimentId::Qaoa1Sweep => "qaoa1_sweep",
            ExperimentId::QaoaMultistage => "qaoa_multistage",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Unprotected,
    QsOriginal,
    QsType1,
    QsType2,
    Sts,
    StsCat2,
    StsErrorfreeCheck,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Unprotected,
        Method::QsOriginal,
        Method::QsType1,
        Method::QsType2,
        Method::Sts,
        Method::StsCat2,
        Method::StsErrorfreeCheck,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Unprotected => "unprotected",
            Method::QsOriginal => "qs_original",
            Method::QsType1 => "qs_type1",
            Method::QsType2 => "qs_type2",
            Method::Sts => "sts",
            Method::StsCat2 => "sts_cat2",
            Method::StsErrorfreeCheck => "sts_errorfree_check",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.label() == s.trim())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method `{s}`")))
    }
}

/// Sweep axes. Empty axes fall back to the experiment's defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    /// Rotation angle of each X-rotation.
    pub angles: Vec<f64>,
    /// Rotation-chain lengths.
    pub gates: Vec<usize>,
    /// ε₂/ε₁ ratios for the rotation sweep.
    pub ratios: Vec<f64>,
    pub qubits: Vec<usize>,
    pub eps2: Vec<f64>,
    pub stages: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(default = "NoiseSpec::noiseless")]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default = "one")]
    pub instances: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// Restricts the methods run; all applicable ones when absent.
    #[serde(default)]
    pub methods: Option<Vec<Method>>,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    /// Default settings for an experiment.
    pub fn preset(experiment: ExperimentId) -> Self {
        let (noise, grid, instances) = match experiment {
            ExperimentId::Table1 => (table1_noise(2.0), Grid::default(), 1),
            ExperimentId::RotSweep => (
                noise(ChannelKind::Depolarizing, 0.001, 0.002),
                Grid {
                    angles: (0..=8).map(|k| k as f64 * std::f64::consts::PI / 8.0).collect(),
                    gates: vec![2, 10],
                    ratios: vec![2.0, 10.0],
                    ..Grid::default()
                },
                1,
            ),
            ExperimentId::QftSweep => (
                noise(ChannelKind::BitFlip, 0.0003, 0.003),
                Grid {
                    qubits: vec![3, 4, 5, 6],
                    ..Grid::default()
                },
                1,
            ),
            ExperimentId::Qaoa1Sweep => (
                noise(ChannelKind::Depolarizing, 0.0001, 0.001),
                Grid {
                    qubits: vec![3, 4, 5, 6],
                    ..Grid::default()
                },
                100,
            ),
            ExperimentId::QaoaMultistage => (
                noise(ChannelKind::Depolarizing, 0.0001, 0.001),
                Grid {
                    qubits: vec![4],
                    stages: vec![1, 2, 3, 4],
                    ..Grid::default()
                },
                100,
            ),
        };
        Self {
            experiment,
            noise,
            grid,
            instances,
            seed: 0,
            output_path: None,
            methods: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if self.instances == 0 {
            return Err(Error::InvalidConfig("instances must be at least 1".into()));
        }
        let g = &self.grid;
        let needed: &[(&str, bool)] = match self.experiment {
            ExperimentId::Table1 => &[],
            ExperimentId::RotSweep => &[("angles", g.angles.is_empty()), ("gates", g.gates.is_empty())],
            ExperimentId::QftSweep | ExperimentId::Qaoa1Sweep => &[("qubits", g.qubits.is_empty())],
            ExperimentId::QaoaMultistage => &[("qubits", g.qubits.is_empty()), ("stages", g.stages.is_empty())],
        };
        if let Some((axis, _)) = needed.iter().find(|(_, empty)| *empty) {
            return Err(Error::InvalidConfig(format!("grid.{axis} is empty")));
        }
        if g.gates.contains(&0) || g.stages.contains(&0) {
            return Err(Error::InvalidConfig("gate and stage counts must be positive".into()));
        }
        if g.qubits.iter().any(|&n| !(1..=10).contains(&n)) {
            return Err(Error::InvalidConfig("qubit counts must lie in 1..=10".into()));
        }
        if g.ratios.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::InvalidConfig("ratios must be positive".into()));
        }
        for &e in &g.eps2 {
            NoiseSpec::new(self.noise.kind, e * self.eps_ratio(), e)?;
        }
        Ok(())
    }

    /// ε₁/ε₂ of the base noise (1 when ε₂ is zero).
    fn eps_ratio(&self) -> f64 {
        if self.noise.eps2 > 0.0 {
            self.noise.eps1 / self.noise.eps2
        } else {
            1.0
        }
    }

    /// Base noise with ε₂ replaced and ε₁ rescaled.
    fn noise_at_eps2(&self, eps2: f64) -> Result<NoiseSpec> {
        let n = NoiseSpec::new(self.noise.kind, eps2 * self.eps_ratio(), eps2)?;
        Ok(n.with_two_qubit(self.noise.two_qubit))
    }

    fn eps2_axis(&self) -> Vec<f64> {
        if self.grid.eps2.is_empty() {
            vec![self.noise.eps2]
        } else {
            self.grid.eps2.clone()
        }
    }

    fn wants(&self, m: Method) -> bool {
        self.methods.as_ref().map_or(true, |ms| ms.contains(&m))
    }
}

fn noise(kind: ChannelKind, eps1: f64, eps2: f64) -> NoiseSpec {
    NoiseSpec {
        kind,
        eps1,
        eps2,
        two_qubit: Default::default(),
    }
}

fn table1_noise(ratio: f64) -> NoiseSpec {
    noise(ChannelKind::BitFlip, TABLE1_EPS1, TABLE1_EPS1 * ratio)
}

pub const TABLE1_EPS1: f64 = 0.001;
/// Angle of each X-rotation in the table; under bit flips the purities do
/// not depend on it.
pub const TABLE1_ANGLE: f64 = std::f64::consts::FRAC_PI_4;

/// One CSV line. Axes that do not apply to the experiment stay empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: ExperimentId,
    pub noise: ChannelKind,
    pub n_qubits: Option<usize>,
    pub n_gates: Option<usize>,
    pub stages: Option<usize>,
    pub angle: Option<f64>,
    pub eps1: f64,
    pub eps2: f64,
    pub method: Method,
    pub instances: usize,
    pub purity: f64,
    pub p_pass: f64,
    pub sof: f64,
}

/// Sampling overhead factor 1/p_pass − 1.
pub fn sof(p_pass: f64) -> Result<f64> {
    if !(p_pass > 0.0 && p_pass <= 1.0 + 1e-12) {
        return if p_pass == 0.0 {
            Err(Error::InfiniteOverhead)
        } else {
            Err(Error::InvalidProbability(p_pass))
        };
    }
    Ok(sof_of(p_pass))
}

/// Axis values shared by the rows of one grid point.
#[derive(Clone, Copy, Debug, Default)]
struct Point {
    n_qubits: Option<usize>,
    n_gates: Option<usize>,
    stages: Option<usize>,
    angle: Option<f64>,
}

fn row(cfg: &ExperimentConfig, noise: &NoiseSpec, pt: Point, method: Method, instances: usize, purity: f64, p_pass: f64) -> ResultRow {
    ResultRow {
        experiment: cfg.experiment,
        noise: noise.kind,
        n_qubits: pt.n_qubits,
        n_gates: pt.n_gates,
        stages: pt.stages,
        angle: pt.angle,
        eps1: noise.eps1,
        eps2: noise.eps2,
        method,
        instances,
        purity,
        p_pass,
        sof: sof_of(p_pass),
    }
}

/// Runs the sweep and writes the CSV when `output_path` is set.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let rows = match cfg.experiment {
        ExperimentId::Table1 => table1_rows(cfg)?,
        ExperimentId::RotSweep => rot_sweep(cfg)?,
        ExperimentId::QftSweep => qft_sweep(cfg)?,
        ExperimentId::Qaoa1Sweep | ExperimentId::QaoaMultistage => qaoa_sweep(cfg)?,
    };
    if let Some(path) = &cfg.output_path {
        write_csv(&rows, path)?;
    }
    Ok(rows)
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    write_rows(&mut w, rows)
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write_rows(&mut w, rows)?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn write_rows<W: std::io::Write>(w: &mut csv::Writer<W>, rows: &[ResultRow]) -> Result<()> {
    if rows.is_empty() {
        w.write_record([
            "experiment", "noise", "n_qubits", "n_gates", "stages", "angle", "eps1", "eps2", "method", "instances",
            "purity", "p_pass", "sof",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?)
}

fn run_single(c: &Circuit, noise: &NoiseSpec) -> Result<RunResult> {
    c.run(noise)
}

fn rx_switch(n_gates: usize, theta: f64, variant: SwitchVariant) -> Result<Circuit> {
    let gates = (0..n_gates).map(|_| SwitchGate::new(rx(theta), vec![0])).collect();
    build_switch(&SwitchSpec::new(1, gates, variant))
}

/// Circuit for one rotation-chain method, or `None` when the method does
/// not apply to that chain length.
fn rotation_method(method: Method, n_gates: usize, theta: f64) -> Result<Option<Circuit>> {
    let c = match method {
        Method::Unprotected => rotation_chain(n_gates, theta)?,
        Method::QsOriginal if n_gates == 2 => rx_switch(2, theta, SwitchVariant::OriginalPair)?,
        Method::QsType1 if n_gates > 2 => rx_switch(n_gates, theta, SwitchVariant::MultiType1)?,
        Method::QsType2 if n_gates > 2 => rx_switch(n_gates, theta, SwitchVariant::MultiType2)?,
        Method::Sts => rotation_chain_protected(n_gates, theta, None)?,
        Method::StsErrorfreeCheck => rotation_chain_protected(n_gates, theta, Some(NoiseSpec::noiseless()))?,
        _ => return Ok(None),
    };
    Ok(Some(c))
}

/// Table rows in reading order: for each method, the four columns
/// (2 gates, ε₂/ε₁ = 2), (2, 10), (10, 2), (10, 10), skipping n/a cells.
pub fn table1() -> Result<Vec<ResultRow>> {
    table1_rows(&ExperimentConfig::preset(ExperimentId::Table1))
}

fn table1_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let methods = [
        Method::Unprotected,
        Method::QsOriginal,
        Method::QsType1,
        Method::QsType2,
        Method::Sts,
    ];
    let mut cells = Vec::new();
    for m in methods.into_iter().filter(|&m| cfg.wants(m)) {
        for n_gates in [2, 10] {
            for ratio in [2.0, 10.0] {
                cells.push((m, n_gates, table1_noise(ratio)));
            }
        }
    }
    let rows: Vec<Option<ResultRow>> = cells
        .par_iter()
        .map(|&(m, n_gates, noise)| -> Result<Option<ResultRow>> {
            let Some(c) = rotation_method(m, n_gates, TABLE1_ANGLE)? else {
                return Ok(None);
            };
            let r = run_single(&c, &noise)?;
            let pt = Point {
                n_qubits: Some(1),
                n_gates: Some(n_gates),
                angle: Some(TABLE1_ANGLE),
                ..Point::default()
            };
            Ok(Some(row(cfg, &noise, pt, m, 1, r.purity, r.p_pass)))
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn rot_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let ratios = if cfg.grid.ratios.is_empty() {
        vec![cfg.noise.eps2 / cfg.noise.eps1.max(f64::MIN_POSITIVE)]
    } else {
        cfg.grid.ratios.clone()
    };
    let mut cells = Vec::new();
    for &ratio in &ratios {
        let noise = NoiseSpec::new(cfg.noise.kind, cfg.noise.eps1, cfg.noise.eps1 * ratio)?
            .with_two_qubit(cfg.noise.two_qubit);
        for &n_gates in &cfg.grid.gates {
            for &angle in &cfg.grid.angles {
                for m in Method::ALL.into_iter().filter(|&m| cfg.wants(m)) {
                    cells.push((noise, n_gates, angle, m));
                }
            }
        }
    }
    let rows: Vec<Option<ResultRow>> = cells
        .par_iter()
        .map(|&(noise, n_gates, angle, m)| -> Result<Option<ResultRow>> {
            let Some(c) = rotation_method(m, n_gates, angle)? else {
                return Ok(None);
            };
            let r = run_single(&c, &noise)?;
            let pt = Point {
                n_qubits: Some(1),
                n_gates: Some(n_gates),
                angle: Some(angle),
                ..Point::default()
            };
            Ok(Some(row(cfg, &noise, pt, m, 1, r.purity, r.p_pass)))
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn qft_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let methods: Vec<Method> = [Method::Unprotected, Method::Sts, Method::StsErrorfreeCheck]
        .into_iter()
        .filter(|&m| cfg.wants(m))
        .collect();
    let mut cells = Vec::new();
    for eps2 in cfg.eps2_axis() {
        let noise = cfg.noise_at_eps2(eps2)?;
        for &n in &cfg.grid.qubits {
            for &m in &methods {
                cells.push((noise, n, m));
            }
        }
    }
    cells
        .par_iter()
        .map(|&(noise, n, m)| -> Result<ResultRow> {
            let c = match m {
                Method::Unprotected => qft_circuit(n)?,
                Method::Sts => qft_protected(n, None)?,
                _ => qft_protected(n, Some(NoiseSpec::noiseless()))?,
            };
            let r = run_single(&c, &noise)?;
            let pt = Point {
                n_qubits: Some(n),
                n_gates: Some(qft_circuit(n)?.gate_count()),
                ..Point::default()
            };
            Ok(row(cfg, &noise, pt, m, 1, r.purity, r.p_pass))
        })
        .collect()
}

/// QAOA methods that apply to `n` qubits; the two-ancilla cat needs
/// weight-2 components, which only the even-N placement has.
fn qaoa_methods(cfg: &ExperimentConfig, n: usize) -> Vec<Method> {
    [Method::Unprotected, Method::Sts, Method::StsCat2, Method::StsErrorfreeCheck]
        .into_iter()
        .filter(|&m| cfg.wants(m))
        .filter(|&m| m != Method::StsCat2 || n % 2 == 0)
        .collect()
}

/// Random instance `index` for `n` qubits and `stages` stages.
pub fn qaoa_instance(seed: u64, index: u64, n: usize, stages: usize) -> (QuboInstance, QaoaParams) {
    let mut rng = instance_rng(seed, index);
    let q = QuboInstance::random(&mut rng, n);
    let p = QaoaParams::random(&mut rng, stages);
    (q, p)
}

fn qaoa_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let stages_axis = match cfg.experiment {
        ExperimentId::Qaoa1Sweep => vec![1],
        _ => cfg.grid.stages.clone(),
    };
    let mut rows = Vec::new();
    for eps2 in cfg.eps2_axis() {
        let noise = cfg.noise_at_eps2(eps2)?;
        for &n in &cfg.grid.qubits {
            let methods = qaoa_methods(cfg, n);
            for &stages in &stages_axis {
                let per_instance: Vec<Vec<(f64, f64)>> = (0..cfg.instances as u64)
                    .into_par_iter()
                    .map(|i| -> Result<Vec<(f64, f64)>> {
                        let (q, params) = qaoa_instance(cfg.seed, i, n, stages);
                        methods
                            .iter()
                            .map(|&m| {
                                let c = match m {
                                    Method::Unprotected => qaoa_circuit_with(&q, &params, Protection::None, None)?,
                                    Method::Sts => qaoa_circuit_with(&q, &params, Protection::StsSingle, None)?,
                                    Method::StsCat2 => qaoa_circuit_with(&q, &params, Protection::StsCat2, None)?,
                                    _ => qaoa_circuit_with(
                                        &q,
                                        &params,
                                        Protection::StsSingle,
                                        Some(NoiseSpec::noiseless()),
                                    )?,
                                };
                                let r = run_single(&c, &noise)?;
                                Ok((r.purity, r.p_pass))
                            })
                            .collect()
                    })
                    .collect::<Result<_>>()?;
                let count = per_instance.len() as f64;
                for (k, &m) in methods.iter().enumerate() {
                    let purity = per_instance.iter().map(|v| v[k].0).sum::<f64>() / count;
                    let p_pass = per_instance.iter().map(|v| v[k].1).sum::<f64>() / count;
                    let pt = Point {
                        n_qubits: Some(n),
                        stages: Some(stages),
                        ..Point::default()
                    };
                    rows.push(row(cfg, &noise, pt, m, cfg.instances, purity, p_pass));
                }
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_and_method_names_round_trip() {
        for e in ExperimentId::ALL {
            assert_eq!(e.name().parse::<ExperimentId>().unwrap(), e);
        }
        for m in Method::ALL {
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
        }
        assert!(matches!("fig99".parse::<ExperimentId>(), Err(Error::UnknownExperiment(_))));
    }

    #[test]
    fn sof_values() {
        assert_eq!(sof(1.0).unwrap(), 0.0);
        assert_eq!(sof(0.5).unwrap(), 1.0);
        assert!(matches!(sof(0.0), Err(Error::InfiniteOverhead)));
        assert!(sof(1.5).is_err());
    }

    #[test]
    fn presets_validate_and_round_trip() {
        for e in ExperimentId::ALL {
            let c = ExperimentConfig::preset(e);
            c.validate().unwrap();
            let text = c.to_toml().unwrap();
            assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c, "{text}");
        }
    }

    #[test]
    fn config_errors() {
        assert!(ExperimentConfig::from_toml("experiment = \"nope\"").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"qft_sweep\"").is_err());
        let zero = "experiment = \"qft_sweep\"\ninstances = 0\n[grid]\nqubits = [3]\n";
        assert!(ExperimentConfig::from_toml(zero).is_err());
        let typo = "experiment = \"qft_sweep\"\n[grid]\nqbits = [3]\n";
        assert!(ExperimentConfig::from_toml(typo).is_err());
        let ok = "experiment = \"qft_sweep\"\n[grid]\nqubits = [3]\n";
        let c = ExperimentConfig::from_toml(ok).unwrap();
        assert_eq!(c.instances, 1);
        assert!(c.noise.is_noiseless());
    }

    #[test]
    fn cat_rows_only_for_even_widths() {
        let c = ExperimentConfig::preset(ExperimentId::Qaoa1Sweep);
        assert!(qaoa_methods(&c, 4).contains(&Method::StsCat2));
        assert!(!qaoa_methods(&c, 3).contains(&Method::StsCat2));
    }

    #[test]
    fn empty_csv_still_has_header() {
        let s = csv_string(&[]).unwrap();
        assert!(s.starts_with("experiment,noise,n_qubits"));
    }
}
