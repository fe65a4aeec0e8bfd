//! Kraus channels and the gate noise model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, C64};
use crate::pauli::Pauli;

pub const TP_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    arity: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Checks shapes and Σ K†K = I.
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let d = first.rows();
        if !d.is_power_of_two() || d < 2 {
            return Err(Error::InvalidChannel(format!("dimension {d} is not 2^k")));
        }
        let mut sum = ComplexMatrix::zeros(d, d);
        for k in &ops {
            if k.rows() != d || k.cols() != d {
                return Err(Error::DimensionMismatch {
                    expected: format!("{d}x{d}"),
                    found: format!("{}x{}", k.rows(), k.cols()),
                });
            }
            sum = &sum + &(&k.dagger() * k);
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(d));
        if dev > TP_TOL {
            return Err(Error::InvalidChannel(format!(
                "not trace preserving (deviation {dev:e})"
            )));
        }
        Ok(Self {
            arity: d.trailing_zeros() as usize,
            ops,
        })
    }

    pub(crate) fn from_ops_unchecked(arity: usize, ops: Vec<ComplexMatrix>) -> Self {
        Self { arity, ops }
    }

    pub fn identity(arity: usize) -> Self {
        Self {
            arity,
            ops: vec![ComplexMatrix::identity(1 << arity)],
        }
    }

    pub fn unitary(u: ComplexMatrix) -> Self {
        let arity = u.rows().trailing_zeros() as usize;
        Self { arity, ops: vec![u] }
    }

    /// Mixture Σ p_k P_k ρ P_k over single-qubit Paulis (identity weight implied).
    pub fn pauli_mixture(px: f64, py: f64, pz: f64) -> Result<Self> {
        let pi = 1.0 - px - py - pz;
        for p in [px, py, pz, pi] {
            if !(-1e-15..=1.0 + 1e-15).contains(&p) || p.is_nan() {
                return Err(Error::InvalidProbability(p));
            }
        }
        let mut ops = vec![ComplexMatrix::identity(2).scale(C64::new(pi.max(0.0).sqrt(), 0.0))];
        for (p, pauli) in [(px, Pauli::X), (py, Pauli::Y), (pz, Pauli::Z)] {
            if p > 0.0 {
                ops.push(pauli.matrix().scale(C64::new(p.sqrt(), 0.0)));
            }
        }
        Ok(Self { arity: 1, ops })
    }

    pub fn standard(kind: ChannelKind, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        match kind {
            ChannelKind::None => Ok(Self::identity(1)),
            ChannelKind::BitFlip => Self::pauli_mixture(p, 0.0, 0.0),
            ChannelKind::YError => Self::pauli_mixture(0.0, p, 0.0),
            ChannelKind::PhaseFlip => Self::pauli_mixture(0.0, 0.0, p),
            ChannelKind::Depolarizing => Self::pauli_mixture(p / 4.0, p / 4.0, p / 4.0),
        }
    }

    /// Probabilities (p_X, p_Y, p_Z) of the standard channel of `kind`.
    pub fn pauli_probabilities(kind: ChannelKind, p: f64) -> [f64; 3] {
        match kind {
            ChannelKind::None => [0.0; 3],
            ChannelKind::BitFlip => [p, 0.0, 0.0],
            ChannelKind::YError => [0.0, p, 0.0],
            ChannelKind::PhaseFlip => [0.0, 0.0, p],
            ChannelKind::Depolarizing => [p / 4.0; 3],
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    /// `other` applied after `self`; all pairwise products, zero operators dropped.
    pub fn then(&self, other: &KrausChannel) -> Result<KrausChannel> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        let mut ops = Vec::with_capacity(self.ops.len() * other.ops.len());
        for b in &other.ops {
            for a in &self.ops {
                let k = b * a;
                if k.max_abs() > 0.0 {
                    ops.push(k);
                }
            }
        }
        if ops.is_empty() {
            ops.push(ComplexMatrix::zeros(self.dim(), self.dim()));
        }
        Ok(Self::from_ops_unchecked(self.arity, ops))
    }

    /// Embeds the channel on local positions of a larger block (position 0
    /// is the most significant qubit of the block).
    pub fn embed(&self, positions: &[usize], block_arity: usize) -> Result<KrausChannel> {
        if positions.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: positions.len(),
            });
        }
        crate::linalg::check_qubits(positions, block_arity)?;
        let ops = self
            .ops
            .iter()
            .map(|k| embed_operator(k, positions, block_arity))
            .collect();
        Ok(Self::from_ops_unchecked(block_arity, ops))
    }

    /// Σ K_m ρ K_m† on a matrix of the channel's own dimension.
    pub fn apply_to(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for k in &self.ops {
            out = &out + &(&(k * rho) * &k.dagger());
        }
        out
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        let d = self.dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        for k in &self.ops {
            sum = &sum + &(&k.dagger() * k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(d)) <= tol
    }
}

/// Places `op` on `positions` of a `block_arity`-qubit block, identity elsewhere.
pub(crate) fn embed_operator(op: &ComplexMatrix, positions: &[usize], block_arity: usize) -> ComplexMatrix {
    let k = positions.len();
    if k == block_arity && positions.iter().enumerate().all(|(i, &p)| i == p) {
        return op.clone();
    }
    if k == 1 {
        let p = positions[0];
        let left = ComplexMatrix::identity(1 << p);
        let right = ComplexMatrix::identity(1 << (block_arity - 1 - p));
        return kron(&kron(&left, op), &right);
    }
    let d = 1usize << block_arity;
    let dk = 1usize << k;
    // bit of local op index j (MSB first) maps to block bit (block_arity-1-positions[j])
    let shifts: Vec<usize> = positions.iter().map(|&p| block_arity - 1 - p).collect();
    let mask: usize = shifts.iter().map(|s| 1usize << s).sum();
    let sub = |idx: usize| -> usize {
        (0..k).fold(0, |acc, j| (acc << 1) | ((idx >> shifts[j]) & 1))
    };
    let mut out = ComplexMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            if r & !mask != c & !mask {
                continue;
            }
            let v = op.get(sub(r), sub(c));
            if v != crate::linalg::ZERO {
                out.set(r, c, v);
            }
        }
    }
    debug_assert_eq!(op.rows(), dk);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    BitFlip,
    PhaseFlip,
    YError,
    Depolarizing,
    #[default]
    None,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 5] = [
        ChannelKind::BitFlip,
        ChannelKind::PhaseFlip,
        ChannelKind::YError,
        ChannelKind::Depolarizing,
        ChannelKind::None,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::BitFlip => "bit_flip",
            ChannelKind::PhaseFlip => "phase_flip",
            ChannelKind::YError => "y_error",
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::None => "none",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let kind = match key.as_str() {
            "bit_flip" | "x" | "bitflip" => ChannelKind::BitFlip,
            "phase_flip" | "z" | "dephasing" => ChannelKind::PhaseFlip,
            "y_error" | "y" => ChannelKind::YError,
            "depolarizing" | "depol" => ChannelKind::Depolarizing,
            "none" => ChannelKind::None,
            _ => return Err(Error::InvalidConfig(format!("unknown channel kind `{s}`"))),
        };
        Ok(kind)
    }
}

/// How the rate ε₂ of a multi-qubit gate is spread over its qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TwoQubitNoise {
    /// Each qubit of the gate gets the single-qubit channel at ε₂/2.
    #[default]
    SplitHalves,
    /// Each qubit of the gate gets the single-qubit channel at ε₂.
    Independent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: ChannelKind,
    pub eps1: f64,
    pub eps2: f64,
    #[serde(default)]
    pub two_qubit: TwoQubitNoise,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseSpec {
    pub fn new(kind: ChannelKind, eps1: f64, eps2: f64) -> Result<Self> {
        let spec = Self {
            kind,
            eps1,
            eps2,
            two_qubit: TwoQubitNoise::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn noiseless() -> Self {
        Self {
            kind: ChannelKind::None,
            eps1: 0.0,
            eps2: 0.0,
            two_qubit: TwoQubitNoise::default(),
        }
    }

    pub fn with_two_qubit(mut self, mode: TwoQubitNoise) -> Self {
        self.two_qubit = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for p in [self.eps1, self.eps2] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability(p));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.kind == ChannelKind::None || (self.eps1 == 0.0 && self.eps2 == 0.0)
    }

    /// Per-qubit rate for a gate of the given arity.
    pub fn rate_for(&self, arity: usize) -> f64 {
        match (arity, self.two_qubit) {
            (0 | 1, _) => self.eps1,
            (_, TwoQubitNoise::SplitHalves) => self.eps2 / 2.0,
            (_, TwoQubitNoise::Independent) => self.eps2,
        }
    }

    /// Channels to apply after a gate of `arity`, as (local position, channel).
    pub fn channels_for(&self, arity: usize) -> Result<Vec<(usize, KrausChannel)>> {
        let rate = self.rate_for(arity);
        if self.kind == ChannelKind::None || rate == 0.0 {
            return Ok(Vec::new());
        }
        let ch = KrausChannel::standard(self.kind, rate)?;
        Ok((0..arity).map(|p| (p, ch.clone())).collect())
    }

    /// Like [`channels_for`](Self::channels_for), as Pauli probabilities.
    pub fn pauli_for(&self, arity: usize) -> Result<Vec<(usize, [f64; 3])>> {
        let rate = self.rate_for(arity);
        if self.kind == ChannelKind::None || rate == 0.0 {
            return Ok(Vec::new());
        }
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidProbability(rate));
        }
        let probs = KrausChannel::pauli_probabilities(self.kind, rate);
        Ok((0..arity).map(|p| (p, probs)).collect())
    }
}
