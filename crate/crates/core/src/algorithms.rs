//! Benchmark circuits: X-rotation chains, the QFT with per-qubit STSs and
//! QAOA stages for QUBO instances.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Placement};
use crate::error::{Error, Result};
use crate::gates::{controlled, hadamard, rn, rx, rz, rzz, Polarity};
use crate::linalg::{ComplexMatrix, C64};
use crate::noise::NoiseSpec;
use crate::pauli::{Pauli, PauliString};
use crate::sts::{instrument_all, CheckMode, InstrumentOptions, StsDescriptor};

pub fn rotation_chain(n_gates: usize, theta: f64) -> Result<Circuit> {
    if n_gates == 0 {
        return Err(Error::InvalidCircuit("rotation chain needs at least one gate".into()));
    }
    let mut c = Circuit::new(1, 0);
    for _ in 0..n_gates {
        c.push(rx(theta), &[0])?;
    }
    Ok(c)
}

/// X-symmetry of a rotation chain: X before the first gate and after the last.
pub fn rotation_chain_sts(n_gates: usize) -> StsDescriptor {
    let x = PauliString::single(0, Pauli::X);
    StsDescriptor::new([(x.clone(), 0), (x, n_gates)])
}

/// [`rotation_chain`] checked by [`rotation_chain_sts`] on one ancilla.
pub fn rotation_chain_protected(n_gates: usize, theta: f64, check_noise: Option<NoiseSpec>) -> Result<Circuit> {
    let c = rotation_chain(n_gates, theta)?;
    let opts = InstrumentOptions {
        check_noise,
        ..Default::default()
    };
    Ok(instrument_all(&c, &[(rotation_chain_sts(n_gates), CheckMode::SingleAncilla)], &opts)?.circuit)
}

/// Circuit qubit holding textbook QFT qubit `j` (j = 0 is the most
/// significant input bit).
fn qft_qubit(n: usize, j: usize) -> usize {
    n - 1 - j
}

/// Moment index of the Hadamard on each textbook qubit.
fn qft_hadamard_moments(n: usize) -> Vec<usize> {
    let mut t = 0;
    (0..n)
        .map(|j| {
            let h = t;
            t += n - j;
            h
        })
        .collect()
}

/// QFT without the final swap network, one gate per moment. The output
/// register is bit-reversed relative to the DFT.
pub fn qft_circuit(n: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidCircuit("QFT needs at least two qubits".into()));
    }
    let mut c = Circuit::new(n, 0);
    for j in 0..n {
        c.push(hadamard(), &[qft_qubit(n, j)])?;
        for k in 2..=n - j {
            let ctrl = qft_qubit(n, j + k - 1);
            c.push(controlled(&rn(k as u32), Polarity::OnOne), &[ctrl, qft_qubit(n, j)])?;
        }
    }
    Ok(c)
}

/// One STS per data qubit: Z before the circuit, XZ right before the
/// qubit's Hadamard and Z after the circuit, each on its own ancilla.
pub fn qft_sts(n: usize) -> Vec<(StsDescriptor, CheckMode)> {
    let hs = qft_hadamard_moments(n);
    let len = n * (n + 1) / 2;
    (0..n)
        .map(|j| {
            let q = qft_qubit(n, j);
            let z = PauliString::single(q, Pauli::Z);
            let xz = PauliString::single(q, Pauli::X).mul(&z);
            let s = StsDescriptor::new([(z.clone(), 0), (xz, hs[j]), (z, len)]);
            (s, CheckMode::SingleAncilla)
        })
        .collect()
}

pub fn qft_protected(n: usize, check_noise: Option<NoiseSpec>) -> Result<Circuit> {
    let c = qft_circuit(n)?;
    let opts = InstrumentOptions {
        check_noise,
        ..Default::default()
    };
    Ok(instrument_all(&c, &qft_sts(n), &opts)?.circuit)
}

/// max xᵀAx + bᵀx over x ∈ {−1, 1}ⁿ; `a` symmetric with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct QuboInstance {
    n: usize,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl QuboInstance {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let n = b.len();
        if n == 0 || a.len() != n || a.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidConfig(format!("QUBO needs an {n}x{n} coupling matrix")));
        }
        for i in 0..n {
            if a[i][i] != 0.0 {
                return Err(Error::InvalidConfig(format!("nonzero diagonal a[{i}][{i}]")));
            }
            for j in 0..i {
                if (a[i][j] - a[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidConfig(format!("a is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, a, b })
    }

    /// a_ij, b_i ~ U(−1, 1).
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = rng.gen_range(-1.0..1.0);
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        let b = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Self { n, a, b }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub fn b(&self, i: usize) -> f64 {
        self.b[i]
    }

    /// xᵀAx + bᵀx.
    pub fn objective(&self, x: &[i8]) -> f64 {
        let mut f = 0.0;
        for i in 0..self.n {
            f += self.b[i] * f64::from(x[i]);
            for j in 0..self.n {
                f += self.a[i][j] * f64::from(x[i]) * f64::from(x[j]);
            }
        }
        f
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("n={}\n", self.n);
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.a[i][j] != 0.0 {
                    writeln!(s, "a {i} {j} {}", self.a[i][j]).unwrap();
                }
            }
        }
        for i in 0..self.n {
            writeln!(s, "b {i} {}", self.b[i]).unwrap();
        }
        s
    }
}

impl FromStr for QuboInstance {
    type Err = Error;

    /// `n=<k>` then `a i j value` and `b i value` lines; `#` starts a comment.
    fn from_str(text: &str) -> Result<Self> {
        let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
        let mut n = None;
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let ln = ln + 1;
            if let Some(v) = line.strip_prefix("n=") {
                let k: usize = v.trim().parse().map_err(|_| parse_err(ln, format!("bad size `{v}`")))?;
                n = Some(k);
                a = vec![vec![0.0; k]; k];
                b = vec![0.0; k];
                continue;
            }
            let k = n.ok_or_else(|| parse_err(ln, "missing `n=` header".into()))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let idx = |s: &str| -> Result<usize> {
                let i: usize = s.parse().map_err(|_| parse_err(ln, format!("bad index `{s}`")))?;
                if i >= k {
                    return Err(parse_err(ln, format!("index {i} out of range")));
                }
                Ok(i)
            };
            let val = |s: &str| -> Result<f64> { s.parse().map_err(|_| parse_err(ln, format!("bad value `{s}`"))) };
            match toks.as_slice() {
                ["a", i, j, v] => {
                    let (i, j, v) = (idx(i)?, idx(j)?, val(v)?);
                    if i == j {
                        return Err(parse_err(ln, "diagonal coupling".into()));
                    }
                    a[i][j] = v;
                    a[j][i] = v;
                }
                ["b", i, v] => b[idx(i)?] = val(v)?,
                _ => return Err(parse_err(ln, format!("unrecognized line `{line}`"))),
            }
        }
        if n.is_none() {
            return Err(parse_err(0, "missing `n=` header".into()));
        }
        QuboInstance::new(a, b)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QaoaParams {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl QaoaParams {
    pub fn new(beta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if beta.len() != gamma.len() || beta.is_empty() {
            return Err(Error::InvalidConfig("beta and gamma need the same nonzero length".into()));
        }
        Ok(Self { beta, gamma })
    }

    /// β, γ ~ U(−π, π) per stage.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, p: usize) -> Self {
        let pi = std::f64::consts::PI;
        let beta = (0..p).map(|_| rng.gen_range(-pi..pi)).collect();
        let gamma = (0..p).map(|_| rng.gen_range(-pi..pi)).collect();
        Self { beta, gamma }
    }

    pub fn stages(&self) -> usize {
        self.beta.len()
    }
}

/// Dense (H_P even part Σ a_ij Z_iZ_j, odd part Σ b_i Z_i, mixer Σ X_i).
pub fn qaoa_hamiltonians(q: &QuboInstance) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    let n = q.n;
    if n > 10 {
        return Err(Error::TooManyQubits { requested: n, max: 10 });
    }
    let d = 1usize << n;
    let z = |x: usize, i: usize| if x >> i & 1 == 0 { 1.0 } else { -1.0 };
    let mut even = vec![C64::new(0.0, 0.0); d];
    let mut odd = vec![C64::new(0.0, 0.0); d];
    for x in 0..d {
        for i in 0..n {
            odd[x] += q.b[i] * z(x, i);
            for j in 0..n {
                if i != j {
                    even[x] += q.a[i][j] * z(x, i) * z(x, j);
                }
            }
        }
    }
    let mut mixer = ComplexMatrix::zeros(d, d);
    for i in 0..n {
        mixer = &mixer + &PauliString::single(i, Pauli::X).to_matrix(n)?;
    }
    Ok((ComplexMatrix::diagonal(&even), ComplexMatrix::diagonal(&odd), mixer))
}

/// Which pair of STSs a stage carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StsPlacement {
    /// Z⊗N across the phase block, X⊗N across the even block and mixer.
    Even,
    /// Z⊗N across the phase block with X⊗N nested inside the even block;
    /// the mixer is unprotected.
    Odd,
}

impl StsPlacement {
    pub fn for_qubits(n: usize) -> Self {
        if n % 2 == 0 {
            StsPlacement::Even
        } else {
            StsPlacement::Odd
        }
    }
}

#[derive(Clone, Debug)]
pub struct QaoaStage {
    pub circuit: Circuit,
    /// Gaps before the odd block, before the even block, before the mixer
    /// and after the mixer.
    pub gaps: [usize; 4],
}

impl QaoaStage {
    pub fn sts(&self, n: usize, placement: StsPlacement) -> [StsDescriptor; 2] {
        stage_sts(n, self.gaps, 0, placement)
    }
}

fn stage_sts(n: usize, g: [usize; 4], offset: usize, placement: StsPlacement) -> [StsDescriptor; 2] {
    let z = PauliString::uniform(Pauli::Z, 0..n);
    let x = PauliString::uniform(Pauli::X, 0..n);
    let (x_open, x_close) = match placement {
        StsPlacement::Even => (g[1], g[3]),
        StsPlacement::Odd => (g[1], g[2]),
    };
    [
        StsDescriptor::new([(z.clone(), g[0] + offset), (z, g[2] + offset)]),
        StsDescriptor::new([(x.clone(), x_open + offset), (x, x_close + offset)]),
    ]
}

/// Greedy edge colouring of the nonzero couplings into parallel moments.
fn coupling_layers(q: &QuboInstance) -> Vec<Vec<(usize, usize)>> {
    let mut layers: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut busy: Vec<Vec<bool>> = Vec::new();
    for i in 0..q.n {
        for j in i + 1..q.n {
            if q.a[i][j] == 0.0 {
                continue;
            }
            let slot = busy.iter().position(|b| !b[i] && !b[j]);
            let k = slot.unwrap_or_else(|| {
                layers.push(Vec::new());
                busy.push(vec![false; q.n]);
                layers.len() - 1
            });
            layers[k].push((i, j));
            busy[k][i] = true;
            busy[k][j] = true;
        }
    }
    layers
}

/// e^{−iβH_M} e^{−iγH_P^even} e^{−iγH_P^odd} as gates: R_z(2b_iγ), then
/// R_zz(4a_ijγ) per coupling (each pair appears twice in H_P), then
/// R_x(2β).
pub fn qaoa_stage(q: &QuboInstance, beta: f64, gamma: f64) -> Result<QaoaStage> {
    let n = q.n;
    let mut c = Circuit::new(n, 0);
    c.push_moment((0..n).map(|i| Placement::new(rz(2.0 * q.b[i] * gamma), vec![i])).collect())?;
    for layer in coupling_layers(q) {
        c.push_moment(
            layer
                .into_iter()
                .map(|(i, j)| Placement::new(rzz(4.0 * q.a[i][j] * gamma), vec![i, j]))
                .collect(),
        )?;
    }
    let g2 = c.len();
    c.push_moment((0..n).map(|i| Placement::new(rx(2.0 * beta), vec![i])).collect())?;
    Ok(QaoaStage {
        gaps: [0, 1, g2, g2 + 1],
        circuit: c,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Protection {
    None,
    StsSingle,
    StsCat2,
}

impl Protection {
    pub fn label(self) -> &'static str {
        match self {
            Protection::None => "unprotected",
            Protection::StsSingle => "sts",
            Protection::StsCat2 => "sts_cat2",
        }
    }
}

/// Hadamards on every qubit, then the stages. Checks are post-selected
/// as they close so ancillas are reset and reused across stages.
pub fn qaoa_circuit(q: &QuboInstance, params: &QaoaParams, protection: Protection) -> Result<Circuit> {
    qaoa_circuit_with(q, params, protection, None)
}

pub fn qaoa_circuit_with(
    q: &QuboInstance,
    params: &QaoaParams,
    protection: Protection,
    check_noise: Option<NoiseSpec>,
) -> Result<Circuit> {
    let n = q.n;
    let mut c = Circuit::new(n, 0);
    c.push_moment((0..n).map(|i| Placement::new(hadamard(), vec![i])).collect())?;
    let placement = StsPlacement::for_qubits(n);
    let mut stss = Vec::new();
    for (&beta, &gamma) in params.beta.iter().zip(&params.gamma) {
        let stage = qaoa_stage(q, beta, gamma)?;
        stss.extend(stage_sts(n, stage.gaps, c.len(), placement));
        c.append(&stage.circuit)?;
    }
    let mode = match protection {
        Protection::None => return Ok(c),
        Protection::StsSingle => CheckMode::SingleAncilla,
        Protection::StsCat2 => CheckMode::Cat(2),
    };
    let list: Vec<(StsDescriptor, CheckMode)> = stss.into_iter().map(|s| (s, mode)).collect();
    let opts = InstrumentOptions {
        check_noise,
        mid_circuit: true,
        enabled: None,
    };
    Ok(instrument_all(&c, &list, &opts)?.circuit)
}

/// Instance `index` of a seeded family.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index))
}
