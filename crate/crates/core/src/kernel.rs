//! In-place application of local operations to a dense density matrix.
//!
//! Every placement (gate plus its noise) is compiled into a sparse
//! superoperator on the d² entries of a local block and swept over all
//! blocks of the full matrix.

use crate::error::{Error, Result};
use crate::gates::UnitaryGate;
use crate::linalg::{check_qubits, ComplexMatrix, DensityMatrix, C64, ONE, ZERO};
use crate::noise::KrausChannel;

const SPARSE_EPS: f64 = 1e-15;

/// Sparse superoperator: row (a·d + b) holds (c·d + e, S[(a,b),(c,e)]).
#[derive(Clone, Debug)]
pub(crate) struct SuperOp {
    arity: usize,
    rows: Vec<Vec<(u32, C64)>>,
}

impl SuperOp {
    pub(crate) fn from_channel(ch: &KrausChannel) -> Self {
        let d = ch.dim();
        let d2 = d * d;
        let mut dense = vec![ZERO; d2 * d2];
        for k in ch.ops() {
            let kd = k.data();
            for a in 0..d {
                for c in 0..d {
                    let kac = kd[a * d + c];
                    if kac == ZERO {
                        continue;
                    }
                    for b in 0..d {
                        for e in 0..d {
                            let kbe = kd[b * d + e];
                            if kbe == ZERO {
                                continue;
                            }
                            dense[(a * d + b) * d2 + c * d + e] += kac * kbe.conj();
                        }
                    }
                }
            }
        }
        let rows = (0..d2)
            .map(|r| {
                (0..d2)
                    .filter_map(|c| {
                        let v = dense[r * d2 + c];
                        (v.norm() >= SPARSE_EPS).then_some((c as u32, v))
                    })
                    .collect()
            })
            .collect();
        Self {
            arity: ch.arity(),
            rows,
        }
    }

    #[cfg(test)]
    pub(crate) fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Applies the map to the local block on `qubits` of a row-major 2^n matrix.
    pub(crate) fn apply(&self, data: &mut [C64], num_qubits: usize, qubits: &[usize]) {
        let k = qubits.len();
        debug_assert_eq!(k, self.arity);
        let d = 1usize << k;
        let dim = 1usize << num_qubits;
        debug_assert_eq!(data.len(), dim * dim);
        let off: Vec<usize> = (0..d)
            .map(|l| {
                (0..k)
                    .map(|j| ((l >> (k - 1 - j)) & 1) << qubits[j])
                    .sum()
            })
            .collect();
        let bases = block_bases(num_qubits, qubits);
        let mut buf = vec![ZERO; d * d];
        let mut out = vec![ZERO; d * d];
        for &rb in &bases {
            for &cb in &bases {
                for a in 0..d {
                    let row = (rb + off[a]) * dim + cb;
                    for b in 0..d {
                        buf[a * d + b] = data[row + off[b]];
                    }
                }
                for (o, terms) in out.iter_mut().zip(&self.rows) {
                    let mut acc = ZERO;
                    for &(j, v) in terms {
                        acc += v * buf[j as usize];
                    }
                    *o = acc;
                }
                for a in 0..d {
                    let row = (rb + off[a]) * dim + cb;
                    for b in 0..d {
                        data[row + off[b]] = out[a * d + b];
                    }
                }
            }
        }
    }
}

fn offsets(qubits: &[usize]) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|l| (0..k).map(|j| ((l >> (k - 1 - j)) & 1) << qubits[j]).sum())
        .collect()
}

/// One step of a compiled circuit, applied in place to a row-major
/// density matrix.
#[derive(Clone, Debug)]
pub(crate) enum LocalOp {
    /// A gate followed by Pauli noise on its qubits, swept block by block.
    Gate(GateOp),
    /// Projection onto |0⟩.
    Project { qubit: usize },
}

#[derive(Clone, Debug)]
enum Form {
    /// U[a][a] = phase[a].
    Diagonal(Vec<C64>),
    /// U[a][src[a]] = phase[a], all other entries zero.
    Monomial { src: Vec<usize>, phase: Vec<C64> },
    Dense(Vec<C64>),
}

/// Pauli channel on one local bit, written on the 2×2 sub-block
/// [[ρ00, ρ01], [ρ10, ρ11]] of that bit.
#[derive(Clone, Copy, Debug)]
struct PauliNoise {
    mask: usize,
    /// ρ00' = keep_diag ρ00 + swap_diag ρ11 (and symmetrically)
    keep_diag: f64,
    swap_diag: f64,
    /// ρ01' = keep_off ρ01 + swap_off ρ10 (and symmetrically)
    keep_off: f64,
    swap_off: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct GateOp {
    qubits: Vec<usize>,
    form: Form,
    noise: Vec<PauliNoise>,
}

impl LocalOp {
    /// `u` on `qubits`, then the Pauli channel with probabilities
    /// (p_X, p_Y, p_Z) on `qubits[position]` for each listed position.
    pub(crate) fn gate(u: &ComplexMatrix, qubits: &[usize], noise: &[(usize, [f64; 3])]) -> Self {
        let d = u.rows();
        let k = qubits.len();
        let nonzero: Vec<Vec<usize>> = (0..d).map(|r| (0..d).filter(|&c| u.get(r, c) != ZERO).collect()).collect();
        let form = if (0..d).all(|r| nonzero[r] == [r]) {
            Form::Diagonal((0..d).map(|i| u.get(i, i)).collect())
        } else if nonzero.iter().all(|nz| nz.len() == 1) {
            let src: Vec<usize> = nonzero.iter().map(|nz| nz[0]).collect();
            let phase = src.iter().enumerate().map(|(r, &c)| u.get(r, c)).collect();
            Form::Monomial { src, phase }
        } else {
            Form::Dense(u.data().to_vec())
        };
        let noise = noise
            .iter()
            .map(|&(pos, [px, py, pz])| {
                let p0 = 1.0 - px - py - pz;
                PauliNoise {
                    mask: 1 << (k - 1 - pos),
                    keep_diag: p0 + pz,
                    swap_diag: px + py,
                    keep_off: p0 - pz,
                    swap_off: px - py,
                }
            })
            .collect();
        LocalOp::Gate(GateOp {
            qubits: qubits.to_vec(),
            form,
            noise,
        })
    }

    pub(crate) fn apply(&self, data: &mut [C64], num_qubits: usize) {
        match self {
            LocalOp::Gate(g) => match g.qubits.len() {
                1 => g.sweep::<2>(data, num_qubits),
                2 => g.sweep::<4>(data, num_qubits),
                3 => g.sweep::<8>(data, num_qubits),
                4 => g.sweep::<16>(data, num_qubits),
                k => {
                    let u = g.matrix();
                    let op = SuperOp::from_channel(&KrausChannel::unitary(u));
                    op.apply(data, num_qubits, &g.qubits);
                    debug_assert!(g.noise.is_empty() || k <= 4);
                }
            },
            LocalOp::Project { qubit } => project(data, num_qubits, *qubit, 0),
        }
    }
}

impl GateOp {
    fn matrix(&self) -> ComplexMatrix {
        let d = 1usize << self.qubits.len();
        let mut m = ComplexMatrix::zeros(d, d);
        match &self.form {
            Form::Diagonal(ph) => ph.iter().enumerate().for_each(|(i, &z)| m.set(i, i, z)),
            Form::Monomial { src, phase } => (0..d).for_each(|r| m.set(r, src[r], phase[r])),
            Form::Dense(u) => m.data_mut().copy_from_slice(u),
        }
        m
    }

    fn sweep<const D: usize>(&self, data: &mut [C64], num_qubits: usize) {
        let dim = 1usize << num_qubits;
        let off = offsets(&self.qubits);
        let mut eoff = [[0usize; D]; D];
        for a in 0..D {
            for b in 0..D {
                eoff[a][b] = off[a] * dim + off[b];
            }
        }
        // phase factors phase[a]·conj(phase[b]) for the sparse forms
        let mut factor = [[ZERO; D]; D];
        let mut src = [0usize; D];
        let mut u = [[ZERO; D]; D];
        match &self.form {
            Form::Diagonal(ph) => {
                for a in 0..D {
                    src[a] = a;
                    for b in 0..D {
                        factor[a][b] = ph[a] * ph[b].conj();
                    }
                }
            }
            Form::Monomial { src: s, phase } => {
                for a in 0..D {
                    src[a] = s[a];
                    for b in 0..D {
                        factor[a][b] = phase[a] * phase[b].conj();
                    }
                }
            }
            Form::Dense(m) => {
                for a in 0..D {
                    for b in 0..D {
                        u[a][b] = m[a * D + b];
                    }
                }
            }
        }
        let dense = matches!(self.form, Form::Dense(_));
        let diagonal = matches!(self.form, Form::Diagonal(_));
        let real = dense && u.iter().flatten().all(|z| z.im == 0.0);
        let mut ur = [[0.0f64; D]; D];
        let mut unit = [[false; D]; D];
        for a in 0..D {
            for b in 0..D {
                ur[a][b] = u[a][b].re;
                unit[a][b] = factor[a][b] == ONE;
            }
        }
        // index pairs (a, a | mask) for each noisy bit
        let pairs: Vec<[(usize, usize); D]> = self
            .noise
            .iter()
            .map(|n| {
                let mut p = [(0, 0); D];
                for (slot, a0) in (0..D).filter(|a| a & n.mask == 0).enumerate() {
                    p[slot] = (a0, a0 | n.mask);
                }
                p
            })
            .collect();
        let bases = block_bases(num_qubits, &self.qubits);
        assert_eq!(data.len(), dim * dim);
        let mut x = [[ZERO; D]; D];
        let mut y = [[ZERO; D]; D];
        for &rb in &bases {
            let row = rb * dim;
            for &cb in &bases {
                let corner = row + cb;
                for a in 0..D {
                    for b in 0..D {
                        // SAFETY: corner + eoff[a][b] indexes a basis pair of the dim×dim matrix.
                        x[a][b] = unsafe { *data.get_unchecked(corner + eoff[a][b]) };
                    }
                }
                if real {
                    for a in 0..D {
                        for b in 0..D {
                            let mut acc = ZERO;
                            for j in 0..D {
                                acc += x[j][b] * ur[a][j];
                            }
                            y[a][b] = acc;
                        }
                    }
                    for a in 0..D {
                        for b in 0..D {
                            let mut acc = ZERO;
                            for j in 0..D {
                                acc += y[a][j] * ur[b][j];
                            }
                            x[a][b] = acc;
                        }
                    }
                } else if dense {
                    // y = U x, then x = y U†
                    for a in 0..D {
                        for b in 0..D {
                            let mut acc = ZERO;
                            for j in 0..D {
                                acc += u[a][j] * x[j][b];
                            }
                            y[a][b] = acc;
                        }
                    }
                    for a in 0..D {
                        for b in 0..D {
                            let mut acc = ZERO;
                            for j in 0..D {
                                acc += y[a][j] * u[b][j].conj();
                            }
                            x[a][b] = acc;
                        }
                    }
                } else if !diagonal {
                    for a in 0..D {
                        for b in 0..D {
                            let v = x[src[a]][src[b]];
                            y[a][b] = if unit[a][b] { v } else { factor[a][b] * v };
                        }
                    }
                    x = y;
                } else {
                    for a in 0..D {
                        for b in 0..D {
                            if !unit[a][b] {
                                x[a][b] *= factor[a][b];
                            }
                        }
                    }
                }
                for (n, pairs) in self.noise.iter().zip(&pairs) {
                    for &(a0, a1) in &pairs[..D / 2] {
                        for &(b0, b1) in &pairs[..D / 2] {
                            let (r00, r01, r10, r11) = (x[a0][b0], x[a0][b1], x[a1][b0], x[a1][b1]);
                            x[a0][b0] = r00 * n.keep_diag + r11 * n.swap_diag;
                            x[a1][b1] = r11 * n.keep_diag + r00 * n.swap_diag;
                            x[a0][b1] = r01 * n.keep_off + r10 * n.swap_off;
                            x[a1][b0] = r10 * n.keep_off + r01 * n.swap_off;
                        }
                    }
                }
                for a in 0..D {
                    for b in 0..D {
                        // SAFETY: as above.
                        unsafe { *data.get_unchecked_mut(corner + eoff[a][b]) = x[a][b] };
                    }
                }
            }
        }
    }
}

/// All basis indices whose bits on `qubits` are zero, ascending.
fn block_bases(num_qubits: usize, qubits: &[usize]) -> Vec<usize> {
    let free: Vec<usize> = (0..num_qubits).filter(|q| !qubits.contains(q)).collect();
    (0..1usize << free.len())
        .map(|i| {
            free.iter()
                .enumerate()
                .map(|(bit, &q)| ((i >> bit) & 1) << q)
                .sum()
        })
        .collect()
}

/// Zeroes every row and column whose index has bit `qubit` ≠ `outcome`.
pub(crate) fn project(data: &mut [C64], num_qubits: usize, qubit: usize, outcome: u8) {
    let dim = 1usize << num_qubits;
    let keep = |i: usize| ((i >> qubit) & 1) as u8 == outcome;
    for r in 0..dim {
        let row = &mut data[r * dim..(r + 1) * dim];
        if !keep(r) {
            row.fill(ZERO);
            continue;
        }
        for (c, v) in row.iter_mut().enumerate() {
            if !keep(c) {
                *v = ZERO;
            }
        }
    }
}

fn check_target(rho: &DensityMatrix, arity: usize, qubits: &[usize]) -> Result<()> {
    if qubits.len() != arity {
        return Err(Error::ArityMismatch {
            expected: arity,
            found: qubits.len(),
        });
    }
    check_qubits(qubits, rho.num_qubits())
}

/// U ρ U† with U acting on `qubits` (first listed = most significant).
pub fn apply_unitary(rho: &DensityMatrix, u: &UnitaryGate, qubits: &[usize]) -> Result<DensityMatrix> {
    check_target(rho, u.arity, qubits)?;
    let op = SuperOp::from_channel(&KrausChannel::unitary(u.matrix.clone()));
    apply_superop_to(rho, &op, qubits)
}

/// Σ K ρ K† with the channel acting on `qubits`.
pub fn apply_channel(rho: &DensityMatrix, ch: &KrausChannel, qubits: &[usize]) -> Result<DensityMatrix> {
    check_target(rho, ch.arity(), qubits)?;
    let op = SuperOp::from_channel(ch);
    apply_superop_to(rho, &op, qubits)
}

fn apply_superop_to(rho: &DensityMatrix, op: &SuperOp, qubits: &[usize]) -> Result<DensityMatrix> {
    let n = rho.num_qubits();
    let mut m: ComplexMatrix = rho.matrix().clone();
    op.apply(m.data_mut(), n, qubits);
    DensityMatrix::from_matrix_unchecked(m)
}
