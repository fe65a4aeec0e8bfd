//! Random states, unitaries and channels for tests and oracle checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, DensityMatrix, C64};
use crate::noise::KrausChannel;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("shape")
}

/// Haar-random d×d unitary (QR of a Ginibre matrix with phase fix).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = ginibre(rng, d, d).to_nalgebra();
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let ph = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    ComplexMatrix::from_nalgebra(&q)
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, num_qubits: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..1usize << num_qubits).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Full-rank random mixed state G G† / tr(G G†).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, num_qubits: usize) -> DensityMatrix {
    let d = 1usize << num_qubits;
    let g = ginibre(rng, d, d);
    let m = &g * &g.dagger();
    let tr = m.trace().re;
    let mut m = m.scale(C64::new(1.0 / tr, 0.0));
    // symmetrize away rounding
    m = (&m + &m.dagger()).scale(C64::new(0.5, 0.0));
    DensityMatrix::from_matrix_unchecked(m).expect("square")
}

/// Random channel with `num_kraus` operators, cut from a Haar isometry.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, arity: usize, num_kraus: usize) -> KrausChannel {
    let d = 1usize << arity;
    let u = random_unitary(rng, d * num_kraus);
    let ops = (0..num_kraus)
        .map(|m| {
            let mut k = ComplexMatrix::zeros(d, d);
            for r in 0..d {
                for c in 0..d {
                    k.set(r, c, u.get(m * d + r, c));
                }
            }
            k
        })
        .collect();
    KrausChannel::new(ops).expect("isometry blocks form a channel")
}
