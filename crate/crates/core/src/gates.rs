//! Unitary gate library.
//!
//! A gate's matrix acts on its qubit list in Kronecker order: the first
//! listed qubit is the most significant bit of the local index.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, C64, I, ONE, ZERO};
use crate::pauli::Pauli;

pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct UnitaryGate {
    pub name: String,
    pub arity: usize,
    pub matrix: ComplexMatrix,
    pub params: Vec<f64>,
}

impl fmt::Debug for UnitaryGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl UnitaryGate {
    /// Wraps an arbitrary matrix; checks dimension and unitarity.
    pub fn custom(name: impl Into<String>, matrix: ComplexMatrix) -> Result<Self> {
        let dim = matrix.rows();
        if !matrix.is_square() || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::DimensionMismatch {
                expected: "2^k x 2^k with k ≥ 1".into(),
                found: format!("{}x{}", matrix.rows(), matrix.cols()),
            });
        }
        if !matrix.is_unitary(UNITARY_TOL) {
            return Err(Error::InvalidCircuit("matrix is not unitary".into()));
        }
        Ok(Self {
            name: name.into(),
            arity: dim.trailing_zeros() as usize,
            matrix,
            params: Vec::new(),
        })
    }

    fn fixed(name: &str, matrix: ComplexMatrix) -> Self {
        let arity = matrix.rows().trailing_zeros() as usize;
        Self {
            name: name.into(),
            arity,
            matrix,
            params: Vec::new(),
        }
    }

    fn with_params(name: &str, params: Vec<f64>, matrix: ComplexMatrix) -> Self {
        let mut g = Self::fixed(name, matrix);
        g.params = params;
        g
    }

    /// `name(p1,p2)` or just `name`.
    pub fn label(&self) -> String {
        if self.params.is_empty() {
            self.name.clone()
        } else {
            let ps: Vec<String> = self.params.iter().map(|p| format!("{p}")).collect();
            format!("{}({})", self.name, ps.join(","))
        }
    }

    pub fn dagger(&self) -> UnitaryGate {
        UnitaryGate {
            name: format!("{}^dg", self.name),
            arity: self.arity,
            matrix: self.matrix.dagger(),
            params: self.params.clone(),
        }
    }

    /// True when every column has a single nonzero entry.
    pub fn is_monomial(&self) -> bool {
        let d = self.matrix.rows();
        (0..d).all(|c| (0..d).filter(|&r| self.matrix.get(r, c) != ZERO).count() == 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    OnOne,
    OnZero,
}

/// Adds a control as the new most significant (first listed) qubit.
pub fn controlled(u: &UnitaryGate, polarity: Polarity) -> UnitaryGate {
    let d = u.matrix.rows();
    let p0 = ComplexMatrix::from_rows(&[&[ONE, ZERO], &[ZERO, ZERO]]);
    let p1 = ComplexMatrix::from_rows(&[&[ZERO, ZERO], &[ZERO, ONE]]);
    let id = ComplexMatrix::identity(d);
    let (on0, on1, prefix) = match polarity {
        Polarity::OnOne => (&id, &u.matrix, "c-"),
        Polarity::OnZero => (&u.matrix, &id, "c0-"),
    };
    let matrix = &kron(&p0, on0) + &kron(&p1, on1);
    UnitaryGate {
        name: format!("{prefix}{}", u.name),
        arity: u.arity + 1,
        matrix,
        params: u.params.clone(),
    }
}

pub fn identity() -> UnitaryGate {
    UnitaryGate::fixed("i", ComplexMatrix::identity(2))
}

pub fn hadamard() -> UnitaryGate {
    let s = 1.0 / 2f64.sqrt();
    UnitaryGate::fixed("h", ComplexMatrix::from_real(&[&[s, s], &[s, -s]]))
}

pub fn pauli(p: Pauli) -> UnitaryGate {
    let name = match p {
        Pauli::X => "x",
        Pauli::Y => "y",
        Pauli::Z => "z",
    };
    UnitaryGate::fixed(name, p.matrix())
}

/// Z followed by X in time order: the operator XZ = [[0, -1], [1, 0]] = -iY.
pub fn zx() -> UnitaryGate {
    UnitaryGate::fixed("zx", ComplexMatrix::from_real(&[&[0.0, -1.0], &[1.0, 0.0]]))
}

/// exp(-iθX/2).
pub fn rx(theta: f64) -> UnitaryGate {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    UnitaryGate::with_params(
        "rx",
        vec![theta],
        ComplexMatrix::from_rows(&[&[C64::new(c, 0.0), -I * s], &[-I * s, C64::new(c, 0.0)]]),
    )
}

/// exp(-iθZ/2).
pub fn rz(theta: f64) -> UnitaryGate {
    UnitaryGate::with_params(
        "rz",
        vec![theta],
        ComplexMatrix::diagonal(&[C64::from_polar(1.0, -theta / 2.0), C64::from_polar(1.0, theta / 2.0)]),
    )
}

/// exp(-iθ X⊗X/2).
pub fn rxx(theta: f64) -> UnitaryGate {
    let (c, s) = (C64::new((theta / 2.0).cos(), 0.0), -I * (theta / 2.0).sin());
    UnitaryGate::with_params(
        "rxx",
        vec![theta],
        ComplexMatrix::from_rows(&[
            &[c, ZERO, ZERO, s],
            &[ZERO, c, s, ZERO],
            &[ZERO, s, c, ZERO],
            &[s, ZERO, ZERO, c],
        ]),
    )
}

/// exp(-iθ Z⊗Z/2).
pub fn rzz(theta: f64) -> UnitaryGate {
    let a = C64::from_polar(1.0, -theta / 2.0);
    let b = C64::from_polar(1.0, theta / 2.0);
    UnitaryGate::with_params("rzz", vec![theta], ComplexMatrix::diagonal(&[a, b, b, a]))
}

/// diag(1, e^{i 2π / 2^n}).
pub fn rn(n: u32) -> UnitaryGate {
    let phi = 2.0 * PI / 2f64.powi(n as i32);
    UnitaryGate::with_params("rn", vec![n as f64], ComplexMatrix::diagonal(&[ONE, C64::from_polar(1.0, phi)]))
}

/// diag(1, e^{iφ}).
pub fn phase(phi: f64) -> UnitaryGate {
    UnitaryGate::with_params("p", vec![phi], ComplexMatrix::diagonal(&[ONE, C64::from_polar(1.0, phi)]))
}

pub fn cnot() -> UnitaryGate {
    let mut g = controlled(&pauli(Pauli::X), Polarity::OnOne);
    g.name = "cx".into();
    g
}

pub fn cz() -> UnitaryGate {
    let mut g = controlled(&pauli(Pauli::Z), Polarity::OnOne);
    g.name = "cz".into();
    g
}

fn expect_params(name: &str, params: &[f64], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(Error::GateParams {
            name: name.into(),
            expected: n,
            found: params.len(),
        });
    }
    Ok(())
}

/// Looks a gate up by name. Prefixes `c-` and `c0-` add a control on |1⟩
/// or |0⟩ and may be nested.
pub fn gate_library(name: &str, params: &[f64]) -> Result<UnitaryGate> {
    let lower = name.to_ascii_lowercase();
    if let Some(inner) = lower.strip_prefix("c0-") {
        return Ok(controlled(&gate_library(inner, params)?, Polarity::OnZero));
    }
    if let Some(inner) = lower.strip_prefix("c-") {
        return Ok(controlled(&gate_library(inner, params)?, Polarity::OnOne));
    }
    let fixed = |g: UnitaryGate| -> Result<UnitaryGate> {
        expect_params(&lower, params, 0)?;
        Ok(g)
    };
    let angle = |f: fn(f64) -> UnitaryGate| -> Result<UnitaryGate> {
        expect_params(&lower, params, 1)?;
        Ok(f(params[0]))
    };
    match lower.as_str() {
        "i" | "id" => fixed(identity()),
        "h" => fixed(hadamard()),
        "x" => fixed(pauli(Pauli::X)),
        "y" => fixed(pauli(Pauli::Y)),
        "z" => fixed(pauli(Pauli::Z)),
        "zx" => fixed(zx()),
        "cx" | "cnot" => fixed(cnot()),
        "cz" => fixed(cz()),
        "rx" => angle(rx),
        "rz" => angle(rz),
        "rxx" => angle(rxx),
        "rzz" => angle(rzz),
        "p" => angle(phase),
        "rn" => {
            expect_params(&lower, params, 1)?;
            let n = params[0];
            if n < 0.0 || n.fract() != 0.0 {
                return Err(Error::UnknownGate(format!("rn({n})")));
            }
            Ok(rn(n as u32))
        }
        _ => Err(Error::UnknownGate(name.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;

    #[test]
    fn rx_zero_is_identity() {
        assert!(rx(0.0).matrix.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn r1_is_z() {
        assert!(rn(1).matrix.max_abs_diff(&Pauli::Z.matrix()) < 1e-15);
    }

    #[test]
    fn rxx_pi_by_eigendecomposition() {
        let xx = kron(&Pauli::X.matrix(), &Pauli::X.matrix());
        let oracle = xx.exp_i_hermitian(PI / 2.0).unwrap();
        assert!(rxx(PI).matrix.max_abs_diff(&oracle) < 1e-12);
        assert!(rxx(PI).matrix.max_abs_diff(&xx.scale(-I)) < 1e-12);
    }

    #[test]
    fn rotations_match_exponentials() {
        for &t in &[0.3, -1.2, 2.9] {
            let ex = Pauli::X.matrix().exp_i_hermitian(t / 2.0).unwrap();
            assert!(rx(t).matrix.max_abs_diff(&ex) < 1e-12);
            let ez = Pauli::Z.matrix().exp_i_hermitian(t / 2.0).unwrap();
            assert!(rz(t).matrix.max_abs_diff(&ez) < 1e-12);
            let zz = kron(&Pauli::Z.matrix(), &Pauli::Z.matrix());
            assert!(rzz(t).matrix.max_abs_diff(&zz.exp_i_hermitian(t / 2.0).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn controlled_x_is_cnot() {
        let c = controlled(&pauli(Pauli::X), Polarity::OnOne);
        let expect = ComplexMatrix::from_real(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        assert_eq!(c.matrix, expect);
    }

    #[test]
    fn controlled_zx_differs_from_controlled_y_by_phase() {
        let a = controlled(&zx(), Polarity::OnOne).matrix;
        let b = controlled(&pauli(Pauli::Y), Polarity::OnOne).matrix;
        assert!(a.max_abs_diff(&b) > 0.5);
        // |1⟩ block: ZX = -i·Y
        for r in 2..4 {
            for c in 2..4 {
                assert!((a.get(r, c) - (-I) * b.get(r, c)).norm() < 1e-15);
            }
        }
        // the uncontrolled matrices agree up to a global phase only
        assert!(zx().matrix.max_abs_diff_up_to_phase(&pauli(Pauli::Y).matrix) < 1e-15);
    }

    #[test]
    fn anti_control_is_x_conjugate_of_control() {
        let t = 0.77;
        let on1 = controlled(&rx(t), Polarity::OnOne).matrix;
        let on0 = controlled(&rx(t), Polarity::OnZero).matrix;
        let xc = kron(&Pauli::X.matrix(), &ComplexMatrix::identity(2));
        let conj = &(&xc * &on1) * &xc;
        assert!(on0.max_abs_diff(&conj) < 1e-15);
    }

    #[test]
    fn library_gates_are_unitary() {
        let names: &[(&str, &[f64])] = &[
            ("h", &[]),
            ("x", &[]),
            ("y", &[]),
            ("z", &[]),
            ("zx", &[]),
            ("cx", &[]),
            ("cz", &[]),
            ("rx", &[0.4]),
            ("rz", &[1.1]),
            ("rxx", &[2.2]),
            ("rzz", &[-0.9]),
            ("rn", &[3.0]),
            ("p", &[0.5]),
            ("c-rx", &[0.3]),
            ("c0-rn", &[2.0]),
            ("c-c-x", &[]),
        ];
        for (n, p) in names {
            let g = gate_library(n, p).unwrap();
            assert!(g.matrix.is_unitary(1e-12), "{n}");
            assert_eq!(g.matrix.rows(), 1 << g.arity);
        }
    }

    #[test]
    fn unknown_gate_and_bad_params() {
        assert!(matches!(gate_library("foo", &[]), Err(Error::UnknownGate(_))));
        assert!(matches!(gate_library("rx", &[]), Err(Error::GateParams { .. })));
    }
}
