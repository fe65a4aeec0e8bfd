//! Pauli strings with exact phase tracking in the group {±1, ±i}.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, I, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::X => ComplexMatrix::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]),
            Pauli::Y => ComplexMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]]),
            Pauli::Z => ComplexMatrix::from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]]),
        }
    }

    /// Product `self · other` as (power of i, Pauli or identity).
    fn mul(self, other: Pauli) -> (u8, Option<Pauli>) {
        use Pauli::*;
        match (self, other) {
            (a, b) if a == b => (0, None),
            (X, Y) => (1, Some(Z)),
            (Y, Z) => (1, Some(X)),
            (Z, X) => (1, Some(Y)),
            (Y, X) => (3, Some(Z)),
            (Z, Y) => (3, Some(X)),
            (X, Z) => (3, Some(Y)),
            _ => unreachable!(),
        }
    }

    pub fn commutes_with(self, other: Pauli) -> bool {
        self == other
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Phase i^k, k ∈ {0, 1, 2, 3}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const PLUS_ONE: Phase = Phase(0);
    pub const PLUS_I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u8) -> Self {
        Phase(k % 4)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn value(self) -> C64 {
        match self.0 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        }
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }
}

/// phase · ⊗_q P_q over the listed qubits; identity elsewhere.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PauliString {
    phase: Phase,
    factors: BTreeMap<usize, Pauli>,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(qubit: usize, p: Pauli) -> Self {
        Self::from_factors(Phase::PLUS_ONE, [(qubit, p)])
    }

    pub fn from_factors(phase: Phase, factors: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        let mut s = Self {
            phase,
            factors: BTreeMap::new(),
        };
        for (q, p) in factors {
            s = s.mul(&PauliString {
                phase: Phase::PLUS_ONE,
                factors: BTreeMap::from([(q, p)]),
            });
        }
        s
    }

    /// The same Pauli on every listed qubit.
    pub fn uniform(p: Pauli, qubits: impl IntoIterator<Item = usize>) -> Self {
        Self::from_factors(Phase::PLUS_ONE, qubits.into_iter().map(|q| (q, p)))
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn factors(&self) -> &BTreeMap<usize, Pauli> {
        &self.factors
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.keys().copied()
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty() && self.phase == Phase::PLUS_ONE
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        let mut phase = self.phase.mul(other.phase);
        let mut factors = self.factors.clone();
        for (&q, &p) in &other.factors {
            match factors.get(&q).copied() {
                None => {
                    factors.insert(q, p);
                }
                Some(a) => {
                    let (k, r) = a.mul(p);
                    phase = phase.mul(Phase::from_power(k));
                    match r {
                        Some(r) => {
                            factors.insert(q, r);
                        }
                        None => {
                            factors.remove(&q);
                        }
                    }
                }
            }
        }
        PauliString { phase, factors }
    }

    pub fn dagger(&self) -> PauliString {
        PauliString {
            phase: self.phase.conj(),
            factors: self.factors.clone(),
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .factors
            .iter()
            .filter(|(q, p)| other.factors.get(q).is_some_and(|o| !o.commutes_with(**p)))
            .count();
        anti % 2 == 0
    }

    /// Number of factors containing a Z component (Z or Y).
    pub fn z_count(&self) -> usize {
        self.factors
            .values()
            .filter(|p| matches!(p, Pauli::Z | Pauli::Y))
            .count()
    }

    /// Full 2^n matrix (little-endian qubit order).
    pub fn to_matrix(&self, num_qubits: usize) -> Result<ComplexMatrix> {
        if let Some(&q) = self.factors.keys().next_back() {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, num_qubits });
            }
        }
        let dim = 1usize << num_qubits;
        let mut m = ComplexMatrix::zeros(dim, dim);
        let (flip, phase_fn) = self.action();
        for col in 0..dim {
            let row = col ^ flip;
            m.set(row, col, phase_fn(col));
        }
        Ok(m)
    }

    /// Local 2^k matrix over `support()` in ascending qubit order, with the
    /// lowest qubit listed first (most significant local bit).
    pub fn local_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::identity(1).scale(self.phase.value());
        for p in self.factors.values() {
            m = crate::linalg::kron(&m, &p.matrix());
        }
        m
    }

    /// Phase times the factors on `qubits` (Kronecker order, first listed
    /// most significant); factors on other qubits are ignored.
    pub fn matrix_on(&self, qubits: &[usize]) -> ComplexMatrix {
        let mut m = ComplexMatrix::identity(1).scale(self.phase.value());
        for q in qubits {
            let f = self
                .factors
                .get(q)
                .map(|p| p.matrix())
                .unwrap_or_else(|| ComplexMatrix::identity(2));
            m = crate::linalg::kron(&m, &f);
        }
        m
    }

    /// Drops the factors on `qubits` (phase kept).
    pub fn without(&self, qubits: &[usize]) -> PauliString {
        let mut out = self.clone();
        for q in qubits {
            out.factors.remove(q);
        }
        out
    }

    /// Bit-flip mask and column-dependent amplitude: P|c⟩ = amp(c)|c ⊕ mask⟩.
    fn action(&self) -> (usize, impl Fn(usize) -> C64 + '_) {
        let mut flip = 0usize;
        for (&q, &p) in &self.factors {
            if matches!(p, Pauli::X | Pauli::Y) {
                flip |= 1 << q;
            }
        }
        let phase = self.phase.value();
        (flip, move |col: usize| {
            let mut amp = phase;
            for (&q, &p) in &self.factors {
                let bit = (col >> q) & 1;
                match (p, bit) {
                    (Pauli::Z, 1) => amp = -amp,
                    (Pauli::Y, 0) => amp *= I,
                    (Pauli::Y, _) => amp *= -I,
                    _ => {}
                }
            }
            amp
        })
    }

    /// Identifies a 2^k matrix on `qubits` as a Pauli string, if it is one.
    pub fn from_local_matrix(m: &ComplexMatrix, qubits: &[usize], tol: f64) -> Option<PauliString> {
        let k = qubits.len();
        if m.rows() != 1 << k || !m.is_square() {
            return None;
        }
        let labels = [None, Some(Pauli::X), Some(Pauli::Y), Some(Pauli::Z)];
        for code in 0..4usize.pow(k as u32) {
            let mut factors = Vec::new();
            let mut c = code;
            for &q in qubits {
                if let Some(p) = labels[c % 4] {
                    factors.push((q, p));
                }
                c /= 4;
            }
            let candidate = PauliString::from_factors(Phase::PLUS_ONE, factors);
            let mut local = ComplexMatrix::identity(1);
            for &q in qubits {
                let f = candidate
                    .factors
                    .get(&q)
                    .map(|p| p.matrix())
                    .unwrap_or_else(|| ComplexMatrix::identity(2));
                local = crate::linalg::kron(&local, &f);
            }
            for ph in 0..4 {
                let phase = Phase::from_power(ph);
                if m.max_abs_diff(&local.scale(phase.value())) < tol {
                    return Some(candidate.with_phase(phase));
                }
            }
        }
        None
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase.power() {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        if self.factors.is_empty() {
            return write!(f, "I");
        }
        for (i, (q, p)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            write!(f, "{}{}", p.symbol(), q)?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts an optional phase prefix (`-`, `i`, `-i`) followed by
    /// factors like `X0Z2` or `X0·Z2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (Phase::MINUS_I, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (Phase::PLUS_ONE, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (Phase::PLUS_I, r)
        } else {
            (Phase::PLUS_ONE, s)
        };
        let bad = || Error::InvalidDescriptor(format!("cannot parse Pauli string `{s}`"));
        if rest == "I" {
            return Ok(PauliString::identity().with_phase(phase));
        }
        let mut factors = Vec::new();
        let mut chars = rest.chars().filter(|c| *c != '·' && *c != '*').peekable();
        while let Some(c) = chars.next() {
            let p = Pauli::from_symbol(c).ok_or_else(bad)?;
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let q: usize = digits.parse().map_err(|_| bad())?;
            factors.push((q, p));
        }
        if factors.is_empty() {
            return Err(bad());
        }
        Ok(PauliString::from_factors(phase, factors))
    }
}
