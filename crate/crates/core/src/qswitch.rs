//! Quantum-switch circuits for commutativity checks and the closed-form
//! post-selected state of a switch between two channels.

use crate::circuit::{Circuit, InitialState, Placement};
use crate::error::{Error, Result};
use crate::gates::{controlled, hadamard, Polarity, UnitaryGate};
use crate::linalg::{anticommutator, commutator, partial_trace, ComplexMatrix, DensityMatrix, C64, ZERO};
use crate::noise::{KrausChannel, NoiseSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwitchVariant {
    /// Two gates, one control.
    OriginalPair,
    /// One control per gate except the last.
    MultiType1,
    /// One control shared by all gates.
    MultiType2,
}

impl SwitchVariant {
    pub fn label(self) -> &'static str {
        match self {
            SwitchVariant::OriginalPair => "qs_original",
            SwitchVariant::MultiType1 => "qs_type1",
            SwitchVariant::MultiType2 => "qs_type2",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SwitchGate {
    pub gate: UnitaryGate,
    /// Data qubits in the gate's Kronecker order.
    pub qubits: Vec<usize>,
    pub noise: Option<NoiseSpec>,
}

impl SwitchGate {
    pub fn new(gate: UnitaryGate, qubits: Vec<usize>) -> Self {
        Self {
            gate,
            qubits,
            noise: None,
        }
    }

    fn placement(&self, control: Option<(usize, Polarity)>) -> Placement {
        let (gate, qubits) = match control {
            None => (self.gate.clone(), self.qubits.clone()),
            Some((c, pol)) => {
                let mut qs = vec![c];
                qs.extend_from_slice(&self.qubits);
                (controlled(&self.gate, pol), qs)
            }
        };
        Placement {
            gate,
            qubits,
            noise: self.noise,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SwitchSpec {
    pub num_data: usize,
    pub gates: Vec<SwitchGate>,
    pub variant: SwitchVariant,
    /// `Plus` is prepared with a Hadamard on |0⟩ so that it can be noisy.
    pub control_init: InitialState,
    /// Noise override for the control-qubit Hadamards.
    pub control_noise: Option<NoiseSpec>,
}

impl SwitchSpec {
    pub fn new(num_data: usize, gates: Vec<SwitchGate>, variant: SwitchVariant) -> Self {
        Self {
            num_data,
            gates,
            variant,
            control_init: InitialState::Plus,
            control_noise: None,
        }
    }

    /// Same gate list with noiseless controls, Hadamards and gates.
    pub fn ideal(mut self) -> Self {
        self.control_noise = Some(NoiseSpec::noiseless());
        for g in &mut self.gates {
            g.noise = Some(NoiseSpec::noiseless());
        }
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.gates.len();
        match self.variant {
            SwitchVariant::OriginalPair if n != 2 => {
                return Err(Error::InvalidSwitch(format!("original pair needs 2 gates, got {n}")))
            }
            _ if n < 2 => return Err(Error::InvalidSwitch(format!("need at least 2 gates, got {n}"))),
            _ => {}
        }
        for g in &self.gates {
            if g.qubits.len() != g.gate.arity {
                return Err(Error::ArityMismatch {
                    expected: g.gate.arity,
                    found: g.qubits.len(),
                });
            }
            crate::linalg::check_qubits(&g.qubits, self.num_data)?;
        }
        Ok(())
    }

    pub fn num_controls(&self) -> usize {
        match self.variant {
            SwitchVariant::MultiType1 => self.gates.len() - 1,
            _ => 1,
        }
    }
}

/// Builds the switch circuit; controls sit above the data register and
/// are post-selected on 0 after a final Hadamard.
pub fn build_switch(spec: &SwitchSpec) -> Result<Circuit> {
    spec.validate()?;
    let k = spec.num_controls();
    let mut c = Circuit::new(spec.num_data, k);
    let controls: Vec<usize> = (0..k).map(|i| c.ancilla(i)).collect();
    let hadamards = |c: &mut Circuit| -> Result<()> {
        let layer = controls
            .iter()
            .map(|&q| Placement {
                gate: hadamard(),
                qubits: vec![q],
                noise: spec.control_noise,
            })
            .collect();
        c.push_moment(layer)?;
        Ok(())
    };
    if spec.control_init == InitialState::Plus {
        hadamards(&mut c)?;
    } else {
        for &q in &controls {
            c.set_initial(q, spec.control_init.clone())?;
        }
    }
    let g = &spec.gates;
    let last = g.len() - 1;
    match spec.variant {
        SwitchVariant::OriginalPair | SwitchVariant::MultiType2 => {
            let ctrl = controls[0];
            c.push_moment(vec![g[0].placement(Some((ctrl, Polarity::OnOne)))])?;
            for gate in &g[1..] {
                c.push_moment(vec![gate.placement(None)])?;
            }
            c.push_moment(vec![g[0].placement(Some((ctrl, Polarity::OnZero)))])?;
        }
        SwitchVariant::MultiType1 => {
            for (i, gate) in g[..last].iter().enumerate() {
                c.push_moment(vec![gate.placement(Some((controls[i], Polarity::OnOne)))])?;
            }
            c.push_moment(vec![g[last].placement(None)])?;
            for (i, gate) in g[..last].iter().enumerate().rev() {
                c.push_moment(vec![gate.placement(Some((controls[i], Polarity::OnZero)))])?;
            }
        }
    }
    hadamards(&mut c)?;
    for &q in &controls {
        c.set_postselect(q, 0)?;
    }
    Ok(c)
}

fn check_pair(a: &KrausChannel, b: &KrausChannel, rho: &DensityMatrix) -> Result<()> {
    if a.arity() != b.arity() || a.arity() != rho.num_qubits() {
        return Err(Error::ArityMismatch {
            expected: rho.num_qubits(),
            found: if a.arity() != rho.num_qubits() { a.arity() } else { b.arity() },
        });
    }
    Ok(())
}

fn sandwich(k: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    &(k * rho) * &k.dagger()
}

fn weighted_sum(
    a: &KrausChannel,
    b: &KrausChannel,
    rho: &DensityMatrix,
    op: fn(&ComplexMatrix, &ComplexMatrix) -> Result<ComplexMatrix>,
) -> Result<ComplexMatrix> {
    let d = rho.dim();
    let mut acc = ComplexMatrix::zeros(d, d);
    for ai in a.ops() {
        for bj in b.ops() {
            acc = &acc + &sandwich(&op(ai, bj)?, rho.matrix());
        }
    }
    Ok(acc.scale(C64::new(0.25, 0.0)))
}

/// Data state before post-selection:
/// ¼ Σ ({A_i,B_j} ρ {A_i,B_j}† + [A_i,B_j] ρ [A_i,B_j]†).
pub fn prop1_raw(a: &KrausChannel, b: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_pair(a, b, rho)?;
    let anti = weighted_sum(a, b, rho, anticommutator)?;
    let comm = weighted_sum(a, b, rho, commutator)?;
    DensityMatrix::from_matrix_unchecked(&anti + &comm)
}

/// ½ Σ (A_i B_j ρ B_j† A_i† + B_j A_i ρ A_i† B_j†).
pub fn prop1_avg(a: &KrausChannel, b: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_pair(a, b, rho)?;
    let d = rho.dim();
    let mut acc = ComplexMatrix::zeros(d, d);
    for ai in a.ops() {
        for bj in b.ops() {
            acc = &acc + &sandwich(&(ai * bj), rho.matrix());
            acc = &acc + &sandwich(&(bj * ai), rho.matrix());
        }
    }
    DensityMatrix::from_matrix_unchecked(acc.scale(C64::new(0.5, 0.0)))
}

/// Anti-commutator part renormalized, and its trace as the pass probability.
pub fn prop1_postselected(a: &KrausChannel, b: &KrausChannel, rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    check_pair(a, b, rho)?;
    let anti = weighted_sum(a, b, rho, anticommutator)?;
    let p = anti.trace().re;
    if p < crate::circuit::MIN_PASS_PROBABILITY {
        return Err(Error::PostSelectionImpossible { p_pass: p.max(0.0) });
    }
    Ok((DensityMatrix::from_matrix_unchecked(anti.scale(C64::new(1.0 / p, 0.0)))?, p))
}

/// Stinespring unitary U with U(|ψ⟩⊗|0⟩) = Σ_m K_m|ψ⟩⊗|m⟩; the system is
/// the high (first listed) part, the environment has ⌈log₂ #K⌉ qubits.
pub fn dilation(ch: &KrausChannel) -> Result<(UnitaryGate, usize)> {
    let d = ch.dim();
    let m = ch.ops().len();
    let env = m.next_power_of_two().trailing_zeros() as usize;
    let me = 1usize << env;
    let big = d * me;
    let mut iso = vec![vec![ZERO; big]; d];
    for (k, op) in ch.ops().iter().enumerate() {
        for a in 0..d {
            for (c, col) in iso.iter_mut().enumerate() {
                col[a * me + k] = op.get(a, c);
            }
        }
    }
    let mut found: Vec<Vec<C64>> = iso.clone();
    let mut slots: Vec<Option<Vec<C64>>> = vec![None; big];
    for (c, col) in iso.into_iter().enumerate() {
        slots[c * me] = Some(col);
    }
    // complete the isometry by Gram-Schmidt over the standard basis
    let mut next_basis = 0;
    for slot in slots.iter_mut().filter(|s| s.is_none()) {
        loop {
            let mut v = vec![ZERO; big];
            v[next_basis] = C64::new(1.0, 0.0);
            next_basis += 1;
            for u in &found {
                let dot: C64 = u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= dot * ui;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                let v: Vec<C64> = v.into_iter().map(|z| z / norm).collect();
                found.push(v.clone());
                *slot = Some(v);
                break;
            }
        }
    }
    let mut u = ComplexMatrix::zeros(big, big);
    for (c, col) in slots.iter().enumerate() {
        let col = col.as_ref().expect("completed");
        for r in 0..big {
            u.set(r, c, col[r]);
        }
    }
    Ok((UnitaryGate::custom("dilation", u)?, env))
}

/// Ideal switch over two channels realized by dilations. Returns the
/// post-selected data state and pass probability.
pub fn switch_channels(a: &KrausChannel, b: &KrausChannel, rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    check_pair(a, b, rho)?;
    let n = rho.num_qubits();
    let (ua, ea) = dilation(a)?;
    let (ub, eb) = dilation(b)?;
    let width = n + ea + eb;
    let data: Vec<usize> = (0..n).rev().collect();
    let mut qa = data.clone();
    qa.extend((n..n + ea).rev());
    let mut qb = data;
    qb.extend((n + ea..width).rev());
    let spec = SwitchSpec::new(
        width,
        vec![SwitchGate::new(ua, qa), SwitchGate::new(ub, qb)],
        SwitchVariant::OriginalPair,
    )
    .ideal();
    let c = build_switch(&spec)?;
    let env = DensityMatrix::zero_state(ea + eb);
    let input = if ea + eb > 0 { rho.tensor(&env) } else { rho.clone() };
    let r = c.run_with_input(&input, &NoiseSpec::noiseless())?;
    let keep: Vec<usize> = (0..n).collect();
    Ok((partial_trace(&r.rho_data, &keep)?, r.p_pass))
}
