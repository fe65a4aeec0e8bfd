//! Spatio-temporal stabilizers: descriptors, circuit instrumentation with
//! one ancilla or a cat state, and simultaneous-observability checks.
//!
//! A component at time index t sits in the gap before moment t of the
//! target circuit; t = N is after the last moment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Placement, ORACLE_MAX_QUBITS};
use crate::error::{Error, Result};
use crate::gates::{cnot, controlled, hadamard, zx, phase, Polarity, UnitaryGate};
use crate::linalg::{ComplexMatrix, DensityMatrix, C64};
use crate::noise::{embed_operator, NoiseSpec};
use crate::pauli::{Pauli, PauliString, Phase};

pub const STS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StsComponent {
    pub pauli: PauliString,
    pub time: usize,
}

/// Components sorted by time; at most one component per time index.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct StsDescriptor {
    components: Vec<StsComponent>,
}

impl StsDescriptor {
    /// Sorts by time and multiplies components sharing a time index, the
    /// later-listed one acting later. Identity products are dropped.
    pub fn new(components: impl IntoIterator<Item = (PauliString, usize)>) -> Self {
        let mut by_time: BTreeMap<usize, PauliString> = BTreeMap::new();
        for (p, t) in components {
            let e = by_time.entry(t).or_insert_with(PauliString::identity);
            *e = p.mul(e);
        }
        let components = by_time
            .into_iter()
            .filter(|(_, p)| !(p.is_identity() && p.phase() == Phase::PLUS_ONE))
            .map(|(time, pauli)| StsComponent { pauli, time })
            .collect();
        Self { components }
    }

    pub fn components(&self) -> &[StsComponent] {
        &self.components
    }

    pub fn is_trivial(&self) -> bool {
        self.components.is_empty()
    }

    pub fn at(&self, time: usize) -> Option<&PauliString> {
        self.components.iter().find(|c| c.time == time).map(|c| &c.pauli)
    }

    pub fn t_min(&self) -> Option<usize> {
        self.components.first().map(|c| c.time)
    }

    pub fn t_max(&self) -> Option<usize> {
        self.components.last().map(|c| c.time)
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.components.iter().flat_map(|c| c.pauli.support()).collect()
    }

    pub fn scope(&self) -> Option<ActionScope> {
        Some(ActionScope {
            spatial: self.support(),
            t_min: self.t_min()?,
            t_max: self.t_max()?,
        })
    }

    pub fn max_weight(&self) -> usize {
        self.components.iter().map(|c| c.pauli.weight()).max().unwrap_or(0)
    }

    fn check_against(&self, c: &Circuit) -> Result<()> {
        for comp in &self.components {
            if comp.time > c.len() {
                return Err(Error::InvalidDescriptor(format!(
                    "time index {} beyond the {} moments of the circuit",
                    comp.time,
                    c.len()
                )));
            }
            if let Some(q) = comp.pauli.support().find(|&q| q >= c.num_data_qubits()) {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    num_qubits: c.num_data_qubits(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for StsDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|c| format!("{}@{}", c.pauli, c.time))
            .collect();
        write!(f, "S{{ {} }}", parts.join(", "))
    }
}

impl FromStr for StsDescriptor {
    type Err = Error;

    /// `S{ X1@0, X2@0, Z1@1 }`; each entry is a Pauli string at a time index.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let body = t
            .strip_prefix("S{")
            .or_else(|| t.strip_prefix("S {"))
            .or_else(|| t.strip_prefix('{'))
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::InvalidDescriptor(format!("expected `S{{ ... }}`, got `{s}`")))?;
        let mut comps = Vec::new();
        for entry in body.split(',').map(str::trim).filter(|e| !e.is_empty()) {
            let (p, time) = entry
                .rsplit_once('@')
                .ok_or_else(|| Error::InvalidDescriptor(format!("missing `@time` in `{entry}`")))?;
            let time: usize = time
                .trim()
                .parse()
                .map_err(|_| Error::InvalidDescriptor(format!("bad time index in `{entry}`")))?;
            comps.push((p.trim().parse::<PauliString>()?, time));
        }
        Ok(Self::new(comps))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionScope {
    pub spatial: BTreeSet<usize>,
    pub t_min: usize,
    pub t_max: usize,
}

impl ActionScope {
    /// Disjoint in space, or in time with at most a shared boundary gap.
    pub fn is_disjoint(&self, other: &ActionScope) -> bool {
        self.spatial.is_disjoint(&other.spatial) || self.t_max <= other.t_min || other.t_max <= self.t_min
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    SingleAncilla,
    /// Cat state over this many ancillas.
    Cat(usize),
}

impl CheckMode {
    pub fn ancillas(self) -> usize {
        match self {
            CheckMode::SingleAncilla => 1,
            CheckMode::Cat(n) => n,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct InstrumentOptions {
    /// Noise override for every check gate (`Some(noiseless)` for
    /// error-free checks).
    pub check_noise: Option<NoiseSpec>,
    /// Post-select each check right after it closes and reuse its ancillas.
    pub mid_circuit: bool,
    /// Per-STS enable flags; a disabled check keeps its ancillas in |0⟩.
    pub enabled: Option<Vec<bool>>,
}

#[derive(Clone, Debug)]
pub struct Instrumented {
    pub circuit: Circuit,
    /// Ancilla qubits used by each STS.
    pub ancillas: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Role {
    Close,
    Single,
    Middle,
    Open,
}

struct Event {
    sts: usize,
    comp: usize,
    role: Role,
}

/// Events at each gap, ordered so that checks nest: closings first (the
/// later-opened closes first), then the rest, then openings (the
/// later-closing opens first).
fn schedule(list: &[StsDescriptor], gaps: usize) -> Vec<Vec<Event>> {
    let mut out: Vec<Vec<Event>> = (0..=gaps).map(|_| Vec::new()).collect();
    for (i, s) in list.iter().enumerate() {
        let n = s.components.len();
        for (k, comp) in s.components.iter().enumerate() {
            let role = match (k == 0, k + 1 == n) {
                (true, true) => Role::Single,
                (true, false) => Role::Open,
                (false, true) => Role::Close,
                _ => Role::Middle,
            };
            out[comp.time].push(Event { sts: i, comp: k, role });
        }
    }
    for evs in &mut out {
        evs.sort_by(|a, b| {
            let key = |e: &Event| {
                let s = &list[e.sts];
                let nest = match e.role {
                    Role::Close => std::cmp::Reverse(s.t_min().unwrap_or(0)),
                    Role::Open => std::cmp::Reverse(s.t_max().unwrap_or(0)),
                    _ => std::cmp::Reverse(0),
                };
                (e.role, nest, e.sts)
            };
            key(a).cmp(&key(b))
        });
    }
    out
}

fn check_placement(gate: UnitaryGate, qubits: Vec<usize>, noise: Option<NoiseSpec>) -> Placement {
    Placement { gate, qubits, noise }
}

/// Controlled `phase · P` for one qubit's factor.
fn controlled_factor(p: Pauli, ph: Phase) -> Result<UnitaryGate> {
    let base = crate::gates::pauli(p);
    if ph == Phase::PLUS_ONE {
        return Ok(controlled(&base, Polarity::OnOne));
    }
    if p == Pauli::Y && ph == Phase::MINUS_I {
        return Ok(controlled(&zx(), Polarity::OnOne));
    }
    let m = base.matrix.scale(ph.value());
    let name = format!("{}", PauliString::single(0, p).with_phase(ph)).replace('0', "");
    Ok(controlled(&UnitaryGate::custom(name, m)?, Polarity::OnOne))
}

/// Controlled-Pauli gates for one component, split over the ancillas.
fn component_gates(p: &PauliString, ancillas: &[usize], noise: Option<NoiseSpec>) -> Result<Vec<Placement>> {
    let factors: Vec<(usize, Pauli)> = p.factors().iter().map(|(&q, &f)| (q, f)).collect();
    let n = ancillas.len();
    let mut out = Vec::new();
    if factors.is_empty() {
        // pure phase: a phase gate on the first ancilla
        if p.phase() != Phase::PLUS_ONE {
            let arg = p.phase().value().arg();
            out.push(check_placement(phase(arg), vec![ancillas[0]], noise));
        }
        return Ok(out);
    }
    let (base, extra) = (factors.len() / n, factors.len() % n);
    let mut idx = 0;
    for (a, &anc) in ancillas.iter().enumerate() {
        let take = base + usize::from(a < extra);
        for &(q, f) in &factors[idx..idx + take] {
            let ph = if idx == 0 && out.is_empty() { p.phase() } else { Phase::PLUS_ONE };
            out.push(check_placement(controlled_factor(f, ph)?, vec![anc, q], noise));
        }
        idx += take;
    }
    Ok(out)
}

fn prep_gates(ancillas: &[usize], enabled: bool, noise: Option<NoiseSpec>) -> Vec<Placement> {
    let mut out = Vec::new();
    if enabled {
        out.push(check_placement(hadamard(), vec![ancillas[0]], noise));
    }
    for w in ancillas.windows(2) {
        out.push(check_placement(cnot(), vec![w[0], w[1]], noise));
    }
    out
}

fn unprep_gates(ancillas: &[usize], enabled: bool, noise: Option<NoiseSpec>) -> Vec<Placement> {
    let mut out: Vec<Placement> = ancillas
        .windows(2)
        .rev()
        .map(|w| check_placement(cnot(), vec![w[0], w[1]], noise))
        .collect();
    if enabled {
        out.push(check_placement(hadamard(), vec![ancillas[0]], noise));
    }
    out
}

/// Instruments `c` with one STS.
pub fn instrument(c: &Circuit, s: &StsDescriptor, mode: CheckMode) -> Result<Circuit> {
    Ok(instrument_all(c, &[(s.clone(), mode)], &InstrumentOptions::default())?.circuit)
}

/// Instruments `c` with several STSs, each on its own ancillas.
pub fn instrument_all(c: &Circuit, list: &[(StsDescriptor, CheckMode)], opts: &InstrumentOptions) -> Result<Instrumented> {
    let stss: Vec<StsDescriptor> = list.iter().map(|(s, _)| s.clone()).collect();
    for (s, mode) in list {
        s.check_against(c)?;
        if s.is_trivial() {
            return Err(Error::InvalidDescriptor("descriptor has no components".into()));
        }
        if let CheckMode::Cat(n) = mode {
            if *n == 0 || *n > s.max_weight().max(1) {
                return Err(Error::TooManyAncillas {
                    ancillas: *n,
                    factors: s.max_weight(),
                });
            }
        }
    }
    if let Some(en) = &opts.enabled {
        if en.len() != list.len() {
            return Err(Error::InvalidDescriptor("enable flags do not match the STS list".into()));
        }
    }
    let events = schedule(&stss, c.len());

    // ancilla slots, reused after mid-circuit checks
    let mut slots: Vec<Vec<usize>> = vec![Vec::new(); list.len()];
    let mut free: Vec<usize> = Vec::new();
    let mut next = 0usize;
    for evs in &events {
        for e in evs {
            if matches!(e.role, Role::Open | Role::Single) {
                let k = list[e.sts].1.ancillas();
                for _ in 0..k {
                    let slot = if opts.mid_circuit && !free.is_empty() {
                        free.remove(0)
                    } else {
                        next += 1;
                        next - 1
                    };
                    slots[e.sts].push(slot);
                }
            }
            if opts.mid_circuit && matches!(e.role, Role::Close | Role::Single) {
                free.extend(slots[e.sts].iter().copied());
                free.sort_unstable();
            }
        }
    }

    let mut out = c.clone();
    let base = out.add_ancillas(next);
    let ancillas: Vec<Vec<usize>> = slots
        .iter()
        .map(|ss| ss.iter().map(|s| base + s).collect())
        .collect();
    let mut fresh = Circuit::new(out.num_data_qubits(), out.num_ancillas());
    for (q, st) in out.initial_states().iter().enumerate() {
        fresh.set_initial(q, st.clone())?;
    }
    let noise = opts.check_noise;
    let emit_gap = |fresh: &mut Circuit, evs: &[Event]| -> Result<()> {
        for e in evs {
            let anc = &ancillas[e.sts];
            let enabled = opts.enabled.as_ref().map_or(true, |v| v[e.sts]);
            let comp = &stss[e.sts].components[e.comp];
            let mut gates = Vec::new();
            if matches!(e.role, Role::Open | Role::Single) {
                gates.extend(prep_gates(anc, enabled, noise));
            }
            gates.extend(component_gates(&comp.pauli, anc, noise)?);
            let closing = matches!(e.role, Role::Close | Role::Single);
            if closing {
                gates.extend(unprep_gates(anc, enabled, noise));
            }
            for g in gates {
                fresh.push_moment(vec![g])?;
            }
            if closing {
                if opts.mid_circuit {
                    fresh.push_moment_with_checks(Vec::new(), anc.clone())?;
                } else {
                    for &a in anc {
                        fresh.set_postselect(a, 0)?;
                    }
                }
            }
        }
        Ok(())
    };
    for (t, m) in c.moments().iter().enumerate() {
        emit_gap(&mut fresh, &events[t])?;
        fresh.push_moment_with_checks(m.placements.clone(), m.checks.clone())?;
    }
    emit_gap(&mut fresh, &events[c.len()])?;
    for (&q, &o) in c.postselection() {
        fresh.set_postselect(q, o)?;
    }
    Ok(Instrumented {
        circuit: fresh,
        ancillas,
    })
}

fn moment_unitaries(c: &Circuit) -> Result<Vec<ComplexMatrix>> {
    let n = c.num_qubits();
    if n > ORACLE_MAX_QUBITS {
        return Err(Error::TooManyQubits {
            requested: n,
            max: ORACLE_MAX_QUBITS,
        });
    }
    if c.has_checks() {
        return Err(Error::InvalidCircuit("circuit with checks has no unitary".into()));
    }
    let mut out = Vec::new();
    for m in c.moments() {
        let mut u = ComplexMatrix::identity(1 << n);
        for p in &m.placements {
            let pos: Vec<usize> = p.qubits.iter().map(|&q| n - 1 - q).collect();
            u = &embed_operator(&p.gate.matrix, &pos, n) * &u;
        }
        out.push(u);
    }
    Ok(out)
}

/// The scalar λ with S_N C_N ⋯ C_1 S_0 = λ C, if such a λ exists.
pub fn circuit_sts_phase(c: &Circuit, s: &StsDescriptor) -> Result<Option<C64>> {
    s.check_against(c)?;
    let n = c.num_qubits();
    let moments = moment_unitaries(c)?;
    let mut ideal = ComplexMatrix::identity(1 << n);
    let mut with_s = ComplexMatrix::identity(1 << n);
    for t in 0..=moments.len() {
        if let Some(p) = s.at(t) {
            with_s = &p.to_matrix(n)? * &with_s;
        }
        if let Some(u) = moments.get(t) {
            ideal = u * &ideal;
            with_s = u * &with_s;
        }
    }
    // λ from the largest entry of the ideal unitary
    let (mut best, mut idx) = (0.0, 0);
    for (i, z) in ideal.data().iter().enumerate() {
        if z.norm() > best {
            best = z.norm();
            idx = i;
        }
    }
    let lambda = with_s.data()[idx] / ideal.data()[idx];
    if (lambda.norm() - 1.0).abs() > STS_TOL {
        return Ok(None);
    }
    let dev = with_s.max_abs_diff(&ideal.scale(lambda));
    Ok((dev <= STS_TOL).then_some(lambda))
}

/// True when inserting the components reproduces the circuit unitary up
/// to a global phase.
pub fn is_circuit_sts(c: &Circuit, s: &StsDescriptor) -> Result<bool> {
    Ok(circuit_sts_phase(c, s)?.is_some())
}

/// Pairwise disjoint action scopes.
pub fn suff_disjoint(list: &[StsDescriptor]) -> bool {
    let scopes: Vec<Option<ActionScope>> = list.iter().map(StsDescriptor::scope).collect();
    for i in 0..scopes.len() {
        for j in i + 1..scopes.len() {
            if let (Some(a), Some(b)) = (&scopes[i], &scopes[j]) {
                if !a.is_disjoint(b) {
                    return false;
                }
            }
        }
    }
    true
}

/// Whether `p` commutes with every gate of moment `m` that it overlaps.
fn commutes_with_moment(c: &Circuit, m: usize, p: &PauliString) -> bool {
    c.moments()[m].placements.iter().all(|pl| {
        if !pl.qubits.iter().any(|q| p.factors().contains_key(q)) {
            return true;
        }
        let local = p.clone().with_phase(Phase::PLUS_ONE).matrix_on(&pl.qubits);
        let g = &pl.gate.matrix;
        (&(g * &local) - &(&local * g)).max_abs() < STS_TOL
    })
}

/// Gaps a component can be moved to: across moments it commutes with,
/// not past its own neighbours, and commuting with every component of the
/// other descriptors on the way (both endpoints included).
fn reachable(c: &Circuit, list: &[StsDescriptor], j: usize, k: usize) -> (usize, usize) {
    let s = &list[j];
    let comp = &s.components[k];
    let lo_bound = if k > 0 { s.components[k - 1].time } else { 0 };
    let hi_bound = s.components.get(k + 1).map_or(c.len(), |n| n.time);
    let clear = |t: usize| {
        list.iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .all(|(_, o)| o.at(t).map_or(true, |q| q.commutes_with(&comp.pauli)))
    };
    if !clear(comp.time) {
        return (comp.time, comp.time);
    }
    let mut lo = comp.time;
    while lo > lo_bound && commutes_with_moment(c, lo - 1, &comp.pauli) && clear(lo - 1) {
        lo -= 1;
    }
    let mut hi = comp.time;
    while hi < hi_bound && commutes_with_moment(c, hi, &comp.pauli) && clear(hi + 1) {
        hi += 1;
    }
    (lo, hi)
}

/// Sufficient condition via legal time shifts: for every pair, the other
/// descriptor can be shifted clear of this one's action scope.
pub fn suff_timeshift(c: &Circuit, list: &[StsDescriptor]) -> Result<bool> {
    for s in list {
        s.check_against(c)?;
    }
    for (i, si) in list.iter().enumerate() {
        let Some(a) = si.scope() else { continue };
        for (j, sj) in list.iter().enumerate() {
            if i == j {
                continue;
            }
            let Some(b) = sj.scope() else { continue };
            if a.is_disjoint(&b) {
                continue;
            }
            let ranges: Vec<(usize, usize)> = (0..sj.components.len()).map(|k| reachable(c, list, j, k)).collect();
            let before = ranges.iter().all(|&(lo, _)| lo <= a.t_min);
            let after = ranges.iter().all(|&(_, hi)| hi >= a.t_max);
            if !(before || after) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Definition-based check: every enable pattern of the checks leaves the
/// post-selected data state of the noiseless circuit unchanged.
pub fn simultaneous_observable(c: &Circuit, list: &[StsDescriptor]) -> Result<bool> {
    if list.len() > 4 {
        return Err(Error::TooManyQubits {
            requested: list.len(),
            max: 4,
        });
    }
    let total = c.num_qubits() + list.len();
    if total > ORACLE_MAX_QUBITS + 4 {
        return Err(Error::TooManyQubits {
            requested: total,
            max: ORACLE_MAX_QUBITS + 4,
        });
    }
    let modes: Vec<(StsDescriptor, CheckMode)> = list.iter().map(|s| (s.clone(), CheckMode::SingleAncilla)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let inputs: Vec<DensityMatrix> = (0..3)
        .map(|_| crate::random::random_density(&mut rng, c.num_data_qubits()))
        .collect();
    let noiseless = NoiseSpec::noiseless();
    let mut reference = Vec::new();
    for rho in &inputs {
        reference.push(c.run_with_input(rho, &noiseless)?.rho_data);
    }
    for mask in 1..(1u32 << list.len()) {
        let enabled: Vec<bool> = (0..list.len()).map(|i| mask >> i & 1 == 1).collect();
        let opts = InstrumentOptions {
            enabled: Some(enabled),
            ..Default::default()
        };
        let inst = instrument_all(c, &modes, &opts)?;
        for (rho, refr) in inputs.iter().zip(&reference) {
            let r = match inst.circuit.run_with_input(rho, &noiseless) {
                Ok(r) => r,
                Err(Error::PostSelectionImpossible { .. }) => return Ok(false),
                Err(e) => return Err(e),
            };
            if (r.p_pass - 1.0).abs() > STS_TOL || r.rho_data.matrix().max_abs_diff(refr.matrix()) > STS_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Pointwise product of descriptors with pairwise disjoint action scopes.
/// At a shared gap the component of the descriptor that closes there acts
/// first.
pub fn combine(list: &[StsDescriptor]) -> Result<StsDescriptor> {
    if !suff_disjoint(list) {
        return Err(Error::NotSimultaneouslyObservable);
    }
    Ok(combine_unchecked(list))
}

/// Like [`combine`] but also accepts descriptors shown simultaneously
/// observable by time shifts or, at small scale, by definition.
pub fn combine_checked(c: &Circuit, list: &[StsDescriptor]) -> Result<StsDescriptor> {
    let ok = suff_disjoint(list)
        || suff_timeshift(c, list)?
        || (c.num_qubits() + list.len() <= ORACLE_MAX_QUBITS + 4
            && list.len() <= 4
            && simultaneous_observable(c, list)?);
    if !ok {
        return Err(Error::NotSimultaneouslyObservable);
    }
    Ok(combine_unchecked(list))
}

fn combine_unchecked(list: &[StsDescriptor]) -> StsDescriptor {
    let gaps = list.iter().filter_map(StsDescriptor::t_max).max().unwrap_or(0);
    let events = schedule(list, gaps);
    let mut comps = Vec::new();
    for (t, evs) in events.iter().enumerate() {
        for e in evs {
            comps.push((list[e.sts].components[e.comp].pauli.clone(), t));
        }
    }
    StsDescriptor::new(comps)
}

/// Conjugates `p` backwards through moment `m`: returns P' with P·M = M·P'.
fn pull_back(c: &Circuit, m: usize, p: &PauliString) -> Result<PauliString> {
    let mut cur = p.clone();
    for pl in &c.moments()[m].placements {
        if !pl.qubits.iter().any(|q| cur.factors().contains_key(q)) {
            continue;
        }
        let local = cur.clone().with_phase(Phase::PLUS_ONE).matrix_on(&pl.qubits);
        let g = &pl.gate.matrix;
        let conj = &(&g.dagger() * &local) * g;
        let moved = PauliString::from_local_matrix(&conj, &pl.qubits, STS_TOL).ok_or_else(|| {
            Error::InvalidDescriptor(format!("{} does not map to a Pauli string through `{}`", cur, pl.gate.name))
        })?;
        cur = cur.without(&pl.qubits).mul(&moved);
    }
    Ok(cur)
}

/// Moves the component at `from` back to gap `to` (< `from`), conjugating
/// it through the moments in between, and multiplies it into whatever
/// component already sits there.
pub fn shift_back(c: &Circuit, s: &StsDescriptor, from: usize, to: usize) -> Result<StsDescriptor> {
    let p = s
        .at(from)
        .ok_or_else(|| Error::InvalidDescriptor(format!("no component at time {from}")))?
        .clone();
    if to > from {
        return Err(Error::InvalidDescriptor("shift_back needs to ≤ from".into()));
    }
    if s.components.iter().any(|k| k.time > to && k.time < from) {
        return Err(Error::InvalidDescriptor("shift would cross another component".into()));
    }
    let mut moved = p;
    for m in (to..from).rev() {
        moved = pull_back(c, m, &moved)?;
    }
    let mut comps: Vec<(PauliString, usize)> = s
        .components
        .iter()
        .filter(|k| k.time != from)
        .map(|k| (k.pauli.clone(), k.time))
        .collect();
    // existing component at `to` acts first
    let pos = comps.iter().position(|(_, t)| *t > to).unwrap_or(comps.len());
    comps.insert(pos, (moved, to));
    Ok(StsDescriptor::new(comps))
}
