//! Line-oriented text form of a circuit.
//!
//! ```text
//! data 2
//! ancillas 1
//! init q2=+
//! postselect q2=0
//! t=0; h q0; rx(0.5) q1 noise=bit_flip,0.001
//! t=1; c-x q2,q0
//! t=2; check q2
//! ```
//!
//! Qubits are numbered with data first. `noise=<kind>,<rate>` overrides
//! the run's noise model for one gate; `#` starts a comment.

use std::fmt::Write as _;

use crate::circuit::{Circuit, InitialState, Placement};
use crate::error::{Error, Result};
use crate::gates::gate_library;
use crate::noise::{ChannelKind, NoiseSpec};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn qubit(line: usize, tok: &str) -> Result<usize> {
    tok.trim()
        .strip_prefix('q')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| perr(line, format!("bad qubit `{tok}`")))
}

fn assignment<'a>(line: usize, tok: &'a str) -> Result<(usize, &'a str)> {
    let (q, v) = tok
        .split_once('=')
        .ok_or_else(|| perr(line, format!("expected `q<i>=<value>`, got `{tok}`")))?;
    Ok((qubit(line, q)?, v.trim()))
}

fn parse_gate_item(line: usize, item: &str) -> Result<Placement> {
    let mut toks = item.split_whitespace();
    let head = toks.next().ok_or_else(|| perr(line, "empty gate"))?;
    let (name, params) = match head.split_once('(') {
        Some((n, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| perr(line, format!("unclosed parameter list in `{head}`")))?;
            let ps = inner
                .split(',')
                .map(|p| p.trim().parse::<f64>().map_err(|_| perr(line, format!("bad parameter `{p}`"))))
                .collect::<Result<Vec<_>>>()?;
            (n, ps)
        }
        None => (head, Vec::new()),
    };
    let gate = gate_library(name, &params).map_err(|e| perr(line, e.to_string()))?;
    let qubits = toks
        .next()
        .ok_or_else(|| perr(line, format!("gate `{name}` has no qubits")))?
        .split(',')
        .map(|q| qubit(line, q))
        .collect::<Result<Vec<_>>>()?;
    let mut p = Placement::new(gate, qubits);
    for extra in toks {
        let spec = extra
            .strip_prefix("noise=")
            .ok_or_else(|| perr(line, format!("unexpected `{extra}`")))?;
        let (kind, rate) = spec
            .split_once(',')
            .ok_or_else(|| perr(line, "noise needs `<kind>,<rate>`"))?;
        let kind: ChannelKind = kind.parse().map_err(|e: Error| perr(line, e.to_string()))?;
        let rate: f64 = rate.parse().map_err(|_| perr(line, format!("bad rate `{rate}`")))?;
        let spec = NoiseSpec::new(kind, rate, rate).map_err(|e| perr(line, e.to_string()))?;
        p = p.with_noise(spec);
    }
    Ok(p)
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut data = None;
    let mut ancillas = 0;
    let mut circuit: Option<Circuit> = None;
    let mut init: Vec<(usize, InitialState)> = Vec::new();
    let mut post = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("t=") {
            let c = match &mut circuit {
                Some(c) => c,
                None => {
                    let n = data.ok_or_else(|| perr(ln, "moment before `data` header"))?;
                    let mut c = Circuit::new(n, ancillas);
                    for (q, st) in &init {
                        c.set_initial(*q, st.clone()).map_err(|e| perr(ln, e.to_string()))?;
                    }
                    circuit.insert(c)
                }
            };
            let mut items = rest.split(';');
            let t: usize = items
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| perr(ln, "bad time index"))?;
            let mut placements = Vec::new();
            let mut checks = Vec::new();
            for item in items.map(str::trim).filter(|s| !s.is_empty()) {
                if let Some(qs) = item.strip_prefix("check ") {
                    for q in qs.split(',') {
                        checks.push(qubit(ln, q)?);
                    }
                } else {
                    placements.push(parse_gate_item(ln, item)?);
                }
            }
            c.push_moment_at(t, placements, checks).map_err(|e| perr(ln, e.to_string()))?;
            continue;
        }
        if circuit.is_some() {
            return Err(perr(ln, "header after the first moment"));
        }
        let (key, val) = line.split_once(char::is_whitespace).ok_or_else(|| perr(ln, format!("bad line `{line}`")))?;
        let val = val.trim();
        match key {
            "data" => data = Some(val.parse().map_err(|_| perr(ln, format!("bad count `{val}`")))?),
            "ancillas" => ancillas = val.parse().map_err(|_| perr(ln, format!("bad count `{val}`")))?,
            "init" => {
                for tok in val.split_whitespace() {
                    let (q, v) = assignment(ln, tok)?;
                    let st = match v {
                        "0" => InitialState::Zero,
                        "1" => InitialState::One,
                        "+" => InitialState::Plus,
                        "-" => InitialState::Minus,
                        _ => return Err(perr(ln, format!("unknown initial state `{v}`"))),
                    };
                    init.push((q, st));
                }
            }
            "postselect" => {
                for tok in val.split_whitespace() {
                    let (q, v) = assignment(ln, tok)?;
                    let o: u8 = v.parse().map_err(|_| perr(ln, format!("bad outcome `{v}`")))?;
                    post.push((q, o));
                }
            }
            _ => return Err(perr(ln, format!("unknown header `{key}`"))),
        }
    }
    let mut c = match circuit {
        Some(c) => c,
        None => {
            let n = data.ok_or_else(|| perr(0, "missing `data` header"))?;
            let mut c = Circuit::new(n, ancillas);
            for (q, st) in &init {
                c.set_initial(*q, st.clone()).map_err(|e| perr(0, e.to_string()))?;
            }
            c
        }
    };
    for (q, o) in post {
        c.set_postselect(q, o).map_err(|e| perr(0, e.to_string()))?;
    }
    Ok(c)
}

/// Text form of `c`. Fails on gates or initial states the parser could
/// not rebuild.
pub fn dump_circuit(c: &Circuit) -> Result<String> {
    let mut s = String::new();
    writeln!(s, "data {}", c.num_data_qubits()).unwrap();
    if c.num_ancillas() > 0 {
        writeln!(s, "ancillas {}", c.num_ancillas()).unwrap();
    }
    let mut inits = Vec::new();
    for (q, st) in c.initial_states().iter().enumerate() {
        let v = match st {
            InitialState::Zero => continue,
            InitialState::One => "1",
            InitialState::Plus => "+",
            InitialState::Minus => "-",
            InitialState::Custom(_) => {
                return Err(Error::InvalidCircuit(format!("custom initial state on q{q} has no text form")))
            }
        };
        inits.push(format!("q{q}={v}"));
    }
    if !inits.is_empty() {
        writeln!(s, "init {}", inits.join(" ")).unwrap();
    }
    if !c.postselection().is_empty() {
        let ps: Vec<String> = c.postselection().iter().map(|(q, o)| format!("q{q}={o}")).collect();
        writeln!(s, "postselect {}", ps.join(" ")).unwrap();
    }
    for m in c.moments() {
        let mut items = vec![format!("t={}", m.time_index)];
        for p in &m.placements {
            let rebuilt = gate_library(&p.gate.name, &p.gate.params)?;
            if rebuilt.matrix.max_abs_diff(&p.gate.matrix) > 1e-12 {
                return Err(Error::UnknownGate(p.gate.label()));
            }
            let qs: Vec<String> = p.qubits.iter().map(|q| format!("q{q}")).collect();
            let mut item = format!("{} {}", p.gate.label(), qs.join(","));
            if let Some(n) = &p.noise {
                let rate = if p.gate.arity == 1 { n.eps1 } else { n.eps2 };
                write!(item, " noise={},{}", n.kind.name(), rate).unwrap();
            }
            items.push(item);
        }
        if !m.checks.is_empty() {
            let qs: Vec<String> = m.checks.iter().map(|q| format!("q{q}")).collect();
            items.push(format!("check {}", qs.join(",")));
        }
        writeln!(s, "{}", items.join("; ")).unwrap();
    }
    Ok(s)
}
