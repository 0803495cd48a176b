//! OpenQASM 2.0 subset: `u1 u2 u3 cx h x z measure reset`, plus `mcx`
//! (controls then target), `mcx_1anc` (controls, target, ancilla) and
//! `barrier`.

use std::f64::consts::PI;
use std::fmt::Write;

use super::{Circuit, CircuitError, GateKind, Instruction, Result};

fn mnemonic(kind: GateKind) -> &'static str {
    match kind {
        GateKind::U1 => "u1",
        GateKind::U2 => "u2",
        GateKind::U3 => "u3",
        GateKind::Cx => "cx",
        GateKind::Mct => "mcx",
        GateKind::Mcta => "mcx_1anc",
        GateKind::H => "h",
        GateKind::X => "x",
        GateKind::Z => "z",
        GateKind::Measure => "measure",
        GateKind::Reset => "reset",
        GateKind::Barrier => "barrier",
    }
}

pub fn to_qasm(circuit: &Circuit) -> String {
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(s, "qreg q[{}];", circuit.n_qubits);
    if circuit.n_clbits > 0 {
        let _ = writeln!(s, "creg c[{}];", circuit.n_clbits);
    }
    for inst in &circuit.instructions {
        s.push_str(mnemonic(inst.kind));
        if !inst.params.is_empty() {
            let params: Vec<String> = inst.params.iter().map(|p| format!("{p:.6}")).collect();
            let _ = write!(s, "({})", params.join(","));
        }
        let qubits: Vec<String> = inst.qubits.iter().map(|q| format!("q[{q}]")).collect();
        let _ = write!(s, " {}", qubits.join(","));
        if let Some(c) = inst.clbit {
            let _ = write!(s, " -> c[{c}]");
        }
        s.push_str(";\n");
    }
    s
}

fn parse_angle(text: &str) -> Option<f64> {
    let t = text.trim().replace(' ', "");
    if let Ok(v) = t.parse::<f64>() {
        return Some(v);
    }
    // Forms: [-][k*]pi[/d]
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.as_str()),
    };
    let (num, den) = match body.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().ok()?),
        None => (body, 1.0),
    };
    let coef = match num.strip_suffix("pi")? {
        "" => 1.0,
        k => k.strip_suffix('*')?.parse::<f64>().ok()?,
    };
    let v = coef * PI / den;
    Some(if neg { -v } else { v })
}

fn parse_index(text: &str, reg: &str) -> Option<usize> {
    text.trim().strip_prefix(reg)?.strip_prefix('[')?.strip_suffix(']')?.parse().ok()
}

pub fn from_qasm(text: &str) -> Result<Circuit> {
    let mut circuit = Circuit::new(0, 0);
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let err = |message: &str| CircuitError::Parse {
            line: line_no,
            message: message.to_string(),
        };
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let stmt = line.strip_suffix(';').ok_or_else(|| err("missing ';'"))?.trim();
        if stmt.starts_with("OPENQASM") || stmt.starts_with("include") {
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("qreg") {
            circuit.n_qubits = parse_index(rest, "q").ok_or_else(|| err("bad qreg"))?;
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("creg") {
            circuit.n_clbits = parse_index(rest, "c").ok_or_else(|| err("bad creg"))?;
            continue;
        }
        let (head, operands) = match stmt.find(|c: char| c.is_whitespace()) {
            Some(i) if !stmt[..i].contains('(') || stmt[..i].contains(')') => stmt.split_at(i),
            _ => {
                let close = stmt.find(')').ok_or_else(|| err("unbalanced parameters"))?;
                stmt.split_at(close + 1)
            }
        };
        let (name, params) = match head.split_once('(') {
            Some((n, p)) => {
                let p = p.strip_suffix(')').ok_or_else(|| err("unbalanced parameters"))?;
                let params = p
                    .split(',')
                    .map(|a| parse_angle(a).ok_or_else(|| err(&format!("bad angle '{a}'"))))
                    .collect::<Result<Vec<_>>>()?;
                (n.trim(), params)
            }
            None => (head.trim(), Vec::new()),
        };
        let kind = match name {
            "u1" => GateKind::U1,
            "u2" => GateKind::U2,
            "u3" => GateKind::U3,
            "cx" => GateKind::Cx,
            "mcx" => GateKind::Mct,
            "mcx_1anc" => GateKind::Mcta,
            "h" => GateKind::H,
            "x" => GateKind::X,
            "z" => GateKind::Z,
            "measure" => GateKind::Measure,
            "reset" => GateKind::Reset,
            "barrier" => GateKind::Barrier,
            other => return Err(err(&format!("unsupported instruction '{other}'"))),
        };
        let (qpart, cpart) = match operands.split_once("->") {
            Some((q, c)) => (q, Some(c)),
            None => (operands, None),
        };
        let qubits = qpart
            .split(',')
            .map(|q| parse_index(q, "q").ok_or_else(|| err(&format!("bad qubit '{}'", q.trim()))))
            .collect::<Result<Vec<_>>>()?;
        let mut inst = Instruction::new(kind, &qubits, &params);
        if let Some(c) = cpart {
            inst.clbit = Some(parse_index(c, "c").ok_or_else(|| err("bad classical bit"))?);
        }
        circuit.push(inst).map_err(|e| err(&e.to_string()))?;
    }
    circuit.validate()?;
    Ok(circuit)
}
