//! Gate-level circuit computing the spring-balance function: an AND layer
//! feeding a half-adder/full-adder tree that emits the Hamming weight on a
//! binary output bus.
//!
//! Wire layout is fixed: wires `0..n` are the query inputs x_1..x_n, wires
//! `n..2n` the secret inputs s_1..s_n, and every gate output gets the next
//! free id. Gates are stored in topological order by construction.

use serde::{Deserialize, Serialize};

use crate::bits::{QueryString, SecretString};
use crate::{Error, Result};

pub type WireId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    And,
    HalfAdder,
    FullAdder,
}

/// One gate instance. Adders list outputs as `[sum, carry]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub id: usize,
    pub kind: GateKind,
    #[serde(rename = "in")]
    pub inputs: Vec<WireId>,
    #[serde(rename = "out")]
    pub outputs: Vec<WireId>,
}

/// The full circuit for a given input width.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Netlist {
    pub n: usize,
    pub gates: Vec<Gate>,
    /// Output bus wires, least-significant first.
    pub output_bus: Vec<WireId>,
}

/// Gate tallies by kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCount {
    pub and_gates: usize,
    pub full_adders: usize,
    pub half_adders: usize,
}

/// Output bus width for an `n`-input circuit: floor(log2 n) + 1.
pub fn output_width(n: usize) -> usize {
    (usize::BITS - n.leading_zeros()) as usize
}

struct Builder {
    next_wire: WireId,
    gates: Vec<Gate>,
}

impl Builder {
    fn fresh(&mut self) -> WireId {
        let w = self.next_wire;
        self.next_wire += 1;
        w
    }

    fn and(&mut self, a: WireId, b: WireId) -> WireId {
        let out = self.fresh();
        self.gates.push(Gate {
            id: self.gates.len(),
            kind: GateKind::And,
            inputs: vec![a, b],
            outputs: vec![out],
        });
        out
    }

    fn half_adder(&mut self, a: WireId, b: WireId) -> (WireId, WireId) {
        let sum = self.fresh();
        let carry = self.fresh();
        self.gates.push(Gate {
            id: self.gates.len(),
            kind: GateKind::HalfAdder,
            inputs: vec![a, b],
            outputs: vec![sum, carry],
        });
        (sum, carry)
    }

    fn full_adder(&mut self, a: WireId, b: WireId, c: WireId) -> (WireId, WireId) {
        let sum = self.fresh();
        let carry = self.fresh();
        self.gates.push(Gate {
            id: self.gates.len(),
            kind: GateKind::FullAdder,
            inputs: vec![a, b, c],
            outputs: vec![sum, carry],
        });
        (sum, carry)
    }
}

/// Builds the circuit: n AND gates, then a 3:2 compressor tree.
///
/// Each bit-weight column is reduced greedily with full adders on triples;
/// a half adder resolves a leftover pair, and carries ripple into the next
/// column until one wire per weight remains.
pub fn build_bsb_circuit(n: usize) -> Result<Netlist> {
    if n == 0 {
        return Err(Error::Domain("circuit width must be at least 1".into()));
    }
    let mut b = Builder { next_wire: 2 * n, gates: Vec::new() };

    // AND layer: x_i * s_i. x_i is wire i-1, s_i is wire n+i-1.
    let mut columns: Vec<Vec<WireId>> = vec![Vec::new()];
    for i in 0..n {
        let out = b.and(i, n + i);
        columns[0].push(out);
    }

    let width = output_width(n);
    let mut output_bus = Vec::with_capacity(width);
    let mut w = 0;
    while w < columns.len() {
        while columns[w].len() >= 3 {
            let c = columns[w].pop().unwrap();
            let b2 = columns[w].pop().unwrap();
            let a = columns[w].pop().unwrap();
            let (sum, carry) = b.full_adder(a, b2, c);
            columns[w].push(sum);
            if columns.len() == w + 1 {
                columns.push(Vec::new());
            }
            columns[w + 1].push(carry);
        }
        if columns[w].len() == 2 {
            let b2 = columns[w].pop().unwrap();
            let a = columns[w].pop().unwrap();
            let (sum, carry) = b.half_adder(a, b2);
            columns[w].push(sum);
            if columns.len() == w + 1 {
                columns.push(Vec::new());
            }
            columns[w + 1].push(carry);
        }
        if let Some(&wire) = columns[w].first() {
            output_bus.push(wire);
        }
        w += 1;
    }
    debug_assert_eq!(output_bus.len(), width);

    Ok(Netlist { n, gates: b.gates, output_bus })
}

impl Netlist {
    /// Checks single-driver wires, driven-before-use ordering (which implies
    /// acyclicity for the stored gate order), and bus validity.
    pub fn validate(&self) -> Result<()> {
        let mut driven = vec![false; 2 * self.n];
        driven.iter_mut().for_each(|d| *d = true); // inputs drive themselves
        for gate in &self.gates {
            let arity = match gate.kind {
                GateKind::And | GateKind::HalfAdder => 2,
                GateKind::FullAdder => 3,
            };
            let outs = match gate.kind {
                GateKind::And => 1,
                GateKind::HalfAdder | GateKind::FullAdder => 2,
            };
            if gate.inputs.len() != arity || gate.outputs.len() != outs {
                return Err(Error::InvalidNetlist(format!(
                    "gate {} has wrong arity",
                    gate.id
                )));
            }
            for &i in &gate.inputs {
                if i >= driven.len() || !driven[i] {
                    return Err(Error::InvalidNetlist(format!(
                        "gate {} reads undriven wire {i}",
                        gate.id
                    )));
                }
            }
            for &o in &gate.outputs {
                if o < driven.len() && driven[o] {
                    return Err(Error::InvalidNetlist(format!(
                        "wire {o} has more than one driver"
                    )));
                }
                if o >= driven.len() {
                    driven.resize(o + 1, false);
                }
                driven[o] = true;
            }
        }
        if self.output_bus.len() != output_width(self.n) {
            return Err(Error::InvalidNetlist(format!(
                "output bus width {} != {}",
                self.output_bus.len(),
                output_width(self.n)
            )));
        }
        for &wire in &self.output_bus {
            if wire >= driven.len() || !driven[wire] {
                return Err(Error::InvalidNetlist(format!("bus wire {wire} undriven")));
            }
        }
        Ok(())
    }

    pub fn component_counts(&self) -> ComponentCount {
        let mut counts = ComponentCount { and_gates: 0, full_adders: 0, half_adders: 0 };
        for gate in &self.gates {
            match gate.kind {
                GateKind::And => counts.and_gates += 1,
                GateKind::FullAdder => counts.full_adders += 1,
                GateKind::HalfAdder => counts.half_adders += 1,
            }
        }
        counts
    }

    /// Evaluates the circuit on one input binding and decodes the bus.
    pub fn simulate(&self, s: &SecretString, x: &QueryString) -> Result<u32> {
        if s.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: s.len() });
        }
        if x.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: x.len() });
        }
        let wire_count = self
            .gates
            .iter()
            .flat_map(|g| g.outputs.iter())
            .copied()
            .max()
            .map_or(2 * self.n, |m| m + 1);
        let mut values = vec![false; wire_count];
        for i in 0..self.n {
            values[i] = x.bits()[i];
            values[self.n + i] = s.bits()[i];
        }
        for gate in &self.gates {
            match gate.kind {
                GateKind::And => {
                    values[gate.outputs[0]] =
                        values[gate.inputs[0]] && values[gate.inputs[1]];
                }
                GateKind::HalfAdder => {
                    let (a, b) = (values[gate.inputs[0]], values[gate.inputs[1]]);
                    values[gate.outputs[0]] = a ^ b;
                    values[gate.outputs[1]] = a && b;
                }
                GateKind::FullAdder => {
                    let (a, b, c) = (
                        values[gate.inputs[0]],
                        values[gate.inputs[1]],
                        values[gate.inputs[2]],
                    );
                    values[gate.outputs[0]] = a ^ b ^ c;
                    values[gate.outputs[1]] = (a && b) || (a && c) || (b && c);
                }
            }
        }
        let mut total = 0u32;
        for (bit, &wire) in self.output_bus.iter().enumerate() {
            if values[wire] {
                total += 1 << bit;
            }
        }
        Ok(total)
    }
}

/// Deterministic JSON encoding of a netlist.
pub fn export_netlist(net: &Netlist) -> String {
    serde_json::to_string_pretty(net).expect("netlist serialization cannot fail")
}

/// Parses and validates a netlist produced by [`export_netlist`].
pub fn import_netlist(text: &str) -> Result<Netlist> {
    let net: Netlist = serde_json::from_str(text)
        .map_err(|e| Error::InvalidNetlist(e.to_string()))?;
    net.validate()?;
    Ok(net)
}
