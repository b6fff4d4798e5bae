//! Gate-level intermediate representation.
//!
//! A [`Circuit`] is a list of gates in topological order: every gate only
//! refers to gates with a smaller id. MOD gates carry an explicit shift and
//! per-wire multiplicities; the plain counting gate is the `shift = 0`,
//! multiplicity-one special case (see [`lower::to_literal_model`]).

mod eval;
pub mod lower;
mod metrics;
pub mod netlist;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

pub use eval::WordEvaluator;
pub use metrics::{layer_label, Metrics};

use crate::error::{Error, Result};

pub type GateId = usize;

/// A modular counting gate: outputs 1 iff `shift + Σ mult·input ≡ 0 (mod modulus)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModGate {
    pub modulus: u64,
    pub shift: u64,
    pub inputs: Vec<(GateId, u64)>,
}

impl ModGate {
    pub fn new(modulus: u64, shift: u64, inputs: Vec<(GateId, u64)>) -> Self {
        ModGate {
            modulus,
            shift,
            inputs,
        }
    }

    /// Canonical form: shift and multiplicities reduced, repeated wires
    /// merged, zero-multiplicity wires dropped, wires sorted by id.
    pub fn normalized(&self) -> ModGate {
        let m = self.modulus;
        let mut merged: BTreeMap<GateId, u64> = BTreeMap::new();
        for &(id, mult) in &self.inputs {
            let e = merged.entry(id).or_insert(0);
            *e = (*e + mult % m) % m;
        }
        ModGate {
            modulus: m,
            shift: self.shift % m,
            inputs: merged.into_iter().filter(|&(_, c)| c != 0).collect(),
        }
    }

    /// Value of the linear form `shift + Σ mult·value` reduced modulo the modulus.
    pub fn sum_with(&self, value: impl Fn(GateId) -> bool) -> u64 {
        let m = self.modulus;
        let mut acc = self.shift % m;
        for &(id, mult) in &self.inputs {
            if value(id) {
                acc = (acc + mult % m) % m;
            }
        }
        acc
    }

    pub fn fanin(&self) -> usize {
        self.inputs.len()
    }

    /// Sum of multiplicities.
    pub fn wires(&self) -> u64 {
        self.inputs.iter().map(|&(_, c)| c).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Input(usize),
    Const(bool),
    Not(GateId),
    And(Vec<GateId>),
    Or(Vec<GateId>),
    /// Symmetric gate: value is `companion[number of true inputs]`.
    Sym {
        companion: Vec<bool>,
        inputs: Vec<GateId>,
    },
    Mod(ModGate),
}

impl Gate {
    /// Ids this gate reads, in order, with repetition.
    pub fn children(&self) -> Vec<GateId> {
        match self {
            Gate::Input(_) | Gate::Const(_) => Vec::new(),
            Gate::Not(c) => vec![*c],
            Gate::And(v) | Gate::Or(v) => v.clone(),
            Gate::Sym { inputs, .. } => inputs.clone(),
            Gate::Mod(g) => g.inputs.iter().map(|&(id, _)| id).collect(),
        }
    }

    pub fn for_each_child(&self, mut f: impl FnMut(GateId)) {
        match self {
            Gate::Input(_) | Gate::Const(_) => {}
            Gate::Not(c) => f(*c),
            Gate::And(v) | Gate::Or(v) => v.iter().copied().for_each(f),
            Gate::Sym { inputs, .. } => inputs.iter().copied().for_each(f),
            Gate::Mod(g) => g.inputs.iter().for_each(|&(id, _)| f(id)),
        }
    }

    /// Rewrites every child reference through `map`.
    pub fn remap(&self, map: impl Fn(GateId) -> GateId) -> Gate {
        match self {
            Gate::Input(i) => Gate::Input(*i),
            Gate::Const(b) => Gate::Const(*b),
            Gate::Not(c) => Gate::Not(map(*c)),
            Gate::And(v) => Gate::And(v.iter().map(|&c| map(c)).collect()),
            Gate::Or(v) => Gate::Or(v.iter().map(|&c| map(c)).collect()),
            Gate::Sym { companion, inputs } => Gate::Sym {
                companion: companion.clone(),
                inputs: inputs.iter().map(|&c| map(c)).collect(),
            },
            Gate::Mod(g) => Gate::Mod(ModGate {
                modulus: g.modulus,
                shift: g.shift,
                inputs: g.inputs.iter().map(|&(c, m)| (map(c), m)).collect(),
            }),
        }
    }

    /// Whether the gate occupies a layer for depth purposes.
    pub fn is_layered(&self) -> bool {
        matches!(
            self,
            Gate::And(_) | Gate::Or(_) | Gate::Sym { .. } | Gate::Mod(_)
        )
    }

    pub fn as_mod(&self) -> Option<&ModGate> {
        match self {
            Gate::Mod(g) => Some(g),
            _ => None,
        }
    }
}

/// An immutable, validated circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    output: GateId,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>, output: GateId) -> Result<Self> {
        let c = Circuit { n, gates, output };
        c.validate()?;
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> Result<&Gate> {
        self.gates
            .get(id)
            .ok_or_else(|| Error::Structural(format!("gate {id} does not exist")))
    }

    pub fn output(&self) -> GateId {
        self.output
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (id, gate) in self.gates.iter().enumerate() {
            let mut bad = None;
            gate.for_each_child(|c| {
                if c >= id && bad.is_none() {
                    bad = Some(c);
                }
            });
            if let Some(c) = bad {
                return Err(Error::Structural(format!(
                    "gate {id} refers to gate {c}, which is not earlier"
                )));
            }
            match gate {
                Gate::Input(i) if *i >= self.n => {
                    return Err(Error::Structural(format!(
                        "gate {id}: input index {i} out of range for {} inputs",
                        self.n
                    )));
                }
                Gate::Sym { companion, inputs } if companion.len() != inputs.len() + 1 => {
                    return Err(Error::Structural(format!(
                        "gate {id}: SYM companion has length {}, expected {}",
                        companion.len(),
                        inputs.len() + 1
                    )));
                }
                Gate::Mod(g) => {
                    if g.modulus < 2 {
                        return Err(Error::Structural(format!(
                            "gate {id}: modulus {} < 2",
                            g.modulus
                        )));
                    }
                    if g.shift >= g.modulus {
                        return Err(Error::Structural(format!(
                            "gate {id}: shift {} not below modulus {}",
                            g.shift, g.modulus
                        )));
                    }
                    if let Some(&(c, _)) = g.inputs.iter().find(|&&(_, m)| m == 0) {
                        return Err(Error::Structural(format!(
                            "gate {id}: wire from {c} has multiplicity 0"
                        )));
                    }
                }
                _ => {}
            }
        }
        if self.output >= self.gates.len() {
            return Err(Error::Structural(format!(
                "output {} does not name a gate",
                self.output
            )));
        }
        Ok(())
    }

    /// Removes gates unreachable from the output. INPUT gates are retained.
    pub fn gc(&self) -> Circuit {
        let mut live = vec![false; self.gates.len()];
        live[self.output] = true;
        for id in (0..self.gates.len()).rev() {
            if live[id] {
                self.gates[id].for_each_child(|c| live[c] = true);
            }
            if matches!(self.gates[id], Gate::Input(_)) {
                live[id] = true;
            }
        }
        let mut map = vec![usize::MAX; self.gates.len()];
        let mut gates = Vec::new();
        for (id, gate) in self.gates.iter().enumerate() {
            if live[id] {
                map[id] = gates.len();
                gates.push(gate.remap(|c| map[c]));
            }
        }
        Circuit {
            n: self.n,
            gates,
            output: map[self.output],
        }
    }

    /// Ids of the MOD gates (and their moduli) present in the circuit.
    pub fn moduli(&self) -> Vec<u64> {
        let mut ms: Vec<u64> = self
            .gates
            .iter()
            .filter_map(|g| g.as_mod().map(|m| m.modulus))
            .collect();
        ms.sort_unstable();
        ms.dedup();
        ms
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&netlist::serialize_netlist(self))
    }
}

/// Incremental construction of a circuit. The `n` INPUT gates occupy ids `0..n`.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    n: usize,
    gates: Vec<Gate>,
    consts: [Option<GateId>; 2],
}

impl CircuitBuilder {
    pub fn new(n: usize) -> Self {
        CircuitBuilder {
            n,
            gates: (0..n).map(Gate::Input).collect(),
            consts: [None, None],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn input(&self, i: usize) -> GateId {
        assert!(i < self.n, "input {i} out of range");
        i
    }

    pub fn inputs(&self) -> Vec<GateId> {
        (0..self.n).collect()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id]
    }

    pub fn push(&mut self, gate: Gate) -> GateId {
        let id = self.gates.len();
        debug_assert!(
            {
                let mut ok = true;
                gate.for_each_child(|c| ok &= c < id);
                ok
            },
            "gate refers forward"
        );
        self.gates.push(gate);
        id
    }

    /// The shared constant gate for `value`.
    pub fn constant(&mut self, value: bool) -> GateId {
        let slot = value as usize;
        if let Some(id) = self.consts[slot] {
            return id;
        }
        let id = self.push(Gate::Const(value));
        self.consts[slot] = Some(id);
        id
    }

    pub fn const_value(&self, id: GateId) -> Option<bool> {
        match self.gates[id] {
            Gate::Const(b) => Some(b),
            _ => None,
        }
    }

    /// Adds a MOD gate in canonical form.
    pub fn modulo(&mut self, g: &ModGate) -> GateId {
        self.push(Gate::Mod(g.normalized()))
    }

    pub fn not(&mut self, c: GateId) -> GateId {
        self.push(Gate::Not(c))
    }

    pub fn and(&mut self, inputs: Vec<GateId>) -> GateId {
        self.push(Gate::And(inputs))
    }

    pub fn or(&mut self, inputs: Vec<GateId>) -> GateId {
        self.push(Gate::Or(inputs))
    }

    /// MOD gate with constant wires folded into the shift; an input-free
    /// result becomes a constant.
    pub fn modulo_folded(&mut self, g: &ModGate) -> GateId {
        let mut shift = g.shift;
        let mut inputs = Vec::with_capacity(g.inputs.len());
        for &(id, mult) in &g.inputs {
            match self.const_value(id) {
                Some(true) => shift = (shift + mult) % g.modulus,
                Some(false) => {}
                None => inputs.push((id, mult)),
            }
        }
        let g = ModGate::new(g.modulus, shift, inputs).normalized();
        if g.inputs.is_empty() {
            return self.constant(g.shift == 0);
        }
        self.push(Gate::Mod(g))
    }

    /// AND with constants folded. A single live input still gets its own gate.
    pub fn and_folded(&mut self, inputs: Vec<GateId>) -> GateId {
        let mut live = Vec::with_capacity(inputs.len());
        for id in inputs {
            match self.const_value(id) {
                Some(true) => {}
                Some(false) => return self.constant(false),
                None => live.push(id),
            }
        }
        if live.is_empty() {
            return self.constant(true);
        }
        self.push(Gate::And(live))
    }

    pub fn not_folded(&mut self, c: GateId) -> GateId {
        match self.const_value(c) {
            Some(b) => self.constant(!b),
            None => self.push(Gate::Not(c)),
        }
    }

    /// Builds without validation overhead beyond the final check.
    pub fn finish(self, output: GateId) -> Circuit {
        let c = Circuit {
            n: self.n,
            gates: self.gates,
            output,
        };
        debug_assert!(c.validate().is_ok());
        c
    }
}

/// Per-parent deduplication of freshly emitted MOD gates: structurally equal
/// gates become one wire whose multiplicity is the sum.
#[derive(Default)]
pub(crate) struct TermAccumulator {
    order: Vec<ModGate>,
    weight: HashMap<ModGate, u64>,
}

impl TermAccumulator {
    pub fn add(&mut self, gate: ModGate, coefficient: u64, modulus: u64) {
        let key = gate.normalized();
        match self.weight.get_mut(&key) {
            Some(w) => *w = (*w + coefficient) % modulus,
            None => {
                self.order.push(key.clone());
                self.weight.insert(key, coefficient % modulus);
            }
        }
    }

    /// Materializes the surviving terms in first-seen order.
    pub fn emit(self, b: &mut CircuitBuilder) -> Vec<(GateId, u64)> {
        let mut out = Vec::new();
        for key in self.order {
            let w = self.weight[&key];
            if w != 0 {
                let id = b.push(Gate::Mod(key));
                out.push((id, w));
            }
        }
        out
    }
}
