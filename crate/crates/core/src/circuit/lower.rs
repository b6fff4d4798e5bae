//! Exporter passes: NOT removal and the plain-MOD gate model.

use super::{Circuit, CircuitBuilder, Gate, GateId, ModGate};

/// Replaces every NOT gate by a MOD_2 gate.
pub fn lower_not_gates(c: &Circuit) -> Circuit {
    lower_not_gates_with(c, 2)
}

/// Replaces every `NOT(g)` by `MOD_modulus(shift 0, {g:1})`, which is 1
/// exactly when `g` is 0. Circuits without NOT gates come back unchanged.
pub fn lower_not_gates_with(c: &Circuit, modulus: u64) -> Circuit {
    assert!(modulus >= 2, "modulus must be at least 2");
    let gates = c
        .gates()
        .iter()
        .map(|g| match g {
            Gate::Not(x) => Gate::Mod(ModGate::new(modulus, 0, vec![(*x, 1)])),
            other => other.clone(),
        })
        .collect();
    Circuit::new(c.n(), gates, c.output()).expect("lowering keeps ids")
}

/// Rewrites shifts and multiplicities into repeated wires: every MOD gate
/// gets shift 0 and multiplicity 1 per listed wire, with `shift` extra wires
/// from a shared CONST1 gate.
pub fn to_literal_model(c: &Circuit) -> Circuit {
    let mut b = CircuitBuilder::new(c.n());
    let needs_one = c
        .gates()
        .iter()
        .any(|g| matches!(g, Gate::Mod(m) if m.shift != 0));
    let one = needs_one.then(|| b.constant(true));
    let mut map: Vec<GateId> = Vec::with_capacity(c.len());
    for gate in c.gates() {
        let id = match gate {
            Gate::Input(i) => *i,
            Gate::Const(v) => b.constant(*v),
            Gate::Mod(m) => {
                let mut inputs = Vec::new();
                for _ in 0..m.shift {
                    inputs.push((one.expect("CONST1 allocated"), 1));
                }
                for &(x, mult) in &m.inputs {
                    for _ in 0..mult {
                        inputs.push((map[x], 1));
                    }
                }
                b.push(Gate::Mod(ModGate::new(m.modulus, 0, inputs)))
            }
            other => b.push(other.remap(|x| map[x])),
        };
        map.push(id);
    }
    b.finish(map[c.output()])
}
