use std::collections::HashMap;

use super::{emit_depth3, emit_depthd, Depth3Params, DepthdOptions};
use crate::arith::{mod_mul, prime_factors};
use crate::circuit::{layer_label, Circuit, CircuitBuilder, Gate, GateId, ModGate};
use crate::error::{Error, Result};

/// Replaces each SYM child of a top MOD_p gate by the depth-3 construction
/// and merges the outer sums into the top gate. `p = 5` uses the
/// `MOD_5 ∘ MOD_6 ∘ MOD_5` parameters, `p = 2` the `k` preset.
pub fn rewrite_modp_sym(c: &Circuit, k: usize) -> Result<Circuit> {
    let top = c.gates()[c.output()].as_mod().ok_or_else(|| {
        Error::Shape(format!(
            "output gate is {}, expected a MOD gate over SYM gates",
            layer_label(&c.gates()[c.output()])
        ))
    })?;
    let p = top.modulus;
    if p != 2 && p != 5 {
        return Err(Error::Param(format!(
            "top modulus {p} has no depth-3 preset (expected 2 or 5)"
        )));
    }
    let mut b = CircuitBuilder::new(c.n());
    let mut literals: HashMap<GateId, GateId> = HashMap::new();
    let mut blocks: HashMap<GateId, super::LinearSum> = HashMap::new();
    let mut shift = top.shift;
    let mut inputs = Vec::new();
    for &(child, mult) in &top.inputs {
        let Gate::Sym { companion, inputs: sym_inputs } = &c.gates()[child] else {
            return Err(Error::Shape(format!(
                "top gate child {child} is {}, expected SYM",
                layer_label(&c.gates()[child])
            )));
        };
        if !blocks.contains_key(&child) {
            let mut vars = Vec::with_capacity(sym_inputs.len());
            for &x in sym_inputs {
                let id = match &c.gates()[x] {
                    Gate::Input(i) => *i,
                    Gate::Not(y) => match c.gates()[*y] {
                        Gate::Input(i) => *literals.entry(x).or_insert_with(|| b.not(i)),
                        _ => return Err(Error::Shape(format!("SYM gate {child} reads NOT gate {x} over a non-input"))),
                    },
                    other => {
                        return Err(Error::Shape(format!(
                            "SYM gate {child} reads {} gate {x}; inputs must be variables",
                            layer_label(other)
                        )))
                    }
                };
                vars.push(id);
            }
            let s = vars.len();
            let params = if p == 5 {
                Depth3Params::preset31(s)
            } else {
                Depth3Params::for_k(s, k)?
            };
            blocks.insert(child, emit_depth3(&mut b, &vars, companion, &params)?);
        }
        let sum = &blocks[&child];
        shift = (shift + mod_mul(mult, sum.constant, p)) % p;
        inputs.extend(sum.terms.iter().map(|&(g, cf)| (g, mod_mul(mult, cf, p))));
    }
    let out = b.modulo(&ModGate::new(p, shift, inputs));
    Ok(b.finish(out).gc())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SubstOptions {
    /// Use the AND/OR/MOD discriminator construction instead of pure MOD gates.
    pub acc: bool,
    pub share: bool,
}

/// Substitutes every SYM gate of a SYM/NOT circuit by a depth-`d`
/// construction over its (substituted) inputs.
pub fn subst_majority(c: &Circuit, m: u64, d: usize, opts: SubstOptions) -> Result<Circuit> {
    let lowest = *prime_factors(m)
        .first()
        .ok_or_else(|| Error::Param(format!("modulus {m} has no prime factor")))?;
    let acc_params = if opts.acc {
        Some(crate::acc0::AccParams::new(m, d, c.n().max(2))?)
    } else {
        None
    };
    let mut b = CircuitBuilder::new(c.n());
    let mut map: Vec<GateId> = Vec::with_capacity(c.len());
    let build = |b: &mut CircuitBuilder, vars: &[GateId], companion: &[bool]| -> Result<GateId> {
        match &acc_params {
            Some(params) => crate::acc0::emit_symmetric_acc(b, vars, companion, params),
            None => {
                let sum = emit_depthd(b, vars, companion, m, d, DepthdOptions { share: opts.share })?;
                Ok(sum.emit(b))
            }
        }
    };
    for (id, gate) in c.gates().iter().enumerate() {
        let new_id = match gate {
            Gate::Input(i) => *i,
            Gate::Const(v) => b.constant(*v),
            Gate::Sym { companion, inputs } => {
                let vars: Vec<GateId> = inputs.iter().map(|&x| map[x]).collect();
                build(&mut b, &vars, companion)?
            }
            Gate::Not(x) => match &c.gates()[*x] {
                Gate::Sym { companion, inputs } => {
                    let vars: Vec<GateId> = inputs.iter().map(|&y| map[y]).collect();
                    let flipped: Vec<bool> = companion.iter().map(|v| !v).collect();
                    build(&mut b, &vars, &flipped)?
                }
                Gate::Input(i) => b.not(*i),
                Gate::Const(v) => b.constant(!v),
                Gate::Not(y) => map[*y],
                other => {
                    return Err(Error::Shape(format!(
                        "NOT gate {id} negates a {} gate",
                        layer_label(other)
                    )))
                }
            },
            other => {
                return Err(Error::Shape(format!(
                    "gate {id} is {}; only SYM, NOT, INPUT and CONST gates can be substituted",
                    layer_label(other)
                )))
            }
        };
        map.push(new_id);
    }
    let mut out = map[c.output()];
    if let Gate::Not(u) = b.gate(out) {
        let u = *u;
        out = b.modulo(&ModGate::new(lowest, 0, vec![(u, 1)]));
    }
    Ok(b.finish(out).gc())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cc0::SymFnSpec;

    fn all_inputs(n: usize) -> impl Iterator<Item = Vec<bool>> {
        (0u32..1 << n).map(move |v| (0..n).map(|i| v >> i & 1 == 1).collect())
    }

    #[test]
    fn mod5_of_two_syms() {
        let mut gates: Vec<Gate> = (0..12).map(Gate::Input).collect();
        let maj = SymFnSpec::majority(6).companion;
        let par = SymFnSpec::parity(6).companion;
        gates.push(Gate::Sym { companion: maj, inputs: (0..6).collect() });
        gates.push(Gate::Sym { companion: par, inputs: (6..12).collect() });
        gates.push(Gate::Mod(ModGate::new(5, 3, vec![(12, 2), (13, 1)])));
        let c = Circuit::new(12, gates, 14).unwrap();
        let r = rewrite_modp_sym(&c, 3).unwrap();
        assert_eq!(r.depth(), 3);
        assert_eq!(r.metrics().shape_string(), "MOD(5)/MOD(6)/MOD(5)");
        for x in all_inputs(12).step_by(7) {
            assert_eq!(r.evaluate(&x).unwrap(), c.evaluate(&x).unwrap());
        }
        let bad = Circuit::new(1, vec![Gate::Input(0), Gate::Mod(ModGate::new(5, 0, vec![(0, 1)]))], 1)
            .unwrap();
        assert!(matches!(rewrite_modp_sym(&bad, 3), Err(Error::Shape(_))));
    }

    #[test]
    fn majority_of_majorities() {
        let mut gates: Vec<Gate> = (0..9).map(Gate::Input).collect();
        let maj3 = SymFnSpec::majority(3).companion;
        for i in 0..3 {
            gates.push(Gate::Sym { companion: maj3.clone(), inputs: (3 * i..3 * i + 3).collect() });
        }
        gates.push(Gate::Sym { companion: maj3, inputs: vec![9, 10, 11] });
        let c = Circuit::new(9, gates, 12).unwrap();
        let s = subst_majority(&c, 15, 3, SubstOptions::default()).unwrap();
        assert!(s.depth() <= 6);
        let acc = subst_majority(&c, 42, 4, SubstOptions { acc: true, share: false }).unwrap();
        assert!(acc.depth() <= 8);
        for x in all_inputs(9) {
            assert_eq!(s.evaluate(&x).unwrap(), c.evaluate(&x).unwrap());
            assert_eq!(acc.evaluate(&x).unwrap(), c.evaluate(&x).unwrap());
        }
    }

    #[test]
    fn negations_are_absorbed() {
        let gates = vec![
            Gate::Input(0),
            Gate::Input(1),
            Gate::Not(0),
            Gate::Sym { companion: vec![false, true, false], inputs: vec![2, 1] },
            Gate::Not(3),
        ];
        let c = Circuit::new(2, gates, 4).unwrap();
        let s = subst_majority(&c, 15, 3, SubstOptions::default()).unwrap();
        assert!(s.gates().iter().all(|g| !matches!(g, Gate::Not(_))));
        assert_eq!(s.depth(), 3);
        for x in all_inputs(2) {
            assert_eq!(s.evaluate(&x).unwrap(), c.evaluate(&x).unwrap());
        }
        let bad = Circuit::new(1, vec![Gate::Input(0), Gate::And(vec![0])], 1).unwrap();
        assert!(matches!(subst_majority(&bad, 15, 3, SubstOptions::default()), Err(Error::Shape(_))));
    }
}
