use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Circuit, Gate};

/// Size and shape statistics of a circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metrics {
    pub gate_count_by_kind: BTreeMap<String, usize>,
    pub total_gates: usize,
    /// Sum of MOD multiplicities plus the fan-in of every other gate.
    pub total_wires: u64,
    pub depth: usize,
    /// Gate types per level, output level first.
    pub layer_shape: Vec<String>,
    /// Largest fan-in per level, output level first.
    pub max_fanin_by_layer: Vec<usize>,
}

/// Short type label used in layer shapes, e.g. `MOD(6)` or `AND`.
pub fn layer_label(gate: &Gate) -> String {
    match gate {
        Gate::Input(_) => "INPUT".into(),
        Gate::Const(true) => "CONST1".into(),
        Gate::Const(false) => "CONST0".into(),
        Gate::Not(_) => "NOT".into(),
        Gate::And(_) => "AND".into(),
        Gate::Or(_) => "OR".into(),
        Gate::Sym { .. } => "SYM".into(),
        Gate::Mod(g) => format!("MOD({})", g.modulus),
    }
}

impl Circuit {
    /// Level of every gate: sources and NOT gates add nothing, every other
    /// gate sits one above its highest child.
    pub fn levels(&self) -> Vec<usize> {
        let mut level = vec![0usize; self.len()];
        for (id, gate) in self.gates().iter().enumerate() {
            let mut top = 0;
            gate.for_each_child(|c| top = top.max(level[c]));
            level[id] = match gate {
                Gate::Input(_) | Gate::Const(_) => 0,
                Gate::Not(_) => top,
                _ => top + 1,
            };
        }
        level
    }

    pub fn depth(&self) -> usize {
        self.levels()[self.output()]
    }

    pub fn metrics(&self) -> Metrics {
        let level = self.levels();
        let depth = level[self.output()];

        let mut reachable = vec![false; self.len()];
        reachable[self.output()] = true;
        for id in (0..self.len()).rev() {
            if reachable[id] {
                self.gates()[id].for_each_child(|c| reachable[c] = true);
            }
        }

        let mut by_kind: BTreeMap<String, usize> = BTreeMap::new();
        let mut wires = 0u64;
        let mut labels: Vec<BTreeSet<String>> = vec![BTreeSet::new(); depth + 1];
        let mut fanin = vec![0usize; depth + 1];
        for (id, gate) in self.gates().iter().enumerate() {
            *by_kind.entry(layer_label(gate)).or_insert(0) += 1;
            wires += match gate {
                Gate::Mod(g) => g.wires(),
                other => other.children().len() as u64,
            };
            if reachable[id] && gate.is_layered() && level[id] <= depth {
                labels[level[id]].insert(layer_label(gate));
                let f = match gate {
                    Gate::Mod(g) => g.fanin(),
                    other => other.children().len(),
                };
                fanin[level[id]] = fanin[level[id]].max(f);
            }
        }
        let layer_shape = (1..=depth)
            .rev()
            .map(|l| labels[l].iter().cloned().collect::<Vec<_>>().join("|"))
            .collect();
        let max_fanin_by_layer = (1..=depth).rev().map(|l| fanin[l]).collect();
        Metrics {
            gate_count_by_kind: by_kind,
            total_gates: self.len(),
            total_wires: wires,
            depth,
            layer_shape,
            max_fanin_by_layer,
        }
    }
}

impl Metrics {
    /// Layer shape joined with `/`, output level first.
    pub fn shape_string(&self) -> String {
        self.layer_shape.join("/")
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "total_gates={}", self.total_gates)?;
        writeln!(f, "total_wires={}", self.total_wires)?;
        writeln!(f, "depth={}", self.depth)?;
        writeln!(f, "layer_shape={}", self.shape_string())?;
        let fanins: Vec<String> = self.max_fanin_by_layer.iter().map(|f| f.to_string()).collect();
        writeln!(f, "max_fanin_by_layer={}", fanins.join("/"))?;
        for (kind, count) in &self.gate_count_by_kind {
            writeln!(f, "gates.{kind}={count}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use crate::circuit::{CircuitBuilder, Gate, ModGate};

    #[test]
    fn mod2_of_mod3_shape() {
        let mut b = CircuitBuilder::new(1);
        let one = b.constant(true);
        let inner = b.push(Gate::Mod(ModGate::new(3, 0, vec![(0, 1)])));
        let out = b.push(Gate::Mod(ModGate::new(2, 0, vec![(inner, 1), (one, 1)])));
        let m = b.finish(out).metrics();
        assert_eq!(m.depth, 2);
        assert_eq!(m.shape_string(), "MOD(2)/MOD(3)");
        assert_eq!(m.total_gates, 4);
        assert_eq!(m.total_wires, 3);
        assert_eq!(m.layer_shape.len(), m.depth);
    }

    #[test]
    fn not_gates_are_transparent() {
        let mut b = CircuitBuilder::new(2);
        let a = b.and(vec![0, 1]);
        let n = b.not(a);
        let o = b.or(vec![n, 0]);
        let m = b.finish(o).metrics();
        assert_eq!(m.depth, 2);
        assert_eq!(m.shape_string(), "OR/AND");
        assert_eq!(m.max_fanin_by_layer, vec![2, 2]);
    }
}
