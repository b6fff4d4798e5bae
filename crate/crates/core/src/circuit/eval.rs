//! Evaluation: a scalar reference evaluator and a 64-lane bit-sliced one.

use super::{Circuit, Gate, GateId};
use crate::error::{Error, Result};

impl Circuit {
    fn check_assignment(&self, x: &[bool]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::Input(format!(
                "assignment has {} bits, circuit has {} inputs",
                x.len(),
                self.n()
            )));
        }
        Ok(())
    }

    /// Values of every gate under `x`.
    pub fn evaluate_all(&self, x: &[bool]) -> Result<Vec<bool>> {
        self.check_assignment(x)?;
        let mut val: Vec<bool> = Vec::with_capacity(self.len());
        for gate in self.gates() {
            let v = match gate {
                Gate::Input(i) => x[*i],
                Gate::Const(b) => *b,
                Gate::Not(c) => !val[*c],
                Gate::And(cs) => cs.iter().all(|&c| val[c]),
                Gate::Or(cs) => cs.iter().any(|&c| val[c]),
                Gate::Sym { companion, inputs } => {
                    companion[inputs.iter().filter(|&&c| val[c]).count()]
                }
                Gate::Mod(g) => g.sum_with(|c| val[c]) == 0,
            };
            val.push(v);
        }
        Ok(val)
    }

    pub fn evaluate(&self, x: &[bool]) -> Result<bool> {
        Ok(self.evaluate_all(x)?[self.output()])
    }

    /// `shift + Σ mult·value` of a MOD gate, reduced modulo its modulus.
    pub fn evaluate_sum_at(&self, gate: GateId, x: &[bool]) -> Result<u64> {
        let g = self
            .gate(gate)?
            .as_mod()
            .ok_or_else(|| Error::Type(format!("gate {gate} is not a MOD gate")))?;
        let val = self.evaluate_all(x)?;
        Ok(g.sum_with(|c| val[c]))
    }
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Input(u32),
    Const(bool),
    Not(u32),
    And { start: u32, end: u32 },
    Or { start: u32, end: u32 },
    Sym { start: u32, end: u32, width: u8, table: u32 },
    Mod { start: u32, end: u32, width: u8, modulus: u32, shift: u32 },
}

/// Compiled evaluator processing 64 assignments per pass, one per bit lane.
///
/// MOD and SYM gates accumulate their inputs into bit-sliced binary counters
/// and then reduce the counter with a one-hot residue vector, so the cost per
/// wire does not depend on the modulus.
pub struct WordEvaluator<'c> {
    circuit: &'c Circuit,
    ops: Vec<Op>,
    wires: Vec<u32>,
    mults: Vec<u32>,
    tables: Vec<Vec<bool>>,
    max_modulus: usize,
}

const LOW_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

fn bit_width(max: u64) -> u8 {
    (64 - max.leading_zeros()).max(1) as u8
}

impl<'c> WordEvaluator<'c> {
    pub fn new(circuit: &'c Circuit) -> Self {
        let mut ops = Vec::with_capacity(circuit.len());
        let mut wires = Vec::new();
        let mut mults = Vec::new();
        let mut tables = Vec::new();
        let mut max_modulus = 2;
        for gate in circuit.gates() {
            let start = wires.len() as u32;
            let op = match gate {
                Gate::Input(i) => Op::Input(*i as u32),
                Gate::Const(b) => Op::Const(*b),
                Gate::Not(c) => Op::Not(*c as u32),
                Gate::And(cs) | Gate::Or(cs) => {
                    wires.extend(cs.iter().map(|&c| c as u32));
                    let end = wires.len() as u32;
                    if matches!(gate, Gate::And(_)) {
                        Op::And { start, end }
                    } else {
                        Op::Or { start, end }
                    }
                }
                Gate::Sym { companion, inputs } => {
                    wires.extend(inputs.iter().map(|&c| c as u32));
                    mults.resize(wires.len(), 1);
                    tables.push(companion.clone());
                    Op::Sym {
                        start,
                        end: wires.len() as u32,
                        width: bit_width(inputs.len() as u64),
                        table: (tables.len() - 1) as u32,
                    }
                }
                Gate::Mod(g) => {
                    let m = g.modulus;
                    max_modulus = max_modulus.max(m as usize);
                    let mut total = 0u64;
                    for &(c, mult) in &g.inputs {
                        let r = mult % m;
                        if r != 0 {
                            wires.push(c as u32);
                            mults.push(r as u32);
                            total += r;
                        }
                    }
                    Op::Mod {
                        start,
                        end: wires.len() as u32,
                        width: bit_width(total),
                        modulus: m as u32,
                        shift: (g.shift % m) as u32,
                    }
                }
            };
            mults.resize(wires.len(), 1);
            ops.push(op);
        }
        WordEvaluator {
            circuit,
            ops,
            wires,
            mults,
            tables,
            max_modulus,
        }
    }

    pub fn circuit(&self) -> &Circuit {
        self.circuit
    }

    /// Input words for assignments `base .. base + 64`, where bit `i` of the
    /// assignment index is the value of variable `i`.
    pub fn exhaustive_inputs(n: usize, base: u64) -> Vec<u64> {
        (0..n)
            .map(|i| {
                if i < 6 {
                    LOW_PATTERNS[i]
                } else if (base >> i) & 1 == 1 {
                    !0
                } else {
                    0
                }
            })
            .collect()
    }

    /// Packs up to 64 assignments into input words.
    pub fn pack(n: usize, assignments: &[Vec<bool>]) -> Vec<u64> {
        assert!(assignments.len() <= 64);
        let mut words = vec![0u64; n];
        for (lane, x) in assignments.iter().enumerate() {
            for (i, &b) in x.iter().enumerate() {
                if b {
                    words[i] |= 1 << lane;
                }
            }
        }
        words
    }

    /// Evaluates every gate; `values` is resized to the gate count.
    pub fn run(&self, inputs: &[u64], values: &mut Vec<u64>) -> u64 {
        assert_eq!(inputs.len(), self.circuit.n(), "input word count");
        values.clear();
        values.reserve(self.ops.len());
        let mut counter = [0u64; 64];
        let mut residues = vec![0u64; self.max_modulus];
        let mut scratch = vec![0u64; self.max_modulus];
        for op in &self.ops {
            let v = match *op {
                Op::Input(i) => inputs[i as usize],
                Op::Const(b) => {
                    if b {
                        !0
                    } else {
                        0
                    }
                }
                Op::Not(c) => !values[c as usize],
                Op::And { start, end } => self.wires[start as usize..end as usize]
                    .iter()
                    .fold(!0u64, |acc, &c| acc & values[c as usize]),
                Op::Or { start, end } => self.wires[start as usize..end as usize]
                    .iter()
                    .fold(0u64, |acc, &c| acc | values[c as usize]),
                Op::Sym {
                    start,
                    end,
                    width,
                    table,
                } => {
                    let w = width as usize;
                    self.accumulate(values, start, end, &mut counter[..w]);
                    let companion = &self.tables[table as usize];
                    let mut out = 0u64;
                    for (count, &on) in companion.iter().enumerate() {
                        if on {
                            let mut eq = !0u64;
                            for (k, &bits) in counter[..w].iter().enumerate() {
                                eq &= if (count >> k) & 1 == 1 { bits } else { !bits };
                            }
                            out |= eq;
                        }
                    }
                    out
                }
                Op::Mod {
                    start,
                    end,
                    width,
                    modulus,
                    shift,
                } => {
                    let w = width as usize;
                    self.accumulate(values, start, end, &mut counter[..w]);
                    let m = modulus as usize;
                    reduce(&counter[..w], m, shift as usize, &mut residues, &mut scratch);
                    residues[0]
                }
            };
            values.push(v);
        }
        values[self.circuit.output()]
    }

    fn accumulate(&self, values: &[u64], start: u32, end: u32, counter: &mut [u64]) {
        counter.iter_mut().for_each(|c| *c = 0);
        for idx in start as usize..end as usize {
            let word = values[self.wires[idx] as usize];
            if word == 0 {
                continue;
            }
            let mut mult = self.mults[idx];
            let mut bit = 0;
            while mult != 0 {
                if mult & 1 == 1 {
                    let mut carry = word;
                    let mut pos = bit;
                    while carry != 0 {
                        let t = counter[pos] & carry;
                        counter[pos] ^= carry;
                        carry = t;
                        pos += 1;
                    }
                }
                mult >>= 1;
                bit += 1;
            }
        }
    }

    /// One-hot residue words of a MOD gate: entry `r` has lane bits set where
    /// `shift + Σ mult·input ≡ r`. `values` must come from [`Self::run`].
    pub fn mod_residues(&self, gate: GateId, values: &[u64]) -> Result<Vec<u64>> {
        match self.ops.get(gate) {
            Some(&Op::Mod {
                start,
                end,
                width,
                modulus,
                shift,
            }) => {
                let mut counter = [0u64; 64];
                let w = width as usize;
                self.accumulate(values, start, end, &mut counter[..w]);
                let m = modulus as usize;
                let mut residues = vec![0u64; m];
                let mut scratch = vec![0u64; m];
                reduce(&counter[..w], m, shift as usize, &mut residues, &mut scratch);
                Ok(residues)
            }
            Some(_) => Err(Error::Type(format!("gate {gate} is not a MOD gate"))),
            None => Err(Error::Structural(format!("gate {gate} does not exist"))),
        }
    }
}

/// Reduces a bit-sliced counter modulo `m` into one-hot residue words.
fn reduce(counter: &[u64], m: usize, shift: usize, residues: &mut [u64], scratch: &mut [u64]) {
    residues[..m].iter_mut().for_each(|r| *r = 0);
    residues[shift % m] = !0;
    let mut step = 1 % m;
    for &bits in counter {
        if bits != 0 && step != 0 {
            for r in 0..m {
                let from = (r + m - step) % m;
                scratch[r] = (residues[r] & !bits) | (residues[from] & bits);
            }
            residues[..m].copy_from_slice(&scratch[..m]);
        }
        step = step * 2 % m;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, ModGate};

    fn single_mod(m: u64, shift: u64, inputs: Vec<(usize, u64)>, n: usize) -> Circuit {
        let mut b = CircuitBuilder::new(n);
        let g = b.push(Gate::Mod(ModGate::new(m, shift, inputs)));
        b.finish(g)
    }

    #[test]
    fn mod_semantics_examples() {
        let c = single_mod(5, 4, vec![(0, 1)], 1);
        assert!(c.evaluate(&[true]).unwrap());
        assert_eq!(c.evaluate_sum_at(1, &[true]).unwrap(), 0);
        assert_eq!(c.evaluate_sum_at(1, &[false]).unwrap(), 4);

        let empty = single_mod(6, 0, vec![], 0);
        assert!(empty.evaluate(&[]).unwrap());

        let xnor = single_mod(2, 1, vec![(0, 1), (1, 1)], 2);
        assert!(xnor.evaluate(&[true, false]).unwrap());
        assert!(!xnor.evaluate(&[true, true]).unwrap());
    }

    #[test]
    fn sum_at_rejects_non_mod_gate() {
        let c = Circuit::new(1, vec![Gate::Input(0)], 0).unwrap();
        assert!(matches!(
            c.evaluate_sum_at(0, &[true]),
            Err(Error::Type(_))
        ));
    }

    #[test]
    fn length_mismatch_is_input_error() {
        let c = Circuit::new(1, vec![Gate::Input(0)], 0).unwrap();
        assert!(matches!(c.evaluate(&[]), Err(Error::Input(_))));
    }

    #[test]
    fn word_evaluator_matches_scalar_on_mixed_circuit() {
        let mut b = CircuitBuilder::new(7);
        let m = b.push(Gate::Mod(ModGate::new(7, 3, vec![(0, 5), (1, 6), (2, 13), (6, 2)])));
        let s = b.push(Gate::Sym {
            companion: vec![true, false, true, true, false],
            inputs: vec![3, 4, 5, m],
        });
        let n = b.not(s);
        let a = b.and(vec![n, 0, 6]);
        let o = b.or(vec![a, m]);
        let big = b.push(Gate::Mod(ModGate::new(105, 104, vec![(o, 52), (s, 77), (1, 1)])));
        let c = b.finish(big);
        let ev = WordEvaluator::new(&c);
        let mut values = Vec::new();
        for base in (0..128u64).step_by(64) {
            let out = ev.run(&WordEvaluator::exhaustive_inputs(7, base), &mut values);
            for lane in 0..64 {
                let idx = base + lane;
                let x: Vec<bool> = (0..7).map(|i| (idx >> i) & 1 == 1).collect();
                let all = c.evaluate_all(&x).unwrap();
                for (g, &v) in all.iter().enumerate() {
                    assert_eq!((values[g] >> lane) & 1 == 1, v, "gate {g} lane {idx}");
                }
                assert_eq!((out >> lane) & 1 == 1, all[big]);
                let res = ev.mod_residues(big, &values).unwrap();
                let sum = c.evaluate_sum_at(big, &x).unwrap() as usize;
                assert_eq!((res[sum] >> lane) & 1, 1);
            }
        }
    }
}
