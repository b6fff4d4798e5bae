use std::collections::HashMap;
use std::ops::Range;

use rand::Rng;

use crate::arith::{iroot_ceil, is_prime};
use crate::cc0::{compositions, partition_ranges};
use crate::error::{Error, Result};

/// Node cap for [`esym_arith_circuit`].
pub const DEFAULT_ARITH_CAP: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ArithGate {
    Var(usize),
    Const(u64),
    Plus(Vec<usize>),
    Times(Vec<usize>),
}

/// Alternating `+`/`×` circuit over `F_p`; the output is a `×` gate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArithCircuit {
    pub p: u64,
    pub n: usize,
    pub gates: Vec<ArithGate>,
    pub output: usize,
}

impl ArithCircuit {
    pub fn new(p: u64, n: usize, gates: Vec<ArithGate>, output: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Param(format!("field size {p} is not prime")));
        }
        let c = ArithCircuit { p, n, gates, output };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let serr = |msg: String| Err(Error::Structural(msg));
        if self.output >= self.gates.len() {
            return serr(format!("output {} out of range", self.output));
        }
        if !matches!(self.gates[self.output], ArithGate::Times(_)) {
            return serr("output must be a × gate".into());
        }
        for (id, g) in self.gates.iter().enumerate() {
            match g {
                ArithGate::Var(i) if *i >= self.n => return serr(format!("gate {id}: variable {i} out of range")),
                ArithGate::Const(c) if *c >= self.p => return serr(format!("gate {id}: constant {c} not reduced")),
                ArithGate::Plus(ch) | ArithGate::Times(ch) => {
                    let plus = matches!(g, ArithGate::Plus(_));
                    if ch.is_empty() {
                        return serr(format!("gate {id} has no children"));
                    }
                    for &c in ch {
                        if c >= id {
                            return serr(format!("gate {id} reads later gate {c}"));
                        }
                        let same = match self.gates[c] {
                            ArithGate::Plus(_) => plus,
                            ArithGate::Times(_) => !plus,
                            _ => false,
                        };
                        if same {
                            return serr(format!("gate {id} does not alternate with child {c}"));
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn evaluate_all(&self, x: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut v = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let val = match g {
                ArithGate::Var(i) => x[*i] % p,
                ArithGate::Const(c) => *c,
                ArithGate::Plus(ch) => ch.iter().fold(0, |a, &c| (a + v[c]) % p),
                ArithGate::Times(ch) => ch.iter().fold(1, |a, &c| a * v[c] % p),
            };
            v.push(val);
        }
        v
    }

    pub fn evaluate(&self, x: &[u64]) -> u64 {
        self.evaluate_all(x)[self.output]
    }

    /// Number of `+`/`×` layers on the longest path.
    pub fn depth(&self) -> usize {
        let mut d = vec![0usize; self.gates.len()];
        for (id, g) in self.gates.iter().enumerate() {
            if let ArithGate::Plus(ch) | ArithGate::Times(ch) = g {
                d[id] = 1 + ch.iter().map(|&c| d[c]).max().unwrap_or(0);
            }
        }
        d[self.output]
    }

    /// Random alternating circuit of depth at most `depth`, made 0/1-valued
    /// by a final `(·)^{p−1}`.
    pub fn random(p: u64, n: usize, depth: usize, rng: &mut impl Rng) -> Result<Self> {
        if depth < 2 || n == 0 {
            return Err(Error::Param("random circuit needs depth ≥ 2 and n ≥ 1".into()));
        }
        let mut gates: Vec<ArithGate> = (0..n).map(ArithGate::Var).collect();
        let mut layers: Vec<Vec<usize>> = vec![(0..n).collect()];
        let body = depth - 1;
        let first_plus = body % 2 == 1;
        for layer in 1..=body {
            let plus = (layer % 2 == 1) == first_plus;
            let width = if layer == body { 1 } else { rng.gen_range(1..=3) };
            let mut ids = Vec::with_capacity(width);
            for _ in 0..width {
                let fanin = rng.gen_range(1..=3);
                let mut ch = Vec::with_capacity(fanin);
                for _ in 0..fanin {
                    let pick = rng.gen_range(0..10);
                    let c = if pick == 0 {
                        gates.push(ArithGate::Const(rng.gen_range(0..p)));
                        gates.len() - 1
                    } else if pick < 4 || layer == 1 {
                        rng.gen_range(0..n)
                    } else {
                        let prev = &layers[layer - 1];
                        prev[rng.gen_range(0..prev.len())]
                    };
                    ch.push(c);
                }
                gates.push(if plus { ArithGate::Plus(ch) } else { ArithGate::Times(ch) });
                ids.push(gates.len() - 1);
            }
            layers.push(ids);
        }
        // the top body layer is always +
        let root = layers[body][0];
        gates.push(ArithGate::Times(vec![root; (p - 1) as usize]));
        let out = gates.len() - 1;
        ArithCircuit::new(p, n, gates, out)
    }
}

struct EsymBuilder {
    p: u64,
    cap: usize,
    gates: Vec<ArithGate>,
    memo: HashMap<(usize, usize, usize, usize), usize>,
    dedupe: HashMap<ArithGate, usize>,
}

impl EsymBuilder {
    fn push(&mut self, g: ArithGate) -> Result<usize> {
        if let Some(&id) = self.dedupe.get(&g) {
            return Ok(id);
        }
        if self.gates.len() >= self.cap {
            return Err(Error::CapExceeded {
                what: "arithmetic circuit gates".into(),
                cap: self.cap,
            });
        }
        self.gates.push(g.clone());
        self.dedupe.insert(g, self.gates.len() - 1);
        Ok(self.gates.len() - 1)
    }

    /// `+` gate computing `e_j` of the variables in `range` with `levels`
    /// `+`/`×` pairs; `j ≥ 1`.
    fn build(&mut self, range: Range<usize>, j: usize, levels: usize) -> Result<usize> {
        let key = (range.start, range.end, j, levels);
        if let Some(&id) = self.memo.get(&key) {
            return Ok(id);
        }
        let size = range.len();
        let mut products = Vec::new();
        if levels <= 1 {
            for comp in compositions(j, &vec![1; size]) {
                let vars: Vec<usize> = comp
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c == 1)
                    .map(|(i, _)| range.start + i)
                    .collect();
                products.push(self.push(ArithGate::Times(vars))?);
            }
        } else {
            let blocks: Vec<Range<usize>> = partition_ranges(size, iroot_ceil(size as u64, levels as u32) as usize)
                .into_iter()
                .map(|r| range.start + r.start..range.start + r.end)
                .collect();
            let caps: Vec<usize> = blocks.iter().map(|r| r.len()).collect();
            for comp in compositions(j, &caps) {
                let mut ch = Vec::new();
                for (blk, &jb) in blocks.iter().zip(&comp) {
                    if jb > 0 {
                        ch.push(self.build(blk.clone(), jb, levels - 1)?);
                    }
                }
                products.push(self.push(ArithGate::Times(ch))?);
            }
        }
        let id = self.push(ArithGate::Plus(products))?;
        self.memo.insert(key, id);
        Ok(id)
    }
}

/// Arithmetic circuit over `F_p` for `e_j(x_1..x_n)` with `levels` `+`/`×`
/// pairs, wrapped in a final `×`. The variable tree splits into
/// `⌈size^{1/levels}⌉` blocks per level.
pub fn esym_arith_circuit(n: usize, j: usize, p: u64, levels: usize, cap: usize) -> Result<ArithCircuit> {
    if levels == 0 {
        return Err(Error::Param("arithmetic depth must be at least one level".into()));
    }
    if !is_prime(p) {
        return Err(Error::Param(format!("field size {p} is not prime")));
    }
    let mut eb = EsymBuilder {
        p,
        cap,
        gates: (0..n).map(ArithGate::Var).collect(),
        memo: HashMap::new(),
        dedupe: HashMap::new(),
    };
    let out = if j == 0 {
        let one = eb.push(ArithGate::Const(1))?;
        eb.push(ArithGate::Times(vec![one]))?
    } else if j > n {
        let zero = eb.push(ArithGate::Const(0))?;
        eb.push(ArithGate::Times(vec![zero]))?
    } else {
        let root = eb.build(0..n, j, levels)?;
        eb.push(ArithGate::Times(vec![root]))?
    };
    ArithCircuit::new(eb.p, n, eb.gates, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::binomial_mod;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn esym_matches_binomial() {
        for p in [2u64, 3, 5, 7] {
            for n in 1..=7usize {
                for j in 0..=n + 1 {
                    for levels in 1..=3 {
                        let c = esym_arith_circuit(n, j, p, levels, DEFAULT_ARITH_CAP).unwrap();
                        assert!(c.depth() <= 2 * levels + 1);
                        for x in 0u32..1 << n {
                            let bits: Vec<u64> = (0..n).map(|i| (x >> i & 1) as u64).collect();
                            let w = x.count_ones() as u64;
                            assert_eq!(c.evaluate(&bits), binomial_mod(w, j as u64, p), "p={p} n={n} j={j}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn direct_expansion_and_empty_product() {
        let c = esym_arith_circuit(4, 2, 3, 1, DEFAULT_ARITH_CAP).unwrap();
        let products = c
            .gates
            .iter()
            .filter(|g| matches!(g, ArithGate::Times(ch) if ch.len() == 2))
            .count();
        assert_eq!(products, 6);
        let one = esym_arith_circuit(4, 0, 3, 2, DEFAULT_ARITH_CAP).unwrap();
        assert_eq!(one.gates[one.output], ArithGate::Times(vec![4]));
        assert_eq!(one.gates[4], ArithGate::Const(1));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            esym_arith_circuit(20, 10, 3, 1, 1000),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn random_circuits_are_boolean_valued() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let p = [2u64, 3, 5, 7][rng.gen_range(0..4)];
            let depth = rng.gen_range(2..=6);
            let c = ArithCircuit::random(p, 4, depth, &mut rng).unwrap();
            assert!(c.depth() <= depth);
            for x in 0u32..16 {
                let bits: Vec<u64> = (0..4).map(|i| (x >> i & 1) as u64).collect();
                assert!(c.evaluate(&bits) <= 1);
            }
        }
    }

    #[test]
    fn alternation_is_checked() {
        let gates = vec![ArithGate::Var(0), ArithGate::Times(vec![0]), ArithGate::Times(vec![1])];
        assert!(ArithCircuit::new(3, 1, gates, 2).is_err());
        let gates = vec![ArithGate::Var(0), ArithGate::Plus(vec![0])];
        assert!(ArithCircuit::new(3, 1, gates, 1).is_err());
    }
}
