//! Pure-MOD circuits for symmetric functions: depth 3 and the depth-d
//! recursion, plus rewrites of MOD∘SYM and SYM/NOT circuits.

mod depth3;
mod depthd;
mod rewrite;

use std::fmt;
use std::ops::Range;

use rand::Rng;

pub use depth3::{
    depth3_unabsorbed, emit_depth3, synth_depth3, synth_depth3_preset31, synth_depth3_with,
    synth_emaj_depth2, Depth3Params,
};
pub use depthd::{depthd_output_modulus, emit_depthd, synth_depthd, DepthdOptions};
pub use rewrite::{rewrite_modp_sym, subst_majority, SubstOptions};

use crate::circuit::{CircuitBuilder, GateId, ModGate};
use crate::error::{Error, Result};

/// A symmetric Boolean function given by its companion `g`: `f(x) = g[|x|₁]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymFnSpec {
    pub n: usize,
    pub companion: Vec<bool>,
    pub name: String,
}

impl SymFnSpec {
    pub fn custom(companion: Vec<bool>) -> Result<Self> {
        if companion.is_empty() {
            return Err(Error::Param("companion must have at least one entry".into()));
        }
        Ok(SymFnSpec {
            n: companion.len() - 1,
            companion,
            name: "custom".into(),
        })
    }

    fn from_fn(n: usize, name: String, g: impl Fn(usize) -> bool) -> Self {
        SymFnSpec {
            n,
            companion: (0..=n).map(g).collect(),
            name,
        }
    }

    /// Strict majority: `g[w] = [2w > n]`.
    pub fn majority(n: usize) -> Self {
        Self::from_fn(n, "maj".into(), |w| 2 * w > n)
    }

    pub fn parity(n: usize) -> Self {
        Self::from_fn(n, "parity".into(), |w| w % 2 == 1)
    }

    /// `[|x|₁ ≡ 0 mod m]`.
    pub fn modulo(n: usize, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Param("mod:0 is undefined".into()));
        }
        Ok(Self::from_fn(n, format!("mod:{m}"), |w| w % m == 0))
    }

    pub fn exact(n: usize, t: usize) -> Self {
        Self::from_fn(n, format!("exact:{t}"), |w| w == t)
    }

    pub fn constant(n: usize, value: bool) -> Self {
        Self::from_fn(n, "custom".into(), |_| value)
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        SymFnSpec {
            n,
            companion: (0..=n).map(|_| rng.gen()).collect(),
            name: "custom".into(),
        }
    }

    /// Parses a selector `maj | parity | mod:M | exact:T`.
    pub fn from_selector(selector: &str, n: usize) -> Result<Self> {
        let arg = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::Param(format!("bad number `{s}` in function selector `{selector}`")))
        };
        match selector.split_once(':') {
            None if selector == "maj" => Ok(Self::majority(n)),
            None if selector == "parity" => Ok(Self::parity(n)),
            Some(("mod", m)) => Self::modulo(n, arg(m)?),
            Some(("exact", t)) => Ok(Self::exact(n, arg(t)?)),
            _ => Err(Error::Param(format!(
                "unknown function `{selector}` (expected maj, parity, mod:M or exact:T)"
            ))),
        }
    }

    /// Parses the `SYMFN <n> <bitstring>` spec-file format.
    pub fn parse(text: &str) -> Result<Self> {
        let (ln, line) = text
            .lines()
            .enumerate()
            .find(|(_, l)| !l.trim().is_empty())
            .ok_or(Error::Parse {
                line: 1,
                msg: "empty spec file".into(),
            })?;
        let perr = |msg: String| Error::Parse { line: ln + 1, msg };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "SYMFN" {
            return Err(perr("expected `SYMFN <n> <bitstring>`".into()));
        }
        let n: usize = toks[1]
            .parse()
            .map_err(|_| perr(format!("bad input count `{}`", toks[1])))?;
        let companion = toks[2]
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(perr(format!("bad companion bit `{c}`"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        if companion.len() != n + 1 {
            return Err(perr(format!(
                "companion has length {}, expected {}",
                companion.len(),
                n + 1
            )));
        }
        Ok(SymFnSpec {
            n,
            companion,
            name: "custom".into(),
        })
    }

    pub fn eval_weight(&self, w: usize) -> bool {
        self.companion[w]
    }

    pub fn eval(&self, x: &[bool]) -> bool {
        self.companion[x.iter().filter(|&&b| b).count()]
    }

    pub fn companion_string(&self) -> String {
        self.companion.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for SymFnSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SYMFN {} {}", self.n, self.companion_string())
    }
}

/// A modular sum `constant + Σ coeff·wire` that takes only the values 0 and 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSum {
    pub modulus: u64,
    pub constant: u64,
    pub terms: Vec<(GateId, u64)>,
}

impl LinearSum {
    pub fn constant(modulus: u64, value: u64) -> Self {
        LinearSum {
            modulus,
            constant: value % modulus,
            terms: Vec::new(),
        }
    }

    /// MOD gate outputting the sum's value: its linear form is `1 − sum`.
    pub fn output_gate(&self) -> ModGate {
        let m = self.modulus;
        ModGate::new(
            m,
            (1 + m - self.constant % m) % m,
            self.terms.iter().map(|&(g, c)| (g, (m - c % m) % m)).collect(),
        )
        .normalized()
    }

    /// Materializes [`Self::output_gate`].
    pub fn emit(&self, b: &mut CircuitBuilder) -> GateId {
        b.modulo(&self.output_gate())
    }

    pub fn value(&self, wire: impl Fn(GateId) -> bool) -> u64 {
        let m = self.modulus;
        self.terms
            .iter()
            .fold(self.constant % m, |acc, &(g, c)| if wire(g) { (acc + c) % m } else { acc })
    }
}

/// Contiguous parts and the `(T, composition)` pairs with `g(T) = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionPlan {
    pub t: usize,
    pub part_sizes: Vec<usize>,
    pub ranges: Vec<Range<usize>>,
    pub enumeration: Vec<(usize, Vec<usize>)>,
}

/// Splits `0..n` into `t` contiguous parts; the first `n mod t` parts get
/// one extra variable.
pub fn partition_ranges(n: usize, t: usize) -> Vec<Range<usize>> {
    let t = t.clamp(1, n.max(1));
    let (q, r) = (n / t, n % t);
    let mut start = 0;
    (0..t)
        .map(|i| {
            let len = q + usize::from(i < r);
            let range = start..start + len;
            start += len;
            range
        })
        .collect()
}

impl PartitionPlan {
    pub fn new(spec: &SymFnSpec, t: usize) -> Self {
        let ranges = partition_ranges(spec.n, t);
        let part_sizes: Vec<usize> = ranges.iter().map(|r| r.len()).collect();
        let mut enumeration = Vec::new();
        for target in 0..=spec.n {
            if spec.companion[target] {
                for comp in compositions(target, &part_sizes) {
                    enumeration.push((target, comp));
                }
            }
        }
        PartitionPlan {
            t: ranges.len(),
            part_sizes,
            ranges,
            enumeration,
        }
    }
}

/// All `(T_1..T_t)` with `Σ T_i = total` and `0 ≤ T_i ≤ caps[i]`, in
/// lexicographic order.
pub fn compositions(total: usize, caps: &[usize]) -> Vec<Vec<usize>> {
    fn rec(rest: usize, caps: &[usize], suffix_cap: &[usize], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let i = cur.len();
        if i == caps.len() {
            if rest == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let lo = rest.saturating_sub(suffix_cap[i + 1]);
        let hi = rest.min(caps[i]);
        for v in lo..=hi {
            cur.push(v);
            rec(rest - v, caps, suffix_cap, cur, out);
            cur.pop();
        }
    }
    let mut suffix_cap = vec![0; caps.len() + 1];
    for i in (0..caps.len()).rev() {
        suffix_cap[i] = suffix_cap[i + 1] + caps[i];
    }
    let mut out = Vec::new();
    if total <= suffix_cap[0] {
        rec(total, caps, &suffix_cap, &mut Vec::new(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_specs() {
        assert_eq!(SymFnSpec::majority(5).companion_string(), "000111");
        assert_eq!(SymFnSpec::majority(4).companion_string(), "00011");
        assert_eq!(SymFnSpec::parity(4).companion_string(), "01010");
        assert_eq!(SymFnSpec::modulo(6, 3).unwrap().companion_string(), "1001001");
        assert!(SymFnSpec::majority(5).eval(&[true, true, true, false, false]));
        assert!(!SymFnSpec::parity(4).eval(&[true, false, true, false]));
        assert!(SymFnSpec::from_selector("mod:3", 6)
            .unwrap()
            .eval(&[true, true, true, false, false, false]));
        assert!(SymFnSpec::from_selector("xor", 3).is_err());
    }

    #[test]
    fn spec_file_round_trip() {
        let s = SymFnSpec::parse("SYMFN 3 0110\n").unwrap();
        assert_eq!(s.to_string(), "SYMFN 3 0110");
        assert!(matches!(SymFnSpec::parse("SYMFN 3 011"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn partition_shapes() {
        let r = partition_ranges(10, 3);
        assert_eq!(r, vec![0..4, 4..7, 7..10]);
        assert_eq!(partition_ranges(2, 5), vec![0..1, 1..2]);
    }

    #[test]
    fn compositions_are_lexicographic_and_complete() {
        let c = compositions(3, &[2, 2]);
        assert_eq!(c, vec![vec![1, 2], vec![2, 1]]);
        let c = compositions(2, &[1, 1, 1]);
        assert_eq!(c.len(), 3);
        assert!(compositions(5, &[1, 2]).is_empty());
        let plan = PartitionPlan::new(&SymFnSpec::majority(9), 2);
        for (t, comp) in &plan.enumeration {
            assert_eq!(comp.iter().sum::<usize>(), *t);
        }
        assert!(plan.enumeration.len() <= 10 * 6usize.pow(2));
    }
}
