use std::collections::HashMap;

use super::arith_circuit::{esym_arith_circuit, DEFAULT_ARITH_CAP};
use super::convert::emit_arith;
use super::AccParams;
use crate::arith::{binomial, is_prime};
use crate::cc0::{compositions, SymFnSpec};
use crate::circuit::{Circuit, CircuitBuilder, Gate, GateId};
use crate::error::{Error, Result};

/// Largest number of subsets a threshold discriminator may enumerate.
const THRESHOLD_CAP: u64 = 2_000_000;

/// How a weight pair `(i, j)` is told apart: output 1 on weight `i`, 0 on weight `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Discriminator {
    /// `[digit b of (|x| + pad) base p is nonzero]` via `e_{p^b}` over `F_p`.
    Digit {
        prime_index: usize,
        p: u64,
        digit: u32,
        pad: usize,
    },
    /// `[#ones ≥ theta]`, or `[#zeros ≥ theta]` when `ones` is false.
    Threshold { theta: usize, ones: bool },
}

pub fn plan_discriminator(i: usize, j: usize, n: usize, params: &AccParams) -> Result<Discriminator> {
    if i == j || i > n || j > n {
        return Err(Error::Param(format!("discriminator needs distinct weights in [0, {n}], got {i} and {j}")));
    }
    if params.is_small_gap(i, j) {
        for (a, &p) in params.primes.iter().enumerate() {
            let big_p = params.prime_power(a) as usize;
            if i % big_p == j % big_p {
                continue;
            }
            let pad = (big_p - j % big_p) % big_p;
            let mut diff = (i + pad) % big_p;
            let mut digit = 0;
            while diff % p as usize == 0 {
                diff /= p as usize;
                digit += 1;
            }
            return Ok(Discriminator::Digit { prime_index: a, p, digit, pad });
        }
        return Err(Error::Infeasible(format!(
            "no prime power of {} separates weights {i} and {j}; raise α or d",
            params.m
        )));
    }
    Ok(if i > j {
        Discriminator::Threshold { theta: j + (i - j).div_ceil(2), ones: true }
    } else {
        Discriminator::Threshold { theta: (n - j) + (j - i).div_ceil(2), ones: false }
    })
}

/// Emits `plan` over `vars` with `levels` arithmetic levels and returns the
/// children of its output AND.
pub fn emit_discriminator(
    b: &mut CircuitBuilder,
    vars: &[GateId],
    plan: &Discriminator,
    levels: usize,
) -> Result<Vec<GateId>> {
    let n = vars.len();
    match *plan {
        Discriminator::Digit { p, digit, pad, .. } => {
            let arith = esym_arith_circuit(n + pad, p.pow(digit) as usize, p, levels, DEFAULT_ARITH_CAP)?;
            let mut wires = vars.to_vec();
            let one = b.constant(true);
            wires.resize(n + pad, one);
            let bundles = emit_arith(b, &arith, &wires, p > 2)?;
            let root = bundles[arith.output][0];
            Ok(match b.gate(root) {
                Gate::And(ch) => ch.clone(),
                _ => vec![root],
            })
        }
        Discriminator::Threshold { theta, ones } => {
            if theta == 0 {
                return Ok(vec![b.constant(true)]);
            }
            let count = binomial(n as u64, theta as u64).unwrap_or(u64::MAX);
            if count > THRESHOLD_CAP {
                return Err(Error::SizeLimit(format!(
                    "threshold discriminator needs C({n}, {theta}) = {count} subsets (cap {THRESHOLD_CAP})"
                )));
            }
            let lits: Vec<GateId> = if ones {
                vars.to_vec()
            } else {
                vars.iter().map(|&x| b.not(x)).collect()
            };
            let mut terms = Vec::with_capacity(count as usize);
            for comp in compositions(theta, &vec![1; n]) {
                let sel: Vec<GateId> = comp.iter().zip(&lits).filter(|(&c, _)| c == 1).map(|(_, &l)| l).collect();
                terms.push(b.and(sel));
            }
            Ok(vec![b.or(terms)])
        }
    }
}

pub fn synth_discriminator(i: usize, j: usize, n: usize, params: &AccParams) -> Result<Circuit> {
    let plan = plan_discriminator(i, j, n, params)?;
    let mut b = CircuitBuilder::new(n);
    let vars = b.inputs();
    let ch = emit_discriminator(&mut b, &vars, &plan, params.levels())?;
    let out = b.and(ch);
    Ok(b.finish(out).gc())
}

/// `⋁_{g(i)=1} ⋀_{j≠i} D_{i,j}` over `vars`, with each discriminator's output
/// AND merged into the second layer.
pub fn emit_symmetric_acc(
    b: &mut CircuitBuilder,
    vars: &[GateId],
    companion: &[bool],
    params: &AccParams,
) -> Result<GateId> {
    let n = vars.len();
    if companion.len() != n + 1 {
        return Err(Error::Input(format!(
            "companion has length {}, expected {}",
            companion.len(),
            n + 1
        )));
    }
    if companion.iter().all(|&v| v) {
        return Ok(b.constant(true));
    }
    if companion.iter().all(|&v| !v) {
        return Ok(b.constant(false));
    }
    let mut cache: HashMap<Discriminator, Vec<GateId>> = HashMap::new();
    let mut clauses = Vec::new();
    for i in (0..=n).filter(|&i| companion[i]) {
        let mut conj = Vec::new();
        for j in (0..=n).filter(|&j| j != i) {
            let plan = plan_discriminator(i, j, n, params)?;
            if !cache.contains_key(&plan) {
                let ch = emit_discriminator(b, vars, &plan, params.levels())?;
                cache.insert(plan.clone(), ch);
            }
            conj.extend(&cache[&plan]);
        }
        clauses.push(b.and_folded(conj));
    }
    Ok(b.or(clauses))
}

pub fn synth_symmetric_acc(spec: &SymFnSpec, params: &AccParams) -> Result<Circuit> {
    let mut b = CircuitBuilder::new(spec.n);
    let vars = b.inputs();
    let out = emit_symmetric_acc(&mut b, &vars, &spec.companion, params)?;
    Ok(b.finish(out).gc())
}

/// `[|x|₁ ≡ 0 mod Π p^s]` as an AND of base-`p` digit-zero tests, each an
/// `e_{p^j}` arithmetic circuit converted to Boolean gates.
pub fn synth_modm_function(n: usize, plan: &[(u64, u32)], depth: usize) -> Result<Circuit> {
    if depth < 4 {
        return Err(Error::Param(format!(
            "depth budget {depth} is too small; the minimum feasible depth is 4"
        )));
    }
    let levels = (depth - 1) / 3;
    let mut b = CircuitBuilder::new(n);
    let vars = b.inputs();
    let mut tests = Vec::new();
    for (idx, &(p, s)) in plan.iter().enumerate() {
        if !is_prime(p) || plan[..idx].iter().any(|&(q, _)| q == p) {
            return Err(Error::Param(format!("digit plan prime {p} is not a distinct prime")));
        }
        for j in 0..s {
            let arith = esym_arith_circuit(n, p.pow(j) as usize, p, levels, DEFAULT_ARITH_CAP)?;
            let bundles = emit_arith(&mut b, &arith, &vars, p > 2)?;
            tests.push(b.not_folded(bundles[arith.output][0]));
        }
    }
    let out = b.and(tests);
    Ok(b.finish(out).gc())
}
