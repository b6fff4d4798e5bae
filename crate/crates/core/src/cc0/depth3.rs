use std::collections::HashMap;

use super::{compositions, partition_ranges, LinearSum, SymFnSpec};
use crate::arith::{first_odd_primes, iroot_ceil, iroot_floor, is_prime, mod_mul};
use crate::circuit::{Circuit, CircuitBuilder, Gate, GateId, ModGate, TermAccumulator};
use crate::error::{Error, Result};
use crate::linearize::{and_of_mods_with, boolean_var_as_mod, ExpansionCache};
use crate::sympoly::{emaj_poly, make_emaj_plan};

/// Shape of a `MOD_outer ∘ MOD_inner ∘ MOD_outer` construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Depth3Params {
    pub outer: u64,
    pub inner_primes: Vec<u64>,
    /// Number of parts the inputs are split into.
    pub t: usize,
}

impl Depth3Params {
    /// Outer prime 2, the first `k−1` odd primes inside, `⌊n^{1/k}⌋` parts.
    pub fn for_k(n: usize, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Param(format!("k must be at least 2, got {k}")));
        }
        Ok(Depth3Params {
            outer: 2,
            inner_primes: first_odd_primes(k - 1),
            t: (iroot_floor(n as u64, k as u32) as usize).max(1),
        })
    }

    /// Outer prime 5, inner modulus 6, `⌈n^{1/3}⌉` parts.
    pub fn preset31(n: usize) -> Self {
        Depth3Params {
            outer: 5,
            inner_primes: vec![2, 3],
            t: (iroot_ceil(n as u64, 3) as usize).max(1),
        }
    }

    pub fn inner_modulus(&self) -> u64 {
        self.inner_primes.iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.outer) {
            return Err(Error::Param(format!("outer modulus {} is not prime", self.outer)));
        }
        if self.inner_primes.is_empty() || self.inner_primes.contains(&self.outer) {
            return Err(Error::Param(format!(
                "inner primes {:?} must be non-empty and avoid the outer prime {}",
                self.inner_primes, self.outer
            )));
        }
        Ok(())
    }
}

/// `MOD_p` gate equal to a variable's value. A NOT gate over a wire is
/// read through: `[u ≡ 0 mod p]` is its complement.
fn literal_gate(b: &CircuitBuilder, p: u64, v: GateId) -> ModGate {
    match b.gate(v) {
        Gate::Not(u) => ModGate::new(p, 0, vec![(*u, 1)]),
        _ => boolean_var_as_mod(p, v),
    }
}

/// Linear form over fresh bottom MOD_outer gates whose MOD_inner test is
/// `[|x_part|₁ = target]`.
fn emit_block(
    b: &mut CircuitBuilder,
    cache: &mut ExpansionCache,
    vars: &[GateId],
    target: usize,
    params: &Depth3Params,
) -> Result<ModGate> {
    let (p, mi) = (params.outer, params.inner_modulus());
    let plan = make_emaj_plan(vars.len(), target, &params.inner_primes)?;
    let poly = emaj_poly(&plan)?;
    let mut shift = 0;
    let mut acc = TermAccumulator::default();
    for (mono, kappa) in poly.monomials() {
        if mono.is_empty() {
            shift = (shift + kappa) % mi;
            continue;
        }
        let forms: Vec<ModGate> = mono.iter().map(|&i| literal_gate(b, p, vars[i])).collect();
        let lin = and_of_mods_with(cache.get(mi, p, forms.len())?, &forms)?;
        shift = (shift + mod_mul(kappa, lin.constant, mi)) % mi;
        for (c, g) in lin.terms {
            acc.add(g, mod_mul(kappa, c, mi), mi);
        }
    }
    let wires = acc.emit(b);
    Ok(ModGate::new(mi, shift, wires))
}

/// Emits the two lower layers of the depth-3 construction over `vars` and
/// returns the 0/1-valued outer sum equal to `companion[|x|₁]`.
pub fn emit_depth3(
    b: &mut CircuitBuilder,
    vars: &[GateId],
    companion: &[bool],
    params: &Depth3Params,
) -> Result<LinearSum> {
    params.validate()?;
    if companion.len() != vars.len() + 1 {
        return Err(Error::Param(format!(
            "companion of length {} for {} variables",
            companion.len(),
            vars.len()
        )));
    }
    let (p, mi) = (params.outer, params.inner_modulus());
    let ranges = partition_ranges(vars.len(), params.t);
    let sizes: Vec<usize> = ranges.iter().map(|r| r.len()).collect();
    let mut cache = ExpansionCache::default();
    let mut blocks: HashMap<(usize, usize), ModGate> = HashMap::new();
    let mut sum = LinearSum::constant(p, 0);
    for (target, &on) in companion.iter().enumerate() {
        if !on {
            continue;
        }
        for comp in compositions(target, &sizes) {
            let mut forms = Vec::with_capacity(comp.len());
            for (j, &tj) in comp.iter().enumerate() {
                if !blocks.contains_key(&(j, tj)) {
                    let g = emit_block(b, &mut cache, &vars[ranges[j].clone()], tj, params)?;
                    blocks.insert((j, tj), g);
                }
                forms.push(blocks[&(j, tj)].clone());
            }
            let lin = and_of_mods_with(cache.get(p, mi, forms.len())?, &forms)?;
            sum.constant = (sum.constant + lin.constant) % p;
            for (c, g) in lin.terms {
                let id = b.push(Gate::Mod(g));
                sum.terms.push((id, c));
            }
        }
    }
    Ok(sum)
}

pub fn synth_depth3_with(spec: &SymFnSpec, params: &Depth3Params) -> Result<Circuit> {
    let mut b = CircuitBuilder::new(spec.n);
    let vars = b.inputs();
    let sum = emit_depth3(&mut b, &vars, &spec.companion, params)?;
    let out = sum.emit(&mut b);
    Ok(b.finish(out))
}

/// `MOD_2 ∘ MOD_{m′} ∘ MOD_2` with `m′` the product of the first `k−1` odd primes.
pub fn synth_depth3(spec: &SymFnSpec, k: usize) -> Result<Circuit> {
    synth_depth3_with(spec, &Depth3Params::for_k(spec.n, k)?)
}

/// `MOD_5 ∘ MOD_6 ∘ MOD_5`.
pub fn synth_depth3_preset31(spec: &SymFnSpec) -> Result<Circuit> {
    synth_depth3_with(spec, &Depth3Params::preset31(spec.n))
}

/// `MOD_{m′} ∘ AND` computing `[|x|₁ = target]` on `v` inputs.
pub fn synth_emaj_depth2(v: usize, target: usize, primes: &[u64]) -> Result<Circuit> {
    let mut b = CircuitBuilder::new(v);
    if target > v {
        let m = primes.iter().product::<u64>().max(2);
        let out = b.push(Gate::Mod(ModGate::new(m, 1, Vec::new())));
        return Ok(b.finish(out));
    }
    let plan = make_emaj_plan(v, target, primes)?;
    let poly = emaj_poly(&plan)?;
    let mut shift = 0;
    let mut inputs = Vec::new();
    for (mono, c) in poly.monomials() {
        if mono.is_empty() {
            shift = c;
        } else {
            let g = b.and(mono);
            inputs.push((g, c));
        }
    }
    let out = b.push(Gate::Mod(ModGate::new(plan.modulus, shift, inputs)));
    Ok(b.finish(out))
}

/// The depth-5 form before AND absorption: outer sum over ANDs of EMAJ
/// MOD_{inner} gates over monomial ANDs of variables viewed as MOD_{outer} gates.
pub fn depth3_unabsorbed(spec: &SymFnSpec, params: &Depth3Params) -> Result<Circuit> {
    params.validate()?;
    let (p, mi) = (params.outer, params.inner_modulus());
    let mut b = CircuitBuilder::new(spec.n);
    let var_gates: Vec<GateId> = (0..spec.n)
        .map(|i| b.push(Gate::Mod(boolean_var_as_mod(p, i))))
        .collect();
    let ranges = partition_ranges(spec.n, params.t);
    let sizes: Vec<usize> = ranges.iter().map(|r| r.len()).collect();
    let mut blocks: HashMap<(usize, usize), GateId> = HashMap::new();
    let mut top = Vec::new();
    for (target, &on) in spec.companion.iter().enumerate() {
        if !on {
            continue;
        }
        for comp in compositions(target, &sizes) {
            let mut children = Vec::new();
            for (j, &tj) in comp.iter().enumerate() {
                if !blocks.contains_key(&(j, tj)) {
                    let vars = &var_gates[ranges[j].clone()];
                    let poly = emaj_poly(&make_emaj_plan(vars.len(), tj, &params.inner_primes)?)?;
                    let mut shift = 0;
                    let mut inputs = Vec::new();
                    for (mono, c) in poly.monomials() {
                        if mono.is_empty() {
                            shift = c;
                        } else {
                            let g = b.and(mono.iter().map(|&i| vars[i]).collect());
                            inputs.push((g, c));
                        }
                    }
                    let g = b.push(Gate::Mod(ModGate::new(mi, shift, inputs)));
                    blocks.insert((j, tj), g);
                }
                children.push(blocks[&(j, tj)]);
            }
            top.push(b.and(children));
        }
    }
    let out = LinearSum {
        modulus: p,
        constant: 0,
        terms: top.into_iter().map(|g| (g, 1)).collect(),
    }
    .emit(&mut b);
    Ok(b.finish(out))
}
