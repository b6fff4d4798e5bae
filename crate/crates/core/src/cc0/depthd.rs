use std::collections::HashMap;

use super::{compositions, emit_depth3, partition_ranges, Depth3Params, LinearSum, SymFnSpec};
use crate::arith::{iroot_ceil, iroot_floor, is_square_free, prime_factors};
use crate::circuit::{Circuit, CircuitBuilder, Gate, GateId, ModGate};
use crate::error::{Error, Result};
use crate::linearize::{and_of_mods_with, ExpansionCache};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DepthdOptions {
    /// Build each `(part, target)` subcircuit once per level and reuse it.
    pub share: bool,
}

fn check_modulus(m: u64, d: usize) -> Result<Vec<u64>> {
    if d < 3 {
        return Err(Error::Param(format!("depth must be at least 3, got {d}")));
    }
    if m < 2 || !is_square_free(m) {
        return Err(Error::Param(format!("modulus {m} is not square-free")));
    }
    let primes = prime_factors(m);
    if primes.len() < 2 {
        return Err(Error::Param(format!(
            "modulus {m} needs at least two distinct prime factors"
        )));
    }
    Ok(primes)
}

/// Output modulus at depth `d`: the smallest prime of `m` for odd `d`, the
/// second smallest for even `d`.
pub fn depthd_output_modulus(m: u64, d: usize) -> Result<u64> {
    let primes = check_modulus(m, d)?;
    Ok(if d % 2 == 1 { primes[0] } else { primes[1] })
}

/// Emits a depth-`d` circuit over `vars` for `companion` and returns its
/// 0/1-valued output sum (modulus given by [`depthd_output_modulus`]).
pub fn emit_depthd(
    b: &mut CircuitBuilder,
    vars: &[GateId],
    companion: &[bool],
    m: u64,
    d: usize,
    opts: DepthdOptions,
) -> Result<LinearSum> {
    let primes = check_modulus(m, d)?;
    let n = vars.len();
    let r = primes.len() as u32;
    if d == 3 {
        let params = Depth3Params {
            outer: primes[0],
            inner_primes: primes[1..].to_vec(),
            t: (iroot_floor(n as u64, r) as usize).max(1),
        };
        return emit_depth3(b, vars, companion, &params);
    }
    let a = depthd_output_modulus(m, d)?;
    let inner = depthd_output_modulus(m, d - 1)?;
    let t = (iroot_ceil(n as u64, r + d as u32 - 3) as usize).max(1);
    let ranges = partition_ranges(n, t);
    let sizes: Vec<usize> = ranges.iter().map(|r| r.len()).collect();
    let mut cache = ExpansionCache::default();
    let mut memo: HashMap<(usize, usize), ModGate> = HashMap::new();
    let mut sum = LinearSum::constant(a, 0);
    for (target, &on) in companion.iter().enumerate() {
        if !on {
            continue;
        }
        for comp in compositions(target, &sizes) {
            let mut forms = Vec::with_capacity(comp.len());
            for (j, &tj) in comp.iter().enumerate() {
                if let Some(g) = memo.get(&(j, tj)) {
                    forms.push(g.clone());
                    continue;
                }
                let part = &vars[ranges[j].clone()];
                let exact = SymFnSpec::exact(part.len(), tj);
                let child = emit_depthd(b, part, &exact.companion, m, d - 1, opts)?.output_gate();
                if opts.share {
                    memo.insert((j, tj), child.clone());
                }
                forms.push(child);
            }
            let lin = and_of_mods_with(cache.get(a, inner, forms.len())?, &forms)?;
            sum.constant = (sum.constant + lin.constant) % a;
            for (c, g) in lin.terms {
                let id = b.push(Gate::Mod(g));
                sum.terms.push((id, c));
            }
        }
    }
    Ok(sum)
}

pub fn synth_depthd(spec: &SymFnSpec, m: u64, d: usize, opts: DepthdOptions) -> Result<Circuit> {
    let mut b = CircuitBuilder::new(spec.n);
    let vars = b.inputs();
    let sum = emit_depthd(&mut b, &vars, &spec.companion, m, d, opts)?;
    let out = sum.emit(&mut b);
    Ok(b.finish(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cc0::synth_depth3_with;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check_all(c: &Circuit, spec: &SymFnSpec) {
        for x in 0u32..1 << spec.n {
            let bits: Vec<bool> = (0..spec.n).map(|i| x >> i & 1 == 1).collect();
            assert_eq!(c.evaluate(&bits).unwrap(), spec.eval(&bits), "x={x:b}");
        }
    }

    fn output_modulus(c: &Circuit) -> u64 {
        c.gates()[c.output()].as_mod().unwrap().modulus
    }

    #[test]
    fn depth_four_majority() {
        let spec = SymFnSpec::majority(9);
        let c = synth_depthd(&spec, 15, 4, DepthdOptions::default()).unwrap();
        check_all(&c, &spec);
        assert_eq!(c.depth(), 4);
        assert_eq!(output_modulus(&c), 5);
    }

    #[test]
    fn depth_three_is_the_base_construction() {
        let spec = SymFnSpec::majority(8);
        let c = synth_depthd(&spec, 15, 3, DepthdOptions::default()).unwrap();
        let params = Depth3Params { outer: 3, inner_primes: vec![5], t: 2 };
        assert_eq!(c, synth_depth3_with(&spec, &params).unwrap());
    }

    #[test]
    fn depth_five_random_companions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..3 {
            let spec = SymFnSpec::random(8, &mut rng);
            for share in [false, true] {
                let c = synth_depthd(&spec, 30, 5, DepthdOptions { share }).unwrap();
                check_all(&c, &spec);
                assert_eq!(c.depth(), 5);
                assert_eq!(output_modulus(&c), 2);
            }
        }
    }

    #[test]
    fn parameter_errors() {
        let spec = SymFnSpec::majority(4);
        assert!(synth_depthd(&spec, 12, 4, DepthdOptions::default()).is_err());
        assert!(synth_depthd(&spec, 7, 4, DepthdOptions::default()).is_err());
        assert!(synth_depthd(&spec, 15, 2, DepthdOptions::default()).is_err());
    }
}
