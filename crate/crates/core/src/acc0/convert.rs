use std::collections::HashSet;

use super::arith_circuit::{ArithCircuit, ArithGate};
use crate::arith::{binomial_mod, factorize, mod_mul, mod_pow, primitive_root};
use crate::circuit::{Circuit, CircuitBuilder, Gate, GateId, ModGate, TermAccumulator};
use crate::error::{Error, Result};
use crate::linearize::{and_of_mods_with, boolean_var_as_mod, ExpansionCache};

/// Wires `b_0..b_{p−1}` of one field value: `b_0 = [y ≠ 0]`, `b_i = [y = i]`.
pub type Bundle = Vec<GateId>;

/// Discrete logarithms base the smallest primitive root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldEnc {
    pub p: u64,
    pub generator: u64,
    /// `log[i]` for `i = 1..p−1`; `log[0]` is unused.
    pub log: Vec<u64>,
}

impl FieldEnc {
    pub fn new(p: u64) -> Result<Self> {
        let generator = primitive_root(p)?;
        let mut log = vec![0; p as usize];
        let mut x = 1;
        for e in 0..p.saturating_sub(1) {
            log[x as usize] = e;
            x = x * generator % p;
        }
        Ok(FieldEnc { p, generator, log })
    }

    pub fn exp(&self, e: u64) -> u64 {
        mod_pow(self.generator, e, self.p)
    }
}

/// Binomial coefficients of `(1+z)^e − 1` truncated at degree `k`, mod `q`.
fn shifted_binomial_row(e: u64, k: usize, q: u64) -> Vec<u64> {
    (0..=k)
        .map(|i| if i == 0 { 0 } else { binomial_mod(e, i as u64, q) })
        .collect()
}

fn truncated_mul(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let k = a.len() - 1;
    let mut out = vec![0; k + 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(k + 1 - i) {
            out[i + j] = (out[i + j] + x * y) % q;
        }
    }
    out
}

fn absorbable_form(b: &CircuitBuilder, id: GateId, p: u64) -> Option<ModGate> {
    match b.gate(id) {
        Gate::Input(_) => Some(boolean_var_as_mod(p, id)),
        Gate::Mod(g) if g.modulus == p => Some(g.clone()),
        _ => None,
    }
}

/// Replaces a `MOD_{p−1}` gate by the zero tests of the base-`q` digits of its
/// count for every prime power `q^e ∥ p−1`. Each test is a `MOD_q` gate over
/// AND monomials, with monomials of `MOD_p` gates and inputs linearized into
/// `MOD_p` terms. The original gate equals the AND of the returned gates.
pub fn digit_tests(
    b: &mut CircuitBuilder,
    g: &ModGate,
    p: u64,
    cache: &mut ExpansionCache,
) -> Result<Vec<GateId>> {
    let big_q = g.modulus;
    let mut sigma = g.shift % big_q;
    let mut wires: Vec<(GateId, u64)> = Vec::new();
    for &(id, mult) in &g.normalized().inputs {
        match b.const_value(id) {
            Some(true) => sigma = (sigma + mult) % big_q,
            Some(false) => {}
            None => wires.push((id, mult)),
        }
    }
    if wires.is_empty() {
        return Ok(vec![b.constant(sigma == 0)]);
    }
    let mut tests = Vec::new();
    for (q, e) in factorize(big_q) {
        for j in 0..e {
            let k = q.pow(j) as usize;
            let rows: Vec<Vec<u64>> = wires.iter().map(|&(_, l)| shifted_binomial_row(l, k, q)).collect();
            let pad: Vec<u64> = (0..=k).map(|i| binomial_mod(sigma, i as u64, q)).collect();
            let mut monomials: Vec<(Vec<GateId>, u64)> = Vec::new();
            let mut stack: Vec<(usize, Vec<usize>, Vec<u64>)> = Vec::new();
            let mut unit = vec![0; k + 1];
            unit[0] = 1;
            stack.push((0, Vec::new(), unit));
            while let Some((next, chosen, prod)) = stack.pop() {
                if !chosen.is_empty() {
                    let coef = (0..=k).fold(0, |acc, i| (acc + prod[i] * pad[k - i]) % q);
                    if coef != 0 {
                        monomials.push((chosen.iter().map(|&c| wires[c].0).collect(), coef));
                    }
                }
                if chosen.len() == k {
                    continue;
                }
                for c in next..wires.len() {
                    let mut ch = chosen.clone();
                    ch.push(c);
                    stack.push((c + 1, ch, truncated_mul(&prod, &rows[c], q)));
                }
            }
            let mut shift = pad[k];
            let mut inputs = Vec::new();
            let mut acc = TermAccumulator::default();
            for (mono, coef) in monomials {
                if mono.len() == 1 {
                    inputs.push((mono[0], coef));
                    continue;
                }
                let forms: Option<Vec<ModGate>> = mono.iter().map(|&y| absorbable_form(b, y, p)).collect();
                match forms {
                    Some(forms) => {
                        let plan = and_of_mods_with(cache.get(q, p, forms.len())?, &forms)?;
                        shift = (shift + mod_mul(coef, plan.constant, q)) % q;
                        for (c, t) in plan.terms {
                            acc.add(t, mod_mul(coef, c, q), q);
                        }
                    }
                    None => {
                        let a = b.and(mono);
                        inputs.push((a, coef));
                    }
                }
            }
            inputs.extend(acc.emit(b));
            tests.push(b.modulo_folded(&ModGate::new(q, shift, inputs)));
        }
    }
    Ok(tests)
}

/// Emits the bundles of every gate of `c` with variables read from `vars`.
/// With `eliminate`, the `MOD_{p−1}` gates of `×` gadgets are replaced by
/// [`digit_tests`] flattened into the gadget's AND.
pub fn emit_arith(
    b: &mut CircuitBuilder,
    c: &ArithCircuit,
    vars: &[GateId],
    eliminate: bool,
) -> Result<Vec<Bundle>> {
    let p = c.p;
    let enc = FieldEnc::new(p)?;
    let mut cache = ExpansionCache::default();
    let mut bundles: Vec<Bundle> = Vec::with_capacity(c.gates.len());
    for g in &c.gates {
        let bundle = match g {
            ArithGate::Var(i) => {
                let x = vars[*i];
                let mut bs = vec![x, x];
                if p > 2 {
                    let zero = b.constant(false);
                    bs.resize(p as usize, zero);
                }
                bs
            }
            ArithGate::Const(v) => {
                let mut bs = vec![b.constant(*v != 0)];
                for i in 1..p.max(2) {
                    bs.push(b.constant(i == *v));
                }
                bs
            }
            ArithGate::Plus(ch) if p == 2 => {
                let form: Vec<(GateId, u64)> = ch.iter().map(|&x| (bundles[x][1], 1)).collect();
                let v = b.modulo_folded(&ModGate::new(2, 1, form));
                vec![v, v]
            }
            ArithGate::Times(ch) if p == 2 => {
                let v = b.and_folded(ch.iter().map(|&x| bundles[x][0]).collect());
                vec![v, v]
            }
            ArithGate::Plus(ch) => {
                let form: Vec<(GateId, u64)> = ch
                    .iter()
                    .flat_map(|&x| (1..p).map(move |i| (x, i)))
                    .map(|(x, i)| (bundles[x][i as usize], i))
                    .collect();
                let zero = b.modulo_folded(&ModGate::new(p, 0, form.clone()));
                let mut bs = vec![b.not_folded(zero)];
                for i in 1..p {
                    bs.push(b.modulo_folded(&ModGate::new(p, p - i, form.clone())));
                }
                bs
            }
            ArithGate::Times(ch) => {
                let q = p - 1;
                let nonzero: Vec<GateId> = ch.iter().map(|&x| bundles[x][0]).collect();
                let weights: Vec<(GateId, u64)> = ch
                    .iter()
                    .flat_map(|&x| (2..p).map(move |i| (x, i)))
                    .map(|(x, i)| (bundles[x][i as usize], enc.log[i as usize]))
                    .collect();
                let mut bs = vec![b.and_folded(nonzero.clone())];
                for i in 1..p {
                    let gi = ModGate::new(q, (q - enc.log[i as usize]) % q, weights.clone());
                    let mut conj = if eliminate {
                        digit_tests(b, &gi, p, &mut cache)?
                    } else {
                        vec![b.modulo_folded(&gi)]
                    };
                    conj.extend(&nonzero);
                    bs.push(b.and_folded(conj));
                }
                bs
            }
        };
        bundles.push(bundle);
    }
    Ok(bundles)
}

/// Boolean circuit for an arithmetic circuit, with every gate's bundle.
#[derive(Clone, Debug)]
pub struct BooleanConversion {
    pub circuit: Circuit,
    pub bundles: Vec<Bundle>,
}

/// Converts `c` gate by gate; the output is the root's `b_0` wire, which
/// equals the arithmetic output on 0/1-valued circuits.
pub fn arith_to_boolean(c: &ArithCircuit) -> Result<BooleanConversion> {
    let mut b = CircuitBuilder::new(c.n);
    let vars = b.inputs();
    let bundles = emit_arith(&mut b, c, &vars, false)?;
    let out = bundles[c.output][0];
    Ok(BooleanConversion {
        circuit: b.finish(out),
        bundles,
    })
}

/// Removes every `MOD_{p−1}` gate of `c` via [`digit_tests`]; the resulting
/// digit-test ANDs are flattened into AND parents. Every prime of `p−1` must
/// divide `m`.
pub fn eliminate_modpm1(c: &Circuit, p: u64, m: u64) -> Result<Circuit> {
    if p < 3 {
        return Ok(c.clone());
    }
    for (q, _) in factorize(p - 1) {
        if m % q != 0 {
            return Err(Error::Param(format!(
                "prime {q} of {} does not divide modulus {m}",
                p - 1
            )));
        }
    }
    let mut b = CircuitBuilder::new(c.n());
    let mut cache = ExpansionCache::default();
    let mut map: Vec<GateId> = Vec::with_capacity(c.len());
    let mut expanded: Vec<Option<Vec<GateId>>> = Vec::with_capacity(c.len());
    let mut flattenable: HashSet<GateId> = HashSet::new();
    for gate in c.gates() {
        let (id, tests) = match gate {
            Gate::Input(i) => (*i, None),
            Gate::Const(v) => (b.constant(*v), None),
            Gate::Mod(g) if g.modulus == p - 1 => {
                let g = ModGate::new(g.modulus, g.shift, g.inputs.iter().map(|&(x, w)| (map[x], w)).collect());
                let tests = digit_tests(&mut b, &g, p, &mut cache)?;
                if tests.len() == 1 {
                    (tests[0], None)
                } else {
                    let a = b.and(tests.clone());
                    flattenable.insert(a);
                    (a, Some(tests))
                }
            }
            Gate::And(ch) => {
                let mut inputs = Vec::with_capacity(ch.len());
                for &x in ch {
                    match &expanded[x] {
                        Some(tests) => inputs.extend(tests),
                        None => inputs.push(map[x]),
                    }
                }
                (b.and(inputs), None)
            }
            other => (b.push(other.remap(|x| map[x])), None),
        };
        map.push(id);
        expanded.push(tests);
    }
    let out = map[c.output()];
    Ok(b.finish(out).gc())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acc0::esym_arith_circuit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bits(x: u32, n: usize) -> Vec<bool> {
        (0..n).map(|i| x >> i & 1 == 1).collect()
    }

    #[test]
    fn field_logs() {
        let e = FieldEnc::new(7).unwrap();
        assert_eq!(e.generator, 3);
        for i in 1..7u64 {
            assert_eq!(e.exp(e.log[i as usize]), i);
        }
    }

    #[test]
    fn times_gadget_of_constants() {
        let gates = vec![
            ArithGate::Var(0),
            ArithGate::Const(2),
            ArithGate::Const(3),
            ArithGate::Times(vec![1, 2]),
            ArithGate::Plus(vec![3, 0]),
            ArithGate::Times(vec![4]),
        ];
        let c = ArithCircuit::new(5, 1, gates, 5).unwrap();
        assert_eq!(FieldEnc::new(5).unwrap().log, vec![0, 0, 1, 3, 2]);
        let conv = arith_to_boolean(&c).unwrap();
        for x in [false, true] {
            let v = conv.circuit.evaluate_all(&[x]).unwrap();
            let got: Vec<bool> = conv.bundles[3].iter().map(|&w| v[w]).collect();
            assert_eq!(got, vec![true, true, false, false, false]);
        }
    }

    #[test]
    fn bundles_are_well_formed_and_faithful() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let p = [2u64, 3, 5, 7][rng.gen_range(0..4)];
            let n = rng.gen_range(1..=5);
            let c = ArithCircuit::random(p, n, rng.gen_range(2..=6), &mut rng).unwrap();
            let conv = arith_to_boolean(&c).unwrap();
            for x in 0u32..1 << n {
                let xb = bits(x, n);
                let xs: Vec<u64> = xb.iter().map(|&v| v as u64).collect();
                let vals = conv.circuit.evaluate_all(&xb).unwrap();
                let arith = c.evaluate_all(&xs);
                for (gid, bundle) in conv.bundles.iter().enumerate() {
                    let y = arith[gid];
                    assert_eq!(vals[bundle[0]], y != 0);
                    for i in 1..p as usize {
                        assert_eq!(vals[bundle[i]], y == i as u64, "p={p} gate {gid}");
                    }
                }
                assert_eq!(conv.circuit.evaluate(&xb).unwrap(), c.evaluate(&xs) == 1);
            }
        }
    }

    #[test]
    fn depth_is_three_per_level() {
        for p in [2u64, 3, 5, 7] {
            for levels in 1..=2 {
                let c = esym_arith_circuit(8, 3, p, levels, 1 << 20).unwrap();
                let conv = arith_to_boolean(&c).unwrap().circuit.gc();
                assert!(conv.depth() <= 3 * levels, "p={p} levels={levels} depth={}", conv.depth());
            }
        }
    }

    #[test]
    fn digit_tests_match_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(p, m) in &[(7u64, 42u64), (5, 30), (3, 6), (13, 78)] {
            for _ in 0..25 {
                let n = rng.gen_range(1..=5);
                let q = p - 1;
                let fanin = rng.gen_range(1..=5.min(n));
                let inputs: Vec<(GateId, u64)> = (0..fanin).map(|_| (rng.gen_range(0..n), rng.gen_range(1..q))).collect();
                let mut gates: Vec<Gate> = (0..n).map(Gate::Input).collect();
                gates.push(Gate::Mod(ModGate::new(q, rng.gen_range(0..q), inputs)));
                let c = Circuit::new(n, gates, n).unwrap();
                let e = eliminate_modpm1(&c, p, m).unwrap();
                // MOD_2 survives only where it is itself the digit test of p − 1 = 2
                assert!(e.moduli().iter().all(|&r| m % r == 0 && (r != q || q == 2)));
                for x in 0u32..1 << n {
                    assert_eq!(e.evaluate(&bits(x, n)).unwrap(), c.evaluate(&bits(x, n)).unwrap());
                }
            }
        }
    }

    #[test]
    fn eliminated_conversion_keeps_depth() {
        for p in [5u64, 7] {
            let c = esym_arith_circuit(7, 2, p, 2, 1 << 20).unwrap();
            let plain = arith_to_boolean(&c).unwrap().circuit;
            let e = eliminate_modpm1(&plain, p, 30 * 7).unwrap();
            assert!(e.moduli().iter().all(|&r| r != p - 1));
            assert!(e.depth() <= 6);
            let mut b = CircuitBuilder::new(7);
            let vars = b.inputs();
            let bundles = emit_arith(&mut b, &c, &vars, true).unwrap();
            let inline = b.finish(bundles[c.output][0]).gc();
            assert!(inline.depth() <= 6);
            for x in 0u32..1 << 7 {
                let want = (x.count_ones() as u64 * (x.count_ones() as u64).saturating_sub(1) / 2) % p != 0;
                assert_eq!(e.evaluate(&bits(x, 7)).unwrap(), want);
                assert_eq!(inline.evaluate(&bits(x, 7)).unwrap(), want);
            }
        }
    }

    #[test]
    fn bad_modulus_names_prime() {
        let gates = vec![Gate::Input(0), Gate::Mod(ModGate::new(6, 1, vec![(0, 1)]))];
        let c = Circuit::new(1, gates, 1).unwrap();
        let err = eliminate_modpm1(&c, 7, 14).unwrap_err().to_string();
        assert!(err.contains('3'), "{err}");
    }
}
