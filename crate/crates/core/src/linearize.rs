//! Turning an AND of MOD_b gates into a modulo-a weighted sum of MOD_b gates.
//!
//! For a prime `q | b` and `z ∈ Z_q^k`, the number of hyperplanes through
//! the origin containing `z` is `H_q = (q^k−1)/(q−1)` when `z = 0` and
//! `A_q = (q^{k−1}−1)/(q−1)` otherwise, so
//! `[z ≡ 0] = (q^{k−1})^{−1}·(Σ_H [z ∈ H] − A_q) mod a`.
//! The AND over all primes of `b` is the product of these expressions; each
//! product of one hyperplane indicator per prime is a single MOD_b test
//! whose weight vector is glued together by CRT.

use std::collections::HashMap;

use crate::arith::{crt_idempotent, gcd, is_square_free, mod_inv, mod_mul, prime_factors};
use crate::circuit::{Circuit, CircuitBuilder, Gate, GateId, ModGate, TermAccumulator};
use crate::error::{Error, Result};

/// The gate-independent part of a linearization: weight vectors over the
/// `k` inner sums and their coefficients modulo `a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperplaneExpansion {
    pub a: u64,
    pub b: u64,
    pub k: usize,
    /// `(q, H_q)` per prime factor of `b`.
    pub hyperplane_counts: Vec<(u64, u64)>,
    /// `(q, A_q)` per prime factor of `b`.
    pub offsets: Vec<(u64, u64)>,
    pub constant: u64,
    /// `(coefficient, weights)`; the indicator is `[Σ_j w_j z_j ≡ 0 mod b]`.
    pub terms: Vec<(u64, Vec<u64>)>,
}

impl HyperplaneExpansion {
    /// `constant + Σ coeff·[Σ w_j z_j ≡ 0 mod b]` reduced mod `a`.
    pub fn value(&self, z: &[u64]) -> u64 {
        let (a, b) = (self.a, self.b);
        self.terms.iter().fold(self.constant, |acc, (c, w)| {
            let s = w.iter().zip(z).fold(0, |s, (&wj, &zj)| (s + mod_mul(wj, zj, b)) % b);
            if s == 0 {
                (acc + c) % a
            } else {
                acc
            }
        })
    }
}

/// Normal vectors of the hyperplanes of `Z_q^k`: first nonzero coordinate 1,
/// in lexicographic order.
pub fn hyperplane_normals(q: u64, k: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for lead in 0..k {
        let free = k - lead - 1;
        let count = (q as usize).pow(free as u32);
        for idx in 0..count {
            let mut h = vec![0u64; k];
            h[lead] = 1;
            let mut r = idx;
            for j in (lead + 1..k).rev() {
                h[j] = (r % q as usize) as u64;
                r /= q as usize;
            }
            out.push(h);
        }
    }
    out
}

fn check_pair(a: u64, b: u64) -> Result<()> {
    if a < 2 || b < 2 {
        return Err(Error::Param(format!("moduli must be at least 2 (a={a}, b={b})")));
    }
    if gcd(a, b) != 1 {
        return Err(Error::Param(format!("outer modulus {a} and inner modulus {b} are not coprime")));
    }
    if !is_square_free(b) {
        return Err(Error::Param(format!("inner modulus {b} is not square-free")));
    }
    Ok(())
}

pub fn hyperplane_expansion(a: u64, b: u64, k: usize) -> Result<HyperplaneExpansion> {
    check_pair(a, b)?;
    let primes = prime_factors(b);
    let mut counts = Vec::new();
    let mut offsets = Vec::new();
    let mut scale = 1 % a;
    let mut normals = Vec::new();
    for &q in &primes {
        let qk1 = q.checked_pow(k.saturating_sub(1) as u32).ok_or_else(|| {
            Error::SizeLimit(format!("{q}^{} overflows", k.saturating_sub(1)))
        })?;
        let h = if k == 0 { 0 } else { (qk1 * q - 1) / (q - 1) };
        let off = if k == 0 { 0 } else { (qk1 - 1) / (q - 1) };
        counts.push((q, h));
        offsets.push((q, off));
        scale = mod_mul(scale, mod_inv(qk1 % a, a).expect("coprime"), a);
        normals.push(if k == 0 { Vec::new() } else { hyperplane_normals(q, k) });
    }
    if k == 0 {
        return Ok(HyperplaneExpansion {
            a,
            b,
            k,
            hyperplane_counts: counts,
            offsets,
            constant: 1 % a,
            terms: Vec::new(),
        });
    }
    let neg_off: Vec<u64> = offsets.iter().map(|&(_, o)| (a - o % a) % a).collect();
    let constant = neg_off.iter().fold(scale, |acc, &x| mod_mul(acc, x, a));
    let idem: Vec<u64> = primes.iter().map(|&q| crt_idempotent(q, b)).collect();

    // Odometer over per-prime choices: 0 = constant −A_q, i+1 = normal i.
    let mut terms = Vec::new();
    let mut choice = vec![0usize; primes.len()];
    loop {
        let mut carry = primes.len();
        while carry > 0 {
            carry -= 1;
            choice[carry] += 1;
            if choice[carry] <= normals[carry].len() {
                break;
            }
            choice[carry] = 0;
            if carry == 0 {
                return Ok(HyperplaneExpansion {
                    a,
                    b,
                    k,
                    hyperplane_counts: counts,
                    offsets,
                    constant,
                    terms,
                });
            }
        }
        let mut coeff = scale;
        let mut w = vec![0u64; k];
        for (qi, &c) in choice.iter().enumerate() {
            if c == 0 {
                coeff = mod_mul(coeff, neg_off[qi], a);
            } else {
                for (wj, &hj) in w.iter_mut().zip(&normals[qi][c - 1]) {
                    *wj = (*wj + mod_mul(idem[qi], hj, b)) % b;
                }
            }
        }
        if coeff != 0 {
            terms.push((coeff, w));
        }
    }
}

/// `Σ_j w_j·(shift_j + Σ mult·x)` as one MOD_b gate.
pub fn combine_forms(b: u64, weights: &[u64], gates: &[ModGate]) -> ModGate {
    let mut shift = 0;
    let mut inputs = Vec::new();
    for (&w, g) in weights.iter().zip(gates) {
        if w == 0 {
            continue;
        }
        shift = (shift + mod_mul(w, g.shift, b)) % b;
        inputs.extend(g.inputs.iter().map(|&(x, m)| (x, mod_mul(w, m, b))));
    }
    ModGate::new(b, shift, inputs).normalized()
}

/// An AND of MOD_b gates written as `constant + Σ coeff·term` modulo `a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearizationPlan {
    pub a: u64,
    pub b: u64,
    pub k: usize,
    pub constant: u64,
    pub terms: Vec<(u64, ModGate)>,
}

impl LinearizationPlan {
    /// Evaluates the modular sum given the values of the gates the term
    /// forms read.
    pub fn value(&self, input: impl Fn(GateId) -> bool) -> u64 {
        self.terms.iter().fold(self.constant, |acc, (c, g)| {
            if g.sum_with(&input) == 0 {
                (acc + c) % self.a
            } else {
                acc
            }
        })
    }
}

/// Linearizes `AND(gates)` where every gate has modulus `b`.
pub fn and_of_mods(a: u64, b: u64, gates: &[ModGate]) -> Result<LinearizationPlan> {
    let exp = hyperplane_expansion(a, b, gates.len())?;
    and_of_mods_with(&exp, gates)
}

/// As [`and_of_mods`] with a precomputed expansion.
pub fn and_of_mods_with(exp: &HyperplaneExpansion, gates: &[ModGate]) -> Result<LinearizationPlan> {
    if gates.len() != exp.k {
        return Err(Error::Param(format!(
            "expansion for {} gates applied to {}",
            exp.k,
            gates.len()
        )));
    }
    if let Some(g) = gates.iter().find(|g| g.modulus != exp.b) {
        return Err(Error::Shape(format!(
            "AND child has modulus {}, expected {} (lift it first)",
            g.modulus, exp.b
        )));
    }
    Ok(LinearizationPlan {
        a: exp.a,
        b: exp.b,
        k: exp.k,
        constant: exp.constant,
        terms: exp
            .terms
            .iter()
            .map(|(c, w)| (*c, combine_forms(exp.b, w, gates)))
            .collect(),
    })
}

/// Memoized expansions keyed by `(a, b, k)`.
#[derive(Default)]
pub struct ExpansionCache {
    map: HashMap<(u64, u64, usize), HyperplaneExpansion>,
}

impl ExpansionCache {
    pub fn get(&mut self, a: u64, b: u64, k: usize) -> Result<&HyperplaneExpansion> {
        if !self.map.contains_key(&(a, b, k)) {
            let e = hyperplane_expansion(a, b, k)?;
            self.map.insert((a, b, k), e);
        }
        Ok(&self.map[&(a, b, k)])
    }
}

/// `MOD_{m·u}` gate equivalent to `gate`.
pub fn lift_modulus(gate: &ModGate, u: u64) -> ModGate {
    assert!(u >= 1, "lift factor must be positive");
    ModGate::new(
        gate.modulus * u,
        gate.shift * u,
        gate.inputs.iter().map(|&(x, m)| (x, m * u)).collect(),
    )
}

/// `MOD_b(shift 1, {wire: b−1})`, which outputs the wire's own value.
pub fn boolean_var_as_mod(b: u64, wire: GateId) -> ModGate {
    ModGate::new(b, 1 % b, vec![(wire, b - 1)])
}

/// Replaces each selected AND gate by its linearization, merged into every
/// parent. Parents must be MOD_a gates and the AND's children MOD_b gates
/// for a single `b`.
pub fn absorb_and_layer(
    c: &Circuit,
    select: impl Fn(GateId, &Gate) -> bool,
    a: u64,
) -> Result<Circuit> {
    let selected: Vec<bool> = c
        .gates()
        .iter()
        .enumerate()
        .map(|(id, g)| matches!(g, Gate::And(_)) && select(id, g))
        .collect();
    if selected[c.output()] {
        return Err(Error::Shape(format!(
            "selected AND gate {} is the output and has no parent",
            c.output()
        )));
    }
    let mut b = CircuitBuilder::new(c.n());
    let mut map: Vec<GateId> = Vec::with_capacity(c.len());
    let mut plans: HashMap<GateId, (u64, Vec<(GateId, u64)>)> = HashMap::new();
    let mut cache = ExpansionCache::default();
    for (id, gate) in c.gates().iter().enumerate() {
        for parent_child in gate.children() {
            if selected[parent_child] && !matches!(gate, Gate::Mod(m) if m.modulus == a) {
                return Err(Error::Shape(format!(
                    "gate {id} reads selected AND {parent_child} but is not a MOD_{a} gate"
                )));
            }
        }
        let new_id = match gate {
            Gate::Input(i) => *i,
            Gate::And(children) if selected[id] => {
                let mut forms = Vec::with_capacity(children.len());
                for &ch in children {
                    match c.gates()[ch].as_mod() {
                        Some(g) => forms.push(g.clone()),
                        None => {
                            return Err(Error::Shape(format!(
                                "AND gate {id} has non-MOD child {ch}"
                            )))
                        }
                    }
                }
                let bm = forms.first().map(|g| g.modulus).unwrap_or(2);
                if let Some(g) = forms.iter().find(|g| g.modulus != bm) {
                    return Err(Error::Shape(format!(
                        "AND gate {id} mixes MOD_{bm} and MOD_{} children",
                        g.modulus
                    )));
                }
                let forms: Vec<ModGate> = forms
                    .iter()
                    .map(|g| ModGate::new(g.modulus, g.shift, g.inputs.iter().map(|&(x, m)| (map[x], m)).collect()))
                    .collect();
                let exp = cache.get(a, bm, forms.len())?;
                let plan = and_of_mods_with(exp, &forms)?;
                let mut acc = TermAccumulator::default();
                for (coeff, g) in plan.terms {
                    acc.add(g, coeff, a);
                }
                let wires = acc.emit(&mut b);
                plans.insert(id, (plan.constant, wires));
                usize::MAX
            }
            Gate::Mod(g) => {
                let mut shift = g.shift;
                let mut inputs = Vec::with_capacity(g.inputs.len());
                for &(x, mult) in &g.inputs {
                    match plans.get(&x) {
                        Some((constant, wires)) => {
                            shift = (shift + mod_mul(mult, *constant, a)) % a;
                            inputs.extend(wires.iter().map(|&(w, k)| (w, mod_mul(mult, k, a))));
                        }
                        None => inputs.push((map[x], mult)),
                    }
                }
                b.modulo(&ModGate::new(g.modulus, shift, inputs))
            }
            other => b.push(other.remap(|x| map[x])),
        };
        map.push(new_id);
    }
    Ok(b.finish(map[c.output()]).gc())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_z(b: u64, k: usize) -> impl Iterator<Item = Vec<u64>> {
        let total = b.pow(k as u32);
        (0..total).map(move |mut idx| {
            (0..k)
                .map(|_| {
                    let d = idx % b;
                    idx /= b;
                    d
                })
                .collect()
        })
    }

    #[test]
    fn hyperplane_counts() {
        assert_eq!(hyperplane_normals(3, 2), vec![vec![1, 0], vec![1, 1], vec![1, 2], vec![0, 1]]);
        for (q, k) in [(2u64, 3usize), (3, 3), (5, 2), (7, 1)] {
            assert_eq!(hyperplane_normals(q, k).len() as u64, (q.pow(k as u32) - 1) / (q - 1));
        }
    }

    #[test]
    fn two_three_pair() {
        let e = hyperplane_expansion(2, 3, 2).unwrap();
        assert_eq!(e.terms.len(), 4);
        assert_eq!(e.constant, 1);
        assert!(e.terms.iter().all(|(c, _)| *c == 1));
        for z in all_z(3, 2) {
            let want = z.iter().all(|&v| v == 0) as u64;
            assert_eq!(e.value(&z), want);
        }
    }

    #[test]
    fn single_gate_plan_is_identity() {
        for (a, b) in [(2u64, 3u64), (5, 6), (7, 30), (3, 10)] {
            let e = hyperplane_expansion(a, b, 1).unwrap();
            assert_eq!(e.constant, 0);
            assert_eq!(e.terms, vec![(1, vec![1])]);
        }
    }

    #[test]
    fn bad_pairs_rejected() {
        assert!(matches!(hyperplane_expansion(6, 3, 2), Err(Error::Param(_))));
        assert!(matches!(hyperplane_expansion(5, 12, 2), Err(Error::Param(_))));
        let e = hyperplane_expansion(5, 6, 0).unwrap();
        assert_eq!((e.constant, e.terms.len()), (1, 0));
    }

    #[test]
    fn exact_and_over_all_inner_sums() {
        for (a, b) in [(2u64, 3u64), (5, 6), (6, 5), (2, 15), (15, 2), (3, 10)] {
            for k in 1..=3 {
                let e = hyperplane_expansion(a, b, k).unwrap();
                assert!(e.terms.len() as u64 <= b.pow(k as u32) + 1);
                for z in all_z(b, k) {
                    let want = z.iter().all(|&v| v == 0) as u64;
                    assert_eq!(e.value(&z), want, "a={a} b={b} z={z:?}");
                }
            }
        }
    }

    #[test]
    fn lift_examples() {
        let g = ModGate::new(3, 0, vec![(0, 1)]);
        assert_eq!(lift_modulus(&g, 2), ModGate::new(6, 0, vec![(0, 2)]));
        assert_eq!(lift_modulus(&g, 1), g);
        let h = ModGate::new(2, 1, vec![(0, 1)]);
        let l = lift_modulus(&h, 3);
        assert_eq!(l, ModGate::new(6, 3, vec![(0, 3)]));
        for x in [false, true] {
            assert_eq!(h.sum_with(|_| x) == 0, l.sum_with(|_| x) == 0);
        }
    }

    #[test]
    fn variables_as_mod_gates_compose_with_and() {
        for b in [2u64, 5] {
            let g = boolean_var_as_mod(b, 0);
            assert_eq!(g.sum_with(|_| true) == 0, true);
            assert_eq!(g.sum_with(|_| false) == 0, false);
        }
        let vars: Vec<ModGate> = (0..3).map(|i| boolean_var_as_mod(5, i)).collect();
        let plan = and_of_mods(6, 5, &vars).unwrap();
        for x in 0u32..8 {
            let val = plan.value(|i| x >> i & 1 == 1);
            assert_eq!(val, (x == 7) as u64);
        }
    }

    #[test]
    fn absorb_middle_and() {
        // MOD_2 over AND(MOD_3(x0+x1), MOD_3(shift 1, x2·2)) plus x3.
        let mut b = CircuitBuilder::new(4);
        let g1 = b.push(Gate::Mod(ModGate::new(3, 0, vec![(0, 1), (1, 1)])));
        let g2 = b.push(Gate::Mod(ModGate::new(3, 1, vec![(2, 2)])));
        let and = b.and(vec![g1, g2]);
        let top = b.push(Gate::Mod(ModGate::new(2, 1, vec![(and, 1), (3, 1)])));
        let c = b.finish(top);
        let out = absorb_and_layer(&c, |_, _| true, 2).unwrap();
        assert!(out.gates().iter().all(|g| !matches!(g, Gate::And(_))));
        assert_eq!(out.depth(), 2);
        for x in 0u32..16 {
            let bits: Vec<bool> = (0..4).map(|i| x >> i & 1 == 1).collect();
            assert_eq!(out.evaluate(&bits).unwrap(), c.evaluate(&bits).unwrap());
        }
        let bad = b_with_or_parent();
        assert!(matches!(absorb_and_layer(&bad, |_, _| true, 2), Err(Error::Shape(_))));
    }

    fn b_with_or_parent() -> Circuit {
        let mut b = CircuitBuilder::new(2);
        let g = b.push(Gate::Mod(ModGate::new(3, 0, vec![(0, 1)])));
        let and = b.and(vec![g]);
        let or = b.or(vec![and, 1]);
        b.finish(or)
    }
}
