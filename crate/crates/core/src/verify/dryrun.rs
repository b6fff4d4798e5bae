use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{mod_inv, mod_mul, mod_pow, prime_factors};
use crate::cc0::{partition_ranges, Depth3Params, SymFnSpec};
use crate::error::{Error, Result};
use crate::sympoly::make_emaj_plan;

/// Exact gate and wire counts of a depth-3 construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DryRunCount {
    pub gates: BigUint,
    pub wires: BigUint,
}

pub fn count_depth3(spec: &SymFnSpec, k: usize) -> Result<DryRunCount> {
    count_depth3_with(spec, &Depth3Params::for_k(spec.n, k)?)
}

/// Ways to pick weights `≤ sizes[i]` per part, indexed by total weight.
fn box_product(sizes: &[usize]) -> Vec<BigUint> {
    let mut poly = vec![BigUint::one()];
    for &s in sizes {
        let mut next = vec![BigUint::zero(); poly.len() + s];
        let mut window = BigUint::zero();
        for (z, slot) in next.iter_mut().enumerate() {
            if z < poly.len() {
                window += &poly[z];
            }
            if z > s {
                window -= &poly[z - s - 1];
            }
            *slot = window.clone();
        }
        poly = next;
    }
    poly
}

fn pascal_mod(n: usize, m: u64) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![1 % m; i + 1];
        for j in 1..i {
            row[j] = (rows[i - 1][j - 1] + rows[i - 1][j]) % m;
        }
        rows.push(row);
    }
    rows
}

fn binomial_row(n: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for k in 1..=n {
        let next = &row[k - 1] * BigUint::from(n - k + 1) / BigUint::from(k);
        row.push(next);
    }
    row
}

/// Per-size data of the bottom layer for part size `s`.
struct SizeTables {
    pascal: Vec<Vec<u64>>,
    /// `C(s,w)·(p−1)^{w−1}`: bottom gates with support size `w`.
    gates_by_support: Vec<BigUint>,
    /// Total wires of those gates.
    wires_by_support: Vec<BigUint>,
}

impl SizeTables {
    fn new(s: usize, p: u64, mi: u64) -> Self {
        let binom = binomial_row(s);
        let pm1 = BigUint::from(p - 1);
        let mut gates_by_support = vec![BigUint::zero(); s + 1];
        let mut wires_by_support = vec![BigUint::zero(); s + 1];
        for w in 1..=s {
            let g = &binom[w] * pm1.pow(w as u32 - 1);
            // (p−1)^w for the leading coordinate plus (w−1)·(p−1)^{w−2}·Σ_{h=1}^{p−1}(p−h)
            let mut wires = pm1.pow(w as u32);
            if w >= 2 {
                wires += BigUint::from(w - 1) * pm1.pow(w as u32 - 2) * BigUint::from(p * (p - 1) / 2);
            }
            wires_by_support[w] = &binom[w] * wires;
            gates_by_support[w] = g;
        }
        SizeTables {
            pascal: pascal_mod(s, mi),
            gates_by_support,
            wires_by_support,
        }
    }
}

/// Bottom-gate weights `agg(w)` mod `mi` of the block `[|x_part|₁ = target]`
/// for every support size `w ≥ 1`.
fn block_weights(s: usize, target: usize, params: &Depth3Params, tables: &SizeTables) -> Result<Vec<u64>> {
    let mi = params.inner_modulus();
    let plan = make_emaj_plan(s, target, &params.inner_primes)?;
    let values: Vec<u64> = (0..=s)
        .map(|w| {
            plan.primes.iter().enumerate().fold(0, |acc, (i, &q)| {
                let r = q.pow(plan.exponents[i]) as usize;
                if w % r != target % r {
                    (acc + plan.crt_coefficients[i]) % mi
                } else {
                    acc
                }
            })
        })
        .collect();
    let kappa: Vec<u64> = (0..=s)
        .map(|k| {
            (0..=k).fold(0, |acc, i| {
                let t = tables.pascal[k][i] * values[i] % mi;
                if (k - i) % 2 == 0 {
                    (acc + t) % mi
                } else {
                    (acc + mi - t) % mi
                }
            })
        })
        .collect();
    let p = params.outer;
    let inv_p = mod_inv(p % mi, mi).ok_or_else(|| Error::Param(format!("{p} is not invertible mod {mi}")))?;
    let scaled: Vec<u64> = (0..=s)
        .map(|w| if w == 0 { 0 } else { mod_mul(kappa[w], mod_pow(inv_p, w as u64 - 1, mi), mi) })
        .collect();
    Ok((0..=s)
        .map(|u| {
            if u == 0 {
                return 0;
            }
            (u..=s).fold(0, |acc, w| (acc + tables.pascal[s - u][w - u] * scaled[w]) % mi)
        })
        .collect())
}

/// Number of lex-normalized hyperplane normals of `Z_q^t` with coordinate
/// `j` equal to `c`.
fn normals_with_coordinate(q: u64, t: usize, j: usize, c: u64) -> BigUint {
    let bq = BigUint::from(q);
    let geom = |e: usize| (bq.pow(e as u32) - BigUint::one()) / BigUint::from(q - 1);
    let tail = bq.pow((t - 1 - j) as u32);
    match c {
        0 => geom(t - 1),
        1 => &tail + geom(j) * &tail,
        _ => geom(j) * &tail,
    }
}

/// Counts `synth_depth3_with(spec, params)` without building it.
pub fn count_depth3_with(spec: &SymFnSpec, params: &Depth3Params) -> Result<DryRunCount> {
    params.validate()?;
    let n = spec.n;
    let (p, mi) = (params.outer, params.inner_modulus());
    let ranges = partition_ranges(n, params.t);
    let sizes: Vec<usize> = ranges.iter().map(|r| r.len()).collect();
    let t = sizes.len();

    let full = box_product(&sizes);
    let n_comp: BigUint = spec
        .companion
        .iter()
        .enumerate()
        .filter(|(_, &on)| on)
        .map(|(w, _)| full.get(w).cloned().unwrap_or_default())
        .sum();
    if n_comp.is_zero() {
        return Ok(DryRunCount {
            gates: BigUint::from(n + 1),
            wires: BigUint::zero(),
        });
    }

    // middle expansion over the inner primes: (q, H_q, A_q, None allowed)
    let primes = prime_factors(mi);
    let bt = |q: u64, e: usize| BigUint::from(q).pow(e as u32);
    let mut hyper = Vec::new();
    let mut scale = 1 % p;
    for &q in &primes {
        let h = (bt(q, t) - BigUint::one()) / BigUint::from(q - 1);
        let a = (bt(q, t - 1) - BigUint::one()) / BigUint::from(q - 1);
        let a_mod = (&a % BigUint::from(p)).to_u64().expect("reduced");
        scale = mod_mul(scale, mod_inv(mod_pow(q, t as u64 - 1, p), p).expect("coprime"), p);
        hyper.push((q, h, a_mod));
    }
    let r = primes.len();
    let mut term_count = BigUint::zero();
    let mut output_wires_per_comp = BigUint::zero();
    for none_mask in 0..(1usize << r) - 1 {
        let mut coeff = scale;
        let mut count = BigUint::one();
        for (i, (_, h, a_mod)) in hyper.iter().enumerate() {
            if none_mask >> i & 1 == 1 {
                coeff = mod_mul(coeff, (p - a_mod) % p, p);
            } else {
                count *= h;
            }
        }
        if coeff != 0 {
            output_wires_per_comp += &count * BigUint::from(p - coeff);
            term_count += count;
        }
    }

    let mut by_size: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (j, &s) in sizes.iter().enumerate() {
        by_size.entry(s).or_default().push(j);
    }
    let mut bottom_gates = BigUint::zero();
    let mut bottom_wires = BigUint::zero();
    let mut middle_wires = BigUint::zero();
    for (&s, positions) in &by_size {
        let mut others = sizes.clone();
        let drop = others.iter().position(|&x| x == s).expect("size present");
        others.remove(drop);
        let rest = box_product(&others);
        let tables = SizeTables::new(s, p, mi);
        // V(u) = Σ_τ L(τ)·W_τ(u), W_τ(u) = Σ_w G_w·((u·agg_τ(w)) mod mi)
        let mut v = vec![BigUint::zero(); mi as usize];
        let (mut gates_s, mut wires_s) = (BigUint::zero(), BigUint::zero());
        for tau in 0..=s {
            let uses: BigUint = spec
                .companion
                .iter()
                .enumerate()
                .filter(|&(w, &on)| on && w >= tau)
                .map(|(w, _)| rest.get(w - tau).cloned().unwrap_or_default())
                .sum();
            if uses.is_zero() {
                continue;
            }
            let agg = block_weights(s, tau, params, &tables)?;
            let mut by_residue = vec![BigUint::zero(); mi as usize];
            for w in 1..=s {
                if agg[w] != 0 {
                    gates_s += &tables.gates_by_support[w];
                    wires_s += &tables.wires_by_support[w];
                    by_residue[agg[w] as usize] += &tables.gates_by_support[w];
                }
            }
            for (u, slot) in v.iter_mut().enumerate() {
                let mut wt = BigUint::zero();
                for (res, g) in by_residue.iter().enumerate() {
                    let mult = (u as u64 * res as u64) % mi;
                    if mult != 0 && !g.is_zero() {
                        wt += g * BigUint::from(mult);
                    }
                }
                *slot += &uses * wt;
            }
        }
        bottom_gates += &gates_s * BigUint::from(positions.len());
        bottom_wires += &wires_s * BigUint::from(positions.len());
        for &j in positions {
            for (u, vu) in v.iter().enumerate() {
                if vu.is_zero() {
                    continue;
                }
                let mut with_none = BigUint::one();
                let mut all_allowed = true;
                for (q, _, a_mod) in &hyper {
                    let c = u as u64 % q;
                    let mut opts = normals_with_coordinate(*q, t, j, c);
                    if c == 0 && *a_mod != 0 {
                        opts += BigUint::one();
                    }
                    all_allowed &= *a_mod != 0;
                    with_none *= opts;
                }
                if u == 0 && all_allowed {
                    with_none -= BigUint::one();
                }
                middle_wires += with_none * vu;
            }
        }
    }
    let middle_gates = &n_comp * &term_count;
    Ok(DryRunCount {
        gates: BigUint::from(n + 1) + bottom_gates + middle_gates,
        wires: bottom_wires + middle_wires + n_comp * output_wires_per_comp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cc0::synth_depth3_with;
    use crate::sympoly::emaj_symmetric;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn materialized(spec: &SymFnSpec, params: &Depth3Params) -> DryRunCount {
        let m = synth_depth3_with(spec, params).unwrap().metrics();
        DryRunCount {
            gates: BigUint::from(m.total_gates),
            wires: BigUint::from(m.total_wires),
        }
    }

    #[test]
    fn weights_match_the_expanded_polynomial() {
        let params = Depth3Params::for_k(9, 3).unwrap();
        let tables = SizeTables::new(9, 2, 15);
        for tau in 0..=9 {
            let plan = make_emaj_plan(9, tau, &[3, 5]).unwrap();
            let sym = emaj_symmetric(&plan).unwrap();
            let agg = block_weights(9, tau, &params, &tables).unwrap();
            let inv2 = mod_inv(2, 15).unwrap();
            for u in 1..=9 {
                let want = (u..=9).fold(0, |acc, w| {
                    let c = crate::arith::binomial_mod((9 - u) as u64, (w - u) as u64, 15);
                    (acc + c * sym.coeffs[w] % 15 * mod_pow(inv2, w as u64 - 1, 15)) % 15
                });
                assert_eq!(agg[u], want, "tau={tau} u={u}");
            }
        }
    }

    #[test]
    fn dry_run_equals_materialized() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for n in 1..=12 {
            let mut specs = vec![SymFnSpec::majority(n), SymFnSpec::parity(n), SymFnSpec::random(n, &mut rng)];
            specs.push(SymFnSpec::constant(n, false));
            for spec in &specs {
                for params in [
                    Depth3Params::for_k(n, 3).unwrap(),
                    Depth3Params::for_k(n, 2).unwrap(),
                    Depth3Params::preset31(n),
                ] {
                    assert_eq!(count_depth3_with(spec, &params).unwrap(), materialized(spec, &params), "n={n} {params:?}");
                }
            }
        }
    }

    #[test]
    fn large_n_is_fast() {
        let start = std::time::Instant::now();
        let c = count_depth3(&SymFnSpec::majority(2048), 3).unwrap();
        assert!(c.gates.bits() > 64);
        assert!(start.elapsed().as_secs_f64() < 5.0);
    }
}
