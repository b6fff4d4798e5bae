use super::{digit_match_symmetric, SparseMultilinearPoly, SymmetricPoly, DEFAULT_TERM_CAP};
use crate::arith::{base_digit, is_prime};
use crate::error::{Error, Result};

/// Recipe for one exact-weight polynomial: per-prime digit windows combined
/// by the Chinese Remainder Theorem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmajPlan {
    pub v: usize,
    pub target: usize,
    pub primes: Vec<u64>,
    pub exponents: Vec<u32>,
    pub crt_coefficients: Vec<u64>,
    pub modulus: u64,
}

impl EmajPlan {
    /// `Π q_i^{t_i}`, the size of the residue range the digit tests see.
    pub fn range(&self) -> u128 {
        self.primes
            .iter()
            .zip(&self.exponents)
            .map(|(&q, &t)| (q as u128).pow(t))
            .product()
    }

    /// Target digits in base `primes[i]`, least significant first.
    pub fn digits(&self, i: usize) -> Vec<u64> {
        (0..self.exponents[i])
            .map(|j| base_digit(self.target as u64, self.primes[i], j))
            .collect()
    }

    /// Upper bound `max_i (q_i^{t_i} − 1)` on the polynomial degree.
    pub fn degree_bound(&self) -> u64 {
        self.primes
            .iter()
            .zip(&self.exponents)
            .map(|(&q, &t)| q.pow(t) - 1)
            .max()
            .unwrap_or(0)
    }
}

/// Chooses exponents so that `Π q_i^{t_i} > v` with balanced prime powers.
pub fn make_emaj_plan(v: usize, target: usize, primes: &[u64]) -> Result<EmajPlan> {
    if primes.is_empty() {
        return Err(Error::Param("at least one prime is required".into()));
    }
    for (i, &q) in primes.iter().enumerate() {
        if !is_prime(q) {
            return Err(Error::Param(format!("{q} is not prime")));
        }
        if primes[..i].contains(&q) {
            return Err(Error::Param(format!("prime {q} is repeated")));
        }
    }
    if target > v {
        return Err(Error::Param(format!("target {target} exceeds {v} variables")));
    }
    let parts = primes.len() as u32;
    let need = v as u128 + 1;
    let mut exponents: Vec<u32> = primes
        .iter()
        .map(|&q| {
            let mut t = 1u32;
            while (q as u128).pow(t * parts) < need {
                t += 1;
            }
            t
        })
        .collect();
    let power = |i: usize, e: &[u32]| (primes[i] as u128).pow(e[i]);
    loop {
        let prod: u128 = (0..primes.len()).map(|i| power(i, &exponents)).product();
        if prod > v as u128 {
            break;
        }
        let i = (0..primes.len())
            .min_by_key(|&i| (power(i, &exponents), primes[i]))
            .expect("non-empty");
        exponents[i] += 1;
    }
    let modulus: u64 = primes.iter().product();
    let crt_coefficients = primes.iter().map(|&q| modulus / q).collect();
    Ok(EmajPlan {
        v,
        target,
        primes: primes.to_vec(),
        exponents,
        crt_coefficients,
        modulus,
    })
}

/// `Σ_i M_i·p_{q_i}` over Z_{m′} in the elementary basis. Vanishes exactly
/// on inputs of weight `target`.
pub fn emaj_symmetric(plan: &EmajPlan) -> Result<SymmetricPoly> {
    let m = plan.modulus;
    let mut out = SymmetricPoly::constant(plan.v, m, 0);
    for (i, &q) in plan.primes.iter().enumerate() {
        let pq = digit_match_symmetric(q, plan.exponents[i], &plan.digits(i), plan.v)?;
        let lifted = SymmetricPoly {
            n: plan.v,
            modulus: m,
            coeffs: pq.coeffs.iter().map(|&c| c * plan.crt_coefficients[i] % m).collect(),
        };
        out = out.add(&lifted);
    }
    Ok(out)
}

pub fn emaj_poly(plan: &EmajPlan) -> Result<SparseMultilinearPoly> {
    emaj_poly_capped(plan, DEFAULT_TERM_CAP)
}

pub fn emaj_poly_capped(plan: &EmajPlan, cap: usize) -> Result<SparseMultilinearPoly> {
    emaj_symmetric(plan)?.to_sparse_capped(cap)
}
