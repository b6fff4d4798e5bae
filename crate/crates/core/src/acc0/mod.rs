//! AND/OR/NOT/MOD_m circuits for symmetric functions via arithmetic circuits
//! over prime fields and weight discriminators.

mod arith_circuit;
mod convert;
mod synth;

use num_bigint::BigUint;
use num_integer::Integer;

pub use arith_circuit::{esym_arith_circuit, ArithCircuit, ArithGate, DEFAULT_ARITH_CAP};
pub use convert::{
    arith_to_boolean, digit_tests, eliminate_modpm1, emit_arith, BooleanConversion, Bundle,
    FieldEnc,
};
pub use synth::{
    emit_discriminator, emit_symmetric_acc, plan_discriminator, synth_discriminator,
    synth_modm_function, synth_symmetric_acc, Discriminator,
};

use crate::arith::{euler_phi, is_square_free, prime_factors};
use crate::error::{Error, Result};

/// Outcome of the goodness test: every prime factor of `φ(m)` must divide `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Goodness {
    pub good: bool,
    pub phi: u64,
    /// Prime factors of `φ(m)` and whether each divides `m`.
    pub phi_primes: Vec<(u64, bool)>,
}

pub fn goodness_check(m: u64) -> Result<Goodness> {
    if m < 2 || !is_square_free(m) {
        return Err(Error::Param(format!("modulus {m} is not square-free")));
    }
    let phi = euler_phi(m);
    let phi_primes: Vec<(u64, bool)> = prime_factors(phi).into_iter().map(|q| (q, m % q == 0)).collect();
    Ok(Goodness {
        good: phi_primes.iter().all(|&(_, ok)| ok),
        phi,
        phi_primes,
    })
}

/// Parameters of the discriminator construction for a good modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccParams {
    pub m: u64,
    pub d: usize,
    pub n: usize,
    pub primes: Vec<u64>,
    /// `α` as a reduced fraction `(numerator, denominator)`.
    pub alpha: (u64, u64),
    /// `s_a = ⌈α·log_{p_a} n⌉` (at least 1) per prime.
    pub exponents: Vec<u32>,
}

impl AccParams {
    /// `α = (d−1)/((r+3)(d−1)−3)`; requires `m` good and `d ≥ 4`, `d ≡ 1 (mod 3)`.
    pub fn new(m: u64, d: usize, n: usize) -> Result<Self> {
        let g = goodness_check(m)?;
        if !g.good {
            let bad: Vec<String> = g
                .phi_primes
                .iter()
                .filter(|(_, ok)| !ok)
                .map(|(q, _)| q.to_string())
                .collect();
            return Err(Error::Param(format!(
                "modulus {m} is not good: φ({m}) = {} has prime factor(s) {} not dividing {m}",
                g.phi,
                bad.join(", ")
            )));
        }
        if d < 4 || d % 3 != 1 {
            return Err(Error::Param(format!(
                "depth {d} must be at least 4 and congruent to 1 mod 3"
            )));
        }
        let primes = prime_factors(m);
        let r = primes.len() as u64;
        let (num, den) = ((d - 1) as u64, (r + 3) * (d as u64 - 1) - 3);
        let g = num.gcd(&den);
        Self::with_alpha(m, d, n, (num / g, den / g))
    }

    /// Explicit `α`; exponents follow from it.
    pub fn with_alpha(m: u64, d: usize, n: usize, alpha: (u64, u64)) -> Result<Self> {
        if d < 4 || d % 3 != 1 {
            return Err(Error::Param(format!(
                "depth {d} must be at least 4 and congruent to 1 mod 3"
            )));
        }
        let primes = prime_factors(m);
        let (num, den) = alpha;
        let target = BigUint::from(n.max(1)).pow(num as u32);
        let exponents = primes
            .iter()
            .map(|&p| {
                let mut s = 1u32;
                while BigUint::from(p).pow(s * den as u32) < target {
                    s += 1;
                }
                s
            })
            .collect();
        Ok(AccParams {
            m,
            d,
            n,
            primes,
            alpha,
            exponents,
        })
    }

    /// Arithmetic recursion depth `ℓ = (d−1)/3`.
    pub fn levels(&self) -> usize {
        (self.d - 1) / 3
    }

    /// Whether `|i − j| < n^{α·r}`.
    pub fn is_small_gap(&self, i: usize, j: usize) -> bool {
        let gap = i.abs_diff(j);
        let (num, den) = self.alpha;
        let r = self.primes.len() as u32;
        BigUint::from(gap).pow(den as u32) < BigUint::from(self.n.max(1)).pow(num as u32 * r)
    }

    pub fn prime_power(&self, a: usize) -> u64 {
        self.primes[a].pow(self.exponents[a])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goodness_examples() {
        let g = goodness_check(42).unwrap();
        assert!(g.good);
        assert_eq!(g.phi, 12);
        assert_eq!(g.phi_primes, vec![(2, true), (3, true)]);
        assert!(goodness_check(30).unwrap().good);
        let g = goodness_check(15).unwrap();
        assert!(!g.good);
        assert_eq!(g.phi_primes, vec![(2, false)]);
        assert!(goodness_check(20).is_err());
    }

    #[test]
    fn alpha_formula() {
        let p = AccParams::new(42, 4, 10).unwrap();
        assert_eq!(p.alpha, (1, 5));
        assert_eq!(p.exponents, vec![1, 1, 1]);
        let p = AccParams::new(30, 7, 1000).unwrap();
        // (6)/((6)(6)−3) = 6/33 = 2/11
        assert_eq!(p.alpha, (2, 11));
        assert!(AccParams::new(42, 5, 10).is_err());
        assert!(AccParams::new(15, 4, 10).is_err());
    }

    #[test]
    fn exponents_cover_n_to_the_alpha() {
        for n in [2usize, 10, 100, 5000] {
            let p = AccParams::with_alpha(42, 4, n, (1, 2)).unwrap();
            for (a, &q) in p.primes.iter().enumerate() {
                let s = p.exponents[a];
                assert!((q.pow(s) as f64) >= (n as f64).sqrt() - 1e-9);
                assert!(s == 1 || (q.pow(s - 1) as f64) < (n as f64).sqrt());
            }
        }
    }
}
