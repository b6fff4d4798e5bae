//! Multilinear polynomials over Z_m, Lucas digits and the EMAJ polynomials.
//!
//! Symmetric polynomials are built in the elementary basis
//! ([`SymmetricPoly`], one coefficient per `e_k`) and only expanded into
//! explicit monomials ([`SparseMultilinearPoly`]) when a circuit needs them.

mod emaj;

use std::collections::BTreeMap;
use std::fmt::Write as _;

pub use emaj::{emaj_poly, emaj_poly_capped, emaj_symmetric, make_emaj_plan, EmajPlan};

use crate::arith::{base_digit, binomial_mod, is_prime};
use crate::error::{Error, Result};

/// Default bound on the number of stored terms during expansion.
pub const DEFAULT_TERM_CAP: usize = 20_000_000;

/// Largest variable count representable by the monomial bitmask.
pub const MAX_VARS: usize = 128;

type Mask = u128;

fn mask_indices(mut mask: Mask) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        out.push(mask.trailing_zeros() as usize);
        mask &= mask - 1;
    }
    out
}

/// A multilinear polynomial over Z_m stored as monomial → nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMultilinearPoly {
    n: usize,
    modulus: u64,
    terms: BTreeMap<Mask, u64>,
}

impl SparseMultilinearPoly {
    pub fn zero(n: usize, modulus: u64) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::SizeLimit(format!(
                "{n} variables exceed the {MAX_VARS}-variable polynomial limit"
            )));
        }
        if modulus < 2 {
            return Err(Error::Param(format!("modulus {modulus} < 2")));
        }
        Ok(SparseMultilinearPoly {
            n,
            modulus,
            terms: BTreeMap::new(),
        })
    }

    pub fn constant(n: usize, modulus: u64, c: u64) -> Result<Self> {
        let mut p = Self::zero(n, modulus)?;
        p.add_term(0, c);
        Ok(p)
    }

    pub fn variable(n: usize, modulus: u64, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::Param(format!("variable {i} out of range for {n}")));
        }
        let mut p = Self::zero(n, modulus)?;
        p.add_term(1 << i, 1);
        Ok(p)
    }

    /// Builds from explicit monomials; repeated monomials are summed.
    pub fn from_terms(
        n: usize,
        modulus: u64,
        terms: impl IntoIterator<Item = (Vec<usize>, u64)>,
    ) -> Result<Self> {
        let mut p = Self::zero(n, modulus)?;
        for (vars, c) in terms {
            let mut mask = 0;
            for v in vars {
                if v >= n {
                    return Err(Error::Param(format!("variable {v} out of range for {n}")));
                }
                mask |= 1 << v;
            }
            p.add_term(mask, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, mask: Mask, c: u64) {
        let m = self.modulus;
        let c = c % m;
        if c == 0 {
            return;
        }
        let e = self.terms.entry(mask).or_insert(0);
        *e = (*e + c) % m;
        if *e == 0 {
            self.terms.remove(&mask);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|k| k.count_ones() as usize).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> u64 {
        self.terms.get(&0).copied().unwrap_or(0)
    }

    pub fn coefficient(&self, vars: &[usize]) -> u64 {
        let mask = vars.iter().fold(0, |m: Mask, &v| m | 1 << v);
        self.terms.get(&mask).copied().unwrap_or(0)
    }

    /// Terms ordered by degree, then lexicographically by variable list.
    pub fn monomials(&self) -> Vec<(Vec<usize>, u64)> {
        let mut out: Vec<(Vec<usize>, u64)> =
            self.terms.iter().map(|(&k, &c)| (mask_indices(k), c)).collect();
        out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        out
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::Param(format!(
                "modulus mismatch: {} vs {}",
                self.modulus, other.modulus
            )));
        }
        if self.n != other.n {
            return Err(Error::Param(format!(
                "variable count mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (&k, &c) in &other.terms {
            out.add_term(k, c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: u64) -> Self {
        let mut out = Self {
            n: self.n,
            modulus: self.modulus,
            terms: BTreeMap::new(),
        };
        for (&k, &v) in &self.terms {
            out.add_term(k, (v as u128 * (c % self.modulus) as u128 % self.modulus as u128) as u64);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_capped(other, DEFAULT_TERM_CAP)
    }

    /// Product with multilinear reduction (`x·x = x`).
    pub fn mul_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        self.check_compatible(other)?;
        let m = self.modulus as u128;
        let mut out = Self {
            n: self.n,
            modulus: self.modulus,
            terms: BTreeMap::new(),
        };
        for (&ka, &ca) in &self.terms {
            for (&kb, &cb) in &other.terms {
                out.add_term(ka | kb, (ca as u128 * cb as u128 % m) as u64);
                if out.terms.len() > cap {
                    return Err(Error::CapExceeded {
                        what: "polynomial terms".into(),
                        cap,
                    });
                }
            }
        }
        Ok(out)
    }

    pub fn evaluate(&self, x: &[bool]) -> u64 {
        let mask = x
            .iter()
            .enumerate()
            .fold(0, |m: Mask, (i, &b)| if b { m | 1 << i } else { m });
        let m = self.modulus;
        self.terms
            .iter()
            .filter(|(&k, _)| k & !mask == 0)
            .fold(0, |acc, (_, &c)| (acc + c) % m)
    }

    /// Values on all `2^n` Boolean points; entry `x` has bit `i` = variable `i`.
    pub fn truth_values(&self) -> Result<Vec<u64>> {
        if self.n > 26 {
            return Err(Error::SizeLimit(format!(
                "truth table of {} variables",
                self.n
            )));
        }
        let m = self.modulus;
        let mut f = vec![0u64; 1 << self.n];
        for (&k, &c) in &self.terms {
            f[k as usize] = c;
        }
        for i in 0..self.n {
            let bit = 1 << i;
            for x in 0..f.len() {
                if x & bit != 0 {
                    f[x] = (f[x] + f[x ^ bit]) % m;
                }
            }
        }
        Ok(f)
    }

    /// One line per term: `<coeff> : i1,i2,...`, constant term as `<coeff> :`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (vars, c) in self.monomials() {
            let idx: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
            if idx.is_empty() {
                let _ = writeln!(out, "{c} :");
            } else {
                let _ = writeln!(out, "{c} : {}", idx.join(","));
            }
        }
        out
    }
}

pub fn poly_add(p: &SparseMultilinearPoly, q: &SparseMultilinearPoly) -> Result<SparseMultilinearPoly> {
    p.add(q)
}

pub fn poly_scale(p: &SparseMultilinearPoly, c: u64) -> SparseMultilinearPoly {
    p.scale(c)
}

pub fn poly_mul(p: &SparseMultilinearPoly, q: &SparseMultilinearPoly) -> Result<SparseMultilinearPoly> {
    p.mul(q)
}

/// A symmetric multilinear polynomial `Σ_k coeffs[k]·e_k(x_0..x_{n-1})` over Z_m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricPoly {
    pub n: usize,
    pub modulus: u64,
    pub coeffs: Vec<u64>,
}

impl SymmetricPoly {
    pub fn constant(n: usize, modulus: u64, c: u64) -> Self {
        let mut coeffs = vec![0; n + 1];
        coeffs[0] = c % modulus;
        SymmetricPoly { n, modulus, coeffs }
    }

    pub fn esym(n: usize, modulus: u64, j: usize) -> Self {
        let mut coeffs = vec![0; n + 1];
        if j <= n {
            coeffs[j] = 1 % modulus;
        }
        SymmetricPoly { n, modulus, coeffs }
    }

    /// Recovers the elementary-basis coefficients of the symmetric function
    /// with the given value at each weight `0..=n` (binomial inversion).
    pub fn from_weight_values(modulus: u64, values: &[u64]) -> Self {
        let n = values.len() - 1;
        let m = modulus;
        let coeffs = (0..=n)
            .map(|k| {
                let mut acc = 0u64;
                for (i, &v) in values.iter().enumerate().take(k + 1) {
                    let term = binomial_mod(k as u64, i as u64, m) * (v % m) % m;
                    acc = if (k - i) % 2 == 0 {
                        (acc + term) % m
                    } else {
                        (acc + m - term) % m
                    };
                }
                acc
            })
            .collect();
        SymmetricPoly { n, modulus, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0).unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let m = self.modulus;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| (a + b) % m)
            .collect();
        SymmetricPoly { n: self.n, modulus: m, coeffs }
    }

    pub fn scale(&self, c: u64) -> Self {
        let m = self.modulus;
        let c = c % m;
        SymmetricPoly {
            n: self.n,
            modulus: m,
            coeffs: self.coeffs.iter().map(|&a| a * c % m).collect(),
        }
    }

    /// Product using `e_a·e_b = Σ_c C(c,a)·C(a,a+b−c)·e_c` (multilinear).
    pub fn mul(&self, other: &Self) -> Self {
        let m = self.modulus;
        let n = self.n;
        let mut coeffs = vec![0u64; n + 1];
        for (a, &ca) in self.coeffs.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            for (b, &cb) in other.coeffs.iter().enumerate() {
                if cb == 0 {
                    continue;
                }
                let w = ca * cb % m;
                for c in a.max(b)..=(a + b).min(n) {
                    let k = binomial_mod(c as u64, a as u64, m)
                        * binomial_mod(a as u64, (a + b - c) as u64, m)
                        % m;
                    coeffs[c] = (coeffs[c] + w * k) % m;
                }
            }
        }
        SymmetricPoly { n, modulus: m, coeffs }
    }

    /// Value at any point of Hamming weight `w`.
    pub fn value_at_weight(&self, w: usize) -> u64 {
        let m = self.modulus;
        self.coeffs
            .iter()
            .enumerate()
            .take(w + 1)
            .fold(0, |acc, (k, &c)| (acc + c * binomial_mod(w as u64, k as u64, m)) % m)
    }

    /// Number of monomials in the explicit expansion.
    pub fn expanded_terms(&self) -> Option<u64> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .try_fold(0u64, |acc, (k, _)| {
                crate::arith::binomial(self.n as u64, k as u64).and_then(|b| acc.checked_add(b))
            })
    }

    pub fn to_sparse(&self) -> Result<SparseMultilinearPoly> {
        self.to_sparse_capped(DEFAULT_TERM_CAP)
    }

    pub fn to_sparse_capped(&self, cap: usize) -> Result<SparseMultilinearPoly> {
        match self.expanded_terms() {
            Some(t) if t <= cap as u64 => {}
            _ => {
                return Err(Error::CapExceeded {
                    what: "polynomial terms".into(),
                    cap,
                })
            }
        }
        let mut p = SparseMultilinearPoly::zero(self.n, self.modulus)?;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                for_each_subset(self.n, k, |mask| {
                    p.terms.insert(mask, c);
                });
            }
        }
        Ok(p)
    }
}

/// Calls `f` on every `k`-subset of `0..n` as a bitmask, in increasing order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(Mask)) {
    if k > n {
        return;
    }
    if k == 0 {
        f(0);
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(idx.iter().fold(0, |m: Mask, &i| m | 1 << i));
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Digit `i` of `big_n` in base `p`, which equals `C(big_n, p^i) mod p`.
pub fn lucas_digit(big_n: u64, p: u64, i: u32) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::Param(format!("{p} is not prime")));
    }
    Ok(base_digit(big_n, p, i))
}

/// `e_J` over `n` variables: all `C(n, J)` monomials of degree `J`.
pub fn esym_poly(n: usize, j: usize, modulus: u64) -> Result<SparseMultilinearPoly> {
    if j > n {
        log::warn!("e_{j} over {n} variables is the zero polynomial");
    }
    SymmetricPoly::esym(n, modulus, j).to_sparse()
}

/// `1 − Π_j (1 − (c_j − e_{q^j})^{q−1})` over Z_q in the elementary basis.
pub fn digit_match_symmetric(q: u64, t: u32, digits: &[u64], n: usize) -> Result<SymmetricPoly> {
    if !is_prime(q) {
        return Err(Error::Param(format!("{q} is not prime")));
    }
    if digits.len() != t as usize {
        return Err(Error::Param(format!(
            "expected {t} target digits, got {}",
            digits.len()
        )));
    }
    if let Some(&c) = digits.iter().find(|&&c| c >= q) {
        return Err(Error::Param(format!("digit {c} is not below {q}")));
    }
    let one = SymmetricPoly::constant(n, q, 1);
    let mut prod = one.clone();
    let mut qj = 1usize;
    for &c in digits {
        // c − e_{q^j}
        let base = SymmetricPoly::constant(n, q, c).add(&SymmetricPoly::esym(n, q, qj).scale(q - 1));
        let mut pow = one.clone();
        for _ in 0..q - 1 {
            pow = pow.mul(&base);
        }
        let factor = one.add(&pow.scale(q - 1));
        prod = prod.mul(&factor);
        qj = qj.saturating_mul(q as usize);
    }
    Ok(one.add(&prod.scale(q - 1)))
}

/// Explicit form of [`digit_match_symmetric`].
pub fn digit_match_poly(q: u64, t: u32, digits: &[u64], n: usize) -> Result<SparseMultilinearPoly> {
    digit_match_symmetric(q, t, digits, n)?.to_sparse()
}
