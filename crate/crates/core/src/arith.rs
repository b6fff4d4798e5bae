//! Small number-theory helpers shared by the synthesizers.

use num_integer::Integer;

use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization as ascending `(prime, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Distinct prime factors, ascending.
pub fn prime_factors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

pub fn is_square_free(n: u64) -> bool {
    n >= 1 && factorize(n).iter().all(|&(_, e)| e == 1)
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// The first `count` odd primes: 3, 5, 7, ...
pub fn first_odd_primes(count: usize) -> Vec<u64> {
    (3..).filter(|&p| is_prime(p)).take(count).collect()
}

pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut b = base as u128 % m;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inv(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let g = (a as i128).extended_gcd(&(m as i128));
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m as i128) as u64)
}

/// `(a - b) mod m` for residues.
pub fn mod_sub(a: u64, b: u64, m: u64) -> u64 {
    (a % m + m - b % m) % m
}

pub fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Binomial coefficient modulo `m`; Lucas' theorem for prime `m`, exact
/// big-integer arithmetic otherwise.
pub fn binomial_mod(n: u64, k: u64, m: u64) -> u64 {
    if k > n {
        return 0;
    }
    if let Some(b) = binomial(n, k) {
        return b % m;
    }
    if is_prime(m) {
        let (mut n, mut k, mut acc) = (n, k, 1u64 % m);
        while k > 0 {
            let (ni, ki) = (n % m, k % m);
            if ki > ni {
                return 0;
            }
            acc = mod_mul(acc, binomial(ni, ki).map(|b| b % m).unwrap_or_else(|| big_binomial_mod(ni, ki, m)), m);
            n /= m;
            k /= m;
        }
        return acc;
    }
    big_binomial_mod(n, k, m)
}

fn big_binomial_mod(n: u64, k: u64, m: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc = num_bigint::BigUint::from(1u32);
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    (acc % m).try_into().expect("residue fits")
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn iroot_floor(n: u64, k: u32) -> u64 {
    assert!(k >= 1);
    if k == 1 || n < 2 {
        return n;
    }
    let mut x = (n as f64).powf(1.0 / k as f64).round() as u64;
    let pow_le = |x: u64| -> bool {
        let mut acc: u128 = 1;
        for _ in 0..k {
            acc *= x as u128;
            if acc > n as u128 {
                return false;
            }
        }
        true
    };
    while !pow_le(x) {
        x -= 1;
    }
    while pow_le(x + 1) {
        x += 1;
    }
    x
}

/// Smallest `x` with `x^k >= n`.
pub fn iroot_ceil(n: u64, k: u32) -> u64 {
    let f = iroot_floor(n, k);
    if (f as u128).pow(k) == n as u128 {
        f
    } else {
        f + 1
    }
}

/// Smallest primitive root modulo the prime `p`.
pub fn primitive_root(p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::Param(format!("{p} is not prime")));
    }
    if p == 2 {
        return Ok(1);
    }
    let factors = prime_factors(p - 1);
    (2..p)
        .find(|&g| factors.iter().all(|&q| mod_pow(g, (p - 1) / q, p) != 1))
        .ok_or_else(|| Error::Param(format!("no primitive root modulo {p}")))
}

/// Digit `i` of `n` written in base `p`.
pub fn base_digit(n: u64, p: u64, i: u32) -> u64 {
    let mut n = n;
    for _ in 0..i {
        if n == 0 {
            return 0;
        }
        n /= p;
    }
    n % p
}

/// Chinese-remainder idempotent for the prime `q` dividing the square-free `b`:
/// the residue that is 1 modulo `q` and 0 modulo `b / q`.
pub fn crt_idempotent(q: u64, b: u64) -> u64 {
    let rest = b / q;
    let inv = mod_inv(rest % q, q).expect("square-free modulus");
    mod_mul(rest, inv, b)
}
