use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::dryrun::{count_depth3_with, DryRunCount};
use crate::cc0::{Depth3Params, SymFnSpec};
use crate::error::{Error, Result};

/// Constructions with a dry-run counter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthKind {
    /// `MOD_2 ∘ MOD_{m′} ∘ MOD_2` with the first `k−1` odd primes.
    Depth3 { k: usize },
    /// `MOD_5 ∘ MOD_6 ∘ MOD_5`.
    Depth3Preset31,
}

impl GrowthKind {
    fn params(&self, n: usize) -> Result<Depth3Params> {
        match *self {
            GrowthKind::Depth3 { k } => Depth3Params::for_k(n, k),
            GrowthKind::Depth3Preset31 => Ok(Depth3Params::preset31(n)),
        }
    }

    fn label(&self) -> String {
        match self {
            GrowthKind::Depth3 { k } => format!("k={k}"),
            GrowthKind::Depth3Preset31 => "m=6".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthRow {
    pub n: usize,
    pub param: String,
    pub count: DryRunCount,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    /// Least-squares slope of `log₂ log₂ gates` against `log₂ n`.
    pub beta: f64,
}

impl GrowthReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,param,gates,wires\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.n, r.param, r.count.gates, r.count.wires);
        }
        out
    }
}

/// `log₂ x` for arbitrarily large `x > 0`.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 60 {
        return x.to_f64().unwrap_or(0.0).log2();
    }
    let shift = bits - 60;
    let top = (x >> shift).to_f64().expect("fits");
    top.log2() + shift as f64
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Dry-run counts over `grid` for majority and the fitted double exponent.
pub fn growth_report(kind: GrowthKind, grid: &[usize]) -> Result<GrowthReport> {
    if grid.len() < 3 {
        return Err(Error::Param(format!(
            "growth fit needs at least 3 grid points, got {}",
            grid.len()
        )));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &n in grid {
        let spec = SymFnSpec::majority(n);
        let count = count_depth3_with(&spec, &kind.params(n)?)?;
        rows.push(GrowthRow {
            n,
            param: kind.label(),
            count,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).log2()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| log2_big(&r.count.gates).max(1.0).log2()).collect();
    if xs.iter().all(|&x| x == xs[0]) {
        return Err(Error::Param("growth fit needs distinct n values".into()));
    }
    Ok(GrowthReport { beta: slope(&xs, &ys), rows })
}
