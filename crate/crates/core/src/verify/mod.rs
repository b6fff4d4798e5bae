//! Oracles, equivalence checking, invariant probes, dry-run gate counts and
//! growth fits.

mod dryrun;
pub mod growth;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use dryrun::{count_depth3, count_depth3_with, DryRunCount};
pub use growth::{growth_report, GrowthKind, GrowthReport, GrowthRow};

use crate::acc0::BooleanConversion;
use crate::cc0::SymFnSpec;
use crate::circuit::{Circuit, Gate, WordEvaluator};
use crate::error::{Error, Result};

/// Largest `n` checked exhaustively unless forced.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 24;
/// Mismatch witnesses kept per report.
pub const MAX_WITNESSES: usize = 16;

/// `g[|x|₁]`.
pub fn oracle_eval(spec: &SymFnSpec, x: &[bool]) -> Result<bool> {
    if x.len() != spec.n {
        return Err(Error::Input(format!(
            "assignment has {} bits, function has {} inputs",
            x.len(),
            spec.n
        )));
    }
    Ok(spec.eval(x))
}

/// Renders `x` as `x_0 x_1 … x_{n−1}`.
pub fn bitstring(x: &[bool]) -> String {
    x.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse_bitstring(s: &str) -> Result<Vec<bool>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Input(format!("bad bit `{c}` in input `{s}`"))),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub mode: VerifyMode,
    pub threads: usize,
    /// Allow exhaustive checks beyond `exhaustive_limit`.
    pub force: bool,
    pub exhaustive_limit: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            mode: VerifyMode::Exhaustive,
            threads: 1,
            force: false,
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
        }
    }
}

impl VerifyOptions {
    pub fn sampled(samples: usize, seed: u64) -> Self {
        VerifyOptions {
            mode: VerifyMode::Sampled { samples, seed },
            ..Self::default()
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeResult {
    pub name: String,
    pub pass: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub mode: VerifyMode,
    pub inputs_tested: u64,
    pub mismatch_count: u64,
    /// First mismatching assignments in enumeration order.
    pub mismatches: Vec<Vec<bool>>,
    pub invariants: Vec<ProbeResult>,
    pub elapsed: Duration,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatch_count == 0 && self.invariants.iter().all(|p| p.pass)
    }
}

impl fmt::Display for VerifyReport {
    /// Deterministic `key=value` lines; elapsed time is left out.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            VerifyMode::Exhaustive => writeln!(f, "mode=exhaustive")?,
            VerifyMode::Sampled { samples, seed } => {
                writeln!(f, "mode=sampled")?;
                writeln!(f, "samples={samples}")?;
                writeln!(f, "seed={seed}")?;
            }
        }
        writeln!(f, "inputs={}", self.inputs_tested)?;
        writeln!(f, "mismatches={}", self.mismatch_count)?;
        for (i, x) in self.mismatches.iter().enumerate() {
            writeln!(f, "mismatch.{i}={}", bitstring(x))?;
        }
        for p in &self.invariants {
            writeln!(f, "probe.{}={}", p.name, if p.pass { "pass" } else { "fail" })?;
            if let Some(w) = &p.witness {
                writeln!(f, "probe.{}.witness={w}", p.name)?;
            }
        }
        writeln!(f, "result={}", if self.passed() { "pass" } else { "fail" })
    }
}

/// The assignments a check runs over, in blocks of 64 lanes.
enum InputSet {
    Exhaustive { n: usize },
    List { n: usize, assignments: Vec<Vec<bool>> },
}

impl InputSet {
    fn new(n: usize, opts: &VerifyOptions) -> Result<Self> {
        match opts.mode {
            VerifyMode::Exhaustive => {
                if n > opts.exhaustive_limit && !opts.force {
                    return Err(Error::SizeLimit(format!(
                        "exhaustive check of {n} inputs exceeds the limit of {} (force it or sample)",
                        opts.exhaustive_limit
                    )));
                }
                if n > 40 {
                    return Err(Error::SizeLimit(format!("exhaustive check of {n} inputs is infeasible")));
                }
                Ok(InputSet::Exhaustive { n })
            }
            VerifyMode::Sampled { samples, seed } => {
                let mut assignments: Vec<Vec<bool>> = (0..=n)
                    .map(|w| (0..n).map(|i| i >= n - w).collect())
                    .collect();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                assignments.extend((0..samples).map(|_| (0..n).map(|_| rng.gen()).collect()));
                Ok(InputSet::List { n, assignments })
            }
        }
    }

    fn len(&self) -> u64 {
        match self {
            InputSet::Exhaustive { n } => 1u64 << n,
            InputSet::List { assignments, .. } => assignments.len() as u64,
        }
    }

    fn blocks(&self) -> usize {
        self.len().div_ceil(64) as usize
    }

    /// Input words and live-lane mask of block `idx`.
    fn block(&self, idx: usize) -> (Vec<u64>, u64) {
        match self {
            InputSet::Exhaustive { n } => {
                let words = WordEvaluator::exhaustive_inputs(*n, idx as u64 * 64);
                let mask = if *n >= 6 { !0 } else { (1u64 << (1 << n)) - 1 };
                (words, mask)
            }
            InputSet::List { n, assignments } => {
                let chunk = &assignments[idx * 64..((idx + 1) * 64).min(assignments.len())];
                let mask = if chunk.len() == 64 { !0 } else { (1u64 << chunk.len()) - 1 };
                (WordEvaluator::pack(*n, chunk), mask)
            }
        }
    }

    fn assignment(&self, idx: usize, lane: usize) -> Vec<bool> {
        match self {
            InputSet::Exhaustive { n } => {
                let a = idx as u64 * 64 + lane as u64;
                (0..*n).map(|i| a >> i & 1 == 1).collect()
            }
            InputSet::List { assignments, .. } => assignments[idx * 64 + lane].clone(),
        }
    }

    /// Expected output word of a symmetric function on block `idx`.
    fn expected(&self, idx: usize, spec: &SymFnSpec) -> u64 {
        let mut word = 0u64;
        for lane in 0..64 {
            let w = match self {
                InputSet::Exhaustive { n } => {
                    let a = if *n >= 6 { idx as u64 * 64 + lane as u64 } else { lane as u64 & ((1 << n) - 1) };
                    a.count_ones() as usize
                }
                InputSet::List { assignments, .. } => match assignments.get(idx * 64 + lane) {
                    Some(x) => x.iter().filter(|&&b| b).count(),
                    None => 0,
                },
            };
            if spec.companion[w] {
                word |= 1 << lane;
            }
        }
        word
    }
}

/// Runs `bad_lanes` on every block across `threads` workers and merges the
/// failing lanes deterministically.
fn scan(
    c: &Circuit,
    set: &InputSet,
    threads: usize,
    bad_lanes: impl Fn(&WordEvaluator, usize, &[u64], u64) -> u64 + Sync,
) -> (u64, Vec<Vec<bool>>) {
    let eval = WordEvaluator::new(c);
    let blocks = set.blocks();
    let threads = threads.clamp(1, blocks.max(1));
    let chunk = blocks.div_ceil(threads);
    let worker = |range: std::ops::Range<usize>| {
        let mut values = Vec::new();
        let mut count = 0u64;
        let mut witnesses: Vec<(usize, usize)> = Vec::new();
        for idx in range {
            let (words, mask) = set.block(idx);
            let out = eval.run(&words, &mut values);
            let bad = bad_lanes(&eval, idx, &values, out) & mask;
            count += bad.count_ones() as u64;
            let mut rest = bad;
            while rest != 0 && witnesses.len() < MAX_WITNESSES {
                let lane = rest.trailing_zeros() as usize;
                witnesses.push((idx, lane));
                rest &= rest - 1;
            }
        }
        (count, witnesses)
    };
    let parts: Vec<(u64, Vec<(usize, usize)>)> = if threads == 1 {
        vec![worker(0..blocks)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let range = (t * chunk).min(blocks)..((t + 1) * chunk).min(blocks);
                    let worker = &worker;
                    s.spawn(move || worker(range))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("verify worker panicked")).collect()
        })
    };
    let count = parts.iter().map(|p| p.0).sum();
    let mut witnesses: Vec<(usize, usize)> = parts.into_iter().flat_map(|p| p.1).collect();
    witnesses.sort_unstable();
    witnesses.truncate(MAX_WITNESSES);
    (count, witnesses.into_iter().map(|(i, l)| set.assignment(i, l)).collect())
}

pub fn check_equiv(c: &Circuit, spec: &SymFnSpec, opts: &VerifyOptions) -> Result<VerifyReport> {
    if c.n() != spec.n {
        return Err(Error::Input(format!(
            "circuit has {} inputs, function has {}",
            c.n(),
            spec.n
        )));
    }
    let start = Instant::now();
    let set = InputSet::new(c.n(), opts)?;
    let (count, mismatches) = scan(c, &set, opts.threads, |_, idx, _, out| out ^ set.expected(idx, spec));
    Ok(VerifyReport {
        mode: opts.mode,
        inputs_tested: set.len(),
        mismatch_count: count,
        mismatches,
        invariants: Vec::new(),
        elapsed: start.elapsed(),
    })
}

/// Structural and semantic checks on a circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Probe {
    /// The output gate is a MOD_p gate whose linear form only takes the values 0 and 1.
    OutputSum01(u64),
    /// Layer shape string, output level first, e.g. `MOD(2)/MOD(15)/MOD(2)`.
    LayerShape(String),
    /// Every MOD gate modulus divides `m`.
    NoModulusOutside(u64),
    /// Bundle encoding of an arithmetic conversion; see [`check_bundles`].
    BundleWellformed,
}

impl Probe {
    pub fn name(&self) -> String {
        match self {
            Probe::OutputSum01(p) => format!("output-sum-01({p})"),
            Probe::LayerShape(s) => format!("layer-shape({s})"),
            Probe::NoModulusOutside(m) => format!("no-modulus-outside({m})"),
            Probe::BundleWellformed => "bundle-wellformed".into(),
        }
    }
}

impl FromStr for Probe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once('(') {
            Some((name, rest)) => {
                let arg = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Param(format!("probe `{s}` is missing `)`")))?;
                (name, Some(arg))
            }
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<u64> {
            a.and_then(|a| a.trim().parse().ok())
                .ok_or_else(|| Error::Param(format!("probe `{s}` needs a numeric argument")))
        };
        match name {
            "output-sum-01" => Ok(Probe::OutputSum01(num(arg)?)),
            "no-modulus-outside" => Ok(Probe::NoModulusOutside(num(arg)?)),
            "layer-shape" => Ok(Probe::LayerShape(
                arg.ok_or_else(|| Error::Param("layer-shape needs a pattern".into()))?.trim().to_string(),
            )),
            "bundle-wellformed" => Ok(Probe::BundleWellformed),
            _ => Err(Error::Param(format!(
                "unknown probe `{s}` (expected output-sum-01(p), layer-shape(pattern), no-modulus-outside(m) or bundle-wellformed)"
            ))),
        }
    }
}

pub fn check_invariant(c: &Circuit, probe: &Probe, opts: &VerifyOptions) -> Result<ProbeResult> {
    let name = probe.name();
    let verdict = |pass: bool, witness: Option<String>| ProbeResult {
        name: name.clone(),
        pass,
        witness,
    };
    match probe {
        Probe::LayerShape(want) => {
            let got = c.metrics().shape_string();
            Ok(verdict(&got == want, (&got != want).then_some(got)))
        }
        Probe::NoModulusOutside(m) => {
            let bad = c.moduli().into_iter().find(|&q| *m == 0 || m % q != 0);
            Ok(verdict(bad.is_none(), bad.map(|q| format!("MOD({q})"))))
        }
        Probe::OutputSum01(p) => {
            let out = c.output();
            match &c.gates()[out] {
                Gate::Mod(g) if g.modulus == *p => {}
                other => {
                    let label = crate::circuit::layer_label(other);
                    return Ok(verdict(false, Some(format!("output gate is {label}"))));
                }
            }
            let set = InputSet::new(c.n(), opts)?;
            let (_, witnesses) = scan(c, &set, opts.threads, |eval, _, values, _| {
                let residues = eval.mod_residues(out, values).expect("output is a MOD gate");
                residues.iter().skip(2).fold(0, |acc, &r| acc | r)
            });
            Ok(verdict(witnesses.is_empty(), witnesses.first().map(|x| bitstring(x))))
        }
        Probe::BundleWellformed => Err(Error::Param(
            "bundle-wellformed applies to arithmetic conversions, not netlists".into(),
        )),
    }
}

/// Every bundle of `conv` on every input of `set`: `b_0 = 0` with all `b_i`
/// clear, or `b_0 = 1` with exactly one `b_i` set.
pub fn check_bundles(conv: &BooleanConversion, opts: &VerifyOptions) -> Result<ProbeResult> {
    let c = &conv.circuit;
    let set = InputSet::new(c.n(), opts)?;
    let (_, witnesses) = scan(c, &set, opts.threads, |_, _, values, _| {
        let mut bad = 0u64;
        for bundle in &conv.bundles {
            let nonzero = values[bundle[0]];
            let (mut once, mut twice) = (0u64, 0u64);
            for &w in &bundle[1..] {
                twice |= once & values[w];
                once |= values[w];
            }
            bad |= (!nonzero & once) | (nonzero & !once) | twice;
        }
        bad
    });
    Ok(ProbeResult {
        name: Probe::BundleWellformed.name(),
        pass: witnesses.is_empty(),
        witness: witnesses.first().map(|x| bitstring(x)),
    })
}
