//! Command-line driver.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parameter
//! error, 3 structural or format error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::acc0::{synth_modm_function, synth_symmetric_acc, AccParams};
use crate::arith::factorize;
use crate::cc0::{
    partition_ranges, subst_majority, synth_depth3_with, synth_depthd, Depth3Params, DepthdOptions,
    SubstOptions, SymFnSpec,
};
use crate::circuit::lower::to_literal_model;
use crate::circuit::netlist::{parse_netlist, serialize_netlist};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::sympoly::{emaj_poly, make_emaj_plan};
use crate::verify::{
    check_equiv, check_invariant, count_depth3_with, growth_report, parse_bitstring, GrowthKind, Probe,
    VerifyOptions,
};

#[derive(Parser, Debug)]
#[command(
    name = "modckt",
    version,
    about = "Constant-depth modular circuits for symmetric Boolean functions",
    after_help = "Input bitstrings list the variables in order x0 x1 ... x(n-1)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a circuit and write it as a MODCKT netlist.
    Synth(SynthArgs),
    /// Check a netlist against a symmetric function.
    Verify(VerifyArgs),
    /// Print size and depth metrics of a netlist.
    Stats(StatsArgs),
    /// Evaluate a netlist on one input.
    Eval(EvalArgs),
    /// Dry-run gate counts over a grid of n, as CSV.
    Report(ReportArgs),
    /// Replace the SYM gates of a SYM/NOT netlist by constant-depth circuits.
    Rewrite(RewriteArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// MOD_5 ∘ MOD_6 ∘ MOD_5.
    Thm31,
    /// MOD_2 ∘ MOD_{m'} ∘ MOD_2 with the first k−1 odd primes.
    Thm11,
    /// Depth-d pure MOD_m.
    Thm12,
    /// AND/OR/NOT/MOD_m with a good modulus.
    Thm14,
    /// `[|x| ≡ 0 mod M]` with an AND output gate.
    Modfn,
}

#[derive(Args, Debug, Clone)]
struct FnArgs {
    /// maj | parity | mod:M | exact:T
    #[arg(long = "fn")]
    func: Option<String>,
    /// File holding `SYMFN <n> <bitstring>`.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    func: FnArgs,
    #[arg(long, value_enum, default_value = "thm31")]
    preset: Preset,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Print gate and wire counts without building the circuit.
    #[arg(long)]
    dry_run: bool,
    /// Reuse identical subcircuits.
    #[arg(long)]
    share: bool,
    /// Rewrite shifts and multiplicities into repeated wires.
    #[arg(long)]
    literal: bool,
    /// Write the per-part EMAJ polynomials of a depth-3 preset to this file.
    #[arg(long)]
    dump_poly: Option<PathBuf>,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[command(flatten)]
    func: FnArgs,
    /// Check all 2^n inputs (the default).
    #[arg(long, conflicts_with = "samples")]
    exhaustive: bool,
    /// Check this many seeded random inputs plus one input per weight.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Allow exhaustive checks above the input limit.
    #[arg(long)]
    force: bool,
    /// output-sum-01(p) | layer-shape(pattern) | no-modulus-outside(m)
    #[arg(long)]
    probe: Vec<String>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    circuit: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// Bitstring x0 x1 ... x(n-1).
    #[arg(long)]
    input: String,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// thm11 or thm31.
    #[arg(long, value_enum, default_value = "thm11")]
    preset: Preset,
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated values of n.
    #[arg(long, value_delimiter = ',', default_value = "64,128,256,512,1024,2048,4096")]
    grid: Vec<usize>,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RewriteArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long, default_value_t = 30)]
    m: u64,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    /// Use the AND/OR/MOD discriminator construction (needs a good modulus).
    #[arg(long)]
    acc: bool,
    #[arg(long)]
    share: bool,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Verify(a) => verify(a),
        Command::Stats(a) => stats(a),
        Command::Eval(a) => eval(a),
        Command::Report(a) => report(a),
        Command::Rewrite(a) => rewrite(a),
    };
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("modckt: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Structural(_) | Error::Parse { .. } | Error::Type(_) | Error::Shape(_) => 3,
        _ => 2,
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_circuit(path: &Path) -> Result<Circuit> {
    parse_netlist(&read_file(path)?)
}

/// Exactly one of `--fn` and `--spec`; `--n` comes from the spec file or
/// defaults to `default_n`.
fn load_spec(a: &FnArgs, default_n: Option<usize>) -> Result<SymFnSpec> {
    match (&a.func, &a.spec) {
        (Some(_), Some(_)) => Err(Error::Param("give either --fn or --spec, not both".into())),
        (None, None) => Err(Error::Param("a function is required: --fn or --spec".into())),
        (None, Some(path)) => {
            let spec = SymFnSpec::parse(&read_file(path)?)?;
            match a.n {
                Some(n) if n != spec.n => Err(Error::Param(format!(
                    "--n {n} disagrees with the spec file's {} inputs",
                    spec.n
                ))),
                _ => Ok(spec),
            }
        }
        (Some(sel), None) => {
            let n = a
                .n
                .or(default_n)
                .ok_or_else(|| Error::Param("--n is required with --fn".into()))?;
            SymFnSpec::from_selector(sel, n)
        }
    }
}

fn depth3_params(preset: Preset, n: usize, k: Option<usize>) -> Result<Depth3Params> {
    match preset {
        Preset::Thm31 => {
            if k.is_some() {
                return Err(Error::Param("--k does not apply to preset thm31".into()));
            }
            Ok(Depth3Params::preset31(n))
        }
        Preset::Thm11 => Depth3Params::for_k(n, k.unwrap_or(3)),
        _ => Err(Error::Param("only presets thm31 and thm11 are depth-3 constructions".into())),
    }
}

fn dump_polys(spec: &SymFnSpec, params: &Depth3Params) -> String {
    let v = partition_ranges(spec.n, params.t)[0].len();
    let mut out = String::new();
    for target in 0..=v {
        let _ = writeln!(out, "# part size {v}, target {target}");
        match make_emaj_plan(v, target, &params.inner_primes).and_then(|p| emaj_poly(&p)) {
            Ok(p) => out.push_str(&p.dump()),
            Err(e) => {
                let _ = writeln!(out, "# {e}");
            }
        }
    }
    out
}

fn synth(a: SynthArgs) -> Result<i32> {
    let modfn_spec = |m: u64, n: usize| SymFnSpec::modulo(n, m as usize);
    let spec = match (a.preset, &a.func.func, &a.func.spec) {
        (Preset::Modfn, None, None) => {
            let m = a.m.ok_or_else(|| Error::Param("preset modfn needs --m or --fn mod:M".into()))?;
            let n = a.func.n.ok_or_else(|| Error::Param("--n is required".into()))?;
            modfn_spec(m, n)?
        }
        _ => load_spec(&a.func, None)?,
    };
    let n = spec.n;
    if a.preset != Preset::Thm12 && a.share {
        return Err(Error::Param("--share applies to preset thm12 only".into()));
    }
    if a.dry_run && !matches!(a.preset, Preset::Thm31 | Preset::Thm11) {
        return Err(Error::Param("--dry-run supports presets thm31 and thm11".into()));
    }
    if a.dump_poly.is_some() && !matches!(a.preset, Preset::Thm31 | Preset::Thm11) {
        return Err(Error::Param("--dump-poly supports presets thm31 and thm11".into()));
    }
    let circuit = match a.preset {
        Preset::Thm31 | Preset::Thm11 => {
            if a.m.is_some() || a.depth.is_some() {
                return Err(Error::Param("--m and --depth do not apply to depth-3 presets".into()));
            }
            let params = depth3_params(a.preset, n, a.k)?;
            if let Some(path) = &a.dump_poly {
                write_output(Some(path), &dump_polys(&spec, &params))?;
            }
            if a.dry_run {
                let count = count_depth3_with(&spec, &params)?;
                println!("gates={}\nwires={}", count.gates, count.wires);
                return Ok(0);
            }
            synth_depth3_with(&spec, &params)?
        }
        Preset::Thm12 => synth_depthd(
            &spec,
            a.m.unwrap_or(30),
            a.depth.unwrap_or(4),
            DepthdOptions { share: a.share },
        )?,
        Preset::Thm14 => {
            let params = AccParams::new(a.m.unwrap_or(42), a.depth.unwrap_or(4), n)?;
            synth_symmetric_acc(&spec, &params)?
        }
        Preset::Modfn => {
            let m = match a.m {
                Some(m) => m,
                None => match spec.name.strip_prefix("mod:").and_then(|m| m.parse().ok()) {
                    Some(m) => m,
                    None => return Err(Error::Param("preset modfn needs --m or --fn mod:M".into())),
                },
            };
            if spec != modfn_spec(m, n)? {
                return Err(Error::Param(format!("preset modfn computes mod:{m}, not {}", spec.name)));
            }
            synth_modm_function(n, &factorize(m), a.depth.unwrap_or(4))?
        }
    };
    let circuit = if a.literal { to_literal_model(&circuit) } else { circuit };
    write_output(a.output.as_deref(), &serialize_netlist(&circuit))?;
    Ok(0)
}

fn verify(a: VerifyArgs) -> Result<i32> {
    let c = load_circuit(&a.circuit)?;
    let spec = load_spec(&a.func, Some(c.n()))?;
    let mut opts = match a.samples {
        Some(s) => VerifyOptions::sampled(s, a.seed),
        None => VerifyOptions::default(),
    };
    opts.force = a.force;
    opts = opts.with_threads(
        a.threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |t| t.get())),
    );
    let probes = a.probe.iter().map(|p| p.parse::<Probe>()).collect::<Result<Vec<_>>>()?;
    let mut report = check_equiv(&c, &spec, &opts)?;
    for p in &probes {
        report.invariants.push(check_invariant(&c, p, &opts)?);
    }
    print!("{report}");
    Ok(if report.passed() { 0 } else { 1 })
}

fn stats(a: StatsArgs) -> Result<i32> {
    print!("{}", load_circuit(&a.circuit)?.metrics());
    Ok(0)
}

fn eval(a: EvalArgs) -> Result<i32> {
    let c = load_circuit(&a.circuit)?;
    let x = parse_bitstring(&a.input)?;
    println!("{}", u8::from(c.evaluate(&x)?));
    Ok(0)
}

fn report(a: ReportArgs) -> Result<i32> {
    let kind = match a.preset {
        Preset::Thm11 => GrowthKind::Depth3 { k: a.k.unwrap_or(3) },
        Preset::Thm31 if a.k.is_none() => GrowthKind::Depth3Preset31,
        Preset::Thm31 => return Err(Error::Param("--k does not apply to preset thm31".into())),
        _ => return Err(Error::Param("report supports presets thm11 and thm31".into())),
    };
    let r = growth_report(kind, &a.grid)?;
    write_output(a.output.as_deref(), &r.to_csv())?;
    eprintln!("beta={:.4}", r.beta);
    Ok(0)
}

fn rewrite(a: RewriteArgs) -> Result<i32> {
    let c = load_circuit(&a.circuit)?;
    let out = subst_majority(
        &c,
        a.m,
        a.depth,
        SubstOptions {
            acc: a.acc,
            share: a.share,
        },
    )?;
    write_output(a.output.as_deref(), &serialize_netlist(&out))?;
    Ok(0)
}
