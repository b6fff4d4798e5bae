//! The `MODCKT 1` netlist text format.
//!
//! ```text
//! MODCKT 1
//! inputs <n>
//! gate <id> INPUT <idx> | CONST1 | CONST0 | NOT <in> | AND <in>... | OR <in>...
//!         | SYM <bitstring> <in>... | MOD <m> <shift> <in>:<mult>...
//! output <id>
//! ```

use std::fmt::Write as _;

use super::{Circuit, Gate, ModGate};
use crate::error::{Error, Result};

pub const HEADER: &str = "MODCKT 1";

pub fn serialize_netlist(c: &Circuit) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    let _ = writeln!(out, "inputs {}", c.n());
    for (id, gate) in c.gates().iter().enumerate() {
        let _ = write!(out, "gate {id} ");
        match gate {
            Gate::Input(i) => {
                let _ = write!(out, "INPUT {i}");
            }
            Gate::Const(true) => out.push_str("CONST1"),
            Gate::Const(false) => out.push_str("CONST0"),
            Gate::Not(x) => {
                let _ = write!(out, "NOT {x}");
            }
            Gate::And(xs) | Gate::Or(xs) => {
                out.push_str(if matches!(gate, Gate::And(_)) { "AND" } else { "OR" });
                for x in xs {
                    let _ = write!(out, " {x}");
                }
            }
            Gate::Sym { companion, inputs } => {
                out.push_str("SYM ");
                out.extend(companion.iter().map(|&b| if b { '1' } else { '0' }));
                for x in inputs {
                    let _ = write!(out, " {x}");
                }
            }
            Gate::Mod(g) => {
                let _ = write!(out, "MOD {} {}", g.modulus, g.shift);
                for (x, m) in &g.inputs {
                    let _ = write!(out, " {x}:{m}");
                }
            }
        }
        out.push('\n');
    }
    let _ = writeln!(out, "output {}", c.output());
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| perr(line, format!("expected {what}, found `{tok}`")))
}

pub fn parse_netlist(text: &str) -> Result<Circuit> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let (ln, header) = lines.next().ok_or_else(|| perr(1, "empty netlist"))?;
    if header.trim() != HEADER {
        return Err(perr(ln, format!("expected `{HEADER}` header")));
    }
    let (ln, inputs) = lines.next().ok_or_else(|| perr(ln + 1, "missing `inputs` line"))?;
    let toks: Vec<&str> = inputs.split_whitespace().collect();
    if toks.len() != 2 || toks[0] != "inputs" {
        return Err(perr(ln, "expected `inputs <n>`"));
    }
    let n: usize = num(toks[1], ln, "input count")?;

    let mut gates = Vec::new();
    let mut output = None;
    for (ln, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if output.is_some() {
            return Err(perr(ln, "content after `output` line"));
        }
        match toks[0] {
            "output" => {
                if toks.len() != 2 {
                    return Err(perr(ln, "expected `output <id>`"));
                }
                output = Some((ln, num::<usize>(toks[1], ln, "gate id")?));
            }
            "gate" => {
                if toks.len() < 3 {
                    return Err(perr(ln, "truncated gate line"));
                }
                let id: usize = num(toks[1], ln, "gate id")?;
                if id != gates.len() {
                    return Err(perr(
                        ln,
                        format!("gate id {id} out of order, expected {}", gates.len()),
                    ));
                }
                let args = &toks[3..];
                let ids = |args: &[&str]| -> Result<Vec<usize>> {
                    args.iter()
                        .map(|t| {
                            let c: usize = num(t, ln, "gate id")?;
                            if c >= id {
                                return Err(perr(ln, format!("gate {id} refers to later gate {c}")));
                            }
                            Ok(c)
                        })
                        .collect()
                };
                let arity = |want: usize| -> Result<()> {
                    if args.len() != want {
                        return Err(perr(ln, format!("{} takes {want} argument(s)", toks[2])));
                    }
                    Ok(())
                };
                let gate = match toks[2] {
                    "INPUT" => {
                        arity(1)?;
                        let i: usize = num(args[0], ln, "input index")?;
                        if i >= n {
                            return Err(perr(ln, format!("input index {i} >= {n}")));
                        }
                        Gate::Input(i)
                    }
                    "CONST1" => {
                        arity(0)?;
                        Gate::Const(true)
                    }
                    "CONST0" => {
                        arity(0)?;
                        Gate::Const(false)
                    }
                    "NOT" => {
                        arity(1)?;
                        Gate::Not(ids(args)?[0])
                    }
                    "AND" => Gate::And(ids(args)?),
                    "OR" => Gate::Or(ids(args)?),
                    "SYM" => {
                        if args.is_empty() {
                            return Err(perr(ln, "SYM needs a companion bitstring"));
                        }
                        let companion = args[0]
                            .chars()
                            .map(|ch| match ch {
                                '0' => Ok(false),
                                '1' => Ok(true),
                                _ => Err(perr(ln, format!("bad companion bit `{ch}`"))),
                            })
                            .collect::<Result<Vec<bool>>>()?;
                        let inputs = ids(&args[1..])?;
                        if companion.len() != inputs.len() + 1 {
                            return Err(perr(
                                ln,
                                format!(
                                    "SYM companion length {} != fan-in + 1 = {}",
                                    companion.len(),
                                    inputs.len() + 1
                                ),
                            ));
                        }
                        Gate::Sym { companion, inputs }
                    }
                    "MOD" => {
                        if args.len() < 2 {
                            return Err(perr(ln, "MOD needs modulus and shift"));
                        }
                        let modulus: u64 = num(args[0], ln, "modulus")?;
                        let shift: u64 = num(args[1], ln, "shift")?;
                        if modulus < 2 {
                            return Err(perr(ln, format!("modulus {modulus} < 2")));
                        }
                        if shift >= modulus {
                            return Err(perr(ln, format!("shift {shift} >= modulus {modulus}")));
                        }
                        let mut inputs = Vec::with_capacity(args.len() - 2);
                        for a in &args[2..] {
                            let (x, m) = a
                                .split_once(':')
                                .ok_or_else(|| perr(ln, format!("expected <in>:<mult>, found `{a}`")))?;
                            let x = ids(&[x])?[0];
                            let m: u64 = num(m, ln, "multiplicity")?;
                            if m == 0 {
                                return Err(perr(ln, format!("wire {x} has multiplicity 0")));
                            }
                            inputs.push((x, m));
                        }
                        Gate::Mod(ModGate::new(modulus, shift, inputs))
                    }
                    other => return Err(perr(ln, format!("unknown gate kind `{other}`"))),
                };
                gates.push(gate);
            }
            other => return Err(perr(ln, format!("unexpected line starting with `{other}`"))),
        }
    }
    let (ln, output) = output.ok_or_else(|| perr(text.lines().count() + 1, "missing `output` line"))?;
    if output >= gates.len() {
        return Err(perr(ln, format!("output {output} does not name a gate")));
    }
    Circuit::new(n, gates, output)
}
