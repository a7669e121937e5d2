use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use scissors_core::coxeter::bugaenko_report;
use scissors_core::lfunc::{covolume_class, dedekind_euler, zeta_numeric_fe, zeta_quad_special, CovolumeCase, CovolumeParams, IntPoly};
use scissors_core::periods::{coproduct_h3, coproduct_terms, graded_dims, period_matrix_h1, period_matrix_h3, period_matrix_h3_ideal};
use scissors_core::qfield::{rational_to_string, recognize_rational};
use scissors_core::scissors::{dehn3, is_zero_dehn, reduce, DehnSum};
use scissors_core::simplex::Simplex;
use scissors_core::tiling::{check_proper, excise_all, Tiling};
use scissors_core::volume::{volume, NumericOptions};
use scissors_core::{Error, Execution};

#[derive(Parser)]
#[command(name = "scissors", version, about = "Hyperbolic volumes, Dehn invariants, simplex periods and zeta values")]
struct Cli {
    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Volume of a hyperbolic simplex.
    Volume {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, env = "SCISSORS_SEED", default_value_t = 0)]
        seed: u64,
        /// Fail with exit code 3 when the error estimate exceeds this.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Dehn invariant of a tetrahedron or a list of tetrahedra.
    Dehn {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        maxden: u64,
    },
    /// Rewrite overlapping tiles into interior-disjoint cells.
    Excise {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Probe facets of a tiling for total coverage 1.
    CheckTiling {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2_000)]
        probes: usize,
        #[arg(long, env = "SCISSORS_SEED", default_value_t = 0)]
        seed: u64,
        /// Largest coverage deviation accepted as proper.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
    },
    /// Framed period matrix of a segment or tetrahedron.
    Periods {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Exact value of the Dedekind zeta function of Q(sqrt d) at 1 - n.
    Zeta {
        #[arg(long)]
        d: i64,
        #[arg(long)]
        n: usize,
        /// Also evaluate through the functional equation with this many terms.
        #[arg(long)]
        check_terms: Option<usize>,
    },
    /// Dedekind zeta value of Q[x]/(minpoly) at s by an Euler product.
    Lvalue {
        #[arg(long)]
        minpoly: String,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 10_000)]
        pmax: u64,
    },
    /// Covolume class of an arithmetic group.
    Covolume {
        /// I, II-split, II-nonsplit or III.
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        t: u32,
        #[arg(long, default_value_t = 0)]
        r: u32,
        #[arg(long, default_value_t = 0)]
        r1: u32,
        #[arg(long, default_value_t = 0)]
        r2: u32,
        /// Minimal polynomial of a generator of k.
        #[arg(long)]
        k: Option<String>,
        /// Minimal polynomial of a generator of L.
        #[arg(long)]
        l: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        pmax: u64,
    },
    /// Full pipeline for the Bugaenko polytope in H^5.
    Bugaenko {
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, env = "SCISSORS_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        pmax: u64,
        /// Fail with exit code 3 when the relative volume error exceeds this.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Recognize a float as a rational with bounded denominator.
    Recognize {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 10_000)]
        maxden: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

enum Failure {
    Validation(String),
    Numeric(String, Option<Value>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Numeric(_) => Failure::Numeric(e.to_string(), None),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

type Outcome = Result<Value, Failure>;

/// Rounds every float to 12 significant digits.
fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
            json!(r)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

fn read_json(path: &PathBuf) -> Result<Value, Failure> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Validation(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn pairs(d: &DehnSum) -> Value {
    Value::Array(d.terms.iter().map(|(l, t)| json!([l, t])).collect())
}

fn run(cmd: Command, exec: Execution) -> Outcome {
    match cmd {
        Command::Volume { input, samples, seed, tol } => {
            let s = Simplex::from_json(&read_json(&input)?)?;
            let opts = NumericOptions { exec, ..NumericOptions::new(samples, seed) };
            let r = volume(&s, &opts)?;
            let out = json!({"value": r.value, "method": r.method, "err": r.err});
            match tol {
                Some(t) if r.err > t => Err(Failure::Numeric(format!("error estimate {:e} exceeds {t:e}", r.err), Some(out))),
                _ => Ok(out),
            }
        }
        Command::Dehn { input, tol, maxden } => {
            let v = read_json(&input)?;
            let simplices = match &v {
                Value::Array(a) => a.iter().map(Simplex::from_json).collect::<Result<Vec<_>, _>>()?,
                _ => vec![Simplex::from_json(&v)?],
            };
            let mut sum = DehnSum::default();
            for s in &simplices {
                sum.extend(&dehn3(s)?);
            }
            Ok(json!({
                "terms": pairs(&sum),
                "reduced": pairs(&reduce(&sum, tol, maxden)),
                "zero": is_zero_dehn(&sum, tol, maxden),
            }))
        }
        Command::Excise { input } => {
            let tiling = Tiling::from_json(&read_json(&input)?)?;
            Ok(excise_all(&tiling.tiles)?.to_json())
        }
        Command::CheckTiling { input, probes, seed, tol } => {
            let tiling = Tiling::from_json(&read_json(&input)?)?;
            let gluing = (!tiling.gluing.is_empty()).then_some(tiling.gluing.as_slice());
            let report = check_proper(&tiling.polytopes()?, gluing, probes, seed, exec)?;
            let mut out = report.to_json();
            out["proper"] = json!(report.max_deviation <= tol);
            Ok(out)
        }
        Command::Periods { input } => {
            let s = Simplex::from_json(&read_json(&input)?)?;
            if s.dim() != s.ambient() {
                return Err(Failure::Validation("periods needs a top-dimensional simplex".into()));
            }
            match s.dim() {
                1 => {
                    let (y0, y1) = (s.klein(0)[0], s.klein(1)[0]);
                    let pm = period_matrix_h1(y0, y1, -1.0, 1.0)?;
                    // The Kummer period is twice the length.
                    Ok(json!({"matrix": pm.to_json(), "real_period": pm.real_period(), "length": PI * pm.real_period()}))
                }
                3 => {
                    let ideal = s.ideal_count() == 1;
                    let pm = if ideal { period_matrix_h3_ideal(&s)? } else { period_matrix_h3(&s)? };
                    let coproduct = if ideal { None } else { Some(coproduct_terms(&coproduct_h3(&pm)?)) };
                    Ok(json!({
                        "matrix": pm.to_json(),
                        "real_period": pm.real_period(),
                        "volume": (2.0 * PI).powi(2) * pm.real_period(),
                        "graded_dims": graded_dims(3, ideal)?.to_json(),
                        "coproduct": coproduct.map(|c| c.iter().map(|(l, t)| json!([l, t])).collect::<Vec<_>>()),
                    }))
                }
                m => Err(Failure::Validation(format!("periods supports dimensions 1 and 3, got {m}"))),
            }
        }
        Command::Zeta { d, n, check_terms } => {
            let z = zeta_quad_special(d, n)?;
            let mut out = json!({
                "d": d,
                "n": n,
                "value": rational_to_string(&z.value),
                "method": "bernoulli",
                "trivial_zero": z.trivial_zero,
            });
            if let Some(terms) = check_terms {
                let n32 = u32::try_from(n).map_err(|_| Failure::Validation("n too large".into()))?;
                out["functional_equation"] = json!(zeta_numeric_fe(d, n32, terms)?);
            }
            Ok(out)
        }
        Command::Lvalue { minpoly, s, pmax } => {
            let f = IntPoly::parse(&minpoly)?;
            let e = dedekind_euler(&f, s, pmax, exec)?;
            Ok(json!({
                "minpoly": f.to_string(),
                "s": s,
                "value": e.value,
                "err": e.err,
                "primes_used": e.primes_used,
                "flagged_primes": e.flagged_primes,
                "poly_used": e.poly.to_string(),
            }))
        }
        Command::Covolume { case, n, t, r, r1, r2, k, l, pmax } => {
            let case = CovolumeCase::parse(&case)?;
            let parse = |p: Option<String>| p.map(|p| IntPoly::parse(&p)).transpose();
            let params = CovolumeParams { n, t, r, r1, r2, k_poly: parse(k)?, l_poly: parse(l)?, p_max: pmax };
            Ok(covolume_class(case, &params)?.to_json())
        }
        Command::Bugaenko { samples, seed, pmax, tol } => {
            if samples < 100_000 {
                return Err(Failure::Validation("bugaenko needs at least 100000 samples".into()));
            }
            let rep = bugaenko_report(samples, seed, pmax, exec)?;
            let rel = rep.volume.err / rep.volume.value.abs();
            let out = rep.to_json();
            match tol {
                Some(t) if rel > t => Err(Failure::Numeric(format!("relative error {rel:e} exceeds {t:e}"), Some(out))),
                _ => Ok(out),
            }
        }
        Command::Recognize { x, maxden, tol } => {
            if !x.is_finite() || maxden == 0 {
                return Err(Failure::Validation("x must be finite and maxden positive".into()));
            }
            match recognize_rational(x, maxden, tol) {
                Some(q) => Ok(json!({"rational": rational_to_string(&q)})),
                None => Err(Failure::Numeric(
                    format!("no rational with denominator <= {maxden} within {tol:e}"),
                    Some(json!({"rational": null})),
                )),
            }
        }
    }
}

fn print(v: Value) {
    let text = serde_json::to_string_pretty(&round_floats(v)).expect("serializable");
    // A closed pipe is not an error worth reporting.
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 1,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match run(cli.command, exec) {
        Ok(v) => {
            print(v);
            ExitCode::SUCCESS
        }
        Err(Failure::Validation(msg)) => {
            print(json!({"error": "validation", "message": msg}));
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg, partial)) => {
            print(json!({"error": "numeric", "message": msg, "partial": partial}));
            ExitCode::from(3)
        }
    }
}
