//! Command-line front end: enumerate cut-and-project points, scan defect
//! profiles, expand continued fractions, run the bounded-distance pipeline,
//! and compare measures.
//!
//! Exit codes: 0 success, 2 argument/parse errors, 3 semantic errors
//! (invalid schemes, weights, regions), 4 failed tolerance or verdict.

use std::fs;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cutbound::bdlab::{
    bd_compare, defect_profile, main_theorem_pipeline, realize_comb, Measure, Verdict,
};
use cutbound::cfrac::{cf_convergents, cf_expand, gl_condition};
use cutbound::exactnum::{parse_quadnum, QuadNum, Rational};
use cutbound::scheme::{fibonacci_preset, FibonacciKind, Scheme};
use cutbound::weights::{make_c2_dome, make_hat, WeightFn};

#[derive(Parser)]
#[command(name = "cutbound", version, about = "cut-and-project schemes and bounded-distance analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SchemeArgs {
    /// Scheme description file (JSON).
    #[arg(long)]
    scheme: Option<String>,
    /// Built-in scheme: fibonacci-full or fibonacci-half.
    #[arg(long)]
    preset: Option<String>,
    /// Weight: "hat(lo,peak,hi,height)", "dome(lo,hi,amplitude)" or "indicator".
    #[arg(long)]
    weight: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the CPS points on [0, T] as CSV.
    Generate {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 100)]
        t_max: i64,
        #[arg(long)]
        out: Option<String>,
        /// Bits of precision for printed approximations.
        #[arg(long, default_value_t = 64)]
        precision: u32,
    },
    /// Defect profile of the (weighted) comb against its exact density.
    Scan {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 1000)]
        t_max: i64,
        /// Comma-separated checkpoint times.
        #[arg(long)]
        checkpoints: Option<String>,
        #[arg(long)]
        out: Option<String>,
        #[arg(long, default_value_t = 64)]
        precision: u32,
    },
    /// Continued fraction expansion, convergents and admissibility sums.
    Cfrac {
        /// A quadratic number, e.g. "1/2+1/2*sqrt(5)".
        value: String,
        /// Default square-free d when the text omits sqrt().
        #[arg(long)]
        d: Option<u64>,
        #[arg(long, default_value_t = 10)]
        convergents: usize,
        #[arg(long, default_value_t = 200)]
        terms: usize,
    },
    /// Bounded-distance pipeline: normalize, certify, report JSON.
    Brs {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Requested region rescale (rational, e.g. 1 or 1/2).
        #[arg(long, default_value = "1")]
        rescale: String,
        /// Comma-separated sample horizons for the defect growth check.
        #[arg(long, default_value = "100,1000")]
        samples: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Sup-over-intervals distance between the comb and its mean density.
    Compare {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 1000)]
        t_max: i64,
        /// Fail (exit 4) if the sup exceeds this bound.
        #[arg(long)]
        bound: Option<f64>,
        #[arg(long, default_value_t = 100)]
        random: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        precision: u32,
    },
}

const EXIT_SEMANTIC: u8 = 3;
const EXIT_TOLERANCE: u8 = 4;

struct Failure {
    code: u8,
    message: String,
}

fn semantic<E: std::fmt::Display>(e: E) -> Failure {
    Failure { code: EXIT_SEMANTIC, message: e.to_string() }
}

fn load_scheme(args: &SchemeArgs) -> Result<Scheme, Failure> {
    match (&args.scheme, &args.preset) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(semantic)?;
            Scheme::from_json(&text).map_err(semantic)
        }
        (None, Some(name)) => match name.as_str() {
            "fibonacci-full" => Ok(fibonacci_preset(FibonacciKind::Full)),
            "fibonacci-half" => Ok(fibonacci_preset(FibonacciKind::Half)),
            other => Err(semantic(format!("unknown preset '{other}'"))),
        },
        _ => Err(semantic("exactly one of --scheme or --preset is required")),
    }
}

fn parse_weight(spec: &str, d: u64) -> Result<Option<WeightFn>, Failure> {
    let spec = spec.trim();
    if spec == "indicator" {
        return Ok(None);
    }
    let (name, rest) = spec
        .split_once('(')
        .ok_or_else(|| semantic(format!("cannot parse weight '{spec}'")))?;
    let rest = rest
        .strip_suffix(')')
        .ok_or_else(|| semantic(format!("cannot parse weight '{spec}'")))?;
    let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
    let num = |s: &str| parse_quadnum(s, Some(d)).map_err(semantic);
    let rat = |s: &str| -> Result<Rational, Failure> {
        let q = num(s)?;
        if !q.is_rational() {
            return Err(semantic(format!("'{s}' must be rational")));
        }
        Ok(q.rat_part().clone())
    };
    match name {
        "hat" => {
            if parts.len() != 4 {
                return Err(semantic("hat takes (lo, peak, hi, height)"));
            }
            make_hat(num(parts[0])?, num(parts[1])?, num(parts[2])?, rat(parts[3])?)
                .map(Some)
                .map_err(semantic)
        }
        "dome" => {
            if parts.len() != 3 {
                return Err(semantic("dome takes (lo, hi, amplitude)"));
            }
            make_c2_dome(num(parts[0])?, num(parts[1])?, rat(parts[2])?)
                .map(Some)
                .map_err(semantic)
        }
        other => Err(semantic(format!("unknown weight kind '{other}'"))),
    }
}

fn write_out(out: &Option<String>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(semantic),
        None => {
            std::io::stdout().write_all(text.as_bytes()).map_err(semantic)?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate { scheme, t_max, out, precision } => {
            let s = load_scheme(&scheme)?;
            let weight = match &scheme.weight {
                Some(spec) => parse_weight(spec, s.d)?,
                None => None,
            };
            if t_max <= 0 {
                return Err(semantic("t-max must be positive"));
            }
            let pts = s.enumerate_points(&QuadNum::zero(s.d), &QuadNum::from_int(s.d, t_max));
            let mut text = String::from("direct,internal,m,n,mass,direct_exact\n");
            for p in &pts {
                let mass = match &weight {
                    None => QuadNum::one(s.d),
                    Some(h) => h.eval(&p.internal),
                };
                text.push_str(&format!(
                    "{:.15e},{:.15e},{},{},{:.15e},{}\n",
                    p.direct.to_f64(precision),
                    p.internal.to_f64(precision),
                    p.lattice_coords.0,
                    p.lattice_coords.1,
                    mass.to_f64(precision),
                    p.direct,
                ));
            }
            write_out(&out, &text)
        }
        Command::Scan { scheme, t_max, checkpoints, out, precision } => {
            let s = load_scheme(&scheme)?;
            let weight = match &scheme.weight {
                Some(spec) => parse_weight(spec, s.d)?,
                None => None,
            };
            if t_max <= 0 {
                return Err(semantic("t-max must be positive"));
            }
            let cps: Vec<QuadNum> = match &checkpoints {
                None => Vec::new(),
                Some(list) => list
                    .split(',')
                    .map(|p| parse_quadnum(p.trim(), Some(s.d)).map_err(semantic))
                    .collect::<Result<_, _>>()?,
            };
            let comb = realize_comb(
                &s,
                weight.as_ref(),
                &QuadNum::zero(s.d),
                &QuadNum::from_int(s.d, t_max),
            );
            let p = defect_profile(&comb, &cps);
            let mut text = String::new();
            text.push_str(&format!(
                "# atoms={} mean={:.15e} sup={:.15e} inf={:.15e} max_abs={:.15e}\n",
                p.atom_count,
                comb.mean.to_f64(precision),
                p.sup.to_f64(precision),
                p.inf.to_f64(precision),
                p.max_abs.to_f64(precision),
            ));
            text.push_str("t,defect\n");
            for (t, v) in &p.checkpoints {
                text.push_str(&format!(
                    "{:.15e},{:.15e}\n",
                    t.to_f64(precision),
                    v.to_f64(precision)
                ));
            }
            write_out(&out, &text)
        }
        Command::Cfrac { value, d, convergents, terms } => {
            let x = parse_quadnum(&value, d).map_err(semantic)?;
            let cf = cf_expand(&x).map_err(semantic)?;
            println!("{cf}");
            let (bounded, maxq) = cf.bounded_quotients();
            println!("bounded quotients: {bounded}, max: {maxq:?}");
            for c in cf_convergents(&cf, convergents) {
                println!("p{}/q{} = {}/{}", c.index, c.index, c.p, c.q);
            }
            let gl = gl_condition(&cf, terms);
            println!(
                "admissibility sums: converged={} last={:.12}",
                gl.converged,
                gl.partial_sums.last().unwrap_or(&0.0)
            );
            if !gl.converged {
                return Err(Failure {
                    code: EXIT_TOLERANCE,
                    message: "admissibility sums did not stabilize".into(),
                });
            }
            Ok(())
        }
        Command::Brs { scheme, rescale, samples, out } => {
            let s = load_scheme(&scheme)?;
            let weight = match &scheme.weight {
                Some(spec) => parse_weight(spec, s.d)?,
                None => None,
            };
            let c = parse_quadnum(&rescale, Some(s.d)).map_err(semantic)?;
            if !c.is_rational() || c.sign() <= 0 {
                return Err(semantic("rescale must be a positive rational"));
            }
            let t_samples: Vec<u32> = samples
                .split(',')
                .map(|p| p.trim().parse::<u32>().map_err(semantic))
                .collect::<Result<_, _>>()?;
            let rep = main_theorem_pipeline(&s, weight.as_ref(), c.rat_part().clone(), &t_samples)
                .map_err(semantic)?;
            let text = serde_json::to_string_pretty(&rep).map_err(semantic)?;
            write_out(&out, &format!("{text}\n"))?;
            if rep.verdict == Verdict::Bounded && rep.hypotheses_satisfied {
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_TOLERANCE,
                    message: format!(
                        "verdict: {:?}, hypotheses satisfied: {}",
                        rep.verdict, rep.hypotheses_satisfied
                    ),
                })
            }
        }
        Command::Compare { scheme, t_max, bound, random, seed, precision } => {
            let s = load_scheme(&scheme)?;
            let weight = match &scheme.weight {
                Some(spec) => parse_weight(spec, s.d)?,
                None => None,
            };
            if t_max <= 0 {
                return Err(semantic("t-max must be positive"));
            }
            let hi = QuadNum::from_int(s.d, t_max);
            let comb = realize_comb(&s, weight.as_ref(), &QuadNum::zero(s.d), &hi);
            let mean = comb.mean.clone();
            let rep = bd_compare(
                &Measure::Comb(comb),
                &Measure::Lebesgue { density: mean },
                &hi,
                random,
                seed,
            )
            .map_err(semantic)?;
            println!(
                "sup over intervals: {:.15e} (events: {}, random witness: {:.15e})",
                rep.sup_interval.to_f64(precision),
                rep.events,
                rep.random_max.to_f64(precision)
            );
            if let Some(b) = bound {
                if rep.sup_interval.to_f64(precision) > b {
                    return Err(Failure {
                        code: EXIT_TOLERANCE,
                        message: format!("sup exceeds bound {b}"),
                    });
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
