//! Scenario runner for the eqlab toolkit: one subcommand per computation,
//! flat `key = value` scenario files, CSV/JSON/SVG output with provenance.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::config::{parse_file, schema_help, Scenario, SUBCOMMANDS};
use crate::error::CliError;
use crate::output::{Format, Provenance};

/// What each subcommand computes.
fn about(subcommand: &str) -> &'static str {
    match subcommand {
        "centering" => {
            "Check fiducial centring (<x> = 0 and <-i hbar d> = 0 for the Gaussian; <x> = 1 and zero dilation moment \
             for the affine x^(a-1/2) e^(-a x) fiducial) and recover the labels (p, q) of transported coherent states."
        }
        "symbol" => {
            "Weak symbol H(p, q) = <p, q| H |p, q> of an operator Hamiltonian by factor transport (D -> p + D, X -> q + x \
             canonically; D -> p + D/q, X -> q x for the affine family)."
        }
        "metric" => {
            "Fubini-Study metric g_ij = 2 hbar Re[<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>] of the coherent-state \
             sheet; flat diag(1/omega, omega) for the Gaussian, diag(q^2/beta, beta/q^2) for the affine family. Also \
             reports the scalar curvature."
        }
        "curvature" => {
            "Scalar curvature of the coherent-state sheet along a line of fixed p: 0 for the Gaussian family and \
             -2/beta for the affine family."
        }
        "evolve-classical" => {
            "Enhanced classical flow dp/dt = -dH/dq, dq/dt = dH/dp of the weak symbol by fixed-step RK4, with a \
             singularity flag when a half-line trajectory reaches the q floor."
        }
        "evolve-quantum" => {
            "Crank-Nicolson evolution of a coherent state under the operator Hamiltonian, tracking <x>, <p> and <H> \
             against the enhanced classical trajectory started from the same labels."
        }
        "model-one" => {
            "Model One: classical q p^2 versus enhanced q p^2 + C/q with C = hbar beta/2. The enhanced orbit \
             q(t) = E t^2 + 2 q0 p0 t + q0 bounces at q = C/E; C = 0 collapses at t = -1/p0."
        }
        "model-two" => {
            "Model Two: expectation of H1 = H_p + H_r + 4 nu :H_r^2: in reducible-representation coherent states, \
             equal to (p^2 + (1 + zeta^2) m^2 q^2)/2 + nu zeta^4 m^4 (q^2)^2. Keys m0_sq and lambda0 solve for m and nu."
        }
        "charfn" => {
            "Characteristic function of a rotationally symmetric density in N dimensions: exact (r, theta) quadrature \
             against the steepest-descent form int exp(-p^2 r^2 / (2 (N-2) hbar^2)) w(r) dr, and the Gaussian \
             mixture int exp(-b p^2/hbar) dmu(b)."
        }
        _ => "",
    }
}

fn common_args(cmd: Command) -> Command {
    cmd.arg(
        Arg::new("scenario")
            .long("scenario")
            .value_name("PATH")
            .help("scenario file with `key = value` lines"),
    )
    .arg(
        Arg::new("out")
            .long("out")
            .value_name("DIR")
            .help("write <DIR>/<subcommand>.<ext> instead of printing to stdout"),
    )
    .arg(
        Arg::new("seed")
            .long("seed")
            .value_name("INT")
            .value_parser(clap::value_parser!(u64))
            .help("seed for randomised sampling (overrides the scenario)"),
    )
    .arg(
        Arg::new("format")
            .long("format")
            .value_name("FORMAT")
            .value_parser(["csv", "json", "svg"])
            .help("output format"),
    )
    .arg(Arg::new("quiet").long("quiet").short('q').action(ArgAction::SetTrue).help("suppress the summary line"))
    .arg(
        Arg::new("set")
            .long("set")
            .value_name("KEY=VALUE")
            .action(ArgAction::Append)
            .help("override one scenario key; `--KEY VALUE` is equivalent"),
    )
}

pub fn cli() -> Command {
    let mut cmd = Command::new("eqlab")
        .version(output::VERSION)
        .about("Coherent-state quantization laboratory")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for name in SUBCOMMANDS {
        cmd = cmd.subcommand(common_args(Command::new(*name).about(about(name)).after_help(schema_help(name))));
    }
    cmd
}

const RESERVED: &[&str] = &["scenario", "out", "seed", "format", "quiet", "set", "help", "version"];

/// Rewrites `--key value` and `--key=value` for scenario keys into
/// `--set key=value` so clap only sees its own flags.
pub fn normalize_args(args: Vec<OsString>) -> Vec<OsString> {
    let mut out = Vec::with_capacity(args.len());
    let mut it = args.into_iter().peekable();
    while let Some(arg) = it.next() {
        let Some(text) = arg.to_str().and_then(|s| s.strip_prefix("--")).map(str::to_string) else {
            out.push(arg);
            continue;
        };
        let (name, inline) = match text.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (text.clone(), None),
        };
        if name.is_empty() || RESERVED.contains(&name.as_str()) {
            out.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => match it.next() {
                Some(v) => v.to_string_lossy().into_owned(),
                None => {
                    // leave the bare flag for clap to reject
                    out.push(arg);
                    continue;
                }
            },
        };
        out.push("--set".into());
        out.push(format!("{name}={value}").into());
    }
    out
}

/// Result of a successful run.
pub struct RunOutput {
    pub text: String,
    pub path: Option<PathBuf>,
    pub summary: String,
}

pub fn run_matches(subcommand: &str, m: &ArgMatches) -> Result<RunOutput, CliError> {
    let file = match m.get_one::<String>("scenario") {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read scenario `{path}`: {e}")))?;
            parse_file(path, &text)?
        }
        None => Vec::new(),
    };
    let overrides = m
        .get_many::<String>("set")
        .into_iter()
        .flatten()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::Config(format!("command line: expected KEY=VALUE, found `{kv}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let scenario = Scenario::resolve(subcommand, file, overrides, m.get_one::<u64>("seed").copied())?;
    let format = match m.get_one::<String>("format") {
        Some(f) => Format::parse(f)?,
        None => commands::default_format(subcommand),
    };
    let outcome = commands::run(&scenario, format)?;
    let text = output::render(&outcome.body, &Provenance::of(&scenario));
    let path = match m.get_one::<String>("out") {
        Some(dir) => Some(output::write(dir.as_ref(), subcommand, format, &text)?),
        None => None,
    };
    Ok(RunOutput { text, path, summary: outcome.summary })
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn main_with(args: Vec<OsString>) -> i32 {
    let matches = match cli().try_get_matches_from(normalize_args(args)) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let quiet = sub.get_flag("quiet");
    match run_matches(name, sub) {
        Ok(out) => {
            match &out.path {
                Some(path) => {
                    if !quiet {
                        eprintln!("{}", out.summary);
                        eprintln!("wrote {}", path.display());
                    }
                }
                None => {
                    use std::io::Write as _;
                    let mut stdout = std::io::stdout().lock();
                    match stdout.write_all(out.text.as_bytes()).and_then(|_| stdout.flush()) {
                        Ok(()) => {}
                        // a closed pipe (e.g. `| head`) is not a failure
                        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => return 0,
                        Err(e) => {
                            eprintln!("eqlab {name}: cannot write output: {e}");
                            return 2;
                        }
                    }
                    if !quiet {
                        eprintln!("{}", out.summary);
                    }
                }
            }
            0
        }
        Err(e) => {
            eprintln!("eqlab {name}: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn scenario_keys_become_set_flags() {
        let got = normalize_args(args(&["eqlab", "model-two", "--N", "3", "--zeta=0.5", "--quiet", "--p0", "-0.5"]));
        assert_eq!(
            got,
            args(&["eqlab", "model-two", "--set", "N=3", "--set", "zeta=0.5", "--quiet", "--set", "p0=-0.5"])
        );
    }

    #[test]
    fn every_subcommand_has_help() {
        for name in SUBCOMMANDS {
            assert!(!about(name).is_empty());
        }
        cli().debug_assert();
    }
}
