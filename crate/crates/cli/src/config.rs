//! Flat `key = value` scenario files, their schema and command-line
//! overrides.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::CliError;

/// Accepted value shapes; every value is checked before any computation.
#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Float,
    Positive,
    NonNegative,
    /// `0 ≤ x < 1`.
    Unit,
    /// Integer with a lower bound.
    Count(u64),
    Choice(&'static [&'static str]),
    Text,
    /// Comma-separated floats.
    FloatList,
    /// `auto` or a non-negative float.
    AutoOrFloat,
    /// `auto` or any finite float.
    AutoOrSigned,
}

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub default: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: &'static str, help: &'static str) -> Key {
    Key { name, kind, default, help }
}

const FAMILY: Kind = Kind::Choice(&["gaussian", "affine"]);

const COMMON: &[Key] = &[
    key("family", FAMILY, "gaussian", "fiducial family: gaussian or affine"),
    key("omega", Kind::Positive, "1", "Gaussian fiducial frequency"),
    key("beta", Kind::Positive, "2", "affine fiducial parameter (beta/hbar >= 1)"),
    key("hbar", Kind::Positive, "1", "Planck constant"),
];

const CENTERING: &[Key] = &[
    key("points", Kind::Count(1), "20", "number of random phase points"),
    key("p_span", Kind::Positive, "2", "momenta drawn from [-p_span, p_span]"),
    key("q_min", Kind::Float, "0.5", "smallest position label"),
    key("q_max", Kind::Float, "3", "largest position label"),
];

const SYMBOL: &[Key] = &[
    key("operator", Kind::Text, "auto", "operator words, e.g. '0.5 * D D + 0.5 * X X'; auto picks the family's standard Hamiltonian"),
    key("method", Kind::Choice(&["auto", "quadrature"]), "auto", "closed-form moments or quadrature"),
    key("p", Kind::Float, "0.5", "evaluation momentum"),
    key("q", Kind::Float, "1", "evaluation position"),
    key("span", Kind::Positive, "2", "plotted momentum half-range"),
];

const METRIC: &[Key] = &[
    key("p", Kind::Float, "0", "base momentum"),
    key("q", Kind::Float, "1", "base position"),
    key("q_lo", Kind::Float, "0.5", "plotted position range start"),
    key("q_hi", Kind::Float, "4", "plotted position range end"),
    key("samples", Kind::Count(2), "8", "plotted samples"),
];

const CURVATURE: &[Key] = &[
    key("p", Kind::Float, "0", "momentum of the sampled line"),
    key("q_lo", Kind::Float, "0.5", "first position"),
    key("q_hi", Kind::Float, "4", "last position"),
    key("samples", Kind::Count(1), "4", "number of positions"),
];

const EVOLVE_CLASSICAL: &[Key] = &[
    key("operator", Kind::Text, "auto", "operator Hamiltonian; its weak symbol drives the flow"),
    key("p0", Kind::Float, "0.5", "initial momentum"),
    key("q0", Kind::Float, "1", "initial position"),
    key("t_end", Kind::Float, "1", "final time (negative runs backward)"),
    key("dt", Kind::Positive, "0.001", "RK4 step"),
    key("q_floor", Kind::Positive, "1e-6", "singularity floor for half-line flows"),
];

const EVOLVE_QUANTUM: &[Key] = &[
    key("operator", Kind::Text, "auto", "operator Hamiltonian"),
    key("p0", Kind::Float, "0.6", "initial momentum label"),
    key("q0", Kind::Float, "0.8", "initial position label"),
    key("t_end", Kind::AutoOrSigned, "auto", "final time; auto is one period for the Gaussian family and 0.5 otherwise"),
    key("dt", Kind::Positive, "0.0001", "Crank-Nicolson step"),
    key("nodes", Kind::Count(16), "4096", "grid nodes (Gaussian family)"),
    key("step", Kind::Positive, "0.01", "grid spacing (affine family)"),
    key("samples", Kind::Count(2), "200", "recorded samples"),
];

const MODEL_ONE: &[Key] = &[
    key("c", Kind::AutoOrFloat, "auto", "coupling C; auto uses hbar*beta/2 from the affine fiducial"),
    key("p0", Kind::Float, "0.5", "initial momentum"),
    key("q0", Kind::Positive, "1", "initial position"),
    key("t_min", Kind::Float, "-10", "earliest time"),
    key("t_max", Kind::Float, "10", "latest time"),
    key("dt", Kind::Positive, "0.001", "RK4 step"),
    key("stride", Kind::Count(1), "10", "write every stride-th sample"),
];

const MODEL_TWO: &[Key] = &[
    key("N", Kind::Count(1), "3", "number of degrees of freedom"),
    key("m", Kind::Positive, "1", "mass parameter"),
    key("zeta", Kind::Unit, "0.5", "correlation, 0 <= zeta < 1"),
    key("nu", Kind::NonNegative, "1", "quartic coupling"),
    key("hbar", Kind::Positive, "1", "Planck constant"),
    key("p", Kind::Text, "random", "comma-separated momenta or random"),
    key("q", Kind::Text, "random", "comma-separated positions or random"),
    key("m0_sq", Kind::AutoOrFloat, "auto", "target m0^2; with lambda0 solves for m and nu"),
    key("lambda0", Kind::AutoOrFloat, "auto", "target quartic coupling"),
    key("draws", Kind::Count(1), "1", "number of records (random labels after the first)"),
];

const CHARFN: &[Key] = &[
    key("dims", Kind::FloatList, "4,8,16,32,64", "dimensions N (each >= 3)"),
    key("p_r", Kind::FloatList, "0.5,1,2", "radial momenta"),
    key("m_prime", Kind::Positive, "1", "mass of the Gaussian ground state"),
    key("hbar", Kind::Positive, "1", "Planck constant"),
    key("atoms", Kind::Text, "auto", "measure atoms b:weight,...; auto is a single atom at 1/(4 m_prime)"),
];

/// Subcommand names in help order.
pub const SUBCOMMANDS: &[&str] = &[
    "centering",
    "symbol",
    "metric",
    "curvature",
    "evolve-classical",
    "evolve-quantum",
    "model-one",
    "model-two",
    "charfn",
];

/// Keys accepted by a subcommand.
pub fn schema(subcommand: &str) -> Vec<Key> {
    let own: &[Key] = match subcommand {
        "centering" => CENTERING,
        "symbol" => SYMBOL,
        "metric" => METRIC,
        "curvature" => CURVATURE,
        "evolve-classical" => EVOLVE_CLASSICAL,
        "evolve-quantum" => EVOLVE_QUANTUM,
        "model-one" => MODEL_ONE,
        "model-two" => return MODEL_TWO.to_vec(),
        "charfn" => return CHARFN.to_vec(),
        _ => &[],
    };
    let mut keys: Vec<Key> = if subcommand == "model-one" {
        // Model One always uses the affine fiducial
        COMMON.iter().filter(|k| k.name == "beta" || k.name == "hbar").copied().collect()
    } else {
        COMMON.to_vec()
    };
    keys.extend_from_slice(own);
    keys
}

/// Schema as help text.
pub fn schema_help(subcommand: &str) -> String {
    let mut out = String::from("Scenario keys (file `key = value` or `--key value`):\n");
    for k in schema(subcommand) {
        let _ = writeln!(out, "  {:<10} default {:<14} {}", k.name, k.default, k.help);
    }
    out
}

/// Where a value came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Default,
    File { path: String, line: usize },
    CommandLine,
}

impl std::fmt::Display for Origin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Origin::Default => write!(f, "default"),
            Origin::File { path, line } => write!(f, "{path}:{line}"),
            Origin::CommandLine => write!(f, "command line"),
        }
    }
}

/// Validated parameters of one scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub subcommand: String,
    pub seed: u64,
    values: BTreeMap<String, String>,
}

/// Raw `(key, value, origin)` entries from a scenario file.
pub fn parse_file(path: &str, text: &str) -> Result<Vec<(String, String, Origin)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let origin = Origin::File { path: path.to_string(), line: i + 1 };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("{origin}: expected `key = value`, found `{line}`")));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::Config(format!("{origin}: empty key")));
        }
        out.push((k.to_string(), v.to_string(), origin));
    }
    Ok(out)
}

fn check_value(k: &Key, v: &str, origin: &Origin) -> Result<(), CliError> {
    let bad = |what: &str| CliError::Config(format!("{origin}: key `{}` {what} (got `{v}`)", k.name));
    let float = |s: &str| s.trim().parse::<f64>().ok().filter(|x| x.is_finite());
    match k.kind {
        Kind::Float => float(v).map(|_| ()).ok_or_else(|| bad("must be a finite number")),
        Kind::Positive => float(v).filter(|x| *x > 0.0).map(|_| ()).ok_or_else(|| bad("must be positive")),
        Kind::NonNegative => float(v).filter(|x| *x >= 0.0).map(|_| ()).ok_or_else(|| bad("must be non-negative")),
        Kind::Unit => float(v)
            .filter(|x| (0.0..1.0).contains(x))
            .map(|_| ())
            .ok_or_else(|| bad("must lie in [0, 1)")),
        Kind::Count(min) => v
            .parse::<u64>()
            .ok()
            .filter(|n| *n >= min)
            .map(|_| ())
            .ok_or_else(|| bad(&format!("must be an integer >= {min}"))),
        Kind::Choice(options) => {
            if options.contains(&v) {
                Ok(())
            } else {
                Err(bad(&format!("must be one of {}", options.join(", "))))
            }
        }
        Kind::Text => Ok(()),
        Kind::FloatList => {
            if !v.is_empty() && v.split(',').all(|s| float(s).is_some()) {
                Ok(())
            } else {
                Err(bad("must be a comma-separated list of numbers"))
            }
        }
        Kind::AutoOrFloat => {
            if v == "auto" || float(v).is_some_and(|x| x >= 0.0) {
                Ok(())
            } else {
                Err(bad("must be `auto` or a non-negative number"))
            }
        }
        Kind::AutoOrSigned => {
            if v == "auto" || float(v).is_some() {
                Ok(())
            } else {
                Err(bad("must be `auto` or a number"))
            }
        }
    }
}

impl Scenario {
    /// Resolves defaults, then file entries, then command-line entries;
    /// rejects unknown keys, duplicates within one source, and bad values.
    pub fn resolve(
        subcommand: &str,
        file: Vec<(String, String, Origin)>,
        overrides: Vec<(String, String)>,
        seed: Option<u64>,
    ) -> Result<Self, CliError> {
        let keys = schema(subcommand);
        if keys.is_empty() {
            return Err(CliError::Config(format!("unknown subcommand `{subcommand}`")));
        }
        let mut values: BTreeMap<String, (String, Origin)> = keys
            .iter()
            .map(|k| (k.name.to_string(), (k.default.to_string(), Origin::Default)))
            .collect();
        let mut file_seed = None;
        let mut seen = BTreeMap::new();
        let entries = file
            .into_iter()
            .chain(overrides.into_iter().map(|(k, v)| (k, v, Origin::CommandLine)));
        for (k, v, origin) in entries {
            if let Some(prev) = seen.insert((k.clone(), origin == Origin::CommandLine), origin.clone()) {
                return Err(CliError::Config(format!("{origin}: key `{k}` already set at {prev}")));
            }
            match k.as_str() {
                "subcommand" => {
                    if v != subcommand {
                        return Err(CliError::Config(format!(
                            "{origin}: scenario is for `{v}` but `{subcommand}` was requested"
                        )));
                    }
                }
                "seed" => {
                    let s = v
                        .parse::<u64>()
                        .map_err(|_| CliError::Config(format!("{origin}: seed must be a non-negative integer (got `{v}`)")))?;
                    file_seed = Some(s);
                }
                _ => {
                    let Some(spec) = keys.iter().find(|s| s.name == k) else {
                        let names: Vec<&str> = keys.iter().map(|s| s.name).collect();
                        return Err(CliError::Config(format!(
                            "{origin}: unknown key `{k}` for `{subcommand}` (accepted: {})",
                            names.join(", ")
                        )));
                    };
                    check_value(spec, &v, &origin)?;
                    values.insert(k, (v, origin));
                }
            }
        }
        Ok(Self {
            subcommand: subcommand.to_string(),
            seed: seed.or(file_seed).unwrap_or(0),
            values: values.into_iter().map(|(k, (v, _))| (k, v)).collect(),
        })
    }

    pub fn text(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("key `{key}` not in schema"))
    }

    /// Validated numeric value.
    pub fn float(&self, key: &str) -> f64 {
        self.text(key).trim().parse().expect("validated number")
    }

    pub fn count(&self, key: &str) -> usize {
        self.text(key).parse().expect("validated integer")
    }

    pub fn floats(&self, key: &str) -> Vec<f64> {
        self.text(key).split(',').map(|s| s.trim().parse().expect("validated list")).collect()
    }

    /// `None` for `auto`.
    pub fn auto_or_float(&self, key: &str) -> Option<f64> {
        match self.text(key) {
            "auto" => None,
            v => Some(v.trim().parse().expect("validated number")),
        }
    }

    /// Canonical text of every resolved parameter, the input of the
    /// scenario hash.
    pub fn canonical_text(&self) -> String {
        let mut out = format!("subcommand = {}\nseed = {}\n", self.subcommand, self.seed);
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
