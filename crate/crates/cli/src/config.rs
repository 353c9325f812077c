use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lse_core::Constraint;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A single value (`2`) or an inclusive linear range `start:stop:steps`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Value(f64),
    Text(String),
}

impl AlphaSpec {
    pub fn grid(&self) -> Result<Vec<f64>, ConfigError> {
        let text = match self {
            Self::Value(v) => return check_alpha(vec![*v]),
            Self::Text(t) => t.trim(),
        };
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| ConfigError(format!("alpha: cannot parse {s:?}")));
        match parts.as_slice() {
            [v] => check_alpha(vec![num(v)?]),
            [a, b, n] => {
                let (a, b) = (num(a)?, num(b)?);
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| ConfigError(format!("alpha: step count {n:?} is not a positive integer")))?;
                if n == 0 {
                    return Err(ConfigError("alpha: need at least one step".into()));
                }
                if n == 1 {
                    if a != b {
                        return Err(ConfigError(format!("alpha: one step cannot span {a}..{b}")));
                    }
                    return check_alpha(vec![a]);
                }
                if b.partial_cmp(&a) != Some(std::cmp::Ordering::Greater) {
                    return Err(ConfigError(format!("alpha: empty range {a}:{b}")));
                }
                let h = (b - a) / (n - 1) as f64;
                check_alpha((0..n).map(|i| if i + 1 == n { b } else { a + h * i as f64 }).collect())
            }
            _ => Err(ConfigError(format!("alpha: expected VALUE or START:STOP:STEPS, got {text:?}"))),
        }
    }
}

fn check_alpha(v: Vec<f64>) -> Result<Vec<f64>, ConfigError> {
    match v.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        Some(a) => Err(ConfigError(format!("alpha must be positive and finite, got {a}"))),
        None => Ok(v),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// `none`, `disk:P`, `circle:P`, `psk:M` or `psk:M:P`.
pub fn parse_constraint(s: &str) -> Result<Constraint, ConfigError> {
    let bad = || ConfigError(format!("constraint {s:?}: expected none, disk:P, circle:P, psk:M or psk:M:P"));
    let parts: Vec<&str> = s.trim().split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let set = match parts.as_slice() {
        ["none"] | ["unconstrained"] => Constraint::Unconstrained,
        ["disk", p] => Constraint::Disk { power: num(p)? },
        ["circle", p] => Constraint::Circle { power: num(p)? },
        ["psk", m] | ["psk", m, _] => Constraint::Mpsk {
            order: m.trim().parse().map_err(|_| bad())?,
            power: parts.get(2).map_or(Ok(1.0), |p| num(p))?,
        },
        _ => return Err(bad()),
    };
    set.validate().map_err(|e| ConfigError(format!("constraint {s:?}: {e}")))?;
    Ok(set)
}

/// Options shared by every subcommand. Each may also come from `--config FILE` (TOML, same
/// names with `-` written as `_`); flags override the file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    /// TOML file with any of these options.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Per-antenna set: none, disk:P, circle:P, psk:M[:P].
    #[arg(long)]
    pub constraint: Option<String>,
    /// Load N/K as VALUE or START:STOP:STEPS (inclusive).
    #[arg(long, value_parser = |s: &str| Ok::<_, String>(AlphaSpec::Text(s.into())))]
    pub alpha: Option<AlphaSpec>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub sigma_u2: Option<f64>,
    /// Receiver noise power (rate only).
    #[arg(long)]
    pub sigma_n2: Option<f64>,
    /// Pin the per-antenna average power; lambda is then solved for.
    #[arg(long)]
    pub q: Option<f64>,
    /// Peak-to-average power ratio in dB: disk of power q 10^(PAPR/10); 0 dB is the circle.
    #[arg(long)]
    pub papr_db: Option<f64>,
    /// Users per simulated channel.
    #[arg(long = "K", alias = "users")]
    #[serde(rename = "K")]
    pub users: Option<usize>,
    /// Antennas (ofdm-check only; simulations use round(alpha K)).
    #[arg(long = "N", alias = "antennas")]
    #[serde(rename = "N")]
    pub antennas: Option<usize>,
    /// Subcarriers (ofdm-check).
    #[arg(long = "L", alias = "subcarriers")]
    #[serde(rename = "L")]
    pub subcarriers: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Gauss-Hermite nodes per axis for the 1-RSB integrals.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Fixed-point tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Search bracket for the rate-optimal gamma.
    #[arg(long)]
    pub gamma_min: Option<f64>,
    #[arg(long)]
    pub gamma_max: Option<f64>,
    /// Also solve 1-RSB in `sweep`.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub rsb: Option<bool>,
    /// Largest KS distance ofdm-check accepts.
    #[arg(long)]
    pub ks_max: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => { $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )* };
}

impl Options {
    pub fn load(file: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(file)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", file.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", file.display())))
    }

    /// `self` with every option set in `flags` replaced.
    pub fn overlay(mut self, flags: &Self) -> Self {
        overlay!(self, flags; constraint, alpha, gamma, lambda, sigma_u2, sigma_n2, q, papr_db, users,
            antennas, subcarriers, trials, seed, nodes, tol, gamma_min, gamma_max, rsb, ks_max, output, format);
        self
    }
}

/// Validated options with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub constraint: Constraint,
    pub constraint_text: String,
    pub alphas: Vec<f64>,
    pub params: lse_core::Params,
    pub q: Option<f64>,
    pub users: usize,
    pub antennas: usize,
    pub subcarriers: usize,
    pub trials: usize,
    pub seed: u64,
    pub nodes: usize,
    pub tol: f64,
    pub gamma_bracket: (f64, f64),
    pub rsb: bool,
    pub ks_max: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn resolve(o: &Options) -> Result<Self, ConfigError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(ConfigError(format!("{name} must be positive and finite, got {v}")))
            }
        };
        let (constraint, constraint_text, q) = match (o.papr_db, &o.constraint) {
            (Some(_), Some(c)) if c.trim() != "none" => {
                return Err(ConfigError("give either --papr-db or --constraint, not both".into()))
            }
            (Some(papr), _) => {
                if !(papr >= 0.0 && papr.is_finite()) {
                    return Err(ConfigError(format!("PAPR must be >= 0 dB, got {papr}")));
                }
                let q = positive("q", o.q.unwrap_or(1.0))?;
                let peak = q * 10f64.powf(papr / 10.0);
                if papr == 0.0 {
                    (Constraint::Circle { power: q }, format!("circle:{q}"), None)
                } else {
                    (Constraint::Disk { power: peak }, format!("disk:{peak}"), Some(q))
                }
            }
            (None, c) => {
                let text = c.clone().unwrap_or_else(|| "none".into());
                let set = parse_constraint(&text)?;
                let q = o.q.map(|q| positive("q", q)).transpose()?;
                match (set, q) {
                    (Constraint::Circle { power } | Constraint::Mpsk { power, .. }, Some(q)) if q != power => {
                        return Err(ConfigError(format!("{text} fixes the average power at {power}; drop --q")))
                    }
                    (Constraint::Circle { .. } | Constraint::Mpsk { .. }, _) => (set, text, None),
                    (Constraint::Disk { power }, Some(q)) if q >= power => {
                        return Err(ConfigError(format!("--q {q} must lie below the peak power {power}")))
                    }
                    _ => (set, text, q),
                }
            }
        };
        let alphas = o.alpha.clone().unwrap_or(AlphaSpec::Value(2.0)).grid()?;
        let params = lse_core::Params {
            gamma: o.gamma.unwrap_or(1.0),
            lambda: o.lambda.unwrap_or(0.0),
            sigma_u2: o.sigma_u2.unwrap_or(1.0),
            sigma_n2: o.sigma_n2.unwrap_or(1.0),
        };
        params.validate().map_err(|e| ConfigError(e.to_string()))?;
        let count = |name: &str, v: Option<usize>, default: usize| match v.unwrap_or(default) {
            0 => Err(ConfigError(format!("{name} must be at least 1"))),
            n => Ok(n),
        };
        let nodes = count("nodes", o.nodes, 40)?;
        let tol = positive("tol", o.tol.unwrap_or(1e-10))?;
        let gamma_bracket = (positive("gamma-min", o.gamma_min.unwrap_or(1e-2))?, positive("gamma-max", o.gamma_max.unwrap_or(1e3))?);
        if gamma_bracket.1 <= gamma_bracket.0 {
            return Err(ConfigError(format!("empty gamma bracket {gamma_bracket:?}")));
        }
        let ks_max = o.ks_max.unwrap_or(0.05);
        if !(0.0..=1.0).contains(&ks_max) {
            return Err(ConfigError(format!("ks-max must lie in [0, 1], got {ks_max}")));
        }
        Ok(Self {
            constraint,
            constraint_text,
            alphas,
            params,
            q,
            users: count("K", o.users, 200)?,
            antennas: count("N", o.antennas, 100)?,
            subcarriers: count("L", o.subcarriers, 32)?,
            trials: count("trials", o.trials, 50)?,
            seed: o.seed.unwrap_or(0),
            nodes,
            tol,
            gamma_bracket,
            rsb: o.rsb.unwrap_or(false),
            ks_max,
            output: o.output.clone(),
            format: o.format.unwrap_or(Format::Csv),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_grids() {
        assert_eq!(AlphaSpec::Value(2.0).grid().unwrap(), vec![2.0]);
        assert_eq!(AlphaSpec::Text("1:2:3".into()).grid().unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(AlphaSpec::Text("3".into()).grid().unwrap(), vec![3.0]);
        for bad in ["2:1:3", "1:2:0", "1:2", "x", "-1", "0:1:2"] {
            assert!(AlphaSpec::Text(bad.into()).grid().is_err(), "{bad}");
        }
    }

    #[test]
    fn constraints() {
        assert_eq!(parse_constraint("none").unwrap(), Constraint::Unconstrained);
        assert_eq!(parse_constraint("disk:2").unwrap(), Constraint::Disk { power: 2.0 });
        assert_eq!(parse_constraint("psk:8").unwrap(), Constraint::Mpsk { order: 8, power: 1.0 });
        assert_eq!(parse_constraint("psk:4:0.5").unwrap(), Constraint::Mpsk { order: 4, power: 0.5 });
        for bad in ["disk", "disk:-1", "psk:1", "psk:x", "ring:1", "circle:0"] {
            assert!(parse_constraint(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn papr_sets_the_peak() {
        let o = Options { papr_db: Some(3.0), q: Some(0.5), ..Options::default() };
        let c = RunConfig::resolve(&o).unwrap();
        let Constraint::Disk { power } = c.constraint else { panic!("{c:?}") };
        assert!((power - 0.5 * 10f64.powf(0.3)).abs() < 1e-15);
        assert_eq!(c.q, Some(0.5));
        let o = Options { papr_db: Some(0.0), q: Some(0.5), ..Options::default() };
        assert_eq!(RunConfig::resolve(&o).unwrap().constraint, Constraint::Circle { power: 0.5 });
    }

    #[test]
    fn flags_override_file() {
        let file: Options = toml::from_str("alpha = \"1:2:2\"\nseed = 3\nK = 10\n").unwrap();
        let flags = Options { seed: Some(9), ..Options::default() };
        let c = RunConfig::resolve(&file.overlay(&flags)).unwrap();
        assert_eq!((c.seed, c.users, c.alphas.clone()), (9, 10, vec![1.0, 2.0]));
        assert!(toml::from_str::<Options>("alpah = 2").is_err());
    }
}
