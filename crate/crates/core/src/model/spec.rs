//! Benchmark specifications and their string form.
//!
//! Grammar: `name[:arg,arg,...]` where arguments are positional values or `key=value`.
//! Examples: `tiger-full`, `tiger-listen:0.85`, `gridworld:5`, `rocksample:4,4`,
//! `network:9`, `hallway:10`, `random:100,4,seed=7`, `random:50,3,seed=1,structured`,
//! `witness`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::benchmarks;
use super::pomdp::Pomdp;
use crate::error::{Error, Result};

/// Default Tiger listening accuracy.
pub const TIGER_ACCURACY: f64 = 0.85;

/// A named benchmark with parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BenchmarkSpec {
    /// Tiger with only the listen action.
    TigerListen { accuracy: f64 },
    /// Tiger with listen and the two open actions.
    TigerFull { accuracy: f64 },
    /// `n×n` GridWorld.
    GridWorld { n: usize },
    /// RockSample(n, k).
    RockSample { n: usize, k: usize },
    /// Network monitoring with `n` nodes.
    Network { n: usize },
    /// Hallway of length `len`.
    Hallway { len: usize },
    /// Random Dirichlet POMDP.
    Random { states: usize, observations: usize, seed: u64, structured: bool },
    /// Nine-state stationary witness.
    Witness,
}

impl BenchmarkSpec {
    /// Construct the model.
    pub fn build(&self) -> Result<Pomdp> {
        match *self {
            Self::TigerListen { accuracy } => benchmarks::tiger_listen_only(accuracy),
            Self::TigerFull { accuracy } => benchmarks::tiger_full(accuracy),
            Self::GridWorld { n } => benchmarks::gridworld(n),
            Self::RockSample { n, k } => benchmarks::rocksample(n, k),
            Self::Network { n } => benchmarks::network_monitoring(n),
            Self::Hallway { len } => benchmarks::hallway(len),
            Self::Random { states, observations, seed, structured } => {
                benchmarks::random_pomdp(states, observations, seed, structured)
            }
            Self::Witness => benchmarks::stationary_witness(),
        }
    }
}

/// Parse-and-build convenience.
pub fn make_benchmark(spec: &BenchmarkSpec) -> Result<Pomdp> {
    spec.build()
}

impl fmt::Display for BenchmarkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::TigerListen { accuracy } if accuracy == TIGER_ACCURACY => write!(f, "tiger-listen"),
            Self::TigerListen { accuracy } => write!(f, "tiger-listen:{accuracy}"),
            Self::TigerFull { accuracy } if accuracy == TIGER_ACCURACY => write!(f, "tiger-full"),
            Self::TigerFull { accuracy } => write!(f, "tiger-full:{accuracy}"),
            Self::GridWorld { n } => write!(f, "gridworld:{n}"),
            Self::RockSample { n, k } => write!(f, "rocksample:{n},{k}"),
            Self::Network { n } => write!(f, "network:{n}"),
            Self::Hallway { len } => write!(f, "hallway:{len}"),
            Self::Random { states, observations, seed, structured } => {
                write!(f, "random:{states},{observations},seed={seed}")?;
                if structured {
                    write!(f, ",structured")?;
                }
                Ok(())
            }
            Self::Witness => write!(f, "witness"),
        }
    }
}

struct Args<'a> {
    spec: &'a str,
    positional: Vec<&'a str>,
    named: Vec<(&'a str, &'a str)>,
    flags: Vec<&'a str>,
}

impl<'a> Args<'a> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::InvalidBenchmark { spec: self.spec.to_string(), reason: reason.into() }
    }

    fn parse<T: FromStr>(&self, raw: &str, what: &str) -> Result<T> {
        raw.trim().parse().map_err(|_| self.err(format!("cannot parse {what} from `{raw}`")))
    }

    fn positional<T: FromStr>(&self, idx: usize, what: &str) -> Result<T> {
        let raw = self.positional.get(idx).ok_or_else(|| self.err(format!("missing {what}")))?;
        self.parse(raw, what)
    }

    fn optional<T: FromStr>(&self, idx: usize, key: &str, default: T) -> Result<T> {
        if let Some(&(_, v)) = self.named.iter().find(|(k, _)| *k == key) {
            return self.parse(v, key);
        }
        match self.positional.get(idx) {
            Some(raw) => self.parse(raw, key),
            None => Ok(default),
        }
    }

    fn expect_at_most(&self, n: usize) -> Result<()> {
        if self.positional.len() > n {
            return Err(self.err(format!("expected at most {n} positional arguments")));
        }
        Ok(())
    }
}

impl FromStr for BenchmarkSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut args = Args { spec: s, positional: Vec::new(), named: Vec::new(), flags: Vec::new() };
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if let Some((k, v)) = part.split_once('=') {
                args.named.push((k.trim(), v.trim()));
            } else if part.chars().next().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                args.positional.push(part);
            } else {
                args.flags.push(part);
            }
        }
        let spec = match name.to_ascii_lowercase().as_str() {
            "tiger-listen" | "tiger-listen-only" => {
                args.expect_at_most(1)?;
                Self::TigerListen { accuracy: args.optional(0, "accuracy", TIGER_ACCURACY)? }
            }
            "tiger" | "tiger-full" => {
                args.expect_at_most(1)?;
                Self::TigerFull { accuracy: args.optional(0, "accuracy", TIGER_ACCURACY)? }
            }
            "gridworld" | "grid" => {
                args.expect_at_most(1)?;
                Self::GridWorld { n: args.positional(0, "grid size")? }
            }
            "rocksample" => {
                args.expect_at_most(2)?;
                Self::RockSample { n: args.positional(0, "grid size")?, k: args.positional(1, "rock count")? }
            }
            "network" | "netmon" => {
                args.expect_at_most(1)?;
                Self::Network { n: args.positional(0, "node count")? }
            }
            "hallway" => {
                args.expect_at_most(1)?;
                Self::Hallway { len: args.positional(0, "length")? }
            }
            "random" => {
                args.expect_at_most(3)?;
                let structured = args.flags.contains(&"structured");
                Self::Random {
                    states: args.positional(0, "state count")?,
                    observations: args.positional(1, "observation count")?,
                    seed: args.optional(2, "seed", 0)?,
                    structured,
                }
            }
            "witness" | "stationary-witness" => {
                args.expect_at_most(0)?;
                Self::Witness
            }
            other => return Err(args.err(format!("unknown benchmark `{other}`"))),
        };
        let allowed_flags: &[&str] = if matches!(spec, Self::Random { .. }) { &["structured"] } else { &[] };
        if let Some(flag) = args.flags.iter().find(|f| !allowed_flags.contains(f)) {
            return Err(args.err(format!("unknown flag `{flag}`")));
        }
        Ok(spec)
    }
}
