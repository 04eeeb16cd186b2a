use std::collections::BTreeMap;
use std::path::PathBuf;

use transfer_core::invariants::{default_gamma, is_topological_generator};

use crate::CliError;

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub prec: u32,
    pub qprec: i64,
    pub primes: Vec<u64>,
    pub gammas: BTreeMap<u64, u64>,
    pub cache_dir: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub timings: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.prec < 1 {
            return Err(CliError::usage("--prec must be at least 1"));
        }
        if self.primes.is_empty() {
            return Err(CliError::usage("--primes is empty"));
        }
        for &p in &self.primes {
            if p < 5 || !is_prime(p) {
                return Err(CliError::usage(format!("{p} is not a prime >= 5")));
            }
        }
        for (&p, &g) in &self.gammas {
            if p < 5 || !is_prime(p) {
                return Err(CliError::usage(format!("gamma override for {p}, which is not a prime >= 5")));
            }
            if !is_topological_generator(p, g) {
                return Err(CliError::usage(format!("{g} does not generate (Z/{p}^2)^*")));
            }
        }
        Ok(())
    }

    /// For commands that expand modular forms.
    pub fn require_modular_qprec(&self) -> Result<(), CliError> {
        let need = self.prec as i64 / 2 + 2;
        if self.qprec < need {
            return Err(CliError::usage(format!("--qprec {} is below {need} = N/2 + 2", self.qprec)));
        }
        Ok(())
    }

    pub fn gamma(&self, p: u64) -> Result<u64, CliError> {
        match self.gammas.get(&p) {
            Some(g) => Ok(*g),
            None => default_gamma(p).map_err(CliError::from),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

pub fn parse_primes(s: &str) -> Result<Vec<u64>, String> {
    let mut out: Vec<u64> = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let p = part.parse().map_err(|_| format!("bad prime {part:?}"))?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// `p=g`.
pub fn parse_gamma(s: &str) -> Result<(u64, u64), String> {
    let (p, g) = s.split_once('=').ok_or_else(|| format!("expected p=g, got {s:?}"))?;
    let p = p.trim().parse().map_err(|_| format!("bad prime in {s:?}"))?;
    let g = g.trim().parse().map_err(|_| format!("bad generator in {s:?}"))?;
    Ok((p, g))
}
