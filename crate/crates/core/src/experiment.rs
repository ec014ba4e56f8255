//! Driver against oracle on generated points.

use std::fmt;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::membership::{check_membership, MembershipOptions, Verdict};
use crate::oracle::oracle_membership;
use crate::pedigree::CharVector;
use crate::random::{point, rng, Mode};
use crate::rational::format;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n_min: usize,
    pub n_max: usize,
    /// Points per `n`, cycling through `modes`.
    pub count: usize,
    pub seed: u64,
    pub modes: Vec<Mode>,
    pub shortcuts: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Row {
    pub n: usize,
    pub mode: String,
    pub total: usize,
    pub both_member: usize,
    pub both_not_member: usize,
    pub driver_only: usize,
    pub oracle_only: usize,
    pub violations: usize,
}

impl Row {
    pub fn agree(&self) -> usize {
        self.both_member + self.both_not_member
    }
}

#[derive(Debug, Clone)]
pub struct Discrepancy {
    pub n: usize,
    pub mode: Mode,
    pub index: usize,
    pub x: CharVector,
    pub driver: bool,
    pub oracle: bool,
    pub report: String,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentSummary {
    pub rows: Vec<Row>,
    pub discrepancies: Vec<Discrepancy>,
    /// Points whose run reported invariant violations.
    pub violations: Vec<(usize, usize, Vec<String>)>,
}

impl ExperimentSummary {
    pub fn total(&self) -> usize {
        self.rows.iter().map(|r| r.total).sum()
    }

    pub fn agreed(&self) -> usize {
        self.rows.iter().map(Row::agree).sum()
    }

    pub fn is_clean(&self) -> bool {
        self.discrepancies.is_empty() && self.violations.is_empty()
    }
}

impl fmt::Display for ExperimentSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>3} {:>10} {:>6} {:>7} {:>7} {:>7} {:>7} {:>7} {:>6}", "n", "mode", "total", "agree", "mem", "non", "drv", "orc", "viol")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>3} {:>10} {:>6} {:>7} {:>7} {:>7} {:>7} {:>7} {:>6}",
                r.n,
                r.mode,
                r.total,
                r.agree(),
                r.both_member,
                r.both_not_member,
                r.driver_only,
                r.oracle_only,
                r.violations
            )?;
        }
        write!(f, "agreement {}/{}", self.agreed(), self.total())
    }
}

/// Full text report of one run, for discrepancy files.
pub fn render_trace(x: &CharVector, v: &Verdict) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "n = {}", x.n());
    let coords: Vec<String> = x.coords().iter().map(format).collect();
    let _ = writeln!(s, "x = [{}]", coords.join(", "));
    let _ = writeln!(s, "{}", v.headline());
    for t in &v.trace {
        let _ = writeln!(s, "  {t}");
    }
    for viol in &v.violations {
        let _ = writeln!(s, "  violation: {viol}");
    }
    s
}

fn stream_seed(seed: u64, n: usize, mode: Mode) -> u64 {
    let m = Mode::ALL.iter().position(|x| *x == mode).unwrap_or(0) as u64;
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((n as u64) << 8) ^ m
}

/// The points of an experiment, in a fixed order.
pub fn points(cfg: &ExperimentConfig) -> Vec<(usize, Mode, usize, CharVector)> {
    let mut out = Vec::new();
    if cfg.modes.is_empty() {
        return out;
    }
    for n in cfg.n_min..=cfg.n_max {
        let mut streams: Vec<_> = cfg.modes.iter().map(|&m| rng(stream_seed(cfg.seed, n, m))).collect();
        for i in 0..cfg.count {
            let slot = i % cfg.modes.len();
            let x = point(n, cfg.modes[slot], &mut streams[slot]);
            out.push((n, cfg.modes[slot], i, x));
        }
    }
    out
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let pts = points(cfg);
    let opts = MembershipOptions { shortcuts: cfg.shortcuts, ..Default::default() };
    let results: Vec<Result<(Verdict, bool)>> = pts
        .par_iter()
        .map(|(_, _, _, x)| {
            let v = check_membership(x, &opts)?;
            let o = oracle_membership(x)?;
            Ok((v, o.member))
        })
        .collect();
    let mut summary = ExperimentSummary::default();
    for ((n, mode, index, x), res) in pts.into_iter().zip(results) {
        let (v, oracle) = res?;
        let pos = match summary.rows.iter().position(|r| r.n == n && r.mode == mode.name()) {
            Some(p) => p,
            None => {
                summary.rows.push(Row { n, mode: mode.name().to_string(), ..Default::default() });
                summary.rows.len() - 1
            }
        };
        let row = &mut summary.rows[pos];
        row.total += 1;
        match (v.member, oracle) {
            (true, true) => row.both_member += 1,
            (false, false) => row.both_not_member += 1,
            (true, false) => row.driver_only += 1,
            (false, true) => row.oracle_only += 1,
        }
        if !v.violations.is_empty() {
            row.violations += 1;
            summary.violations.push((n, index, v.violations.clone()));
        }
        if v.member != oracle {
            let report = render_trace(&x, &v);
            summary.discrepancies.push(Discrepancy { n, mode, index, x, driver: v.member, oracle, report });
        }
    }
    Ok(summary)
}
