//! The stage-by-stage membership test.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::Result;
use crate::layered::{FkInstance, LayeredState, StageOutcome, StageReport};
use crate::mcf::solve_mcf;
use crate::mi::{check_pmi, PmiVerdict, PmiViolation};
use crate::pedigree::{CharVector, Edge, Pedigree, Triangle};
use crate::rational::{format, Rational};

#[derive(Debug, Clone, Default)]
pub struct MembershipOptions {
    /// Skip the MCF when one of the two cheap sufficient conditions holds.
    pub shortcuts: bool,
    /// Keep every intermediate state and `F_k` for inspection or export.
    pub keep_states: bool,
    /// Keep the LP text of every MCF solved.
    pub keep_lp: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureReason {
    Pmi(PmiViolation),
    Fat4 { max_value: Rational, total: Rational },
    FkInfeasible { max_value: Rational, total: Rational },
    McfShort { z: Rational, z_max: Rational },
    /// Rigid extraction left a negative residual, so the stage state is not well-defined.
    Overdrawn { element: String, residual: Rational },
}

impl FailureReason {
    pub fn tag(&self) -> &'static str {
        match self {
            FailureReason::Pmi(_) => "pmi",
            FailureReason::Fat4 { .. } => "fat4",
            FailureReason::FkInfeasible { .. } => "fk_infeasible",
            FailureReason::McfShort { .. } => "mcf_short",
            FailureReason::Overdrawn { .. } => "overdrawn",
        }
    }
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::Pmi(v) => write!(f, "outside the MI relaxation: {v}"),
            FailureReason::Fat4 { max_value, total } | FailureReason::FkInfeasible { max_value, total } => {
                write!(f, "max flow {} below total supply {}", format(max_value), format(total))
            }
            FailureReason::McfShort { z, z_max } => {
                let gap = z_max - z;
                write!(f, "MCF gap {} (z* = {}, z_max = {})", format(&gap), format(z), format(z_max))
            }
            FailureReason::Overdrawn { element, residual } => {
                write!(f, "rigid pedigrees overdraw {element} by {}", format(&-residual.clone()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub k: usize,
    pub reason: FailureReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageSummary {
    pub k: usize,
    pub origins: usize,
    pub destinations: usize,
    pub arcs: usize,
    pub rigid_arcs: usize,
    pub dummy_arcs: usize,
    pub new_rigid: usize,
    pub r_size: usize,
    pub z_max: String,
    pub z: Option<String>,
    pub mcf_vars: Option<usize>,
    pub mcf_rows: Option<usize>,
    pub shortcut: Option<&'static str>,
}

impl StageSummary {
    fn from_report(rep: &StageReport) -> StageSummary {
        let (rigid_arcs, dummy_arcs) = rep
            .rigidity
            .as_ref()
            .map_or((0, 0), |r| (r.rigid_arcs().len(), r.dummy_arcs().len()));
        StageSummary {
            k: rep.k,
            origins: rep.fk.origins.len(),
            destinations: rep.fk.dests.len(),
            arcs: rep.fk.problem.arcs.len(),
            rigid_arcs,
            dummy_arcs,
            new_rigid: rep.new_rigid,
            r_size: rep.r_size,
            z_max: format(&rep.z_max),
            z: None,
            mcf_vars: None,
            mcf_rows: None,
            shortcut: None,
        }
    }
}

impl fmt::Display for StageSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "stage {}: {} origins, {} destinations, {} arcs ({} rigid, {} dummy), |R_{}| = {}, z_max = {}",
            self.k,
            self.origins,
            self.destinations,
            self.arcs,
            self.rigid_arcs,
            self.dummy_arcs,
            self.k,
            self.r_size,
            self.z_max
        )?;
        if let Some(z) = &self.z {
            write!(f, ", z* = {z}")?;
        }
        if let (Some(v), Some(r)) = (self.mcf_vars, self.mcf_rows) {
            write!(f, " [MCF {v} vars, {r} rows]")?;
        }
        if let Some(s) = self.shortcut {
            write!(f, " [shortcut: {s}]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub n: usize,
    pub member: bool,
    pub failure: Option<Failure>,
    pub trace: Vec<StageSummary>,
    /// Invariant violations observed during the run.
    pub violations: Vec<String>,
    /// Exact decomposition when the last stage left no network.
    pub decomposition: Option<Vec<(Pedigree, Rational)>>,
    /// State after each stage `k` (first entry `k = 4`), if kept.
    pub states: Vec<LayeredState>,
    /// `F_k` for `k = 4, 5, ...`, if kept.
    pub problems: Vec<FkInstance>,
    pub lp_dumps: Vec<(usize, String)>,
}

impl Verdict {
    fn new(n: usize) -> Verdict {
        Verdict {
            n,
            member: false,
            failure: None,
            trace: Vec::new(),
            violations: Vec::new(),
            decomposition: None,
            states: Vec::new(),
            problems: Vec::new(),
            lp_dumps: Vec::new(),
        }
    }

    fn reject(mut self, k: usize, reason: FailureReason) -> Verdict {
        self.member = false;
        self.failure = Some(Failure { k, reason });
        self
    }

    fn accept(mut self) -> Verdict {
        self.member = true;
        self
    }

    /// One-line summary.
    pub fn headline(&self) -> String {
        match &self.failure {
            None if self.member => "MEMBER".to_string(),
            None => "NOT MEMBER".to_string(),
            Some(fl) => format!("NOT MEMBER (stage {}, {})", fl.k, fl.reason),
        }
    }
}

fn pmi_stage(v: &PmiViolation) -> usize {
    match v {
        PmiViolation::Negative { triangle } => triangle.k,
        PmiViolation::BlockSum { k, .. } | PmiViolation::NegativeSlack { k, .. } => *k,
    }
}

/// Sufficient conditions for `X/(k+1)` in `conv(P_{k+1})` given `X/k` in `conv(P_k)` and `F_k` feasible.
pub fn shortcut(x: &CharVector, k: usize) -> Option<&'static str> {
    let block = x.block(k + 1);
    if block.iter().any(|c| c.is_one()) {
        return Some("unit coordinate");
    }
    let new_edges: Rational = (1..k).map(|i| x.get(Triangle { k: k + 1, edge: Edge::of(i, k) }).clone()).sum();
    if new_edges.is_one() {
        return Some("only new edges");
    }
    None
}

fn record_decomposition(v: &mut Verdict, state: &LayeredState) {
    if let Some(parts) = state.decompose_if_trivial() {
        if state.verify_decomposition(&parts) {
            v.decomposition = Some(parts);
        } else {
            v.violations.push(format!("stage {}: rigid weights do not reproduce the point", state.k));
        }
    }
}

/// Decides whether `x` lies in the pedigree polytope.
pub fn check_membership(x: &CharVector, opts: &MembershipOptions) -> Result<Verdict> {
    let n = x.n();
    let mut v = Verdict::new(n);
    if n < 4 {
        return Err(crate::Error::Precondition(format!("membership needs n >= 4, got {n}")));
    }
    if let PmiVerdict::Outside(viol) = check_pmi(x) {
        let k = pmi_stage(&viol);
        return Ok(v.reject(k, FailureReason::Pmi(viol)));
    }
    if n == 4 {
        return Ok(v.accept());
    }
    let mut state = match LayeredState::build_n4(x) {
        Ok((state, rep)) => {
            v.trace.push(StageSummary::from_report(&rep));
            if opts.keep_states {
                v.problems.push(rep.fk);
                v.states.push(state.clone());
            }
            state
        }
        Err(StageOutcome::Infeasible { report, max_value, total }) => {
            v.trace.push(StageSummary::from_report(&report));
            if opts.keep_states {
                v.problems.push(report.fk);
            }
            return Ok(v.reject(4, FailureReason::Fat4 { max_value, total }));
        }
        Err(_) => unreachable!("build_n4 reports success through Ok"),
    };
    v.violations.append(&mut state.violations);
    for k in 5..n {
        let outcome = state.advance()?;
        v.violations.append(&mut state.violations);
        let rep = match outcome {
            StageOutcome::Advanced(rep) => rep,
            StageOutcome::Infeasible { report, max_value, total } => {
                v.trace.push(StageSummary::from_report(&report));
                if opts.keep_states {
                    v.problems.push(report.fk);
                }
                return Ok(v.reject(k, FailureReason::FkInfeasible { max_value, total }));
            }
            StageOutcome::Overdrawn { report, overdraft } => {
                v.trace.push(StageSummary::from_report(&report));
                if opts.keep_states {
                    v.problems.push(report.fk);
                }
                let reason = FailureReason::Overdrawn { element: overdraft.element, residual: overdraft.residual };
                return Ok(v.reject(k, reason));
            }
        };
        let mut summary = StageSummary::from_report(&rep);
        if opts.keep_states {
            v.problems.push(rep.fk);
            v.states.push(state.clone());
        }
        let z_max = state.z_max();
        if let Some(s) = opts.shortcuts.then(|| shortcut(x, k)).flatten() {
            summary.shortcut = Some(s);
        } else if z_max.is_zero() {
            summary.z = Some(format(&z_max));
        } else {
            let (model, mcf) = solve_mcf(&state)?;
            summary.z = Some(format(&mcf.z));
            summary.mcf_vars = Some(mcf.vars);
            summary.mcf_rows = Some(mcf.rows);
            v.violations.extend(mcf.violations.iter().cloned());
            if opts.keep_lp {
                v.lp_dumps.push((k, model.lp_text()));
            }
            if mcf.is_short() {
                v.trace.push(summary);
                return Ok(v.reject(k, FailureReason::McfShort { z: mcf.z, z_max: mcf.z_max }));
            }
        }
        v.trace.push(summary);
    }
    record_decomposition(&mut v, &state);
    Ok(v.accept())
}
