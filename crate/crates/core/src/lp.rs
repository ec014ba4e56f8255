//! Exact two-phase simplex over arbitrary-precision rationals.
//!
//! Rows are stored sparsely. Entering columns follow the largest reduced cost
//! until a run of degenerate pivots, then Bland's rule takes over until the
//! objective moves again, which rules out cycling.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

const DEGENERATE_STREAK: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<(usize, Rational)>,
    pub rel: Relation,
    pub rhs: Rational,
    pub name: Option<String>,
}

/// `opt c.x` subject to rows, with every variable `>= 0`.
#[derive(Debug, Clone)]
pub struct LpInstance {
    num_vars: usize,
    rows: Vec<LpRow>,
    objective: Vec<(usize, Rational)>,
    sense: Sense,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

impl LpInstance {
    pub fn new(num_vars: usize) -> LpInstance {
        LpInstance { num_vars, rows: Vec::new(), objective: Vec::new(), sense: Sense::Maximize }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> &[LpRow] {
        &self.rows
    }

    pub fn add_var(&mut self) -> usize {
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Rational)>, rel: Relation, rhs: Rational) {
        self.rows.push(LpRow { coeffs, rel, rhs, name: None });
    }

    pub fn add_named_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, Rational)>,
        rel: Relation,
        rhs: Rational,
    ) {
        self.rows.push(LpRow { coeffs, rel, rhs, name: Some(name.into()) });
    }

    pub fn set_objective(&mut self, sense: Sense, coeffs: Vec<(usize, Rational)>) {
        self.sense = sense;
        self.objective = coeffs;
    }

    fn check_dims(&self) -> Result<()> {
        let bad = self
            .rows
            .iter()
            .flat_map(|r| r.coeffs.iter())
            .chain(self.objective.iter())
            .find(|(c, _)| *c >= self.num_vars);
        match bad {
            Some((c, _)) => Err(Error::Structural(format!(
                "variable {c} out of range for {} variables",
                self.num_vars
            ))),
            None => Ok(()),
        }
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().map(|(c, a)| a * &x[*c]).sum()
    }

    /// Exact check that `x` satisfies every row and `x >= 0`.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars || x.iter().any(|v| v.is_negative()) {
            return false;
        }
        self.rows.iter().all(|row| {
            let lhs: Rational = row.coeffs.iter().map(|(c, a)| a * &x[*c]).sum();
            match row.rel {
                Relation::Le => lhs <= row.rhs,
                Relation::Eq => lhs == row.rhs,
                Relation::Ge => lhs >= row.rhs,
            }
        })
    }

    /// CPLEX-style LP text. Each row is scaled to integer coefficients.
    pub fn to_lp_text(&self, var_name: &dyn Fn(usize) -> String) -> String {
        let mut out = String::new();
        out.push_str(match self.sense {
            Sense::Maximize => "Maximize\n",
            Sense::Minimize => "Minimize\n",
        });
        let (obj, _) = integral(&self.objective, &Rational::zero());
        let _ = writeln!(out, " obj:{}", terms(&obj, var_name));
        out.push_str("Subject To\n");
        for (idx, row) in self.rows.iter().enumerate() {
            let (coeffs, rhs) = integral(&row.coeffs, &row.rhs);
            let rel = match row.rel {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            let name = row.name.clone().unwrap_or_else(|| format!("c{idx}"));
            let _ = writeln!(out, " {name}:{} {rel} {rhs}", terms(&coeffs, var_name));
        }
        out.push_str("End\n");
        out
    }
}

fn integral(coeffs: &[(usize, Rational)], rhs: &Rational) -> (Vec<(usize, BigInt)>, BigInt) {
    let mut l = rhs.denom().clone();
    for (_, a) in coeffs {
        l = l.lcm(a.denom());
    }
    let scale = Rational::from_integer(l);
    let ints = coeffs.iter().map(|(c, a)| (*c, (a * &scale).to_integer())).collect();
    (ints, (rhs * &scale).to_integer())
}

fn terms(coeffs: &[(usize, BigInt)], var_name: &dyn Fn(usize) -> String) -> String {
    let mut s = String::new();
    for (c, a) in coeffs {
        if a.is_zero() {
            continue;
        }
        let sign = if a.is_negative() { '-' } else { '+' };
        let _ = write!(s, " {sign} {} {}", a.abs(), var_name(*c));
    }
    if s.is_empty() {
        s.push_str(" 0 x0");
    }
    s
}

type SparseRow = Vec<(usize, Rational)>;

fn coeff(row: &SparseRow, col: usize) -> Option<&Rational> {
    row.binary_search_by_key(&col, |(c, _)| *c).ok().map(|i| &row[i].1)
}

/// `a - f * b` for sorted sparse rows.
fn axpy(a: &SparseRow, f: &Rational, b: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[j].0, -(f * &b[j].1)));
            j += 1;
        } else {
            let v = &a[i].1 - f * &b[j].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

struct Tableau {
    rows: Vec<SparseRow>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs for maximisation; a positive entry may enter.
    d: Vec<Rational>,
    z: Rational,
    /// Columns at or beyond this index may not enter.
    forbidden_from: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, j: usize) {
        let a = coeff(&self.rows[r], j).expect("pivot on a zero entry").clone();
        if !a.is_one() {
            let inv = a.recip();
            for (_, v) in self.rows[r].iter_mut() {
                *v *= &inv;
            }
            self.rhs[r] *= &inv;
        }
        let prow = std::mem::take(&mut self.rows[r]);
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(f) = coeff(&self.rows[i], j).cloned() {
                self.rows[i] = axpy(&self.rows[i], &f, &prow);
                self.rhs[i] -= &f * &prhs;
            }
        }
        let dj = self.d[j].clone();
        if !dj.is_zero() {
            for (c, v) in &prow {
                self.d[*c] -= &dj * v;
            }
            self.z += &dj * &prhs;
        }
        self.rows[r] = prow;
        self.basis[r] = j;
    }

    fn run(&mut self) -> Step {
        let mut streak = 0usize;
        loop {
            let bland = streak >= DEGENERATE_STREAK;
            let limit = self.forbidden_from.min(self.d.len());
            let mut enter: Option<usize> = None;
            for j in 0..limit {
                if self.d[j].is_positive() {
                    match enter {
                        None => enter = Some(j),
                        Some(e) if !bland && self.d[j] > self.d[e] => enter = Some(j),
                        _ => {}
                    }
                    if bland {
                        break;
                    }
                }
            }
            let Some(j) = enter else { return Step::Optimal };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let Some(a) = coeff(row, j) else { continue };
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((l, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*l])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else { return Step::Unbounded };
            if ratio.is_zero() {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(r, j);
        }
    }
}

fn normalize(coeffs: &[(usize, Rational)]) -> SparseRow {
    let mut row: SparseRow = coeffs.to_vec();
    row.sort_by_key(|(c, _)| *c);
    let mut out: SparseRow = Vec::with_capacity(row.len());
    for (c, v) in row {
        match out.last_mut() {
            Some((lc, lv)) if *lc == c => *lv += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    out
}

/// Solves the instance exactly and re-substitutes the returned point.
pub fn lp_solve(inst: &LpInstance) -> Result<LpOutcome> {
    inst.check_dims()?;
    let nv = inst.num_vars;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut rels = Vec::new();
    for row in &inst.rows {
        let mut r = normalize(&row.coeffs);
        let mut b = row.rhs.clone();
        let mut rel = row.rel;
        if b.is_negative() {
            for (_, v) in r.iter_mut() {
                *v = -v.clone();
            }
            b = -b;
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        if r.is_empty() {
            let ok = match rel {
                Relation::Le => true,
                Relation::Eq | Relation::Ge => b.is_zero(),
            };
            if !ok {
                return Ok(LpOutcome::Infeasible);
            }
            continue;
        }
        rows.push(r);
        rhs.push(b);
        rels.push(rel);
    }
    let m = rows.len();
    let n_slack = rels.iter().filter(|r| **r != Relation::Eq).count();
    let art_start = nv + n_slack;
    let mut basis = vec![0; m];
    let mut next_slack = nv;
    let mut next_art = art_start;
    for i in 0..m {
        match rels[i] {
            Relation::Le => {
                rows[i].push((next_slack, Rational::one()));
                basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                rows[i].push((next_slack, -Rational::one()));
                rows[i].push((next_art, Rational::one()));
                basis[i] = next_art;
                next_slack += 1;
                next_art += 1;
            }
            Relation::Eq => {
                rows[i].push((next_art, Rational::one()));
                basis[i] = next_art;
                next_art += 1;
            }
        }
    }
    let ncols = next_art;
    let mut tab = Tableau {
        rows,
        rhs,
        basis,
        d: vec![Rational::zero(); ncols],
        z: Rational::zero(),
        forbidden_from: ncols,
    };

    if ncols > art_start {
        for i in 0..m {
            if tab.basis[i] >= art_start {
                for (c, v) in &tab.rows[i] {
                    if *c < art_start {
                        tab.d[*c] += v;
                    }
                }
                tab.z -= &tab.rhs[i];
            }
        }
        tab.run();
        if tab.z.is_negative() {
            return Ok(LpOutcome::Infeasible);
        }
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art_start {
                let col = tab.rows[i].iter().find(|(c, _)| *c < art_start).map(|(c, _)| *c);
                match col {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.rows.swap_remove(i);
                        tab.rhs.swap_remove(i);
                        tab.basis.swap_remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for row in tab.rows.iter_mut() {
            row.retain(|(c, _)| *c < art_start);
        }
    }

    tab.forbidden_from = art_start;
    let mut c = vec![Rational::zero(); ncols];
    for (j, v) in &inst.objective {
        match inst.sense {
            Sense::Maximize => c[*j] += v,
            Sense::Minimize => c[*j] -= v,
        }
    }
    tab.z = Rational::zero();
    for i in 0..tab.rows.len() {
        let cb = c[tab.basis[i]].clone();
        if cb.is_zero() {
            continue;
        }
        for (col, v) in &tab.rows[i] {
            c[*col] -= &cb * v;
        }
        tab.z += &cb * &tab.rhs[i];
    }
    tab.d = c;
    if let Step::Unbounded = tab.run() {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = vec![Rational::zero(); nv];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < nv {
            x[b] = tab.rhs[i].clone();
        }
    }
    if !inst.is_feasible(&x) {
        return Err(Error::Invariant("simplex returned a point violating the constraints".into()));
    }
    let value = inst.objective_value(&x);
    let expected = match inst.sense {
        Sense::Maximize => tab.z.clone(),
        Sense::Minimize => -tab.z.clone(),
    };
    if value != expected {
        return Err(Error::Invariant("simplex objective disagrees with re-substitution".into()));
    }
    Ok(LpOutcome::Optimal { value, x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    #[test]
    fn single_bound() {
        let mut lp = LpInstance::new(1);
        lp.add_row(vec![(0, int(1))], Relation::Le, ratio(3, 7));
        lp.set_objective(Sense::Maximize, vec![(0, int(1))]);
        assert_eq!(lp_solve(&lp).unwrap().value(), Some(&ratio(3, 7)));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LpInstance::new(2);
        lp.add_row(vec![(0, int(1)), (1, int(1))], Relation::Eq, int(1));
        lp.add_row(vec![(0, int(1))], Relation::Ge, int(2));
        assert_eq!(lp_solve(&lp).unwrap(), LpOutcome::Infeasible);

        let mut lp = LpInstance::new(2);
        lp.add_row(vec![(0, int(1)), (1, int(-1))], Relation::Le, int(1));
        lp.set_objective(Sense::Maximize, vec![(1, int(1))]);
        assert_eq!(lp_solve(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LpInstance::new(3);
        lp.add_row(vec![(0, int(1)), (1, int(1))], Relation::Eq, int(1));
        lp.add_row(vec![(1, int(1)), (2, int(1))], Relation::Eq, int(1));
        lp.add_row(vec![(0, int(1)), (1, int(2)), (2, int(1))], Relation::Eq, int(2));
        lp.set_objective(Sense::Minimize, vec![(0, int(1)), (1, int(3)), (2, int(1))]);
        let out = lp_solve(&lp).unwrap();
        assert_eq!(out.value(), Some(&int(2)));
    }

    #[test]
    fn negative_rhs_and_ge() {
        let mut lp = LpInstance::new(2);
        lp.add_row(vec![(0, int(-1)), (1, int(-1))], Relation::Le, int(-2));
        lp.add_row(vec![(0, int(1))], Relation::Le, ratio(1, 2));
        lp.set_objective(Sense::Minimize, vec![(0, int(-1)), (1, int(2))]);
        assert_eq!(lp_solve(&lp).unwrap().value(), Some(&ratio(5, 2)));
    }

    #[test]
    fn lp_text_is_integral() {
        let mut lp = LpInstance::new(2);
        lp.add_named_row("cap", vec![(0, ratio(1, 2)), (1, ratio(1, 3))], Relation::Le, ratio(1, 6));
        lp.set_objective(Sense::Maximize, vec![(0, int(1))]);
        let text = lp.to_lp_text(&|c| format!("x{c}"));
        assert!(text.contains("cap: + 3 x0 + 2 x1 <= 1"), "{text}");
    }

    /// Optimum by enumerating every basis of `A x <= b, x >= 0` in slack form.
    fn brute_force(a: &[Vec<i64>], b: &[i64], c: &[i64]) -> Option<Rational> {
        let m = a.len();
        let n = c.len();
        let cols = n + m;
        let col = |j: usize, i: usize| -> Rational {
            if j < n {
                int(a[i][j])
            } else if j - n == i {
                int(1)
            } else {
                int(0)
            }
        };
        let mut best: Option<Rational> = None;
        let mut choose = vec![0usize; m];
        fn next(choose: &mut [usize], cols: usize) -> bool {
            let m = choose.len();
            let mut i = m;
            while i > 0 {
                i -= 1;
                if choose[i] < cols - (m - i) {
                    choose[i] += 1;
                    for k in i + 1..m {
                        choose[k] = choose[k - 1] + 1;
                    }
                    return true;
                }
            }
            false
        }
        for (i, v) in choose.iter_mut().enumerate() {
            *v = i;
        }
        loop {
            // Gaussian elimination on the chosen columns.
            let mut mat: Vec<Vec<Rational>> = (0..m)
                .map(|i| {
                    let mut r: Vec<Rational> = choose.iter().map(|&j| col(j, i)).collect();
                    r.push(int(b[i]));
                    r
                })
                .collect();
            let mut ok = true;
            for p in 0..m {
                let Some(piv) = (p..m).find(|&r| !mat[r][p].is_zero()) else {
                    ok = false;
                    break;
                };
                mat.swap(p, piv);
                let inv = mat[p][p].recip();
                for v in mat[p].iter_mut() {
                    *v *= &inv;
                }
                for r in 0..m {
                    if r != p && !mat[r][p].is_zero() {
                        let f = mat[r][p].clone();
                        let pivot_row = mat[p].clone();
                        for (v, w) in mat[r].iter_mut().zip(&pivot_row) {
                            *v -= &f * w;
                        }
                    }
                }
            }
            if ok && mat.iter().all(|r| !r[m].is_negative()) {
                let mut val = int(0);
                for (p, &j) in choose.iter().enumerate() {
                    if j < n {
                        val += int(c[j]) * &mat[p][m];
                    }
                }
                if best.as_ref().is_none_or(|b| val > *b) {
                    best = Some(val);
                }
            }
            if !next(&mut choose, cols) {
                break;
            }
        }
        best
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn matches_vertex_enumeration(
            a in proptest::collection::vec(proptest::collection::vec(0i64..5, 3), 3),
            b in proptest::collection::vec(1i64..9, 3),
            c in proptest::collection::vec(-3i64..6, 3),
        ) {
            // Nonnegative A with positive b and at least one bounded direction per column.
            let mut a = a;
            for j in 0..3 {
                if a.iter().all(|r| r[j] == 0) {
                    a[j][j] = 1;
                }
            }
            let mut lp = LpInstance::new(3);
            for (row, rhs) in a.iter().zip(&b) {
                lp.add_row(row.iter().enumerate().map(|(j, v)| (j, int(*v))).collect(), Relation::Le, int(*rhs));
            }
            lp.set_objective(Sense::Maximize, c.iter().enumerate().map(|(j, v)| (j, int(*v))).collect());
            let out = lp_solve(&lp).unwrap();
            let expected = brute_force(&a, &b, &c).unwrap();
            prop_assert_eq!(out.value(), Some(&expected));
        }
    }
}
