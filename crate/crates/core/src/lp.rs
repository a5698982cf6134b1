//! Dense exact-rational linear programming: primal simplex with Bland's
//! anti-cycling rule, two phases, and a verification pass on every result.
//!
//! Sizes here are desk scale; no attempt is made at sparse or revised
//! simplex, and there is no floating point anywhere.

use crate::ratio::{frac_vec_serde, fmt_frac, q_one, q_zero, Q};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Constraint {
    #[serde(with = "frac_vec_serde")]
    pub coeffs: Vec<Q>,
    pub rel: Relation,
    #[serde(with = "crate::ratio::frac_serde")]
    pub rhs: Q,
}

/// Minimize `objective . x` subject to the constraints, all variables `>= 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub constraints: Vec<Constraint>,
    #[serde(with = "frac_vec_serde")]
    pub objective: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Q, assignment: Vec<Q> },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            constraints: Vec::new(),
            objective: vec![q_zero(); num_vars],
        }
    }

    pub fn constrain(&mut self, coeffs: Vec<Q>, rel: Relation, rhs: Q) {
        assert_eq!(coeffs.len(), self.num_vars, "coefficient vector length");
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn set_objective(&mut self, coeffs: Vec<Q>) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.objective = coeffs;
    }

    /// Exact check of a candidate point against every constraint.
    pub fn satisfied_by(&self, x: &[Q]) -> bool {
        if x.len() != self.num_vars || x.iter().any(|v| v.is_negative()) {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs: Q = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            match c.rel {
                Relation::Le => lhs <= c.rhs,
                Relation::Ge => lhs >= c.rhs,
                Relation::Eq => lhs == c.rhs,
            }
        })
    }
}

struct Tableau {
    /// m rows by (ncols + 1) entries; the last entry of each row is the RHS.
    rows: Vec<Vec<Q>>,
    /// Reduced-cost row; last entry is minus the current objective value.
    obj: Vec<Q>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col].clone();
        debug_assert!(!piv.is_zero());
        for v in &mut self.rows[row] {
            *v = &*v / &piv;
        }
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let factor = self.rows[r][col].clone();
            if factor.is_zero() {
                continue;
            }
            for c in 0..=self.ncols {
                let delta = &self.rows[row][c] * &factor;
                self.rows[r][c] -= delta;
            }
        }
        let factor = self.obj[col].clone();
        if !factor.is_zero() {
            for c in 0..=self.ncols {
                let delta = &self.rows[row][c] * &factor;
                self.obj[c] -= delta;
            }
        }
        self.basis[row] = col;
    }

    /// Bland: entering column = lowest index with negative reduced cost.
    fn entering(&self, ncols_active: usize) -> Option<usize> {
        (0..ncols_active).find(|&j| self.obj[j].is_negative())
    }

    /// Bland: leaving row = among min-ratio rows, the one whose basic
    /// variable has the lowest index.
    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(Q, usize)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            if row[col] <= q_zero() {
                continue;
            }
            let ratio = &row[self.ncols] / &row[col];
            match &best {
                None => best = Some((ratio, r)),
                Some((b, br)) => {
                    if ratio < *b || (ratio == *b && self.basis[r] < self.basis[*br]) {
                        best = Some((ratio, r));
                    }
                }
            }
        }
        best.map(|(_, r)| r)
    }

    fn run(&mut self, ncols_active: usize) -> Result<(), ()> {
        while let Some(col) = self.entering(ncols_active) {
            match self.leaving(col) {
                Some(row) => self.pivot(row, col),
                None => return Err(()), // unbounded
            }
        }
        Ok(())
    }
}

/// Solves the program exactly. The returned assignment is re-verified against
/// every constraint, and optimality is certified by the final reduced costs
/// being nonnegative.
pub fn solve(lp: &LinearProgram) -> LpOutcome {
    let n = lp.num_vars;
    let m = lp.constraints.len();

    // Column layout: structural | slack/surplus | artificial.
    let mut nslack = 0;
    for c in &lp.constraints {
        if c.rel != Relation::Eq {
            nslack += 1;
        }
    }
    let ncols = n + nslack + m;
    let mut rows: Vec<Vec<Q>> = Vec::with_capacity(m);
    let mut basis = vec![0usize; m];
    let mut slack_at = 0usize;
    let art0 = n + nslack;

    for (i, c) in lp.constraints.iter().enumerate() {
        let mut row = vec![q_zero(); ncols + 1];
        let flip = c.rhs.is_negative();
        let sgn = if flip { -q_one() } else { q_one() };
        for (j, a) in c.coeffs.iter().enumerate() {
            row[j] = a * &sgn;
        }
        row[ncols] = &c.rhs * &sgn;
        let rel = match (c.rel, flip) {
            (Relation::Eq, _) => Relation::Eq,
            (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
            (Relation::Le, true) | (Relation::Ge, false) => Relation::Ge,
        };
        match rel {
            Relation::Le => {
                row[n + slack_at] = q_one();
                // slack can start basic; no artificial needed
                basis[i] = n + slack_at;
                slack_at += 1;
            }
            Relation::Ge => {
                row[n + slack_at] = -q_one();
                slack_at += 1;
                row[art0 + i] = q_one();
                basis[i] = art0 + i;
            }
            Relation::Eq => {
                row[art0 + i] = q_one();
                basis[i] = art0 + i;
            }
        }
        rows.push(row);
    }

    // Phase 1: minimize the sum of artificials.
    let mut obj = vec![q_zero(); ncols + 1];
    for (i, row) in rows.iter().enumerate() {
        if basis[i] >= art0 {
            for c in 0..=ncols {
                let v = row[c].clone();
                obj[c] -= v;
            }
        }
    }
    for j in art0..ncols {
        obj[j] = q_zero();
    }

    let mut t = Tableau {
        rows,
        obj,
        basis,
        ncols,
    };
    t.run(ncols).expect("phase 1 is bounded below by zero");
    if !t.obj[ncols].is_zero() {
        return LpOutcome::Infeasible;
    }

    // Drive leftover artificials out of the basis or drop redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= art0 {
            if let Some(col) = (0..art0).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, col);
            } else {
                t.rows.remove(r);
                t.basis.remove(r);
                continue;
            }
        }
        r += 1;
    }

    // Phase 2 objective from the original costs.
    let mut obj = vec![q_zero(); ncols + 1];
    obj[..n].clone_from_slice(&lp.objective);
    for (i, &bj) in t.basis.iter().enumerate() {
        let cb = if bj < n { lp.objective[bj].clone() } else { q_zero() };
        if cb.is_zero() {
            continue;
        }
        for c in 0..=ncols {
            let delta = &t.rows[i][c] * &cb;
            obj[c] -= delta;
        }
    }
    t.obj = obj;
    // artificials are retired: never let them re-enter
    for j in art0..ncols {
        t.obj[j] = q_one();
    }
    if t.run(art0).is_err() {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![q_zero(); n];
    for (i, &bj) in t.basis.iter().enumerate() {
        if bj < n {
            x[bj] = t.rows[i][t.ncols].clone();
        }
    }
    let value: Q = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

    assert!(
        lp.satisfied_by(&x),
        "simplex returned an infeasible point: {:?}",
        x.iter().map(fmt_frac).collect::<Vec<_>>()
    );
    assert!(
        (0..art0).all(|j| !t.obj[j].is_negative()),
        "final basis is not dual feasible"
    );
    debug_assert_eq!(-t.obj[t.ncols].clone(), value);

    LpOutcome::Optimal { value, assignment: x }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{q, q_int};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn qv(vals: &[i64]) -> Vec<Q> {
        vals.iter().map(|&v| q_int(v)).collect()
    }

    #[test]
    fn minimize_x_at_one() {
        let mut lp = LinearProgram::new(1);
        lp.set_objective(qv(&[1]));
        lp.constrain(qv(&[1]), Relation::Ge, q_one());
        match solve(&lp) {
            LpOutcome::Optimal { value, assignment } => {
                assert_eq!(value, q_one());
                assert_eq!(assignment, vec![q_one()]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_detected() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(qv(&[1, 1]));
        lp.constrain(qv(&[1, 0]), Relation::Ge, q_one());
        lp.constrain(qv(&[-1, 0]), Relation::Ge, q_zero());
        assert_eq!(solve(&lp), LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new(1);
        lp.set_objective(qv(&[-1]));
        lp.constrain(qv(&[0]), Relation::Le, q_one());
        assert_eq!(solve(&lp), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_constraints() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(qv(&[2, 3]));
        lp.constrain(qv(&[1, 1]), Relation::Eq, q_int(4));
        lp.constrain(qv(&[1, 0]), Relation::Le, q_int(3));
        match solve(&lp) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q_int(9)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn deterministic_pivoting() {
        let mut lp = LinearProgram::new(3);
        lp.set_objective(qv(&[1, 2, 1]));
        lp.constrain(qv(&[1, 1, 0]), Relation::Ge, q_int(2));
        lp.constrain(qv(&[0, 1, 1]), Relation::Ge, q_int(3));
        lp.constrain(qv(&[1, 0, 1]), Relation::Le, q_int(10));
        let a = solve(&lp);
        let b = solve(&lp);
        assert_eq!(a, b);
    }

    /// Brute-force oracle: enumerate all basis subsets, solve the equality
    /// system by Gaussian elimination, keep feasible vertices.
    fn vertex_enumeration_min(lp: &LinearProgram) -> Option<Q> {
        // rows: constraints as equalities when tight, plus axis planes x_j = 0
        let n = lp.num_vars;
        let mut planes: Vec<(Vec<Q>, Q)> = lp
            .constraints
            .iter()
            .map(|c| (c.coeffs.clone(), c.rhs.clone()))
            .collect();
        for j in 0..n {
            let mut row = vec![q_zero(); n];
            row[j] = q_one();
            planes.push((row, q_zero()));
        }
        let idx: Vec<usize> = (0..planes.len()).collect();
        let mut best: Option<Q> = None;
        let mut combo = vec![0usize; n];
        fn rec(
            idx: &[usize],
            start: usize,
            depth: usize,
            combo: &mut Vec<usize>,
            planes: &[(Vec<Q>, Q)],
            lp: &LinearProgram,
            best: &mut Option<Q>,
        ) {
            let n = lp.num_vars;
            if depth == n {
                // solve the n x n system
                let mut a: Vec<Vec<Q>> = combo.iter().map(|&i| planes[i].0.clone()).collect();
                let mut b: Vec<Q> = combo.iter().map(|&i| planes[i].1.clone()).collect();
                for col in 0..n {
                    let piv = (col..n).find(|&r| !a[r][col].is_zero());
                    let Some(piv) = piv else { return };
                    a.swap(col, piv);
                    b.swap(col, piv);
                    let p = a[col][col].clone();
                    for c in 0..n {
                        a[col][c] = &a[col][c] / &p;
                    }
                    b[col] = &b[col] / &p;
                    for r in 0..n {
                        if r != col && !a[r][col].is_zero() {
                            let f = a[r][col].clone();
                            for c in 0..n {
                                let d = &a[col][c] * &f;
                                a[r][c] -= d;
                            }
                            let d = &b[col] * &f;
                            b[r] -= d;
                        }
                    }
                }
                if lp.satisfied_by(&b) {
                    let v: Q = lp.objective.iter().zip(&b).map(|(c, x)| c * x).sum();
                    match best {
                        None => *best = Some(v),
                        Some(bv) => {
                            if v < *bv {
                                *best = Some(v);
                            }
                        }
                    }
                }
                return;
            }
            for i in start..idx.len() {
                combo[depth] = idx[i];
                rec(idx, i + 1, depth + 1, combo, planes, lp, best);
            }
        }
        rec(&idx, 0, 0, &mut combo, &planes, lp, &mut best);
        best
    }

    #[test]
    fn agrees_with_vertex_enumeration() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let mut solved = 0;
        while solved < 60 {
            let n = rng.gen_range(1..=4usize);
            let m = rng.gen_range(1..=6usize);
            let mut lp = LinearProgram::new(n);
            lp.set_objective((0..n).map(|_| q(rng.gen_range(0..5), 1)).collect());
            for _ in 0..m {
                let coeffs: Vec<Q> = (0..n).map(|_| q(rng.gen_range(-3..4), 1)).collect();
                let rel = match rng.gen_range(0..3) {
                    0 => Relation::Le,
                    1 => Relation::Ge,
                    _ => Relation::Eq,
                };
                lp.constrain(coeffs, rel, q(rng.gen_range(-4..8), 1));
            }
            // keep the objective bounded below on the nonnegative orthant
            let outcome = solve(&lp);
            let oracle = vertex_enumeration_min(&lp);
            match (outcome, oracle) {
                (LpOutcome::Optimal { value, .. }, Some(v)) => {
                    assert_eq!(value, v);
                    solved += 1;
                }
                (LpOutcome::Infeasible, None) => {
                    solved += 1;
                }
                (LpOutcome::Unbounded, _) => { /* oracle cannot certify; skip */ }
                (got, want) => panic!("solver {got:?} vs oracle {want:?}"),
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![q(1, 2), q_int(1)]);
        lp.constrain(vec![q_int(1), q(-1, 3)], Relation::Ge, q(2, 5));
        let s = serde_json::to_string(&lp).unwrap();
        let back: LinearProgram = serde_json::from_str(&s).unwrap();
        assert_eq!(back.num_vars, 2);
        assert_eq!(back.constraints[0].rhs, q(2, 5));
    }
}
