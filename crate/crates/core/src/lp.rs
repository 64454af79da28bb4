//! Dense two-phase primal simplex.
//!
//! Solves `min c'x` subject to rows `a_r'x {>=,<=,=} b_r` and `x >= 0`, and
//! returns an optimal basic solution with dual prices. Duals follow the usual
//! minimization convention: nonnegative on `>=` rows, nonpositive on `<=`
//! rows, free on equalities, so that the reduced cost of any column `a` with
//! cost `c0` is `c0 - y'a`.
//!
//! Rows are equilibrated to unit max-norm before pivoting. After the last
//! pivot the final basis is refactorized from the original data, so the
//! reported primal values and duals do not carry accumulated tableau error.

use thiserror::Error;

/// Smallest magnitude accepted as a pivot element.
pub const PIVOT_TOL: f64 = 1e-9;
/// Reduced-cost threshold for optimality, relative to the cost scale.
pub const OPT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("row has {got} coefficients, problem has {expected} columns")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite value in problem data")]
    NonFinite,
    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(usize),
}

/// A minimization problem over nonnegative variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    costs: Vec<f64>,
    coefficients: Vec<f64>,
    relations: Vec<Relation>,
    rhs: Vec<f64>,
}

impl LpProblem {
    pub fn new(costs: Vec<f64>) -> Self {
        LpProblem {
            costs,
            coefficients: Vec::new(),
            relations: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn add_row(
        &mut self,
        coeffs: &[f64],
        relation: Relation,
        rhs: f64,
    ) -> Result<usize, LpError> {
        if coeffs.len() != self.costs.len() {
            return Err(LpError::Dimension {
                expected: self.costs.len(),
                got: coeffs.len(),
            });
        }
        self.coefficients.extend_from_slice(coeffs);
        self.relations.push(relation);
        self.rhs.push(rhs);
        Ok(self.rhs.len() - 1)
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_cols(&self) -> usize {
        self.costs.len()
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let n = self.num_cols();
        &self.coefficients[r * n..(r + 1) * n]
    }

    pub fn relation(&self, r: usize) -> Relation {
        self.relations[r]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        solve(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values; meaningful only when optimal.
    pub x: Vec<f64>,
    pub objective: f64,
    /// One price per row.
    pub duals: Vec<f64>,
    /// Whether each structural variable is in the final basis.
    pub basic: Vec<bool>,
}

impl LpSolution {
    fn empty(status: LpStatus, p: &LpProblem) -> Self {
        let objective = match status {
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
            LpStatus::Optimal => 0.0,
        };
        LpSolution {
            status,
            x: vec![0.0; p.num_cols()],
            objective,
            duals: vec![0.0; p.num_rows()],
            basic: vec![false; p.num_cols()],
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: usize,
    /// Columns excluding the right-hand side.
    width: usize,
    /// `rows x (width + 1)`, last entry of each row is the basic value.
    cells: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<Kind>,
    /// Reduced costs, last entry holds minus the objective.
    reduced: Vec<f64>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * (self.width + 1) + c]
    }

    #[inline]
    fn value(&self, r: usize) -> f64 {
        self.at(r, self.width)
    }

    fn price_out(&mut self, costs: &[f64]) {
        let w = self.width + 1;
        self.reduced = costs.to_vec();
        self.reduced.push(0.0);
        for r in 0..self.rows {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                let row = &self.cells[r * w..(r + 1) * w];
                for (d, &a) in self.reduced.iter_mut().zip(row) {
                    *d -= cb * a;
                }
            }
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width + 1;
        let piv = self.at(pr, pc);
        {
            let row = &mut self.cells[pr * w..(pr + 1) * w];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[pc] = 1.0;
        }
        let (before, rest) = self.cells.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[pc];
            if f != 0.0 {
                for (v, &p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                row[pc] = 0.0;
            }
        }
        let f = self.reduced[pc];
        if f != 0.0 {
            for (v, &p) in self.reduced.iter_mut().zip(prow.iter()) {
                *v -= f * p;
            }
            self.reduced[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Runs primal simplex on the current reduced costs. Returns `false` on
    /// an unbounded ray.
    fn optimize(
        &mut self,
        allow: impl Fn(Kind) -> bool,
        cost_scale: f64,
        budget: &mut usize,
    ) -> Result<bool, LpError> {
        let tol = OPT_TOL * cost_scale.max(1.0);
        let mut degenerate = 0usize;
        let bland_after = 5 * (self.rows + self.width);
        let mut bland = false;
        loop {
            let mut enter = None;
            let mut best = -tol;
            for c in 0..self.width {
                if !allow(self.kinds[c]) {
                    continue;
                }
                let d = self.reduced[c];
                if bland {
                    if d < -tol {
                        enter = Some(c);
                        break;
                    }
                } else if d < best {
                    best = d;
                    enter = Some(c);
                }
            }
            let Some(q) = enter else { return Ok(true) };

            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, q);
                if a > PIVOT_TOL {
                    let ratio = self.value(r).max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            let eps = 1e-12 * bratio.max(1.0);
                            if ratio < bratio - eps
                                || (ratio <= bratio + eps && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            let Some((pr, ratio)) = leave else {
                return Ok(false);
            };

            if *budget == 0 {
                return Err(LpError::IterationLimit(0));
            }
            *budget -= 1;
            if ratio <= 1e-12 {
                degenerate += 1;
                if degenerate > bland_after {
                    bland = true;
                }
            }
            self.pivot(pr, q);
        }
    }
}

/// Gaussian elimination with partial pivoting on a dense `n x n` system,
/// column-major `a`. Returns `None` when singular.
fn lu_solve(n: usize, mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let idx = |r: usize, c: usize| c * n + r;
    for k in 0..n {
        let (p, mag) = (k..n)
            .map(|r| (r, a[idx(r, k)].abs()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag < 1e-14 {
            return None;
        }
        if p != k {
            for c in 0..n {
                a.swap(idx(p, c), idx(k, c));
            }
            b.swap(p, k);
        }
        let piv = a[idx(k, k)];
        for r in k + 1..n {
            let f = a[idx(r, k)] / piv;
            if f != 0.0 {
                for c in k..n {
                    a[idx(r, c)] -= f * a[idx(k, c)];
                }
                b[r] -= f * b[k];
            }
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for c in k + 1..n {
            s -= a[idx(k, c)] * b[c];
        }
        b[k] = s / a[idx(k, k)];
    }
    Some(b)
}

/// Solves `p` to optimality, or reports infeasibility/unboundedness.
pub fn solve(p: &LpProblem) -> Result<LpSolution, LpError> {
    let m = p.num_rows();
    let n = p.num_cols();
    if p.costs
        .iter()
        .chain(&p.coefficients)
        .chain(&p.rhs)
        .any(|v| !v.is_finite())
    {
        return Err(LpError::NonFinite);
    }

    // Equilibrate rows and orient them so that every right-hand side is >= 0.
    let mut scale = vec![1.0; m];
    let mut sign = vec![1.0; m];
    let mut rel = p.relations.clone();
    for r in 0..m {
        let norm = p.row(r).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if norm == 0.0 {
            let ok = match p.relations[r] {
                Relation::Ge => p.rhs[r] <= 0.0,
                Relation::Le => p.rhs[r] >= 0.0,
                Relation::Eq => p.rhs[r] == 0.0,
            };
            if !ok {
                return Ok(LpSolution::empty(LpStatus::Infeasible, p));
            }
        } else {
            scale[r] = 1.0 / norm;
        }
        if p.rhs[r] < 0.0 {
            sign[r] = -1.0;
            rel[r] = match rel[r] {
                Relation::Ge => Relation::Le,
                Relation::Le => Relation::Ge,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let slacks = rel.iter().filter(|r| **r != Relation::Eq).count();
    let artificials = rel.iter().filter(|r| **r != Relation::Le).count();
    let width = n + slacks + artificials;
    let mut kinds = vec![Kind::Structural; n];
    kinds.extend(std::iter::repeat_n(Kind::Slack, slacks));
    kinds.extend(std::iter::repeat_n(Kind::Artificial, artificials));

    // Auxiliary column owned by each row: (slack column, slack sign), artificial column.
    let mut slack_of = vec![None; m];
    let mut art_of = vec![None; m];
    let mut cells = vec![0.0; m * (width + 1)];
    let mut basis = vec![0; m];
    let (mut next_slack, mut next_art) = (n, n + slacks);
    for r in 0..m {
        let f = scale[r] * sign[r];
        let row = &mut cells[r * (width + 1)..(r + 1) * (width + 1)];
        for (v, &a) in row.iter_mut().zip(p.row(r)) {
            *v = a * f;
        }
        row[width] = p.rhs[r] * f;
        match rel[r] {
            Relation::Le => {
                row[next_slack] = 1.0;
                slack_of[r] = Some((next_slack, 1.0));
                basis[r] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -1.0;
                slack_of[r] = Some((next_slack, -1.0));
                next_slack += 1;
                row[next_art] = 1.0;
                art_of[r] = Some(next_art);
                basis[r] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = 1.0;
                art_of[r] = Some(next_art);
                basis[r] = next_art;
                next_art += 1;
            }
        }
    }

    let mut t = Tableau {
        rows: m,
        width,
        cells,
        basis,
        kinds,
        reduced: Vec::new(),
    };
    let mut budget = 50 * (m + width) + 1000;
    let limit = budget;
    let lift = |e: LpError| match e {
        LpError::IterationLimit(_) => LpError::IterationLimit(limit),
        e => e,
    };

    // Phase 1: minimize the artificial mass.
    if artificials > 0 {
        let phase1: Vec<f64> = t
            .kinds
            .iter()
            .map(|k| if *k == Kind::Artificial { 1.0 } else { 0.0 })
            .collect();
        t.price_out(&phase1);
        t.optimize(|_| true, 1.0, &mut budget).map_err(lift)?;
        let bmax = (0..m).map(|r| t.value(r).abs()).fold(1.0f64, f64::max);
        let mass: f64 = (0..m)
            .filter(|&r| t.kinds[t.basis[r]] == Kind::Artificial)
            .map(|r| t.value(r))
            .sum();
        if mass > 1e-9 * bmax {
            return Ok(LpSolution::empty(LpStatus::Infeasible, p));
        }
        // Drive zero-valued artificials out of the basis where possible.
        for r in 0..m {
            if t.kinds[t.basis[r]] != Kind::Artificial {
                continue;
            }
            let mut best = None;
            let mut mag = PIVOT_TOL;
            for c in 0..width {
                if t.kinds[c] != Kind::Artificial && t.at(r, c).abs() > mag {
                    mag = t.at(r, c).abs();
                    best = Some(c);
                }
            }
            if let Some(c) = best {
                t.pivot(r, c);
            }
        }
    }

    // Phase 2.
    let mut costs = p.costs.clone();
    costs.resize(width, 0.0);
    let cost_scale = p.costs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    t.price_out(&costs);
    let bounded = t
        .optimize(|k| k != Kind::Artificial, cost_scale, &mut budget)
        .map_err(lift)?;
    if !bounded {
        return Ok(LpSolution::empty(LpStatus::Unbounded, p));
    }

    // Refactorize the final basis from the (scaled, oriented) original data.
    let column = |c: usize, out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        if c < n {
            for r in 0..m {
                out[r] = p.row(r)[c] * scale[r] * sign[r];
            }
        } else {
            for r in 0..m {
                if let Some((sc, sg)) = slack_of[r] {
                    if sc == c {
                        out[r] = sg;
                    }
                }
                if art_of[r] == Some(c) {
                    out[r] = 1.0;
                }
            }
        }
    };
    let mut bmat = vec![0.0; m * m];
    for (k, &c) in t.basis.iter().enumerate() {
        column(c, &mut bmat[k * m..(k + 1) * m]);
    }
    let rhs: Vec<f64> = (0..m).map(|r| p.rhs[r] * scale[r] * sign[r]).collect();
    let xb = lu_solve(m, bmat.clone(), rhs).unwrap_or_else(|| (0..m).map(|r| t.value(r)).collect());
    // B^T y = c_B: transpose of column-major B is B in row-major order.
    let mut bt = vec![0.0; m * m];
    for k in 0..m {
        for r in 0..m {
            bt[r * m + k] = bmat[k * m + r];
        }
    }
    let cb: Vec<f64> = t.basis.iter().map(|&c| costs[c]).collect();
    let y = lu_solve(m, bt, cb).unwrap_or_else(|| {
        // Fall back to the tableau: y_r = -(reduced cost of the row's identity column).
        (0..m)
            .map(|r| match (slack_of[r], art_of[r]) {
                (Some((sc, sg)), _) if sg > 0.0 => -t.reduced[sc],
                (_, Some(ac)) => -t.reduced[ac],
                _ => 0.0,
            })
            .collect()
    });

    let mut x = vec![0.0; n];
    let mut basic = vec![false; n];
    for (k, &c) in t.basis.iter().enumerate() {
        if c < n {
            x[c] = xb[k].max(0.0);
            basic[c] = true;
        }
    }
    let objective = p.costs.iter().zip(&x).map(|(c, v)| c * v).sum();
    let duals = (0..m).map(|r| y[r] * scale[r] * sign[r]).collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        duals,
        basic,
    })
}
