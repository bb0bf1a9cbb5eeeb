//! Dense two-phase tableau simplex, generic over the scalar: exact
//! rationals (Bland's rule, fully deterministic) or f64 (Dantzig pricing
//! with a Bland fallback against stalling).
//!
//! Standard form: maximize c.x subject to Ax = b, x >= 0. Every row gets
//! an artificial variable; artificials never re-enter the basis, so at
//! optimality the phase-2 objective row holds the duals y = c_B B^-1
//! under the artificial columns.

use crate::lp::RationalLP;
use crate::rational::{rat_to_f64, Rat};
use num::{One, Signed, Zero};

pub trait Scalar: Clone + PartialOrd + std::fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn neg(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    /// Negligible in pivoting decisions (exact zero for rationals).
    fn is_zero_tol(&self) -> bool;
    fn is_neg(&self) -> bool {
        !self.is_zero_tol() && *self < Self::zero()
    }
    fn is_pos(&self) -> bool {
        !self.is_zero_tol() && *self > Self::zero()
    }
    /// Prefer Dantzig pricing (f64); rationals stick to Bland throughout.
    const DANTZIG: bool;
    /// Rebuild the tableau from the original data every this many pivots
    /// to stop roundoff drift; 0 disables (exact arithmetic never drifts).
    const REFRESH_INTERVAL: usize;
}

impl Scalar for Rat {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_zero_tol(&self) -> bool {
        Zero::is_zero(self)
    }
    const DANTZIG: bool = false;
    const REFRESH_INTERVAL: usize = 0;
}

const F64_TOL: f64 = 1e-8;

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_zero_tol(&self) -> bool {
        self.abs() <= F64_TOL
    }
    const DANTZIG: bool = true;
    const REFRESH_INTERVAL: usize = 128;
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus<T> {
    Optimal {
        /// Dense primal over the structural variables.
        primal: Vec<T>,
        /// Dense dual over the rows.
        dual: Vec<T>,
        objective: T,
        /// Final basis, one column index per row; indices >= num_vars are
        /// artificials that stayed basic at zero.
        basis: Vec<usize>,
    },
    Infeasible,
    Unbounded,
    /// Iteration limit hit (only plausible for f64 cycling).
    Stalled,
}

/// Dense problem data handed to the simplex core.
#[derive(Clone)]
pub struct Problem<T> {
    /// Row-major constraint matrix, m x n.
    pub matrix: Vec<Vec<T>>,
    pub rhs: Vec<T>,
    pub objective: Vec<T>,
}

impl Problem<Rat> {
    pub fn from_lp(lp: &RationalLP) -> Self {
        let n = lp.num_vars();
        let mut matrix = Vec::with_capacity(lp.num_rows());
        let mut rhs = Vec::with_capacity(lp.num_rows());
        for row in &lp.rows {
            let mut dense = vec![<Rat as Scalar>::zero(); n];
            for (j, v) in &row.terms {
                dense[*j] = v.clone();
            }
            matrix.push(dense);
            rhs.push(row.rhs.clone());
        }
        Problem {
            matrix,
            rhs,
            objective: lp.dense_objective(),
        }
    }
}

impl Problem<f64> {
    /// Copy with a deterministic, row-indexed right-hand-side nudge.
    /// Degenerate LPs (many zero rhs entries) stall the float simplex in
    /// ties; distinct nudges split the ties. Only the final BASIS of a
    /// perturbed solve is ever used — the vertex is refactored exactly
    /// against the unperturbed problem — so the nudge cannot leak into
    /// results.
    pub fn perturbed(&self) -> Problem<f64> {
        let m = self.rhs.len();
        let rhs = self
            .rhs
            .iter()
            .enumerate()
            .map(|(i, b)| b + 1e-7 * (i + 1) as f64 / m as f64)
            .collect();
        Problem {
            matrix: self.matrix.clone(),
            rhs,
            objective: self.objective.clone(),
        }
    }

    pub fn from_lp_f64(lp: &RationalLP) -> Self {
        let n = lp.num_vars();
        let mut matrix = Vec::with_capacity(lp.num_rows());
        let mut rhs = Vec::with_capacity(lp.num_rows());
        for row in &lp.rows {
            let mut dense = vec![0.0; n];
            for (j, v) in &row.terms {
                dense[*j] = rat_to_f64(v);
            }
            matrix.push(dense);
            rhs.push(rat_to_f64(&row.rhs));
        }
        Problem {
            matrix,
            rhs,
            objective: lp.objective.iter().fold(vec![0.0; n], |mut c, (j, v)| {
                c[*j] = rat_to_f64(v);
                c
            }),
        }
    }
}

struct Tableau<T> {
    m: usize,
    n: usize,
    width: usize, // n + m artificials + 1 rhs column
    rows: Vec<Vec<T>>,
    /// Phase-2 objective row (z_j - c_j), kept in sync through phase 1.
    obj: Vec<T>,
    /// Phase-1 objective row (sum of artificials).
    aux: Vec<T>,
    basis: Vec<usize>,
    /// Artificial columns may never enter the basis.
    degenerate_pivots: usize,
}

impl<T: Scalar> Tableau<T> {
    fn new(problem: &Problem<T>) -> Self {
        let m = problem.matrix.len();
        let n = problem.objective.len();
        let width = n + m + 1;
        let mut rows = Vec::with_capacity(m);
        for i in 0..m {
            let mut row: Vec<T> = Vec::with_capacity(width);
            let flip = problem.rhs[i].is_neg();
            for j in 0..n {
                let v = &problem.matrix[i][j];
                row.push(if flip { v.neg() } else { v.clone() });
            }
            for k in 0..m {
                row.push(if k == i { T::one() } else { T::zero() });
            }
            row.push(if flip {
                problem.rhs[i].neg()
            } else {
                problem.rhs[i].clone()
            });
            rows.push(row);
        }
        // Phase-2 row: -c under structural columns.
        let mut obj = vec![T::zero(); width];
        for j in 0..n {
            obj[j] = problem.objective[j].neg();
        }
        // Phase-1 row: minimize sum of artificials = maximize -sum; the
        // reduced row is -(sum of constraint rows) under structural columns.
        let mut aux = vec![T::zero(); width];
        for row in &rows {
            for j in 0..width {
                if j >= n && j < n + m {
                    continue;
                }
                aux[j] = aux[j].sub(&row[j]);
            }
        }
        Tableau {
            m,
            n,
            width,
            rows,
            obj,
            aux,
            basis: (n..n + m).collect(),
            degenerate_pivots: 0,
        }
    }

    /// Fresh constraint rows straight from the problem data (negative
    /// rhs rows flipped), as at construction time.
    fn fresh_rows(problem: &Problem<T>) -> Vec<Vec<T>> {
        let m = problem.matrix.len();
        let n = problem.objective.len();
        let width = n + m + 1;
        let mut rows = Vec::with_capacity(m);
        for i in 0..m {
            let mut row: Vec<T> = Vec::with_capacity(width);
            let flip = problem.rhs[i].is_neg();
            for j in 0..n {
                let v = &problem.matrix[i][j];
                row.push(if flip { v.neg() } else { v.clone() });
            }
            for k in 0..m {
                row.push(if k == i { T::one() } else { T::zero() });
            }
            row.push(if flip {
                problem.rhs[i].neg()
            } else {
                problem.rhs[i].clone()
            });
            rows.push(row);
        }
        rows
    }

    /// Rebuilds the tableau for the current basis set from the original
    /// data, curing accumulated roundoff. Fails if the basis drifted into
    /// singularity.
    fn rebuild(&mut self, problem: &Problem<T>) -> Result<(), ()> {
        let (m, n) = (self.m, self.n);
        let mut rows = Self::fresh_rows(problem);
        let mut cols: Vec<usize> = self.basis.clone();
        cols.sort_unstable();
        let mut used = vec![false; m];
        let mut basis = vec![usize::MAX; m];
        for &c in &cols {
            // Partial pivoting: largest magnitude among unassigned rows.
            let mut best: Option<(usize, T)> = None;
            for (i, row) in rows.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let mag = if row[c].is_neg() { row[c].neg() } else { row[c].clone() };
                match &best {
                    Some((_, bm)) if *bm >= mag => {}
                    _ => best = Some((i, mag)),
                }
            }
            let (pr, mag) = best.ok_or(())?;
            if mag.is_zero_tol() {
                if std::env::var_os("NONSIG_DEBUG").is_some() {
                    eprintln!("rebuild: singular at column {c}, |pivot| = {mag:?}");
                }
                return Err(());
            }
            let pv = rows[pr][c].clone();
            for v in rows[pr].iter_mut() {
                *v = v.div(&pv);
            }
            let prow = rows[pr].clone();
            let eliminate = |(i, row): (usize, &mut Vec<T>)| {
                if i == pr || row[c].is_zero_tol() {
                    return;
                }
                let f = row[c].clone();
                for (v, pj) in row.iter_mut().zip(&prow) {
                    *v = v.sub(&f.mul(pj));
                }
            };
            if m * self.width > 1 << 21 {
                use rayon::prelude::*;
                rows.par_iter_mut().enumerate().for_each(eliminate);
            } else {
                rows.iter_mut().enumerate().for_each(eliminate);
            }
            used[pr] = true;
            basis[pr] = c;
        }
        // Reduced cost rows for both phases, re-derived from scratch.
        let mut obj = vec![T::zero(); self.width];
        for j in 0..n {
            obj[j] = problem.objective[j].neg();
        }
        let mut aux = vec![T::zero(); self.width];
        for k in 0..m {
            aux[n + k] = T::one();
        }
        for target in [&mut obj, &mut aux] {
            for (i, row) in rows.iter().enumerate() {
                let f = target[basis[i]].clone();
                if !f.is_zero_tol() {
                    for (v, pj) in target.iter_mut().zip(row) {
                        *v = v.sub(&f.mul(pj));
                    }
                }
            }
        }
        self.rows = rows;
        self.obj = obj;
        self.aux = aux;
        self.basis = basis;
        Ok(())
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let pivot_val = self.rows[pr][pc].clone();
        let prow = &mut self.rows[pr];
        for v in prow.iter_mut() {
            *v = v.div(&pivot_val);
        }
        let prow = self.rows[pr].clone();
        let eliminate = |(i, row): (usize, &mut Vec<T>)| {
            if i == pr {
                return;
            }
            let factor = row[pc].clone();
            if factor.is_zero_tol() {
                return;
            }
            for (v, p) in row.iter_mut().zip(&prow) {
                *v = v.sub(&factor.mul(p));
            }
        };
        if self.m * self.width > 1 << 21 {
            use rayon::prelude::*;
            self.rows.par_iter_mut().enumerate().for_each(eliminate);
        } else {
            self.rows.iter_mut().enumerate().for_each(eliminate);
        }
        for target in [&mut self.obj, &mut self.aux] {
            let factor = target[pc].clone();
            if !factor.is_zero_tol() {
                for (v, p) in target.iter_mut().zip(&prow) {
                    *v = v.sub(&factor.mul(p));
                }
            }
        }
        self.basis[pr] = pc;
    }

    /// Entering column among structural columns, or None at optimality.
    /// Basic columns are excluded: their reduced cost is exactly zero in
    /// theory, but float drift can make one look attractive, and letting
    /// it re-enter corrupts the basis.
    fn choose_entering(&self, phase1: bool, bland: bool) -> Option<usize> {
        let row = if phase1 { &self.aux } else { &self.obj };
        let mut basic = vec![false; self.n];
        for &b in &self.basis {
            if b < self.n {
                basic[b] = true;
            }
        }
        let candidate = |j: &usize| row[*j].is_neg() && !basic[*j];
        if bland {
            (0..self.n).find(candidate)
        } else {
            let mut best: Option<(usize, &T)> = None;
            for j in 0..self.n {
                if candidate(&j) {
                    match best {
                        Some((_, bv)) if *bv <= row[j] => {}
                        _ => best = Some((j, &row[j])),
                    }
                }
            }
            best.map(|(j, _)| j)
        }
    }

    /// Leaving row by minimum ratio, ties broken by smallest basis column.
    /// `bland` forces the smallest-basis-column tie-break; anti-cycling
    /// only holds when entering AND leaving both follow Bland's rule.
    fn choose_leaving(&self, pc: usize, bland: bool) -> Option<usize> {
        let rhs_col = self.width - 1;
        let mut best: Option<(usize, T)> = None;
        for i in 0..self.m {
            if !self.rows[i][pc].is_pos() {
                continue;
            }
            let ratio = self.rows[i][rhs_col].div(&self.rows[i][pc]);
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        let (bland_row, min_ratio) = best.clone()?;
        if bland {
            return Some(bland_row);
        }
        // Floating point: among rows whose ratio is within tolerance of
        // the minimum, take the largest pivot element. Pivoting on tiny
        // elements is what degrades the basis into singularity.
        let mut stable: Option<(usize, T)> = None;
        for i in 0..self.m {
            if !self.rows[i][pc].is_pos() {
                continue;
            }
            let ratio = self.rows[i][rhs_col].div(&self.rows[i][pc]);
            if ratio.sub(&min_ratio).is_zero_tol() {
                let mag = self.rows[i][pc].clone();
                match &stable {
                    Some((_, bm)) if *bm >= mag => {}
                    _ => stable = Some((i, mag)),
                }
            }
        }
        stable.map(|(i, _)| i).or_else(|| best.map(|(i, _)| i))
    }

    /// Runs one phase to optimality. `Ok(true)`: optimal; `Ok(false)`:
    /// unbounded; `Err(())`: iteration limit or numerically broken basis.
    fn optimize(
        &mut self,
        problem: &Problem<T>,
        phase1: bool,
        max_iters: usize,
    ) -> Result<bool, ()> {
        let rhs_col = self.width - 1;
        let mut since_refresh = 0usize;
        let debug = std::env::var_os("NONSIG_DEBUG").is_some();
        // A rebuild costs about m pivots; scale the interval so periodic
        // refreshes stay a constant fraction of total work on big tableaus.
        let refresh_every = T::REFRESH_INTERVAL.max(self.m);
        for iter in 0..max_iters {
            if debug && iter > 0 && iter % 16384 == 0 {
                let row = if phase1 { &self.aux } else { &self.obj };
                eprintln!(
                    "optimize: phase1={phase1} iter {iter} obj {:?} degen {}",
                    row[rhs_col], self.degenerate_pivots
                );
            }
            if T::REFRESH_INTERVAL > 0 && since_refresh >= refresh_every {
                self.rebuild(problem)?;
                since_refresh = 0;
            }
            since_refresh += 1;
            // Escalating anti-cycling: Dantzig pricing while making progress,
            // Bland's entering rule after a short degenerate streak, and the
            // full Bland rule (entering and leaving, which is what actually
            // guarantees termination) only once the streak is long enough to
            // suggest a genuine cycle rather than an ordinary plateau.
            let streak = self.degenerate_pivots;
            let bland_entering = !T::DANTZIG || streak > 64;
            let bland_leaving = !T::DANTZIG || streak > 2048.max(self.m);
            let Some(pc) = self.choose_entering(phase1, bland_entering) else {
                return Ok(true);
            };
            let Some(pr) = self.choose_leaving(pc, bland_leaving) else {
                // No leaving row means the column is unbounded; phase 1 is
                // bounded by construction, so this only signals in phase 2.
                return Ok(phase1);
            };
            if self.rows[pr][rhs_col].is_zero_tol() {
                self.degenerate_pivots += 1;
            } else {
                self.degenerate_pivots = 0;
            }
            self.pivot(pr, pc);
        }
        if std::env::var_os("NONSIG_DEBUG").is_some() {
            eprintln!("optimize: iteration cap {max_iters} reached (phase1={phase1})");
        }
        Err(())
    }
}

/// Solves the problem; iteration limit guards against cycling bugs.
pub fn solve<T: Scalar>(problem: &Problem<T>) -> SolveStatus<T> {
    let m = problem.matrix.len();
    let n = problem.objective.len();
    let mut t = Tableau::new(problem);
    let max_iters = 1000 + 200 * (m + n) * (m + n).max(64).ilog2() as usize;
    // Each phase is re-run after a fresh rebuild until the rebuilt reduced
    // costs confirm optimality (floating point only; one pass for exact).
    let run_phase = |t: &mut Tableau<T>, phase1: bool| -> Result<bool, ()> {
        for _ in 0..16 {
            let st = t.optimize(problem, phase1, max_iters)?;
            if !st {
                return Ok(false);
            }
            if T::REFRESH_INTERVAL == 0 {
                return Ok(true);
            }
            t.rebuild(problem)?;
            if t.choose_entering(phase1, !T::DANTZIG).is_none() {
                return Ok(true);
            }
        }
        Err(())
    };
    match run_phase(&mut t, true) {
        Ok(true) => {}
        Ok(false) | Err(()) => return SolveStatus::Stalled,
    }
    // Feasible iff all artificials are (numerically) zero.
    let rhs_col = t.width - 1;
    let infeasible = (0..m).any(|i| t.basis[i] >= n && t.rows[i][rhs_col].is_pos());
    if infeasible {
        return SolveStatus::Infeasible;
    }
    // Drive artificials basic at level zero out of the basis; otherwise a
    // phase-2 pivot with a negative coefficient in their row could push
    // them positive again. Rows with no structural coefficient left are
    // redundant and keep their artificial pinned at zero harmlessly.
    let mut basic = vec![false; n];
    for &b in &t.basis {
        if b < n {
            basic[b] = true;
        }
    }
    for i in 0..m {
        if t.basis[i] < n {
            continue;
        }
        // Largest-magnitude non-basic structural coefficient in the row.
        let mut best: Option<(usize, T)> = None;
        for j in 0..n {
            if basic[j] {
                continue;
            }
            let mag = if t.rows[i][j].is_neg() {
                t.rows[i][j].neg()
            } else {
                t.rows[i][j].clone()
            };
            if mag.is_zero_tol() {
                continue;
            }
            match &best {
                Some((_, bm)) if *bm >= mag => {}
                _ => best = Some((j, mag)),
            }
        }
        if let Some((j, _)) = best {
            t.pivot(i, j);
            basic[j] = true;
        }
    }
    match run_phase(&mut t, false) {
        Ok(true) => {}
        Ok(false) => return SolveStatus::Unbounded,
        Err(()) => return SolveStatus::Stalled,
    }
    let mut primal = vec![T::zero(); n];
    for i in 0..m {
        if t.basis[i] < n {
            primal[t.basis[i]] = t.rows[i][rhs_col].clone();
        }
    }
    // Rows whose rhs was flipped at setup have their dual sign flipped back.
    let mut dual = Vec::with_capacity(m);
    for i in 0..m {
        let v = t.obj[n + i].clone();
        dual.push(if problem.rhs[i].is_neg() { v.neg() } else { v });
    }
    let mut objective = T::zero();
    for j in 0..n {
        objective = objective.add(&problem.objective[j].mul(&primal[j]));
    }
    SolveStatus::Optimal {
        primal,
        dual,
        objective,
        basis: t.basis,
    }
}

/// Exact solve of the basis system reported by a (possibly floating
/// point) simplex run. Artificial basis columns are unit vectors: they
/// pin their row's dual to zero and drop out of the primal, so only the
/// structural-basis block is actually inverted. Returns None if that
/// block is singular or the vertex has a negative coordinate.
pub fn refactor_basis(
    problem: &Problem<Rat>,
    basis: &[usize],
) -> Option<(Vec<Rat>, Vec<Rat>)> {
    let m = problem.matrix.len();
    let n = problem.objective.len();
    if basis.len() != m {
        return None;
    }
    let zero = <Rat as Scalar>::zero();
    let one = <Rat as Scalar>::one();
    let mut pinned = vec![false; m];
    let mut struct_cols = Vec::new();
    for &b in basis {
        if b >= n {
            pinned[b - n] = true;
        } else {
            struct_cols.push(b);
        }
    }
    struct_cols.sort_unstable();
    let free_rows: Vec<usize> = (0..m).filter(|&i| !pinned[i]).collect();
    let k = struct_cols.len();
    if free_rows.len() != k {
        return None;
    }
    // M = A[free_rows, struct_cols]; one Gauss-Jordan on [M | b | I]
    // yields both M^-1 b and M^-1.
    let mut a: Vec<Vec<Rat>> = free_rows
        .iter()
        .map(|&i| {
            let mut row: Vec<Rat> = struct_cols
                .iter()
                .map(|&j| problem.matrix[i][j].clone())
                .collect();
            row.push(problem.rhs[i].clone());
            row.extend((0..k).map(|_| zero.clone()));
            row
        })
        .collect();
    for (idx, row) in a.iter_mut().enumerate() {
        row[k + 1 + idx] = one.clone();
    }
    for p in 0..k {
        let pr = (p..k).find(|&i| !a[i][p].is_zero())?;
        a.swap(p, pr);
        let pv = a[p][p].clone();
        for v in a[p].iter_mut() {
            *v /= &pv;
        }
        let prow = a[p].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == p || row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (v, pvj) in row.iter_mut().zip(&prow) {
                *v -= &f * pvj;
            }
        }
    }
    let mut primal = vec![zero.clone(); n];
    for (j, &col) in struct_cols.iter().enumerate() {
        let v = a[j][k].clone();
        if v.is_negative() {
            return None;
        }
        primal[col] = v;
    }
    // y vanishes on pinned rows; elsewhere y = (M^-T) c_S read off M^-1.
    let mut dual = vec![zero.clone(); m];
    for (j, &col) in struct_cols.iter().enumerate() {
        let c = &problem.objective[col];
        if c.is_zero() {
            continue;
        }
        for (i, &row) in free_rows.iter().enumerate() {
            dual[row] += c * &a[j][k + 1 + i];
        }
    }
    Some((primal, dual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn problem(
        matrix: Vec<Vec<i64>>,
        rhs: Vec<i64>,
        objective: Vec<i64>,
    ) -> Problem<Rat> {
        Problem {
            matrix: matrix
                .into_iter()
                .map(|r| r.into_iter().map(|v| rat(v, 1)).collect())
                .collect(),
            rhs: rhs.into_iter().map(|v| rat(v, 1)).collect(),
            objective: objective.into_iter().map(|v| rat(v, 1)).collect(),
        }
    }

    #[test]
    fn solves_trivial_equality() {
        // max x s.t. x = 1
        let p = problem(vec![vec![1]], vec![1], vec![1]);
        match solve(&p) {
            SolveStatus::Optimal {
                primal, objective, ..
            } => {
                assert_eq!(primal, vec![rat(1, 1)]);
                assert_eq!(objective, rat(1, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn solves_distribution_lp() {
        // max x0 + 2 x1 s.t. x0 + x1 + x2 = 1: optimum 2 at x1 = 1.
        let p = problem(vec![vec![1, 1, 1]], vec![1], vec![1, 2, 0]);
        match solve(&p) {
            SolveStatus::Optimal {
                primal,
                dual,
                objective,
                ..
            } => {
                assert_eq!(objective, rat(2, 1));
                assert_eq!(primal[1], rat(1, 1));
                // dual: y >= c_j for all columns -> y = 2
                assert_eq!(dual, vec![rat(2, 1)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible() {
        // x0 + x1 = 1; x0 + x1 = 2
        let p = problem(vec![vec![1, 1], vec![1, 1]], vec![1, 2], vec![1, 0]);
        assert_eq!(solve(&p), SolveStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        // max x0 s.t. x0 - x1 = 0
        let p = problem(vec![vec![1, -1]], vec![0], vec![1, 0]);
        assert_eq!(solve(&p), SolveStatus::Unbounded);
    }

    #[test]
    fn handles_negative_rhs_and_redundant_rows() {
        // -x0 - x1 = -1 (same as x0 + x1 = 1), duplicated.
        let p = problem(
            vec![vec![-1, -1], vec![1, 1]],
            vec![-1, 1],
            vec![3, 1],
        );
        match solve(&p) {
            SolveStatus::Optimal { objective, .. } => assert_eq!(objective, rat(3, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn float_agrees_with_exact() {
        let p = problem(
            vec![vec![1, 1, 1, 0], vec![0, 1, 2, 1]],
            vec![1, 1],
            vec![2, 3, 1, 0],
        );
        let exact = match solve(&p) {
            SolveStatus::Optimal { objective, .. } => objective,
            other => panic!("unexpected {other:?}"),
        };
        let pf = Problem {
            matrix: p
                .matrix
                .iter()
                .map(|r| r.iter().map(rat_to_f64).collect())
                .collect(),
            rhs: p.rhs.iter().map(rat_to_f64).collect(),
            objective: p.objective.iter().map(rat_to_f64).collect(),
        };
        match solve(&pf) {
            SolveStatus::Optimal { objective, .. } => {
                assert!((objective - rat_to_f64(&exact)).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
