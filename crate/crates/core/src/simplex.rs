//! Small dense linear-program solver: two-phase revised primal simplex.
//! Deterministic (Dantzig pricing with lowest-index tie breaks, Bland's
//! rule after an iteration budget).
//!
//! The decoy-state systems are tiny but badly scaled (coefficients spanning
//! many orders of magnitude within a row), which makes a classic tableau
//! drift: it rewrites the constraint data on every pivot. Here the data
//! stays immutable; only the basis inverse is updated, and it is rebuilt
//! from scratch by LU factorization every few dozen pivots, so roundoff
//! cannot accumulate past a refactorization interval.

/// Row sense of a constraint on `x >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    LessEq,
    GreaterEq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivot budget exhausted; treated downstream as a solve failure.
    PivotLimit,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Optimization sense for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

const PHASE1_TOL: f64 = 1e-8;
const REDUCED_COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DANTZIG_ITERS: usize = 20_000;
const MAX_ITERS: usize = 100_000;
const REFACTOR_EVERY: usize = 48;

/// Solve `opt c.x` subject to the constraints and `x >= 0`.
pub fn solve(objective: &[f64], constraints: &[Constraint], sense: Sense) -> Solution {
    let nv = objective.len();
    let m = constraints.len();

    // normalize to `coeffs . x <= rhs`, equilibrate rows, then flip rows
    // with negative right-hand side so b >= 0 (their slack enters with -1)
    let mut cols = vec![0.0f64; m * (nv + m)]; // column-major structural+slack
    let mut b = vec![0.0f64; m];
    let mut needs_artificial = Vec::new();
    for (i, con) in constraints.iter().enumerate() {
        debug_assert_eq!(con.coeffs.len(), nv);
        let scale = con
            .coeffs
            .iter()
            .fold(0.0f64, |a, &c| a.max(c.abs()))
            .max(f64::MIN_POSITIVE);
        let mut sign = 1.0 / scale;
        let mut rhs = con.rhs / scale;
        if con.relation == Relation::GreaterEq {
            sign = -sign;
            rhs = -rhs;
        }
        let flip = if rhs < 0.0 { -1.0 } else { 1.0 };
        if rhs < 0.0 {
            needs_artificial.push(i);
        }
        for (j, &c) in con.coeffs.iter().enumerate() {
            cols[j * m + i] = flip * sign * c;
        }
        cols[(nv + i) * m + i] = flip;
        b[i] = flip * rhs;
    }

    // column equilibration: x_j = u_j / col_scale_j
    let mut col_scale = vec![1.0f64; nv];
    for (j, s) in col_scale.iter_mut().enumerate() {
        let mx = cols[j * m..(j + 1) * m].iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if mx > 0.0 {
            *s = mx;
            let inv = 1.0 / mx;
            for v in cols[j * m..(j + 1) * m].iter_mut() {
                *v *= inv;
            }
        }
    }

    let internal_obj: Vec<f64> = match sense {
        Sense::Maximize => objective.iter().zip(&col_scale).map(|(&c, &s)| c / s).collect(),
        Sense::Minimize => objective.iter().zip(&col_scale).map(|(&c, &s)| -c / s).collect(),
    };

    let mut lp = Revised {
        m,
        n: nv + m,
        cols,
        b,
        basis: (0..m).map(|i| nv + i).collect(),
        in_basis: vec![false; nv + m],
        binv: identity(m),
        iters: 0,
    };
    for &i in &needs_artificial {
        lp.basis[i] = usize::MAX; // artificial marker, column is e_i
    }
    for &j in &lp.basis {
        if j != usize::MAX {
            lp.in_basis[j] = true;
        }
    }

    if !needs_artificial.is_empty() {
        // phase 1: minimize the sum of artificial levels
        match lp.iterate(Phase::One) {
            IterOutcome::Optimal => {}
            IterOutcome::Unbounded => unreachable!("phase-1 objective is bounded"),
            IterOutcome::PivotLimit => return failure(SolveStatus::PivotLimit, nv),
        }
        let infeasibility: f64 = lp
            .basic_solution()
            .iter()
            .zip(&lp.basis)
            .filter(|(_, &j)| j == usize::MAX)
            .map(|(&v, _)| v.max(0.0))
            .sum();
        if infeasibility > PHASE1_TOL {
            return failure(SolveStatus::Infeasible, nv);
        }
    }

    let status = match lp.iterate(Phase::Two(&internal_obj)) {
        IterOutcome::Optimal => SolveStatus::Optimal,
        IterOutcome::Unbounded => SolveStatus::Unbounded,
        IterOutcome::PivotLimit => SolveStatus::PivotLimit,
    };
    if status != SolveStatus::Optimal {
        return failure(status, nv);
    }

    lp.refactorize();
    let xb = lp.basic_solution();
    if std::env::var_os("MDIQKD_LP_DUMP").is_some() {
        use std::io::Write;
        let mut f = std::fs::File::create("/tmp/basis_dump.txt").unwrap();
        writeln!(f, "{} {} {}", m, nv, lp.n).unwrap();
        let ids: Vec<String> = lp
            .basis
            .iter()
            .map(|&j| if j == usize::MAX { "A".into() } else { j.to_string() })
            .collect();
        writeln!(f, "{}", ids.join(" ")).unwrap();
        let xs: Vec<String> = xb.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(f, "{}", xs.join(" ")).unwrap();
        let bs: Vec<String> = lp.b.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(f, "{}", bs.join(" ")).unwrap();
        for j in 0..lp.n {
            let col: Vec<String> = lp.column(j).iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(f, "{}", col.join(" ")).unwrap();
        }
        let cs: Vec<String> = col_scale.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(f, "{}", cs.join(" ")).unwrap();
    }
    if std::env::var_os("MDIQKD_LP_DEBUG").is_some() {
        for (i, (&j, &v)) in lp.basis.iter().zip(&xb).enumerate() {
            if v < -1e-9 {
                let kind = if j == usize::MAX {
                    "artificial".to_string()
                } else if j < nv {
                    format!("structural {j}")
                } else {
                    format!("slack of row {}", j - nv)
                };
                eprintln!("negative basic level at row {i}: {kind} = {v:.6e}");
            }
        }
    }
    let mut x = vec![0.0; nv];
    for (i, &j) in lp.basis.iter().enumerate() {
        if j != usize::MAX && j < nv {
            x[j] = (xb[i] / col_scale[j]).max(0.0);
        }
    }
    let objective_value: f64 = objective.iter().zip(&x).map(|(&c, &v)| c * v).sum();
    Solution { status, x, objective: objective_value }
}

fn failure(status: SolveStatus, nv: usize) -> Solution {
    Solution { status, x: vec![0.0; nv], objective: f64::NAN }
}

fn identity(m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        out[i * m + i] = 1.0;
    }
    out
}

enum Phase<'a> {
    One,
    Two(&'a [f64]),
}

enum IterOutcome {
    Optimal,
    Unbounded,
    PivotLimit,
}

struct Revised {
    m: usize,
    n: usize,
    /// column-major structural + slack columns, immutable after setup
    cols: Vec<f64>,
    b: Vec<f64>,
    /// basic column per row; usize::MAX marks the artificial unit column e_row
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    /// row-major basis inverse
    binv: Vec<f64>,
    iters: usize,
}

/// Refinement sweeps applied to every basis-inverse application. The basis
/// matrices here can be ill-conditioned enough (spans of ~1e13) that even a
/// freshly inverted basis loses three or four digits; correcting with
/// residuals against the immutable column data recovers them.
const REFINE_STEPS: usize = 2;

impl Revised {
    fn column(&self, j: usize) -> &[f64] {
        &self.cols[j * self.m..(j + 1) * self.m]
    }

    /// v = B x (using the original column data).
    fn b_times(&self, x: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        for (k, &xk) in x.iter().enumerate() {
            if xk == 0.0 {
                continue;
            }
            let j = self.basis[k];
            if j == usize::MAX {
                out[k] += xk;
            } else {
                for (o, &c) in out.iter_mut().zip(self.column(j)) {
                    *o += xk * c;
                }
            }
        }
        out
    }

    /// w_k = (B^T y)_k = column_k . y.
    fn bt_times(&self, y: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        for (k, o) in out.iter_mut().enumerate() {
            let j = self.basis[k];
            *o = if j == usize::MAX {
                y[k]
            } else {
                self.column(j).iter().zip(y).map(|(&a, &v)| a * v).sum()
            };
        }
        out
    }

    /// Raw x = binv v.
    fn binv_times(&self, v: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.binv[i * m..(i + 1) * m];
            *o = row.iter().zip(v).map(|(&a, &w)| a * w).sum();
        }
        out
    }

    /// Raw y with y^T = c^T binv.
    fn binv_t_times(&self, c: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &ci) in c.iter().enumerate() {
            if ci == 0.0 {
                continue;
            }
            let row = &self.binv[i * m..(i + 1) * m];
            for (yk, &v) in y.iter_mut().zip(row) {
                *yk += ci * v;
            }
        }
        y
    }

    /// Solve B x = v with the approximate inverse plus refinement.
    fn solve_b(&self, v: &[f64]) -> Vec<f64> {
        let mut x = self.binv_times(v);
        for _ in 0..REFINE_STEPS {
            let bx = self.b_times(&x);
            let r: Vec<f64> = v.iter().zip(&bx).map(|(&a, &b)| a - b).collect();
            let dx = self.binv_times(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        x
    }

    /// Solve B^T y = c with the approximate inverse plus refinement.
    fn solve_bt(&self, c: &[f64]) -> Vec<f64> {
        let mut y = self.binv_t_times(c);
        for _ in 0..REFINE_STEPS {
            let bty = self.bt_times(&y);
            let r: Vec<f64> = c.iter().zip(&bty).map(|(&a, &b)| a - b).collect();
            let dy = self.binv_t_times(&r);
            for (yi, di) in y.iter_mut().zip(&dy) {
                *yi += di;
            }
        }
        y
    }

    /// x_B = B^-1 b.
    fn basic_solution(&self) -> Vec<f64> {
        self.solve_b(&self.b)
    }

    /// y = B^-T c_B.
    fn dual(&self, cb: &[f64]) -> Vec<f64> {
        self.solve_bt(cb)
    }

    /// alpha = B^-1 a_j.
    fn ftran(&self, col: &[f64]) -> Vec<f64> {
        self.solve_b(col)
    }

    fn refactorize(&mut self) {
        let m = self.m;
        let mut bmat = vec![0.0; m * m];
        let mut unit = vec![0.0; m];
        for (k, &j) in self.basis.iter().enumerate() {
            let col: &[f64] = if j == usize::MAX {
                // an artificial never moves row, so its column is e_k
                unit.fill(0.0);
                unit[k] = 1.0;
                &unit
            } else {
                self.column(j)
            };
            for i in 0..m {
                bmat[i * m + k] = col[i];
            }
        }
        if let Some(lu) = LuFactors::new(bmat, m) {
            // invert column by column
            let mut e = vec![0.0; m];
            let mut inv = vec![0.0; m * m];
            for k in 0..m {
                e.fill(0.0);
                e[k] = 1.0;
                let col = lu.solve(&e);
                for i in 0..m {
                    inv[i * m + k] = col[i];
                }
            }
            self.binv = inv;
        }
        // a singular basis leaves the previous inverse in place; the pivot
        // loop will keep refining it
    }

    fn iterate(&mut self, phase: Phase<'_>) -> IterOutcome {
        let m = self.m;
        let mut since_refactor = 0usize;
        loop {
            self.iters += 1;
            if self.iters > MAX_ITERS {
                return IterOutcome::PivotLimit;
            }
            if since_refactor >= REFACTOR_EVERY {
                self.refactorize();
                since_refactor = 0;
            }
            // basic objective coefficients
            let cb: Vec<f64> = self
                .basis
                .iter()
                .map(|&j| match &phase {
                    Phase::One => {
                        if j == usize::MAX {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                    Phase::Two(c) => {
                        if j == usize::MAX || j >= c.len() {
                            0.0
                        } else {
                            c[j]
                        }
                    }
                })
                .collect();
            let y = self.dual(&cb);
            // price nonbasic structural + slack columns
            let bland = self.iters > DANTZIG_ITERS;
            let mut entering = usize::MAX;
            let mut best = REDUCED_COST_TOL;
            for j in 0..self.n {
                if self.in_basis[j] {
                    continue;
                }
                let cj = match &phase {
                    Phase::One => 0.0,
                    Phase::Two(c) => {
                        if j < c.len() {
                            c[j]
                        } else {
                            0.0
                        }
                    }
                };
                let col = self.column(j);
                let reduced = cj - y.iter().zip(col).map(|(&a, &v)| a * v).sum::<f64>();
                if reduced > if bland { REDUCED_COST_TOL } else { best } {
                    entering = j;
                    if bland {
                        break;
                    }
                    best = reduced;
                }
            }
            if entering == usize::MAX {
                return IterOutcome::Optimal;
            }
            let alpha = self.ftran(self.column(entering));
            let xb = self.basic_solution();
            // minimum-ratio test; among near-ties prefer the largest pivot
            let mut leaving = usize::MAX;
            let mut best_ratio = f64::INFINITY;
            let mut best_pivot = 0.0f64;
            for i in 0..m {
                let a = alpha[i];
                if a > PIVOT_TOL {
                    let ratio = (xb[i] / a).max(0.0);
                    let window = 1e-9 * (1.0 + ratio.min(best_ratio));
                    if ratio < best_ratio - window {
                        best_ratio = ratio;
                        leaving = i;
                        best_pivot = a;
                    } else if ratio <= best_ratio + window && a > best_pivot {
                        best_ratio = best_ratio.min(ratio);
                        leaving = i;
                        best_pivot = a;
                    }
                }
            }
            if leaving == usize::MAX {
                return IterOutcome::Unbounded;
            }
            // basis change + product-form update of B^-1
            let old = self.basis[leaving];
            if old != usize::MAX {
                self.in_basis[old] = false;
            }
            self.basis[leaving] = entering;
            self.in_basis[entering] = true;
            let pivot = alpha[leaving];
            let inv_pivot = 1.0 / pivot;
            for k in 0..m {
                self.binv[leaving * m + k] *= inv_pivot;
            }
            for i in 0..m {
                if i == leaving {
                    continue;
                }
                let f = alpha[i];
                if f == 0.0 {
                    continue;
                }
                let (first, second) = self.binv.split_at_mut(leaving.max(i) * m);
                let (piv_row, row): (&[f64], &mut [f64]) = if leaving < i {
                    (&first[leaving * m..leaving * m + m], &mut second[..m])
                } else {
                    (&second[..m], &mut first[i * m..i * m + m])
                };
                for (x, p) in row.iter_mut().zip(piv_row.iter()) {
                    *x -= f * p;
                }
            }
            since_refactor += 1;
        }
    }
}

/// Dense LU with partial pivoting.
struct LuFactors {
    lu: Vec<f64>,
    perm: Vec<usize>,
    n: usize,
}

impl LuFactors {
    fn new(mut a: Vec<f64>, n: usize) -> Option<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut piv = k;
            let mut best = a[perm[k] * n + k].abs();
            for r in (k + 1)..n {
                let v = a[perm[r] * n + k].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-300 {
                return None;
            }
            perm.swap(k, piv);
            let pk = perm[k];
            let diag = a[pk * n + k];
            for r in (k + 1)..n {
                let pr = perm[r];
                let f = a[pr * n + k] / diag;
                a[pr * n + k] = f;
                if f != 0.0 {
                    for c in (k + 1)..n {
                        a[pr * n + c] -= f * a[pk * n + c];
                    }
                }
            }
        }
        Some(LuFactors { lu: a, perm, n })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = b[self.perm[i]];
            for j in 0..i {
                v -= self.lu[self.perm[i] * n + j] * y[j];
            }
            y[i] = v;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = y[i];
            for j in (i + 1)..n {
                v -= self.lu[self.perm[i] * n + j] * x[j];
            }
            x[i] = v / self.lu[self.perm[i] * n + i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn le(coeffs: &[f64], rhs: f64) -> Constraint {
        Constraint { coeffs: coeffs.to_vec(), relation: Relation::LessEq, rhs }
    }

    fn ge(coeffs: &[f64], rhs: f64) -> Constraint {
        Constraint { coeffs: coeffs.to_vec(), relation: Relation::GreaterEq, rhs }
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 2y st x + y <= 4, x <= 2 -> (2, 2), value 10
        let sol = solve(&[3.0, 2.0], &[le(&[1.0, 1.0], 4.0), le(&[1.0, 0.0], 2.0)], Sense::Maximize);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 10.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn minimization_with_lower_bound() {
        let sol = solve(&[0.0, 1.0], &[ge(&[0.0, 1.0], 0.3)], Sense::Minimize);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 0.3).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible() {
        let sol = solve(&[1.0], &[le(&[1.0], 1.0), ge(&[1.0], 2.0)], Sense::Maximize);
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let sol = solve(&[1.0, 0.0], &[le(&[0.0, 1.0], 1.0)], Sense::Maximize);
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn degenerate_rows_are_fine() {
        let cons = vec![
            le(&[1.0, 1.0], 1.0),
            le(&[1.0, 1.0], 1.0),
            ge(&[1.0, 0.0], 1.0),
            le(&[1.0, 0.0], 1.0),
        ];
        let sol = solve(&[1.0, 1.0], &cons, Sense::Maximize);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn badly_scaled_rows() {
        let sol = solve(
            &[1.0],
            &[le(&[1e-12], 2e-12), ge(&[1e10], 0.5e10)],
            Sense::Maximize,
        );
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn equality_like_interval() {
        // x pinned into [a - pad, a + pad]
        let a = 1.44e-10;
        let sol = solve(&[1.0], &[le(&[1.0], a + 1e-12), ge(&[1.0], a - 1e-12)], Sense::Minimize);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - (a - 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn solution_satisfies_constraints() {
        // mixed scales; the returned point must actually satisfy the rows
        let cons = vec![
            ge(&[1.0, 1e-8, 0.0], 0.5),
            le(&[1.0, 0.0, 1e-10], 0.7),
            ge(&[0.0, 1.0, 1.0], 1e-6),
            le(&[0.0, 1.0, 0.0], 2.0),
            le(&[0.0, 0.0, 1.0], 3.0),
        ];
        let sol = solve(&[1.0, 1.0, 1.0], &cons, Sense::Minimize);
        assert_eq!(sol.status, SolveStatus::Optimal);
        for c in &cons {
            let v: f64 = c.coeffs.iter().zip(&sol.x).map(|(a, b)| a * b).sum();
            match c.relation {
                Relation::LessEq => assert!(v <= c.rhs + 1e-9),
                Relation::GreaterEq => assert!(v >= c.rhs - 1e-9),
            }
        }
    }

    /// Brute-force LP oracle: enumerate candidate vertices as intersections
    /// of constraint/axis hyperplanes (2 vars), keep feasible ones, take the
    /// best objective.
    fn enumerate_optimum_2d(obj: [f64; 2], cons: &[Constraint]) -> Option<f64> {
        let mut planes: Vec<([f64; 2], f64)> = vec![([1.0, 0.0], 0.0), ([0.0, 1.0], 0.0)];
        for c in cons {
            planes.push(([c.coeffs[0], c.coeffs[1]], c.rhs));
        }
        let feasible = |x: [f64; 2]| -> bool {
            if x[0] < -1e-9 || x[1] < -1e-9 {
                return false;
            }
            cons.iter().all(|c| {
                let v = c.coeffs[0] * x[0] + c.coeffs[1] * x[1];
                match c.relation {
                    Relation::LessEq => v <= c.rhs + 1e-9,
                    Relation::GreaterEq => v >= c.rhs - 1e-9,
                }
            })
        };
        let mut best: Option<f64> = None;
        for i in 0..planes.len() {
            for j in (i + 1)..planes.len() {
                let (a, b) = (planes[i], planes[j]);
                let det = a.0[0] * b.0[1] - a.0[1] * b.0[0];
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = [
                    (a.1 * b.0[1] - a.0[1] * b.1) / det,
                    (a.0[0] * b.1 - a.1 * b.0[0]) / det,
                ];
                if feasible(x) {
                    let v = obj[0] * x[0] + obj[1] * x[1];
                    best = Some(best.map_or(v, |b: f64| b.max(v)));
                }
            }
        }
        best
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(200))]
        #[test]
        fn matches_vertex_enumeration(
            seeds in proptest::collection::vec(-1.0f64..1.0, 2..=2),
            raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.1f64..2.0, 0u8..2), 1..5),
        ) {
            let obj = [seeds[0], seeds[1]];
            let mut cons: Vec<Constraint> = raw
                .iter()
                .map(|&(a, b, rhs, rel)| Constraint {
                    coeffs: vec![a, b],
                    relation: if rel == 0 { Relation::LessEq } else { Relation::GreaterEq },
                    rhs: if rel == 0 { rhs } else { -rhs },
                })
                .collect();
            // box so the maximum exists
            cons.push(Constraint { coeffs: vec![1.0, 0.0], relation: Relation::LessEq, rhs: 3.0 });
            cons.push(Constraint { coeffs: vec![0.0, 1.0], relation: Relation::LessEq, rhs: 3.0 });
            let sol = solve(&obj, &cons, Sense::Maximize);
            let oracle = enumerate_optimum_2d(obj, &cons);
            match oracle {
                Some(v) => {
                    proptest::prop_assert_eq!(sol.status, SolveStatus::Optimal);
                    proptest::prop_assert!((sol.objective - v).abs() < 1e-6,
                        "simplex {} vs enumeration {}", sol.objective, v);
                }
                None => proptest::prop_assert_eq!(sol.status, SolveStatus::Infeasible),
            }
        }
    }
}
