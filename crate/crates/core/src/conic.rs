//! Real conic programming layer.
//!
//! Standard form: variables live in a product of PSD blocks (scaled
//! symmetric vectorization, off-diagonals times sqrt 2) and a nonnegative
//! orthant; all constraints are equalities over that variable vector.
//! Inequalities are expressed by giving each one its own nonnegative slack
//! variable, which keeps the equality rows trivially independent.
//!
//! Solving lowers the problem to Clarabel's interior-point form. Slack
//! variables that appear in exactly one row with zero objective are
//! eliminated into native inequality rows, which roughly halves the KKT
//! system for heavily cut-strengthened models.

use crate::linalg::RMatrix;
use crate::scalar::Scalar;
use crate::{Error, Result};
use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

/// Cone structure: PSD blocks followed by a nonnegative orthant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeSpec {
    pub psd_block_orders: Vec<usize>,
    pub nonneg_count: usize,
}

impl ConeSpec {
    pub fn new(psd_block_orders: Vec<usize>, nonneg_count: usize) -> Result<Self> {
        if psd_block_orders.is_empty() && nonneg_count == 0 {
            return Err(Error::Model("at least one cone must be present".into()));
        }
        Ok(ConeSpec {
            psd_block_orders,
            nonneg_count,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

/// Dimension of the scaled symmetric vectorization of an order-d block.
pub fn svec_dim(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Index of entry (i, j), i <= j, in the column-stacked upper triangle.
pub fn svec_index(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    j * (j + 1) / 2 + i
}

/// Conic program over the ConeSpec variable layout, equality rows only.
#[derive(Clone, Debug)]
pub struct ConicProblem<T: Scalar> {
    pub cone: ConeSpec,
    pub sense: Sense,
    pub objective: Vec<T>,
    row_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    row_val: Vec<T>,
    pub rhs: Vec<T>,
}

impl<T: Scalar> ConicProblem<T> {
    pub fn new(cone: ConeSpec, sense: Sense) -> Self {
        let dim = cone
            .psd_block_orders
            .iter()
            .map(|&d| svec_dim(d))
            .sum::<usize>()
            + cone.nonneg_count;
        ConicProblem {
            cone,
            sense,
            objective: vec![T::zero(); dim],
            row_ptr: vec![0],
            row_idx: Vec::new(),
            row_val: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn total_dim(&self) -> usize {
        self.objective.len()
    }

    /// Offset of PSD block `b` in the variable vector.
    pub fn psd_offset(&self, b: usize) -> usize {
        self.cone.psd_block_orders[..b]
            .iter()
            .map(|&d| svec_dim(d))
            .sum()
    }

    /// Offset of the nonnegative variables in the variable vector.
    pub fn nonneg_offset(&self) -> usize {
        self.cone
            .psd_block_orders
            .iter()
            .map(|&d| svec_dim(d))
            .sum()
    }

    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }

    /// Append an equality row; entries are (variable index, coefficient).
    pub fn add_row(&mut self, entries: &[(usize, T)], rhs: T) -> usize {
        for &(i, _) in entries {
            debug_assert!(i < self.total_dim(), "row entry out of range");
        }
        for &(i, v) in entries {
            self.row_idx.push(i);
            self.row_val.push(v);
        }
        self.row_ptr.push(self.row_idx.len());
        self.rhs.push(rhs);
        self.rhs.len() - 1
    }

    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.row_idx[a..b], &self.row_val[a..b])
    }

    /// Value of row r at the point x.
    pub fn row_dot(&self, r: usize, x: &[T]) -> T {
        let (idx, val) = self.row(r);
        idx.iter()
            .zip(val)
            .fold(T::zero(), |acc, (&i, &v)| acc + v * x[i])
    }

    pub fn obj_dot(&self, x: &[T]) -> T {
        self.objective
            .iter()
            .zip(x)
            .fold(T::zero(), |acc, (&c, &v)| acc + c * v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    NumericLimit,
}

#[derive(Clone, Copy, Debug)]
pub struct Residuals<T> {
    pub primal_feas: T,
    pub dual_feas: T,
    pub rel_gap: T,
}

#[derive(Clone, Debug)]
pub struct ConicSolution<T: Scalar> {
    pub status: Status,
    /// Full primal vector in the original variable layout.
    pub x: Vec<T>,
    /// PSD blocks unpacked to dense symmetric matrices.
    pub primal_blocks: Vec<RMatrix<T>>,
    /// Values of the nonnegative variables.
    pub nonneg: Vec<T>,
    /// Multiplier per original equality row; for MAX problems the dual slack
    /// R'y - objective lies in the dual cone, for MIN it is objective - R'y.
    pub dual_eq: Vec<T>,
    pub primal_obj: T,
    pub dual_obj: T,
    pub residuals: Residuals<T>,
    /// Farkas-type certificate on infeasible statuses.
    pub certificate: Option<Vec<T>>,
    pub iterations: u32,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOpts {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iters: u32,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iters: 200,
        }
    }
}

impl<T: Scalar + clarabel::algebra::FloatT> ConicProblem<T> {
    pub fn solve(&self, opts: &SolveOpts) -> Result<ConicSolution<T>> {
        let dim = self.total_dim();
        let n_rows = self.n_rows();
        let nn_off = self.nonneg_offset();

        // Count appearances of each nonnegative variable across rows.
        let mut occurs = vec![0usize; dim];
        for &i in &self.row_idx {
            occurs[i] += 1;
        }

        // Pick per row at most one pure slack to eliminate: a nonnegative
        // variable with zero objective that appears only in that row.
        let mut elim_var_of_row: Vec<Option<(usize, T)>> = vec![None; n_rows];
        let mut eliminated = vec![false; dim];
        for r in 0..n_rows {
            let (idx, val) = self.row(r);
            for (&i, &v) in idx.iter().zip(val) {
                if i >= nn_off && occurs[i] == 1 && self.objective[i] == T::zero() && v != T::zero()
                {
                    elim_var_of_row[r] = Some((i, v));
                    eliminated[i] = true;
                    break;
                }
            }
        }

        // Reindex kept variables.
        let mut new_of_old = vec![usize::MAX; dim];
        let mut kept = 0usize;
        for i in 0..dim {
            if !eliminated[i] {
                new_of_old[i] = kept;
                kept += 1;
            }
        }

        // Lowered rows: remaining equalities first, then converted
        // inequalities, then cone membership rows for kept variables.
        let mut triplets: Vec<(usize, usize, T)> = Vec::with_capacity(self.row_idx.len() + kept);
        let mut b: Vec<T> = Vec::new();
        let mut out_row = 0usize;
        let mut eq_pos = vec![usize::MAX; n_rows];
        for r in 0..n_rows {
            if elim_var_of_row[r].is_none() {
                let (idx, val) = self.row(r);
                for (&i, &v) in idx.iter().zip(val) {
                    triplets.push((out_row, new_of_old[i], v));
                }
                b.push(self.rhs[r]);
                eq_pos[r] = out_row;
                out_row += 1;
            }
        }
        let n_zero = out_row;
        let mut ineq_pos = vec![usize::MAX; n_rows];
        let mut ineq_sign = vec![T::one(); n_rows];
        for r in 0..n_rows {
            if let Some((slack, c)) = elim_var_of_row[r] {
                let flip = if c > T::zero() { T::one() } else { -T::one() };
                let (idx, val) = self.row(r);
                for (&i, &v) in idx.iter().zip(val) {
                    if i != slack {
                        triplets.push((out_row, new_of_old[i], flip * v));
                    }
                }
                b.push(flip * self.rhs[r]);
                ineq_pos[r] = out_row;
                ineq_sign[r] = flip;
                out_row += 1;
            }
        }
        let mut nonneg_rows = 0usize;
        for i in nn_off..dim {
            if !eliminated[i] {
                triplets.push((out_row, new_of_old[i], -T::one()));
                b.push(T::zero());
                out_row += 1;
                nonneg_rows += 1;
            }
        }
        let n_nonneg_cone = (out_row - n_zero) - nonneg_rows + nonneg_rows;
        debug_assert_eq!(n_nonneg_cone, out_row - n_zero);
        let psd_row_start = out_row;
        for (bi, &d) in self.cone.psd_block_orders.iter().enumerate() {
            let off = self.psd_offset(bi);
            for k in 0..svec_dim(d) {
                triplets.push((out_row, new_of_old[off + k], -T::one()));
                b.push(T::zero());
                out_row += 1;
            }
        }
        let total_rows = out_row;

        // Assemble CSC.
        let mut col_counts = vec![0usize; kept];
        for &(_, c, _) in &triplets {
            col_counts[c] += 1;
        }
        let mut colptr = vec![0usize; kept + 1];
        for c in 0..kept {
            colptr[c + 1] = colptr[c] + col_counts[c];
        }
        let nnz = triplets.len();
        let mut rowval = vec![0usize; nnz];
        let mut nzval = vec![T::zero(); nnz];
        {
            let mut cursor = colptr.clone();
            // Triplets were generated row by row, so within each column the
            // row indices arrive sorted.
            for &(r, c, v) in &triplets {
                let p = cursor[c];
                rowval[p] = r;
                nzval[p] = v;
                cursor[c] += 1;
            }
        }
        let a_mat = CscMatrix::new(total_rows, kept, colptr, rowval, nzval);
        let p_mat = CscMatrix::<T>::zeros((kept, kept));

        let mut q = vec![T::zero(); kept];
        let flip_obj = match self.sense {
            Sense::Min => T::one(),
            Sense::Max => -T::one(),
        };
        for i in 0..dim {
            if !eliminated[i] {
                q[new_of_old[i]] = flip_obj * self.objective[i];
            }
        }

        let mut cones: Vec<SupportedConeT<T>> = Vec::new();
        if n_zero > 0 {
            cones.push(SupportedConeT::ZeroConeT(n_zero));
        }
        if psd_row_start > n_zero {
            cones.push(SupportedConeT::NonnegativeConeT(psd_row_start - n_zero));
        }
        for &d in &self.cone.psd_block_orders {
            cones.push(SupportedConeT::PSDTriangleConeT(d));
        }

        let mut settings = DefaultSettings::<T>::default();
        settings.verbose = false;
        settings.max_iter = opts.max_iters;
        settings.tol_feas = T::r(opts.feas_tol);
        settings.tol_gap_abs = T::r(opts.gap_tol);
        settings.tol_gap_rel = T::r(opts.gap_tol);

        let mut solver = DefaultSolver::new(&p_mat, &q, &a_mat, &b, &cones, settings)
            .map_err(|e| Error::Solver(format!("{e:?}")))?;
        solver.solve();

        let sol = &solver.solution;
        let status = match sol.status {
            SolverStatus::Solved => Status::Optimal,
            SolverStatus::PrimalInfeasible => Status::PrimalInfeasible,
            SolverStatus::DualInfeasible => Status::DualInfeasible,
            // Reduced-accuracy termination still counts as optimal when the
            // achieved residuals sit within two orders of the targets;
            // ill-scaled MLE instances routinely stall just short of the
            // last digit.
            SolverStatus::AlmostSolved
                if solver.info.res_primal <= T::r(100.0 * opts.feas_tol)
                    && solver.info.res_dual <= T::r(100.0 * opts.feas_tol)
                    && solver.info.gap_rel <= T::r(100.0 * opts.gap_tol) =>
            {
                Status::Optimal
            }
            _ => Status::NumericLimit,
        };

        // Reconstruct the full primal vector, including eliminated slacks.
        let mut x_full = vec![T::zero(); dim];
        for i in 0..dim {
            if !eliminated[i] {
                x_full[i] = sol.x[new_of_old[i]];
            }
        }
        for r in 0..n_rows {
            if let Some((slack, c)) = elim_var_of_row[r] {
                let (idx, val) = self.row(r);
                let mut dot = T::zero();
                for (&i, &v) in idx.iter().zip(val) {
                    if i != slack {
                        dot += v * x_full[i];
                    }
                }
                x_full[slack] = (self.rhs[r] - dot) / c;
            }
        }

        // Row multipliers in the original orientation.
        let mut w = vec![T::zero(); n_rows];
        for r in 0..n_rows {
            if eq_pos[r] != usize::MAX {
                w[r] = sol.z[eq_pos[r]];
            } else {
                w[r] = ineq_sign[r] * sol.z[ineq_pos[r]];
            }
        }
        let dual_eq: Vec<T> = match self.sense {
            Sense::Max => w,
            Sense::Min => w.iter().map(|&v| -v).collect(),
        };

        let primal_obj = self.obj_dot(&x_full);
        let dual_obj = self
            .rhs
            .iter()
            .zip(&dual_eq)
            .fold(T::zero(), |acc, (&r, &y)| acc + r * y);

        let mut primal_feas = T::zero();
        for r in 0..n_rows {
            let resid = (self.row_dot(r, &x_full) - self.rhs[r]).abs();
            primal_feas = primal_feas.max(resid);
        }
        let rel_gap = (primal_obj - dual_obj).abs() / (T::one() + primal_obj.abs());

        let mut primal_blocks = Vec::new();
        for (bi, &d) in self.cone.psd_block_orders.iter().enumerate() {
            let off = self.psd_offset(bi);
            primal_blocks.push(unsvec(&x_full[off..off + svec_dim(d)], d));
        }
        let nonneg = x_full[nn_off..].to_vec();

        let certificate = match status {
            Status::PrimalInfeasible => Some(sol.z.clone()),
            Status::DualInfeasible => Some(sol.x.clone()),
            _ => None,
        };

        Ok(ConicSolution {
            status,
            x: x_full,
            primal_blocks,
            nonneg,
            dual_eq,
            primal_obj,
            dual_obj,
            residuals: Residuals {
                primal_feas,
                dual_feas: T::r(solver.info.res_dual.to_f64().unwrap_or(f64::NAN)),
                rel_gap,
            },
            certificate,
            iterations: solver.info.iterations,
        })
    }
}

/// Unpack a scaled svec slice into a dense symmetric matrix.
pub fn unsvec<T: Scalar>(v: &[T], d: usize) -> RMatrix<T> {
    let mut m = RMatrix::zeros(d, d);
    let inv_sqrt2 = T::one() / T::r(2.0).sqrt();
    for j in 0..d {
        for i in 0..=j {
            let raw = v[svec_index(i, j)];
            if i == j {
                m.set(i, i, raw);
            } else {
                let val = raw * inv_sqrt2;
                m.set(i, j, val);
                m.set(j, i, val);
            }
        }
    }
    m
}

/// Report from re-deriving the dual certificate of a solved problem.
#[derive(Clone, Debug)]
pub struct DualCertReport<T> {
    pub ok: bool,
    /// Most negative eigenvalue over all dual slack blocks / orthant slots.
    pub worst_eigenvalue: T,
    pub gap: T,
    pub detail: String,
}

/// Recompute the dual slack from the equality multipliers and check cone
/// membership and the duality gap from scratch.
pub fn verify_dual_certificate<T: Scalar>(
    p: &ConicProblem<T>,
    s: &ConicSolution<T>,
) -> Result<DualCertReport<T>> {
    if s.status != Status::Optimal {
        return Err(Error::Audit("certificate check needs an OPTIMAL solution".into()));
    }
    // slack = R'y - obj for MAX, obj - R'y for MIN; must be in the dual cone.
    let dim = p.total_dim();
    let mut slack = vec![T::zero(); dim];
    for r in 0..p.n_rows() {
        let (idx, val) = p.row(r);
        let y = s.dual_eq[r];
        for (&i, &v) in idx.iter().zip(val) {
            slack[i] += v * y;
        }
    }
    let sign = match p.sense {
        Sense::Max => T::one(),
        Sense::Min => -T::one(),
    };
    for i in 0..dim {
        slack[i] = sign * (slack[i] - p.objective[i]);
    }

    let mut worst = T::infinity();
    for (bi, &d) in p.cone.psd_block_orders.iter().enumerate() {
        let off = p.psd_offset(bi);
        let m = unsvec(&slack[off..off + svec_dim(d)], d);
        let lam = crate::linalg::sym_min_eig(&m)?;
        worst = worst.min(lam);
    }
    for i in p.nonneg_offset()..dim {
        worst = worst.min(slack[i]);
    }
    let gap = (s.primal_obj - s.dual_obj).abs() / (T::one() + s.primal_obj.abs());
    let tol = T::r(1e-6);
    let ok = worst >= -tol && gap <= tol;
    let detail = if ok {
        "dual slack in cone, gap within tolerance".to_string()
    } else {
        format!("worst eigenvalue {worst}, relative gap {gap}")
    };
    Ok(DualCertReport {
        ok,
        worst_eigenvalue: worst,
        gap,
        detail,
    })
}

/// Helpers for lowering complex (Hermitian) models onto a real PSD block of
/// doubled order via the [[Re, Im], [-Im, Re]] embedding.
///
/// A Hermitian functional <A, X> becomes the svec row of embed(A)/2 over the
/// free symmetric variable Y; any PSD Y projects back to a feasible
/// Hermitian X with the same row values, so nothing else is needed to make
/// the embedding exact.
pub mod embed {
    use super::{svec_index, ConicProblem, Sense};
    use crate::linalg::{CMatrix, HermitianMatrix, RMatrix};
    use crate::{Complexd, Result};

    /// Append the svec coefficients of the functional term with upper-
    /// triangular Hermitian coefficient `v` at (i, j) of a complex block of
    /// order `n` living at variable offset `off`.
    ///
    /// For i == j the term contributes Re(v) * X_ii, for i < j it
    /// contributes 2 Re(conj(v) X_ij).
    pub fn push_entry(
        out: &mut Vec<(usize, f64)>,
        off: usize,
        n: usize,
        i: usize,
        j: usize,
        v: Complexd,
    ) {
        let s2 = std::f64::consts::SQRT_2;
        if i == j {
            out.push((off + svec_index(i, i), 0.5 * v.re));
            out.push((off + svec_index(n + i, n + i), 0.5 * v.re));
        } else {
            let (a, b) = (v.re, v.im);
            out.push((off + svec_index(i, j), s2 * 0.5 * a));
            out.push((off + svec_index(n + i, n + j), s2 * 0.5 * a));
            out.push((off + svec_index(i, n + j), s2 * 0.5 * b));
            out.push((off + svec_index(j, n + i), -s2 * 0.5 * b));
        }
    }

    /// Row for the full Hermitian functional <A, X>.
    pub fn functional_row(off: usize, a: &HermitianMatrix<f64>) -> Vec<(usize, f64)> {
        let n = a.order();
        let mut out = Vec::new();
        for i in 0..n {
            let d = a.get(i, i);
            if d.re != 0.0 {
                push_entry(&mut out, off, n, i, i, d);
            }
            for j in (i + 1)..n {
                let v = a.get(i, j);
                if v.re != 0.0 || v.im != 0.0 {
                    push_entry(&mut out, off, n, i, j, v);
                }
            }
        }
        out
    }

    /// Set the problem objective to <A, X> on the embedded block.
    pub fn set_objective(p: &mut ConicProblem<f64>, off: usize, a: &HermitianMatrix<f64>) {
        for (idx, v) in functional_row(off, a) {
            p.objective[idx] += v;
        }
    }

    /// Recover the Hermitian matrix from the solved embedded block by the
    /// PSD-preserving averaging map (A + D)/2 + i (B - B^T)/2.
    pub fn recover(y: &RMatrix<f64>, n: usize) -> Result<HermitianMatrix<f64>> {
        let m = CMatrix::from_fn(n, n, |i, j| {
            let re = 0.5 * (y.get(i, j) + y.get(n + i, n + j));
            let im = 0.5 * (y.get(i, n + j) - y.get(j, n + i));
            Complexd::new(re, im)
        });
        HermitianMatrix::new(m)
    }

    /// Convenience: fresh single-block problem for a complex model of order n.
    pub fn complex_problem(n: usize, nonneg: usize, sense: Sense) -> ConicProblem<f64> {
        ConicProblem::new(
            super::ConeSpec::new(vec![2 * n], nonneg).expect("cone"),
            sense,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svec_indexing() {
        assert_eq!(svec_dim(3), 6);
        assert_eq!(svec_index(0, 0), 0);
        assert_eq!(svec_index(0, 1), 1);
        assert_eq!(svec_index(1, 1), 2);
        assert_eq!(svec_index(0, 2), 3);
        assert_eq!(svec_index(2, 2), 5);
    }

    #[test]
    fn lp_only_instance() {
        // max x1 s.t. x1 + x2 = 1, x >= 0
        let mut p = ConicProblem::<f64>::new(ConeSpec::new(vec![], 2).unwrap(), Sense::Max);
        p.objective[0] = 1.0;
        p.add_row(&[(0, 1.0), (1, 1.0)], 1.0);
        let s = p.solve(&SolveOpts::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.primal_obj - 1.0).abs() < 1e-7);
        assert!((s.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sdp_unit_diagonal() {
        // max <I, X> s.t. diag(X) = 1, X psd of order 2 -> 2
        let mut p = ConicProblem::<f64>::new(ConeSpec::new(vec![2], 0).unwrap(), Sense::Max);
        p.objective[svec_index(0, 0)] = 1.0;
        p.objective[svec_index(1, 1)] = 1.0;
        p.add_row(&[(svec_index(0, 0), 1.0)], 1.0);
        p.add_row(&[(svec_index(1, 1), 1.0)], 1.0);
        let s = p.solve(&SolveOpts::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.primal_obj - 2.0).abs() < 1e-7);
        assert!((s.primal_obj - s.dual_obj).abs() <= 1e-8 * (1.0 + s.primal_obj.abs()) * 10.0);
        let rep = verify_dual_certificate(&p, &s).unwrap();
        assert!(rep.ok, "{}", rep.detail);
    }

    #[test]
    fn maxcut_triangle_sdp() {
        // max <Q, X> with Q = -(J - I) over the order-3 elliptope gives 3.
        let mut p = ConicProblem::<f64>::new(ConeSpec::new(vec![3], 0).unwrap(), Sense::Max);
        let s2 = std::f64::consts::SQRT_2;
        for i in 0..3 {
            for j in (i + 1)..3 {
                p.objective[svec_index(i, j)] = -s2;
            }
        }
        for i in 0..3 {
            p.add_row(&[(svec_index(i, i), 1.0)], 1.0);
        }
        let s = p.solve(&SolveOpts::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.primal_obj - 3.0).abs() < 1e-6, "obj {}", s.primal_obj);
        // Off-diagonals settle at -1/2.
        let x = &s.primal_blocks[0];
        assert!((x.get(0, 1) + 0.5).abs() < 1e-5);
    }

    #[test]
    fn slack_elimination_matches_plain() {
        // max x11 + x22 s.t. diag = 1, x12 <= 0.2 (via slack), order-2 psd.
        let build = |with_cap: f64| {
            let mut p =
                ConicProblem::<f64>::new(ConeSpec::new(vec![2], 1).unwrap(), Sense::Max);
            let s2 = std::f64::consts::SQRT_2;
            p.objective[svec_index(0, 1)] = s2; // maximize x12
            p.add_row(&[(svec_index(0, 0), 1.0)], 1.0);
            p.add_row(&[(svec_index(1, 1), 1.0)], 1.0);
            let slack = p.nonneg_offset();
            p.add_row(&[(svec_index(0, 1), s2), (slack, 1.0)], with_cap);
            p
        };
        let p = build(0.2);
        let s = p.solve(&SolveOpts::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.primal_obj - 0.2).abs() < 1e-6);
        // The slack is reconstructed and feasibility of the original rows holds.
        assert!(s.residuals.primal_feas < 1e-7);
        assert!(s.nonneg[0].abs() < 1e-6);
        let rep = verify_dual_certificate(&p, &s).unwrap();
        assert!(rep.ok, "{}", rep.detail);
    }

    #[test]
    fn primal_infeasible_detected() {
        // x >= 0 with x1 + x2 = -1 is infeasible.
        let mut p = ConicProblem::<f64>::new(ConeSpec::new(vec![], 2).unwrap(), Sense::Min);
        p.objective[0] = 1.0;
        // Both variables appear in two rows so neither is eliminable.
        p.add_row(&[(0, 1.0), (1, 1.0)], -1.0);
        p.add_row(&[(0, 1.0), (1, -1.0)], 0.0);
        let s = p.solve(&SolveOpts::default()).unwrap();
        assert_eq!(s.status, Status::PrimalInfeasible);
        assert!(s.certificate.is_some());
    }

    #[test]
    fn dual_infeasible_detected() {
        // max x over x >= 0 unconstrained above: dual infeasible (unbounded).
        let mut p = ConicProblem::<f64>::new(ConeSpec::new(vec![], 2).unwrap(), Sense::Max);
        p.objective[0] = 1.0;
        p.add_row(&[(1, 1.0)], 1.0);
        let s = p.solve(&SolveOpts::default()).unwrap();
        assert_eq!(s.status, Status::DualInfeasible);
    }

    #[test]
    fn scaling_by_ten_agrees() {
        let build = |scale: f64| {
            let mut p = ConicProblem::<f64>::new(ConeSpec::new(vec![2], 0).unwrap(), Sense::Max);
            let s2 = std::f64::consts::SQRT_2;
            p.objective[svec_index(0, 1)] = scale * s2;
            p.objective[svec_index(0, 0)] = -scale;
            for i in 0..2 {
                p.add_row(&[(svec_index(i, i), scale)], scale);
            }
            p
        };
        let a = build(1.0).solve(&SolveOpts::default()).unwrap();
        let b = build(10.0).solve(&SolveOpts::default()).unwrap();
        assert!((a.primal_obj - b.primal_obj / 10.0).abs() < 1e-7);
    }

    #[test]
    fn embedded_identity_objective() {
        use crate::linalg::HermitianMatrix;
        // max <I2, X> over the embedded complex elliptope of order 2 -> 2.
        let n = 2;
        let mut p = embed::complex_problem(n, 0, Sense::Max);
        embed::set_objective(&mut p, 0, &HermitianMatrix::identity(n));
        for i in 0..n {
            let mut row = Vec::new();
            embed::push_entry(&mut row, 0, n, i, i, crate::Complexd::new(1.0, 0.0));
            p.add_row(&row, 1.0);
        }
        let s = p.solve(&SolveOpts::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.primal_obj - 2.0).abs() < 1e-6);
        let x = embed::recover(&s.primal_blocks[0], n).unwrap();
        assert!((x.get(0, 0).re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn embedded_functional_trace_identity() {
        use crate::linalg::HermitianMatrix;
        use crate::Complexd;
        // <A, X> computed directly equals the embedded row applied to svec(embed(X)).
        let a = HermitianMatrix::from_upper(
            3,
            &[0.5, -1.0, 2.0],
            &[
                (0, 1, Complexd::new(0.3, -0.7)),
                (0, 2, Complexd::new(-1.1, 0.2)),
                (1, 2, Complexd::new(0.0, 1.5)),
            ],
        )
        .unwrap();
        let x = HermitianMatrix::from_upper(
            3,
            &[1.0, 1.0, 1.0],
            &[
                (0, 1, Complexd::new(-0.2, 0.4)),
                (0, 2, Complexd::new(0.6, 0.1)),
                (1, 2, Complexd::new(0.3, -0.3)),
            ],
        )
        .unwrap();
        let row = embed::functional_row(0, &a);
        let emb = x.real_embed();
        let s2 = std::f64::consts::SQRT_2;
        let mut sv = vec![0.0; svec_dim(6)];
        for j in 0..6 {
            for i in 0..=j {
                sv[svec_index(i, j)] = if i == j {
                    emb.get(i, i)
                } else {
                    s2 * emb.get(i, j)
                };
            }
        }
        let lhs: f64 = row.iter().map(|&(i, v)| v * sv[i]).sum();
        assert!((lhs - a.inner(&x)).abs() < 1e-12);
    }
}
