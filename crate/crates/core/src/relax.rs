//! Feasible-set builders for the elliptope relaxations of CUT(n,m).
//!
//! Five kinds are supported: the complex elliptope E(n,m), its triangle
//! strengthening T(E) for m in {3,4}, the diagonal-only elliptope E(n,inf),
//! and the real reformulations Re(E(n,3)) / Re(T(E(n,3))) available when the
//! objective is real. Complex kinds are lowered through the real embedding of
//! order 2n (see conic::embed); real kinds work directly at order n.

use crate::conic::{embed, ConeSpec, ConicProblem, ConicSolution, Sense, SolveOpts, Status};
use crate::conic::svec_index;
use crate::cuts;
use crate::linalg::HermitianMatrix;
use crate::scalar::Scalar;
use crate::{Complexd, Error, HermitianMatrixd, Result};

/// Polygon halfspace Re(conj(nu) x) <= rhs for the m-gon hull of the roots.
#[derive(Clone, Copy, Debug)]
pub struct Halfspace {
    pub nu: Complexd,
    pub rhs: f64,
}

/// Halfspaces nu_k = exp((2k-1) pi i / m), k = 1..m, rhs = cos(pi/m).
///
/// For m >= 3 their intersection is exactly the convex hull of the m-th
/// roots of unity. For m = 2 the two returned halfspaces only pin the
/// imaginary part to zero; model builders add the bounds |Re x| <= 1
/// separately so that the m = 2 set still comes out as [-1, 1].
pub fn polygon_halfspaces(m: usize) -> Result<Vec<Halfspace>> {
    if m < 2 {
        return Err(Error::Domain(format!("polygon needs m >= 2, got {m}")));
    }
    let rhs = (std::f64::consts::PI / m as f64).cos();
    Ok((1..=m)
        .map(|k| {
            let theta = (2 * k - 1) as f64 * std::f64::consts::PI / m as f64;
            Halfspace {
                nu: Complexd::new(theta.cos(), theta.sin()),
                rhs,
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelaxKind {
    Elliptope,
    TriangleStrengthened,
    RealElliptope3,
    RealTriangle3,
    ElliptopeInf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeasibleSetSpec {
    pub kind: RelaxKind,
    pub n: usize,
    /// None encodes m = infinity; required finite for all kinds except
    /// ElliptopeInf.
    pub m: Option<usize>,
}

impl FeasibleSetSpec {
    pub fn new(kind: RelaxKind, n: usize, m: Option<usize>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Model(format!("need n >= 2, got {n}")));
        }
        match kind {
            RelaxKind::ElliptopeInf => {}
            RelaxKind::TriangleStrengthened => match m {
                Some(3) | Some(4) => {}
                _ => {
                    return Err(Error::Model(
                        "triangle strengthening is defined for m in {3, 4}".into(),
                    ))
                }
            },
            RelaxKind::RealElliptope3 | RelaxKind::RealTriangle3 => {
                if m != Some(3) {
                    return Err(Error::Model("real reformulations require m = 3".into()));
                }
            }
            RelaxKind::Elliptope => match m {
                Some(m) if m >= 2 => {}
                _ => return Err(Error::Model("elliptope requires finite m >= 2".into())),
            },
        }
        Ok(FeasibleSetSpec { kind, n, m })
    }

    pub fn is_real(&self) -> bool {
        matches!(
            self.kind,
            RelaxKind::RealElliptope3 | RelaxKind::RealTriangle3
        )
    }
}

/// A built conic model together with the row bookkeeping needed to map dual
/// multipliers back to the diagonal / polygon structure.
pub struct RelaxationModel {
    pub spec: FeasibleSetSpec,
    pub problem: ConicProblem<f64>,
    pub constraint_count: usize,
    /// Row id of the X_ii = 1 constraint, per i.
    pub diag_rows: Vec<usize>,
    /// (i, j, k) -> row id of the k-th polygon halfspace on entry (i, j).
    pub polygon_rows: Vec<((usize, usize, usize), usize)>,
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            v.push((i, j));
        }
    }
    v
}

fn triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                v.push((i, j, k));
            }
        }
    }
    v
}

/// Triangle rows added per 3-subset: for m=3 the 18 non-polygon facets of
/// CUT(3,3), for m=4 the 16 rotations of the 3-clique cut.
fn triangle_cuts_for(m: usize) -> Result<Vec<cuts::CutDescriptor>> {
    match m {
        3 => Ok(cuts::facet_catalog_cut33()
            .into_iter()
            .filter(|c| c.family == cuts::CutFamily::TriangleFacet)
            .collect()),
        4 => cuts::roc_orbit(&cuts::clique_cut(3, 4)?, 4),
        _ => Err(Error::Model("triangle strengthening needs m in {3, 4}".into())),
    }
}

pub fn build_model(c: &HermitianMatrixd, spec: &FeasibleSetSpec) -> Result<RelaxationModel> {
    let n = spec.n;
    if c.order() != n {
        return Err(Error::Dimension(format!(
            "objective order {} vs spec n {}",
            c.order(),
            n
        )));
    }
    if spec.is_real() {
        let max_im = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .map(|(i, j)| c.get(i, j).im.abs())
            .fold(0.0, f64::max);
        if max_im > 1e-12 {
            return Err(Error::Model(
                "real reformulations need a real objective".into(),
            ));
        }
        build_real_model(c, spec)
    } else {
        build_complex_model(c, spec)
    }
}

fn build_complex_model(c: &HermitianMatrixd, spec: &FeasibleSetSpec) -> Result<RelaxationModel> {
    let n = spec.n;
    let prs = pairs(n);

    // Inequality rows, assembled first so the slack count is known up front.
    // Each entry: (complex coefficient per pair position, rhs).
    struct Ineq {
        terms: Vec<(usize, usize, Complexd)>,
        rhs: f64,
        polygon: Option<(usize, usize, usize)>,
    }
    let mut ineqs: Vec<Ineq> = Vec::new();

    match spec.kind {
        RelaxKind::ElliptopeInf => {}
        RelaxKind::Elliptope | RelaxKind::TriangleStrengthened => {
            let m = spec.m.expect("validated finite");
            let hs = polygon_halfspaces(m)?;
            for &(i, j) in &prs {
                for (k, h) in hs.iter().enumerate() {
                    // Re(conj(nu) X_ij) <= rhs as a Hermitian functional with
                    // upper coefficient nu/2.
                    ineqs.push(Ineq {
                        terms: vec![(i, j, h.nu * 0.5)],
                        rhs: h.rhs,
                        polygon: Some((i, j, k)),
                    });
                }
                if m == 2 {
                    // The two m=2 halfspaces only force Im X_ij = 0; bound the
                    // real part explicitly.
                    for sign in [1.0, -1.0] {
                        ineqs.push(Ineq {
                            terms: vec![(i, j, Complexd::new(0.5 * sign, 0.0))],
                            rhs: 1.0,
                            polygon: None,
                        });
                    }
                }
            }
            if spec.kind == RelaxKind::TriangleStrengthened {
                let cuts33 = triangle_cuts_for(m)?;
                for &(i, j, k) in &triples(n) {
                    let pos = [(i, j), (i, k), (j, k)];
                    for cut in &cuts33 {
                        let mut terms = Vec::with_capacity(3);
                        for (t, &(a, b)) in pos.iter().enumerate() {
                            let entries = [(0, 1), (0, 2), (1, 2)];
                            let q = cut.q.get(entries[t].0, entries[t].1);
                            if q.norm() > 0.0 {
                                terms.push((a, b, q));
                            }
                        }
                        ineqs.push(Ineq {
                            terms,
                            rhs: cut.rhs,
                            polygon: None,
                        });
                    }
                }
            }
        }
        _ => unreachable!("real kinds handled elsewhere"),
    }

    let mut problem = ConicProblem::new(ConeSpec::new(vec![2 * n], ineqs.len())?, Sense::Max);
    embed::set_objective(&mut problem, 0, c);

    let mut diag_rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::new();
        embed::push_entry(&mut row, 0, n, i, i, Complexd::new(1.0, 0.0));
        diag_rows.push(problem.add_row(&row, 1.0));
    }
    let mut polygon_rows = Vec::new();
    let nn_off = problem.nonneg_offset();
    for (s, ineq) in ineqs.iter().enumerate() {
        let mut row = Vec::new();
        for &(i, j, v) in &ineq.terms {
            embed::push_entry(&mut row, 0, n, i, j, v);
        }
        row.push((nn_off + s, 1.0));
        let r = problem.add_row(&row, ineq.rhs);
        if let Some(key) = ineq.polygon {
            polygon_rows.push((key, r));
        }
    }

    let constraint_count = problem.n_rows();
    Ok(RelaxationModel {
        spec: *spec,
        problem,
        constraint_count,
        diag_rows,
        polygon_rows,
    })
}

fn build_real_model(c: &HermitianMatrixd, spec: &FeasibleSetSpec) -> Result<RelaxationModel> {
    let n = spec.n;
    let prs = pairs(n);
    let inv_s2 = 1.0 / std::f64::consts::SQRT_2;

    // Rows: per pair the bound X_ij >= -1/2; for the triangle kind, per
    // 3-subset the six facets of Re(V(CUT(3,3))).
    struct Ineq {
        terms: Vec<(usize, f64)>,
        rhs: f64,
        polygon: Option<(usize, usize, usize)>,
    }
    let mut ineqs: Vec<Ineq> = Vec::new();
    for (pk, &(i, j)) in prs.iter().enumerate() {
        let _ = pk;
        ineqs.push(Ineq {
            terms: vec![(svec_index(i, j), -inv_s2)],
            rhs: 0.5,
            polygon: Some((i, j, 0)),
        });
    }
    if spec.kind == RelaxKind::RealTriangle3 {
        for &(i, j, k) in &triples(n) {
            let pos = [svec_index(i, j), svec_index(i, k), svec_index(j, k)];
            for signs in [[1.0, 1.0, -1.0], [1.0, -1.0, 1.0], [-1.0, 1.0, 1.0]] {
                ineqs.push(Ineq {
                    terms: pos
                        .iter()
                        .zip(signs)
                        .map(|(&v, s)| (v, s * inv_s2))
                        .collect(),
                    rhs: 1.0,
                    polygon: None,
                });
            }
            for &p in &pos {
                ineqs.push(Ineq {
                    terms: vec![(p, -inv_s2)],
                    rhs: 0.5,
                    polygon: None,
                });
            }
        }
    }

    let mut problem = ConicProblem::new(ConeSpec::new(vec![n], ineqs.len())?, Sense::Max);
    let s2 = std::f64::consts::SQRT_2;
    for i in 0..n {
        problem.objective[svec_index(i, i)] = c.get(i, i).re;
        for j in (i + 1)..n {
            problem.objective[svec_index(i, j)] = s2 * c.get(i, j).re;
        }
    }

    let mut diag_rows = Vec::with_capacity(n);
    for i in 0..n {
        diag_rows.push(problem.add_row(&[(svec_index(i, i), 1.0)], 1.0));
    }
    let mut polygon_rows = Vec::new();
    let nn_off = problem.nonneg_offset();
    for (s, ineq) in ineqs.iter().enumerate() {
        let mut row = ineq.terms.clone();
        row.push((nn_off + s, 1.0));
        let r = problem.add_row(&row, ineq.rhs);
        if let Some(key) = ineq.polygon {
            polygon_rows.push((key, r));
        }
    }

    let constraint_count = problem.n_rows();
    Ok(RelaxationModel {
        spec: *spec,
        problem,
        constraint_count,
        diag_rows,
        polygon_rows,
    })
}

impl RelaxationModel {
    /// Solve and recover the Hermitian optimizer.
    pub fn solve(&self, opts: &SolveOpts) -> Result<(f64, HermitianMatrixd, ConicSolution<f64>)> {
        let sol = self.problem.solve(opts)?;
        if sol.status != Status::Optimal {
            return Err(Error::Solver(format!(
                "relaxation solve ended with status {:?}",
                sol.status
            )));
        }
        let x = self.recover(&sol)?;
        Ok((sol.primal_obj, x, sol))
    }

    pub fn recover(&self, sol: &ConicSolution<f64>) -> Result<HermitianMatrixd> {
        let n = self.spec.n;
        if self.spec.is_real() {
            let y = &sol.primal_blocks[0];
            let m = crate::linalg::CMatrix::from_fn(n, n, |i, j| {
                Complexd::new(0.5 * (y.get(i, j) + y.get(j, i)), 0.0)
            });
            HermitianMatrix::new(m)
        } else {
            embed::recover(&sol.primal_blocks[0], n)
        }
    }

    /// For elliptope-kind models: rebuild the dual objective from its parts,
    /// sum(mu) + cos(pi/m) * sum(omega), where mu are the multipliers of the
    /// diagonal rows and omega those of the polygon rows. Returns the
    /// recomposed value; for a pure elliptope model it must match
    /// sol.dual_obj to solver accuracy.
    pub fn elliptope_dual_objective(&self, sol: &ConicSolution<f64>) -> Result<f64> {
        let m = self
            .spec
            .m
            .ok_or_else(|| Error::Model("dual recomposition needs finite m".into()))?;
        let mut total = 0.0;
        for &r in &self.diag_rows {
            total += sol.dual_eq[r];
        }
        let coeff = (std::f64::consts::PI / m as f64).cos();
        for &(_, r) in &self.polygon_rows {
            let omega = sol.dual_eq[r];
            if omega < -1e-7 {
                return Err(Error::Audit(format!(
                    "polygon multiplier {omega} is negative"
                )));
            }
            total += coeff * omega;
        }
        Ok(total)
    }
}

/// Build and solve in one call.
pub fn solve_relaxation(
    c: &HermitianMatrixd,
    spec: &FeasibleSetSpec,
    opts: &SolveOpts,
) -> Result<(f64, HermitianMatrixd, ConicSolution<f64>)> {
    build_model(c, spec)?.solve(opts)
}

/// Real reformulation of an m=3 complex kind for a real objective: same
/// optimum at half the embedded order.
pub fn real_reformulate(c: &HermitianMatrixd, spec: &FeasibleSetSpec) -> Result<RelaxationModel> {
    let kind = match spec.kind {
        RelaxKind::Elliptope => RelaxKind::RealElliptope3,
        RelaxKind::TriangleStrengthened => RelaxKind::RealTriangle3,
        k => k,
    };
    if spec.m != Some(3) {
        return Err(Error::Model("real reformulation requires m = 3".into()));
    }
    build_model(c, &FeasibleSetSpec::new(kind, spec.n, Some(3))?)
}

/// Scalar-generic polygon check used by audits: largest violation of the
/// polygon system over all off-diagonal entries.
pub fn polygon_violation<T: Scalar>(x: &HermitianMatrix<T>, m: usize) -> Result<T> {
    let hs = polygon_halfspaces(m)?;
    let n = x.order();
    let mut worst = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let e = x.get(i, j);
            for h in &hs {
                let lhs = T::r(h.nu.re) * e.re + T::r(h.nu.im) * e.im;
                worst = worst.max(lhs - T::r(h.rhs));
            }
            if m == 2 {
                worst = worst.max(e.re.abs() - T::one());
            }
        }
    }
    Ok(worst)
}

pub use crate::conic::unsvec as unsvec_block;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::SolveOpts;
    use crate::linalg::HermitianMatrix;

    fn q3() -> HermitianMatrixd {
        // I - J: zero diagonal, -1 off-diagonal.
        let mut m = crate::linalg::CMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    m.set(i, j, Complexd::new(-1.0, 0.0));
                }
            }
        }
        HermitianMatrix::new(m).unwrap()
    }

    #[test]
    fn polygon_halfspace_values() {
        let hs = polygon_halfspaces(3).unwrap();
        assert_eq!(hs.len(), 3);
        for h in &hs {
            assert!((h.rhs - 0.5).abs() < 1e-15);
            assert!((h.nu.norm() - 1.0).abs() < 1e-15);
        }
        // x = 1 is tight on the two non-real facets and slack on nu = -1.
        let tight = hs
            .iter()
            .filter(|h| ((h.nu.conj() * Complexd::new(1.0, 0.0)).re - h.rhs).abs() < 1e-12)
            .count();
        assert_eq!(tight, 2);

        let hs4 = polygon_halfspaces(4).unwrap();
        assert!((hs4[0].rhs - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        // m=6: 0 has slack cos(pi/6) on all facets, 1.01 violates two.
        let hs6 = polygon_halfspaces(6).unwrap();
        let z = Complexd::new(1.01, 0.0);
        let violated = hs6
            .iter()
            .filter(|h| (h.nu.conj() * z).re > h.rhs + 1e-12)
            .count();
        assert_eq!(violated, 2);
        for h in &hs6 {
            assert!(h.rhs > 0.86);
        }
    }

    #[test]
    fn constraint_counts_match_closed_forms() {
        let c = HermitianMatrix::<f64>::zeros(100);
        let spec = FeasibleSetSpec::new(RelaxKind::Elliptope, 100, Some(3)).unwrap();
        assert_eq!(build_model(&c, &spec).unwrap().constraint_count, 14950);
        let spec = FeasibleSetSpec::new(RelaxKind::TriangleStrengthened, 100, Some(3)).unwrap();
        assert_eq!(build_model(&c, &spec).unwrap().constraint_count, 2_925_550);
        let spec = FeasibleSetSpec::new(RelaxKind::TriangleStrengthened, 100, Some(4)).unwrap();
        assert_eq!(build_model(&c, &spec).unwrap().constraint_count, 2_607_100);
        let spec = FeasibleSetSpec::new(RelaxKind::ElliptopeInf, 100, None).unwrap();
        assert_eq!(build_model(&c, &spec).unwrap().constraint_count, 100);
        let c15 = HermitianMatrix::<f64>::zeros(15);
        let spec = FeasibleSetSpec::new(RelaxKind::RealElliptope3, 15, Some(3)).unwrap();
        assert_eq!(build_model(&c15, &spec).unwrap().constraint_count, 15 + 105);
        let spec = FeasibleSetSpec::new(RelaxKind::RealTriangle3, 15, Some(3)).unwrap();
        assert_eq!(
            build_model(&c15, &spec).unwrap().constraint_count,
            15 + 105 + 6 * 455
        );
    }

    #[test]
    fn clique_over_elliptope_is_n() {
        let spec = FeasibleSetSpec::new(RelaxKind::Elliptope, 3, Some(3)).unwrap();
        let (v, x, sol) = solve_relaxation(&q3(), &spec, &SolveOpts::default()).unwrap();
        assert!((v - 3.0).abs() < 1e-6, "value {v}");
        for i in 0..3 {
            assert!((x.get(i, i).re - 1.0).abs() < 1e-7);
        }
        assert!(polygon_violation(&x, 3).unwrap() < 1e-7);
        // Dual recomposition agrees for the pure elliptope model.
        let model = build_model(&q3(), &spec).unwrap();
        let sol2 = model.problem.solve(&SolveOpts::default()).unwrap();
        let recomposed = model.elliptope_dual_objective(&sol2).unwrap();
        assert!((recomposed - sol2.dual_obj).abs() < 1e-6);
        drop(sol);
    }

    #[test]
    fn real_reformulation_matches_complex() {
        let spec = FeasibleSetSpec::new(RelaxKind::Elliptope, 3, Some(3)).unwrap();
        let (vc, _, _) = solve_relaxation(&q3(), &spec, &SolveOpts::default()).unwrap();
        let model = real_reformulate(&q3(), &spec).unwrap();
        let (vr, x, _) = model.solve(&SolveOpts::default()).unwrap();
        assert!((vc - vr).abs() < 1e-6, "complex {vc} vs real {vr}");
        // Entries respect X_ij >= -1/2.
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert!(x.get(i, j).re >= -0.5 - 1e-7);
            }
        }
    }

    #[test]
    fn triangle_no_stronger_than_needed_for_clique() {
        // For Q3 at m=3 the clique objective is already tight at 3 on CUT, so
        // the strengthened optimum stays sandwiched in [3 - eps, elliptope].
        let e = FeasibleSetSpec::new(RelaxKind::Elliptope, 3, Some(3)).unwrap();
        let t = FeasibleSetSpec::new(RelaxKind::TriangleStrengthened, 3, Some(3)).unwrap();
        let (ve, _, _) = solve_relaxation(&q3(), &e, &SolveOpts::default()).unwrap();
        let (vt, _, _) = solve_relaxation(&q3(), &t, &SolveOpts::default()).unwrap();
        assert!(vt <= ve + 1e-7);
        assert!(vt >= 3.0 - 1e-6);
    }

    #[test]
    fn m2_elliptope_bounds_real_part() {
        // Objective Re X_12 over E(2,2) must cap at 1, not run away.
        let c = HermitianMatrix::from_upper(2, &[0.0, 0.0], &[(0, 1, Complexd::new(0.5, 0.0))])
            .unwrap();
        let spec = FeasibleSetSpec::new(RelaxKind::Elliptope, 2, Some(2)).unwrap();
        let (v, x, _) = solve_relaxation(&c, &spec, &SolveOpts::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-6);
        assert!(x.get(0, 1).im.abs() < 1e-6);
    }

    #[test]
    fn spec_validation() {
        assert!(FeasibleSetSpec::new(RelaxKind::TriangleStrengthened, 5, Some(5)).is_err());
        assert!(FeasibleSetSpec::new(RelaxKind::RealElliptope3, 5, Some(4)).is_err());
        assert!(FeasibleSetSpec::new(RelaxKind::Elliptope, 5, None).is_err());
        // Complex objective rejected by real kinds.
        let c = HermitianMatrix::from_upper(2, &[0.0, 0.0], &[(0, 1, Complexd::new(0.0, 1.0))])
            .unwrap();
        let spec = FeasibleSetSpec::new(RelaxKind::RealElliptope3, 2, Some(3)).unwrap();
        assert!(build_model(&c, &spec).is_err());
    }
}
