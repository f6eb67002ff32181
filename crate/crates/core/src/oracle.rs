//! Exact ground truth at desk scale: enumeration of the cut polytope
//! vertices, brute-force maximization over B(n,m), LP membership in the
//! vertex hull, and the facet audit.
//!
//! All enumeration fixes x_1 = 1; xx* is invariant under a global phase so
//! the m^(n-1) representatives cover every vertex exactly once.

use crate::cuts::CutDescriptor;
use crate::conic::{ConeSpec, ConicProblem, Sense, SolveOpts, Status};
use crate::linalg::{real_rank, roots_of_unity, HermitianMatrix, PhaseVector, RMatrix};
use crate::{Complexd, Error, HermitianMatrixd, PhaseVectord, Result};

const ENUM_BUDGET: usize = 10_000_000;

fn pow_checked(m: usize, e: u32) -> Result<usize> {
    m.checked_pow(e)
        .filter(|&c| c <= ENUM_BUDGET)
        .ok_or_else(|| {
            Error::Budget(format!(
                "enumeration size {m}^{e} exceeds the {ENUM_BUDGET} budget"
            ))
        })
}

/// Representative phase vector for index t in [0, m^(n-1)), first entry 1.
fn decode(t: usize, n: usize, m: usize, roots: &[Complexd]) -> Vec<Complexd> {
    let mut x = Vec::with_capacity(n);
    x.push(Complexd::new(1.0, 0.0));
    let mut rest = t;
    for _ in 1..n {
        // roots[m-1] = 1, roots[k-1] = exp(2 pi i k / m)
        let digit = rest % m;
        rest /= m;
        x.push(if digit == 0 {
            Complexd::new(1.0, 0.0)
        } else {
            roots[digit - 1]
        });
    }
    x
}

#[derive(Clone, Debug)]
pub struct VertexList {
    pub n: usize,
    pub m: usize,
    pub vertices: Vec<HermitianMatrixd>,
    pub representatives: Vec<PhaseVectord>,
}

pub fn enumerate_vertices(n: usize, m: usize) -> Result<VertexList> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {n}")));
    }
    let count = pow_checked(m, (n - 1) as u32)?;
    let roots = roots_of_unity::<f64>(m)?.roots;
    let mut vertices = Vec::with_capacity(count);
    let mut representatives = Vec::with_capacity(count);
    for t in 0..count {
        let x = decode(t, n, m, &roots);
        vertices.push(HermitianMatrix::outer(&x));
        representatives.push(PhaseVector::new(x)?);
    }
    Ok(VertexList {
        n,
        m,
        vertices,
        representatives,
    })
}

fn quad_form(q: &HermitianMatrixd, x: &[Complexd]) -> f64 {
    let n = x.len();
    let mut acc = Complexd::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += x[i].conj() * q.get(i, j) * x[j];
        }
    }
    acc.re
}

/// Exact maximum of x*Qx over B(n,m), with an argmax representative.
pub fn brute_max(q: &HermitianMatrixd, m: usize) -> Result<(f64, PhaseVectord)> {
    let n = q.order();
    let count = pow_checked(m, (n - 1) as u32)?;
    let roots = roots_of_unity::<f64>(m)?.roots;
    let mut best = f64::NEG_INFINITY;
    let mut best_x = Vec::new();
    for t in 0..count {
        let x = decode(t, n, m, &roots);
        let v = quad_form(q, &x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    Ok((best, PhaseVector::new(best_x)?))
}

/// Exact minimum of x*Qx over B(n,m).
pub fn brute_min(q: &HermitianMatrixd, m: usize) -> Result<(f64, PhaseVectord)> {
    let (v, x) = brute_max(&q.scale(-1.0), m)?;
    Ok((-v, x))
}

/// LP membership of X in CUT(n,m) = conv of the enumerated vertices.
/// Returns the hull weights when inside; None when the LP is infeasible.
pub fn cut_membership(x: &HermitianMatrixd, m: usize) -> Result<(bool, Option<Vec<f64>>)> {
    let n = x.order();
    for i in 0..n {
        if (x.get(i, i).re - 1.0).abs() > 1e-8 {
            return Err(Error::Domain(format!(
                "membership needs unit diagonal, X_{i}{i} = {}",
                x.get(i, i).re
            )));
        }
    }
    let verts = enumerate_vertices(n, m)?;
    let k = verts.vertices.len();
    let mut p = ConicProblem::<f64>::new(ConeSpec::new(vec![], k)?, Sense::Min);
    let ones: Vec<(usize, f64)> = (0..k).map(|t| (t, 1.0)).collect();
    p.add_row(&ones, 1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            for part in 0..2 {
                let mut row = Vec::with_capacity(k);
                for (t, v) in verts.vertices.iter().enumerate() {
                    let e = v.get(i, j);
                    let c = if part == 0 { e.re } else { e.im };
                    if c != 0.0 {
                        row.push((t, c));
                    }
                }
                let e = x.get(i, j);
                p.add_row(&row, if part == 0 { e.re } else { e.im });
            }
        }
    }
    let sol = p.solve(&SolveOpts::default())?;
    match sol.status {
        Status::Optimal => Ok((true, Some(sol.x))),
        Status::PrimalInfeasible => Ok((false, None)),
        s => Err(Error::Solver(format!("membership LP ended with {s:?}"))),
    }
}

#[derive(Clone, Debug)]
pub struct FacetAuditReport {
    pub name: String,
    pub valid: bool,
    pub tight_vertex_count: usize,
    pub affinely_independent: bool,
    pub max_violation: f64,
}

/// Audit a cut against the full vertex set: validity, tight-vertex count,
/// and affine independence of the tight set in the real coordinates of the
/// off-diagonal entries.
pub fn verify_facet(cut: &CutDescriptor, n: usize, m: usize) -> Result<FacetAuditReport> {
    if cut.q.order() != n {
        return Err(Error::Dimension(format!(
            "cut order {} vs n {}",
            cut.q.order(),
            n
        )));
    }
    let verts = enumerate_vertices(n, m)?;
    let mut max_violation = f64::NEG_INFINITY;
    let mut tight = Vec::new();
    for v in &verts.vertices {
        let val = cut.q.inner(v);
        max_violation = max_violation.max(val - cut.rhs);
        if (val - cut.rhs).abs() <= 1e-9 {
            tight.push(v);
        }
    }
    let valid = max_violation <= 1e-9;
    let dim = n * (n - 1); // 2 reals per off-diagonal entry
    let affinely_independent = if tight.is_empty() {
        false
    } else {
        let mut a = RMatrix::zeros(tight.len(), dim + 1);
        for (r, v) in tight.iter().enumerate() {
            let mut c = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let e = v.get(i, j);
                    a.set(r, c, e.re);
                    a.set(r, c + 1, e.im);
                    c += 2;
                }
            }
            a.set(r, dim, 1.0);
        }
        real_rank(&a, 1e-9)? == tight.len()
    };
    Ok(FacetAuditReport {
        name: cut.name.clone(),
        valid,
        tight_vertex_count: tight.len(),
        affinely_independent,
        max_violation,
    })
}

/// MAX-3-CUT objective: returns (C, offset) with cut value = x*Cx + offset
/// for any 3-coloring encoded as x over the third roots of unity.
pub fn max3cut_objective(
    n: usize,
    edges: &[(usize, usize, f64)],
) -> Result<(HermitianMatrixd, f64)> {
    let mut c = crate::linalg::CMatrix::zeros(n, n);
    let mut total_weight = 0.0;
    for &(i, j, w) in edges {
        if i >= n || j >= n || i == j {
            return Err(Error::Domain(format!("bad edge ({i}, {j}) for n = {n}")));
        }
        let cur = c.get(i, j);
        c.set(i, j, cur + Complexd::new(-w / 3.0, 0.0));
        let cur = c.get(j, i);
        c.set(j, i, cur + Complexd::new(-w / 3.0, 0.0));
        total_weight += w;
    }
    Ok((HermitianMatrix::new(c)?, 2.0 * total_weight / 3.0))
}
