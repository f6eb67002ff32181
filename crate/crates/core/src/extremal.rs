//! Extreme points of the elliptopes beyond rank one.
//!
//! Rank-2 extreme points of E(4,inf) are exactly the products G*G of
//! extremal Gram factors: 2x4 unit-column matrices whose associated 4x4 F
//! matrix is nonsingular. For E(3,m) with finite m the rank-2 extreme points
//! are characterized by a boundary condition (some off-diagonal entry on a
//! polygon edge, none a root) together with the unsolvability of a small
//! real-linear perturbation system in the unknowns (Re alpha, Im alpha, c).

use crate::linalg::{CMatrix, HermitianMatrix, PhaseVector};
use crate::relax::{polygon_halfspaces, polygon_violation};
use crate::{CMatrixd, Complexd, Error, HermitianMatrixd, Result};

#[derive(Clone, Debug)]
pub struct GramFactor {
    /// 2 x k with unit-norm columns.
    pub g: CMatrixd,
    /// First column rotated to (1, 0).
    pub canonical: bool,
}

impl GramFactor {
    pub fn new(g: CMatrixd) -> Result<Self> {
        if g.n_rows() != 2 {
            return Err(Error::Dimension("Gram factor must have 2 rows".into()));
        }
        for c in 0..g.n_cols() {
            let norm: f64 = (0..2).map(|r| g.get(r, c).norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::Domain(format!(
                    "column {c} has norm {} instead of 1",
                    norm.sqrt()
                )));
            }
        }
        let canonical = (g.get(0, 0) - Complexd::new(1.0, 0.0)).norm() < 1e-10
            && g.get(1, 0).norm() < 1e-10;
        Ok(GramFactor { g, canonical })
    }

    pub fn product(&self) -> Result<HermitianMatrixd> {
        HermitianMatrix::new(self.g.dagger().matmul(&self.g))
    }
}

/// Factor a rank-2 correlation matrix as G*G and rotate the first column of
/// G to (1, 0) by the unitary [[conj z1, conj z2], [-z2, z1]].
pub fn canonical_gram(a: &HermitianMatrixd) -> Result<GramFactor> {
    let k = a.order();
    for i in 0..k {
        if (a.get(i, i).re - 1.0).abs() > 1e-8 {
            return Err(Error::Domain("matrix must have unit diagonal".into()));
        }
    }
    if a.numeric_rank(1e-8) != 2 {
        return Err(Error::Domain(format!(
            "expected rank 2, got {}",
            a.numeric_rank(1e-8)
        )));
    }
    let (vals, vecs) = a.eigh()?;
    let mut g = CMatrix::zeros(2, k);
    for r in 0..2 {
        let s = vals[r].max(0.0).sqrt();
        for c in 0..k {
            g.set(r, c, vecs.get(c, r).conj() * s);
        }
    }
    let (z1, z2) = (g.get(0, 0), g.get(1, 0));
    let q = CMatrix::from_fn(2, 2, |r, c| match (r, c) {
        (0, 0) => z1.conj(),
        (0, 1) => z2.conj(),
        (1, 0) => -z2,
        _ => z1,
    });
    let g = q.matmul(&g);
    let gf = GramFactor::new(g)?;
    let res = gf.product()?.sub(a).frob_norm();
    if res > 1e-8 {
        return Err(Error::NonConvergence { residual: res });
    }
    Ok(gf)
}

fn det4(m: &CMatrixd) -> Complexd {
    let n = m.n_rows();
    debug_assert_eq!(n, m.n_cols());
    let mut a: Vec<Vec<Complexd>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect();
    let mut det = Complexd::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .expect("nonempty");
        if a[piv][col].norm() == 0.0 {
            return Complexd::new(0.0, 0.0);
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for i in (col + 1)..n {
            let f = a[i][col] / a[col][col];
            for j in col..n {
                let v = a[col][j];
                a[i][j] -= f * v;
            }
        }
    }
    det
}

/// Extremal-Gram-factor test: the 4x4 matrix F with row
/// (|g1|^2, g1 conj(g2), conj(g1) g2, |g2|^2) per column must be
/// nonsingular.
pub fn is_egf(gf: &GramFactor) -> Result<(bool, Complexd)> {
    let g = &gf.g;
    if g.n_cols() != 4 {
        return Err(Error::Dimension("EGF test needs a 2x4 factor".into()));
    }
    let f = CMatrix::from_fn(4, 4, |r, c| {
        let (g1, g2) = (g.get(0, r), g.get(1, r));
        match c {
            0 => Complexd::new(g1.norm_sqr(), 0.0),
            1 => g1 * g2.conj(),
            2 => g1.conj() * g2,
            _ => Complexd::new(g2.norm_sqr(), 0.0),
        }
    });
    let d = det4(&f);
    Ok((d.norm() > 1e-9, d))
}

/// Draw a random rank-2 extreme point of E(4,inf) as an EGF product;
/// degenerate draws are rejected and resampled.
pub fn random_rank2_extreme_e4inf<R: rand::Rng>(rng: &mut R) -> Result<HermitianMatrixd> {
    use rand_distr::StandardNormal;
    for _ in 0..100 {
        let mut g = CMatrix::zeros(2, 4);
        g.set(0, 0, Complexd::new(1.0, 0.0));
        for c in 1..4 {
            let mut col = [Complexd::new(0.0, 0.0); 2];
            let mut norm = 0.0;
            for v in col.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *v = Complexd::new(re, im);
                norm += v.norm_sqr();
            }
            let norm = norm.sqrt();
            if norm < 1e-12 {
                continue;
            }
            for (r, v) in col.iter().enumerate() {
                g.set(r, c, v / norm);
            }
        }
        let gf = GramFactor::new(g)?;
        if is_egf(&gf)?.0 {
            return gf.product();
        }
    }
    Err(Error::Budget(
        "no extremal Gram factor in 100 draws".into(),
    ))
}

/// The explicit rank-2 extreme point of E(3,m): N = G*G for
/// G = [[1, (1 + e^{2 pi i/m})/2, sin(pi/m)], [0, sin(pi/m), (1 + e^{2 pi i/m})/2]].
pub fn e3m_rank2_extreme(m: usize) -> Result<HermitianMatrixd> {
    if m < 3 {
        return Err(Error::Domain(format!("need m >= 3, got {m}")));
    }
    let theta = 2.0 * std::f64::consts::PI / m as f64;
    let w = (Complexd::new(1.0, 0.0) + Complexd::from_polar(1.0, theta)) * 0.5;
    let s = Complexd::new((std::f64::consts::PI / m as f64).sin(), 0.0);
    let g = CMatrix::from_fn(2, 3, |r, c| match (r, c) {
        (0, 0) => Complexd::new(1.0, 0.0),
        (0, 1) => w,
        (0, 2) => s,
        (1, 1) => s,
        (1, 2) => w,
        _ => Complexd::new(0.0, 0.0),
    });
    GramFactor::new(g)?.product()
}

#[derive(Clone, Debug)]
pub struct ExtremeDiagnostics {
    /// Boundary entries: (i, j, facet index) with Re(conj(nu_k) N_ij) tight.
    pub boundary: Vec<(usize, usize, usize)>,
    /// Some off-diagonal entry coincides with a root of unity.
    pub root_entry: bool,
    /// Real null-space dimension of the perturbation system (0 when not
    /// reached by the shortcut cases).
    pub null_dim: usize,
    /// A feasible nonzero perturbation direction when one exists.
    pub perturbation: Option<HermitianMatrixd>,
}

/// Rank-2 extremality test for E(3,m): boundary classification of the
/// off-diagonal entries followed by the real-linear perturbation system in
/// (Re alpha, Im alpha, c).
pub fn is_extreme_rank2_e3m(
    n: &HermitianMatrixd,
    m: usize,
) -> Result<(bool, ExtremeDiagnostics)> {
    if n.order() != 3 {
        return Err(Error::Dimension("test applies to order-3 matrices".into()));
    }
    if m < 3 {
        return Err(Error::Domain(format!("need m >= 3, got {m}")));
    }
    for i in 0..3 {
        if (n.get(i, i).re - 1.0).abs() > 1e-8 {
            return Err(Error::Domain("matrix must have unit diagonal".into()));
        }
    }
    let eigs = n.eigvals()?;
    let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig < -1e-8 {
        return Err(Error::NotPsd { lambda_min: min_eig });
    }
    if polygon_violation(n, m)? > 1e-8 {
        return Err(Error::Domain("entries leave the polygon hull".into()));
    }
    if n.numeric_rank(1e-8) != 2 {
        return Err(Error::Domain(format!(
            "expected rank 2, got {}",
            n.numeric_rank(1e-8)
        )));
    }

    // Strict trichotomy per entry: root, edge interior, or hull interior.
    let roots = crate::linalg::roots_of_unity::<f64>(m)?;
    let hs = polygon_halfspaces(m)?;
    let mut diag = ExtremeDiagnostics {
        boundary: Vec::new(),
        root_entry: false,
        null_dim: 0,
        perturbation: None,
    };
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let z = n.get(i, j);
        if roots.roots.iter().any(|&r| (z - r).norm() <= 1e-9) {
            diag.root_entry = true;
            continue;
        }
        for (k, h) in hs.iter().enumerate() {
            if ((h.nu.conj() * z).re - h.rhs).abs() <= 1e-9 {
                diag.boundary.push((i, j, k));
            }
        }
    }
    if diag.root_entry || diag.boundary.is_empty() {
        return Ok((false, diag));
    }

    // Perturbations are B = G*RG with R = [[0, conj(alpha)], [alpha, c]];
    // the zero diagonal of B and the tight polygon facets give real-linear
    // rows in (Re alpha, Im alpha, c).
    let gf = canonical_gram(n)?;
    let g = &gf.g;
    let mut rows: Vec<[f64; 3]> = Vec::new();
    for c in 1..3 {
        let s = g.get(0, c).conj() * g.get(1, c);
        rows.push([2.0 * s.re, 2.0 * s.im, g.get(1, c).norm_sqr()]);
    }
    for &(i, j, k) in &diag.boundary {
        let nu = hs[k].nu;
        let p = nu.conj() * (g.get(0, i).conj() * g.get(1, j));
        let q = nu.conj() * (g.get(1, i).conj() * g.get(0, j));
        let r = nu.conj() * (g.get(1, i).conj() * g.get(1, j));
        rows.push([p.re + q.re, p.im - q.im, r.re]);
    }

    // Null space of the stacked system via the 3x3 normal matrix.
    let mut mtm = crate::linalg::RMatrix::zeros(3, 3);
    for row in &rows {
        for a in 0..3 {
            for b in 0..3 {
                mtm.add_to(a, b, row[a] * row[b]);
            }
        }
    }
    let (vals, vecs) = crate::linalg::sym_eigen(&mtm)?;
    let sigma_max = vals[0].max(0.0).sqrt();
    let thresh = (1e-9 * sigma_max.max(1e-300)).powi(2);
    let null: Vec<usize> = (0..3).filter(|&i| vals[i].max(0.0) <= thresh).collect();
    diag.null_dim = null.len();
    if let Some(&idx) = null.first() {
        let (x, y, c) = (vecs.get(0, idx), vecs.get(1, idx), vecs.get(2, idx));
        let alpha = Complexd::new(x, y);
        let r = CMatrix::from_fn(2, 2, |a, b| match (a, b) {
            (0, 1) => alpha.conj(),
            (1, 0) => alpha,
            (1, 1) => Complexd::new(c, 0.0),
            _ => Complexd::new(0.0, 0.0),
        });
        let b = g.dagger().matmul(&r).matmul(g);
        diag.perturbation = Some(HermitianMatrix::new(b)?);
        return Ok((false, diag));
    }
    Ok((true, diag))
}

/// Rotate N by a diagonal phase matrix; extremality and membership are
/// invariant under this group action when the phases are roots of unity.
pub fn rotate(n: &HermitianMatrixd, alpha: &PhaseVector<f64>) -> Result<HermitianMatrixd> {
    crate::linalg::group_rotate(n, alpha)
}
