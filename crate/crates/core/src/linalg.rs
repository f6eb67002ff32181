//! Dense complex and Hermitian linear algebra.
//!
//! Everything above this module reduces to: roots of unity, the Hadamard
//! group action f_alpha(Z) = (alpha alpha*) .* Z, the Hermitian-to-real PSD
//! embedding, and a Jacobi eigensolver run on that embedding.

use crate::scalar::Scalar;
use crate::{Error, Result};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Dense real matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix<T: Scalar> {
    n_rows: usize,
    n_cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> RMatrix<T> {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        RMatrix {
            n_rows,
            n_cols,
            data: vec![T::zero(); n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n_rows = rows.len();
        let n_cols = if n_rows == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        RMatrix { n_rows, n_cols, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n_cols + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n_cols + j] += v;
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n_cols, other.n_rows);
        let mut out = Self::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.n_cols {
                    out.add_to(i, j, a * other.get(k, j));
                }
            }
        }
        out
    }

    pub fn frob_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &v| acc + v * v)
            .sqrt()
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T: Scalar> {
    n_rows: usize,
    n_cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> CMatrix<T> {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        assert!(n_rows > 0 && n_cols > 0, "matrix dimensions must be positive");
        CMatrix {
            n_rows,
            n_cols,
            data: vec![Complex::new(T::zero(), T::zero()); n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex::new(T::one(), T::zero()));
        }
        m
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, f: impl Fn(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(n_rows, n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose A*.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n_cols, other.n_rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self.get(i, k);
                for j in 0..other.n_cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Matrix-vector product A v.
    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.n_cols, v.len());
        (0..self.n_rows)
            .map(|i| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for j in 0..self.n_cols {
                    acc = acc + self.get(i, j) * v[j];
                }
                acc
            })
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn frob_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }
}

/// Hermitian matrix: square complex with A = A*, symmetrized at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix<T: Scalar> {
    mat: CMatrix<T>,
}

impl<T: Scalar> HermitianMatrix<T> {
    /// Accepts matrices with asymmetry max_ij |A_ij - conj(A_ji)| below a
    /// small tolerance and replaces them by (A + A*)/2; larger asymmetry is
    /// a bug in the caller and is rejected.
    pub fn new(mat: CMatrix<T>) -> Result<Self> {
        if mat.n_rows() != mat.n_cols() {
            return Err(Error::Dimension(format!(
                "hermitian matrix must be square, got {}x{}",
                mat.n_rows(),
                mat.n_cols()
            )));
        }
        if !mat.is_finite() {
            return Err(Error::Domain("non-finite matrix entry".into()));
        }
        let n = mat.n_rows();
        let tol = T::r(1e-12).max(T::epsilon() * T::r(100.0));
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                let d = (mat.get(i, j) - mat.get(j, i).conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        if worst > tol {
            return Err(Error::Domain(format!(
                "matrix is not Hermitian: asymmetry {worst}"
            )));
        }
        let half = T::r(0.5);
        let sym = CMatrix::from_fn(n, n, |i, j| {
            let v = (mat.get(i, j) + mat.get(j, i).conj()) * Complex::new(half, T::zero());
            if i == j {
                Complex::new(v.re, T::zero())
            } else {
                v
            }
        });
        Ok(HermitianMatrix { mat: sym })
    }

    /// Build from diagonal and strict upper-triangular entries.
    pub fn from_upper(n: usize, diag: &[T], upper: &[(usize, usize, Complex<T>)]) -> Result<Self> {
        let mut m = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, Complex::new(d, T::zero()));
        }
        for &(i, j, v) in upper {
            if i >= j || j >= n {
                return Err(Error::Dimension(format!("bad upper index ({i},{j})")));
            }
            m.set(i, j, v);
            m.set(j, i, v.conj());
        }
        HermitianMatrix::new(m)
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix {
            mat: CMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix {
            mat: CMatrix::identity(n),
        }
    }

    /// All-ones matrix J_n.
    pub fn ones(n: usize) -> Self {
        HermitianMatrix {
            mat: CMatrix::from_fn(n, n, |_, _| Complex::new(T::one(), T::zero())),
        }
    }

    /// Rank-one xx* for a complex vector x.
    pub fn outer(x: &[Complex<T>]) -> Self {
        let n = x.len();
        HermitianMatrix {
            mat: CMatrix::from_fn(n, n, |i, j| x[i] * x[j].conj()),
        }
    }

    pub fn order(&self) -> usize {
        self.mat.n_rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.mat.get(i, j)
    }

    pub fn as_cmatrix(&self) -> &CMatrix<T> {
        &self.mat
    }

    /// Entrywise complex conjugate (still Hermitian).
    pub fn conj(&self) -> Self {
        let n = self.order();
        HermitianMatrix {
            mat: CMatrix::from_fn(n, n, |i, j| self.get(i, j).conj()),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        let n = self.order();
        let c = Complex::new(s, T::zero());
        HermitianMatrix {
            mat: CMatrix::from_fn(n, n, |i, j| self.get(i, j) * c),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.order(), other.order());
        let n = self.order();
        HermitianMatrix {
            mat: CMatrix::from_fn(n, n, |i, j| self.get(i, j) + other.get(i, j)),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.order(), other.order());
        let n = self.order();
        HermitianMatrix {
            mat: CMatrix::from_fn(n, n, |i, j| self.get(i, j) - other.get(i, j)),
        }
    }

    /// Trace inner product <A, B> = Tr(AB), real for Hermitian arguments.
    pub fn inner(&self, other: &Self) -> T {
        assert_eq!(self.order(), other.order(), "inner dimension mismatch");
        let n = self.order();
        let mut acc = T::zero();
        for i in 0..n {
            acc += self.get(i, i).re * other.get(i, i).re;
        }
        let two = T::r(2.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let a = self.get(i, j);
                let b = other.get(i, j);
                // A_ij B_ji + A_ji B_ij = 2 Re(conj(A_ij) B_ij)
                acc += two * (a.re * b.re + a.im * b.im);
            }
        }
        acc
    }

    pub fn trace(&self) -> T {
        (0..self.order()).fold(T::zero(), |acc, i| acc + self.get(i, i).re)
    }

    pub fn frob_norm(&self) -> T {
        self.mat.frob_norm()
    }

    /// Real embedding [[Re A, Im A], [-Im A, Re A]], symmetric of order 2n.
    /// A is PSD iff the embedding is PSD; each eigenvalue of A appears twice.
    pub fn real_embed(&self) -> RMatrix<T> {
        let n = self.order();
        let mut out = RMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.get(i, j);
                out.set(i, j, z.re);
                out.set(n + i, n + j, z.re);
                out.set(i, n + j, z.im);
                out.set(n + i, j, -z.im);
            }
        }
        out
    }

    /// Eigendecomposition A = U diag(lambda) U*, eigenvalues descending.
    ///
    /// Runs cyclic Jacobi on the real embedding and collapses the doubled
    /// spectrum back to n complex eigenpairs by Gram-Schmidt selection.
    pub fn eigh(&self) -> Result<(Vec<T>, CMatrix<T>)> {
        let n = self.order();
        let (vals, vecs) = sym_eigen(&self.real_embed())?;
        let mut lambdas: Vec<T> = Vec::with_capacity(n);
        let mut us: Vec<Vec<Complex<T>>> = Vec::with_capacity(n);
        for (k, &lam) in vals.iter().enumerate() {
            if lambdas.len() == n {
                break;
            }
            // Real eigenvector w = (u; v) of the embedding gives the complex
            // eigenvector z = u - i v of A.
            let mut z: Vec<Complex<T>> = (0..n)
                .map(|j| Complex::new(vecs.get(j, k), -vecs.get(n + j, k)))
                .collect();
            for u in &us {
                let mut ip = Complex::new(T::zero(), T::zero());
                for j in 0..n {
                    ip = ip + u[j].conj() * z[j];
                }
                for j in 0..n {
                    z[j] = z[j] - u[j] * ip;
                }
            }
            let norm = z
                .iter()
                .fold(T::zero(), |acc, c| acc + c.norm_sqr())
                .sqrt();
            if norm > T::r(0.3) {
                let inv = T::one() / norm;
                for c in z.iter_mut() {
                    *c = *c * Complex::new(inv, T::zero());
                }
                lambdas.push(lam);
                us.push(z);
            }
        }
        if lambdas.len() != n {
            return Err(Error::NonConvergence {
                residual: f64::NAN,
            });
        }
        let u_mat = CMatrix::from_fn(n, n, |i, j| us[j][i]);
        Ok((lambdas, u_mat))
    }

    /// Eigenvalues only, descending.
    pub fn eigvals(&self) -> Result<Vec<T>> {
        let (vals, _) = self.eigh()?;
        Ok(vals)
    }

    /// Count of eigenvalues exceeding tol * max(1, lambda_max).
    pub fn numeric_rank(&self, tol: T) -> usize {
        let vals = self.eigvals().expect("eigensolver");
        let lam_max = vals.first().copied().unwrap_or(T::zero());
        let thresh = tol * T::one().max(lam_max);
        vals.iter().filter(|&&v| v > thresh).count()
    }

    /// Factor a PSD matrix as A = V*V where V has numeric_rank(A, tol) rows.
    /// Slightly negative eigenvalues (>= -tol) are clipped to zero.
    pub fn psd_factor(&self, tol: T) -> Result<CMatrix<T>> {
        let (vals, u) = self.eigh()?;
        let lam_min = vals.last().copied().unwrap_or(T::zero());
        if lam_min < -tol {
            return Err(Error::NotPsd {
                lambda_min: lam_min.to_f64().unwrap_or(f64::NAN),
            });
        }
        let lam_max = vals.first().copied().unwrap_or(T::zero());
        let thresh = tol * T::one().max(lam_max);
        let k = vals.iter().filter(|&&v| v > thresh).count().max(1);
        let n = self.order();
        // Row i of V is sqrt(lambda_i) u_i*, so V*V = sum lambda_i u_i u_i*.
        let v = CMatrix::from_fn(k, n, |r, c| {
            let lam = vals[r].max(T::zero());
            u.get(c, r).conj() * Complex::new(lam.sqrt(), T::zero())
        });
        Ok(v)
    }
}

/// JSON schema for matrices: {"n": int, "re": [[..]], "im": [[..]]}.
#[derive(Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl HermitianMatrix<f64> {
    pub fn to_json(&self) -> MatrixJson {
        let n = self.order();
        MatrixJson {
            n,
            re: (0..n)
                .map(|i| (0..n).map(|j| self.get(i, j).re).collect())
                .collect(),
            im: (0..n)
                .map(|i| (0..n).map(|j| self.get(i, j).im).collect())
                .collect(),
        }
    }

    pub fn from_json(j: &MatrixJson) -> Result<Self> {
        if j.re.len() != j.n || j.im.len() != j.n {
            return Err(Error::Dimension("row count does not match n".into()));
        }
        let mut m = CMatrix::zeros(j.n, j.n);
        for i in 0..j.n {
            if j.re[i].len() != j.n || j.im[i].len() != j.n {
                return Err(Error::Dimension("column count does not match n".into()));
            }
            for k in 0..j.n {
                m.set(i, k, Complex::new(j.re[i][k], j.im[i][k]));
            }
        }
        HermitianMatrix::new(m)
    }

    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        let s = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn read_json(path: &std::path::Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        let j: MatrixJson = serde_json::from_str(&s)?;
        Self::from_json(&j)
    }
}

/// The m-th roots of unity; `m = None` is the whole unit circle.
#[derive(Clone, Debug)]
pub struct RootSet<T: Scalar> {
    pub m: Option<usize>,
    pub roots: Vec<Complex<T>>,
}

/// Roots exp(2 pi i k / m) for k = 1..m; the last element is 1.
pub fn roots_of_unity<T: Scalar>(m: usize) -> Result<RootSet<T>> {
    if m < 2 {
        return Err(Error::Domain(format!("need m >= 2, got {m}")));
    }
    let two_pi = T::PI() * T::r(2.0);
    let roots = (1..=m)
        .map(|k| {
            let theta = two_pi * T::r(k as f64) / T::r(m as f64);
            Complex::new(theta.cos(), theta.sin())
        })
        .collect();
    Ok(RootSet { m: Some(m), roots })
}

/// The unit circle as a root set.
pub fn unit_circle<T: Scalar>() -> RootSet<T> {
    RootSet {
        m: None,
        roots: Vec::new(),
    }
}

/// Vector of unit-modulus phases, e.g. an element of B(n,m).
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseVector<T: Scalar> {
    phases: Vec<Complex<T>>,
}

impl<T: Scalar> PhaseVector<T> {
    pub fn new(phases: Vec<Complex<T>>) -> Result<Self> {
        let tol = T::r(1e-12).max(T::epsilon() * T::r(100.0));
        for p in &phases {
            if (p.norm() - T::one()).abs() > tol {
                return Err(Error::Domain(format!(
                    "phase entry has modulus {} != 1",
                    p.norm()
                )));
            }
        }
        Ok(PhaseVector { phases })
    }

    pub fn ones(n: usize) -> Self {
        PhaseVector {
            phases: vec![Complex::new(T::one(), T::zero()); n],
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn get(&self, i: usize) -> Complex<T> {
        self.phases[i]
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.phases
    }

    pub fn conj(&self) -> Self {
        PhaseVector {
            phases: self.phases.iter().map(|p| p.conj()).collect(),
        }
    }
}

/// Hadamard group action f_alpha(Z) = (alpha alpha*) .* Z.
pub fn group_rotate<T: Scalar>(
    z: &HermitianMatrix<T>,
    alpha: &PhaseVector<T>,
) -> Result<HermitianMatrix<T>> {
    let n = z.order();
    if alpha.len() != n {
        return Err(Error::Dimension(format!(
            "matrix order {n} vs phase vector length {}",
            alpha.len()
        )));
    }
    let m = CMatrix::from_fn(n, n, |i, j| z.get(i, j) * alpha.get(i) * alpha.get(j).conj());
    HermitianMatrix::new(m)
}

/// Cyclic Jacobi eigendecomposition of a dense symmetric real matrix.
/// Returns eigenvalues (descending) and the matrix of eigenvectors as columns.
pub fn sym_eigen<T: Scalar>(a: &RMatrix<T>) -> Result<(Vec<T>, RMatrix<T>)> {
    let n = a.n_rows();
    assert_eq!(n, a.n_cols(), "sym_eigen needs a square matrix");
    let mut m = a.clone();
    // Symmetrize defensively; callers pass symmetric data.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (m.get(i, j) + m.get(j, i)) * T::r(0.5);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    let mut v = RMatrix::identity(n);
    let scale = {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                s = s.max(m.get(i, j).abs());
            }
        }
        s.max(T::one())
    };
    // `off` sums ~n^2/2 entries, each floored near eps*scale once the
    // rotations stop firing, so the threshold must scale with n^2.
    let tol = T::epsilon() * scale * T::r((n * n) as f64);
    const MAX_SWEEPS: usize = 100;
    let mut converged = false;
    let mut off = T::zero();
    for _ in 0..MAX_SWEEPS {
        off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.get(p, q).abs();
            }
        }
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= T::epsilon() * scale {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (T::r(2.0) * apq);
                let t = {
                    let s = if theta < T::zero() { -T::one() } else { T::one() };
                    s / (theta.abs() + (T::one() + theta * theta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = m.get(p, k);
                    let aqk = m.get(q, k);
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            residual: off.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        m.get(j, j)
            .partial_cmp(&m.get(i, i))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals: Vec<T> = idx.iter().map(|&i| m.get(i, i)).collect();
    let mut vecs = RMatrix::zeros(n, n);
    for (new_col, &old_col) in idx.iter().enumerate() {
        for r in 0..n {
            vecs.set(r, new_col, v.get(r, old_col));
        }
    }
    Ok((vals, vecs))
}

/// Smallest eigenvalue of a dense symmetric real matrix.
pub fn sym_min_eig<T: Scalar>(a: &RMatrix<T>) -> Result<T> {
    let (vals, _) = sym_eigen(a)?;
    Ok(vals.last().copied().unwrap_or(T::zero()))
}

/// Numeric rank of a general real matrix via the spectrum of A^T A.
pub fn real_rank<T: Scalar>(a: &RMatrix<T>, rel_tol: T) -> Result<usize> {
    let g = a.transpose().matmul(a);
    let (vals, _) = sym_eigen(&g)?;
    let top = vals.first().copied().unwrap_or(T::zero()).max(T::zero());
    if top == T::zero() {
        return Ok(0);
    }
    // Squaring the tolerance can land below the floating-point noise floor
    // of the Gram matrix; never threshold below n * eps relative accuracy.
    let n = T::from_usize(g.n_rows()).expect("small integer");
    let thresh = (rel_tol * rel_tol).max(n * T::epsilon()) * top;
    let rank = vals.iter().filter(|&&v| v > thresh).count();
    Ok(rank.min(a.n_rows()).min(a.n_cols()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complexd;

    fn c(re: f64, im: f64) -> Complexd {
        Complexd::new(re, im)
    }

    #[test]
    fn roots_of_unity_small_m() {
        let r2 = roots_of_unity::<f64>(2).unwrap();
        assert!((r2.roots[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((r2.roots[1] - c(1.0, 0.0)).norm() < 1e-14);

        let r4 = roots_of_unity::<f64>(4).unwrap();
        let expect = [c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0), c(1.0, 0.0)];
        for (a, b) in r4.roots.iter().zip(expect.iter()) {
            assert!((a - b).norm() < 1e-14);
        }

        // m=3: real parts of the non-unit roots are -1/2, last element is 1.
        let r3 = roots_of_unity::<f64>(3).unwrap();
        assert!((r3.roots[0].re + 0.5).abs() < 1e-14);
        assert!((r3.roots[1].re + 0.5).abs() < 1e-14);
        assert!((r3.roots[2] - c(1.0, 0.0)).norm() < 1e-14);

        assert!(roots_of_unity::<f64>(1).is_err());
    }

    #[test]
    fn roots_satisfy_z_pow_m() {
        for m in 2..=12 {
            let rs = roots_of_unity::<f64>(m).unwrap();
            assert_eq!(rs.roots.len(), m);
            for z in &rs.roots {
                let mut p = c(1.0, 0.0);
                for _ in 0..m {
                    p *= z;
                }
                assert!((p - c(1.0, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn real_embed_identity_and_pauli() {
        let i2 = HermitianMatrix::<f64>::identity(2);
        let e = i2.real_embed();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(e.get(i, j), expect);
            }
        }

        // [[0, i], [-i, 0]]
        let a = HermitianMatrix::from_upper(2, &[0.0, 0.0], &[(0, 1, c(0.0, 1.0))]).unwrap();
        let e = a.real_embed();
        let expect = [
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(e.get(i, j), expect[i][j], "({i},{j})");
            }
        }
    }

    #[test]
    fn embed_doubles_spectrum() {
        let a = random_hermitian(5, 7);
        let vals_a = a.eigvals().unwrap();
        let (vals_e, _) = sym_eigen(&a.real_embed()).unwrap();
        // Every eigenvalue of A appears twice in the embedding.
        for (k, &lam) in vals_a.iter().enumerate() {
            assert!((vals_e[2 * k] - lam).abs() < 1e-9);
            assert!((vals_e[2 * k + 1] - lam).abs() < 1e-9);
        }
    }

    #[test]
    fn eigh_diagonal_and_ones() {
        let a = HermitianMatrix::<f64>::from_upper(2, &[3.0, 1.0], &[]).unwrap();
        let (vals, u) = a.eigh().unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!((u.get(0, 0).norm() - 1.0).abs() < 1e-10);

        let j3 = HermitianMatrix::<f64>::ones(3);
        let vals = j3.eigvals().unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-10);
        assert!(vals[1].abs() < 1e-10);
        assert!(vals[2].abs() < 1e-10);
    }

    #[test]
    fn eigh_rank_one_root_vector() {
        let w = c(-0.5, 3f64.sqrt() / 2.0);
        let x = vec![c(1.0, 0.0), w, w * w];
        let a = HermitianMatrix::outer(&x);
        let (vals, u) = a.eigh().unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-10);
        assert!(vals[1].abs() < 1e-10);
        // Top eigenvector proportional to x.
        let u0 = u.column(0);
        let phase = u0[0] / u0[0].norm();
        for j in 0..3 {
            let expect = x[j] / 3f64.sqrt() * phase;
            assert!((u0[j] - expect).norm() < 1e-9, "component {j}");
        }
    }

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix<f64> {
        // Tiny deterministic LCG; good enough for test data.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, c(next(), 0.0));
            for j in (i + 1)..n {
                let v = c(next(), next());
                m.set(i, j, v);
                m.set(j, i, v.conj());
            }
        }
        HermitianMatrix::new(m).unwrap()
    }

    #[test]
    fn eigh_reconstruction_residual() {
        for seed in 0..20u64 {
            let n = 2 + (seed as usize % 9);
            let a = random_hermitian(n, seed + 1);
            let (vals, u) = a.eigh().unwrap();
            // || A U - U diag(vals) ||_F <= 1e-10 ||A||_F
            let mut resid: f64 = 0.0;
            for k in 0..n {
                let col = u.column(k);
                let au = a.as_cmatrix().matvec(&col);
                for i in 0..n {
                    resid += (au[i] - col[i] * vals[k]).norm_sqr();
                }
            }
            assert!(resid.sqrt() <= 1e-10 * a.frob_norm().max(1e-30), "seed {seed}");
            // U*U = I
            let gram = u.dagger().matmul(&u);
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((gram.get(i, j) - c(expect, 0.0)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn numeric_rank_cases() {
        let x = vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        let a = HermitianMatrix::outer(&x);
        assert_eq!(a.numeric_rank(1e-5), 1);
        assert_eq!(HermitianMatrix::<f64>::identity(4).numeric_rank(1e-5), 4);
    }

    #[test]
    fn psd_factor_roundtrip() {
        let i3 = HermitianMatrix::<f64>::identity(3);
        let v = i3.psd_factor(1e-10).unwrap();
        let back = v.dagger().matmul(&v);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((back.get(i, j) - c(expect, 0.0)).norm() < 1e-10);
            }
        }

        let j4 = HermitianMatrix::<f64>::ones(4);
        let v = j4.psd_factor(1e-8).unwrap();
        assert_eq!(v.n_rows(), 1);
        for j in 1..4 {
            assert!((v.get(0, j) - v.get(0, 0)).norm() < 1e-10);
        }

        let neg = HermitianMatrix::from_upper(2, &[1.0, -1.0], &[]).unwrap();
        assert!(matches!(neg.psd_factor(1e-8), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn group_rotate_identity_and_inverse() {
        let a = random_hermitian(4, 42);
        let ones = PhaseVector::ones(4);
        let same = group_rotate(&a, &ones).unwrap();
        assert!(same.sub(&a).frob_norm() < 1e-14);

        let roots = roots_of_unity::<f64>(5).unwrap();
        let alpha = PhaseVector::new(vec![
            roots.roots[0],
            roots.roots[2],
            roots.roots[3],
            roots.roots[4],
        ])
        .unwrap();
        let rotated = group_rotate(&a, &alpha).unwrap();
        let back = group_rotate(&rotated, &alpha.conj()).unwrap();
        assert!(back.sub(&a).frob_norm() < 1e-13);

        // Inner products are preserved.
        let b = random_hermitian(4, 43);
        let rb = group_rotate(&b, &alpha).unwrap();
        assert!((rotated.inner(&rb) - a.inner(&b)).abs() < 1e-11);
    }

    #[test]
    fn hermitize_and_reject() {
        // Mild asymmetry is absorbed.
        let mut m = CMatrix::zeros(2, 2);
        m.set(0, 0, c(1.0, 0.0));
        m.set(1, 1, c(1.0, 0.0));
        m.set(0, 1, c(0.5, 0.25 + 1e-13));
        m.set(1, 0, c(0.5, -0.25));
        let h = HermitianMatrix::new(m).unwrap();
        assert!((h.get(0, 1) - h.get(1, 0).conj()).norm() < 1e-16);

        // Gross asymmetry is a bug.
        let mut bad = CMatrix::zeros(2, 2);
        bad.set(0, 1, c(1.0, 0.0));
        bad.set(1, 0, c(0.0, 0.0));
        assert!(HermitianMatrix::new(bad).is_err());
    }

    #[test]
    fn json_roundtrip_bit_exact() {
        let a = random_hermitian(5, 99);
        let s = serde_json::to_string(&a.to_json()).unwrap();
        let j: MatrixJson = serde_json::from_str(&s).unwrap();
        let b = HermitianMatrix::from_json(&j).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(a.get(i, j).re.to_bits(), b.get(i, j).re.to_bits());
                assert_eq!(a.get(i, j).im.to_bits(), b.get(i, j).im.to_bits());
            }
        }
    }

    #[test]
    fn real_rank_simple() {
        let m = RMatrix::from_rows(&[
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![1.0, 1.0, 2.0],
        ]);
        assert_eq!(real_rank(&m, 1e-9).unwrap(), 2);
    }

    #[test]
    fn generic_scalar_f32() {
        let rs = roots_of_unity::<f32>(4).unwrap();
        assert!((rs.roots[3].re - 1.0f32).abs() < 1e-6);
        let a = HermitianMatrix::<f32>::identity(3);
        let vals = a.eigvals().unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-5);
    }
}
