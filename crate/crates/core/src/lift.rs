//! Second-order moment liftings of CUT(n,inf).
//!
//! A lifting is described by a finite basis B of integer exponent vectors in
//! Z^p containing 0. The moment matrix M(y) indexed by B has entries
//! M_{ab} = y_{alpha_a - alpha_b} with y_0 = 1 and y_{-delta} = conj(y_delta);
//! requiring M >= 0 and reading off the top-left block over {0, e_1, ...,
//! e_{p}} gives an outer approximation of CUT(p+1, inf) sitting inside the
//! elliptope. Difference vectors are canonicalized (first nonzero coordinate
//! positive) so the conjugate symmetry is structural rather than enforced by
//! extra rows.

use crate::conic::{embed, svec_index, ConeSpec, ConicProblem, Sense, SolveOpts, Status};
use crate::linalg::{CMatrix, HermitianMatrix};
use crate::{Complexd, Error, HermitianMatrixd, Result};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentBasis {
    pub p: usize,
    pub exponents: Vec<Vec<i64>>,
}

fn unit(p: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0i64; p];
    v[i] = 1;
    v
}

impl MomentBasis {
    pub fn new(p: usize, exponents: Vec<Vec<i64>>) -> Result<Self> {
        if p == 0 {
            return Err(Error::Domain("moment basis needs p >= 1".into()));
        }
        if exponents.is_empty() || exponents[0].iter().any(|&e| e != 0) {
            return Err(Error::Model(
                "moment basis must start with the zero vector".into(),
            ));
        }
        for e in &exponents {
            if e.len() != p {
                return Err(Error::Dimension(format!(
                    "exponent length {} vs p = {p}",
                    e.len()
                )));
            }
        }
        let mut seen = exponents.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != exponents.len() {
            return Err(Error::Model("duplicate exponent in moment basis".into()));
        }
        Ok(MomentBasis { p, exponents })
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when the basis starts with {0, e_1, ..., e_p}, the precondition
    /// for reading off the order-(p+1) top-left block as X.
    pub fn has_standard_head(&self) -> bool {
        self.exponents.len() > self.p
            && (0..self.p).all(|i| self.exponents[i + 1] == unit(self.p, i))
    }
}

/// The six explicit order-4 lifting bases, indexed 1..6 in the usual
/// presentation. All have p = 3 except the third, which lives in Z^4.
pub fn standard_bases() -> [MomentBasis; 6] {
    let z = vec![0i64; 3];
    let b1: Vec<Vec<i64>> = vec![
        z.clone(),
        unit(3, 0),
        unit(3, 1),
        unit(3, 2),
        vec![-1, 1, 0],
        vec![-1, 0, 1],
    ];
    let mut b2 = b1.clone();
    b2.push(vec![0, -1, 1]);
    // b3 = g(b2) for the linear map g: Z^3 -> Z^4 with rows
    // (1,1,1), (-1,0,0), (0,-1,0), (0,0,-1).
    let g = |x: &[i64]| -> Vec<i64> { vec![x[0] + x[1] + x[2], -x[0], -x[1], -x[2]] };
    let b3: Vec<Vec<i64>> = b2.iter().map(|x| g(x)).collect();
    let b4 = a_basis(3).expect("p = 3 is valid").exponents;
    let b5: Vec<Vec<i64>> = vec![
        z.clone(),
        unit(3, 0),
        unit(3, 1),
        unit(3, 2),
        vec![1, 1, 0],
        vec![0, 1, 1],
    ];
    let mut b6 = b5.clone();
    b6.push(vec![-1, 0, 1]);
    b6.push(vec![-1, 1, 0]);
    [
        MomentBasis::new(3, b1).expect("b1"),
        MomentBasis::new(3, b2).expect("b2"),
        MomentBasis::new(4, b3).expect("b3"),
        MomentBasis::new(3, b4).expect("b4"),
        MomentBasis::new(3, b5).expect("b5"),
        MomentBasis::new(3, b6).expect("b6"),
    ]
}

/// {alpha in {0,1}^p | sum alpha <= 2}, ordered as 0, units, then the
/// weight-2 vectors lexicographically.
pub fn tilde_a_basis(p: usize) -> Result<MomentBasis> {
    if p < 3 {
        return Err(Error::Domain(format!("tilde-A basis needs p >= 3, got {p}")));
    }
    let mut exps = vec![vec![0i64; p]];
    for i in 0..p {
        exps.push(unit(p, i));
    }
    for i in 0..p {
        for j in (i + 1)..p {
            let mut v = vec![0i64; p];
            v[i] = 1;
            v[j] = 1;
            exps.push(v);
        }
    }
    MomentBasis::new(p, exps)
}

/// tilde-A plus the squared unit vectors 2 e_i.
pub fn a_basis(p: usize) -> Result<MomentBasis> {
    let mut b = tilde_a_basis(p)?;
    for i in 0..p {
        let mut v = vec![0i64; p];
        v[i] = 2;
        b.exponents.push(v);
    }
    MomentBasis::new(p, b.exponents)
}

/// Randomized synchronization basis: {0, units} plus round(p_frac * C(n-1,2))
/// weight-2 0/1-vectors drawn uniformly without replacement.
pub fn cp_basis<R: rand::Rng>(n: usize, p_frac: f64, rng: &mut R) -> Result<MomentBasis> {
    if n < 4 {
        return Err(Error::Domain(format!("cp basis needs n >= 4, got {n}")));
    }
    if !(0.0..=1.0).contains(&p_frac) {
        return Err(Error::Domain(format!("fraction {p_frac} outside [0, 1]")));
    }
    let p = n - 1;
    let mut exps = vec![vec![0i64; p]];
    for i in 0..p {
        exps.push(unit(p, i));
    }
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(p * (p - 1) / 2);
    for i in 0..p {
        for j in (i + 1)..p {
            pairs.push((i, j));
        }
    }
    let k = (p_frac * pairs.len() as f64).round() as usize;
    use rand::seq::SliceRandom;
    let (chosen, _) = pairs.partial_shuffle(rng, k);
    let mut chosen: Vec<(usize, usize)> = chosen.to_vec();
    chosen.sort_unstable();
    for (i, j) in chosen {
        let mut v = vec![0i64; p];
        v[i] = 1;
        v[j] = 1;
        exps.push(v);
    }
    MomentBasis::new(p, exps)
}

/// One cell of the moment matrix pattern: either the fixed entry y_0 = 1 or
/// a canonical variable, possibly conjugated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentCell {
    One,
    Var { id: usize, conj: bool },
}

pub struct MomentModel {
    pub basis: MomentBasis,
    /// Canonical difference vector -> variable id.
    pub var_index: BTreeMap<Vec<i64>, usize>,
    /// Full |B| x |B| cell grid.
    pub pattern: Vec<Vec<MomentCell>>,
    pub n_vars: usize,
}

/// Canonicalize delta so its first nonzero coordinate is positive. Returns
/// None for the zero vector, otherwise (canonical delta, conjugate flag).
fn canonical_delta(delta: &[i64]) -> Option<(Vec<i64>, bool)> {
    match delta.iter().find(|&&d| d != 0) {
        None => None,
        Some(&d) if d > 0 => Some((delta.to_vec(), false)),
        Some(_) => Some((delta.iter().map(|&d| -d).collect(), true)),
    }
}

pub fn build_moment_model(basis: &MomentBasis) -> MomentModel {
    let nb = basis.len();
    let mut var_index: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    let mut pattern = vec![vec![MomentCell::One; nb]; nb];
    for a in 0..nb {
        for b in 0..nb {
            let delta: Vec<i64> = basis.exponents[a]
                .iter()
                .zip(&basis.exponents[b])
                .map(|(&x, &y)| x - y)
                .collect();
            pattern[a][b] = match canonical_delta(&delta) {
                None => MomentCell::One,
                Some((canon, conj)) => {
                    let next = var_index.len();
                    let id = *var_index.entry(canon).or_insert(next);
                    MomentCell::Var { id, conj }
                }
            };
        }
    }
    let n_vars = var_index.len();
    MomentModel {
        basis: basis.clone(),
        var_index,
        pattern,
        n_vars,
    }
}

/// Coefficients for t * Re(M_ab), a <= b, on the embedded block of complex
/// order nn at variable offset `off`.
fn re_coeffs(out: &mut Vec<(usize, f64)>, off: usize, nn: usize, a: usize, b: usize, t: f64) {
    if a == b {
        out.push((off + svec_index(a, a), 0.5 * t));
        out.push((off + svec_index(nn + a, nn + a), 0.5 * t));
    } else {
        let s = t / (2.0 * std::f64::consts::SQRT_2);
        out.push((off + svec_index(a, b), s));
        out.push((off + svec_index(nn + a, nn + b), s));
    }
}

/// Coefficients for t * Im(M_ab), a < b.
fn im_coeffs(out: &mut Vec<(usize, f64)>, off: usize, nn: usize, a: usize, b: usize, t: f64) {
    let s = t / (2.0 * std::f64::consts::SQRT_2);
    out.push((off + svec_index(a, nn + b), s));
    out.push((off + svec_index(b, nn + a), -s));
}

/// Equality rows of the moment structure on the embedded block at `off`:
/// unit diagonal (y_0 = 1) and cell-sharing chains tying every upper cell to
/// the first cell of its variable group.
fn add_moment_rows(problem: &mut ConicProblem<f64>, off: usize, model: &MomentModel) {
    let nb = model.basis.len();
    for a in 0..nb {
        let mut row = Vec::new();
        re_coeffs(&mut row, off, nb, a, a, 1.0);
        problem.add_row(&row, 1.0);
    }
    let mut rep: Vec<Option<(usize, usize, bool)>> = vec![None; model.n_vars];
    for a in 0..nb {
        for b in (a + 1)..nb {
            let (id, conj) = match model.pattern[a][b] {
                MomentCell::Var { id, conj } => (id, conj),
                MomentCell::One => unreachable!("distinct exponents"),
            };
            match rep[id] {
                None => rep[id] = Some((a, b, conj)),
                Some((ra, rb, rc)) => {
                    let mut row = Vec::new();
                    re_coeffs(&mut row, off, nb, a, b, 1.0);
                    re_coeffs(&mut row, off, nb, ra, rb, -1.0);
                    problem.add_row(&row, 0.0);
                    let sign = if conj == rc { -1.0 } else { 1.0 };
                    let mut row = Vec::new();
                    im_coeffs(&mut row, off, nb, a, b, 1.0);
                    im_coeffs(&mut row, off, nb, ra, rb, sign);
                    problem.add_row(&row, 0.0);
                }
            }
        }
    }
}

fn recover_block(y: &crate::RMatrixd, nn: usize, n: usize) -> Result<HermitianMatrixd> {
    let m = CMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (y.get(i, j) + y.get(nn + i, nn + j));
        let im = 0.5 * (y.get(i, nn + j) - y.get(j, nn + i));
        Complexd::new(re, im)
    });
    HermitianMatrix::new(m)
}

fn check_lift_shape(c: &HermitianMatrixd, basis: &MomentBasis) -> Result<usize> {
    let n = c.order();
    if basis.p + 1 != n {
        return Err(Error::Dimension(format!(
            "objective order {n} needs a basis with p = {}, got p = {}",
            n - 1,
            basis.p
        )));
    }
    if !basis.has_standard_head() {
        return Err(Error::Model(
            "basis must start with the zero vector and the unit vectors".into(),
        ));
    }
    Ok(n)
}

/// Maximize <C, X> over the lifting described by the basis; returns the
/// optimum and the top-left order-n block X.
pub fn lifted_max(
    c: &HermitianMatrixd,
    basis: &MomentBasis,
    opts: &SolveOpts,
) -> Result<(f64, HermitianMatrixd)> {
    let n = check_lift_shape(c, basis)?;
    let model = build_moment_model(basis);
    let nb = basis.len();
    let mut problem = ConicProblem::new(ConeSpec::new(vec![2 * nb], 0)?, Sense::Max);
    for i in 0..n {
        let d = c.get(i, i);
        if d.re != 0.0 {
            let mut out = Vec::new();
            embed::push_entry(&mut out, 0, nb, i, i, d);
            for (idx, v) in out {
                problem.objective[idx] += v;
            }
        }
        for j in (i + 1)..n {
            let v = c.get(i, j);
            if v.re != 0.0 || v.im != 0.0 {
                let mut out = Vec::new();
                embed::push_entry(&mut out, 0, nb, i, j, v);
                for (idx, w) in out {
                    problem.objective[idx] += w;
                }
            }
        }
    }
    add_moment_rows(&mut problem, 0, &model);
    let sol = problem.solve(opts)?;
    if sol.status != Status::Optimal {
        return Err(Error::Solver(format!(
            "lifted solve ended with status {:?}",
            sol.status
        )));
    }
    let x = recover_block(&sol.primal_blocks[0], nb, n)?;
    Ok((sol.primal_obj, x))
}

/// Minimum Frobenius distance from A to the top-left blocks of the lifting's
/// feasible moment matrices. Modeled with a real Schur block
/// [[t I, d], [d', t]] whose vector d is the scaled real vectorization of
/// Z_{1:n,1:n} - A, so the block forces t >= ||Z_{1:n,1:n} - A||_F.
pub fn projection_distance(
    a: &HermitianMatrixd,
    basis: &MomentBasis,
    opts: &SolveOpts,
) -> Result<f64> {
    let n = check_lift_shape(a, basis)?;
    for i in 0..n {
        if (a.get(i, i).re - 1.0).abs() > 1e-8 {
            return Err(Error::Domain("matrix must have unit diagonal".into()));
        }
    }
    let eigs = a.eigvals()?;
    if eigs.iter().cloned().fold(f64::INFINITY, f64::min) < -1e-8 {
        return Err(Error::NotPsd {
            lambda_min: eigs.iter().cloned().fold(f64::INFINITY, f64::min),
        });
    }

    let model = build_moment_model(basis);
    let nb = basis.len();
    let s2 = std::f64::consts::SQRT_2;
    // Real components of the difference: n diagonal entries plus a scaled
    // (re, im) pair per off-diagonal position.
    let nr = n * n;
    let mut problem = ConicProblem::new(ConeSpec::new(vec![2 * nb, nr + 1], 0)?, Sense::Min);
    let off2 = problem.psd_offset(1);
    problem.objective[off2 + svec_index(nr, nr)] = 1.0;
    add_moment_rows(&mut problem, 0, &model);

    // Schur top-left equals t I.
    for k in 0..nr {
        for l in (k + 1)..nr {
            problem.add_row(&[(off2 + svec_index(k, l), 1.0)], 0.0);
        }
        problem.add_row(
            &[
                (off2 + svec_index(k, k), 1.0),
                (off2 + svec_index(nr, nr), -1.0),
            ],
            0.0,
        );
    }
    // d rows: the border entries are off-diagonal in the Schur block, so
    // their svec coordinates carry a sqrt 2 factor.
    let mut k = 0usize;
    for i in 0..n {
        let mut row = vec![(off2 + svec_index(k, nr), 1.0 / s2)];
        re_coeffs(&mut row, 0, nb, i, i, -1.0);
        problem.add_row(&row, -a.get(i, i).re);
        k += 1;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let v = a.get(i, j);
            let mut row = vec![(off2 + svec_index(k, nr), 1.0 / s2)];
            re_coeffs(&mut row, 0, nb, i, j, -s2);
            problem.add_row(&row, -s2 * v.re);
            k += 1;
            let mut row = vec![(off2 + svec_index(k, nr), 1.0 / s2)];
            im_coeffs(&mut row, 0, nb, i, j, -s2);
            problem.add_row(&row, -s2 * v.im);
            k += 1;
        }
    }
    debug_assert_eq!(k, nr);

    let sol = problem.solve(opts)?;
    if sol.status != Status::Optimal {
        return Err(Error::Solver(format!(
            "distance solve ended with status {:?}",
            sol.status
        )));
    }
    Ok(sol.primal_obj.max(0.0))
}
