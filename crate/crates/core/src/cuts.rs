//! The cut catalog: exact facets of CUT(3,3), polygon cuts, clique cuts with
//! closed-form right-hand sides, gap cuts, the H cut, ROC/conjugate orbits,
//! and the strength evaluator.
//!
//! Facets of CUT(3,3) are stated on the coordinates x = (X_12, X_13, X_23)
//! as Re(eta_1 x_1 + eta_2 x_2 + eta_3 x_3) <= rhs; the stored Hermitian Q
//! has upper entries conj(eta)/2 so that the functional equals <Q, X>.

use crate::conic::SolveOpts;
use crate::linalg::{group_rotate, roots_of_unity, HermitianMatrix, PhaseVector};
use crate::oracle;
use crate::relax::{self, FeasibleSetSpec, RelaxKind};
use crate::{Complexd, Error, HermitianMatrixd, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutFamily {
    Polygon,
    TriangleFacet,
    Clique,
    Gap,
    H,
}

#[derive(Clone, Debug)]
pub struct CutDescriptor {
    pub q: HermitianMatrixd,
    pub rhs: f64,
    pub name: String,
    pub family: CutFamily,
    /// Where the cut comes from: "catalog", "closed form", "enumeration".
    pub provenance: String,
}

/// eta phases of the 18 triangle facets, as integer multiples of pi/6.
#[rustfmt::skip]
const TRIANGLE_ETA_TABLE: [[i32; 3]; 18] = [
    [ 3,  1,  3], [ 5, -1,  1], [ 1, -1,  5], [ 3, -3, -1], [ 1, -5,  1],
    [-1, -3,  3], [-5,  1, -1], [-3,  3,  1], [ 1,  3, -3], [-1,  1, -5],
    [-1,  5, -1], [-3, -1, -3], [ 5,  3,  5], [-5,  5,  3], [ 3,  5, -5],
    [ 5, -5, -3], [-5, -3, -5], [-3, -5,  5],
];

fn phase(k: i32) -> Complexd {
    let theta = k as f64 * std::f64::consts::PI / 6.0;
    Complexd::new(theta.cos(), theta.sin())
}

fn cut33_from_eta(eta: [Complexd; 3]) -> HermitianMatrixd {
    HermitianMatrix::from_upper(
        3,
        &[0.0; 3],
        &[
            (0, 1, eta[0].conj() * 0.5),
            (0, 2, eta[1].conj() * 0.5),
            (1, 2, eta[2].conj() * 0.5),
        ],
    )
    .expect("catalog entries are Hermitian by construction")
}

/// The 27 facets of V(CUT(3,3)): 18 triangle facets plus 9 polygon facets,
/// all with right-hand side sqrt(3)/2.
pub fn facet_catalog_cut33() -> Vec<CutDescriptor> {
    let rhs = 3f64.sqrt() / 2.0;
    let mut out = Vec::with_capacity(27);
    for (t, ks) in TRIANGLE_ETA_TABLE.iter().enumerate() {
        let eta = [phase(ks[0]), phase(ks[1]), phase(ks[2])];
        out.push(CutDescriptor {
            q: cut33_from_eta(eta),
            rhs,
            name: format!("cut33-facet-{:02}", t + 1),
            family: CutFamily::TriangleFacet,
            provenance: "catalog".into(),
        });
    }
    // Polygon facets: sqrt(3) * e^{i theta} on a single coordinate, theta in
    // {pi/3, -pi/3, pi} with the sign pattern of the catalog rows 19..27.
    let s3 = 3f64.sqrt();
    let thetas: [(usize, i32); 9] = [
        (0, 2), (0, -2), (0, 6),
        (1, -2), (1, 2), (1, 6),
        (2, 2), (2, -2), (2, 6),
    ];
    for (r, &(pos, k)) in thetas.iter().enumerate() {
        let mut eta = [Complexd::new(0.0, 0.0); 3];
        eta[pos] = phase(k) * s3;
        out.push(CutDescriptor {
            q: cut33_from_eta(eta),
            rhs,
            name: format!("cut33-polygon-{:02}", r + 19),
            family: CutFamily::Polygon,
            provenance: "catalog".into(),
        });
    }
    out
}

/// The six facets of the real projection Re(V(CUT(3,3))): the bounds
/// x_i >= -1/2 and the three one-negative-sign triangle inequalities.
pub fn real_facets_cut33() -> Vec<CutDescriptor> {
    let pos = [(0usize, 1usize), (0, 2), (1, 2)];
    let mut out = Vec::with_capacity(6);
    for (t, &(i, j)) in pos.iter().enumerate() {
        out.push(CutDescriptor {
            q: HermitianMatrix::from_upper(3, &[0.0; 3], &[(i, j, Complexd::new(-0.5, 0.0))])
                .unwrap(),
            rhs: 0.5,
            name: format!("real-bound-x{}", t + 1),
            family: CutFamily::Polygon,
            provenance: "catalog".into(),
        });
    }
    for (t, signs) in [[1.0, 1.0, -1.0], [1.0, -1.0, 1.0], [-1.0, 1.0, 1.0]]
        .iter()
        .enumerate()
    {
        let entries: Vec<_> = pos
            .iter()
            .zip(signs)
            .map(|(&(i, j), &s)| (i, j, Complexd::new(0.5 * s, 0.0)))
            .collect();
        out.push(CutDescriptor {
            q: HermitianMatrix::from_upper(3, &[0.0; 3], &entries).unwrap(),
            rhs: 1.0,
            name: format!("real-triangle-{}", t + 1),
            family: CutFamily::TriangleFacet,
            provenance: "catalog".into(),
        });
    }
    out
}

/// All distinct rotations Q -> Q .* (alpha alpha*) with alpha in B(n,m),
/// alpha_1 = 1. Validity and strength are invariant along the orbit.
pub fn roc_orbit(cut: &CutDescriptor, m: usize) -> Result<Vec<CutDescriptor>> {
    let n = cut.q.order();
    let count = m
        .checked_pow((n - 1) as u32)
        .filter(|&c| c <= 1_000_000)
        .ok_or_else(|| Error::Budget(format!("orbit size {m}^{} too large", n - 1)))?;
    let roots = roots_of_unity::<f64>(m)?.roots;
    let mut orbit: Vec<CutDescriptor> = Vec::new();
    for t in 0..count {
        let mut alpha = vec![Complexd::new(1.0, 0.0)];
        let mut rest = t;
        for _ in 1..n {
            let digit = rest % m;
            rest /= m;
            alpha.push(if digit == 0 {
                Complexd::new(1.0, 0.0)
            } else {
                roots[digit - 1]
            });
        }
        let rotated = group_rotate(&cut.q, &PhaseVector::new(alpha)?)?;
        let dup = orbit
            .iter()
            .any(|c| c.q.sub(&rotated).frob_norm() <= 1e-12 * (1.0 + rotated.frob_norm()));
        if !dup {
            orbit.push(CutDescriptor {
                q: rotated,
                rhs: cut.rhs,
                name: format!("{}-rot{}", cut.name, t),
                family: cut.family,
                provenance: cut.provenance.clone(),
            });
        }
    }
    Ok(orbit)
}

pub fn conjugate_cut(cut: &CutDescriptor) -> CutDescriptor {
    CutDescriptor {
        q: cut.q.conj(),
        rhs: cut.rhs,
        name: format!("{}-conj", cut.name),
        family: cut.family,
        provenance: cut.provenance.clone(),
    }
}

/// Clique cut for Q = I - J (zero diagonal, -1 off-diagonal) with the
/// closed-form maximum over CUT(n,m) as right-hand side.
pub fn clique_cut(n: usize, m: usize) -> Result<CutDescriptor> {
    if !(n == 3 || n == 4) {
        return Err(Error::Domain(format!("clique cut needs n in {{3, 4}}, got {n}")));
    }
    if m < 2 {
        return Err(Error::Domain("need m >= 2".into()));
    }
    let mf = m as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let rhs = match n {
        3 => {
            if m % 3 != 0 {
                let k = (mf / 3.0).round();
                -4.0 * (two_pi * k / mf).cos() - 2.0 * (2.0 * two_pi * k / mf).cos()
            } else {
                3.0
            }
        }
        _ => {
            if m % 2 == 1 {
                let k = (m / 2) as f64;
                -2.0 - 8.0 * (two_pi * k / mf).cos() - 2.0 * (2.0 * two_pi * k / mf).cos()
            } else {
                4.0
            }
        }
    };
    let mut entries = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            entries.push((i, j, Complexd::new(-1.0, 0.0)));
        }
    }
    Ok(CutDescriptor {
        q: HermitianMatrix::from_upper(n, &vec![0.0; n], &entries)?,
        rhs,
        name: format!("clique-n{n}-m{m}"),
        family: CutFamily::Clique,
        provenance: "closed form".into(),
    })
}

#[derive(Clone, Debug)]
pub struct GapCutData {
    pub b: Vec<Complexd>,
    pub sigma: Complexd,
    pub gamma: f64,
    pub bmat: HermitianMatrixd,
}

/// Gap cut from a complex vector b: with B = bb* - Diag(|b_i|^2), the valid
/// inequality is <-B, X> <= sum |b_i|^2 - gamma(b)^2 where gamma is the
/// enumerated minimum of |b* x| over B(n,m).
pub fn gap_cut(b: &[Complexd], m: usize) -> Result<(GapCutData, CutDescriptor)> {
    let n = b.len();
    if n < 2 {
        return Err(Error::Domain("gap cut needs n >= 2".into()));
    }
    let sigma: Complexd = b.iter().sum();
    let verts = oracle::enumerate_vertices(n, m)?;
    let mut gamma = f64::INFINITY;
    for x in &verts.representatives {
        let dot: Complexd = b
            .iter()
            .zip(x.as_slice())
            .map(|(bi, xi)| bi.conj() * xi)
            .sum();
        gamma = gamma.min(dot.norm());
    }
    let mut entries = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            entries.push((i, j, b[i] * b[j].conj()));
        }
    }
    let bmat = HermitianMatrix::from_upper(n, &vec![0.0; n], &entries)?;
    let sum_sq: f64 = b.iter().map(|bi| bi.norm_sqr()).sum();
    let rhs = sum_sq - gamma * gamma;
    let cut = CutDescriptor {
        q: bmat.scale(-1.0),
        rhs,
        name: format!("gap-n{n}-m{m}"),
        family: CutFamily::Gap,
        provenance: "enumeration".into(),
    };
    Ok((
        GapCutData {
            b: b.to_vec(),
            sigma,
            gamma,
            bmat,
        },
        cut,
    ))
}

/// Both sides of the gap identity, each computed independently:
/// left = enumerated min of <B, xx*>, right = 2 Re(sum_{i<j} b_i conj(b_j))
/// + gamma^2 - sigma conj(sigma).
pub fn gap_identity_sides(b: &[Complexd], m: usize) -> Result<(f64, f64)> {
    let (data, _) = gap_cut(b, m)?;
    let (lhs, _) = oracle::brute_min(&data.bmat, m)?;
    let n = b.len();
    let mut cross = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            cross += (b[i] * b[j].conj()).re;
        }
    }
    let rhs = 2.0 * cross + data.gamma * data.gamma - (data.sigma * data.sigma.conj()).re;
    Ok((lhs, rhs))
}

/// The order-4 H cut, <H, X> <= 6, valid for CUT(4,m) for every m.
pub fn h_cut() -> CutDescriptor {
    let i = Complexd::new(0.0, 1.0);
    let one = Complexd::new(1.0, 0.0);
    let q = HermitianMatrix::from_upper(
        4,
        &[0.0; 4],
        &[(0, 1, -i), (0, 2, i), (0, 3, one), (1, 2, -i), (1, 3, one), (2, 3, one)],
    )
    .unwrap();
    CutDescriptor {
        q,
        rhs: 6.0,
        name: "h-cut".into(),
        family: CutFamily::H,
        provenance: "catalog".into(),
    }
}

/// Strength str(Q, m): elliptope optimum divided by the exact optimum over
/// B(n,m). Errors when the exact optimum is not strictly positive; shift the
/// diagonal of Q to make it positive before calling.
pub fn strength(q: &HermitianMatrixd, m: usize, opts: &SolveOpts) -> Result<f64> {
    let (den, _) = oracle::brute_max(q, m)?;
    if den <= 1e-9 {
        return Err(Error::Domain(format!(
            "cut optimum {den} is not strictly positive; adjust the diagonal of Q"
        )));
    }
    let spec = FeasibleSetSpec::new(RelaxKind::Elliptope, q.order(), Some(m))?;
    let (num, _, _) = relax::solve_relaxation(q, &spec, opts)?;
    Ok(num / den)
}

/// Evaluate cut families on all small supports of X and return the violated
/// cuts (embedded at full order) sorted by decreasing violation.
pub fn separate(
    x: &HermitianMatrixd,
    families: &[CutFamily],
    m: usize,
) -> Result<Vec<(CutDescriptor, f64)>> {
    let n = x.order();
    for i in 0..n {
        if (x.get(i, i).re - 1.0).abs() > 1e-6 {
            return Err(Error::Domain("separation needs unit diagonal".into()));
        }
    }
    let mut out: Vec<(CutDescriptor, f64)> = Vec::new();
    let push = |q: &HermitianMatrixd, rhs: f64, support: &[usize], name: &str,
                    family: CutFamily, out: &mut Vec<(CutDescriptor, f64)>| {
        // <Q, X_J> on the support equals <lift(Q), X> globally.
        let mut entries = Vec::new();
        let k = support.len();
        let mut val = 0.0;
        for a in 0..k {
            for bpos in (a + 1)..k {
                let qe = q.get(a, bpos);
                if qe.norm() > 0.0 {
                    entries.push((support[a], support[bpos], qe));
                    val += 2.0 * (qe.conj() * x.get(support[a], support[bpos])).re;
                }
            }
        }
        if val - rhs > 1e-7 {
            let lifted = HermitianMatrix::from_upper(n, &vec![0.0; n], &entries).unwrap();
            out.push((
                CutDescriptor {
                    q: lifted,
                    rhs,
                    name: format!("{name}@{support:?}"),
                    family,
                    provenance: "separation".into(),
                },
                val - rhs,
            ));
        }
    };

    for &family in families {
        match family {
            CutFamily::Polygon => {
                let hs = relax::polygon_halfspaces(m)?;
                for i in 0..n {
                    for j in (i + 1)..n {
                        for (k, h) in hs.iter().enumerate() {
                            let q = HermitianMatrix::from_upper(
                                2,
                                &[0.0; 2],
                                &[(0, 1, h.nu * 0.5)],
                            )?;
                            push(&q, h.rhs, &[i, j], &format!("polygon-{k}"), family, &mut out);
                        }
                    }
                }
            }
            CutFamily::TriangleFacet => {
                if m == 3 {
                    let catalog = facet_catalog_cut33();
                    for i in 0..n {
                        for j in (i + 1)..n {
                            for k in (j + 1)..n {
                                for cut in &catalog {
                                    push(&cut.q, cut.rhs, &[i, j, k], &cut.name, family, &mut out);
                                }
                            }
                        }
                    }
                }
            }
            CutFamily::Clique => {
                let orbit = roc_orbit(&clique_cut(3, m)?, m)?;
                for i in 0..n {
                    for j in (i + 1)..n {
                        for k in (j + 1)..n {
                            for cut in &orbit {
                                push(&cut.q, cut.rhs, &[i, j, k], &cut.name, family, &mut out);
                            }
                        }
                    }
                }
            }
            CutFamily::H => {
                let h = h_cut();
                let hc = conjugate_cut(&h);
                for i in 0..n {
                    for j in (i + 1)..n {
                        for k in (j + 1)..n {
                            for l in (k + 1)..n {
                                for cut in [&h, &hc] {
                                    push(&cut.q, cut.rhs, &[i, j, k, l], &cut.name, family, &mut out);
                                }
                            }
                        }
                    }
                }
            }
            CutFamily::Gap => {}
        }
    }
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_max, enumerate_vertices};

    #[test]
    fn catalog_shape_and_tightness() {
        let catalog = facet_catalog_cut33();
        assert_eq!(catalog.len(), 27);
        let s3h = 3f64.sqrt() / 2.0;
        let triangles: Vec<_> = catalog
            .iter()
            .filter(|c| c.family == CutFamily::TriangleFacet)
            .collect();
        assert_eq!(triangles.len(), 18);
        for c in &catalog {
            assert!((c.rhs - s3h).abs() < 1e-15);
        }
        // facet 1 is tight at the all-ones vertex
        let j3 = HermitianMatrix::<f64>::ones(3);
        assert!((catalog[0].q.inner(&j3) - s3h).abs() < 1e-12);
        // polygon facet 21 is Re(x_1) >= -1/2 scaled by sqrt(3)
        let row21 = &catalog[20];
        assert_eq!(row21.name, "cut33-polygon-21");
        let q12 = row21.q.get(0, 1);
        assert!((q12.re + 3f64.sqrt() / 2.0).abs() < 1e-12 && q12.im.abs() < 1e-12);
    }

    #[test]
    fn catalog_valid_over_vertices() {
        let catalog = facet_catalog_cut33();
        let verts = enumerate_vertices(3, 3).unwrap();
        for c in &catalog {
            let mut max = f64::NEG_INFINITY;
            for v in &verts.vertices {
                max = max.max(c.q.inner(v));
            }
            assert!(max <= c.rhs + 1e-9, "{} violated: {max}", c.name);
            // every facet is tight somewhere
            assert!(max >= c.rhs - 1e-9, "{} never tight: {max}", c.name);
        }
    }

    #[test]
    fn catalog_is_orbit_closure_of_two_seeds() {
        let catalog = facet_catalog_cut33();
        let f1 = &catalog[0];
        let mut rebuilt: Vec<HermitianMatrixd> = Vec::new();
        for c in roc_orbit(f1, 3).unwrap() {
            rebuilt.push(c.q);
        }
        for c in roc_orbit(&conjugate_cut(f1), 3).unwrap() {
            rebuilt.push(c.q);
        }
        for seed in [20, 23, 26] {
            for c in roc_orbit(&catalog[seed], 3).unwrap() {
                rebuilt.push(c.q);
            }
        }
        assert_eq!(rebuilt.len(), 27);
        for c in &catalog {
            let hit = rebuilt
                .iter()
                .any(|q| q.sub(&c.q).frob_norm() < 1e-9);
            assert!(hit, "{} missing from the orbit closure", c.name);
        }
    }

    #[test]
    fn real_facets_basic() {
        let facets = real_facets_cut33();
        assert_eq!(facets.len(), 6);
        let j3 = HermitianMatrix::<f64>::ones(3);
        for f in &facets {
            assert!(f.q.inner(&j3) <= f.rhs + 1e-12);
        }
        // (1, -1/2, -1/2) with x = (X_12, X_13, X_23): build the matrix and
        // check tightness pattern on the bounds for x_2, x_3.
        let x = HermitianMatrix::from_upper(
            3,
            &[1.0; 3],
            &[
                (0, 1, Complexd::new(1.0, 0.0)),
                (0, 2, Complexd::new(-0.5, 0.0)),
                (1, 2, Complexd::new(-0.5, 0.0)),
            ],
        )
        .unwrap();
        assert!((facets[1].q.inner(&x) - facets[1].rhs).abs() < 1e-12);
        assert!((facets[2].q.inner(&x) - facets[2].rhs).abs() < 1e-12);
        // eta_1 + eta_2 of the first two complex facets of the catalog that
        // sum to the real triangle facet: sqrt(3)(x1 + x2 - x3) <= sqrt(3).
        let sum = facets[3].q.scale(2.0 * 3f64.sqrt());
        assert!((sum.get(0, 1).re - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn orbit_sizes() {
        let c3 = clique_cut(3, 3).unwrap();
        assert_eq!(roc_orbit(&c3, 3).unwrap().len(), 9);
        let c4 = clique_cut(4, 3).unwrap();
        assert_eq!(roc_orbit(&c4, 3).unwrap().len(), 27);
    }

    #[test]
    fn clique_rhs_matches_brute_force() {
        for n in [3usize, 4] {
            for m in 2..=12usize {
                let cut = clique_cut(n, m).unwrap();
                let (v, _) = brute_max(&cut.q, m).unwrap();
                assert!(
                    (v - cut.rhs).abs() < 1e-9,
                    "n={n} m={m}: closed form {} vs brute {v}",
                    cut.rhs
                );
            }
        }
    }

    #[test]
    fn gap_identity_examples() {
        // b = 1_3, m = 4: gamma = 1, both sides -2.
        let b = vec![Complexd::new(1.0, 0.0); 3];
        let (data, cut) = gap_cut(&b, 4).unwrap();
        assert!((data.gamma - 1.0).abs() < 1e-12);
        assert!((data.sigma.re - 3.0).abs() < 1e-12);
        assert!((cut.rhs - 2.0).abs() < 1e-12);
        let (lhs, rhs) = gap_identity_sides(&b, 4).unwrap();
        assert!((lhs - rhs).abs() < 1e-9);
        assert!((lhs + 2.0).abs() < 1e-9);

        // single nonzero entry: B = 0, identity reduces to gamma^2 = |b_1|^2
        let b = vec![Complexd::new(0.7, -0.3), Complexd::new(0.0, 0.0)];
        let (lhs, rhs) = gap_identity_sides(&b, 3).unwrap();
        assert!(lhs.abs() < 1e-12 && rhs.abs() < 1e-12);
    }

    #[test]
    fn h_cut_values() {
        let h = h_cut();
        let j4 = HermitianMatrix::<f64>::ones(4);
        assert!((h.q.inner(&j4) - 6.0).abs() < 1e-12);
        let (v, _) = brute_max(&h.q, 3).unwrap();
        assert!((v - 6.0).abs() < 1e-9);
        let (v2, _) = brute_max(&h.q, 2).unwrap();
        assert!(v2 <= 6.0 + 1e-12);
    }

    #[test]
    fn strength_small_cases() {
        let opts = SolveOpts::default();
        let q3 = clique_cut(3, 2).unwrap();
        let s = strength(&q3.q, 2, &opts).unwrap();
        assert!((s - 1.5).abs() < 1e-4, "str {s}");
        let s = strength(&q3.q, 3, &opts).unwrap();
        assert!((s - 1.0).abs() < 1e-4, "str {s}");
        // refuse a nonpositive denominator
        let bad = HermitianMatrix::from_upper(2, &[0.0, 0.0], &[(0, 1, Complexd::new(0.0, 0.0))])
            .unwrap();
        assert!(strength(&bad, 3, &opts).is_err());
    }

    #[test]
    fn strength_orbit_and_shift_invariants() {
        let opts = SolveOpts::default();
        let base = clique_cut(3, 4).unwrap();
        let s0 = strength(&base.q, 4, &opts).unwrap();
        for cut in roc_orbit(&base, 4).unwrap().iter().take(3) {
            let s = strength(&cut.q, 4, &opts).unwrap();
            assert!((s - s0).abs() < 1e-5);
        }
        let s_conj = strength(&conjugate_cut(&base).q, 4, &opts).unwrap();
        assert!((s_conj - s0).abs() < 1e-5);
        // diagonal shift can only weaken
        let shifted = base.q.add(&HermitianMatrix::identity(3).scale(0.5));
        let s_shift = strength(&shifted, 4, &opts).unwrap();
        assert!(s_shift <= s0 + 1e-5);
    }

    #[test]
    fn separation_behaviour() {
        // members of the polytope produce no violated cuts
        let j3 = HermitianMatrix::<f64>::ones(3);
        let v = separate(&j3, &[CutFamily::Polygon, CutFamily::TriangleFacet], 3).unwrap();
        assert!(v.is_empty());

        // elliptope argmax of the facet objective violates facet 1
        let catalog = facet_catalog_cut33();
        let spec = FeasibleSetSpec::new(RelaxKind::Elliptope, 3, Some(3)).unwrap();
        let (val, x, _) =
            relax::solve_relaxation(&catalog[0].q, &spec, &SolveOpts::default()).unwrap();
        let violated = separate(&x, &[CutFamily::TriangleFacet], 3).unwrap();
        assert!(!violated.is_empty());
        let top = &violated[0];
        assert!(top.0.name.starts_with("cut33-facet-01"));
        assert!((top.1 - (val - 3f64.sqrt() / 2.0)).abs() < 1e-5);
    }
}
