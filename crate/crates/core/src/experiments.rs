//! Experiment harness: randomized rounding, the strength table, random
//! objectives, MIMO detection and angular synchronization.
//!
//! Every experiment takes a seeded config and reports per-trial CSV rows
//! plus a JSON aggregate. Randomness comes from per-trial ChaCha streams, so
//! a fixed seed reproduces the exact numbers regardless of how many trials
//! ran before a given one.

use crate::conic::SolveOpts;
use crate::cuts;
use crate::lift;
use crate::linalg::{roots_of_unity, CMatrix, HermitianMatrix};
use crate::conic::Status;
use crate::relax::{self, FeasibleSetSpec, RelaxKind};
use crate::{Complexd, Error, HermitianMatrixd, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    StrengthTable,
    RandomObjectives,
    Mimo,
    AngularSync,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub n: usize,
    /// Root counts to sweep; empty picks the experiment default.
    #[serde(default)]
    pub m: Vec<usize>,
    /// Noise levels; empty picks the experiment default.
    #[serde(default)]
    pub sigma: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    #[serde(default = "default_rounding_trials")]
    pub rounding_trials: usize,
    /// Basis fractions for angular synchronization.
    #[serde(default)]
    pub p_fracs: Vec<f64>,
}

fn default_trials() -> usize {
    1
}
fn default_rank_tol() -> f64 {
    1e-5
}
fn default_rounding_trials() -> usize {
    100
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Domain("need at least one trial".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub label: String,
    pub upper: f64,
    pub lower: f64,
    pub rank_one: bool,
    /// De-rotated recovery of the planted signal, where one exists.
    pub recovered: Option<bool>,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub rows: Vec<TrialRow>,
    pub aggregate: serde_json::Value,
}

impl RunReport {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.aggregate)?;
        writeln!(w)?;
        Ok(())
    }

    /// CSV content with the timing column blanked, for determinism checks.
    pub fn csv_without_timing(&self) -> String {
        let mut s = String::new();
        for row in &self.rows {
            s.push_str(&format!(
                "{},{},{:.12e},{:.12e},{},{:?}\n",
                row.trial, row.label, row.upper, row.lower, row.rank_one, row.recovered
            ));
        }
        s
    }
}

/// Experiment-grade relaxation solve: a stalled interior-point run whose
/// primal iterate is still feasible carries full statistical information
/// (rank profile, rounding input), so it is kept instead of aborting the
/// sweep.
fn solve_tolerant(
    c: &HermitianMatrixd,
    spec: &FeasibleSetSpec,
    opts: &SolveOpts,
) -> Result<(f64, HermitianMatrixd)> {
    // Normalize the objective scale: sampled objectives can have entries a
    // few orders of magnitude above the unit-diagonal feasible set, which
    // degrades the interior-point termination accuracy.
    let n = c.order();
    let mut scale = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            scale = scale.max(c.get(i, j).norm());
        }
    }
    let scaled = if scale > 1.0 {
        let diag: Vec<f64> = (0..n).map(|i| c.get(i, i).re / scale).collect();
        let mut upper = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                upper.push((i, j, c.get(i, j) / scale));
            }
        }
        HermitianMatrix::from_upper(n, &diag, &upper)?
    } else {
        scale = 1.0;
        c.clone()
    };
    let model = relax::build_model(&scaled, spec)?;
    let sol = model.problem.solve(opts)?;
    match sol.status {
        Status::Optimal => {}
        Status::NumericLimit if sol.residuals.primal_feas <= 1e-6 => {}
        s => return Err(Error::Solver(format!("experiment solve status {s:?}"))),
    }
    let x = model.recover(&sol)?;
    Ok((sol.primal_obj * scale, x))
}

/// Standard complex Gaussian: real and imaginary parts N(0, 1/2).
pub fn complex_gaussian<R: Rng>(rng: &mut R) -> Complexd {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complexd::new(re * s, im * s)
}

/// x* C x for a phase-like vector x.
pub fn phase_objective(c: &HermitianMatrixd, x: &[Complexd]) -> f64 {
    let n = c.order();
    let mut val = 0.0;
    for i in 0..n {
        val += c.get(i, i).re * x[i].norm_sqr();
        for j in (i + 1)..n {
            val += 2.0 * (x[i].conj() * c.get(i, j) * x[j]).re;
        }
    }
    val
}

fn snap(z: Complexd, m: Option<usize>) -> Complexd {
    match m {
        None => {
            if z.norm() < 1e-14 {
                Complexd::new(1.0, 0.0)
            } else {
                z / z.norm()
            }
        }
        Some(m) => {
            let step = 2.0 * std::f64::consts::PI / m as f64;
            let k = (z.arg() / step).round();
            Complexd::from_polar(1.0, k * step)
        }
    }
}

/// Randomized hyperplane-style rounding: factor X = V*V, score V*g for
/// Gaussian g, snap arguments to the root grid (or the unit circle for
/// m = None), keep the best of `trials` draws plus the deterministic
/// top-eigenvector snap.
pub fn round_to_rank1<R: Rng>(
    x: &HermitianMatrixd,
    c: &HermitianMatrixd,
    m: Option<usize>,
    trials: usize,
    rng: &mut R,
) -> Result<(Vec<Complexd>, f64)> {
    let n = x.order();
    for i in 0..n {
        if (x.get(i, i).re - 1.0).abs() > 1e-6 {
            return Err(Error::Domain("rounding needs unit diagonal".into()));
        }
    }
    let v = x.psd_factor(1e-7)?;
    let k = v.n_rows();
    let mut best: Option<(Vec<Complexd>, f64)> = None;
    let mut consider = |cand: Vec<Complexd>, val: f64| {
        if best.as_ref().map_or(true, |(_, b)| val > *b) {
            best = Some((cand, val));
        }
    };
    // Deterministic candidate: snap the top eigenvector componentwise.
    let (_, vecs) = x.eigh()?;
    let top: Vec<Complexd> = (0..n).map(|i| snap(vecs.get(i, 0), m)).collect();
    let val = phase_objective(c, &top);
    consider(top, val);
    for _ in 0..trials {
        let g: Vec<Complexd> = (0..k).map(|_| complex_gaussian(rng)).collect();
        let y = v.dagger().matvec(&g);
        let cand: Vec<Complexd> = y.into_iter().map(|z| snap(z, m)).collect();
        let val = phase_objective(c, &cand);
        consider(cand, val);
    }
    Ok(best.expect("at least the deterministic candidate"))
}

/// Rank-1 flag: after normalizing the top eigenvalue to n, the second must
/// not exceed the tolerance.
pub fn rank_one_flag(x: &HermitianMatrixd, tol: f64) -> Result<bool> {
    let n = x.order() as f64;
    let eigs = x.eigvals()?;
    if eigs.len() < 2 || eigs[0] <= 0.0 {
        return Ok(eigs.len() < 2);
    }
    Ok(n * eigs[1].max(0.0) / eigs[0] <= tol)
}

fn stream_rng(seed: u64, combo: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(combo * 1_000_003 + trial);
    rng
}

/// The four cut families of the strength table, as (label, objective).
pub fn strength_table_rows() -> Result<Vec<(String, HermitianMatrixd)>> {
    let facet = cuts::facet_catalog_cut33()
        .into_iter()
        .find(|c| c.family == cuts::CutFamily::TriangleFacet)
        .expect("catalog has triangle facets");
    Ok(vec![
        ("clique-n3".into(), cuts::clique_cut(3, 3)?.q),
        ("clique-n4".into(), cuts::clique_cut(4, 3)?.q),
        ("facet-n3".into(), facet.q),
        ("h-n4".into(), cuts::h_cut().q),
    ])
}

pub fn run_strength_table(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let ms: Vec<usize> = if config.m.is_empty() {
        (2..=9).collect()
    } else {
        config.m.clone()
    };
    let opts = SolveOpts::default();
    let mut rows = Vec::new();
    let mut table = serde_json::Map::new();
    for (label, q) in strength_table_rows()? {
        let mut per_m = serde_json::Map::new();
        for &m in &ms {
            let t0 = Instant::now();
            let s = cuts::strength(&q, m, &opts)?;
            rows.push(TrialRow {
                trial: 0,
                label: format!("{label}:m={m}"),
                upper: s,
                lower: 1.0,
                rank_one: (s - 1.0).abs() < 1e-6,
                recovered: None,
                seconds: t0.elapsed().as_secs_f64(),
            });
            per_m.insert(format!("m={m}"), serde_json::json!((s * 1e4).round() / 1e4));
        }
        table.insert(label, serde_json::Value::Object(per_m));
    }
    Ok(RunReport {
        rows,
        aggregate: serde_json::json!({
            "experiment": "strength-table",
            "strength": table,
        }),
    })
}

fn random_integer_objective<R: Rng>(n: usize, rng: &mut R) -> HermitianMatrixd {
    let mut upper = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let re = rng.gen_range(-10..=10) as f64;
            let im = rng.gen_range(-10..=10) as f64;
            upper.push((i, j, Complexd::new(re, im)));
        }
    }
    HermitianMatrix::from_upper(n, &vec![0.0; n], &upper).expect("valid Hermitian")
}

pub fn run_random_objectives(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let n = if config.n == 0 { 20 } else { config.n };
    let ms: Vec<usize> = if config.m.is_empty() {
        vec![3, 4]
    } else {
        config.m.clone()
    };
    let opts = SolveOpts::default();
    let mut rows = Vec::new();
    let mut agg = serde_json::Map::new();
    for (ci, &m) in ms.iter().enumerate() {
        let specs = [
            ("E", FeasibleSetSpec::new(RelaxKind::Elliptope, n, Some(m))?),
            (
                "T",
                FeasibleSetSpec::new(RelaxKind::TriangleStrengthened, n, Some(m))?,
            ),
        ];
        let mut sums = [0.0f64; 2];
        let mut lb_sum = 0.0f64;
        for trial in 0..config.trials {
            let mut rng = stream_rng(config.seed, ci as u64, trial as u64);
            let q = random_integer_objective(n, &mut rng);
            for (s, (tag, spec)) in specs.iter().enumerate() {
                let t0 = Instant::now();
                let (val, x) = solve_tolerant(&q, spec, &opts)?;
                let (_, lb) =
                    round_to_rank1(&x, &q, Some(m), config.rounding_trials, &mut rng)?;
                sums[s] += val;
                if *tag == "T" {
                    lb_sum += lb;
                }
                rows.push(TrialRow {
                    trial,
                    label: format!("m={m}:{tag}"),
                    upper: val,
                    lower: lb,
                    rank_one: rank_one_flag(&x, config.rank_tol)?,
                    recovered: None,
                    seconds: t0.elapsed().as_secs_f64(),
                });
            }
        }
        let t = config.trials as f64;
        agg.insert(
            format!("m={m}"),
            serde_json::json!({
                "mean_elliptope": sums[0] / t,
                "mean_triangle": sums[1] / t,
                "mean_lower_bound": lb_sum / t,
            }),
        );
    }
    Ok(RunReport {
        rows,
        aggregate: serde_json::json!({
            "experiment": "random-objectives",
            "n": n,
            "trials": config.trials,
            "means": agg,
        }),
    })
}

/// Homogenized maximum-likelihood objective for r = Dc + sigma v: the
/// order-(n+1) block matrix [[r*r, -r*D], [-D*r, D*D]], to be minimized over
/// phase vectors (1, x).
pub fn mimo_objective(d: &CMatrix<f64>, r: &[Complexd]) -> Result<HermitianMatrixd> {
    let n = d.n_cols();
    let rows = d.n_rows();
    if r.len() != rows {
        return Err(Error::Dimension("received vector vs channel rows".into()));
    }
    let m = CMatrix::from_fn(n + 1, n + 1, |a, b| {
        let col = |j: usize| -> Vec<Complexd> { d.column(j - 1) };
        match (a, b) {
            (0, 0) => Complexd::new(r.iter().map(|z| z.norm_sqr()).sum(), 0.0),
            (0, j) => -r.iter().zip(col(j)).map(|(ri, di)| ri.conj() * di).sum::<Complexd>(),
            (i, 0) => -col(i).iter().zip(r).map(|(di, ri)| di.conj() * ri).sum::<Complexd>(),
            (i, j) => col(i)
                .iter()
                .zip(col(j))
                .map(|(di, dj)| di.conj() * dj)
                .sum::<Complexd>(),
        }
    });
    HermitianMatrix::new(m)
}

pub fn run_mimo(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let n = if config.n == 0 { 30 } else { config.n };
    let rows_d = n + 10;
    let ms: Vec<usize> = if config.m.is_empty() {
        vec![3, 4]
    } else {
        config.m.clone()
    };
    let sigmas: Vec<f64> = if config.sigma.is_empty() {
        vec![1.0]
    } else {
        config.sigma.clone()
    };
    let opts = SolveOpts::default();
    let mut rows = Vec::new();
    let mut agg = serde_json::Map::new();
    let mut combo = 0u64;
    for &m in &ms {
        let roots = roots_of_unity::<f64>(m)?;
        for &sigma in &sigmas {
            let specs = [
                (
                    "E",
                    FeasibleSetSpec::new(RelaxKind::Elliptope, n + 1, Some(m))?,
                ),
                (
                    "T",
                    FeasibleSetSpec::new(RelaxKind::TriangleStrengthened, n + 1, Some(m))?,
                ),
            ];
            let mut rank1 = [0usize; 2];
            let mut recovered_ct = [0usize; 2];
            for trial in 0..config.trials {
                let mut rng = stream_rng(config.seed, combo, trial as u64);
                let mut d = CMatrix::zeros(rows_d, n);
                for a in 0..rows_d {
                    for b in 0..n {
                        d.set(a, b, complex_gaussian(&mut rng));
                    }
                }
                let c: Vec<Complexd> = (0..n)
                    .map(|_| roots.roots[rng.gen_range(0..m)])
                    .collect();
                let v: Vec<Complexd> = (0..rows_d).map(|_| complex_gaussian(&mut rng)).collect();
                let dc = d.matvec(&c);
                let r: Vec<Complexd> = dc
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| a + sigma * b)
                    .collect();
                let obj = mimo_objective(&d, &r)?.scale(-1.0);
                for (s, (tag, spec)) in specs.iter().enumerate() {
                    let t0 = Instant::now();
                    let (val, x) = solve_tolerant(&obj, spec, &opts)?;
                    let flag = rank_one_flag(&x, config.rank_tol)?;
                    let (cand, lb) =
                        round_to_rank1(&x, &obj, Some(m), config.rounding_trials, &mut rng)?;
                    let mut recovered = None;
                    if flag {
                        rank1[s] += 1;
                        // De-rotate so the homogenization coordinate is 1.
                        let phase = cand[0].conj();
                        let ok = (0..n).all(|i| {
                            let z = snap(cand[i + 1] * phase, Some(m));
                            (z - c[i]).norm() < 1e-6
                        });
                        recovered = Some(ok);
                        if ok {
                            recovered_ct[s] += 1;
                        }
                    }
                    rows.push(TrialRow {
                        trial,
                        label: format!("m={m},sigma={sigma}:{tag}"),
                        upper: val,
                        lower: lb,
                        rank_one: flag,
                        recovered,
                        seconds: t0.elapsed().as_secs_f64(),
                    });
                }
            }
            let t = config.trials as f64;
            agg.insert(
                format!("m={m},sigma={sigma}"),
                serde_json::json!({
                    "rank1_rate_elliptope": rank1[0] as f64 / t,
                    "rank1_rate_triangle": rank1[1] as f64 / t,
                    "recovery_rate_elliptope": recovered_ct[0] as f64 / t,
                    "recovery_rate_triangle": recovered_ct[1] as f64 / t,
                }),
            );
            combo += 1;
        }
    }
    Ok(RunReport {
        rows,
        aggregate: serde_json::json!({
            "experiment": "mimo",
            "n": n,
            "channel_rows": rows_d,
            "trials": config.trials,
            "rates": agg,
        }),
    })
}

fn random_hermitian_gaussian<R: Rng>(n: usize, rng: &mut R) -> HermitianMatrixd {
    let mut diag = vec![0.0; n];
    let mut upper = Vec::new();
    for i in 0..n {
        diag[i] = rng.sample::<f64, _>(StandardNormal);
        for j in (i + 1)..n {
            upper.push((i, j, complex_gaussian(rng)));
        }
    }
    HermitianMatrix::from_upper(n, &diag, &upper).expect("valid Hermitian")
}

pub fn run_angsync(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let n = if config.n == 0 { 10 } else { config.n };
    if n < 6 {
        return Err(Error::Domain("angular synchronization needs n >= 6".into()));
    }
    let sq = (n as f64).sqrt();
    let sigmas: Vec<f64> = if config.sigma.is_empty() {
        vec![2.0 / 3.0 * sq, sq, 4.0 / 3.0 * sq]
    } else {
        config.sigma.clone()
    };
    let fracs: Vec<f64> = if config.p_fracs.is_empty() {
        vec![0.0, 0.5, 1.0]
    } else {
        config.p_fracs.clone()
    };
    let opts = SolveOpts::default();
    let mut rows = Vec::new();
    let mut agg = serde_json::Map::new();
    let mut combo = 0u64;
    for &sigma in &sigmas {
        for &frac in &fracs {
            let mut rank1 = 0usize;
            for trial in 0..config.trials {
                let mut rng = stream_rng(config.seed, combo, trial as u64);
                let w = random_hermitian_gaussian(n, &mut rng);
                let c = HermitianMatrix::ones(n).add(&w.scale(sigma));
                let basis = lift::cp_basis(n, frac, &mut rng)?;
                let t0 = Instant::now();
                let (val, x) = lift::lifted_max(&c, &basis, &opts)?;
                let flag = rank_one_flag(&x, config.rank_tol)?;
                if flag {
                    rank1 += 1;
                }
                let (_, lb) = round_to_rank1(&x, &c, None, config.rounding_trials, &mut rng)?;
                rows.push(TrialRow {
                    trial,
                    label: format!("sigma={sigma:.4},p={frac}"),
                    upper: val,
                    lower: lb,
                    rank_one: flag,
                    recovered: None,
                    seconds: t0.elapsed().as_secs_f64(),
                });
            }
            agg.insert(
                format!("sigma={sigma:.4},p={frac}"),
                serde_json::json!({
                    "rank1_rate": rank1 as f64 / config.trials as f64,
                }),
            );
            combo += 1;
        }
    }
    Ok(RunReport {
        rows,
        aggregate: serde_json::json!({
            "experiment": "angular-synchronization",
            "n": n,
            "trials": config.trials,
            "rates": agg,
        }),
    })
}

/// Dispatch on the configured experiment.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    match config.experiment {
        ExperimentKind::StrengthTable => run_strength_table(config),
        ExperimentKind::RandomObjectives => run_random_objectives(config),
        ExperimentKind::Mimo => run_mimo(config),
        ExperimentKind::AngularSync => run_angsync(config),
    }
}
