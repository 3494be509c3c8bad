//! Numerical checks for the bounds the indexes rely on.
//!
//! Each check runs a Monte Carlo experiment (or walks a built index) and
//! returns a [`VerifyReport`]: pass/fail, counts, and the measured statistics
//! that justify the verdict. Probability estimates carry a three-standard-
//! error additive margin so a passing check is stable across seeds.

use crate::error::{Error, Result};
use crate::genmodel::{self, brute_force_nn, gen_planted, perturb_gaussian, Geometry, NoiseMode,
    NoisyInstance};
use crate::iterpca::IterPcaIndex;
use crate::linalg::{dist_to_subspace, norm, norm_sq, sin_theta, spectral_norm, svd, DenseMatrix,
    Subspace};
use crate::pcatree::{Node, PcaTree};
use crate::seeds;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Slack added to closed-form bounds before comparing measured quantities,
/// absorbing floating-point noise without hiding real violations.
pub const EPS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub check: String,
    pub pass: bool,
    pub trials: usize,
    pub failures: usize,
    pub stats: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl VerifyReport {
    fn new(check: &str, trials: usize) -> Self {
        Self {
            check: check.to_string(),
            pass: true,
            trials,
            failures: 0,
            stats: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn stat(&mut self, key: &str, value: f64) {
        self.stats.insert(key.to_string(), value);
    }
}

/// Constants used by the index-diagnostic checks. The defaults are the
/// theory constants; they are deliberately conservative and pinned here so
/// reports are comparable across runs.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsConfig {
    /// Per-layer subspace-angle bound multiplier: sinθ ≤ c_sin·σ·k^1.5·√(ln n)/ε.
    pub c_sin: f64,
    /// Iteration bound multiplier: iterations ≤ ⌈c_iter·√(d·ln n)⌉.
    pub c_iter: f64,
    /// Direction-heaviness multiplier: ‖P_{U⊥} v‖ ≤ c_gamma·σ·√(ln n)·√k/ε.
    pub c_gamma: f64,
    /// Capture-fraction floor multiplier: fraction ≥ eta_min_factor·√(ln n/d).
    pub eta_min_factor: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            c_sin: 1.0,
            c_iter: 4.0,
            c_gamma: 1.0,
            eta_min_factor: 0.5,
        }
    }
}

fn gaussian_matrix(rows: usize, cols: usize, sigma: f64, rng: &mut impl Rng) -> DenseMatrix {
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
        .collect();
    DenseMatrix::new(rows, cols, data).expect("gaussian draws are finite")
}

/// Right-multiplies `m` by the transpose of `basis` rows: result[i][j] = ⟨m_i, b_j⟩.
fn times_basis_t(m: &DenseMatrix, basis: &DenseMatrix) -> DenseMatrix {
    let mut data = Vec::with_capacity(m.rows() * basis.rows());
    for i in 0..m.rows() {
        for j in 0..basis.rows() {
            data.push(crate::linalg::dot(m.row(i), basis.row(j)));
        }
    }
    DenseMatrix::new(m.rows(), basis.rows(), data).expect("product of finite matrices")
}

/// Perturbation bound on singular subspaces: for Z = X + Y with X of rank k,
/// the top-m right space of Z stays within angle
/// max{‖Y·R_m(Z)‖, ‖L_m(Z)·Yᵀ‖} / (s_m(Z) − s_{k+1}(X)) of the top-k right
/// space of X whenever the denominator is positive.
pub fn check_wedin(
    n: usize,
    d: usize,
    k: usize,
    m: usize,
    sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<VerifyReport> {
    if m == 0 || m > k || k >= d.min(n) {
        return Err(Error::InvalidParam(format!(
            "need 1 <= m <= k < min(n, d); got n={n} d={d} k={k} m={m}"
        )));
    }
    let mut report = VerifyReport::new("wedin", trials);

    let results: Vec<(f64, f64, bool)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeds::rng(seed, t);
            let basis = crate::linalg::top_subspace(&gaussian_matrix(k, d, 1.0, &mut rng), k)
                .expect("random basis has full rank");
            let coords = gaussian_matrix(n, k, 1.0, &mut rng);
            let mut xdata = Vec::with_capacity(n * d);
            for i in 0..n {
                for j in 0..d {
                    let mut acc = 0.0;
                    for l in 0..k {
                        acc += coords.get(i, l) * basis.basis().get(l, j);
                    }
                    xdata.push(acc);
                }
            }
            let x = DenseMatrix::new(n, d, xdata).expect("finite");
            let y = gaussian_matrix(n, d, sigma, &mut rng);
            let mut zdata = Vec::with_capacity(n * d);
            for i in 0..n {
                for (a, b) in x.row(i).iter().zip(y.row(i)) {
                    zdata.push(a + b);
                }
            }
            let z = DenseMatrix::new(n, d, zdata).expect("finite");

            let z_svd = svd(&z).expect("svd");
            let x_svd = svd(&x).expect("svd");
            let gamma = z_svd.singular_values[m - 1] - x_svd.singular_values[k];
            if gamma <= 0.0 {
                return (f64::NAN, f64::NAN, false);
            }
            let rm_z = Subspace::new(d, z_svd.right_vectors.slice_rows(0, m)).expect("orthonormal");
            let rk_x = Subspace::new(d, x_svd.right_vectors.slice_rows(0, k)).expect("orthonormal");
            let lhs = sin_theta(&rm_z, &rk_x).expect("angle");

            let y_rm = times_basis_t(&y, rm_z.basis());
            let zt_svd = svd(&z.transpose()).expect("svd");
            let lm_z = zt_svd.right_vectors.slice_rows(0, m);
            let lm_y = times_basis_t(&lm_z, &y.transpose());
            let num = spectral_norm(&y_rm)
                .expect("norm")
                .max(spectral_norm(&lm_y).expect("norm"));
            let rhs = num / gamma;
            (lhs, rhs, true)
        })
        .collect();

    let mut max_lhs: f64 = 0.0;
    let mut max_ratio: f64 = 0.0;
    let mut skipped = 0usize;
    for (lhs, rhs, ok) in results {
        if !ok {
            skipped += 1;
            continue;
        }
        max_lhs = max_lhs.max(lhs);
        if lhs > rhs + EPS_SLACK {
            report.failures += 1;
        }
        if rhs > 0.0 {
            max_ratio = max_ratio.max(lhs / rhs);
        }
    }
    if skipped > 0 {
        report
            .notes
            .push(format!("{skipped} trials skipped (nonpositive spectral gap)"));
    }
    report.stat("max_sin_theta", max_lhs);
    report.stat("max_ratio_to_bound", max_ratio);
    report.stat("skipped", skipped as f64);
    report.pass = report.failures == 0;
    Ok(report)
}

/// Tail bounds for a chi-square-like sum S = Σ g_i² of d standard normals:
/// Pr[S ≥ d + 2√(dx) + x... parametrized as d(1+2√(x/d))+x] ≤ e^{−x} and
/// Pr[S ≤ d − 2√(dx)] ≤ e^{−x}, checked against Monte Carlo frequencies.
pub fn check_chi_square_tail(d: usize, x: f64, samples: usize, seed: u64) -> Result<VerifyReport> {
    if d == 0 || x <= 0.0 || x.is_nan() || samples == 0 {
        return Err(Error::InvalidParam("need d >= 1, x > 0, samples >= 1".into()));
    }
    let mut report = VerifyReport::new("chi2", samples);
    let df = d as f64;
    let upper = df + 2.0 * (df * x).sqrt() + x;
    let lower = df - 2.0 * (df * x).sqrt();
    let bound = (-x).exp();

    let chunk = 4096usize;
    let chunks = samples.div_ceil(chunk);
    let (hi, lo) = (0..chunks as u64)
        .into_par_iter()
        .map(|c| {
            let mut rng = seeds::rng(seed, c);
            let start = c as usize * chunk;
            let count = chunk.min(samples - start);
            let mut hi = 0usize;
            let mut lo = 0usize;
            for _ in 0..count {
                let mut s = 0.0;
                for _ in 0..d {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    s += g * g;
                }
                if s >= upper {
                    hi += 1;
                }
                if s <= lower {
                    lo += 1;
                }
            }
            (hi, lo)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let p_hi = hi as f64 / samples as f64;
    let p_lo = lo as f64 / samples as f64;
    let margin = |p: f64| 3.0 * (p * (1.0 - p) / samples as f64).sqrt();
    report.stat("p_upper", p_hi);
    report.stat("p_lower", p_lo);
    report.stat("bound", bound);
    report.stat("margin_upper", margin(p_hi));
    report.stat("margin_lower", margin(p_lo));
    if p_hi > bound + margin(p_hi) {
        report.failures += 1;
        report.notes.push("upper tail exceeds e^{-x}".into());
    }
    if p_lo > bound + margin(p_lo) {
        report.failures += 1;
        report.notes.push("lower tail exceeds e^{-x}".into());
    }
    report.pass = report.failures == 0;
    Ok(report)
}

/// Fraction of planted instances whose nearest neighbor survives Gaussian
/// noise. The guarantee applies when σ ≤ 0.05·ε/(d·ln n)^{1/4}; larger σ is
/// reported but not judged.
pub fn check_nn_preserved(
    n: usize,
    d: usize,
    k: usize,
    epsilon: f64,
    sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("nn-preserved", trials);
    let preserved: usize = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let inst = gen_planted(n, d, k, epsilon, Geometry::RandomCluster, seeds::derive(seed, t))
                .expect("valid parameters");
            let noisy =
                perturb_gaussian(&inst, sigma, false, seeds::derive(seed, 0x8000_0000 | t))
                    .expect("valid sigma");
            let (nn, _) = brute_force_nn(&noisy.points, &noisy.query).expect("nonempty");
            usize::from(nn == inst.planted_index)
        })
        .sum();

    let fraction = preserved as f64 / trials as f64;
    let sigma_bound = genmodel::sigma_auto(epsilon, d, n);
    let active = sigma <= sigma_bound * (1.0 + EPS_SLACK);
    report.stat("fraction_preserved", fraction);
    report.stat("sigma", sigma);
    report.stat("sigma_bound", sigma_bound);
    report.stat("bound_active", if active { 1.0 } else { 0.0 });
    if active {
        if fraction < 0.95 {
            report.failures = trials - preserved;
            report.pass = false;
        }
    } else {
        report
            .notes
            .push("sigma above the guarantee regime; informational only".into());
    }
    Ok(report)
}

/// Spectral norm of an n×d Gaussian noise matrix: ‖T‖ ≤ 3σ·max{√n, √d},
/// allowing a 2% violation rate across trials.
pub fn check_spectral_norm_bound(
    n: usize,
    d: usize,
    sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("spectral-norm", trials);
    let bound = 3.0 * sigma * (n as f64).sqrt().max((d as f64).sqrt());
    let norms: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeds::rng(seed, t);
            spectral_norm(&gaussian_matrix(n, d, sigma, &mut rng)).expect("norm")
        })
        .collect();
    let max = norms.iter().cloned().fold(0.0, f64::max);
    report.failures = norms.iter().filter(|&&v| v > bound).count();
    report.stat("bound", bound);
    report.stat("max_norm", max);
    report.stat("mean_norm", norms.iter().sum::<f64>() / trials.max(1) as f64);
    let allowed = (0.02 * trials as f64).floor() as usize;
    report.stat("allowed_failures", allowed as f64);
    report.pass = report.failures <= allowed;
    Ok(report)
}

/// Row-submatrix norms of Gaussian noise: for |A| ≥ d rows,
/// ‖T_A‖ ≤ 3σ·√(|A|·ln n), allowing a 2% violation rate.
pub fn check_submatrix_norm_bound(
    n: usize,
    d: usize,
    sigma: f64,
    trials: usize,
    subsets: usize,
    seed: u64,
) -> Result<VerifyReport> {
    if d > n {
        return Err(Error::InvalidParam(format!(
            "need d <= n for row submatrices; got n={n} d={d}"
        )));
    }
    if subsets == 0 {
        return Err(Error::InvalidParam("subsets must be positive".into()));
    }
    let mut report = VerifyReport::new("submatrix-norm", trials * subsets);
    let lnn = (n as f64).max(2.0).ln();

    // geometric ladder of sizes from d to n
    let sizes: Vec<usize> = (0..subsets)
        .map(|i| {
            let f = i as f64 / (subsets.max(2) - 1) as f64;
            ((d as f64) * ((n as f64) / (d as f64)).powf(f)).round() as usize
        })
        .map(|s| s.clamp(d, n))
        .collect();

    let outcomes: Vec<(f64, bool)> = (0..trials as u64)
        .into_par_iter()
        .flat_map_iter(|t| {
            let mut rng = seeds::rng(seed, t);
            let noise = gaussian_matrix(n, d, sigma, &mut rng);
            let mut ids: Vec<usize> = (0..n).collect();
            let sizes = sizes.clone();
            sizes.into_iter().map(move |size| {
                // partial Fisher–Yates: the first `size` entries become A
                for i in 0..size {
                    let j = rng.gen_range(i..n);
                    ids.swap(i, j);
                }
                let sub = noise.gather(&ids[..size]).expect("ids in range");
                let norm = spectral_norm(&sub).expect("norm");
                let bound = 3.0 * sigma * ((size as f64) * lnn).sqrt();
                (norm / bound, norm > bound)
            })
        })
        .collect();

    let max_ratio = outcomes.iter().map(|(r, _)| *r).fold(0.0, f64::max);
    report.failures = outcomes.iter().filter(|(_, viol)| *viol).count();
    let allowed = (0.02 * (trials * subsets) as f64).floor() as usize;
    report.stat("max_ratio_to_bound", max_ratio);
    report.stat("allowed_failures", allowed as f64);
    report.stat("smallest_subset", sizes[0] as f64);
    report.stat("largest_subset", *sizes.last().unwrap() as f64);
    report.pass = report.failures <= allowed;
    Ok(report)
}

/// Walks a built sampled index against its generating instance and checks
/// the layer diagnostics: subspace angles, captured-norm excess, iteration
/// count, capture fractions, and (for orthogonal noise) per-point projected
/// noise.
pub fn check_iterpca_diagnostics(
    noisy: &NoisyInstance,
    index: &IterPcaIndex,
    cfg: &DiagnosticsConfig,
) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("iterpca-diagnostics", index.layers.len());
    let n = noisy.points.rows() as f64;
    let d = noisy.points.cols() as f64;
    let k = index.params.k as f64;
    let eps = index.params.epsilon;
    let sigma = index.params.sigma;
    let lnn = n.max(2.0).ln();
    let u = &noisy.base.subspace;

    let sin_bound = cfg.c_sin * sigma * k.powf(1.5) * lnn.sqrt() / eps + EPS_SLACK;
    let mut max_sin: f64 = 0.0;
    for (j, layer) in index.layers.iter().enumerate() {
        let s = sin_theta(&layer.subspace, u)?;
        max_sin = max_sin.max(s);
        if s > sin_bound {
            report.failures += 1;
            report.notes.push(format!("layer {j}: sin theta {s:.3e} > {sin_bound:.3e}"));
        }
    }
    report.stat("max_sin_theta", max_sin);
    report.stat("sin_theta_bound", sin_bound);

    // captured points do not gain energy inside the layer subspace:
    // ‖coords(p̃)‖² ≤ ‖P_U(p̃)‖² + dσ² + 0.01ε². Comparing against the
    // in-U component folds any noise inside U into the (worst-case) signal,
    // so the bound is exact Pythagoras for the orthogonal remainder.
    let excess_allow = d * sigma * sigma + 0.01 * eps * eps + EPS_SLACK;
    let mut max_excess = f64::NEG_INFINITY;
    let mut excess_failures = 0usize;
    for layer in &index.layers {
        for &id in &layer.member_ids {
            let row = index.points().row(id);
            let coords = layer.subspace.coords(row);
            let signal = norm_sq(&u.coords(row));
            let excess = norm_sq(&coords) - signal;
            max_excess = max_excess.max(excess);
            if excess > excess_allow {
                excess_failures += 1;
            }
        }
    }
    if excess_failures > 0 {
        report.failures += excess_failures;
        report
            .notes
            .push(format!("{excess_failures} captured points exceed the projected-norm budget"));
    }
    report.stat("max_norm_excess", if max_excess.is_finite() { max_excess } else { 0.0 });
    report.stat("norm_excess_bound", excess_allow);

    let iter_cap = (cfg.c_iter * (d * lnn).sqrt()).ceil() as usize;
    report.stat("iterations", index.stats.iterations as f64);
    report.stat("iteration_cap", iter_cap as f64);
    if index.stats.iterations > iter_cap {
        report.failures += 1;
        report.notes.push("iteration count exceeds the cap".into());
    }

    // capture fraction per capturing iteration (threshold mode only)
    if index.stats.capture_radius_sq.is_some() {
        let floor = cfg.eta_min_factor * (lnn / d).sqrt();
        let mut min_fraction = f64::INFINITY;
        for rec in &index.stats.records {
            if rec.m > 0 && rec.candidates > 0 {
                let f = rec.captured as f64 / rec.candidates as f64;
                min_fraction = min_fraction.min(f);
                if f < floor {
                    report.failures += 1;
                    report
                        .notes
                        .push(format!("capture fraction {f:.4} below floor {floor:.4}"));
                }
            }
        }
        report.stat(
            "min_capture_fraction",
            if min_fraction.is_finite() { min_fraction } else { 1.0 },
        );
        report.stat("capture_fraction_floor", floor);
    }

    // with noise confined to U⊥, projected noise obeys the angle bound
    // pointwise: ‖P_Ũ(t)‖ ≤ ‖t‖·sinθ(Ũ, U)
    if noisy.noise_mode == NoiseMode::OrthogonalGaussian {
        let mut max_ratio_excess: f64 = 0.0;
        let mut pointwise_failures = 0usize;
        for layer in &index.layers {
            let s = sin_theta(&layer.subspace, u)?;
            for &id in &layer.member_ids {
                let t = noisy.noise.row(id);
                let projected = norm(&layer.subspace.coords(t));
                let allowed = norm(t) * s + EPS_SLACK;
                if projected > allowed {
                    pointwise_failures += 1;
                    max_ratio_excess = max_ratio_excess.max(projected - allowed);
                }
            }
        }
        if pointwise_failures > 0 {
            report.failures += pointwise_failures;
            report.notes.push(format!(
                "{pointwise_failures} points exceed the projected-noise angle bound"
            ));
        }
        report.stat("projected_noise_excess", max_ratio_excess);
    }

    report.pass = report.failures == 0;
    Ok(report)
}

/// Walks a built tree against its generating instance: depth, direction
/// heaviness (component outside the signal subspace), and survival of the
/// planted neighbor.
pub fn check_pcatree_diagnostics(
    noisy: &NoisyInstance,
    tree: &PcaTree,
    cfg: &DiagnosticsConfig,
) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("pcatree-diagnostics", tree.nodes.len());
    let n = noisy.points.rows() as f64;
    let k = tree.params.k as f64;
    let eps = tree.params.epsilon;
    let sigma = noisy.sigma;
    let lnn = n.max(2.0).ln();
    let u = &noisy.base.subspace;

    report.stat("depth", tree.stats.depth as f64);
    report.stat("depth_bound", 2.0 * k);
    if tree.stats.depth > 2 * tree.params.k {
        report.failures += 1;
        report.notes.push(format!(
            "depth {} exceeds 2k = {}",
            tree.stats.depth,
            2 * tree.params.k
        ));
    }

    let heavy_bound = cfg.c_gamma * sigma * lnn.sqrt() * k.sqrt() / eps + EPS_SLACK;
    let mut max_heavy: f64 = 0.0;
    let mut heavy_failures = 0usize;
    for node in &tree.nodes {
        if let Node::Internal { direction, .. } = node {
            // directions live in residual coordinates but stay unit vectors
            // of the ambient space, so the distance to U is well-defined
            let h = dist_to_subspace(direction, u)?;
            max_heavy = max_heavy.max(h);
            if h > heavy_bound {
                heavy_failures += 1;
            }
        }
    }
    if heavy_failures > 0 {
        report.failures += heavy_failures;
        report.notes.push(format!(
            "{heavy_failures} split directions lean outside the signal subspace"
        ));
    }
    report.stat("max_heaviness", max_heavy);
    report.stat("heaviness_bound", heavy_bound);

    let planted_removed = tree
        .removed_ids()
        .binary_search(&noisy.base.planted_index)
        .is_ok();
    report.stat("removed_total", tree.stats.removed_total as f64);
    report.stat("planted_removed", if planted_removed { 1.0 } else { 0.0 });
    if planted_removed {
        report.failures += 1;
        report.notes.push("planted neighbor was de-clumped".into());
    }

    report.pass = report.failures == 0;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmodel::perturb_gaussian;
    use crate::iterpca::{build_iterpca, IterPcaParams};
    use crate::pcatree::{build_tree, PcaTreeParams};

    #[test]
    fn wedin_bound_holds_on_random_instances() {
        let report = check_wedin(80, 30, 4, 2, 0.05, 20, 11).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.stats["max_ratio_to_bound"] <= 1.0 + 1e-12);
    }

    #[test]
    fn wedin_with_zero_noise_is_exact() {
        let report = check_wedin(60, 20, 3, 3, 0.0, 5, 7).unwrap();
        assert!(report.pass);
        assert!(report.stats["max_sin_theta"] <= 1e-7, "{report:?}");
    }

    #[test]
    fn chi_square_tails_match_theory() {
        let report = check_chi_square_tail(20, 4.0, 40_000, 3).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.stats["p_upper"] <= report.stats["bound"] + report.stats["margin_upper"]);
    }

    #[test]
    fn chi_square_counts_are_deterministic() {
        let a = check_chi_square_tail(10, 2.0, 10_000, 5).unwrap();
        let b = check_chi_square_tail(10, 2.0, 10_000, 5).unwrap();
        assert_eq!(a.stats["p_upper"], b.stats["p_upper"]);
        assert_eq!(a.stats["p_lower"], b.stats["p_lower"]);
    }

    #[test]
    fn nn_preservation_in_regime_passes() {
        let report = check_nn_preserved(100, 128, 3, 0.3, 0.0, 20, 9).unwrap();
        assert!(report.pass);
        assert_eq!(report.stats["fraction_preserved"], 1.0);
        assert_eq!(report.stats["bound_active"], 1.0);
    }

    #[test]
    fn nn_preservation_out_of_regime_is_informational() {
        let report = check_nn_preserved(50, 32, 2, 0.3, 5.0, 10, 2).unwrap();
        assert!(report.pass, "out-of-regime sigma must not fail the check");
        assert_eq!(report.stats["bound_active"], 0.0);
        assert!(!report.notes.is_empty());
    }

    #[test]
    fn spectral_norm_bound_is_loose_enough() {
        let report = check_spectral_norm_bound(200, 50, 1.0, 10, 4).unwrap();
        assert!(report.pass, "{report:?}");
        // the bound should not be tight: max norm ≈ σ(√n+√d) ≪ 3σ√n
        assert!(report.stats["max_norm"] < report.stats["bound"]);
    }

    #[test]
    fn submatrix_norms_stay_bounded() {
        let report = check_submatrix_norm_bound(300, 20, 1.0, 5, 4, 6).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.stats["max_ratio_to_bound"] <= 1.0);
    }

    #[test]
    fn iterpca_diagnostics_pass_on_conforming_instance() {
        let (n, d, k, eps) = (400, 64, 3, 0.3);
        let sigma = genmodel::sigma_auto(eps, d, n);
        let inst = gen_planted(n, d, k, eps, Geometry::RandomCluster, 31).unwrap();
        let noisy = perturb_gaussian(&inst, sigma, false, 17).unwrap();
        let r = IterPcaParams::default_r(n, d, k);
        let index = build_iterpca(&noisy.points, &IterPcaParams::new(k, eps, sigma, r, 23)).unwrap();
        let report =
            check_iterpca_diagnostics(&noisy, &index, &DiagnosticsConfig::default()).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn iterpca_diagnostics_cover_orthogonal_noise() {
        let (n, d, k, eps) = (300, 48, 3, 0.3);
        let sigma = genmodel::sigma_auto(eps, d, n);
        let inst = gen_planted(n, d, k, eps, Geometry::RandomCluster, 41).unwrap();
        let noisy = perturb_gaussian(&inst, sigma, true, 19).unwrap();
        let r = IterPcaParams::default_r(n, d, k);
        let index = build_iterpca(&noisy.points, &IterPcaParams::new(k, eps, sigma, r, 29)).unwrap();
        let report =
            check_iterpca_diagnostics(&noisy, &index, &DiagnosticsConfig::default()).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.stats.contains_key("projected_noise_excess"));
    }

    #[test]
    fn pcatree_diagnostics_pass_on_conforming_instance() {
        let (n, d, k, eps) = (400, 64, 3, 0.3);
        let lnn = (n as f64).ln();
        let sigma = 0.5
            * (eps / (k as f64 * lnn).sqrt())
                .min(eps / ((k as f64).sqrt() * (d as f64 * lnn).powf(0.25)));
        let inst = gen_planted(n, d, k, eps, Geometry::RandomCluster, 37).unwrap();
        let noisy = perturb_gaussian(&inst, sigma, false, 13).unwrap();
        let tree = build_tree(&noisy.points, &PcaTreeParams::new(k, eps, d)).unwrap();
        let report =
            check_pcatree_diagnostics(&noisy, &tree, &DiagnosticsConfig::default()).unwrap();
        assert!(report.pass, "{report:?}");
    }
}
