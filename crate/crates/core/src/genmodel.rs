//! Planted-instance generator and noise channels.
//!
//! A clean instance consists of `n` points inside a random `k`-dimensional
//! subspace U of ℝ^d with every norm in [1, d/2], plus a query q ∈ U that has
//! one planted neighbor within distance 1 while every other point sits at
//! distance at least `1 + ε` (with a strict extra margin, so the gap survives
//! floating point). Noise is then added per point: isotropic Gaussian with
//! per-coordinate deviation σ (optionally projected onto U⊥, which matches
//! the analysis convention that only the orthogonal noise component matters),
//! or one of two bounded adversaries that displace every point by exactly
//! ε/16.

use crate::error::{Error, Result};
use crate::linalg::{norm, top_subspace, DenseMatrix, Subspace};
use crate::seeds;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Extra separation enforced beyond `1 + ε` for non-planted points.
pub const GAP_MARGIN: f64 = 1e-3;

/// Clean-point norms are capped at `min(d/2, NORM_CAP)` to keep desk-scale
/// instances well conditioned; d/2 is the hard model bound.
const NORM_CAP: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    RandomCluster,
    SparseDirectionAdversarial,
}

impl std::fmt::Display for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Geometry::RandomCluster => "random-cluster",
            Geometry::SparseDirectionAdversarial => "sparse-direction-adversarial",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    FullGaussian,
    OrthogonalGaussian,
    AdversarialTowardQuery,
    AdversarialRandomDirection,
}

impl std::fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseMode::FullGaussian => "full-gaussian",
            NoiseMode::OrthogonalGaussian => "orthogonal-gaussian",
            NoiseMode::AdversarialTowardQuery => "adversarial-toward-query",
            NoiseMode::AdversarialRandomDirection => "adversarial-random-direction",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adversary {
    /// Moves every non-planted point toward q, the planted point away from
    /// q, and q itself away from the planted point.
    TowardQuery,
    /// Displaces every point (and q) along an independent random direction.
    RandomDirection,
}

/// Worst-case instance before noise. For `SparseDirectionAdversarial`
/// geometry the coordinate axes map to basis rows in order: `basis_row(0)`
/// spans the dense line, rows `1..k` span the sparse directions.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub geometry: Geometry,
    pub subspace: Subspace,
    /// n × d clean points, rows inside `subspace`.
    pub points: DenseMatrix,
    pub query: Vec<f64>,
    pub planted_index: usize,
}

/// A planted instance after one noise channel has been applied.
#[derive(Debug, Clone)]
pub struct NoisyInstance {
    pub base: PlantedInstance,
    pub sigma: f64,
    pub noise_mode: NoiseMode,
    pub noise_seed: u64,
    /// n × d noisy points P̃.
    pub points: DenseMatrix,
    /// Noisy query q̃.
    pub query: Vec<f64>,
    /// n × d noise rows, `points = base.points + noise`.
    pub noise: DenseMatrix,
    pub query_noise: Vec<f64>,
}

/// The σ at which Gaussian noise is small enough that the noisy nearest
/// neighbor provably stays the planted one: `0.05 · ε / (d · ln n)^{1/4}`.
pub fn sigma_auto(epsilon: f64, d: usize, n: usize) -> f64 {
    0.05 * epsilon / ((d as f64) * (n as f64).ln()).powf(0.25)
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-8 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn uniform_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Places a point on the ray from q through the origin and beyond, at
/// distance `t` from q chosen so the point lands inside the norm annulus
/// [1, rcap] and at least `1 + ε + GAP_MARGIN` away from q.
fn far_ray_point(rng: &mut ChaCha8Rng, q: &[f64], epsilon: f64, rcap: f64) -> Vec<f64> {
    let rho = norm(q);
    let lo = (1.0 + epsilon + GAP_MARGIN).max(rho + 1.0);
    let hi = rho + rcap;
    let t = uniform_in(rng, lo, hi.max(lo));
    q.iter().map(|&c| c - t * c / rho).collect()
}

/// Maps subspace coordinates to the ambient point Σ c_j · b_j.
fn embed(s: &Subspace, c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; s.ambient_dim()];
    for (j, &cj) in c.iter().enumerate() {
        for (o, b) in out.iter_mut().zip(s.basis_row(j)) {
            *o += cj * b;
        }
    }
    out
}

fn check_params(n: usize, d: usize, k: usize, epsilon: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParam(format!("n = {n}, need n >= 2")));
    }
    if k == 0 || k >= d {
        return Err(Error::InvalidParam(format!("k = {k}, need 1 <= k < d = {d}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParam(format!("epsilon = {epsilon}, need 0 < epsilon < 1")));
    }
    Ok(())
}

/// Generates a clean planted instance. Deterministic per seed.
pub fn gen_planted(
    n: usize,
    d: usize,
    k: usize,
    epsilon: f64,
    geometry: Geometry,
    seed: u64,
) -> Result<PlantedInstance> {
    check_params(n, d, k, epsilon)?;
    let rcap = ((d as f64) / 2.0).min(NORM_CAP);

    // A random k-dimensional subspace: orthonormalized Gaussian directions.
    let mut rng = seeds::rng(seed, 0);
    let raw: Vec<f64> = (0..k * d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let subspace = top_subspace(&DenseMatrix::new(k, d, raw)?, k)?;

    let (coords, q_coords, planted_index) = match geometry {
        Geometry::RandomCluster => cluster_coords(n, k, epsilon, rcap, seed),
        Geometry::SparseDirectionAdversarial => {
            if k < 2 {
                return Err(Error::InvalidParam(
                    "sparse-direction geometry needs k >= 2".into(),
                ));
            }
            sparse_coords(n, k, epsilon, rcap, seed)
        }
    };

    let rows: Vec<Vec<f64>> = coords.iter().map(|c| embed(&subspace, c)).collect();
    let query = embed(&subspace, &q_coords);
    let inst = PlantedInstance {
        n,
        d,
        k,
        epsilon,
        seed,
        geometry,
        subspace,
        points: DenseMatrix::from_rows(&rows)?,
        query,
        planted_index,
    };
    validate_instance(&inst, &coords, &q_coords)?;
    Ok(inst)
}

/// Cluster skeleton in subspace coordinates: annulus draws around a planted
/// point, with conflicting draws pushed to the far ray.
fn cluster_coords(
    n: usize,
    k: usize,
    epsilon: f64,
    rcap: f64,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<f64>, usize) {
    let mut rng = seeds::rng(seed, 1);
    let planted_index = rng.gen_range(0..n);

    let dir = random_unit(&mut rng, k);
    let r_star = uniform_in(&mut rng, 1.0, rcap.min(3.0));
    let planted: Vec<f64> = dir.iter().map(|&x| r_star * x).collect();

    let mut w = random_unit(&mut rng, k);
    if w.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
        for x in w.iter_mut() {
            *x = -*x;
        }
    }
    let h = uniform_in(&mut rng, 0.2, 0.95);
    let q: Vec<f64> = planted.iter().zip(&w).map(|(p, wi)| p + h * wi).collect();

    let min_gap = 1.0 + epsilon + GAP_MARGIN;
    let mut coords = Vec::with_capacity(n);
    for i in 0..n {
        if i == planted_index {
            coords.push(planted.clone());
            continue;
        }
        let u = random_unit(&mut rng, k);
        let r = uniform_in(&mut rng, 1.0, rcap);
        let x: Vec<f64> = u.iter().map(|&v| r * v).collect();
        let dq = x.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        coords.push(if dq < min_gap {
            far_ray_point(&mut rng, &q, epsilon, rcap)
        } else {
            x
        });
    }
    (coords, q, planted_index)
}

/// Mass imbalance skeleton: most points spread along coordinate axis 0, a
/// √n-sized minority (including the planted point) off in the remaining
/// axes, so a single top principal direction locks onto the dense line and
/// misses the planted structure.
fn sparse_coords(
    n: usize,
    k: usize,
    epsilon: f64,
    rcap: f64,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<f64>, usize) {
    let mut rng = seeds::rng(seed, 1);
    let n_sparse = ((n as f64).sqrt().ceil() as usize).clamp(1, n - 1);
    let n_dense = n - n_sparse;

    let sparse_unit = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let u = random_unit(rng, k - 1);
        let mut c = vec![0.0; k];
        c[1..].copy_from_slice(&u);
        c
    };

    let r_lo = rcap.min(2.0 + epsilon);
    let planted_dir = sparse_unit(&mut rng);
    let r_star = uniform_in(&mut rng, r_lo, rcap);
    let planted: Vec<f64> = planted_dir.iter().map(|&x| r_star * x).collect();

    let h = uniform_in(&mut rng, 0.3, 0.9);
    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let mut q = planted.clone();
    q[0] += sign * h;

    let min_gap = 1.0 + epsilon + GAP_MARGIN;
    let mut coords = Vec::with_capacity(n);
    for _ in 0..n_dense {
        let s_mag = uniform_in(&mut rng, 1.0, (rcap - 0.02).max(1.0));
        let s = if rng.gen::<bool>() { s_mag } else { -s_mag };
        let jitter = sparse_unit(&mut rng);
        let j_mag = 0.01 * rng.gen::<f64>();
        let mut c: Vec<f64> = jitter.iter().map(|&x| j_mag * x).collect();
        c[0] = s;
        coords.push(c);
    }
    for _ in 0..n_sparse - 1 {
        let u = sparse_unit(&mut rng);
        let r = uniform_in(&mut rng, r_lo.min(rcap), rcap);
        coords.push(u.iter().map(|&x| r * x).collect());
    }
    coords.push(planted.clone());

    // Deterministic shuffle so the sparse block is not positionally encoded.
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut shuffled = vec![Vec::new(); n];
    let mut planted_index = 0;
    for (dst, &src) in order.iter().enumerate() {
        if src == n - 1 {
            planted_index = dst;
        }
        shuffled[dst] = std::mem::take(&mut coords[src]);
    }

    for (i, c) in shuffled.iter_mut().enumerate() {
        if i == planted_index {
            continue;
        }
        let dq = c.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if dq < min_gap {
            *c = far_ray_point(&mut rng, &q, epsilon, rcap);
        }
    }
    (shuffled, q, planted_index)
}

fn validate_instance(
    inst: &PlantedInstance,
    coords: &[Vec<f64>],
    q_coords: &[f64],
) -> Result<()> {
    let rmax = (inst.d as f64) / 2.0;
    for (i, c) in coords.iter().enumerate() {
        let nn = norm(c);
        if !(1.0 - 1e-9..=rmax + 1e-9).contains(&nn) {
            return Err(Error::ModelPrecondition(format!(
                "generated point {i} has norm {nn}, outside [1, d/2]"
            )));
        }
        let dq = c
            .iter()
            .zip(q_coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if i == inst.planted_index {
            if dq > 1.0 {
                return Err(Error::ModelPrecondition(format!(
                    "planted point at distance {dq} > 1 from query"
                )));
            }
        } else if dq < 1.0 + inst.epsilon + GAP_MARGIN * 0.5 {
            return Err(Error::ModelPrecondition(format!(
                "point {i} at distance {dq} inside the forbidden gap"
            )));
        }
    }
    Ok(())
}

/// Adds i.i.d. Gaussian noise with per-coordinate deviation `sigma`; with
/// `orthogonal` set, each noise vector is first projected onto U⊥.
pub fn perturb_gaussian(
    base: &PlantedInstance,
    sigma: f64,
    orthogonal: bool,
    seed: u64,
) -> Result<NoisyInstance> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidParam(format!("sigma = {sigma}, need sigma >= 0")));
    }
    let (n, d) = (base.n, base.d);
    let mut rng = seeds::rng(seed, 0);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut t: Vec<f64> =
            (0..d).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect();
        if orthogonal {
            t = base.subspace.residual(&t);
        }
        t
    };
    let mut noise_rows = Vec::with_capacity(n);
    for _ in 0..n {
        noise_rows.push(draw(&mut rng));
    }
    let mut rng_q = seeds::rng(seed, 1);
    let t_q = draw(&mut rng_q);

    finish_noisy(
        base,
        sigma,
        if orthogonal {
            NoiseMode::OrthogonalGaussian
        } else {
            NoiseMode::FullGaussian
        },
        seed,
        noise_rows,
        t_q,
    )
}

/// Bounded adversarial displacement of norm exactly ε/16 per point and for
/// the query.
pub fn perturb_adversarial(
    base: &PlantedInstance,
    adversary: Adversary,
    seed: u64,
) -> Result<NoisyInstance> {
    let alpha = base.epsilon / 16.0;
    let (n, d) = (base.n, base.d);
    let mut rng = seeds::rng(seed, 0);

    let toward = |from: &[f64], to: &[f64]| -> Vec<f64> {
        let diff: Vec<f64> = to.iter().zip(from).map(|(a, b)| a - b).collect();
        let nn = norm(&diff);
        if nn < 1e-12 {
            base.subspace.basis_row(0).to_vec()
        } else {
            diff.into_iter().map(|x| x / nn).collect()
        }
    };

    let mut noise_rows = Vec::with_capacity(n);
    for i in 0..n {
        let p = base.points.row(i);
        let dir = match adversary {
            Adversary::TowardQuery => {
                let mut u = toward(p, &base.query);
                if i == base.planted_index {
                    for x in u.iter_mut() {
                        *x = -*x;
                    }
                }
                u
            }
            Adversary::RandomDirection => random_unit(&mut rng, d),
        };
        noise_rows.push(dir.into_iter().map(|x| alpha * x).collect());
    }
    let t_q: Vec<f64> = match adversary {
        Adversary::TowardQuery => {
            toward(base.points.row(base.planted_index), &base.query)
                .into_iter()
                .map(|x| alpha * x)
                .collect()
        }
        Adversary::RandomDirection => {
            random_unit(&mut rng, d).into_iter().map(|x| alpha * x).collect()
        }
    };
    let mode = match adversary {
        Adversary::TowardQuery => NoiseMode::AdversarialTowardQuery,
        Adversary::RandomDirection => NoiseMode::AdversarialRandomDirection,
    };
    finish_noisy(base, 0.0, mode, seed, noise_rows, t_q)
}

fn finish_noisy(
    base: &PlantedInstance,
    sigma: f64,
    noise_mode: NoiseMode,
    noise_seed: u64,
    noise_rows: Vec<Vec<f64>>,
    t_q: Vec<f64>,
) -> Result<NoisyInstance> {
    let (n, d) = (base.n, base.d);
    let noise = DenseMatrix::from_rows(&noise_rows)?;
    let mut data = Vec::with_capacity(n * d);
    for i in 0..n {
        data.extend(base.points.row(i).iter().zip(noise.row(i)).map(|(p, t)| p + t));
    }
    let points = DenseMatrix::new(n, d, data)?;
    let norm_bound = (d as f64).powf(1.5);
    for i in 0..n {
        let nn = norm(points.row(i));
        if nn > norm_bound {
            return Err(Error::ModelPrecondition(format!(
                "noisy point {i} has norm {nn} > d^(3/2) = {norm_bound}; noise level \
                 incompatible with the model"
            )));
        }
    }
    let query: Vec<f64> = base.query.iter().zip(&t_q).map(|(q, t)| q + t).collect();
    Ok(NoisyInstance {
        base: base.clone(),
        sigma,
        noise_mode,
        noise_seed,
        points,
        query,
        noise,
        query_noise: t_q,
    })
}

impl NoisyInstance {
    /// Fresh noisy copies of the clean query under this instance's noise
    /// mode, for multi-query experiments against the same index.
    pub fn extra_query(&self, stream: u64) -> Result<Vec<f64>> {
        let seed = seeds::derive(self.noise_seed, 0x71_0000 + stream);
        let d = self.base.d;
        let t: Vec<f64> = match self.noise_mode {
            NoiseMode::FullGaussian | NoiseMode::OrthogonalGaussian => {
                let mut rng = seeds::rng(seed, 2);
                let mut t: Vec<f64> = (0..d)
                    .map(|_| self.sigma * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                if self.noise_mode == NoiseMode::OrthogonalGaussian {
                    t = self.base.subspace.residual(&t);
                }
                t
            }
            NoiseMode::AdversarialTowardQuery | NoiseMode::AdversarialRandomDirection => {
                let mut rng = seeds::rng(seed, 2);
                let alpha = self.base.epsilon / 16.0;
                random_unit(&mut rng, d).into_iter().map(|x| alpha * x).collect()
            }
        };
        Ok(self.base.query.iter().zip(&t).map(|(q, ti)| q + ti).collect())
    }
}

/// Index and distance of the exact nearest row of `points` to `q`, ties
/// broken toward the smallest index.
pub fn brute_force_nn(points: &DenseMatrix, q: &[f64]) -> Result<(usize, f64)> {
    if points.rows() == 0 {
        return Err(Error::EmptyIndex);
    }
    if points.cols() != q.len() {
        return Err(Error::DimMismatch {
            context: "brute_force_nn",
            expected: points.cols(),
            got: q.len(),
        });
    }
    let mut best = (0usize, f64::INFINITY);
    for i in 0..points.rows() {
        let d2: f64 = points
            .row(i)
            .iter()
            .zip(q)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if d2 < best.1 {
            best = (i, d2);
        }
    }
    Ok((best.0, best.1.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dist_to_subspace, norm_sq, sin_theta, spectral_norm, Subspace};

    fn gap_scan(inst: &PlantedInstance) {
        let q = &inst.query;
        for i in 0..inst.n {
            let d: f64 = inst
                .points
                .row(i)
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if i == inst.planted_index {
                assert!(d <= 1.0, "planted at {d}");
            } else {
                assert!(d >= 1.0 + inst.epsilon + 1e-6, "point {i} at {d}");
            }
        }
    }

    #[test]
    fn cluster_instances_satisfy_all_invariants() {
        for seed in 0..20 {
            let inst = gen_planted(40, 10, 3, 0.3, Geometry::RandomCluster, seed).unwrap();
            gap_scan(&inst);
            for i in 0..inst.n {
                let nn = norm(inst.points.row(i));
                assert!((1.0 - 1e-9..=5.0 + 1e-9).contains(&nn), "norm {nn}");
                assert!(dist_to_subspace(inst.points.row(i), &inst.subspace).unwrap() <= 1e-9);
            }
            assert!(dist_to_subspace(&inst.query, &inst.subspace).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn tiny_instance_cases() {
        let inst = gen_planted(2, 3, 1, 0.5, Geometry::RandomCluster, 7).unwrap();
        gap_scan(&inst);
        // d = 2 pins every norm to exactly 1
        let inst = gen_planted(5, 2, 1, 0.25, Geometry::RandomCluster, 3).unwrap();
        gap_scan(&inst);
        for i in 0..inst.n {
            assert!((norm(inst.points.row(i)) - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn param_validation() {
        assert!(gen_planted(1, 4, 2, 0.3, Geometry::RandomCluster, 0).is_err());
        assert!(gen_planted(10, 4, 0, 0.3, Geometry::RandomCluster, 0).is_err());
        assert!(gen_planted(10, 4, 4, 0.3, Geometry::RandomCluster, 0).is_err());
        assert!(gen_planted(10, 4, 2, 0.0, Geometry::RandomCluster, 0).is_err());
        assert!(gen_planted(10, 4, 2, 1.0, Geometry::RandomCluster, 0).is_err());
        assert!(gen_planted(10, 4, 1, 0.3, Geometry::SparseDirectionAdversarial, 0).is_err());
    }

    #[test]
    fn sparse_geometry_defeats_single_direction_pca() {
        for seed in 0..5 {
            let inst =
                gen_planted(400, 12, 2, 0.3, Geometry::SparseDirectionAdversarial, seed).unwrap();
            gap_scan(&inst);
            let top1 = top_subspace(&inst.points, 1).unwrap();
            let sparse_dir = Subspace::new(
                12,
                DenseMatrix::from_rows(&[inst.subspace.basis_row(1).to_vec()]).unwrap(),
            )
            .unwrap();
            let angle = sin_theta(&top1, &sparse_dir).unwrap();
            assert!(angle >= 0.5, "seed {seed}: sin theta only {angle}");
        }
    }

    #[test]
    fn gaussian_noise_has_expected_energy() {
        let inst = gen_planted(500, 1000, 2, 0.3, Geometry::RandomCluster, 11).unwrap();
        let noisy = perturb_gaussian(&inst, 0.1, false, 99).unwrap();
        let mean_sq: f64 = (0..noisy.base.n)
            .map(|i| norm_sq(noisy.noise.row(i)))
            .sum::<f64>()
            / noisy.base.n as f64;
        let expect = 0.1 * 0.1 * 1000.0;
        assert!(
            (mean_sq - expect).abs() <= 0.05 * expect,
            "mean noise energy {mean_sq} vs {expect}"
        );
    }

    #[test]
    fn orthogonal_noise_lies_in_u_perp() {
        let inst = gen_planted(50, 30, 4, 0.3, Geometry::RandomCluster, 5).unwrap();
        let noisy = perturb_gaussian(&inst, 0.2, true, 17).unwrap();
        for i in 0..inst.n {
            let leak = norm(&inst.subspace.coords(noisy.noise.row(i)));
            assert!(leak <= 1e-9, "row {i} leaks {leak} into U");
        }
        let q_leak = norm(&inst.subspace.coords(&noisy.query_noise));
        assert!(q_leak <= 1e-9);
    }

    #[test]
    fn zero_sigma_is_bitwise_identity() {
        let inst = gen_planted(30, 16, 3, 0.4, Geometry::RandomCluster, 21).unwrap();
        let noisy = perturb_gaussian(&inst, 0.0, false, 4).unwrap();
        assert_eq!(noisy.points.data(), inst.points.data());
        assert_eq!(noisy.query, inst.query);
    }

    #[test]
    fn adversaries_use_exact_norm_and_keep_planted_nearest() {
        let inst = gen_planted(60, 20, 3, 0.4, Geometry::RandomCluster, 2).unwrap();
        let alpha = inst.epsilon / 16.0;
        for adv in [Adversary::TowardQuery, Adversary::RandomDirection] {
            let noisy = perturb_adversarial(&inst, adv, 13).unwrap();
            for i in 0..inst.n {
                assert!((norm(noisy.noise.row(i)) - alpha).abs() <= 1e-12);
            }
            assert!((norm(&noisy.query_noise) - alpha).abs() <= 1e-12);
            let (nn, _) = brute_force_nn(&noisy.points, &noisy.query).unwrap();
            assert_eq!(nn, inst.planted_index, "{adv:?} broke the planted neighbor");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_planted(25, 8, 2, 0.3, Geometry::RandomCluster, 123).unwrap();
        let b = gen_planted(25, 8, 2, 0.3, Geometry::RandomCluster, 123).unwrap();
        assert_eq!(a.points.data(), b.points.data());
        assert_eq!(a.query, b.query);
        assert_eq!(a.planted_index, b.planted_index);
        let c = gen_planted(25, 8, 2, 0.3, Geometry::RandomCluster, 124).unwrap();
        assert_ne!(a.points.data(), c.points.data());

        let na = perturb_gaussian(&a, 0.05, false, 9).unwrap();
        let nb = perturb_gaussian(&b, 0.05, false, 9).unwrap();
        assert_eq!(na.points.data(), nb.points.data());
        assert_eq!(na.query, nb.query);
    }

    #[test]
    fn extra_queries_vary_but_reproduce() {
        let inst = gen_planted(30, 12, 2, 0.3, Geometry::RandomCluster, 3).unwrap();
        let noisy = perturb_gaussian(&inst, 0.02, false, 8).unwrap();
        let q1 = noisy.extra_query(0).unwrap();
        let q2 = noisy.extra_query(1).unwrap();
        assert_ne!(q1, q2);
        assert_eq!(q1, noisy.extra_query(0).unwrap());
    }

    #[test]
    fn sigma_auto_formula() {
        let got = sigma_auto(0.3, 512, 500);
        let expect = 0.05 * 0.3 / (512.0 * (500.0_f64).ln()).powf(0.25);
        assert!((got - expect).abs() < 1e-15);
    }

    #[test]
    fn noise_norm_cap_guards_absurd_sigma() {
        let inst = gen_planted(10, 4, 2, 0.3, Geometry::RandomCluster, 1).unwrap();
        assert!(perturb_gaussian(&inst, 100.0, false, 0).is_err());
    }

    #[test]
    fn spectral_gap_between_geometries() {
        // random-cluster spreads signal across all k directions; its k-th
        // singular value is well above the (k+1)-th, which is zero.
        let inst = gen_planted(200, 10, 3, 0.3, Geometry::RandomCluster, 9).unwrap();
        let s = crate::linalg::svd(&inst.points).unwrap().singular_values;
        assert!(s[2] > 1.0);
        assert!(s[3] <= 1e-8 * spectral_norm(&inst.points).unwrap());
    }
}
