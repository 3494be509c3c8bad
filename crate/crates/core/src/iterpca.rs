//! Layered spectral indexes.
//!
//! Both variants peel the point set into layers, each layer owning a
//! low-dimensional subspace and the points close to it; query time scans one
//! candidate per layer (found by exact low-dimensional search) plus a leftover
//! pool, comparing everything by full-dimensional distance at the end.
//!
//! - Warm-up variant (bounded adversarial noise of norm at most ε/16): each
//!   layer is the best-fit k-dimensional subspace of the survivors with
//!   capture radius √2·ε/16. The best-fit property forces at least half of
//!   the survivors inside the radius, so the construction takes O(log n)
//!   layers; anything less than half is a hard model-violation error.
//! - Sampled variant (Gaussian noise): each iteration looks at `r` rows drawn
//!   with replacement from the survivors, keeps the singular directions whose
//!   values clear δ(r) = c·ε·√(r/k) (at most k of them), and captures the
//!   non-sampled survivors within √Ψ of that subspace, Ψ = dσ² + 0.001ε².
//!   Sampled rows are never captured; they join a leftover pool R that query
//!   scans exhaustively.

use crate::error::{Error, Result};
use crate::kdnns::{build_lowdim, query_lowdim, LowDimIndex};
use crate::linalg::{
    dist_sq, dist_to_subspace, project_coords, threshold_count, top_subspace, DenseMatrix,
};
use crate::seeds;
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Warmup,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum CaptureMode {
    /// Capture survivors within √Ψ of the layer subspace.
    Threshold,
    /// Capture the closest ⌈η · candidates⌉ survivors instead.
    Fraction { eta: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct IterPcaParams {
    pub k: usize,
    pub epsilon: f64,
    pub sigma: f64,
    /// Sample size per iteration; the loop stops once survivors fit in r.
    pub r: usize,
    /// Constant in the singular-value threshold δ(r) = c·ε·√(r/k).
    pub c_threshold: f64,
    /// Iteration cap multiplier: at most ⌈c_iter·√(d·ln n)⌉ iterations.
    pub c_iter: f64,
    pub capture: CaptureMode,
    pub seed: u64,
}

pub const DEFAULT_C_THRESHOLD: f64 = 0.001;
pub const DEFAULT_C_ITER: f64 = 4.0;

impl IterPcaParams {
    pub fn new(k: usize, epsilon: f64, sigma: f64, r: usize, seed: u64) -> Self {
        Self {
            k,
            epsilon,
            sigma,
            r,
            c_threshold: DEFAULT_C_THRESHOLD,
            c_iter: DEFAULT_C_ITER,
            capture: CaptureMode::Threshold,
            seed,
        }
    }

    /// Default sample size: max(4k, min(n/2, ⌈k·d·ln n⌉)).
    pub fn default_r(n: usize, d: usize, k: usize) -> usize {
        let growth = (k as f64 * d as f64 * (n as f64).max(2.0).ln()).ceil() as usize;
        (4 * k).max((n / 2).min(growth)).max(1)
    }

    /// Squared capture radius Ψ = d·σ² + 0.001·ε².
    pub fn psi(&self, d: usize) -> f64 {
        d as f64 * self.sigma * self.sigma + 0.001 * self.epsilon * self.epsilon
    }

    /// Singular-value threshold for a sample with `rows` rows.
    pub fn delta(&self, rows: usize) -> f64 {
        self.c_threshold * self.epsilon * (rows as f64 / self.k as f64).sqrt()
    }

    /// Default capture fraction for `CaptureMode::Fraction`: √(ln n / d).
    pub fn default_eta(n: usize, d: usize) -> f64 {
        ((n as f64).max(2.0).ln() / d as f64).sqrt().min(1.0)
    }
}

#[derive(Debug, Clone)]
pub struct Layer {
    pub subspace: crate::linalg::Subspace,
    /// Captured point ids, ascending.
    pub member_ids: Vec<usize>,
    pub(crate) lowdim: LowDimIndex,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IterationRecord {
    pub sampled_distinct: usize,
    pub m_raw: usize,
    pub m: usize,
    pub candidates: usize,
    pub captured: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BuildStats {
    pub iterations: usize,
    /// Iterations where more than k singular values cleared the threshold.
    pub m_cap_hits: usize,
    pub m_zero_iterations: usize,
    /// Squared-radius threshold in use; None in fraction mode.
    pub capture_radius_sq: Option<f64>,
    pub records: Vec<IterationRecord>,
}

#[derive(Debug, Clone)]
pub struct IterPcaIndex {
    pub variant: Variant,
    pub params: IterPcaParams,
    pub layers: Vec<Layer>,
    /// Ids scanned exhaustively at query time (empty for warm-up).
    pub leftover_ids: Vec<usize>,
    pub stats: BuildStats,
    pub(crate) points: DenseMatrix,
}

#[derive(Debug, Clone, Copy)]
pub struct QueryOutcome {
    pub id: usize,
    pub distance: f64,
    /// Full-dimensional distance evaluations performed.
    pub visited: usize,
}

fn check_build_input(points: &DenseMatrix, k: usize, epsilon: f64) -> Result<()> {
    if points.rows() == 0 || points.cols() == 0 {
        return Err(Error::InvalidParam("cannot index an empty point set".into()));
    }
    if k == 0 || k > points.cols() {
        return Err(Error::InvalidParam(format!(
            "k = {k} outside 1..={}",
            points.cols()
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParam(format!(
            "epsilon = {epsilon}, need 0 < epsilon < 1"
        )));
    }
    Ok(())
}

fn make_layer(
    points: &DenseMatrix,
    subspace: crate::linalg::Subspace,
    member_ids: Vec<usize>,
) -> Result<Layer> {
    let members = points.gather(&member_ids)?;
    let coords = project_coords(&members, &subspace)?;
    let lowdim = build_lowdim(&coords, &member_ids)?;
    Ok(Layer {
        subspace,
        member_ids,
        lowdim,
    })
}

/// Builds the bounded-noise index: repeated best-fit k-subspace of the
/// survivors, capture radius √2·ε/16, until no survivors remain.
pub fn build_warmup(points: &DenseMatrix, k: usize, epsilon: f64) -> Result<IterPcaIndex> {
    check_build_input(points, k, epsilon)?;
    let n = points.rows();
    let radius = std::f64::consts::SQRT_2 * epsilon / 16.0;
    let radius_sq = radius * radius;
    let layer_cap = (n as f64).log2().ceil() as usize + 1;

    let mut survivors: Vec<usize> = (0..n).collect();
    let mut layers = Vec::new();
    let mut stats = BuildStats {
        capture_radius_sq: Some(radius_sq),
        ..BuildStats::default()
    };

    while !survivors.is_empty() {
        if layers.len() >= layer_cap {
            return Err(Error::IterationCap {
                iterations: layers.len(),
                cap: layer_cap,
                context: "warm-up layer count; halving argument violated".into(),
            });
        }
        stats.iterations += 1;
        let sub = points.gather(&survivors)?;
        let u = top_subspace(&sub, k)?;
        let mut captured = Vec::new();
        let mut rest = Vec::new();
        for &id in &survivors {
            if dist_to_subspace(points.row(id), &u)? <= radius {
                captured.push(id);
            } else {
                rest.push(id);
            }
        }
        if 2 * captured.len() < survivors.len() {
            return Err(Error::ModelPrecondition(format!(
                "warm-up layer {} captured {} of {} survivors (needs at least half); \
                 noise exceeds the ε/16 bound",
                layers.len(),
                captured.len(),
                survivors.len()
            )));
        }
        stats.records.push(IterationRecord {
            sampled_distinct: 0,
            m_raw: k,
            m: k,
            candidates: survivors.len(),
            captured: captured.len(),
        });
        layers.push(make_layer(points, u, captured)?);
        survivors = rest;
    }

    Ok(IterPcaIndex {
        variant: Variant::Warmup,
        params: IterPcaParams::new(k, epsilon, 0.0, n, 0),
        layers,
        leftover_ids: Vec::new(),
        stats,
        points: points.clone(),
    })
}

/// Builds the sampled index for Gaussian noise.
pub fn build_iterpca(points: &DenseMatrix, params: &IterPcaParams) -> Result<IterPcaIndex> {
    check_build_input(points, params.k, params.epsilon)?;
    if params.r == 0 {
        return Err(Error::InvalidParam("r must be positive".into()));
    }
    if !(params.sigma >= 0.0 && params.sigma.is_finite()) {
        return Err(Error::InvalidParam(format!("sigma = {}", params.sigma)));
    }
    if params.c_threshold <= 0.0 || params.c_iter <= 0.0 {
        return Err(Error::InvalidParam(
            "c_threshold and c_iter must be positive".into(),
        ));
    }
    if let CaptureMode::Fraction { eta } = params.capture {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParam(format!("eta = {eta}, need 0 < eta <= 1")));
        }
    }

    let n = points.rows();
    let d = points.cols();
    let psi = params.psi(d);
    let delta = params.delta(params.r);
    let iter_cap = (params.c_iter * (d as f64 * (n as f64).max(2.0).ln()).sqrt()).ceil() as usize;

    let mut rng = seeds::rng(params.seed, 0);
    let mut survivors: Vec<usize> = (0..n).collect();
    let mut leftover: Vec<usize> = Vec::new();
    let mut layers = Vec::new();
    let mut stats = BuildStats::default();
    if matches!(params.capture, CaptureMode::Threshold) {
        stats.capture_radius_sq = Some(psi);
    }
    let mut consecutive_zero = 0usize;

    while survivors.len() > params.r {
        if stats.iterations >= iter_cap {
            return Err(Error::IterationCap {
                iterations: stats.iterations,
                cap: iter_cap,
                context: format!(
                    "sampled build stalled with {} survivors; parameters do not \
                     match the data",
                    survivors.len()
                ),
            });
        }
        stats.iterations += 1;

        let sample_ids: Vec<usize> = (0..params.r)
            .map(|_| survivors[rng.gen_range(0..survivors.len())])
            .collect();
        let sample = points.gather(&sample_ids)?;
        let distinct: Vec<usize> = sample_ids.iter().copied().collect::<BTreeSet<_>>()
            .into_iter()
            .collect();

        let m_raw = threshold_count(&sample, delta)?;
        let m = m_raw.min(params.k);
        if m_raw > params.k {
            stats.m_cap_hits += 1;
        }

        if m == 0 {
            stats.m_zero_iterations += 1;
            consecutive_zero += 1;
            stats.records.push(IterationRecord {
                sampled_distinct: distinct.len(),
                m_raw,
                m,
                candidates: 0,
                captured: 0,
            });
            retain_excluding(&mut survivors, &distinct);
            leftover.extend(&distinct);
            if consecutive_zero >= 3 {
                break;
            }
            continue;
        }
        consecutive_zero = 0;

        let u = top_subspace(&sample, m)?;
        let candidates: Vec<usize> = diff_sorted(&survivors, &distinct);
        let mut dists: Vec<(f64, usize)> = Vec::with_capacity(candidates.len());
        for &id in &candidates {
            dists.push((dist_to_subspace(points.row(id), &u)?, id));
        }
        let captured: Vec<usize> = match params.capture {
            CaptureMode::Threshold => {
                let radius = psi.sqrt();
                dists
                    .iter()
                    .filter(|(dist, _)| *dist <= radius)
                    .map(|&(_, id)| id)
                    .collect()
            }
            CaptureMode::Fraction { eta } => {
                let take = ((eta * candidates.len() as f64).ceil() as usize)
                    .min(candidates.len());
                let mut by_dist = dists.clone();
                by_dist.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
                let mut ids: Vec<usize> = by_dist[..take].iter().map(|&(_, id)| id).collect();
                ids.sort_unstable();
                ids
            }
        };

        stats.records.push(IterationRecord {
            sampled_distinct: distinct.len(),
            m_raw,
            m,
            candidates: candidates.len(),
            captured: captured.len(),
        });

        retain_excluding(&mut survivors, &distinct);
        leftover.extend(&distinct);
        if captured.is_empty() {
            continue;
        }
        retain_excluding(&mut survivors, &captured);
        layers.push(make_layer(points, u, captured)?);
    }

    leftover.append(&mut survivors);
    leftover.sort_unstable();

    Ok(IterPcaIndex {
        variant: Variant::Full,
        params: params.clone(),
        layers,
        leftover_ids: leftover,
        stats,
        points: points.clone(),
    })
}

/// Removes every element of `remove` (sorted) from `keep` (sorted), in place.
fn retain_excluding(keep: &mut Vec<usize>, remove: &[usize]) {
    keep.retain(|id| remove.binary_search(id).is_err());
}

fn diff_sorted(all: &[usize], remove: &[usize]) -> Vec<usize> {
    all.iter()
        .copied()
        .filter(|id| remove.binary_search(id).is_err())
        .collect()
}

/// One candidate per layer by exact low-dimensional search, the whole
/// leftover pool, then a final comparison by full-dimensional distance; ties
/// go to the smallest id.
pub fn query(index: &IterPcaIndex, q: &[f64]) -> Result<QueryOutcome> {
    if q.len() != index.points.cols() {
        return Err(Error::DimMismatch {
            context: "iterpca query",
            expected: index.points.cols(),
            got: q.len(),
        });
    }
    let mut best: Option<(f64, usize)> = None;
    let mut visited = 0usize;
    let consider = |id: usize, d2: f64, best: &mut Option<(f64, usize)>| {
        let better = match best {
            None => true,
            Some((bd, bi)) => d2 < *bd || (d2 == *bd && id < *bi),
        };
        if better {
            *best = Some((d2, id));
        }
    };
    for layer in &index.layers {
        let qc = layer.subspace.coords(q);
        let (cand, _) = query_lowdim(&layer.lowdim, &qc)?;
        visited += 1;
        consider(cand, dist_sq(index.points.row(cand), q), &mut best);
    }
    for &id in &index.leftover_ids {
        visited += 1;
        consider(id, dist_sq(index.points.row(id), q), &mut best);
    }
    let (d2, id) = best.ok_or(Error::EmptyIndex)?;
    Ok(QueryOutcome {
        id,
        distance: d2.sqrt(),
        visited,
    })
}

impl IterPcaIndex {
    pub fn n(&self) -> usize {
        self.points.rows()
    }

    pub fn d(&self) -> usize {
        self.points.cols()
    }

    pub fn points(&self) -> &DenseMatrix {
        &self.points
    }

    /// ids covered by layers plus leftover; always a permutation of 0..n.
    pub fn coverage(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .layers
            .iter()
            .flat_map(|l| l.member_ids.iter().copied())
            .chain(self.leftover_ids.iter().copied())
            .collect();
        ids.sort_unstable();
        ids
    }
}
