//! Statistical certifiers built on the metric engine: distortion
//! envelopes, uniformity and cone constants, conformal map distortion
//! checks, and the divergence table for the capped-comb complement.

use std::ops::RangeInclusive;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::domains::{self, CombLayout, CombParams, DomainsError};
use crate::geometry::{Domain, Point, PointClass, PolyPath};
use crate::metrics::{j_metric, MetricEngine, MetricError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("map is singular: a*d - b*c vanishes")]
    SingularMap,
    #[error("bound violated: {0}")]
    BoundViolation(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Domains(#[from] DomainsError),
}

/// Pair-sampling strategies for the statistical certifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// Both points uniform over the interior.
    Uniform,
    /// First point uniform; second placed between it and its nearest
    /// boundary point, with clearance scaled by a Beta(1/2, 1) draw whose
    /// square-root density concentrates near the boundary. Uniform pairs
    /// almost never probe the near-boundary regime where distortion
    /// suprema live.
    BoundaryBiased,
}

/// Independent, reproducible generator for sample `index`: parallel
/// evaluation order cannot change what is drawn.
fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn sample_interior(d: &Domain, rng: &mut ChaCha8Rng) -> Option<Point> {
    let b = d.bbox();
    for _ in 0..10_000 {
        let p = Point::new(rng.gen_range(b.x0..=b.x1), rng.gen_range(b.y0..=b.y1));
        if d.truncation().admits(p) && d.classify(p) == PointClass::Inside {
            return Some(p);
        }
    }
    None
}

fn push_to_boundary(d: &Domain, x: Point, rng: &mut ChaCha8Rng) -> Option<Point> {
    let (delta, nb) = d.nearest_boundary(x).ok()?;
    let dir = x.sub(nb);
    let n = dir.norm();
    if n <= 0.0 {
        return None;
    }
    let beta: f64 = Beta::new(0.5, 1.0).expect("valid shape").sample(rng);
    let beta = beta.clamp(1e-9, 1.0);
    let y = nb.add(dir.scale(beta * delta / n));
    if d.truncation().admits(y) && d.classify(y) == PointClass::Inside {
        Some(y)
    } else {
        None
    }
}

fn sample_pair(d: &Domain, sampler: Sampler, rng: &mut ChaCha8Rng) -> Option<(Point, Point)> {
    let x = sample_interior(d, rng)?;
    let y = match sampler {
        Sampler::Uniform => sample_interior(d, rng)?,
        Sampler::BoundaryBiased => push_to_boundary(d, x, rng)?,
    };
    Some((x, y))
}

/// Cumulative sup of `value` over log-spaced `key` bins; monotone by
/// construction. Degenerate inputs produce the single bin (0, 0).
fn monotone_envelope(points: &[(f64, f64)], n_bins: usize) -> Vec<(f64, f64)> {
    let key_max = points.iter().map(|p| p.0).fold(0.0f64, f64::max);
    if points.is_empty() || key_max <= 0.0 {
        return vec![(0.0, 0.0)];
    }
    let key_min = points
        .iter()
        .map(|p| p.0)
        .filter(|k| *k > 0.0)
        .fold(f64::INFINITY, f64::min)
        .min(key_max / 2.0);
    let n = n_bins.max(2);
    let mut edges: Vec<f64> = (0..n)
        .map(|i| key_min * (key_max / key_min).powf(i as f64 / (n - 1) as f64))
        .collect();
    edges[n - 1] = key_max;
    edges
        .into_iter()
        .map(|edge| {
            let sup = points
                .iter()
                .filter(|(k, _)| *k <= edge)
                .map(|(_, v)| *v)
                .fold(0.0f64, f64::max);
            (edge, sup)
        })
        .collect()
}

/// Empirical distortion envelope: for each distance-ratio bin edge, the
/// largest quasihyperbolic distance seen at or below that ratio.
#[derive(Debug, Clone, Serialize)]
pub struct PhiProfile {
    pub bins: Vec<PhiBin>,
    pub sample_count: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhiBin {
    pub ratio_edge: f64,
    pub sup_k: f64,
}

impl PhiProfile {
    pub fn from_points(points: &[(f64, f64)], n_bins: usize) -> PhiProfile {
        let bins = monotone_envelope(points, n_bins)
            .into_iter()
            .map(|(ratio_edge, sup_k)| PhiBin { ratio_edge, sup_k })
            .collect();
        PhiProfile { bins, sample_count: points.len() }
    }

    /// Envelope value at ratio `r`: the sup of the first bin whose edge
    /// reaches `r`, clamped to the final bin beyond the sampled range.
    pub fn eval(&self, r: f64) -> f64 {
        for b in &self.bins {
            if r <= b.ratio_edge {
                return b.sup_k;
            }
        }
        self.bins.last().map(|b| b.sup_k).unwrap_or(0.0)
    }

    pub fn is_monotone(&self) -> bool {
        self.bins.windows(2).all(|w| w[0].ratio_edge < w[1].ratio_edge && w[0].sup_k <= w[1].sup_k)
    }
}

/// Sample `n_samples` pairs, evaluate both metrics, and fold the results
/// into a monotone envelope of distance vs distance ratio. Pairs that
/// fail to sample or evaluate are skipped; `sample_count` reports the
/// pairs that contributed.
pub fn phi_profile(
    engine: &MetricEngine,
    n_samples: usize,
    sampler: Sampler,
    seed: u64,
) -> Result<PhiProfile, AnalysisError> {
    if n_samples == 0 {
        return Err(AnalysisError::InvalidParams("n_samples must be at least 1".into()));
    }
    let points: Vec<(f64, f64)> = (0..n_samples)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let (x, y) = sample_pair(engine.domain(), sampler, &mut rng)?;
            let s = engine.k(x, y).ok()?;
            Some((s.ratio, s.k_est))
        })
        .collect();
    Ok(PhiProfile::from_points(&points, 48))
}

/// Empirical uniformity constant: the largest observed ratio of
/// quasihyperbolic to distance-ratio metric, with its witness pair.
#[derive(Debug, Clone, Serialize)]
pub struct UniformityReport {
    pub sup_ratio_kj: f64,
    pub witness: Option<(Point, Point)>,
    /// Valid evaluated pairs (skipped draws are not counted).
    pub samples: usize,
    /// True when mirror probes show the ratio growing as the probed
    /// clearance shrinks: the signature of an unbounded constant.
    pub unbounded_trend: bool,
}

/// Estimate the uniformity constant by boundary-biased sampling plus
/// deterministic mirror probes.
///
/// A mirror probe reflects a sample across its nearest boundary point.
/// The reflection lands inside the domain only when the boundary is a
/// thin wall with interior on both sides, which is exactly the
/// configuration where the two metrics can decouple; on domains with
/// fat complements the probes vanish. The trend flag compares the ratio
/// sup of the near-boundary probe half against the far half.
pub fn uniformity_constant(
    engine: &MetricEngine,
    n_samples: usize,
    seed: u64,
) -> Result<UniformityReport, AnalysisError> {
    if n_samples == 0 {
        return Err(AnalysisError::InvalidParams("n_samples must be at least 1".into()));
    }
    let d = engine.domain().as_ref();

    // Alternate the samplers: boundary-biased pairs are radially aligned
    // (k/j near 1 in uniform domains), so uniform pairs with genuine
    // separation are needed to probe the supremum across the domain.
    let regular: Vec<(Point, Point, f64)> = (0..n_samples)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let sampler =
                if i % 2 == 0 { Sampler::Uniform } else { Sampler::BoundaryBiased };
            let (x, y) = sample_pair(d, sampler, &mut rng)?;
            let s = engine.k(x, y).ok()?;
            if s.j < 1e-9 {
                return None;
            }
            Some((x, y, s.k_est / s.j))
        })
        .collect();

    let n_probes = (n_samples / 4).max(16);
    let probes: Vec<(Point, Point, f64, f64)> = (0..n_probes)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = rng_for(seed ^ 0xA5A5_A5A5_A5A5_A5A5, i as u64);
            let x = sample_interior(d, &mut rng)?;
            let (delta, nb) = d.nearest_boundary(x).ok()?;
            let mirrored = Point::new(2.0 * nb.x - x.x, 2.0 * nb.y - x.y);
            if !d.truncation().admits(mirrored) || d.classify(mirrored) != PointClass::Inside {
                return None;
            }
            let s = engine.k(x, mirrored).ok()?;
            if s.j < 1e-9 {
                return None;
            }
            Some((x, mirrored, s.k_est / s.j, delta))
        })
        .collect();

    let mut sup = 0.0f64;
    let mut witness = None;
    for (x, y, kj) in &regular {
        if *kj > sup {
            sup = *kj;
            witness = Some((*x, *y));
        }
    }
    for (x, y, kj, _) in &probes {
        if *kj > sup {
            sup = *kj;
            witness = Some((*x, *y));
        }
    }

    let unbounded_trend = {
        let mut by_delta: Vec<(f64, f64)> = probes.iter().map(|(_, _, kj, d)| (*d, *kj)).collect();
        by_delta.sort_by(|a, b| b.0.total_cmp(&a.0));
        if by_delta.len() < 8 {
            false
        } else {
            let half = by_delta.len() / 2;
            let sup_far = by_delta[..half].iter().map(|p| p.1).fold(0.0f64, f64::max);
            let sup_near = by_delta[half..].iter().map(|p| p.1).fold(0.0f64, f64::max);
            sup_near >= 1.5 * sup_far && sup_near > 4.0
        }
    };

    Ok(UniformityReport {
        sup_ratio_kj: sup,
        witness,
        samples: regular.len() + probes.len(),
        unbounded_trend,
    })
}

/// Empirical cone-condition constant along numerical geodesics.
#[derive(Debug, Clone, Serialize)]
pub struct JohnReport {
    pub c_est: f64,
    pub witness_pair: Option<(Point, Point)>,
    pub witness_z: Option<Point>,
    pub samples: usize,
}

/// For each sampled pair, walk points z along the geodesic (vertices
/// plus regular subdivisions of every segment, so that a long straight
/// geodesic is probed at its midpoint) and record the largest value of
/// min(length to either end) / clearance(z).
pub fn john_constant(
    engine: &MetricEngine,
    n_samples: usize,
    seed: u64,
) -> Result<JohnReport, AnalysisError> {
    if n_samples == 0 {
        return Err(AnalysisError::InvalidParams("n_samples must be at least 1".into()));
    }
    let d = engine.domain().as_ref();
    let per_pair: Vec<(f64, Point, Point, Point)> = (0..n_samples)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let (x, y) = sample_pair(d, Sampler::BoundaryBiased, &mut rng)?;
            let s = engine.k(x, y).ok()?;
            let verts = s.geodesic.vertices();
            if verts.len() < 2 {
                return None;
            }
            let prefix = s.geodesic.prefix_lengths();
            let total = *prefix.last().expect("nonempty");
            if total <= 0.0 {
                return None;
            }
            let mut best = (0.0f64, verts[0]);
            let mut probe = |z: Point, arc: f64| {
                let reach = arc.min(total - arc);
                let delta = d.chain_distance(z);
                if delta > 0.0 && reach / delta > best.0 {
                    best = (reach / delta, z);
                }
            };
            let step = total / 64.0;
            for (si, seg) in verts.windows(2).enumerate() {
                let len = seg[0].dist(seg[1]);
                probe(seg[0], prefix[si]);
                let pieces = ((len / step).ceil() as usize).clamp(1, 64);
                for m in 1..pieces {
                    let f = m as f64 / pieces as f64;
                    probe(seg[0].lerp(seg[1], f), prefix[si] + f * len);
                }
            }
            probe(*verts.last().expect("nonempty"), total);
            Some((best.0, best.1, x, y))
        })
        .collect();

    let mut report = JohnReport { c_est: 0.0, witness_pair: None, witness_z: None, samples: per_pair.len() };
    for (c, z, x, y) in per_pair {
        if c > report.c_est {
            report.c_est = c;
            report.witness_pair = Some((x, y));
            report.witness_z = Some(z);
        }
    }
    Ok(report)
}

/// Predicted uniformity constant for a domain that satisfies both a
/// distortion-envelope bound `phi` and a cone condition with constant
/// `c`: when a geodesic is split at the scale where clearances match,
/// the two outer segments each contribute max(2, (1+c)/log(3/2) + c)
/// (the larger of the half-ball and splitting branches) and the middle
/// segment contributes phi(12 c)/log(3/2).
pub fn predicted_uniformity_constant(phi: impl Fn(f64) -> f64, c: f64) -> f64 {
    assert!(c > 0.0 && c.is_finite(), "cone constant must be positive");
    let log32 = 1.5f64.ln();
    let b2 = phi(12.0 * c) / log32;
    let b13 = 2.0f64.max((1.0 + c) / log32 + c);
    2.0 * b13 + b2
}

/// One row of the comb-complement divergence table: distances between
/// consecutive gap witnesses, with their analytic bounds.
#[derive(Debug, Clone, Serialize)]
pub struct CombDivergenceRow {
    pub k_index: usize,
    pub j_val: f64,
    /// Analytic ceiling for j between consecutive witnesses:
    /// log(1 + 3/(2t) + 3/2).
    pub j_bound: f64,
    pub k_est: f64,
    /// Analytic floor for the quasihyperbolic distance:
    /// log((v^k - t^k/2) / (t^k/2)).
    pub k_lower_bound: f64,
    pub ratio_kj: f64,
}

/// Full output of the divergence experiment: the numeric table plus the
/// geodesic realizing each row and the witness points themselves, in the
/// domain the distances were measured in. The extras feed plots.
#[derive(Debug, Clone)]
pub struct CombDivergenceReport {
    pub rows: Vec<CombDivergenceRow>,
    pub geodesics: Vec<PolyPath>,
    pub witnesses: Vec<Point>,
    pub domain: Arc<Domain>,
}

/// Distances between consecutive gap witnesses z_k in the complement of
/// the capped comb: j stays bounded while k diverges, so the ratio
/// column grows without bound and no fixed envelope can dominate it.
///
/// Each row is checked against its analytic bounds (with slack 3 times
/// the refinement error for the numerical side); a violation aborts the
/// run with the witness data.
pub fn comb_divergence(
    params: CombParams,
    k_range: RangeInclusive<usize>,
    rel_tol: f64,
) -> Result<CombDivergenceReport, AnalysisError> {
    let (start, end) = (*k_range.start(), *k_range.end());
    if start < 1 || end < start {
        return Err(AnalysisError::InvalidParams(format!(
            "divergence rows need 1 <= start <= end, got {start}..={end}"
        )));
    }
    // Two teeth beyond the last witness keep the local geometry of the
    // final row faithful to the unbounded construction.
    let k_max = (end + 2).max(params.k_max);
    let params = CombParams::new(params.u, params.t, params.v, k_max)?;
    let layout = CombLayout::new(params);
    let margin = 1.0;
    let domain = domains::build_comb_complement(params, margin)?;

    // The witnesses must sit well clear of the truncation frame.
    let bbox = domain.bbox();
    for k in start..=end + 1 {
        let z = layout.z_k(k);
        let rim = (z.x - bbox.x0)
            .min(bbox.x1 - z.x)
            .min(z.y - bbox.y0)
            .min(bbox.y1 - z.y);
        assert!(rim > margin / 2.0, "witness {k} too close to the truncation frame");
    }

    let engine = MetricEngine::new(Arc::new(domain)).with_rel_tol(rel_tol);
    let t = params.t;
    let v = params.v;
    let j_bound = (1.0 + 3.0 / (2.0 * t) + 1.5).ln();

    let rows: Vec<Result<(CombDivergenceRow, PolyPath), AnalysisError>> = (start..=end)
        .into_par_iter()
        .map(|k| {
            let zk = layout.z_k(k);
            let zk1 = layout.z_k(k + 1);
            let j_val = j_metric(engine.domain(), zk, zk1)?;
            let s = engine.k(zk, zk1)?;
            let tk = t.powi(k as i32);
            let k_lower_bound = ((v.powi(k as i32) - tk / 2.0) / (tk / 2.0)).ln();
            if j_val > j_bound + 1e-12 {
                return Err(AnalysisError::BoundViolation(format!(
                    "row {k}: j = {j_val:.6} exceeds its ceiling {j_bound:.6}"
                )));
            }
            if s.k_est + 3.0 * s.k_err < k_lower_bound {
                return Err(AnalysisError::BoundViolation(format!(
                    "row {k}: k_est = {:.6} (err {:.2e}) below its floor {k_lower_bound:.6}",
                    s.k_est, s.k_err
                )));
            }
            let row = CombDivergenceRow {
                k_index: k,
                j_val,
                j_bound,
                k_est: s.k_est,
                k_lower_bound,
                ratio_kj: s.k_est / j_val,
            };
            Ok((row, s.geodesic))
        })
        .collect();
    let pairs = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let (rows, geodesics) = pairs.into_iter().unzip();
    let witnesses = (start..=end + 1).map(|k| layout.z_k(k)).collect();
    Ok(CombDivergenceReport { rows, geodesics, witnesses, domain: engine.domain().clone() })
}

/// Fractional-linear map of the plane, applied as a point transform.
#[derive(Debug, Clone, Copy)]
pub struct MobiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MobiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self, AnalysisError> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if det.norm() <= 1e-12 * scale * scale {
            return Err(AnalysisError::SingularMap);
        }
        Ok(MobiusMap { a, b, c, d })
    }

    pub fn identity() -> Self {
        MobiusMap {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// Unit disc onto the upper half-plane: w = i (1 - z) / (1 + z).
    pub fn disc_to_half_plane() -> Self {
        MobiusMap {
            a: Complex64::new(0.0, -1.0),
            b: Complex64::new(0.0, 1.0),
            c: Complex64::new(1.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// Euclidean similarity w = scale z + offset.
    pub fn similarity(scale: Complex64, offset: Complex64) -> Self {
        MobiusMap { a: scale, b: offset, c: Complex64::new(0.0, 0.0), d: Complex64::new(1.0, 0.0) }
    }

    pub fn apply(&self, p: Point) -> Point {
        let z = Complex64::new(p.x, p.y);
        let w = (self.a * z + self.b) / (self.c * z + self.d);
        Point::new(w.re, w.im)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DistortionReport {
    pub max_k_distortion: f64,
    pub max_j_distortion: f64,
    pub samples: usize,
}

/// Distortion of both metrics under a fractional-linear map between two
/// catalog domains: max over sampled pairs of the larger of the two
/// direction ratios. Image pairs must land inside the image domain and
/// inside its central region (geodesics near the artificial truncation
/// frame would be clipped and bias the image-side distance upward).
pub fn mobius_bilipschitz_check(
    map: &MobiusMap,
    source: &MetricEngine,
    image: &MetricEngine,
    n_samples: usize,
    seed: u64,
) -> Result<DistortionReport, AnalysisError> {
    if n_samples == 0 {
        return Err(AnalysisError::InvalidParams("n_samples must be at least 1".into()));
    }
    let src = source.domain().as_ref();
    let img = image.domain().as_ref();
    let img_bbox = img.bbox();
    let img_center = img_bbox.center();
    let img_reach = 0.35 * img_bbox.diagonal();

    let per_pair: Vec<(f64, f64)> = (0..n_samples)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let (x, y) = sample_pair(src, Sampler::BoundaryBiased, &mut rng)?;
            let (fx, fy) = (map.apply(x), map.apply(y));
            for q in [fx, fy] {
                if q.dist(img_center) > img_reach
                    || !img.truncation().admits(q)
                    || img.classify(q) != PointClass::Inside
                {
                    return None;
                }
            }
            let j_src = j_metric(src, x, y).ok()?;
            let j_img = j_metric(img, fx, fy).ok()?;
            if j_src < 1e-9 || j_img < 1e-9 {
                return None;
            }
            let k_src = source.k(x, y).ok()?.k_est;
            let k_img = image.k(fx, fy).ok()?.k_est;
            if k_src <= 0.0 || k_img <= 0.0 {
                return None;
            }
            let jd = (j_img / j_src).max(j_src / j_img);
            let kd = (k_img / k_src).max(k_src / k_img);
            Some((kd, jd))
        })
        .collect();

    if per_pair.is_empty() {
        return Err(AnalysisError::InvalidParams(
            "no sampled pair landed inside the image domain".into(),
        ));
    }
    Ok(DistortionReport {
        max_k_distortion: per_pair.iter().map(|p| p.0).fold(0.0, f64::max),
        max_j_distortion: per_pair.iter().map(|p| p.1).fold(0.0, f64::max),
        samples: per_pair.len(),
    })
}

/// Quasisymmetry evidence for the identity map between the two metrics:
/// envelope of k-distance ratios over j-distance ratios across sampled
/// triples.
#[derive(Debug, Clone, Serialize)]
pub struct QsEnvelope {
    pub bins: Vec<QsBin>,
    pub triples: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QsBin {
    pub j_ratio_edge: f64,
    pub sup_k_ratio: f64,
}

/// Sample triples (x, y, z) and bin k(x,y)/k(y,z) against j(x,y)/j(y,z)
/// as a monotone envelope. Every other triple is normalized so that z
/// sits on the boundary normal of y with clearance delta(y)/e, which
/// pins j(y,z) = k(y,z) = 1 up to curvature of the nearby boundary; the
/// remaining triples draw z uniformly.
pub fn qs_identity_sampler(
    engine: &MetricEngine,
    n_triples: usize,
    seed: u64,
) -> Result<QsEnvelope, AnalysisError> {
    if n_triples == 0 {
        return Err(AnalysisError::InvalidParams("n_triples must be at least 1".into()));
    }
    let d = engine.domain().as_ref();
    let points: Vec<(f64, f64)> = (0..n_triples)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let (x, y) = sample_pair(d, Sampler::BoundaryBiased, &mut rng)?;
            let z = if i % 2 == 0 {
                let (delta, nb) = d.nearest_boundary(y).ok()?;
                let dir = y.sub(nb);
                let n = dir.norm();
                if n <= 0.0 {
                    return None;
                }
                let z = nb.add(dir.scale(delta / std::f64::consts::E / n));
                if !d.truncation().admits(z) || d.classify(z) != PointClass::Inside {
                    return None;
                }
                z
            } else {
                sample_interior(d, &mut rng)?
            };
            let j_xy = j_metric(d, x, y).ok()?;
            let j_yz = j_metric(d, y, z).ok()?;
            if j_xy < 1e-9 || j_yz < 1e-9 {
                return None;
            }
            let k_xy = engine.k(x, y).ok()?.k_est;
            let k_yz = engine.k(y, z).ok()?.k_est;
            if k_yz <= 0.0 {
                return None;
            }
            Some((j_xy / j_yz, k_xy / k_yz))
        })
        .collect();
    let bins = monotone_envelope(&points, 32)
        .into_iter()
        .map(|(j_ratio_edge, sup_k_ratio)| QsBin { j_ratio_edge, sup_k_ratio })
        .collect();
    Ok(QsEnvelope { bins, triples: points.len() })
}
