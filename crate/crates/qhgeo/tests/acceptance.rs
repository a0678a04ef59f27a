//! End-to-end acceptance checks for the toolkit. Each test prints one
//! verdict line of the form
//!
//! ```text
//! ACCEPTANCE n (<name>): PASS - <details>
//! ```
//!
//! (visible with `cargo test -- --nocapture`); a failed check panics
//! with the same line.

use std::f64::consts::TAU;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qhgeo::analysis::{
    comb_divergence, john_constant, mobius_bilipschitz_check, phi_profile,
    predicted_uniformity_constant, uniformity_constant, MobiusMap, Sampler,
};
use qhgeo::domains::{self, CombParams};
use qhgeo::geometry::{Domain, Point, PointClass, Rect};
use qhgeo::metrics::{
    j_metric, k_oracle_halfplane, k_oracle_punctured, MetricEngine, MetricSample,
};

fn report(n: usize, name: &str, pass: bool, details: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("ACCEPTANCE {n} ({name}): {verdict} - {details}");
    println!("{line}");
    assert!(pass, "{line}");
}

fn sample_inside(d: &Domain, rng: &mut ChaCha8Rng) -> Point {
    let b = d.bbox();
    for _ in 0..100_000 {
        let p = Point::new(rng.gen_range(b.x0..b.x1), rng.gen_range(b.y0..b.y1));
        if d.truncation().admits(p) && d.classify(p) == PointClass::Inside {
            return p;
        }
    }
    panic!("interior sampling failed");
}

/// Second point on the segment from the nearest boundary point through
/// `x`, with clearance shrunk by a square-law draw that concentrates
/// samples near the boundary.
fn biased_partner(d: &Domain, x: Point, rng: &mut ChaCha8Rng) -> Option<Point> {
    let (_, nb) = d.nearest_boundary(x).ok()?;
    let dir = x.sub(nb);
    if dir.norm() == 0.0 {
        return None;
    }
    let beta = rng.gen_range(0.0..1.0f64).powi(2).clamp(1e-9, 1.0);
    let y = nb.add(dir.scale(beta));
    (y != x && d.truncation().admits(y) && d.classify(y) == PointClass::Inside).then_some(y)
}

/// Second point within half the clearance of `x`, so the pair is deep
/// inside the ball where the two metrics are locally comparable.
fn near_partner(d: &Domain, x: Point, rng: &mut ChaCha8Rng) -> Option<Point> {
    let delta = d.boundary_distance(x).ok()?;
    for _ in 0..8 {
        let theta = rng.gen_range(0.0..TAU);
        let r = rng.gen_range(0.0..0.5) * delta;
        let y = x.add(Point::new(r * theta.cos(), r * theta.sin()));
        if y != x && d.truncation().admits(y) && d.classify(y) == PointClass::Inside {
            return Some(y);
        }
    }
    None
}

#[test]
fn acceptance_1_oracle_agreement() {
    let started = Instant::now();

    let hp = Arc::new(domains::build_half_plane());
    let hp_engine = MetricEngine::new(hp);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut max_dev_hp = 0.0f64;
    let mut n = 0;
    while n < 100 {
        let x = Point::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.3..3.0));
        let y = Point::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.3..3.0));
        let oracle = k_oracle_halfplane(x, y).expect("interior pair");
        if !(0.1..=5.0).contains(&oracle) {
            continue;
        }
        n += 1;
        let s = hp_engine.k(x, y).expect("half-plane pair");
        max_dev_hp = max_dev_hp.max((s.k_est - oracle).abs() / oracle);
    }

    let pp = Arc::new(domains::build_punctured_plane(0.05, 20.0).expect("punctured plane"));
    let pp_engine = MetricEngine::new(pp);
    let mut max_dev_pp = 0.0f64;
    let mut n = 0;
    while n < 100 {
        let (r1, a1) = (rng.gen_range(0.5..2.0), rng.gen_range(0.0..TAU));
        let (r2, a2) = (rng.gen_range(0.5..2.0), rng.gen_range(0.0..TAU));
        let x = Point::new(r1 * a1.cos(), r1 * a1.sin());
        let y = Point::new(r2 * a2.cos(), r2 * a2.sin());
        let oracle = k_oracle_punctured(x, y).expect("off-origin pair");
        if !(0.1..=5.0).contains(&oracle) {
            continue;
        }
        n += 1;
        let s = pp_engine.k(x, y).expect("punctured pair");
        max_dev_pp = max_dev_pp.max((s.k_est - oracle).abs() / oracle);
    }

    let elapsed = started.elapsed();
    let pass = max_dev_hp <= 0.02 && max_dev_pp <= 0.02 && elapsed <= Duration::from_secs(600);
    report(
        1,
        "oracle-agreement",
        pass,
        &format!(
            "max relative deviation {max_dev_hp:.5} (half-plane) and {max_dev_pp:.5} \
             (punctured plane) over 100+100 pairs at rel_tol 0.02, in {elapsed:.1?}"
        ),
    );
}

#[test]
fn acceptance_2_metric_inequalities() {
    let mut violations: Vec<String> = Vec::new();
    let mut checked = 0usize;
    let mut close_checked = 0usize;
    let mut additivity_checked = 0usize;

    for (di, name) in domains::CATALOG_NAMES.iter().enumerate() {
        let d = Arc::new(domains::domain_by_name(name).expect("catalog domain"));
        let engine = MetricEngine::new(d.clone());
        let rel = engine.rel_tol();
        let budget = |t: &MetricSample| t.k_err.max(rel * t.k_est);
        let mut rng = ChaCha8Rng::seed_from_u64(202 + di as u64);
        let mut produced = 0usize;
        while produced < 84 {
            let x = sample_inside(&d, &mut rng);
            let y = match produced % 3 {
                0 => sample_inside(&d, &mut rng),
                1 => match near_partner(&d, x, &mut rng) {
                    Some(y) => y,
                    None => continue,
                },
                _ => match biased_partner(&d, x, &mut rng) {
                    Some(y) => y,
                    None => continue,
                },
            };
            if x == y {
                continue;
            }
            let Ok(s) = engine.k(x, y) else { continue };
            produced += 1;
            checked += 1;

            if s.j > s.k_est + 3.0 * s.k_err + 1e-12 {
                violations.push(format!(
                    "{name}: j {} exceeds k {} + 3*err {:.2e}",
                    s.j, s.k_est, s.k_err
                ));
            }

            let delta_x = d.boundary_distance(x).expect("interior point");
            if x.dist(y) <= 0.5 * delta_x {
                close_checked += 1;
                if s.k_est > 2.0 * s.j * 1.1 + 1e-12 {
                    violations.push(format!(
                        "{name}: close pair k {} exceeds 2.2*j {}",
                        s.k_est,
                        2.2 * s.j
                    ));
                }
            }

            // Split the geodesic at its middle vertex and compare the
            // two legs against the whole.
            if produced % 12 == 0 && s.geodesic.vertices().len() >= 3 && s.k_est > 1e-6 {
                let prefix = s.geodesic.prefix_lengths();
                let total = *prefix.last().expect("nonempty path");
                let mid = prefix
                    .iter()
                    .enumerate()
                    .min_by(|a, b| {
                        (a.1 - total / 2.0).abs().total_cmp(&(b.1 - total / 2.0).abs())
                    })
                    .map(|(i, _)| i)
                    .expect("nonempty prefix");
                let m = s.geodesic.vertices()[mid];
                if m != x && m != y {
                    if let (Ok(s1), Ok(s2)) = (engine.k(x, m), engine.k(m, y)) {
                        additivity_checked += 1;
                        let gap = (s1.k_est + s2.k_est - s.k_est).abs();
                        let slack = 3.0 * (budget(&s) + budget(&s1) + budget(&s2)) + 1e-9;
                        if gap > slack {
                            violations.push(format!(
                                "{name}: additivity gap {gap:.4} exceeds slack {slack:.4}"
                            ));
                        }
                    }
                }
            }
        }
    }

    // Monotonicity under domain inclusion: the slit disc sits inside the
    // disc, so removing boundary can only increase both metrics.
    let disc = Arc::new(domains::build_disc());
    let slit = Arc::new(domains::build_slit_disc());
    let de = MetricEngine::new(disc.clone());
    let se = MetricEngine::new(slit.clone());
    let rel = de.rel_tol();
    let mut rng = ChaCha8Rng::seed_from_u64(299);
    let mut nested = 0usize;
    while nested < 25 {
        let x = sample_inside(&slit, &mut rng);
        let y = sample_inside(&slit, &mut rng);
        if x == y {
            continue;
        }
        let jd = j_metric(&disc, x, y).expect("disc j");
        let js = j_metric(&slit, x, y).expect("slit j");
        let (Ok(kd), Ok(ks)) = (de.k(x, y), se.k(x, y)) else { continue };
        nested += 1;
        checked += 1;
        if js < jd - 1e-12 {
            violations.push(format!("nested: j shrank from {jd} to {js}"));
        }
        let slack = 3.0 * (ks.k_err.max(rel * ks.k_est) + kd.k_err.max(rel * kd.k_est)) + 1e-9;
        if ks.k_est < kd.k_est - slack {
            violations.push(format!(
                "nested: k shrank from {} to {} (slack {slack:.4})",
                kd.k_est, ks.k_est
            ));
        }
    }

    let pass = violations.is_empty() && checked >= 500;
    let head = violations.first().cloned().unwrap_or_default();
    report(
        2,
        "metric-inequalities",
        pass,
        &format!(
            "{checked} samples over 6 domains ({close_checked} close pairs, \
             {additivity_checked} additivity splits, {nested} nested pairs), \
             {} violations {head}",
            violations.len()
        ),
    );
}

#[test]
fn acceptance_3_comb_envelope() {
    let started = Instant::now();
    let params = CombParams::new(0.2, 0.4, 0.7, 8).expect("comb parameters");
    let (comb, _) = domains::build_comb(params);
    let comb = Arc::new(comb);
    let engine = MetricEngine::new(comb.clone());
    let alpha = 0.7f64.ln() / 0.4f64.ln();

    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut n = 0usize;
    let mut violations = 0usize;
    let mut max_fill = 0.0f64;
    while n < 500 {
        let x = sample_inside(&comb, &mut rng);
        let Some(y) = biased_partner(&comb, x, &mut rng) else { continue };
        let Ok(s) = engine.k(x, y) else { continue };
        n += 1;
        let r = s.ratio;
        let envelope = r + 8.0 * r.powf(alpha);
        if s.k_est > envelope + 3.0 * s.k_err + 1e-9 {
            violations += 1;
        }
        if envelope > 0.0 {
            max_fill = max_fill.max(s.k_est / envelope);
        }
    }

    let elapsed = started.elapsed();
    let pass = violations == 0 && elapsed <= Duration::from_secs(1200);
    report(
        3,
        "comb-envelope",
        pass,
        &format!(
            "{n} boundary-biased samples on comb(0.2, 0.4, 0.7, 8); {violations} exceed \
             r + 8r^{alpha:.4}; tightest envelope fill {max_fill:.3}; {elapsed:.1?}"
        ),
    );
}

#[test]
fn acceptance_4_comb_complement_divergence() {
    let params = CombParams::new(0.2, 0.4, 0.7, 5).expect("comb parameters");
    // Returns Err when any row breaks its analytic floor or ceiling, so
    // an Ok value is already evidence for both per-row bounds.
    let result = comb_divergence(params, 1..=5, 0.02).expect("divergence table");
    let rows = &result.rows;

    let mut pass = rows.len() == 5;
    pass &= (rows[0].k_lower_bound - 2.5f64.ln()).abs() < 1e-9;
    for row in rows {
        pass &= (row.j_bound - 6.25f64.ln()).abs() < 1e-9;
        pass &= row.j_val <= row.j_bound + 1e-12;
        pass &= row.k_est >= row.k_lower_bound;
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio_kj).collect();
    pass &= ratios.windows(2).all(|w| w[1] > w[0]);

    report(
        4,
        "comb-complement-divergence",
        pass,
        &format!(
            "rows 1..=5: k/j = {}, row-1 floor {:.4} (= ln 2.5), j ceiling {:.4} (= ln 6.25)",
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", "),
            rows[0].k_lower_bound,
            rows[0].j_bound
        ),
    );
}

#[test]
fn acceptance_5_mobius_distortion() {
    let disc = Arc::new(domains::build_disc());
    let hp = Arc::new(domains::build_half_plane());
    let de = MetricEngine::new(disc.clone());
    let he = MetricEngine::new(hp.clone());
    let rel = de.rel_tol();

    let cayley = MobiusMap::disc_to_half_plane();
    let cdist = mobius_bilipschitz_check(&cayley, &de, &he, 100, 505).expect("cayley check");
    let cap2 = 2.0 * (1.0 + 3.0 * rel);

    // Similarities are exact isometries of both metrics: a rotation of
    // the disc onto itself and a doubling of the half-plane onto itself
    // (sampled against a wider truncation window).
    let rotation =
        MobiusMap::similarity(Complex64::from_polar(1.0, 0.7), Complex64::new(0.0, 0.0));
    let rdist = mobius_bilipschitz_check(&rotation, &de, &de, 50, 506).expect("rotation check");

    let wide = Arc::new(domains::half_plane_at(0.0, Rect::new(-16.0, 0.0, 16.0, 16.0)));
    let we = MetricEngine::new(wide);
    let scaling = MobiusMap::similarity(Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0));
    let sdist = mobius_bilipschitz_check(&scaling, &he, &we, 50, 507).expect("scaling check");
    let cap1 = 1.0 + 3.0 * rel;

    let pass = cdist.max_k_distortion <= cap2
        && cdist.max_j_distortion <= cap2
        && rdist.max_k_distortion <= cap1
        && rdist.max_j_distortion <= cap1
        && sdist.max_k_distortion <= cap1
        && sdist.max_j_distortion <= cap1;
    report(
        5,
        "mobius-distortion",
        pass,
        &format!(
            "disc-to-half-plane distortion k {:.3} / j {:.3} (cap {cap2:.2}, {} pairs); \
             rotation k {:.4} / j {:.4}, scaling k {:.4} / j {:.4} (cap {cap1:.2})",
            cdist.max_k_distortion,
            cdist.max_j_distortion,
            cdist.samples,
            rdist.max_k_distortion,
            rdist.max_j_distortion,
            sdist.max_k_distortion,
            sdist.max_j_distortion
        ),
    );
}

#[test]
fn acceptance_6_disc_uniformity_budget() {
    let disc = Arc::new(domains::build_disc());
    let engine = MetricEngine::new(disc);

    let uniformity = uniformity_constant(&engine, 200, 601).expect("uniformity estimate");
    let profile = phi_profile(&engine, 200, Sampler::BoundaryBiased, 602).expect("phi profile");
    let john = john_constant(&engine, 100, 603).expect("cone constant");

    let predicted = predicted_uniformity_constant(|r| profile.eval(r), john.c_est);
    let pass = uniformity.sup_ratio_kj <= predicted && !uniformity.unbounded_trend;
    report(
        6,
        "disc-uniformity-budget",
        pass,
        &format!(
            "measured sup k/j {:.3} over {} samples <= {predicted:.2} predicted from the \
             measured envelope and cone constant {:.3}; no unbounded trend",
            uniformity.sup_ratio_kj, uniformity.samples, john.c_est
        ),
    );
}

#[test]
fn acceptance_7_slit_disc_trend() {
    let slit = Arc::new(domains::build_slit_disc());
    let engine = MetricEngine::new(slit);

    let mut ratios = Vec::new();
    for &eps in &[0.1, 0.05, 0.025, 0.0125] {
        let x = Point::new(0.5, eps);
        let y = Point::new(0.5, -eps);
        let s = engine.k(x, y).expect("slit pair");
        ratios.push(s.k_est / s.j);
    }

    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let last = *ratios.last().expect("four ratios");
    let pass = increasing && last > 10.0;
    report(
        7,
        "slit-disc-trend",
        pass,
        &format!(
            "k/j across mirrored pairs at heights 0.1 to 0.0125: {} (strictly increasing, \
             final > 10)",
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", ")
        ),
    );
}
