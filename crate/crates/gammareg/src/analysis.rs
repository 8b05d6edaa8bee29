//! Measurements on the perturbation family: origin gaps, sup distances,
//! the ratio against t·φ(t) with its envelope-free lower bound, a finite
//! liminf proxy, the o(ε) consistency check, the 2D cross-section
//! comparison, and the full-measure convexity report for the tent lift.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::construct::{build_2d, g_eval, CounterexampleKit, PhiSpec};
use crate::envelope::{envelope_1d, envelope_2d, EnvelopeResult1D, EnvelopeResult2D};
use crate::error::{Error, Result};
use crate::gridfn::{Grid1D, Grid2D, SampledFn1D, SampledFn2D};

/// Minimum number of grid nodes required strictly inside `(0, φ(t_min))`
/// before a sharpness run is allowed to proceed.
pub const MIN_NODES_BELOW_SCALE: usize = 32;

/// Minimum number of row nodes strictly inside `(0, x_t)` for the 2D
/// cross-section comparison.
pub const MIN_ROW_NODES_BELOW_XSTAR: usize = 8;

/// Default threshold the final supdist(t)/t value must fall below.
pub const DEFAULT_OEPS_THRESHOLD: f64 = 0.1;

/// Default half-width of the exceptional band around the tent's kink
/// segments.
pub const DEFAULT_EPS_BAND: f64 = 1e-3;

/// Linear coefficient bounding the exceptional-band fraction:
/// fraction <= C·eps_band.
pub const REGION_LINEAR_C: f64 = 6.0;

/// Grid configuration for sharpness runs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridCfg {
    pub n: usize,
    pub grading_p: f64,
}

impl Default for GridCfg {
    fn default() -> Self {
        GridCfg {
            n: 20001,
            grading_p: 2.0,
        }
    }
}

/// Number of graded-grid nodes strictly inside `(0, s)` for a symmetric
/// grid on `[-1, 1]` with `n` nodes and grading exponent `p`.
pub fn graded_nodes_below(n: usize, p: f64, s: f64) -> usize {
    let k = (n - 1) / 2;
    if k == 0 || s <= 0.0 {
        return 0;
    }
    let lim = (k as f64) * s.powf(1.0 / p);
    (lim.ceil() as usize).saturating_sub(1).min(k)
}

/// Smallest odd grid size whose graded grid places at least
/// [`MIN_NODES_BELOW_SCALE`] nodes strictly inside `(0, s)`.
pub fn required_n_for_scale(p: f64, s: f64) -> usize {
    let k = ((MIN_NODES_BELOW_SCALE as f64) * s.powf(-1.0 / p)).floor() as usize + 1;
    2 * k + 1
}

/// One measurement at a fixed perturbation size `t`.
#[derive(Debug, Clone, Serialize)]
pub struct RatioSample {
    pub t: f64,
    /// `v_t(0) - (v_t)**(0)`.
    pub gap0: f64,
    /// `max_x (v_t - (v_t)**)(x)`.
    pub supdist: f64,
    /// `gap0 / (t·φ(t))`.
    pub ratio: f64,
    /// `(t·φ(t) - v(φ(t))) / (t·φ(t))`, computed without the envelope.
    pub bound: f64,
    /// Detected argmin of v_t, reported as `|x| >= 0`.
    pub xstar: f64,
}

/// Samples ordered by strictly decreasing t, plus grid metadata.
#[derive(Debug, Clone, Serialize)]
pub struct RatioCurve {
    #[serde(skip_serializing)]
    pub spec: PhiSpec,
    pub phi: String,
    pub grid_n: usize,
    pub grading_p: f64,
    pub samples: Vec<RatioSample>,
}

/// `f(0) - envelope(0)`; the grid must contain the node 0.
pub fn origin_gap(f: &SampledFn1D, env: &EnvelopeResult1D) -> Result<f64> {
    let i = f
        .grid()
        .find_node(0.0)
        .ok_or_else(|| Error::domain("origin gap needs 0 as a grid node"))?;
    Ok(f.values()[i] - env.envelope.values()[i])
}

/// Largest nodewise excess of `f` over its envelope.
pub fn sup_distance(f: &SampledFn1D, env: &EnvelopeResult1D) -> f64 {
    f.values()
        .iter()
        .zip(env.envelope.values())
        .map(|(a, b)| a - b)
        .fold(0.0f64, f64::max)
}

/// 2D analogue of [`sup_distance`] over masked nodes.
pub fn sup_distance_2d(f: &SampledFn2D, env: &EnvelopeResult2D) -> f64 {
    f.values()
        .iter()
        .zip(env.envelope.values())
        .map(|(a, b)| a - b)
        .fold(0.0f64, f64::max)
}

fn argmin_abs_x(f: &SampledFn1D) -> f64 {
    let mut best = f64::INFINITY;
    let mut arg = 0usize;
    for (i, &v) in f.values().iter().enumerate() {
        if v < best {
            best = v;
            arg = i;
        }
    }
    f.grid().nodes()[arg].abs()
}

/// Measure the gap family over a decreasing sequence of perturbation
/// sizes. Refuses (with the minimal adequate grid size) when the graded
/// grid cannot resolve the scale `φ(t_min)`.
pub fn sharpness_curve(spec: &PhiSpec, ts: &[f64], cfg: GridCfg) -> Result<RatioCurve> {
    if ts.is_empty() {
        return Err(Error::size("need at least one t sample"));
    }
    if ts.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::domain("all t must be positive"));
    }
    if ts.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::domain("t samples must be strictly decreasing"));
    }
    let t_min = *ts.last().unwrap();
    let t_max = ts[0];
    if t_max > spec.delta() {
        return Err(Error::domain(format!(
            "t_max={t_max} exceeds modulus domain bound {}",
            spec.delta()
        )));
    }
    if spec.eval(t_max)? > 1.0 {
        return Err(Error::domain(
            "φ(t_max) exceeds 1; the profile v is only built on [-1, 1]",
        ));
    }
    let scale = spec.eval(t_min)?;
    let below = graded_nodes_below(cfg.n, cfg.grading_p, scale);
    if below < MIN_NODES_BELOW_SCALE {
        return Err(Error::Resolution {
            msg: format!(
                "graded grid (n={}, p={}) has {below} nodes below φ(t_min)={scale:.3e}, \
                 need {MIN_NODES_BELOW_SCALE}",
                cfg.n, cfg.grading_p
            ),
            required_n: required_n_for_scale(cfg.grading_p, scale),
        });
    }

    let grid = Grid1D::graded(-1.0, 1.0, cfg.n, cfg.grading_p)?;
    let kit = crate::construct::build_v(spec, &grid)?;

    let samples: Result<Vec<RatioSample>> = ts
        .par_iter()
        .map(|&t| {
            let vt = kit.perturb(t)?;
            let env = envelope_1d(&vt);
            let gap0 = origin_gap(&vt, &env)?;
            let supdist = sup_distance(&vt, &env);
            let phi_t = spec.eval(t)?;
            let denom = t * phi_t;
            let v_at_phi = kit.v().eval(phi_t)?;
            let sample = RatioSample {
                t,
                gap0,
                supdist,
                ratio: gap0 / denom,
                bound: (denom - v_at_phi) / denom,
                xstar: argmin_abs_x(&vt),
            };
            debug_assert!(sample.gap0 >= 0.0);
            debug_assert!(sample.supdist >= sample.gap0 - 1e-12);
            Ok(sample)
        })
        .collect();

    Ok(RatioCurve {
        spec: spec.clone(),
        phi: spec.text(),
        grid_n: cfg.n,
        grading_p: cfg.grading_p,
        samples: samples?,
    })
}

/// Finite proxy for the liminf: the minimum ratio over the smallest
/// decade of t present in the curve (t <= 10·t_min).
pub fn liminf_estimate(curve: &RatioCurve) -> Result<f64> {
    if curve.samples.len() < 3 {
        return Err(Error::size(format!(
            "liminf proxy needs at least 3 samples, got {}",
            curve.samples.len()
        )));
    }
    let t_min = curve.samples.last().unwrap().t;
    let cutoff = 10.0 * t_min * (1.0 + 1e-9);
    Ok(curve
        .samples
        .iter()
        .filter(|s| s.t <= cutoff)
        .map(|s| s.ratio)
        .fold(f64::INFINITY, f64::min))
}

/// Result of the o(ε) consistency check on `supdist(t)/t`.
#[derive(Debug, Clone, Serialize)]
pub struct OepsReport {
    pub ts: Vec<f64>,
    pub supdist_over_t: Vec<f64>,
    pub strictly_decreasing: bool,
    pub final_value: f64,
    pub threshold: f64,
    /// Log-log least-squares slope of supdist(t)/t against t.
    pub fitted_exponent: f64,
    pub pass: bool,
}

/// Verify that `supdist(t)/t` decreases to below `threshold` along the
/// curve and fit its power law. Needs at least 3 samples spanning two
/// decades of t.
pub fn oeps_check(curve: &RatioCurve, threshold: f64) -> Result<OepsReport> {
    let n = curve.samples.len();
    if n < 3 {
        return Err(Error::size("o(eps) check needs at least 3 samples"));
    }
    let t_max = curve.samples[0].t;
    let t_min = curve.samples[n - 1].t;
    if t_max / t_min < 100.0 * (1.0 - 1e-9) {
        return Err(Error::size(
            "o(eps) check needs samples spanning at least 2 decades of t",
        ));
    }
    let ts: Vec<f64> = curve.samples.iter().map(|s| s.t).collect();
    let q: Vec<f64> = curve.samples.iter().map(|s| s.supdist / s.t).collect();
    let strictly_decreasing = q.windows(2).all(|w| w[1] < w[0]);
    let final_value = *q.last().unwrap();

    let logs: Vec<(f64, f64)> = ts
        .iter()
        .zip(&q)
        .filter(|&(&t, &v)| t > 0.0 && v > 0.0)
        .map(|(&t, &v)| (t.ln(), v.ln()))
        .collect();
    let m = logs.len() as f64;
    let mean_x = logs.iter().map(|l| l.0).sum::<f64>() / m;
    let mean_y = logs.iter().map(|l| l.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|l| (l.0 - mean_x) * (l.1 - mean_y)).sum();
    let sxx: f64 = logs.iter().map(|l| (l.0 - mean_x) * (l.0 - mean_x)).sum();
    let fitted_exponent = sxy / sxx;

    let pass = strictly_decreasing && final_value < threshold;
    Ok(OepsReport {
        ts,
        supdist_over_t: q,
        strictly_decreasing,
        final_value,
        threshold,
        fitted_exponent,
        pass,
    })
}

/// Result of the 2D cross-section comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CrossSectionReport {
    pub t: f64,
    pub xstar: f64,
    pub row_nodes_below_xstar: usize,
    pub gap_1d: f64,
    pub gap_2d: f64,
    /// Largest `env2d(x, 0) - env1d(x)` over the shared row.
    pub max_row_violation: f64,
    pub rel_tol: f64,
    pub row_inequality_holds: bool,
    pub gap_inequality_holds: bool,
    pub pass: bool,
}

/// Compare the 2D envelope of `u_t` along the x-axis row against the 1D
/// envelope of `v_t`: the 2D envelope must not exceed the 1D one (within
/// `rel_tol`), and the 2D origin gap must not fall below the 1D one.
///
/// `t = 0` runs the convex control (no tent, no resolution demand).
pub fn cross_section_check(
    kit: &CounterexampleKit,
    grid2: &Grid2D,
    t: f64,
    rel_tol: f64,
) -> Result<CrossSectionReport> {
    let j0 = grid2
        .y_grid()
        .find_node(0.0)
        .ok_or_else(|| Error::domain("2D grid must contain the row y=0"))?;
    for need in [0.0, 0.5, -0.5] {
        if grid2.x_grid().find_node(need).is_none() {
            return Err(Error::domain(format!(
                "x-axis row must contain the node {need} exactly"
            )));
        }
    }
    let vt = if t > 0.0 {
        kit.perturb(t)?
    } else {
        kit.v().clone()
    };
    let env1 = envelope_1d(&vt);
    let gap_1d = origin_gap(&vt, &env1)?;
    let xstar = argmin_abs_x(&vt);

    let row_nodes_below_xstar = grid2
        .x_grid()
        .nodes()
        .iter()
        .filter(|&&x| 0.0 < x && x < xstar)
        .count();
    if t > 0.0 && row_nodes_below_xstar < MIN_ROW_NODES_BELOW_XSTAR {
        let mut n_req = (16.0 / xstar).floor() as usize + 2;
        n_req += (4 - (n_req - 1) % 4) % 4;
        return Err(Error::Resolution {
            msg: format!(
                "x-axis row has {row_nodes_below_xstar} nodes inside (0, x_t={xstar:.4}), \
                 need {MIN_ROW_NODES_BELOW_XSTAR}"
            ),
            required_n: n_req,
        });
    }

    let (ut, _, _) = build_2d(kit, grid2, t)?;
    let env2 = envelope_2d(&ut)?;

    let i0 = grid2
        .x_grid()
        .find_node(0.0)
        .expect("checked above");
    let origin_2d = ut
        .value_at(i0, j0)
        .ok_or_else(|| Error::domain("origin is not a masked node"))?;
    let env_origin_2d = env2.envelope.value_at(i0, j0).expect("origin masked");
    let gap_2d = origin_2d - env_origin_2d;

    let mut max_row_violation = f64::NEG_INFINITY;
    let mut row_inequality_holds = true;
    for (i, &x) in grid2.x_grid().nodes().iter().enumerate() {
        let Some(e2) = env2.envelope.value_at(i, j0) else {
            continue;
        };
        let e1 = env1.envelope.eval(x)?;
        let viol = e2 - e1;
        max_row_violation = max_row_violation.max(viol);
        if viol > rel_tol * e1.abs().max(gap_1d) {
            row_inequality_holds = false;
        }
    }
    let gap_inequality_holds = gap_2d >= gap_1d - rel_tol * gap_1d;

    let pass = row_inequality_holds && gap_inequality_holds;
    Ok(CrossSectionReport {
        t,
        xstar,
        row_nodes_below_xstar,
        gap_1d,
        gap_2d,
        max_row_violation,
        rel_tol,
        row_inequality_holds,
        gap_inequality_holds,
        pass,
    })
}

/// Region classification for the tent lift `h(x, y) = g(max(|x|, |y|))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    North,
    South,
    East,
    West,
    Exterior,
    Band,
}

const KINK_SEGMENTS: [((f64, f64), (f64, f64)); 6] = [
    ((-0.5, -0.5), (0.5, 0.5)),
    ((-0.5, 0.5), (0.5, -0.5)),
    ((-0.5, -0.5), (0.5, -0.5)),
    ((-0.5, 0.5), (0.5, 0.5)),
    ((-0.5, -0.5), (-0.5, 0.5)),
    ((0.5, -0.5), (0.5, 0.5)),
];

fn dist_point_segment(px: f64, py: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = (((px - a.0) * dx + (py - a.1) * dy) / len2).clamp(0.0, 1.0);
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((px - cx) * (px - cx) + (py - cy) * (py - cy)).sqrt()
}

/// Classify a disk point against the five convexity regions of the tent
/// lift, with an exceptional band of half-width `eps_band` around the
/// six kink segments (square edges and diagonals).
pub fn classify_region(x: f64, y: f64, eps_band: f64) -> Region {
    let near_kink = KINK_SEGMENTS
        .iter()
        .any(|&(a, b)| dist_point_segment(x, y, a, b) <= eps_band);
    if near_kink {
        return Region::Band;
    }
    let (ax, ay) = (x.abs(), y.abs());
    if ax.max(ay) > 0.5 {
        Region::Exterior
    } else if y > ax {
        Region::North
    } else if -y > ax {
        Region::South
    } else if x > ay {
        Region::East
    } else if -x > ay {
        Region::West
    } else {
        // Exactly on a kink line; measure zero.
        Region::Band
    }
}

/// The tent lift itself.
pub fn h_tent(x: f64, y: f64) -> f64 {
    g_eval(x.abs().max(y.abs()))
}

/// Result of the sampled convexity audit of the tent lift.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexRegionReport {
    pub samples: usize,
    pub seed: u64,
    pub eps_band: f64,
    pub region_counts: [usize; 5],
    pub band_count: usize,
    pub band_fraction: f64,
    pub linear_bound_c: f64,
    pub triples_tested: usize,
    pub convexity_failures: usize,
    pub pass: bool,
}

/// Sample pseudo-random disk points, classify them into the five
/// regions or the exceptional band, and test midpoint convexity of the
/// tent lift on point pairs whose midpoint stays in the same region.
/// Also asserts the band fraction is linearly small in `eps_band`.
pub fn convex_region_report(
    grid2: &Grid2D,
    samples: usize,
    seed: u64,
    eps_band: f64,
) -> Result<ConvexRegionReport> {
    if samples < 100 {
        return Err(Error::size(format!(
            "need at least 100 samples, got {samples}"
        )));
    }
    if !(eps_band > 0.0) {
        return Err(Error::domain("eps_band must be positive"));
    }
    let tol = grid2.disk_tol().unwrap_or(0.0);
    if !grid2.mask_is_unit_disk(tol) {
        return Err(Error::domain("region report expects a unit-disk grid"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_region: [Vec<(f64, f64)>; 5] = Default::default();
    let mut band_count = 0usize;
    for _ in 0..samples {
        let (x, y) = loop {
            let x: f64 = rng.gen_range(-1.0..1.0);
            let y: f64 = rng.gen_range(-1.0..1.0);
            if x * x + y * y <= 1.0 {
                break (x, y);
            }
        };
        match classify_region(x, y, eps_band) {
            Region::North => by_region[0].push((x, y)),
            Region::South => by_region[1].push((x, y)),
            Region::East => by_region[2].push((x, y)),
            Region::West => by_region[3].push((x, y)),
            Region::Exterior => by_region[4].push((x, y)),
            Region::Band => band_count += 1,
        }
    }

    let regions = [
        Region::North,
        Region::South,
        Region::East,
        Region::West,
        Region::Exterior,
    ];
    let mut triples_tested = 0usize;
    let mut convexity_failures = 0usize;
    for (points, region) in by_region.iter().zip(regions) {
        for pair in points.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            let mid = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
            if classify_region(mid.0, mid.1, eps_band) != region {
                continue;
            }
            triples_tested += 1;
            let lhs = h_tent(mid.0, mid.1);
            let rhs = 0.5 * (h_tent(a.0, a.1) + h_tent(b.0, b.1));
            // The regions make h affine or zero, so the inequality is
            // exact up to the last-bit rounding of the two expressions.
            if lhs > rhs + 1e-15 {
                convexity_failures += 1;
            }
        }
    }

    let band_fraction = band_count as f64 / samples as f64;
    let pass = convexity_failures == 0 && band_fraction <= REGION_LINEAR_C * eps_band;
    Ok(ConvexRegionReport {
        samples,
        seed,
        eps_band,
        region_counts: by_region.map(|v| v.len()),
        band_count,
        band_fraction,
        linear_bound_c: REGION_LINEAR_C,
        triples_tested,
        convexity_failures,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build_v;

    fn power(alpha: f64) -> PhiSpec {
        PhiSpec::power(alpha).unwrap()
    }

    fn fn1d(xs: &[f64], vs: &[f64]) -> SampledFn1D {
        SampledFn1D::new(Grid1D::new(xs.to_vec()).unwrap(), vs.to_vec()).unwrap()
    }

    #[test]
    fn origin_gap_examples() {
        let convex = SampledFn1D::from_fn(Grid1D::uniform(-1.0, 1.0, 11).unwrap(), |x| x * x)
            .unwrap();
        let env = envelope_1d(&convex);
        assert_eq!(origin_gap(&convex, &env).unwrap(), 0.0);

        let bump = fn1d(&[-1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]);
        let env = envelope_1d(&bump);
        assert_eq!(origin_gap(&bump, &env).unwrap(), 1.0);

        let no_zero = fn1d(&[0.5, 1.0], &[0.0, 0.0]);
        let env = envelope_1d(&no_zero);
        assert!(matches!(origin_gap(&no_zero, &env), Err(Error::Domain(_))));
    }

    #[test]
    fn origin_gap_closed_form_alpha1() {
        // gap(t) = (3/4)·3^{1/3}·t^{4/3} for v = x^4/12.
        let kit = build_v(&power(1.0), &Grid1D::graded(-1.0, 1.0, 20001, 2.0).unwrap()).unwrap();
        let t = 1e-3;
        let vt = kit.perturb(t).unwrap();
        let env = envelope_1d(&vt);
        let gap = origin_gap(&vt, &env).unwrap();
        let expect = 0.75 * 3f64.powf(1.0 / 3.0) * t.powf(4.0 / 3.0);
        assert!((gap - expect).abs() <= 0.01 * expect, "gap {gap} vs {expect}");
        assert!((expect - 1.0817e-4).abs() < 1e-8 * 1.0817);
    }

    #[test]
    fn sup_distance_examples() {
        let convex = SampledFn1D::from_fn(Grid1D::uniform(-1.0, 1.0, 11).unwrap(), |x| x * x)
            .unwrap();
        let env = envelope_1d(&convex);
        assert_eq!(sup_distance(&convex, &env), 0.0);

        let f = fn1d(&[0.0, 1.0, 2.0, 3.0], &[0.0, 2.0, 1.0, 0.0]);
        let env = envelope_1d(&f);
        assert_eq!(sup_distance(&f, &env), 2.0);
    }

    #[test]
    fn tent_family_supdist_equals_gap() {
        let kit = build_v(&power(1.0), &Grid1D::graded(-1.0, 1.0, 20001, 2.0).unwrap()).unwrap();
        for t in [1e-2, 1e-3] {
            let vt = kit.perturb(t).unwrap();
            let env = envelope_1d(&vt);
            let gap = origin_gap(&vt, &env).unwrap();
            let sup = sup_distance(&vt, &env);
            assert!((gap - sup).abs() <= 1e-10, "t={t}: {gap} vs {sup}");
        }
    }

    fn geometric_ts(t_max: f64, t_min: f64, count: usize) -> Vec<f64> {
        let ratio = (t_min / t_max).powf(1.0 / (count - 1) as f64);
        (0..count).map(|k| t_max * ratio.powi(k as i32)).collect()
    }

    #[test]
    fn sharpness_curve_bound_and_ratio() {
        let spec = power(1.0);
        let ts = geometric_ts(1e-2, 1e-4, 5);
        let curve = sharpness_curve(&spec, &ts, GridCfg::default()).unwrap();
        // bound(t) = 1 - t^2/12 for alpha = 1.
        let s0 = &curve.samples[0];
        assert!((s0.bound - (1.0 - 1e-4 / 12.0)).abs() < 1e-9);
        for s in &curve.samples {
            assert!(s.ratio >= s.bound - 0.02 * s.bound.abs(), "t={}", s.t);
            assert!(s.gap0 >= 0.0 && s.supdist >= s.gap0 - 1e-12);
        }
        // ratio(1e-3) ~ 108.17 for the closed form.
        let mid = curve
            .samples
            .iter()
            .min_by(|a, b| (a.t - 1e-3).abs().total_cmp(&(b.t - 1e-3).abs()))
            .unwrap();
        assert!((mid.ratio - 108.16871777305562).abs() < 0.02 * 108.17);
    }

    #[test]
    fn sharpness_curve_refuses_under_resolved() {
        let spec = power(1.0);
        let ts = geometric_ts(1e-2, 1e-6, 5);
        let err = sharpness_curve(
            &spec,
            &ts,
            GridCfg {
                n: 201,
                grading_p: 2.0,
            },
        )
        .unwrap_err();
        match err {
            Error::Resolution { required_n, .. } => {
                assert_eq!(required_n, 64003);
                // The suggestion satisfies its own requirement.
                assert!(
                    graded_nodes_below(required_n, 2.0, 1e-6) >= MIN_NODES_BELOW_SCALE
                );
            }
            other => panic!("expected resolution error, got {other}"),
        }
    }

    #[test]
    fn liminf_proxy_examples() {
        let mk = |ts: &[f64], ratios: &[f64]| RatioCurve {
            spec: power(1.0),
            phi: "power:1".into(),
            grid_n: 0,
            grading_p: 2.0,
            samples: ts
                .iter()
                .zip(ratios)
                .map(|(&t, &r)| RatioSample {
                    t,
                    gap0: 0.0,
                    supdist: 0.0,
                    ratio: r,
                    bound: 0.0,
                    xstar: 0.0,
                })
                .collect(),
        };
        let c = mk(&[1e-2, 1e-3, 1e-4], &[5.0, 7.0, 9.0]);
        assert_eq!(liminf_estimate(&c).unwrap(), 7.0);
        let c = mk(&[1e-2, 1e-3, 1e-4], &[4.0, 4.0, 4.0]);
        assert_eq!(liminf_estimate(&c).unwrap(), 4.0);
        let c = mk(&[1e-2, 1e-3], &[4.0, 4.0]);
        assert!(matches!(liminf_estimate(&c), Err(Error::Size(_))));
    }

    #[test]
    fn oeps_check_fits_cube_root_for_alpha1() {
        let spec = power(1.0);
        let ts = geometric_ts(1e-2, 1e-4, 9);
        let curve = sharpness_curve(&spec, &ts, GridCfg::default()).unwrap();
        let report = oeps_check(&curve, DEFAULT_OEPS_THRESHOLD).unwrap();
        assert!(report.strictly_decreasing);
        assert!(report.pass);
        assert!(
            (report.fitted_exponent - 1.0 / 3.0).abs() < 0.05,
            "exponent {}",
            report.fitted_exponent
        );
    }

    #[test]
    fn oeps_check_needs_two_decades() {
        let spec = power(1.0);
        let ts = geometric_ts(1e-2, 2e-3, 4);
        let curve = sharpness_curve(&spec, &ts, GridCfg::default()).unwrap();
        assert!(matches!(
            oeps_check(&curve, DEFAULT_OEPS_THRESHOLD),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn cross_section_refuses_coarse_row() {
        // t=0.1 pins the minimum to the tent edge x_t=0.5; a 33-node row
        // has only 7 nodes strictly inside (0, 0.5).
        let kit = build_v(&power(1.0), &Grid1D::graded(-1.0, 1.0, 4001, 2.0).unwrap()).unwrap();
        let xs = Grid1D::uniform(-1.0, 1.0, 33).unwrap();
        let ys = Grid1D::uniform(-1.0, 1.0, 33).unwrap();
        let g2 = Grid2D::unit_disk(xs, ys, 1e-12).unwrap();
        let err = cross_section_check(&kit, &g2, 0.1, 0.02).unwrap_err();
        assert!(matches!(err, Error::Resolution { .. }), "got {err}");
    }

    #[test]
    fn cross_section_convex_control() {
        let kit = build_v(&power(1.0), &Grid1D::graded(-1.0, 1.0, 4001, 2.0).unwrap()).unwrap();
        let xs = Grid1D::uniform(-1.0, 1.0, 33).unwrap();
        let ys = Grid1D::uniform(-1.0, 1.0, 33).unwrap();
        let g2 = Grid2D::unit_disk(xs, ys, 1e-12).unwrap();
        let report = cross_section_check(&kit, &g2, 0.0, 0.02).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.gap_1d.abs() <= 1e-12);
        assert!(report.gap_2d.abs() <= 1e-6, "gap2d {}", report.gap_2d);
    }

    #[test]
    fn region_classification_examples() {
        assert_eq!(classify_region(0.1, 0.3, 1e-3), Region::North);
        assert_eq!(classify_region(0.2, 0.2, 1e-3), Region::Band);
        assert_eq!(classify_region(0.7, 0.0, 1e-3), Region::Exterior);
        assert_eq!(classify_region(0.3, -0.1, 1e-3), Region::East);
        // North triangle: h = 0.5 - y.
        assert_eq!(h_tent(0.1, 0.3), 0.5 - 0.3);
    }

    #[test]
    fn region_report_counts_and_convexity() {
        let xs = Grid1D::uniform(-1.0, 1.0, 9).unwrap();
        let ys = Grid1D::uniform(-1.0, 1.0, 9).unwrap();
        let g2 = Grid2D::unit_disk(xs, ys, 1e-12).unwrap();
        let report = convex_region_report(&g2, 2000, 42, 1e-2).unwrap();
        assert_eq!(report.convexity_failures, 0);
        assert!(report.triples_tested > 100);
        assert!(report.band_count > 0);
        assert!(report.pass, "{report:?}");
        // Same seed, same outcome.
        let again = convex_region_report(&g2, 2000, 42, 1e-2).unwrap();
        assert_eq!(report.band_count, again.band_count);
        assert_eq!(report.region_counts, again.region_counts);
        assert!(matches!(
            convex_region_report(&g2, 10, 42, 1e-2),
            Err(Error::Size(_))
        ));
    }
}
