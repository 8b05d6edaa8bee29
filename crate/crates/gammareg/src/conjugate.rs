//! Discrete Legendre-Fenchel conjugation and biconjugation.
//!
//! The conjugate of a sampled function is taken over the sampled points
//! only: `f*(s) = max_i (s·x_i − f(x_i))`. Applying the transform twice
//! with a slope grid containing all hull-edge slopes reproduces the
//! convex envelope at the original nodes, which gives an independent
//! route to the same object the hull sweep computes.

use crate::envelope::lower_hull_indices;
use crate::error::{Error, Result};
use crate::gridfn::{Grid1D, SampledFn1D};

/// Grid of dual (slope) variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeGrid(Grid1D);

impl SlopeGrid {
    pub fn new(grid: Grid1D) -> Self {
        SlopeGrid(grid)
    }

    pub fn from_slopes(slopes: Vec<f64>) -> Result<Self> {
        Ok(SlopeGrid(Grid1D::new(slopes)?))
    }

    pub fn grid(&self) -> &Grid1D {
        &self.0
    }

    pub fn slopes(&self) -> &[f64] {
        self.0.nodes()
    }

    /// Slope grid tailored to `f`: the edge slopes of its lower convex
    /// hull plus the extreme consecutive-node secant slopes. This covers
    /// every secant slope of `f` (secants are convex combinations of
    /// consecutive ones) and makes the biconjugate exact on the nodes.
    pub fn auto(f: &SampledFn1D) -> Self {
        let xs = f.grid().nodes();
        let fs = f.values();
        let mut slopes: Vec<f64> = Vec::new();
        let hull = lower_hull_indices(xs, fs);
        for w in hull.windows(2) {
            slopes.push((fs[w[1]] - fs[w[0]]) / (xs[w[1]] - xs[w[0]]));
        }
        let mut smin = f64::INFINITY;
        let mut smax = f64::NEG_INFINITY;
        for i in 0..xs.len() - 1 {
            let s = (fs[i + 1] - fs[i]) / (xs[i + 1] - xs[i]);
            smin = smin.min(s);
            smax = smax.max(s);
        }
        slopes.push(smin);
        slopes.push(smax);
        slopes.sort_by(f64::total_cmp);
        slopes.dedup();
        if slopes.len() < 2 {
            let s = slopes[0];
            slopes = vec![s - 1.0, s, s + 1.0];
        }
        SlopeGrid(Grid1D::new(slopes).expect("slopes are sorted, deduped, finite"))
    }
}

/// Reference conjugate: for each slope, scan every node. O(n·m).
pub fn lf_conjugate_bruteforce(f: &SampledFn1D, s: &SlopeGrid) -> SampledFn1D {
    let xs = f.grid().nodes();
    let fs = f.values();
    let values: Vec<f64> = s
        .slopes()
        .iter()
        .map(|&sj| {
            let mut best = f64::NEG_INFINITY;
            for (x, v) in xs.iter().zip(fs) {
                let cand = sj * x - v;
                if cand > best {
                    best = cand;
                }
            }
            best
        })
        .collect();
    SampledFn1D::new(s.grid().clone(), values).expect("conjugate values are finite")
}

/// Fast conjugate: the maximizer moves right along the lower convex
/// hull as the slope increases, so a single merge scan over hull
/// vertices and slopes suffices. O(n + m).
pub fn lf_conjugate(f: &SampledFn1D, s: &SlopeGrid) -> SampledFn1D {
    let xs = f.grid().nodes();
    let fs = f.values();
    let hull = lower_hull_indices(xs, fs);
    let mut h = 0usize;
    let values: Vec<f64> = s
        .slopes()
        .iter()
        .map(|&sj| {
            // Advance while the next hull vertex does at least as well.
            // The strict test breaks ties toward the smaller index.
            while h + 1 < hull.len() {
                let (a, b) = (hull[h], hull[h + 1]);
                let edge = (fs[b] - fs[a]) / (xs[b] - xs[a]);
                if edge < sj {
                    h += 1;
                } else {
                    break;
                }
            }
            let i = hull[h];
            sj * xs[i] - fs[i]
        })
        .collect();
    SampledFn1D::new(s.grid().clone(), values).expect("conjugate values are finite")
}

/// Biconjugate `(f*)*` evaluated at the original nodes of `f`. With a
/// slope grid containing all hull-edge slopes (see [`SlopeGrid::auto`])
/// this equals the convex envelope of `f` nodewise.
pub fn biconjugate(f: &SampledFn1D, s: &SlopeGrid) -> SampledFn1D {
    let fstar = lf_conjugate(f, s);
    // Conjugate of f* evaluated at the primal nodes.
    let dual = SlopeGrid::new(f.grid().clone());
    lf_conjugate(&fstar, &dual)
}

/// Biconjugate with the automatic slope grid.
pub fn biconjugate_auto(f: &SampledFn1D) -> SampledFn1D {
    biconjugate(f, &SlopeGrid::auto(f))
}

/// Scaled comparison used throughout: `|a - b| <= atol + rtol·max(|a|,|b|)`.
pub fn within_tol(a: f64, b: f64, atol: f64, rtol: f64) -> bool {
    (a - b).abs() <= atol + rtol * a.abs().max(b.abs())
}

/// Uniform slope grid spanning the secant range of `f`.
pub fn uniform_slope_grid(f: &SampledFn1D, m: usize) -> Result<SlopeGrid> {
    if m < 2 {
        return Err(Error::size(format!("need at least 2 slopes, got {m}")));
    }
    let xs = f.grid().nodes();
    let fs = f.values();
    let mut smin = f64::INFINITY;
    let mut smax = f64::NEG_INFINITY;
    for i in 0..xs.len() - 1 {
        let s = (fs[i + 1] - fs[i]) / (xs[i + 1] - xs[i]);
        smin = smin.min(s);
        smax = smax.max(s);
    }
    if smin == smax {
        smin -= 1.0;
        smax += 1.0;
    }
    Ok(SlopeGrid(Grid1D::uniform(smin, smax, m)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::envelope_1d;

    fn sample(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> SampledFn1D {
        SampledFn1D::from_fn(Grid1D::uniform(a, b, n).unwrap(), f).unwrap()
    }

    #[test]
    fn conjugate_of_half_square() {
        // f(x) = x^2/2 on [-1,1]; f*(s) = s^2/2 for |s| <= 1.
        let f = sample(-1.0, 1.0, 2001, |x| 0.5 * x * x);
        let s = SlopeGrid::from_slopes(vec![-1.0, 0.0, 0.5, 1.0]).unwrap();
        let fs = lf_conjugate_bruteforce(&f, &s);
        assert!((fs.values()[2] - 0.125).abs() < 1e-4);
        assert!((fs.values()[0] - 0.5).abs() < 1e-4);
        assert!((fs.values()[1] - 0.0).abs() < 1e-4);
        assert!((fs.values()[3] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn conjugate_of_abs() {
        let f = sample(-1.0, 1.0, 201, |x| x.abs());
        let s = SlopeGrid::from_slopes(vec![0.5, 2.0]).unwrap();
        let b = lf_conjugate_bruteforce(&f, &s);
        assert_eq!(b.values()[0], 0.0); // s=0.5: sx - |x| <= 0, equality at 0
        assert_eq!(b.values()[1], 1.0); // s=2: maximized at x=1
        let fast = lf_conjugate(&f, &s);
        assert_eq!(fast.values(), b.values());
    }

    #[test]
    fn fast_matches_bruteforce_on_random_functions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xc0);
        for _ in 0..25 {
            let n = rng.gen_range(2..=400);
            let m = rng.gen_range(2..=400);
            let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            if xs.len() < 2 {
                continue;
            }
            let fs: Vec<f64> = (0..xs.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = SampledFn1D::new(Grid1D::new(xs).unwrap(), fs).unwrap();
            let mut sl: Vec<f64> = (0..m).map(|_| rng.gen_range(-40.0..40.0)).collect();
            sl.sort_by(f64::total_cmp);
            sl.dedup();
            if sl.len() < 2 {
                continue;
            }
            let s = SlopeGrid::from_slopes(sl).unwrap();
            let a = lf_conjugate(&f, &s);
            let b = lf_conjugate_bruteforce(&f, &s);
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!(
                    (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0),
                    "{x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn affine_conjugate_is_endpoint_max() {
        let (a, b) = (0.7, -0.25);
        let f = sample(-1.0, 1.0, 41, |x| a * x + b);
        let s = SlopeGrid::from_slopes(vec![-2.0, 0.0, 0.7, 3.0]).unwrap();
        let fstar = lf_conjugate(&f, &s);
        for (&sj, &v) in s.slopes().iter().zip(fstar.values()) {
            let expect = ((sj - a) * -1.0 - b).max((sj - a) * 1.0 - b);
            assert!((v - expect).abs() <= 1e-12 + 1e-12 * expect.abs());
        }
    }

    #[test]
    fn conjugate_on_three_slopes_of_half_square() {
        let f = sample(-1.0, 1.0, 2001, |x| 0.5 * x * x);
        let s = SlopeGrid::from_slopes(vec![-1.0, 0.0, 1.0]).unwrap();
        let fs = lf_conjugate(&f, &s);
        assert!((fs.values()[0] - 0.5).abs() < 1e-4);
        assert!(fs.values()[1].abs() < 1e-4);
        assert!((fs.values()[2] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn conjugate_is_discretely_convex() {
        let f = sample(-1.0, 1.0, 301, |x| (5.0 * x).sin());
        let s = uniform_slope_grid(&f, 101).unwrap();
        let fstar = lf_conjugate(&f, &s);
        let xs = fstar.grid().nodes();
        let v = fstar.values();
        for i in 1..v.len() - 1 {
            let left = (v[i] - v[i - 1]) / (xs[i] - xs[i - 1]);
            let right = (v[i + 1] - v[i]) / (xs[i + 1] - xs[i]);
            assert!(right - left >= -1e-9);
        }
    }

    #[test]
    fn young_fenchel_holds_on_grid_pairs() {
        let f = sample(-1.0, 1.0, 101, |x| (3.0 * x).cos());
        let s = uniform_slope_grid(&f, 57).unwrap();
        let fstar = lf_conjugate(&f, &s);
        for (&x, &fx) in f.grid().nodes().iter().zip(f.values()) {
            for (&sj, &fsj) in s.slopes().iter().zip(fstar.values()) {
                let lhs = sj * x;
                let rhs = fx + fsj;
                assert!(lhs <= rhs + 1e-12 * (1.0 + lhs.abs().max(rhs.abs())));
            }
        }
    }

    #[test]
    fn order_reversal() {
        let f = sample(-1.0, 1.0, 101, |x| x * x);
        let g = sample(-1.0, 1.0, 101, |x| x * x + 0.3 * (1.0 + (7.0 * x).sin()));
        // f <= g nodewise, so f* >= g* on any shared slope grid.
        let s = uniform_slope_grid(&g, 33).unwrap();
        let fs = lf_conjugate(&f, &s);
        let gs = lf_conjugate(&g, &s);
        for (a, b) in fs.values().iter().zip(gs.values()) {
            assert!(a >= &(b - 1e-12));
        }
    }

    #[test]
    fn biconjugate_fixes_convex_input() {
        let f = sample(-1.0, 1.0, 101, |x| x * x);
        let bi = biconjugate_auto(&f);
        for (a, b) in bi.values().iter().zip(f.values()) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn biconjugate_of_bump_is_chord() {
        let f = SampledFn1D::new(
            Grid1D::new(vec![-1.0, 0.0, 1.0]).unwrap(),
            vec![0.0, 1.0, 0.0],
        )
        .unwrap();
        let bi = biconjugate_auto(&f);
        for v in bi.values() {
            assert!(v.abs() <= 1e-12);
        }
    }

    #[test]
    fn biconjugate_of_double_well_is_zero_at_origin() {
        let g = Grid1D::uniform(-1.5, 1.5, 13).unwrap();
        let f = SampledFn1D::from_fn(g, |x| {
            let w = x * x - 1.0;
            w * w
        })
        .unwrap();
        let bi = biconjugate_auto(&f);
        let zero = f.grid().find_node(0.0).unwrap();
        assert!(bi.values()[zero].abs() <= 1e-12);
    }

    #[test]
    fn biconjugate_agrees_with_envelope_and_is_idempotent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xb1);
        for _ in 0..10 {
            let n = rng.gen_range(3..=200);
            let k: f64 = rng.gen_range(1.0..8.0);
            let g = Grid1D::uniform(-1.0, 1.0, n).unwrap();
            let f = SampledFn1D::from_fn(g, |x| (k * x).sin()).unwrap();
            let bi = biconjugate_auto(&f);
            let env = envelope_1d(&f);
            for (a, b) in bi.values().iter().zip(env.envelope.values()) {
                assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
            }
            let bi2 = biconjugate_auto(&bi);
            for (a, b) in bi2.values().iter().zip(bi.values()) {
                assert!((a - b).abs() <= 1e-10);
            }
        }
    }
}
