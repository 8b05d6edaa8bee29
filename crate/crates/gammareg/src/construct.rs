//! The counterexample factory: from a modulus φ build the even convex
//! profile v with v'' = ψ, the tent perturbation g, and their 2D lifts.
//!
//! ψ is taken as `|x|·φ⁻¹(min(|x|, φ(δ)))`, the extremal choice under
//! the required `O(x·φ⁻¹(x))` growth; v comes from two cumulative
//! trapezoid passes on the nonnegative half-grid and is mirrored, so
//! evenness is exact. Perturbing by `t·g` moves the minimum to `±x_t`
//! and opens a gap of order `t·φ(t)` between the function and its
//! convex envelope at the origin.

use crate::error::{Error, Result};
use crate::gridfn::{Grid1D, Grid2D, SampledFn1D, SampledFn2D};
use crate::io;

/// A modulus of continuity: continuous, strictly increasing, φ(0) = 0.
///
/// Either a power law `φ(t) = t^α` on `[0, 1]` or a piecewise-linear
/// monotone table on `[0, δ]` with δ the last abscissa.
#[derive(Debug, Clone)]
pub enum PhiSpec {
    Power { alpha: f64 },
    Table { ts: Vec<f64>, phis: Vec<f64> },
}

impl PhiSpec {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::spec(format!(
                "power modulus needs exponent alpha > 0, got {alpha}"
            )));
        }
        Ok(PhiSpec::Power { alpha })
    }

    pub fn table(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::spec("modulus table needs at least 2 rows"));
        }
        if pairs[0] != (0.0, 0.0) {
            return Err(Error::spec("modulus table must start at (0, 0)"));
        }
        if pairs.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
            return Err(Error::spec("modulus table must be finite"));
        }
        if pairs.windows(2).any(|w| w[0].0 >= w[1].0 || w[0].1 >= w[1].1) {
            return Err(Error::spec(
                "modulus table must be strictly increasing in both columns",
            ));
        }
        let (ts, phis) = pairs.into_iter().unzip();
        Ok(PhiSpec::Table { ts, phis })
    }

    /// Parse the text form: `power:ALPHA` or `table:PATH.csv`.
    pub fn parse(text: &str) -> Result<Self> {
        if let Some(alpha) = text.strip_prefix("power:") {
            let alpha: f64 = alpha
                .parse()
                .map_err(|_| Error::spec(format!("cannot parse exponent in {text:?}")))?;
            PhiSpec::power(alpha)
        } else if let Some(path) = text.strip_prefix("table:") {
            let csv = io::read_to_string(std::path::Path::new(path))?;
            PhiSpec::table(io::phi_table_from_csv(&csv)?)
        } else {
            Err(Error::spec(format!(
                "modulus must be power:ALPHA or table:PATH, got {text:?}"
            )))
        }
    }

    /// Text form for reports and metadata.
    pub fn text(&self) -> String {
        match self {
            PhiSpec::Power { alpha } => format!("power:{alpha}"),
            PhiSpec::Table { ts, .. } => format!("table[{} rows]", ts.len()),
        }
    }

    /// Right end of the domain of φ.
    pub fn delta(&self) -> f64 {
        match self {
            PhiSpec::Power { .. } => 1.0,
            PhiSpec::Table { ts, .. } => *ts.last().unwrap(),
        }
    }

    /// φ(δ), the largest attained modulus value.
    pub fn phi_max(&self) -> f64 {
        match self {
            PhiSpec::Power { .. } => 1.0,
            PhiSpec::Table { phis, .. } => *phis.last().unwrap(),
        }
    }

    /// φ(t) for `t` in `[0, δ]`; exactly 0 at 0.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.delta()).contains(&t) {
            return Err(Error::domain(format!(
                "t={t} outside modulus domain [0, {}]",
                self.delta()
            )));
        }
        Ok(match self {
            PhiSpec::Power { alpha } => {
                if t == 0.0 {
                    0.0
                } else {
                    t.powf(*alpha)
                }
            }
            PhiSpec::Table { ts, phis } => pl_eval(ts, phis, t),
        })
    }

    /// The unique t with φ(t) = y, for `y` in `[0, φ(δ)]`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(0.0..=self.phi_max()).contains(&y) {
            return Err(Error::domain(format!(
                "y={y} outside modulus range [0, {}]",
                self.phi_max()
            )));
        }
        Ok(match self {
            PhiSpec::Power { alpha } => {
                if y == 0.0 {
                    0.0
                } else {
                    y.powf(1.0 / *alpha)
                }
            }
            // Strict monotonicity makes the piecewise-linear inverse a
            // segment lookup plus one linear solve.
            PhiSpec::Table { ts, phis } => pl_eval(phis, ts, y),
        })
    }

    /// ψ(x) = |x|·φ⁻¹(min(|x|, φ(δ))): even, zero only at the origin,
    /// and O(x·φ⁻¹(x)) as x goes to 0 by construction.
    pub fn psi(&self, x: f64) -> f64 {
        let ax = x.abs();
        debug_assert!(ax <= 1.0 + 1e-12);
        let clamped = ax.min(self.phi_max());
        ax * self.inverse(clamped).expect("clamped into range")
    }
}

fn pl_eval(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.binary_search_by(|n| n.total_cmp(&x)) {
        Ok(i) => ys[i],
        Err(i) => {
            let (x0, x1) = (xs[i - 1], xs[i]);
            let (y0, y1) = (ys[i - 1], ys[i]);
            y0 + (y1 - y0) / (x1 - x0) * (x - x0)
        }
    }
}

/// The tent: `1/2 − |x|` on `[-1/2, 1/2]`, zero outside.
pub fn g_eval(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 0.5 {
        0.5 - ax
    } else {
        0.0
    }
}

/// A built counterexample: the modulus, the grid (guaranteed to contain
/// 0 and ±1/2), ψ and v' samples, and the even strictly convex v.
#[derive(Debug, Clone)]
pub struct CounterexampleKit {
    spec: PhiSpec,
    psi: Vec<f64>,
    vprime: Vec<f64>,
    v: SampledFn1D,
    delta: f64,
}

impl CounterexampleKit {
    pub fn spec(&self) -> &PhiSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Grid1D {
        self.v.grid()
    }

    pub fn v(&self) -> &SampledFn1D {
        &self.v
    }

    pub fn psi_values(&self) -> &[f64] {
        &self.psi
    }

    /// Samples of v' (odd across the origin).
    pub fn vprime_values(&self) -> &[f64] {
        &self.vprime
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// v_t = v + t·g sampled on the kit grid. The tent kinks at 0 and
    /// ±1/2 are grid nodes, so the sum is piecewise-linear exact.
    pub fn perturb(&self, t: f64) -> Result<SampledFn1D> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("perturbation needs t > 0, got {t}")));
        }
        let values = self
            .grid()
            .nodes()
            .iter()
            .zip(self.v.values())
            .map(|(&x, &v)| v + t * g_eval(x))
            .collect();
        SampledFn1D::new(self.grid().clone(), values)
    }

    /// CSV export: `x,psi,vprime,v`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("x,psi,vprime,v\n");
        for (((&x, &p), &dv), &v) in self
            .grid()
            .nodes()
            .iter()
            .zip(&self.psi)
            .zip(&self.vprime)
            .zip(self.v.values())
        {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                io::fmt_g17(x),
                io::fmt_g17(p),
                io::fmt_g17(dv),
                io::fmt_g17(v)
            );
        }
        out
    }
}

/// Integrate v'' = ψ with v(0) = v'(0) = 0 on the nonnegative half of
/// `grid` (two cumulative trapezoid passes) and mirror the result.
///
/// The grid must be exactly symmetric about 0 and span `[-1, 1]`. The
/// kink nodes ±1/2 are inserted when absent so that later tent
/// perturbations stay piecewise-linear exact.
pub fn build_v(spec: &PhiSpec, grid: &Grid1D) -> Result<CounterexampleKit> {
    let grid = grid.with_node(0.5)?.with_node(-0.5)?.with_node(0.0)?;
    let nodes = grid.nodes();
    let n = nodes.len();
    if nodes[0] != -1.0 || nodes[n - 1] != 1.0 {
        return Err(Error::domain("kit grid must span [-1, 1] exactly"));
    }
    for i in 0..n {
        if nodes[i] != -nodes[n - 1 - i] {
            return Err(Error::domain("kit grid must be symmetric about 0"));
        }
    }
    let center = (n - 1) / 2;
    debug_assert_eq!(nodes[center], 0.0);

    let half = Grid1D::new(nodes[center..].to_vec())?;
    let psi_half = SampledFn1D::from_fn(half, |x| spec.psi(x))?;
    let vprime_half = psi_half.cumulative_trapezoid();
    let v_half = vprime_half.cumulative_trapezoid();

    let mut psi = vec![0.0; n];
    let mut vprime = vec![0.0; n];
    let mut v = vec![0.0; n];
    for k in 0..=center {
        let i = center + k;
        let j = center - k;
        psi[i] = psi_half.values()[k];
        psi[j] = psi_half.values()[k];
        vprime[i] = vprime_half.values()[k];
        vprime[j] = -vprime_half.values()[k];
        v[i] = v_half.values()[k];
        v[j] = v_half.values()[k];
    }
    let v = SampledFn1D::new(grid, v)?;
    Ok(CounterexampleKit {
        spec: spec.clone(),
        psi,
        vprime,
        v,
        delta: spec.delta(),
    })
}

/// Lift to the disk: `u(x, y) = v(r)` with `r = sqrt(x² + y²)`,
/// `h(x, y) = g(max(|x|, |y|))`, and `u_t = u + t·h` on the masked
/// nodes. Returns `(u_t, u, h)`. `t = 0` is allowed for control runs.
pub fn build_2d(
    kit: &CounterexampleKit,
    grid2: &Grid2D,
    t: f64,
) -> Result<(SampledFn2D, SampledFn2D, SampledFn2D)> {
    let tol = grid2.disk_tol().unwrap_or(1e-12);
    if !grid2.mask_is_unit_disk(tol) {
        return Err(Error::domain("2D grid mask is not the unit disk"));
    }
    if !(t >= 0.0) {
        return Err(Error::domain(format!("need t >= 0, got {t}")));
    }
    let mut u_vals = Vec::with_capacity(grid2.masked_count());
    let mut h_vals = Vec::with_capacity(grid2.masked_count());
    let mut ut_vals = Vec::with_capacity(grid2.masked_count());
    for (_, (x, y)) in grid2.masked_nodes() {
        let r = (x * x + y * y).sqrt().min(1.0);
        let u = kit.v.eval(r)?;
        let h = g_eval(x.abs().max(y.abs()));
        u_vals.push(u);
        h_vals.push(h);
        ut_vals.push(u + t * h);
    }
    Ok((
        SampledFn2D::new(grid2.clone(), ut_vals)?,
        SampledFn2D::new(grid2.clone(), u_vals)?,
        SampledFn2D::new(grid2.clone(), h_vals)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power(alpha: f64) -> PhiSpec {
        PhiSpec::power(alpha).unwrap()
    }

    fn table_spec() -> PhiSpec {
        PhiSpec::table(vec![(0.0, 0.0), (0.5, 0.1), (1.0, 0.4)]).unwrap()
    }

    #[test]
    fn phi_eval_power_and_table() {
        assert_eq!(power(1.0).eval(0.25).unwrap(), 0.25);
        assert_eq!(power(2.0).eval(0.5).unwrap(), 0.25);
        assert!((table_spec().eval(0.25).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(power(1.0).eval(0.0).unwrap(), 0.0);
        assert!(power(1.0).eval(1.5).is_err());
        assert!(power(1.0).eval(-0.1).is_err());
    }

    #[test]
    fn phi_inverse_power_and_table() {
        assert!((power(2.0).inverse(0.04).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(power(1.0).inverse(0.7).unwrap(), 0.7);
        assert!((table_spec().inverse(0.05).unwrap() - 0.25).abs() < 1e-14);
        assert!(table_spec().inverse(0.5).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(PhiSpec::power(0.0).is_err());
        assert!(PhiSpec::power(-1.0).is_err());
        assert!(PhiSpec::table(vec![(0.0, 0.0), (0.5, 0.2), (1.0, 0.1)]).is_err());
        assert!(PhiSpec::table(vec![(0.1, 0.1), (1.0, 0.4)]).is_err());
        assert!(PhiSpec::parse("power:0").is_err());
        assert!(PhiSpec::parse("nope").is_err());
        assert!(matches!(PhiSpec::parse("power:1.5"), Ok(PhiSpec::Power { .. })));
    }

    #[test]
    fn psi_values() {
        // alpha=1: psi(x) = x^2.
        assert!((power(1.0).psi(0.3) - 0.09).abs() < 1e-15);
        // alpha=2: phi^{-1}(x) = sqrt(x), so psi(0.09) = 0.09 * 0.3.
        assert!((power(2.0).psi(0.09) - 0.027).abs() < 1e-15);
        assert_eq!(power(2.0).psi(0.0), 0.0);
        assert_eq!(table_spec().psi(0.0), 0.0);
        // Clamp above phi(delta): psi(x) = |x| * delta there.
        let t = table_spec();
        assert!((t.psi(0.9) - 0.9 * 1.0).abs() < 1e-15);
    }

    #[test]
    fn build_v_matches_closed_form_power1() {
        // v(x) = x^4/12 for alpha = 1.
        let grid = Grid1D::graded(-1.0, 1.0, 4001, 2.0).unwrap();
        let kit = build_v(&power(1.0), &grid).unwrap();
        let v = kit.v().eval(0.5).unwrap();
        assert!((v - 0.5f64.powi(4) / 12.0).abs() < 1e-6, "v(0.5) = {v}");
        let zero = kit.grid().find_node(0.0).unwrap();
        assert_eq!(kit.v().values()[zero], 0.0);
    }

    #[test]
    fn build_v_matches_closed_form_power2() {
        // v(x) = |x|^{3.5} / ((2.5)(3.5)) for alpha = 2.
        let grid = Grid1D::graded(-1.0, 1.0, 4001, 2.0).unwrap();
        let kit = build_v(&power(2.0), &grid).unwrap();
        let v = kit.v().eval(1.0).unwrap();
        assert!((v - 1.0 / 8.75).abs() < 1e-5, "v(1) = {v}");
    }

    #[test]
    fn build_v_is_even_convex_with_kink_nodes() {
        let grid = Grid1D::graded(-1.0, 1.0, 2001, 2.0).unwrap();
        let kit = build_v(&power(1.5), &grid).unwrap();
        let g = kit.grid();
        assert!(g.find_node(0.5).is_some() && g.find_node(-0.5).is_some());
        let n = g.len();
        let v = kit.v().values();
        for i in 0..n {
            assert_eq!(v[i], v[n - 1 - i]);
        }
        // Strictly increasing on (0, 1].
        let center = (n - 1) / 2;
        for i in center + 1..n {
            assert!(v[i] > v[i - 1]);
        }
        // Discrete convexity via nondecreasing secants.
        let xs = g.nodes();
        for i in 1..n - 1 {
            let l = (v[i] - v[i - 1]) / (xs[i] - xs[i - 1]);
            let r = (v[i + 1] - v[i]) / (xs[i + 1] - xs[i]);
            assert!(r >= l - 1e-15);
        }
    }

    #[test]
    fn build_v_rejects_asymmetric_grid() {
        let grid = Grid1D::new(vec![-1.0, -0.3, 0.0, 0.5, 1.0]).unwrap();
        assert!(matches!(
            build_v(&power(1.0), &grid),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn little_o_ratio_decreases_dyadically() {
        // v(x)/(x·phi^{-1}(x)) sampled at x = 2^{-k} must decrease and
        // end below 1/4 for the power family (closed form: const·x²).
        for alpha in [1.0, 2.0] {
            let spec = power(alpha);
            let grid = Grid1D::graded(-1.0, 1.0, 20001, 2.0).unwrap();
            let kit = build_v(&spec, &grid).unwrap();
            let mut prev = f64::INFINITY;
            let mut last = f64::NAN;
            for k in 3..=12 {
                let x = 2f64.powi(-k);
                let ratio = kit.v().eval(x).unwrap() / (x * spec.inverse(x).unwrap());
                assert!(ratio < prev, "alpha={alpha} k={k}: {ratio} !< {prev}");
                prev = ratio;
                last = ratio;
            }
            assert!(last < 0.25, "alpha={alpha}: final ratio {last}");
        }
    }

    #[test]
    fn g_eval_tent() {
        assert_eq!(g_eval(0.0), 0.5);
        assert_eq!(g_eval(0.5), 0.0);
        assert_eq!(g_eval(-0.25), 0.25);
        assert_eq!(g_eval(0.8), 0.0);
    }

    #[test]
    fn perturb_examples() {
        let grid = Grid1D::graded(-1.0, 1.0, 4001, 2.0).unwrap();
        let kit = build_v(&power(1.0), &grid).unwrap();
        let vt = kit.perturb(0.1).unwrap();
        let zero = vt.grid().find_node(0.0).unwrap();
        assert!((vt.values()[zero] - 0.05).abs() < 1e-15);
        let half = vt.grid().find_node(0.5).unwrap();
        assert_eq!(vt.values()[half], kit.v().values()[half]);
        assert!(kit.perturb(0.0).is_err());
        assert!(kit.perturb(-1.0).is_err());
    }

    #[test]
    fn perturb_argmin_matches_stationarity_oracle() {
        // For alpha=1, v = x^4/12, the interior minimum of v + t·g sits
        // at x_t = (3t)^{1/3} with m_t = v(x_t) + t(1/2 - x_t).
        let grid = Grid1D::graded(-1.0, 1.0, 20001, 2.0).unwrap();
        let kit = build_v(&power(1.0), &grid).unwrap();
        let t = 1e-3;
        let vt = kit.perturb(t).unwrap();
        let (mut arg, mut min) = (0usize, f64::INFINITY);
        for (i, &v) in vt.values().iter().enumerate() {
            if v < min {
                min = v;
                arg = i;
            }
        }
        let x_t = (3.0 * t).powf(1.0 / 3.0);
        let m_t = x_t.powi(4) / 12.0 + t * (0.5 - x_t);
        assert!((vt.grid().nodes()[arg].abs() - x_t).abs() < 2e-3);
        assert!((min - m_t).abs() < 1e-8 * m_t.abs());
    }

    #[test]
    fn lift_2d_values() {
        let grid = Grid1D::graded(-1.0, 1.0, 2001, 2.0).unwrap();
        let kit = build_v(&power(1.0), &grid).unwrap();
        // Tenths as literal nodes so 0.5, 0.6, 0.8 are exact hits.
        let tenths: Vec<f64> = (-10..=10).map(|k| k as f64 / 10.0).collect();
        let xs = Grid1D::new(tenths.clone()).unwrap();
        let ys = Grid1D::new(tenths).unwrap();
        let g2 = Grid2D::unit_disk(xs, ys, 1e-12).unwrap();
        let (ut, u, h) = build_2d(&kit, &g2, 0.1).unwrap();
        assert_eq!(h.value_at(10, 10), Some(0.5)); // h(0,0)
        assert_eq!(h.value_at(15, 13), Some(0.0)); // h(0.5, 0.3): max = 0.5
        let i06 = g2.x_grid().find_node(0.6).unwrap();
        let j08 = g2.y_grid().find_node(0.8).unwrap();
        let v1 = kit.v().eval(1.0).unwrap();
        let got = u.value_at(i06, j08).unwrap();
        assert!((got - v1).abs() < 1e-12, "u(0.6, 0.8) = {got}, v(1) = {v1}");
        // u_t = u + t·h nodewise.
        for ((a, b), c) in ut.values().iter().zip(u.values()).zip(h.values()) {
            assert_eq!(*a, b + 0.1 * c);
        }
    }

    #[test]
    fn row_restriction_equals_1d_exactly() {
        let grid = Grid1D::uniform(-1.0, 1.0, 41).unwrap();
        let kit = build_v(&power(1.0), &grid).unwrap();
        let xs = Grid1D::uniform(-1.0, 1.0, 41).unwrap();
        let ys = Grid1D::uniform(-1.0, 1.0, 41).unwrap();
        let g2 = Grid2D::unit_disk(xs, ys, 1e-12).unwrap();
        let t = 0.05;
        let (ut, _, _) = build_2d(&kit, &g2, t).unwrap();
        let vt = kit.perturb(t).unwrap();
        let j0 = g2.y_grid().find_node(0.0).unwrap();
        for (i, &x) in g2.x_grid().nodes().iter().enumerate() {
            let row = ut.value_at(i, j0).unwrap();
            let one_d = vt.eval(x).unwrap();
            assert_eq!(row, one_d, "mismatch at x={x}");
        }
    }

    #[test]
    fn build_2d_rejects_non_disk_mask() {
        let grid = Grid1D::uniform(-1.0, 1.0, 41).unwrap();
        let kit = build_v(&power(1.0), &grid).unwrap();
        let xs = Grid1D::uniform(-1.0, 1.0, 5).unwrap();
        let ys = Grid1D::uniform(-1.0, 1.0, 5).unwrap();
        let g2 = Grid2D::from_mask(xs, ys, vec![true; 25]).unwrap();
        assert!(matches!(
            build_2d(&kit, &g2, 0.1),
            Err(Error::Domain(_))
        ));
    }
}
