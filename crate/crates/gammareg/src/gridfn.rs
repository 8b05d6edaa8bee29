//! Grids and sampled functions with piecewise-linear evaluation.
//!
//! Everything downstream (transforms, envelopes, the perturbation
//! studies) consumes these types. A [`SampledFn1D`] is *defined* to be
//! piecewise linear between its nodes; the interpolation rule is part
//! of the contract, not an approximation detail.

use crate::error::{Error, Result};

/// A strictly increasing sequence of finite abscissae, length >= 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    nodes: Vec<f64>,
}

impl Grid1D {
    /// Build a grid from raw nodes, validating the invariants.
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::size(format!(
                "grid needs at least 2 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("grid nodes must be finite"));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("grid nodes must be strictly increasing"));
        }
        Ok(Grid1D { nodes })
    }

    /// `n` equally spaced nodes from `a` to `b` inclusive.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a < b) {
            return Err(Error::domain(format!("need a < b, got a={a}, b={b}")));
        }
        if n < 2 {
            return Err(Error::size(format!("need n >= 2, got {n}")));
        }
        // Symmetric ranges with an odd count mirror the positive half so
        // that node[i] == -node[n-1-i] holds exactly.
        if a == -b && n % 2 == 1 {
            let half = (n - 1) / 2;
            let mut nodes = Vec::with_capacity(n);
            for k in (1..=half).rev() {
                nodes.push(-(b * (k as f64) / (half as f64)));
            }
            nodes.push(0.0);
            for k in 1..=half {
                nodes.push(b * (k as f64) / (half as f64));
            }
            nodes[0] = a;
            nodes[n - 1] = b;
            return Grid1D::new(nodes);
        }
        let span = b - a;
        let den = (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| a + span * (i as f64) / den).collect();
        // Pin the endpoint; the rounding of span*i/den may drift off b.
        nodes[n - 1] = b;
        Grid1D::new(nodes)
    }

    /// Symmetric grid on `[a, b]` containing 0, with nodes clustered near
    /// the origin: node `k` sits at `±max(|a|,|b|)·(k/K)^p`, clipped to
    /// `[a, b]`. `p = 1` reduces to a uniform grid; larger `p` piles
    /// resolution onto the origin, where the perturbation studies need it.
    pub fn graded(a: f64, b: f64, n: usize, p: f64) -> Result<Self> {
        if !(a < 0.0 && 0.0 < b) {
            return Err(Error::domain(format!("need a < 0 < b, got a={a}, b={b}")));
        }
        if n < 3 || n % 2 == 0 {
            return Err(Error::size(format!("need odd n >= 3, got {n}")));
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::domain(format!("need grading exponent p >= 1, got {p}")));
        }
        let half = (n - 1) / 2;
        let scale = a.abs().max(b.abs());
        let mut pos = Vec::with_capacity(half);
        for k in 1..=half {
            let x = scale * ((k as f64) / (half as f64)).powf(p);
            pos.push(x.min(b));
        }
        pos[half - 1] = pos[half - 1].min(b);
        let mut nodes = Vec::with_capacity(n);
        for &x in pos.iter().rev() {
            nodes.push((-x).max(a));
        }
        nodes.push(0.0);
        nodes.extend_from_slice(&pos);
        nodes.dedup();
        Grid1D::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Index of the node equal to `x` (exact comparison), if any.
    pub fn find_node(&self, x: f64) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.total_cmp(&x)).ok()
    }

    /// Index `i` of the segment `[nodes[i], nodes[i+1]]` containing `x`.
    /// For `x` equal to an interior node, the left segment is returned.
    pub(crate) fn segment_of(&self, x: f64) -> Result<usize> {
        if x < self.first() || x > self.last() {
            return Err(Error::domain(format!(
                "x={x} outside grid range [{}, {}]",
                self.first(),
                self.last()
            )));
        }
        match self.nodes.binary_search_by(|n| n.total_cmp(&x)) {
            Ok(i) => Ok(i.min(self.len() - 2)),
            Err(i) => Ok(i - 1),
        }
    }

    /// Insert a node at `x` if not already present. Returns the new grid.
    pub fn with_node(&self, x: f64) -> Result<Self> {
        if self.find_node(x).is_some() {
            return Ok(self.clone());
        }
        if x < self.first() || x > self.last() {
            return Err(Error::domain(format!("cannot insert {x} outside grid span")));
        }
        let mut nodes = self.nodes.clone();
        let at = nodes.partition_point(|&n| n < x);
        nodes.insert(at, x);
        Grid1D::new(nodes)
    }
}

/// Function values on a [`Grid1D`], evaluated by linear interpolation
/// between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn1D {
    grid: Grid1D,
    values: Vec<f64>,
}

impl SampledFn1D {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::size(format!(
                "value count {} does not match grid length {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("sampled values must be finite"));
        }
        Ok(SampledFn1D { grid, values })
    }

    /// Sample a closure at every grid node.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        SampledFn1D::new(grid, values)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Piecewise-linear evaluation: exact at nodes, chord values between
    /// adjacent nodes, domain error outside the node span.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if let Some(i) = self.grid.find_node(x) {
            return Ok(self.values[i]);
        }
        let i = self.grid.segment_of(x)?;
        let (x0, x1) = (self.grid.nodes()[i], self.grid.nodes()[i + 1]);
        let (f0, f1) = (self.values[i], self.values[i + 1]);
        Ok(f0 + (f1 - f0) / (x1 - x0) * (x - x0))
    }

    /// Cumulative trapezoid-rule integral on the same grid: `F(first) = 0`
    /// and `F(x_k)` is the integral of `self` from the first node to `x_k`.
    pub fn cumulative_trapezoid(&self) -> SampledFn1D {
        let xs = self.grid.nodes();
        let mut out = Vec::with_capacity(self.len());
        out.push(0.0);
        let mut acc = 0.0;
        for i in 0..self.len() - 1 {
            acc += 0.5 * (xs[i + 1] - xs[i]) * (self.values[i] + self.values[i + 1]);
            out.push(acc);
        }
        SampledFn1D {
            grid: self.grid.clone(),
            values: out,
        }
    }

    /// Node-wise linear combination `self + c * other` on a shared grid.
    pub fn axpy(&self, c: f64, other: &SampledFn1D) -> Result<SampledFn1D> {
        if self.grid != other.grid {
            return Err(Error::domain("axpy requires identical grids"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        SampledFn1D::new(self.grid.clone(), values)
    }
}

/// Tensor grid on `[x0, x1] × [y0, y1]` with a boolean membership mask.
///
/// The mask is stored row-major with the x index outermost:
/// `mask[i * ny + j]` covers the node `(x_i, y_j)`.
#[derive(Debug, Clone)]
pub struct Grid2D {
    xs: Grid1D,
    ys: Grid1D,
    mask: Vec<bool>,
    /// Rank of each masked node among masked nodes, row-major.
    rank: Vec<usize>,
    masked_count: usize,
    disk_tol: Option<f64>,
}

impl Grid2D {
    /// Mask the unit disk: a node `(x, y)` is kept iff `x² + y² <= 1 + tol`.
    pub fn unit_disk(xs: Grid1D, ys: Grid1D, tol: f64) -> Result<Self> {
        if !(tol >= 0.0) || !tol.is_finite() {
            return Err(Error::domain(format!("disk tolerance must be >= 0, got {tol}")));
        }
        let mut mask = Vec::with_capacity(xs.len() * ys.len());
        for &x in xs.nodes() {
            for &y in ys.nodes() {
                mask.push(x * x + y * y <= 1.0 + tol);
            }
        }
        let mut g = Grid2D::from_mask(xs, ys, mask)?;
        g.disk_tol = Some(tol);
        Ok(g)
    }

    /// Arbitrary mask. Requires at least 3 masked nodes that are not all
    /// collinear in the plane.
    pub fn from_mask(xs: Grid1D, ys: Grid1D, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != xs.len() * ys.len() {
            return Err(Error::size(format!(
                "mask length {} does not match {}x{} grid",
                mask.len(),
                xs.len(),
                ys.len()
            )));
        }
        let mut rank = vec![usize::MAX; mask.len()];
        let mut count = 0usize;
        for (idx, &m) in mask.iter().enumerate() {
            if m {
                rank[idx] = count;
                count += 1;
            }
        }
        let g = Grid2D {
            xs,
            ys,
            mask,
            rank,
            masked_count: count,
            disk_tol: None,
        };
        if count < 3 || g.masked_all_collinear() {
            return Err(Error::geometry(
                "need at least 3 non-collinear masked nodes",
            ));
        }
        Ok(g)
    }

    fn masked_all_collinear(&self) -> bool {
        let mut pts = self.masked_nodes();
        let (ax, ay) = match pts.next() {
            Some(((_, _), p)) => p,
            None => return true,
        };
        let mut dir: Option<(f64, f64)> = None;
        for ((_, _), (x, y)) in pts {
            let (dx, dy) = (x - ax, y - ay);
            match dir {
                None => dir = Some((dx, dy)),
                Some((ux, uy)) => {
                    if (ux * dy - uy * dx).abs() > 0.0 {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn x_grid(&self) -> &Grid1D {
        &self.xs
    }

    pub fn y_grid(&self) -> &Grid1D {
        &self.ys
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    /// Tolerance the disk mask was built with, when it was.
    pub fn disk_tol(&self) -> Option<f64> {
        self.disk_tol
    }

    pub fn is_masked(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.ny() + j]
    }

    /// Rank of node `(i, j)` among masked nodes, if masked.
    pub fn masked_rank(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.rank[i * self.ny() + j];
        (r != usize::MAX).then_some(r)
    }

    pub fn masked_count(&self) -> usize {
        self.masked_count
    }

    /// Iterate masked nodes in row-major order as `((i, j), (x, y))`.
    pub fn masked_nodes(&self) -> impl Iterator<Item = ((usize, usize), (f64, f64))> + '_ {
        let ny = self.ny();
        self.mask.iter().enumerate().filter_map(move |(idx, &m)| {
            m.then(|| {
                let (i, j) = (idx / ny, idx % ny);
                ((i, j), (self.xs.nodes()[i], self.ys.nodes()[j]))
            })
        })
    }

    /// True iff the mask equals the unit-disk predicate at tolerance `tol`.
    pub fn mask_is_unit_disk(&self, tol: f64) -> bool {
        let ny = self.ny();
        self.mask.iter().enumerate().all(|(idx, &m)| {
            let (i, j) = (idx / ny, idx % ny);
            let (x, y) = (self.xs.nodes()[i], self.ys.nodes()[j]);
            m == (x * x + y * y <= 1.0 + tol)
        })
    }
}

/// Function values on the masked nodes of a [`Grid2D`], packed in
/// row-major masked order. Off-mask nodes carry no value at all.
#[derive(Debug, Clone)]
pub struct SampledFn2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl SampledFn2D {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.masked_count() {
            return Err(Error::size(format!(
                "value count {} does not match {} masked nodes",
                values.len(),
                grid.masked_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("sampled values must be finite"));
        }
        Ok(SampledFn2D { grid, values })
    }

    /// Sample a closure at every masked node.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = grid.masked_nodes().map(|(_, (x, y))| f(x, y)).collect();
        SampledFn2D::new(grid, values)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// Values in row-major masked order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, i: usize, j: usize) -> Option<f64> {
        self.grid.masked_rank(i, j).map(|r| self.values[r])
    }
}
