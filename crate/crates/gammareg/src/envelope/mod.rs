//! Convex envelopes of sampled functions.
//!
//! In 1D the envelope is the lower convex hull of the graph points,
//! computed by a monotone-chain sweep. In 2D it is read off the
//! downward-facing facets of the 3D convex hull of the point cloud:
//! every lower facet plane is an affine minorant of the data, and the
//! envelope at a query point is the largest plane value there.

pub mod hull3d;

use rayon::prelude::*;

use crate::error::Result;
use crate::gridfn::{SampledFn1D, SampledFn2D};
use hull3d::lower_hull_3d;

/// 1D envelope: values, contact flags, and the maximal affine stretches
/// strictly below the input between consecutive contact nodes.
#[derive(Debug, Clone)]
pub struct EnvelopeResult1D {
    pub envelope: SampledFn1D,
    pub contact: Vec<bool>,
    pub segments: Vec<(usize, usize)>,
}

/// Indices of the lower convex hull of `(xs[i], fs[i])`, left to right.
/// Points lying exactly on a hull chord are kept as hull vertices, so
/// contact flags stay exact for affine data.
pub(crate) fn lower_hull_indices(xs: &[f64], fs: &[f64]) -> Vec<usize> {
    let n = xs.len();
    let mut hull: Vec<usize> = Vec::with_capacity(n.min(64));
    for i in 0..n {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Drop b when it lies strictly above the chord from a to i.
            // Rounding-level deviations count as on-chord, which keeps
            // the sweep idempotent on its own output.
            let t1 = (fs[i] - fs[a]) * (xs[b] - xs[a]);
            let t2 = (fs[b] - fs[a]) * (xs[i] - xs[a]);
            if t1 - t2 < -4.0 * f64::EPSILON * (t1.abs() + t2.abs()) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Largest convex function below `f` on its grid, by a single
/// monotone-chain sweep over the graph points.
pub fn envelope_1d(f: &SampledFn1D) -> EnvelopeResult1D {
    let xs = f.grid().nodes();
    let fs = f.values();
    let hull = lower_hull_indices(xs, fs);
    let mut env = vec![0.0; fs.len()];
    let mut contact = vec![false; fs.len()];
    for &h in &hull {
        env[h] = fs[h];
        contact[h] = true;
    }
    let mut segments = Vec::new();
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b > a + 1 {
            segments.push((a, b));
            let slope = (fs[b] - fs[a]) / (xs[b] - xs[a]);
            for i in a + 1..b {
                env[i] = fs[a] + slope * (xs[i] - xs[a]);
            }
        }
    }
    let envelope = SampledFn1D::new(f.grid().clone(), env).expect("envelope values are finite");
    EnvelopeResult1D {
        envelope,
        contact,
        segments,
    }
}

/// 2D envelope on the masked nodes, with contact flags.
#[derive(Debug, Clone)]
pub struct EnvelopeResult2D {
    pub envelope: SampledFn2D,
    pub contact: Vec<bool>,
}

/// Largest convex function below `f` on the convex hull of its masked
/// nodes. Builds the 3D lower hull of the graph and evaluates the best
/// facet plane at every node.
pub fn envelope_2d(f: &SampledFn2D) -> Result<EnvelopeResult2D> {
    let points: Vec<[f64; 3]> = f
        .grid()
        .masked_nodes()
        .zip(f.values())
        .map(|((_, (x, y)), &v)| [x, y, v])
        .collect();
    let facets = lower_hull_3d(&points)?;

    let mut scale = 0.0f64;
    for v in f.values() {
        scale = scale.max(v.abs());
    }
    let contact_tol = 1e-9 * (1.0 + scale);

    // Every lower facet plane supports the cloud from below, so the
    // envelope at a node is the max plane value; the facet containing
    // the node attains it. Clamp at the sample so the minorant property
    // is exact nodewise.
    let values: Vec<f64> = points
        .par_iter()
        .map(|p| {
            let best = facets
                .iter()
                .map(|fa| fa.plane_z(p[0], p[1]))
                .fold(f64::NEG_INFINITY, f64::max);
            best.min(p[2])
        })
        .collect();

    let contact: Vec<bool> = values
        .iter()
        .zip(&points)
        .map(|(v, p)| p[2] - v <= contact_tol)
        .collect();
    let envelope = SampledFn2D::new(f.grid().clone(), values)?;
    Ok(EnvelopeResult2D { envelope, contact })
}
