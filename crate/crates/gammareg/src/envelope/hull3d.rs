//! Downward-facing facets of a 3D convex hull.
//!
//! The hull is built by incremental insertion (quickhull with conflict
//! lists) using epsilon-thickened orientation predicates, then the
//! downward facets are extracted, coplanar patches are re-hulled and
//! re-triangulated canonically, and the result is returned as plane
//! equations ready for envelope evaluation.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Relative thickness of the orientation predicates: the working
/// epsilon is `HULL_REL_EPS` times the bounding-box scale.
pub const HULL_REL_EPS: f64 = 1e-9;

/// Minimum |z| component of a unit normal for a facet to count as
/// downward-facing. Steeper facets are vertical walls; their plane
/// values blow up under projection and they carry no envelope
/// information.
pub const MIN_DOWNWARD_NZ: f64 = 1e-7;

/// One downward-facing triangular facet of the hull.
///
/// `normal` is the outward (downward) unit normal, `normal[2] < 0`, and
/// the plane is `normal . p = offset`. Every input point satisfies
/// `normal . p <= offset + eps`.
#[derive(Debug, Clone)]
pub struct Facet {
    pub indices: [usize; 3],
    pub normal: [f64; 3],
    pub offset: f64,
}

impl Facet {
    /// Height of the facet plane over `(x, y)`.
    pub fn plane_z(&self, x: f64, y: f64) -> f64 {
        (self.offset - self.normal[0] * x - self.normal[1] * y) / self.normal[2]
    }
}

#[inline]
fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Unit normal and offset of the plane through three points, or None if
/// the triangle is degenerate.
fn plane_through(pts: &[[f64; 3]], a: usize, b: usize, c: usize) -> Option<([f64; 3], f64)> {
    let n = cross(sub(pts[b], pts[a]), sub(pts[c], pts[a]));
    let len = norm(n);
    if len == 0.0 || !len.is_finite() {
        return None;
    }
    let n = [n[0] / len, n[1] / len, n[2] / len];
    Some((n, dot(n, pts[a])))
}

struct Face {
    v: [usize; 3],
    n: [f64; 3],
    d: f64,
    /// Neighbor face across edge (v[k], v[(k+1)%3]).
    adj: [usize; 3],
    /// Conflict points strictly outside this face, with the furthest first.
    pts: Vec<usize>,
    alive: bool,
}

impl Face {
    fn dist(&self, p: [f64; 3]) -> f64 {
        dot(self.n, p) - self.d
    }
    fn edge(&self, k: usize) -> (usize, usize) {
        (self.v[k], self.v[(k + 1) % 3])
    }
}

fn bbox_scale(pts: &[[f64; 3]]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in pts {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (0..3).map(|k| hi[k] - lo[k]).fold(0.0f64, f64::max)
}

enum InitialShape {
    Tetra([usize; 4]),
    Planar,
    Degenerate,
}

fn initial_shape(pts: &[[f64; 3]], eps: f64) -> InitialShape {
    let n = pts.len();
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for (i, p) in pts.iter().enumerate() {
        for k in 0..3 {
            if p[k] < pts[lo[k]][k] {
                lo[k] = i;
            }
            if p[k] > pts[hi[k]][k] {
                hi[k] = i;
            }
        }
    }
    let mut i0 = 0;
    let mut i1 = 0;
    let mut best = -1.0;
    for k in 0..3 {
        let d = norm(sub(pts[hi[k]], pts[lo[k]]));
        if d > best {
            best = d;
            i0 = lo[k];
            i1 = hi[k];
        }
    }
    if best <= eps {
        return InitialShape::Degenerate;
    }
    let axis = sub(pts[i1], pts[i0]);
    let axis_len = norm(axis);
    let mut i2 = usize::MAX;
    let mut best = eps;
    for i in 0..n {
        let d = norm(cross(sub(pts[i], pts[i0]), axis)) / axis_len;
        if d > best {
            best = d;
            i2 = i;
        }
    }
    if i2 == usize::MAX {
        return InitialShape::Degenerate;
    }
    let (pn, pd) = match plane_through(pts, i0, i1, i2) {
        Some(p) => p,
        None => return InitialShape::Degenerate,
    };
    let mut i3 = usize::MAX;
    let mut best = eps;
    for i in 0..n {
        let d = (dot(pn, pts[i]) - pd).abs();
        if d > best {
            best = d;
            i3 = i;
        }
    }
    if i3 == usize::MAX {
        return InitialShape::Planar;
    }
    InitialShape::Tetra([i0, i1, i2, i3])
}

/// Full convex hull faces via quickhull. Returns outward-oriented faces.
fn quickhull(pts: &[[f64; 3]], tetra: [usize; 4], eps: f64) -> Result<Vec<Face>> {
    let interior = {
        let mut c = [0.0; 3];
        for &i in &tetra {
            for k in 0..3 {
                c[k] += pts[i][k] / 4.0;
            }
        }
        c
    };
    let oriented_plane = |a: usize, b: usize, c: usize| -> Result<([f64; 3], f64)> {
        let (mut n, mut d) = plane_through(pts, a, b, c)
            .ok_or_else(|| Error::geometry("degenerate face during hull construction"))?;
        if dot(n, interior) > d {
            n = [-n[0], -n[1], -n[2]];
            d = -d;
        }
        Ok((n, d))
    };

    let mut faces: Vec<Face> = Vec::new();
    let [a, b, c, d] = tetra;
    for &(p, q, r) in &[(a, b, c), (a, b, d), (a, c, d), (b, c, d)] {
        let (n, off) = oriented_plane(p, q, r)?;
        faces.push(Face {
            v: [p, q, r],
            n,
            d: off,
            adj: [usize::MAX; 3],
            pts: Vec::new(),
            alive: true,
        });
    }
    // Link tetra adjacency through an edge map.
    {
        let mut edge_map: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for fid in 0..4 {
            for k in 0..3 {
                let (u, v) = faces[fid].edge(k);
                let key = (u.min(v), u.max(v));
                if let Some(&(g, gk)) = edge_map.get(&key) {
                    faces[fid].adj[k] = g;
                    faces[g].adj[gk] = fid;
                } else {
                    edge_map.insert(key, (fid, k));
                }
            }
        }
    }

    // Initial conflict assignment: each outside point goes to the face
    // it is furthest from.
    let mut stack: Vec<usize> = Vec::new();
    {
        let mut assignments: Vec<Vec<usize>> = vec![Vec::new(); 4];
        for i in 0..pts.len() {
            if tetra.contains(&i) {
                continue;
            }
            let mut best = eps;
            let mut best_f = usize::MAX;
            for (fid, f) in faces.iter().enumerate() {
                let dist = f.dist(pts[i]);
                if dist > best {
                    best = dist;
                    best_f = fid;
                }
            }
            if best_f != usize::MAX {
                assignments[best_f].push(i);
            }
        }
        for (fid, mut list) in assignments.into_iter().enumerate() {
            if !list.is_empty() {
                sort_furthest_first(&faces[fid], pts, &mut list);
                faces[fid].pts = list;
                stack.push(fid);
            }
        }
    }

    while let Some(fid) = stack.pop() {
        if !faces[fid].alive || faces[fid].pts.is_empty() {
            continue;
        }
        let apex = faces[fid].pts[0];
        let ap = pts[apex];

        // Visible set by BFS over adjacency.
        let mut visible = vec![fid];
        let mut seen: HashMap<usize, ()> = HashMap::new();
        seen.insert(fid, ());
        let mut qi = 0;
        while qi < visible.len() {
            let cur = visible[qi];
            qi += 1;
            for k in 0..3 {
                let g = faces[cur].adj[k];
                if g == usize::MAX {
                    return Err(Error::geometry("hull adjacency broke"));
                }
                if !seen.contains_key(&g) && faces[g].alive && faces[g].dist(ap) > eps {
                    seen.insert(g, ());
                    visible.push(g);
                }
            }
        }

        // Horizon edges: visible face edges whose neighbor is invisible.
        let mut horizon: Vec<((usize, usize), usize)> = Vec::new();
        for &vf in &visible {
            for k in 0..3 {
                let g = faces[vf].adj[k];
                if !seen.contains_key(&g) {
                    horizon.push((faces[vf].edge(k), g));
                }
            }
        }
        if horizon.len() < 3 {
            return Err(Error::geometry("hull horizon collapsed"));
        }

        // Pool the conflict points of dying faces.
        let mut orphans: Vec<usize> = Vec::new();
        for &vf in &visible {
            orphans.append(&mut faces[vf].pts);
            faces[vf].alive = false;
        }
        orphans.retain(|&i| i != apex);
        orphans.sort_unstable();
        orphans.dedup();

        // New faces from horizon edges to the apex.
        let first_new = faces.len();
        let mut ring: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for &((u, v), outside) in &horizon {
            let (n, off) = oriented_plane(u, v, apex)?;
            let fid_new = faces.len();
            faces.push(Face {
                v: [u, v, apex],
                n,
                d: off,
                adj: [usize::MAX; 3],
                pts: Vec::new(),
                alive: true,
            });
            // Glue to the surviving outside face across (u, v).
            faces[fid_new].adj[0] = outside;
            let mut linked = false;
            for k in 0..3 {
                let (gu, gv) = faces[outside].edge(k);
                if (gu.min(gv), gu.max(gv)) == (u.min(v), u.max(v)) {
                    faces[outside].adj[k] = fid_new;
                    linked = true;
                    break;
                }
            }
            if !linked {
                return Err(Error::geometry("hull horizon gluing failed"));
            }
            // Ring edges (v, apex) and (apex, u) pair up among new faces.
            for k in 1..3 {
                let (u2, v2) = faces[fid_new].edge(k);
                let key = (u2.min(v2), u2.max(v2));
                if let Some(&(g, gk)) = ring.get(&key) {
                    faces[fid_new].adj[k] = g;
                    faces[g].adj[gk] = fid_new;
                } else {
                    ring.insert(key, (fid_new, k));
                }
            }
        }
        if faces[first_new..].iter().any(|f| f.adj.contains(&usize::MAX)) {
            return Err(Error::geometry("hull ring linking failed"));
        }

        // Redistribute orphans to the new faces.
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); faces.len() - first_new];
        for &i in &orphans {
            let mut best = eps;
            let mut best_f = usize::MAX;
            for fid_new in first_new..faces.len() {
                let dist = faces[fid_new].dist(pts[i]);
                if dist > best {
                    best = dist;
                    best_f = fid_new;
                }
            }
            if best_f != usize::MAX {
                buckets[best_f - first_new].push(i);
            }
        }
        for (off, mut list) in buckets.into_iter().enumerate() {
            if !list.is_empty() {
                let fid_new = first_new + off;
                sort_furthest_first(&faces[fid_new], pts, &mut list);
                faces[fid_new].pts = list;
                stack.push(fid_new);
            }
        }
    }

    Ok(faces)
}

fn sort_furthest_first(face: &Face, pts: &[[f64; 3]], list: &mut [usize]) {
    if let Some((pos, _)) = list
        .iter()
        .enumerate()
        .map(|(k, &i)| (k, face.dist(pts[i])))
        .max_by(|a, b| a.1.total_cmp(&b.1))
    {
        list.swap(0, pos);
    }
}

/// 2D convex hull (counterclockwise polygon) of a subset of the cloud,
/// by monotone chain over the (x, y) projection. Returns input indices.
fn hull2d_ccw(pts: &[[f64; 3]], subset: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = subset.to_vec();
    order.sort_by(|&i, &j| {
        pts[i][0]
            .total_cmp(&pts[j][0])
            .then(pts[i][1].total_cmp(&pts[j][1]))
    });
    order.dedup_by(|a, b| pts[*a][0] == pts[*b][0] && pts[*a][1] == pts[*b][1]);
    let turn = |o: usize, a: usize, b: usize| -> f64 {
        (pts[a][0] - pts[o][0]) * (pts[b][1] - pts[o][1])
            - (pts[a][1] - pts[o][1]) * (pts[b][0] - pts[o][0])
    };
    let mut lower: Vec<usize> = Vec::new();
    for &i in &order {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], i) <= 0.0 {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in order.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], i) <= 0.0 {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Fan-triangulate a convex polygon canonically: apex at the
/// lowest-index vertex, triangles in boundary order, each index triple
/// sorted ascending.
fn fan_triangulate(polygon: &[usize]) -> Vec<[usize; 3]> {
    if polygon.len() < 3 {
        return Vec::new();
    }
    let apex_pos = polygon
        .iter()
        .enumerate()
        .min_by_key(|&(_, &v)| v)
        .map(|(k, _)| k)
        .unwrap();
    let m = polygon.len();
    let mut out = Vec::with_capacity(m - 2);
    for s in 1..m - 1 {
        let a = polygon[apex_pos];
        let b = polygon[(apex_pos + s) % m];
        let c = polygon[(apex_pos + s + 1) % m];
        let mut tri = [a, b, c];
        tri.sort_unstable();
        out.push(tri);
    }
    out
}

fn facet_from_triangle(pts: &[[f64; 3]], tri: [usize; 3]) -> Option<Facet> {
    let (mut n, mut d) = plane_through(pts, tri[0], tri[1], tri[2])?;
    if n[2] > 0.0 {
        n = [-n[0], -n[1], -n[2]];
        d = -d;
    }
    if n[2] > -MIN_DOWNWARD_NZ {
        return None;
    }
    Some(Facet {
        indices: tri,
        normal: n,
        offset: d,
    })
}

struct DisjointSet(Vec<usize>);

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet((0..n).collect())
    }
    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let r = self.find(self.0[i]);
            self.0[i] = r;
            r
        } else {
            i
        }
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Downward-facing facets of the convex hull of `points`.
///
/// Coplanar groups of facets are re-triangulated canonically so that
/// the output does not depend on insertion order, and points the
/// incremental pass absorbed as on-plane are recovered. Errors with
/// `GeometryError` when the cloud is degenerate (all collinear in the
/// plane projection).
pub fn lower_hull_3d(points: &[[f64; 3]]) -> Result<Vec<Facet>> {
    if points.len() < 3 {
        return Err(Error::geometry(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
        return Err(Error::domain("hull input must be finite"));
    }
    let scale = bbox_scale(points);
    if scale == 0.0 {
        return Err(Error::geometry("all hull points coincide"));
    }
    let eps = HULL_REL_EPS * scale;

    let planar_fallback = |plane_pts: &[usize]| -> Result<Vec<Facet>> {
        let polygon = hull2d_ccw(points, plane_pts);
        if polygon.len() < 3 {
            return Err(Error::geometry(
                "points are collinear in the (x, y) projection",
            ));
        }
        let mut facets = Vec::new();
        for tri in fan_triangulate(&polygon) {
            if let Some(f) = facet_from_triangle(points, tri) {
                facets.push(f);
            } else {
                return Err(Error::geometry(
                    "coplanar cloud lies in a vertical plane",
                ));
            }
        }
        sort_facets(&mut facets);
        return Ok(facets);
    };

    let tetra = match initial_shape(points, eps) {
        InitialShape::Tetra(t) => t,
        InitialShape::Planar => {
            let all: Vec<usize> = (0..points.len()).collect();
            return planar_fallback(&all);
        }
        InitialShape::Degenerate => {
            return Err(Error::geometry("points are collinear"));
        }
    };

    let faces = quickhull(points, tetra, eps)?;

    // Keep the downward-facing, non-vertical faces.
    let mut down: Vec<Facet> = Vec::new();
    for f in faces.iter().filter(|f| f.alive) {
        if f.n[2] < -MIN_DOWNWARD_NZ {
            let mut tri = f.v;
            tri.sort_unstable();
            down.push(Facet {
                indices: tri,
                normal: f.n,
                offset: f.d,
            });
        }
    }
    if down.is_empty() {
        return Err(Error::geometry("no downward-facing facets"));
    }

    // Cluster adjacent coplanar facets (they share an edge and agree on
    // the plane within tolerance) and re-triangulate each patch.
    let plane_tol = 8.0 * eps;
    let mut edge_owner: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (fi, f) in down.iter().enumerate() {
        for k in 0..3 {
            let (u, v) = (f.indices[k], f.indices[(k + 1) % 3]);
            edge_owner.entry((u.min(v), u.max(v))).or_default().push(fi);
        }
    }
    let mut ds = DisjointSet::new(down.len());
    for owners in edge_owner.values() {
        for a in 0..owners.len() {
            for b in a + 1..owners.len() {
                let (fa, fb) = (&down[owners[a]], &down[owners[b]]);
                let ncos = dot(fa.normal, fb.normal);
                if ncos >= 1.0 - 1e-12 && (fa.offset - fb.offset).abs() <= plane_tol {
                    ds.union(owners[a], owners[b]);
                }
            }
        }
    }
    let mut clusters: HashMap<usize, Vec<usize>> = HashMap::new();
    for fi in 0..down.len() {
        clusters.entry(ds.find(fi)).or_default().push(fi);
    }

    let mut facets: Vec<Facet> = Vec::new();
    for group in clusters.values() {
        if group.len() == 1 {
            facets.push(down[group[0]].clone());
            continue;
        }
        // Patch plane taken from the first member; collect every input
        // point on it (this recovers points swallowed as on-plane).
        let rep = &down[group[0]];
        let on_plane: Vec<usize> = (0..points.len())
            .filter(|&i| (dot(rep.normal, points[i]) - rep.offset).abs() <= plane_tol)
            .collect();
        let polygon = hull2d_ccw(points, &on_plane);
        if polygon.len() < 3 {
            for &fi in group {
                facets.push(down[fi].clone());
            }
            continue;
        }
        for tri in fan_triangulate(&polygon) {
            if let Some(f) = facet_from_triangle(points, tri) {
                facets.push(f);
            }
        }
    }

    sort_facets(&mut facets);
    Ok(facets)
}

fn sort_facets(facets: &mut [Facet]) {
    facets.sort_by(|a, b| a.indices.cmp(&b.indices));
}
