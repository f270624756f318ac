//! Convex hulls of rate-triple clouds.
//!
//! Point sets of any affine dimension up to three are handled: degenerate
//! clouds (a point, a segment, a planar polygon) are hulled inside their
//! affine span. Every hull carries outward facet planes so that two hulls can
//! be compared through [`hull_gap`].

use std::collections::HashSet;

pub type Point3 = [f64; 3];

fn sub(a: &Point3, b: &Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn dot(a: &Point3, b: &Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
fn cross(a: &Point3, b: &Point3) -> Point3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
fn norm(a: &Point3) -> f64 {
    dot(a, a).sqrt()
}
fn scale(a: &Point3, s: f64) -> Point3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// An outward half-space `normal · x <= offset` with unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Facet {
    pub normal: Point3,
    pub offset: f64,
}

impl Facet {
    fn through(normal: Point3, p: &Point3) -> Facet {
        Facet { normal, offset: dot(&normal, p) }
    }

    pub fn excess(&self, p: &Point3) -> f64 {
        dot(&self.normal, p) - self.offset
    }
}

#[derive(Clone, Debug)]
pub struct Hull {
    /// Affine dimension of the input cloud (0 to 3).
    pub dim: usize,
    /// Extreme points, sorted lexicographically.
    pub vertices: Vec<Point3>,
    pub facets: Vec<Facet>,
    /// Volume, area, length or zero depending on `dim`.
    pub measure: f64,
}

impl Hull {
    pub fn empty() -> Hull {
        Hull { dim: 0, vertices: Vec::new(), facets: Vec::new(), measure: 0.0 }
    }

    /// Largest facet violation of `p` (zero or negative when inside).
    pub fn excess(&self, p: &Point3) -> f64 {
        self.facets.iter().map(|f| f.excess(p)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, p: &Point3, tol: f64) -> bool {
        !self.vertices.is_empty() && self.excess(p) <= tol
    }
}

/// Largest amount by which a vertex of either hull lies outside the other.
pub fn hull_gap(a: &Hull, b: &Hull) -> f64 {
    if a.vertices.is_empty() || b.vertices.is_empty() {
        return if a.vertices.len() == b.vertices.len() { 0.0 } else { f64::INFINITY };
    }
    let one = |x: &Hull, y: &Hull| x.vertices.iter().map(|v| y.excess(v).max(0.0)).fold(0.0, f64::max);
    one(a, b).max(one(b, a))
}

fn lex(a: &Point3, b: &Point3) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

fn dedup(points: &[Point3]) -> Vec<Point3> {
    let mut pts: Vec<Point3> = points.iter().copied().filter(|p| p.iter().all(|v| v.is_finite())).collect();
    pts.sort_by(lex);
    pts.dedup_by(|a, b| sub(a, b).iter().all(|v| v.abs() <= 1e-12));
    pts
}

fn farthest(points: &[Point3], f: impl Fn(&Point3) -> f64) -> (usize, f64) {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, f(p)))
        .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc })
}

/// Orthonormal vectors completing `u` to a basis.
fn complement(u: &Point3) -> (Point3, Point3) {
    let pick = if u[0].abs() < 0.6 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let w1 = cross(u, &pick);
    let w1 = scale(&w1, 1.0 / norm(&w1));
    let w2 = cross(u, &w1);
    (w1, w2)
}

pub fn convex_hull(points: &[Point3]) -> Hull {
    let pts = dedup(points);
    if pts.is_empty() {
        return Hull::empty();
    }
    let extent = pts
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let eps = 1e-10 * extent;

    let p0 = pts[0];
    let (i1, d1) = farthest(&pts, |p| norm(&sub(p, &p0)));
    if d1 <= eps {
        let facets = (0..3)
            .flat_map(|k| {
                let mut e = [0.0; 3];
                e[k] = 1.0;
                [Facet::through(e, &p0), Facet::through(scale(&e, -1.0), &p0)]
            })
            .collect();
        return Hull { dim: 0, vertices: vec![p0], facets, measure: 0.0 };
    }
    let p1 = pts[i1];
    let u = scale(&sub(&p1, &p0), 1.0 / d1);
    let (i2, d2) = farthest(&pts, |p| norm(&cross(&u, &sub(p, &p0))));
    if d2 <= eps {
        let (lo, _) = farthest(&pts, |p| -dot(&u, p));
        let (hi, _) = farthest(&pts, |p| dot(&u, p));
        let (a, b) = (pts[lo], pts[hi]);
        let (w1, w2) = complement(&u);
        let facets = vec![
            Facet::through(u, &b),
            Facet::through(scale(&u, -1.0), &a),
            Facet::through(w1, &a),
            Facet::through(scale(&w1, -1.0), &a),
            Facet::through(w2, &a),
            Facet::through(scale(&w2, -1.0), &a),
        ];
        let mut vertices = vec![a, b];
        vertices.sort_by(lex);
        return Hull { dim: 1, vertices, facets, measure: norm(&sub(&b, &a)) };
    }
    let p2 = pts[i2];
    let n = cross(&sub(&p1, &p0), &sub(&p2, &p0));
    let n = scale(&n, 1.0 / norm(&n));
    let (i3, d3) = farthest(&pts, |p| dot(&n, &sub(p, &p0)).abs());
    if d3 <= eps {
        return planar_hull(&pts, p0, u, n);
    }
    spatial_hull(&pts, [0, i1, i2, i3], eps)
}

fn planar_hull(pts: &[Point3], origin: Point3, e1: Point3, n: Point3) -> Hull {
    let e2 = cross(&n, &e1);
    let coords: Vec<(f64, f64, usize)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d = sub(p, &origin);
            (dot(&d, &e1), dot(&d, &e2), i)
        })
        .collect();
    let ring = monotone_chain(coords);
    let mut facets = vec![Facet::through(n, &origin), Facet::through(scale(&n, -1.0), &origin)];
    let mut area = 0.0;
    for k in 0..ring.len() {
        let (ax, ay, ai) = ring[k];
        let (bx, by, _) = ring[(k + 1) % ring.len()];
        area += ax * by - bx * ay;
        // counter-clockwise ring: outward normal is (dy, -dx)
        let (dx, dy) = (bx - ax, by - ay);
        let len = (dx * dx + dy * dy).sqrt();
        if len > 0.0 {
            let out = [
                (e1[0] * dy - e2[0] * dx) / len,
                (e1[1] * dy - e2[1] * dx) / len,
                (e1[2] * dy - e2[2] * dx) / len,
            ];
            facets.push(Facet::through(out, &pts[ai]));
        }
    }
    let mut vertices: Vec<Point3> = ring.iter().map(|&(_, _, i)| pts[i]).collect();
    vertices.sort_by(lex);
    Hull { dim: 2, vertices, facets, measure: 0.5 * area.abs() }
}

/// Andrew's monotone chain; returns the hull counter-clockwise without
/// collinear points.
fn monotone_chain(mut pts: Vec<(f64, f64, usize)>) -> Vec<(f64, f64, usize)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let scale = pts.iter().fold(1.0f64, |m, p| m.max(p.0.abs()).max(p.1.abs()));
    let tol = 1e-12 * scale * scale;
    let turn = |o: &(f64, f64, usize), a: &(f64, f64, usize), b: &(f64, f64, usize)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64, usize)> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && turn(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= tol {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<(f64, f64, usize)> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && turn(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= tol {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[derive(Clone, Debug)]
struct Face {
    v: [usize; 3],
    facet: Facet,
}

fn make_face(pts: &[Point3], v: [usize; 3], inside: &Point3) -> Option<Face> {
    let n = cross(&sub(&pts[v[1]], &pts[v[0]]), &sub(&pts[v[2]], &pts[v[0]]));
    let len = norm(&n);
    if len == 0.0 {
        return None;
    }
    let mut f = Face { v, facet: Facet::through(scale(&n, 1.0 / len), &pts[v[0]]) };
    if f.facet.excess(inside) > 0.0 {
        f.v.swap(1, 2);
        f.facet = Facet { normal: scale(&f.facet.normal, -1.0), offset: -f.facet.offset };
    }
    Some(f)
}

/// Quickhull of a full-dimensional cloud: every face keeps the points lying
/// above it, and only the farthest such point is ever inserted.
fn spatial_hull(pts: &[Point3], seed: [usize; 4], eps: f64) -> Hull {
    let inside = scale(
        &seed.iter().fold([0.0; 3], |acc, &i| {
            [acc[0] + pts[i][0], acc[1] + pts[i][1], acc[2] + pts[i][2]]
        }),
        0.25,
    );
    let mut faces: Vec<Face> = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]
        .iter()
        .map(|t| make_face(pts, [seed[t[0]], seed[t[1]], seed[t[2]]], &inside).expect("non-degenerate seed"))
        .collect();
    let mut alive = vec![true; faces.len()];
    let mut outside: Vec<Vec<usize>> = vec![Vec::new(); faces.len()];
    for i in (0..pts.len()).filter(|i| !seed.contains(i)) {
        if let Some(f) = (0..faces.len()).find(|&f| faces[f].facet.excess(&pts[i]) > eps) {
            outside[f].push(i);
        }
    }

    let mut cursor = 0;
    while cursor < faces.len() {
        if !alive[cursor] || outside[cursor].is_empty() {
            cursor += 1;
            continue;
        }
        let fc = &faces[cursor].facet;
        let pi = *outside[cursor]
            .iter()
            .max_by(|&&a, &&b| fc.excess(&pts[a]).total_cmp(&fc.excess(&pts[b])).then(b.cmp(&a)))
            .expect("non-empty");
        let p = pts[pi];
        let visible: Vec<usize> = (0..faces.len()).filter(|&f| alive[f] && faces[f].facet.excess(&p) > eps).collect();
        let mut edges = HashSet::new();
        let mut orphans = Vec::new();
        for &f in &visible {
            let v = faces[f].v;
            edges.insert((v[0], v[1]));
            edges.insert((v[1], v[2]));
            edges.insert((v[2], v[0]));
            alive[f] = false;
            orphans.append(&mut outside[f]);
        }
        let mut horizon: Vec<(usize, usize)> = edges.iter().copied().filter(|(a, b)| !edges.contains(&(*b, *a))).collect();
        horizon.sort_unstable();
        let first_new = faces.len();
        for (a, b) in horizon {
            if let Some(f) = make_face(pts, [a, b, pi], &inside) {
                faces.push(f);
                alive.push(true);
                outside.push(Vec::new());
            }
        }
        orphans.sort_unstable();
        for q in orphans {
            if q == pi {
                continue;
            }
            if let Some(f) = (first_new..faces.len()).find(|&f| faces[f].facet.excess(&pts[q]) > eps) {
                outside[f].push(q);
            }
        }
    }
    let faces: Vec<Face> = faces.into_iter().zip(alive).filter(|(_, a)| *a).map(|(f, _)| f).collect();

    let mut used: Vec<usize> = faces.iter().flat_map(|f| f.v).collect();
    used.sort_unstable();
    used.dedup();
    let mut vertices: Vec<Point3> = used.iter().map(|&i| pts[i]).collect();
    vertices.sort_by(lex);
    let volume = faces
        .iter()
        .map(|f| {
            let a = sub(&pts[f.v[0]], &inside);
            let b = sub(&pts[f.v[1]], &inside);
            let c = sub(&pts[f.v[2]], &inside);
            dot(&a, &cross(&b, &c)).abs() / 6.0
        })
        .sum();
    Hull { dim: 3, vertices, facets: faces.into_iter().map(|f| f.facet).collect(), measure: volume }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> Vec<Point3> {
        let mut v = Vec::new();
        for i in 0..8 {
            v.push([(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]);
        }
        v
    }

    #[test]
    fn cube_with_interior_points() {
        let mut pts = cube();
        pts.push([0.5, 0.5, 0.5]);
        pts.push([0.5, 0.5, 1.0]); // on a face
        pts.push([0.2, 0.7, 0.1]);
        let h = convex_hull(&pts);
        assert_eq!(h.dim, 3);
        assert_eq!(h.vertices.len(), 8);
        assert!((h.measure - 1.0).abs() < 1e-12);
        for p in &pts {
            assert!(h.contains(p, 1e-12));
        }
        assert!(!h.contains(&[1.1, 0.5, 0.5], 1e-3));
    }

    #[test]
    fn planar_square() {
        let pts = vec![[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [2.0, 1.0, 0.0], [1.0, 0.5, 0.0], [1.0, 0.0, 0.0]];
        let h = convex_hull(&pts);
        assert_eq!(h.dim, 2);
        assert_eq!(h.vertices.len(), 4);
        assert!((h.measure - 2.0).abs() < 1e-12);
        assert!(h.excess(&[1.0, 0.5, 0.1]) > 0.09);
    }

    #[test]
    fn lower_dimensional() {
        let h = convex_hull(&[[1.0, 1.0, 1.0]]);
        assert_eq!(h.dim, 0);
        assert!(h.contains(&[1.0, 1.0, 1.0], 0.0));
        let h = convex_hull(&[[0.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.5, 0.5, 0.0]]);
        assert_eq!(h.dim, 1);
        assert_eq!(h.vertices.len(), 2);
        assert!((h.measure - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gap_between_hulls() {
        let a = convex_hull(&cube());
        let mut bigger = cube();
        bigger.push([1.5, 0.5, 0.5]);
        let b = convex_hull(&bigger);
        assert!((hull_gap(&a, &b) - 0.5).abs() < 1e-12);
        assert_eq!(hull_gap(&a, &a), 0.0);
    }

    #[test]
    fn random_clouds_contain_all_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let pts: Vec<Point3> = (0..400)
                .map(|_| [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>().powi(3)])
                .collect();
            let h = convex_hull(&pts);
            assert_eq!(h.dim, 3);
            for p in &pts {
                assert!(h.excess(p) <= 1e-9);
            }
            // every hull vertex is an input point
            for v in &h.vertices {
                assert!(pts.contains(v));
            }
        }
    }
}
