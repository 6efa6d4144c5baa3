//! Planar geometry primitives shared by the solvers and the dissection code.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for orientation and intersection predicates.
pub const PREDICATE_TOL: f64 = 1e-12;

/// A point in the plane. Serialized as an `[x, y]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

impl From<Point> for (f64, f64) {
    fn from(p: Point) -> Self {
        (p.x, p.y)
    }
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Checked constructor rejecting NaN and infinite coordinates.
    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Point { x, y })
        } else {
            Err(Error::validation(format!("non-finite coordinate ({x}, {y})")))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        dist(*self, *other)
    }
}

/// Axis-aligned rectangle `[xmin, xmax] x [ymin, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl Rect {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        let all_finite = [xmin, ymin, xmax, ymax].iter().all(|v| v.is_finite());
        if !all_finite || xmin > xmax || ymin > ymax {
            return Err(Error::validation(format!(
                "invalid rectangle [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        Ok(Rect {
            xmin,
            ymin,
            xmax,
            ymax,
        })
    }

    pub fn unit() -> Self {
        Rect {
            xmin: 0.0,
            ymin: 0.0,
            xmax: 1.0,
            ymax: 1.0,
        }
    }

    /// Bounding box of a nonempty point set.
    pub fn bounding(points: impl IntoIterator<Item = Point>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut r = Rect {
            xmin: first.x,
            ymin: first.y,
            xmax: first.x,
            ymax: first.y,
        };
        for p in it {
            r.xmin = r.xmin.min(p.x);
            r.ymin = r.ymin.min(p.y);
            r.xmax = r.xmax.max(p.x);
            r.ymax = r.ymax.max(p.y);
        }
        Some(r)
    }

    /// Smallest square anchored at the lower-left corner of the bounding box.
    pub fn bounding_square(points: impl IntoIterator<Item = Point>) -> Option<Self> {
        let b = Rect::bounding(points)?;
        let side = b.width().max(b.height());
        Some(Rect {
            xmin: b.xmin,
            ymin: b.ymin,
            xmax: b.xmin + side,
            ymax: b.ymin + side,
        })
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn longest_side(&self) -> f64 {
        self.width().max(self.height())
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.width() + self.height())
    }

    pub fn center(&self) -> Point {
        Point::new(
            0.5 * (self.xmin + self.xmax),
            0.5 * (self.ymin + self.ymax),
        )
    }

    /// Closed containment test.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let r = Rect {
            xmin: self.xmin.max(other.xmin),
            ymin: self.ymin.max(other.ymin),
            xmax: self.xmax.min(other.xmax),
            ymax: self.ymax.min(other.ymax),
        };
        (r.xmin <= r.xmax && r.ymin <= r.ymax).then_some(r)
    }

    /// Corners in counter-clockwise order starting at `(xmin, ymin)`.
    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.xmin, self.ymin),
            Point::new(self.xmax, self.ymin),
            Point::new(self.xmax, self.ymax),
            Point::new(self.xmin, self.ymax),
        ]
    }

    pub fn edges(&self) -> [Segment; 4] {
        let c = self.corners();
        [
            Segment::new(c[0], c[1]),
            Segment::new(c[1], c[2]),
            Segment::new(c[2], c[3]),
            Segment::new(c[3], c[0]),
        ]
    }

    pub fn aspect_ratio(&self) -> Result<f64> {
        aspect_ratio(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        dist(self.a, self.b)
    }

    /// Point at parameter `t` in `[0, 1]` along the segment.
    pub fn lerp(&self, t: f64) -> Point {
        Point::new(
            self.a.x + t * (self.b.x - self.a.x),
            self.a.y + t * (self.b.y - self.a.y),
        )
    }
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Twice the signed area of `(a, b, c)`, positive for a left turn.
#[inline]
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Sign of [`orient`] with values within the relative tolerance mapped to 0.
fn orient_sign(a: Point, b: Point, c: Point) -> i8 {
    let o = orient(a, b, c);
    let scale = dist(a, b) * dist(a, c);
    if o.abs() <= PREDICATE_TOL * scale {
        0
    } else if o > 0.0 {
        1
    } else {
        -1
    }
}

/// True iff the open segments cross at a single point interior to both.
///
/// Touching at an endpoint and collinear overlap do not count.
pub fn segments_properly_intersect(s1: &Segment, s2: &Segment) -> bool {
    let o1 = orient_sign(s1.a, s1.b, s2.a);
    let o2 = orient_sign(s1.a, s1.b, s2.b);
    let o3 = orient_sign(s2.a, s2.b, s1.a);
    let o4 = orient_sign(s2.a, s2.b, s1.b);
    o1 * o2 < 0 && o3 * o4 < 0
}

/// Ratio of the longer to the shorter side.
pub fn aspect_ratio(r: &Rect) -> Result<f64> {
    let (w, h) = (r.width(), r.height());
    if w <= 0.0 || h <= 0.0 {
        return Err(Error::Degenerate(format!(
            "rectangle with sides {w} x {h} has no aspect ratio"
        )));
    }
    Ok(w.max(h) / w.min(h))
}

/// Edges `(parent, child)` of a Euclidean minimum spanning tree, Prim's method
/// over the implicit dense distance matrix.
pub fn mst_edges(points: &[Point]) -> Vec<(usize, usize)> {
    let n = points.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let cp = points[current];
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let d = dist(cp, points[v]);
            if d < best[v] {
                best[v] = d;
                parent[v] = current;
            }
            if best[v] < next_d {
                next_d = best[v];
                next = v;
            }
        }
        in_tree[next] = true;
        edges.push((parent[next], next));
        current = next;
    }
    edges
}

/// Total length of a Euclidean minimum spanning tree; 0 for fewer than two points.
pub fn mst_length(points: &[Point]) -> f64 {
    mst_edges(points)
        .into_iter()
        .map(|(u, v)| dist(points[u], points[v]))
        .sum()
}

/// Point minimizing the total distance to `a`, `b`, `c`.
///
/// Closed form via the barycentric coordinates of the first isogonic center;
/// degenerates to the vertex whose angle is at least 120 degrees.
pub fn fermat_point(a: Point, b: Point, c: Point) -> Point {
    let la = dist(b, c);
    let lb = dist(a, c);
    let lc = dist(a, b);
    let tiny = 1e-15 * (la + lb + lc).max(f64::MIN_POSITIVE);
    if lc <= tiny || lb <= tiny {
        return a;
    }
    if la <= tiny {
        return b;
    }
    let angle = |opp: f64, s1: f64, s2: f64| {
        ((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2))
            .clamp(-1.0, 1.0)
            .acos()
    };
    let ang_a = angle(la, lb, lc);
    let ang_b = angle(lb, la, lc);
    let ang_c = angle(lc, la, lb);
    const LIMIT: f64 = 2.0 * std::f64::consts::FRAC_PI_3;
    if ang_a >= LIMIT {
        return a;
    }
    if ang_b >= LIMIT {
        return b;
    }
    if ang_c >= LIMIT {
        return c;
    }
    let third = std::f64::consts::FRAC_PI_3;
    let wa = la / (ang_a + third).sin();
    let wb = lb / (ang_b + third).sin();
    let wc = lc / (ang_c + third).sin();
    let s = wa + wb + wc;
    Point::new(
        (wa * a.x + wb * b.x + wc * c.x) / s,
        (wa * a.y + wb * b.y + wc * c.y) / s,
    )
}

/// Weiszfeld iteration for the geometric median of `anchors`.
///
/// Stops after `max_iter` steps or once an update moves less than `tol`.
/// An iterate landing on an anchor is nudged by `1e-12` to avoid the
/// singular weight.
pub fn geometric_median(anchors: &[Point], start: Point, max_iter: usize, tol: f64) -> Point {
    if anchors.is_empty() {
        return start;
    }
    let mut x = start;
    for _ in 0..max_iter {
        let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
        for p in anchors {
            let mut d = dist(x, *p);
            if d < 1e-12 {
                x = Point::new(x.x + 1e-12, x.y + 1e-12);
                d = dist(x, *p).max(1e-12);
            }
            let w = 1.0 / d;
            sx += w * p.x;
            sy += w * p.y;
            sw += w;
        }
        let next = Point::new(sx / sw, sy / sw);
        let moved = dist(next, x);
        x = next;
        if moved < tol {
            break;
        }
    }
    x
}

/// Sum of distances from `x` to every anchor.
pub fn total_distance(x: Point, anchors: &[Point]) -> f64 {
    anchors.iter().map(|p| dist(x, *p)).sum()
}

/// Parses the point-list text format: one `x y` pair per line, blank lines
/// and `#` comments ignored.
pub fn parse_points(text: &str) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64> {
            let tok = tok.ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected two coordinates".into(),
            })?;
            tok.parse::<f64>().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("bad coordinate {tok:?}: {e}"),
            })
        };
        let x = parse(fields.next())?;
        let y = parse(fields.next())?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: i + 1,
                message: "trailing fields after x y".into(),
            });
        }
        let p = Point::try_new(x, y).map_err(|_| Error::Parse {
            line: i + 1,
            message: "non-finite coordinate".into(),
        })?;
        out.push(p);
    }
    Ok(out)
}

pub fn format_points(points: &[Point]) -> String {
    let mut s = String::with_capacity(points.len() * 40);
    for p in points {
        // `{:?}` on f64 prints the shortest round-tripping representation.
        let _ = writeln!(s, "{:?} {:?}", p.x, p.y);
    }
    s
}

pub fn read_points(path: impl AsRef<Path>) -> Result<Vec<Point>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_points(&text)
}

pub fn write_points(path: impl AsRef<Path>, points: &[Point]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_points(points)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn dist_examples() {
        assert_eq!(dist(p(0.0, 0.0), p(3.0, 4.0)), 5.0);
        assert_eq!(dist(p(0.3, 0.7), p(0.3, 0.7)), 0.0);
        assert!((dist(p(0.0, 0.0), p(1.0, 1.0)) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mst_examples() {
        assert_eq!(mst_length(&[p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)]), 2.0);
        assert_eq!(mst_length(&[p(0.0, 0.0)]), 0.0);
        assert_eq!(mst_length(&[]), 0.0);
        let square = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        assert!((mst_length(&square) - brute_force_mst(&square)).abs() < 1e-12);
        assert!((mst_length(&square) - 3.0).abs() < 1e-12);
    }

    /// Minimum over every (n-1)-edge subset that connects all vertices.
    fn brute_force_mst(points: &[Point]) -> f64 {
        let n = points.len();
        if n < 2 {
            return 0.0;
        }
        let all_edges: Vec<(usize, usize)> = (0..n).tuple_combinations().collect();
        let mut best = f64::INFINITY;
        for subset in all_edges.iter().combinations(n - 1) {
            let mut comp: Vec<usize> = (0..n).collect();
            fn find(c: &mut [usize], x: usize) -> usize {
                let mut r = x;
                while c[r] != r {
                    r = c[r];
                }
                c[x] = r;
                r
            }
            let mut ok = true;
            for &&(u, v) in &subset {
                let (ru, rv) = (find(&mut comp, u), find(&mut comp, v));
                if ru == rv {
                    ok = false;
                    break;
                }
                comp[ru] = rv;
            }
            if ok {
                let len: f64 = subset.iter().map(|&&(u, v)| dist(points[u], points[v])).sum();
                best = best.min(len);
            }
        }
        best
    }

    #[test]
    fn unit_square_has_sixteen_spanning_trees() {
        let edges: Vec<(usize, usize)> = (0..4).tuple_combinations().collect();
        let trees = edges
            .iter()
            .combinations(3)
            .filter(|s| {
                let mut seen = [false; 4];
                let mut adj = vec![vec![]; 4];
                for &&(u, v) in s {
                    adj[u].push(v);
                    adj[v].push(u);
                }
                let mut stack = vec![0];
                while let Some(x) = stack.pop() {
                    if !seen[x] {
                        seen[x] = true;
                        stack.extend(adj[x].iter().copied());
                    }
                }
                seen.iter().all(|&b| b)
            })
            .count();
        assert_eq!(trees, 16);
    }

    #[test]
    fn intersection_examples() {
        let s = |a: (f64, f64), b: (f64, f64)| Segment::new(a.into(), b.into());
        assert!(segments_properly_intersect(
            &s((0.0, 0.0), (1.0, 1.0)),
            &s((0.0, 1.0), (1.0, 0.0))
        ));
        assert!(!segments_properly_intersect(
            &s((0.0, 0.0), (1.0, 0.0)),
            &s((1.0, 0.0), (2.0, 0.0))
        ));
        assert!(!segments_properly_intersect(
            &s((0.0, 0.0), (1.0, 0.0)),
            &s((0.0, 1.0), (1.0, 1.0))
        ));
        // T-junction: endpoint on the other segment's interior
        assert!(!segments_properly_intersect(
            &s((0.0, 0.0), (2.0, 0.0)),
            &s((1.0, 0.0), (1.0, 1.0))
        ));
    }

    #[test]
    fn aspect_ratio_examples() {
        let r = |w: f64, h: f64| Rect::new(0.0, 0.0, w, h).unwrap();
        assert_eq!(aspect_ratio(&r(1.0, 5.0)).unwrap(), 5.0);
        assert_eq!(aspect_ratio(&r(1.0, 1.0)).unwrap(), 1.0);
        assert_eq!(aspect_ratio(&r(2.0, 3.0)).unwrap(), 1.5);
        assert!(matches!(aspect_ratio(&r(0.0, 3.0)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn rect_rejects_inverted_bounds() {
        assert!(Rect::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(Rect::new(0.0, 0.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn fermat_point_equilateral_is_centroid() {
        let h = 3f64.sqrt() / 2.0;
        let (a, b, c) = (p(0.0, 0.0), p(1.0, 0.0), p(0.5, h));
        let f = fermat_point(a, b, c);
        assert!(dist(f, p(0.5, h / 3.0)) < 1e-12);
        assert!((total_distance(f, &[a, b, c]) - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fermat_point_obtuse_degenerates_to_vertex() {
        // 150 degree angle at the origin
        let ang = 150f64.to_radians();
        let (a, b, c) = (p(0.0, 0.0), p(1.0, 0.0), p(ang.cos(), ang.sin()));
        assert_eq!(fermat_point(a, b, c), a);
    }

    #[test]
    fn fermat_point_matches_weiszfeld() {
        let tri = [p(0.1, 0.2), p(0.9, 0.3), p(0.4, 0.8)];
        let closed = fermat_point(tri[0], tri[1], tri[2]);
        let iter = geometric_median(&tri, p(0.5, 0.5), 10_000, 1e-14);
        assert!(dist(closed, iter) < 1e-8, "{closed:?} vs {iter:?}");
    }

    #[test]
    fn point_file_round_trip_and_comments() {
        let text = "# header\n0.5 0.25\n\n  1e-3   7\n";
        let pts = parse_points(text).unwrap();
        assert_eq!(pts, vec![p(0.5, 0.25), p(0.001, 7.0)]);
        assert_eq!(parse_points(&format_points(&pts)).unwrap(), pts);
        assert!(matches!(parse_points("1 2 3"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_points("1\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_points("0 0\nnan 1"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn point_serializes_as_pair() {
        let s = serde_json::to_string(&p(1.5, -2.0)).unwrap();
        assert_eq!(s, "[1.5,-2.0]");
        let back: Point = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p(1.5, -2.0));
    }

    fn unit_point() -> impl Strategy<Value = Point> {
        (0.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y)| Point::new(x, y))
    }

    proptest! {
        #[test]
        fn triangle_inequality(a in unit_point(), b in unit_point(), c in unit_point()) {
            prop_assert!(dist(a, c) <= dist(a, b) + dist(b, c) + 1e-12);
            prop_assert_eq!(dist(a, b), dist(b, a));
        }

        #[test]
        fn mst_matches_brute_force(pts in prop::collection::vec(unit_point(), 1..=6)) {
            let fast = mst_length(&pts);
            let slow = brute_force_mst(&pts);
            prop_assert!((fast - slow).abs() < 1e-9, "{} vs {}", fast, slow);
        }

        #[test]
        fn intersection_is_symmetric(a in unit_point(), b in unit_point(),
                                     c in unit_point(), d in unit_point()) {
            let (s1, s2) = (Segment::new(a, b), Segment::new(c, d));
            prop_assert_eq!(segments_properly_intersect(&s1, &s2),
                            segments_properly_intersect(&s2, &s1));
            prop_assert_eq!(segments_properly_intersect(&s1, &s2),
                            segments_properly_intersect(&Segment::new(b, a), &s2));
        }
    }
}
