//! Piecewise paths in the x- or y-plane, root-encircling contours and path deformation.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::poly::RootSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    X,
    Y,
}

/// A straight segment or a circular arc, parameterised by s in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line { from: C64, to: C64 },
    /// Angles in radians; negative sweep runs clockwise.
    Arc { center: C64, radius: f64, start: f64, sweep: f64 },
}

impl Segment {
    pub fn line(from: C64, to: C64) -> Self {
        Segment::Line { from, to }
    }

    pub fn arc(center: C64, radius: f64, start: f64, sweep: f64) -> Self {
        Segment::Arc { center, radius, start, sweep }
    }

    pub fn point(&self, s: f64) -> C64 {
        match *self {
            Segment::Line { from, to } => from + (to - from) * s,
            Segment::Arc { center, radius, start, sweep } => {
                center + C64::from_polar(radius, start + sweep * s)
            }
        }
    }

    /// d point / ds.
    pub fn tangent(&self, s: f64) -> C64 {
        match *self {
            Segment::Line { from, to } => to - from,
            Segment::Arc { radius, start, sweep, .. } => {
                C64::i() * sweep * C64::from_polar(radius, start + sweep * s)
            }
        }
    }

    pub fn start(&self) -> C64 {
        match *self {
            Segment::Line { from, .. } => from,
            _ => self.point(0.0),
        }
    }

    pub fn end(&self) -> C64 {
        match *self {
            Segment::Line { to, .. } => to,
            _ => self.point(1.0),
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { from, to } => (to - from).norm(),
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn reversed(&self) -> Self {
        match *self {
            Segment::Line { from, to } => Segment::Line { from: to, to: from },
            Segment::Arc { center, radius, start, sweep } => {
                Segment::Arc { center, radius, start: start + sweep, sweep: -sweep }
            }
        }
    }

    /// Shortest distance from `p` to the segment.
    pub fn distance_to(&self, p: C64) -> f64 {
        match *self {
            Segment::Line { from, to } => {
                let d = to - from;
                let t = (((p - from) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
                (from + d * t - p).norm()
            }
            Segment::Arc { center, radius, start, sweep } => {
                let rel = p - center;
                let mut best = (self.start() - p).norm().min((self.end() - p).norm());
                if rel.norm() > 0.0 {
                    // Is the radial projection of p inside the swept angle range?
                    let phi = rel.arg();
                    let off = if sweep >= 0.0 {
                        (phi - start).rem_euclid(2.0 * PI)
                    } else {
                        (start - phi).rem_euclid(2.0 * PI)
                    };
                    if off <= sweep.abs() || sweep.abs() >= 2.0 * PI {
                        best = best.min((rel.norm() - radius).abs());
                    }
                } else {
                    best = radius;
                }
                best
            }
        }
    }

    /// Change of arg(z - p) along the segment.
    pub fn arg_change(&self, p: C64) -> f64 {
        match *self {
            Segment::Line { from, to } => ((to - p) / (from - p)).arg(),
            Segment::Arc { .. } => {
                let pieces = 64;
                (0..pieces)
                    .map(|k| {
                        let a = self.point(k as f64 / pieces as f64);
                        let b = self.point((k + 1) as f64 / pieces as f64);
                        ((b - p) / (a - p)).arg()
                    })
                    .sum()
            }
        }
    }
}

/// A continuous chain of segments in one complex plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    plane: Plane,
    segments: Vec<Segment>,
}

impl Path {
    /// Straight segments through the given nodes.
    pub fn polyline(plane: Plane, nodes: &[C64]) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidInput("a path needs at least two nodes".into()));
        }
        for w in nodes.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidInput(format!("repeated path node {}", w[0])));
            }
            if !(w[0].is_finite() && w[1].is_finite()) {
                return Err(Error::InvalidInput("non-finite path node".into()));
            }
        }
        Ok(Path {
            plane,
            segments: nodes.windows(2).map(|w| Segment::line(w[0], w[1])).collect(),
        })
    }

    pub fn line(plane: Plane, from: C64, to: C64) -> Result<Self> {
        Self::polyline(plane, &[from, to])
    }

    pub fn from_segments(plane: Plane, segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidInput("empty segment list".into()));
        }
        for w in segments.windows(2) {
            let gap = (w[0].end() - w[1].start()).norm();
            if gap > 1e-12 * (1.0 + w[1].start().norm()) {
                return Err(Error::InvalidInput(format!("segments not continuous (gap {gap:e})")));
            }
        }
        Ok(Path { plane, segments })
    }

    pub fn plane(&self) -> Plane {
        self.plane
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn start(&self) -> C64 {
        self.segments[0].start()
    }

    pub fn end(&self) -> C64 {
        self.segments[self.segments.len() - 1].end()
    }

    /// Segment start points followed by the final end point.
    pub fn nodes(&self) -> Vec<C64> {
        let mut v: Vec<C64> = self.segments.iter().map(|s| s.start()).collect();
        v.push(self.end());
        v
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.length()).sum()
    }

    pub fn is_closed(&self) -> bool {
        (self.start() - self.end()).norm() <= 1e-12 * (1.0 + self.start().norm())
    }

    pub fn reversed(&self) -> Self {
        Path {
            plane: self.plane,
            segments: self.segments.iter().rev().map(|s| s.reversed()).collect(),
        }
    }

    /// Concatenation; `other` must start where `self` ends.
    pub fn then(&self, other: &Path) -> Result<Self> {
        let mut segs = self.segments.clone();
        segs.extend_from_slice(&other.segments);
        Self::from_segments(self.plane, segs)
    }

    /// `per_segment` evenly spaced points on every segment, endpoints included once.
    pub fn sample(&self, per_segment: usize) -> Vec<C64> {
        let m = per_segment.max(1);
        let mut out = vec![self.start()];
        for seg in &self.segments {
            for k in 1..=m {
                out.push(seg.point(k as f64 / m as f64));
            }
        }
        out
    }

    /// Smallest distance from the path to any of the points, with the index of the closest one.
    pub fn clearance(&self, points: &[C64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, &p) in points.iter().enumerate() {
            for seg in &self.segments {
                let d = seg.distance_to(p);
                if d < best.1 {
                    best = (i, d);
                }
            }
        }
        best
    }

    /// Total change of arg(z - p) divided by 2 pi; an integer for closed paths.
    pub fn winding_number(&self, p: C64) -> f64 {
        self.segments.iter().map(|s| s.arg_change(p)).sum::<f64>() / (2.0 * PI)
    }

    /// Winding of the path against every root.
    pub fn winding_record(&self, roots: &RootSet) -> Vec<f64> {
        roots.roots().iter().map(|&p| self.winding_number(p)).collect()
    }
}

/// Side on which a deformed path passes an offending root, relative to the travel direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Replaces the parts of straight segments that come within `eps` of a root with arcs of radius `eps`.
/// Every root is passed on the left.
pub fn deform_path(path: &Path, roots: &RootSet, eps: f64) -> Result<Path> {
    deform_path_sided(path, roots, eps, &vec![Side::Left; roots.len()])
}

/// As [`deform_path`], with the side chosen per root.
pub fn deform_path_sided(path: &Path, roots: &RootSet, eps: f64, sides: &[Side]) -> Result<Path> {
    if sides.len() != roots.len() {
        return Err(Error::InvalidInput("one side per root required".into()));
    }
    let tight = eps * (1.0 - 1e-12);
    for &end in &[path.start(), path.end()] {
        let (j, d) = roots.nearest(end);
        if d < tight {
            return Err(Error::EndpointTooClose { point: end, root: roots.get(j), eps });
        }
    }
    let mut out = Vec::new();
    for seg in path.segments() {
        let Segment::Line { from, to } = *seg else {
            out.push(*seg);
            continue;
        };
        let d = to - from;
        let len = d.norm();
        let u = d / len;
        // (entry, exit, root) chord parameters along the segment
        let mut hits: Vec<(f64, f64, usize)> = Vec::new();
        for (j, &p) in roots.roots().iter().enumerate() {
            let rel = (p - from) * u.conj();
            let (t0, h) = (rel.re, rel.im);
            if h.abs() >= tight {
                continue;
            }
            let half = (eps * eps - h * h).sqrt();
            let (t_in, t_out) = (t0 - half, t0 + half);
            if t_out <= 0.0 || t_in >= len {
                continue;
            }
            if t_in < 0.0 || t_out > len {
                let point = if t_in < 0.0 { from } else { to };
                return Err(Error::EndpointTooClose { point, root: p, eps });
            }
            hits.push((t_in, t_out, j));
        }
        hits.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut cursor = from;
        for (t_in, t_out, j) in hits {
            let p = roots.get(j);
            let entry = from + u * t_in;
            let exit = from + u * t_out;
            if (entry - cursor).norm() > 0.0 {
                out.push(Segment::line(cursor, entry));
            }
            let a_in = (entry - p).arg();
            let a_out = (exit - p).arg();
            let sweep = match sides[j] {
                Side::Left => -(a_in - a_out).rem_euclid(2.0 * PI),
                Side::Right => (a_out - a_in).rem_euclid(2.0 * PI),
            };
            out.push(Segment::arc(p, eps, a_in, sweep));
            cursor = exit;
        }
        if (to - cursor).norm() > 0.0 {
            out.push(Segment::line(cursor, to));
        }
    }
    Path::from_segments(path.plane(), out)
}

/// Closed-loop specification: winding alpha_j around each root p_j, circle radii and orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    winding: Vec<i32>,
    radii: Vec<f64>,
    orientation: i8,
}

impl Contour {
    pub fn new(winding: Vec<i32>, radii: Vec<f64>, orientation: i8) -> Result<Self> {
        if winding.len() != radii.len() {
            return Err(Error::InvalidInput("winding and radii lengths differ".into()));
        }
        if winding.iter().all(|&w| w == 0) {
            return Err(Error::InvalidInput("winding vector is zero".into()));
        }
        if radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::InvalidInput("contour radii must be positive".into()));
        }
        if orientation != 1 && orientation != -1 {
            return Err(Error::InvalidInput("orientation must be +1 or -1".into()));
        }
        Ok(Contour { winding, radii, orientation })
    }

    /// Counterclockwise single loop around root `index` with the default radius.
    pub fn around(roots: &RootSet, index: usize) -> Result<Self> {
        if index >= roots.len() {
            return Err(Error::InvalidInput(format!("no root #{index}")));
        }
        let mut w = vec![0; roots.len()];
        w[index] = 1;
        Self::with_default_radii(w, roots, 1)
    }

    /// Radii set to min_separation / 3.
    pub fn with_default_radii(winding: Vec<i32>, roots: &RootSet, orientation: i8) -> Result<Self> {
        let r = roots.min_separation() / 3.0;
        let n = winding.len();
        Self::new(winding, vec![r; n], orientation)
    }

    pub fn winding(&self) -> &[i32] {
        &self.winding
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    /// Net number of signed turns around root j.
    pub fn turns(&self, j: usize) -> i32 {
        self.winding[j] * self.orientation as i32
    }

    pub fn validate(&self, roots: &RootSet) -> Result<()> {
        if self.winding.len() != roots.len() {
            return Err(Error::InvalidInput(format!(
                "contour has {} entries but there are {} roots",
                self.winding.len(),
                roots.len()
            )));
        }
        let max = roots.min_separation() / 2.0;
        for &r in &self.radii {
            if r >= max || r < roots.eps_root() {
                return Err(Error::InvalidInput(format!(
                    "contour radius {r} outside [eps_root, min_separation/2)"
                )));
            }
        }
        Ok(())
    }

    /// Based loop realising the winding vector: for each root in index order, a leg out to its
    /// circle, the signed turns, and the leg back. Legs are deformed around other roots.
    pub fn loop_path(&self, base: C64, roots: &RootSet) -> Result<Path> {
        self.validate(roots)?;
        let eps = roots.eps_root();
        let mut path: Option<Path> = None;
        for j in 0..roots.len() {
            let turns = self.turns(j);
            if turns == 0 {
                continue;
            }
            let p = roots.get(j);
            let r = self.radii[j];
            let rel = base - p;
            if rel.norm() < eps {
                return Err(Error::EndpointTooClose { point: base, root: p, eps });
            }
            let angle = rel.arg();
            let touch = p + C64::from_polar(r, angle);
            let arc = Segment::arc(p, r, angle, 2.0 * PI * turns as f64);
            let piece = if (rel.norm() - r).abs() <= 1e-12 * (1.0 + r) {
                Path::from_segments(Plane::Y, vec![arc])?
            } else {
                // Legs keep well clear of the other roots when the base point allows it;
                // hugging them at eps_root inflates the higher F_k and their rounding error.
                let line = Path::line(Plane::Y, base, touch)?;
                let wide = 0.9 * r.min(roots.min_separation() / 3.0);
                let leg = match deform_path(&line, roots, wide) {
                    Ok(leg) => leg,
                    Err(Error::EndpointTooClose { .. }) => deform_path(&line, roots, eps)?,
                    Err(e) => return Err(e),
                };
                let circle = Path::from_segments(Plane::Y, vec![arc])?;
                leg.then(&circle)?.then(&leg.reversed())?
            };
            path = Some(match path {
                None => piece,
                Some(acc) => acc.then(&piece)?,
            });
        }
        path.ok_or_else(|| Error::InvalidInput("winding vector is zero".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ComplexPoly;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn roots_at(points: &[C64]) -> RootSet {
        ComplexPoly::from_roots(c(1.0, 0.0), points).roots(1e-14).unwrap()
    }

    #[test]
    fn semicircle_above_root_on_segment() {
        // y^2 - 1 has roots +-1; shift the path so the origin-centred check is explicit.
        let rs = roots_at(&[c(0.0, 0.0), c(5.0, 0.0)]);
        let path = Path::line(Plane::Y, c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
        let d = deform_path(&path, &rs, 0.1).unwrap();
        assert_eq!(d.segments().len(), 3);
        match d.segments()[1] {
            Segment::Arc { center, radius, sweep, .. } => {
                assert!(center.norm() < 1e-15);
                assert_eq!(radius, 0.1);
                assert!((sweep + PI).abs() < 1e-12);
            }
            _ => panic!("expected an arc"),
        }
        assert!((d.segments()[1].point(0.5) - c(0.0, 0.1)).norm() < 1e-12);
        assert!((d.start() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((d.end() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn clear_segment_unchanged() {
        let rs = roots_at(&[c(0.0, 0.0), c(5.0, 0.0)]);
        let path = Path::line(Plane::Y, c(-1.0, 1.0), c(1.0, 1.0)).unwrap();
        assert_eq!(deform_path(&path, &rs, 0.1).unwrap(), path);
    }

    #[test]
    fn two_roots_two_arcs_homotopic_to_upper_detour() {
        let rs = roots_at(&[c(-0.5, 0.0), c(0.5, 0.0)]);
        let path = Path::line(Plane::Y, c(-2.0, 0.0), c(2.0, 0.0)).unwrap();
        let d = deform_path(&path, &rs, 0.1).unwrap();
        let arcs = d.segments().iter().filter(|s| matches!(s, Segment::Arc { .. })).count();
        assert_eq!(arcs, 2);
        // Close with a return path that runs above both roots: net winding zero.
        let back = Path::polyline(Plane::Y, &[c(2.0, 0.0), c(2.0, 1.0), c(-2.0, 1.0), c(-2.0, 0.0)]).unwrap();
        let closed = d.then(&back).unwrap();
        for &p in rs.roots() {
            assert!(closed.winding_number(p).abs() < 1e-12);
        }
        // Closing below instead encircles both roots once, counterclockwise.
        let below = Path::polyline(Plane::Y, &[c(2.0, 0.0), c(2.0, -1.0), c(-2.0, -1.0), c(-2.0, 0.0)]).unwrap();
        let closed = d.then(&below).unwrap();
        for &p in rs.roots() {
            assert!((closed.winding_number(p) + 1.0).abs() < 1e-12, "{}", closed.winding_number(p));
        }
    }

    #[test]
    fn right_side_override() {
        let rs = roots_at(&[c(0.0, 0.0), c(5.0, 0.0)]);
        let path = Path::line(Plane::Y, c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
        let d = deform_path_sided(&path, &rs, 0.1, &[Side::Right, Side::Left]).unwrap();
        assert!((d.segments()[1].point(0.5) - c(0.0, -0.1)).norm() < 1e-12);
    }

    #[test]
    fn endpoint_too_close() {
        let rs = roots_at(&[c(0.0, 0.0), c(5.0, 0.0)]);
        let path = Path::line(Plane::Y, c(0.05, 0.0), c(1.0, 0.0)).unwrap();
        assert!(matches!(deform_path(&path, &rs, 0.1), Err(Error::EndpointTooClose { .. })));
    }

    #[test]
    fn loop_path_winds_once() {
        let rs = ComplexPoly::from_real(&[1.0 / 9.0, 0.0, 0.0, -3.0]).roots(1e-14).unwrap();
        let contour = Contour::around(&rs, 0).unwrap();
        let lp = contour.loop_path(c(1.1, 0.0), &rs).unwrap();
        assert!(lp.is_closed());
        let w = lp.winding_record(&rs);
        assert!((w[0] - 1.0).abs() < 1e-12 && w[1].abs() < 1e-12 && w[2].abs() < 1e-12, "{w:?}");
        let cw = Contour::new(vec![0, 2, -1], vec![0.15; 3], -1).unwrap();
        let w = cw.loop_path(c(0.0, 0.0), &rs).unwrap().winding_record(&rs);
        assert!(w[0].abs() < 1e-12 && (w[1] + 2.0).abs() < 1e-12 && (w[2] - 1.0).abs() < 1e-12, "{w:?}");
    }

    #[test]
    fn contour_validation() {
        assert!(Contour::new(vec![0, 0], vec![0.1, 0.1], 1).is_err());
        assert!(Contour::new(vec![1], vec![-0.1], 1).is_err());
        let rs = roots_at(&[c(-1.0, 0.0), c(1.0, 0.0)]);
        assert!(Contour::new(vec![1, 0], vec![1.5, 0.1], 1).unwrap().validate(&rs).is_err());
    }

    #[test]
    fn arc_distance() {
        let s = Segment::arc(c(0.0, 0.0), 1.0, 0.0, PI / 2.0);
        assert!((s.distance_to(c(2.0, 2.0)) - (8f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!((s.distance_to(c(-2.0, 0.0)) - 5f64.sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn deformed_paths_keep_clearance(
            pts in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2..6),
            a in (-3.0f64..3.0, -3.0f64..3.0),
            b in (-3.0f64..3.0, -3.0f64..3.0),
        ) {
            let pts: Vec<C64> = pts.into_iter().map(|(x, y)| c(x, y)).collect();
            let sep_ok = pts.iter().enumerate().all(|(i, &p)| pts[i + 1..].iter().all(|&q| (p - q).norm() > 0.3));
            prop_assume!(sep_ok);
            let rs = roots_at(&pts);
            let eps = rs.eps_root();
            let (a, b) = (c(a.0, a.1), c(b.0, b.1));
            prop_assume!(rs.nearest(a).1 > eps && rs.nearest(b).1 > eps && (a - b).norm() > 1e-3);
            let path = Path::line(Plane::Y, a, b).unwrap();
            let d = deform_path(&path, &rs, eps).unwrap();
            for z in d.sample(200) {
                prop_assert!(rs.nearest(z).1 >= eps * (1.0 - 1e-9));
            }
            prop_assert!((d.start() - a).norm() < 1e-12 && (d.end() - b).norm() < 1e-12);
            // Left-side detours: the deformed path and the chord differ by clockwise loops only.
            let closed = d.then(&path.reversed()).ok();
            if let Some(cl) = closed {
                for &p in rs.roots() {
                    let dist = path.segments()[0].distance_to(p);
                    if dist > eps {
                        prop_assert!(cl.winding_number(p).abs() < 1e-9);
                    }
                }
            }
        }
    }
}
