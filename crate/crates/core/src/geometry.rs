//! y-convex planar domains around the segment `C = [-1, 1] × {0}`.
//!
//! A domain is stored as two boundary graphs `phi1 >= phi2` over a shared
//! abscissa grid. This is exactly the representation in which the normal
//! geometric property (GNP) becomes the scalar inequality
//! `-1 <= x + phi_i(x) phi_i'(x) <= 1`, and in which Steiner symmetrization
//! acts slice by slice.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-length of the source segment `C`.
pub const SEGMENT_HALF_LENGTH: f64 = 1.0;

/// A point / vector in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Distance to the segment `[-half_len, half_len] × {0}`.
    pub fn dist_to_segment(self, half_len: f64) -> f64 {
        if self.x.abs() <= half_len {
            self.y.abs()
        } else {
            let tip = Vec2::new(half_len.copysign(self.x), 0.0);
            self.dist(tip)
        }
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// Which boundary graph a node belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Upper,
    Lower,
}

/// y-convex domain given by upper/lower boundary graphs on a shared grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphDomain {
    xs: Vec<f64>,
    phi1: Vec<f64>,
    phi2: Vec<f64>,
}

impl GraphDomain {
    /// Validates the grid and the containment invariants.
    pub fn new(xs: Vec<f64>, phi1: Vec<f64>, phi2: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 8 {
            return Err(Error::InvalidDomain(format!("grid too short: n = {n} < 8")));
        }
        if phi1.len() != n || phi2.len() != n {
            return Err(Error::InvalidDomain("grid/graph length mismatch".into()));
        }
        for v in xs.iter().chain(&phi1).chain(&phi2) {
            if !v.is_finite() {
                return Err(Error::InvalidDomain("non-finite value".into()));
            }
        }
        for i in 1..n {
            if xs[i] <= xs[i - 1] {
                return Err(Error::InvalidDomain(format!(
                    "abscissae not strictly increasing at index {i}"
                )));
            }
        }
        if xs[0] > -SEGMENT_HALF_LENGTH || xs[n - 1] < SEGMENT_HALF_LENGTH {
            return Err(Error::InvalidDomain(format!(
                "grid [{}, {}] does not span the segment C",
                xs[0],
                xs[n - 1]
            )));
        }
        let mut max_gap: f64 = 0.0;
        for i in 0..n {
            let gap = phi1[i] - phi2[i];
            if gap < 0.0 {
                return Err(Error::InvalidDomain(format!(
                    "phi1 < phi2 at x = {}",
                    xs[i]
                )));
            }
            if gap == 0.0 && i != 0 && i != n - 1 {
                return Err(Error::InvalidDomain(format!(
                    "graphs pinch at interior x = {}",
                    xs[i]
                )));
            }
            if xs[i].abs() <= SEGMENT_HALF_LENGTH && (phi1[i] < 0.0 || phi2[i] > 0.0) {
                return Err(Error::InvalidDomain(format!(
                    "segment C not contained: slice [{}, {}] at x = {}",
                    phi2[i], phi1[i], xs[i]
                )));
            }
            max_gap = max_gap.max(gap);
        }
        if max_gap <= 0.0 {
            return Err(Error::InvalidDomain("empty interior".into()));
        }
        Ok(Self { xs, phi1, phi2 })
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn upper(&self) -> &[f64] {
        &self.phi1
    }

    pub fn lower(&self) -> &[f64] {
        &self.phi2
    }

    pub fn x_left(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_right(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// Characteristic length used to scale tolerances.
    pub fn scale(&self) -> f64 {
        let height = self
            .phi1
            .iter()
            .zip(&self.phi2)
            .map(|(a, b)| a - b)
            .fold(0.0f64, f64::max);
        (self.x_right() - self.x_left()).max(height)
    }

    /// Linear interpolation of both graphs at abscissa `x` (clamped).
    pub fn interp(&self, x: f64) -> (f64, f64) {
        let n = self.n();
        if x <= self.xs[0] {
            return (self.phi1[0], self.phi2[0]);
        }
        if x >= self.xs[n - 1] {
            return (self.phi1[n - 1], self.phi2[n - 1]);
        }
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 1,
            k => k,
        };
        let t = (x - self.xs[i - 1]) / (self.xs[i] - self.xs[i - 1]);
        (
            self.phi1[i - 1] + t * (self.phi1[i] - self.phi1[i - 1]),
            self.phi2[i - 1] + t * (self.phi2[i] - self.phi2[i - 1]),
        )
    }

    /// Point-in-domain test against the interpolated graphs.
    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        if p.x < self.xs[0] - tol || p.x > self.x_right() + tol {
            return false;
        }
        let (top, bot) = self.interp(p.x);
        p.y <= top + tol && p.y >= bot - tol
    }

    /// Closed boundary polyline: upper graph left-to-right, then lower graph
    /// right-to-left (clockwise). Collapsed endpoints are not duplicated.
    pub fn boundary(&self) -> BoundaryLoop {
        let n = self.n();
        let mut points = Vec::with_capacity(2 * n);
        let mut sites = Vec::with_capacity(2 * n);
        for i in 0..n {
            points.push(Vec2::new(self.xs[i], self.phi1[i]));
            sites.push((Side::Upper, i));
        }
        let right_collapsed = self.phi1[n - 1] == self.phi2[n - 1];
        let left_collapsed = self.phi1[0] == self.phi2[0];
        for i in (0..n).rev() {
            if (i == n - 1 && right_collapsed) || (i == 0 && left_collapsed) {
                continue;
            }
            points.push(Vec2::new(self.xs[i], self.phi2[i]));
            sites.push((Side::Lower, i));
        }
        BoundaryLoop::from_points(points, sites)
    }

    /// Writes the boundary polyline exchange format:
    /// a `#`-header carrying n, x_L, x_R, then one `x phi1 phi2` triple per
    /// line at 17 significant digits (bit-exact round trip).
    pub fn write_polyline<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# n={} x_L={} x_R={}",
            self.n(),
            fmt17(self.x_left()),
            fmt17(self.x_right())
        )?;
        for i in 0..self.n() {
            writeln!(
                w,
                "{} {} {}",
                fmt17(self.xs[i]),
                fmt17(self.phi1[i]),
                fmt17(self.phi2[i])
            )?;
        }
        Ok(())
    }

    /// Reads the format produced by [`GraphDomain::write_polyline`].
    pub fn read_polyline<R: BufRead>(r: R) -> Result<Self> {
        let mut xs = Vec::new();
        let mut phi1 = Vec::new();
        let mut phi2 = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut it = trimmed.split_whitespace();
            let mut field = |name: &str| -> Result<f64> {
                it.next()
                    .ok_or_else(|| Error::Parse {
                        line: lineno + 1,
                        message: format!("missing field {name}"),
                    })?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse {
                        line: lineno + 1,
                        message: format!("bad {name}: {e}"),
                    })
            };
            xs.push(field("x")?);
            phi1.push(field("phi1")?);
            phi2.push(field("phi2")?);
        }
        GraphDomain::new(xs, phi1, phi2).map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })
    }
}

/// Formats with 17 significant digits; round-trips f64 exactly.
pub fn fmt17(v: f64) -> String {
    let mut s = String::new();
    write!(s, "{v:.16e}").unwrap();
    s
}

/// Discretized closed boundary curve with outward normals and arc-length
/// quadrature weights.
#[derive(Clone, Debug)]
pub struct BoundaryLoop {
    pub points: Vec<Vec2>,
    /// (side, grid index) for every loop node.
    pub sites: Vec<(Side, usize)>,
    pub normals: Vec<Vec2>,
    /// Trapezoidal arc-length weights; they sum to the perimeter.
    pub weights: Vec<f64>,
}

impl BoundaryLoop {
    fn from_points(points: Vec<Vec2>, sites: Vec<(Side, usize)>) -> Self {
        let q = points.len();
        let mut normals = Vec::with_capacity(q);
        let mut weights = Vec::with_capacity(q);
        for j in 0..q {
            let prev = points[(j + q - 1) % q];
            let next = points[(j + 1) % q];
            let e_in = points[j] - prev;
            let e_out = next - points[j];
            // Clockwise orientation: outward normal is the left rotation.
            let rot = |v: Vec2| Vec2::new(-v.y, v.x);
            normals.push((rot(e_in.normalized()) + rot(e_out.normalized())).normalized());
            weights.push(0.5 * (e_in.norm() + e_out.norm()));
        }
        Self {
            points,
            sites,
            normals,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Area by the trapezoidal rule on the slice heights.
pub fn area(d: &GraphDomain) -> f64 {
    let xs = d.xs();
    let mut sum = 0.0;
    for i in 1..d.n() {
        let h0 = d.upper()[i - 1] - d.lower()[i - 1];
        let h1 = d.upper()[i] - d.lower()[i];
        sum += 0.5 * (h0 + h1) * (xs[i] - xs[i - 1]);
    }
    sum
}

/// Length of the closed boundary polyline (both graphs plus the vertical
/// closures where the graphs do not meet).
pub fn perimeter(d: &GraphDomain) -> f64 {
    d.boundary().perimeter()
}

/// Minimum distance from the boundary nodes to the segment C.
pub fn clearance(d: &GraphDomain) -> f64 {
    d.boundary()
        .points
        .iter()
        .map(|p| p.dist_to_segment(SEGMENT_HALF_LENGTH))
        .fold(f64::INFINITY, f64::min)
}

/// One GNP violation: the s-value left `[-1, 1]` beyond tolerance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GnpViolation {
    pub index: usize,
    pub side: Side,
    pub value: f64,
}

/// Per-node report of the scalar GNP quantity `s = x + phi phi'`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GnpReport {
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    pub violations: Vec<GnpViolation>,
    pub passed: bool,
}

/// Checks the scalar GNP inequality `-1 <= x + phi phi' <= 1` on both graphs.
///
/// The derivative is taken on the half-square transform
/// `chi = (x^2 + phi^2) / 2`, whose slope equals `x + phi phi'` exactly and
/// stays bounded where `phi'` blows up at the closure tips. Centered
/// differences interiorly, one-sided at the endpoints. Endpoint excursions
/// whose limiting closure is a Type I arc are flagged, not failed.
pub fn check_gnp(d: &GraphDomain, tol_gnp: f64) -> GnpReport {
    let s1 = gnp_values(d.xs(), d.upper());
    let s2 = gnp_values(d.xs(), d.lower());
    let mut violations = Vec::new();
    let n = d.n();
    for (side, s) in [(Side::Upper, &s1), (Side::Lower, &s2)] {
        for (i, &v) in s.iter().enumerate() {
            if v.abs() <= 1.0 + tol_gnp {
                continue;
            }
            if (i == 0 || i == n - 1) && endpoint_is_type1_cap(d, i == 0) {
                continue; // limiting arc is Type I; flagged, not failed
            }
            violations.push(GnpViolation {
                index: i,
                side,
                value: v,
            });
        }
    }
    let passed = violations.is_empty();
    GnpReport {
        s1,
        s2,
        violations,
        passed,
    }
}

/// Finite differences of `chi = (x^2 + phi^2)/2`; slope equals `x + phi phi'`.
fn gnp_values(xs: &[f64], phi: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let chi: Vec<f64> = xs
        .iter()
        .zip(phi)
        .map(|(x, p)| 0.5 * (x * x + p * p))
        .collect();
    let mut s = vec![0.0; n];
    s[0] = (chi[1] - chi[0]) / (xs[1] - xs[0]);
    s[n - 1] = (chi[n - 1] - chi[n - 2]) / (xs[n - 1] - xs[n - 2]);
    for i in 1..n - 1 {
        s[i] = (chi[i + 1] - chi[i - 1]) / (xs[i + 1] - xs[i - 1]);
    }
    s
}

/// Do the few nodes next to a closure endpoint sit on a circle centered at
/// the adjacent endpoint of C, beyond that endpoint?
fn endpoint_is_type1_cap(d: &GraphDomain, left: bool) -> bool {
    let n = d.n();
    let center = if left {
        Vec2::new(-SEGMENT_HALF_LENGTH, 0.0)
    } else {
        Vec2::new(SEGMENT_HALF_LENGTH, 0.0)
    };
    let idx: Vec<usize> = if left {
        (0..3.min(n)).collect()
    } else {
        (n - 3.min(n)..n).collect()
    };
    let mut radii = Vec::new();
    for &i in &idx {
        let x = d.xs()[i];
        if (left && x > -SEGMENT_HALF_LENGTH + 1e-9) || (!left && x < SEGMENT_HALF_LENGTH - 1e-9) {
            return false;
        }
        radii.push(Vec2::new(x, d.upper()[i]).dist(center));
        radii.push(Vec2::new(x, d.lower()[i]).dist(center));
    }
    let mean: f64 = radii.iter().sum::<f64>() / radii.len() as f64;
    radii
        .iter()
        .all(|r| (r - mean).abs() <= 1e-3 * mean.max(1e-12))
}

/// Cone-form check of the normal geometric property.
///
/// For every boundary node `x`, no interior sample may lie in the cone
/// `K_x = { y : (y - x)·(c - x) <= 0 for all c in C }`; testing the two
/// segment endpoints suffices by linearity in `c`. Interior samples are drawn
/// on a deterministic subgrid of roughly `samples` points.
pub fn check_csp(d: &GraphDomain, samples: usize) -> bool {
    let side = (samples as f64).sqrt().ceil() as usize;
    let side = side.max(4);
    let y_min = d.lower().iter().cloned().fold(f64::INFINITY, f64::min);
    let y_max = d.upper().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (x_l, x_r) = (d.x_left(), d.x_right());

    let mut interior = Vec::new();
    for i in 0..side {
        let x = x_l + (x_r - x_l) * (i as f64 + 0.5) / side as f64;
        let (top, bot) = d.interp(x);
        let margin = 1e-3 * (top - bot).max(1e-12);
        for j in 0..side {
            let y = y_min + (y_max - y_min) * (j as f64 + 0.5) / side as f64;
            if y > bot + margin && y < top - margin {
                interior.push(Vec2::new(x, y));
            }
        }
    }

    let tips = [
        Vec2::new(-SEGMENT_HALF_LENGTH, 0.0),
        Vec2::new(SEGMENT_HALF_LENGTH, 0.0),
    ];
    let boundary = d.boundary();
    for b in &boundary.points {
        for y in &interior {
            let dir = *y - *b;
            let dn = dir.norm();
            if dn < 1e-12 {
                continue;
            }
            // Strict cone membership with a small angular slack.
            let in_cone = tips.iter().all(|c| {
                let cb = *c - *b;
                dir.dot(cb) < -1e-9 * dn * cb.norm()
            });
            if in_cone {
                return false;
            }
        }
    }
    true
}

/// Steiner symmetrization: every vertical slice recentered on the x-axis.
pub fn steiner_full(d: &GraphDomain) -> GraphDomain {
    let half: Vec<f64> = d
        .upper()
        .iter()
        .zip(d.lower())
        .map(|(a, b)| 0.5 * (a - b))
        .collect();
    let neg: Vec<f64> = half.iter().map(|h| -h).collect();
    GraphDomain::new(d.xs().to_vec(), half, neg).expect("symmetrized domain stays valid")
}

/// Continuous Steiner symmetrization: the midline of every vertical slice
/// drifts toward the axis, `phi_i^t = phi_i - t (phi1 + phi2) / 2`. Slice
/// lengths are preserved node-wise; `t = 1` reproduces [`steiner_full`].
pub fn steiner_continuous(d: &GraphDomain, t: f64) -> Result<GraphDomain> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "steiner parameter t = {t} outside [0, 1]"
        )));
    }
    let drift: Vec<f64> = d
        .upper()
        .iter()
        .zip(d.lower())
        .map(|(a, b)| t * 0.5 * (a + b))
        .collect();
    let phi1: Vec<f64> = d.upper().iter().zip(&drift).map(|(p, m)| p - m).collect();
    let phi2: Vec<f64> = d.lower().iter().zip(&drift).map(|(p, m)| p - m).collect();
    GraphDomain::new(d.xs().to_vec(), phi1, phi2)
}

/// Whether an arc is centered at an endpoint of C and stays beyond it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcType {
    I,
    II,
}

/// Where an arc lives on the boundary loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcSide {
    Upper,
    Lower,
    /// Spans a closure endpoint (cap across both graphs).
    Closure,
}

/// Maximal boundary run at constant distance from an endpoint of C.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArcSegment {
    pub side: ArcSide,
    /// Inclusive range of loop indices (cyclic; `start` may exceed `end`).
    pub start: usize,
    pub end: usize,
    pub center: Vec2,
    pub radius: f64,
    pub arc_type: ArcType,
}

impl ArcSegment {
    /// Number of loop nodes in the run.
    pub fn node_count(&self, loop_len: usize) -> usize {
        if self.end >= self.start {
            self.end - self.start + 1
        } else {
            loop_len - self.start + self.end + 1
        }
    }

    /// Loop indices covered by the run.
    pub fn indices(&self, loop_len: usize) -> Vec<usize> {
        (0..self.node_count(loop_len))
            .map(|k| (self.start + k) % loop_len)
            .collect()
    }
}

/// Smallest angle an arc must subtend around its center to be reported.
/// Filters out the spurious short "runs" every smooth boundary exhibits
/// near critical points of the distance to an endpoint of C.
const ARC_MIN_ANGLE: f64 = 0.1;

/// Detects maximal circular-arc runs centered at the endpoints of C.
///
/// `tol_arc` is relative to the arc radius. Each maximal constant-radius
/// run is split at the half-plane boundary: the part with `x <= -1` (for
/// center `(-1, 0)`; mirrored on the right) is Type I, the remainder
/// Type II. Pieces shorter than 3 nodes or subtending less than
/// [`ARC_MIN_ANGLE`] around the center are dropped.
pub fn classify_arcs(d: &GraphDomain, tol_arc: f64) -> Vec<ArcSegment> {
    let boundary = d.boundary();
    let q = boundary.len();
    let mut arcs = Vec::new();
    for (center, beyond_right) in [
        (Vec2::new(-SEGMENT_HALF_LENGTH, 0.0), false),
        (Vec2::new(SEGMENT_HALF_LENGTH, 0.0), true),
    ] {
        let radii: Vec<f64> = boundary.points.iter().map(|p| p.dist(center)).collect();
        let mut covered = vec![false; q];
        for start in 0..q {
            if covered[start] {
                continue;
            }
            // Grow the longest run starting here (cyclic), then backwards,
            // so reported runs are maximal.
            let mut run = vec![start];
            let mut lo = radii[start];
            let mut hi = radii[start];
            for step in 1..q {
                let j = (start + step) % q;
                let nlo = lo.min(radii[j]);
                let nhi = hi.max(radii[j]);
                if nhi - nlo > tol_arc * 0.5 * (nhi + nlo) {
                    break;
                }
                lo = nlo;
                hi = nhi;
                run.push(j);
            }
            for step in 1..q {
                let j = (start + q - step) % q;
                if run.contains(&j) {
                    break;
                }
                let nlo = lo.min(radii[j]);
                let nhi = hi.max(radii[j]);
                if nhi - nlo > tol_arc * 0.5 * (nhi + nlo) {
                    break;
                }
                lo = nlo;
                hi = nhi;
                run.insert(0, j);
            }
            if run.len() < 3 {
                continue;
            }
            for &j in &run {
                covered[j] = true;
            }
            let radius = run.iter().map(|&j| radii[j]).sum::<f64>() / run.len() as f64;
            let slack = 1e-9 * radius.max(1.0);
            let is_beyond = |j: usize| {
                let x = boundary.points[j].x;
                if beyond_right {
                    x >= SEGMENT_HALF_LENGTH - slack
                } else {
                    x <= -SEGMENT_HALF_LENGTH + slack
                }
            };
            // Split the run into maximal pieces with a constant half-plane
            // verdict; each piece is its own arc.
            let mut piece: Vec<usize> = Vec::new();
            let flush = |piece: &mut Vec<usize>, arcs: &mut Vec<ArcSegment>| {
                if piece.len() >= 3 && subtended_angle(&boundary, piece, center) >= ARC_MIN_ANGLE {
                    let sides: Vec<Side> = piece.iter().map(|&j| boundary.sites[j].0).collect();
                    let side = if sides.iter().all(|&s| s == Side::Upper) {
                        ArcSide::Upper
                    } else if sides.iter().all(|&s| s == Side::Lower) {
                        ArcSide::Lower
                    } else {
                        ArcSide::Closure
                    };
                    arcs.push(ArcSegment {
                        side,
                        start: piece[0],
                        end: *piece.last().unwrap(),
                        center,
                        radius,
                        arc_type: if is_beyond(piece[0]) {
                            ArcType::I
                        } else {
                            ArcType::II
                        },
                    });
                }
                piece.clear();
            };
            for &j in &run {
                if let Some(&prev) = piece.last() {
                    if is_beyond(j) != is_beyond(prev) {
                        flush(&mut piece, &mut arcs);
                    }
                }
                piece.push(j);
            }
            flush(&mut piece, &mut arcs);
        }
    }
    arcs
}

/// Total angle a node sequence sweeps around `center`.
fn subtended_angle(boundary: &BoundaryLoop, indices: &[usize], center: Vec2) -> f64 {
    let angle = |j: usize| {
        let v = boundary.points[j] - center;
        v.y.atan2(v.x)
    };
    let mut total = 0.0;
    for w in indices.windows(2) {
        let mut da = angle(w[1]) - angle(w[0]);
        while da > std::f64::consts::PI {
            da -= 2.0 * std::f64::consts::PI;
        }
        while da < -std::f64::consts::PI {
            da += 2.0 * std::f64::consts::PI;
        }
        total += da.abs();
    }
    total
}
