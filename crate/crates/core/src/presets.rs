//! Reference domain constructors used by tests, the CLI, and the demo.

use crate::error::Result;
use crate::geometry::GraphDomain;

/// Disk of radius `r` centered at `(cx, 0)`, sampled uniformly in angle so
/// the boundary nodes are near-uniform in arc length.
pub fn disk(cx: f64, r: f64, n: usize) -> Result<GraphDomain> {
    let mut xs = Vec::with_capacity(n);
    let mut phi1 = Vec::with_capacity(n);
    let mut phi2 = Vec::with_capacity(n);
    for i in 0..n {
        let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
        let x = cx - r * theta.cos();
        let y = (r * r - (x - cx) * (x - cx)).max(0.0).sqrt();
        xs.push(x);
        phi1.push(y);
        phi2.push(-y);
    }
    GraphDomain::new(xs, phi1, phi2)
}

/// Ellipse `x^2/a^2 + y^2/b^2 = 1`, sampled uniformly in angle.
pub fn ellipse(a: f64, b: f64, n: usize) -> Result<GraphDomain> {
    let mut xs = Vec::with_capacity(n);
    let mut phi1 = Vec::with_capacity(n);
    let mut phi2 = Vec::with_capacity(n);
    for i in 0..n {
        let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
        let x = -a * theta.cos();
        let y = b * (1.0 - (x / a) * (x / a)).max(0.0).sqrt();
        xs.push(x);
        phi1.push(y);
        phi2.push(-y);
    }
    GraphDomain::new(xs, phi1, phi2)
}

/// Stadium: the closed `r`-neighborhood of the segment C (two half-disk caps
/// centered at `(±1, 0)` joined by straight sides). Nodes are uniform in arc
/// length along the upper boundary.
pub fn stadium(r: f64, n: usize) -> Result<GraphDomain> {
    let quarter = 0.5 * std::f64::consts::PI * r;
    let total = 2.0 * quarter + 2.0;
    let mut xs = Vec::with_capacity(n);
    let mut phi1 = Vec::with_capacity(n);
    for i in 0..n {
        let s = total * i as f64 / (n - 1) as f64;
        let (x, y) = if s <= quarter {
            let alpha = s / r;
            (-1.0 - r * alpha.cos(), r * alpha.sin())
        } else if s <= quarter + 2.0 {
            (-1.0 + (s - quarter), r)
        } else {
            let beta = (s - quarter - 2.0) / r;
            (1.0 + r * beta.sin(), r * beta.cos())
        };
        xs.push(x);
        phi1.push(y.max(0.0));
    }
    // Guard against floating noise in the arc-length parameterization.
    xs[0] = -1.0 - r;
    *xs.last_mut().unwrap() = 1.0 + r;
    phi1[0] = 0.0;
    *phi1.last_mut().unwrap() = 0.0;
    let phi2: Vec<f64> = phi1.iter().map(|y| -y).collect();
    GraphDomain::new(xs, phi1, phi2)
}

/// Axis-aligned rectangle `[-hx, hx] × [-hy, hy]` (vertical closures at the
/// ends; the graphs do not meet).
pub fn rectangle(hx: f64, hy: f64, n: usize) -> Result<GraphDomain> {
    let xs: Vec<f64> = (0..n)
        .map(|i| -hx + 2.0 * hx * i as f64 / (n - 1) as f64)
        .collect();
    GraphDomain::new(xs, vec![hy; n], vec![-hy; n])
}

/// Stadium with a smooth bump of height `lam` added to the upper graph on
/// `|x| <= 1/2`. Stays GNP for `lam` up to ~0.2 and is asymmetric about the
/// axis, which makes it the reference input for symmetrization-descent tests.
pub fn perturbed_stadium(r: f64, lam: f64, n: usize) -> Result<GraphDomain> {
    let base = stadium(r, n)?;
    let xs = base.xs().to_vec();
    let phi1: Vec<f64> = xs
        .iter()
        .zip(base.upper())
        .map(|(x, y)| y + lam * bump(*x))
        .collect();
    GraphDomain::new(xs, phi1, base.lower().to_vec())
}

fn bump(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let c = (std::f64::consts::PI * x).cos();
        c * c
    } else {
        0.0
    }
}
