//! The explicit segment potential `w` and the Dirichlet solver.
//!
//! The potential of the source `a δ_C` is split as `u = w + h`: `w` is the
//! closed-form single-layer potential of the segment (harmonic off C, with
//! the correct normal-derivative jump `-a` across it), and `h` is a harmonic
//! correction fitted so that `u = 0` on the boundary. `h` is represented by
//! free-space logarithmic kernels centered at charge points placed outside
//! the domain along the outward normals (method of fundamental solutions),
//! with coefficients from a regularized least-squares collocation fit.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fmt17, BoundaryLoop, GraphDomain, Side, Vec2};
use crate::shape_opt::BoundaryField;

/// Uniform density `a` on the segment `[-eps, eps] × {0}`.
///
/// `eps = 1` is the segment C of the problem; smaller values shrink the
/// support toward a point source of mass `2 a eps`, which is the only case
/// with a closed-form Dirichlet solution (on a disk) and is used purely as a
/// solver oracle.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LineSource {
    intensity: f64,
    eps: f64,
}

impl LineSource {
    pub fn new(intensity: f64) -> Result<Self> {
        Self::with_eps(intensity, 1.0)
    }

    pub fn with_eps(intensity: f64, eps: f64) -> Result<Self> {
        if intensity <= 0.0 || !intensity.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "source intensity must be positive, got {intensity}"
            )));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "degenerate shrink factor must be in (0, 1], got {eps}"
            )));
        }
        Ok(Self { intensity, eps })
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    /// Effective half-length of the support.
    pub fn half_length(&self) -> f64 {
        self.eps
    }

    /// Total mass `2 a eps`.
    pub fn mass(&self) -> f64 {
        2.0 * self.intensity * self.eps
    }
}

/// Single-layer potential of the segment source, extended by continuity
/// across the segment:
///
/// ```text
/// w(x, y) = -(a/4π) [ (x+L) ln((x+L)² + y²) - (x-L) ln((x-L)² + y²) - 4L
///                     + 2y (atan((x+L)/y) - atan((x-L)/y)) ]
/// ```
///
/// with `L` the half-length. Finite everywhere except the two tips, where
/// the value is the (finite) limit of the formula.
pub fn eval_w(src: &LineSource, p: Vec2) -> f64 {
    let l = src.half_length();
    let (x, y) = (p.x, p.y);
    let term = |u: f64| -> f64 {
        let d = u * u + y * y;
        if d == 0.0 {
            0.0 // u ln u² -> 0 at a tip
        } else {
            u * d.ln()
        }
    };
    let mut f = term(x + l) - term(x - l) - 4.0 * l;
    if y != 0.0 {
        f += 2.0 * y * (((x + l) / y).atan() - ((x - l) / y).atan());
    }
    -src.intensity / (4.0 * PI) * f
}

/// Gradient of `w` off the closed support segment.
pub fn grad_w(src: &LineSource, p: Vec2) -> Result<Vec2> {
    let l = src.half_length();
    if p.y == 0.0 && p.x.abs() <= l {
        return Err(Error::OnSegment { x: p.x });
    }
    Ok(grad_w_unchecked(src, p))
}

fn grad_w_unchecked(src: &LineSource, p: Vec2) -> Vec2 {
    let l = src.half_length();
    let (x, y) = (p.x, p.y);
    let dp = (x + l) * (x + l) + y * y;
    let dm = (x - l) * (x - l) + y * y;
    let gx = -src.intensity / (4.0 * PI) * (dp.ln() - dm.ln());
    let gy = if y == 0.0 {
        0.0
    } else {
        -src.intensity / (2.0 * PI) * (((x + l) / y).atan() - ((x - l) / y).atan())
    };
    Vec2::new(gx, gy)
}

/// One-sided limit of `∇w` on the axis `y = 0` (side `+` approaches from
/// above). On the open segment `∂w/∂y -> ∓ a/2`; beyond the tips the limit
/// is the two-sided value.
pub fn grad_w_one_sided(src: &LineSource, x: f64, from_above: bool) -> Vec2 {
    let l = src.half_length();
    let dp = (x + l) * (x + l);
    let dm = (x - l) * (x - l);
    let gx = -src.intensity / (4.0 * PI) * (dp.ln() - dm.ln());
    let gy = if x.abs() < l {
        if from_above {
            -0.5 * src.intensity
        } else {
            0.5 * src.intensity
        }
    } else {
        0.0
    };
    Vec2::new(gx, gy)
}

/// Options for the collocation solver.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Number of charge points; `None` takes half the collocation nodes.
    pub charges: Option<usize>,
    /// Charge offset along the outward normal, in units of the local
    /// inter-charge boundary spacing.
    pub offset: f64,
    /// Tikhonov parameter relative to the largest singular value.
    pub regularization: f64,
    /// Acceptable sup-norm Dirichlet residual.
    pub tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            charges: None,
            offset: 3.0,
            regularization: 1e-12,
            tol: 1e-8,
        }
    }
}

/// Computed potential `u = w + h` on a domain.
#[derive(Clone, Debug)]
pub struct HarmonicSolution {
    source: LineSource,
    domain: GraphDomain,
    boundary: BoundaryLoop,
    charges: Vec<Vec2>,
    coeffs: Vec<f64>,
    constant: f64,
    residual_dirichlet: f64,
    condition: f64,
}

impl HarmonicSolution {
    pub fn source(&self) -> &LineSource {
        &self.source
    }

    pub fn domain(&self) -> &GraphDomain {
        &self.domain
    }

    pub fn boundary(&self) -> &BoundaryLoop {
        &self.boundary
    }

    pub fn charges(&self) -> &[Vec2] {
        &self.charges
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Sup of `|u|` over the collocation nodes.
    pub fn residual_dirichlet(&self) -> f64 {
        self.residual_dirichlet
    }

    /// Estimated condition number of the collocation matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Harmonic correction `h` (valid inside the domain).
    pub fn eval_h(&self, p: Vec2) -> f64 {
        let mut sum = self.constant;
        for (z, c) in self.charges.iter().zip(&self.coeffs) {
            sum += c * kernel(p, *z);
        }
        sum
    }

    pub fn grad_h(&self, p: Vec2) -> Vec2 {
        let mut g = Vec2::default();
        for (z, c) in self.charges.iter().zip(&self.coeffs) {
            let d = p - *z;
            let r2 = d.dot(d);
            g = g + d * (-c / (2.0 * PI * r2));
        }
        g
    }

    /// `u(p) = w(p) + h(p)` for `p` in the closed domain.
    pub fn eval_u(&self, p: Vec2) -> Result<f64> {
        let tol = 1e-9 * self.domain.scale();
        if !self.domain.contains(p, tol) {
            return Err(Error::OutsideDomain { x: p.x, y: p.y });
        }
        Ok(eval_w(&self.source, p) + self.eval_h(p))
    }

    /// `∇u(p)` for `p` in the closed domain and off C.
    pub fn grad_u(&self, p: Vec2) -> Result<Vec2> {
        let tol = 1e-9 * self.domain.scale();
        if !self.domain.contains(p, tol) {
            return Err(Error::OutsideDomain { x: p.x, y: p.y });
        }
        Ok(grad_w(&self.source, p)? + self.grad_h(p))
    }

    /// Replay block: source, residuals, then one `zx zy coeff` line per
    /// charge, all at 17 significant digits.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# a={} eps={} constant={} residual={} condition={}",
            fmt17(self.source.intensity()),
            fmt17(self.source.half_length()),
            fmt17(self.constant),
            fmt17(self.residual_dirichlet),
            fmt17(self.condition)
        )?;
        for (z, c) in self.charges.iter().zip(&self.coeffs) {
            writeln!(w, "{} {} {}", fmt17(z.x), fmt17(z.y), fmt17(*c))?;
        }
        Ok(())
    }

    /// Rebuilds a solution from a replay block and its domain.
    pub fn read_text<R: BufRead>(r: R, domain: GraphDomain) -> Result<Self> {
        let mut source = None;
        let mut constant = 0.0;
        let mut residual = 0.0;
        let mut condition = 0.0;
        let mut charges = Vec::new();
        let mut coeffs = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(rest) = t.strip_prefix('#') {
                let mut a = None;
                let mut eps = None;
                for kv in rest.split_whitespace() {
                    let Some((key, val)) = kv.split_once('=') else {
                        continue;
                    };
                    let v: f64 = val.parse().map_err(|e| Error::Parse {
                        line: lineno + 1,
                        message: format!("bad {key}: {e}"),
                    })?;
                    match key {
                        "a" => a = Some(v),
                        "eps" => eps = Some(v),
                        "constant" => constant = v,
                        "residual" => residual = v,
                        "condition" => condition = v,
                        _ => {}
                    }
                }
                if let (Some(a), Some(eps)) = (a, eps) {
                    source = Some(LineSource::with_eps(a, eps)?);
                }
                continue;
            }
            let vals: Vec<f64> = t
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: lineno + 1,
                    message: e.to_string(),
                })?;
            if vals.len() != 3 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected 3 fields, got {}", vals.len()),
                });
            }
            charges.push(Vec2::new(vals[0], vals[1]));
            coeffs.push(vals[2]);
        }
        let source = source.ok_or(Error::Parse {
            line: 0,
            message: "missing source header".into(),
        })?;
        let boundary = domain.boundary();
        Ok(Self {
            source,
            domain,
            boundary,
            charges,
            coeffs,
            constant,
            residual_dirichlet: residual,
            condition,
        })
    }
}

fn kernel(p: Vec2, z: Vec2) -> f64 {
    -(p.dist(z)).ln() / (2.0 * PI)
}

/// Solves `-Δu = a δ_C` in the domain with `u = 0` on the boundary.
///
/// Charges go outside the domain along outward normals; coefficients come
/// from Tikhonov-regularized least squares matching `h = -w` at all boundary
/// nodes. Fails if a charge lands inside the domain or the sup residual
/// stays above `opts.tol`.
pub fn solve_dirichlet(
    d: &GraphDomain,
    src: &LineSource,
    opts: &SolveOptions,
) -> Result<HarmonicSolution> {
    let boundary = d.boundary();
    let q = boundary.len();
    let m = opts.charges.unwrap_or(q / 2).clamp(4, q / 2);

    // Charge points: every (q/m)-th boundary node, pushed outward by
    // offset × (local inter-charge spacing).
    let mut charges = Vec::with_capacity(m);
    for i in 0..m {
        let j = (i * q) / m;
        let spacing = boundary.weights[j] * q as f64 / m as f64;
        let z = boundary.points[j] + boundary.normals[j] * (opts.offset * spacing);
        if d.contains(z, 0.0) {
            return Err(Error::ChargePlacement { x: z.x, y: z.y });
        }
        charges.push(z);
    }

    // Collocation system: h(p_j) = -w(p_j), plus a free constant column.
    let mut a = DMatrix::zeros(q, m + 1);
    let mut b = DVector::zeros(q);
    for j in 0..q {
        let p = boundary.points[j];
        for (i, z) in charges.iter().enumerate() {
            a[(j, i)] = kernel(p, *z);
        }
        a[(j, m)] = 1.0;
        b[j] = -eval_w(src, p);
    }

    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    let condition = sigma_max / sigma_min.max(f64::MIN_POSITIVE);
    let lambda = opts.regularization * sigma_max;
    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let utb = u.transpose() * &b;
    let mut filtered = DVector::zeros(svd.singular_values.len());
    for i in 0..svd.singular_values.len() {
        let s = svd.singular_values[i];
        filtered[i] = s / (s * s + lambda * lambda) * utb[i];
    }
    let coeffs_full = vt.transpose() * filtered;

    let residual = (&a * &coeffs_full - &b).amax();
    if !residual.is_finite() || residual > opts.tol {
        return Err(Error::SolveNotConverged {
            residual,
            tol: opts.tol,
            condition,
        });
    }

    let coeffs: Vec<f64> = coeffs_full.iter().take(m).cloned().collect();
    let constant = coeffs_full[m];
    Ok(HarmonicSolution {
        source: *src,
        domain: d.clone(),
        boundary,
        charges,
        coeffs,
        constant,
        residual_dirichlet: residual,
        condition,
    })
}

/// Per-node boundary flux `∂u/∂ν` (outward). Since `u = 0` on the boundary,
/// `|∇u| = |∂u/∂ν|` there. The gradient is evaluated analytically from `w`
/// and the charge expansion, never by differencing across the boundary.
pub fn boundary_flux(sol: &HarmonicSolution) -> BoundaryField {
    let b = sol.boundary();
    let mut flux = Vec::with_capacity(b.len());
    for (j, p) in b.points.iter().enumerate() {
        let gw = if p.y == 0.0 && p.x.abs() <= sol.source.half_length() {
            // Node touching C: take the one-sided limit from the domain side.
            grad_w_one_sided(&sol.source, p.x, b.sites[j].0 == Side::Upper)
        } else {
            grad_w_unchecked(&sol.source, *p)
        };
        let g = gw + sol.grad_h(*p);
        flux.push(g.dot(b.normals[j]));
    }
    BoundaryField {
        nodes: b.points.clone(),
        sites: b.sites.clone(),
        normals: b.normals.clone(),
        weights: b.weights.clone(),
        flux,
        g: Vec::new(),
    }
}
