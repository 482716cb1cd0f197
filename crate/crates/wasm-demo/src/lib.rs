//! Browser bindings for the quadrature-surface laboratory.
//!
//! Three operations, all taking and returning JSON strings so the page
//! needs no generated TypeScript:
//!
//! * [`demo_domain`] — build a preset boundary and report the GNP check,
//!   detected arcs, and basic measures;
//! * [`demo_steiner`] — continuous Steiner symmetrization at a slider
//!   value `t`;
//! * [`demo_minimize`] — run the free-boundary gradient flow for a given
//!   iteration budget and return the boundary and `J` history.
//!
//! Build with `wasm-pack build crates/wasm-demo --target web` (or
//! `cargo build --target wasm32-unknown-unknown` plus `wasm-bindgen`);
//! the crate also compiles natively so the logic is unit-tested on the
//! host.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::wasm_bindgen;

use qsurf::geometry::{self, GraphDomain};
use qsurf::potential::LineSource;
use qsurf::presets;
use qsurf::shape_opt::{self, MinimizeOptions};

/// Request shared by all three operations.
#[derive(Deserialize)]
struct DemoRequest {
    /// disk | ellipse | stadium | rectangle | perturbed-stadium
    #[serde(default = "default_preset")]
    preset: String,
    #[serde(default = "default_n")]
    n: usize,
    /// First shape parameter: radius (disk, stadium, perturbed-stadium),
    /// x semi-axis (ellipse), half-width (rectangle).
    #[serde(default = "default_p1")]
    p1: f64,
    /// Second shape parameter: center x (disk), y semi-axis (ellipse),
    /// half-height (rectangle), bump amplitude (perturbed-stadium).
    #[serde(default)]
    p2: f64,
    /// Steiner parameter for `demo_steiner`.
    #[serde(default)]
    t: f64,
    /// Source intensity and Neumann level for `demo_minimize`.
    #[serde(default = "default_a")]
    a: f64,
    #[serde(default = "default_k")]
    k: f64,
    #[serde(default = "default_iters")]
    max_iter: usize,
}

fn default_preset() -> String {
    "disk".into()
}
fn default_n() -> usize {
    97
}
fn default_p1() -> f64 {
    2.0
}
fn default_a() -> f64 {
    4.0
}
fn default_k() -> f64 {
    1.0
}
fn default_iters() -> usize {
    60
}

#[derive(Serialize)]
struct Boundary {
    xs: Vec<f64>,
    phi1: Vec<f64>,
    phi2: Vec<f64>,
}

impl From<&GraphDomain> for Boundary {
    fn from(d: &GraphDomain) -> Self {
        Self {
            xs: d.xs().to_vec(),
            phi1: d.upper().to_vec(),
            phi2: d.lower().to_vec(),
        }
    }
}

#[derive(Serialize)]
struct ArcInfo {
    arc_type: String,
    center_x: f64,
    radius: f64,
}

#[derive(Serialize)]
struct DomainResponse {
    boundary: Boundary,
    gnp_passed: bool,
    /// Per-node `s = x + φ φ'` on the upper and lower graphs; the page
    /// colors nodes with `|s| > 1` as violations.
    s1: Vec<f64>,
    s2: Vec<f64>,
    arcs: Vec<ArcInfo>,
    area: f64,
    perimeter: f64,
    clearance: f64,
}

#[derive(Serialize)]
struct SteinerResponse {
    boundary: Boundary,
    area_before: f64,
    area_after: f64,
    gnp_passed: bool,
}

#[derive(Serialize)]
struct MinimizeResponse {
    boundary: Boundary,
    status: String,
    iterations: usize,
    j_history: Vec<f64>,
    residual: f64,
    clearance: f64,
    perimeter: f64,
    perimeter_predicted: f64,
}

fn build_domain(req: &DemoRequest) -> qsurf::Result<GraphDomain> {
    match req.preset.as_str() {
        "disk" => presets::disk(req.p2, req.p1, req.n),
        "ellipse" => presets::ellipse(req.p1, req.p2.max(0.2), req.n),
        "stadium" => presets::stadium(req.p1, req.n),
        "rectangle" => presets::rectangle(req.p1, req.p2.max(0.2), req.n),
        "perturbed-stadium" => presets::perturbed_stadium(req.p1, req.p2, req.n),
        other => Err(qsurf::Error::InvalidParameter(format!(
            "unknown preset `{other}`"
        ))),
    }
}

fn domain_response(d: &GraphDomain) -> DomainResponse {
    let gnp = geometry::check_gnp(d, 1e-6);
    let arcs = geometry::classify_arcs(d, 1e-3)
        .into_iter()
        .map(|arc| ArcInfo {
            arc_type: format!("{:?}", arc.arc_type),
            center_x: arc.center.x,
            radius: arc.radius,
        })
        .collect();
    DomainResponse {
        boundary: Boundary::from(d),
        gnp_passed: gnp.passed,
        s1: gnp.s1,
        s2: gnp.s2,
        arcs,
        area: geometry::area(d),
        perimeter: geometry::perimeter(d),
        clearance: geometry::clearance(d),
    }
}

fn err_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

fn run<T: Serialize>(request: &str, f: impl FnOnce(DemoRequest) -> qsurf::Result<T>) -> String {
    let req: DemoRequest = match serde_json::from_str(request) {
        Ok(r) => r,
        Err(e) => return err_json(&e.to_string()),
    };
    match f(req) {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| err_json(&e.to_string())),
        Err(e) => err_json(&e.to_string()),
    }
}

/// Preset boundary + GNP check + arc inventory, as JSON.
#[wasm_bindgen]
pub fn demo_domain(request: &str) -> String {
    run(request, |req| Ok(domain_response(&build_domain(&req)?)))
}

/// Continuous Steiner symmetrization at `t`, as JSON.
#[wasm_bindgen]
pub fn demo_steiner(request: &str) -> String {
    run(request, |req| {
        let d = build_domain(&req)?;
        let sym = geometry::steiner_continuous(&d, req.t)?;
        Ok(SteinerResponse {
            area_before: geometry::area(&d),
            area_after: geometry::area(&sym),
            gnp_passed: geometry::check_gnp(&sym, 1e-6).passed,
            boundary: Boundary::from(&sym),
        })
    })
}

/// Projected gradient flow for `max_iter` iterations, as JSON.
#[wasm_bindgen]
pub fn demo_minimize(request: &str) -> String {
    run(request, |req| {
        let d0 = build_domain(&req)?;
        let src = LineSource::new(req.a)?;
        let opts = MinimizeOptions {
            max_iter: req.max_iter.min(500),
            ..Default::default()
        };
        let r = shape_opt::minimize(&d0, &src, req.k, &opts)?;
        Ok(MinimizeResponse {
            boundary: Boundary::from(&r.domain),
            status: format!("{:?}", r.status),
            iterations: r.iterations,
            j_history: r.j_history,
            residual: r.residual,
            clearance: r.clearance,
            perimeter: geometry::perimeter(&r.domain),
            perimeter_predicted: 2.0 * req.a / req.k,
        })
    })
}
