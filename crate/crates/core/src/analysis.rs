//! Verification harness: perimeter identity, symmetry, arc optimality
//! inequalities, and the existence-threshold sweep.

use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, fmt17, ArcSegment, ArcType, GraphDomain, Vec2};
use crate::potential::LineSource;
use crate::presets;
use crate::shape_opt::{self, MinimizeOptions, MinimizeResult, MinimizeStatus};

/// Relative deviation of the final perimeter from the predicted `2a/k`.
///
/// A solution of the overdetermined problem has `-∂u/∂ν = k` on the whole
/// boundary, so the Gauss identity `-∮ ∂u/∂ν ds = 2a` forces
/// `k |∂Ω| = 2a`. Rejects non-converged results.
pub fn verify_perimeter_identity(r: &MinimizeResult, k: f64) -> Result<f64> {
    if r.status != MinimizeStatus::Converged {
        return Err(Error::InvalidParameter(
            "perimeter identity requires a converged result".into(),
        ));
    }
    let a = r.solution.source().intensity();
    let predicted = 2.0 * a / k;
    let perimeter = geometry::perimeter(&r.domain);
    Ok((perimeter - predicted).abs() / predicted)
}

/// Maximum of the graph asymmetry `|phi1 + phi2| / scale` and the potential
/// mismatch `|u(x, y) - u(x, -y)|` over 200 deterministic mirrored interior
/// pairs.
pub fn verify_symmetry(r: &MinimizeResult) -> f64 {
    let d = &r.domain;
    let scale = d.scale();
    let mut worst: f64 = 0.0;
    for i in 0..d.n() {
        worst = worst.max((d.upper()[i] + d.lower()[i]).abs() / scale);
    }
    // Deterministic LCG so the report is reproducible.
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut sampled = 0;
    let mut attempts = 0;
    while sampled < 200 && attempts < 10_000 {
        attempts += 1;
        let x = d.x_left() + (d.x_right() - d.x_left()) * next();
        let (top, bot) = d.interp(x);
        // Both mirror images must be strictly interior and off the axis.
        let reach = top.min(-bot);
        if reach <= 1e-9 * scale {
            continue;
        }
        let y = reach * (0.05 + 0.75 * next());
        let p = Vec2::new(x, y);
        let q = Vec2::new(x, -y);
        if let (Ok(up), Ok(uq)) = (r.solution.eval_u(p), r.solution.eval_u(q)) {
            worst = worst.max((up - uq).abs());
            sampled += 1;
        }
    }
    worst
}

/// Verdict for one Type I arc under the monotone test-function inequalities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArcCheck {
    pub arc: ArcSegment,
    pub arc_length: f64,
    /// `∮ g φ ds` for the 10 decreasing step functions.
    pub decreasing_integrals: Vec<f64>,
    /// Same for the increasing orientation.
    pub increasing_integrals: Vec<f64>,
    /// Smallest value over both orientations.
    pub min_integral: f64,
    /// Arc-length mean of `g = k² - |∂u/∂ν|²` (the constant-φ equality case).
    pub mean_g: f64,
    /// Sup over the arc of `||∂u/∂ν| - k|`.
    pub sup_residual: f64,
}

/// Report of [`arc_optimality_check`]; empty when no Type I arc is present.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ArcOptimalityReport {
    pub arcs: Vec<ArcCheck>,
}

/// Integrals of `g` against `m` monotone step functions with knots at
/// equi-spaced arc-length positions. Returns (decreasing, increasing).
pub fn monotone_basis_integrals(g: &[f64], weights: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
    let total: f64 = weights.iter().sum();
    let mut cum = 0.0;
    let midpoints: Vec<f64> = weights
        .iter()
        .map(|w| {
            let s = cum + 0.5 * w;
            cum += w;
            s
        })
        .collect();
    let mut dec = Vec::with_capacity(m);
    let mut inc = Vec::with_capacity(m);
    for j in 1..=m {
        let knot = total * j as f64 / (m + 1) as f64;
        let mut id = 0.0;
        let mut ii = 0.0;
        for i in 0..g.len() {
            if midpoints[i] < knot {
                id += weights[i] * g[i];
            } else {
                ii += weights[i] * g[i];
            }
        }
        dec.push(id);
        inc.push(ii);
    }
    (dec, inc)
}

const ARC_BASIS_SIZE: usize = 10;
const ARC_DETECT_TOL: f64 = 1e-3;

/// Tests the first-order optimality inequalities `∮ g φ ds ≥ 0` on every
/// detected Type I arc against a basis of monotone step functions, in both
/// orientations, and reports the flux residual on the arcs.
///
/// Stationarity forces the mean of `g` to vanish and, with the full
/// monotone cone, `|∂u/∂ν| = k` almost everywhere on the arcs. No arcs is
/// an empty report, not an error.
pub fn arc_optimality_check(r: &MinimizeResult, k: f64) -> ArcOptimalityReport {
    let field = shape_opt::shape_gradient(&r.solution, k);
    let q = field.nodes.len();
    let mut report = ArcOptimalityReport::default();
    for arc in geometry::classify_arcs(&r.domain, ARC_DETECT_TOL) {
        if arc.arc_type != ArcType::I {
            continue;
        }
        let idx = arc.indices(q);
        let g: Vec<f64> = idx.iter().map(|&j| field.g[j]).collect();
        let w: Vec<f64> = idx.iter().map(|&j| field.weights[j]).collect();
        let arc_length: f64 = w.iter().sum();
        let (dec, inc) = monotone_basis_integrals(&g, &w, ARC_BASIS_SIZE);
        let min_integral = dec.iter().chain(&inc).fold(f64::INFINITY, |m, &v| m.min(v));
        let mean_g = w.iter().zip(&g).map(|(wi, gi)| wi * gi).sum::<f64>() / arc_length;
        let sup_residual = idx
            .iter()
            .map(|&j| (field.flux[j].abs() - k).abs())
            .fold(0.0f64, f64::max);
        report.arcs.push(ArcCheck {
            arc,
            arc_length,
            decreasing_integrals: dec,
            increasing_integrals: inc,
            min_integral,
            mean_g,
            sup_residual,
        });
    }
    report
}

/// Options of the existence-threshold sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Clearance above which a converged run counts as strict containment.
    pub clearance_min: f64,
    /// Target width of the critical-ratio bracket.
    pub bracket_width: f64,
    /// Worker threads for the grid phase (bisection is sequential).
    pub workers: usize,
    /// Boundary grid size of the initial disk.
    pub n: usize,
    /// Radius of the initial disk.
    pub initial_radius: f64,
    pub minimize: MinimizeOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            clearance_min: 1e-2,
            bracket_width: 0.1,
            workers: 1,
            n: 129,
            initial_radius: 2.0,
            minimize: MinimizeOptions::default(),
        }
    }
}

/// One sweep row: the run at `a = ratio · k` (k fixed to 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub ratio: f64,
    pub clearance: f64,
    pub perimeter: f64,
    /// `2a/k` from the perimeter identity.
    pub perimeter_predicted: f64,
    pub residual: f64,
    pub status: MinimizeStatus,
}

/// Result of [`threshold_sweep`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    /// `(low, high)` enclosing the smallest ratio with a strictly contained
    /// converged run; `None` when the grid does not straddle the threshold.
    pub critical_ratio_bracket: Option<(f64, f64)>,
    pub bracket_found: bool,
    /// Reference ratios: exact threshold 2, and the sufficiency constants
    /// 3.92 and 24π from the literature.
    pub markers: [f64; 3],
}

pub fn sweep_markers() -> [f64; 3] {
    [2.0, 3.92, 24.0 * std::f64::consts::PI]
}

struct RatioOutcome {
    entry: SweepEntry,
    domain: Option<GraphDomain>,
}

fn run_ratio(ratio: f64, initial: &GraphDomain, opts: &SweepOptions) -> Result<RatioOutcome> {
    let k = 1.0;
    let src = LineSource::new(ratio * k)?;
    let r = shape_opt::minimize(initial, &src, k, &opts.minimize)?;
    let entry = SweepEntry {
        ratio,
        clearance: r.clearance,
        perimeter: geometry::perimeter(&r.domain),
        perimeter_predicted: 2.0 * ratio / k,
        residual: r.residual,
        status: r.status,
    };
    let domain = (r.status == MinimizeStatus::Converged).then_some(r.domain);
    Ok(RatioOutcome { entry, domain })
}

fn exists(entry: &SweepEntry, opts: &SweepOptions) -> bool {
    entry.status == MinimizeStatus::Converged && entry.clearance > opts.clearance_min
}

/// Runs the flow over a ratio grid and brackets the existence threshold.
///
/// The grid phase runs entries concurrently up to `opts.workers`
/// (deterministically: each ratio's outcome is independent of scheduling).
/// The bisection phase is sequential and warm-starts each probe from the
/// converged domain of the nearest existing ratio.
pub fn threshold_sweep(ratios: &[f64], opts: &SweepOptions) -> Result<SweepReport> {
    if ratios.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep needs at least one ratio".into(),
        ));
    }
    if ratios.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "sweep ratios must be strictly increasing".into(),
        ));
    }
    if ratios.iter().any(|&r| r <= 0.0) {
        return Err(Error::InvalidParameter(
            "sweep ratios must be positive".into(),
        ));
    }
    let initial = presets::disk(0.0, opts.initial_radius, opts.n)?;

    // Grid phase: work-stealing over indices; slot per ratio keeps the
    // output independent of scheduling.
    let slots: Vec<Mutex<Option<Result<RatioOutcome>>>> =
        ratios.iter().map(|_| Mutex::new(None)).collect();
    let counter = AtomicUsize::new(0);
    let workers = opts.workers.max(1).min(ratios.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = counter.fetch_add(1, Ordering::SeqCst);
                if i >= ratios.len() {
                    break;
                }
                let out = run_ratio(ratios[i], &initial, opts);
                *slots[i].lock().unwrap() = Some(out);
            });
        }
    });
    let mut entries = Vec::with_capacity(ratios.len());
    let mut warm: Vec<Option<GraphDomain>> = Vec::with_capacity(ratios.len());
    for slot in slots {
        let outcome = slot
            .into_inner()
            .unwrap()
            .expect("worker filled its slot")?;
        entries.push(outcome.entry);
        warm.push(outcome.domain);
    }

    // Bracket: largest non-existing ratio below the smallest existing one.
    let first_exist = entries.iter().position(|e| exists(e, opts));
    let bracket = match first_exist {
        Some(i) if i > 0 => Some((entries[i - 1].ratio, entries[i].ratio)),
        _ => None,
    };
    let (bracket, bracket_found) = match bracket {
        None => (None, false),
        Some((mut lo, mut hi)) => {
            let mut warm_domain = warm[first_exist.unwrap()].clone();
            // The slack keeps roundoff in the midpoints from triggering a
            // spurious extra halving once the target width is reached.
            while hi - lo > opts.bracket_width * (1.0 + 1e-9) {
                let mid = 0.5 * (lo + hi);
                let start = warm_domain.as_ref().unwrap_or(&initial);
                let outcome = run_ratio(mid, start, opts)?;
                if exists(&outcome.entry, opts) {
                    hi = mid;
                    if outcome.domain.is_some() {
                        warm_domain = outcome.domain;
                    }
                } else {
                    lo = mid;
                }
            }
            (Some((lo, hi)), true)
        }
    };

    Ok(SweepReport {
        entries,
        critical_ratio_bracket: bracket,
        bracket_found,
        markers: sweep_markers(),
    })
}

fn status_str(s: MinimizeStatus) -> &'static str {
    match s {
        MinimizeStatus::Converged => "converged",
        MinimizeStatus::CollapsedOntoC => "collapsed-onto-c",
        MinimizeStatus::MaxIterations => "max-iterations",
    }
}

fn status_from_str(s: &str) -> Option<MinimizeStatus> {
    match s {
        "converged" => Some(MinimizeStatus::Converged),
        "collapsed-onto-c" => Some(MinimizeStatus::CollapsedOntoC),
        "max-iterations" => Some(MinimizeStatus::MaxIterations),
        _ => None,
    }
}

impl SweepReport {
    /// One row per entry; numbers at 17 significant digits so the file
    /// round-trips bit-exactly through [`SweepReport::read_csv`].
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "ratio,clearance,perimeter,perimeter_predicted,residual,status"
        )?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt17(e.ratio),
                fmt17(e.clearance),
                fmt17(e.perimeter),
                fmt17(e.perimeter_predicted),
                fmt17(e.residual),
                status_str(e.status)
            )?;
        }
        Ok(())
    }

    /// Reads the entry rows of [`SweepReport::write_csv`] (bracket and
    /// markers live in the JSON emission).
    pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<SweepEntry>> {
        let mut entries = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if lineno == 0 {
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("bad number {s:?}"),
                })
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected 6 fields, got {}", fields.len()),
                });
            }
            entries.push(SweepEntry {
                ratio: parse(fields[0])?,
                clearance: parse(fields[1])?,
                perimeter: parse(fields[2])?,
                perimeter_predicted: parse(fields[3])?,
                residual: parse(fields[4])?,
                status: status_from_str(fields[5].trim()).ok_or(Error::Parse {
                    line: lineno + 1,
                    message: format!("unknown status {:?}", fields[5]),
                })?,
            });
        }
        Ok(entries)
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self).map_err(|e| Error::InvalidParameter(e.to_string()))
    }

    pub fn read_json<R: std::io::Read>(r: R) -> Result<Self> {
        serde_json::from_reader(r).map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{solve_dirichlet, SolveOptions};
    use approx::assert_relative_eq;

    fn fake_result(d: GraphDomain, a: f64, status: MinimizeStatus) -> MinimizeResult {
        let src = LineSource::new(a).unwrap();
        // Corner-ish test domains (caps, rectangles) stall the fundamental
        // solution method around 1e-4; these tests don't need more.
        let opts = SolveOptions {
            tol: 1e-3,
            ..Default::default()
        };
        let sol = solve_dirichlet(&d, &src, &opts).unwrap();
        MinimizeResult {
            domain: d,
            solution: sol,
            j_history: vec![],
            residual: f64::NAN,
            clearance: 0.0,
            status,
            iterations: 0,
        }
    }

    #[test]
    fn perimeter_check_is_not_vacuous() {
        // A disk of radius 3 with a = 1, k = 1 is not a solution: its
        // perimeter 6π is far from the predicted 2a/k = 2.
        let d = presets::disk(0.0, 3.0, 129).unwrap();
        let r = fake_result(d, 1.0, MinimizeStatus::Converged);
        let dev = verify_perimeter_identity(&r, 1.0).unwrap();
        let expected = (6.0 * std::f64::consts::PI - 2.0) / 2.0;
        assert_relative_eq!(dev, expected, max_relative = 1e-3);
        assert!(dev > 0.05);
    }

    #[test]
    fn perimeter_check_rejects_non_converged() {
        let d = presets::disk(0.0, 2.0, 65).unwrap();
        let r = fake_result(d, 1.0, MinimizeStatus::CollapsedOntoC);
        assert!(verify_perimeter_identity(&r, 1.0).is_err());
    }

    #[test]
    fn symmetry_small_on_symmetric_domain() {
        let d = presets::stadium(1.0, 129).unwrap();
        let r = fake_result(d, 1.0, MinimizeStatus::Converged);
        let s = verify_symmetry(&r);
        assert!(s < 1e-6, "symmetry defect {s}");
    }

    #[test]
    fn symmetry_detects_asymmetric_domain() {
        let d = presets::perturbed_stadium(1.0, 0.15, 129).unwrap();
        let r = fake_result(d, 1.0, MinimizeStatus::Converged);
        assert!(verify_symmetry(&r) > 1e-2);
    }

    #[test]
    fn monotone_basis_positive_for_positive_field() {
        // Artificial field with |∂u/∂ν| = 0.5 k: g = k² - 0.25 k² > 0, so
        // every basis integral is strictly positive.
        let k: f64 = 1.0;
        let g = vec![k * k - 0.25 * k * k; 40];
        let w = vec![0.05; 40];
        let (dec, inc) = monotone_basis_integrals(&g, &w, 10);
        assert!(dec.iter().all(|&v| v > 0.0));
        assert!(inc.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn monotone_basis_splits_total() {
        // Each knot splits ∮ g ds: decreasing + increasing = total.
        let g: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin()).collect();
        let w: Vec<f64> = (0..30).map(|i| 0.1 + 0.01 * i as f64).collect();
        let total: f64 = g.iter().zip(&w).map(|(gi, wi)| gi * wi).sum();
        let (dec, inc) = monotone_basis_integrals(&g, &w, 10);
        for (d, i) in dec.iter().zip(&inc) {
            assert_relative_eq!(d + i, total, max_relative = 1e-12);
        }
    }

    #[test]
    fn arc_check_finds_stadium_caps() {
        let d = presets::stadium(1.0, 257).unwrap();
        let r = fake_result(d, 1.0, MinimizeStatus::Converged);
        let report = arc_optimality_check(&r, 1.0);
        assert_eq!(report.arcs.len(), 2);
        for c in &report.arcs {
            assert_eq!(c.arc.arc_type, ArcType::I);
            // Mean radius includes the tangential junction nodes that the
            // detection tolerance cannot exclude.
            assert_relative_eq!(c.arc.radius, 1.0, max_relative = 1e-4);
            // Half-circle caps of radius 1.
            assert_relative_eq!(c.arc_length, std::f64::consts::PI, max_relative = 0.02);
            assert_eq!(c.decreasing_integrals.len(), 10);
        }
    }

    #[test]
    fn arc_check_empty_without_type_one_arcs() {
        let d = presets::rectangle(2.0, 1.0, 129).unwrap();
        let r = fake_result(d, 1.0, MinimizeStatus::Converged);
        let report = arc_optimality_check(&r, 1.0);
        assert!(report.arcs.iter().all(|c| c.arc.arc_type != ArcType::I));
    }

    #[test]
    fn sweep_rejects_bad_ratio_grids() {
        let opts = SweepOptions::default();
        assert!(threshold_sweep(&[], &opts).is_err());
        assert!(threshold_sweep(&[2.0, 1.0], &opts).is_err());
        assert!(threshold_sweep(&[-1.0, 2.0], &opts).is_err());
    }

    #[test]
    fn sweep_csv_round_trips_bit_exactly() {
        let report = SweepReport {
            entries: vec![
                SweepEntry {
                    ratio: 1.2,
                    clearance: 3.17e-3,
                    perimeter: 4.0 + 1e-13,
                    perimeter_predicted: 2.4,
                    residual: 0.731,
                    status: MinimizeStatus::CollapsedOntoC,
                },
                SweepEntry {
                    ratio: 4.0,
                    clearance: 0.4217,
                    perimeter: 7.99812,
                    perimeter_predicted: 8.0,
                    residual: 9.3e-3,
                    status: MinimizeStatus::Converged,
                },
            ],
            critical_ratio_bracket: Some((1.95, 2.05)),
            bracket_found: true,
            markers: sweep_markers(),
        };
        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        let entries = SweepReport::read_csv(csv.as_slice()).unwrap();
        assert_eq!(entries, report.entries);
        let mut csv2 = Vec::new();
        SweepReport {
            entries,
            ..report.clone()
        }
        .write_csv(&mut csv2)
        .unwrap();
        assert_eq!(csv, csv2);

        let mut json = Vec::new();
        report.write_json(&mut json).unwrap();
        let back = SweepReport::read_json(json.as_slice()).unwrap();
        assert_eq!(back.entries, report.entries);
        assert_eq!(back.critical_ratio_bracket, report.critical_ratio_bracket);
    }

    #[test]
    fn sweep_csv_reports_parse_errors_with_line() {
        let text = "ratio,clearance,perimeter,perimeter_predicted,residual,status\n1,2,3\n";
        match SweepReport::read_csv(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn sweep_straddles_threshold() {
        // Coarse but real: one ratio on each side of the threshold 2.
        let opts = SweepOptions {
            n: 65,
            bracket_width: 1.5,
            workers: 2,
            ..Default::default()
        };
        let report = threshold_sweep(&[1.2, 4.0], &opts).unwrap();
        assert_eq!(report.entries[0].status, MinimizeStatus::CollapsedOntoC);
        assert_eq!(report.entries[1].status, MinimizeStatus::Converged);
        assert!(report.bracket_found);
        let (lo, hi) = report.critical_ratio_bracket.unwrap();
        assert!(lo < 2.0 && 2.0 < hi, "bracket ({lo}, {hi}) misses 2");
        assert!(hi - lo <= 1.5 + 1e-12);
    }
}
