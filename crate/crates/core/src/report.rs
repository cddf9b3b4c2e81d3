//! Experiment reports: runs the analyses named by a command on a spec and
//! renders the results as canonical JSON plus an entropy CSV table.
//!
//! Canonical JSON has sorted keys, two-space indentation and every float
//! written with 17 significant digits. Big counts are strings. Timings
//! live under a single top-level key so payloads can be compared without
//! them.

use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};

use crate::entropy::{entropy_bounds, strip_bounds_2d, window_label, EntropyReport, MAX_STRIP_WIDTH};
use crate::error::{Error, Result};
use crate::irreducibility::{
    check_product_irreducibility, check_strong_irreducibility, IrreducibilityVerdict, MixingShape, Status,
};
use crate::lattice::{FiniteSet, Index, SubgroupBasis, TransversalSection};
use crate::projection::{
    compare_systems, product_count, projectional_entropy, sub_windows, ComparisonReport, Inclusion,
};
use crate::shiftspace::{count_language, Alphabet, Limits, Pattern, SftSpec};
use crate::spec::SystemSpec;

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Entropy,
    ProjEntropy,
    ProductCheck,
    Irreducibility,
    Full,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Entropy,
        Command::ProjEntropy,
        Command::ProductCheck,
        Command::Irreducibility,
        Command::Full,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Entropy => "entropy",
            Command::ProjEntropy => "proj-entropy",
            Command::ProductCheck => "product-check",
            Command::Irreducibility => "irreducibility",
            Command::Full => "full",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::spec("", format!("unknown command {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub limits: Limits,
    /// Repeat the comparisons with margins `[-j, j]^d`, `j = 0..=K`.
    pub margin_sweep: Option<u32>,
    /// Box size bound for irreducibility checks.
    pub scale: u64,
    /// Strip widths for 2-D transfer-matrix bounds.
    pub strip_widths: Vec<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            limits: Limits::default(),
            margin_sweep: None,
            scale: 3,
            strip_widths: (1..=8).collect(),
        }
    }
}

/// One line of `entropy.csv`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CsvRow {
    pub window_sides: String,
    pub margin_id: String,
    pub count: String,
    pub value_nats: String,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// Everything except timings.
    pub payload: Value,
    /// Wall-clock seconds per step, in execution order.
    pub timings: Vec<(String, f64)>,
    pub entropy_rows: Vec<CsvRow>,
}

impl RunReport {
    pub fn payload_json(&self) -> String {
        canonical_json(&self.payload)
    }

    pub fn to_json(&self) -> String {
        let mut full = self.payload.clone();
        let timings: Map<String, Value> = self.timings.iter().map(|(k, v)| (k.clone(), float(*v))).collect();
        full.as_object_mut()
            .expect("report is an object")
            .insert("timings".into(), Value::Object(timings));
        canonical_json(&full)
    }

    pub fn entropy_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.entropy_rows.is_empty() {
            w.write_record(["window_sides", "margin_id", "count", "value_nats", "exact"])
                .expect("in-memory write");
        }
        for row in &self.entropy_rows {
            w.serialize(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    /// Writes `report.json` and `entropy.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json())?;
        std::fs::write(dir.join("entropy.csv"), self.entropy_csv())
    }
}

struct CanonicalFormatter {
    pretty: PrettyFormatter<'static>,
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.pretty.$name(writer $(, $arg)*)
            }
        )*
    };
}

impl Formatter for CanonicalFormatter {
    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }

    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Sorted keys, fixed float format, trailing newline.
pub fn canonical_json(value: &Value) -> String {
    use serde::Serialize;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut out,
        CanonicalFormatter {
            pretty: PrettyFormatter::with_indent(b"  "),
        },
    );
    value.serialize(&mut ser).expect("in-memory write");
    out.push(b'\n');
    String::from_utf8(out).expect("utf-8 json")
}

fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn points(set: &FiniteSet) -> Value {
    set.iter().map(|p| json!(p.coords())).collect()
}

fn window_value(set: &FiniteSet) -> Value {
    match set.box_sides() {
        Some(sides) if set.bounds().0.is_origin() => json!(sides),
        _ => json!({ "points": points(set) }),
    }
}

/// `cube{j}` for `[-j, j]^d`, `custom` otherwise.
pub fn margin_id(margin: &FiniteSet) -> String {
    let dim = margin.dim();
    let radius = margin.bounds().1.coords().first().copied().unwrap_or(0);
    if radius >= 0 && *margin == FiniteSet::centered_cube(dim, radius) {
        format!("cube{radius}")
    } else {
        "custom".into()
    }
}

fn pattern_value(p: &Pattern, alphabet: &Alphabet) -> Value {
    json!({
        "cells": points(p.support()),
        "symbols": p.values().iter().map(|&v| alphabet.name(v)).collect::<Vec<_>>(),
    })
}

fn entropy_value(report: &EntropyReport, method: &str) -> Value {
    let bounds: Vec<Value> = report
        .bounds
        .iter()
        .map(|b| {
            json!({
                "window": window_value(&b.window),
                "cells": b.window.len(),
                "margin_id": margin_id(&b.margin),
                "count": b.count.to_string(),
                "value_nats": float(b.value),
                "value_bits": float(b.value / std::f64::consts::LN_2),
                "certified_upper": b.certified_upper,
                "exact": b.exact,
            })
        })
        .collect();
    let best = report
        .bounds
        .iter()
        .find(|b| b.value == report.best_upper)
        .expect("nonempty bounds");
    json!({
        "log_base": EntropyReport::LOG_BASE,
        "margin": points(&best.margin),
        "bounds": bounds,
        "best_upper": {
            "value_nats": float(report.best_upper),
            "window": window_value(&best.window),
            "margin_id": margin_id(&best.margin),
            "certified_upper": true,
        },
        "exact_value": report.exact_value.map(|v| json!({
            "value_nats": float(v),
            "method": method,
        })),
    })
}

fn csv_rows(report: &EntropyReport) -> Vec<CsvRow> {
    report
        .bounds
        .iter()
        .map(|b| CsvRow {
            window_sides: window_label(&b.window),
            margin_id: margin_id(&b.margin),
            count: b.count.to_string(),
            value_nats: format!("{:.16e}", b.value),
            exact: b.exact,
        })
        .collect()
}

fn subgroup_value(basis: &SubgroupBasis) -> Value {
    json!({
        "rows": basis.rows(),
        "rank": basis.rank(),
        "index": match basis.index() {
            Index::Finite(n) => json!(n),
            Index::Infinite => json!("infinite"),
        },
        "invariants": basis.invariants(),
    })
}

fn verdict_value(v: &IrreducibilityVerdict, alphabet: &Alphabet) -> Value {
    json!({
        "status": v.status.as_str(),
        "scale": v.scale,
        "geometries_checked": v.geometries_checked,
        "witness": v.witness.as_ref().map(|w| json!({
            "b1": window_value(&w.b1),
            "b2": {"origin": w.b2.bounds().0.coords(), "sides": w.b2.box_sides()},
            "pattern1": pattern_value(&w.p1, alphabet),
            "pattern2": pattern_value(&w.p2, alphabet),
            "certified": w.certified,
        })),
    })
}

fn inclusion_str(i: &Inclusion) -> &'static str {
    match i {
        Inclusion::Verified => "verified",
        Inclusion::ByConstruction => "by_construction",
        Inclusion::Violated(_) => "violated",
    }
}

fn verdict_str(equal: bool) -> &'static str {
    if equal {
        "equal_at_scale"
    } else {
        "strict_inclusion"
    }
}

fn comparison_value(c: &ComparisonReport, alphabet: &Alphabet) -> Value {
    let windows: Vec<Value> = c
        .windows
        .iter()
        .map(|w| {
            json!({
                "window": window_value(&w.window),
                "margin_id": margin_id(&w.margin),
                "x_count": w.x_count.count.to_string(),
                "x_exact": w.x_count.exact,
                "product_count": w.product_count.count.to_string(),
                "product_exact": w.product_count.exact,
                "inclusion": inclusion_str(&w.inclusion),
                "violation": match &w.inclusion {
                    Inclusion::Violated(p) => pattern_value(p, alphabet),
                    _ => Value::Null,
                },
                "verdict": verdict_str(w.equal),
                "witness": w.witness.as_ref().map(|p| pattern_value(p, alphabet)),
                "witness_capped": w.witness_capped,
            })
        })
        .collect();
    json!({
        "windows": windows,
        "equal_at_scale": c.equal_at_scale,
        "entropy": {
            "x_best_upper": float(c.x_entropy.best_upper),
            "x_exact": c.x_entropy.exact_value.map(float),
            "xh_best_upper": float(c.xh_entropy.best_upper),
            "xh_exact": c.xh_entropy.exact_value.map(float),
            "product_best_upper": float(c.product_best_upper),
            "gap": float(c.entropy_gap),
            "certified_upper": true,
        },
    })
}

/// Margin `[-j, j]^d`.
fn cube_margin(dim: usize, j: u32) -> FiniteSet {
    FiniteSet::centered_cube(dim, i64::from(j))
}

fn unstable<T: PartialEq>(rows: &[Vec<T>]) -> Vec<usize> {
    let n = rows.first().map_or(0, Vec::len);
    (0..n)
        .filter(|&i| rows.windows(2).any(|w| w[0][i] != w[1][i]))
        .collect()
}

struct Context<'a> {
    spec: &'a SystemSpec,
    sft: SftSpec,
    windows: Vec<FiniteSet>,
    margin: FiniteSet,
    opts: &'a RunOptions,
    timings: Vec<(String, f64)>,
}

impl Context<'_> {
    fn timed<T>(&mut self, step: &str, f: impl FnOnce(&Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self).map_err(|e| in_step(step, e))?;
        self.timings.push((step.to_string(), start.elapsed().as_secs_f64()));
        Ok(out)
    }

    fn require_windows(&self) -> Result<()> {
        if self.windows.is_empty() {
            return Err(Error::spec("/windows", "this command needs at least one window"));
        }
        Ok(())
    }

    fn basis(&self) -> Result<SubgroupBasis> {
        self.spec
            .subgroup_basis()?
            .ok_or_else(|| Error::spec("/subgroup", "this command needs a subgroup"))
    }

    fn shape(&self) -> Result<MixingShape> {
        self.spec
            .mixing()?
            .ok_or_else(|| Error::spec("/mixing_shape", "this command needs a mixing shape"))
    }
}

fn in_step(step: &str, e: Error) -> Error {
    match e {
        Error::Capacity(m) => Error::Capacity(format!("{step}: {m}")),
        Error::Internal(m) => Error::Internal(format!("{step}: {m}")),
        other => other,
    }
}

/// Runs `command` on `spec`.
pub fn run_report(spec: &SystemSpec, command: Command, opts: &RunOptions) -> Result<RunReport> {
    spec.validate()?;
    let mut cx = Context {
        spec,
        sft: spec.to_sft()?,
        windows: spec.window_sets()?,
        margin: spec.margin_set()?,
        opts,
        timings: Vec::new(),
    };
    let mut results = Map::new();
    let mut rows = Vec::new();
    let full = command == Command::Full;
    if full {
        // Validate requirements up front so a missing field fails fast.
        cx.require_windows()?;
    }
    let mut x_entropy = None;
    if matches!(command, Command::Entropy | Command::Full) {
        cx.require_windows()?;
        let (value, report) = cx.timed("entropy", run_entropy)?;
        rows = csv_rows(&report);
        results.insert("entropy".into(), value);
        x_entropy = Some(report);
    }
    let mut xh = None;
    if command == Command::ProjEntropy || full && spec.subgroup.is_some() {
        cx.require_windows()?;
        let (value, report) = cx.timed("proj-entropy", run_proj_entropy)?;
        if command == Command::ProjEntropy {
            rows = csv_rows(&report);
        }
        results.insert("proj_entropy".into(), value);
        xh = Some(report);
    }
    let mut comparison = None;
    if command == Command::ProductCheck || full && spec.subgroup.is_some() {
        cx.require_windows()?;
        let (value, report) = cx.timed("product-check", run_product_check)?;
        results.insert("product_check".into(), value);
        comparison = Some(report);
    }
    let mut irreducible = None;
    if command == Command::Irreducibility || full && spec.mixing_shape.is_some() {
        let (value, status) = cx.timed("irreducibility", run_irreducibility)?;
        results.insert("irreducibility".into(), value);
        irreducible = Some(status);
    }
    if full {
        let index = match spec.subgroup_basis()?.map(|b| b.index()) {
            Some(Index::Finite(n)) => Some(n),
            _ => None,
        };
        let strip_min = results
            .get("entropy")
            .and_then(|e| e.get("strip_bounds"))
            .and_then(|s| s.get("bounds"))
            .and_then(Value::as_array)
            .and_then(|b| {
                b.iter()
                    .filter_map(|r| Some((r.get("width")?.as_u64()?, r.get("value_nats")?.as_f64()?)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
            });
        results.insert(
            "summary".into(),
            summary(
                x_entropy.as_ref(),
                strip_min,
                xh.as_ref(),
                index,
                comparison.as_ref(),
                irreducible,
            ),
        );
    }
    let payload = json!({
        "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
        "command": command.as_str(),
        "spec": spec.to_value(),
        "options": {
            "max_cells": opts.limits.max_cells,
            "max_patterns": opts.limits.max_patterns,
            "scale": opts.scale,
            "margin_sweep": opts.margin_sweep,
            "strip_widths": opts.strip_widths,
        },
        "results": results,
    });
    Ok(RunReport {
        payload,
        timings: cx.timings,
        entropy_rows: rows,
    })
}

fn run_entropy(cx: &Context<'_>) -> Result<(Value, EntropyReport)> {
    let report = entropy_bounds(&cx.sft, &cx.windows, &cx.margin, &cx.opts.limits)?;
    let method = if cx.sft.is_full_shift() {
        "closed_form"
    } else {
        "transfer_matrix"
    };
    let mut value = entropy_value(&report, method);
    if cx.sft.dim() == 2 && !cx.opts.strip_widths.is_empty() {
        let widths: Vec<usize> = cx
            .opts
            .strip_widths
            .iter()
            .copied()
            .filter(|&m| m <= MAX_STRIP_WIDTH)
            .collect();
        let strips = match strip_bounds_2d(&cx.sft, &widths, &cx.opts.limits) {
            Ok(v) => json!({
                "bounds": v.iter().map(|(m, x)| json!({
                    "width": m,
                    "value_nats": float(*x),
                    "certified_upper": true,
                })).collect::<Vec<_>>(),
            }),
            Err(e @ (Error::UnsupportedInteraction(_) | Error::Capacity(_))) => json!({"skipped": e.to_string()}),
            Err(e) => return Err(e),
        };
        value["strip_bounds"] = strips;
    }
    Ok((value, report))
}

fn run_proj_entropy(cx: &Context<'_>) -> Result<(Value, EntropyReport)> {
    let basis = cx.basis()?;
    let subs = sub_windows(&cx.windows, basis.rank())?;
    let report = projectional_entropy(&cx.sft, &basis, &subs, &cx.margin, &cx.opts.limits)?;
    let method = if cx.sft.is_full_shift() {
        "closed_form"
    } else {
        "word_graph"
    };
    let mut value = entropy_value(&report, method);
    value["subgroup"] = subgroup_value(&basis);
    Ok((value, report))
}

fn run_product_check(cx: &Context<'_>) -> Result<(Value, ComparisonReport)> {
    let basis = cx.basis()?;
    let report = compare_systems(&cx.sft, &basis, &cx.windows, &cx.margin, &cx.opts.limits)?;
    let mut value = comparison_value(&report, cx.sft.alphabet());
    value["subgroup"] = subgroup_value(&basis);
    if let Some(k) = cx.opts.margin_sweep {
        let section = TransversalSection::new(&basis)?;
        let mut sweep = Vec::new();
        let mut verdicts = Vec::new();
        for j in 0..=k {
            let margin = cube_margin(cx.sft.dim(), j);
            let row = cx
                .windows
                .iter()
                .map(|w| {
                    let x = count_language(&cx.sft, w, &margin, &cx.opts.limits)?;
                    let p = product_count(&cx.sft, &section, w, &margin, &cx.opts.limits)?;
                    Ok((x.count, p.count))
                })
                .collect::<Result<Vec<_>>>()?;
            let equal: Vec<bool> = row.iter().map(|(x, p)| x == p).collect();
            sweep.push(json!({
                "margin_id": margin_id(&margin),
                "windows": row.iter().zip(&cx.windows).map(|((x, p), w)| json!({
                    "window": window_value(w),
                    "x_count": x.to_string(),
                    "product_count": p.to_string(),
                    "verdict": verdict_str(x == p),
                })).collect::<Vec<_>>(),
            }));
            verdicts.push(equal);
        }
        value["margin_sweep"] = json!({
            "margins": sweep,
            "unstable_windows": unstable(&verdicts).iter().map(|&i| window_value(&cx.windows[i])).collect::<Vec<_>>(),
        });
    }
    Ok((value, report))
}

const PASS_NOTE: &str = "pass_at_scale is evidence at the tested scale, not a proof; margin languages \
                         only add patterns, so a pass is conservative";

fn run_irreducibility(cx: &Context<'_>) -> Result<(Value, Status)> {
    let shape = cx.shape()?;
    let lim = &cx.opts.limits;
    let scale = cx.opts.scale;
    let x = check_strong_irreducibility(&cx.sft, &shape, scale, &cx.margin, lim)?;
    let mut value = json!({
        "mixing_shape": points(shape.points()),
        "margin_id": margin_id(&cx.margin),
        "x": verdict_value(&x, cx.sft.alphabet()),
        "note": PASS_NOTE,
    });
    let section = cx
        .spec
        .subgroup_basis()?
        .map(|b| TransversalSection::new(&b))
        .transpose()?;
    if let Some(section) = &section {
        let p = check_product_irreducibility(&cx.sft, section, &shape, scale, &cx.margin, lim)?;
        value["product"] = verdict_value(&p, cx.sft.alphabet());
    }
    if let Some(k) = cx.opts.margin_sweep {
        let mut statuses = Vec::new();
        let mut sweep = Vec::new();
        for j in 0..=k {
            let margin = cube_margin(cx.sft.dim(), j);
            let v = check_strong_irreducibility(&cx.sft, &shape, scale, &margin, lim)?;
            sweep.push(json!({"margin_id": margin_id(&margin), "status": v.status.as_str()}));
            statuses.push(vec![v.status]);
        }
        value["margin_sweep"] = json!({
            "margins": sweep,
            "unstable": !unstable(&statuses).is_empty(),
        });
    }
    Ok((value, x.status))
}

fn summary(
    x: Option<&EntropyReport>,
    strip_min: Option<(u64, f64)>,
    xh: Option<&EntropyReport>,
    index: Option<u64>,
    cmp: Option<&ComparisonReport>,
    irreducible: Option<Status>,
) -> Value {
    let window_bound = x.map(|r| r.best_upper);
    let exact_x = x.and_then(|r| r.exact_value);
    // Best certified statement about h(X): exact, else the least upper bound.
    let (h_x, source) = match (exact_x, window_bound, strip_min) {
        (Some(v), _, _) => (Some(v), "exact".to_string()),
        (None, Some(w), Some((m, s))) if s < w => (Some(s), format!("strip width {m}")),
        (None, Some(w), _) => (Some(w), "window".to_string()),
        _ => (None, String::new()),
    };
    // For a finite-index H, h(X_H) <= [G:H] h(X) per site of H.
    let exact_xh = xh.and_then(|r| r.exact_value);
    let (h_xh, xh_source, xh_exact) = match (xh, exact_xh, index.zip(h_x)) {
        (Some(_), Some(v), _) => (Some(v), "exact", true),
        (Some(r), None, Some((n, hx))) if n as f64 * hx < r.best_upper => {
            let v = n as f64 * hx;
            (Some(v), "index_times_h_x", v == 0.0)
        }
        (Some(r), None, _) => (Some(r.best_upper), "window", false),
        (None, ..) => (None, "", false),
    };
    let gap = h_x.zip(h_xh).map(|(a, b)| b - a);
    let equality = cmp.map(|c| verdict_str(c.equal_at_scale));
    let reading = match (irreducible, gap, cmp.map(|c| c.equal_at_scale)) {
        (_, _, Some(true)) => "equal_at_scale",
        (Some(Status::Counterexample), _, Some(false)) => "mixing_hypothesis_fails",
        (Some(Status::PassAtScale), Some(g), Some(false)) if g > 1e-9 => "entropy_gap_explains_strict_inclusion",
        (_, _, Some(false)) => "inconclusive",
        _ => "incomplete",
    };
    json!({
        "statement": "if X is D-strongly irreducible and h(X) = h(X_H), then X = X_H^{G/H}",
        "strong_irreducibility": irreducible.map_or("not_checked", Status::as_str),
        "h_x": h_x.map(|v| json!({
            "value_nats": float(v),
            "source": source,
            "certified_upper": true,
            "exact": exact_x.is_some() || v == 0.0,
        })),
        "h_x_window_bound": window_bound.map(float),
        "h_xh": h_xh.map(|v| json!({
            "value_nats": float(v),
            "source": xh_source,
            "certified_upper": true,
            "exact": xh_exact,
        })),
        "h_xh_window_bound": xh.map(|r| float(r.best_upper)),
        "entropy_gap": gap.map(float),
        "product_equality": equality,
        "reading": reading,
    })
}
