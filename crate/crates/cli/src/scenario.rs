//! Scenario files: a sectioned `key = value` text format.
//!
//! ```text
//! [scenario]
//! name = fig2
//! mode = reduced          # reduced | oracle | mixed | compare | units
//! beta = 1.12
//! w0 = 100                # pulse-width scale, in units with G = Omega0 = 1
//!
//! [grid]                  # lengths in multiples of w0
//! dw = 0.01
//! dzeta = 0.01
//! w_max = 30
//! zeta_max = 20
//!
//! [boundary]
//! kind = segments         # segments | chain
//! theta = 0.3             # quiescent angles, radians
//! phi = 0.2
//!
//! [segment]               # one section per segment (kind = segments)
//! angle = theta
//! shape = bump            # bump | ramp
//! center = 3
//! width = 1
//! amplitude = 0.6
//!
//! [family]                # one section per chain member (kind = chain);
//! family = slow           # the mu excursion is shaped like a segment
//! from = 2
//! to = 4
//! shape = bump
//! center = 3
//! width = 1
//! amplitude = 0.15
//!
//! [oracle]                # absolute units (G = Omega0 = 1)
//! dtau = 0.05
//! dzeta = 4
//! tolerance = 0.05
//!
//! [output]
//! snapshot = 1            # stored zeta spacing, multiples of w0
//! profiles = 0, 10, 20    # zeta values written to the profile table
//! classify = true
//! fit = true
//!
//! [medium]                # mode = units; CGS, intensity in mW/cm^2
//! d = 1e-18
//! k = 1e5
//! n = 1e12
//! intensity = 3
//! length = 3
//! ```
//!
//! Comments start with `#` or `;`. Parsing collects every violation before
//! failing.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use tripod_core::analytic::{family_chain, Family};
use tripod_core::oracle::OracleGrid;
use tripod_core::reduced::COS_PHI_FLOOR;
use tripod_core::units::MediumParams;
use tripod_core::{BoundaryProfile, Grid, Profile, Segment, Shape};

use crate::error::{CliError, Violation};

/// Smallest accepted pulse-width scale; the adiabatic reduction needs w0 ≫ 1.
pub const MIN_W0: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Reduced,
    Oracle,
    Mixed,
    Compare,
    Units,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reduced" => Ok(Mode::Reduced),
            "oracle" => Ok(Mode::Oracle),
            "mixed" => Ok(Mode::Mixed),
            "compare" => Ok(Mode::Compare),
            "units" => Ok(Mode::Units),
            _ => Err(format!("unknown mode `{s}` (expected reduced, oracle, mixed, compare or units)")),
        }
    }
}

impl Mode {
    fn needs_oracle(self) -> bool {
        matches!(self, Mode::Oracle | Mode::Compare)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Reduced => "reduced",
            Mode::Oracle => "oracle",
            Mode::Mixed => "mixed",
            Mode::Compare => "compare",
            Mode::Units => "units",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub dw: f64,
    pub dzeta: f64,
    pub w_max: f64,
    pub zeta_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Segments,
    Chain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Angle {
    Theta,
    Phi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentSpec {
    pub angle: Angle,
    pub segment: Segment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilySpec {
    pub family: Family,
    pub from: f64,
    pub to: f64,
    pub mu: Segment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySpec {
    pub kind: BoundaryKind,
    pub theta: f64,
    pub phi: f64,
    /// Sampling step of chained profiles, multiples of w0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    pub segments: Vec<SegmentSpec>,
    pub families: Vec<FamilySpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSpec {
    pub dtau: f64,
    pub dzeta: f64,
    pub tolerance: f64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self { dtau: 0.05, dzeta: 4.0, tolerance: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    pub snapshot: f64,
    /// Empty means {0, zeta_max}.
    pub profiles: Vec<f64>,
    pub classify: bool,
    pub fit: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { snapshot: 1.0, profiles: Vec::new(), classify: true, fit: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MediumSpec {
    pub d: f64,
    pub k: f64,
    pub n: f64,
    /// mW/cm².
    pub intensity: f64,
    /// cm.
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub mode: Mode,
    pub beta: f64,
    pub w0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundarySpec>,
    pub oracle: OracleSpec,
    pub output: OutputSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub medium: Option<MediumSpec>,
    /// Source line of each `section.key` (sections as `section`).
    #[serde(skip)]
    lines: BTreeMap<String, usize>,
}

struct Entry {
    key: String,
    value: String,
    line: usize,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

const SECTIONS: &[(&str, &[&str], bool)] = &[
    ("scenario", &["name", "mode", "beta", "w0"], false),
    ("grid", &["dw", "dzeta", "w_max", "zeta_max"], false),
    ("boundary", &["kind", "theta", "phi", "step"], false),
    ("segment", &["angle", "shape", "center", "width", "amplitude"], true),
    ("family", &["family", "from", "to", "shape", "center", "width", "amplitude"], true),
    ("oracle", &["dtau", "dzeta", "tolerance"], false),
    ("output", &["snapshot", "profiles", "classify", "fit"], false),
    ("medium", &["d", "k", "n", "intensity", "length"], false),
];

fn tokenize(text: &str, errs: &mut Vec<Violation>) -> Vec<Section> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            match name.strip_suffix(']') {
                Some(n) => out.push(Section { name: n.trim().to_string(), line, entries: Vec::new() }),
                None => errs.push(Violation::new(line, "section", format!("malformed header `{content}`"))),
            }
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            errs.push(Violation::new(line, "syntax", format!("expected `key = value`, got `{content}`")));
            continue;
        };
        match out.last_mut() {
            Some(s) => s.entries.push(Entry { key: k.trim().to_string(), value: v.trim().to_string(), line }),
            None => errs.push(Violation::new(line, k.trim(), "key outside of any section")),
        }
    }
    out
}

/// Typed access to one section's entries, recording violations.
struct Reader<'a> {
    section: &'a Section,
    errs: &'a mut Vec<Violation>,
    lines: &'a mut BTreeMap<String, usize>,
    prefix: String,
}

impl Reader<'_> {
    fn raw(&mut self, key: &str) -> Option<(&str, usize)> {
        let e = self.section.entries.iter().find(|e| e.key == key)?;
        self.lines.insert(format!("{}.{key}", self.prefix), e.line);
        Some((e.value.as_str(), e.line))
    }

    fn parse<T: FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let (v, line) = self.raw(key)?;
        let v = v.to_string();
        match v.parse::<T>() {
            Ok(x) => Some(x),
            Err(_) => {
                let field = format!("{}.{key}", self.section.name);
                self.errs.push(Violation::new(line, field, format!("expected {what}, got `{v}`")));
                None
            }
        }
    }

    fn number(&mut self, key: &str) -> Option<f64> {
        let x: f64 = self.parse(key, "a number")?;
        if x.is_finite() {
            Some(x)
        } else {
            let line = self.raw(key).map_or(0, |r| r.1);
            self.errs.push(Violation::new(line, format!("{}.{key}", self.section.name), "must be finite"));
            None
        }
    }

    fn required<T>(&mut self, key: &str, v: Option<T>) -> Option<T> {
        if v.is_none() && self.raw(key).is_none() {
            self.errs.push(Violation::new(self.section.line, format!("{}.{key}", self.section.name), "missing required key"));
        }
        v
    }

    fn req_number(&mut self, key: &str) -> Option<f64> {
        let v = self.number(key);
        self.required(key, v)
    }

    fn choice<T: FromStr<Err = String>>(&mut self, key: &str) -> Option<T> {
        let (v, line) = self.raw(key)?;
        let v = v.to_string();
        match v.parse::<T>() {
            Ok(x) => Some(x),
            Err(msg) => {
                self.errs.push(Violation::new(line, format!("{}.{key}", self.section.name), msg));
                None
            }
        }
    }

    fn list(&mut self, key: &str) -> Option<Vec<f64>> {
        let (v, line) = self.raw(key)?;
        let mut out = Vec::new();
        for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.parse::<f64>() {
                Ok(x) if x.is_finite() => out.push(x),
                _ => {
                    let msg = format!("expected a comma-separated list of numbers, got `{part}`");
                    self.errs.push(Violation::new(line, format!("{}.{key}", self.section.name), msg));
                    return None;
                }
            }
        }
        Some(out)
    }
}

fn parse_shape(s: &str) -> Result<Shape, String> {
    match s {
        "bump" => Ok(Shape::Bump),
        "ramp" => Ok(Shape::Ramp),
        _ => Err(format!("unknown shape `{s}` (expected bump or ramp)")),
    }
}

struct ShapeName(Shape);

impl FromStr for ShapeName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_shape(s).map(ShapeName)
    }
}

struct AngleName(Angle);

impl FromStr for AngleName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "theta" => Ok(AngleName(Angle::Theta)),
            "phi" => Ok(AngleName(Angle::Phi)),
            _ => Err(format!("unknown angle `{s}` (expected theta or phi)")),
        }
    }
}

struct KindName(BoundaryKind);

impl FromStr for KindName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "segments" => Ok(KindName(BoundaryKind::Segments)),
            "chain" => Ok(KindName(BoundaryKind::Chain)),
            _ => Err(format!("unknown boundary kind `{s}` (expected segments or chain)")),
        }
    }
}

struct FamilyName(Family);

impl FromStr for FamilyName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse::<Family>().map(FamilyName).map_err(|e| e.to_string())
    }
}

fn read_segment(r: &mut Reader) -> Option<Segment> {
    let shape = r.choice::<ShapeName>("shape").map(|s| s.0);
    let shape = r.required("shape", shape);
    let center = r.req_number("center");
    let width = r.req_number("width");
    let amplitude = r.req_number("amplitude");
    if let Some(w) = width {
        if w <= 0.0 {
            let header = r.section.line;
            let line = r.raw("width").map_or(header, |x| x.1);
            r.errs.push(Violation::new(line, format!("{}.width", r.section.name), "must be positive"));
            return None;
        }
    }
    Some(Segment { shape: shape?, center: center?, width: width?, amplitude: amplitude? })
}

/// Parses and validates a scenario; on failure returns every violation found.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let mut errs = Vec::new();
    let sections = tokenize(text, &mut errs);
    let mut lines = BTreeMap::new();
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();

    for s in &sections {
        let Some((_, keys, repeatable)) = SECTIONS.iter().find(|(n, _, _)| *n == s.name) else {
            errs.push(Violation::new(s.line, "section", format!("unknown section [{}]", s.name)));
            continue;
        };
        if !repeatable {
            if let Some(first) = seen.insert(s.name.as_str(), s.line) {
                errs.push(Violation::new(s.line, "section", format!("duplicate section [{}] (first on line {first})", s.name)));
            }
        }
        let mut keys_seen: BTreeMap<&str, usize> = BTreeMap::new();
        for e in &s.entries {
            if !keys.contains(&e.key.as_str()) {
                errs.push(Violation::new(e.line, format!("{}.{}", s.name, e.key), "unknown key"));
            } else if let Some(first) = keys_seen.insert(e.key.as_str(), e.line) {
                errs.push(Violation::new(e.line, format!("{}.{}", s.name, e.key), format!("duplicate key (first on line {first})")));
            }
        }
    }

    let find = |name: &str| sections.iter().find(|s| s.name == name);

    // [scenario]
    let mut name = String::from("scenario");
    let mut mode = None;
    let (mut beta, mut w0) = (None, None);
    match find("scenario") {
        Some(sec) => {
            lines.insert("scenario".into(), sec.line);
            let mut r = Reader { section: sec, errs: &mut errs, lines: &mut lines, prefix: "scenario".into() };
            if let Some((v, _)) = r.raw("name") {
                name = v.to_string();
            }
            mode = r.choice::<Mode>("mode");
            mode = r.required("mode", mode);
            beta = r.number("beta");
            w0 = r.number("w0");
        }
        None => errs.push(Violation::new(0, "[scenario]", "missing required section")),
    }
    let physical = mode.is_some_and(|m| m != Mode::Units);
    if physical {
        if let Some(sec) = find("scenario") {
            let mut r = Reader { section: sec, errs: &mut errs, lines: &mut lines, prefix: "scenario".into() };
            r.required("beta", beta);
            r.required("w0", w0);
        }
    }

    // [grid]
    let mut grid = None;
    match find("grid") {
        Some(sec) => {
            lines.insert("grid".into(), sec.line);
            let mut r = Reader { section: sec, errs: &mut errs, lines: &mut lines, prefix: "grid".into() };
            let dw = r.req_number("dw");
            let dzeta = r.req_number("dzeta");
            let w_max = r.req_number("w_max");
            let zeta_max = r.req_number("zeta_max");
            if let (Some(dw), Some(dzeta), Some(w_max), Some(zeta_max)) = (dw, dzeta, w_max, zeta_max) {
                grid = Some(GridSpec { dw, dzeta, w_max, zeta_max });
            }
        }
        None if physical => errs.push(Violation::new(0, "[grid]", "missing required section")),
        None => {}
    }

    // [boundary], [segment], [family]
    let mut boundary = None;
    match find("boundary") {
        Some(sec) => {
            lines.insert("boundary".into(), sec.line);
            let mut r = Reader { section: sec, errs: &mut errs, lines: &mut lines, prefix: "boundary".into() };
            let kind = r.choice::<KindName>("kind").map_or(BoundaryKind::Segments, |k| k.0);
            let theta = r.req_number("theta");
            let phi = r.req_number("phi");
            let step = r.number("step");
            let mut segments = Vec::new();
            let mut families = Vec::new();
            for (i, s) in sections.iter().filter(|s| s.name == "segment").enumerate() {
                let prefix = format!("segment{i}");
                lines.insert(prefix.clone(), s.line);
                let mut r = Reader { section: s, errs: &mut errs, lines: &mut lines, prefix };
                let angle = r.choice::<AngleName>("angle").map(|a| a.0);
                let angle = r.required("angle", angle);
                if let (Some(angle), Some(segment)) = (angle, read_segment(&mut r)) {
                    segments.push(SegmentSpec { angle, segment });
                }
            }
            for (i, s) in sections.iter().filter(|s| s.name == "family").enumerate() {
                let prefix = format!("family{i}");
                lines.insert(prefix.clone(), s.line);
                let mut r = Reader { section: s, errs: &mut errs, lines: &mut lines, prefix };
                let family = r.choice::<FamilyName>("family").map(|f| f.0);
                let family = r.required("family", family);
                let from = r.req_number("from");
                let to = r.req_number("to");
                if let (Some(family), Some(from), Some(to), Some(mu)) = (family, from, to, read_segment(&mut r)) {
                    families.push(FamilySpec { family, from, to, mu });
                }
            }
            match kind {
                BoundaryKind::Segments if !families.is_empty() => errs.push(Violation::new(
                    sec.line,
                    "boundary.kind",
                    "[family] sections need kind = chain",
                )),
                BoundaryKind::Chain if !segments.is_empty() => errs.push(Violation::new(
                    sec.line,
                    "boundary.kind",
                    "[segment] sections need kind = segments",
                )),
                _ => {}
            }
            if let (Some(theta), Some(phi)) = (theta, phi) {
                boundary = Some(BoundarySpec { kind, theta, phi, step, segments, families });
            }
        }
        None if physical => errs.push(Violation::new(0, "[boundary]", "missing required section")),
        None => {
            for s in sections.iter().filter(|s| s.name == "segment" || s.name == "family") {
                errs.push(Violation::new(s.line, "section", format!("[{}] without [boundary]", s.name)));
            }
        }
    }

    // [oracle]
    let mut oracle = OracleSpec::default();
    if let Some(sec) = find("oracle") {
        lines.insert("oracle".into(), sec.line);
        let mut r = Reader { section: sec, errs: &mut errs, lines: &mut lines, prefix: "oracle".into() };
        oracle.dtau = r.number("dtau").unwrap_or(oracle.dtau);
        oracle.dzeta = r.number("dzeta").unwrap_or(oracle.dzeta);
        oracle.tolerance = r.number("tolerance").unwrap_or(oracle.tolerance);
    }

    // [output]
    let mut output = OutputSpec::default();
    if let Some(sec) = find("output") {
        lines.insert("output".into(), sec.line);
        let mut r = Reader { section: sec, errs: &mut errs, lines: &mut lines, prefix: "output".into() };
        output.snapshot = r.number("snapshot").unwrap_or(output.snapshot);
        output.profiles = r.list("profiles").unwrap_or_default();
        output.classify = r.parse("classify", "true or false").unwrap_or(output.classify);
        output.fit = r.parse("fit", "true or false").unwrap_or(output.fit);
    }

    // [medium]
    let mut medium = None;
    match find("medium") {
        Some(sec) => {
            lines.insert("medium".into(), sec.line);
            let mut r = Reader { section: sec, errs: &mut errs, lines: &mut lines, prefix: "medium".into() };
            let d = r.req_number("d");
            let k = r.req_number("k");
            let n = r.req_number("n");
            let intensity = r.req_number("intensity");
            let length = r.req_number("length");
            if let (Some(d), Some(k), Some(n), Some(intensity), Some(length)) = (d, k, n, intensity, length) {
                medium = Some(MediumSpec { d, k, n, intensity, length });
            }
        }
        None if mode == Some(Mode::Units) => errs.push(Violation::new(0, "[medium]", "missing required section")),
        None => {}
    }

    if !errs.is_empty() {
        return Err(CliError::Validation(errs));
    }
    let s = Scenario {
        name,
        mode: mode.expect("checked above"),
        beta: beta.unwrap_or(0.0),
        w0: w0.unwrap_or(1.0),
        grid,
        boundary,
        oracle,
        output,
        medium,
        lines,
    };
    s.check()?;
    Ok(s)
}

/// Scalar fields a sweep may vary.
pub const SWEEP_KEYS: &[&str] = &["beta", "w0", "grid.dw", "grid.dzeta", "oracle.dtau", "oracle.dzeta"];

impl Scenario {
    fn line(&self, key: &str) -> usize {
        let section = key.split('.').next().unwrap_or(key);
        self.lines.get(key).or_else(|| self.lines.get(section)).copied().unwrap_or(0)
    }

    fn violation(&self, key: &str, msg: impl Into<String>) -> Violation {
        Violation::new(self.line(key), key, msg)
    }

    /// Replaces one scalar field; used by sweeps. Call [`Scenario::check`] afterwards.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), CliError> {
        let bad = |m: &str| CliError::Input(format!("cannot set `{key}`: {m}"));
        match key {
            "beta" | "scenario.beta" => self.beta = value,
            "w0" | "scenario.w0" => self.w0 = value,
            "grid.dw" | "grid.dzeta" => {
                let g = self.grid.as_mut().ok_or_else(|| bad("scenario has no [grid]"))?;
                if key == "grid.dw" {
                    g.dw = value
                } else {
                    g.dzeta = value
                }
            }
            "oracle.dtau" => self.oracle.dtau = value,
            "oracle.dzeta" => self.oracle.dzeta = value,
            _ => return Err(bad(&format!("sweepable keys are {}", SWEEP_KEYS.join(", ")))),
        }
        Ok(())
    }

    /// Semantic checks: CFL, adiabaticity scale, boundary singularity,
    /// output alignment and oracle resources.
    pub fn check(&self) -> Result<(), CliError> {
        let mut errs = Vec::new();
        if self.mode == Mode::Units {
            if let Some(m) = &self.medium {
                if let Err(e) = MediumParams::new(m.d, m.k, m.n) {
                    errs.push(self.violation("medium", e.to_string()));
                }
                if !(m.intensity >= 0.0) {
                    errs.push(self.violation("medium.intensity", "must be >= 0"));
                }
                if !(m.length >= 0.0) {
                    errs.push(self.violation("medium.length", "must be >= 0"));
                }
            }
            return if errs.is_empty() { Ok(()) } else { Err(CliError::Validation(errs)) };
        }

        if !(self.w0 >= MIN_W0) {
            errs.push(self.violation(
                "scenario.w0",
                format!("adiabaticity needs w0 >> 1 in units G = Omega0 = 1; got {}, minimum {MIN_W0}", self.w0),
            ));
        }
        let g = self.grid.expect("physical scenarios have a grid");
        for (key, v) in [("grid.dw", g.dw), ("grid.dzeta", g.dzeta), ("grid.w_max", g.w_max), ("grid.zeta_max", g.zeta_max)] {
            if !(v > 0.0) {
                errs.push(self.violation(key, format!("must be positive, got {v}")));
            }
        }
        if g.dzeta > g.dw * (1.0 + 1e-12) {
            errs.push(self.violation("grid.dzeta", format!("CFL violated: dzeta = {} exceeds dw = {}", g.dzeta, g.dw)));
        }
        if !errs.is_empty() {
            return Err(CliError::Validation(errs));
        }
        if g.w_max / g.dw < 2.0 {
            errs.push(self.violation("grid.w_max", "w grid needs at least 3 samples"));
        }

        let o = &self.output;
        let steps_per_snapshot = o.snapshot / g.dzeta;
        if !(o.snapshot > 0.0) || !is_whole(steps_per_snapshot) {
            errs.push(self.violation("output.snapshot", format!("must be a positive multiple of grid.dzeta = {}", g.dzeta)));
        }
        for z in &o.profiles {
            if *z < 0.0 || *z > g.zeta_max * (1.0 + 1e-12) || (o.snapshot > 0.0 && !is_multiple(z / o.snapshot) && !is_last(*z, g.zeta_max)) {
                errs.push(self.violation(
                    "output.profiles",
                    format!("zeta = {z} is not a stored slice (multiples of snapshot = {} up to zeta_max)", o.snapshot),
                ));
            }
        }

        if self.mode.needs_oracle() {
            let od = &self.oracle;
            if !(od.tolerance > 0.0) {
                errs.push(self.violation("oracle.tolerance", "must be positive"));
            }
            match self.oracle_grid() {
                Ok(og) => {
                    if let Err(e) = og.validate(1.0) {
                        errs.push(self.violation("oracle", e.to_string()));
                    }
                }
                Err(v) => errs.extend(v),
            }
        }

        let b = self.boundary.as_ref().expect("physical scenarios have a boundary");
        if b.kind == BoundaryKind::Chain {
            if b.families.is_empty() {
                errs.push(self.violation("boundary.kind", "chain boundary needs at least one [family] section"));
            }
            if let Some(s) = b.step {
                if !(s > 0.0) {
                    errs.push(self.violation("boundary.step", "must be positive"));
                }
            }
            for (i, f) in b.families.iter().enumerate() {
                if !(f.to > f.from) {
                    errs.push(self.violation(&format!("family{i}"), "needs from < to"));
                }
            }
        }
        if !errs.is_empty() {
            return Err(CliError::Validation(errs));
        }
        match self.boundary_profile() {
            Ok(bp) => {
                let w_max = g.w_max * self.w0;
                let (c, at) = bp.min_cos_phi(w_max, (g.w_max / g.dw).round() as usize * 2);
                if c < COS_PHI_FLOOR {
                    errs.push(self.violation(
                        "boundary",
                        format!("|cos phi| = {c:.3e} at w = {:.4} w0 is below the singularity floor {COS_PHI_FLOOR}", at / self.w0),
                    ));
                }
            }
            Err(e) => {
                let key = if b.kind == BoundaryKind::Chain { "family0" } else { "boundary" };
                errs.push(self.violation(key, e.to_string()));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(errs))
        }
    }

    /// Entrance data in absolute units.
    pub fn boundary_profile(&self) -> tripod_core::Result<BoundaryProfile> {
        let b = self.boundary.as_ref().ok_or_else(|| tripod_core::Error::Config("scenario has no boundary".into()))?;
        let w0 = self.w0;
        let scale = |s: &Segment| Segment { center: s.center * w0, width: s.width * w0, ..*s };
        match b.kind {
            BoundaryKind::Segments => {
                let pick = |a: Angle| b.segments.iter().filter(|s| s.angle == a).map(|s| scale(&s.segment)).collect();
                Ok(BoundaryProfile::new(
                    Profile::smooth(b.theta, pick(Angle::Theta)),
                    Profile::smooth(b.phi, pick(Angle::Phi)),
                    self.beta,
                ))
            }
            BoundaryKind::Chain => {
                let step = b.step.or(self.grid.map(|g| g.dw)).unwrap_or(0.01) * w0;
                let mut mu = self.beta;
                let mut members = Vec::new();
                for f in &b.families {
                    let seg = scale(&f.mu);
                    members.push((f.family, Profile::smooth(mu, vec![seg]), (f.from * w0, f.to * w0)));
                    if seg.shape == Shape::Ramp {
                        mu += seg.amplitude;
                    }
                }
                family_chain(b.theta, b.phi, self.beta, &members, step).map(|r| r.0)
            }
        }
    }

    /// Reduced-solver grid in absolute units.
    pub fn reduced_grid(&self) -> tripod_core::Result<Grid> {
        let g = self.grid.ok_or_else(|| tripod_core::Error::Config("scenario has no grid".into()))?;
        let w0 = self.w0;
        Grid::new(g.dw * w0, g.dzeta * w0, g.w_max * w0, g.zeta_max * w0)
    }

    /// Reduced steps between stored slices.
    pub fn snapshot_stride(&self) -> usize {
        let g = self.grid.expect("physical scenarios have a grid");
        (self.output.snapshot / g.dzeta).round().max(1.0) as usize
    }

    /// Oracle grid storing slices every `snapshot` and samples every `dw`.
    pub fn oracle_grid(&self) -> Result<OracleGrid, Vec<Violation>> {
        let g = self.grid.expect("physical scenarios have a grid");
        let o = &self.oracle;
        let mut errs = Vec::new();
        for (key, v) in [("oracle.dtau", o.dtau), ("oracle.dzeta", o.dzeta)] {
            if !(v > 0.0) {
                errs.push(self.violation(key, format!("must be positive, got {v}")));
            }
        }
        if !errs.is_empty() {
            return Err(errs);
        }
        let zs = self.output.snapshot * self.w0 / o.dzeta;
        let ts = g.dw * self.w0 / o.dtau;
        if !is_whole(zs) {
            errs.push(self.violation("oracle.dzeta", format!("must divide the snapshot spacing {} (absolute units)", self.output.snapshot * self.w0)));
        }
        if !is_whole(ts) {
            errs.push(self.violation("oracle.dtau", format!("must divide dw = {} (absolute units)", g.dw * self.w0)));
        }
        if !is_whole(g.zeta_max * self.w0 / o.dzeta) {
            errs.push(self.violation("oracle.dzeta", "must divide zeta_max"));
        }
        if !errs.is_empty() {
            return Err(errs);
        }
        Ok(OracleGrid::new(o.dtau, g.w_max * self.w0, o.dzeta, g.zeta_max * self.w0)
            .with_strides(zs.round() as usize, ts.round() as usize))
    }

    /// ζ values of the profile table, in multiples of w0.
    pub fn profile_zetas(&self) -> Vec<f64> {
        let g = self.grid.expect("physical scenarios have a grid");
        if self.output.profiles.is_empty() {
            vec![0.0, g.zeta_max]
        } else {
            self.output.profiles.clone()
        }
    }
}

fn is_whole(x: f64) -> bool {
    x.is_finite() && x >= 0.5 && (x - x.round()).abs() < 1e-9 * x.max(1.0)
}

fn is_multiple(x: f64) -> bool {
    x.is_finite() && x >= 0.0 && (x - x.round()).abs() < 1e-9 * x.max(1.0)
}

fn is_last(z: f64, zeta_max: f64) -> bool {
    (z - zeta_max).abs() < 1e-12 * zeta_max.max(1.0)
}
