//! Family fits on previously written profile tables.

use serde::Serialize;
use tripod_core::algebra::mixing_angle;
use tripod_core::analytic::{classify, fit_constants, pulse_windows, Family, PulseLabel, Window};

use crate::error::CliError;
use crate::report::FitReport;
use crate::run::CSV_HEADER;

/// One ζ-slice of a profile table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSlice {
    pub zeta: f64,
    pub w: Vec<f64>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub nu: Vec<f64>,
}

/// Reads a table written by `run`, grouping consecutive rows by ζ.
pub fn read_profile_table(text: &str) -> Result<Vec<TableSlice>, CliError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(CliError::Input(format!("profile table must start with `{CSV_HEADER}`"))),
    }
    let mut out: Vec<TableSlice> = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Input(format!("line {}: malformed row", i + 1)))?;
        if v.len() != 8 {
            return Err(CliError::Input(format!("line {}: expected 8 columns, got {}", i + 1, v.len())));
        }
        if out.last().map_or(true, |s| s.zeta != v[0]) {
            out.push(TableSlice { zeta: v[0], w: Vec::new(), theta: Vec::new(), phi: Vec::new(), nu: Vec::new() });
        }
        let s = out.last_mut().expect("pushed above");
        s.w.push(v[1]);
        s.theta.push(v[2]);
        s.phi.push(v[3]);
        s.nu.push(v[4]);
    }
    if out.is_empty() {
        return Err(CliError::Input("profile table has no rows".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitRequest {
    pub family: Family,
    pub beta: f64,
    /// Slice to fit; the last one when absent.
    pub zeta: Option<f64>,
    /// Explicit window in table units; detected automatically when absent.
    pub range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitWindow {
    pub w_lo: f64,
    pub w_hi: f64,
    pub label: PulseLabel,
    pub slow_spread: f64,
    pub fast_spread: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refused: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitOutput {
    pub family: Family,
    pub beta: f64,
    pub zeta: f64,
    pub windows: Vec<FitWindow>,
}

/// Fits the requested family on each disturbed window of a slice. Fails when
/// no window could be fitted.
pub fn fit_table(slices: &[TableSlice], req: &FitRequest) -> Result<FitOutput, CliError> {
    let slice = match req.zeta {
        Some(z) => slices
            .iter()
            .min_by(|a, b| (a.zeta - z).abs().total_cmp(&(b.zeta - z).abs()))
            .expect("tables are non-empty"),
        None => slices.last().expect("tables are non-empty"),
    };
    if slice.nu.iter().any(|n| !n.is_finite()) {
        return Err(CliError::Input("the slice has no mixing angle (mixed-state run); nothing to fit".into()));
    }
    let mu = slice.nu.iter().map(|n| mixing_angle(req.beta, *n)).collect();
    let whole = Window { w: slice.w.clone(), theta: slice.theta.clone(), phi: slice.phi.clone(), mu };
    let ranges: Vec<(usize, usize)> = match req.range {
        Some((lo, hi)) => {
            let idx: Vec<usize> = (0..whole.len()).filter(|i| whole.w[*i] >= lo && whole.w[*i] <= hi).collect();
            match (idx.first(), idx.last()) {
                (Some(a), Some(b)) if b > a => vec![(*a, *b)],
                _ => return Err(CliError::Input(format!("window [{lo}, {hi}] holds fewer than 2 samples"))),
            }
        }
        None => {
            let dw = if whole.len() > 1 { whole.w[1] - whole.w[0] } else { 1.0 };
            pulse_windows(&whole.theta, &whole.phi, 1e-3, (0.5 / dw).round() as usize)
        }
    };
    let mut windows = Vec::new();
    for (lo, hi) in ranges {
        let sub = whole.slice(lo, hi + 1);
        let c = classify(&sub);
        let (fit, refused) = match fit_constants(&sub, req.family) {
            Ok(r) => (Some(FitReport { family: req.family, c_amp: r.c_amp, c_shift: r.c_shift, rms: r.rms }), None),
            Err(e) => (None, Some(e.to_string())),
        };
        windows.push(FitWindow {
            w_lo: sub.w[0],
            w_hi: sub.w[sub.len() - 1],
            label: c.label,
            slow_spread: c.slow_spread,
            fast_spread: c.fast_spread,
            fit,
            refused,
        });
    }
    if windows.iter().all(|w| w.fit.is_none()) {
        let labels: Vec<String> = windows.iter().map(|w| format!("[{:.3}, {:.3}] {}", w.w_lo, w.w_hi, w.label)).collect();
        return Err(CliError::Input(format!(
            "no {} window at zeta = {}: {}",
            req.family,
            slice.zeta,
            if labels.is_empty() { "slice is undisturbed".to_string() } else { labels.join(", ") }
        )));
    }
    Ok(FitOutput { family: req.family, beta: req.beta, zeta: slice.zeta, windows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_required() {
        assert!(read_profile_table("a,b\n1,2\n").is_err());
        assert!(read_profile_table(&format!("{CSV_HEADER}\n")).is_err());
        let t = format!("{CSV_HEADER}\n0,0,1,2,3,0,0,0\n0,1,1,2,3,0,0,0\n1,0,1,2,3,0,0,0\n");
        let s = read_profile_table(&t).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].w, vec![0.0, 1.0]);
        assert!(read_profile_table(&format!("{CSV_HEADER}\n0,0,1\n")).is_err());
    }
}
