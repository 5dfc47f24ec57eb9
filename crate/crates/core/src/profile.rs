//! Boundary data at the medium entrance: smooth ramp/bump segments and
//! sampled profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// C² smoothstep, 6x⁵ − 15x⁴ + 10x³ on [0, 1], clamped outside.
pub fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

/// Derivative of [`smoothstep`].
pub fn smoothstep_slope(x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    30.0 * x * x * (x - 1.0) * (x - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// Monotone step of height `amplitude` across [center − width/2, center + width/2].
    Ramp,
    /// Rise over [center − width, center], fall over [center, center + width].
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub shape: Shape,
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl Segment {
    pub fn ramp(center: f64, width: f64, amplitude: f64) -> Self {
        Self { shape: Shape::Ramp, center, width, amplitude }
    }

    pub fn bump(center: f64, width: f64, amplitude: f64) -> Self {
        Self { shape: Shape::Bump, center, width, amplitude }
    }

    pub fn eval(&self, w: f64) -> f64 {
        let x = (w - self.center) / self.width;
        match self.shape {
            Shape::Ramp => self.amplitude * smoothstep(x + 0.5),
            Shape::Bump => self.amplitude * smoothstep(1.0 - x.abs()),
        }
    }

    pub fn slope(&self, w: f64) -> f64 {
        let x = (w - self.center) / self.width;
        match self.shape {
            Shape::Ramp => self.amplitude * smoothstep_slope(x + 0.5) / self.width,
            Shape::Bump => -x.signum() * self.amplitude * smoothstep_slope(1.0 - x.abs()) / self.width,
        }
    }

    /// Interval outside of which the segment is constant.
    pub fn support(&self) -> (f64, f64) {
        match self.shape {
            Shape::Ramp => (self.center - 0.5 * self.width, self.center + 0.5 * self.width),
            Shape::Bump => (self.center - self.width, self.center + self.width),
        }
    }
}

/// Uniformly sampled profile evaluated by 4-point Lagrange interpolation and
/// extended by its end values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledProfile {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl SampledProfile {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || values.len() < 4 {
            return Err(Error::Config("sampled profile needs step > 0 and at least 4 samples".into()));
        }
        Ok(Self { start, step, values })
    }

    pub fn eval(&self, w: f64) -> f64 {
        let n = self.values.len();
        let x = (w - self.start) / self.step;
        if x <= 0.0 {
            return self.values[0];
        }
        if x >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let i = x.floor() as usize;
        let base = i.saturating_sub(1).min(n - 4);
        let t = x - base as f64;
        let mut sum = 0.0;
        for j in 0..4 {
            let mut l = 1.0;
            for m in 0..4 {
                if m != j {
                    l *= (t - m as f64) / (j as f64 - m as f64);
                }
            }
            sum += l * self.values[base + j];
        }
        sum
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }
}

/// A scalar boundary function of w (or τ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    /// `base` plus a sum of smooth segments.
    Smooth { base: f64, segments: Vec<Segment> },
    Sampled(SampledProfile),
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Smooth { base: value, segments: Vec::new() }
    }

    pub fn smooth(base: f64, segments: Vec<Segment>) -> Self {
        Profile::Smooth { base, segments }
    }

    pub fn eval(&self, w: f64) -> f64 {
        match self {
            Profile::Smooth { base, segments } => base + segments.iter().map(|s| s.eval(w)).sum::<f64>(),
            Profile::Sampled(p) => p.eval(w),
        }
    }

    /// dF/dw; analytic for smooth profiles, centered differences otherwise.
    pub fn slope(&self, w: f64) -> f64 {
        match self {
            Profile::Smooth { segments, .. } => segments.iter().map(|s| s.slope(w)).sum(),
            Profile::Sampled(p) => {
                let h = 0.5 * p.step;
                (p.eval(w + h) - p.eval(w - h)) / (2.0 * h)
            }
        }
    }

    /// Interval outside of which the profile is constant, or `None` if constant.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Profile::Smooth { segments, .. } => segments
                .iter()
                .map(Segment::support)
                .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1))),
            Profile::Sampled(p) => {
                let first = p.values[0];
                let last = p.values[p.values.len() - 1];
                let lo = p.values.iter().position(|v| *v != first)?;
                let hi = p.values.iter().rposition(|v| *v != last)?;
                Some((p.start + (lo.saturating_sub(1)) as f64 * p.step, p.start + (hi + 1) as f64 * p.step))
            }
        }
    }

    /// Largest |dF/dw| over [a, b] sampled at `n` points.
    pub fn max_slope(&self, a: f64, b: f64, n: usize) -> f64 {
        (0..=n)
            .map(|k| self.slope(a + (b - a) * k as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// Fields at the medium entrance ζ = 0.
///
/// `theta` and `phi` are functions of the nonlinear time w; `omega0` is the
/// entrance generalized Rabi frequency as a function of retarded time τ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProfile {
    pub theta: Profile,
    pub phi: Profile,
    pub beta: f64,
    pub omega0: Profile,
}

impl BoundaryProfile {
    /// Boundary with a constant unit generalized Rabi frequency.
    pub fn new(theta: Profile, phi: Profile, beta: f64) -> Self {
        Self { theta, phi, beta, omega0: Profile::constant(1.0) }
    }

    /// Union of the θ and φ supports.
    pub fn support(&self) -> Option<(f64, f64)> {
        match (self.theta.support(), self.phi.support()) {
            (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.max(b.1))),
            (a, b) => a.or(b),
        }
    }

    /// Quiescent (pre-pulse) angles.
    pub fn initial_angles(&self) -> (f64, f64) {
        let w = self.support().map_or(0.0, |s| s.0.min(0.0)) - 1.0;
        (self.theta.eval(w), self.phi.eval(w))
    }

    /// Smallest |cos φ₀| over [0, w_max].
    pub fn min_cos_phi(&self, w_max: f64, n: usize) -> (f64, f64) {
        (0..=n)
            .map(|k| {
                let w = w_max * k as f64 / n as f64;
                (self.phi.eval(w).cos().abs(), w)
            })
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
    }

    /// The same boundary translated by `shift` in w.
    pub fn shifted(&self, shift: f64) -> Self {
        let mv = |p: &Profile| match p {
            Profile::Smooth { base, segments } => Profile::Smooth {
                base: *base,
                segments: segments.iter().map(|s| Segment { center: s.center + shift, ..*s }).collect(),
            },
            Profile::Sampled(s) => Profile::Sampled(SampledProfile { start: s.start + shift, ..s.clone() }),
        };
        Self { theta: mv(&self.theta), phi: mv(&self.phi), beta: self.beta, omega0: self.omega0.clone() }
    }
}
