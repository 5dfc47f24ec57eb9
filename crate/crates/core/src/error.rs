use thiserror::Error;

/// Errors raised by the solvers and the algebraic layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `|cos φ|` fell below the solver floor; the reduced equations are singular there.
    #[error("singularity at zeta={zeta:.6}, w={w:.6}: |cos phi| = {cos_phi:.3e} below floor")]
    Singularity { zeta: f64, w: f64, cos_phi: f64 },

    /// The ζ-step exceeds the w-step, so the characteristic of speed 1 leaves the stencil.
    #[error("CFL violated: dzeta={dzeta} > dw={dw}")]
    Cfl { dzeta: f64, dw: f64 },

    /// Step sizes, grid extents or resource limits are unusable.
    #[error("configuration error: {0}")]
    Config(String),

    /// Family constants incompatible with the supplied mixing profile.
    #[error("inadmissible family parameters: {0}")]
    Inadmissible(String),

    /// A fit was requested on a window that does not belong to the family.
    #[error("fit refused: window classified as {label}")]
    FitRefused { label: String },

    /// Two runs that should describe the same scenario do not.
    #[error("mismatched runs: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
