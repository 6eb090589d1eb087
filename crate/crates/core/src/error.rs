use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("t = {t} is within {radius:.3e} of the pole at {pole}")]
    PoleProximity {
        t: Complex64,
        pole: Complex64,
        radius: f64,
    },

    #[error("t = {0} is a closing point (alpha^2 + V^2 vanishes)")]
    ClosingPoint(Complex64),

    #[error("eta vanishes at t = {0}")]
    ZeroEta(Complex64),

    #[error("no closing point in the search window")]
    NoClosingPoint,

    #[error("continuation path cannot avoid the singularity at {0}")]
    SingularPath(Complex64),

    #[error("contour tracing stalled at t = {0}")]
    TracingStall(Complex64),

    #[error("saddle at {t} is degenerate (|F''| = {modulus:.3e})")]
    DegenerateSaddle { t: Complex64, modulus: f64 },

    #[error("outside the validated domain: {0}")]
    Domain(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("configuration: {0}")]
    Config(String),
}

/// Non-fatal diagnostics attached to results.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    /// The singularity search window contained no closing point.
    WindowTooSmall,
    /// |F''| is small relative to the cubic term; the Gaussian estimate is unreliable.
    DegenerateSaddle {
        re: f64,
        im: f64,
        modulus: f64,
    },
    NoSaddle,
    /// An ascent met the real axis at a grazing angle.
    TangentialCrossing {
        x: f64,
        angle: f64,
    },
    /// A thimble ended while e^F was still a noticeable fraction of the running integral.
    TailTruncation {
        re: f64,
        im: f64,
        ratio: f64,
    },
    /// Gaussian probability exceeded 1 and was clamped.
    Clamped {
        raw: f64,
    },
    /// A thimble ran into another stationary point and was continued on
    /// the left of its heading.
    StokesCollision {
        re: f64,
        im: f64,
    },
    /// The assisting field is not small next to the strong one.
    WeakFieldNotSmall {
        ratio: f64,
    },
}
