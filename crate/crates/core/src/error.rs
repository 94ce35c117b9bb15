use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The coefficient field is not admissible at `(x, u)`: α ≤ 0, γ ≤ 0 or non-finite.
    Domain {
        x: f64,
        u: f64,
    },
    EmptyDomain,
    InvalidData(&'static str),
    /// Cumulative coordinates lost strict monotonicity at the given record.
    NonMonotoneCurve {
        index: usize,
    },
    NoConvergence {
        i: usize,
        j: usize,
        residual: f64,
    },
    DomainExit {
        i: usize,
        j: usize,
        t: f64,
    },
    InvalidOrientation,
    EmptyLevelSet {
        t: f64,
    },
    OutOfDomain {
        t: f64,
        x: f64,
    },
    InsufficientSamples {
        needed: usize,
        found: usize,
    },
    ProviderGap {
        t: f64,
    },
    MismatchedStart,
    CflViolation {
        cfl: f64,
    },
    BlowupSuspected {
        t: f64,
        max_gradient: f64,
    },
    WindowMismatch,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { x, u } => {
                write!(f, "coefficient field not admissible at x={x}, u={u}")
            }
            Error::EmptyDomain => write!(f, "empty sampling domain"),
            Error::InvalidData(what) => write!(f, "invalid data: {what}"),
            Error::NonMonotoneCurve { index } => {
                write!(f, "boundary curve coordinates not strictly increasing at record {index}")
            }
            Error::NoConvergence { i, j, residual } => {
                write!(f, "cell solve did not converge at node ({i}, {j}), last update {residual:e}")
            }
            Error::DomainExit { i, j, t } => {
                write!(f, "negative time t={t} produced at node ({i}, {j})")
            }
            Error::InvalidOrientation => {
                write!(f, "could not find a marching orientation with increasing t")
            }
            Error::EmptyLevelSet { t } => write!(f, "no level set t={t} in the computed region"),
            Error::OutOfDomain { t, x } => write!(f, "point (t={t}, x={x}) outside the computed region"),
            Error::InsufficientSamples { needed, found } => {
                write!(f, "need at least {needed} samples, found {found}")
            }
            Error::ProviderGap { t } => write!(f, "no solution slice available at t={t}"),
            Error::MismatchedStart => write!(f, "path start does not lie on a lattice coordinate line"),
            Error::CflViolation { cfl } => write!(f, "CFL number {cfl} exceeds 0.5"),
            Error::BlowupSuspected { t, max_gradient } => {
                write!(f, "gradient blowup suspected at t={t} (max |R|,|S| = {max_gradient:e})")
            }
            Error::WindowMismatch => write!(f, "comparison times outside the common window"),
        }
    }
}

impl core::error::Error for Error {}
