use std::fmt;

/// Errors reported by state constructors, band functions, and sweep runners.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A spinor or lattice state failed the unit-norm check.
    NotNormalized { norm_sq: f64 },
    /// Plate charge q must be a positive half-integer (2q a positive integer).
    InvalidCharge { q: f64 },
    /// Hopping amplitudes must be non-negative and not both zero.
    InvalidCouplings { t: f64, t_prime: f64 },
    /// A probability array had a negative entry or did not sum to one.
    InvalidDistribution(String),
    /// Normalized moments are undefined for a zero-step walk.
    ZeroSteps,
    /// A sampling grid was below the minimum resolution for the requested quantity.
    GridTooCoarse { grid: usize, min: usize },
    /// The band gap closes at this point; eigenvector and velocity are undefined.
    GapClosed { delta: f64, k: f64 },
    /// Winding number is undefined at a topological transition.
    WindingUndefined { delta: f64 },
    /// The SSH spectrum is gapless at t = t'; winding/residues are undefined.
    GaplessCouplings { t: f64, t_prime: f64 },
    /// A pole sits too close to the unit-circle integration path.
    PoleNearContour { distance: f64 },
    /// The numeric contour integral disagreed with the analytic residue.
    ResidueMismatch { pole_index: usize, error: f64 },
    /// The lattice is too small for the requested evolution time (wrap-around risk).
    AliasedLattice { cells: usize, required: usize },
    /// Evolution time must be non-negative and finite.
    InvalidTime { tau: f64 },
    /// A sweep configuration failed validation.
    InvalidSweep(String),
    /// An internal numerical self-check failed.
    Numerical(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotNormalized { norm_sq } => {
                write!(f, "state is not normalized: |psi|^2 = {norm_sq:.17e}")
            }
            Error::InvalidCharge { q } => {
                write!(f, "plate charge q = {q} is not a positive half-integer")
            }
            Error::InvalidCouplings { t, t_prime } => {
                write!(f, "hoppings (t, t') = ({t}, {t_prime}) must be non-negative and not both zero")
            }
            Error::InvalidDistribution(msg) => write!(f, "invalid distribution: {msg}"),
            Error::ZeroSteps => write!(f, "normalized moments require a step count n >= 1"),
            Error::GridTooCoarse { grid, min } => {
                write!(f, "grid of {grid} points is below the minimum of {min}")
            }
            Error::GapClosed { delta, k } => {
                write!(f, "band gap closes at (delta, k) = ({delta}, {k}); quantity undefined")
            }
            Error::WindingUndefined { delta } => {
                write!(f, "winding undefined at transition (delta = {delta})")
            }
            Error::GaplessCouplings { t, t_prime } => {
                write!(f, "spectrum is gapless at t = t' (({t}, {t_prime})); quantity undefined")
            }
            Error::PoleNearContour { distance } => {
                write!(f, "pole within {distance:.3e} of the unit-circle integration path")
            }
            Error::ResidueMismatch { pole_index, error } => {
                write!(f, "contour check of residue {pole_index} off by {error:.3e}")
            }
            Error::AliasedLattice { cells, required } => {
                write!(f, "lattice of {cells} cells risks wrap-around; need at least {required}")
            }
            Error::InvalidTime { tau } => write!(f, "invalid evolution time tau = {tau}"),
            Error::InvalidSweep(msg) => write!(f, "invalid sweep configuration: {msg}"),
            Error::Numerical(msg) => write!(f, "numerical self-check failed: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
