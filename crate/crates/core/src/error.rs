use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("sample length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("derivative order {0} is below -1")]
    DerivativeOrder(i32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("resonant tuple {0:?}: prefactor vanishes")]
    Resonant(Vec<String>),

    #[error("zero resonance symbol on non-resonant lattice tuple {0:?}")]
    DegenerateSymbol(Vec<i64>),

    #[error("resonant tuple {tuple:?}: |M4| = {value:e} exceeds {bound:e}")]
    ResonantResidual { tuple: Vec<i64>, value: f64, bound: f64 },

    #[error("imaginary residue {residue:e} exceeds tolerance for a real-valued {what}")]
    ImaginaryResidue { what: &'static str, residue: f64 },

    #[error("blow-up guard tripped at t = {t}: coefficient magnitude {magnitude:e}")]
    BlowUp { t: f64, magnitude: f64 },

    #[error("matrix dimension {0} exceeds the Jacobian cost guard")]
    JacobianTooLarge(usize),

    #[error("experiment: {0}")]
    Experiment(String),
}
