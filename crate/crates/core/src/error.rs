use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("defining polynomial with mu = {0:?} is reducible over GF({1})")]
    ReduciblePolynomial(Vec<u32>, u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("axiom violation: {0}")]
    AxiomViolation(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cyclotomic orders {0} and {1} cannot be combined exactly")]
    OrderMismatch(u64, u64),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("{0} has no nontrivial factorization {1}x{2}")]
    NotComposite(usize, usize, usize),
    #[error("no intertwining unitary exists")]
    NoSolution,
    #[error("intertwiner is not unique (null space dimension {0})")]
    NonUniqueSolution(usize),
    #[error("amplitudes not normalized: sum |a|^2 = {0}")]
    NotNormalized(f64),
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
    #[error("degenerate line: a = b = 0")]
    DegenerateLine,
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("both Moebius maps are degenerate at ({0}, {1}, {2}); select the special-point branch")]
    DegenerateMobiusPoint(f64, f64, f64),
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("rank is ill-conditioned: {rank_tight} at tight threshold vs {rank_loose} at loose threshold")]
    IllConditioned { rank_tight: usize, rank_loose: usize },
    #[error("catalog is incomplete: {0}")]
    IncompleteCatalog(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
