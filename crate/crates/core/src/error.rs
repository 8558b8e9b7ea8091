use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed tree file: {0}")]
    Malformed(String),

    #[error("unknown vertex id `{0}`")]
    UnknownVertex(String),

    #[error("inconsistent rotation system: {0}")]
    InconsistentRotation(String),

    #[error("input graph contains a cycle")]
    Cycle,

    #[error("input graph is disconnected")]
    Disconnected,

    #[error("base vertex `{id}` has degree {degree}, expected 1")]
    BadBase { id: String, degree: usize },

    #[error("directions are undefined at the base vertex")]
    DirectionAtBase,

    #[error("edge is not incident to vertex {0}")]
    NotIncident(usize),

    #[error("tree is not sufficiently subdivided for n = {0}")]
    NotSufficientlySubdivided(usize),

    #[error("element is not a member of the cell")]
    NotAMember,

    #[error("invalid cell: {0}")]
    InvalidCell(String),

    #[error("cell count exceeded the cap of {cap}")]
    CapExceeded { cap: usize },

    #[error("search exceeded its budget of {budget} candidates")]
    SearchBudgetExceeded { budget: usize },

    #[error("degree-0 class has no 1-cell factorization")]
    ZeroDimensional,

    #[error("diagrams belong to different instances")]
    MismatchedDiagrams,

    #[error("gradient flow did not settle within {steps} steps")]
    FlowDidNotSettle { steps: usize },

    #[error("chain coefficient overflowed")]
    CoefficientOverflow,

    #[error("critical cocycles in degree {0} do not pair invertibly with their flows")]
    SingularPairing(usize),

    #[error("upper bound of factor collection is not unique")]
    AmbiguousUpperBound,

    #[error("invalid arc: {0}")]
    InvalidArc(String),

    #[error("certificate is inconsistent with the tree: {0}")]
    InconsistentCertificate(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("tree has no essential vertex; labelled points cannot be permuted")]
    NoEssentialVertex,

    #[error("planner produced an invalid path: {0}")]
    InvalidPath(String),
}
