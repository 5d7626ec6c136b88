use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be positive, got {0}")]
    InvalidDegree(u32),
    #[error("field order {0} exceeds the supported bound")]
    FieldTooLarge(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("PSL(2,q) requires q >= 4, got {0}")]
    GroupTooSmall(u64),
    #[error("invalid class set: {0}")]
    InvalidClassSet(String),
    #[error("class {0} is not inverse-closed; the orbital scheme is not symmetric")]
    NonSymmetricScheme(String),
    #[error("fusion is not an association scheme: {0}")]
    FusionNotAScheme(String),
    #[error("eigenvalue of relation {relation} is irrational (characteristic polynomial has a non-linear irreducible factor)")]
    IrrationalEigenvalue { relation: String },
    #[error("scheme has no exact dual eigenmatrix")]
    MissingEigenmatrix,
    #[error("vertex set is empty")]
    EmptySet,
    #[error("vertices do not form a clique: {0}")]
    NotAClique(String),
    #[error("not a subgroup: {0}")]
    NotASubgroup(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("witness verification failed: {0}")]
    WitnessFailed(String),
    #[error("certificate rejected: {0}")]
    CertificateRejected(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
