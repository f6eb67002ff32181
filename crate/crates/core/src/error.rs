use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not PSD: lambda_min = {lambda_min}")]
    NotPsd { lambda_min: f64 },
    #[error("eigensolver did not converge: off-diagonal residual {residual}")]
    NonConvergence { residual: f64 },
    #[error("model error: {0}")]
    Model(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("audit failure: {0}")]
    Audit(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
