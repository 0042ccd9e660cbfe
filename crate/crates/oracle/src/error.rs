use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("state space too large: {0} states exceeds the {cap} cap", cap = crate::ctmc::STATE_CAP)]
    StateSpaceOverflow(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Core(#[from] rdd_core::CoreError),

    #[error(transparent)]
    Lattice(#[from] rdd_crdme::CrdmeError),
}
