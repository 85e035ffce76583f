use thiserror::Error;

/// Why a point fails to lie in the feasible set.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Infeasibility {
    #[error("x block is zero")]
    ZeroX,
    #[error("first nonzero of x at index {index} equals {value}, expected 1")]
    LeadingNotOne { index: usize, value: f64 },
    #[error("x has {count} nonzeros, budget is {budget}")]
    XTooDense { count: usize, budget: usize },
    #[error("y has {count} nonzeros, budget is {budget}")]
    YTooDense { count: usize, budget: usize },
}

#[derive(Debug, Error)]
pub enum SblsError {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("infeasible point: {0}")]
    Infeasible(#[from] Infeasibility),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("enumeration needs {needed} items, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, SblsError>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(SblsError::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
