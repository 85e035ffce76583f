pub mod bundled;
pub mod cli;
pub mod error;
pub mod feasible;
pub mod format;
pub mod generators;
pub mod likeproj;
pub mod oracle;
pub mod parallel;
pub mod reformulation;
pub mod repro;
pub mod solvers;
pub mod stationarity;
pub mod tensor;

pub use error::{Infeasibility, Result, SblsError};
pub use tensor::{Instance, Matrix, Point, Tensor3};
