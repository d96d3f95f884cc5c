pub mod alt;
pub mod atlas;
pub mod canonical;
pub mod error;
pub mod glr;
pub mod harness;
pub mod linalg;
pub mod normalizers;
pub mod pair;
pub mod spectral;
pub mod tolerance;

pub use error::{PairError, Result};
pub use tolerance::ToleranceConfig;
