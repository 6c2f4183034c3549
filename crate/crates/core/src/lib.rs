//! Discrete first-order methods for monotone saddle-point problems, their
//! high-resolution ODE models, and the stability, Lyapunov and rate tools
//! built on them. The guide in `book/` walks through each module.

pub mod catalog;
pub mod discrete;
pub mod error;
pub mod experiment;
pub mod hrde;
pub mod linalg;
pub mod lyapunov;
pub mod problem;
pub mod rates;
pub mod stability;
pub mod trajectory;

pub use error::{Error, Result};

#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/problems.md")]
    pub mod problems {}
    #[doc = include_str!("../../../book/src/discrete.md")]
    pub mod discrete {}
    #[doc = include_str!("../../../book/src/continuous.md")]
    pub mod continuous {}
    #[doc = include_str!("../../../book/src/stability.md")]
    pub mod stability {}
    #[doc = include_str!("../../../book/src/lyapunov.md")]
    pub mod lyapunov {}
    #[doc = include_str!("../../../book/src/rates.md")]
    pub mod rates {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
