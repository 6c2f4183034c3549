//! Named test problems.

use crate::error::Result;
use crate::linalg::{DenseMatrix, Vector};
use crate::problem::{
    random_bilinear, BilinearGame, Operator, QuarticCounterexample, ScaledIdentityOperator, DEFAULT_SIGMA_MIN,
};

pub const PROBLEM_IDS: [&str; 4] = ["bilinear", "bilinear-random", "quartic", "scaled-identity"];

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    /// `xᵀAy + bᵀx + cᵀy`
    Bilinear { a: DenseMatrix, b: Option<Vector>, c: Option<Vector> },
    BilinearRandom { seed: u64, d1: usize, d2: usize, sigma_min: f64 },
    Quartic,
    ScaledIdentity { mu: f64, dim: usize },
}

impl ProblemSpec {
    pub fn id(&self) -> &'static str {
        match self {
            ProblemSpec::Bilinear { .. } => "bilinear",
            ProblemSpec::BilinearRandom { .. } => "bilinear-random",
            ProblemSpec::Quartic => "quartic",
            ProblemSpec::ScaledIdentity { .. } => "scaled-identity",
        }
    }

    /// `xᵀy` on `ℝ¹ × ℝ¹`.
    pub fn unit_bilinear() -> Self {
        ProblemSpec::Bilinear { a: DenseMatrix::identity(1), b: None, c: None }
    }

    /// One representative instance of every problem, as used by the
    /// property suites.
    pub fn defaults() -> Vec<ProblemSpec> {
        vec![
            ProblemSpec::unit_bilinear(),
            ProblemSpec::BilinearRandom { seed: 7, d1: 2, d2: 3, sigma_min: 0.1 },
            ProblemSpec::Quartic,
            ProblemSpec::ScaledIdentity { mu: 1.0, dim: 2 },
        ]
    }

    /// The bilinear game behind a bilinear spec, if it is one.
    pub fn bilinear_game(&self) -> Result<Option<BilinearGame>> {
        match self {
            ProblemSpec::Bilinear { a, b, c } => {
                let b = b.clone().unwrap_or_else(|| Vector::zeros(a.rows()));
                let c = c.clone().unwrap_or_else(|| Vector::zeros(a.cols()));
                BilinearGame::with_offsets(a.clone(), b, c, DEFAULT_SIGMA_MIN).map(Some)
            }
            ProblemSpec::BilinearRandom { seed, d1, d2, sigma_min } => {
                random_bilinear(*seed, *d1, *d2, *sigma_min).map(Some)
            }
            _ => Ok(None),
        }
    }

    pub fn build(&self) -> Result<Box<dyn Operator>> {
        Ok(match self {
            ProblemSpec::Quartic => Box::new(QuarticCounterexample),
            ProblemSpec::ScaledIdentity { mu, dim } => Box::new(ScaledIdentityOperator::new(*mu, *dim)?),
            _ => Box::new(self.bilinear_game()?.expect("bilinear specs build a game")),
        })
    }
}
