//! Positive definite kernels and Gram matrices.
//!
//! Three families are supported: squared exponential, Matérn with
//! ν ∈ {1/2, 3/2, 5/2} (closed forms only) and linear. Distances are
//! Euclidean with a single lengthscale shared by all input dimensions.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::Matrix;

/// Matérn smoothness values with closed-form kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaternNu {
    Half,
    ThreeHalves,
    FiveHalves,
}

impl MaternNu {
    pub fn from_value(nu: f64) -> Result<Self> {
        match nu {
            0.5 => Ok(Self::Half),
            1.5 => Ok(Self::ThreeHalves),
            2.5 => Ok(Self::FiveHalves),
            _ => Err(invalid(format!(
                "matern nu must be one of 0.5, 1.5, 2.5 (got {nu})"
            ))),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Self::Half => 0.5,
            Self::ThreeHalves => 1.5,
            Self::FiveHalves => 2.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    SquaredExponential,
    Matern(MaternNu),
    Linear,
}

impl KernelFamily {
    pub fn is_stationary(self) -> bool {
        !matches!(self, Self::Linear)
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SquaredExponential => write!(f, "se"),
            Self::Matern(nu) => write!(f, "matern{}", nu.value()),
            Self::Linear => write!(f, "linear"),
        }
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    /// Parses `se`, `linear`, or `matern` (ν = 2.5); `matern0.5`,
    /// `matern1.5`, `matern2.5` select ν explicitly.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "se" | "rbf" | "squared_exponential" | "squaredexponential" => {
                Ok(Self::SquaredExponential)
            }
            "linear" => Ok(Self::Linear),
            "matern" => Ok(Self::Matern(MaternNu::FiveHalves)),
            other => match other.strip_prefix("matern") {
                Some(nu) => {
                    let nu: f64 = nu
                        .parse()
                        .map_err(|_| invalid(format!("unknown kernel family `{s}`")))?;
                    Ok(Self::Matern(MaternNu::from_value(nu)?))
                }
                None => Err(invalid(format!("unknown kernel family `{s}`"))),
            },
        }
    }
}

/// A kernel family together with its hyperparameters. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    lengthscale: f64,
    output_scale: f64,
    dim: usize,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, lengthscale: f64, output_scale: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("kernel input dimension must be positive"));
        }
        if !(output_scale > 0.0 && output_scale.is_finite()) {
            return Err(invalid(format!("output_scale must be positive (got {output_scale})")));
        }
        if family.is_stationary() && !(lengthscale > 0.0 && lengthscale.is_finite()) {
            return Err(invalid(format!("lengthscale must be positive (got {lengthscale})")));
        }
        Ok(Self {
            family,
            lengthscale,
            output_scale,
            dim,
        })
    }

    pub fn squared_exponential(lengthscale: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::SquaredExponential, lengthscale, 1.0, dim)
    }

    pub fn matern(nu: f64, lengthscale: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Matern(MaternNu::from_value(nu)?), lengthscale, 1.0, dim)
    }

    pub fn linear(dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Linear, 1.0, 1.0, dim)
    }

    pub fn with_output_scale(self, output_scale: f64) -> Result<Self> {
        Self::new(self.family, self.lengthscale, output_scale, self.dim)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }

    pub fn output_scale(&self) -> f64 {
        self.output_scale
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `k(x, y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, y.len())?;
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Linear => {
                self.output_scale * x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
            }
            KernelFamily::SquaredExponential => {
                let r2 = sq_dist(x, y) / (self.lengthscale * self.lengthscale);
                self.output_scale * (-0.5 * r2).exp()
            }
            KernelFamily::Matern(nu) => {
                let r = sq_dist(x, y).sqrt() / self.lengthscale;
                self.output_scale * matern_profile(nu, r)
            }
        }
    }

    /// `k(x, x)`.
    pub fn diag(&self, x: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Linear => self.output_scale * x.iter().map(|a| a * a).sum::<f64>(),
            _ => self.output_scale,
        }
    }

    /// `max k(x, x)` over a set of points. Stationary kernels return the
    /// output scale regardless of the points.
    pub fn k_max<'a>(&self, points: impl IntoIterator<Item = &'a [f64]>) -> f64 {
        if self.family.is_stationary() {
            self.output_scale
        } else {
            points.into_iter().map(|p| self.diag(p)).fold(0.0, f64::max)
        }
    }

    /// Gram matrix `K[i][j] = k(points[i], points[j])`.
    pub fn gram<P: AsRef<[f64]>>(&self, points: &[P]) -> Result<Matrix> {
        for p in points {
            check_dim(self.dim, p.as_ref().len())?;
        }
        let n = points.len();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = self.eval_unchecked(points[i].as_ref(), points[j].as_ref());
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(k)
    }

    /// Kernel vector `[k(points[i], x)]_i`.
    pub fn cross<P: AsRef<[f64]>>(&self, points: &[P], x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        points
            .iter()
            .map(|p| {
                check_dim(self.dim, p.as_ref().len())?;
                Ok(self.eval_unchecked(p.as_ref(), x))
            })
            .collect()
    }
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn matern_profile(nu: MaternNu, r: f64) -> f64 {
    match nu {
        MaternNu::Half => (-r).exp(),
        MaternNu::ThreeHalves => {
            let s = 3f64.sqrt() * r;
            (1.0 + s) * (-s).exp()
        }
        MaternNu::FiveHalves => {
            let s = 5f64.sqrt() * r;
            (1.0 + s + s * s / 3.0) * (-s).exp()
        }
    }
}
