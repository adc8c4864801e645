//! Sampled fields on the (N_s x N_theta) chart grid, stored row-major in s.

use crate::error::{Error, Result};
use crate::surface::{M3, V3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub n_s: usize,
    pub n_theta: usize,
}

impl Shape {
    pub fn len(&self) -> usize {
        self.n_s * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, j: usize, k: usize) -> usize {
        j * self.n_theta + k
    }

    pub fn check(&self, other: Shape) -> Result<()> {
        if *self != other {
            return Err(Error::GridMismatch {
                expected: (self.n_s, self.n_theta),
                found: (other.n_s, other.n_theta),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub shape: Shape,
    pub values: Vec<f64>,
}

/// 3-vector per node, not necessarily tangential.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub shape: Shape,
    pub values: Vec<V3>,
}

/// Tangential 3-vector per node; build through `SurfaceGrid::tangent`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentField {
    pub shape: Shape,
    pub values: Vec<V3>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixField {
    pub shape: Shape,
    pub values: Vec<M3>,
}

macro_rules! field_common {
    ($t:ident, $v:ty, $zero:expr) => {
        impl $t {
            pub fn zeros(shape: Shape) -> Self {
                $t { shape, values: vec![$zero; shape.len()] }
            }

            pub fn map(&self, f: impl Fn($v) -> $v) -> Self {
                $t { shape: self.shape, values: self.values.iter().map(|&v| f(v)).collect() }
            }

            pub fn zip_with(&self, other: &Self, f: impl Fn($v, $v) -> $v) -> Self {
                assert_eq!(self.shape, other.shape, "field shapes differ");
                $t {
                    shape: self.shape,
                    values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
                }
            }

            pub fn add(&self, other: &Self) -> Self {
                self.zip_with(other, |a, b| a + b)
            }

            pub fn sub(&self, other: &Self) -> Self {
                self.zip_with(other, |a, b| a - b)
            }

            pub fn scale(&self, c: f64) -> Self {
                self.map(|a| a * c)
            }

            /// Pointwise product with a scalar field.
            pub fn mul_scalar(&self, g: &ScalarField) -> Self {
                assert_eq!(self.shape, g.shape, "field shapes differ");
                $t {
                    shape: self.shape,
                    values: self.values.iter().zip(&g.values).map(|(&a, &b)| a * b).collect(),
                }
            }
        }
    };
}

field_common!(ScalarField, f64, 0.0);
field_common!(VectorField, V3, V3::zeros());
field_common!(TangentField, V3, V3::zeros());
field_common!(MatrixField, M3, M3::zeros());

impl ScalarField {
    pub fn constant(shape: Shape, c: f64) -> Self {
        ScalarField { shape, values: vec![c; shape.len()] }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, b| a.max(b.abs()))
    }
}

impl TangentField {
    pub fn as_vector(&self) -> VectorField {
        VectorField { shape: self.shape, values: self.values.clone() }
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    pub(crate) fn from_raw(shape: Shape, values: Vec<V3>) -> Self {
        TangentField { shape, values }
    }
}

impl VectorField {
    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.norm()))
    }
}

impl MatrixField {
    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, m| a.max(m.amax()))
    }
}
