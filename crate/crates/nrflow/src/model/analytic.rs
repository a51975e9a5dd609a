//! Small plants with pen-and-paper solutions, used as test fixtures across
//! the predictor, controller, and harness tests.

use super::{ModelError, Plant};
use crate::math::Scalar;
use nalgebra::{DMatrix, DVector};

/// ẋ = 0 with y = x: the output prediction equals the current output for any
/// horizon, which pins down the predictor plumbing.
#[derive(Debug, Clone)]
pub struct ZeroDynamics;

impl Plant for ZeroDynamics {
    fn dim_x(&self) -> usize {
        4
    }

    fn dynamics<S: Scalar>(&self, _x: &[S], _u: &[S; 4], dx: &mut [S]) -> Result<(), ModelError> {
        for v in dx.iter_mut() {
            *v = S::from_f64(0.0);
        }
        Ok(())
    }

    fn output<S: Scalar>(&self, x: &[S]) -> [S; 4] {
        [x[0], x[1], x[2], x[3]]
    }
}

/// ẋ = u with y = x: the exact flow is x + T·u, so the predicted-output
/// Jacobian is T·I for any integration step count.
#[derive(Debug, Clone)]
pub struct ChainIntegrator;

impl Plant for ChainIntegrator {
    fn dim_x(&self) -> usize {
        4
    }

    fn dynamics<S: Scalar>(&self, _x: &[S], u: &[S; 4], dx: &mut [S]) -> Result<(), ModelError> {
        dx.copy_from_slice(u);
        Ok(())
    }

    fn output<S: Scalar>(&self, x: &[S]) -> [S; 4] {
        [x[0], x[1], x[2], x[3]]
    }
}

/// Double integrator per channel: positions (x0..x3) driven by velocities
/// (x4..x7), which integrate u. Exact flow gives position x + T·v + T²/2·u.
#[derive(Debug, Clone)]
pub struct DoubleIntegrator4;

impl Plant for DoubleIntegrator4 {
    fn dim_x(&self) -> usize {
        8
    }

    fn dynamics<S: Scalar>(&self, x: &[S], u: &[S; 4], dx: &mut [S]) -> Result<(), ModelError> {
        for i in 0..4 {
            dx[i] = x[4 + i];
            dx[4 + i] = u[i];
        }
        Ok(())
    }

    fn output<S: Scalar>(&self, x: &[S]) -> [S; 4] {
        [x[0], x[1], x[2], x[3]]
    }
}

/// ẋ = Ax + Bu, y = Cx with dense matrices; the matrix exponential and the
/// discrete-time sensitivities are available in closed form for oracles.
#[derive(Debug, Clone)]
pub struct LinearPlant {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

impl LinearPlant {
    /// `a` is n×n, `b` is n×4, `c` is 4×n.
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Self {
        let n = a.nrows();
        assert_eq!(a.ncols(), n);
        assert_eq!((b.nrows(), b.ncols()), (n, 4));
        assert_eq!((c.nrows(), c.ncols()), (4, n));
        Self { a, b, c }
    }

    /// Stable diagonal plant ẋᵢ = −λᵢxᵢ + uᵢ, y = x, handy as a fixture.
    pub fn stable_diagonal(lambdas: [f64; 4]) -> Self {
        let a = DMatrix::from_diagonal(&DVector::from_row_slice(
            &lambdas.map(|l| -l),
        ));
        Self::new(a, DMatrix::identity(4, 4), DMatrix::identity(4, 4))
    }
}

impl Plant for LinearPlant {
    fn dim_x(&self) -> usize {
        self.a.nrows()
    }

    fn dynamics<S: Scalar>(&self, x: &[S], u: &[S; 4], dx: &mut [S]) -> Result<(), ModelError> {
        let n = self.a.nrows();
        for i in 0..n {
            let mut acc = S::from_f64(0.0);
            for j in 0..n {
                acc += S::from_f64(self.a[(i, j)]) * x[j];
            }
            for j in 0..4 {
                acc += S::from_f64(self.b[(i, j)]) * u[j];
            }
            dx[i] = acc;
        }
        Ok(())
    }

    fn output<S: Scalar>(&self, x: &[S]) -> [S; 4] {
        std::array::from_fn(|i| {
            let mut acc = S::from_f64(0.0);
            for j in 0..self.c.ncols() {
                acc += S::from_f64(self.c[(i, j)]) * x[j];
            }
            acc
        })
    }
}
