//! Second-order central finite differences on a uniform grid, cast into the same
//! operator shape as the finite element assembly so the time stepper is shared.
//!
//! The mass matrix is the identity, the diffusion and convection stencils are
//! `(u_{i-1} - 2u_i + u_{i+1}) / h²` and `(u_{i+1} - u_{i-1}) / 2h`. Boundary rows are
//! not differenced; boundary values come from the same boundary ODE as the FE solver.

use crate::banded::BandedMatrix;
use crate::contracts::{BondContract, MarketParams};
use crate::error::{Error, Result};
use crate::fem::{BoundaryCoupling, GlobalOperators};
use crate::scalar::Real;
use crate::stepper::{NewtonConfig, PenaltyTfSolver, PriceSurface, SolveReport, SolverSettings};

/// Uniform grid `x_i = x_min + i h`, `i = 0..=n_intervals`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdGrid<T> {
    pub x_min: T,
    pub x_max: T,
    pub n_intervals: usize,
    pub h: T,
    pub nodes: Vec<T>,
}

impl<T: Real> FdGrid<T> {
    pub fn new(x_min: T, x_max: T, n_intervals: usize) -> Result<Self> {
        if n_intervals < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 intervals (got {n_intervals})"
            )));
        }
        if !x_min.is_finite() || !x_max.is_finite() || x_min >= x_max {
            return Err(Error::Config(format!(
                "grid bounds must be finite with x_min < x_max (got [{x_min}, {x_max}])"
            )));
        }
        let h = (x_max - x_min) / T::from_count(n_intervals);
        let mut nodes: Vec<T> = (0..=n_intervals)
            .map(|i| x_min + h * T::from_count(i))
            .collect();
        nodes[n_intervals] = x_max;
        Ok(Self {
            x_min,
            x_max,
            n_intervals,
            h,
            nodes,
        })
    }

    pub fn n_interior(&self) -> usize {
        self.n_intervals - 1
    }

    pub fn node_index(&self, x: T) -> Option<usize> {
        let tol = self.h * T::lit(1e-9);
        let i = ((x - self.x_min) / self.h).round().to_usize()?;
        (i <= self.n_intervals && (self.nodes[i] - x).abs() <= tol).then_some(i)
    }
}

/// Difference operators over the interior nodes, boundary columns dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct FdmOperators<T> {
    pub h: T,
    /// `σ²/2 ∂²/∂x²`
    pub l_diff: BandedMatrix<T>,
    /// `(r - σ²/2) ∂/∂x`
    pub l_conv: BandedMatrix<T>,
}

impl<T: Real> FdmOperators<T> {
    pub fn new(grid: &FdGrid<T>, market: &MarketParams<T>) -> Self {
        let n = grid.n_interior();
        let h = grid.h;
        let half_var = market.sigma * market.sigma / T::lit(2.0);
        let drift = market.r - half_var;
        let d2 = half_var / (h * h);
        let d1 = drift / (T::lit(2.0) * h);
        Self {
            h,
            l_diff: BandedMatrix::tridiagonal_constant(n, d2, -T::lit(2.0) * d2, d2),
            l_conv: BandedMatrix::tridiagonal_constant(n, -d1, T::zero(), d1),
        }
    }
}

/// Unit-coefficient operators in the stepper's sign convention: `M = I`,
/// `K u ≈ -u_xx`, `N u ≈ -u_x`.
pub fn fdm_operators<T: Real>(grid: &FdGrid<T>) -> GlobalOperators<T> {
    let n = grid.n_interior();
    let h = grid.h;
    let k = T::one() / (h * h);
    let c = T::one() / (T::lit(2.0) * h);
    let last = n - 1;
    GlobalOperators {
        mass: BandedMatrix::identity(n),
        stiffness: BandedMatrix::tridiagonal_constant(n, -k, T::lit(2.0) * k, -k),
        convection: BandedMatrix::tridiagonal_constant(n, c, T::zero(), -c),
        mass_coupling: BoundaryCoupling::empty(),
        stiffness_coupling: BoundaryCoupling {
            left: vec![(0, -k)],
            right: vec![(last, -k)],
        },
        convection_coupling: BoundaryCoupling {
            left: vec![(0, c)],
            right: vec![(last, -c)],
        },
    }
}

/// Finite-difference counterpart of [`crate::stepper::full_solve`].
pub fn fdm_solve<T: Real>(
    grid: &FdGrid<T>,
    contract: &BondContract<T>,
    market: &MarketParams<T>,
    theta: T,
    n_t: usize,
    cfg: &NewtonConfig<T>,
) -> Result<(PriceSurface<T>, SolveReport<T>)> {
    let ops = fdm_operators(grid);
    PenaltyTfSolver::new(
        &ops,
        &grid.nodes,
        contract,
        market,
        SolverSettings {
            theta,
            n_t,
            newton: *cfg,
        },
    )?
    .surface()
}
