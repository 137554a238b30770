//! Semi-discrete two-equation model: θ-scheme matrices, penalty bounds and indicators,
//! the rules that pin the cash-only component, and coupon payments.

use crate::banded::BandedMatrix;
use crate::contracts::{terminal_payoff, BondContract, ExercisePrices, MarketParams};
use crate::error::{Error, Result};
use crate::fem::GlobalOperators;
use crate::scalar::Real;

/// θ-scheme system matrices for one step size.
///
/// With `L_u = σ²/2 K + (r - σ²/2) N + r M` and `L_v = L_u + r_c M`:
/// `A11 = M + θΔτ L_u`, `A12 = θΔτ r_c M`, `A22 = M + θΔτ L_v` and the explicit
/// counterparts `Ã11 = M - (1-θ)Δτ L_u`, `Ã12 = -(1-θ)Δτ r_c M`, `Ã22 = M - (1-θ)Δτ L_v`.
#[derive(Debug, Clone)]
pub struct ThetaSystem<T> {
    pub theta: T,
    pub dtau: T,
    pub a11: BandedMatrix<T>,
    pub a12: BandedMatrix<T>,
    pub a22: BandedMatrix<T>,
    pub at11: BandedMatrix<T>,
    pub at12: BandedMatrix<T>,
    pub at22: BandedMatrix<T>,
}

pub fn build_theta_system<T: Real>(
    ops: &GlobalOperators<T>,
    market: &MarketParams<T>,
    theta: T,
    dtau: T,
) -> Result<ThetaSystem<T>> {
    if !(theta >= T::zero() && theta <= T::one()) {
        return Err(Error::Config(format!(
            "theta must lie in [0, 1] (got {theta})"
        )));
    }
    if !(dtau > T::zero()) || !dtau.is_finite() {
        return Err(Error::Config(format!("time step must be > 0 (got {dtau})")));
    }
    let half_var = market.sigma * market.sigma / T::lit(2.0);
    let drift = market.r - half_var;
    let implicit = theta * dtau;
    let explicit = -(T::one() - theta) * dtau;
    let (m, k, n) = (&ops.mass, &ops.stiffness, &ops.convection);

    let op = |w: T, reaction: T| {
        BandedMatrix::linear_combination(&[
            (T::one() + w * reaction, m),
            (w * half_var, k),
            (w * drift, n),
        ])
    };
    let rv = market.r + market.r_c;
    Ok(ThetaSystem {
        theta,
        dtau,
        a11: op(implicit, market.r),
        a12: BandedMatrix::linear_combination(&[(implicit * market.r_c, m)]),
        a22: op(implicit, rv),
        at11: op(explicit, market.r),
        at12: BandedMatrix::linear_combination(&[(explicit * market.r_c, m)]),
        at22: op(explicit, rv),
    })
}

/// Nodal bounds on the bond value at one backward time, over every node including
/// the two boundary nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyBounds<T> {
    pub tau: T,
    pub prices: ExercisePrices<T>,
    /// `k S_int e^{x_i}`
    pub conversion: Vec<T>,
    /// `max(B_put, k S)`
    pub lower: Vec<T>,
    /// `max(B_call, k S)`
    pub upper: Vec<T>,
}

pub fn penalty_bounds<T: Real>(
    nodes: &[T],
    contract: &BondContract<T>,
    market: &MarketParams<T>,
    tau: T,
) -> Result<PenaltyBounds<T>> {
    let prices = ExercisePrices::at_tau(contract, tau)?;
    let conversion: Vec<T> = nodes
        .iter()
        .map(|&x| contract.conversion_value(x, market))
        .collect();
    let (lower, upper) = conversion.iter().map(|&ks| prices.bounds(ks)).unzip();
    Ok(PenaltyBounds {
        tau,
        prices,
        conversion,
        lower,
        upper,
    })
}

/// 0/1 nodal switches selecting the active penalty terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Indicators<T> {
    pub call: Vec<T>,
    pub put: Vec<T>,
}

impl<T: Real> Indicators<T> {
    /// `alpha_call + alpha_put`, the diagonal entering the Newton Jacobian.
    pub fn combined(&self) -> Vec<T> {
        self.call
            .iter()
            .zip(&self.put)
            .map(|(&a, &b)| a + b)
            .collect()
    }

    pub fn active_count(&self) -> usize {
        self.combined().iter().filter(|&&a| a != T::zero()).count()
    }
}

/// `alpha_call[i] = [u_i >= upper_i]`, `alpha_put[i] = [u_i <= lower_i]`.
pub fn update_indicators<T: Real>(u: &[T], lower: &[T], upper: &[T]) -> Result<Indicators<T>> {
    if lower.len() != u.len() || upper.len() != u.len() {
        return Err(Error::Dimension {
            expected: u.len(),
            found: lower.len().min(upper.len()),
        });
    }
    let flag = |b: bool| if b { T::one() } else { T::zero() };
    Ok(Indicators {
        call: u
            .iter()
            .zip(upper)
            .map(|(&ui, &up)| flag(ui - up >= T::zero()))
            .collect(),
        put: u
            .iter()
            .zip(lower)
            .map(|(&ui, &lo)| flag(lo - ui >= T::zero()))
            .collect(),
    })
}

/// Penalized deviation `alpha_call (u - upper) + alpha_put (u - lower)` per node.
pub fn penalty_deviation<T: Real>(
    u: &[T],
    lower: &[T],
    upper: &[T],
    ind: &Indicators<T>,
) -> Vec<T> {
    u.iter()
        .enumerate()
        .map(|(i, &ui)| ind.call[i] * (ui - upper[i]) + ind.put[i] * (ui - lower[i]))
        .collect()
}

/// Pins the cash-only component where a right is exercised, judged against `u_ref`.
///
/// Rules are applied in order, later ones overriding earlier ones:
/// conversion (`u <= kS` → 0), call (`u >= B_call` → 0), put (`u <= B_put` → `B_put`).
pub fn apply_v_constraints<T: Real>(
    v: &mut [T],
    u_ref: &[T],
    conversion: &[T],
    prices: &ExercisePrices<T>,
) {
    for ((vi, &u), &ks) in v.iter_mut().zip(u_ref).zip(conversion) {
        if u <= ks {
            *vi = T::zero();
        }
        if prices.call_active && u >= prices.call {
            *vi = T::zero();
        }
        if prices.put_active && u <= prices.put {
            *vi = prices.put;
        }
    }
}

/// Solution at one time level: interior coefficients plus boundary values.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState<T> {
    pub m: usize,
    pub tau: T,
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub u0: T,
    pub v0: T,
    pub u_np1: T,
    pub v_np1: T,
}

impl<T: Real> SolutionState<T> {
    /// Builds a state from full nodal vectors (boundaries included).
    pub fn from_nodal(m: usize, tau: T, u: &[T], v: &[T]) -> Self {
        let n = u.len();
        Self {
            m,
            tau,
            u: u[1..n - 1].to_vec(),
            v: v[1..n - 1].to_vec(),
            u0: u[0],
            v0: v[0],
            u_np1: u[n - 1],
            v_np1: v[n - 1],
        }
    }

    pub fn u_nodal(&self) -> Vec<T> {
        crate::fem::with_boundaries(self.u0, &self.u, self.u_np1)
    }

    pub fn v_nodal(&self) -> Vec<T> {
        crate::fem::with_boundaries(self.v0, &self.v, self.v_np1)
    }

    /// Index of the first node holding a NaN or infinite value.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.u_nodal()
            .iter()
            .zip(self.v_nodal())
            .position(|(u, v)| !u.is_finite() || !v.is_finite())
    }
}

/// Terminal payoff sampled at every node.
pub fn initial_state<T: Real>(
    nodes: &[T],
    contract: &BondContract<T>,
    market: &MarketParams<T>,
) -> SolutionState<T> {
    let (u, v): (Vec<T>, Vec<T>) = nodes
        .iter()
        .map(|&x| terminal_payoff(x, contract, market))
        .unzip();
    SolutionState::from_nodal(0, T::zero(), &u, &v)
}

/// Adds the coupon to every value when `tau_new` is a coupon date in backward time.
/// Returns whether a coupon was paid.
pub fn coupon_bump<T: Real>(
    state: &mut SolutionState<T>,
    contract: &BondContract<T>,
    tau_new: T,
) -> bool {
    if !contract.is_coupon_tau(tau_new) {
        return false;
    }
    let k = contract.coupon_amount;
    state
        .u
        .iter_mut()
        .chain(state.v.iter_mut())
        .for_each(|x| *x += k);
    state.u0 += k;
    state.v0 += k;
    state.u_np1 += k;
    state.v_np1 += k;
    true
}
