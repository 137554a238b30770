//! θ-scheme time marching of the penalized two-equation system.
//!
//! Each step first advances the two boundary values (an ODE at `x_min` solved with a
//! scalar Newton iteration, the conversion value at `x_max`), then the interior: the
//! cash-only part `v` from a linear solve and the bond value `u` from a semismooth
//! Newton iteration on the fully implicit penalty system
//!
//! ```text
//! f(u) = A11 u + ρΔτ M ζ(u) - φ,   ζ_i = α_call,i (u_i - u*_call,i) + α_put,i (u_i - u*_put,i)
//! ∇f(u) = A11 + ρΔτ M diag(α_call + α_put)
//! ```
//!
//! Indicators are refreshed at every Newton iterate.

use crate::banded::{BandedLu, BandedMatrix};
use crate::contracts::{BondContract, MarketParams};
use crate::error::{Error, Result};
use crate::fem::{assemble, GlobalOperators, Mesh};
use crate::scalar::{norm_inf, Real};
use crate::tf_model::{
    apply_v_constraints, build_theta_system, coupon_bump, initial_state, penalty_bounds,
    penalty_deviation, update_indicators, PenaltyBounds, SolutionState, ThetaSystem,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig<T> {
    /// Stop when `‖f‖∞ <= tol` or `‖Δu‖∞ <= tol`.
    pub tol: T,
    pub max_iter: usize,
    /// Penalty weight ρ.
    pub rho: T,
}

impl<T: Real> Default for NewtonConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-12),
            max_iter: 100,
            rho: T::lit(1e12),
        }
    }
}

impl<T: Real> NewtonConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.tol > T::zero()) {
            problems.push(format!("newton tol must be > 0 (got {})", self.tol));
        }
        if self.max_iter < 1 {
            problems.push("newton max_iter must be >= 1".to_string());
        }
        if !(self.rho > T::zero()) || !self.rho.is_finite() {
            problems.push(format!("rho must be > 0 (got {})", self.rho));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOutcome<T> {
    pub root: T,
    pub iterations: usize,
    pub residual: T,
}

/// Scalar Newton iteration `x <- x - f(x) / f'(x)`.
pub fn newton_scalar<T, F, D>(
    f: F,
    fprime: D,
    x0: T,
    cfg: &NewtonConfig<T>,
) -> Result<NewtonOutcome<T>>
where
    T: Real,
    F: Fn(T) -> T,
    D: Fn(T) -> T,
{
    let mut x = x0;
    let mut step = T::infinity();
    for k in 0..cfg.max_iter {
        let fx = f(x);
        if fx.abs() <= cfg.tol {
            return Ok(NewtonOutcome {
                root: x,
                iterations: k,
                residual: fx.abs(),
            });
        }
        let d = fprime(x);
        if d == T::zero() || !d.is_finite() {
            return Err(Error::SingularDerivative {
                step: None,
                iteration: Some(k + 1),
            });
        }
        let dx = fx / d;
        x -= dx;
        step = dx.abs();
        if step <= cfg.tol {
            return Ok(NewtonOutcome {
                root: x,
                iterations: k + 1,
                residual: f(x).abs(),
            });
        }
    }
    Err(Error::NewtonNonConvergence {
        step: None,
        iterations: cfg.max_iter,
        residual: f(x).abs().as_f64(),
        step_norm: step.as_f64(),
    })
}

/// Boundary vectors built from the boundary values at one time level.
#[derive(Debug, Clone)]
pub(crate) struct BoundaryVectors<T> {
    /// `σ²/2 b_K,u + (r - σ²/2) b_N,u + r b_M,u + r_c b_M,v`
    pub beta_u: Vec<T>,
    /// `σ²/2 b_K,v + (r - σ²/2) b_N,v + (r + r_c) b_M,v`
    pub beta_v: Vec<T>,
    /// Mass coupling of `u` under the time derivative.
    pub hat_u: Vec<T>,
    pub hat_v: Vec<T>,
}

pub(crate) fn boundary_vectors<T: Real>(
    ops: &GlobalOperators<T>,
    market: &MarketParams<T>,
    u: (T, T),
    v: (T, T),
) -> BoundaryVectors<T> {
    let n = ops.dim();
    let half_var = market.sigma * market.sigma / T::lit(2.0);
    let drift = market.r - half_var;
    let mut beta_u = vec![T::zero(); n];
    let mut beta_v = vec![T::zero(); n];
    let mut hat_u = vec![T::zero(); n];
    let mut hat_v = vec![T::zero(); n];
    ops.stiffness_coupling
        .apply(half_var, u.0, u.1, &mut beta_u);
    ops.convection_coupling.apply(drift, u.0, u.1, &mut beta_u);
    ops.mass_coupling.apply(market.r, u.0, u.1, &mut beta_u);
    ops.mass_coupling.apply(market.r_c, v.0, v.1, &mut beta_u);
    ops.stiffness_coupling
        .apply(half_var, v.0, v.1, &mut beta_v);
    ops.convection_coupling.apply(drift, v.0, v.1, &mut beta_v);
    ops.mass_coupling
        .apply(market.r + market.r_c, v.0, v.1, &mut beta_v);
    ops.mass_coupling.apply(T::one(), u.0, u.1, &mut hat_u);
    ops.mass_coupling.apply(T::one(), v.0, v.1, &mut hat_v);
    BoundaryVectors {
        beta_u,
        beta_v,
        hat_u,
        hat_v,
    }
}

/// Result of advancing the `x_min` boundary by one step (before any coupon payment).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryStep<T> {
    pub u0: T,
    pub v0: T,
    pub iterations: usize,
}

/// Advances the `x_min` boundary ODEs
/// `u' = -r u - r_c v - ρ ζ(u)`, `v' = -(r + r_c) v` by one θ-step, with the penalty
/// taken fully implicitly. `lower`/`upper`/`conversion` are the node-0 bounds at the new
/// level.
#[allow(clippy::too_many_arguments)]
pub fn boundary_step<T: Real>(
    state: &SolutionState<T>,
    sys: &ThetaSystem<T>,
    bounds: &PenaltyBounds<T>,
    market: &MarketParams<T>,
    cfg: &NewtonConfig<T>,
) -> Result<BoundaryStep<T>> {
    let (theta, dt) = (sys.theta, sys.dtau);
    let one = T::one();
    let (r, rc) = (market.r, market.r_c);
    let rv = r + rc;
    let (lower, upper, ks) = (bounds.lower[0], bounds.upper[0], bounds.conversion[0]);

    let mut v0 = (one - (one - theta) * dt * rv) / (one + theta * dt * rv) * state.v0;
    let c = one + theta * dt * r;
    let explicit = state.u0 - (one - theta) * dt * (r * state.u0 + rc * state.v0);

    let unconstrained = (explicit - theta * dt * rc * v0) / c;
    let mut vv = [v0];
    apply_v_constraints(&mut vv, &[unconstrained], &[ks], &bounds.prices);
    v0 = vv[0];

    let phi = explicit - theta * dt * rc * v0;
    let rho_dt = cfg.rho * dt;
    let call_on = |u: T| {
        if u - upper >= T::zero() {
            one
        } else {
            T::zero()
        }
    };
    let put_on = |u: T| {
        if lower - u >= T::zero() {
            one
        } else {
            T::zero()
        }
    };
    let f = |u: T| c * u + rho_dt * (call_on(u) * (u - upper) + put_on(u) * (u - lower)) - phi;
    let fp = |u: T| c + rho_dt * (call_on(u) + put_on(u));
    let out = newton_scalar(f, fp, unconstrained, cfg)?;

    let mut vv = [v0];
    apply_v_constraints(&mut vv, &[out.root], &[ks], &bounds.prices);
    Ok(BoundaryStep {
        u0: out.root,
        v0: vv[0],
        iterations: out.iterations,
    })
}

/// Interior values at the new level (before any coupon payment) and Newton diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorStep<T> {
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub iterations: usize,
    /// `‖f‖∞` at the returned iterate.
    pub residual: T,
    /// `‖Δu‖∞` of the last Newton update (zero if none was needed).
    pub step_norm: T,
}

/// Boundary values at the new time level, ahead of the interior solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryValues<T> {
    pub u0: T,
    pub v0: T,
    pub u_np1: T,
    pub v_np1: T,
}

/// Reusable factorizations for a fixed θ-system.
pub struct InteriorSolver<'a, T> {
    ops: &'a GlobalOperators<T>,
    sys: &'a ThetaSystem<T>,
    a11_lu: BandedLu<T>,
    a22_lu: BandedLu<T>,
}

impl<'a, T: Real> InteriorSolver<'a, T> {
    pub fn new(ops: &'a GlobalOperators<T>, sys: &'a ThetaSystem<T>) -> Result<Self> {
        Ok(Self {
            ops,
            sys,
            a11_lu: sys.a11.lu()?,
            a22_lu: sys.a22.lu()?,
        })
    }

    /// One interior θ-step. `bounds` covers every node; `boundary_penalty` holds the
    /// penalized deviations `ζ` at the two boundary nodes.
    pub fn step(
        &self,
        state: &SolutionState<T>,
        boundary_new: &BoundaryValues<T>,
        bounds: &PenaltyBounds<T>,
        boundary_penalty: (T, T),
        market: &MarketParams<T>,
        cfg: &NewtonConfig<T>,
    ) -> Result<InteriorStep<T>> {
        let sys = self.sys;
        let ops = self.ops;
        let n = ops.dim();
        let (theta, dt) = (sys.theta, sys.dtau);
        let w_new = theta * dt;
        let w_old = (T::one() - theta) * dt;

        let old = boundary_vectors(
            ops,
            market,
            (state.u0, state.u_np1),
            (state.v0, state.v_np1),
        );
        let new = boundary_vectors(
            ops,
            market,
            (boundary_new.u0, boundary_new.u_np1),
            (boundary_new.v0, boundary_new.v_np1),
        );

        let mut rhs_v = sys.at22.matvec(&state.v);
        for i in 0..n {
            rhs_v[i] +=
                -w_new * new.beta_v[i] - w_old * old.beta_v[i] + old.hat_v[i] - new.hat_v[i];
        }
        let mut v = self.a22_lu.solve(&rhs_v)?;

        let mut rhs_u = sys.at11.matvec(&state.u);
        sys.at12.matvec_acc(T::one(), &state.v, &mut rhs_u);
        for i in 0..n {
            rhs_u[i] +=
                -w_new * new.beta_u[i] - w_old * old.beta_u[i] + old.hat_u[i] - new.hat_u[i];
        }

        let mut phi = rhs_u.clone();
        sys.a12.matvec_acc(-T::one(), &v, &mut phi);
        let unconstrained = self.a11_lu.solve(&phi)?;

        let interior = 1..n + 1;
        let lower = &bounds.lower[interior.clone()];
        let upper = &bounds.upper[interior.clone()];
        let conversion = &bounds.conversion[interior];
        apply_v_constraints(&mut v, &unconstrained, conversion, &bounds.prices);

        phi.copy_from_slice(&rhs_u);
        sys.a12.matvec_acc(-T::one(), &v, &mut phi);
        ops.mass_coupling.apply(
            -w_new * cfg.rho,
            boundary_penalty.0,
            boundary_penalty.1,
            &mut phi,
        );

        let (u, iterations, residual, step_norm) =
            self.newton(unconstrained, &phi, lower, upper, cfg)?;
        apply_v_constraints(&mut v, &u, conversion, &bounds.prices);
        Ok(InteriorStep {
            u,
            v,
            iterations,
            residual,
            step_norm,
        })
    }

    fn residual(
        &self,
        u: &[T],
        phi: &[T],
        lower: &[T],
        upper: &[T],
        rho_dt: T,
    ) -> (Vec<T>, Vec<T>) {
        let ind = update_indicators(u, lower, upper).expect("bounds sized to the interior");
        let zeta = penalty_deviation(u, lower, upper, &ind);
        let mut f = self.sys.a11.matvec(u);
        self.ops.mass.matvec_acc(rho_dt, &zeta, &mut f);
        for (fi, &p) in f.iter_mut().zip(phi) {
            *fi -= p;
        }
        (f, ind.combined())
    }

    fn newton(
        &self,
        mut u: Vec<T>,
        phi: &[T],
        lower: &[T],
        upper: &[T],
        cfg: &NewtonConfig<T>,
    ) -> Result<(Vec<T>, usize, T, T)> {
        let rho_dt = cfg.rho * self.sys.dtau;
        let mut step_norm = T::zero();
        for k in 0..cfg.max_iter {
            let (f, active) = self.residual(&u, phi, lower, upper, rho_dt);
            let res = norm_inf(&f);
            if res <= cfg.tol {
                return Ok((u, k, res, step_norm));
            }
            let mut jac: BandedMatrix<T> = self.sys.a11.clone();
            jac.add_scaled_columns(rho_dt, &self.ops.mass, &active);
            let delta = jac.solve(&f).map_err(|e| match e {
                Error::SingularSystem { row, .. } => Error::SingularSystem {
                    row,
                    step: None,
                    iteration: Some(k + 1),
                },
                other => other,
            })?;
            for (ui, di) in u.iter_mut().zip(&delta) {
                *ui -= *di;
            }
            step_norm = norm_inf(&delta);
            if step_norm <= cfg.tol {
                let (f, _) = self.residual(&u, phi, lower, upper, rho_dt);
                return Ok((u, k + 1, norm_inf(&f), step_norm));
            }
        }
        let (f, _) = self.residual(&u, phi, lower, upper, rho_dt);
        Err(Error::NewtonNonConvergence {
            step: None,
            iterations: cfg.max_iter,
            residual: norm_inf(&f).as_f64(),
            step_norm: step_norm.as_f64(),
        })
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics<T> {
    /// Index of the new time level.
    pub m: usize,
    pub tau: T,
    pub boundary_iterations: usize,
    pub interior_iterations: usize,
    pub interior_residual: T,
    pub interior_step_norm: T,
    /// `max_i max(0, u_i - u*_call,i)` over all nodes after Newton, before the coupon.
    pub call_violation: T,
    /// `max_i max(0, u*_put,i - u_i)` over all nodes after Newton, before the coupon.
    pub put_violation: T,
    pub coupon_paid: bool,
}

#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub final_state: SolutionState<T>,
    pub steps: Vec<StepDiagnostics<T>>,
    pub warnings: Vec<String>,
}

impl<T: Real> SolveReport<T> {
    pub fn max_interior_iterations(&self) -> usize {
        self.steps
            .iter()
            .map(|s| s.interior_iterations)
            .max()
            .unwrap_or(0)
    }

    pub fn max_call_violation(&self) -> T {
        self.steps
            .iter()
            .fold(T::zero(), |a, s| a.max(s.call_violation))
    }

    pub fn max_put_violation(&self) -> T {
        self.steps
            .iter()
            .fold(T::zero(), |a, s| a.max(s.put_violation))
    }
}

/// Solution values at every time level and node.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSurface<T> {
    /// Backward times `m Δτ`, `m = 0..=n_t`.
    pub taus: Vec<T>,
    /// Node coordinates in log-moneyness.
    pub x: Vec<T>,
    /// Stock prices `S_int e^x` at the nodes.
    pub s_values: Vec<T>,
    /// `u[m][i]`: bond value at level `m`, node `i`.
    pub u: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
    pub maturity: T,
}

impl<T: Real> PriceSurface<T> {
    /// Bond values today (`t = 0`, the last level).
    pub fn today(&self) -> &[T] {
        self.u.last().expect("surface has at least one level")
    }

    /// Forward time of level `m`.
    pub fn forward_time(&self, m: usize) -> T {
        self.maturity - self.taus[m]
    }
}

/// Time-marching settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings<T> {
    pub theta: T,
    pub n_t: usize,
    pub newton: NewtonConfig<T>,
}

/// Full constrained θ-scheme over a fixed spatial discretization.
pub struct PenaltyTfSolver<'a, T> {
    ops: &'a GlobalOperators<T>,
    nodes: &'a [T],
    contract: &'a BondContract<T>,
    market: &'a MarketParams<T>,
    settings: SolverSettings<T>,
    system: ThetaSystem<T>,
    warnings: Vec<String>,
}

impl<'a, T: Real> PenaltyTfSolver<'a, T> {
    pub fn new(
        ops: &'a GlobalOperators<T>,
        nodes: &'a [T],
        contract: &'a BondContract<T>,
        market: &'a MarketParams<T>,
        settings: SolverSettings<T>,
    ) -> Result<Self> {
        contract.validate()?;
        market.validate()?;
        settings.newton.validate()?;
        if nodes.len() != ops.dim() + 2 {
            return Err(Error::Dimension {
                expected: ops.dim() + 2,
                found: nodes.len(),
            });
        }
        if settings.n_t == 0 {
            return Err(Error::Config("n_t must be >= 1".into()));
        }
        let dtau = contract.maturity / T::from_count(settings.n_t);
        check_coupon_alignment(contract, settings.n_t)?;
        let system = build_theta_system(ops, market, settings.theta, dtau)?;
        let mut warnings = Vec::new();
        if let Some(w) = stability_warning(market, settings.theta, dtau, nodes[1] - nodes[0]) {
            warnings.push(w);
        }
        Ok(Self {
            ops,
            nodes,
            contract,
            market,
            settings,
            system,
            warnings,
        })
    }

    pub fn dtau(&self) -> T {
        self.system.dtau
    }

    pub fn theta_system(&self) -> &ThetaSystem<T> {
        &self.system
    }

    /// Marches from maturity to today, handing every level (including level 0) to
    /// `observer` together with its step diagnostics.
    pub fn run<F>(&self, mut observer: F) -> Result<SolveReport<T>>
    where
        F: FnMut(&SolutionState<T>, Option<&StepDiagnostics<T>>),
    {
        let contract = self.contract;
        let market = self.market;
        let cfg = &self.settings.newton;
        let n_t = self.settings.n_t;
        let last = self.nodes.len() - 1;
        let interior = InteriorSolver::new(self.ops, &self.system)?;

        let mut state = initial_state(self.nodes, contract, market);
        observer(&state, None);
        let mut steps = Vec::with_capacity(n_t);

        for m in 0..n_t {
            let level = m + 1;
            let tau = contract.maturity * T::from_count(level) / T::from_count(n_t);
            let bounds = penalty_bounds(self.nodes, contract, market, tau)?;

            let left = boundary_step(&state, &self.system, &bounds, market, cfg)
                .map_err(|e| e.at_step(level))?;

            let mut u_right = bounds.conversion[last]
                .max(bounds.lower[last])
                .min(bounds.upper[last]);
            if !u_right.is_finite() {
                u_right = bounds.conversion[last];
            }
            let mut v_right = [T::zero()];
            apply_v_constraints(
                &mut v_right,
                &[u_right],
                &[bounds.conversion[last]],
                &bounds.prices,
            );

            let boundary_new = BoundaryValues {
                u0: left.u0,
                v0: left.v0,
                u_np1: u_right,
                v_np1: v_right[0],
            };
            let zeta = |u: T, i: usize| {
                let ind = update_indicators(&[u], &[bounds.lower[i]], &[bounds.upper[i]])
                    .expect("scalar bounds");
                penalty_deviation(&[u], &[bounds.lower[i]], &[bounds.upper[i]], &ind)[0]
            };
            let boundary_penalty = (zeta(left.u0, 0), zeta(u_right, last));

            let step = interior
                .step(
                    &state,
                    &boundary_new,
                    &bounds,
                    boundary_penalty,
                    market,
                    cfg,
                )
                .map_err(|e| e.at_step(level))?;

            let mut next = SolutionState {
                m: level,
                tau,
                u: step.u,
                v: step.v,
                u0: boundary_new.u0,
                v0: boundary_new.v0,
                u_np1: boundary_new.u_np1,
                v_np1: boundary_new.v_np1,
            };

            let (mut call_violation, mut put_violation) = (T::zero(), T::zero());
            for (i, u) in next.u_nodal().into_iter().enumerate() {
                call_violation = call_violation.max(u - bounds.upper[i]);
                put_violation = put_violation.max(bounds.lower[i] - u);
            }
            let coupon_paid = coupon_bump(&mut next, contract, tau);

            if let Some(node) = next.first_non_finite() {
                return Err(Error::NonFinite { level, node });
            }
            let diag = StepDiagnostics {
                m: level,
                tau,
                boundary_iterations: left.iterations,
                interior_iterations: step.iterations,
                interior_residual: step.residual,
                interior_step_norm: step.step_norm,
                call_violation,
                put_violation,
                coupon_paid,
            };
            observer(&next, Some(&diag));
            steps.push(diag);
            state = next;
        }

        Ok(SolveReport {
            final_state: state,
            steps,
            warnings: self.warnings.clone(),
        })
    }

    /// Runs the solver and records every level.
    pub fn surface(&self) -> Result<(PriceSurface<T>, SolveReport<T>)> {
        let mut taus = Vec::with_capacity(self.settings.n_t + 1);
        let mut u = Vec::with_capacity(self.settings.n_t + 1);
        let mut v = Vec::with_capacity(self.settings.n_t + 1);
        let report = self.run(|s, _| {
            taus.push(s.tau);
            u.push(s.u_nodal());
            v.push(s.v_nodal());
        })?;
        let surface = PriceSurface {
            taus,
            x: self.nodes.to_vec(),
            s_values: self
                .nodes
                .iter()
                .map(|&x| self.market.stock_price(x))
                .collect(),
            u,
            v,
            maturity: self.contract.maturity,
        };
        Ok((surface, report))
    }
}

/// Every coupon date in `(0, T)` must fall on the time grid.
pub fn check_coupon_alignment<T: Real>(contract: &BondContract<T>, n_t: usize) -> Result<()> {
    let dtau = contract.maturity / T::from_count(n_t);
    for tau in contract.coupon_taus() {
        let steps = tau / dtau;
        if (steps - steps.round()).abs() > T::lit(1e-6) {
            return Err(Error::Config(format!(
                "n_t = {n_t} does not place coupon date t = {} on the time grid",
                contract.maturity - tau
            )));
        }
    }
    Ok(())
}

/// Explicit-scheme stability bound `Δτ <= min(h/|a|, h²/(2ε))`, only relevant for θ < 1/2.
pub fn stability_warning<T: Real>(
    market: &MarketParams<T>,
    theta: T,
    dtau: T,
    h: T,
) -> Option<String> {
    if theta >= T::lit(0.5) {
        return None;
    }
    let eps = market.sigma * market.sigma / T::lit(2.0);
    let a = (market.r - eps).abs();
    let conv = if a > T::zero() { h / a } else { T::infinity() };
    let limit = conv.min(h * h / (T::lit(2.0) * eps));
    (dtau > limit).then(|| {
        format!("time step {dtau} exceeds the explicit stability limit {limit} for theta = {theta}")
    })
}

/// Finite element solve on `mesh`, recording every level.
pub fn full_solve<T: Real>(
    mesh: &Mesh<T>,
    contract: &BondContract<T>,
    market: &MarketParams<T>,
    theta: T,
    n_t: usize,
    cfg: &NewtonConfig<T>,
) -> Result<PriceSurface<T>> {
    let ops = assemble(mesh)?;
    let solver = PenaltyTfSolver::new(
        &ops,
        &mesh.nodes,
        contract,
        market,
        SolverSettings {
            theta,
            n_t,
            newton: *cfg,
        },
    )?;
    Ok(solver.surface()?.0)
}
