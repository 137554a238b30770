//! Manufactured-solution verification of the linear two-field scheme on
//! `x ∈ [0, 1]`, `τ ∈ [0, 1]`, without constraints or coupons.
//!
//! Exact fields: `U = S_int^{5/2} e^{5x/2} - F S_int^{1/2} e^{-rτ} e^{x/2}` and
//! `V = U + x²τ`. Dirichlet data come from the exact fields at both ends.

use crate::analytics::{convergence_order, error_l2, error_linf_l2, gauss3_unit};
use crate::contracts::MarketParams;
use crate::error::{Error, Result};
use crate::fem::{assemble, basis_values, with_boundaries, ElementOrder, Mesh};
use crate::scalar::Real;
use crate::stepper::boundary_vectors;
use crate::tf_model::build_theta_system;

/// Parameters of the manufactured problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsCase<T> {
    pub market: MarketParams<T>,
    pub face_value: T,
}

impl<T: Real> MmsCase<T> {
    /// `r = 0.05`, `r_c = 0.02`, `σ = 0.2`, `S_int = F = 100`.
    pub fn benchmark() -> Self {
        Self {
            market: MarketParams::benchmark(),
            face_value: T::lit(100.0),
        }
    }
}

/// Value, first and second `x`-derivative and `τ`-derivative of one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJet<T> {
    pub value: T,
    pub dx: T,
    pub dxx: T,
    pub dtau: T,
}

fn jets<T: Real>(x: T, tau: T, case: &MmsCase<T>) -> (FieldJet<T>, FieldJet<T>) {
    let m = &case.market;
    let a = m.s_int.powf(T::lit(2.5));
    let b = case.face_value * m.s_int.sqrt() * (-m.r * tau).exp();
    let (e5, e1) = ((T::lit(2.5) * x).exp(), (T::lit(0.5) * x).exp());
    let u = FieldJet {
        value: a * e5 - b * e1,
        dx: T::lit(2.5) * a * e5 - T::lit(0.5) * b * e1,
        dxx: T::lit(6.25) * a * e5 - T::lit(0.25) * b * e1,
        dtau: m.r * b * e1,
    };
    let v = FieldJet {
        value: u.value + x * x * tau,
        dx: u.dx + T::lit(2.0) * x * tau,
        dxx: u.dxx + T::lit(2.0) * tau,
        dtau: u.dtau + x * x,
    };
    (u, v)
}

/// Exact `(U, V)`.
pub fn mms_exact<T: Real>(x: T, tau: T, case: &MmsCase<T>) -> (T, T) {
    let (u, v) = jets(x, tau, case);
    (u.value, v.value)
}

/// Forcing `(f1, f2)` that makes the exact fields solve the two equations.
pub fn mms_forcing<T: Real>(x: T, tau: T, case: &MmsCase<T>) -> (T, T) {
    let m = &case.market;
    let half_var = m.sigma * m.sigma / T::lit(2.0);
    let drift = m.r - half_var;
    let (u, v) = jets(x, tau, case);
    let f1 = u.dtau - half_var * u.dxx - drift * u.dx + m.r * u.value + m.r_c * v.value;
    let f2 = v.dtau - half_var * v.dxx - drift * v.dx + (m.r + m.r_c) * v.value;
    (f1, f2)
}

/// How the forcing enters the discrete equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingMode {
    /// Galerkin load vector `∫ ψ_i f dx` (three-point Gauss per element).
    LoadVector,
    /// Nodal values `f(x_i)` added directly to the right-hand side.
    Nodal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsConfig<T> {
    pub theta: T,
    pub forcing: ForcingMode,
}

/// Backward Euler with the Galerkin load vector.
impl<T: Real> Default for MmsConfig<T> {
    fn default() -> Self {
        Self {
            theta: T::one(),
            forcing: ForcingMode::LoadVector,
        }
    }
}

/// Errors of one manufactured-solution run, measured on `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct MmsRecord<T> {
    pub order: ElementOrder,
    pub n_elements: usize,
    pub h: T,
    pub n_t: usize,
    pub dtau: T,
    /// `‖U(·, 1) - u^{n_t}‖_{L²}`
    pub l2: T,
    /// `max_m ‖U(·, mΔτ) - u^m‖_{L²}`, `m = 1..=n_t`
    pub linf_l2: T,
    pub history: Vec<T>,
}

fn forcing_vectors<T: Real>(
    mesh: &Mesh<T>,
    tau: T,
    case: &MmsCase<T>,
    mode: ForcingMode,
) -> (Vec<T>, Vec<T>) {
    let n = mesh.n_interior();
    let last = mesh.n_nodes() - 1;
    let mut f1 = vec![T::zero(); n];
    let mut f2 = vec![T::zero(); n];
    match mode {
        ForcingMode::Nodal => {
            for (i, &x) in mesh.interior_nodes().iter().enumerate() {
                (f1[i], f2[i]) = mms_forcing(x, tau, case);
            }
        }
        ForcingMode::LoadVector => {
            let rule = gauss3_unit::<T>();
            for e in 0..mesh.n_elements {
                let nodes = mesh.element_nodes(e);
                let x0 = mesh.nodes[nodes[0]];
                for &(xi, w) in &rule {
                    let (g1, g2) = mms_forcing(x0 + xi * mesh.h, tau, case);
                    for (p, &g) in basis_values(mesh.order, xi).into_iter().zip(&nodes) {
                        if g == 0 || g == last {
                            continue;
                        }
                        let scale = w * mesh.h * p;
                        f1[g - 1] += scale * g1;
                        f2[g - 1] += scale * g2;
                    }
                }
            }
        }
    }
    (f1, f2)
}

/// Runs the linear θ-scheme with forcing and Dirichlet data on `n_elements` elements up
/// to `τ = 1` with step `dtau`, which must divide 1.
pub fn mms_run<T: Real>(
    order: ElementOrder,
    n_elements: usize,
    dtau: T,
    case: &MmsCase<T>,
    cfg: &MmsConfig<T>,
) -> Result<MmsRecord<T>> {
    case.market.validate()?;
    if !(dtau > T::zero()) || dtau > T::one() {
        return Err(Error::Config(format!(
            "dtau must lie in (0, 1] (got {dtau})"
        )));
    }
    let steps = (T::one() / dtau).round();
    if (steps * dtau - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::Config(format!(
            "dtau = {dtau} does not divide [0, 1]"
        )));
    }
    let n_t = steps.to_usize().expect("positive step count");
    let mesh = Mesh::new(T::zero(), T::one(), n_elements, order)?;
    let ops = assemble(&mesh)?;
    let market = &case.market;
    let sys = build_theta_system(&ops, market, cfg.theta, dtau)?;
    let a11 = sys.a11.lu()?;
    let a22 = sys.a22.lu()?;
    let (theta, dt) = (sys.theta, sys.dtau);
    let (w_new, w_old) = (theta * dt, (T::one() - theta) * dt);
    let n = ops.dim();

    let boundary = |tau: T| {
        let (u0, v0) = mms_exact(T::zero(), tau, case);
        let (u1, v1) = mms_exact(T::one(), tau, case);
        ((u0, u1), (v0, v1))
    };
    let exact_u = |tau: T| move |x: T| mms_exact(x, tau, case).0;

    let mut u: Vec<T> = mesh
        .interior_nodes()
        .iter()
        .map(|&x| mms_exact(x, T::zero(), case).0)
        .collect();
    let mut v: Vec<T> = mesh
        .interior_nodes()
        .iter()
        .map(|&x| mms_exact(x, T::zero(), case).1)
        .collect();
    let mut history = Vec::with_capacity(n_t);
    let mut tau_old = T::zero();
    let mut forcing_old = forcing_vectors(&mesh, tau_old, case, cfg.forcing);

    for m in 0..n_t {
        let tau_new = T::from_count(m + 1) * dt;
        let (bu_old, bv_old) = boundary(tau_old);
        let (bu_new, bv_new) = boundary(tau_new);
        let old = boundary_vectors(&ops, market, bu_old, bv_old);
        let new = boundary_vectors(&ops, market, bu_new, bv_new);
        let forcing_new = forcing_vectors(&mesh, tau_new, case, cfg.forcing);
        // θΔτ f^{m+1} + (1-θ)Δτ f^m
        let load_u: Vec<T> = (0..n)
            .map(|i| w_new * forcing_new.0[i] + w_old * forcing_old.0[i])
            .collect();
        let load_v: Vec<T> = (0..n)
            .map(|i| w_new * forcing_new.1[i] + w_old * forcing_old.1[i])
            .collect();

        let mut rhs_v = sys.at22.matvec(&v);
        for i in 0..n {
            rhs_v[i] += -w_new * new.beta_v[i] - w_old * old.beta_v[i] + old.hat_v[i]
                - new.hat_v[i]
                + load_v[i];
        }
        let v_new = a22.solve(&rhs_v)?;

        let mut rhs_u = sys.at11.matvec(&u);
        sys.at12.matvec_acc(T::one(), &v, &mut rhs_u);
        sys.a12.matvec_acc(-T::one(), &v_new, &mut rhs_u);
        for i in 0..n {
            rhs_u[i] += -w_new * new.beta_u[i] - w_old * old.beta_u[i] + old.hat_u[i]
                - new.hat_u[i]
                + load_u[i];
        }
        u = a11.solve(&rhs_u)?;
        v = v_new;

        let nodal = with_boundaries(bu_new.0, &u, bu_new.1);
        if let Some(node) = nodal.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { level: m + 1, node });
        }
        history.push(error_l2(&mesh, &nodal, exact_u(tau_new))?);
        tau_old = tau_new;
        forcing_old = forcing_new;
    }

    Ok(MmsRecord {
        order,
        n_elements,
        h: mesh.h,
        n_t,
        dtau: dt,
        l2: *history.last().expect("at least one step"),
        linf_l2: error_linf_l2(&history)?,
        history,
    })
}

/// A sweep of runs plus the observed orders in both error measures.
#[derive(Debug, Clone, PartialEq)]
pub struct MmsSweep<T> {
    pub records: Vec<MmsRecord<T>>,
    pub order_l2: T,
    pub order_linf_l2: T,
}

impl<T: Real> MmsSweep<T> {
    /// Orders against `step(record)` (`h` or `Δτ`).
    pub fn from_records(
        records: Vec<MmsRecord<T>>,
        step: impl Fn(&MmsRecord<T>) -> T,
    ) -> Result<Self> {
        let steps: Vec<T> = records.iter().map(&step).collect();
        let l2: Vec<T> = records.iter().map(|r| r.l2).collect();
        let linf: Vec<T> = records.iter().map(|r| r.linf_l2).collect();
        Ok(Self {
            order_l2: convergence_order(&l2, &steps)?,
            order_linf_l2: convergence_order(&linf, &steps)?,
            records,
        })
    }
}

/// Fixed mesh, varying time step.
pub fn temporal_sweep<T: Real>(
    order: ElementOrder,
    n_elements: usize,
    dtaus: &[T],
    case: &MmsCase<T>,
    cfg: &MmsConfig<T>,
) -> Result<MmsSweep<T>> {
    let records = dtaus
        .iter()
        .map(|&dt| mms_run(order, n_elements, dt, case, cfg))
        .collect::<Result<Vec<_>>>()?;
    MmsSweep::from_records(records, |r| r.dtau)
}

/// Fixed time step, varying mesh.
pub fn spatial_sweep<T: Real>(
    order: ElementOrder,
    n_elements: &[usize],
    dtau: T,
    case: &MmsCase<T>,
    cfg: &MmsConfig<T>,
) -> Result<MmsSweep<T>> {
    let records = n_elements
        .iter()
        .map(|&n| mms_run(order, n, dtau, case, cfg))
        .collect::<Result<Vec<_>>>()?;
    MmsSweep::from_records(records, |r| r.h)
}
