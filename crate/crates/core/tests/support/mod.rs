//! Property checks shared by the proptest suite and the acceptance runner.

#![allow(clippy::needless_range_loop)]

use cbfem::banded::BandedMatrix;
use cbfem::contracts::ExercisePrices;
use cbfem::fem::{assemble, basis_derivatives, basis_values, element_matrices};
use cbfem::stepper::boundary_step;
use cbfem::tf_model::{
    apply_v_constraints, build_theta_system, coupon_bump, penalty_bounds, update_indicators,
    SolutionState,
};
use cbfem::{BondContract, ElementOrder, MarketParams, Mesh, NewtonConfig};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type Check = std::result::Result<(), TestCaseError>;

pub fn order() -> impl Strategy<Value = ElementOrder> {
    prop_oneof![Just(ElementOrder::P1), Just(ElementOrder::P2)]
}

/// Dense Gaussian elimination with partial pivoting, used as the reference solver.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

pub fn inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub fn partition_input() -> impl Strategy<Value = (ElementOrder, f64, f64)> {
    (order(), 0.0f64..=1.0, 1e-3f64..2.0)
}

pub fn check_partition_of_unity((order, xi, h): (ElementOrder, f64, f64)) -> Check {
    let s: f64 = basis_values(order, xi).iter().sum();
    prop_assert!((s - 1.0).abs() < 1e-14);
    let d: f64 = basis_derivatives(order, xi, h).iter().sum();
    prop_assert!(d.abs() < 1e-12 / h);
    Ok(())
}

pub fn kernel_input() -> impl Strategy<Value = (ElementOrder, usize, f64)> {
    (order(), 2usize..60, -50.0f64..50.0)
}

pub fn check_stiffness_kernel((order, n, c): (ElementOrder, usize, f64)) -> Check {
    let local = element_matrices(order, 0.37).unwrap();
    for row in &local.stiffness {
        prop_assert!(row.iter().sum::<f64>().abs() < 1e-12);
    }
    let mesh = Mesh::new(-1.5, 2.0, n, order).unwrap();
    let ops = assemble(&mesh).unwrap();
    let mut k1 = ops.stiffness.matvec(&vec![c; ops.dim()]);
    ops.stiffness_coupling.apply(1.0, c, c, &mut k1);
    prop_assert!(inf(&k1) < 1e-10 * (1.0 + c.abs()) * n as f64);
    Ok(())
}

/// Random strictly diagonally dominant banded systems, `n ≤ 200`.
pub fn banded_system() -> impl Strategy<Value = (BandedMatrix<f64>, Vec<f64>)> {
    (1usize..=200, 0usize..=3, 0usize..=3).prop_flat_map(|(n, kl, ku)| {
        let width = kl + ku + 1;
        (
            proptest::collection::vec(-1.0f64..1.0, n * width),
            proptest::collection::vec(-10.0f64..10.0, n),
        )
            .prop_map(move |(entries, b)| {
                let mut a = BandedMatrix::zeros(n, kl, ku);
                for i in 0..n {
                    let mut off = 0.0;
                    for (k, j) in (i.saturating_sub(kl)..=(i + ku).min(n - 1)).enumerate() {
                        if j != i {
                            let v = entries[i * width + k];
                            a.set(i, j, v);
                            off += v.abs();
                        }
                    }
                    let sign = if entries[i * width] >= 0.0 { 1.0 } else { -1.0 };
                    a.set(i, i, sign * (off + 0.5 + entries[i * width].abs()));
                }
                (a, b)
            })
    })
}

pub fn check_banded_solver((a, b): (BandedMatrix<f64>, Vec<f64>)) -> Check {
    let x = a.solve(&b).unwrap();
    let dense = dense_solve(a.to_dense(), b.clone());
    let ax = a.matvec(&x);
    let residual: Vec<f64> = ax.iter().zip(&b).map(|(p, q)| p - q).collect();
    let bnorm = inf(&b).max(f64::MIN_POSITIVE);
    prop_assert!(
        inf(&residual) <= 1e-12 * bnorm,
        "residual {}",
        inf(&residual)
    );
    let diff: Vec<f64> = x.iter().zip(&dense).map(|(p, q)| p - q).collect();
    prop_assert!(inf(&diff) <= 1e-12 * (1.0 + inf(&dense)));
    Ok(())
}

pub type VInput = (Vec<(f64, f64, f64)>, f64, f64, bool, bool);

pub fn v_input() -> impl Strategy<Value = VInput> {
    (
        proptest::collection::vec((0.0f64..200.0, 0.0f64..200.0, 0.0f64..200.0), 1..40),
        90.0f64..115.0,
        0.0f64..20.0,
        any::<bool>(),
        any::<bool>(),
    )
}

pub fn check_v_constraints_idempotent(
    (data, put, call_gap, put_active, call_active): VInput,
) -> Check {
    let prices = ExercisePrices {
        put,
        call: put + call_gap,
        put_active,
        call_active,
    };
    let mut v: Vec<f64> = data.iter().map(|d| d.0).collect();
    let u: Vec<f64> = data.iter().map(|d| d.1).collect();
    let ks: Vec<f64> = data.iter().map(|d| d.2).collect();
    apply_v_constraints(&mut v, &u, &ks, &prices);
    let once = v.clone();
    apply_v_constraints(&mut v, &u, &ks, &prices);
    prop_assert_eq!(once, v);
    Ok(())
}

pub fn indicator_input() -> impl Strategy<Value = (Vec<f64>, f64, f64)> {
    (
        proptest::collection::vec(50.0f64..150.0, 1..30),
        90.0f64..110.0,
        0.0f64..30.0,
    )
}

pub fn check_indicators((u, lo, gap): (Vec<f64>, f64, f64)) -> Check {
    let lower = vec![lo; u.len()];
    let upper = vec![lo + gap; u.len()];
    let a = update_indicators(&u, &lower, &upper).unwrap();
    let b = update_indicators(&u, &lower, &upper).unwrap();
    prop_assert_eq!(&a, &b);
    for (c, p) in a.call.iter().zip(&a.put) {
        prop_assert!(*c == 0.0 || *c == 1.0);
        prop_assert!(*p == 0.0 || *p == 1.0);
    }
    Ok(())
}

pub fn coupon_input() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, usize)> {
    (
        proptest::collection::vec(-200.0f64..200.0, 3..30),
        proptest::collection::vec(-200.0f64..200.0, 3..30),
        1usize..100,
    )
}

/// Benchmark contract on a 100-step grid: coupons fall on every tenth level.
pub fn check_coupon_bump((u, v, step): (Vec<f64>, Vec<f64>, usize)) -> Check {
    let contract = BondContract::<f64>::benchmark();
    let n = u.len().min(v.len());
    let base = SolutionState::from_nodal(0, 0.0, &u[..n], &v[..n]);
    let tau = 5.0 * step as f64 / 100.0;
    let mut bumped = base.clone();
    let paid = coupon_bump(&mut bumped, &contract, tau);
    let expect_paid = step % 10 == 0;
    prop_assert_eq!(paid, expect_paid);
    let k = if expect_paid {
        contract.coupon_amount
    } else {
        0.0
    };
    for (a, b) in bumped.u_nodal().iter().zip(base.u_nodal()) {
        prop_assert_eq!(*a, b + k);
    }
    for (a, b) in bumped.v_nodal().iter().zip(base.v_nodal()) {
        prop_assert_eq!(*a, b + k);
    }
    Ok(())
}

pub fn decay_input() -> impl Strategy<Value = (usize, f64, f64)> {
    (1usize..200, 1e-3f64..0.05, 1.0f64..200.0)
}

/// Left boundary `v₀` against `v₀ e^{-(r + r_c)τ}` over a span without coupons or exercise.
pub fn check_boundary_decay((n_steps, dtau, v0): (usize, f64, f64)) -> Check {
    let market = MarketParams::<f64>::benchmark();
    let contract = BondContract::<f64>::benchmark();
    let mesh = Mesh::new(-6.0, 2.0, 4, ElementOrder::P1).unwrap();
    let ops = assemble(&mesh).unwrap();
    let sys = build_theta_system(&ops, &market, 0.5, dtau).unwrap();
    let cfg = NewtonConfig::default();
    // τ ∈ (0, 0.5) is coupon free and outside both windows
    let span = (n_steps as f64 * dtau).min(0.49);
    let steps = (span / dtau) as usize;
    let mut state = SolutionState::from_nodal(0, 0.0, &[104.0, 104.0, 104.0], &[v0, v0, v0]);
    for m in 0..steps {
        let tau = (m + 1) as f64 * dtau;
        let bounds = penalty_bounds(&mesh.nodes, &contract, &market, tau).unwrap();
        let out = boundary_step(&state, &sys, &bounds, &market, &cfg).unwrap();
        state.u0 = out.u0;
        state.v0 = out.v0;
    }
    let exact = v0 * (-(market.r + market.r_c) * steps as f64 * dtau).exp();
    let c = v0 * (market.r + market.r_c).powi(3);
    prop_assert!((state.v0 - exact).abs() <= c * dtau * dtau + 1e-12 * v0);
    Ok(())
}
