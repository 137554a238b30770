//! Greeks recovered from finite element coefficients, error norms and observed
//! convergence orders.
//!
//! Greeks are per unit stock price: `Δ = U_x / S` and `Γ = U_xx / S²` with
//! `S = S_int e^x`. The Gamma formulas scale the second `x`-derivative only; the
//! `-U_x / S²` term of the full chain rule is deliberately not added.

use crate::contracts::MarketParams;
use crate::error::{Error, Result};
use crate::fem::{basis_values, ElementOrder, Mesh};
use crate::scalar::Real;

/// A Greek value at one stock price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreekPoint<T> {
    pub s: T,
    pub value: T,
}

fn check_nodal<T: Real>(mesh: &Mesh<T>, nodal: &[T]) -> Result<()> {
    if nodal.len() == mesh.n_nodes() {
        Ok(())
    } else {
        Err(Error::Dimension {
            expected: mesh.n_nodes(),
            found: nodal.len(),
        })
    }
}

fn check_element<T: Real>(mesh: &Mesh<T>, j: usize) -> Result<()> {
    if (1..=mesh.n_elements).contains(&j) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "element index {j} outside 1..={}",
            mesh.n_elements
        )))
    }
}

/// P1 Delta on element `j` (1-based, spanning `x_{j-1}..x_j`), at the element midpoint.
pub fn delta_p1<T: Real>(
    mesh: &Mesh<T>,
    market: &MarketParams<T>,
    nodal: &[T],
    j: usize,
) -> Result<GreekPoint<T>> {
    check_nodal(mesh, nodal)?;
    check_element(mesh, j)?;
    let x_mid = (mesh.nodes[j - 1] + mesh.nodes[j]) / T::lit(2.0);
    let s = market.stock_price(x_mid);
    Ok(GreekPoint {
        s,
        value: (nodal[j] - nodal[j - 1]) / (mesh.h * s),
    })
}

/// P1 Gamma at node `x_{j-1}` from the second difference over `x_{j-2}, x_{j-1}, x_j`.
pub fn gamma_p1<T: Real>(
    mesh: &Mesh<T>,
    market: &MarketParams<T>,
    nodal: &[T],
    j: usize,
) -> Result<GreekPoint<T>> {
    check_nodal(mesh, nodal)?;
    if j < 2 || j >= mesh.n_nodes() {
        return Err(Error::Domain(format!(
            "gamma index {j} outside 2..={}",
            mesh.n_nodes() - 1
        )));
    }
    let s = market.stock_price(mesh.nodes[j - 1]);
    let h = mesh.h;
    Ok(GreekPoint {
        s,
        value: (nodal[j] - T::lit(2.0) * nodal[j - 1] + nodal[j - 2]) / (h * h * s * s),
    })
}

/// P2 Delta and Gamma at the midpoint of element `j` (1-based).
pub fn delta_gamma_p2<T: Real>(
    mesh: &Mesh<T>,
    market: &MarketParams<T>,
    nodal: &[T],
    j: usize,
) -> Result<(GreekPoint<T>, GreekPoint<T>)> {
    check_nodal(mesh, nodal)?;
    check_element(mesh, j)?;
    if mesh.order != ElementOrder::P2 {
        return Err(Error::Domain("P2 Greeks need a P2 mesh".into()));
    }
    let (a, mid, b) = (2 * (j - 1), 2 * j - 1, 2 * j);
    let s = market.stock_price(mesh.nodes[mid]);
    let h = mesh.h;
    Ok((
        GreekPoint {
            s,
            value: (nodal[b] - nodal[a]) / (h * s),
        },
        GreekPoint {
            s,
            value: T::lit(4.0) * (nodal[b] - T::lit(2.0) * nodal[mid] + nodal[a]) / (h * h * s * s),
        },
    ))
}

/// Every Delta and Gamma the formulas of the mesh order define, ordered by `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct Greeks<T> {
    pub delta: Vec<GreekPoint<T>>,
    pub gamma: Vec<GreekPoint<T>>,
}

pub fn greeks<T: Real>(mesh: &Mesh<T>, market: &MarketParams<T>, nodal: &[T]) -> Result<Greeks<T>> {
    match mesh.order {
        ElementOrder::P1 => Ok(Greeks {
            delta: (1..=mesh.n_elements)
                .map(|j| delta_p1(mesh, market, nodal, j))
                .collect::<Result<_>>()?,
            gamma: (2..mesh.n_nodes())
                .map(|j| gamma_p1(mesh, market, nodal, j))
                .collect::<Result<_>>()?,
        }),
        ElementOrder::P2 => {
            let (delta, gamma) = (1..=mesh.n_elements)
                .map(|j| delta_gamma_p2(mesh, market, nodal, j))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip();
            Ok(Greeks { delta, gamma })
        }
    }
}

const GAUSS3_POINTS: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GAUSS3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Three-point Gauss rule on `[0, 1]`: `(xi, weight)` pairs.
pub fn gauss3_unit<T: Real>() -> [(T, T); 3] {
    let half = T::lit(0.5);
    std::array::from_fn(|q| {
        (
            half * (T::one() + T::lit(GAUSS3_POINTS[q])),
            half * T::lit(GAUSS3_WEIGHTS[q]),
        )
    })
}

/// `‖exact - u_h‖_{L²}` with `u_h` the finite element function of `nodal`, using the
/// three-point Gauss rule on every element.
pub fn error_l2<T, F>(mesh: &Mesh<T>, nodal: &[T], exact: F) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    check_nodal(mesh, nodal)?;
    let rule = gauss3_unit::<T>();
    let mut sum = T::zero();
    for e in 0..mesh.n_elements {
        let nodes = mesh.element_nodes(e);
        let x0 = mesh.nodes[nodes[0]];
        for &(xi, w) in &rule {
            let uh: T = basis_values(mesh.order, xi)
                .into_iter()
                .zip(&nodes)
                .map(|(p, &g)| p * nodal[g])
                .sum();
            let d = exact(x0 + xi * mesh.h) - uh;
            sum += w * mesh.h * d * d;
        }
    }
    Ok(sum.sqrt())
}

/// Maximum over time levels of per-level L² errors.
pub fn error_linf_l2<T: Real>(history: &[T]) -> Result<T> {
    if history.is_empty() {
        return Err(Error::Domain("empty error history".into()));
    }
    Ok(history.iter().fold(T::zero(), |a, &e| a.max(e)))
}

/// Least-squares slope of `ln(error)` against `ln(step)`.
pub fn convergence_order<T: Real>(errors: &[T], steps: &[T]) -> Result<T> {
    if errors.len() != steps.len() {
        return Err(Error::Dimension {
            expected: steps.len(),
            found: errors.len(),
        });
    }
    if errors.len() < 2 {
        return Err(Error::Domain(
            "need at least two (error, step) pairs".into(),
        ));
    }
    if errors.iter().chain(steps).any(|&v| !(v > T::zero())) {
        return Err(Error::Domain("errors and steps must be positive".into()));
    }
    let n = T::from_count(errors.len());
    let xs: Vec<T> = steps.iter().map(|s| s.ln()).collect();
    let ys: Vec<T> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == T::zero() {
        return Err(Error::Domain("steps must not all be equal".into()));
    }
    Ok(sxy / sxx)
}
