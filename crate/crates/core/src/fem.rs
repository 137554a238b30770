//! Uniform 1-D meshes, P1/P2 Lagrange elements and global operator assembly.
//!
//! Global operators act on interior unknowns only. Contributions from the two boundary
//! nodes are folded into [`BoundaryCoupling`] vectors so that boundary values can be
//! supplied separately at every time level.
//!
//! Conventions (entry `(i, j)` = test function `i`, trial function `j`):
//! - mass `M_ij = ∫ ψ_i ψ_j`
//! - stiffness `S_ij = ∫ ψ_i' ψ_j'` (positive semidefinite)
//! - convection `N_ij = ∫ ψ_i' ψ_j` (derivative on the test function)

use std::fmt;
use std::str::FromStr;

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementOrder {
    P1,
    P2,
}

impl ElementOrder {
    /// Polynomial degree, which is also the number of nodes per element minus one.
    pub fn degree(self) -> usize {
        match self {
            ElementOrder::P1 => 1,
            ElementOrder::P2 => 2,
        }
    }
}

impl fmt::Display for ElementOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementOrder::P1 => "p1",
            ElementOrder::P2 => "p2",
        })
    }
}

impl FromStr for ElementOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "p1" | "1" => Ok(ElementOrder::P1),
            "p2" | "2" => Ok(ElementOrder::P2),
            other => Err(Error::Config(format!(
                "unknown element order `{other}` (expected p1 or p2)"
            ))),
        }
    }
}

/// Uniform partition of `[x_min, x_max]`. For P2 the element midpoints are nodes too.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    pub x_min: T,
    pub x_max: T,
    pub n_elements: usize,
    pub order: ElementOrder,
    /// Element width.
    pub h: T,
    pub nodes: Vec<T>,
}

pub fn build_mesh<T: Real>(
    x_min: T,
    x_max: T,
    n_elements: usize,
    order: ElementOrder,
) -> Result<Mesh<T>> {
    Mesh::new(x_min, x_max, n_elements, order)
}

impl<T: Real> Mesh<T> {
    pub fn new(x_min: T, x_max: T, n_elements: usize, order: ElementOrder) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() || !(x_min < x_max) {
            return Err(Error::Config(format!(
                "mesh bounds must be finite with x_min < x_max (got [{x_min}, {x_max}])"
            )));
        }
        if n_elements < 2 {
            return Err(Error::Config(format!(
                "need at least 2 elements (got {n_elements})"
            )));
        }
        let h = (x_max - x_min) / T::from_count(n_elements);
        let p = order.degree();
        let n_nodes = p * n_elements + 1;
        let nodes = (0..n_nodes)
            .map(|i| {
                if i + 1 == n_nodes {
                    x_max
                } else {
                    x_min + (x_max - x_min) * T::from_count(i) / T::from_count(n_nodes - 1)
                }
            })
            .collect();
        Ok(Self {
            x_min,
            x_max,
            n_elements,
            order,
            h,
            nodes,
        })
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Number of interior unknowns (`n_E - 1` for P1, `2 n_E - 1` for P2).
    #[inline]
    pub fn n_interior(&self) -> usize {
        self.nodes.len() - 2
    }

    /// Spacing between consecutive nodes.
    #[inline]
    pub fn node_spacing(&self) -> T {
        self.h / T::from_count(self.order.degree())
    }

    /// Global node indices of element `e`, left to right.
    pub fn element_nodes(&self, e: usize) -> Vec<usize> {
        let p = self.order.degree();
        (p * e..=p * e + p).collect()
    }

    pub fn interior_nodes(&self) -> &[T] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    /// Index of the node at `x`, if `x` is a node within round-off.
    pub fn node_index(&self, x: T) -> Option<usize> {
        let s = (x - self.x_min) / self.node_spacing();
        let k = s.round();
        if k < T::zero() || (s - k).abs() > T::lit(1e-9) {
            return None;
        }
        let k = k.to_usize()?;
        (k < self.n_nodes()).then_some(k)
    }

    /// Element containing `x` and the local coordinate `xi ∈ [0, 1]`.
    pub fn locate(&self, x: T) -> Result<(usize, T)> {
        let tol = self.h * T::lit(1e-12);
        if x.is_nan() || x < self.x_min - tol || x > self.x_max + tol {
            return Err(Error::Domain(format!(
                "x = {x} outside mesh [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        let s = ((x - self.x_min) / self.h).max(T::zero());
        let e = s.floor().to_usize().unwrap_or(0).min(self.n_elements - 1);
        let xi = (s - T::from_count(e)).max(T::zero()).min(T::one());
        Ok((e, xi))
    }
}

/// Lagrange basis values on the reference element at local coordinate `xi ∈ [0, 1]`.
pub fn basis_values<T: Real>(order: ElementOrder, xi: T) -> Vec<T> {
    let one = T::one();
    match order {
        ElementOrder::P1 => vec![one - xi, xi],
        ElementOrder::P2 => {
            let two = T::lit(2.0);
            let half = T::lit(0.5);
            vec![
                two * (xi - half) * (xi - one),
                T::lit(4.0) * xi * (one - xi),
                two * xi * (xi - half),
            ]
        }
    }
}

/// Basis derivatives with respect to `x` on an element of width `h`.
pub fn basis_derivatives<T: Real>(order: ElementOrder, xi: T, h: T) -> Vec<T> {
    let one = T::one();
    match order {
        ElementOrder::P1 => vec![-one / h, one / h],
        ElementOrder::P2 => {
            let four = T::lit(4.0);
            vec![
                (four * xi - T::lit(3.0)) / h,
                (four - T::lit(8.0) * xi) / h,
                (four * xi - one) / h,
            ]
        }
    }
}

/// Element mass, stiffness and convection matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrices<T> {
    pub mass: Vec<Vec<T>>,
    pub stiffness: Vec<Vec<T>>,
    pub convection: Vec<Vec<T>>,
}

fn scaled<T: Real, const N: usize>(c: T, rows: [[f64; N]; N]) -> Vec<Vec<T>> {
    rows.iter()
        .map(|r| r.iter().map(|&v| c * T::lit(v)).collect())
        .collect()
}

pub fn p1_element_matrices<T: Real>(h: T) -> Result<ElementMatrices<T>> {
    check_width(h)?;
    Ok(ElementMatrices {
        mass: scaled(h / T::lit(6.0), [[2.0, 1.0], [1.0, 2.0]]),
        stiffness: scaled(T::one() / h, [[1.0, -1.0], [-1.0, 1.0]]),
        convection: scaled(T::lit(0.5), [[-1.0, -1.0], [1.0, 1.0]]),
    })
}

pub fn p2_element_matrices<T: Real>(h: T) -> Result<ElementMatrices<T>> {
    check_width(h)?;
    Ok(ElementMatrices {
        mass: scaled(
            h / T::lit(30.0),
            [[4.0, 2.0, -1.0], [2.0, 16.0, 2.0], [-1.0, 2.0, 4.0]],
        ),
        stiffness: scaled(
            T::one() / (T::lit(3.0) * h),
            [[7.0, -8.0, 1.0], [-8.0, 16.0, -8.0], [1.0, -8.0, 7.0]],
        ),
        convection: scaled(
            T::one() / T::lit(6.0),
            [[-3.0, -4.0, 1.0], [4.0, 0.0, -4.0], [-1.0, 4.0, 3.0]],
        ),
    })
}

pub fn element_matrices<T: Real>(order: ElementOrder, h: T) -> Result<ElementMatrices<T>> {
    match order {
        ElementOrder::P1 => p1_element_matrices(h),
        ElementOrder::P2 => p2_element_matrices(h),
    }
}

fn check_width<T: Real>(h: T) -> Result<()> {
    if h > T::zero() && h.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "element width must be > 0 (got {h})"
        )))
    }
}

/// Columns of a global operator that multiply the boundary values, restricted to
/// interior rows. Stored sparsely as `(row, coefficient)` pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundaryCoupling<T> {
    pub left: Vec<(usize, T)>,
    pub right: Vec<(usize, T)>,
}

impl<T: Real> BoundaryCoupling<T> {
    pub fn empty() -> Self {
        Self {
            left: Vec::new(),
            right: Vec::new(),
        }
    }

    /// `out += alpha * (c_left * left + c_right * right)`
    pub fn apply(&self, alpha: T, left: T, right: T, out: &mut [T]) {
        for &(i, c) in &self.left {
            out[i] += alpha * c * left;
        }
        for &(i, c) in &self.right {
            out[i] += alpha * c * right;
        }
    }

    fn from_dense(left: Vec<T>, right: Vec<T>) -> Self {
        let sparse = |v: Vec<T>| {
            v.into_iter()
                .enumerate()
                .filter(|(_, c)| *c != T::zero())
                .collect()
        };
        Self {
            left: sparse(left),
            right: sparse(right),
        }
    }
}

/// Assembled spatial operators over interior unknowns plus their boundary columns.
///
/// Finite elements and the finite-difference reference both produce this shape, which
/// is all the time stepper needs.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalOperators<T> {
    pub mass: BandedMatrix<T>,
    pub stiffness: BandedMatrix<T>,
    pub convection: BandedMatrix<T>,
    pub mass_coupling: BoundaryCoupling<T>,
    pub stiffness_coupling: BoundaryCoupling<T>,
    pub convection_coupling: BoundaryCoupling<T>,
}

impl<T: Real> GlobalOperators<T> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.mass.dim()
    }
}

/// Overlap-add assembly of the element matrices over the interior test functions.
pub fn assemble<T: Real>(mesh: &Mesh<T>) -> Result<GlobalOperators<T>> {
    let local = element_matrices(mesh.order, mesh.h)?;
    let n = mesh.n_interior();
    let last = mesh.n_nodes() - 1;
    let bw = mesh.order.degree();
    let mut mats = [
        BandedMatrix::zeros(n, bw, bw),
        BandedMatrix::zeros(n, bw, bw),
        BandedMatrix::zeros(n, bw, bw),
    ];
    let mut left = [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]];
    let mut right = left.clone();
    let locals = [&local.mass, &local.stiffness, &local.convection];

    for e in 0..mesh.n_elements {
        let g = mesh.element_nodes(e);
        for (a, &ga) in g.iter().enumerate() {
            if ga == 0 || ga == last {
                continue;
            }
            let row = ga - 1;
            for (b, &gb) in g.iter().enumerate() {
                for k in 0..3 {
                    let v = locals[k][a][b];
                    if gb == 0 {
                        left[k][row] += v;
                    } else if gb == last {
                        right[k][row] += v;
                    } else {
                        mats[k].add(row, gb - 1, v);
                    }
                }
            }
        }
    }

    let [mass, stiffness, convection] = mats;
    let [lm, ls, lc] = left;
    let [rm, rs, rc] = right;
    Ok(GlobalOperators {
        mass,
        stiffness,
        convection,
        mass_coupling: BoundaryCoupling::from_dense(lm, rm),
        stiffness_coupling: BoundaryCoupling::from_dense(ls, rs),
        convection_coupling: BoundaryCoupling::from_dense(lc, rc),
    })
}

/// `[left, interior..., right]`
pub fn with_boundaries<T: Real>(left: T, interior: &[T], right: T) -> Vec<T> {
    let mut v = Vec::with_capacity(interior.len() + 2);
    v.push(left);
    v.extend_from_slice(interior);
    v.push(right);
    v
}

/// Evaluates the finite element function with the given nodal values at `x`.
pub fn interpolate_nodal<T: Real>(mesh: &Mesh<T>, nodal: &[T], x: T) -> Result<T> {
    if nodal.len() != mesh.n_nodes() {
        return Err(Error::Dimension {
            expected: mesh.n_nodes(),
            found: nodal.len(),
        });
    }
    let (e, xi) = mesh.locate(x)?;
    let phi = basis_values(mesh.order, xi);
    Ok(mesh
        .element_nodes(e)
        .into_iter()
        .zip(phi)
        .map(|(g, p)| nodal[g] * p)
        .sum())
}

/// Evaluates `sum u_i psi_i(x)` from interior coefficients and the two boundary values.
pub fn fe_interpolate<T: Real>(
    mesh: &Mesh<T>,
    interior: &[T],
    boundary: (T, T),
    x: T,
) -> Result<T> {
    if interior.len() != mesh.n_interior() {
        return Err(Error::Dimension {
            expected: mesh.n_interior(),
            found: interior.len(),
        });
    }
    interpolate_nodal(mesh, &with_boundaries(boundary.0, interior, boundary.1), x)
}
