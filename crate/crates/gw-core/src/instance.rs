//! A prepared problem instance: both clouds plus the precomputed pieces of
//! the low-rank objective.
//!
//! For clouds `X` (lx x n) and `Y` (ly x n) with squared-norm vectors `m_x`,
//! `m_y`, the squared-distance matrices satisfy
//! `C_x = m_x 1^T - 2 X^T X + 1 m_x^T` (and likewise for `C_y`), which makes
//! the quadratic assignment objective over doubly stochastic `G`
//!
//! ```text
//!   gw(G) = -|2 X G Y^T|_F^2 - <L, G> + c0 ,
//!   L     = 2 n m_x m_y^T - 4 m_x (1^T Y^T Y) - 4 (X^T X 1) m_y^T ,
//!   c0    = (<C_x, C_x> + <C_y, C_y>) / 2 - 2 (1^T m_x)(1^T m_y) .
//! ```
//!
//! Everything the solver needs about a coupling is therefore carried by the
//! small matrix `W = 2 X G Y^T` and the scalar `w = <L, G>`; the pair
//! `(w, vec(W))` is the coupling's image in the projected space.

use ndarray::{Array2, ArrayView2};

use crate::cloud::PointCloud;
use crate::coupling::{Coupling, Permutation};
use crate::error::{GwError, Result};
use crate::polytope::ProjPoint;

#[derive(Debug, Clone)]
pub struct GwInstance {
    x: PointCloud,
    y: PointCloud,
    /// The linear-term matrix `L` above.
    linear_term: Array2<f64>,
    /// The additive constant `c0` above.
    constant_term: f64,
    /// `<C_x, C_x>` and `<C_y, C_y>`, kept for scales and relative errors.
    cx_dot: f64,
    cy_dot: f64,
}

impl GwInstance {
    pub fn new(x: PointCloud, y: PointCloud) -> Result<Self> {
        if x.len() != y.len() {
            return Err(GwError::SizeMismatch(x.len(), y.len()));
        }
        let n = x.len();
        let sq_norms_x = x.squared_norms();
        let sq_norms_y = y.squared_norms();

        // t_x[i] = x_i . (X 1),  t_y[j] = y_j . (Y 1)
        let col_sum = |c: &PointCloud| -> Vec<f64> {
            let mut s = vec![0.0; c.dim()];
            for i in 0..c.len() {
                for (d, v) in c.point(i).iter().enumerate() {
                    s[d] += v;
                }
            }
            s
        };
        let dot_with = |c: &PointCloud, s: &[f64]| -> Vec<f64> {
            (0..c.len())
                .map(|i| c.point(i).iter().zip(s).map(|(a, b)| a * b).sum())
                .collect()
        };
        let t_x = dot_with(&x, &col_sum(&x));
        let t_y = dot_with(&y, &col_sum(&y));

        let mut linear_term = Array2::zeros((n, n));
        let two_n = 2.0 * n as f64;
        for i in 0..n {
            for j in 0..n {
                linear_term[[i, j]] = two_n * sq_norms_x[i] * sq_norms_y[j]
                    - 4.0 * sq_norms_x[i] * t_y[j]
                    - 4.0 * t_x[i] * sq_norms_y[j];
            }
        }

        let cx_dot = x.squared_distance_matrix().iter().map(|v| v * v).sum();
        let cy_dot = y.squared_distance_matrix().iter().map(|v| v * v).sum();
        let sum_mx: f64 = sq_norms_x.iter().sum();
        let sum_my: f64 = sq_norms_y.iter().sum();
        let constant_term = 0.5 * (cx_dot + cy_dot) - 2.0 * sum_mx * sum_my;

        Ok(GwInstance {
            x,
            y,
            linear_term,
            constant_term,
            cx_dot,
            cy_dot,
        })
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.x.len()
    }

    #[must_use]
    pub fn dim_x(&self) -> usize {
        self.x.dim()
    }

    #[must_use]
    pub fn dim_y(&self) -> usize {
        self.y.dim()
    }

    /// Dimension of the projected space: `lx * ly + 1`.
    #[must_use]
    pub fn proj_dim(&self) -> usize {
        self.dim_x() * self.dim_y() + 1
    }

    #[must_use]
    pub fn x(&self) -> &PointCloud {
        &self.x
    }

    #[must_use]
    pub fn y(&self) -> &PointCloud {
        &self.y
    }

    #[must_use]
    pub fn linear_term(&self) -> ArrayView2<'_, f64> {
        self.linear_term.view()
    }

    #[must_use]
    pub fn constant_term(&self) -> f64 {
        self.constant_term
    }

    #[must_use]
    pub fn cx_dot(&self) -> f64 {
        self.cx_dot
    }

    #[must_use]
    pub fn cy_dot(&self) -> f64 {
        self.cy_dot
    }

    /// A characteristic magnitude of objective values, used to scale
    /// absolute tolerances.
    #[must_use]
    pub fn objective_scale(&self) -> f64 {
        1.0 + 0.5 * (self.cx_dot + self.cy_dot)
    }

    // ---- objective evaluation -----------------------------------------

    /// Direct quadratic-form value for a permutation:
    /// `(1/2) sum_ij (Cx[i,j] - Cy[s(i),s(j)])^2`. Rebuilds the distance
    /// matrices; intended for validation, not inner loops.
    pub fn gw_value_quadratic_perm(&self, perm: &Permutation) -> Result<f64> {
        self.check_n(perm.len())?;
        let cx = self.x.squared_distance_matrix();
        let cy = self.y.squared_distance_matrix();
        let s = perm.as_slice();
        let n = self.n();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = cx[[i, j]] - cy[[s[i], s[j]]];
                acc += d * d;
            }
        }
        Ok(0.5 * acc)
    }

    /// Quadratic-form value for a doubly stochastic coupling, evaluated as
    /// `(<Cx,Cx> + <Cy,Cy>)/2 - <Cx G, G Cy>` (valid because both marginals
    /// of a [`Coupling`] are the all-ones vector).
    pub fn gw_value_quadratic(&self, plan: &Coupling) -> Result<f64> {
        self.check_n(plan.n())?;
        let cx = self.x.squared_distance_matrix();
        let cy = self.y.squared_distance_matrix();
        let a = cx.dot(&plan.plan());
        let b = plan.plan().dot(&cy);
        let cross: f64 = a.iter().zip(b.iter()).map(|(u, v)| u * v).sum();
        Ok(0.5 * (self.cx_dot + self.cy_dot) - cross)
    }

    /// Low-rank value `-|W|^2 - <L, G> + c0` for a permutation.
    pub fn gw_value_lowrank_perm(&self, perm: &Permutation) -> Result<f64> {
        self.check_n(perm.len())?;
        let w = self.w_matrix_perm(perm);
        let lin = self.linear_dot_perm(perm);
        Ok(self.lowrank_from_parts(&w, lin))
    }

    /// Low-rank value for a doubly stochastic coupling.
    pub fn gw_value_lowrank(&self, plan: &Coupling) -> Result<f64> {
        self.check_n(plan.n())?;
        let w = self.w_matrix(plan);
        let lin: f64 = self
            .linear_term
            .iter()
            .zip(plan.plan().iter())
            .map(|(a, b)| a * b)
            .sum();
        Ok(self.lowrank_from_parts(&w, lin))
    }

    /// Absolute residual between the quadratic-form and low-rank evaluations
    /// on the same coupling; near zero when the reformulation is consistent.
    pub fn verify_identity(&self, plan: &Coupling) -> Result<f64> {
        Ok((self.gw_value_quadratic(plan)? - self.gw_value_lowrank(plan)?).abs())
    }

    fn lowrank_from_parts(&self, w: &Array2<f64>, lin: f64) -> f64 {
        let wnorm2: f64 = w.iter().map(|v| v * v).sum();
        -wnorm2 - lin + self.constant_term
    }

    // ---- projected-space geometry ---------------------------------------

    /// `W = 2 X G Y^T` for a permutation.
    #[must_use]
    pub fn w_matrix_perm(&self, perm: &Permutation) -> Array2<f64> {
        let (lx, ly) = (self.dim_x(), self.dim_y());
        let mut w = Array2::zeros((lx, ly));
        for (i, &j) in perm.as_slice().iter().enumerate() {
            let xi = self.x.point(i);
            let yj = self.y.point(j);
            for a in 0..lx {
                for b in 0..ly {
                    w[[a, b]] += 2.0 * xi[a] * yj[b];
                }
            }
        }
        w
    }

    /// `W = 2 X G Y^T` for a dense coupling.
    #[must_use]
    pub fn w_matrix(&self, plan: &Coupling) -> Array2<f64> {
        let gyt = plan.plan().dot(&self.y.coords().t());
        let mut w = self.x.coords().dot(&gyt);
        w.mapv_inplace(|v| 2.0 * v);
        w
    }

    /// `<L, G>` for a permutation.
    #[must_use]
    pub fn linear_dot_perm(&self, perm: &Permutation) -> f64 {
        perm.as_slice()
            .iter()
            .enumerate()
            .map(|(i, &j)| self.linear_term[[i, j]])
            .sum()
    }

    /// Image of a permutation in the projected space.
    pub fn image_point_perm(&self, perm: &Permutation) -> Result<ProjPoint> {
        self.check_n(perm.len())?;
        Ok(ProjPoint {
            w: self.linear_dot_perm(perm),
            wmat: self.w_matrix_perm(perm),
        })
    }

    /// Image of a dense coupling in the projected space.
    pub fn image_point(&self, plan: &Coupling) -> Result<ProjPoint> {
        self.check_n(plan.n())?;
        let lin: f64 = self
            .linear_term
            .iter()
            .zip(plan.plan().iter())
            .map(|(a, b)| a * b)
            .sum();
        Ok(ProjPoint {
            w: lin,
            wmat: self.w_matrix(plan),
        })
    }

    /// The concave projected objective `f(w, W) = -|W|^2 - w + c0`; for image
    /// points it reproduces the low-rank objective value.
    #[must_use]
    pub fn projected_objective(&self, point: &ProjPoint) -> f64 {
        let wnorm2: f64 = point.wmat.iter().map(|v| v * v).sum();
        -wnorm2 - point.w + self.constant_term
    }

    /// Same objective evaluated on a packed vertex `(w, vec(W))`.
    #[must_use]
    pub fn projected_objective_packed(&self, v: &[f64]) -> f64 {
        let wnorm2: f64 = v[1..].iter().map(|z| z * z).sum();
        -wnorm2 - v[0] + self.constant_term
    }

    /// Assignment cost matrix `4 X^T W Y + L` that linearizes the quadratic
    /// term at `W`: for any coupling `G`,
    /// `<2W, 2 X G Y^T> + <L, G> = <4 X^T W Y + L, G>`. Used both to price
    /// cutting planes and as the conditional-gradient step of local search.
    #[must_use]
    pub fn linearized_cost(&self, w: ArrayView2<'_, f64>) -> Array2<f64> {
        let xw = self.x.coords().t().dot(&w); // n x ly
        let mut m = xw.dot(&self.y.coords()); // n x n
        m.mapv_inplace(|v| 4.0 * v);
        m += &self.linear_term;
        m
    }

    /// Coefficient matrix `A_k` of projected coordinate `k` as a linear
    /// functional `<A_k, G>` on couplings: `k = 0` is the `w` coordinate
    /// (`A_0 = L`), `k = 1 + a*ly + b` is entry `(a, b)` of `W`
    /// (`A_k[i,j] = 2 X[a,i] Y[b,j]`).
    #[must_use]
    pub fn coordinate_cost(&self, k: usize) -> Array2<f64> {
        assert!(k < self.proj_dim(), "coordinate {k} out of range");
        if k == 0 {
            return self.linear_term.clone();
        }
        let (a, b) = ((k - 1) / self.dim_y(), (k - 1) % self.dim_y());
        let n = self.n();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] = 2.0 * self.x.coords()[[a, i]] * self.y.coords()[[b, j]];
            }
        }
        m
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n != self.n() {
            return Err(GwError::SizeMismatch(n, self.n()));
        }
        Ok(())
    }
}
