//! Periodic slab grid and its discrete operators.
//!
//! The domain is `[0, Lx) × [0, Ly]`, periodic in `x`. Nodes sit at
//! `(i·hx, j·hy)` with `hx = Lx/nx` and `hy = Ly/(ny − 1)`, so the rows
//! `j = 0` and `j = ny − 1` are the two boundary lines `Γ⁰` and `Γ¹` and the
//! boundary field is literally the trace of the bulk field. Quadrature is
//! uniform in `x` and trapezoidal in `y`; boundary quadrature uses weight `hx`.
//!
//! With the gradient form
//!
//! ```text
//! a(z, v) = Σ hx·wy_j·Dx⁺z·Dx⁺v + Σ hx·hy·Dy⁺z·Dy⁺v
//! ```
//!
//! the operators satisfy the summation-by-parts identity
//!
//! ```text
//! Σ_Ω w·(Δ_h z)·v = −a(z, v) + Σ_Γ hx·(∂_ν z)·v
//! ```
//!
//! exactly, where `Δ_h` is [`SlabGrid::laplacian`]: the mirror-closed
//! [`SlabGrid::laplacian_neumann`] plus the lift `(2/hy)·∂_ν z` on boundary
//! rows.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::linalg::{conjugate_gradient, CgStats};
use crate::math;
use crate::{Error, Result};

/// Relative tolerance of the conjugate-gradient solves.
pub const CG_TOL: f64 = 1e-10;
/// Mean that an input to [`SlabGrid::inverse_neumann`] may carry.
pub const MEAN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabGrid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    hx: f64,
    hy: f64,
}

/// Nodal values, row-major with `y` outer: index `j·nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

/// Values on the two boundary lines.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    /// `y = 0`
    pub bottom: Vec<f64>,
    /// `y = Ly`
    pub top: Vec<f64>,
}

impl SlabGrid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidParameter(alloc::format!("grid {nx}x{ny} needs at least 4 nodes per direction")));
        }
        if !(lx > 0.0 && ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("lengths {lx}, {ly} must be positive")));
        }
        Ok(SlabGrid { nx, ny, lx, ly, hx: lx / nx as f64, hy: ly / (ny - 1) as f64 })
    }

    /// Unit square.
    pub fn unit(nx: usize, ny: usize) -> Result<Self> {
        Self::new(nx, ny, 1.0, 1.0)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn hx(&self) -> f64 {
        self.hx
    }
    pub fn hy(&self) -> f64 {
        self.hy
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx
    }
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy
    }
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
    #[inline]
    pub fn east(&self, i: usize) -> usize {
        if i + 1 == self.nx {
            0
        } else {
            i + 1
        }
    }
    #[inline]
    pub fn west(&self, i: usize) -> usize {
        if i == 0 {
            self.nx - 1
        } else {
            i - 1
        }
    }
    pub fn is_boundary_row(&self, j: usize) -> bool {
        j == 0 || j + 1 == self.ny
    }

    /// `|Ω|`
    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    /// `|Γ|`, both lines together.
    pub fn boundary_length(&self) -> f64 {
        2.0 * self.lx
    }

    /// Trapezoidal `y`-weight of row `j`.
    #[inline]
    pub fn row_weight(&self, j: usize) -> f64 {
        if self.is_boundary_row(j) {
            0.5 * self.hy
        } else {
            self.hy
        }
    }

    /// Quadrature weight of node `(i, j)`.
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        self.hx * self.row_weight(j)
    }

    pub fn zeros(&self) -> Field {
        Field { nx: self.nx, ny: self.ny, values: vec![0.0; self.len()] }
    }

    pub fn constant(&self, c: f64) -> Field {
        Field { nx: self.nx, ny: self.ny, values: vec![c; self.len()] }
    }

    pub fn field_from_fn(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        let mut z = self.zeros();
        for j in 0..self.ny {
            for i in 0..self.nx {
                z.values[j * self.nx + i] = f(self.x(i), self.y(j));
            }
        }
        z
    }

    pub fn field_from_vec(&self, values: Vec<f64>) -> Result<Field> {
        if values.len() != self.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "field has {} values, grid needs {}",
                values.len(),
                self.len()
            )));
        }
        Ok(Field { nx: self.nx, ny: self.ny, values })
    }

    pub fn boundary_zeros(&self) -> BoundaryField {
        BoundaryField { bottom: vec![0.0; self.nx], top: vec![0.0; self.nx] }
    }

    pub fn boundary_constant(&self, c: f64) -> BoundaryField {
        BoundaryField { bottom: vec![c; self.nx], top: vec![c; self.nx] }
    }

    pub fn boundary_from_fn(&self, f: impl Fn(f64, f64) -> f64) -> BoundaryField {
        BoundaryField {
            bottom: (0..self.nx).map(|i| f(self.x(i), 0.0)).collect(),
            top: (0..self.nx).map(|i| f(self.x(i), self.ly)).collect(),
        }
    }

    /// Boundary rows of `z`.
    pub fn trace(&self, z: &Field) -> BoundaryField {
        let top = (self.ny - 1) * self.nx;
        BoundaryField { bottom: z.values[..self.nx].to_vec(), top: z.values[top..].to_vec() }
    }

    /// `Σ w·z`
    pub fn integrate(&self, z: &Field) -> f64 {
        let mut s = 0.0;
        for j in 0..self.ny {
            let row: f64 = z.row(j).iter().sum();
            s += self.weight(j) * row;
        }
        s
    }

    /// Mean value `m(z) = (1/|Ω|)∫z`.
    pub fn mean(&self, z: &Field) -> f64 {
        self.integrate(z) / self.area()
    }

    /// `(z, v)_H`
    pub fn inner(&self, z: &Field, v: &Field) -> f64 {
        let mut s = 0.0;
        for j in 0..self.ny {
            let row: f64 = z.row(j).iter().zip(v.row(j)).map(|(a, b)| a * b).sum();
            s += self.weight(j) * row;
        }
        s
    }

    /// Gradient form `a(z, v)`, the discrete `∫∇z·∇v`.
    pub fn dirichlet_form(&self, z: &Field, v: &Field) -> f64 {
        let (nx, ny, hx, hy) = (self.nx, self.ny, self.hx, self.hy);
        let mut sx = 0.0;
        for j in 0..ny {
            let (zr, vr) = (z.row(j), v.row(j));
            let mut row = 0.0;
            for i in 0..nx {
                let e = self.east(i);
                row += (zr[e] - zr[i]) * (vr[e] - vr[i]);
            }
            sx += self.row_weight(j) * row;
        }
        let mut sy = 0.0;
        for j in 0..ny - 1 {
            let (z0, z1, v0, v1) = (z.row(j), z.row(j + 1), v.row(j), v.row(j + 1));
            for i in 0..nx {
                sy += (z1[i] - z0[i]) * (v1[i] - v0[i]);
            }
        }
        sx / hx + sy * hx / hy
    }

    pub fn l2_bulk(&self, z: &Field) -> f64 {
        math::sqrt(self.inner(z, z))
    }

    pub fn h1_seminorm(&self, z: &Field) -> f64 {
        math::sqrt(self.dirichlet_form(z, z).max(0.0))
    }

    pub fn h1_norm(&self, z: &Field) -> f64 {
        math::sqrt(self.inner(z, z) + self.dirichlet_form(z, z).max(0.0))
    }

    /// Five-point Laplacian closed by mirroring across the boundary lines,
    /// i.e. with homogeneous Neumann data. `Σ w·Δz = 0` for every `z`.
    pub fn laplacian_neumann(&self, z: &Field) -> Field {
        let mut out = self.zeros();
        self.laplacian_neumann_into(z, &mut out);
        out
    }

    pub(crate) fn laplacian_neumann_into(&self, z: &Field, out: &mut Field) {
        let (nx, ny) = (self.nx, self.ny);
        let (cx, cy) = (1.0 / (self.hx * self.hx), 1.0 / (self.hy * self.hy));
        for j in 0..ny {
            let (below, above) = if j == 0 {
                (1, 1)
            } else if j + 1 == ny {
                (ny - 2, ny - 2)
            } else {
                (j - 1, j + 1)
            };
            for i in 0..nx {
                let c = z.values[j * nx + i];
                let xx = z.values[j * nx + self.east(i)] - 2.0 * c + z.values[j * nx + self.west(i)];
                let yy = z.values[above * nx + i] - 2.0 * c + z.values[below * nx + i];
                out.values[j * nx + i] = cx * xx + cy * yy;
            }
        }
    }

    /// Outward normal derivative on both lines from the second-order one-sided
    /// difference `(3z₀ − 4z₁ + z₂)/(2hy)` (mirrored on the top line).
    pub fn normal_derivative(&self, z: &Field) -> BoundaryField {
        let (nx, ny, hy) = (self.nx, self.ny, self.hy);
        let r = |j: usize| z.row(j);
        let (z0, z1, z2) = (r(0), r(1), r(2));
        let (t0, t1, t2) = (r(ny - 1), r(ny - 2), r(ny - 3));
        BoundaryField {
            bottom: (0..nx).map(|i| (3.0 * z0[i] - 4.0 * z1[i] + z2[i]) / (2.0 * hy)).collect(),
            top: (0..nx).map(|i| (3.0 * t0[i] - 4.0 * t1[i] + t2[i]) / (2.0 * hy)).collect(),
        }
    }

    /// Laplacian whose boundary rows carry the normal derivative, so that the
    /// discrete Green identity holds: `laplacian_neumann(z) + (2/hy)·∂_ν z` on
    /// `Γ`. On boundary rows this is the one-sided second difference in `y`.
    pub fn laplacian(&self, z: &Field) -> Field {
        let mut out = self.laplacian_neumann(z);
        let dn = self.normal_derivative(z);
        self.add_boundary_lift(&mut out, &dn, 2.0 / self.hy);
        out
    }

    /// Adds `scale·b` onto the boundary rows of `z`.
    pub fn add_boundary_lift(&self, z: &mut Field, b: &BoundaryField, scale: f64) {
        let top = (self.ny - 1) * self.nx;
        for i in 0..self.nx {
            z.values[i] += scale * b.bottom[i];
            z.values[top + i] += scale * b.top[i];
        }
    }

    /// Laplace–Beltrami operator on `Γ`: the periodic second difference along
    /// each line.
    pub fn laplace_beltrami(&self, b: &BoundaryField) -> BoundaryField {
        let c = 1.0 / (self.hx * self.hx);
        let line = |v: &[f64]| -> Vec<f64> {
            (0..self.nx).map(|i| c * (v[self.east(i)] - 2.0 * v[i] + v[self.west(i)])).collect()
        };
        BoundaryField { bottom: line(&b.bottom), top: line(&b.top) }
    }

    /// `Σ_Γ hx·b`
    pub fn integrate_boundary(&self, b: &BoundaryField) -> f64 {
        self.hx * (b.bottom.iter().sum::<f64>() + b.top.iter().sum::<f64>())
    }

    pub fn inner_boundary(&self, a: &BoundaryField, b: &BoundaryField) -> f64 {
        let s: f64 = a.bottom.iter().zip(&b.bottom).map(|(x, y)| x * y).sum::<f64>()
            + a.top.iter().zip(&b.top).map(|(x, y)| x * y).sum::<f64>();
        self.hx * s
    }

    pub fn l2_boundary(&self, b: &BoundaryField) -> f64 {
        math::sqrt(self.inner_boundary(b, b))
    }

    /// Discrete `|∇_Γ b|_{H_Γ}`.
    pub fn h1_boundary_seminorm(&self, b: &BoundaryField) -> f64 {
        let line = |v: &[f64]| -> f64 {
            (0..self.nx).map(|i| {
                let d = v[self.east(i)] - v[i];
                d * d
            })
            .sum()
        };
        math::sqrt((line(&b.bottom) + line(&b.top)) / self.hx)
    }

    pub fn h1_boundary_norm(&self, b: &BoundaryField) -> f64 {
        let s = self.h1_boundary_seminorm(b);
        math::sqrt(self.inner_boundary(b, b) + s * s)
    }

    /// Inverse of `−Δ` on mean-free fields with homogeneous Neumann data: the
    /// returned `w` has zero mean and `laplacian_neumann(w) = −z`.
    pub fn inverse_neumann(&self, z: &Field) -> Result<Field> {
        self.inverse_neumann_with_stats(z).map(|(w, _)| w)
    }

    pub fn inverse_neumann_with_stats(&self, z: &Field) -> Result<(Field, CgStats)> {
        let m = self.mean(z);
        let scale = 1.0 + self.l2_bulk(z) / math::sqrt(self.area());
        if m.abs() > MEAN_TOL * scale {
            return Err(Error::Mean { mean: m, tol: MEAN_TOL * scale });
        }
        // W·(−Δ) is the symmetric stiffness matrix; right-hand side W·z
        let (nx, ny) = (self.nx, self.ny);
        let mut rhs = z.values.clone();
        for j in 0..ny {
            let w = self.weight(j);
            for v in &mut rhs[j * nx..(j + 1) * nx] {
                *v *= w;
            }
        }
        let apply = |x: &[f64], y: &mut [f64]| {
            let xf = Field { nx, ny, values: x.to_vec() };
            let mut lf = self.zeros();
            self.laplacian_neumann_into(&xf, &mut lf);
            for j in 0..ny {
                let w = self.weight(j);
                for i in 0..nx {
                    y[j * nx + i] = -w * lf.values[j * nx + i];
                }
            }
        };
        let project = |x: &mut [f64]| {
            let f = Field { nx, ny, values: x.to_vec() };
            let m = self.mean(&f);
            for v in x.iter_mut() {
                *v -= m;
            }
        };
        let (x, stats) = conjugate_gradient(apply, &rhs, CG_TOL, 20 * self.len(), project)?;
        Ok((Field { nx, ny, values: x }, stats))
    }

    /// `|z|_{V₀*} = |∇N z|_H` for mean-free `z`.
    pub fn vstar_norm(&self, z: &Field) -> Result<f64> {
        let w = self.inverse_neumann(z)?;
        // (z, Nz)_H = a(Nz, Nz) up to the solver tolerance; the quadrature form
        // is the one that stays nonnegative
        Ok(self.h1_seminorm(&w))
    }

    /// Dual norm of `b` against the full `H¹(Γ)` norm: `(b, (I − Δ_Γ)⁻¹ b)^{1/2}`.
    pub fn vstar_boundary_norm(&self, b: &BoundaryField) -> Result<f64> {
        let nx = self.nx;
        let c = 1.0 / (self.hx * self.hx);
        let mut total = 0.0;
        for line in [&b.bottom, &b.top] {
            let apply = |x: &[f64], y: &mut [f64]| {
                for i in 0..nx {
                    y[i] = x[i] - c * (x[self.east(i)] - 2.0 * x[i] + x[self.west(i)]);
                }
            };
            let (w, _) = conjugate_gradient(apply, line, CG_TOL, 10 * nx + 10, |_| {})?;
            total += self.hx * line.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        }
        Ok(math::sqrt(total.max(0.0)))
    }

    /// Discrete Fourier symbol of `−∂²_x` for the mode `cos(2πk x/Lx)`.
    pub fn symbol_x(&self, k: usize) -> f64 {
        let theta = 2.0 * core::f64::consts::PI * k as f64 * self.hx / self.lx;
        (2.0 - 2.0 * math::cos(theta)) / (self.hx * self.hx)
    }
}

impl Field {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.nx..(j + 1) * self.nx]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { nx: self.nx, ny: self.ny, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// `self − other`
    pub fn sub(&self, other: &Field) -> Field {
        debug_assert_eq!(self.values.len(), other.values.len());
        Field {
            nx: self.nx,
            ny: self.ny,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self + a·other`
    pub fn axpy(&mut self, a: f64, other: &Field) {
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    pub fn add_constant(&mut self, c: f64) {
        for v in &mut self.values {
            *v += c;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl Index<usize> for Field {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.values[k]
    }
}

impl IndexMut<usize> for Field {
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.values[k]
    }
}

impl BoundaryField {
    pub fn map(&self, f: impl Fn(f64) -> f64) -> BoundaryField {
        BoundaryField {
            bottom: self.bottom.iter().map(|&v| f(v)).collect(),
            top: self.top.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn sub(&self, other: &BoundaryField) -> BoundaryField {
        BoundaryField {
            bottom: self.bottom.iter().zip(&other.bottom).map(|(a, b)| a - b).collect(),
            top: self.top.iter().zip(&other.top).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.bottom.iter().chain(self.top.iter())
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
