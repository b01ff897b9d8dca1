//! Local quadratic expansion of image intensity.
//!
//! Around every pixel the neighborhood is modelled as
//! `I(x + d) ≈ dᵀ A d + bᵀ d + c`, fitted by weighted least squares with a
//! Gaussian applicability over a square window. Because the basis and the
//! weights are the same at every pixel, the fit reduces to six fixed
//! correlation kernels computed once per `(poly_n, poly_sigma)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::plane::Plane;

/// Basis order used by the kernels: `1, x, y, x², y², xy`.
const BASIS_LEN: usize = 6;

#[inline]
fn basis(dx: f64, dy: f64) -> [f64; BASIS_LEN] {
    [1.0, dx, dy, dx * dx, dy * dy, dx * dy]
}

/// Per-pixel quadratic model over one image.
///
/// Stored as planes: `a11, a12, a22` (symmetric `A`), `b1, b2`, `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs {
    pub a11: Plane,
    pub a12: Plane,
    pub a22: Plane,
    pub b1: Plane,
    pub b2: Plane,
    pub c: Plane,
}

impl PolyCoeffs {
    pub fn width(&self) -> usize {
        self.c.width()
    }

    pub fn height(&self) -> usize {
        self.c.height()
    }

    /// `(A, b, c)` at one pixel.
    pub fn at(&self, x: usize, y: usize) -> ([[f64; 2]; 2], [f64; 2], f64) {
        let a12 = self.a12.get(x, y);
        (
            [[self.a11.get(x, y), a12], [a12, self.a22.get(x, y)]],
            [self.b1.get(x, y), self.b2.get(x, y)],
            self.c.get(x, y),
        )
    }
}

/// Precomputed least-squares filters for one window size and applicability.
#[derive(Debug, Clone)]
pub struct ExpansionKernels {
    radius: usize,
    /// `BASIS_LEN` kernels, each `(2r+1)²` taps in row-major window order.
    taps: Vec<[f64; BASIS_LEN]>,
}

impl ExpansionKernels {
    pub fn new(poly_n: usize, poly_sigma: f64) -> Result<Self> {
        check_poly_params(poly_n, poly_sigma)?;
        let radius = poly_n / 2;
        let r = radius as isize;

        // Normal matrix Bᵀ W B.
        let mut gram = [[0.0; BASIS_LEN]; BASIS_LEN];
        let mut weighted_basis = Vec::with_capacity(poly_n * poly_n);
        for dy in -r..=r {
            for dx in -r..=r {
                let w = applicability(dx as f64, dy as f64, poly_sigma);
                let phi = basis(dx as f64, dy as f64);
                for i in 0..BASIS_LEN {
                    for j in 0..BASIS_LEN {
                        gram[i][j] += w * phi[i] * phi[j];
                    }
                }
                weighted_basis.push(phi.map(|p| p * w));
            }
        }
        let inv = invert(gram).ok_or_else(|| {
            Error::InvalidParams(format!(
                "polynomial expansion is singular for poly_n={poly_n}, poly_sigma={poly_sigma}"
            ))
        })?;

        // Row k of G⁻¹ Bᵀ W gives the filter for coefficient k.
        let taps = weighted_basis
            .iter()
            .map(|wb| {
                let mut t = [0.0; BASIS_LEN];
                for (k, tk) in t.iter_mut().enumerate() {
                    *tk = (0..BASIS_LEN).map(|j| inv[k][j] * wb[j]).sum();
                }
                t
            })
            .collect();
        Ok(Self { radius, taps })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Fits the model at every pixel, replicating border samples.
    pub fn expand(&self, image: &Plane) -> PolyCoeffs {
        let (w, h) = image.dims();
        let r = self.radius as isize;
        let side = 2 * self.radius + 1;

        let rows: Vec<Vec<[f64; BASIS_LEN]>> = (0..h)
            .into_par_iter()
            .map(|y| {
                let mut out = vec![[0.0; BASIS_LEN]; w];
                for (x, coeffs) in out.iter_mut().enumerate() {
                    let mut acc = [0.0; BASIS_LEN];
                    for wy in 0..side {
                        let sy = y as isize + wy as isize - r;
                        for wx in 0..side {
                            let sx = x as isize + wx as isize - r;
                            let v = image.at_clamped(sx, sy);
                            let t = &self.taps[wy * side + wx];
                            for k in 0..BASIS_LEN {
                                acc[k] += t[k] * v;
                            }
                        }
                    }
                    *coeffs = acc;
                }
                out
            })
            .collect();

        let plane = |k: usize, scale: f64| {
            Plane::new(
                w,
                h,
                rows.iter().flatten().map(|r| r[k] * scale).collect(),
            )
        };
        PolyCoeffs {
            c: plane(0, 1.0),
            b1: plane(1, 1.0),
            b2: plane(2, 1.0),
            a11: plane(3, 1.0),
            a22: plane(4, 1.0),
            a12: plane(5, 0.5),
        }
    }
}

pub(crate) fn check_poly_params(poly_n: usize, poly_sigma: f64) -> Result<()> {
    if poly_n < 3 || poly_n.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!(
            "poly_n must be odd and at least 3, got {poly_n}"
        )));
    }
    if !(poly_sigma.is_finite() && poly_sigma > 0.0) {
        return Err(Error::InvalidParams(format!(
            "poly_sigma must be positive, got {poly_sigma}"
        )));
    }
    Ok(())
}

#[inline]
fn applicability(dx: f64, dy: f64, sigma: f64) -> f64 {
    (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert(mut m: [[f64; BASIS_LEN]; BASIS_LEN]) -> Option<[[f64; BASIS_LEN]; BASIS_LEN]> {
    let mut inv = [[0.0; BASIS_LEN]; BASIS_LEN];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..BASIS_LEN {
        let pivot = (col..BASIS_LEN)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col];
        for j in 0..BASIS_LEN {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for row in 0..BASIS_LEN {
            if row != col {
                let f = m[row][col];
                if f != 0.0 {
                    for j in 0..BASIS_LEN {
                        m[row][j] -= f * m[col][j];
                        inv[row][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Quadratic expansion of `image` with a `poly_n × poly_n` Gaussian-weighted
/// window of standard deviation `poly_sigma`.
pub fn polynomial_expansion(image: &Plane, poly_n: usize, poly_sigma: f64) -> Result<PolyCoeffs> {
    let kernels = ExpansionKernels::new(poly_n, poly_sigma)?;
    if image.width() < poly_n || image.height() < poly_n {
        return Err(Error::InvalidParams(format!(
            "{}x{} image is smaller than the {poly_n}x{poly_n} window",
            image.width(),
            image.height()
        )));
    }
    Ok(kernels.expand(image))
}
