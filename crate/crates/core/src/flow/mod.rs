//! Dense optical flow by polynomial expansion (Farnebäck), coarse to fine.
//!
//! Each pixel neighborhood of both frames is approximated by a quadratic
//! polynomial. A translation `d` of the signal shows up as a change in the
//! linear coefficient, `b₂ = b₁ − 2A d`, so the displacement follows from a
//! small linear system. The system is made well-posed by averaging the
//! normal equations over a window, and large motions are handled by running
//! the estimate on a Gaussian pyramid and warping the second frame's
//! expansion by the flow carried down from coarser levels.

mod filters;
mod poly;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use filters::{box_filter, gaussian_blur, resize_bilinear};
pub use poly::{polynomial_expansion, ExpansionKernels, PolyCoeffs};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::plane::Plane;

/// Determinant regularizer for the per-pixel 2×2 solve. Intensities are in
/// `[0, 1]`, so this is `1e-3` on the 8-bit scale divided by `255⁴`.
const DET_EPSILON: f64 = 1e-3 / (255.0 * 255.0 * 255.0 * 255.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowParams {
    /// Number of pyramid levels including full resolution.
    pub pyramid_levels: usize,
    pub pyramid_scale: f64,
    pub iterations_per_level: usize,
    pub poly_n: usize,
    pub poly_sigma: f64,
    pub avg_window: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            pyramid_levels: 3,
            pyramid_scale: 0.5,
            iterations_per_level: 3,
            poly_n: 5,
            poly_sigma: 1.1,
            avg_window: 15,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        poly::check_poly_params(self.poly_n, self.poly_sigma)?;
        if self.avg_window < 3 || self.avg_window.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "avg_window must be odd and at least 3, got {}",
                self.avg_window
            )));
        }
        if !(self.pyramid_scale > 0.25 && self.pyramid_scale < 0.95) {
            return Err(Error::InvalidParams(format!(
                "pyramid_scale must lie in (0.25, 0.95), got {}",
                self.pyramid_scale
            )));
        }
        if self.pyramid_levels == 0 || self.iterations_per_level == 0 {
            return Err(Error::InvalidParams(
                "pyramid_levels and iterations_per_level must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Level sizes from full resolution down, stopping before any level
    /// would fall below `2·poly_n` on either side.
    pub fn level_sizes(&self, width: usize, height: usize) -> Result<Vec<(usize, usize)>> {
        let min_side = 2 * self.poly_n;
        if width < min_side || height < min_side {
            return Err(Error::InvalidParams(format!(
                "{width}x{height} is too small for poly_n={} (need {min_side} per side)",
                self.poly_n
            )));
        }
        let mut sizes = vec![(width, height)];
        for k in 1..self.pyramid_levels {
            let s = self.pyramid_scale.powi(k as i32);
            let (w, h) = (
                (width as f64 * s).round() as usize,
                (height as f64 * s).round() as usize,
            );
            if w < min_side || h < min_side {
                break;
            }
            sizes.push((w, h));
        }
        Ok(sizes)
    }
}

/// Per-pixel displacement in pixels/frame; `u` rightward, `v` downward.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    vectors: Vec<[f32; 2]>,
}

impl FlowField {
    pub fn new(width: usize, height: usize, vectors: Vec<[f32; 2]>) -> Self {
        assert_eq!(vectors.len(), width * height, "flow data length mismatch");
        Self {
            width,
            height,
            vectors,
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![[0.0; 2]; width * height])
    }

    pub fn from_planes(u: &Plane, v: &Plane) -> Self {
        assert_eq!(u.dims(), v.dims());
        let vectors = u
            .data()
            .iter()
            .zip(v.data())
            .map(|(&a, &b)| [a as f32, b as f32])
            .collect();
        Self::new(u.width(), u.height(), vectors)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[[f32; 2]] {
        &self.vectors
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f32; 2] {
        self.vectors[y * self.width + x]
    }

    /// Flow of the mirrored frame pair: positions flip and `u` changes sign.
    pub fn flipped_horizontal(&self) -> FlowField {
        let mut vectors = Vec::with_capacity(self.vectors.len());
        for y in 0..self.height {
            for x in (0..self.width).rev() {
                let [u, v] = self.get(x, y);
                vectors.push([-u, v]);
            }
        }
        FlowField::new(self.width, self.height, vectors)
    }
}

/// Per-pixel flow magnitude in pixels/frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeMap(Plane);

impl MagnitudeMap {
    /// Wraps a plane of magnitudes; values must be finite and nonnegative.
    pub fn new(plane: Plane) -> Result<Self> {
        if plane.data().iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParams(
                "magnitudes must be finite and nonnegative".into(),
            ));
        }
        Ok(Self(plane))
    }

    pub fn plane(&self) -> &Plane {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    pub fn values(&self) -> &[f64] {
        self.0.data()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.0.get(x, y)
    }

    pub fn max(&self) -> f64 {
        self.0.data().iter().copied().fold(0.0, f64::max)
    }

    pub(crate) fn from_plane_unchecked(plane: Plane) -> Self {
        Self(plane)
    }
}

pub fn flow_magnitude(flow: &FlowField) -> MagnitudeMap {
    let data = flow
        .vectors()
        .iter()
        .map(|&[u, v]| {
            let (u, v) = (f64::from(u), f64::from(v));
            (u * u + v * v).sqrt()
        })
        .collect();
    MagnitudeMap(Plane::new(flow.width(), flow.height(), data))
}

/// Validated parameters plus the precomputed expansion filters.
#[derive(Debug, Clone)]
pub struct FlowEstimator {
    params: FlowParams,
    kernels: ExpansionKernels,
}

impl FlowEstimator {
    pub fn new(params: FlowParams) -> Result<Self> {
        params.validate()?;
        let kernels = ExpansionKernels::new(params.poly_n, params.poly_sigma)?;
        Ok(Self { params, kernels })
    }

    pub fn params(&self) -> &FlowParams {
        &self.params
    }

    pub fn estimate(&self, prev: &Frame, next: &Frame) -> Result<FlowField> {
        if prev.dims() != next.dims() {
            return Err(Error::DimensionMismatch {
                expected: prev.dims(),
                found: next.dims(),
                context: Some("flow frame pair".into()),
            });
        }
        let (u, v) = self.estimate_planes(prev.plane(), next.plane())?;
        Ok(FlowField::from_planes(&u, &v))
    }

    /// Coarse-to-fine estimate returning `(u, v)` planes in full precision.
    pub fn estimate_planes(&self, prev: &Plane, next: &Plane) -> Result<(Plane, Plane)> {
        let (width, height) = prev.dims();
        let sizes = self.params.level_sizes(width, height)?;

        let mut flow: Option<(Plane, Plane)> = None;
        for (level, &(lw, lh)) in sizes.iter().enumerate().rev() {
            let (p1, p2) = if level == 0 {
                (prev.clone(), next.clone())
            } else {
                let scale = self.params.pyramid_scale.powi(level as i32);
                let sigma = (1.0 / scale - 1.0) * 0.5;
                (
                    resize_bilinear(&gaussian_blur(prev, sigma), lw, lh),
                    resize_bilinear(&gaussian_blur(next, sigma), lw, lh),
                )
            };

            let (mut u, mut v) = match flow.take() {
                None => (Plane::zeros(lw, lh), Plane::zeros(lw, lh)),
                Some((cu, cv)) => {
                    let fx = lw as f64 / cu.width() as f64;
                    let fy = lh as f64 / cu.height() as f64;
                    let mut u = resize_bilinear(&cu, lw, lh);
                    let mut v = resize_bilinear(&cv, lw, lh);
                    u.data_mut().iter_mut().for_each(|x| *x *= fx);
                    v.data_mut().iter_mut().for_each(|x| *x *= fy);
                    (u, v)
                }
            };

            let e1 = self.kernels.expand(&p1);
            let e2 = self.kernels.expand(&p2);
            for _ in 0..self.params.iterations_per_level {
                (u, v) = update_flow(&e1, &e2, &u, &v, self.params.avg_window);
            }
            flow = Some((u, v));
        }
        Ok(flow.expect("at least one pyramid level"))
    }
}

pub fn estimate_flow_pair(prev: &Frame, next: &Frame, params: &FlowParams) -> Result<FlowField> {
    FlowEstimator::new(*params)?.estimate(prev, next)
}

/// One refinement step: warp the second expansion by the current flow,
/// build the averaged normal equations and solve them per pixel.
fn update_flow(
    e1: &PolyCoeffs,
    e2: &PolyCoeffs,
    u: &Plane,
    v: &Plane,
    avg_window: usize,
) -> (Plane, Plane) {
    let (w, h) = u.dims();

    // g11, g12, g22, h1, h2 per pixel.
    let rows: Vec<Vec<[f64; 5]>> = (0..h)
        .into_par_iter()
        .map(|y| {
            (0..w)
                .map(|x| {
                    let (du, dv) = (u.get(x, y), v.get(x, y));
                    let (sx, sy) = (x as f64 + du, y as f64 + dv);
                    let [w11, w12, w22, wb1, wb2] = sample5(e2, sx, sy);

                    let a11 = 0.5 * (e1.a11.get(x, y) + w11);
                    let a12 = 0.5 * (e1.a12.get(x, y) + w12);
                    let a22 = 0.5 * (e1.a22.get(x, y) + w22);
                    let db1 = -0.5 * (wb1 - e1.b1.get(x, y)) + a11 * du + a12 * dv;
                    let db2 = -0.5 * (wb2 - e1.b2.get(x, y)) + a12 * du + a22 * dv;

                    [
                        a11 * a11 + a12 * a12,
                        a12 * (a11 + a22),
                        a12 * a12 + a22 * a22,
                        a11 * db1 + a12 * db2,
                        a12 * db1 + a22 * db2,
                    ]
                })
                .collect()
        })
        .collect();

    let terms: Vec<Plane> = (0..5)
        .map(|k| {
            let p = Plane::new(w, h, rows.iter().flatten().map(|t| t[k]).collect());
            box_filter(&p, avg_window)
        })
        .collect();
    let (g11, g12, g22, h1, h2) = (&terms[0], &terms[1], &terms[2], &terms[3], &terms[4]);

    let mut nu = Plane::zeros(w, h);
    let mut nv = Plane::zeros(w, h);
    for i in 0..w * h {
        let (a, b, c) = (g11.data()[i], g12.data()[i], g22.data()[i]);
        let (r1, r2) = (h1.data()[i], h2.data()[i]);
        let inv_det = 1.0 / (a * c - b * b + DET_EPSILON);
        nu.data_mut()[i] = (c * r1 - b * r2) * inv_det;
        nv.data_mut()[i] = (a * r2 - b * r1) * inv_det;
    }
    (nu, nv)
}

/// Bilinear sample of `a11, a12, a22, b1, b2` sharing one set of weights.
fn sample5(e: &PolyCoeffs, x: f64, y: f64) -> [f64; 5] {
    let (w, h) = (e.width(), e.height());
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let w00 = (1.0 - fx) * (1.0 - fy);
    let w10 = fx * (1.0 - fy);
    let w01 = (1.0 - fx) * fy;
    let w11 = fx * fy;
    let s = |p: &Plane| {
        w00 * p.get(x0, y0) + w10 * p.get(x1, y0) + w01 * p.get(x0, y1) + w11 * p.get(x1, y1)
    };
    [s(&e.a11), s(&e.a12), s(&e.a22), s(&e.b1), s(&e.b2)]
}
