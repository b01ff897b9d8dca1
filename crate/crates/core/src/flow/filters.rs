//! Separable smoothing and resampling with replicated borders.

use crate::plane::Plane;

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Correlates rows then columns with a symmetric odd-length kernel.
fn separable(src: &Plane, kernel: &[f64]) -> Plane {
    let (w, h) = src.dims();
    let r = (kernel.len() / 2) as isize;
    let mut tmp = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                acc += k * src.at_clamped(x as isize + i as isize - r, y as isize);
            }
            tmp.set(x, y, acc);
        }
    }
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                acc += k * tmp.at_clamped(x as isize, y as isize + i as isize - r);
            }
            out.set(x, y, acc);
        }
    }
    out
}

pub fn gaussian_blur(src: &Plane, sigma: f64) -> Plane {
    if sigma <= 0.0 {
        return src.clone();
    }
    separable(src, &gaussian_kernel(sigma))
}

/// Mean over a `window × window` neighborhood.
pub fn box_filter(src: &Plane, window: usize) -> Plane {
    let k = vec![1.0 / window as f64; window];
    separable(src, &k)
}

/// Bilinear resize using pixel-center alignment.
pub fn resize_bilinear(src: &Plane, width: usize, height: usize) -> Plane {
    let sx = src.width() as f64 / width as f64;
    let sy = src.height() as f64 / height as f64;
    Plane::from_fn(width, height, |x, y| {
        src.sample_bilinear((x as f64 + 0.5) * sx - 0.5, (y as f64 + 0.5) * sy - 0.5)
    })
}
