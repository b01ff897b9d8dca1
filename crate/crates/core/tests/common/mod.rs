#![allow(dead_code)]

use facesym_core::{Frame, Plane};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Periodic Gaussian blur, computed by direct wrap-around convolution.
fn periodic_blur(p: &Plane, sigma: f64) -> Plane {
    let r = (3.0 * sigma).ceil() as isize;
    let k: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    let (w, h) = (p.width() as isize, p.height() as isize);
    let tmp = Plane::from_fn(p.width(), p.height(), |x, y| {
        k.iter()
            .enumerate()
            .map(|(i, kv)| kv * p.get(((x as isize + i as isize - r).rem_euclid(w)) as usize, y))
            .sum::<f64>()
            / s
    });
    Plane::from_fn(p.width(), p.height(), |x, y| {
        k.iter()
            .enumerate()
            .map(|(i, kv)| kv * tmp.get(x, ((y as isize + i as isize - r).rem_euclid(h)) as usize))
            .sum::<f64>()
            / s
    })
}

/// Seeded white noise, periodically smoothed and stretched to `[0.05, 0.95]`.
pub fn smoothed_noise(size: usize, sigma: f64, seed: u64) -> Plane {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = Plane::from_fn(size, size, |_, _| rng.gen::<f64>());
    let smooth = periodic_blur(&raw, sigma);
    let lo = smooth.data().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = smooth.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Plane::from_fn(size, size, |x, y| 0.05 + 0.9 * (smooth.get(x, y) - lo) / (hi - lo))
}

/// Content moved by `(dx, dy)` with wrap-around: `out(x, y) = src(x - dx, y - dy)`.
pub fn roll(p: &Plane, dx: isize, dy: isize) -> Plane {
    let (w, h) = (p.width() as isize, p.height() as isize);
    Plane::from_fn(p.width(), p.height(), |x, y| {
        p.get(
            (x as isize - dx).rem_euclid(w) as usize,
            (y as isize - dy).rem_euclid(h) as usize,
        )
    })
}

pub fn frame(p: Plane) -> Frame {
    Frame::new(p).unwrap()
}

/// Mean endpoint error against a constant true flow over the centered
/// window covering at least `fraction` of the pixels.
pub fn central_epe(flow: &facesym_core::FlowField, truth: (f64, f64), fraction: f64) -> f64 {
    let (w, h) = (flow.width(), flow.height());
    let side_w = ((w as f64) * fraction.sqrt()).ceil() as usize;
    let side_h = ((h as f64) * fraction.sqrt()).ceil() as usize;
    let (mx, my) = ((w - side_w) / 2, (h - side_h) / 2);
    let mut sum = 0.0;
    let mut n = 0usize;
    for y in my..h - my {
        for x in mx..w - mx {
            let [u, v] = flow.get(x, y);
            sum += ((f64::from(u) - truth.0).powi(2) + (f64::from(v) - truth.1).powi(2)).sqrt();
            n += 1;
        }
    }
    assert!(n as f64 >= fraction * (w * h) as f64);
    sum / n as f64
}
