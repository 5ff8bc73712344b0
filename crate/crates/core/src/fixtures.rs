//! Procedural scenes with natural-image statistics (1/f spectrum, hard
//! edges, correlated color), used by the test suites and for smoke runs
//! when no photographic dataset is at hand.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::image::{clamp_unit, PlanarImage};

struct Wave {
    fx: f64,
    fy: f64,
    phase: f64,
    amp: f64,
}

enum Shape {
    Disk { cx: f64, cy: f64, r: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
}

/// A `width x height` RGB scene, fully determined by `seed`.
pub fn natural_scene(seed: u64, width: usize, height: usize) -> PlanarImage {
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x5eed_5ce7e);
    let scale = width.max(height) as f64;
    let waves: Vec<Wave> = (0..48)
        .map(|_| {
            let f = rng.random_range(1.0f64..scale / 3.0);
            let angle = rng.random_range(0.0..PI);
            Wave {
                fx: f * angle.cos() / scale,
                fy: f * angle.sin() / scale,
                phase: rng.random_range(0.0..2.0 * PI),
                amp: 0.35 / f.powf(0.9),
            }
        })
        .collect();
    let shapes: Vec<(Shape, [f64; 3])> = (0..6)
        .map(|_| {
            let shape = if rng.random_bool(0.5) {
                Shape::Disk {
                    cx: rng.random_range(0.0..width as f64),
                    cy: rng.random_range(0.0..height as f64),
                    r: rng.random_range(0.05..0.3) * scale,
                }
            } else {
                let x0 = rng.random_range(0.0..width as f64);
                let y0 = rng.random_range(0.0..height as f64);
                Shape::Rect {
                    x0,
                    y0,
                    x1: x0 + rng.random_range(0.1..0.5) * width as f64,
                    y1: y0 + rng.random_range(0.1..0.5) * height as f64,
                }
            };
            let tint = [
                rng.random_range(-0.25..0.25),
                rng.random_range(-0.25..0.25),
                rng.random_range(-0.25..0.25),
            ];
            (shape, tint)
        })
        .collect();
    let base: [f64; 3] = [
        rng.random_range(0.35..0.65),
        rng.random_range(0.35..0.65),
        rng.random_range(0.35..0.65),
    ];
    let chroma = [
        rng.random_range(0.8..1.2),
        rng.random_range(0.8..1.2),
        rng.random_range(0.8..1.2),
    ];

    let mut lum = vec![0.0; width * height];
    for (i, l) in lum.iter_mut().enumerate() {
        let (x, y) = ((i % width) as f64, (i / width) as f64);
        *l = waves
            .iter()
            .map(|w| w.amp * (2.0 * PI * (w.fx * x + w.fy * y) + w.phase).sin())
            .sum();
    }
    PlanarImage::from_fn(width, height, 3, |c, y, x| {
        let (fx, fy) = (x as f64, y as f64);
        let mut v = base[c] + chroma[c] * lum[y * width + x];
        for (shape, tint) in &shapes {
            let inside = match *shape {
                Shape::Disk { cx, cy, r } => (fx - cx).powi(2) + (fy - cy).powi(2) < r * r,
                Shape::Rect { x0, y0, x1, y1 } => fx >= x0 && fx < x1 && fy >= y0 && fy < y1,
            };
            if inside {
                v += tint[c];
            }
        }
        clamp_unit(v)
    })
    .expect("non-empty scene")
}

/// `count` scenes with seeds `seed, seed + 1, ...`.
pub fn natural_corpus(seed: u64, count: usize, width: usize, height: usize) -> Vec<PlanarImage> {
    (0..count as u64)
        .map(|i| natural_scene(seed + i, width, height))
        .collect()
}
