use crate::error::{Error, Result};
use crate::image::{clamp_unit, PlanarImage};
use crate::kernels::BlurKernel;

/// Reflect-101 index (`dcb|abcd|cba`), folded as many times as needed.
#[inline]
pub fn reflect101(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut m = i.rem_euclid(period);
    if m >= n as isize {
        m = period - m;
    }
    m as usize
}

/// 2-D convolution of every channel with `kernel`, reflect-101 borders,
/// output clamped to `[0, 1]`.
pub fn convolve(image: &PlanarImage, kernel: &BlurKernel) -> Result<PlanarImage> {
    let (w, h) = (image.width(), image.height());
    let size = kernel.size();
    if size > 2 * w.min(h) + 1 {
        return Err(Error::UnsupportedKernelSize {
            kernel: size,
            width: w,
            height: h,
        });
    }
    let r = kernel.radius() as isize;
    let weights = kernel.weights();

    // Column/row lookup tables: tap t of output x reads input xs[x + t],
    // which is the reflected index of x + r - t (the kernel is flipped).
    let xs: Vec<usize> = (-r..w as isize + r).map(|i| reflect101(i, w)).collect();
    let ys: Vec<usize> = (-r..h as isize + r).map(|i| reflect101(i, h)).collect();

    let mut out = image.clone();
    for c in 0..image.channels() {
        let src = image.plane(c);
        let dst = out.plane_mut(c);
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for ky in 0..size {
                    let row = ys[y + size - 1 - ky] * w;
                    let krow = &weights[ky * size..(ky + 1) * size];
                    for (kx, &wt) in krow.iter().enumerate() {
                        acc += wt * src[row + xs[x + size - 1 - kx]];
                    }
                }
                dst[y * w + x] = clamp_unit(acc);
            }
        }
    }
    Ok(out)
}
