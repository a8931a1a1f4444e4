//! Radix-p transform over (Z_p)^{md}.
//!
//! The flat array of length q^d = p^{md} is addressed by md base-p digits. Each stage
//! applies a length-p DFT `out[w] = sum_j in[j] w^{wj}` (w = exp(2 pi i / p)) along one
//! digit. A stage gathers every line into a line-major scratch buffer (transforming on
//! the way), then scatters it back. Both passes parallelize without changing the
//! arithmetic, so results do not depend on the thread count.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

const NAIVE_LIMIT: usize = 16;
const CHUNK: usize = 1 << 12;

enum LineDft {
    Two,
    Naive(Vec<Complex64>),
    Planned(Arc<dyn Fft<f64>>),
}

impl LineDft {
    fn new(p: usize) -> LineDft {
        if p == 2 {
            LineDft::Two
        } else if p <= NAIVE_LIMIT {
            let roots = (0..p)
                .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / p as f64))
                .collect();
            LineDft::Naive(roots)
        } else {
            // rustfft's inverse direction is the unnormalized sum with exp(+2 pi i jk/n).
            LineDft::Planned(FftPlanner::new().plan_fft_inverse(p))
        }
    }

    fn scratch_len(&self) -> usize {
        match self {
            LineDft::Planned(f) => f.get_inplace_scratch_len(),
            _ => 0,
        }
    }

    /// Transforms `line` (already holding the gathered inputs) in place.
    fn run(&self, line: &mut [Complex64], tmp: &mut [Complex64], scratch: &mut [Complex64]) {
        match self {
            LineDft::Two => {
                let (a, b) = (line[0], line[1]);
                line[0] = a + b;
                line[1] = a - b;
            }
            LineDft::Naive(roots) => {
                let p = line.len();
                tmp[..p].copy_from_slice(line);
                for (w, out) in line.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut k = 0usize;
                    for x in &tmp[..p] {
                        acc += x * roots[k];
                        k += w;
                        if k >= p {
                            k -= p;
                        }
                    }
                    *out = acc;
                }
            }
            LineDft::Planned(f) => f.process_with_scratch(line, scratch),
        }
    }
}

/// In-place DFT over (Z_p)^digits with the + sign convention and no normalization.
pub(crate) fn dft_zp(data: &mut [Complex64], p: usize, digits: usize) {
    let n = data.len();
    debug_assert_eq!(n, p.pow(digits as u32));
    if n <= 1 {
        return;
    }
    let kernel = LineDft::new(p);
    let scratch_len = kernel.scratch_len();
    let mut temp = vec![Complex64::new(0.0, 0.0); n];
    let mut stride = 1usize;
    for _ in 0..digits {
        let block = stride * p;
        {
            let src: &[Complex64] = data;
            temp.par_chunks_mut(p).enumerate().for_each_init(
                || (vec![Complex64::new(0.0, 0.0); p], vec![Complex64::new(0.0, 0.0); scratch_len]),
                |(tmp, scratch), (line, out)| {
                    let low = line % stride;
                    let high = line / stride;
                    let base = high * block + low;
                    for (j, o) in out.iter_mut().enumerate() {
                        *o = src[base + j * stride];
                    }
                    kernel.run(out, tmp, scratch);
                },
            );
        }
        {
            let src: &[Complex64] = &temp;
            data.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
                let start = c * CHUNK;
                for (off, o) in chunk.iter_mut().enumerate() {
                    let i = start + off;
                    let low = i % stride;
                    let j = (i / stride) % p;
                    let high = i / block;
                    *o = src[(high * stride + low) * p + j];
                }
            });
        }
        stride = block;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(input: &[Complex64], p: usize, digits: usize) -> Vec<Complex64> {
        let n = input.len();
        let dig = |mut i: usize| {
            (0..digits)
                .map(|_| {
                    let r = i % p;
                    i /= p;
                    r
                })
                .collect::<Vec<_>>()
        };
        (0..n)
            .map(|w| {
                let wd = dig(w);
                (0..n)
                    .map(|j| {
                        let jd = dig(j);
                        let e: usize = wd.iter().zip(&jd).map(|(a, b)| a * b).sum::<usize>() % p;
                        input[j] * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * e as f64 / p as f64)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_brute_force() {
        for (p, digits) in [(2usize, 5), (3, 3), (5, 2), (7, 2), (17, 1), (19, 2)] {
            let n = p.pow(digits as u32);
            let input: Vec<Complex64> =
                (0..n).map(|i| Complex64::new((i * 7 % 11) as f64, (i % 3) as f64 - 1.0)).collect();
            let mut data = input.clone();
            dft_zp(&mut data, p, digits);
            let want = brute(&input, p, digits);
            for (a, b) in data.iter().zip(&want) {
                assert!((a - b).norm() < 1e-8, "p = {p}, digits = {digits}");
            }
        }
    }
}
