//! Multi-dimensional complex FFT over the flat row-major layout of [`Grid`].

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::Grid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction))
}

/// Lines per rayon task along the contiguous axis.
const LINE_BATCH: usize = 64;

/// Unnormalized in-place transform along every axis.
pub(crate) fn transform_in_place(grid: &Grid, data: &mut [Complex64], direction: FftDirection) {
    let n = grid.n();
    let d = grid.dim();
    debug_assert_eq!(data.len(), grid.len());
    let fft = plan(n, direction);

    // contiguous axis
    data.par_chunks_mut(n * LINE_BATCH).for_each_init(
        || vec![Complex64::default(); fft.get_inplace_scratch_len()],
        |scratch, chunk| fft.process_with_scratch(chunk, scratch),
    );

    // strided axes: transpose each [n][stride] block to [stride][n], transform, transpose back
    for axis in (0..d - 1).rev() {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = n * stride;
        data.par_chunks_mut(block).for_each_init(
            || {
                (
                    vec![Complex64::default(); block],
                    vec![Complex64::default(); fft.get_inplace_scratch_len()],
                )
            },
            |(tmp, scratch), chunk| {
                for i in 0..n {
                    let row = &chunk[i * stride..(i + 1) * stride];
                    for (s, v) in row.iter().enumerate() {
                        tmp[s * n + i] = *v;
                    }
                }
                fft.process_with_scratch(tmp, scratch);
                for i in 0..n {
                    let row = &mut chunk[i * stride..(i + 1) * stride];
                    for (s, v) in row.iter_mut().enumerate() {
                        *v = tmp[s * n + i];
                    }
                }
            },
        );
    }
}

/// `c_k = n^{-d} sum_x f(x) e^{-i xi_k . x}`.
pub(crate) fn forward(grid: &Grid, data: &mut [Complex64]) {
    transform_in_place(grid, data, FftDirection::Forward);
    let scale = 1.0 / grid.len() as f64;
    data.par_iter_mut().for_each(|c| *c *= scale);
}

/// `f(x) = sum_k c_k e^{i xi_k . x}`.
pub(crate) fn inverse(grid: &Grid, data: &mut [Complex64]) {
    transform_in_place(grid, data, FftDirection::Inverse);
}
