//! Orthonormal cosine bases diagonalizing the Neumann second-difference
//! operator on a cell-centered grid, and tensor-axis transforms.

use rayon::prelude::*;

/// The m×m orthonormal DCT-II matrix C[k][i] = c_k cos(πk(i+½)/m) and the
/// eigenvalues 4 sin²(πk/2m) of the unit-spacing Neumann stencil.
#[derive(Debug, Clone)]
pub struct CosineBasis {
    pub m: usize,
    pub matrix: Vec<f64>,
    pub eigenvalues: Vec<f64>,
}

impl CosineBasis {
    pub fn new(m: usize) -> Self {
        let mf = m as f64;
        let mut matrix = vec![0.0; m * m];
        for k in 0..m {
            let c = if k == 0 { (1.0 / mf).sqrt() } else { (2.0 / mf).sqrt() };
            for i in 0..m {
                matrix[k * m + i] = c * (std::f64::consts::PI * k as f64 * (i as f64 + 0.5) / mf).cos();
            }
        }
        let eigenvalues = (0..m)
            .map(|k| 4.0 * (std::f64::consts::PI * k as f64 / (2.0 * mf)).sin().powi(2))
            .collect();
        Self { m, matrix, eigenvalues }
    }
}

const LANE: usize = 512;

/// Applies `mat` (m×m, row-major) along the axis with the given stride of a
/// tensor whose extent on that axis is m; `transpose` applies matᵀ.
pub fn transform_axis(data: &mut [f64], m: usize, stride: usize, mat: &[f64], transpose: bool) {
    let block = m * stride;
    debug_assert_eq!(data.len() % block, 0);
    let work = |chunk: &mut [f64]| {
        let mut buf = vec![0.0; m * LANE.min(stride)];
        let mut t0 = 0;
        while t0 < stride {
            let w = LANE.min(stride - t0);
            for i in 0..m {
                buf[i * w..(i + 1) * w].copy_from_slice(&chunk[i * stride + t0..i * stride + t0 + w]);
            }
            for k in 0..m {
                let out = &mut chunk[k * stride + t0..k * stride + t0 + w];
                out.fill(0.0);
                for i in 0..m {
                    let c = if transpose { mat[i * m + k] } else { mat[k * m + i] };
                    let src = &buf[i * w..(i + 1) * w];
                    for (o, s) in out.iter_mut().zip(src) {
                        *o += c * s;
                    }
                }
            }
            t0 += w;
        }
    };
    if data.len() > block {
        data.par_chunks_mut(block).for_each(work);
    } else {
        work(data);
    }
}

/// Applies `mat` along every one of `axes` axes of an m^axes tensor.
pub fn transform_all(data: &mut [f64], m: usize, axes: usize, mat: &[f64], transpose: bool) {
    for a in 0..axes {
        let stride = m.pow((axes - 1 - a) as u32);
        transform_axis(data, m, stride, mat, transpose);
    }
}
