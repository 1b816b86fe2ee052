//! Row-major dense tensor helpers used by the coefficient representation.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Number of entries of a tensor with the given shape.
pub(crate) fn volume(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Contracts `axis` of a row-major tensor with a real matrix of shape
/// `rows x shape[axis]`; the axis length becomes `rows`.
pub(crate) fn apply_along_axis(
    data: &[Complex64],
    shape: &[usize],
    axis: usize,
    mat: &DMatrix<f64>,
) -> (Vec<Complex64>, Vec<usize>) {
    let cols = shape[axis];
    assert_eq!(mat.ncols(), cols, "matrix/axis length mismatch");
    let rows = mat.nrows();
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); outer * rows * inner];
    for o in 0..outer {
        for c in 0..cols {
            let src = &data[(o * cols + c) * inner..(o * cols + c + 1) * inner];
            if src.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                continue;
            }
            for r in 0..rows {
                let w = mat[(r, c)];
                if w == 0.0 {
                    continue;
                }
                let dst = &mut out[(o * rows + r) * inner..(o * rows + r + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s * w;
                }
            }
        }
    }
    let mut new_shape = shape.to_vec();
    new_shape[axis] = rows;
    (out, new_shape)
}

/// Copies a tensor into a larger (or equal) shape, zero filling.
pub(crate) fn pad(data: &[Complex64], shape: &[usize], new_shape: &[usize]) -> Vec<Complex64> {
    debug_assert_eq!(shape.len(), new_shape.len());
    let mut out = vec![Complex64::new(0.0, 0.0); volume(new_shape)];
    for_each_index(shape, |flat, idx| {
        if idx.iter().zip(new_shape).all(|(k, n)| k < n) {
            out[flat_index(idx, new_shape)] = data[flat];
        }
    });
    out
}

pub(crate) fn flat_index(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (k, n)| acc * n + k)
}

/// Visits every multi-index of `shape` in row-major order.
pub(crate) fn for_each_index(shape: &[usize], mut visit: impl FnMut(usize, &[usize])) {
    let total = volume(shape);
    if total == 0 {
        return;
    }
    let mut idx = vec![0usize; shape.len()];
    for flat in 0..total {
        visit(flat, &idx);
        for axis in (0..shape.len()).rev() {
            idx[axis] += 1;
            if idx[axis] < shape[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_contraction_is_noop() {
        let shape = [3, 4];
        let data: Vec<Complex64> = (0..12)
            .map(|k| Complex64::new(k as f64, -(k as f64)))
            .collect();
        let (out, s) = apply_along_axis(&data, &shape, 1, &DMatrix::identity(4, 4));
        assert_eq!(s, vec![3, 4]);
        assert_eq!(out, data);
    }

    #[test]
    fn padding_keeps_positions() {
        let data: Vec<Complex64> = (0..4).map(|k| Complex64::new(k as f64, 0.0)).collect();
        let out = pad(&data, &[2, 2], &[3, 3]);
        assert_eq!(out[flat_index(&[1, 1], &[3, 3])], Complex64::new(3.0, 0.0));
        assert_eq!(out[flat_index(&[0, 1], &[3, 3])], Complex64::new(1.0, 0.0));
        assert_eq!(out[flat_index(&[2, 2], &[3, 3])], Complex64::new(0.0, 0.0));
    }
}
