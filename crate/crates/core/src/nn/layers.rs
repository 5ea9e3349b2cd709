//! Kernels on `(channels, batch * len)` activation matrices.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView1, ArrayView2, ArrayViewMut2, Axis, Zip};

use super::Real;

/// `a · b` into a fresh matrix.
pub fn matmul<T: Real>(a: &ArrayView2<T>, b: &ArrayView2<T>) -> Array2<T> {
    let mut c = Array2::zeros((a.nrows(), b.ncols()));
    general_mat_mul(T::one(), a, b, T::zero(), &mut c);
    c
}

/// `c += a · b`
pub fn matmul_acc<T: Real>(a: &ArrayView2<T>, b: &ArrayView2<T>, c: &mut ArrayViewMut2<T>) {
    general_mat_mul(T::one(), a, b, T::one(), c);
}

/// Adds a per-row bias.
pub fn add_row_bias<T: Real>(x: &mut Array2<T>, b: &ArrayView1<T>) {
    *x += &b.view().insert_axis(Axis(1));
}

pub fn relu_inplace<T: Real>(x: &mut Array2<T>) {
    x.mapv_inplace(|v| if v > T::zero() { v } else { T::zero() });
}

/// Zeroes gradient entries where the forward activation was not positive.
pub fn relu_backward<T: Real>(grad: &mut Array2<T>, activation: &Array2<T>) {
    Zip::from(grad).and(activation).for_each(|g, &a| {
        if a <= T::zero() {
            *g = T::zero();
        }
    });
}

/// Unrolls a "same"-padded, stride-1 convolution window.
///
/// `x` is `(c, batch * len)`; the result is `(c * k, batch * len)` with row
/// `ci * k + t` holding `x[ci, n + t - k/2]` (zero outside each frame).
pub fn im2col<T: Real>(x: &Array2<T>, batch: usize, len: usize, k: usize) -> Array2<T> {
    let c = x.nrows();
    let pad = (k / 2) as isize;
    let mut col = Array2::<T>::zeros((c * k, batch * len));
    let src = x.as_slice().expect("standard layout");
    let dst = col.as_slice_mut().expect("standard layout");
    let width = batch * len;
    for ci in 0..c {
        for t in 0..k {
            let shift = t as isize - pad;
            let row = (ci * k + t) * width;
            for b in 0..batch {
                let base = ci * width + b * len;
                let (d0, s0, n) = window(shift, len);
                dst[row + b * len + d0..row + b * len + d0 + n].copy_from_slice(&src[base + s0..base + s0 + n]);
            }
        }
    }
    col
}

/// Adjoint of [`im2col`].
pub fn col2im<T: Real>(col: &Array2<T>, c: usize, batch: usize, len: usize, k: usize) -> Array2<T> {
    let pad = (k / 2) as isize;
    let mut x = Array2::<T>::zeros((c, batch * len));
    let width = batch * len;
    let src = col.as_slice().expect("standard layout");
    let dst = x.as_slice_mut().expect("standard layout");
    for ci in 0..c {
        for t in 0..k {
            let shift = t as isize - pad;
            let row = (ci * k + t) * width;
            for b in 0..batch {
                let base = ci * width + b * len;
                let (d0, s0, n) = window(shift, len);
                let from = &src[row + b * len + d0..row + b * len + d0 + n];
                for (o, &v) in dst[base + s0..base + s0 + n].iter_mut().zip(from) {
                    *o += v;
                }
            }
        }
    }
    x
}

/// For output positions `d0..d0+n` the input positions are `s0..s0+n`.
#[inline]
fn window(shift: isize, len: usize) -> (usize, usize, usize) {
    if shift >= 0 {
        let s = shift as usize;
        (0, s, len.saturating_sub(s))
    } else {
        let s = (-shift) as usize;
        (s, 0, len.saturating_sub(s))
    }
}

/// Max pooling with window 2, stride 2 along the time axis.
///
/// Frames have even length, so pairs never straddle two frames.
pub fn maxpool2<T: Real>(x: &Array2<T>) -> (Array2<T>, Vec<u8>) {
    let (c, w) = x.dim();
    let mut out = Array2::<T>::zeros((c, w / 2));
    let mut arg = vec![0u8; c * (w / 2)];
    let src = x.as_slice().expect("standard layout");
    let dst = out.as_slice_mut().expect("standard layout");
    for (j, (o, a)) in dst.iter_mut().zip(arg.iter_mut()).enumerate() {
        let row = j / (w / 2);
        let m = j % (w / 2);
        let l = src[row * w + 2 * m];
        let r = src[row * w + 2 * m + 1];
        if r > l {
            *o = r;
            *a = 1;
        } else {
            *o = l;
        }
    }
    (out, arg)
}

pub fn maxpool2_backward<T: Real>(grad: &Array2<T>, arg: &[u8]) -> Array2<T> {
    let (c, half) = grad.dim();
    let mut dx = Array2::<T>::zeros((c, half * 2));
    let src = grad.as_slice().expect("standard layout");
    let dst = dx.as_slice_mut().expect("standard layout");
    for (j, (&g, &a)) in src.iter().zip(arg).enumerate() {
        let row = j / half;
        let m = j % half;
        dst[row * half * 2 + 2 * m + a as usize] = g;
    }
    dx
}

/// Mean over time of each frame: `(c, batch * len)` to `(batch, c)`.
pub fn global_avg_pool<T: Real>(x: &Array2<T>, batch: usize, len: usize) -> Array2<T> {
    let c = x.nrows();
    let scale = T::one() / T::from(len).unwrap();
    Array2::from_shape_fn((batch, c), |(b, ci)| {
        x.row(ci).iter().skip(b * len).take(len).copied().sum::<T>() * scale
    })
}

pub fn global_avg_pool_backward<T: Real>(grad: &Array2<T>, len: usize) -> Array2<T> {
    let (batch, c) = grad.dim();
    let scale = T::one() / T::from(len).unwrap();
    Array2::from_shape_fn((c, batch * len), |(ci, j)| grad[[j / len, ci]] * scale)
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    #[test]
    fn im2col_pads_each_frame() {
        // one channel, two frames of length 3
        let x = array![[1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0]];
        let col = im2col(&x, 2, 3, 3);
        assert_eq!(
            col,
            array![
                [0.0, 1.0, 2.0, 0.0, 4.0, 5.0],
                [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
                [2.0, 3.0, 0.0, 5.0, 6.0, 0.0],
            ]
        );
    }

    #[test]
    fn col2im_is_adjoint_of_im2col() {
        // <im2col(x), y> == <x, col2im(y)>
        let x = Array2::from_shape_fn((2, 8), |(i, j)| (i * 8 + j) as f64 * 0.37 - 1.0);
        let y = Array2::from_shape_fn((10, 8), |(i, j)| ((i * 3 + j * 7) % 11) as f64 - 5.0);
        let lhs = (&im2col(&x, 2, 4, 5) * &y).sum();
        let rhs = (&x * &col2im(&y, 2, 2, 4, 5)).sum();
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn maxpool_and_gap() {
        let x = array![[1.0f64, 3.0, 2.0, -1.0], [0.0, 0.0, 5.0, 6.0]];
        let (p, arg) = maxpool2(&x);
        assert_eq!(p, array![[3.0, 2.0], [0.0, 6.0]]);
        let back = maxpool2_backward(&array![[1.0, 2.0], [3.0, 4.0]], &arg);
        assert_eq!(back, array![[0.0, 1.0, 2.0, 0.0], [3.0, 0.0, 0.0, 4.0]]);
        let g = global_avg_pool(&x, 2, 2);
        assert_eq!(g, array![[2.0, 0.0], [0.5, 5.5]]);
        let gb = global_avg_pool_backward(&array![[2.0, 4.0], [6.0, 8.0]], 2);
        assert_eq!(gb, array![[1.0, 1.0, 3.0, 3.0], [2.0, 2.0, 4.0, 4.0]]);
    }
}
