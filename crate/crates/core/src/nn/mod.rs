//! Minimal 1-D residual network with hand-written backpropagation.
//!
//! All learnable parameters live in one flat buffer; layers hold [`Slot`]s
//! into it. That keeps the optimizer, checkpointing, parameter counting and
//! gradient checking trivial. Activations are `(channels, batch * length)`
//! matrices so every convolution is a single GEMM over an im2col buffer.

mod adam;
mod layers;
mod net;

pub use adam::Adam;
pub use net::{Network, NetSpec, OutputKind, Targets};

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::Float;

/// Floating point type the network can run in (`f32` for training, `f64`
/// for gradient checks).
pub trait Real:
    Float + LinalgScalar + ScalarOperand + Send + Sync + Debug + Default + AddAssign + SubAssign + MulAssign + Sum + 'static
{
}

impl<T> Real for T where
    T: Float
        + LinalgScalar
        + ScalarOperand
        + Send
        + Sync
        + Debug
        + Default
        + AddAssign
        + SubAssign
        + MulAssign
        + Sum
        + 'static
{
}

#[inline]
pub(crate) fn real<T: Real>(v: f64) -> T {
    T::from(v).expect("representable constant")
}

/// A contiguous region of the flat parameter buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub offset: usize,
    pub len: usize,
}

impl Slot {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

#[derive(Debug, Default)]
pub(crate) struct Alloc {
    next: usize,
}

impl Alloc {
    pub fn take(&mut self, len: usize) -> Slot {
        let s = Slot {
            offset: self.next,
            len,
        };
        self.next += len;
        s
    }

    pub fn total(&self) -> usize {
        self.next
    }
}
