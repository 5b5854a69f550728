//! Random-convolution-kernel transform with proportion-of-positive-values
//! pooling.
//!
//! The kernel family is fixed: length 9, weights in {-1, 2}, exactly three
//! 2s. All C(9,3) = 84 members are used. Each kernel is applied at a set of
//! exponentially spaced dilations, biases are quantiles of training
//! convolution outputs, and every (kernel, dilation, bias) slot yields one
//! PPV feature.

mod convolve;
mod kernels;
mod model;
mod schedule;
mod transform;

pub use convolve::{dilated_convolve, TapBank};
pub use kernels::{enumerate_kernels, Kernel, KernelSet, KERNEL_LEN, NUM_KERNELS};
pub use model::{fit_biases, fit_biases_with, quantile, quantile_level, TransformModel};
pub use schedule::{dilation_schedule, max_exponent, DilationSchedule, DEFAULT_MAX_DILATIONS};
pub use transform::{ppv, transform, transform_batch, transform_signals, FeatureVector};
