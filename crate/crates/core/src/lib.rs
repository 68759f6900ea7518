//! Extended Gevrey regularity, `M_p = p^(tau p^sigma)`, made computable.
//!
//! The crate evaluates the associated function `T_{tau,sigma,h}` and its
//! Lambert-W asymptotics, builds admissible windows, computes discrete
//! short-time Fourier transforms, and uses STFT decay to classify signals and
//! estimate wave front sets.

pub mod assoc;
pub mod corpus;
pub mod error;
pub mod fft;
pub mod grid;
pub mod io;
pub mod lambert;
pub mod regularity;
pub mod sequence;
pub mod spectral;
pub mod stft;
pub mod verify;
pub mod wavefront;
pub mod weight;
pub mod window;

pub use error::{Error, Result};
pub use rustfft::num_complex::Complex64;
pub use sequence::GevreyParams;
pub use stft::{SampledSignal, StftGrid};
pub use weight::WeightSpec;
