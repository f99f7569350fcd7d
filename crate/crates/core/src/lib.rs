pub mod angular;
pub mod coeffs;
pub mod error;
pub mod fft;
pub mod frame;
pub mod quad;
pub mod radial;
pub mod signal;
pub mod slice2d;
pub mod slice3d;
pub mod special;
pub mod tomography;
pub mod transform;

pub use error::{Error, Result};
