#![no_std]
extern crate alloc;

pub mod bessel;
pub mod fft;
pub mod quadrature;
pub mod linalg;
pub mod oam;
pub mod instrument;
pub mod signal;
pub mod analysis;
