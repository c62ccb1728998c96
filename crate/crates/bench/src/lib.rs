//! Shared fixtures for the benchmarks.

use thetapair::simulate::sample_sas;
use thetapair::{PairedSample, RngStream, Seed, SinhArcsinhParams};

/// A reproducible sample of size `n` from the reference sinh-arcsinh model.
pub fn reference_sample(n: usize) -> PairedSample {
    sample_sas(&SinhArcsinhParams::reference(), n, RngStream::new(Seed(42), 0)).expect("valid parameters")
}
