//! Channel models: binary symmetric and real AWGN with unit noise variance.

use alloc::vec::Vec;

use libm::{log10, log2, pow};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::special::binary_entropy;

/// Converts a power ratio in dB to linear scale.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    pow(10.0, db / 10.0)
}

#[inline]
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * log10(lin)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelSpec {
    /// Binary symmetric channel with crossover probability `p`.
    Bsc { p: f64 },
    /// Real AWGN channel with linear SNR `eta` and unit noise variance.
    Awgn { eta: f64 },
}

/// One block of channel noise.
#[derive(Clone, Debug, PartialEq)]
pub enum Noise {
    Flips(Vec<bool>),
    Gaussian(Vec<f64>),
}

impl ChannelSpec {
    /// `p = 0` is accepted as the noiseless limit.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&p) {
            return Err(Error::InvalidChannel("BSC crossover must lie in [0, 1/2)"));
        }
        Ok(Self::Bsc { p })
    }

    pub fn awgn(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidChannel(
                "AWGN SNR must be positive and finite",
            ));
        }
        Ok(Self::Awgn { eta })
    }

    pub fn awgn_db(snr_db: f64) -> Result<Self> {
        Self::awgn(db_to_linear(snr_db))
    }

    /// Capacity in bits per channel use.
    pub fn capacity(&self) -> f64 {
        match *self {
            Self::Bsc { p } => 1.0 - binary_entropy(p),
            Self::Awgn { eta } => 0.5 * log2(1.0 + eta),
        }
    }

    pub fn is_bsc(&self) -> bool {
        matches!(self, Self::Bsc { .. })
    }

    pub(crate) fn awgn_eta(&self) -> Result<f64> {
        match *self {
            Self::Awgn { eta } => Ok(eta),
            Self::Bsc { .. } => Err(Error::WrongChannel("AWGN")),
        }
    }

    pub(crate) fn bsc_p(&self) -> Result<f64> {
        match *self {
            Self::Bsc { p } => Ok(p),
            Self::Awgn { .. } => Err(Error::WrongChannel("BSC")),
        }
    }

    /// Draws `n` independent noise samples: Bernoulli(p) flips for the BSC,
    /// standard normals (ziggurat) for AWGN.
    pub fn sample_noise<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Noise {
        match *self {
            Self::Bsc { p } => {
                Noise::Flips((0..n).map(|_| p > 0.0 && rng.random::<f64>() < p).collect())
            }
            Self::Awgn { .. } => {
                Noise::Gaussian((0..n).map(|_| StandardNormal.sample(rng)).collect())
            }
        }
    }
}
