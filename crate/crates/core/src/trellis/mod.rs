//! Rate-1/3 tail-biting convolutional codes, circular-buffer rate matching
//! and tail-biting Viterbi decoding.

use alloc::vec::Vec;

use crate::error::{Error, Result};

mod rate_match;
mod viterbi;

pub use rate_match::RateMatcher;
pub use viterbi::{BranchCosts, DecodeResult, Decoder, DecoderKind};

/// Feedforward rate-1/3 convolutional code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrellisCode {
    pub name: &'static str,
    /// Memory; the code has `2^nu` states and constraint length `nu + 1`.
    pub nu: u32,
    /// Generators in octal notation, most significant bit on the current input.
    pub generators: [u32; 3],
    /// Bit `j` of `taps[i]` multiplies the input `j` steps in the past.
    taps: [u32; 3],
}

fn reverse_bits(x: u32, width: u32) -> u32 {
    (0..width).fold(0, |acc, b| acc | (((x >> b) & 1) << (width - 1 - b)))
}

fn octal(digits: u32) -> u32 {
    let mut v = 0;
    let mut scale = 1;
    let mut d = digits;
    while d > 0 {
        v += (d % 10) * scale;
        scale *= 8;
        d /= 10;
    }
    v
}

impl TrellisCode {
    /// `generators` are written as decimal literals of their octal digits,
    /// e.g. `[133, 171, 165]`.
    pub fn new(name: &'static str, nu: u32, generators: [u32; 3]) -> Self {
        let taps = generators.map(|g| reverse_bits(octal(g), nu + 1));
        Self {
            name,
            nu,
            generators,
            taps,
        }
    }

    /// 64-state code with generators (133, 171, 165).
    pub fn cc64() -> Self {
        Self::new("cc64", 6, [133, 171, 165])
    }

    /// 1024-state code with generators (2325, 2731, 3747).
    pub fn cc1024() -> Self {
        Self::new("cc1024", 10, [2325, 2731, 3747])
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "cc64" => Some(Self::cc64()),
            "cc1024" => Some(Self::cc1024()),
            _ => None,
        }
    }

    pub fn states(&self) -> usize {
        1 << self.nu
    }

    pub fn taps(&self) -> [u32; 3] {
        self.taps
    }

    /// Output triple for register contents `reg = (state << 1) | input`,
    /// packed as `v0 | v1 << 1 | v2 << 2`.
    #[inline]
    pub fn output(&self, reg: u32) -> u8 {
        let mut o = 0u8;
        for (i, t) in self.taps.iter().enumerate() {
            o |= (((t & reg).count_ones() & 1) as u8) << i;
        }
        o
    }

    /// Tail-biting start state: the last `nu` message bits.
    pub fn tail_state(&self, message: &[u8]) -> u32 {
        let k = message.len();
        (1..=self.nu as usize).fold(0, |s, j| s | ((message[k - j] as u32 & 1) << (j - 1)))
    }

    /// Encodes `k` message bits into `3k` coded bits laid out stream by
    /// stream: entry `i k + t` is output `i` at time `t`.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        let k = message.len();
        if k < self.nu as usize {
            return Err(Error::InvalidArgument(
                "message shorter than the code memory",
            ));
        }
        let mask = (1u32 << self.nu) - 1;
        let mut state = self.tail_state(message);
        let mut out = alloc::vec![0u8; 3 * k];
        for (t, &u) in message.iter().enumerate() {
            let reg = (state << 1) | (u as u32 & 1);
            let o = self.output(reg);
            for i in 0..3 {
                out[i * k + t] = (o >> i) & 1;
            }
            state = reg & mask;
        }
        debug_assert_eq!(state, self.tail_state(message));
        Ok(out)
    }
}
