//! Bit-level gene representation.
//!
//! Every synaptic weight lives in the chromosome as a raw IEEE-754 binary32
//! word. Genetic operators work on those words directly, so this module also
//! owns the [`ProtectionPolicy`] that keeps the high-order bits out of reach.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SIGN_BIT: u32 = 31;
pub const EXPONENT_SHIFT: u32 = 23;
pub const EXPONENT_MASK: u32 = 0xFF;
pub const MANTISSA_MASK: u32 = 0x007F_FFFF;
pub const EXPONENT_BIAS: i32 = 127;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("cannot encode non-finite value {0}")]
    NonFiniteInput(f32),
    #[error("gene {0} has an all-ones exponent (NaN/Inf)")]
    NonFiniteGene(GeneBits),
    #[error("protected bit count must be 2 or 3, got {0}")]
    InvalidProtection(u32),
}

/// One synaptic weight as a binary32 bit pattern.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeneBits(u32);

impl GeneBits {
    /// Wraps a raw word without checking it. Use [`decode_gene`] to validate.
    pub const fn from_bits(bits: u32) -> Self {
        GeneBits(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub const fn sign(self) -> u32 {
        self.0 >> SIGN_BIT
    }

    pub const fn exponent(self) -> u32 {
        (self.0 >> EXPONENT_SHIFT) & EXPONENT_MASK
    }

    pub const fn mantissa(self) -> u32 {
        self.0 & MANTISSA_MASK
    }

    /// Reassembles a word from its three fields. Out-of-range field values are masked.
    pub const fn from_parts(sign: u32, exponent: u32, mantissa: u32) -> Self {
        GeneBits(
            ((sign & 1) << SIGN_BIT)
                | ((exponent & EXPONENT_MASK) << EXPONENT_SHIFT)
                | (mantissa & MANTISSA_MASK),
        )
    }

    pub const fn is_finite(self) -> bool {
        self.exponent() != EXPONENT_MASK
    }

    /// True when the decoded magnitude is below 2, i.e. bit 30 is clear.
    pub const fn is_below_two(self) -> bool {
        self.0 & (1 << 30) == 0
    }

    pub const fn with_bit_flipped(self, index: u32) -> Self {
        GeneBits(self.0 ^ (1 << index))
    }
}

impl fmt::Display for GeneBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08X}", self.0)
    }
}

impl fmt::Debug for GeneBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GeneBits({:08X})", self.0)
    }
}

impl std::str::FromStr for GeneBits {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let s = s
            .strip_prefix("0x")
            .or_else(|| s.strip_prefix("0X"))
            .unwrap_or(s);
        u32::from_str_radix(s, 16).map(GeneBits)
    }
}

pub fn encode_gene(value: f32) -> Result<GeneBits, CodecError> {
    if !value.is_finite() {
        return Err(CodecError::NonFiniteInput(value));
    }
    Ok(GeneBits(value.to_bits()))
}

pub fn decode_gene(gene: GeneBits) -> Result<f32, CodecError> {
    if !gene.is_finite() {
        return Err(CodecError::NonFiniteGene(gene));
    }
    Ok(f32::from_bits(gene.0))
}

/// Number of most-significant bits that crossover and mutation never touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct ProtectionPolicy {
    protected_msb_count: u32,
}

impl ProtectionPolicy {
    /// Sign plus the two top exponent bits: 29 mutable bits.
    pub const THREE: ProtectionPolicy = ProtectionPolicy {
        protected_msb_count: 3,
    };
    /// Sign plus the top exponent bit: 30 mutable bits.
    pub const TWO: ProtectionPolicy = ProtectionPolicy {
        protected_msb_count: 2,
    };

    pub fn new(protected_msb_count: u32) -> Result<Self, CodecError> {
        match protected_msb_count {
            2 => Ok(Self::TWO),
            3 => Ok(Self::THREE),
            n => Err(CodecError::InvalidProtection(n)),
        }
    }

    pub const fn protected_msb_count(self) -> u32 {
        self.protected_msb_count
    }

    pub const fn mutable_bit_count(self) -> u32 {
        32 - self.protected_msb_count
    }

    pub const fn mutable_mask(self) -> u32 {
        (1u32 << self.mutable_bit_count()) - 1
    }

    /// Exclusive magnitude bound below which a gene can never be driven to
    /// an all-ones exponent by operators confined to the mutable bits.
    ///
    /// With two protected bits that needs bit 30 clear (|v| < 2). With three,
    /// bits 30 and 29 must not both be set, i.e. exponent <= 191 (|v| < 2^65).
    pub fn max_safe_magnitude(self) -> f64 {
        match self.protected_msb_count {
            2 => 2.0,
            _ => 2f64.powi(65),
        }
    }
}

impl Default for ProtectionPolicy {
    fn default() -> Self {
        Self::THREE
    }
}

impl TryFrom<u32> for ProtectionPolicy {
    type Error = CodecError;

    fn try_from(value: u32) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<ProtectionPolicy> for u32 {
    fn from(p: ProtectionPolicy) -> u32 {
        p.protected_msb_count
    }
}

/// Bit indices operators may touch, LSB = 0.
pub fn mutable_bit_indices(policy: ProtectionPolicy) -> Range<u32> {
    0..policy.mutable_bit_count()
}
