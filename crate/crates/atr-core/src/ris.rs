//! Binary RIS configuration words.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Configuration of an L-element RIS with binary phase control.
///
/// Bit `0` is reflection coefficient `+1` (phase 0°), bit `1` is `-1`
/// (phase 180°). Ordering follows the panel's element order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RisConfig {
    bits: Vec<bool>,
}

impl RisConfig {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// All-zero word (every element at +1).
    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, index: usize) -> bool {
        self.bits[index]
    }

    /// Flips every element; an involution.
    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Reflection coefficient of element `index`: `+1.0` or `-1.0`.
    pub fn reflection_coefficient(&self, index: usize) -> f64 {
        if self.bits[index] {
            -1.0
        } else {
            1.0
        }
    }

    /// `"0101..."` in element order.
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bit_string(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parameter(format!(
                    "invalid character {other:?} in RIS bit string"
                ))),
            })
            .collect::<Result<Vec<bool>>>()?;
        Ok(Self { bits })
    }

    /// Hex form, 4 bits per nibble in element order, zero-padded at the end.
    pub fn to_hex_string(&self) -> String {
        self.bits
            .chunks(4)
            .map(|chunk| {
                let mut nibble = 0u8;
                for (i, &b) in chunk.iter().enumerate() {
                    if b {
                        nibble |= 1 << (3 - i);
                    }
                }
                char::from_digit(nibble as u32, 16).unwrap()
            })
            .collect()
    }
}

impl fmt::Display for RisConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

impl Serialize for RisConfig {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_bit_string())
    }
}

impl<'de> Deserialize<'de> for RisConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        RisConfig::from_bit_string(&s).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_involution() {
        let c = RisConfig::from_bit_string("0110100111010001").unwrap();
        assert_eq!(c.complement().complement(), c);
    }

    #[test]
    fn reflection_coefficients_map_bits() {
        let c = RisConfig::from_bit_string("01").unwrap();
        assert_eq!(c.reflection_coefficient(0), 1.0);
        assert_eq!(c.reflection_coefficient(1), -1.0);
    }

    #[test]
    fn bit_string_round_trip() {
        let s = "1010011100001111";
        let c = RisConfig::from_bit_string(s).unwrap();
        assert_eq!(c.to_bit_string(), s);
        assert!(RisConfig::from_bit_string("01x0").is_err());
    }

    #[test]
    fn hex_string_packs_in_element_order() {
        let c = RisConfig::from_bit_string("10100111").unwrap();
        assert_eq!(c.to_hex_string(), "a7");
        // Trailing partial nibble pads with zeros.
        let c = RisConfig::from_bit_string("101001").unwrap();
        assert_eq!(c.to_hex_string(), "a4");
    }
}
