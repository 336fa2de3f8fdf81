//! Secret strings, query strings, and the spring-balance function.
//!
//! Bit strings use the puzzle's index convention: bit 1 is the rightmost
//! character of the written string. Internally bit `i` (1-based) lives at
//! slice index `i - 1`, so `"0011"` stores `[true, true, false, false]`.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

fn parse_bits(text: &str) -> Result<Vec<bool>> {
    if text.is_empty() {
        return Err(Error::InvalidBitString("empty string".into()));
    }
    let mut bits = Vec::with_capacity(text.len());
    // Rightmost character is bit 1, so walk the text in reverse.
    for c in text.chars().rev() {
        match c {
            '0' => bits.push(false),
            '1' => bits.push(true),
            other => {
                return Err(Error::InvalidBitString(format!(
                    "unexpected character {other:?}"
                )))
            }
        }
    }
    Ok(bits)
}

fn format_bits(bits: &[bool]) -> String {
    bits.iter().rev().map(|&b| if b { '1' } else { '0' }).collect()
}

/// The hidden bit string every solver tries to recover. 1 bits are the
/// defective positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SecretString {
    bits: Vec<bool>,
}

impl SecretString {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidBitString("length must be at least 1".into()));
        }
        Ok(Self { bits })
    }

    /// Secret of length `n` with 1 bits exactly at the given 1-based indices.
    pub fn from_defects(n: usize, defects: &[usize]) -> Result<Self> {
        let mut bits = vec![false; n.max(1)];
        if n == 0 {
            return Err(Error::InvalidBitString("length must be at least 1".into()));
        }
        for &i in defects {
            if i == 0 || i > n {
                return Err(Error::Domain(format!("defect index {i} out of range 1..={n}")));
            }
            bits[i - 1] = true;
        }
        Ok(Self { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Value of bit `i`, 1-based.
    pub fn bit(&self, i: usize) -> bool {
        self.bits[i - 1]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of 1 bits (the set {d}).
    pub fn defect_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// 1-based indices of the 1 bits, ascending.
    pub fn defect_indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i + 1))
            .collect()
    }
}

impl FromStr for SecretString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(Self { bits: parse_bits(s)? })
    }
}

impl fmt::Display for SecretString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_bits(&self.bits))
    }
}

/// Selects which positions a single test touches: bit `i` set means
/// position `i` is included in the weighing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueryString {
    bits: Vec<bool>,
}

impl QueryString {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidBitString("length must be at least 1".into()));
        }
        Ok(Self { bits })
    }

    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![false; n] }
    }

    pub fn ones(n: usize) -> Self {
        Self { bits: vec![true; n] }
    }

    /// Query touching only position `i` (1-based).
    pub fn singleton(n: usize, i: usize) -> Self {
        Self::from_indices(n, std::iter::once(i))
    }

    /// Query with 1 bits at the given 1-based indices.
    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = vec![false; n];
        for i in indices {
            bits[i - 1] = true;
        }
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i - 1]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

impl FromStr for QueryString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(Self { bits: parse_bits(s)? })
    }
}

impl fmt::Display for QueryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_bits(&self.bits))
    }
}

/// The spring-balance reading: number of defective positions touched by the
/// query, i.e. the Hamming weight of `x AND s`.
pub fn spring_balance(s: &SecretString, x: &QueryString) -> Result<u32> {
    if s.len() != x.len() {
        return Err(Error::LengthMismatch { expected: s.len(), actual: x.len() });
    }
    Ok(s.bits
        .iter()
        .zip(&x.bits)
        .filter(|&(&si, &xi)| si && xi)
        .count() as u32)
}

/// Wraps a secret behind a weigh-only surface and counts every query.
#[derive(Debug)]
pub struct CountingOracle {
    secret: SecretString,
    query_count: u64,
}

impl CountingOracle {
    pub fn new(secret: SecretString) -> Self {
        Self { secret, query_count: 0 }
    }

    /// Length of the sealed secret.
    pub fn len(&self) -> usize {
        self.secret.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Issues one weighing. Every call costs exactly one query.
    pub fn weigh(&mut self, x: &QueryString) -> Result<u32> {
        let f = spring_balance(&self.secret, x)?;
        self.query_count += 1;
        Ok(f)
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> SecretString {
        text.parse().unwrap()
    }

    fn q(text: &str) -> QueryString {
        text.parse().unwrap()
    }

    #[test]
    fn bit_order_matches_written_convention() {
        let secret = s("0011");
        assert!(secret.bit(1));
        assert!(secret.bit(2));
        assert!(!secret.bit(3));
        assert!(!secret.bit(4));
        assert_eq!(secret.defect_indices(), vec![1, 2]);
    }

    #[test]
    fn display_round_trips() {
        for text in ["0011", "100000000000", "1", "0", "10110"] {
            assert_eq!(s(text).to_string(), text);
            assert_eq!(q(text).to_string(), text);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!("".parse::<SecretString>().is_err());
        assert!("01x1".parse::<SecretString>().is_err());
    }

    #[test]
    fn worked_example_s0011() {
        let secret = s("0011");
        assert_eq!(spring_balance(&secret, &q("1011")).unwrap(), 2);
        assert_eq!(spring_balance(&secret, &q("1100")).unwrap(), 0);
    }

    #[test]
    fn all_zero_and_all_one_queries() {
        let secret = s("10110");
        assert_eq!(spring_balance(&secret, &QueryString::zeros(5)).unwrap(), 0);
        assert_eq!(
            spring_balance(&secret, &QueryString::ones(5)).unwrap(),
            secret.defect_count() as u32
        );
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(spring_balance(&s("0011"), &q("101")).is_err());
    }

    #[test]
    fn oracle_counts_every_weigh() {
        let mut oracle = CountingOracle::new(s("0011"));
        assert_eq!(oracle.query_count(), 0);
        assert_eq!(oracle.weigh(&q("1011")).unwrap(), 2);
        assert_eq!(oracle.query_count(), 1);
        for _ in 0..6 {
            oracle.weigh(&q("1100")).unwrap();
        }
        assert_eq!(oracle.query_count(), 7);
    }

    #[test]
    fn monotone_and_additive_over_disjoint_queries() {
        let secret = s("0110101");
        let a = q("0000101");
        let b = q("0110000");
        let union = q("0110101");
        let fa = spring_balance(&secret, &a).unwrap();
        let fb = spring_balance(&secret, &b).unwrap();
        let fu = spring_balance(&secret, &union).unwrap();
        assert_eq!(fa + fb, fu);
        assert!(fa <= fu && fb <= fu);
    }
}
