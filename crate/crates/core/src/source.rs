//! Memoryless sources with exact rational letter probabilities.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceModel {
    alphabet: Vec<String>,
    probs: Vec<BigRational>,
}

impl SourceModel {
    pub fn new(pairs: Vec<(String, BigRational)>) -> Result<Self> {
        let mut alphabet = Vec::with_capacity(pairs.len());
        let mut probs = Vec::with_capacity(pairs.len());
        for (sym, p) in pairs {
            if alphabet.contains(&sym) {
                return Err(Error::Source(format!("symbol `{sym}` listed twice")));
            }
            if p.is_negative() {
                return Err(Error::Source(format!("negative probability for `{sym}`")));
            }
            alphabet.push(sym);
            probs.push(p);
        }
        if alphabet.is_empty() {
            return Err(Error::Source("empty source".into()));
        }
        let total: BigRational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::Source(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { alphabet, probs })
    }

    pub fn uniform<S: AsRef<str>>(alphabet: &[S]) -> Result<Self> {
        let p = BigRational::new(BigInt::one(), BigInt::from(alphabet.len().max(1)));
        Self::new(
            alphabet
                .iter()
                .map(|s| (s.as_ref().to_owned(), p.clone()))
                .collect(),
        )
    }

    /// Parses `uniform` (over `alphabet`) or `sym:p,sym:p,...` with rational `p`.
    pub fn parse<S: AsRef<str>>(spec: &str, alphabet: &[S]) -> Result<Self> {
        let spec = spec.trim();
        if spec == "uniform" {
            return Self::uniform(alphabet);
        }
        let mut pairs = Vec::new();
        for item in spec.split(',') {
            let (sym, p) = item
                .split_once(':')
                .ok_or_else(|| Error::Source(format!("expected `symbol:probability`, got `{item}`")))?;
            let p = parse_rational(p.trim())?;
            pairs.push((sym.trim().to_owned(), p));
        }
        Self::new(pairs)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn probabilities(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn probability(&self, sym: &str) -> Option<&BigRational> {
        self.alphabet.iter().position(|a| a == sym).map(|i| &self.probs[i])
    }

    /// Probabilities reordered to `alphabet`, which must contain exactly the
    /// source's symbols.
    pub fn aligned<S: AsRef<str>>(&self, alphabet: &[S]) -> Result<Vec<BigRational>> {
        let mismatch = || Error::AlphabetMismatch {
            source_alphabet: self.alphabet.clone(),
            graph_alphabet: alphabet.iter().map(|s| s.as_ref().to_owned()).collect(),
        };
        if alphabet.len() != self.alphabet.len() {
            return Err(mismatch());
        }
        alphabet
            .iter()
            .map(|s| self.probability(s.as_ref()).cloned().ok_or_else(mismatch))
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(rational_to_f64).collect()
    }

    /// Shannon entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.to_f64()
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum()
    }

    pub fn is_equiprobable(&self) -> bool {
        self.probs.windows(2).all(|w| w[0] == w[1])
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    if let Some((int, frac)) = s.split_once('.') {
        if !frac.is_empty() && frac.chars().all(|c| c.is_ascii_digit()) {
            let digits = format!("{int}{frac}");
            let num = BigInt::from_str(&digits)
                .map_err(|_| Error::Source(format!("invalid probability `{s}`")))?;
            let den = num_traits::pow(BigInt::from(10), frac.len());
            return Ok(BigRational::new(num, den));
        }
    }
    BigRational::from_str(s).map_err(|_| Error::Source(format!("invalid probability `{s}`")))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Decimal expansion rounded half away from zero to `places` digits.
pub fn decimal(r: &BigRational, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = r.abs() * BigRational::from_integer(scale.clone());
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let rounded = (scaled + half).floor().to_integer();
    let int_part = &rounded / &scale;
    let frac_part = &rounded % &scale;
    let sign = if r.is_negative() && !rounded.is_zero() { "-" } else { "" };
    if places == 0 {
        return format!("{sign}{int_part}");
    }
    format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = places)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parse_specs() {
        let s = SourceModel::parse("uniform", &["a", "b", "c", "d"]).unwrap();
        assert_eq!(s.probabilities(), &[q(1, 4), q(1, 4), q(1, 4), q(1, 4)]);
        assert!(s.is_equiprobable());
        assert!((s.entropy_bits() - 2.0).abs() < 1e-12);

        let s = SourceModel::parse("a:1/2, b:1/2", &["a", "b"]).unwrap();
        assert_eq!(s.probability("b"), Some(&q(1, 2)));

        let s = SourceModel::parse("a:0.25,b:3/4", &["a", "b"]).unwrap();
        assert_eq!(s.probability("a"), Some(&q(1, 4)));

        assert!(SourceModel::parse("a:1/2,b:1/3", &["a", "b"]).is_err());
        assert!(SourceModel::parse("a:-1/2,b:3/2", &["a", "b"]).is_err());
        assert!(SourceModel::parse("a:1/2,a:1/2", &["a"]).is_err());
        assert!(SourceModel::parse("a=1", &["a"]).is_err());
        assert!(SourceModel::parse("a:x", &["a"]).is_err());
    }

    #[test]
    fn alignment() {
        let s = SourceModel::parse("b:1/3,a:2/3", &["a", "b"]).unwrap();
        assert_eq!(s.aligned(&["a", "b"]).unwrap(), vec![q(2, 3), q(1, 3)]);
        assert!(matches!(
            s.aligned(&["a", "b", "c"]),
            Err(Error::AlphabetMismatch { .. })
        ));
        assert!(matches!(s.aligned(&["a", "c"]), Err(Error::AlphabetMismatch { .. })));
    }

    #[test]
    fn decimals() {
        assert_eq!(decimal(&q(452, 1809), 10), "0.2498618021");
        assert_eq!(decimal(&q(1, 6), 10), "0.1666666667");
        assert_eq!(decimal(&q(0, 1), 3), "0.000");
        assert_eq!(decimal(&q(1, 1), 2), "1.00");
        assert_eq!(decimal(&q(-1, 8), 2), "-0.13");
        assert_eq!(decimal(&q(7, 2), 0), "4");
    }
}
