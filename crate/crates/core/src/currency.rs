use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Three-letter currency code, stored upper-case.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Currency([u8; 3]);

impl Currency {
    pub const CHF: Currency = Currency(*b"CHF");
    pub const EUR: Currency = Currency(*b"EUR");
    pub const SGD: Currency = Currency(*b"SGD");

    pub fn code(&self) -> &str {
        // constructed only from ASCII letters
        std::str::from_utf8(&self.0).expect("ascii currency code")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid currency code {0:?}: expected three ASCII letters")]
pub struct InvalidCurrency(pub String);

impl FromStr for Currency {
    type Err = InvalidCurrency;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.trim().as_bytes();
        if bytes.len() != 3 || !bytes.iter().all(u8::is_ascii_alphabetic) {
            return Err(InvalidCurrency(s.to_string()));
        }
        let mut code = [0u8; 3];
        for (dst, src) in code.iter_mut().zip(bytes) {
            *dst = src.to_ascii_uppercase();
        }
        Ok(Currency(code))
    }
}

impl fmt::Display for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl fmt::Debug for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl Serialize for Currency {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for Currency {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Exchange rates against the numeraire: units of each currency per one unit
/// of numeraire. The numeraire itself carries rate 1.
///
/// Entries are kept sorted by currency so iteration order is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rates {
    numeraire: Currency,
    entries: Vec<(Currency, f64)>,
}

impl Rates {
    pub fn new(numeraire: Currency) -> Self {
        Self {
            numeraire,
            entries: vec![(numeraire, 1.0)],
        }
    }

    /// Sets the rate for `currency`; setting the numeraire is ignored.
    pub fn with(mut self, currency: Currency, rate: f64) -> Self {
        self.set(currency, rate);
        self
    }

    pub fn set(&mut self, currency: Currency, rate: f64) {
        if currency == self.numeraire {
            return;
        }
        match self.entries.binary_search_by_key(&currency, |(c, _)| *c) {
            Ok(i) => self.entries[i].1 = rate,
            Err(i) => self.entries.insert(i, (currency, rate)),
        }
    }

    pub fn numeraire(&self) -> Currency {
        self.numeraire
    }

    pub fn get(&self, currency: Currency) -> Option<f64> {
        self.entries
            .binary_search_by_key(&currency, |(c, _)| *c)
            .ok()
            .map(|i| self.entries[i].1)
    }

    /// Units of `quote` per one unit of `base`.
    pub fn cross(&self, base: Currency, quote: Currency) -> Option<f64> {
        Some(self.get(quote)? / self.get(base)?)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Currency, f64)> + '_ {
        self.entries.iter().copied()
    }

    /// Standard CHF-numeraire rates with CHF-EUR `s` and CHF-SGD `p`.
    pub fn chf(s: f64, p: f64) -> Self {
        Self::new(Currency::CHF)
            .with(Currency::EUR, s)
            .with(Currency::SGD, p)
    }
}
