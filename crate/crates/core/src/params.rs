//! Delay parameter and seeded random streams.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;

/// Delay-range parameter, kept as an exact fraction `num / den`.
///
/// Random delays are drawn from `0..=floor(size / beta)`; `beta` must exceed `1/e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Beta {
    num: u64,
    den: u64,
}

impl Beta {
    pub fn new(num: u64, den: u64) -> Result<Self, Error> {
        if den == 0 {
            return Err(Error::BadBeta(format!("{num}/{den}")));
        }
        let b = Beta { num, den };
        if b.as_f64() <= std::f64::consts::E.recip() {
            return Err(Error::BetaTooSmall(b.to_string()));
        }
        Ok(b)
    }

    pub fn integer(v: u64) -> Result<Self, Error> {
        Self::new(v, 1)
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `floor(size / beta)`, computed exactly.
    pub fn max_delay(&self, size: u64) -> u64 {
        ((size as u128 * self.den as u128) / self.num as u128) as u64
    }
}

impl Default for Beta {
    fn default() -> Self {
        Beta { num: 2, den: 1 }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Accepts `"2"`, `"3/2"` or a finite decimal such as `"0.75"`.
impl FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::BadBeta(s.to_string());
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse().map_err(|_| bad())?;
            let d = d.trim().parse().map_err(|_| bad())?;
            return Beta::new(n, d);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let den = 10u64.pow(frac.len() as u32);
            let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
            return Beta::new(int * den + frac, den);
        }
        Beta::new(s.parse().map_err(|_| bad())?, 1)
    }
}

/// Stream tags so that unrelated draws never share a ChaCha stream.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum Stream {
    JobDelay = 1,
    PathDelay = 2,
    TreeJobDelay = 3,
    Workload = 4,
    Arrivals = 5,
    Weights = 6,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic generator for `(seed, stream, keys...)`. Adding keys elsewhere
/// never perturbs an existing stream.
pub fn rng_for(seed: u64, stream: Stream, keys: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix(seed ^ splitmix(stream as u64));
    for &k in keys {
        h = splitmix(h ^ splitmix(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    rng.set_stream(stream as u64);
    rng
}
