//! Quantile functions for the normal, χ², F and Hotelling T² distributions.
//!
//! Every quantile except the normal one is obtained by bracketing and
//! bisecting the corresponding CDF, which in turn is evaluated through the
//! regularized incomplete gamma and beta functions in [`special`]. Upper
//! quantiles are solved against the survival function so that arguments
//! such as `1 − 5e-6` keep their precision.

pub mod special;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A probability strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidProbability(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 − p`.
    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    let (_, q) = special::gamma_pq(0.5, 0.5 * x * x);
    if x < 0.0 {
        0.5 * q
    } else {
        1.0 - 0.5 * q
    }
}

/// Standard normal survival function `1 − Φ(x)`.
pub fn normal_sf(x: f64) -> f64 {
    normal_cdf(-x)
}

/// Inverse of the standard normal CDF (Wichura's AS 241, then one Halley
/// step against [`normal_cdf`]).
pub fn normal_inv_cdf(p: Probability) -> f64 {
    let p = p.value();
    let x = ppnd16(p);
    // Halley refinement
    let err = if x < 0.0 {
        normal_cdf(x) - p
    } else {
        (1.0 - p) - normal_sf(x)
    };
    let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if pdf > 0.0 {
        let u = err / pdf;
        x - u / (1.0 + 0.5 * x * u)
    } else {
        x
    }
}

fn ppnd16(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_5,
        133.141_667_891_784_37,
        1_971.590_950_306_551_4,
        13_731.693_765_509_461,
        45_921.953_931_549_87,
        67_265.770_927_008_7,
        33_430.575_583_588_13,
        2_509.080_928_730_122_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_91,
        687.187_007_492_057_9,
        5_394.196_021_424_751,
        21_213.794_301_586_597,
        39_307.895_800_092_71,
        28_729.085_735_721_943,
        5_226.495_278_852_546,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_5,
        4.630_337_846_156_545,
        5.769_497_221_460_691,
        3.647_848_324_763_204_5,
        1.270_458_252_452_368_4,
        0.241_780_725_177_450_6,
        0.022_723_844_989_269_184,
        7.745_450_142_783_414e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_759,
        1.676_384_830_183_803_8,
        0.689_767_334_985_1,
        0.148_103_976_427_480_07,
        0.015_198_666_563_616_457,
        5.475_938_084_995_345e-4,
        1.050_750_071_644_416_8e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103,
        5.463_784_911_164_114,
        1.784_826_539_917_291_3,
        0.296_560_571_828_504_9,
        0.026_532_189_526_576_124,
        0.001_242_660_947_388_078_4,
        2.711_555_568_743_487_6e-5,
        2.010_334_399_292_288_1e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_9,
        0.136_929_880_922_735_8,
        0.014_875_361_290_850_615,
        7.868_691_311_456_133e-4,
        1.846_318_317_510_054_8e-5,
        1.421_511_758_316_446e-7,
        2.044_263_103_389_939_7e-15,
    ];
    fn poly(c: &[f64; 8], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
    }

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// χ² CDF and survival function with `k` degrees of freedom.
pub fn chi2_cdf_sf(k: u32, x: f64) -> (f64, f64) {
    special::gamma_pq(0.5 * k as f64, 0.5 * x)
}

/// F CDF and survival function with `(d1, d2)` degrees of freedom.
pub fn f_cdf_sf(d1: u32, d2: u32, x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    let (d1, d2) = (d1 as f64, d2 as f64);
    let denom = d1 * x + d2;
    special::beta_iy(0.5 * d1, 0.5 * d2, d1 * x / denom, d2 / denom)
}

/// `p`-th quantile of the χ² distribution with `k` degrees of freedom.
pub fn chi2_quantile(k: u32, p: Probability) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroDegreesOfFreedom);
    }
    // Wilson–Hilferty starting point
    let kf = k as f64;
    let z = normal_inv_cdf(p);
    let h = 2.0 / (9.0 * kf);
    let guess = (kf * (1.0 - h + z * h.sqrt()).powi(3)).max(1e-3);
    Ok(invert_cdf(|x| chi2_cdf_sf(k, x), p, guess))
}

/// `p`-th quantile of the F distribution with `(d1, d2)` degrees of freedom.
pub fn f_quantile(d1: u32, d2: u32, p: Probability) -> Result<f64> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::ZeroDegreesOfFreedom);
    }
    Ok(invert_cdf(|x| f_cdf_sf(d1, d2, x), p, 1.0))
}

/// `p`-th quantile of Hotelling's T² distribution with dimension `n` and
/// `m` degrees of freedom, via `T² = n·m/(m−n+1) · F(n, m−n+1)`.
pub fn hotelling_t2_quantile(n: u32, m: u32, p: Probability) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(Error::ZeroDegreesOfFreedom);
    }
    if m < n {
        return Err(Error::InsufficientSamples {
            dimension: n as usize,
            dof: m as usize,
        });
    }
    let d2 = m - n + 1;
    let scale = n as f64 * m as f64 / d2 as f64;
    Ok(scale * f_quantile(n, d2, p)?)
}

/// Solves `cdf(x) = p` on `[0, ∞)` for a continuous increasing CDF that
/// returns `(cdf, sf)` pairs.
fn invert_cdf(cdf_sf: impl Fn(f64) -> (f64, f64), p: Probability, guess: f64) -> f64 {
    let upper_tail = p.value() > 0.5;
    let target = if upper_tail {
        p.complement().value()
    } else {
        p.value()
    };
    // true when x lies below the quantile
    let below = |x: f64| {
        let (c, s) = cdf_sf(x);
        if upper_tail {
            s > target
        } else {
            c < target
        }
    };

    let mut lo = 0.0;
    let mut hi = guess.max(f64::MIN_POSITIVE);
    if below(hi) {
        lo = hi;
        hi *= 2.0;
        while below(hi) {
            lo = hi;
            hi *= 2.0;
        }
    } else {
        let mut probe = hi * 0.5;
        while probe > 1e-300 && !below(probe) {
            hi = probe;
            probe *= 0.5;
        }
        if probe > 1e-300 {
            lo = probe;
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
