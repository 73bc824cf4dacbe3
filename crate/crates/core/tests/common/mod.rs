//! Test-only oracles that never touch the library's special functions.
//!
//! CDFs are obtained by adaptive Gauss–Kronrod quadrature of unnormalized
//! densities written in `s = sqrt(x)` coordinates; the normalizing constant is
//! itself a quadrature, so no gamma or beta function is involved.
#![allow(dead_code)]

pub mod instances;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn gk21(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for i in 0..10 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (val, err) = gk21(f, a, b);
    if err <= tol || err <= 1e-14 * val.abs() || depth == 0 {
        return val;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, 0.5 * tol, depth - 1) + adaptive(f, m, b, 0.5 * tol, depth - 1)
}

/// ∫ₐᵇ f with breakpoints every `step` to help locate narrow peaks.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, step: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let pieces = (((b - a) / step).ceil() as usize).clamp(1, 4000);
    let w = (b - a) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let lo = a + w * k as f64;
            let hi = if k + 1 == pieces { b } else { lo + w };
            adaptive(f, lo, hi, 1e-16, 30)
        })
        .sum()
}

/// ∫ₐ^∞ f via `s = a + t/(1−t)`.
pub fn integrate_to_inf(f: &dyn Fn(f64) -> f64, a: f64, scale: f64) -> f64 {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let s = a + scale * t / (1.0 - t);
        f(s) * scale / ((1.0 - t) * (1.0 - t))
    };
    integrate(&g, 0.0, 1.0, 0.02)
}

/// A density in `s`-coordinates with a known peak location and width, used
/// to split the quadrature.
pub struct SDensity<'a> {
    pub g: Box<dyn Fn(f64) -> f64 + 'a>,
    pub peak: f64,
    pub width: f64,
}

impl SDensity<'_> {
    /// (CDF, SF) at `s`.
    pub fn cdf_sf(&self, s: f64) -> (f64, f64) {
        let s = s.max(0.0);
        let hi = (self.peak + 60.0 * self.width).max(s);
        let below = integrate(&*self.g, 0.0, s, self.width);
        let above = integrate(&*self.g, s, hi, self.width)
            + integrate_to_inf(&*self.g, hi, 10.0 * self.width);
        let total = below + above;
        (below / total, above / total)
    }
}

/// χ²ₖ expressed through `s = sqrt(x)`: density ∝ s^{k−1} e^{−s²/2}.
pub fn chi2_density(k: u32) -> SDensity<'static> {
    let kf = k as f64;
    let peak = (kf - 1.0).max(0.0).sqrt();
    let log_peak = if k > 1 { (kf - 1.0) * peak.ln() - 0.5 * peak * peak } else { 0.0 };
    SDensity {
        g: Box::new(move |s: f64| {
            if s <= 0.0 {
                return if k == 1 { 1.0 } else { 0.0 };
            }
            ((kf - 1.0) * s.ln() - 0.5 * s * s - log_peak).exp()
        }),
        peak,
        width: 1.0,
    }
}

/// F(d1, d2) through `s = sqrt(x)`: density ∝ s^{d1−1} (1 + d1 s²/d2)^{−(d1+d2)/2}.
pub fn f_density(d1: u32, d2: u32) -> SDensity<'static> {
    let (a, b) = (d1 as f64, d2 as f64);
    let log_g = move |s: f64| (a - 1.0) * s.ln() - 0.5 * (a + b) * (a * s * s / b).ln_1p();
    // mode of the s-density
    let peak = if d1 > 1 { ((a - 1.0) * b / (a * (b + 1.0))).sqrt() } else { 0.0 };
    let ref_point = if d1 > 1 { log_g(peak) } else { 0.0 };
    let width = (2.0 / a).sqrt().min(1.0) * 0.5;
    SDensity {
        g: Box::new(move |s: f64| {
            if s <= 0.0 {
                return if d1 == 1 { 1.0 } else { 0.0 };
            }
            (log_g(s) - ref_point).exp()
        }),
        peak: peak.max(1.0),
        width,
    }
}

pub fn chi2_cdf(k: u32, x: f64) -> (f64, f64) {
    chi2_density(k).cdf_sf(x.max(0.0).sqrt())
}

pub fn f_cdf(d1: u32, d2: u32, x: f64) -> (f64, f64) {
    f_density(d1, d2).cdf_sf(x.max(0.0).sqrt())
}

/// Standard normal (CDF, SF) by quadrature of the density.
pub fn normal_cdf(x: f64) -> (f64, f64) {
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let tail = integrate_to_inf(&phi, x.abs(), 1.0);
    if x >= 0.0 {
        (1.0 - tail, tail)
    } else {
        (tail, 1.0 - tail)
    }
}

/// Bisection of an oracle CDF for `cdf(x) = p`, using the survival side for
/// `p > 0.5`.
pub fn bisect_quantile(cdf_sf: impl Fn(f64) -> (f64, f64), p: f64, mut lo: f64, mut hi: f64) -> f64 {
    let upper = p > 0.5;
    let below = |x: f64| {
        let (c, s) = cdf_sf(x);
        if upper {
            s > 1.0 - p
        } else {
            c < p
        }
    };
    while !below(lo) {
        lo -= (hi - lo).max(1.0);
    }
    while below(hi) {
        hi += (hi - lo).max(1.0);
    }
    for _ in 0..200 {
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

/// `|C(q) − p|` measured on the side of the distribution that carries `p`.
pub fn roundtrip_error(cdf_sf: (f64, f64), p: f64) -> f64 {
    if p > 0.5 {
        (cdf_sf.1 - (1.0 - p)).abs()
    } else {
        (cdf_sf.0 - p).abs()
    }
}
