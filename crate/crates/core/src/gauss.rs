//! Univariate and bivariate standard normal numerics.
//!
//! The bivariate CDF is a port of Genz's BVND (Drezner–Wesolowsky with the
//! double-precision refinements): Gauss–Legendre quadrature along the
//! correlation path for |ρ| < 0.925, and a complementary-variable expansion
//! plus quadrature for |ρ| close to one.
#![allow(clippy::excessive_precision)]

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_94;
const SQRT_2PI: f64 = 2.506_628_274_631_000_502_4;
const TWO_PI: f64 = 2.0 * PI;

/// Tolerance below which a negative rectangle probability is treated as
/// cancellation noise.
pub const RECT_NEGATIVE_TOLERANCE: f64 = 1e-14;

/// Mean vector and correlation of a bivariate normal with unit variances.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BvnParams {
    pub mu1: f64,
    pub mu2: f64,
    pub rho: f64,
}

impl BvnParams {
    pub fn new(mu1: f64, mu2: f64, rho: f64) -> Result<Self> {
        if !mu1.is_finite() || !mu2.is_finite() {
            return Err(Error::Domain("bivariate means must be finite"));
        }
        check_rho(rho)?;
        Ok(Self { mu1, mu2, rho })
    }

    pub fn centered(rho: f64) -> Result<Self> {
        Self::new(0.0, 0.0, rho)
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::Domain("correlation must lie in [-1, 1]"));
    }
    Ok(())
}

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * libm::exp(-0.5 * x * x)
}

/// Standard normal CDF Φ(x), accurate to double precision in both tails.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail 1 - Φ(x) without cancellation.
#[inline]
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Standard normal quantile Φ⁻¹(q).
///
/// Wichura's AS 241 rational approximation followed by one Halley step
/// against [`norm_cdf`].
pub fn norm_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain("quantile level must lie in (0, 1)"));
    }
    let mut x = as241(q);
    // Halley refinement; the residual is taken in the smaller tail.
    let pdf = norm_pdf(x);
    if pdf > 0.0 {
        let resid = if x < 0.0 { norm_cdf(x) - q } else { (1.0 - q) - norm_sf(x) };
        let u = resid / pdf;
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

fn as241(p: f64) -> f64 {
    let q = p - 0.5;
    if libm::fabs(q) <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r
                + 45921.953931549871457)
                * r
                + 13731.693765509461125)
                * r
                + 1971.5909503065514427)
                * r
                + 133.14166789178437745)
                * r
                + 3.387132872796366608)
            / (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r
                + 21213.794301586595867)
                * r
                + 5394.1960214247511077)
                * r
                + 687.1870074920579083)
                * r
                + 42.313330701600911252)
                * r
                + 1.0);
    }
    let r0 = if q < 0.0 { p } else { 1.0 - p };
    let mut r = libm::sqrt(-libm::log(r0));
    let val = if r <= 5.0 {
        r -= 1.6;
        (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r
            + 1.27045825245236838258)
            * r
            + 3.64784832476320460504)
            * r
            + 5.7694972214606914055)
            * r
            + 4.6303378461565452959)
            * r
            + 1.42343711074968357734)
            / (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r
                + 0.14810397642748007459)
                * r
                + 0.68976733498510000455)
                * r
                + 1.6763848301838038494)
                * r
                + 2.05319162663775882187)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r
            + 0.026532189526576123093)
            * r
            + 0.29656057182850489123)
            * r
            + 1.7848265399172913358)
            * r
            + 5.4637849111641143699)
            * r
            + 6.6579046435011037772)
            / (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r
                + 7.868691311456132591e-4)
                * r
                + 0.0148753612908506148525)
                * r
                + 0.13692988092273580531)
                * r
                + 0.59983220655588793769)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

// Gauss–Legendre abscissae (negative half) and weights for N = 6, 12, 20.
const GL6: [(f64, f64); 3] = [
    (0.1713244923791705e+00, -0.9324695142031522e+00),
    (0.3607615730481384e+00, -0.6612093864662647e+00),
    (0.4679139345726904e+00, -0.2386191860831970e+00),
];

const GL12: [(f64, f64); 6] = [
    (0.4717533638651177e-01, -0.9815606342467191e+00),
    (0.1069393259953183e+00, -0.9041172563704750e+00),
    (0.1600783285433464e+00, -0.7699026741943050e+00),
    (0.2031674267230659e+00, -0.5873179542866171e+00),
    (0.2334925365383547e+00, -0.3678314989981802e+00),
    (0.2491470458134029e+00, -0.1252334085114692e+00),
];

const GL20: [(f64, f64); 10] = [
    (0.1761400713915212e-01, -0.9931285991850949e+00),
    (0.4060142980038694e-01, -0.9639719272779138e+00),
    (0.6267204833410906e-01, -0.9122344282513259e+00),
    (0.8327674157670475e-01, -0.8391169718222188e+00),
    (0.1019301198172404e+00, -0.7463319064601508e+00),
    (0.1181945319615184e+00, -0.6360536807265150e+00),
    (0.1316886384491766e+00, -0.5108670019508271e+00),
    (0.1420961093183821e+00, -0.3737060887154196e+00),
    (0.1491729864726037e+00, -0.2277858511416451e+00),
    (0.1527533871307259e+00, -0.7652652113349733e-01),
];

fn quadrature(rho_abs: f64) -> &'static [(f64, f64)] {
    if rho_abs < 0.3 {
        &GL6
    } else if rho_abs < 0.75 {
        &GL12
    } else {
        &GL20
    }
}

/// Upper orthant P(X > h, Y > k) for standard normals with correlation
/// `r`, finite `h`, `k` and |r| < 1.
fn bvnd(h: f64, k: f64, r: f64) -> f64 {
    let quad = quadrature(libm::fabs(r));
    let mut hk = h * k;
    let mut k = k;
    if libm::fabs(r) < 0.925 {
        let hs = 0.5 * (h * h + k * k);
        let asr = libm::asin(r);
        let mut acc = 0.0;
        for &(w, x) in quad {
            for s in [x, -x] {
                let sn = libm::sin(0.5 * asr * (s + 1.0));
                acc += w * libm::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        return acc * asr / (2.0 * TWO_PI) + norm_sf(h) * norm_sf(k);
    }

    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    let mut bvn = 0.0;
    if libm::fabs(r) < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = libm::sqrt(a_s);
        let b_s = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a
            * libm::exp(-0.5 * (b_s / a_s + hk))
            * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        if hk > -160.0 {
            let b = libm::sqrt(b_s);
            bvn -=
                libm::exp(-0.5 * hk) * SQRT_2PI * norm_cdf(-b / a) * b * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
        }
        a *= 0.5;
        for &(w, x) in quad {
            for s in [x, -x] {
                let xs = (a * (s + 1.0)) * (a * (s + 1.0));
                let rs = libm::sqrt(1.0 - xs);
                bvn += a
                    * w
                    * (libm::exp(-b_s / (2.0 * xs) - hk / (1.0 + rs)) / rs
                        - libm::exp(-0.5 * (b_s / xs + hk)) * (1.0 + c * xs * (1.0 + d * xs)));
            }
        }
        bvn = -bvn / TWO_PI;
    }
    if r > 0.0 {
        bvn + norm_sf(h.max(k))
    } else {
        let mut out = -bvn;
        if k > h {
            if h < 0.0 {
                out += norm_cdf(k) - norm_cdf(h);
            } else {
                out += norm_sf(h) - norm_sf(k);
            }
        }
        out
    }
}

/// Bivariate standard normal CDF P(X ≤ h, Y ≤ k) with correlation `rho`.
///
/// Infinite limits are accepted. The cases ρ ∈ {-1, 0, 1} are evaluated in
/// closed form.
pub fn bvn_cdf(h: f64, k: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if h.is_nan() || k.is_nan() {
        return Err(Error::Domain("bivariate limits must not be NaN"));
    }
    if h == f64::NEG_INFINITY || k == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if h == f64::INFINITY {
        return Ok(norm_cdf(k));
    }
    if k == f64::INFINITY {
        return Ok(norm_cdf(h));
    }
    let p = if rho == 0.0 {
        norm_cdf(h) * norm_cdf(k)
    } else if rho == 1.0 {
        norm_cdf(h.min(k))
    } else if rho == -1.0 {
        (norm_cdf(h) - norm_sf(k)).max(0.0)
    } else {
        bvnd(-h, -k, rho)
    };
    Ok(p.clamp(0.0, 1.0))
}

/// P(a1 < Z1 ≤ b1, a2 < Z2 ≤ b2) for a unit-variance bivariate normal.
///
/// Evaluated by inclusion–exclusion over [`bvn_cdf`]. Negative results down
/// to `-RECT_NEGATIVE_TOLERANCE` are cancellation noise and clamp to zero;
/// anything lower is reported as [`Error::NegativeProbability`].
pub fn bvn_rect_prob(a1: f64, b1: f64, a2: f64, b2: f64, params: &BvnParams) -> Result<f64> {
    check_rho(params.rho)?;
    if !(a1 <= b1 && a2 <= b2) {
        return Err(Error::Domain("rectangle bounds inverted"));
    }
    if a1 == b1 || a2 == b2 {
        return Ok(0.0);
    }
    let (m1, m2, r) = (params.mu1, params.mu2, params.rho);
    let f = |x: f64, y: f64| bvn_cdf(x - m1, y - m2, r);
    let p = f(b1, b2)? - f(a1, b2)? - f(b1, a2)? + f(a1, a2)?;
    if p < -RECT_NEGATIVE_TOLERANCE {
        return Err(Error::NegativeProbability(p));
    }
    Ok(p.clamp(0.0, 1.0))
}
