//! Test-only quadrature oracles, independent of the production algorithms.

use crate::gauss::{norm_cdf, norm_pdf};

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * K15_WEIGHTS[7];
    let mut g = fc * G7_WEIGHTS[3];
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += K15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G7_WEIGHTS[i / 2] * s;
        }
    }
    (k * h, libm::fabs((k - g) * h))
}

/// Adaptive Gauss–Kronrod 7/15 on a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth > 40 || (b - a) < 1e-12 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    rec(f, a, b, tol, 0)
}

/// Φ2(h, k; ρ) from the conditional form ∫ φ(x) Φ((k - ρx)/√(1-ρ²)) dx.
pub fn bvn_cdf_conditional(h: f64, k: f64, rho: f64) -> f64 {
    let s = libm::sqrt(1.0 - rho * rho);
    let lo = -40.0f64;
    let hi = h.min(40.0);
    if hi <= lo {
        return 0.0;
    }
    integrate(&|x: f64| norm_pdf(x) * norm_cdf((k - rho * x) / s), lo, hi, 1e-16)
}

/// Bivariate normal density with unit variances.
pub fn bvn_density(x: f64, y: f64, mx: f64, my: f64, rho: f64) -> f64 {
    let (u, v) = (x - mx, y - my);
    let det = 1.0 - rho * rho;
    libm::exp(-(u * u - 2.0 * rho * u * v + v * v) / (2.0 * det)) / (2.0 * core::f64::consts::PI * libm::sqrt(det))
}

/// Nested 2-D adaptive quadrature of the density over [x0, x1] × [y0, y1].
#[allow(clippy::too_many_arguments)]
pub fn bvn_box_2d(x0: f64, x1: f64, y0: f64, y1: f64, mx: f64, my: f64, rho: f64, tol: f64) -> f64 {
    integrate(&|x: f64| integrate(&|y: f64| bvn_density(x, y, mx, my, rho), y0, y1, tol * 1e-2), x0, x1, tol)
}
