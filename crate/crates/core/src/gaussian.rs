//! Standard-normal special functions and the Gaussian deficit map.
//!
//! The deficit map `F(b) = φ(b)/Φ(−b) − b` sends a Gaussian reliability
//! index to the normalized expected failure deficit it implies. It is
//! strictly decreasing on `(0, ∞)` with image `(0, 2/√(2π))`, so it can be
//! inverted on that interval; the inverse is the severity-aware index.

use crate::error::{Error, Result};

/// `1/√(2π)`.
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Supremum of the deficit map, `2/√(2π) = √(2/π)`.
///
/// Normalized deficits at or beyond this value have no Gaussian equivalent.
pub const GAUSSIAN_ENDPOINT: f64 = 0.797_884_560_802_865_4;

/// Above this point the Mills ratio is evaluated by continued fraction
/// instead of the ratio `φ(b)/Φ(−b)`.
pub const MILLS_SWITCH: f64 = 8.0;

// Depth of the backward continued-fraction evaluation. At b = 8 the
// truncation error is far below one ulp.
const CF_DEPTH: u32 = 160;

/// A normalized deficit known to lie inside the invertible range
/// `(0, 2/√(2π))`.
///
/// Values below [`MIN_DEFICIT`] are rejected too: their root `b ≈ 1/y`
/// does not fit in an `f64`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DeficitDomain(f64);

/// Smallest invertible normalized deficit (the bisection bracket is `2/y`).
pub const MIN_DEFICIT: f64 = 4.0 / f64::MAX;

impl DeficitDomain {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Domain(format!(
                "normalized deficit must be positive and finite, got {value}"
            )));
        }
        if value >= GAUSSIAN_ENDPOINT {
            return Err(Error::OutOfGaussianDomain(value));
        }
        if value < MIN_DEFICIT {
            return Err(Error::Domain(format!(
                "normalized deficit {value:e} is too small: its index overflows f64"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF, evaluated through `½·erfc(−x/√2)` so the lower tail
/// keeps full relative precision down to about `x = −37`.
#[allow(non_snake_case)]
pub fn Phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Upper tail `P(Z > x) = Φ(−x)`.
pub fn upper_tail(x: f64) -> f64 {
    Phi(-x)
}

/// Standard normal quantile.
///
/// Wichura's AS241 rational approximations followed by one Halley step
/// against [`Phi`].
#[allow(non_snake_case)]
pub fn Phi_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "probability must lie strictly inside (0, 1), got {p}"
        )));
    }
    // Work on the smaller tail; 1 − p is exact for p ≥ 0.5.
    let tail = if p < 0.5 { p } else { 1.0 - p };
    let mut x = as241(tail);
    // Halley refinement on the lower tail, where Phi has full relative accuracy.
    let err = Phi(x) - tail;
    let u = err / phi(x);
    if u.is_finite() {
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(if p < 0.5 { x } else { -x })
}

// Lower-tail AS241 (PPND16). Returns a value <= 0 for p <= 0.5.
fn as241(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((r * 2509.080_928_730_122_7 + 33430.575_583_588_13) * r
            + 67265.770_927_008_7)
            * r
            + 45921.953_931_549_87)
            * r
            + 13731.693_765_509_461)
            * r
            + 1971.590_950_306_551_3)
            * r
            + 133.141_667_891_784_38)
            * r
            + 3.387_132_872_796_366_5;
        let den = ((((((r * 5226.495_278_852_546 + 28729.085_735_721_943) * r
            + 39307.895_800_092_71)
            * r
            + 21213.794_301_586_597)
            * r
            + 5394.196_021_424_751)
            * r
            + 687.187_007_492_057_9)
            * r
            + 42.313_330_701_600_91)
            * r
            + 1.0;
        return q * num / den;
    }
    let mut r = (-p.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((r * 7.745_450_142_783_414e-4 + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((r * 1.050_750_071_644_416_9e-9 + 5.475_938_084_995_345e-4) * r
            + 0.015_198_666_563_616_457)
            * r
            + 0.148_103_976_427_480_08)
            * r
            + 0.689_767_334_985_1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((r * 2.010_334_399_292_288e-7 + 2.711_555_568_743_487_6e-5) * r
            + 0.001_242_660_947_388_078_4)
            * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((r * 2.044_263_103_389_939_7e-15 + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 0.014_875_361_290_850_615)
            * r
            + 0.136_929_880_922_735_8)
            * r
            + 0.599_832_206_555_888)
            * r
            + 1.0;
        num / den
    };
    -val
}

/// Continued fraction `1/(b + 2/(b + 3/(b + …)))`, which equals
/// `r(b) − b` for the Mills-ratio conditional mean `r`.
fn mills_tail_fraction(b: f64) -> f64 {
    let mut t = b;
    for k in (2..=CF_DEPTH).rev() {
        t = b + f64::from(k) / t;
    }
    1.0 / t
}

/// Conditional mean of a standard normal truncated below at `b`,
/// `r(b) = E[Z | Z > b] = φ(b)/Φ(−b)`.
///
/// For `b ≥ 8` the ratio of two tiny numbers is replaced by the continued
/// fraction of Mills' ratio. Below about `b = −38` the density underflows
/// and the result is 0.
pub fn mills_conditional_mean(b: f64) -> f64 {
    if b >= MILLS_SWITCH {
        b + mills_tail_fraction(b)
    } else {
        phi(b) / upper_tail(b)
    }
}

// Deficit map on the closed half-line; F(0) is the endpoint.
fn deficit_map_unchecked(b: f64) -> f64 {
    if b >= MILLS_SWITCH {
        mills_tail_fraction(b)
    } else {
        phi(b) / upper_tail(b) - b
    }
}

fn require_positive(b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "reliability index must be positive and finite, got {b}"
        )))
    }
}

/// The Gaussian deficit map `F(b) = r(b) − b`.
pub fn deficit_map(b: f64) -> Result<f64> {
    require_positive(b)?;
    Ok(deficit_map_unchecked(b))
}

/// Derivative of the deficit map, `F'(b) = r(b)·F(b) − 1`.
///
/// Equivalently `−Var(Z | Z > b)`, hence always negative.
pub fn deficit_map_derivative(b: f64) -> Result<f64> {
    require_positive(b)?;
    Ok(derivative_unchecked(b))
}

fn derivative_unchecked(b: f64) -> f64 {
    let f = deficit_map_unchecked(b);
    (b + f) * f - 1.0
}

/// Absolute tolerance on `|F(b) − y|` accepted by [`invert_deficit_map`].
pub const INVERSION_TOLERANCE: f64 = 1e-12;
const MAX_NEWTON_STEPS: usize = 100;

/// Solves `F(b) = y` for the unique positive `b`.
///
/// Newton steps are taken inside a shrinking bisection bracket and replaced
/// by bisection whenever they leave it. The search starts at `1/y` for
/// small `y` (where `F(b) ≈ 1/b`) and at the bracket midpoint otherwise.
pub fn invert_deficit_map(y: DeficitDomain) -> f64 {
    let y = y.value();
    let mut lo = 0.0_f64;
    let mut hi = (2.0 / y).max(40.0);
    let mut x = if y < 0.2 {
        1.0 / y
    } else {
        0.5 * (1e-8 + 40.0)
    };

    for _ in 0..MAX_NEWTON_STEPS {
        let res = deficit_map_unchecked(x) - y;
        if res == 0.0 {
            return x;
        }
        if res > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - res / derivative_unchecked(x);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x.max(f64::MIN_POSITIVE) {
            break;
        }
    }

    // Bisection fallback if Newton stalled short of the residual target.
    let mut guard = 0;
    while (deficit_map_unchecked(x) - y).abs() > INVERSION_TOLERANCE && guard < 200 {
        if deficit_map_unchecked(x) > y {
            lo = x;
        } else {
            hi = x;
        }
        x = 0.5 * (lo + hi);
        guard += 1;
    }
    x
}

/// Convenience wrapper: validates `y` and inverts.
pub fn invert_deficit(y: f64) -> Result<f64> {
    DeficitDomain::new(y).map(invert_deficit_map)
}
