//! Standard normal helpers built on `libm`.

#[allow(unused_imports)]
use num_traits::Float;

pub(crate) const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Standard normal density.
#[inline]
pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI).exp()
}

#[inline]
pub fn norm_ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// Standard normal CDF, accurate in the lower tail.
#[inline]
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal survival function `1 - Φ(z)`, accurate in the upper tail.
#[inline]
pub fn norm_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// `ln(1 - Φ(z))`. Beyond z = 5 it uses the Laplace continued fraction, so it
/// stays accurate where the survival probability itself underflows.
pub fn norm_ln_sf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z < 5.0 {
        return norm_sf(z).ln();
    }
    if z == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    // 1 - Φ(z) = φ(z) / (z + 1/(z + 2/(z + 3/(z + ...))))
    let mut frac = z;
    for k in (1..=40).rev() {
        frac = z + k as f64 / frac;
    }
    norm_ln_pdf(z) - frac.ln()
}

/// `ln Φ(z)`, accurate deep in the lower tail.
#[inline]
pub fn norm_ln_cdf(z: f64) -> f64 {
    norm_ln_sf(-z)
}

/// Inverse of the standard normal CDF (Wichura, AS 241, PPND16).
///
/// Returns `-inf`/`inf` at 0 and 1 and NaN outside `[0, 1]`.
pub fn norm_quantile(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2509.080_928_730_122_7 * r + 33430.575_583_588_128) * r
                + 67265.770_927_008_700)
                * r
                + 45921.953_931_549_871)
                * r
                + 13731.693_765_509_461)
                * r
                + 1971.590_950_306_551_3)
                * r
                + 133.141_667_891_784_38)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((5226.495_278_852_545_4 * r + 28729.085_735_721_943) * r
                + 39307.895_800_092_710)
                * r
                + 21213.794_301_586_595)
                * r
                + 5394.196_021_424_751)
                * r
                + 687.187_007_492_057_9)
                * r
                + 42.313_330_701_600_911)
                * r
                + 1.0);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        (((((((7.745_450_142_783_414e-4 * r + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
                + 0.015_198_666_563_616_457)
                * r
                + 0.148_103_976_427_480_08)
                * r
                + 0.689_767_334_985_100_0)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
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
            + 6.657_904_643_501_103)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
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
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Inverse of the standard normal survival function, `Φ⁻¹(1 - s)` without
/// forming `1 - s`.
#[inline]
pub fn norm_sf_inv(s: f64) -> f64 {
    -norm_quantile(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((norm_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-15);
        assert!((norm_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
        assert!((norm_quantile(0.025) + 1.959_963_984_540_054).abs() < 1e-14);
        assert!((norm_quantile(1e-10) + 6.361_340_902_404_056).abs() < 1e-12);
        assert_eq!(norm_quantile(0.5), 0.0);
        assert!(norm_quantile(1.5).is_nan());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let mut p = 1e-300_f64;
        while p < 0.5 {
            let z = norm_quantile(p);
            let back = norm_cdf(z);
            assert!(((back - p) / p).abs() < 1e-12, "p={p} back={back}");
            p *= 3.7;
        }
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            assert!((norm_cdf(norm_quantile(p)) - p).abs() < 1e-15);
        }
    }

    #[test]
    fn tails_are_symmetric() {
        for &z in &[0.3, 2.0, 7.5, 20.0] {
            assert_eq!(norm_sf(z), norm_cdf(-z));
        }
    }

    #[test]
    fn log_tail_matches_direct_and_survives_underflow() {
        for &z in &[-3.0, 0.0, 4.9, 5.0, 6.0, 10.0, 25.0, 35.0] {
            let direct = norm_sf(z).ln();
            assert!((norm_ln_sf(z) - direct).abs() < 1e-12 * direct.abs().max(1.0), "z={z}");
        }
        // Mills ratio asymptotics at z = 40, where 1 - Φ(z) is subnormal.
        let z = 40.0_f64;
        let series = norm_ln_pdf(z) - z.ln() + (1.0 - 1.0 / (z * z) + 3.0 / z.powi(4) - 15.0 / z.powi(6)).ln();
        assert!((norm_ln_sf(z) - series).abs() < 1e-10);
        assert!(norm_ln_sf(1e3).is_finite());
        assert_eq!(norm_ln_cdf(-6.0), norm_ln_sf(6.0));
    }
}
