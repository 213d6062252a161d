use lda_core::rng::substream;
use lda_core::severity::{Severity, SeverityFamily};

fn cases() -> Vec<(SeverityFamily, Vec<f64>, f64)> {
    use SeverityFamily::*;
    vec![
        (Lognormal, vec![0.5, 1.2], 0.0),
        (GeneralizedPareto, vec![1.0, 2.0, 0.4], 0.0),
        (GeneralizedPareto, vec![1.0, 2.0, -0.2], 0.0),
        (Burr, vec![0.07, 12.0, 1.1], 0.0),
        (Burr, vec![2.0, 1.5, 3.0], 0.0),
        (Weibull, vec![0.6, 2.0], 0.0),
        (Weibull, vec![1.7, 1.0], 0.0),
        (Loglogistic, vec![1.8, 2.5], 0.0),
        (GandH, vec![2.0, 1.5, 0.5, 0.2], 0.0),
        (GandH, vec![0.0, 1.0, -0.8, 0.1], 0.0),
        (LogSaS, vec![1.06, 0.37, 1.65, 0.97], 0.0),
        (LogSaS, vec![0.0, 1.0, -0.5, 0.4], 0.0),
        (SplicedLognLogn, vec![0.0, 1.0, 1.0, 1.5, 3.0, 0.7], 0.5),
        (SplicedLognGpd, vec![0.0, 1.0, 2.0, 0.5, 3.0, 0.7], 0.5),
    ]
}

fn build(case: &(SeverityFamily, Vec<f64>, f64)) -> Severity {
    Severity::from_params(case.0, &case.1, case.2).unwrap()
}

fn splice_point(d: &Severity) -> Option<f64> {
    d.family().is_spliced().then(|| d.params()[4])
}

#[test]
fn pdf_matches_cdf_derivative() {
    for case in cases() {
        let d = build(&case);
        for &p in &[0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            let x = d.quantile(p).unwrap();
            if let Some(xs) = splice_point(&d) {
                if (x - xs).abs() < 1e-3 * xs {
                    continue;
                }
            }
            let h = if x == 0.0 { 1e-8 } else { 1e-6 * x.abs() };
            let num = (d.cdf(x + h) - d.cdf(x - h)) / (2.0 * h);
            let pdf = d.pdf(x);
            assert!((pdf - num).abs() <= 1e-5 * pdf.max(1.0), "{:?} x={x} pdf={pdf} num={num}", case);
        }
    }
}

#[test]
fn quantile_round_trips_through_cdf() {
    for case in cases() {
        let d = build(&case);
        for &p in &[1e-6, 1e-3, 0.025, 0.2, 0.5, 0.8, 0.975, 0.999, 1.0 - 1e-6] {
            let x = d.quantile(p).unwrap();
            let back = d.cdf(x);
            assert!((back - p).abs() <= 1e-8, "{:?} p={p} x={x} back={back}", case);
        }
    }
}

#[test]
fn inverse_sf_round_trips_in_far_tail() {
    for case in cases() {
        let d = build(&case);
        for &s in &[1e-4, 1e-8, 1e-12] {
            let x = d.inverse_sf(s).unwrap();
            if !x.is_finite() {
                continue;
            }
            let back = d.sf(x);
            assert!(((back - s) / s).abs() <= 1e-6, "{:?} s={s} x={x} back={back}", case);
        }
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth)
}

#[test]
fn pdf_integrates_to_one() {
    let eps = 1e-7;
    for case in cases() {
        let d = build(&case);
        let mut knots: Vec<f64> = (0..=20)
            .map(|k| eps + (1.0 - 2.0 * eps) * k as f64 / 20.0)
            .map(|p| d.quantile(p).unwrap())
            .collect();
        if let Some(xs) = splice_point(&d) {
            knots.push(xs);
        }
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        // Positive-support families are integrated over ln x.
        let log_scale = knots[0] > 0.0;
        let pdf = |t: f64| if log_scale { d.pdf(t.exp()) * t.exp() } else { d.pdf(t) };
        if log_scale {
            knots.iter_mut().for_each(|k| *k = k.ln());
        }
        let total: f64 = knots.windows(2).map(|w| simpson(&pdf, w[0], w[1], 1e-11, 40)).sum();
        assert!((total - (1.0 - 2.0 * eps)).abs() < 1e-6, "{:?} total={total}", case);
    }
}

fn ks_statistic(d: &Severity, mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = d.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn samplers_pass_ks_smoke_test() {
    let n = 2000;
    let critical = 1.63 / (n as f64).sqrt();
    for (i, case) in cases().iter().enumerate() {
        let d = build(case);
        let mut rng = substream(2024, &[i as u64]);
        let ks = ks_statistic(&d, d.sample(n, &mut rng));
        assert!(ks < critical, "{:?} ks={ks}", case);
    }
}

#[test]
fn logsas_identity_is_lognormal() {
    let ls = Severity::from_params(SeverityFamily::LogSaS, &[0.3, 0.8, 0.0, 1.0], 0.0).unwrap();
    let ln = Severity::from_params(SeverityFamily::Lognormal, &[0.3, 0.8], 0.0).unwrap();
    for i in 1..200 {
        let x = i as f64 * 0.05;
        assert_eq!(ls.pdf(x), ln.pdf(x));
        assert_eq!(ls.cdf(x), ln.cdf(x));
        assert_eq!(ls.sf(x), ln.sf(x));
        let p = i as f64 / 200.0;
        assert_eq!(ls.quantile(p).unwrap(), ln.quantile(p).unwrap());
    }
}

#[test]
fn spliced_cdf_is_continuous_at_splice() {
    for case in cases().into_iter().filter(|c| c.0.is_spliced()) {
        let d = build(&case);
        let xs = case.1[4];
        let above = f64::from_bits(xs.to_bits() + 1);
        assert!((d.cdf(above) - d.cdf(xs)).abs() < 1e-10);
        // Conditional body mass is the body proportion.
        assert!((d.conditional_cdf(xs, case.2) - case.1[5]).abs() < 1e-12);
        assert!((d.cdf(1e300) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn burr_million_draw_check() {
    let d = Severity::from_params(SeverityFamily::Burr, &[0.07, 12.0, 1.1], 0.0).unwrap();
    let mut rng = substream(99, &[]);
    let n = 1_000_000;
    let below = (0..n).filter(|_| d.sample_one(&mut rng) <= 1.1).count() as f64 / n as f64;
    let p = 1.0 - 2f64.powf(-0.07);
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((below - p).abs() < 4.0 * se, "{below} vs {p}");
}

#[test]
fn table_one_thresholds_are_two_and_a_half_percent_quantiles() {
    let burr = Severity::from_params(SeverityFamily::Burr, &[0.07, 12.0, 1.1], 0.0).unwrap();
    assert!((burr.quantile(0.025).unwrap() - 1.026).abs() < 5e-4);
    let lsas = Severity::from_params(SeverityFamily::LogSaS, &[1.06, 0.37, 1.65, 0.97], 0.0).unwrap();
    assert!((lsas.quantile(0.025).unwrap() - 3.147).abs() < 5e-3);
}

#[test]
fn gandh_positive_sampling_tracks_negative_mass() {
    let d = Severity::from_params(SeverityFamily::GandH, &[0.5, 1.0, -0.3, 0.1], 0.0).unwrap();
    let mut rng = substream(3, &[]);
    let (xs, stats) = d.sample_positive(50_000, &mut rng);
    assert!(xs.iter().all(|&x| x > 0.0));
    let p0 = d.prob_nonpositive();
    let se = (p0 * (1.0 - p0) / (stats.accepted + stats.rejected) as f64).sqrt();
    assert!((stats.rejection_fraction() - p0).abs() < 4.0 * se, "{} vs {p0}", stats.rejection_fraction());
}
