//! Two-sample Kolmogorov–Smirnov test and moment helpers.

/// Result of a two-sample KS test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Values closer than `1e-9·(1 + max|v|)` count as ties, so that a constant
/// law perturbed by rounding is not reported as different.
pub fn tie_tolerance(a: &[f64], b: &[f64]) -> f64 {
    let m = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    1e-9 * (1.0 + m)
}

/// Two-sample KS statistic with the asymptotic Kolmogorov p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    if a.is_empty() || b.is_empty() || a.iter().chain(b).any(|v| !v.is_finite()) {
        return KsResult { statistic: f64::NAN, p_value: 0.0 };
    }
    let tol = tie_tolerance(a, b);
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < x.len() || j < y.len() {
        let next = match (x.get(i), y.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        let limit = next + tol;
        while i < x.len() && x[i] <= limit {
            i += 1;
        }
        while j < y.len() && y[j] <= limit {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    let en = (n1 * n2 / (n1 + n2)).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    KsResult { statistic: d, p_value: kolmogorov_q(lambda) }
}

/// Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} exp(−2j²λ²).
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// (1/n) Σ (x − center)^k for k = 1..=4.
pub fn central_moments(xs: &[f64], center: f64) -> [f64; 4] {
    let mut m = [0.0; 4];
    for &x in xs {
        let d = x - center;
        let mut p = 1.0;
        for slot in m.iter_mut() {
            p *= d;
            *slot += p;
        }
    }
    m.map(|s| s / xs.len() as f64)
}

/// Pearson correlation; NaN when either sample is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn ks_identical_and_disjoint() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let r = ks_two_sample(&a, &a);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let b: Vec<f64> = (0..100).map(|i| 1000.0 + i as f64).collect();
        let r = ks_two_sample(&a, &b);
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value < 1e-20);
    }

    #[test]
    fn ks_hand_computed() {
        // empirical CDFs differ most after 3: 3/4 − 1/4
        let r = ks_two_sample(&[1.0, 2.0, 3.0, 7.0], &[2.5, 4.0, 5.0, 6.0]);
        assert!((r.statistic - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ties_within_rounding() {
        let a = vec![1.0; 50];
        let b: Vec<f64> = (0..50).map(|i| 1.0 + (i as f64) * 1e-15).collect();
        assert_eq!(ks_two_sample(&a, &b).statistic, 0.0);
    }

    #[test]
    fn kolmogorov_values() {
        // Q(1.0) ≈ 0.27, Q(1.36) ≈ 0.049, Q(1.63) ≈ 0.0098
        assert!((kolmogorov_q(1.0) - 0.2700).abs() < 1e-3);
        assert!((kolmogorov_q(1.36) - 0.0494).abs() < 1e-3);
        assert!((kolmogorov_q(1.628) - 0.0100).abs() < 5e-4);
    }

    #[test]
    fn ks_null_calibration() {
        let mut rejections = 0;
        for s in 0..200u64 {
            let mut rng = crate::par::rng_for(s, 42, 0);
            let a: Vec<f64> = (0..300).map(|_| rng.sample(StandardNormal)).collect();
            let b: Vec<f64> = (0..300).map(|_| rng.sample(StandardNormal)).collect();
            if ks_two_sample(&a, &b).p_value < 0.05 {
                rejections += 1;
            }
        }
        assert!(rejections <= 22, "{rejections}");
    }

    #[test]
    fn moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(central_moments(&xs, 2.5), [0.0, 1.25, 0.0, 2.5625]);
        assert!((pearson(&xs, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-15);
        assert!(pearson(&xs, &[1.0; 4]).is_nan());
    }
}
