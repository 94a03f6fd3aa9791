//! Small statistical helpers shared by estimators and the test suites.

/// Streaming mean/variance accumulator (Welford).
#[derive(Debug, Clone, Default)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub replicas: u64,
}

impl EstimateWithError {
    pub fn from_moments(m: &RunningMoments) -> Self {
        EstimateWithError { value: m.mean(), std_error: m.std_error(), replicas: m.count() }
    }

    /// Binomial estimate of a probability from `hits` successes.
    pub fn from_fraction(hits: u64, total: u64) -> Self {
        let p = hits as f64 / total as f64;
        EstimateWithError {
            value: p,
            std_error: (p * (1.0 - p) / total as f64).sqrt(),
            replicas: total,
        }
    }
}

/// Chi-square goodness-of-fit statistic for an observed histogram against a
/// pmf, pooling bins with expected count below `min_expected` into the last
/// open bin. Returns `(chi2, dof)`; dof is bins - 1.
pub fn chi_square_counts<F: Fn(usize) -> f64>(
    hist: &[u32],
    total: f64,
    pmf: F,
    min_expected: f64,
) -> (f64, usize) {
    // pooled bins: walk from 0, pool the sparse upper tail
    let mut chi2 = 0.0;
    let mut bins = 0usize;
    let mut pool_obs = 0.0;
    let mut pool_exp = 0.0;
    let mut tail_p = 1.0;
    for (k, &o) in hist.iter().enumerate() {
        let p = pmf(k);
        tail_p -= p;
        let e = total * p;
        if e >= min_expected && pool_exp == 0.0 {
            chi2 += (o as f64 - e).powi(2) / e;
            bins += 1;
        } else {
            pool_obs += o as f64;
            pool_exp += e;
        }
    }
    pool_exp += total * tail_p.max(0.0);
    if pool_exp > 0.0 {
        chi2 += (pool_obs - pool_exp).powi(2) / pool_exp;
        bins += 1;
    }
    (chi2, bins.saturating_sub(1).max(1))
}

/// Upper quantile of the chi-square distribution via the Wilson-Hilferty
/// normal approximation; adequate for test thresholds.
pub fn chi_square_quantile(p: f64, dof: usize) -> f64 {
    let z = normal_quantile(p);
    let k = dof as f64;
    let t = 1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt();
    k * t * t * t
}

/// Standard normal quantile (Acklam's rational approximation).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

/// Two-sample Kolmogorov-Smirnov statistic (max CDF gap).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// One-sample KS statistic of `xs` against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let mut xs: Vec<f64> = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let c = cdf(x);
        d = d.max((c - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - c).abs());
    }
    d
}

/// Slope of least-squares regression through the origin, with its standard
/// error under homoscedastic residuals.
pub fn regression_through_origin(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = sxy / sxx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x).powi(2)).sum();
    let se = (rss / (xs.len() - 1) as f64 / sxx).sqrt();
    (slope, se)
}

/// Empirical covariance of paired samples, with a jackknife-free standard
/// error from the variance of the per-pair products.
pub fn covariance_with_error(xs: &[f64], ys: &[f64]) -> EstimateWithError {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut prod = RunningMoments::new();
    for (x, y) in xs.iter().zip(ys) {
        prod.push((x - mx) * (y - my));
    }
    EstimateWithError {
        value: prod.mean() * n / (n - 1.0),
        std_error: prod.std_error(),
        replicas: xs.len() as u64,
    }
}
