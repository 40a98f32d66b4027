//! Sample statistics, Student-t intervals and sequential precision stopping.

use rand::RngCore;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("probability must lie in (0, 1), got {0}")]
    Probability(f64),
    #[error("degrees of freedom must be >= 1, got {0}")]
    DegreesOfFreedom(f64),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid precision policy: {0}")]
    Policy(&'static str),
}

/// Natural log of the gamma function (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Student-t CDF with `df` degrees of freedom.
pub fn t_cdf(t: f64, df: f64) -> f64 {
    let x = df / (df + t * t);
    let tail = 0.5 * inc_beta(0.5 * df, 0.5, x);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Student-t quantile: the `t` with `P(T <= t) = prob`.
pub fn t_quantile(prob: f64, df: f64) -> Result<f64, StatsError> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(StatsError::Probability(prob));
    }
    if !(df >= 1.0 && df.is_finite()) {
        return Err(StatsError::DegreesOfFreedom(df));
    }
    if prob == 0.5 {
        return Ok(0.0);
    }
    if prob < 0.5 {
        return t_quantile(1.0 - prob, df).map(|t| -t);
    }
    // Upper-tail mass, computed directly to keep precision for prob near 1.
    let target = 1.0 - prob;
    let upper = |t: f64| 0.5 * inc_beta(0.5 * df, 0.5, df / (df + t * t));
    let mut hi = 1.0;
    while upper(hi) > target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if upper(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn std_dev(samples: &[f64]) -> f64 {
    let m = mean(samples);
    let ss: f64 = samples.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (samples.len() as f64 - 1.0)).sqrt()
}

/// Sample mean and the full width of its two-sided t confidence interval.
pub fn mean_and_ci(samples: &[f64], confidence: f64) -> Result<(f64, f64), StatsError> {
    let n = samples.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples(n));
    }
    let t = t_quantile(0.5 * (1.0 + confidence), (n - 1) as f64)?;
    let width = 2.0 * t * std_dev(samples) / (n as f64).sqrt();
    Ok((mean(samples), width))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrecisionPolicy {
    pub confidence: f64,
    /// Stop once `W / mean <= delta`.
    pub delta: f64,
    pub max_n: usize,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self {
            confidence: 0.95,
            delta: 0.05,
            max_n: 100,
        }
    }
}

impl PrecisionPolicy {
    pub fn validate(&self) -> Result<(), StatsError> {
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(StatsError::Policy("confidence must lie in (0, 1)"));
        }
        if !(self.delta > 0.0) {
            return Err(StatsError::Policy("delta must be positive"));
        }
        if self.max_n < 3 {
            return Err(StatsError::Policy("max_n must be >= 3"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub n: usize,
    pub mean: f64,
    pub width: f64,
    pub samples: Vec<f64>,
    /// False when `max_n` was hit before the precision target.
    pub precise: bool,
}

impl ReplicateSummary {
    pub fn relative_width(&self) -> f64 {
        self.width / self.mean.abs().max(f64::MIN_POSITIVE)
    }
}

/// Replicates `evaluator` until the confidence interval is tight relative to
/// the mean: two runs, then one more run per check.
///
/// Seeds come from `seeds`, one `next_u64` per replicate.
pub fn run_until_precise<F, R>(
    evaluator: F,
    seeds: &mut R,
    policy: &PrecisionPolicy,
) -> Result<ReplicateSummary, StatsError>
where
    F: FnMut(u64) -> f64,
    R: RngCore + ?Sized,
{
    run_until_precise_with(evaluator, |&x| x, seeds, policy).map(|(s, _)| s)
}

/// Like [`run_until_precise`] but keeps every replicate's full output;
/// `metric` extracts the value the stopping rule watches.
pub fn run_until_precise_with<T, F, M, R>(
    mut evaluator: F,
    metric: M,
    seeds: &mut R,
    policy: &PrecisionPolicy,
) -> Result<(ReplicateSummary, Vec<T>), StatsError>
where
    F: FnMut(u64) -> T,
    M: Fn(&T) -> f64,
    R: RngCore + ?Sized,
{
    policy.validate()?;
    let mut outputs = Vec::new();
    let mut samples = Vec::new();
    let mut run = |outputs: &mut Vec<T>, samples: &mut Vec<f64>| {
        let out = evaluator(seeds.next_u64());
        samples.push(metric(&out));
        outputs.push(out);
    };
    run(&mut outputs, &mut samples);
    run(&mut outputs, &mut samples);
    loop {
        run(&mut outputs, &mut samples);
        let (mean, width) = mean_and_ci(&samples, policy.confidence)?;
        let rel = width / mean.abs().max(f64::MIN_POSITIVE);
        let precise = rel <= policy.delta;
        if precise || samples.len() >= policy.max_n {
            let summary = ReplicateSummary {
                n: samples.len(),
                mean,
                width,
                samples,
                precise,
            };
            return Ok((summary, outputs));
        }
    }
}
