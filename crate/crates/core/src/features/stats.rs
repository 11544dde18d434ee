use super::FeatureError;

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population standard deviation.
pub fn signal_stddev(samples: &[f64]) -> Result<f64, FeatureError> {
    if samples.len() < 2 {
        return Err(FeatureError::TooShort {
            needed: 2,
            got: samples.len(),
        });
    }
    let m = mean(samples);
    let var = samples.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / samples.len() as f64;
    Ok(var.sqrt())
}

/// Pearson product-moment correlation, clamped to `[-1, 1]`.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64, FeatureError> {
    if x.len() != y.len() {
        return Err(FeatureError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(FeatureError::TooShort {
            needed: 2,
            got: x.len(),
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(FeatureError::ConstantInput);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson (non-excess) kurtosis `m4 / m2^2`; a Gaussian gives 3.
pub fn kurtosis(samples: &[f64]) -> Result<f64, FeatureError> {
    if samples.len() < 4 {
        return Err(FeatureError::TooShort {
            needed: 4,
            got: samples.len(),
        });
    }
    let m = mean(samples);
    let (mut m2, mut m4) = (0.0, 0.0);
    for v in samples {
        let d2 = (v - m) * (v - m);
        m2 += d2;
        m4 += d2 * d2;
    }
    let n = samples.len() as f64;
    m2 /= n;
    m4 /= n;
    if m2 == 0.0 {
        return Err(FeatureError::ConstantInput);
    }
    Ok(m4 / (m2 * m2))
}
