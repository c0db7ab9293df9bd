//! Descriptive statistics shared by the metric and survey modules.
//!
//! All functions return `None` on empty input.

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    Some(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Sample standard deviation (n − 1 denominator); zero for a single value.
pub fn sample_stdev(xs: &[f64]) -> Option<f64> {
    let m = mean(xs)?;
    if xs.len() == 1 {
        return Some(0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Quantile of already sorted data by linear interpolation between order
/// statistics at zero-indexed position `p·(n−1)`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

pub fn quantile(xs: &[f64], p: f64) -> Option<f64> {
    quantile_sorted(&sorted(xs), p)
}

/// Middle order statistic, or the midpoint of the two central ones.
pub fn median(xs: &[f64]) -> Option<f64> {
    quantile(xs, 0.5)
}

/// Mean after dropping `floor(fraction·n)` values from each tail.
pub fn trimmed_mean(xs: &[f64], fraction: f64) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let v = sorted(xs);
    let k = trim_count(v.len(), fraction);
    mean(&v[k..v.len() - k])
}

/// Values dropped per tail. The epsilon keeps exact products such as `0.1 · 30`
/// from flooring one short.
pub fn trim_count(n: usize, fraction: f64) -> usize {
    let k = (fraction * n as f64 + 1e-9).floor() as usize;
    // at least one value must survive
    k.min(n.saturating_sub(1) / 2)
}
