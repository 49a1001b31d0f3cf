//! Small numerical helpers shared across the crate: compensated summation,
//! stable log-space accumulation, and least-squares slopes for trend tables.

/// Kahan–Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `log(exp(a) + exp(b))` without overflow; tolerates `-inf` on either side.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let mut s = Kahan::new();
    for &x in xs {
        s.add((x - m).exp());
    }
    m + s.value().ln()
}

/// Ratio `num/den` for positive quantities carried both in linear and log
/// form. Falls back to the log route when the linear values are out of safe
/// range or more than thirty orders of magnitude apart.
pub fn stable_ratio(num: f64, den: f64, log_num: f64, log_den: f64) -> f64 {
    const THIRTY_ORDERS: f64 = 30.0 * std::f64::consts::LN_10;
    if num <= f64::MIN_POSITIVE || den <= f64::MIN_POSITIVE || (log_num - log_den).abs() > THIRTY_ORDERS {
        (log_num - log_den).exp()
    } else {
        num / den
    }
}

/// Relative difference `|x - y| / max(|x|, |y|)`; zero when both vanish.
pub fn rel_err(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

/// Least-squares slope of `ln y` against `ln x`.
///
/// Points with non-positive coordinates are rejected.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut k = Kahan::new();
        k.add(1.0);
        for _ in 0..1000 {
            k.add(1e-18);
        }
        assert!((k.value() - (1.0 + 1000.0 * 1e-18)).abs() < 1e-19);
    }

    #[test]
    fn log_add_exp_handles_neg_inf() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, -3.0), -3.0);
        let v = log_add_exp(0.0, 0.0);
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn stable_ratio_survives_underflow() {
        // both quantities underflow f64 but their ratio is 2
        let r = stable_ratio(0.0, 0.0, -2000.0 + std::f64::consts::LN_2, -2000.0);
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..=6).map(|i| (2f64.powi(i), 3.0 * 2f64.powi(-i))).collect();
        let s = loglog_slope(&pts).unwrap();
        assert!((s + 1.0).abs() < 1e-12);
    }
}
