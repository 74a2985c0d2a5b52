//! Small numeric helpers shared across modules.

/// Neumaier compensated accumulator. Keeps running sums accurate to a few
/// ulps even over millions of terms of mixed magnitude.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Kahan::default()
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

/// exp(p * log_h) with the convention 0 * -inf = -inf (h = 0 gives 0).
pub fn pow_from_log(log_h: f64, p: f64) -> f64 {
    if log_h == f64::NEG_INFINITY {
        return if p == 0.0 { 1.0 } else { 0.0 };
    }
    (p * log_h).exp()
}

/// 1 - h^p computed as -expm1(p * log h); exact near h^p = 1.
pub fn one_minus_pow(log_h: f64, p: f64) -> f64 {
    if log_h == f64::NEG_INFINITY {
        return if p == 0.0 { 0.0 } else { 1.0 };
    }
    -(p * log_h).exp_m1()
}
