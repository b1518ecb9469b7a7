use alloc::vec::Vec;

/// Uniformly sampled forcing `f(k · dt)`, read back piecewise-linearly and
/// held at the last sample beyond the end.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSeries {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl ForcingSeries {
    pub fn new(dt: f64, values: Vec<f64>) -> Self {
        Self { dt, values }
    }

    pub fn zeros(dt: f64, duration: f64) -> Self {
        Self { dt, values: alloc::vec![0.0; samples(duration, dt)] }
    }

    pub fn constant(dt: f64, duration: f64, value: f64) -> Self {
        Self { dt, values: alloc::vec![value; samples(duration, dt)] }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { dt: self.dt, values: self.values.iter().map(|v| v * factor).collect() }
    }

    pub fn at(&self, t: f64) -> f64 {
        let n = self.values.len();
        if n == 0 {
            return 0.0;
        }
        let s = t / self.dt;
        if s <= 0.0 {
            return self.values[0];
        }
        let k = libm::floor(s) as usize;
        if k + 1 >= n {
            return self.values[n - 1];
        }
        let w = s - k as f64;
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }
}

/// Number of grid samples covering `[0, duration]` at step `dt`.
pub fn samples(duration: f64, dt: f64) -> usize {
    libm::round(duration / dt) as usize + 1
}
