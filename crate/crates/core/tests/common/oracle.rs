//! Brute-force value functions for the builtin benchmarks.

use std::collections::HashMap;

/// Mars1D by enumeration over a 0.5 action grid. Moves are clamped to the box.
pub struct MarsDp {
    pub step: f64,
    pub amax: f64,
    pub lo: f64,
    pub hi: f64,
    memo: HashMap<(usize, i64, bool, bool), f64>,
}

impl MarsDp {
    pub fn new(step: f64) -> Self {
        MarsDp {
            step,
            amax: 20.0,
            lo: -100.0,
            hi: 100.0,
            memo: HashMap::new(),
        }
    }

    /// Reward and next booleans of moving by `a` from `(x, tp1, tp2)`.
    pub fn reward(x: f64, tp1: bool, tp2: bool, a: f64) -> (f64, bool, bool) {
        let n1 = tp1 || (x > 40.0 && x < 60.0);
        let n2 = tp2 || (x > -60.0 && x < -40.0);
        let r1 = if n1 && !tp1 && x > 50.0 {
            40.0 - 0.2 * (x - 50.0)
        } else if n1 && !tp1 && x < 50.0 {
            40.0 - 0.2 * (50.0 - x)
        } else if n1 && tp1 {
            1.1
        } else {
            -2.0
        };
        let r2 = if n2 && !tp2 && x > -50.0 {
            60.0 - 0.2 * (-x + 50.0)
        } else if n2 && !tp2 && x < -50.0 {
            60.0 - 0.2 * (x + 50.0)
        } else if n2 && tp2 {
            1.2
        } else {
            -1.0
        };
        (r1 + r2 - 0.1 * a.abs(), n1, n2)
    }

    pub fn value(&mut self, h: usize, x: f64, tp1: bool, tp2: bool) -> f64 {
        if h == 0 {
            return 0.0;
        }
        // sums along different action orders differ in the last bits
        let key = (h, (x * 1e6).round() as i64, tp1, tp2);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let n = (self.amax / self.step).round() as i64;
        let mut best = f64::NEG_INFINITY;
        for k in -n..=n {
            let a = k as f64 * self.step;
            let (r, n1, n2) = Self::reward(x, tp1, tp2, a);
            let next = (x + a).clamp(self.lo, self.hi);
            best = best.max(r + self.value(h - 1, next, n1, n2));
        }
        self.memo.insert(key, best);
        best
    }
}

/// One-step inventory value for a single resource: expected sales.
pub fn inventory_one_step(x: f64) -> f64 {
    0.6 * x.min(150.0) + 0.4 * x.min(50.0)
}
