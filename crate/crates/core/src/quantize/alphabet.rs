use crate::error::{invalid, Result};

/// The `2L`-level midrise alphabet `{a * delta : a = -2L+1, -2L+3, ..., 2L-1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Alphabet {
    levels_per_side: u32,
    delta: f64,
}

impl Alphabet {
    pub fn new(levels_per_side: u32, delta: f64) -> Result<Self> {
        if levels_per_side == 0 {
            return Err(invalid("alphabet needs L >= 1"));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(invalid(format!("alphabet spacing must be positive, got {delta}")));
        }
        Ok(Self {
            levels_per_side,
            delta,
        })
    }

    /// The 1-bit alphabet `{-1, +1}`.
    pub fn binary() -> Self {
        Self {
            levels_per_side: 1,
            delta: 1.0,
        }
    }

    /// `L`.
    pub fn levels_per_side(&self) -> u32 {
        self.levels_per_side
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Total number of levels, `2L`.
    pub fn len(&self) -> usize {
        2 * self.levels_per_side as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn largest(&self) -> f64 {
        f64::from(2 * self.levels_per_side - 1) * self.delta
    }

    /// All levels in increasing order.
    pub fn levels(&self) -> Vec<f64> {
        let top = 2 * self.levels_per_side as i64 - 1;
        (-top..=top)
            .step_by(2)
            .map(|a| a as f64 * self.delta)
            .collect()
    }

    pub fn contains(&self, value: f64) -> bool {
        let a = (value / self.delta).round();
        a * self.delta == value
            && (a as i64).rem_euclid(2) == 1
            && a.abs() <= f64::from(2 * self.levels_per_side - 1)
    }

    /// Nearest level to `w`. Ties go to the larger level.
    pub fn nearest(&self, w: f64) -> f64 {
        let top = f64::from(2 * self.levels_per_side - 1);
        let t = w / self.delta;
        // Odd integer o with t in [o - 1, o + 1).
        let odd = 2.0 * (t / 2.0).floor() + 1.0;
        odd.clamp(-top, top) * self.delta
    }
}
