//! Parameter grids `min:max:n` and comma-separated number lists.

use std::str::FromStr;

/// Inclusive grid of `n` points; `n = 1` needs `min = max`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Grid {
    /// `t_i = (min·(n−1−i) + max·i)/(n−1)`, which hits both ends and any
    /// exactly representable midpoint such as 0 on a symmetric range.
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        let m = (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                let i = i as f64;
                (self.min * (m - i) + self.max * i) / m
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, n] = parts[..] else {
            return Err(format!("grid {s:?} is not of the form min:max:n"));
        };
        let min: f64 = min.trim().parse().map_err(|_| format!("bad grid minimum {min:?}"))?;
        let max: f64 = max.trim().parse().map_err(|_| format!("bad grid maximum {max:?}"))?;
        let n: usize = n.trim().parse().map_err(|_| format!("bad grid size {n:?}"))?;
        if !min.is_finite() || !max.is_finite() {
            return Err("grid bounds must be finite".into());
        }
        match n {
            0 => Err("grid size must be at least 1".into()),
            1 if min != max => Err("a one-point grid needs min = max".into()),
            _ if min > max => Err("grid minimum exceeds maximum".into()),
            _ => Ok(Grid { min, max, n }),
        }
    }
}

/// Comma-separated finite numbers.
pub fn parse_numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| {
            let v: f64 = x.trim().parse().map_err(|_| format!("bad number {x:?}"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("non-finite number {x:?}"))
            }
        })
        .collect()
}
