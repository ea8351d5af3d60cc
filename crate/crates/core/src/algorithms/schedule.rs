use crate::error::{invalid, Result};

/// Round lengths for batch pure exploration.
///
/// `q_0 = 1`, `q_r = ⌈√(T q_{r−1})⌉` and `t_r = ⌈q_r + u⌉`, with the last
/// round cut so that the lengths sum to `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundSchedule {
    pub q: Vec<u64>,
    pub t: Vec<u64>,
    pub u: f64,
    pub horizon: u64,
}

impl RoundSchedule {
    pub fn rounds(&self) -> usize {
        self.t.len()
    }
}

fn ceil_sqrt(n: u128) -> u128 {
    let mut r = (n as f64).sqrt() as u128;
    while r * r < n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r
}

pub fn build_schedule(horizon: u64, u: f64) -> Result<RoundSchedule> {
    if horizon == 0 {
        return Err(invalid("horizon T must be at least 1"));
    }
    if !(u >= 0.0 && u.is_finite()) {
        return Err(invalid(format!("u must be finite and non-negative (got {u})")));
    }
    let pad = u.ceil() as u64;
    let mut q = Vec::new();
    let mut t = Vec::new();
    let mut prev: u64 = 1;
    let mut used: u64 = 0;
    while used < horizon {
        let qr = ceil_sqrt(u128::from(horizon) * u128::from(prev)) as u64;
        let len = qr.saturating_add(pad).min(horizon - used);
        q.push(qr);
        t.push(len);
        used += len;
        prev = qr;
    }
    Ok(RoundSchedule {
        q,
        t,
        u,
        horizon,
    })
}
