//! Transport and bottleneck model: the TCP response function, a
//! finite-buffer blocking loss model for the shared link, loss-rate
//! smoothing, AIMD background agents, and an empirically estimated
//! Markov chain over the quantized expected-window grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Expected TCP window (packets per slot) for a measured loss rate,
/// `sqrt(1.5 / p)`, saturating at one packet for loss rates past the
/// point where the formula dips below a single packet.
pub fn tcp_response_window(p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::Domain(format!("loss rate must be positive, got {p}")));
    }
    Ok((1.5 / p).sqrt().max(1.0))
}

/// Rounds a real window onto the integer solver grid `{1..w_max}`
/// (round half up).
pub fn quantize_window(w: f64, w_max: u32) -> u32 {
    (w.round() as i64).clamp(1, i64::from(w_max)) as u32
}

/// Smoothed network view: loss estimate plus the quantized expected
/// TCP window derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetState {
    /// Smoothed packet loss rate, in `(0, 1]`.
    pub p: f64,
    /// Quantized expected TCP window, in `{1..w_max}`.
    pub w_tcp: u32,
}

impl NetState {
    pub fn from_loss(p: f64, w_max: u32) -> Result<Self> {
        let w = tcp_response_window(p)?;
        Ok(NetState {
            p,
            w_tcp: quantize_window(w, w_max),
        })
    }
}

/// Blocking probability of a finite-buffer queue at the bottleneck:
/// with utilization `rho = load / capacity` and buffer `b`, the fraction
/// of offered packets turned away. Clamped to `[p_floor, 1]`.
pub fn bottleneck_loss(load: f64, capacity: f64, buffer: u32, p_floor: f64) -> Result<f64> {
    if load < 0.0 {
        return Err(Error::Domain(format!("negative offered load {load}")));
    }
    if !(capacity > 0.0) {
        return Err(Error::Domain(format!("capacity must be positive, got {capacity}")));
    }
    if buffer == 0 {
        return Err(Error::Domain("buffer must be at least one packet".into()));
    }
    let rho = load / capacity;
    let b = i32::try_from(buffer).unwrap_or(i32::MAX);
    let p = if (rho - 1.0).abs() < 1e-12 {
        1.0 / (f64::from(buffer) + 1.0)
    } else if rho < 1.0 {
        (1.0 - rho) * rho.powi(b) / (1.0 - rho.powi(b + 1))
    } else {
        // Evaluate through r = 1/rho so large utilizations stay finite.
        let r = 1.0 / rho;
        (1.0 - r) / (1.0 - r.powi(b + 1))
    };
    Ok(p.clamp(p_floor, 1.0))
}

/// Exponentially weighted loss update `alpha * prev + (1 - alpha) * hat`,
/// floored so the response function stays defined.
pub fn smooth_loss(p_prev: f64, p_hat: f64, alpha: f64, p_floor: f64) -> f64 {
    (alpha * p_prev + (1.0 - alpha) * p_hat).max(p_floor)
}

/// One additive-increase multiplicative-decrease congestion window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AimdAgent {
    /// Additive increase per slot without loss (packets).
    pub a: f64,
    /// Multiplicative decrease fraction on a loss event.
    pub b: f64,
    /// Current window (packets), at least one.
    pub w: f64,
}

impl AimdAgent {
    pub fn new(a: f64, b: f64, w: f64) -> Result<Self> {
        if !(a > 0.0) || !(b > 0.0 && b < 1.0) || !(w >= 1.0) {
            return Err(Error::Config(format!(
                "invalid AIMD parameters a={a} b={b} w={w}"
            )));
        }
        Ok(AimdAgent { a, b, w })
    }
}

/// AIMD window update: grow by `a` without loss, shrink to `(1-b)w`
/// (never below one packet) on loss.
pub fn aimd_step(agent: AimdAgent, lost: bool) -> AimdAgent {
    let w = if lost {
        ((1.0 - agent.b) * agent.w).max(1.0)
    } else {
        agent.w + agent.a
    };
    AimdAgent { w, ..agent }
}

/// Row-stochastic transition matrix over a quantized window grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NetChain {
    grid: Vec<u32>,
    rows: Vec<Vec<f64>>,
}

impl NetChain {
    pub fn new(grid: Vec<u32>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Config("window grid is empty".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("window grid must be strictly increasing".into()));
        }
        if rows.len() != grid.len() {
            return Err(Error::Config("transition matrix is not square over the grid".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != grid.len() {
                return Err(Error::Config(format!("row {i} has wrong width")));
            }
            if row.iter().any(|&p| p < 0.0) {
                return Err(Error::Config(format!("row {i} has a negative entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("row {i} sums to {sum}, not 1")));
            }
        }
        Ok(NetChain { grid, rows })
    }

    /// Self-loop chain: every window state maps to itself.
    pub fn identity(grid: Vec<u32>) -> Result<Self> {
        let n = grid.len();
        let rows = (0..n)
            .map(|i| {
                let mut row = vec![0.0; n];
                row[i] = 1.0;
                row
            })
            .collect();
        NetChain::new(grid, rows)
    }

    /// Uniform chain: every row spreads mass evenly.
    pub fn uniform(grid: Vec<u32>) -> Result<Self> {
        let n = grid.len();
        let rows = vec![vec![1.0 / n as f64; n]; n];
        NetChain::new(grid, rows)
    }

    pub fn grid(&self) -> &[u32] {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.rows[from]
    }

    /// Grid index of an exact window value.
    pub fn index_of(&self, w: u32) -> Result<usize> {
        self.grid
            .binary_search(&w)
            .map_err(|_| Error::Domain(format!("window {w} is not on the solver grid")))
    }

    /// Stationary distribution by power iteration.
    pub fn stationary(&self) -> Vec<f64> {
        let n = self.len();
        let mut dist = vec![1.0 / n as f64; n];
        let mut next = vec![0.0; n];
        for _ in 0..2000 {
            for x in next.iter_mut() {
                *x = 0.0;
            }
            for (i, &mass) in dist.iter().enumerate() {
                for (j, &p) in self.rows[i].iter().enumerate() {
                    next[j] += mass * p;
                }
            }
            let delta: f64 = dist
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).abs())
                .sum();
            std::mem::swap(&mut dist, &mut next);
            if delta < 1e-13 {
                break;
            }
        }
        dist
    }

    /// Mean window under the stationary distribution.
    pub fn stationary_mean(&self) -> f64 {
        self.stationary()
            .iter()
            .zip(&self.grid)
            .map(|(&p, &w)| p * f64::from(w))
            .sum()
    }
}

/// Estimates a window transition chain from an observed quantized trace.
///
/// Rows with at least one observed departure get add-one smoothing over
/// the whole grid before normalization; never-visited rows default to a
/// self-loop.
pub fn estimate_chain(trace: &[u32], w_max: u32) -> Result<NetChain> {
    if trace.len() < 2 {
        return Err(Error::Domain(format!(
            "need at least two window observations, got {}",
            trace.len()
        )));
    }
    let grid: Vec<u32> = (1..=w_max).collect();
    let n = grid.len();
    let mut counts = vec![vec![0u64; n]; n];
    for pair in trace.windows(2) {
        let from = quantize_window(f64::from(pair[0]), w_max) as usize - 1;
        let to = quantize_window(f64::from(pair[1]), w_max) as usize - 1;
        counts[from][to] += 1;
    }
    let rows = counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let total: u64 = row.iter().sum();
            if total == 0 {
                let mut r = vec![0.0; n];
                r[i] = 1.0;
                r
            } else {
                let denom = (total + n as u64) as f64;
                row.iter().map(|&c| (c + 1) as f64 / denom).collect()
            }
        })
        .collect();
    NetChain::new(grid, rows)
}
