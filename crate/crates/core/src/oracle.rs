//! Exhaustive joint-state planner used to verify the decomposed solver.
//!
//! The planner enumerates every joint action over the full product state
//! space (window grid x per-class occupancy) instead of decomposing per
//! class, so its output is an independent reference for the threshold
//! solver. A decision-slot action fixes each class's availability-gated
//! impact for the rest of the horizon, matching the model the per-class
//! sweep optimizes; the guard keeps the product space small enough to
//! enumerate.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::media::{Action, ClassSpec, Dag};
use crate::solver::{SolveResult, SolverConfig, SystemState};

const MAX_CLASSES: usize = 4;
const MAX_OCCUPANCY: u32 = 4;
const MAX_GRID: usize = 4;
const MAX_HORIZON: usize = 3;

fn guard(specs: &[ClassSpec], cfg: &SolverConfig) -> Result<()> {
    if specs.len() > MAX_CLASSES {
        return Err(Error::OracleGuard(format!(
            "{} classes exceeds the limit of {MAX_CLASSES}",
            specs.len()
        )));
    }
    if cfg.n_max > MAX_OCCUPANCY {
        return Err(Error::OracleGuard(format!(
            "occupancy bound {} exceeds the limit of {MAX_OCCUPANCY}",
            cfg.n_max
        )));
    }
    if cfg.chain.len() > MAX_GRID {
        return Err(Error::OracleGuard(format!(
            "window grid of {} points exceeds the limit of {MAX_GRID}",
            cfg.chain.len()
        )));
    }
    if cfg.horizon > MAX_HORIZON {
        return Err(Error::OracleGuard(format!(
            "horizon {} exceeds the limit of {MAX_HORIZON}",
            cfg.horizon
        )));
    }
    Ok(())
}

/// Joint optimum over every (window, occupancy-vector) state for one
/// decision slot: expected utilities and the argmax action masks.
#[derive(Debug, Clone)]
pub struct OracleSweep {
    pub grid: Vec<u32>,
    pub n_max: u32,
    pub classes: usize,
    values: Vec<f64>,
    actions: Vec<u32>,
}

impl OracleSweep {
    fn state_count(&self) -> usize {
        (self.n_max as usize + 1).pow(self.classes as u32)
    }

    pub fn pack(&self, occupancy: &[u32]) -> usize {
        let base = self.n_max as usize + 1;
        occupancy
            .iter()
            .rev()
            .fold(0usize, |acc, &n| acc * base + n as usize)
    }

    pub fn value(&self, w_idx: usize, occupancy: &[u32]) -> f64 {
        self.values[w_idx * self.state_count() + self.pack(occupancy)]
    }

    pub fn action(&self, w_idx: usize, occupancy: &[u32]) -> Action {
        let mask = self.actions[w_idx * self.state_count() + self.pack(occupancy)];
        Action((0..self.classes).map(|m| mask & (1 << m) != 0).collect())
    }
}

struct Context<'a> {
    specs: &'a [ClassSpec],
    cfg: &'a SolverConfig<'a>,
    /// Undelivered transitive ancestors per class.
    pending_anc: Vec<Vec<usize>>,
    base: usize,
    states: usize,
    w_len: usize,
}

impl<'a> Context<'a> {
    fn new(
        specs: &'a [ClassSpec],
        cfg: &'a SolverConfig<'a>,
        delivered: &[bool],
    ) -> Result<Self> {
        guard(specs, cfg)?;
        cfg.validate()?;
        let dag = Dag::new(specs)?;
        let pending_anc = (0..specs.len())
            .map(|m| {
                dag.ancestors(m)
                    .iter()
                    .copied()
                    .filter(|&a| !delivered[a])
                    .collect()
            })
            .collect();
        let base = cfg.n_max as usize + 1;
        Ok(Context {
            specs,
            cfg,
            pending_anc,
            base,
            states: base.pow(specs.len() as u32),
            w_len: cfg.chain.len(),
        })
    }

    fn unpack(&self, mut idx: usize, out: &mut [u32]) {
        for slot in out.iter_mut() {
            *slot = (idx % self.base) as u32;
            idx /= self.base;
        }
    }

    /// Occupancy transition for a joint action at schedule offset `k`.
    fn transition(&self, occ: &[u32], mask: u32, k: usize) -> Result<usize> {
        let mut idx = 0usize;
        for m in (0..occ.len()).rev() {
            let plan = self.cfg.schedule.plan(m, self.cfg.slot + k)?;
            let n = occ[m];
            let next = if mask & (1 << m) != 0 {
                plan.arrivals.min(self.cfg.n_max)
            } else {
                (n - plan.discard.applied_to(n) + plan.arrivals).min(self.cfg.n_max)
            };
            idx = idx * self.base + next as usize;
        }
        Ok(idx)
    }

    /// Slot reward under a frozen impact vector: gated quality of the
    /// granted classes minus the priced window deviation.
    fn reward(&self, w: u32, occ: &[u32], mask: u32, impact: &[f64]) -> f64 {
        let mut quality = 0.0;
        let mut window = 0u32;
        for (m, &n) in occ.iter().enumerate() {
            if mask & (1 << m) != 0 {
                quality += impact[m] * f64::from(n);
                window += n;
            }
        }
        quality - self.cfg.lambda * (f64::from(window) / f64::from(w) - 1.0)
    }

    /// Effective impacts fixed by the decision-slot action: a class
    /// keeps its impact only if every undelivered ancestor is granted
    /// with a nonempty buffer.
    fn frozen_impacts(&self, occ: &[u32], mask: u32) -> Vec<f64> {
        (0..self.specs.len())
            .map(|m| {
                let ok = self.pending_anc[m]
                    .iter()
                    .all(|&a| mask & (1 << a) != 0 && occ[a] > 0);
                if ok {
                    self.specs[m].q
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn zero_mask(&self, impact: &[f64]) -> u32 {
        impact
            .iter()
            .enumerate()
            .filter(|(_, &q)| q == 0.0)
            .fold(0u32, |acc, (m, _)| acc | (1 << m))
    }

    /// Value function at schedule offset 1 under a frozen impact
    /// vector, by joint backward induction over offsets 1..horizon.
    fn continuation(&self, impact: &[f64]) -> Result<Vec<f64>> {
        let total = self.w_len * self.states;
        let mut v_next = vec![0.0f64; total];
        let mut occ = vec![0u32; self.specs.len()];
        let masks = 1u32 << self.specs.len();
        for k in (1..self.cfg.horizon).rev() {
            // Expected next value per (window, packed occupancy).
            let mut expect = vec![0.0f64; total];
            for w_idx in 0..self.w_len {
                let out = &mut expect[w_idx * self.states..(w_idx + 1) * self.states];
                for (w2, &p) in self.cfg.chain.row(w_idx).iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    let next = &v_next[w2 * self.states..(w2 + 1) * self.states];
                    for (e, &v) in out.iter_mut().zip(next) {
                        *e += p * v;
                    }
                }
            }
            let mut v_now = vec![0.0f64; total];
            for w_idx in 0..self.w_len {
                let w = self.cfg.chain.grid()[w_idx];
                for sidx in 0..self.states {
                    self.unpack(sidx, &mut occ);
                    let mut best = f64::NEG_INFINITY;
                    for mask in 0..masks {
                        let future = if k + 1 == self.cfg.horizon {
                            0.0
                        } else {
                            expect[w_idx * self.states + self.transition(&occ, mask, k)?]
                        };
                        let value =
                            self.reward(w, &occ, mask, impact) + self.cfg.gamma * future;
                        if value > best {
                            best = value;
                        }
                    }
                    v_now[w_idx * self.states + sidx] = best;
                }
            }
            v_next = v_now;
        }
        Ok(v_next)
    }
}

/// Best joint action and expected utility for every state of the guard
/// -sized product space, holding the availability flags fixed.
pub fn oracle_sweep(
    specs: &[ClassSpec],
    cfg: &SolverConfig,
    delivered: &[bool],
) -> Result<OracleSweep> {
    let ctx = Context::new(specs, cfg, delivered)?;
    let masks = 1u32 << specs.len();
    let mut memo: HashMap<u32, Vec<f64>> = HashMap::new();
    let mut values = vec![0.0f64; ctx.w_len * ctx.states];
    let mut actions = vec![0u32; ctx.w_len * ctx.states];
    let mut occ = vec![0u32; specs.len()];

    let mut scores = vec![0.0f64; masks as usize];
    for w_idx in 0..ctx.w_len {
        let w = cfg.chain.grid()[w_idx];
        for sidx in 0..ctx.states {
            ctx.unpack(sidx, &mut occ);
            for mask in 0..masks {
                let impact = ctx.frozen_impacts(&occ, mask);
                let future = if cfg.horizon == 1 {
                    0.0
                } else {
                    let key = ctx.zero_mask(&impact);
                    if !memo.contains_key(&key) {
                        let table = ctx.continuation(&impact)?;
                        memo.insert(key, table);
                    }
                    let v1 = &memo[&key];
                    let next = ctx.transition(&occ, mask, 0)?;
                    let mut acc = 0.0;
                    for (w2, &p) in cfg.chain.row(w_idx).iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        acc += p * v1[w2 * ctx.states + next];
                    }
                    acc
                };
                scores[mask as usize] =
                    ctx.reward(w, &occ, mask, &impact) + cfg.gamma * future;
            }
            let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            // Ties resolve toward fewer transmissions, then the
            // lexicographically smallest permission vector (low class
            // index off first).
            let mut best_mask = u32::MAX;
            for mask in 0..masks {
                if scores[mask as usize] < best - 1e-12 {
                    continue;
                }
                if best_mask == u32::MAX {
                    best_mask = mask;
                    continue;
                }
                let cand = mask.count_ones();
                let cur = best_mask.count_ones();
                if cand < cur || (cand == cur && lex_smaller(mask, best_mask, specs.len())) {
                    best_mask = mask;
                }
            }
            values[w_idx * ctx.states + sidx] = best;
            actions[w_idx * ctx.states + sidx] = best_mask;
        }
    }

    Ok(OracleSweep {
        grid: cfg.chain.grid().to_vec(),
        n_max: cfg.n_max,
        classes: specs.len(),
        values,
        actions,
    })
}

/// True when permission vector `a` precedes `b` lexicographically
/// (class 1 compared first, "deny" before "grant").
fn lex_smaller(a: u32, b: u32, m: usize) -> bool {
    for bit in 0..m {
        let x = a & (1 << bit) != 0;
        let y = b & (1 << bit) != 0;
        if x != y {
            return !x;
        }
    }
    false
}

/// Exhaustive reference solve for a single state.
pub fn solve_oracle(
    specs: &[ClassSpec],
    state: &SystemState,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let sweep = oracle_sweep(specs, cfg, &state.delivered)?;
    let w_idx = cfg.chain.index_of(state.w_tcp)?;
    let clamped: Vec<u32> = state.occupancy.iter().map(|&n| n.min(cfg.n_max)).collect();
    let best_value = sweep.value(w_idx, &clamped);
    let permissions = sweep.action(w_idx, &clamped);

    // Marginal utilities around the optimum stand in for per-class
    // priority metrics: positive exactly for granted classes.
    let ctx = Context::new(specs, cfg, &state.delivered)?;
    let mut metrics = Vec::with_capacity(specs.len());
    let best_mask: u32 = permissions
        .0
        .iter()
        .enumerate()
        .filter(|(_, &p)| p)
        .fold(0, |acc, (m, _)| acc | (1 << m));
    let mut memo: HashMap<u32, Vec<f64>> = HashMap::new();
    let mut eval = |mask: u32| -> Result<f64> {
        let impact = ctx.frozen_impacts(&clamped, mask);
        let future = if cfg.horizon == 1 {
            0.0
        } else {
            let key = ctx.zero_mask(&impact);
            if !memo.contains_key(&key) {
                let table = ctx.continuation(&impact)?;
                memo.insert(key, table);
            }
            let v1 = &memo[&key];
            let next = ctx.transition(&clamped, mask, 0)?;
            let mut acc = 0.0;
            for (w2, &p) in cfg.chain.row(w_idx).iter().enumerate() {
                acc += p * v1[w2 * ctx.states + next];
            }
            acc
        };
        Ok(ctx.reward(state.w_tcp, &clamped, mask, &impact) + cfg.gamma * future)
    };
    for m in 0..specs.len() {
        let with = eval(best_mask | (1 << m))?;
        let without = eval(best_mask & !(1 << m))?;
        metrics.push(with - without);
    }

    let impact = ctx.frozen_impacts(&clamped, best_mask);
    let mut window = 0u32;
    let mut quality = 0.0;
    for (m, &n) in clamped.iter().enumerate() {
        if permissions.0[m] {
            window += n;
            quality += impact[m] * f64::from(n);
        }
    }

    Ok(SolveResult {
        metrics,
        permissions,
        window,
        expected_quality: quality,
        expected_utility: best_value,
    })
}
