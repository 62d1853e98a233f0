//! Finite-horizon planner for per-slot transmission permissions.
//!
//! For each class the planner runs backward induction over a grid of
//! (expected TCP window, buffer occupancy) pairs, producing utility-to-go
//! tables. A class's priority metric is the marginal value of
//! transmitting now versus deferring; the class transmits when the
//! metric is strictly positive. Interdependent classes are handled by a
//! depth-ordered sweep that zeroes the effective distortion impact of
//! every descendant of a denied class.

use crate::error::{Error, Result};
use crate::media::{recompute_depths, Action, ClassSpec, Dag};
use crate::net::NetChain;

/// How a class's buffered packets expire in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discard {
    /// A fixed number of packets expires (capped by occupancy).
    Count(u32),
    /// The whole buffer expires (deadline slot).
    All,
}

impl Discard {
    pub fn applied_to(self, n: u32) -> u32 {
        match self {
            Discard::Count(d) => d.min(n),
            Discard::All => n,
        }
    }
}

/// Scheduled arrivals and expiries for one class in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotPlan {
    pub arrivals: u32,
    pub discard: Discard,
}

impl SlotPlan {
    pub fn idle() -> Self {
        SlotPlan {
            arrivals: 0,
            discard: Discard::Count(0),
        }
    }
}

/// Deterministic per-class arrival/expiry timetable over absolute slots.
#[derive(Debug, Clone)]
pub struct Schedule {
    plans: Vec<Vec<SlotPlan>>,
}

impl Schedule {
    /// `plans[class][slot]`.
    pub fn new(plans: Vec<Vec<SlotPlan>>) -> Self {
        Schedule { plans }
    }

    /// An all-idle schedule, useful for stationary planning problems.
    pub fn idle(classes: usize, slots: usize) -> Self {
        Schedule {
            plans: vec![vec![SlotPlan::idle(); slots]; classes],
        }
    }

    pub fn classes(&self) -> usize {
        self.plans.len()
    }

    pub fn slots(&self) -> usize {
        self.plans.first().map_or(0, Vec::len)
    }

    pub fn plan(&self, class: usize, slot: usize) -> Result<SlotPlan> {
        self.plans
            .get(class)
            .and_then(|row| row.get(slot))
            .copied()
            .ok_or(Error::MissingSchedule {
                class: class as u32,
                slot,
            })
    }

    pub fn plan_mut(&mut self, class: usize, slot: usize) -> &mut SlotPlan {
        &mut self.plans[class][slot]
    }
}

/// Joint planner state: quantized expected TCP window plus per-class
/// occupancy and receiver-side availability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemState {
    pub w_tcp: u32,
    pub occupancy: Vec<u32>,
    pub delivered: Vec<bool>,
}

impl SystemState {
    pub fn new(w_tcp: u32, occupancy: Vec<u32>) -> Self {
        let delivered = vec![false; occupancy.len()];
        SystemState {
            w_tcp,
            occupancy,
            delivered,
        }
    }
}

/// Planner parameters for one decision slot.
#[derive(Debug, Clone)]
pub struct SolverConfig<'a> {
    /// Price per packet-slot of window usage relative to the TCP share.
    pub lambda: f64,
    /// Discount on future utility, in `[0, 1]`.
    pub gamma: f64,
    /// Number of slots planned, at least one.
    pub horizon: usize,
    /// Occupancy grid bound.
    pub n_max: u32,
    /// Window transition model over the quantized grid.
    pub chain: &'a NetChain,
    /// Arrival/expiry timetable covering `slot .. slot + horizon`.
    pub schedule: &'a Schedule,
    /// Absolute index of the decision slot within the schedule.
    pub slot: usize,
}

impl SolverConfig<'_> {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least one slot".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("discount {} outside [0, 1]", self.gamma)));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::Config(format!("lambda {} must be nonnegative", self.lambda)));
        }
        for class in 0..self.schedule.classes() {
            for k in 0..self.horizon {
                self.schedule.plan(class, self.slot + k)?;
            }
        }
        Ok(())
    }

    /// Horizon-summed constant utility term (the planner's reward each
    /// slot carries a `+lambda` offset that is independent of the
    /// action and the state).
    pub fn utility_offset(&self) -> f64 {
        let mut total = 0.0;
        let mut weight = 1.0;
        for _ in 0..self.horizon {
            total += weight * self.lambda;
            weight *= self.gamma;
        }
        total
    }
}

/// Utility-to-go table for one class: values over (slot offset, window
/// grid index, occupancy), together with the effective per-packet
/// distortion impact the table was built with.
#[derive(Debug, Clone)]
pub struct ClassTable {
    pub q: f64,
    horizon: usize,
    w_len: usize,
    n_len: usize,
    values: Vec<f64>,
}

impl ClassTable {
    #[inline]
    pub fn at(&self, k: usize, w_idx: usize, n: u32) -> f64 {
        debug_assert!(k < self.horizon && w_idx < self.w_len && (n as usize) < self.n_len);
        self.values[(k * self.w_len + w_idx) * self.n_len + n as usize]
    }

    fn slice(&self, k: usize) -> &[f64] {
        let stride = self.w_len * self.n_len;
        &self.values[k * stride..(k + 1) * stride]
    }

    /// Counts occupancy-monotonicity violations beyond `tol`.
    pub fn monotone_violations(&self, tol: f64) -> usize {
        let mut bad = 0;
        for k in 0..self.horizon {
            let slab = self.slice(k);
            for w in 0..self.w_len {
                let row = &slab[w * self.n_len..(w + 1) * self.n_len];
                for pair in row.windows(2) {
                    if pair[1] < pair[0] - tol {
                        bad += 1;
                    }
                }
            }
        }
        bad
    }
}

/// All per-class utility-to-go tables from one solve.
#[derive(Debug, Clone)]
pub struct PolicyTables {
    pub grid: Vec<u32>,
    pub n_max: u32,
    pub horizon: usize,
    pub classes: Vec<ClassTable>,
}

impl PolicyTables {
    pub fn monotone_violations(&self, tol: f64) -> usize {
        self.classes
            .iter()
            .map(|t| t.monotone_violations(tol))
            .sum()
    }
}

/// One slot's planning output.
#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Per-class priority metrics at the decision slot.
    pub metrics: Vec<f64>,
    /// Transmission permissions (strictly positive metric).
    pub permissions: Action,
    /// Resulting congestion window: buffered packets of granted classes.
    pub window: u32,
    /// Distortion reduction realized by the permissions (dB).
    pub expected_quality: f64,
    /// Total expected utility over the horizon under the plan.
    pub expected_utility: f64,
}

/// Planning output together with the tables that produced it.
#[derive(Debug, Clone)]
pub struct Solution {
    pub result: SolveResult,
    pub tables: PolicyTables,
}

/// Backward induction for a single class.
///
/// `q` is the effective per-packet impact for this solve (the raw class
/// impact, or its availability-gated value during a dependency sweep).
/// For every slot offset `k` from the horizon end down to the decision
/// slot and every grid point `(w, n)`:
///
/// ```text
/// J[k](w, n) = max over permit in {0, 1} of
///     (q - lambda / w) * n * permit
///     + gamma * sum over w' of P(w' | w) * J[k+1](w', n'(permit))
/// ```
///
/// where `n'` follows the occupancy transition under the scheduled
/// arrivals and expiries, clamped to the grid.
pub fn backward_induction_class(cfg: &SolverConfig, class: usize, q: f64) -> Result<ClassTable> {
    let grid = cfg.chain.grid();
    let w_len = grid.len();
    let n_len = cfg.n_max as usize + 1;
    let horizon = cfg.horizon;
    let mut values = vec![0.0f64; horizon * w_len * n_len];
    // Expected next-slot value for each (w, n), refreshed per slot.
    let mut expect = vec![0.0f64; w_len * n_len];

    for k in (0..horizon).rev() {
        let plan = cfg.schedule.plan(class, cfg.slot + k)?;
        let terminal = k + 1 == horizon;
        if !terminal {
            let stride = w_len * n_len;
            let next = &values[(k + 1) * stride..(k + 2) * stride];
            for (w_idx, exp_row) in expect.chunks_mut(n_len).enumerate() {
                exp_row.fill(0.0);
                for (w2, &p) in cfg.chain.row(w_idx).iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    let next_row = &next[w2 * n_len..(w2 + 1) * n_len];
                    for (e, &v) in exp_row.iter_mut().zip(next_row) {
                        *e += p * v;
                    }
                }
            }
        }

        let n_granted = plan.arrivals.min(cfg.n_max);
        let stride = w_len * n_len;
        let slab = &mut values[k * stride..(k + 1) * stride];
        for (w_idx, out_row) in slab.chunks_mut(n_len).enumerate() {
            let cost = q - cfg.lambda / f64::from(grid[w_idx]);
            let exp_row = &expect[w_idx * n_len..(w_idx + 1) * n_len];
            for (n, out) in out_row.iter_mut().enumerate() {
                let n = n as u32;
                let drop = plan.discard.applied_to(n);
                let n_denied = (n - drop + plan.arrivals).min(cfg.n_max);
                let (f1, f0) = if terminal {
                    (0.0, 0.0)
                } else {
                    (exp_row[n_granted as usize], exp_row[n_denied as usize])
                };
                let j1 = cost * f64::from(n) + cfg.gamma * f1;
                let j0 = cfg.gamma * f0;
                *out = j1.max(j0);
            }
        }
    }

    Ok(ClassTable {
        q,
        horizon,
        w_len,
        n_len,
        values,
    })
}

fn metric_from_table(
    table: &ClassTable,
    class: usize,
    state: &SystemState,
    cfg: &SolverConfig,
) -> Result<f64> {
    let w_idx = cfg.chain.index_of(state.w_tcp)?;
    let n = state.occupancy[class].min(cfg.n_max);
    let plan = cfg.schedule.plan(class, cfg.slot)?;
    let immediate = (table.q - cfg.lambda / f64::from(state.w_tcp)) * f64::from(n);
    if cfg.horizon < 2 || cfg.gamma == 0.0 {
        return Ok(immediate);
    }
    let n_granted = plan.arrivals.min(cfg.n_max);
    let drop = plan.discard.applied_to(n);
    let n_denied = (n - drop + plan.arrivals).min(cfg.n_max);
    let mut bracket = 0.0;
    for (w2, &p) in cfg.chain.row(w_idx).iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        bracket += p * (table.at(1, w2, n_granted) - table.at(1, w2, n_denied));
    }
    Ok(immediate + cfg.gamma * bracket)
}

/// Marginal value of transmitting class `class` now instead of
/// deferring: the immediate gain plus the expected difference in
/// next-slot utility-to-go between the post-transmit and post-defer
/// occupancies.
pub fn priority_metric(
    class: usize,
    state: &SystemState,
    tables: &PolicyTables,
    cfg: &SolverConfig,
) -> Result<f64> {
    metric_from_table(&tables.classes[class], class, state, cfg)
}

fn validate_state(specs: &[ClassSpec], state: &SystemState, cfg: &SolverConfig) -> Result<()> {
    if state.occupancy.len() != specs.len() || state.delivered.len() != specs.len() {
        return Err(Error::Precondition(format!(
            "state covers {} classes, workload has {}",
            state.occupancy.len(),
            specs.len()
        )));
    }
    cfg.chain.index_of(state.w_tcp)?;
    cfg.validate()
}

fn assemble(
    state: &SystemState,
    cfg: &SolverConfig,
    tables: Vec<ClassTable>,
    metrics: Vec<f64>,
    q_effective: &[f64],
) -> Result<Solution> {
    let w_idx = cfg.chain.index_of(state.w_tcp)?;
    let permissions = Action(metrics.iter().map(|&pm| pm > 0.0).collect());
    let mut window = 0u32;
    let mut quality = 0.0;
    let mut utility = cfg.utility_offset();
    for (m, table) in tables.iter().enumerate() {
        let n = state.occupancy[m].min(cfg.n_max);
        if permissions.0[m] {
            window += n;
            quality += q_effective[m] * f64::from(n);
        }
        utility += table.at(0, w_idx, n);
    }
    Ok(Solution {
        result: SolveResult {
            metrics,
            permissions,
            window,
            expected_quality: quality,
            expected_utility: utility,
        },
        tables: PolicyTables {
            grid: cfg.chain.grid().to_vec(),
            n_max: cfg.n_max,
            horizon: cfg.horizon,
            classes: tables,
        },
    })
}

/// Optimal permissions for a workload of independent classes: one
/// backward induction per class, transmit exactly the classes with a
/// strictly positive priority metric.
pub fn solve_independent(
    specs: &[ClassSpec],
    state: &SystemState,
    cfg: &SolverConfig,
) -> Result<Solution> {
    validate_state(specs, state, cfg)?;
    let dag = Dag::new(specs)?;
    if dag.has_edges() {
        return Err(Error::Precondition(
            "workload has dependency edges; use solve_dag".into(),
        ));
    }
    let mut tables = Vec::with_capacity(specs.len());
    let mut metrics = Vec::with_capacity(specs.len());
    for (m, spec) in specs.iter().enumerate() {
        tables.push(backward_induction_class(cfg, m, spec.q)?);
    }
    let partial = PolicyTables {
        grid: cfg.chain.grid().to_vec(),
        n_max: cfg.n_max,
        horizon: cfg.horizon,
        classes: tables,
    };
    for m in 0..specs.len() {
        metrics.push(priority_metric(m, state, &partial, cfg)?);
    }
    let q_effective: Vec<f64> = specs.iter().map(|s| s.q).collect();
    assemble(state, cfg, partial.classes, metrics, &q_effective)
}

/// Optimal permissions for interdependent classes.
///
/// Classes are swept in dependency-depth order. Each class is planned
/// with its availability-gated impact; when an undelivered class is
/// denied, every descendant's effective impact drops to zero before the
/// descendant is planned.
pub fn solve_dag(specs: &[ClassSpec], state: &SystemState, cfg: &SolverConfig) -> Result<Solution> {
    validate_state(specs, state, cfg)?;
    let dag = Dag::new(specs)?;
    let depths = recompute_depths(&dag, &state.delivered);
    let max_depth = depths.iter().copied().max().unwrap_or(0);

    let mut q_act: Vec<f64> = specs.iter().map(|s| s.q).collect();
    let mut tables: Vec<Option<ClassTable>> = vec![None; specs.len()];
    let mut metrics = vec![0.0f64; specs.len()];

    for depth in 0..=max_depth {
        for m in 0..specs.len() {
            if depths[m] != depth {
                continue;
            }
            let table = backward_induction_class(cfg, m, q_act[m])?;
            let pm = metric_from_table(&table, m, state, cfg)?;
            metrics[m] = pm;
            if pm <= 0.0 && !state.delivered[m] {
                for &d in dag.descendants(m) {
                    q_act[d] = 0.0;
                }
            }
            tables[m] = Some(table);
        }
    }

    let tables: Vec<ClassTable> = tables.into_iter().map(Option::unwrap).collect();
    assemble(state, cfg, tables, metrics, &q_act)
}

/// Heuristic window-usage price: the stationary mean window of the
/// transition model times the packet-weighted mean distortion impact of
/// the workload.
pub fn default_lambda(chain: &NetChain, specs: &[ClassSpec]) -> Result<f64> {
    if specs.is_empty() {
        return Err(Error::Precondition("workload has no classes".into()));
    }
    let mean_w = chain.stationary_mean();
    let packets: u64 = specs.iter().map(|s| u64::from(s.n0)).sum();
    let mean_q = if packets == 0 {
        specs.iter().map(|s| s.q).sum::<f64>() / specs.len() as f64
    } else {
        specs
            .iter()
            .map(|s| s.q * f64::from(s.n0))
            .sum::<f64>()
            / packets as f64
    };
    Ok(mean_w * mean_q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(id: u32, q: f64, n0: u32, parents: &[u32]) -> ClassSpec {
        ClassSpec {
            id,
            q,
            n0,
            parents: parents.to_vec(),
            arrival_time: 0.0,
            deadline: 1.0,
        }
    }

    fn single_point_chain(w: u32) -> NetChain {
        NetChain::identity(vec![w]).unwrap()
    }

    #[test]
    fn terminal_slot_value_matches_hand_calculation() {
        let chain = single_point_chain(16);
        let schedule = Schedule::idle(1, 1);
        let cfg = SolverConfig {
            lambda: 10.0,
            gamma: 1.0,
            horizon: 1,
            n_max: 8,
            chain: &chain,
            schedule: &schedule,
            slot: 0,
        };
        let table = backward_induction_class(&cfg, 0, 1.0).unwrap();
        // (1 - 10/16) * 5 = 1.875
        assert_relative_eq!(table.at(0, 0, 5), 1.875);
    }

    #[test]
    fn terminal_slot_value_zero_when_cost_dominates() {
        let chain = single_point_chain(16);
        let schedule = Schedule::idle(1, 1);
        let cfg = SolverConfig {
            lambda: 10.0,
            gamma: 1.0,
            horizon: 1,
            n_max: 8,
            chain: &chain,
            schedule: &schedule,
            slot: 0,
        };
        let table = backward_induction_class(&cfg, 0, 0.5).unwrap();
        for n in 0..=8 {
            assert_eq!(table.at(0, 0, n), 0.0);
        }
    }

    #[test]
    fn zero_discount_collapses_to_terminal_rule() {
        let chain = single_point_chain(16);
        let schedule = Schedule::idle(1, 4);
        let cfg = SolverConfig {
            lambda: 10.0,
            gamma: 0.0,
            horizon: 4,
            n_max: 8,
            chain: &chain,
            schedule: &schedule,
            slot: 0,
        };
        let table = backward_induction_class(&cfg, 0, 1.0).unwrap();
        for n in 0..=8 {
            let expect = ((1.0 - 10.0 / 16.0) * f64::from(n)).max(0.0);
            assert_relative_eq!(table.at(0, 0, n), expect);
        }
    }

    #[test]
    fn priority_metric_first_term_only_when_myopic() {
        let chain = single_point_chain(16);
        let schedule = Schedule::idle(1, 1);
        let cfg = SolverConfig {
            lambda: 10.0,
            gamma: 0.0,
            horizon: 1,
            n_max: 32,
            chain: &chain,
            schedule: &schedule,
            slot: 0,
        };
        let tables = PolicyTables {
            grid: vec![16],
            n_max: 32,
            horizon: 1,
            classes: vec![backward_induction_class(&cfg, 0, 0.154).unwrap()],
        };
        let state = SystemState::new(16, vec![17]);
        let pm = priority_metric(0, &state, &tables, &cfg).unwrap();
        assert_relative_eq!(pm, (0.154 - 0.625) * 17.0, epsilon = 1e-12);
    }

    #[test]
    fn priority_metric_vanishes_at_indifference_price() {
        let chain = single_point_chain(20);
        let schedule = Schedule::idle(1, 1);
        let q = 0.3;
        let cfg = SolverConfig {
            lambda: q * 20.0,
            gamma: 0.0,
            horizon: 1,
            n_max: 16,
            chain: &chain,
            schedule: &schedule,
            slot: 0,
        };
        let tables = PolicyTables {
            grid: vec![20],
            n_max: 16,
            horizon: 1,
            classes: vec![backward_induction_class(&cfg, 0, q).unwrap()],
        };
        for n in [0u32, 3, 9, 16] {
            let state = SystemState::new(20, vec![n]);
            let pm = priority_metric(0, &state, &tables, &cfg).unwrap();
            assert_relative_eq!(pm, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn priority_metric_reduces_to_first_term_when_everything_expires() {
        let chain = NetChain::uniform(vec![8, 16]).unwrap();
        let mut schedule = Schedule::idle(1, 3);
        *schedule.plan_mut(0, 0) = SlotPlan {
            arrivals: 0,
            discard: Discard::All,
        };
        let cfg = SolverConfig {
            lambda: 2.0,
            gamma: 0.7,
            horizon: 3,
            n_max: 16,
            chain: &chain,
            schedule: &schedule,
            slot: 0,
        };
        let tables = PolicyTables {
            grid: vec![8, 16],
            n_max: 16,
            horizon: 3,
            classes: vec![backward_induction_class(&cfg, 0, 0.4).unwrap()],
        };
        let state = SystemState::new(16, vec![9]);
        let pm = priority_metric(0, &state, &tables, &cfg).unwrap();
        assert_relative_eq!(pm, (0.4 - 2.0 / 16.0) * 9.0, epsilon = 1e-12);
    }

    #[test]
    fn independent_solve_all_negative_metrics_sends_nothing() {
        let chain = single_point_chain(16);
        let schedule = Schedule::idle(2, 2);
        let cfg = SolverConfig {
            lambda: 10.0,
            gamma: 0.5,
            horizon: 2,
            n_max: 32,
            chain: &chain,
            schedule: &schedule,
            slot: 0,
        };
        let specs = vec![spec(1, 0.154, 17, &[]), spec(2, 0.08, 12, &[])];
        let state = SystemState::new(16, vec![17, 12]);
        let sol = solve_independent(&specs, &state, &cfg).unwrap();
        assert_eq!(sol.result.window, 0);
        assert_eq!(sol.result.expected_quality, 0.0);
        assert!(sol.result.metrics.iter().all(|&pm| pm <= 0.0));
    }

    #[test]
    fn independent_solve_single_positive_class_transmits_buffer() {
        let chain = single_point_chain(16);
        let schedule = Schedule::idle(1, 1);
        let cfg = SolverConfig {
            lambda: 1.0,
            gamma: 0.0,
            horizon: 1,
            n_max: 32,
            chain: &chain,
            schedule: &schedule,
            slot: 0,
        };
        let specs = vec![spec(1, 0.5, 9, &[])];
        let state = SystemState::new(16, vec![9]);
        let sol = solve_independent(&specs, &state, &cfg).unwrap();
        assert!(sol.result.permissions.0[0]);
        assert_eq!(sol.result.window, 9);
        assert_relative_eq!(sol.result.expected_quality, 4.5);
    }

    #[test]
    fn independent_solve_rejects_dag_workloads() {
        let chain = single_point_chain(16);
        let schedule = Schedule::idle(2, 1);
        let cfg = SolverConfig {
            lambda: 1.0,
            gamma: 0.0,
            horizon: 1,
            n_max: 8,
            chain: &chain,
            schedule: &schedule,
            slot: 0,
        };
        let specs = vec![spec(1, 0.5, 4, &[]), spec(2, 0.4, 4, &[1])];
        let state = SystemState::new(16, vec![4, 4]);
        assert!(matches!(
            solve_independent(&specs, &state, &cfg),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn dag_solve_denied_root_silences_descendants() {
        let chain = single_point_chain(16);
        let schedule = Schedule::idle(3, 1);
        let cfg = SolverConfig {
            lambda: 8.0,
            gamma: 0.0,
            horizon: 1,
            n_max: 32,
            chain: &chain,
            schedule: &schedule,
            slot: 0,
        };
        // Root below the price point, descendants above it on raw impact.
        let specs = vec![
            spec(1, 0.3, 10, &[]),
            spec(2, 0.3, 20, &[1]),
            spec(3, 0.25, 20, &[2]),
        ];
        let state = SystemState::new(16, vec![10, 20, 20]);
        let sol = solve_dag(&specs, &state, &cfg).unwrap();
        assert!(!sol.result.permissions.0.iter().any(|&p| p));
        assert_eq!(sol.result.window, 0);
    }

    #[test]
    fn dag_solve_matches_independent_when_edgeless() {
        let chain = NetChain::uniform(vec![8, 16, 24]).unwrap();
        let mut schedule = Schedule::idle(2, 2);
        *schedule.plan_mut(0, 0) = SlotPlan {
            arrivals: 3,
            discard: Discard::Count(1),
        };
        let cfg = SolverConfig {
            lambda: 2.0,
            gamma: 0.8,
            horizon: 2,
            n_max: 16,
            chain: &chain,
            schedule: &schedule,
            slot: 0,
        };
        let specs = vec![spec(1, 0.4, 8, &[]), spec(2, 0.1, 6, &[])];
        let state = SystemState::new(16, vec![8, 6]);
        let a = solve_independent(&specs, &state, &cfg).unwrap();
        let b = solve_dag(&specs, &state, &cfg).unwrap();
        assert_eq!(a.result.permissions, b.result.permissions);
        assert_relative_eq!(a.result.expected_utility, b.result.expected_utility);
        for (x, y) in a.result.metrics.iter().zip(&b.result.metrics) {
            assert_relative_eq!(x, y);
        }
    }

    #[test]
    fn dag_solve_delivered_ancestor_does_not_gate() {
        let chain = single_point_chain(16);
        let schedule = Schedule::idle(2, 1);
        let cfg = SolverConfig {
            lambda: 1.0,
            gamma: 0.0,
            horizon: 1,
            n_max: 32,
            chain: &chain,
            schedule: &schedule,
            slot: 0,
        };
        let specs = vec![spec(1, 0.5, 10, &[]), spec(2, 0.4, 12, &[1])];
        // Root already delivered and empty; descendant holds packets.
        let state = SystemState {
            w_tcp: 16,
            occupancy: vec![0, 12],
            delivered: vec![true, false],
        };
        let sol = solve_dag(&specs, &state, &cfg).unwrap();
        assert!(!sol.result.permissions.0[0]);
        assert!(sol.result.permissions.0[1]);
        assert_relative_eq!(sol.result.expected_quality, 0.4 * 12.0);
    }

    #[test]
    fn tables_are_monotone_in_occupancy() {
        let chain = NetChain::uniform(vec![4, 9, 17]).unwrap();
        let mut schedule = Schedule::idle(1, 3);
        *schedule.plan_mut(0, 0) = SlotPlan {
            arrivals: 2,
            discard: Discard::Count(3),
        };
        *schedule.plan_mut(0, 1) = SlotPlan {
            arrivals: 1,
            discard: Discard::All,
        };
        let cfg = SolverConfig {
            lambda: 1.2,
            gamma: 0.9,
            horizon: 3,
            n_max: 12,
            chain: &chain,
            schedule: &schedule,
            slot: 0,
        };
        for q in [0.0, 0.05, 0.2, 0.9] {
            let table = backward_induction_class(&cfg, 0, q).unwrap();
            assert_eq!(table.monotone_violations(1e-12), 0);
        }
    }

    #[test]
    fn default_lambda_known_values() {
        let chain = single_point_chain(16);
        let specs = vec![spec(1, 0.1, 10, &[])];
        assert_relative_eq!(default_lambda(&chain, &specs).unwrap(), 1.6);

        let degenerate = single_point_chain(1);
        let unit = vec![spec(1, 1.0, 5, &[])];
        assert_relative_eq!(default_lambda(&degenerate, &unit).unwrap(), 1.0);

        // Uniform impact: weighting is immaterial.
        let chain = single_point_chain(8);
        let specs = vec![spec(1, 0.25, 3, &[]), spec(2, 0.25, 9, &[])];
        assert_relative_eq!(default_lambda(&chain, &specs).unwrap(), 2.0);
    }

    #[test]
    fn missing_schedule_slot_is_an_error() {
        let chain = single_point_chain(16);
        let schedule = Schedule::idle(1, 1);
        let cfg = SolverConfig {
            lambda: 1.0,
            gamma: 0.5,
            horizon: 3,
            n_max: 8,
            chain: &chain,
            schedule: &schedule,
            slot: 0,
        };
        assert!(matches!(
            backward_induction_class(&cfg, 0, 0.2),
            Err(Error::MissingSchedule { .. })
        ));
    }
}
