//! Per-slot congestion controllers behind one decision interface.
//!
//! Three controllers are provided:
//!
//! - `mt`: the foresighted packet-based controller, which plans over the
//!   horizon and jointly picks a window and per-class permissions;
//! - `rd`: a myopic flow-based baseline that greedily packs the highest
//!   -impact classes into the expected TCP window budget;
//! - `pa`: passive transmission over a plain AIMD window, draining
//!   packets in class order with no distortion awareness.

use crate::error::{Error, Result};
use crate::media::{recompute_depths, Action, ClassSpec, Dag};
use crate::solver::{solve_dag, solve_independent, SolverConfig, SystemState};

/// Controller-specific decision detail, recorded in traces.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostics {
    /// Per-class priority metrics from the planner.
    Metrics(Vec<f64>),
    /// Budgeted greedy selection: the budget and the packets granted.
    Budget { budget: u32, granted: u32 },
    /// FIFO drain: packets sent per class this slot.
    Fifo { sent: Vec<u32> },
}

/// One slot's controller output.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    /// Congestion window for the slot (packets).
    pub window: u32,
    /// Classes granted transmission this slot. For the FIFO controller
    /// a permission means the class's buffer fully drains.
    pub permissions: Action,
    pub diagnostics: Diagnostics,
}

/// Foresighted controller: delegates to the horizon planner (the
/// depth-ordered sweep when dependency edges exist) and caps the window
/// at the top of the quantized grid, shedding the lowest-metric grants
/// first.
pub fn mt_decide(specs: &[ClassSpec], state: &SystemState, cfg: &SolverConfig) -> Result<Decision> {
    let dag = Dag::new(specs)?;
    let solution = if dag.has_edges() {
        solve_dag(specs, state, cfg)?
    } else {
        solve_independent(specs, state, cfg)?
    };
    let mut permissions = solution.result.permissions;
    let metrics = solution.result.metrics;
    let mut window = solution.result.window;

    let cap = *cfg.chain.grid().last().expect("nonempty grid");
    if window > cap {
        // Shed grants in ascending metric order until the window fits.
        let mut granted: Vec<usize> = (0..specs.len()).filter(|&m| permissions.0[m]).collect();
        granted.sort_by(|&a, &b| {
            metrics[a]
                .partial_cmp(&metrics[b])
                .unwrap()
                .then(b.cmp(&a))
        });
        for m in granted {
            if window <= cap {
                break;
            }
            permissions.0[m] = false;
            window -= state.occupancy[m].min(cfg.n_max);
        }
    }

    Ok(Decision {
        window,
        permissions,
        diagnostics: Diagnostics::Metrics(metrics),
    })
}

/// Myopic flow-based baseline: greedy selection by availability-gated
/// impact under a packet budget, highest impact first, never splitting
/// a class. Classes whose undelivered ancestors are not part of the
/// selection are ineligible, which prunes the subtree under any class
/// that does not fit.
pub fn rd_decide(specs: &[ClassSpec], state: &SystemState, budget: u32) -> Result<Decision> {
    let dag = Dag::new(specs)?;
    let depths = recompute_depths(&dag, &state.delivered);
    let m = specs.len();
    let mut selected = vec![false; m];
    let mut remaining = budget;

    loop {
        let mut pick: Option<usize> = None;
        for cand in 0..m {
            if selected[cand] || specs[cand].q <= 0.0 {
                continue;
            }
            let n = state.occupancy[cand];
            if n == 0 || n > remaining {
                continue;
            }
            let decodable = dag
                .ancestors(cand)
                .iter()
                .all(|&a| state.delivered[a] || selected[a]);
            if !decodable {
                continue;
            }
            let better = match pick {
                None => true,
                Some(best) => {
                    let dq = specs[cand].q - specs[best].q;
                    dq > 0.0
                        || (dq == 0.0
                            && (depths[cand], specs[cand].id) < (depths[best], specs[best].id))
                }
            };
            if better {
                pick = Some(cand);
            }
        }
        match pick {
            Some(best) => {
                selected[best] = true;
                remaining -= state.occupancy[best];
            }
            None => break,
        }
    }

    let window = budget - remaining;
    Ok(Decision {
        window,
        permissions: Action(selected),
        diagnostics: Diagnostics::Budget {
            budget,
            granted: window,
        },
    })
}

/// Passive transmission over TCP: drain up to the AIMD window in class
/// order (ascending depth, then ascending id), with no distortion
/// awareness. A permission is reported only for classes whose buffer
/// fully drains this slot.
pub fn pa_decide(specs: &[ClassSpec], state: &SystemState, tcp_window: u32) -> Result<Decision> {
    if specs.len() != state.occupancy.len() {
        return Err(Error::Precondition(
            "state does not cover the workload".into(),
        ));
    }
    let dag = Dag::new(specs)?;
    let depths = recompute_depths(&dag, &state.delivered);
    let mut order: Vec<usize> = (0..specs.len()).collect();
    order.sort_by_key(|&i| (depths[i], specs[i].id));

    let buffered: u32 = state.occupancy.iter().sum();
    let mut budget = tcp_window.min(buffered);
    let window = budget;
    let mut sent = vec![0u32; specs.len()];
    let mut permissions = vec![false; specs.len()];
    for &i in &order {
        if budget == 0 {
            break;
        }
        let take = state.occupancy[i].min(budget);
        sent[i] = take;
        budget -= take;
        if take > 0 && take == state.occupancy[i] {
            permissions[i] = true;
        }
    }

    Ok(Decision {
        window,
        permissions: Action(permissions),
        diagnostics: Diagnostics::Fifo { sent },
    })
}
