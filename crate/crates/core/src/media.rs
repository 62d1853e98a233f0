//! Packet-class domain model: class parameters, dependency DAG, buffer
//! occupancy dynamics, and per-slot distortion accounting.
//!
//! Multimedia packets are grouped into classes. Each class carries a
//! per-packet distortion impact (dB), a buffer occupancy, an
//! arrival/expiry schedule, and decode dependencies on other classes
//! expressed as a DAG. A class contributes quality only when every
//! ancestor in the DAG has been made available at the receiver.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Static description of one packet class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    /// Class identifier (1-based, unique within a workload).
    pub id: u32,
    /// Distortion impact per packet (dB), nonnegative.
    pub q: f64,
    /// Packets produced per group-of-pictures cycle.
    pub n0: u32,
    /// Ids of direct DAG predecessors (classes that must decode first).
    pub parents: Vec<u32>,
    /// Time the packets become ready for transmission (seconds, within
    /// the first cycle).
    pub arrival_time: f64,
    /// Time the packets expire and are purged (seconds).
    pub deadline: f64,
}

impl ClassSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.q >= 0.0) {
            return Err(Error::Config(format!(
                "class {}: distortion impact must be nonnegative, got {}",
                self.id, self.q
            )));
        }
        if self.deadline < self.arrival_time {
            return Err(Error::Config(format!(
                "class {}: deadline {} precedes arrival time {}",
                self.id, self.deadline, self.arrival_time
            )));
        }
        Ok(())
    }
}

/// Per-slot dynamic state of one class.
///
/// `arrivals` and `discards` are the counts scheduled for the current
/// slot; `discards` never exceeds `n`. `depth` is the distance to the
/// nearest undelivered root of the dependency graph, and `delivered`
/// latches once the class has transmitted a nonempty buffer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassState {
    pub n: u32,
    pub arrivals: u32,
    pub discards: u32,
    pub depth: u32,
    pub delivered: bool,
}

impl ClassState {
    pub fn validate(&self, n_max: u32) -> Result<()> {
        if self.n > n_max {
            return Err(Error::Domain(format!(
                "occupancy {} exceeds buffer bound {}",
                self.n, n_max
            )));
        }
        if self.discards > self.n {
            return Err(Error::Domain(format!(
                "discards {} exceed occupancy {}",
                self.discards, self.n
            )));
        }
        Ok(())
    }
}

/// Per-slot transmission permissions, one flag per class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action(pub Vec<bool>);

impl Action {
    pub fn none(m: usize) -> Self {
        Action(vec![false; m])
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&p| p).count()
    }
}

/// Advances one class through a slot boundary.
///
/// Occupancy follows `n' = (n - discards) * (1 - permit) + arrivals`,
/// clamped to `[0, n_max]`: a granted class empties its buffer (only the
/// slot's arrivals remain for the next slot), a denied class keeps what
/// did not expire. The delivered flag latches when a nonempty buffer is
/// granted.
pub fn app_transition(state: &ClassState, permit: bool, n_max: u32) -> ClassState {
    let kept = if permit {
        0
    } else {
        state.n.saturating_sub(state.discards)
    };
    let n = (kept + state.arrivals).min(n_max);
    ClassState {
        n,
        arrivals: 0,
        discards: 0,
        depth: state.depth,
        delivered: state.delivered || (permit && state.n > 0),
    }
}

/// Dependency graph over a workload's classes, with transitive ancestor
/// and descendant sets precomputed. Construction validates parent ids
/// and rejects cycles.
#[derive(Debug, Clone)]
pub struct Dag {
    /// Transitive ancestors by class index.
    anc: Vec<Vec<usize>>,
    /// Transitive descendants by class index.
    desc: Vec<Vec<usize>>,
    parents: Vec<Vec<usize>>,
}

impl Dag {
    pub fn new(specs: &[ClassSpec]) -> Result<Self> {
        let index: BTreeMap<u32, usize> =
            specs.iter().enumerate().map(|(i, s)| (s.id, i)).collect();
        if index.len() != specs.len() {
            return Err(Error::Config("duplicate class ids".into()));
        }
        let mut parents = Vec::with_capacity(specs.len());
        for spec in specs {
            let mut row = Vec::with_capacity(spec.parents.len());
            for pid in &spec.parents {
                let &pi = index.get(pid).ok_or(Error::UnknownClass(*pid))?;
                row.push(pi);
            }
            parents.push(row);
        }

        // Transitive ancestors via DFS; a class reachable from itself is a cycle.
        let m = specs.len();
        let mut anc = vec![Vec::new(); m];
        for i in 0..m {
            let mut seen = vec![false; m];
            let mut stack = parents[i].clone();
            while let Some(p) = stack.pop() {
                if p == i {
                    return Err(Error::Cycle(specs[i].id));
                }
                if !seen[p] {
                    seen[p] = true;
                    stack.extend_from_slice(&parents[p]);
                }
            }
            anc[i] = (0..m).filter(|&j| seen[j]).collect();
        }
        let mut desc = vec![Vec::new(); m];
        for i in 0..m {
            for &a in &anc[i] {
                desc[a].push(i);
            }
        }
        Ok(Dag { anc, desc, parents })
    }

    pub fn ancestors(&self, i: usize) -> &[usize] {
        &self.anc[i]
    }

    pub fn descendants(&self, i: usize) -> &[usize] {
        &self.desc[i]
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn has_edges(&self) -> bool {
        self.parents.iter().any(|p| !p.is_empty())
    }

    pub fn len(&self) -> usize {
        self.anc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anc.is_empty()
    }
}

/// Effective per-packet distortion impact of a class given receiver-side
/// availability: the full impact if every transitive ancestor is
/// available, zero otherwise.
pub fn actual_distortion(spec: &ClassSpec, dag: &Dag, idx: usize, available: &[bool]) -> f64 {
    if dag.ancestors(idx).iter().all(|&a| available[a]) {
        spec.q
    } else {
        0.0
    }
}

/// Distortion reduction realized by an action: the sum over granted
/// classes of effective impact times buffered packets.
pub fn distortion_reduction(
    specs: &[ClassSpec],
    states: &[ClassState],
    dag: &Dag,
    action: &Action,
    available: &[bool],
) -> f64 {
    let mut total = 0.0;
    for (i, spec) in specs.iter().enumerate() {
        if action.0[i] && states[i].n > 0 {
            total += actual_distortion(spec, dag, i, available) * f64::from(states[i].n);
        }
    }
    total
}

/// Depths over the graph with delivered classes removed: a class whose
/// remaining parents are all delivered (or that has none) sits at depth
/// 0, and every other class sits one past its deepest undelivered
/// parent.
pub fn recompute_depths(dag: &Dag, delivered: &[bool]) -> Vec<u32> {
    let m = dag.len();
    let mut depths = vec![0u32; m];
    // Ancestor sets are acyclic by construction, so a fixed-point sweep
    // over classes ordered by ancestor count terminates.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| dag.ancestors(i).len());
    for &i in &order {
        depths[i] = dag
            .parents(i)
            .iter()
            .filter(|&&p| !delivered[p])
            .map(|&p| depths[p] + 1)
            .max()
            .unwrap_or(0);
    }
    depths
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn state(n: u32, arrivals: u32, discards: u32) -> ClassState {
        ClassState {
            n,
            arrivals,
            discards,
            depth: 0,
            delivered: false,
        }
    }

    #[test]
    fn transition_granted_keeps_only_arrivals() {
        let next = app_transition(&state(10, 2, 3), true, 64);
        assert_eq!(next.n, 2);
        assert!(next.delivered);
    }

    #[test]
    fn transition_denied_drops_expired_and_accumulates() {
        let next = app_transition(&state(10, 2, 3), false, 64);
        assert_eq!(next.n, 9);
        assert!(!next.delivered);
    }

    #[test]
    fn transition_pure_arrival() {
        let next = app_transition(&state(0, 5, 0), false, 64);
        assert_eq!(next.n, 5);
    }

    #[test]
    fn transition_clamps_to_buffer_bound() {
        let next = app_transition(&state(6, 5, 0), false, 8);
        assert_eq!(next.n, 8);
    }

    #[test]
    fn granting_empty_buffer_does_not_deliver() {
        let next = app_transition(&state(0, 1, 0), true, 8);
        assert!(!next.delivered);
        assert_eq!(next.n, 1);
    }

    #[test]
    fn actual_distortion_requires_all_ancestors() {
        let specs = vec![
            spec(1, 0.09, 12, &[]),
            spec(2, 0.154, 17, &[1]),
            spec(3, 0.08, 12, &[2]),
        ];
        let dag = Dag::new(&specs).unwrap();
        // Root class: empty ancestor product.
        assert_eq!(actual_distortion(&specs[0], &dag, 0, &[false; 3]), 0.09);
        // All ancestors available.
        assert_eq!(
            actual_distortion(&specs[2], &dag, 2, &[true, true, false]),
            0.08
        );
        // Transitive ancestor missing.
        assert_eq!(
            actual_distortion(&specs[2], &dag, 2, &[false, true, false]),
            0.0
        );
        assert_eq!(
            actual_distortion(&specs[1], &dag, 1, &[false, false, false]),
            0.0
        );
    }

    #[test]
    fn distortion_reduction_sums_granted_classes() {
        let specs = vec![spec(1, 0.154, 17, &[]), spec(2, 0.08, 12, &[1])];
        let dag = Dag::new(&specs).unwrap();
        let states = vec![state(17, 0, 0), state(12, 0, 0)];

        let all_off = Action::none(2);
        assert_eq!(
            distortion_reduction(&specs, &states, &dag, &all_off, &[true, true]),
            0.0
        );

        let first_only = Action(vec![true, false]);
        let got = distortion_reduction(&specs, &states, &dag, &first_only, &[true, false]);
        assert!((got - 2.618).abs() < 1e-12);

        // Orphaned descendant contributes nothing even when granted.
        let both = Action(vec![true, true]);
        let got = distortion_reduction(&specs, &states, &dag, &both, &[false, false]);
        assert!((got - 2.618).abs() < 1e-12);
    }

    #[test]
    fn depths_follow_undelivered_chain() {
        let specs = vec![
            spec(1, 0.2, 4, &[]),
            spec(2, 0.1, 4, &[1]),
            spec(3, 0.05, 4, &[2]),
        ];
        let dag = Dag::new(&specs).unwrap();
        assert_eq!(recompute_depths(&dag, &[false; 3]), vec![0, 1, 2]);
        // Delivering the root promotes the rest of the chain.
        assert_eq!(recompute_depths(&dag, &[true, false, false]), vec![0, 0, 1]);
    }

    #[test]
    fn depths_all_zero_without_edges() {
        let specs = vec![spec(1, 0.1, 1, &[]), spec(2, 0.1, 1, &[])];
        let dag = Dag::new(&specs).unwrap();
        assert_eq!(recompute_depths(&dag, &[false, false]), vec![0, 0]);
    }

    #[test]
    fn cycle_is_rejected() {
        let specs = vec![spec(1, 0.1, 1, &[2]), spec(2, 0.1, 1, &[1])];
        match Dag::new(&specs) {
            Err(Error::Cycle(_)) => {}
            other => panic!("expected cycle error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_parent_is_rejected() {
        let specs = vec![spec(1, 0.1, 1, &[9])];
        match Dag::new(&specs) {
            Err(Error::UnknownClass(9)) => {}
            other => panic!("expected unknown class error, got {other:?}"),
        }
    }

    #[test]
    fn depth_exceeds_every_undelivered_ancestor() {
        // Diamond: 1 -> {2,3} -> 4.
        let specs = vec![
            spec(1, 0.4, 1, &[]),
            spec(2, 0.3, 1, &[1]),
            spec(3, 0.3, 1, &[1]),
            spec(4, 0.2, 1, &[2, 3]),
        ];
        let dag = Dag::new(&specs).unwrap();
        for delivered in [
            vec![false, false, false, false],
            vec![true, false, false, false],
            vec![true, true, false, false],
            vec![true, true, true, false],
        ] {
            let depths = recompute_depths(&dag, &delivered);
            for i in 0..4 {
                if delivered[i] {
                    continue;
                }
                for &a in dag.ancestors(i) {
                    if !delivered[a] {
                        assert!(depths[i] > depths[a]);
                    }
                }
            }
        }
    }
}
