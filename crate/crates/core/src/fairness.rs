//! Quality-fairness analytics: Jain's index over per-user quality,
//! priority-metric sign-flip quality deltas, and empirical checks of
//! the sufficient conditions for the index to converge to one.

use serde::Serialize;

use crate::media::ClassSpec;

/// Jain's fairness index `(sum q)^2 / (V * sum q^2)` over per-user
/// quality. `None` when no user has traffic (all-zero vector).
pub fn jain_index(q: &[f64]) -> Option<f64> {
    debug_assert!(!q.is_empty());
    let sum: f64 = q.iter().sum();
    let sq: f64 = q.iter().map(|x| x * x).sum();
    if sq == 0.0 {
        return None;
    }
    Some(sum * sum / (q.len() as f64 * sq))
}

/// Per-user quality change implied by priority-metric sign flips: for
/// each class whose metric crosses zero between consecutive slots, the
/// class's full quality mass enters (flip to positive) or leaves (flip
/// to negative) the user's expected quality.
///
/// `classes[user]` carries `(impact, packets)` per class.
pub fn quality_delta(
    prev_metrics: &[Vec<f64>],
    next_metrics: &[Vec<f64>],
    classes: &[Vec<(f64, u32)>],
) -> Vec<f64> {
    prev_metrics
        .iter()
        .zip(next_metrics)
        .zip(classes)
        .map(|((prev, next), spec)| {
            let mut delta = 0.0;
            for ((&pm0, &pm1), &(q, n)) in prev.iter().zip(next).zip(spec) {
                if pm0 * pm1 < 0.0 {
                    let mass = q * f64::from(n);
                    delta += if pm1 > 0.0 { mass } else { -mass };
                }
            }
            delta
        })
        .collect()
}

/// Sufficient condition for a nondecreasing fairness index under small
/// per-slot quality changes: `sum q^2 * sum d >= sum q * sum (q * d)`.
pub fn lemma2_condition(q: &[f64], dq: &[f64]) -> bool {
    debug_assert_eq!(q.len(), dq.len());
    let sq: f64 = q.iter().map(|x| x * x).sum();
    let sd: f64 = dq.iter().sum();
    let s: f64 = q.iter().sum();
    let sqd: f64 = q.iter().zip(dq).map(|(a, b)| a * b).sum();
    sq * sd >= s * sqd
}

/// One pass/fail condition with an optional counterexample.
#[derive(Debug, Clone, Serialize)]
pub struct Condition {
    pub pass: bool,
    pub detail: Option<String>,
}

impl Condition {
    fn pass() -> Self {
        Condition {
            pass: true,
            detail: None,
        }
    }

    fn fail(detail: String) -> Self {
        Condition {
            pass: false,
            detail: Some(detail),
        }
    }
}

/// Report on the sufficient conditions for quality-fairness
/// convergence across a set of users.
#[derive(Debug, Clone, Serialize)]
pub struct FairnessConditions {
    /// Users share one distortion-impact vector.
    pub shared_impacts: Condition,
    /// Across users, class sizes respect the impact ordering.
    pub size_ordering: Condition,
    /// Sampled expected priority metrics are nonincreasing in the
    /// hypothetical window for every class of every user.
    pub metric_monotone: Condition,
}

impl FairnessConditions {
    pub fn all_pass(&self) -> bool {
        self.shared_impacts.pass && self.size_ordering.pass && self.metric_monotone.pass
    }
}

/// Expected priority metrics of one user sampled on a grid of
/// hypothetical windows: `(window, per-class metric)` rows in
/// increasing window order.
pub type MetricSamples = Vec<(u32, Vec<f64>)>;

/// Checks the convergence conditions: shared impact vectors, class
/// sizes ordered consistently with impacts across every user pair, and
/// empirically nonincreasing expected metrics in the window.
pub fn check_theorem4_conditions(
    users: &[Vec<ClassSpec>],
    metric_samples: &[MetricSamples],
) -> FairnessConditions {
    assert!(users.len() >= 2, "need at least two users to compare");
    const EPS: f64 = 1e-12;

    let mut shared = Condition::pass();
    'shared: for (n, user) in users.iter().enumerate().skip(1) {
        if user.len() != users[0].len() {
            shared = Condition::fail(format!(
                "user 1 has {} classes, user {} has {}",
                users[0].len(),
                n + 1,
                user.len()
            ));
            break;
        }
        for (m, (a, b)) in users[0].iter().zip(user).enumerate() {
            if (a.q - b.q).abs() > EPS {
                shared = Condition::fail(format!(
                    "class {}: user 1 impact {} vs user {} impact {}",
                    m + 1,
                    a.q,
                    n + 1,
                    b.q
                ));
                break 'shared;
            }
        }
    }

    let mut ordering = Condition::pass();
    'ordering: for (n1, u1) in users.iter().enumerate() {
        for (n2, u2) in users.iter().enumerate() {
            for (m1, a) in u1.iter().enumerate() {
                for (m2, b) in u2.iter().enumerate() {
                    if a.q >= b.q - EPS && a.n0 < b.n0 {
                        ordering = Condition::fail(format!(
                            "user {} class {} (impact {}, {} packets) vs user {} class {} \
                             (impact {}, {} packets)",
                            n1 + 1,
                            m1 + 1,
                            a.q,
                            a.n0,
                            n2 + 1,
                            m2 + 1,
                            b.q,
                            b.n0
                        ));
                        break 'ordering;
                    }
                }
            }
        }
    }

    let mut monotone = Condition::pass();
    'monotone: for (n, samples) in metric_samples.iter().enumerate() {
        for pair in samples.windows(2) {
            let (w_lo, ref pm_lo) = pair[0];
            let (w_hi, ref pm_hi) = pair[1];
            for (m, (&a, &b)) in pm_lo.iter().zip(pm_hi).enumerate() {
                if b > a + 1e-9 {
                    monotone = Condition::fail(format!(
                        "user {} class {}: metric rises from {} at window {} to {} at window {}",
                        n + 1,
                        m + 1,
                        a,
                        w_lo,
                        b,
                        w_hi
                    ));
                    break 'monotone;
                }
            }
        }
    }

    FairnessConditions {
        shared_impacts: shared,
        size_ordering: ordering,
        metric_monotone: monotone,
    }
}
