//! The analytic core of the sparsification: point weights, relaxed
//! distances, projections onto levels, and the critical scale values at
//! which the sparse complex changes.
//!
//! The weight of a point is a piecewise linear ramp in the scale `alpha`:
//! zero until `(1 - 2 eps) * time(p)`, rising to `eps * time(p)` at the
//! point's deletion time, and `eps * alpha` afterwards. The middle piece has
//! slope 1/2: that is the unique slope joining the two outer pieces
//! continuously at both breakpoints, and it keeps the gradient bound of 1/2
//! that the scale-monotonicity of relaxed distances relies on.

use thiserror::Error;

use crate::greedy::{DeletionSchedule, GreedyPermutation};
use crate::metric::FiniteMetricSpace;

#[derive(Debug, Error)]
pub enum SparseError {
    #[error("level is empty")]
    EmptyLevel,
    #[error("traversal position {pos} out of range for k = {k}")]
    PositionOutOfRange { pos: usize, k: usize },
}

/// Parameters of a single point's weight ramp.
#[derive(Debug, Clone, Copy)]
pub struct WeightParams {
    /// Approximation parameter in (0, 1/3).
    pub epsilon: f64,
    /// The point's deletion time; positive infinity for the start point.
    pub deletion_time: f64,
}

/// The weight of a point at scale `alpha`.
///
/// Zero whenever the deletion time is infinite: such a point never leaves
/// the levels and never ramps.
pub fn weight(alpha: f64, params: WeightParams) -> f64 {
    let t = params.deletion_time;
    if t.is_infinite() {
        return 0.0;
    }
    let ramp_start = (1.0 - 2.0 * params.epsilon) * t;
    if alpha <= ramp_start {
        0.0
    } else if alpha <= t {
        (alpha - ramp_start) / 2.0
    } else {
        params.epsilon * alpha
    }
}

/// Relaxed distance between two points given their plain distance and
/// deletion times: `D + w_alpha(p) + w_alpha(q)`.
pub fn relaxed_distance_value(alpha: f64, d: f64, epsilon: f64, time_p: f64, time_q: f64) -> f64 {
    d + weight(
        alpha,
        WeightParams {
            epsilon,
            deletion_time: time_p,
        },
    ) + weight(
        alpha,
        WeightParams {
            epsilon,
            deletion_time: time_q,
        },
    )
}

fn weight_slope_after(alpha: f64, epsilon: f64, t: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let ramp_start = (1.0 - 2.0 * epsilon) * t;
    if alpha < ramp_start {
        0.0
    } else if alpha < t {
        0.5
    } else {
        epsilon
    }
}

/// The smallest `alpha >= 0` at which the edge qualifies for the relaxed
/// complex, i.e. `inf { alpha : D_alpha(p,q) <= alpha }`.
///
/// `f(alpha) = D_alpha - alpha` is piecewise linear and non-increasing (every
/// piece slope is at most `2 eps - 1 < 0` except the flat piece where both
/// endpoints ramp), and tends to minus infinity, so the root ray is nonempty
/// and its infimum is returned. When a piece is identically zero the left end
/// of that piece is the infimum.
pub fn edge_insertion_alpha(d: f64, epsilon: f64, time_p: f64, time_q: f64) -> f64 {
    let f = |alpha: f64| relaxed_distance_value(alpha, d, epsilon, time_p, time_q) - alpha;
    if f(0.0) <= 0.0 {
        return 0.0;
    }
    let mut breakpoints: Vec<f64> = Vec::with_capacity(4);
    for t in [time_p, time_q] {
        if t.is_finite() {
            breakpoints.push((1.0 - 2.0 * epsilon) * t);
            breakpoints.push(t);
        }
    }
    breakpoints.retain(|&b| b > 0.0);
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();

    let mut lo = 0.0;
    let mut f_lo = f(0.0);
    for b in breakpoints {
        let f_b = f(b);
        if f_b <= 0.0 {
            // Root inside (lo, b]; f is linear there and strictly drops.
            return lo + f_lo * (b - lo) / (f_lo - f_b);
        }
        lo = b;
        f_lo = f_b;
    }
    // Beyond the last breakpoint the slope is constant and negative.
    let slope =
        weight_slope_after(lo, epsilon, time_p) + weight_slope_after(lo, epsilon, time_q) - 1.0;
    debug_assert!(slope < 0.0);
    lo + f_lo / (-slope)
}

/// The critical value of an edge, or `None` when the edge would only qualify
/// at or after one endpoint's deletion and therefore never enters the sparse
/// complex.
pub fn edge_critical_value(d: f64, epsilon: f64, time_p: f64, time_q: f64) -> Option<f64> {
    let alpha = edge_insertion_alpha(d, epsilon, time_p, time_q);
    if alpha < time_p.min(time_q) {
        Some(alpha)
    } else {
        None
    }
}

/// A scale at which the sparse complex changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalEvent {
    pub alpha: f64,
    pub kind: CriticalKind,
}

/// Positions refer to the traversal order, so `later > earlier` and the
/// `later` endpoint is the one deleted first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    EdgeInsertion { later: usize, earlier: usize },
    VertexDeletion { pos: usize },
}

/// All critical values of a traversal: one deletion per selected point after
/// the first, plus the admissible edge insertions, sorted ascending by scale.
/// At equal scale, insertions come before deletions; within each group the
/// order is lexicographic in traversal positions.
pub fn critical_events(
    space: &FiniteMetricSpace,
    perm: &GreedyPermutation,
    sched: &DeletionSchedule,
) -> Vec<CriticalEvent> {
    let k = perm.k();
    let mut events = Vec::new();
    for i in 1..k {
        events.push(CriticalEvent {
            alpha: sched.time[i],
            kind: CriticalKind::VertexDeletion { pos: i },
        });
    }
    for later in 1..k {
        for earlier in 0..later {
            let d = space.dist(perm.order[later], perm.order[earlier]);
            if let Some(alpha) =
                edge_critical_value(d, sched.epsilon, sched.time[later], sched.time[earlier])
            {
                events.push(CriticalEvent {
                    alpha,
                    kind: CriticalKind::EdgeInsertion { later, earlier },
                });
            }
        }
    }
    events.sort_by(|a, b| {
        a.alpha
            .total_cmp(&b.alpha)
            .then_with(|| sort_key(&a.kind).cmp(&sort_key(&b.kind)))
    });
    events
}

fn sort_key(kind: &CriticalKind) -> (u8, usize, usize) {
    match kind {
        CriticalKind::EdgeInsertion { later, earlier } => (0, *earlier, *later),
        CriticalKind::VertexDeletion { pos } => (1, *pos, 0),
    }
}

/// The set of earlier traversal positions whose edge to `pos` is present
/// just below the deletion time of `pos`: exactly the earlier endpoints of
/// the admissible edge insertions incident to `pos`.
pub fn neighbor_set(pos: usize, events: &[CriticalEvent]) -> Vec<usize> {
    let mut neighbors: Vec<usize> = events
        .iter()
        .filter_map(|e| match e.kind {
            CriticalKind::EdgeInsertion { later, earlier } if later == pos => Some(earlier),
            _ => None,
        })
        .collect();
    neighbors.sort_unstable();
    neighbors
}

/// Per-position neighbor-set sizes, useful for the update-count accounting.
pub fn neighbor_set_sizes(events: &[CriticalEvent], k: usize) -> Vec<usize> {
    let mut sizes = vec![0usize; k];
    for e in events {
        if let CriticalKind::EdgeInsertion { later, .. } = e.kind {
            sizes[later] += 1;
        }
    }
    sizes
}

/// Distance queries relaxed by the weights of a deletion schedule, indexed
/// by traversal position.
#[derive(Debug, Clone, Copy)]
pub struct RelaxedMetric<'a> {
    space: &'a FiniteMetricSpace,
    sched: &'a DeletionSchedule,
}

impl<'a> RelaxedMetric<'a> {
    pub fn new(space: &'a FiniteMetricSpace, sched: &'a DeletionSchedule) -> Self {
        RelaxedMetric { space, sched }
    }

    pub fn k(&self) -> usize {
        self.sched.k()
    }

    /// Weight of the point at traversal position `pos` at scale `alpha`.
    pub fn weight_at(&self, alpha: f64, pos: usize) -> f64 {
        weight(
            alpha,
            WeightParams {
                epsilon: self.sched.epsilon,
                deletion_time: self.sched.time[pos],
            },
        )
    }

    /// Plain distance between two traversal positions.
    pub fn dist(&self, pos_i: usize, pos_j: usize) -> f64 {
        self.space
            .dist(self.sched.order[pos_i], self.sched.order[pos_j])
    }

    /// Relaxed distance between two traversal positions at scale `alpha`.
    pub fn relaxed_distance(&self, alpha: f64, pos_i: usize, pos_j: usize) -> f64 {
        self.dist(pos_i, pos_j) + self.weight_at(alpha, pos_i) + self.weight_at(alpha, pos_j)
    }

    /// Projects a selected point onto a level: identity for level members,
    /// otherwise the level member minimizing the relaxed distance, with ties
    /// going to the smallest original point index.
    ///
    /// `level` holds traversal positions; the projection is returned as a
    /// traversal position.
    pub fn project(&self, alpha: f64, pos: usize, level: &[usize]) -> Result<usize, SparseError> {
        if level.is_empty() {
            return Err(SparseError::EmptyLevel);
        }
        if pos >= self.k() {
            return Err(SparseError::PositionOutOfRange { pos, k: self.k() });
        }
        if level.contains(&pos) {
            return Ok(pos);
        }
        let mut best = level[0];
        let mut best_d = f64::INFINITY;
        for &q in level {
            let d = self.relaxed_distance(alpha, pos, q);
            let better =
                d < best_d || (d == best_d && self.sched.order[q] < self.sched.order[best]);
            if better {
                best_d = d;
                best = q;
            }
        }
        Ok(best)
    }

    /// Critical insertion value for the edge between two traversal
    /// positions, after the admissibility cut.
    pub fn edge_critical(&self, pos_i: usize, pos_j: usize) -> Option<f64> {
        edge_critical_value(
            self.dist(pos_i, pos_j),
            self.sched.epsilon,
            self.sched.time[pos_i],
            self.sched.time[pos_j],
        )
    }
}
