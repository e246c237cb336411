//! Farthest-first traversal (greedy permutation), insertion radii, deletion
//! times and the level hierarchy derived from them.
//!
//! The traversal keeps, for every point, its distance to the already chosen
//! prefix and picks the farthest point next, so selecting `k` points costs
//! `O(kn)` distance evaluations. The radius of the i-th selected point is its
//! distance to the previous selections; radii are non-increasing and the
//! greedy prefix is a 2-approximation of optimal k-center cost, which
//! [`optimal_kcenter`] verifies by brute force on small inputs.

use thiserror::Error;

use crate::metric::FiniteMetricSpace;

/// Largest `n` accepted by the exhaustive k-center oracle.
pub const KCENTER_BRUTE_FORCE_CAP: usize = 14;

#[derive(Debug, Error)]
pub enum GreedyError {
    #[error("k = {k} out of range 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("start index {start} out of range for {n} points")]
    StartOutOfRange { start: usize, n: usize },
    #[error("epsilon = {0} outside the open interval (0, 1/3)")]
    EpsilonOutOfRange(f64),
    #[error("n = {n} exceeds the brute-force cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("saved traversal is not a valid prefix: {0}")]
    BadPrefix(String),
}

/// Result of a farthest-first traversal of `k` points.
///
/// `order[0]` is the chosen start; `rad[0]` is positive infinity by
/// convention, and `rad[i]` for `i >= 1` is the distance from `order[i]` to
/// the earlier selections. `distance_to_prefix[q]` is the distance from point
/// `q` of the ambient space to the full selected set.
#[derive(Debug, Clone)]
pub struct GreedyPermutation {
    pub order: Vec<usize>,
    pub rad: Vec<f64>,
    pub distance_to_prefix: Vec<f64>,
}

impl GreedyPermutation {
    pub fn k(&self) -> usize {
        self.order.len()
    }

    /// Position of a point index within the traversal, if selected.
    pub fn position_of(&self, point: usize) -> Option<usize> {
        self.order.iter().position(|&p| p == point)
    }
}

/// Deletion times for the selected points: `time = rad / (eps * (1 - 2 eps))`,
/// infinite for the start point. Stored parallel to the traversal order.
#[derive(Debug, Clone)]
pub struct DeletionSchedule {
    pub epsilon: f64,
    pub order: Vec<usize>,
    pub time: Vec<f64>,
}

impl DeletionSchedule {
    pub fn k(&self) -> usize {
        self.order.len()
    }

    /// Deletion time of the point at traversal position `pos`.
    pub fn time_at(&self, pos: usize) -> f64 {
        self.time[pos]
    }

    /// The level at scale `alpha`: traversal positions of the selected points
    /// whose deletion time is strictly greater than `alpha`. Because times
    /// are non-increasing along the traversal, this is always a prefix and it
    /// always contains position 0.
    pub fn level_positions(&self, alpha: f64) -> Vec<usize> {
        (0..self.k()).filter(|&i| self.time[i] > alpha).collect()
    }

    /// The level at scale `alpha` as original point indices.
    pub fn level(&self, alpha: f64) -> Vec<usize> {
        self.level_positions(alpha)
            .into_iter()
            .map(|i| self.order[i])
            .collect()
    }
}

fn check_epsilon(epsilon: f64) -> Result<(), GreedyError> {
    if epsilon > 0.0 && epsilon < 1.0 / 3.0 {
        Ok(())
    } else {
        Err(GreedyError::EpsilonOutOfRange(epsilon))
    }
}

/// The denominator `eps * (1 - 2 eps)` shared by deletion times, covering and
/// packing bounds.
pub fn time_scale(epsilon: f64) -> f64 {
    epsilon * (1.0 - 2.0 * epsilon)
}

/// Runs the farthest-first traversal for `k` points starting at `start`.
/// Ties in the arg max go to the smallest point index.
pub fn farthest_first(
    space: &FiniteMetricSpace,
    k: usize,
    start: usize,
) -> Result<GreedyPermutation, GreedyError> {
    let n = space.len();
    if k == 0 || k > n {
        return Err(GreedyError::KOutOfRange { k, n });
    }
    if start >= n {
        return Err(GreedyError::StartOutOfRange { start, n });
    }
    let mut perm = GreedyPermutation {
        order: Vec::with_capacity(k),
        rad: Vec::with_capacity(k),
        distance_to_prefix: vec![f64::INFINITY; n],
    };
    select(space, &mut perm, start, f64::INFINITY);
    while perm.order.len() < k {
        let (next, residual) = farthest_remaining(&perm.distance_to_prefix);
        select(space, &mut perm, next, residual);
    }
    Ok(perm)
}

/// Continues a traversal from a saved prefix up to `k` points, reproducing
/// exactly what a fresh run would have produced. The prefix radii are
/// recomputed while replaying, so a prefix that could not have come from the
/// greedy rule is reported as an error.
pub fn farthest_first_extend(
    space: &FiniteMetricSpace,
    prefix: &[usize],
    k: usize,
) -> Result<GreedyPermutation, GreedyError> {
    let n = space.len();
    if prefix.is_empty() {
        return Err(GreedyError::BadPrefix("prefix is empty".into()));
    }
    if k < prefix.len() || k > n {
        return Err(GreedyError::KOutOfRange { k, n });
    }
    for &p in prefix {
        if p >= n {
            return Err(GreedyError::StartOutOfRange { start: p, n });
        }
    }
    let mut perm = GreedyPermutation {
        order: Vec::with_capacity(k),
        rad: Vec::with_capacity(k),
        distance_to_prefix: vec![f64::INFINITY; n],
    };
    select(space, &mut perm, prefix[0], f64::INFINITY);
    for &p in &prefix[1..] {
        let (expected, residual) = farthest_remaining(&perm.distance_to_prefix);
        if p != expected {
            return Err(GreedyError::BadPrefix(format!(
                "point {p} selected where the greedy rule picks {expected}"
            )));
        }
        select(space, &mut perm, p, residual);
    }
    while perm.order.len() < k {
        let (next, residual) = farthest_remaining(&perm.distance_to_prefix);
        select(space, &mut perm, next, residual);
    }
    Ok(perm)
}

fn farthest_remaining(residuals: &[f64]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::NEG_INFINITY;
    for (q, &d) in residuals.iter().enumerate() {
        if d > best_d {
            best_d = d;
            best = q;
        }
    }
    (best, best_d)
}

fn select(space: &FiniteMetricSpace, perm: &mut GreedyPermutation, p: usize, rad: f64) {
    perm.order.push(p);
    perm.rad.push(rad);
    for q in 0..space.len() {
        let d = space.dist(q, p);
        if d < perm.distance_to_prefix[q] {
            perm.distance_to_prefix[q] = d;
        }
    }
}

/// Deletion times for a traversal: `rad / (eps (1 - 2 eps))`, infinite for
/// the first point. Requires `0 < eps < 1/3`.
pub fn schedule(perm: &GreedyPermutation, epsilon: f64) -> Result<DeletionSchedule, GreedyError> {
    check_epsilon(epsilon)?;
    let scale = time_scale(epsilon);
    let time = perm.rad.iter().map(|&r| r / scale).collect();
    Ok(DeletionSchedule {
        epsilon,
        order: perm.order.clone(),
        time,
    })
}

/// Exact k-center cost by exhaustive search over all k-subsets of centers:
/// the minimum over subsets `S` of `max_p dist(p, S)`. Guarded by
/// [`KCENTER_BRUTE_FORCE_CAP`] because the subset count is combinatorial.
pub fn optimal_kcenter(space: &FiniteMetricSpace, k: usize) -> Result<f64, GreedyError> {
    let n = space.len();
    if n > KCENTER_BRUTE_FORCE_CAP {
        return Err(GreedyError::CapExceeded {
            n,
            cap: KCENTER_BRUTE_FORCE_CAP,
        });
    }
    if k == 0 || k > n {
        return Err(GreedyError::KOutOfRange { k, n });
    }
    let mut best = f64::INFINITY;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let mut cost = 0.0f64;
        for p in 0..n {
            let d = subset
                .iter()
                .map(|&c| space.dist(p, c))
                .fold(f64::INFINITY, f64::min);
            cost = cost.max(d);
        }
        best = best.min(cost);
        // Next k-combination of 0..n in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(best);
            }
            i -= 1;
            if subset[i] != i + n - k {
                subset[i] += 1;
                for j in (i + 1)..k {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{MetricKind, PointCloud};

    fn line_space(coords: &[f64]) -> FiniteMetricSpace {
        let pts = coords.iter().map(|&x| vec![x]).collect();
        FiniteMetricSpace::from_points(PointCloud::new(pts, MetricKind::Euclidean).unwrap())
    }

    #[test]
    fn traversal_on_line() {
        let s = line_space(&[0.0, 1.0, 2.0, 10.0]);
        let perm = farthest_first(&s, 4, 0).unwrap();
        assert_eq!(perm.order, vec![0, 3, 2, 1]);
        assert_eq!(perm.rad[0], f64::INFINITY);
        assert_eq!(&perm.rad[1..], &[10.0, 2.0, 1.0]);
    }

    #[test]
    fn traversal_k1() {
        let s = line_space(&[5.0, 1.0, 9.0]);
        let perm = farthest_first(&s, 1, 2).unwrap();
        assert_eq!(perm.order, vec![2]);
        assert_eq!(perm.rad, vec![f64::INFINITY]);
    }

    #[test]
    fn residuals_after_two_selections() {
        let s = line_space(&[0.0, 1.0, 2.0, 10.0]);
        let perm = farthest_first(&s, 2, 0).unwrap();
        assert_eq!(perm.distance_to_prefix, vec![0.0, 1.0, 2.0, 0.0]);
    }

    #[test]
    fn k_out_of_range() {
        let s = line_space(&[0.0, 1.0]);
        assert!(matches!(
            farthest_first(&s, 3, 0),
            Err(GreedyError::KOutOfRange { .. })
        ));
        assert!(matches!(
            farthest_first(&s, 0, 0),
            Err(GreedyError::KOutOfRange { .. })
        ));
    }

    #[test]
    fn extend_matches_fresh_run() {
        let s = line_space(&[0.0, 1.0, 2.0, 10.0, -4.0, 6.5]);
        let fresh = farthest_first(&s, 6, 0).unwrap();
        let partial = farthest_first(&s, 2, 0).unwrap();
        let extended = farthest_first_extend(&s, &partial.order, 6).unwrap();
        assert_eq!(extended.order, fresh.order);
        assert_eq!(extended.rad, fresh.rad);
        assert_eq!(extended.distance_to_prefix, fresh.distance_to_prefix);
    }

    #[test]
    fn schedule_times() {
        let s = line_space(&[0.0, 1.0, 2.0, 10.0]);
        let perm = farthest_first(&s, 4, 0).unwrap();
        let sched = schedule(&perm, 0.1).unwrap();
        assert_eq!(sched.time[0], f64::INFINITY);
        let expected = [125.0, 25.0, 12.5];
        for (got, want) in sched.time[1..].iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn schedule_rejects_epsilon_bounds() {
        let s = line_space(&[0.0, 1.0]);
        let perm = farthest_first(&s, 2, 0).unwrap();
        assert!(schedule(&perm, 1.0 / 3.0).is_err());
        assert!(schedule(&perm, 0.0).is_err());
        assert!(schedule(&perm, -0.1).is_err());
    }

    #[test]
    fn schedule_zero_radius_gives_zero_time() {
        let s = line_space(&[0.0, 0.0, 5.0]);
        let perm = farthest_first(&s, 3, 0).unwrap();
        let sched = schedule(&perm, 0.1).unwrap();
        assert_eq!(sched.time[2], 0.0);
    }

    #[test]
    fn level_thresholds() {
        let s = line_space(&[0.0, 1.0, 2.0, 10.0]);
        let sched = schedule(&farthest_first(&s, 4, 0).unwrap(), 0.1).unwrap();
        // times (inf, 125, 25, 12.5)
        assert_eq!(sched.level_positions(20.0), vec![0, 1, 2]);
        assert_eq!(sched.level_positions(0.0), vec![0, 1, 2, 3]);
        assert_eq!(sched.level_positions(125.0), vec![0]);
        assert_eq!(sched.level(20.0), vec![0, 3, 2]);
    }

    #[test]
    fn level_is_antitone() {
        let s = line_space(&[0.0, 0.7, 3.1, 9.4, 4.4]);
        let sched = schedule(&farthest_first(&s, 5, 0).unwrap(), 0.2).unwrap();
        let alphas = [0.0, 1.0, 5.0, 20.0, 100.0, 1e6];
        for w in alphas.windows(2) {
            let low = sched.level_positions(w[0]);
            let high = sched.level_positions(w[1]);
            assert!(high.iter().all(|p| low.contains(p)));
        }
    }

    #[test]
    fn kcenter_line_examples() {
        let s = line_space(&[0.0, 1.0, 2.0, 10.0]);
        assert_eq!(optimal_kcenter(&s, 2).unwrap(), 1.0);
        assert_eq!(optimal_kcenter(&s, 4).unwrap(), 0.0);
        assert_eq!(optimal_kcenter(&s, 1).unwrap(), 8.0);
    }

    #[test]
    fn kcenter_cap_enforced() {
        let coords: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let s = line_space(&coords);
        assert!(matches!(
            optimal_kcenter(&s, 2),
            Err(GreedyError::CapExceeded { .. })
        ));
    }

    #[test]
    fn radii_non_increasing_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n = rng.gen_range(2..30);
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
                .collect();
            let s = FiniteMetricSpace::from_points(
                PointCloud::new(pts, MetricKind::Euclidean).unwrap(),
            );
            let perm = farthest_first(&s, n, 0).unwrap();
            for w in perm.rad.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn greedy_two_approximation_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let n = rng.gen_range(2..=12usize);
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
                .collect();
            let s = FiniteMetricSpace::from_points(
                PointCloud::new(pts, MetricKind::Euclidean).unwrap(),
            );
            let perm = farthest_first(&s, n, 0).unwrap();
            for k in 2..=n {
                // Greedy cost after k selections is the next insertion
                // radius, or 0 once every point has been selected.
                let greedy_cost = if k < n { perm.rad[k] } else { 0.0 };
                let opt = optimal_kcenter(&s, k).unwrap();
                assert!(
                    greedy_cost <= 2.0 * opt + 1e-12,
                    "k={k} greedy={greedy_cost} opt={opt}"
                );
            }
        }
    }

    #[test]
    fn covering_and_packing_on_prefix() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(3..20);
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
                .collect();
            let s = FiniteMetricSpace::from_points(
                PointCloud::new(pts, MetricKind::Euclidean).unwrap(),
            );
            let k = rng.gen_range(2..=n);
            let eps = [0.05, 0.1, 0.2, 0.3][rng.gen_range(0..4)];
            let perm = farthest_first(&s, k, 0).unwrap();
            let sched = schedule(&perm, eps).unwrap();
            let scale = time_scale(eps);
            for _ in 0..10 {
                let alpha = rng.gen::<f64>() * 2.0 * sched.time[1].min(1e9);
                let level = sched.level(alpha);
                // Covering over the selected prefix.
                for &p in &perm.order {
                    let d = level
                        .iter()
                        .map(|&q| s.dist(p, q))
                        .fold(f64::INFINITY, f64::min);
                    assert!(d <= scale * alpha + 1e-9, "covering failed");
                }
                // Packing within the level.
                for (a, &p) in level.iter().enumerate() {
                    for &q in &level[a + 1..] {
                        assert!(s.dist(p, q) >= scale * alpha - 1e-9, "packing failed");
                    }
                }
            }
        }
    }
}
