//! Comparing persistence diagrams: L1 offset containment (the stability
//! guarantee), bottleneck distance, and the additive/multiplicative band
//! checks that encode the pipeline's error bounds.
//!
//! Offset containment is pointwise (every point of one diagram must be close
//! to some point of the other, or to the diagonal); the band checks and the
//! bottleneck distance need an actual partial matching, built by maximum
//! bipartite matching with per-point diagonal slots. Points with infinite
//! death form a separate matching class compared by birth only.

use crate::persistence::{DiagramPoint, PersistenceDiagram};

/// Slack for the floating-point comparisons in all checks.
pub const MATCH_TOL: f64 = 1e-9;

fn dims_of(a: &PersistenceDiagram, b: &PersistenceDiagram) -> Vec<usize> {
    let mut dims: Vec<usize> = a.points().iter().chain(b.points()).map(|p| p.dim).collect();
    dims.sort_unstable();
    dims.dedup();
    dims
}

/// L1 distance between two finite diagram points.
fn l1(p: &DiagramPoint, q: &DiagramPoint) -> f64 {
    (p.birth - q.birth).abs() + (p.death - q.death).abs()
}

/// L1 distance from a finite point to the diagonal: the nearest diagonal
/// point is anywhere in the interval [birth, death], at distance
/// `death - birth`.
fn l1_to_diagonal(p: &DiagramPoint) -> f64 {
    p.death - p.birth
}

/// Smallest `r` such that every point of `a` lies within L1 distance `r` of
/// some point of `b` or of the diagonal (per dimension). Points with
/// infinite death must find an infinite partner within `r` of their birth;
/// if none exists the needed radius is infinite.
pub fn directed_offset_radius(a: &PersistenceDiagram, b: &PersistenceDiagram) -> f64 {
    let mut needed = 0.0f64;
    for p in a.points() {
        let candidates = b.points_in_dim(p.dim);
        let best = if p.is_infinite() {
            candidates
                .filter(|q| q.is_infinite())
                .map(|q| (p.birth - q.birth).abs())
                .fold(f64::INFINITY, f64::min)
        } else {
            candidates
                .filter(|q| !q.is_infinite())
                .map(|q| l1(p, q))
                .fold(l1_to_diagonal(p), f64::min)
        };
        needed = needed.max(best);
    }
    needed
}

/// Whether every point of `a` is within L1 distance `r` of a point of `b`
/// or of the diagonal, per dimension.
pub fn l1_offset_contained(a: &PersistenceDiagram, b: &PersistenceDiagram, r: f64) -> bool {
    directed_offset_radius(a, b) <= r + MATCH_TOL
}

/// Both offset directions at the same radius: the shape of the stability
/// guarantee for interleaved filtrations.
pub fn additive_band_check(a: &PersistenceDiagram, b: &PersistenceDiagram, r: f64) -> bool {
    l1_offset_contained(a, b, r) && l1_offset_contained(b, a, r)
}

/// Maximum bipartite matching (Kuhn's augmenting paths). `adj[l]` lists the
/// right vertices reachable from left vertex `l`.
fn max_matching(n_right: usize, adj: &[Vec<usize>]) -> usize {
    let mut match_right: Vec<Option<usize>> = vec![None; n_right];
    let mut size = 0;
    for left in 0..adj.len() {
        let mut visited = vec![false; n_right];
        if augment(left, adj, &mut match_right, &mut visited) {
            size += 1;
        }
    }
    size
}

fn augment(
    left: usize,
    adj: &[Vec<usize>],
    match_right: &mut [Option<usize>],
    visited: &mut [bool],
) -> bool {
    for &right in &adj[left] {
        if visited[right] {
            continue;
        }
        visited[right] = true;
        let vacant = match match_right[right] {
            None => true,
            Some(owner) => augment(owner, adj, match_right, visited),
        };
        if vacant {
            match_right[right] = Some(left);
            return true;
        }
    }
    false
}

/// Feasibility of a perfect partial matching: left points either match a
/// right point through an allowed edge or retire to the diagonal when
/// allowed, and symmetrically for right points. Implemented as a perfect
/// matching in the doubled graph where each side's ghost copies accept the
/// other side's diagonal retirements.
fn partial_matching_feasible(
    n_a: usize,
    n_b: usize,
    edge: impl Fn(usize, usize) -> bool,
    a_diagonal_ok: impl Fn(usize) -> bool,
    b_diagonal_ok: impl Fn(usize) -> bool,
) -> bool {
    // Left: a-points then ghosts of b-points. Right: b-points then ghosts of
    // a-points.
    let total = n_a + n_b;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for (i, targets) in adj.iter_mut().enumerate().take(n_a) {
        for j in 0..n_b {
            if edge(i, j) {
                targets.push(j);
            }
        }
        if a_diagonal_ok(i) {
            targets.push(n_b + i);
        }
    }
    for (j, targets) in adj.iter_mut().skip(n_a).enumerate() {
        if b_diagonal_ok(j) {
            targets.push(j);
        }
        targets.extend((0..n_a).map(|i| n_b + i));
    }
    max_matching(total, &adj) == total
}

fn bottleneck_in_dim(a: &[&DiagramPoint], b: &[&DiagramPoint]) -> f64 {
    let a_inf: Vec<f64> = a
        .iter()
        .filter(|p| p.is_infinite())
        .map(|p| p.birth)
        .collect();
    let b_inf: Vec<f64> = b
        .iter()
        .filter(|p| p.is_infinite())
        .map(|p| p.birth)
        .collect();
    if a_inf.len() != b_inf.len() {
        return f64::INFINITY;
    }
    // For points compared by a single coordinate, pairing sorted values
    // minimizes the maximum absolute difference.
    let mut a_inf = a_inf;
    let mut b_inf = b_inf;
    a_inf.sort_by(f64::total_cmp);
    b_inf.sort_by(f64::total_cmp);
    let infinite_part = a_inf
        .iter()
        .zip(&b_inf)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);

    let fa: Vec<&DiagramPoint> = a.iter().filter(|p| !p.is_infinite()).copied().collect();
    let fb: Vec<&DiagramPoint> = b.iter().filter(|p| !p.is_infinite()).copied().collect();
    let linf = |p: &DiagramPoint, q: &DiagramPoint| {
        (p.birth - q.birth).abs().max((p.death - q.death).abs())
    };
    let diag = |p: &DiagramPoint| 0.5 * (p.death - p.birth);
    let mut candidates: Vec<f64> = vec![0.0];
    for p in &fa {
        candidates.push(diag(p));
        for q in &fb {
            candidates.push(linf(p, q));
        }
    }
    for q in &fb {
        candidates.push(diag(q));
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let feasible = |r: f64| {
        partial_matching_feasible(
            fa.len(),
            fb.len(),
            |i, j| linf(fa[i], fb[j]) <= r + MATCH_TOL,
            |i| diag(fa[i]) <= r + MATCH_TOL,
            |j| diag(fb[j]) <= r + MATCH_TOL,
        )
    };
    let mut lo = 0usize;
    let mut hi = candidates.len() - 1;
    debug_assert!(feasible(candidates[hi]));
    if feasible(candidates[0]) {
        return candidates[0].max(infinite_part);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    candidates[hi].max(infinite_part)
}

/// Bottleneck distance: the smallest radius admitting a perfect partial
/// matching under the L-infinity cost with diagonal retirements, taken
/// per dimension and maximized over dimensions.
pub fn bottleneck(a: &PersistenceDiagram, b: &PersistenceDiagram) -> f64 {
    dims_of(a, b)
        .into_iter()
        .map(|dim| {
            let pa: Vec<&DiagramPoint> = a.points_in_dim(dim).collect();
            let pb: Vec<&DiagramPoint> = b.points_in_dim(dim).collect();
            bottleneck_in_dim(&pa, &pb)
        })
        .fold(0.0f64, f64::max)
}

/// Multiplicative band check between a sparse-pipeline diagram `s` and a
/// reference diagram `v`: a partial matching must pair each s-point `(b, d)`
/// with a v-point whose coordinates lie in `[(1-2 eps) b, b] x [(1-2 eps) d, d]`,
/// unmatched s-points must satisfy `(1-2 eps) d <= b`, unmatched v-points
/// `d' <= b' / (1-2 eps)`, and infinite deaths pair with infinite deaths
/// with births in band.
pub fn multiplicative_band_check(
    s: &PersistenceDiagram,
    v: &PersistenceDiagram,
    epsilon: f64,
) -> bool {
    let shrink = 1.0 - 2.0 * epsilon;
    for dim in dims_of(s, v) {
        let ps: Vec<&DiagramPoint> = s.points_in_dim(dim).collect();
        let pv: Vec<&DiagramPoint> = v.points_in_dim(dim).collect();
        let in_band = |x_ref: f64, x: f64| {
            // x must lie in [shrink * x_ref, x_ref]
            x <= x_ref + MATCH_TOL && x >= shrink * x_ref - MATCH_TOL
        };
        let edge = |i: usize, j: usize| {
            let (sp, vp) = (ps[i], pv[j]);
            if sp.is_infinite() != vp.is_infinite() {
                return false;
            }
            let births_ok = in_band(sp.birth, vp.birth);
            if sp.is_infinite() {
                births_ok
            } else {
                births_ok && in_band(sp.death, vp.death)
            }
        };
        let s_diag = |i: usize| {
            let p = ps[i];
            !p.is_infinite() && shrink * p.death <= p.birth + MATCH_TOL
        };
        let v_diag = |j: usize| {
            let p = pv[j];
            !p.is_infinite() && p.death * shrink <= p.birth + MATCH_TOL
        };
        if !partial_matching_feasible(ps.len(), pv.len(), edge, s_diag, v_diag) {
            return false;
        }
    }
    true
}

/// Multiset equality of two diagrams within a coordinate tolerance, after
/// sorting per dimension. Infinite deaths only match infinite deaths.
pub fn diagrams_match(a: &PersistenceDiagram, b: &PersistenceDiagram, tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    for dim in dims_of(a, b) {
        let pa: Vec<&DiagramPoint> = a.points_in_dim(dim).collect();
        let pb: Vec<&DiagramPoint> = b.points_in_dim(dim).collect();
        if pa.len() != pb.len() {
            return false;
        }
        // Both diagrams are sorted by (birth, death) within a dimension.
        for (p, q) in pa.iter().zip(&pb) {
            if p.is_infinite() != q.is_infinite() {
                return false;
            }
            if (p.birth - q.birth).abs() > tol {
                return false;
            }
            if !p.is_infinite() && (p.death - q.death).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// One line of a comparison report.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub check: String,
    pub param: f64,
    pub value: f64,
    pub pass: bool,
}

/// Result of comparing two diagrams, self-describing and renderable as text
/// or as a machine-readable CSV block.
#[derive(Debug, Clone, Default)]
pub struct ComparisonReport {
    pub lines: Vec<CheckLine>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }

    pub fn push(&mut self, check: &str, param: f64, value: f64, pass: bool) {
        self.lines.push(CheckLine {
            check: check.to_string(),
            param,
            value,
            pass,
        });
    }

    /// Offset radii in both directions plus the pass/fail verdict at `r`.
    pub fn additive(a: &PersistenceDiagram, b: &PersistenceDiagram, r: f64) -> Self {
        let mut report = ComparisonReport::default();
        let ab = directed_offset_radius(a, b);
        let ba = directed_offset_radius(b, a);
        report.push("offset_radius_a_to_b", r, ab, ab <= r + MATCH_TOL);
        report.push("offset_radius_b_to_a", r, ba, ba <= r + MATCH_TOL);
        report.push("additive_band", r, ab.max(ba), additive_band_check(a, b, r));
        report
    }

    pub fn multiplicative(s: &PersistenceDiagram, v: &PersistenceDiagram, epsilon: f64) -> Self {
        let mut report = ComparisonReport::default();
        let pass = multiplicative_band_check(s, v, epsilon);
        report.push(
            "multiplicative_band",
            epsilon,
            1.0 / (1.0 - 2.0 * epsilon),
            pass,
        );
        report
    }

    pub fn bottleneck(a: &PersistenceDiagram, b: &PersistenceDiagram) -> Self {
        let mut report = ComparisonReport::default();
        let value = super::diagram::bottleneck(a, b);
        report.push("bottleneck", f64::NAN, value, true);
        report
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(&format!(
                "{}: value = {}, param = {} -> {}\n",
                l.check,
                l.value,
                l.param,
                if l.pass { "pass" } else { "FAIL" }
            ));
        }
        out
    }

    pub fn to_csv_block(&self) -> String {
        let mut out = String::from("check,param,value,pass\n");
        for l in &self.lines {
            out.push_str(&format!(
                "{},{},{},{}\n",
                l.check,
                crate::textio::format_f64(l.param),
                crate::textio::format_f64(l.value),
                l.pass
            ));
        }
        out
    }
}
