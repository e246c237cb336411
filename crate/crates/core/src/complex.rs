//! Simplicial complexes, the exact and relaxed Rips builders, and the
//! incremental event stream of the sparse zigzag filtration.
//!
//! All complexes here are flag complexes: a simplex is present exactly when
//! all of its edges are. The zigzag event generator exploits this twice: an
//! edge insertion adds the cliques of the common neighborhood of its
//! endpoints, and a vertex deletion removes the cliques of the vertex's
//! neighborhood. The correctness contract is snapshot equivalence: replaying
//! the stream up to any scale must reproduce the sparse complex built from
//! scratch at that scale.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::greedy::{DeletionSchedule, GreedyPermutation};
use crate::metric::FiniteMetricSpace;
use crate::sparse::{self, CriticalKind, RelaxedMetric};

/// Default cap on the point count of the exact Vietoris-Rips pipeline; the
/// full filtration has on the order of `n^(l+1)` simplices.
pub const EXACT_PIPELINE_CAP: usize = 25;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("n = {n} exceeds the exact-pipeline cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("simplex vertices must be nonempty, sorted and distinct: {0:?}")]
    BadSimplex(Vec<u32>),
    #[error("event {index}: {message}")]
    InvalidStream { index: usize, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A simplex as a strictly increasing, nonempty list of vertex labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex {
    vertices: Vec<u32>,
}

impl Simplex {
    /// Sorts the vertices; panics on duplicates or emptiness.
    pub fn new(mut vertices: Vec<u32>) -> Self {
        vertices.sort_unstable();
        Self::try_new(vertices).expect("simplex vertices must be nonempty and distinct")
    }

    pub fn try_new(vertices: Vec<u32>) -> Result<Self, ComplexError> {
        if vertices.is_empty() || vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ComplexError::BadSimplex(vertices));
        }
        Ok(Simplex { vertices })
    }

    pub fn vertex(v: u32) -> Self {
        Simplex { vertices: vec![v] }
    }

    pub fn edge(a: u32, b: u32) -> Self {
        assert_ne!(a, b);
        Simplex {
            vertices: if a < b { vec![a, b] } else { vec![b, a] },
        }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn contains_vertex(&self, v: u32) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.vertices.iter().all(|v| other.contains_vertex(*v))
    }

    /// The codimension-1 faces; empty for vertices.
    pub fn facets(&self) -> Vec<Simplex> {
        if self.dim() == 0 {
            return Vec::new();
        }
        (0..self.vertices.len())
            .map(|skip| {
                let vertices = self
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                Simplex { vertices }
            })
            .collect()
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, "-")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A finite simplicial complex: a set of simplices closed under faces.
/// Builders in this module always produce closed complexes; [`Self::is_closed`]
/// re-checks the invariant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimplicialComplex {
    simplices: BTreeSet<Simplex>,
}

impl SimplicialComplex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_simplices<I: IntoIterator<Item = Simplex>>(simplices: I) -> Self {
        SimplicialComplex {
            simplices: simplices.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, s: Simplex) -> bool {
        self.simplices.insert(s)
    }

    pub fn remove(&mut self, s: &Simplex) -> bool {
        self.simplices.remove(s)
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.simplices.contains(s)
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter()
    }

    pub fn simplices_of_dim(&self, dim: usize) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter().filter(move |s| s.dim() == dim)
    }

    pub fn count_in_dim(&self, dim: usize) -> usize {
        self.simplices_of_dim(dim).count()
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.simplices.iter().map(Simplex::dim).max()
    }

    pub fn vertex_labels(&self) -> Vec<u32> {
        self.simplices_of_dim(0).map(|s| s.vertices()[0]).collect()
    }

    /// Every proper face of every stored simplex is stored.
    pub fn is_closed(&self) -> bool {
        self.simplices
            .iter()
            .all(|s| s.facets().iter().all(|f| self.contains(f)))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .map(|s| if s.dim() % 2 == 0 { 1i64 } else { -1i64 })
            .sum()
    }

    /// Simplices with no proper coface in the complex.
    pub fn maximal_simplices(&self) -> Vec<&Simplex> {
        self.simplices
            .iter()
            .filter(|s| {
                !self
                    .simplices
                    .iter()
                    .any(|t| t.dim() > s.dim() && s.is_face_of(t))
            })
            .collect()
    }

    /// Per-vertex lists of maximal simplices, keyed by the simplex vertex
    /// with the largest rank. With ranks taken from the traversal order this
    /// yields, for each point, the subsets of earlier points forming a
    /// maximal simplex with it, which is exactly what a vertex deletion
    /// removes.
    pub fn clique_lists(&self, rank: impl Fn(u32) -> usize) -> BTreeMap<u32, Vec<Simplex>> {
        let mut lists: BTreeMap<u32, Vec<Simplex>> = BTreeMap::new();
        for s in self.maximal_simplices() {
            let top = *s
                .vertices()
                .iter()
                .max_by_key(|&&v| rank(v))
                .expect("simplices are nonempty");
            let rest: Vec<u32> = s.vertices().iter().copied().filter(|&v| v != top).collect();
            let entry = lists.entry(top).or_default();
            if rest.is_empty() {
                continue;
            }
            entry.push(Simplex { vertices: rest });
        }
        lists
    }
}

/// Enumerates all cliques (as sorted vertex lists) of the graph induced by
/// `vertices` and `adjacent`, up to `max_size` vertices, invoking `emit` for
/// each. Vertices must be sorted ascending; cliques come out in
/// size-then-lexicographic-compatible recursive order, so callers that need
/// a specific order sort afterwards.
fn enumerate_cliques(
    vertices: &[u32],
    adjacent: &dyn Fn(u32, u32) -> bool,
    max_size: usize,
    emit: &mut dyn FnMut(&[u32]),
) {
    fn extend(
        clique: &mut Vec<u32>,
        candidates: &[u32],
        adjacent: &dyn Fn(u32, u32) -> bool,
        max_size: usize,
        emit: &mut dyn FnMut(&[u32]),
    ) {
        for (i, &v) in candidates.iter().enumerate() {
            clique.push(v);
            emit(clique);
            if clique.len() < max_size {
                let next: Vec<u32> = candidates[i + 1..]
                    .iter()
                    .copied()
                    .filter(|&w| adjacent(v, w))
                    .collect();
                if !next.is_empty() {
                    extend(clique, &next, adjacent, max_size, emit);
                }
            }
            clique.pop();
        }
    }
    if max_size == 0 {
        return;
    }
    let mut clique = Vec::with_capacity(max_size);
    extend(&mut clique, vertices, adjacent, max_size, emit);
}

/// The flag complex on `vertices` (sorted labels) with the given adjacency,
/// truncated to simplices of dimension at most `max_dim`.
pub fn flag_complex(
    vertices: &[u32],
    adjacent: impl Fn(u32, u32) -> bool,
    max_dim: usize,
) -> SimplicialComplex {
    let mut simplices = BTreeSet::new();
    enumerate_cliques(vertices, &adjacent, max_dim + 1, &mut |clique| {
        simplices.insert(Simplex {
            vertices: clique.to_vec(),
        });
    });
    SimplicialComplex { simplices }
}

/// The Vietoris-Rips complex at scale `alpha`: the flag complex of the graph
/// joining points at distance `<= alpha`, truncated to `max_dim`.
pub fn build_vr(space: &FiniteMetricSpace, alpha: f64, max_dim: usize) -> SimplicialComplex {
    let vertices: Vec<u32> = (0..space.len() as u32).collect();
    flag_complex(
        &vertices,
        |a, b| space.dist(a as usize, b as usize) <= alpha,
        max_dim,
    )
}

/// The relaxed Vietoris-Rips complex on the whole selected prefix: edges
/// where the relaxed distance satisfies `D_alpha(p, q) <= alpha`, no level
/// restriction. Vertex labels are original point indices.
pub fn build_rvr(
    space: &FiniteMetricSpace,
    sched: &DeletionSchedule,
    alpha: f64,
    max_dim: usize,
) -> SimplicialComplex {
    let rm = RelaxedMetric::new(space, sched);
    let positions: Vec<usize> = (0..sched.k()).collect();
    rvr_on_positions(&rm, sched, &positions, alpha, max_dim)
}

/// The sparse Vietoris-Rips complex: the relaxed complex restricted to the
/// level at `alpha`.
pub fn build_svr(
    space: &FiniteMetricSpace,
    sched: &DeletionSchedule,
    alpha: f64,
    max_dim: usize,
) -> SimplicialComplex {
    let rm = RelaxedMetric::new(space, sched);
    let positions = sched.level_positions(alpha);
    rvr_on_positions(&rm, sched, &positions, alpha, max_dim)
}

fn rvr_on_positions(
    rm: &RelaxedMetric<'_>,
    sched: &DeletionSchedule,
    positions: &[usize],
    alpha: f64,
    max_dim: usize,
) -> SimplicialComplex {
    let mut labels: Vec<u32> = positions.iter().map(|&p| sched.order[p] as u32).collect();
    labels.sort_unstable();
    let pos_of: BTreeMap<u32, usize> = positions
        .iter()
        .map(|&p| (sched.order[p] as u32, p))
        .collect();
    flag_complex(
        &labels,
        |a, b| rm.relaxed_distance(alpha, pos_of[&a], pos_of[&b]) <= alpha,
        max_dim,
    )
}

/// Whether a simplex enters the complex or leaves it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventOp {
    Add,
    Remove,
}

impl fmt::Display for EventOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventOp::Add => write!(f, "ADD"),
            EventOp::Remove => write!(f, "REMOVE"),
        }
    }
}

/// One single-simplex update at a scale value.
#[derive(Debug, Clone, PartialEq)]
pub struct ZigzagEvent {
    pub alpha: f64,
    pub op: EventOp,
    pub simplex: Simplex,
}

/// An ordered list of single-simplex updates with nondecreasing scales.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ZigzagEventStream {
    events: Vec<ZigzagEvent>,
}

impl ZigzagEventStream {
    pub fn new(events: Vec<ZigzagEvent>) -> Self {
        ZigzagEventStream { events }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[ZigzagEvent] {
        &self.events
    }

    pub fn iter(&self) -> impl Iterator<Item = &ZigzagEvent> {
        self.events.iter()
    }

    pub fn is_ascending(&self) -> bool {
        self.events.iter().all(|e| e.op == EventOp::Add)
    }

    /// Checks the stream invariants: scales nondecreasing, additions only of
    /// absent simplices whose facets are present, removals only of present
    /// simplices with no present coface.
    pub fn validate(&self) -> Result<(), ComplexError> {
        let mut state: BTreeSet<Simplex> = BTreeSet::new();
        let mut prev_alpha = f64::NEG_INFINITY;
        for (index, e) in self.events.iter().enumerate() {
            if e.alpha < prev_alpha {
                return Err(ComplexError::InvalidStream {
                    index,
                    message: format!("scale decreased: {} after {}", e.alpha, prev_alpha),
                });
            }
            prev_alpha = e.alpha;
            match e.op {
                EventOp::Add => {
                    if state.contains(&e.simplex) {
                        return Err(ComplexError::InvalidStream {
                            index,
                            message: format!("added simplex {} already present", e.simplex),
                        });
                    }
                    for facet in e.simplex.facets() {
                        if !state.contains(&facet) {
                            return Err(ComplexError::InvalidStream {
                                index,
                                message: format!(
                                    "added simplex {} before its face {}",
                                    e.simplex, facet
                                ),
                            });
                        }
                    }
                    state.insert(e.simplex.clone());
                }
                EventOp::Remove => {
                    if !state.remove(&e.simplex) {
                        return Err(ComplexError::InvalidStream {
                            index,
                            message: format!("removed absent simplex {}", e.simplex),
                        });
                    }
                    if let Some(coface) = state
                        .iter()
                        .find(|t| t.dim() > e.simplex.dim() && e.simplex.is_face_of(t))
                    {
                        return Err(ComplexError::InvalidStream {
                            index,
                            message: format!(
                                "removed simplex {} before its coface {}",
                                e.simplex, coface
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The complex after replaying the first `count` events.
    pub fn complex_after(&self, count: usize) -> SimplicialComplex {
        let mut complex = SimplicialComplex::new();
        for e in &self.events[..count] {
            match e.op {
                EventOp::Add => {
                    complex.insert(e.simplex.clone());
                }
                EventOp::Remove => {
                    complex.remove(&e.simplex);
                }
            }
        }
        complex
    }

    /// The complex at scale `alpha`: all events with scale `<= alpha`
    /// replayed, so a deletion scheduled exactly at `alpha` has already
    /// happened.
    pub fn snapshot(&self, alpha: f64) -> SimplicialComplex {
        let count = self.events.partition_point(|e| e.alpha <= alpha);
        self.complex_after(count)
    }

    /// Serializes as `alpha,op,v0-v1-...` lines with 17-significant-digit
    /// scales.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,op,simplex\n");
        for e in &self.events {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::textio::format_f64(e.alpha),
                e.op,
                e.simplex
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, ComplexError> {
        let mut events = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line == "alpha,op,simplex" || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| ComplexError::Parse {
                line: lineno + 1,
                message,
            };
            let mut fields = line.split(',');
            let alpha = fields
                .next()
                .and_then(crate::textio::parse_f64)
                .ok_or_else(|| parse_err("bad scale field".into()))?;
            let op = match fields.next() {
                Some("ADD") => EventOp::Add,
                Some("REMOVE") => EventOp::Remove,
                other => return Err(parse_err(format!("bad op field {other:?}"))),
            };
            let simplex_field = fields
                .next()
                .ok_or_else(|| parse_err("missing simplex field".into()))?;
            let vertices = simplex_field
                .split('-')
                .map(|v| v.parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| parse_err(format!("bad vertex: {e}")))?;
            let simplex =
                Simplex::try_new(vertices).map_err(|e| parse_err(format!("bad simplex: {e}")))?;
            events.push(ZigzagEvent { alpha, op, simplex });
        }
        Ok(ZigzagEventStream { events })
    }
}

/// The ascending Vietoris-Rips filtration of the whole space: each simplex
/// appears once, at the largest pairwise distance of its vertices, faces
/// before cofaces. Capped because the stream has on the order of
/// `n^(max_dim+1)` events.
pub fn vr_filtration_events(
    space: &FiniteMetricSpace,
    max_dim: usize,
    cap: usize,
) -> Result<ZigzagEventStream, ComplexError> {
    let n = space.len();
    if n > cap {
        return Err(ComplexError::CapExceeded { n, cap });
    }
    let vertices: Vec<u32> = (0..n as u32).collect();
    Ok(flag_filtration_events(&vertices, max_dim, |a, b| {
        space.dist(a as usize, b as usize)
    }))
}

/// The ascending relaxed Vietoris-Rips filtration on the selected prefix:
/// every pair's edge appears at its relaxed insertion scale (each edge
/// eventually qualifies because the weights grow linearly), simplices at the
/// largest edge scale.
pub fn rvr_filtration_events(
    space: &FiniteMetricSpace,
    sched: &DeletionSchedule,
    max_dim: usize,
) -> ZigzagEventStream {
    let rm = RelaxedMetric::new(space, sched);
    let mut labels: Vec<u32> = sched.order.iter().map(|&p| p as u32).collect();
    labels.sort_unstable();
    let pos_of: BTreeMap<u32, usize> = sched
        .order
        .iter()
        .enumerate()
        .map(|(pos, &p)| (p as u32, pos))
        .collect();
    flag_filtration_events(&labels, max_dim, |a, b| {
        sparse::edge_insertion_alpha(
            rm.dist(pos_of[&a], pos_of[&b]),
            sched.epsilon,
            sched.time[pos_of[&a]],
            sched.time[pos_of[&b]],
        )
    })
}

/// Ascending flag filtration from per-edge appearance scales: every subset
/// of up to `max_dim + 1` vertices becomes a simplex at the largest scale of
/// its edges. Events are sorted by scale, then dimension, then vertex order.
fn flag_filtration_events(
    vertices: &[u32],
    max_dim: usize,
    edge_alpha: impl Fn(u32, u32) -> f64,
) -> ZigzagEventStream {
    let mut events = Vec::new();
    enumerate_cliques(vertices, &|_, _| true, max_dim + 1, &mut |clique| {
        let mut alpha = 0.0f64;
        for (i, &a) in clique.iter().enumerate() {
            for &b in &clique[i + 1..] {
                alpha = alpha.max(edge_alpha(a, b));
            }
        }
        events.push(ZigzagEvent {
            alpha,
            op: EventOp::Add,
            simplex: Simplex {
                vertices: clique.to_vec(),
            },
        });
    });
    events.sort_by(|a, b| {
        a.alpha
            .total_cmp(&b.alpha)
            .then_with(|| a.simplex.dim().cmp(&b.simplex.dim()))
            .then_with(|| a.simplex.cmp(&b.simplex))
    });
    ZigzagEventStream { events }
}

/// The sparse zigzag filtration as a stream of single-simplex updates.
///
/// All selected vertices enter at scale 0. Walking the critical values in
/// order, an edge insertion adds the edge together with every new clique
/// simplex containing both endpoints (ascending dimension, then vertex
/// order), and a vertex deletion removes the vertex with all incident
/// simplices (descending dimension, then vertex order). Simplices are
/// materialized up to dimension `max_dim + 1` so that deaths of classes in
/// homology dimension `max_dim` are captured.
pub fn sparse_zigzag_events(
    space: &FiniteMetricSpace,
    perm: &GreedyPermutation,
    sched: &DeletionSchedule,
    max_dim: usize,
) -> ZigzagEventStream {
    let k = perm.k();
    let gen_size = max_dim + 2; // largest vertex count of a materialized simplex
    let mut events = Vec::new();

    let mut start_labels: Vec<u32> = perm.order.iter().map(|&p| p as u32).collect();
    start_labels.sort_unstable();
    for &label in &start_labels {
        events.push(ZigzagEvent {
            alpha: 0.0,
            op: EventOp::Add,
            simplex: Simplex::vertex(label),
        });
    }

    // Adjacency between traversal positions, only ever holding live edges.
    let mut neighbors: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    let label = |pos: usize| perm.order[pos] as u32;

    for event in sparse::critical_events(space, perm, sched) {
        match event.kind {
            CriticalKind::EdgeInsertion { later, earlier } => {
                let common: Vec<usize> = neighbors[later]
                    .intersection(&neighbors[earlier])
                    .copied()
                    .collect();
                let mut added: Vec<Simplex> = Vec::new();
                added.push(Simplex::edge(label(later), label(earlier)));
                if gen_size > 2 {
                    let common_labels: Vec<u32> = {
                        let mut l: Vec<u32> = common.iter().map(|&p| label(p)).collect();
                        l.sort_unstable();
                        l
                    };
                    let pos_of: BTreeMap<u32, usize> =
                        common.iter().map(|&p| (label(p), p)).collect();
                    enumerate_cliques(
                        &common_labels,
                        &|a, b| neighbors[pos_of[&a]].contains(&pos_of[&b]),
                        gen_size - 2,
                        &mut |clique| {
                            let mut vertices = clique.to_vec();
                            vertices.push(label(later));
                            vertices.push(label(earlier));
                            added.push(Simplex::new(vertices));
                        },
                    );
                }
                added.sort_by(|a, b| a.dim().cmp(&b.dim()).then_with(|| a.cmp(b)));
                for simplex in added {
                    events.push(ZigzagEvent {
                        alpha: event.alpha,
                        op: EventOp::Add,
                        simplex,
                    });
                }
                neighbors[later].insert(earlier);
                neighbors[earlier].insert(later);
            }
            CriticalKind::VertexDeletion { pos } => {
                let hood: Vec<usize> = neighbors[pos].iter().copied().collect();
                let mut removed: Vec<Simplex> = Vec::new();
                removed.push(Simplex::vertex(label(pos)));
                if gen_size > 1 && !hood.is_empty() {
                    let hood_labels: Vec<u32> = {
                        let mut l: Vec<u32> = hood.iter().map(|&p| label(p)).collect();
                        l.sort_unstable();
                        l
                    };
                    let pos_of: BTreeMap<u32, usize> =
                        hood.iter().map(|&p| (label(p), p)).collect();
                    enumerate_cliques(
                        &hood_labels,
                        &|a, b| neighbors[pos_of[&a]].contains(&pos_of[&b]),
                        gen_size - 1,
                        &mut |clique| {
                            let mut vertices = clique.to_vec();
                            vertices.push(label(pos));
                            removed.push(Simplex::new(vertices));
                        },
                    );
                }
                removed.sort_by(|a, b| b.dim().cmp(&a.dim()).then_with(|| a.cmp(b)));
                for simplex in removed {
                    events.push(ZigzagEvent {
                        alpha: event.alpha,
                        op: EventOp::Remove,
                        simplex,
                    });
                }
                for &q in &hood {
                    neighbors[q].remove(&pos);
                }
                neighbors[pos].clear();
            }
        }
    }
    ZigzagEventStream { events }
}
