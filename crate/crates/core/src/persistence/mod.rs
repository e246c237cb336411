//! Persistence diagrams over the two-element field.
//!
//! Two solvers share the [`Interval`] output type: [`reduce_standard`] runs
//! the classic boundary-matrix reduction on ascending (addition-only)
//! streams and serves as the oracle pipeline, while [`zigzag_persistence`]
//! decomposes arbitrary valid add/remove streams. [`homology_rank`] is the
//! independent Gaussian-elimination check used to cross-validate both.

mod standard;
mod zigzag;

pub use standard::reduce_standard;
pub use zigzag::zigzag_persistence;

use std::collections::HashMap;

use thiserror::Error;

use crate::complex::SimplicialComplex;
use crate::textio;

#[derive(Debug, Error)]
pub enum PersistenceError {
    #[error("event {index}: {message}")]
    InvalidStream { index: usize, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// One interval of the decomposition, both in event indices and in scale
/// coordinates. Intervals are half-open `[birth, death)`: the class exists
/// in the complex right after the birth event and is gone right after the
/// death event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub dim: usize,
    pub birth_index: usize,
    pub death_index: Option<usize>,
    pub birth: f64,
    /// Scale of the death event; infinite for classes alive at the end.
    pub death: f64,
}

impl Interval {
    pub fn is_zero_length(&self) -> bool {
        self.birth == self.death
    }
}

/// A single off-diagonal diagram point. The diagonal is implicit and never
/// stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramPoint {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

impl DiagramPoint {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }
}

/// A persistence diagram: a multiset of (dimension, birth, death) points
/// sorted by that triple. Zero-length intervals are dropped on construction;
/// [`PersistenceDiagram::from_intervals_verbose`] keeps them countable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PersistenceDiagram {
    points: Vec<DiagramPoint>,
}

impl PersistenceDiagram {
    pub fn from_points(mut points: Vec<DiagramPoint>) -> Self {
        points.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then_with(|| a.birth.total_cmp(&b.birth))
                .then_with(|| a.death.total_cmp(&b.death))
        });
        PersistenceDiagram { points }
    }

    /// Builds a diagram from solver output, discarding zero-length intervals.
    pub fn from_intervals(intervals: &[Interval]) -> Self {
        Self::from_points(
            intervals
                .iter()
                .filter(|iv| !iv.is_zero_length())
                .map(|iv| DiagramPoint {
                    dim: iv.dim,
                    birth: iv.birth,
                    death: iv.death,
                })
                .collect(),
        )
    }

    /// Same as [`Self::from_intervals`] but also reports how many zero-length
    /// intervals were dropped.
    pub fn from_intervals_verbose(intervals: &[Interval]) -> (Self, usize) {
        let dropped = intervals.iter().filter(|iv| iv.is_zero_length()).count();
        (Self::from_intervals(intervals), dropped)
    }

    pub fn points(&self) -> &[DiagramPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points_in_dim(&self, dim: usize) -> impl Iterator<Item = &DiagramPoint> {
        self.points.iter().filter(move |p| p.dim == dim)
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.points.iter().map(|p| p.dim).max()
    }

    /// Serializes as `dim,birth,death` lines, `inf` for infinite deaths,
    /// sorted by (dim, birth, death).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{}\n",
                p.dim,
                textio::format_f64(p.birth),
                textio::format_f64(p.death)
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, PersistenceError> {
        let mut points = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line == "dim,birth,death" || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| PersistenceError::Parse {
                line: lineno + 1,
                message,
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(parse_err(format!(
                    "expected 3 fields, got {}",
                    fields.len()
                )));
            }
            let dim = fields[0]
                .trim()
                .parse::<usize>()
                .map_err(|e| parse_err(format!("bad dimension: {e}")))?;
            let birth =
                textio::parse_f64(fields[1]).ok_or_else(|| parse_err("bad birth".into()))?;
            let death =
                textio::parse_f64(fields[2]).ok_or_else(|| parse_err("bad death".into()))?;
            if birth > death {
                return Err(parse_err(format!("birth {birth} after death {death}")));
            }
            points.push(DiagramPoint { dim, birth, death });
        }
        Ok(Self::from_points(points))
    }
}

/// Rank of the degree-`dim` homology of a closed complex over the
/// two-element field: `dim Z_d - dim B_d` computed by Gaussian elimination
/// on the two adjacent boundary matrices.
pub fn homology_rank(complex: &SimplicialComplex, dim: usize) -> usize {
    let count = complex.count_in_dim(dim);
    if count == 0 {
        return 0;
    }
    let z = count - boundary_rank(complex, dim);
    let b = boundary_rank(complex, dim + 1);
    z - b
}

/// Rank of the boundary map from `d`-chains to `(d-1)`-chains.
fn boundary_rank(complex: &SimplicialComplex, d: usize) -> usize {
    if d == 0 {
        return 0;
    }
    let row_index: HashMap<_, usize> = complex
        .simplices_of_dim(d - 1)
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    let mut rank = 0usize;
    // Pivot row -> reduced column.
    let mut pivots: HashMap<usize, Vec<usize>> = HashMap::new();
    for s in complex.simplices_of_dim(d) {
        let mut col: Vec<usize> = s.facets().iter().map(|f| row_index[f]).collect();
        col.sort_unstable();
        while let Some(other) = col.last().and_then(|low| pivots.get(low)) {
            col = xor_sorted(&col, other);
        }
        if let Some(&low) = col.last() {
            pivots.insert(low, col);
            rank += 1;
        }
    }
    rank
}

/// Symmetric difference of two sorted index vectors.
pub(crate) fn xor_sorted<T: Ord + Copy>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
