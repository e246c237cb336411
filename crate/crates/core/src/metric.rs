//! Finite metric spaces with a symmetric distance oracle.
//!
//! A [`FiniteMetricSpace`] is backed either by an explicit distance table or
//! by a point cloud whose distances are evaluated on demand. The lazy backend
//! matters for the subquadratic pipeline: the sparse pipeline only ever asks
//! for `O(kn + k^2)` distances, so materializing the full table would defeat
//! the point.

use std::fmt;

use thiserror::Error;

/// Tolerance for on-demand metric validation (triangle inequality and
/// general float comparisons).
pub const COMPARISON_TOL: f64 = 1e-9;

/// Tolerance when checking that a full input table is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("point {index} has {got} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("row {row} has {got} entries, expected {expected}")]
    BadRowLength {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("matrix rows do not form a square or lower-triangular table")]
    BadShape,
    #[error("entry ({i},{j}) = {value} is negative")]
    NegativeEntry { i: usize, j: usize, value: f64 },
    #[error("diagonal entry ({i},{i}) = {value} is not zero")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("table is asymmetric at ({i},{j}): {a} vs {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("need at least {needed} points, have {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Which norm a [`PointCloud`] uses for distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricKind {
    #[default]
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl MetricKind {
    fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            MetricKind::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            MetricKind::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            MetricKind::Chebyshev => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Euclidean => write!(f, "euclidean"),
            MetricKind::Manhattan => write!(f, "manhattan"),
            MetricKind::Chebyshev => write!(f, "chebyshev"),
        }
    }
}

/// A cloud of n points in d dimensions together with the norm used to
/// compare them.
#[derive(Debug, Clone)]
pub struct PointCloud {
    dim: usize,
    points: Vec<Vec<f64>>,
    metric: MetricKind,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>, metric: MetricKind) -> Result<Self, MetricError> {
        if points.is_empty() {
            return Err(MetricError::EmptyCloud);
        }
        let dim = points[0].len();
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(MetricError::DimensionMismatch {
                    index,
                    got: p.len(),
                    expected: dim,
                });
            }
        }
        Ok(PointCloud {
            dim,
            points,
            metric,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }
}

#[derive(Debug, Clone)]
enum Backend {
    /// Full n*n table, row-major.
    Table(Vec<f64>),
    /// Distances evaluated from coordinates on demand.
    Cloud(PointCloud),
}

/// A finite metric space: `n` points with a symmetric nonnegative distance.
///
/// Immutable after construction, so shared references may be used freely
/// across threads.
#[derive(Debug, Clone)]
pub struct FiniteMetricSpace {
    n: usize,
    backend: Backend,
}

impl FiniteMetricSpace {
    /// Builds a space whose distances are the chosen norm of coordinate
    /// differences, evaluated lazily.
    pub fn from_points(cloud: PointCloud) -> Self {
        FiniteMetricSpace {
            n: cloud.len(),
            backend: Backend::Cloud(cloud),
        }
    }

    /// Builds a space from a full square table. The table must be symmetric
    /// within [`SYMMETRY_TOL`], nonnegative, with a zero diagonal.
    pub fn from_full_matrix(rows: &[Vec<f64>]) -> Result<Self, MetricError> {
        let n = rows.len();
        if n == 0 {
            return Err(MetricError::EmptyCloud);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::BadRowLength {
                    row: i,
                    got: row.len(),
                    expected: n,
                });
            }
        }
        let mut table = vec![0.0; n * n];
        for i in 0..n {
            if rows[i][i] != 0.0 {
                return Err(MetricError::NonzeroDiagonal {
                    i,
                    value: rows[i][i],
                });
            }
            for j in 0..n {
                let v = rows[i][j];
                if v < 0.0 {
                    return Err(MetricError::NegativeEntry { i, j, value: v });
                }
                if (v - rows[j][i]).abs() > SYMMETRY_TOL {
                    return Err(MetricError::Asymmetric {
                        i,
                        j,
                        a: v,
                        b: rows[j][i],
                    });
                }
                // Store the symmetrized value so dist(i,j) == dist(j,i) holds
                // exactly, not just within tolerance.
                table[i * n + j] = 0.5 * (v + rows[j][i]);
            }
        }
        Ok(FiniteMetricSpace {
            n,
            backend: Backend::Table(table),
        })
    }

    /// Builds a space from lower-triangular rows: row `i` (0-based) holds the
    /// `i + 1` distances from point `i + 1` to points `0..=i`. The diagonal is
    /// implicit.
    pub fn from_lower_triangular(rows: &[Vec<f64>]) -> Result<Self, MetricError> {
        let n = rows.len() + 1;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(MetricError::BadRowLength {
                    row: i,
                    got: row.len(),
                    expected: i + 1,
                });
            }
        }
        let mut table = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v < 0.0 {
                    return Err(MetricError::NegativeEntry {
                        i: i + 1,
                        j,
                        value: v,
                    });
                }
                table[(i + 1) * n + j] = v;
                table[j * n + (i + 1)] = v;
            }
        }
        Ok(FiniteMetricSpace {
            n,
            backend: Backend::Table(table),
        })
    }

    /// Builds a space from either a full square table or lower-triangular
    /// rows, detected by shape. A single row with a single zero entry is read
    /// as the full 1-point table; a single nonzero entry as the 2-point
    /// triangular form.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self, MetricError> {
        let m = rows.len();
        if m == 0 {
            return Err(MetricError::EmptyCloud);
        }
        if m == 1 && rows[0].len() == 1 {
            if rows[0][0] == 0.0 {
                return Self::from_full_matrix(rows);
            }
            return Self::from_lower_triangular(rows);
        }
        if rows.iter().all(|r| r.len() == m) {
            Self::from_full_matrix(rows)
        } else if rows.iter().enumerate().all(|(i, r)| r.len() == i + 1) {
            Self::from_lower_triangular(rows)
        } else {
            Err(MetricError::BadShape)
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Distance between points `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.n && j < self.n);
        match &self.backend {
            Backend::Table(t) => t[i * self.n + j],
            Backend::Cloud(c) => {
                if i == j {
                    0.0
                } else {
                    c.metric.distance(c.point(i), c.point(j))
                }
            }
        }
    }

    /// Ratio of the largest to the smallest interpoint distance over
    /// distinct pairs; infinity when two distinct points coincide.
    pub fn spread(&self) -> Result<f64, MetricError> {
        if self.n < 2 {
            return Err(MetricError::TooFewPoints {
                needed: 2,
                got: self.n,
            });
        }
        let mut min = f64::INFINITY;
        let mut max = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = self.dist(i, j);
                min = min.min(d);
                max = max.max(d);
            }
        }
        if min == 0.0 {
            Ok(f64::INFINITY)
        } else {
            Ok(max / min)
        }
    }

    /// Exhaustively checks the triangle inequality. Returns every triple
    /// `(i, k, j)` with `dist(i,k) > dist(i,j) + dist(j,k)` beyond
    /// [`COMPARISON_TOL`]; the list is empty iff the space is a metric space.
    pub fn validate_triangle(&self) -> Vec<(usize, usize, usize)> {
        let mut violations = Vec::new();
        for i in 0..self.n {
            for k in (i + 1)..self.n {
                let dik = self.dist(i, k);
                for j in 0..self.n {
                    if j == i || j == k {
                        continue;
                    }
                    if dik > self.dist(i, j) + self.dist(j, k) + COMPARISON_TOL {
                        violations.push((i, k, j));
                    }
                }
            }
        }
        violations
    }

    /// The space restricted to a subset of point indices (indices may be in
    /// any order; they become points `0..subset.len()` of the new space).
    pub fn subspace(&self, subset: &[usize]) -> FiniteMetricSpace {
        let m = subset.len();
        let mut table = vec![0.0; m * m];
        for (a, &i) in subset.iter().enumerate() {
            for (b, &j) in subset.iter().enumerate() {
                table[a * m + b] = self.dist(i, j);
            }
        }
        FiniteMetricSpace {
            n: m,
            backend: Backend::Table(table),
        }
    }
}

/// Strips a `#` comment and surrounding whitespace; returns None for lines
/// that are blank after stripping.
fn data_line(line: &str) -> Option<&str> {
    let stripped = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    let trimmed = stripped.trim();
    if trimmed.is_empty() {
        None
    } else {
        Some(trimmed)
    }
}

fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>, MetricError> {
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let Some(line) = data_line(raw) else {
            continue;
        };
        let mut row = Vec::new();
        for field in line.split(',') {
            let field = field.trim();
            let value = field.parse::<f64>().map_err(|_| MetricError::Parse {
                line: lineno + 1,
                message: format!("cannot parse '{field}' as a number"),
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Parses a point file: one point per line, comma-separated coordinates,
/// `#` starts a comment.
pub fn parse_points(text: &str, metric: MetricKind) -> Result<PointCloud, MetricError> {
    PointCloud::new(parse_rows(text)?, metric)
}

/// Parses a matrix file, accepting the full square layout or the
/// lower-triangular layout (line `i` holds `i` values for rows `1..n-1`).
pub fn parse_matrix(text: &str) -> Result<FiniteMetricSpace, MetricError> {
    FiniteMetricSpace::from_matrix(&parse_rows(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_space(coords: &[f64]) -> FiniteMetricSpace {
        let pts = coords.iter().map(|&x| vec![x]).collect();
        FiniteMetricSpace::from_points(PointCloud::new(pts, MetricKind::Euclidean).unwrap())
    }

    #[test]
    fn one_dimensional_norm() {
        let s = line_space(&[0.0, 3.0]);
        assert_eq!(s.dist(0, 1), 3.0);
    }

    #[test]
    fn three_four_five_triangle() {
        let cloud =
            PointCloud::new(vec![vec![0.0, 0.0], vec![3.0, 4.0]], MetricKind::Euclidean).unwrap();
        let s = FiniteMetricSpace::from_points(cloud);
        assert_eq!(s.dist(0, 1), 5.0);
    }

    #[test]
    fn manhattan_norm() {
        let cloud =
            PointCloud::new(vec![vec![0.0, 0.0], vec![3.0, 4.0]], MetricKind::Manhattan).unwrap();
        let s = FiniteMetricSpace::from_points(cloud);
        assert_eq!(s.dist(0, 1), 7.0);
    }

    #[test]
    fn chebyshev_norm() {
        let cloud =
            PointCloud::new(vec![vec![0.0, 0.0], vec![3.0, 4.0]], MetricKind::Chebyshev).unwrap();
        let s = FiniteMetricSpace::from_points(cloud);
        assert_eq!(s.dist(0, 1), 4.0);
    }

    #[test]
    fn full_matrix_roundtrip() {
        let s = FiniteMetricSpace::from_matrix(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(s.dist(0, 1), 1.0);
        assert_eq!(s.dist(1, 0), 1.0);
    }

    #[test]
    fn lower_triangular_single_row() {
        let s = FiniteMetricSpace::from_matrix(&[vec![2.0]]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dist(0, 1), 2.0);
    }

    #[test]
    fn asymmetric_table_rejected() {
        let err = FiniteMetricSpace::from_matrix(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap_err();
        assert!(matches!(err, MetricError::Asymmetric { .. }));
    }

    #[test]
    fn negative_entry_rejected() {
        let err = FiniteMetricSpace::from_matrix(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).unwrap_err();
        assert!(matches!(err, MetricError::NegativeEntry { .. }));
    }

    #[test]
    fn nonzero_diagonal_rejected() {
        let err = FiniteMetricSpace::from_matrix(&[vec![1.0, 2.0], vec![2.0, 0.0]]).unwrap_err();
        assert!(matches!(err, MetricError::NonzeroDiagonal { .. }));
    }

    #[test]
    fn spread_simple_line() {
        // {0, 1, 3}: max pair 3, min pair 1.
        let s = line_space(&[0.0, 1.0, 3.0]);
        assert_eq!(s.spread().unwrap(), 3.0);
    }

    #[test]
    fn spread_two_points_is_one() {
        let s = line_space(&[0.0, 7.5]);
        assert_eq!(s.spread().unwrap(), 1.0);
    }

    #[test]
    fn spread_duplicate_points_is_infinite() {
        let s = line_space(&[0.0, 0.0, 5.0]);
        assert_eq!(s.spread().unwrap(), f64::INFINITY);
    }

    #[test]
    fn spread_requires_two_points() {
        let s = line_space(&[0.0]);
        assert!(matches!(s.spread(), Err(MetricError::TooFewPoints { .. })));
    }

    #[test]
    fn euclidean_cloud_satisfies_triangle() {
        let cloud = PointCloud::new(
            vec![
                vec![0.0, 0.0],
                vec![1.0, 2.0],
                vec![-3.0, 1.0],
                vec![2.0, 2.0],
            ],
            MetricKind::Euclidean,
        )
        .unwrap();
        let s = FiniteMetricSpace::from_points(cloud);
        assert!(s.validate_triangle().is_empty());
    }

    #[test]
    fn triangle_violation_reported() {
        let s = FiniteMetricSpace::from_matrix(&[
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ])
        .unwrap();
        let violations = s.validate_triangle();
        assert!(violations.contains(&(0, 2, 1)));
    }

    #[test]
    fn triangle_trivial_for_single_point() {
        let s = line_space(&[0.0]);
        assert!(s.validate_triangle().is_empty());
    }

    #[test]
    fn symmetry_and_zero_diagonal_exhaustive() {
        // Exercised exhaustively for a small space with both backends.
        let coords: Vec<f64> = (0..20).map(|i| (i as f64) * 0.37).collect();
        let lazy = line_space(&coords);
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| (0..20).map(|j| lazy.dist(i, j)).collect())
            .collect();
        let table = FiniteMetricSpace::from_matrix(&rows).unwrap();
        for s in [&lazy, &table] {
            for i in 0..20 {
                assert_eq!(s.dist(i, i), 0.0);
                for j in 0..20 {
                    assert_eq!(s.dist(i, j), s.dist(j, i));
                }
            }
        }
    }

    #[test]
    fn subspace_spread_never_exceeds_spread() {
        let coords = [0.0, 0.9, 2.3, 5.0, 5.5, 9.1];
        let s = line_space(&coords);
        let full = s.spread().unwrap();
        for subset in [[0usize, 1, 2].as_slice(), &[1, 3, 5], &[0, 5], &[2, 3, 4]] {
            let sub = s.subspace(subset);
            assert!(sub.spread().unwrap() <= full + 1e-12);
        }
    }

    #[test]
    fn parse_points_with_comments() {
        let text = "# header\n0.0, 0.0\n1.0,2.0 # inline\n\n3,4\n";
        let cloud = parse_points(text, MetricKind::Euclidean).unwrap();
        assert_eq!(cloud.len(), 3);
        assert_eq!(cloud.point(2), &[3.0, 4.0]);
    }

    #[test]
    fn parse_matrix_full_and_triangular() {
        let full = parse_matrix("0,1\n1,0\n").unwrap();
        assert_eq!(full.dist(0, 1), 1.0);
        let tri = parse_matrix("1\n2,1.5\n").unwrap();
        assert_eq!(tri.len(), 3);
        assert_eq!(tri.dist(0, 2), 2.0);
        assert_eq!(tri.dist(1, 2), 1.5);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(matches!(
            parse_matrix("0,x\nx,0\n"),
            Err(MetricError::Parse { .. })
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn clouds() -> impl Strategy<Value = (Vec<Vec<f64>>, MetricKind)> {
            let coord = -100.0..100.0f64;
            let point = proptest::collection::vec(coord, 3);
            let points = proptest::collection::vec(point, 1..12);
            let metric = prop_oneof![
                Just(MetricKind::Euclidean),
                Just(MetricKind::Manhattan),
                Just(MetricKind::Chebyshev),
            ];
            (points, metric)
        }

        proptest! {
            #[test]
            fn norm_spaces_are_metric_spaces((points, metric) in clouds()) {
                let space = FiniteMetricSpace::from_points(
                    PointCloud::new(points, metric).unwrap(),
                );
                let n = space.len();
                for i in 0..n {
                    prop_assert_eq!(space.dist(i, i), 0.0);
                    for j in 0..n {
                        prop_assert!(space.dist(i, j) >= 0.0);
                        prop_assert_eq!(space.dist(i, j), space.dist(j, i));
                    }
                }
                prop_assert!(space.validate_triangle().is_empty());
            }
        }
    }
}
