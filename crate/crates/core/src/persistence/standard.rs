//! Standard boundary-matrix reduction for ascending filtrations.

use std::collections::HashMap;

use super::{xor_sorted, Interval, PersistenceError};
use crate::complex::{EventOp, Simplex, ZigzagEventStream};

/// Interval decomposition of an addition-only stream by left-to-right column
/// reduction over the two-element field.
///
/// Each event index is a column; a column that reduces to zero creates a
/// class, and a column with pivot `i` kills the class created at `i`.
/// Classes in homology dimension above `max_dim` are not reported, so feed
/// simplices up to dimension `max_dim + 1` to get correct deaths in
/// dimension `max_dim`. One infinite interval per final connected component
/// comes out in dimension 0.
pub fn reduce_standard(
    stream: &ZigzagEventStream,
    max_dim: usize,
) -> Result<Vec<Interval>, PersistenceError> {
    let events = stream.events();
    let mut index_of: HashMap<&Simplex, usize> = HashMap::with_capacity(events.len());
    // Reduced columns (indices of earlier events) and pivot -> column map.
    let mut reduced: Vec<Vec<usize>> = Vec::with_capacity(events.len());
    let mut pivot_owner: HashMap<usize, usize> = HashMap::new();
    let mut killer: Vec<Option<usize>> = vec![None; events.len()];
    let mut positive: Vec<bool> = vec![false; events.len()];

    for (idx, event) in events.iter().enumerate() {
        if event.op != EventOp::Add {
            return Err(PersistenceError::InvalidStream {
                index: idx,
                message: "removal in an ascending stream".into(),
            });
        }
        if index_of.contains_key(&event.simplex) {
            return Err(PersistenceError::InvalidStream {
                index: idx,
                message: format!("simplex {} added twice", event.simplex),
            });
        }
        let mut column: Vec<usize> = Vec::new();
        for facet in event.simplex.facets() {
            match index_of.get(&facet) {
                Some(&fi) => column.push(fi),
                None => {
                    return Err(PersistenceError::InvalidStream {
                        index: idx,
                        message: format!("face {} of {} missing", facet, event.simplex),
                    })
                }
            }
        }
        column.sort_unstable();
        while let Some(&owner) = column.last().and_then(|low| pivot_owner.get(low)) {
            column = xor_sorted(&column, &reduced[owner]);
        }
        if let Some(&low) = column.last() {
            pivot_owner.insert(low, idx);
            killer[low] = Some(idx);
        } else {
            positive[idx] = true;
        }
        reduced.push(column);
        index_of.insert(&event.simplex, idx);
    }

    let mut intervals = Vec::new();
    for (idx, event) in events.iter().enumerate() {
        if !positive[idx] {
            continue;
        }
        let dim = event.simplex.dim();
        if dim > max_dim {
            continue;
        }
        let (death_index, death) = match killer[idx] {
            Some(d) => (Some(d), events[d].alpha),
            None => (None, f64::INFINITY),
        };
        intervals.push(Interval {
            dim,
            birth_index: idx,
            death_index,
            birth: event.alpha,
            death,
        });
    }
    Ok(intervals)
}
