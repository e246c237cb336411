//! Zigzag persistence: interval decomposition of a stream of single-simplex
//! additions and deletions over the two-element field.
//!
//! The solver maintains, for the current complex:
//!
//! * `Z` - columns forming a basis of the cycle space, each carrying the
//!   birth event and whether the class was created by an addition (forward)
//!   or a deletion (backward);
//! * `B`/`C` - boundary bookkeeping: column `l` of `B` lists the `Z` columns
//!   whose sum equals the boundary of chain `C[l]`. `B` is kept fully
//!   reduced: every column owns a distinct pivot index that appears in no
//!   other column, so the `Z` columns that are nobody's pivot represent a
//!   homology basis;
//! * `E`/`T` - an echelon copy of the cycle basis (`E = Z * T`, pivots are
//!   the largest simplex id of each column) used to express boundaries in
//!   `Z` coordinates without touching the class-carrying columns.
//!
//! A death must end the right interval. When an addition kills the class
//! `sum of v_i over the support S`, the survivors keep their vectors, which
//! is a legal change of basis only if interval modules admit the matching
//! homomorphisms; that works out to: kill the youngest forward-born class in
//! `S`, or the oldest class when none is forward-born. A deletion instead
//! rewrites the survivors to `v_i + v_j*`, and the mirrored condition picks
//! the youngest backward-born class, or the oldest when none is
//! backward-born. Both rules collapse to the usual elder rule on ascending
//! streams, and the quiver-rank oracle in the test suite pins them down on
//! arbitrary streams.

use std::collections::HashMap;

use super::{xor_sorted, Interval, PersistenceError};
use crate::complex::{EventOp, Simplex, ZigzagEventStream};

/// Keys usable as dense row indices.
trait DenseKey: Ord + Copy {
    fn index(self) -> usize;
}

impl DenseKey for u32 {
    fn index(self) -> usize {
        self as usize
    }
}

impl DenseKey for usize {
    fn index(self) -> usize {
        self
    }
}

/// Sparse 0/1 matrix with sorted columns, XOR column updates and a row
/// index. Column slots are never reused after deletion.
///
/// The row index is append-only with parity semantics: every flip of entry
/// `(k, col)` pushes `col` onto the row list of `k`, and a column contains
/// `k` exactly when it occurs an odd number of times. Queries compact the
/// list they touch, so the index costs O(1) per flipped entry amortized
/// instead of a set operation per element of every column update.
struct SparseMat<K: DenseKey> {
    cols: Vec<Vec<K>>,
    live: Vec<bool>,
    /// Row parity lists indexed directly by key (keys are dense: simplex
    /// ids or column arena indices). The prefix of each list up to the
    /// recorded length is sorted and duplicate-free from the last query.
    rows: Vec<(Vec<usize>, usize)>,
    scratch: Vec<K>,
}

impl<K: DenseKey> SparseMat<K> {
    fn new() -> Self {
        SparseMat {
            cols: Vec::new(),
            live: Vec::new(),
            rows: Vec::new(),
            scratch: Vec::new(),
        }
    }

    fn row_push(&mut self, k: K, col: usize) {
        let key = k.index();
        if key >= self.rows.len() {
            self.rows.resize_with(key + 1, Default::default);
        }
        self.rows[key].0.push(col);
    }

    fn push(&mut self, content: Vec<K>) -> usize {
        let idx = self.cols.len();
        for &k in &content {
            self.row_push(k, idx);
        }
        self.cols.push(content);
        self.live.push(true);
        idx
    }

    fn col(&self, idx: usize) -> &[K] {
        &self.cols[idx]
    }

    /// `cols[target] ^= content`.
    fn xor_into(&mut self, target: usize, content: &[K]) {
        debug_assert!(self.live[target]);
        for &k in content {
            self.row_push(k, target);
        }
        // Merge into the scratch buffer, then swap, to avoid an allocation
        // per update.
        self.scratch.clear();
        let old = &self.cols[target];
        let (mut i, mut j) = (0, 0);
        while i < old.len() && j < content.len() {
            match old[i].cmp(&content[j]) {
                std::cmp::Ordering::Less => {
                    self.scratch.push(old[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    self.scratch.push(content[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        self.scratch.extend_from_slice(&old[i..]);
        self.scratch.extend_from_slice(&content[j..]);
        std::mem::swap(&mut self.cols[target], &mut self.scratch);
    }

    fn toggle(&mut self, target: usize, k: K) {
        self.xor_into(target, &[k]);
    }

    /// Replaces the content of a live column.
    fn set(&mut self, target: usize, content: Vec<K>) {
        debug_assert!(self.live[target]);
        let old = std::mem::take(&mut self.cols[target]);
        for k in old {
            self.row_push(k, target);
        }
        for &k in &content {
            self.row_push(k, target);
        }
        self.cols[target] = content;
    }

    fn delete(&mut self, target: usize) {
        debug_assert!(self.live[target]);
        let old = std::mem::take(&mut self.cols[target]);
        for k in old {
            self.row_push(k, target);
        }
        self.live[target] = false;
    }

    /// Live columns whose content contains `k`, ascending. Compacts the
    /// parity list for `k` as a side effect.
    fn rows_of(&mut self, k: K) -> Vec<usize> {
        let key = k.index();
        let Some((list, sorted_len)) = self.rows.get_mut(key) else {
            return Vec::new();
        };
        if list.len() > *sorted_len {
            // Sort only the fresh suffix, then merge with the compacted
            // prefix and cancel pairs.
            list[*sorted_len..].sort_unstable();
            let merged = {
                let (prefix, suffix) = list.split_at(*sorted_len);
                let mut merged = Vec::with_capacity(list.len());
                let (mut i, mut j) = (0, 0);
                while i < prefix.len() || j < suffix.len() {
                    let take_prefix =
                        j >= suffix.len() || (i < prefix.len() && prefix[i] <= suffix[j]);
                    if take_prefix {
                        merged.push(prefix[i]);
                        i += 1;
                    } else {
                        merged.push(suffix[j]);
                        j += 1;
                    }
                }
                merged
            };
            let mut present = Vec::new();
            let mut i = 0;
            while i < merged.len() {
                let mut j = i + 1;
                while j < merged.len() && merged[j] == merged[i] {
                    j += 1;
                }
                if (j - i) % 2 == 1 {
                    present.push(merged[i]);
                }
                i = j;
            }
            *list = present;
            *sorted_len = list.len();
        }
        list.clone()
    }
}

#[derive(Debug, Clone, Copy)]
struct ClassMeta {
    birth: usize,
    forward: bool,
    dim: usize,
}

struct Engine {
    next_id: u32,
    /// Live simplices with their id and dimension.
    live: HashMap<Simplex, (u32, usize)>,
    coface_count: HashMap<u32, usize>,
    z_chains: SparseMat<u32>,
    z_meta: Vec<ClassMeta>,
    b_coords: SparseMat<usize>,
    c_chains: SparseMat<u32>,
    b_pivot_of: Vec<usize>,
    pivot_to_b: HashMap<usize, usize>,
    e_chains: SparseMat<u32>,
    t_refs: SparseMat<usize>,
    e_pivot: HashMap<u32, usize>,
    /// Cycles of the untracked top dimension: a bare basis used for the
    /// case split and witness repairs at top-dimensional removals.
    top_cycles: SparseMat<u32>,
    /// Simplices of exactly this dimension skip class bookkeeping; their
    /// classes cannot die while no higher simplex ever appears, and the
    /// caller discards their intervals.
    lite_dim: usize,
    finished: Vec<(usize, usize, usize)>,
}

impl Engine {
    fn new() -> Self {
        Engine {
            next_id: 0,
            live: HashMap::new(),
            coface_count: HashMap::new(),
            z_chains: SparseMat::new(),
            z_meta: Vec::new(),
            b_coords: SparseMat::new(),
            c_chains: SparseMat::new(),
            b_pivot_of: Vec::new(),
            pivot_to_b: HashMap::new(),
            e_chains: SparseMat::new(),
            t_refs: SparseMat::new(),
            e_pivot: HashMap::new(),
            top_cycles: SparseMat::new(),
            lite_dim: usize::MAX,
            finished: Vec::new(),
        }
    }

    fn invalid(index: usize, message: String) -> PersistenceError {
        PersistenceError::InvalidStream { index, message }
    }

    fn facet_ids(&self, simplex: &Simplex, index: usize) -> Result<Vec<u32>, PersistenceError> {
        let mut ids = Vec::with_capacity(simplex.vertices().len());
        for facet in simplex.facets() {
            match self.live.get(&facet) {
                Some(&(id, _)) => ids.push(id),
                None => {
                    return Err(Self::invalid(
                        index,
                        format!("face {facet} of {simplex} is not present"),
                    ))
                }
            }
        }
        ids.sort_unstable();
        Ok(ids)
    }

    /// Expresses a cycle (sorted simplex ids) in `Z` coordinates via the
    /// echelon copy.
    fn solve_cycle(&self, mut chain: Vec<u32>) -> Vec<usize> {
        let mut coords: Vec<usize> = Vec::new();
        while let Some(&m) = chain.last() {
            let e = *self
                .e_pivot
                .get(&m)
                .expect("boundary of a valid simplex must be a cycle of the current complex");
            chain = xor_sorted(&chain, self.e_chains.col(e));
            coords = xor_sorted(&coords, self.t_refs.col(e));
        }
        coords
    }

    /// Fully reduces `Z` coordinates modulo the boundary columns, returning
    /// the reduced coordinates and the `B` columns used.
    fn reduce_mod_boundaries(&self, mut coords: Vec<usize>) -> (Vec<usize>, Vec<usize>) {
        let mut used = Vec::new();
        while let Some(&j) = coords.iter().find(|j| self.pivot_to_b.contains_key(j)) {
            let l = self.pivot_to_b[&j];
            coords = xor_sorted(&coords, self.b_coords.col(l));
            used.push(l);
        }
        (coords, used)
    }

    /// Youngest forward-born class in the support, or the oldest class when
    /// every one is backward-born.
    fn choose_addition_death(&self, support: &[usize]) -> usize {
        support
            .iter()
            .copied()
            .filter(|&i| self.z_meta[i].forward)
            .max_by_key(|&i| self.z_meta[i].birth)
            .unwrap_or_else(|| {
                support
                    .iter()
                    .copied()
                    .min_by_key(|&i| self.z_meta[i].birth)
                    .expect("death support is nonempty")
            })
    }

    /// Youngest backward-born class in the support, or the oldest class when
    /// every one is forward-born.
    fn choose_removal_death(&self, support: &[usize]) -> usize {
        support
            .iter()
            .copied()
            .filter(|&i| !self.z_meta[i].forward)
            .max_by_key(|&i| self.z_meta[i].birth)
            .unwrap_or_else(|| {
                support
                    .iter()
                    .copied()
                    .min_by_key(|&i| self.z_meta[i].birth)
                    .expect("death support is nonempty")
            })
    }

    fn add(&mut self, simplex: &Simplex, index: usize) -> Result<(), PersistenceError> {
        if self.live.contains_key(simplex) {
            return Err(Self::invalid(index, format!("{simplex} added twice")));
        }
        let boundary = self.facet_ids(simplex, index)?;
        let dim = simplex.dim();
        let id = self.next_id;
        self.next_id += 1;
        self.live.insert(simplex.clone(), (id, dim));
        self.coface_count.insert(id, 0);
        for &fid in &boundary {
            *self.coface_count.get_mut(&fid).expect("live face") += 1;
        }

        let coords = self.solve_cycle(boundary);
        let (reduced, used) = self.reduce_mod_boundaries(coords);

        // In either case this chain has boundary equal to the cycle the
        // reduced coordinates describe.
        let mut chain = vec![id];
        for &l in &used {
            chain = xor_sorted(&chain, self.c_chains.col(l));
        }

        if reduced.is_empty() {
            // The boundary was already a boundary: a class is born, with the
            // new simplex completing a fresh cycle.
            debug_assert_eq!(chain.last(), Some(&id));
            if dim == self.lite_dim {
                self.top_cycles.push(chain);
                return Ok(());
            }
            let zi = self.z_chains.push(chain.clone());
            self.z_meta.push(ClassMeta {
                birth: index,
                forward: true,
                dim,
            });
            debug_assert_eq!(self.z_meta.len(), zi + 1);
            let ei = self.e_chains.push(chain);
            let ti = self.t_refs.push(vec![zi]);
            debug_assert_eq!(ei, ti);
            self.e_pivot.insert(id, ei);
        } else {
            // The boundary represents a live class: that class dies.
            let j_star = self.choose_addition_death(&reduced);
            debug_assert_eq!(self.z_meta[j_star].dim, dim - 1);
            // Keep full reduction: no other column may contain the new pivot.
            for l in self.b_coords.rows_of(j_star) {
                self.b_coords.xor_into(l, &reduced);
                self.c_chains.xor_into(l, &chain);
            }
            let bi = self.b_coords.push(reduced);
            let ci = self.c_chains.push(chain);
            debug_assert_eq!(bi, ci);
            self.b_pivot_of.push(j_star);
            debug_assert_eq!(self.b_pivot_of.len(), bi + 1);
            self.pivot_to_b.insert(j_star, bi);
            self.finished
                .push((dim - 1, self.z_meta[j_star].birth, index));
        }
        Ok(())
    }

    fn remove(&mut self, simplex: &Simplex, index: usize) -> Result<(), PersistenceError> {
        let Some((id, dim)) = self.live.remove(simplex) else {
            return Err(Self::invalid(index, format!("{simplex} is not present")));
        };
        if self.coface_count.get(&id).copied().unwrap_or(0) != 0 {
            return Err(Self::invalid(
                index,
                format!("{simplex} removed while a coface is present"),
            ));
        }
        self.coface_count.remove(&id);
        for facet in simplex.facets() {
            let fid = self.live[&facet].0;
            *self.coface_count.get_mut(&fid).expect("live face") -= 1;
        }

        if dim == self.lite_dim {
            self.remove_top(id, dim, index);
            return Ok(());
        }
        let z_sigma = self.z_chains.rows_of(id);
        if !z_sigma.is_empty() {
            self.removal_death(id, dim, &z_sigma, index);
        } else {
            self.removal_birth(id, dim, index);
        }
        Ok(())
    }

    /// Removal in the untracked top dimension. If a top cycle passes
    /// through the simplex, a top class dies (not reported): clear the
    /// simplex from the echelon and from the witness chains one dimension
    /// down. Otherwise a class below is born exactly as usual.
    fn remove_top(&mut self, id: u32, dim: usize, index: usize) {
        let t_sigma = self.top_cycles.rows_of(id);
        if !t_sigma.is_empty() {
            // Nothing solves against the top cycles, so no pivot structure
            // to preserve: eliminating with the shortest column keeps
            // fill-in down.
            let a = t_sigma
                .iter()
                .copied()
                .min_by_key(|&l| (self.top_cycles.col(l).len(), l))
                .expect("nonempty set");
            let ea = self.top_cycles.col(a).to_vec();
            for &q in &t_sigma {
                if q != a {
                    self.top_cycles.xor_into(q, &ea);
                }
            }
            for l in self.c_chains.rows_of(id) {
                self.c_chains.xor_into(l, &ea);
            }
            self.top_cycles.delete(a);
        } else {
            // No top cycle through the simplex: its boundary stops bounding.
            self.removal_birth(id, dim, index);
        }
    }

    /// Some cycle passes through the removed simplex: a class of its
    /// dimension dies, because boundaries never contain a simplex without
    /// cofaces and so the cycle space shrinks while the boundary space
    /// stays.
    fn removal_death(&mut self, id: u32, dim: usize, z_sigma: &[usize], index: usize) {
        let support: Vec<usize> = z_sigma
            .iter()
            .copied()
            .filter(|i| !self.pivot_to_b.contains_key(i))
            .collect();
        debug_assert!(
            !support.is_empty(),
            "a removal that destroys cycles always ends a live class"
        );
        let j_star = self.choose_removal_death(&support);
        debug_assert_eq!(self.z_meta[j_star].dim, dim);

        // Clear the simplex from every other cycle column using the dying
        // one; survivors become v_i + v_j*.
        let zj = self.z_chains.col(j_star).to_vec();
        for &q in z_sigma {
            if q != j_star {
                self.z_chains.xor_into(q, &zj);
            }
        }
        // Witness chains of the same dimension may pass through the removed
        // simplex; adding the dying cycle cancels it without changing their
        // boundaries.
        for l in self.c_chains.rows_of(id) {
            self.c_chains.xor_into(l, &zj);
        }
        // Fix the boundary coordinates for the changed columns. A boundary
        // never contains the removed simplex, so it meets the changed set an
        // even number of times when it referenced j* and an odd number never
        // leaves a j* entry behind.
        for &q in z_sigma {
            if q != j_star {
                for l in self.b_coords.rows_of(q) {
                    self.b_coords.toggle(l, j_star);
                }
            }
        }
        debug_assert!(self.b_coords.rows_of(j_star).is_empty());

        // The echelon copy needs the same clearing; eliminating with the
        // smallest pivot keeps all other pivots intact.
        let e_sigma = self.e_chains.rows_of(id);
        debug_assert!(!e_sigma.is_empty());
        let a = e_sigma
            .iter()
            .copied()
            .min_by_key(|&l| *self.e_chains.col(l).last().expect("nonempty column"))
            .expect("nonempty set");
        let ea = self.e_chains.col(a).to_vec();
        let ta = self.t_refs.col(a).to_vec();
        for &q in &e_sigma {
            if q != a {
                self.e_chains.xor_into(q, &ea);
                self.t_refs.xor_into(q, &ta);
            }
        }
        self.e_pivot.remove(ea.last().expect("nonempty column"));
        self.e_chains.delete(a);
        self.t_refs.delete(a);
        // The deleted basis column disappears from every coordinate vector:
        // after the clearing each reference cancels out.
        for l in self.t_refs.rows_of(j_star) {
            self.t_refs.toggle(l, j_star);
        }

        self.finished.push((dim, self.z_meta[j_star].birth, index));
        self.z_chains.delete(j_star);
    }

    /// No cycle passes through the removed simplex: its boundary stops being
    /// a boundary, so a class one dimension down is born. The bookkeeping
    /// column witnessing that boundary is retired and its pivot cycle is
    /// rewritten to represent the newborn class.
    fn removal_birth(&mut self, id: u32, dim: usize, index: usize) {
        let c_sigma = self.c_chains.rows_of(id);
        debug_assert!(
            !c_sigma.is_empty(),
            "the simplex boundary is a boundary, witnessed by some chain through it"
        );
        let star = c_sigma[0];
        let b_star = self.b_coords.col(star).to_vec();
        let c_star = self.c_chains.col(star).to_vec();
        let piv = self.b_pivot_of[star];
        for &l in &c_sigma[1..] {
            self.b_coords.xor_into(l, &b_star);
            self.c_chains.xor_into(l, &c_star);
        }

        // The newborn class is the boundary of the retired chain.
        let mut newborn: Vec<u32> = Vec::new();
        for &i in &b_star {
            newborn = xor_sorted(&newborn, self.z_chains.col(i));
        }
        // Coordinate vectors referencing the rewritten column pick up the
        // rest of the retired combination; the clearing above put `piv` into
        // exactly the other cleared boundary columns, which need the same
        // substitution.
        let b_minus: Vec<usize> = b_star.iter().copied().filter(|&i| i != piv).collect();
        if !b_minus.is_empty() {
            for l in self.t_refs.rows_of(piv) {
                self.t_refs.xor_into(l, &b_minus);
            }
            for l in self.b_coords.rows_of(piv) {
                if l != star {
                    self.b_coords.xor_into(l, &b_minus);
                }
            }
        }
        debug_assert_eq!(self.z_meta[piv].dim, dim - 1);
        self.z_chains.set(piv, newborn);
        self.z_meta[piv] = ClassMeta {
            birth: index,
            forward: false,
            dim: dim - 1,
        };
        self.pivot_to_b.remove(&piv);
        self.b_coords.delete(star);
        self.c_chains.delete(star);
    }

    fn survivors(&self) -> Vec<(usize, usize)> {
        (0..self.z_meta.len())
            .filter(|&i| self.z_chains.live[i] && !self.pivot_to_b.contains_key(&i))
            .map(|i| (self.z_meta[i].dim, self.z_meta[i].birth))
            .collect()
    }
}

/// Interval decomposition of a valid zigzag stream. The stream is validated
/// while running: additions need all facets present, removals need no
/// present coface, and scales must be nondecreasing. Classes in homology
/// dimension above `max_dim` are not reported.
pub fn zigzag_persistence(
    stream: &ZigzagEventStream,
    max_dim: usize,
) -> Result<Vec<Interval>, PersistenceError> {
    let events = stream.events();
    let mut engine = Engine::new();
    // When the stream's top dimension exceeds the reporting cap, its cycles
    // can never become boundaries (nothing higher ever appears), so the
    // engine tracks them without class bookkeeping.
    let stream_top = events.iter().map(|e| e.simplex.dim()).max().unwrap_or(0);
    if stream_top > max_dim {
        engine.lite_dim = stream_top;
    }
    let mut prev_alpha = f64::NEG_INFINITY;
    for (index, event) in events.iter().enumerate() {
        if event.alpha < prev_alpha {
            return Err(Engine::invalid(
                index,
                format!("scale decreased: {} after {}", event.alpha, prev_alpha),
            ));
        }
        prev_alpha = event.alpha;
        match event.op {
            EventOp::Add => engine.add(&event.simplex, index)?,
            EventOp::Remove => engine.remove(&event.simplex, index)?,
        }
    }

    let mut intervals = Vec::new();
    for &(dim, birth_index, death_index) in &engine.finished {
        if dim > max_dim {
            continue;
        }
        intervals.push(Interval {
            dim,
            birth_index,
            death_index: Some(death_index),
            birth: events[birth_index].alpha,
            death: events[death_index].alpha,
        });
    }
    for (dim, birth_index) in engine.survivors() {
        if dim > max_dim {
            continue;
        }
        intervals.push(Interval {
            dim,
            birth_index,
            death_index: None,
            birth: events[birth_index].alpha,
            death: f64::INFINITY,
        });
    }
    intervals.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then_with(|| a.birth_index.cmp(&b.birth_index))
            .then_with(|| a.death_index.cmp(&b.death_index))
    });
    Ok(intervals)
}
