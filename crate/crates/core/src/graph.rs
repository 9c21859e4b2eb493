//! Bit-packed undirected graphs, bipartite 0/1 matrices, and vertex sets.
//!
//! Adjacency rows are stored as `u64` words, which makes the hot operations
//! of the simulator — neighbourhood counts against a colour mask — single
//! popcount-AND sweeps. Random graphs are sampled one 64-column word at a
//! time on the upper triangle and mirrored with a bitwise block transpose,
//! so a dense graph on a few thousand vertices costs well under a
//! millisecond.

use crate::error::{Error, Result};
use crate::rng::{bernoulli_threshold, SplitMix64};

const WORD_BITS: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// Mask of the valid bits in the final word of a row holding `bits` columns.
#[inline]
fn tail_mask(bits: usize) -> u64 {
    match bits % WORD_BITS {
        0 => !0,
        rem => (1u64 << rem) - 1,
    }
}

/// In-place transpose of a 64x64 bit block; bit `c` of `a[r]` moves to bit
/// `r` of `a[c]`. Swaps opposite sub-blocks at each power-of-two scale.
fn transpose64(a: &mut [u64; 64]) {
    let mut j: usize = 32;
    let mut m: u64 = 0x0000_0000_FFFF_FFFF;
    while j != 0 {
        let mut k: usize = 0;
        while k < 64 {
            let t = ((a[k] >> j) ^ a[k | j]) & m;
            a[k] ^= t << j;
            a[k | j] ^= t;
            k = ((k | j) + 1) & !j;
        }
        j >>= 1;
        m ^= m << j;
    }
}

/// A set of vertices out of a fixed universe `0..universe`, stored as a
/// bit mask. Doubles as a two-colouring (members = red).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    universe: usize,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn empty(universe: usize) -> Self {
        VertexSet {
            universe,
            words: vec![0; words_for(universe)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut words = vec![!0u64; words_for(universe)];
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(universe);
        }
        VertexSet { universe, words }
    }

    pub fn from_indices(universe: usize, members: &[usize]) -> Result<Self> {
        let mut set = VertexSet::empty(universe);
        for &v in members {
            if v >= universe {
                return Err(Error::invalid(format!(
                    "vertex {v} outside universe 0..{universe}"
                )));
            }
            set.insert(v);
        }
        Ok(set)
    }

    /// First `count` vertices of the universe.
    pub fn prefix(universe: usize, count: usize) -> Self {
        assert!(count <= universe, "prefix longer than universe");
        let mut set = VertexSet::empty(universe);
        let full_words = count / WORD_BITS;
        for w in 0..full_words {
            set.words[w] = !0;
        }
        if count % WORD_BITS != 0 {
            set.words[full_words] = (1u64 << (count % WORD_BITS)) - 1;
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        debug_assert!(v < self.universe);
        self.words[v / WORD_BITS] >> (v % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, v: usize) {
        debug_assert!(v < self.universe);
        self.words[v / WORD_BITS] |= 1u64 << (v % WORD_BITS);
    }

    #[inline]
    pub fn remove(&mut self, v: usize) {
        debug_assert!(v < self.universe);
        self.words[v / WORD_BITS] &= !(1u64 << (v % WORD_BITS));
    }

    /// Number of members.
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn complement(&self) -> VertexSet {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(self.universe);
        }
        VertexSet {
            universe: self.universe,
            words,
        }
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        assert_eq!(self.universe, other.universe, "universe mismatch");
        VertexSet {
            universe: self.universe,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        assert_eq!(self.universe, other.universe, "universe mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn as_words(&self) -> &[u64] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            let mut rest = bits;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * WORD_BITS + tz)
            })
        })
    }
}

impl std::fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.universe <= 64 {
            write!(f, "VertexSet{:?}", self.iter().collect::<Vec<_>>())
        } else {
            write!(f, "VertexSet({} of {})", self.len(), self.universe)
        }
    }
}

/// Undirected simple graph with a bit-packed adjacency matrix.
#[derive(Clone)]
pub struct Graph {
    n: usize,
    words_per_row: usize,
    rows: Vec<u64>,
}

impl Graph {
    pub fn empty(n: usize) -> Graph {
        let words_per_row = words_for(n);
        Graph {
            n,
            words_per_row,
            rows: vec![0; n * words_per_row],
        }
    }

    pub fn complete(n: usize) -> Graph {
        let mut g = Graph::empty(n);
        let words = g.words_per_row;
        let tail = tail_mask(n);
        for i in 0..n {
            let row = &mut g.rows[i * words..(i + 1) * words];
            for w in row.iter_mut() {
                *w = !0;
            }
            row[words - 1] &= tail;
            row[i / WORD_BITS] &= !(1u64 << (i % WORD_BITS));
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut g = Graph::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::invalid(format!(
                    "edge ({i}, {j}) outside vertex range 0..{n}"
                )));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop at vertex {i}")));
            }
            g.set_edge(i, j);
        }
        Ok(g)
    }

    fn set_edge(&mut self, i: usize, j: usize) {
        let words = self.words_per_row;
        self.rows[i * words + j / WORD_BITS] |= 1u64 << (j % WORD_BITS);
        self.rows[j * words + i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row_words(&self, v: usize) -> &[u64] {
        &self.rows[v * self.words_per_row..(v + 1) * self.words_per_row]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words_per_row + j / WORD_BITS] >> (j % WORD_BITS) & 1 == 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row_words(v)
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn degrees(&self) -> Vec<u32> {
        (0..self.n)
            .map(|v| {
                self.row_words(v)
                    .iter()
                    .map(|w| w.count_ones())
                    .sum::<u32>()
            })
            .collect()
    }

    pub fn edge_count(&self) -> u64 {
        let total: u64 = self.rows.iter().map(|w| w.count_ones() as u64).sum();
        total / 2
    }

    /// Number of neighbours of `v` inside `set`.
    #[inline]
    pub fn degree_within(&self, v: usize, set: &VertexSet) -> usize {
        debug_assert_eq!(set.universe(), self.n);
        self.row_words(v)
            .iter()
            .zip(set.as_words())
            .map(|(r, m)| (r & m).count_ones() as usize)
            .sum()
    }

    /// Mirrors every upper-triangle bit onto the lower triangle, one 64x64
    /// block at a time. Called once after sampling; requires the lower
    /// triangle to be all-zero.
    fn mirror_upper_triangle(&mut self) {
        let nb = self.words_per_row;
        let mut buf = [0u64; 64];
        for bi in 0..nb {
            self.load_block(bi, bi, &mut buf);
            let mut t = buf;
            transpose64(&mut t);
            for (b, t) in buf.iter_mut().zip(t.iter()) {
                *b |= t;
            }
            self.store_block(bi, bi, &buf);
            for bj in bi + 1..nb {
                self.load_block(bi, bj, &mut buf);
                transpose64(&mut buf);
                self.store_block(bj, bi, &buf);
            }
        }
    }

    fn load_block(&self, bi: usize, bj: usize, out: &mut [u64; 64]) {
        let base = bi * WORD_BITS;
        for (k, slot) in out.iter_mut().enumerate() {
            let r = base + k;
            *slot = if r < self.n {
                self.rows[r * self.words_per_row + bj]
            } else {
                0
            };
        }
    }

    fn store_block(&mut self, bi: usize, bj: usize, block: &[u64; 64]) {
        let base = bi * WORD_BITS;
        for (k, &word) in block.iter().enumerate() {
            let r = base + k;
            if r < self.n {
                self.rows[r * self.words_per_row + bj] = word;
            }
        }
    }
}

/// Samples an Erdos–Renyi graph: every unordered pair is an edge
/// independently with probability `p`. Deterministic given the generator
/// state.
pub fn sample_gnp(n_vertices: usize, p: f64, rng: &mut SplitMix64) -> Result<Graph> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!(
            "edge probability must lie in [0, 1], got {p}"
        )));
    }
    if p == 0.0 {
        return Ok(Graph::empty(n_vertices));
    }
    if p == 1.0 {
        return Ok(Graph::complete(n_vertices));
    }
    let mut g = Graph::empty(n_vertices);
    let threshold = bernoulli_threshold(p);
    let words = g.words_per_row;
    let tail = tail_mask(n_vertices);
    for i in 0..n_vertices {
        let first_col = i + 1;
        if first_col >= n_vertices {
            break;
        }
        let first_word = first_col / WORD_BITS;
        let row = &mut g.rows[i * words..(i + 1) * words];
        for (w, slot) in row.iter_mut().enumerate().skip(first_word) {
            let mut bits = rng.bernoulli_word(threshold);
            if w == first_word {
                bits &= !0u64 << (first_col % WORD_BITS);
            }
            if w == words - 1 {
                bits &= tail;
            }
            *slot = bits;
        }
    }
    g.mirror_upper_triangle();
    Ok(g)
}

/// Samples the two-community opinion graph on `2n + delta` vertices with
/// edge probability `p`, bit-exactly reproducible from `seed`. Per-trial
/// seeds should come from [`crate::rng::derive_trial_seed`].
pub fn sample_opinion_graph(params: &crate::params::ModelParams, seed: u64) -> Result<Graph> {
    let mut rng = SplitMix64::new(seed);
    sample_gnp(params.total_vertices() as usize, params.p, &mut rng)
}

/// Bipartite 0/1 matrix: `left` row vertices, `right` column vertices, each
/// of the `left * right` cells set independently with probability `p`.
#[derive(Clone)]
pub struct BipartiteGraph {
    left: usize,
    right: usize,
    words_per_row: usize,
    rows: Vec<u64>,
}

impl BipartiteGraph {
    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words_per_row + j / WORD_BITS] >> (j % WORD_BITS) & 1 == 1
    }

    pub fn left_degree(&self, i: usize) -> usize {
        self.rows[i * self.words_per_row..(i + 1) * self.words_per_row]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn left_degrees(&self) -> Vec<u32> {
        (0..self.left)
            .map(|i| {
                self.rows[i * self.words_per_row..(i + 1) * self.words_per_row]
                    .iter()
                    .map(|w| w.count_ones())
                    .sum::<u32>()
            })
            .collect()
    }

    pub fn right_degrees(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.right];
        for i in 0..self.left {
            let row = &self.rows[i * self.words_per_row..(i + 1) * self.words_per_row];
            for (w, &word) in row.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let tz = bits.trailing_zeros() as usize;
                    counts[w * WORD_BITS + tz] += 1;
                    bits &= bits - 1;
                }
            }
        }
        counts
    }

    pub fn edge_count(&self) -> u64 {
        self.rows.iter().map(|w| w.count_ones() as u64).sum()
    }
}

pub fn sample_bipartite(
    left: usize,
    right: usize,
    p: f64,
    rng: &mut SplitMix64,
) -> Result<BipartiteGraph> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!(
            "edge probability must lie in [0, 1], got {p}"
        )));
    }
    let words_per_row = words_for(right);
    let mut g = BipartiteGraph {
        left,
        right,
        words_per_row,
        rows: vec![0; left * words_per_row],
    };
    if p == 0.0 {
        return Ok(g);
    }
    let tail = tail_mask(right);
    if p == 1.0 {
        for i in 0..left {
            let row = &mut g.rows[i * words_per_row..(i + 1) * words_per_row];
            for w in row.iter_mut() {
                *w = !0;
            }
            if let Some(last) = row.last_mut() {
                *last &= tail;
            }
        }
        return Ok(g);
    }
    let threshold = bernoulli_threshold(p);
    for i in 0..left {
        let row = &mut g.rows[i * words_per_row..(i + 1) * words_per_row];
        for (w, slot) in row.iter_mut().enumerate() {
            let mut bits = rng.bernoulli_word(threshold);
            if w == words_per_row - 1 {
                bits &= tail;
            }
            *slot = bits;
        }
    }
    Ok(g)
}
