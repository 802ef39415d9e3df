//! Simplices and filtered simplicial complexes.
//!
//! A simplex is identified by its strictly increasing vertex tuple; every map
//! in the crate is keyed on that canonical form. A [`FilteredComplex`] stores
//! one ordered layer per dimension, so iteration order (and therefore every
//! derived artifact such as boundary matrices or serialized output) is
//! deterministic.

use std::borrow::Borrow;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::homology::{FpError, SparseMatrixFp};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimplexError {
    #[error("simplex must have at least one vertex")]
    Empty,
    #[error("vertices must be strictly increasing, got {0} before {1}")]
    NotIncreasing(u32, u32),
}

/// An abstract simplex: a strictly increasing tuple of vertex indices.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex(Vec<u32>);

impl Simplex {
    pub fn new(vertices: Vec<u32>) -> Result<Self, SimplexError> {
        if vertices.is_empty() {
            return Err(SimplexError::Empty);
        }
        for w in vertices.windows(2) {
            if w[0] >= w[1] {
                return Err(SimplexError::NotIncreasing(w[0], w[1]));
            }
        }
        Ok(Simplex(vertices))
    }

    /// Internal fast path for vertex tuples already known to be sorted.
    pub(crate) fn from_sorted(vertices: Vec<u32>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]) && !vertices.is_empty());
        Simplex(vertices)
    }

    pub fn vertex(v: u32) -> Self {
        Simplex(vec![v])
    }

    pub fn edge(a: u32, b: u32) -> Self {
        assert!(a != b);
        Simplex(if a < b { vec![a, b] } else { vec![b, a] })
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len() - 1
    }

    /// The facet obtained by dropping the vertex at `position`.
    pub fn facet(&self, position: usize) -> Simplex {
        assert!(self.0.len() > 1, "a vertex has no facets");
        let mut v = Vec::with_capacity(self.0.len() - 1);
        v.extend_from_slice(&self.0[..position]);
        v.extend_from_slice(&self.0[position + 1..]);
        Simplex(v)
    }

    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        (0..self.0.len()).map(|i| self.facet(i))
    }

    /// True when `self` is a face of `other` (not necessarily proper).
    pub fn is_face_of(&self, other: &Simplex) -> bool {
        subset_of(&self.0, &other.0)
    }
}

/// Two-pointer subset test on sorted slices.
pub(crate) fn subset_of(a: &[u32], b: &[u32]) -> bool {
    let mut it = b.iter();
    'outer: for x in a {
        for y in it.by_ref() {
            match y.cmp(x) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

impl Borrow<[u32]> for Simplex {
    fn borrow(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum InvariantError {
    #[error("missing face {face} of {simplex}")]
    MissingFace { simplex: Simplex, face: Simplex },
    #[error("weight of face {face} ({face_weight}) exceeds weight of {simplex} ({weight})")]
    NonMonotone {
        simplex: Simplex,
        weight: f64,
        face: Simplex,
        face_weight: f64,
    },
    #[error("weight of {simplex} is not finite")]
    NonFiniteWeight { simplex: Simplex },
}

/// A simplicial complex filtered by a real weight per simplex.
///
/// Layers are kept per dimension in lexicographic vertex order, with no
/// trailing empty layers, so two complexes with the same content compare
/// equal and iterate identically.
#[derive(Clone, Default, PartialEq)]
pub struct FilteredComplex {
    layers: Vec<BTreeMap<Simplex, f64>>,
}

impl FilteredComplex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build a complex from (simplex, weight) pairs. Later duplicates win.
    pub fn from_simplices<I>(simplices: I) -> Self
    where
        I: IntoIterator<Item = (Simplex, f64)>,
    {
        let mut c = Self::new();
        for (s, w) in simplices {
            c.insert(s, w);
        }
        c
    }

    /// Insert a simplex, returning the previous weight if it was present.
    pub fn insert(&mut self, simplex: Simplex, weight: f64) -> Option<f64> {
        let k = simplex.dimension();
        while self.layers.len() <= k {
            self.layers.push(BTreeMap::new());
        }
        self.layers[k].insert(simplex, weight)
    }

    /// Number of stored dimensions, i.e. `max_dim + 1` (0 when empty).
    pub fn dimension_count(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn size(&self, k: usize) -> usize {
        self.layers.get(k).map_or(0, BTreeMap::len)
    }

    /// Simplex counts per dimension, one entry per stored layer.
    pub fn sizes(&self) -> Vec<usize> {
        self.layers.iter().map(BTreeMap::len).collect()
    }

    pub fn total_size(&self) -> usize {
        self.layers.iter().map(BTreeMap::len).sum()
    }

    pub fn contains(&self, vertices: &[u32]) -> bool {
        self.weight(vertices).is_some()
    }

    pub fn weight(&self, vertices: &[u32]) -> Option<f64> {
        if vertices.is_empty() {
            return None;
        }
        self.layers.get(vertices.len() - 1)?.get(vertices).copied()
    }

    /// Iterate one dimension in lexicographic vertex order.
    pub fn layer(&self, k: usize) -> impl Iterator<Item = (&Simplex, f64)> {
        self.layers
            .get(k)
            .into_iter()
            .flat_map(|m| m.iter().map(|(s, &w)| (s, w)))
    }

    /// Iterate everything, dimension by dimension.
    pub fn simplices(&self) -> impl Iterator<Item = (&Simplex, f64)> {
        self.layers
            .iter()
            .flat_map(|m| m.iter().map(|(s, &w)| (s, w)))
    }

    pub(crate) fn trim(&mut self) {
        while self.layers.last().is_some_and(BTreeMap::is_empty) {
            self.layers.pop();
        }
    }

    /// The subcomplex of simplices of dimension at most `k`.
    ///
    /// `k = -1` gives the empty complex; `k` beyond the stored maximum gives
    /// a copy of the whole complex.
    pub fn skeleton(&self, k: isize) -> Self {
        if k < 0 {
            return Self::new();
        }
        let take = ((k as usize) + 1).min(self.layers.len());
        let mut out = FilteredComplex {
            layers: self.layers[..take].to_vec(),
        };
        out.trim();
        out
    }

    /// The subcomplex of simplices with weight at most `a`.
    pub fn sublevel(&self, a: f64) -> Self {
        let mut out = FilteredComplex {
            layers: self
                .layers
                .iter()
                .map(|m| {
                    m.iter()
                        .filter(|&(_, &w)| w <= a)
                        .map(|(s, &w)| (s.clone(), w))
                        .collect()
                })
                .collect(),
        };
        out.trim();
        out
    }

    /// Alternating sum of simplex counts.
    pub fn euler_characteristic(&self) -> i64 {
        self.layers
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let n = m.len() as i64;
                if k % 2 == 0 {
                    n
                } else {
                    -n
                }
            })
            .sum()
    }

    /// Adjacency lists of the 1-skeleton, sorted, keyed by vertex.
    pub fn adjacency(&self) -> BTreeMap<u32, Vec<u32>> {
        let mut adj: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        if let Some(edges) = self.layers.get(1) {
            for s in edges.keys() {
                let (a, b) = (s.vertices()[0], s.vertices()[1]);
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
        }
        for list in adj.values_mut() {
            list.sort_unstable();
        }
        adj
    }

    /// The `k`-simplices of the largest complex with the same `(k-1)`-skeleton
    /// as `self`: all `(k+1)`-subsets of vertices whose facets all belong to
    /// the complex. Emitted in lexicographic order, each exactly once.
    ///
    /// For `k >= 2` candidates are found by extending each `(k-1)`-simplex
    /// with common graph neighbours above its largest vertex, which avoids
    /// scanning all vertex tuples. `k = 1` yields all vertex pairs. For
    /// `k = 0` the vertex universe of the complex is its own 0-skeleton, so
    /// the result is just the stored vertices.
    pub fn lazy_candidates(&self, k: usize) -> Vec<Simplex> {
        match k {
            0 => self.layer(0).map(|(s, _)| s.clone()).collect(),
            1 => {
                let verts: Vec<u32> = self
                    .layer(0)
                    .map(|(s, _)| s.vertices()[0])
                    .collect();
                let mut out = Vec::new();
                for (i, &a) in verts.iter().enumerate() {
                    for &b in &verts[i + 1..] {
                        out.push(Simplex::from_sorted(vec![a, b]));
                    }
                }
                out
            }
            _ => self.lazy_candidates_high(k),
        }
    }

    fn lazy_candidates_high(&self, k: usize) -> Vec<Simplex> {
        let Some(lower) = self.layers.get(k - 1) else {
            return Vec::new();
        };
        let adj = self.adjacency();
        let empty: Vec<u32> = Vec::new();
        let mut out = Vec::new();
        let mut common: Vec<u32> = Vec::new();
        let mut facet: Vec<u32> = Vec::new();
        for s in lower.keys() {
            let vs = s.vertices();
            let last = *vs.last().unwrap();
            common.clear();
            common.extend(
                adj.get(&vs[0])
                    .unwrap_or(&empty)
                    .iter()
                    .copied()
                    .filter(|&u| u > last),
            );
            for v in &vs[1..] {
                if common.is_empty() {
                    break;
                }
                let list = adj.get(v).unwrap_or(&empty);
                common.retain(|u| list.binary_search(u).is_ok());
            }
            'cand: for &u in &common {
                // All facets of vs + {u} other than vs itself must be present.
                for drop in 0..vs.len() {
                    facet.clear();
                    facet.extend_from_slice(&vs[..drop]);
                    facet.extend_from_slice(&vs[drop + 1..]);
                    facet.push(u);
                    if !lower.contains_key(facet.as_slice()) {
                        continue 'cand;
                    }
                }
                let mut v = Vec::with_capacity(vs.len() + 1);
                v.extend_from_slice(vs);
                v.push(u);
                out.push(Simplex::from_sorted(v));
            }
        }
        out
    }

    /// Check face closure and weight monotonicity (with `slack` absolute
    /// tolerance on the weights).
    pub fn validate(&self, slack: f64) -> Result<(), InvariantError> {
        for k in 0..self.layers.len() {
            for (s, &w) in &self.layers[k] {
                if !w.is_finite() {
                    return Err(InvariantError::NonFiniteWeight { simplex: s.clone() });
                }
                if k == 0 {
                    continue;
                }
                for face in s.facets() {
                    match self.weight(face.vertices()) {
                        None => {
                            return Err(InvariantError::MissingFace {
                                simplex: s.clone(),
                                face,
                            })
                        }
                        Some(fw) if fw > w + slack => {
                            return Err(InvariantError::NonMonotone {
                                simplex: s.clone(),
                                weight: w,
                                face,
                                face_weight: fw,
                            })
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }

    /// The boundary map from `k`-chains to `(k-1)`-chains over `F_p`.
    ///
    /// Rows are indexed by the `(k-1)`-simplices and columns by the
    /// `k`-simplices, both in lexicographic order. The entry for the facet
    /// obtained by dropping vertex position `i` is `(-1)^i mod p`.
    pub fn boundary_matrix(&self, k: usize, prime: u64) -> Result<SparseMatrixFp, FpError> {
        assert!(k >= 1, "boundary is defined for dimension >= 1");
        let rows = self.size(k - 1);
        let cols = self.size(k);
        if cols == 0 {
            return SparseMatrixFp::new(rows, 0, prime, Vec::new());
        }
        let row_of: HashMap<&[u32], usize> = self
            .layers[k - 1]
            .keys()
            .enumerate()
            .map(|(i, s)| (s.vertices(), i))
            .collect();
        let mut entries = Vec::with_capacity(cols * (k + 1));
        let mut facet: Vec<u32> = Vec::with_capacity(k);
        for (j, s) in self.layers[k].keys().enumerate() {
            let vs = s.vertices();
            for drop in 0..vs.len() {
                facet.clear();
                facet.extend_from_slice(&vs[..drop]);
                facet.extend_from_slice(&vs[drop + 1..]);
                let &i = row_of
                    .get(facet.as_slice())
                    .ok_or_else(|| FpError::MissingFace {
                        simplex: s.to_string(),
                    })?;
                let value = if drop % 2 == 0 { 1 } else { prime - 1 };
                entries.push((i as u32, j as u32, value));
            }
        }
        SparseMatrixFp::new(rows, cols, prime, entries)
    }
}

impl fmt::Debug for FilteredComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FilteredComplex{:?}", self.sizes())
    }
}
