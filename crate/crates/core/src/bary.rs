//! Barycentric subdivision realized through witness points.
//!
//! The subdivision has one vertex per simplex of the complex and one
//! simplex per flag, a strictly increasing chain of proper faces. Placing
//! each flag vertex at its simplex's witness point embeds the subdivision
//! in the ambient space, which is what the geometry export draws.

use thiserror::Error;

use crate::builder::WitnessMap;
use crate::complex::{FilteredComplex, Simplex};

#[derive(Debug, Error, PartialEq)]
pub enum BaryError {
    #[error("no witness stored for simplex {0}")]
    MissingWitness(Simplex),
    #[error("chain element {position} is not a proper face of its successor")]
    NotAFlag { position: usize },
    #[error("flag chain is empty")]
    EmptyFlag,
}

/// Strictly increasing chain of proper faces; a simplex of the subdivision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flag(Vec<Simplex>);

impl Flag {
    pub fn new(chain: Vec<Simplex>) -> Result<Self, BaryError> {
        if chain.is_empty() {
            return Err(BaryError::EmptyFlag);
        }
        for (position, pair) in chain.windows(2).enumerate() {
            let proper =
                pair[0].dimension() < pair[1].dimension() && pair[0].is_face_of(&pair[1]);
            if !proper {
                return Err(BaryError::NotAFlag { position });
            }
        }
        Ok(Flag(chain))
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The embedded subdivision. Flag vertices are the simplices of the source
/// complex in (dimension, lexicographic) order, each placed at its witness
/// point; flags are stored as ascending index chains into that order.
#[derive(Clone, Debug)]
pub struct BarycentricEmbedding {
    vertices: Vec<Simplex>,
    coords: Vec<Vec<f64>>,
    flags: Vec<Vec<Vec<u32>>>,
}

impl BarycentricEmbedding {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Simplex] {
        &self.vertices
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    /// Index chains of the flags with exactly `len` elements, in
    /// lexicographic order.
    pub fn flags_of_length(&self, len: usize) -> &[Vec<u32>] {
        assert!(len >= 1, "flags have at least one element");
        self.flags
            .get(len - 1)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Length of the longest stored flag.
    pub fn max_length(&self) -> usize {
        self.flags.len()
    }

    pub fn flag(&self, len: usize, i: usize) -> Flag {
        Flag(
            self.flags[len - 1][i]
                .iter()
                .map(|&ix| self.vertices[ix as usize].clone())
                .collect(),
        )
    }
}

fn grow(above: &[Vec<u32>], chain: &mut Vec<u32>, flags: &mut [Vec<Vec<u32>>]) {
    let len = chain.len();
    flags[len - 1].push(chain.clone());
    if len == flags.len() {
        return;
    }
    let last = *chain.last().unwrap() as usize;
    for &j in &above[last] {
        chain.push(j);
        grow(above, chain, flags);
        chain.pop();
    }
}

/// Enumerate all flags with at most `max_flag_dim + 1` elements and attach
/// witness coordinates to every flag vertex. Every simplex of the complex
/// must have a witness.
pub fn barycentric_embed(
    complex: &FilteredComplex,
    witness: &WitnessMap,
    max_flag_dim: usize,
) -> Result<BarycentricEmbedding, BaryError> {
    let vertices: Vec<Simplex> = complex.simplices().map(|(s, _)| s.clone()).collect();
    let coords: Vec<Vec<f64>> = vertices
        .iter()
        .map(|s| {
            witness
                .get(s)
                .map(<[f64]>::to_vec)
                .ok_or_else(|| BaryError::MissingWitness(s.clone()))
        })
        .collect::<Result<_, _>>()?;

    // Successors in the proper-face order. Faces have strictly smaller
    // dimension, so they sort strictly earlier and chains ascend by index.
    let nv = vertices.len();
    let mut above: Vec<Vec<u32>> = vec![Vec::new(); nv];
    for i in 0..nv {
        for j in i + 1..nv {
            if vertices[i].dimension() < vertices[j].dimension()
                && vertices[i].is_face_of(&vertices[j])
            {
                above[i].push(j as u32);
            }
        }
    }

    let mut flags: Vec<Vec<Vec<u32>>> = vec![Vec::new(); max_flag_dim + 1];
    let mut chain = Vec::new();
    for i in 0..nv {
        chain.push(i as u32);
        grow(&above, &mut chain, &mut flags);
        chain.pop();
    }
    while flags.last().is_some_and(Vec::is_empty) {
        flags.pop();
    }
    Ok(BarycentricEmbedding {
        vertices,
        coords,
        flags,
    })
}
