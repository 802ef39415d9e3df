//! The alpha complex pipeline: sweep candidate simplices dimension by
//! dimension, deciding each with one dual QP.
//!
//! Candidates at dimension 0 are the active vertices, at dimension 1 the
//! ball-graph edges, and above that the lazy extensions of the previous
//! layer. Every candidate is tested exactly once, based at its smallest
//! vertex; the QP coefficients for a base vertex are assembled once and
//! reused by all candidates sharing it, with constraints restricted to the
//! base's graph neighbors. Candidates sharing a base form the parallel work
//! unit, and results are merged in a deterministic order so the output is
//! independent of the thread schedule.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::cech::{build_cech_graph, CechGraph, GraphError, WeightedPoints};
use crate::complex::{FilteredComplex, Simplex};
use crate::homology::{betti, BettiVector, FpError};
use crate::qp::{primal_from_dual, DualProblem, DualStatus, DualWorkspace, QpError};
use crate::tol::Tolerances;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("points {base} and {neighbor} coincide")]
    Coincident { base: u32, neighbor: u32 },
    #[error(transparent)]
    Qp(#[from] QpError),
    #[error(transparent)]
    Homology(#[from] FpError),
    #[error("could not build thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Clone, Debug)]
pub struct BuildParams {
    /// Largest simplex dimension to emit.
    pub max_dim: usize,
    pub tolerances: Tolerances,
    /// Worker thread count; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl BuildParams {
    pub fn new(max_dim: usize) -> Self {
        BuildParams {
            max_dim,
            tolerances: Tolerances::default(),
            threads: None,
        }
    }
}

/// Dual QP data shared by every candidate simplex based at one vertex.
///
/// Row `i` of `diffs` is `x_i - x` for the i-th sorted neighbor `x_i`;
/// `gram` is the matrix of their pairwise dot products, `linear` the dual
/// linear term `(p(x_i) - p(x) - |x_i - x|^2) / 2`, and `bound` the
/// objective cutoff `(a1 + p(x)) / 2`.
#[derive(Clone, Debug)]
pub struct VertexCoefficients {
    pub base: u32,
    pub base_point: Vec<f64>,
    pub base_power: f64,
    pub neighbors: Vec<u32>,
    pub diffs: Vec<f64>,
    pub gram: Vec<f64>,
    pub linear: Vec<f64>,
    pub bound: f64,
}

/// Assemble the shared QP coefficients for base vertex `x`. The base must
/// be active; a neighbor occupying the same location as the base makes the
/// Gram diagonal vanish and is reported as a coincident pair.
pub fn vertex_coefficients(
    points: &WeightedPoints,
    graph: &CechGraph,
    x: u32,
) -> Result<VertexCoefficients, BuildError> {
    let neighbors = graph.neighbors(x)?.to_vec();
    let m = points.dim();
    let n = neighbors.len();
    let base_point = points.point(x as usize).to_vec();
    let base_power = points.power(x as usize);

    let mut diffs = vec![0.0; n * m];
    for (i, &nb) in neighbors.iter().enumerate() {
        let p = points.point(nb as usize);
        for t in 0..m {
            diffs[i * m + t] = p[t] - base_point[t];
        }
    }
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let dot: f64 = (0..m).map(|t| diffs[i * m + t] * diffs[j * m + t]).sum();
            gram[i * n + j] = dot;
            gram[j * n + i] = dot;
        }
    }
    let mut linear = vec![0.0; n];
    for i in 0..n {
        if gram[i * n + i] == 0.0 {
            return Err(BuildError::Coincident {
                base: x,
                neighbor: neighbors[i],
            });
        }
        linear[i] =
            0.5 * (points.power(neighbors[i] as usize) - base_power - gram[i * n + i]);
    }
    let bound = 0.5 * (points.cutoff() + base_power);
    Ok(VertexCoefficients {
        base: x,
        base_point,
        base_power,
        neighbors,
        diffs,
        gram,
        linear,
        bound,
    })
}

/// Decide one candidate simplex based at `coeffs.base`: `Some((weight,
/// witness))` when the restricted cells of its vertices share a point at
/// the cutoff, `None` otherwise. The simplex's smallest vertex must equal
/// the base; any other vertex missing from the base's neighbor list means
/// the cells cannot meet, and the candidate is rejected without a solve.
pub fn test_simplex(
    coeffs: &VertexCoefficients,
    sigma: &Simplex,
    ws: &mut DualWorkspace,
    tol: &Tolerances,
) -> Result<Option<(f64, Vec<f64>)>, BuildError> {
    let vs = sigma.vertices();
    debug_assert_eq!(vs[0], coeffs.base, "candidate must be based at its smallest vertex");
    let mut equalities = Vec::with_capacity(vs.len() - 1);
    for &v in &vs[1..] {
        match coeffs.neighbors.binary_search(&v) {
            Ok(pos) => equalities.push(pos),
            Err(_) => return Ok(None),
        }
    }
    let p = DualProblem::new_unchecked(&coeffs.gram, &coeffs.linear, &equalities, coeffs.bound);
    let sol = ws.solve(&p, tol)?;
    match sol.status {
        DualStatus::BoundExceeded => Ok(None),
        DualStatus::Optimal => {
            let weight = 2.0 * sol.cstar - coeffs.base_power;
            let y = primal_from_dual(&coeffs.base_point, &coeffs.diffs, &sol.lambda)?;
            Ok(Some((weight, y)))
        }
    }
}

/// Witness points keyed by simplex: each simplex maps to the power-distance
/// minimizer over the common intersection of its vertices' restricted cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WitnessMap {
    dim: usize,
    points: HashMap<Simplex, Vec<f64>>,
}

impl WitnessMap {
    pub fn new(dim: usize) -> Self {
        WitnessMap {
            dim,
            points: HashMap::new(),
        }
    }

    /// Ambient dimension of the stored points.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn insert(&mut self, sigma: Simplex, point: Vec<f64>) {
        assert_eq!(point.len(), self.dim, "witness has wrong dimension");
        self.points.insert(sigma, point);
    }

    pub fn get(&self, sigma: &Simplex) -> Option<&[f64]> {
        self.points.get(sigma).map(Vec::as_slice)
    }

    /// Check every stored witness against the whole point set: each vertex
    /// of σ sees its witness at power distance weight(σ) within `slack`,
    /// and no site at all sees it more than `slack` closer.
    pub fn validate(
        &self,
        points: &WeightedPoints,
        complex: &FilteredComplex,
        slack: f64,
    ) -> Result<(), String> {
        for (sigma, w) in complex.simplices() {
            let y = self
                .get(sigma)
                .ok_or_else(|| format!("missing witness for {sigma}"))?;
            for &v in sigma.vertices() {
                let d = points.power_distance(v as usize, y);
                if (d - w).abs() > slack {
                    return Err(format!(
                        "witness of {sigma}: vertex {v} at power distance {d}, weight is {w}"
                    ));
                }
            }
            for z in 0..points.len() {
                let d = points.power_distance(z, y);
                if d < w - slack {
                    return Err(format!(
                        "witness of {sigma}: site {z} at power distance {d}, below weight {w}"
                    ));
                }
            }
        }
        if self.points.len() != complex.total_size() {
            return Err(format!(
                "{} witnesses for {} simplices",
                self.points.len(),
                complex.total_size()
            ));
        }
        Ok(())
    }
}

fn group_by_base(candidates: Vec<Simplex>) -> Vec<(u32, Vec<Simplex>)> {
    let mut groups: Vec<(u32, Vec<Simplex>)> = Vec::new();
    for s in candidates {
        let b = s.vertices()[0];
        match groups.last_mut() {
            Some((base, v)) if *base == b => v.push(s),
            _ => groups.push((b, vec![s])),
        }
    }
    groups
}

fn run_build(
    points: &WeightedPoints,
    graph: &CechGraph,
    params: &BuildParams,
) -> Result<(FilteredComplex, WitnessMap), BuildError> {
    let active: Vec<u32> = graph.active_vertices().collect();
    let coeffs: Vec<(u32, VertexCoefficients)> = active
        .par_iter()
        .map(|&x| vertex_coefficients(points, graph, x).map(|c| (x, c)))
        .collect::<Result<_, _>>()?;
    let mut by_vertex: Vec<Option<VertexCoefficients>> = vec![None; points.len()];
    for (x, c) in coeffs {
        by_vertex[x as usize] = Some(c);
    }

    let mut complex = FilteredComplex::new();
    let mut witness = WitnessMap::new(points.dim());
    for k in 0..=params.max_dim {
        let candidates: Vec<Simplex> = match k {
            0 => active.iter().map(|&v| Simplex::vertex(v)).collect(),
            1 => graph.edges().map(|(a, b)| Simplex::edge(a, b)).collect(),
            _ => complex.lazy_candidates(k),
        };
        if candidates.is_empty() {
            break;
        }
        let accepted: Vec<Vec<(Simplex, f64, Vec<f64>)>> = group_by_base(candidates)
            .into_par_iter()
            .map(|(base, sims)| {
                let co = by_vertex[base as usize]
                    .as_ref()
                    .expect("candidate base is an active vertex");
                let mut ws = DualWorkspace::new();
                let mut out = Vec::new();
                for s in sims {
                    if let Some((w, y)) = test_simplex(co, &s, &mut ws, &params.tolerances)? {
                        out.push((s, w, y));
                    }
                }
                Ok(out)
            })
            .collect::<Result<_, BuildError>>()?;
        for group in accepted {
            for (s, w, y) in group {
                witness.insert(s.clone(), y);
                complex.insert(s, w);
            }
        }
    }
    complex.trim();
    Ok((complex, witness))
}

/// Compute the `max_dim`-skeleton of the alpha complex of `points` at its
/// cutoff, with exact weights and witness points.
pub fn build_alpha(
    points: &WeightedPoints,
    params: &BuildParams,
) -> Result<(FilteredComplex, WitnessMap), BuildError> {
    let graph = build_cech_graph(points);
    build_alpha_with_graph(points, &graph, params)
}

/// Same as [`build_alpha`] but with a caller-supplied graph, so tests can
/// compare neighbor-restricted runs against a complete graph.
pub fn build_alpha_with_graph(
    points: &WeightedPoints,
    graph: &CechGraph,
    params: &BuildParams,
) -> Result<(FilteredComplex, WitnessMap), BuildError> {
    match params.threads {
        None => run_build(points, graph, params),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| BuildError::ThreadPool(e.to_string()))?;
            pool.install(|| run_build(points, graph, params))
        }
    }
}

/// Build the complex and report Betti numbers through dimension
/// `max_dim - 1`, the largest dimension the stored boundary maps determine.
pub fn betti_pipeline(
    points: &WeightedPoints,
    params: &BuildParams,
    prime: u64,
) -> Result<BettiVector, BuildError> {
    let (complex, _) = build_alpha(points, params)?;
    if params.max_dim == 0 {
        return Ok(BettiVector(Vec::new()));
    }
    Ok(betti(&complex, prime, params.max_dim - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unweighted(coords: &[f64], dim: usize, cutoff: f64) -> WeightedPoints {
        WeightedPoints::unweighted(coords.to_vec(), dim, cutoff).unwrap()
    }

    fn coeffs_for(points: &WeightedPoints, x: u32) -> VertexCoefficients {
        let graph = build_cech_graph(points);
        vertex_coefficients(points, &graph, x).unwrap()
    }

    #[test]
    fn coefficients_single_neighbor() {
        let pts = unweighted(&[0.0, 2.0], 1, 1.0);
        let c = coeffs_for(&pts, 0);
        assert_eq!(c.neighbors, vec![1]);
        assert_eq!(c.gram, vec![4.0]);
        assert_eq!(c.linear, vec![-2.0]);
        assert_eq!(c.bound, 0.5);

        // Cross-check against the raw constraint data: the halfspace
        // between sites 0 and 2 is 2y <= 2, and the dual linear term is
        // that row applied to the base minus its offset.
        let (a_row, v_off) = (2.0, 0.5 * (4.0 - 0.0));
        assert_eq!(c.gram[0], a_row * a_row);
        assert_eq!(c.linear[0], a_row * 0.0 - v_off);
    }

    #[test]
    fn coefficients_two_neighbors() {
        let pts = unweighted(&[0.0, 1.0, 2.0], 1, 1.0);
        let c = coeffs_for(&pts, 0);
        assert_eq!(c.neighbors, vec![1, 2]);
        assert_eq!(c.gram, vec![1.0, 2.0, 2.0, 4.0]);
        assert_eq!(c.linear, vec![-0.5, -2.0]);
        assert_eq!(c.bound, 0.5);
    }

    #[test]
    fn coefficients_weighted() {
        let pts =
            WeightedPoints::new(vec![0.0, 3.0], 1, vec![3.0, 1.0], 1.0).unwrap();
        let c = coeffs_for(&pts, 0);
        assert_eq!(c.gram, vec![9.0]);
        assert_eq!(c.linear, vec![0.5 * (1.0 - 3.0 - 9.0)]);
        assert_eq!(c.bound, 2.0);
    }

    #[test]
    fn coefficients_reject_coincident_points() {
        let pts = unweighted(&[0.0, 0.0, 1.0], 1, 1.0);
        let graph = build_cech_graph(&pts);
        match vertex_coefficients(&pts, &graph, 0) {
            Err(BuildError::Coincident { base: 0, neighbor: 1 }) => {}
            other => panic!("expected coincident error, got {other:?}"),
        }
    }

    #[test]
    fn test_simplex_vertex_edge_and_blocked_edge() {
        let tol = Tolerances::default();
        let mut ws = DualWorkspace::new();

        let pts = unweighted(&[0.0, 2.0], 1, 1.0);
        let c = coeffs_for(&pts, 0);
        let (w, y) = test_simplex(&c, &Simplex::vertex(0), &mut ws, &tol)
            .unwrap()
            .unwrap();
        assert_eq!((w, y), (0.0, vec![0.0]));
        let (w, y) = test_simplex(&c, &Simplex::edge(0, 1), &mut ws, &tol)
            .unwrap()
            .unwrap();
        assert_relative_eq!(w, 1.0, max_relative = 1e-12);
        assert_relative_eq!(y[0], 1.0, max_relative = 1e-12);

        // With a site in between, the outer cells no longer meet.
        let pts = unweighted(&[0.0, 1.0, 2.0], 1, 1.0);
        let c = coeffs_for(&pts, 0);
        let r = test_simplex(&c, &Simplex::edge(0, 2), &mut ws, &tol).unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn build_collinear_points() {
        let pts = unweighted(&[0.0, 1.0, 2.0], 1, 1.0);
        let (complex, witness) = build_alpha(&pts, &BuildParams::new(2)).unwrap();
        assert_eq!(complex.sizes(), vec![3, 2]);
        for v in 0..3 {
            assert_eq!(complex.weight(&[v]), Some(0.0));
        }
        assert_relative_eq!(complex.weight(&[0, 1]).unwrap(), 0.25);
        assert_relative_eq!(complex.weight(&[1, 2]).unwrap(), 0.25);
        assert!(!complex.contains(&[0, 2]));
        assert_relative_eq!(witness.get(&Simplex::edge(0, 1)).unwrap()[0], 0.5);
        witness.validate(&pts, &complex, 1e-8).unwrap();
        complex.validate(1e-9).unwrap();
    }

    #[test]
    fn build_equilateral_triangle() {
        let h = 3f64.sqrt() / 2.0;
        let pts = unweighted(&[0.0, 0.0, 1.0, 0.0, 0.5, h], 2, 0.4);
        let (complex, witness) = build_alpha(&pts, &BuildParams::new(2)).unwrap();
        assert_eq!(complex.sizes(), vec![3, 3, 1]);
        assert_relative_eq!(complex.weight(&[0, 1]).unwrap(), 0.25);
        assert_relative_eq!(
            complex.weight(&[0, 1, 2]).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-12
        );
        let y = witness.get(&Simplex::new(vec![0, 1, 2]).unwrap()).unwrap();
        assert_relative_eq!(y[0], 0.5, max_relative = 1e-12);
        assert_relative_eq!(y[1], 3f64.sqrt() / 6.0, max_relative = 1e-12);
        witness.validate(&pts, &complex, 1e-8).unwrap();
    }

    #[test]
    fn build_square_ties() {
        // Cocircular corners: both diagonals, all triangles and the full
        // tetrahedron appear at the circumcenter weight.
        let pts = unweighted(&[0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0], 2, 0.6);
        let (complex, witness) = build_alpha(&pts, &BuildParams::new(3)).unwrap();
        assert_eq!(complex.sizes(), vec![4, 6, 4, 1]);
        for (sigma, w) in complex.simplices() {
            match sigma.dimension() {
                0 => assert_eq!(w, 0.0),
                1 => {
                    let diagonal =
                        sigma.vertices() == [0, 2] || sigma.vertices() == [1, 3];
                    let expected = if diagonal { 0.5 } else { 0.25 };
                    assert_relative_eq!(w, expected, max_relative = 1e-12);
                }
                _ => {
                    assert_relative_eq!(w, 0.5, max_relative = 1e-12);
                    let y = witness.get(sigma).unwrap();
                    assert_relative_eq!(y[0], 0.5, max_relative = 1e-12);
                    assert_relative_eq!(y[1], 0.5, max_relative = 1e-12);
                }
            }
        }
        witness.validate(&pts, &complex, 1e-8).unwrap();
        complex.validate(1e-9).unwrap();
    }

    #[test]
    fn betti_pipeline_examples() {
        let two = unweighted(&[0.0, 100.0], 1, 1.0);
        let b = betti_pipeline(&two, &BuildParams::new(1), 2).unwrap();
        assert_eq!(b.0, vec![2]);

        let h = 3f64.sqrt() / 2.0;
        let tri = unweighted(&[0.0, 0.0, 1.0, 0.0, 0.5, h], 2, 0.4);
        let b = betti_pipeline(&tri, &BuildParams::new(2), 2).unwrap();
        assert_eq!(b.0, vec![1, 0]);

        let n = 60;
        let mut coords = Vec::with_capacity(2 * n);
        for i in 0..n {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            coords.push(t.cos());
            coords.push(t.sin());
        }
        let circle = unweighted(&coords, 2, 0.04);
        let b = betti_pipeline(&circle, &BuildParams::new(2), 2).unwrap();
        assert_eq!(b.0, vec![1, 1]);
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let n = 24;
        let mut coords = Vec::with_capacity(2 * n);
        for i in 0..n {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            coords.push(t.cos());
            coords.push(t.sin());
        }
        let pts = unweighted(&coords, 2, 0.1);
        let mut single = BuildParams::new(2);
        single.threads = Some(1);
        let mut many = BuildParams::new(2);
        many.threads = Some(8);
        let (c1, _) = build_alpha(&pts, &single).unwrap();
        let (c8, w8) = build_alpha(&pts, &many).unwrap();
        assert_eq!(c1, c8);
        w8.validate(&pts, &c8, 1e-8).unwrap();
    }
}
