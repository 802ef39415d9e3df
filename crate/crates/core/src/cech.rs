//! Weighted point sets and the intersection graph of their balls.
//!
//! Each site `x` carries a power `p(x)` and, at cutoff `a1`, the ball
//! `{ y : |y - x|^2 - p(x) <= a1 }` of squared radius `a1 + p(x)`. A vertex
//! is active when that ball is nonempty; two active vertices are adjacent
//! when their balls intersect (closed balls, so tangency counts). The alpha
//! complex is a subcomplex of the Čech complex, so this graph both prunes
//! candidate simplices and limits each membership QP to the base vertex's
//! neighbors.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PointsError {
    #[error("point set is empty")]
    Empty,
    #[error("ambient dimension must be at least 1")]
    ZeroDimension,
    #[error("coordinate buffer length {len} is not a multiple of dimension {dim}")]
    RaggedCoords { len: usize, dim: usize },
    #[error("{points} points but {powers} power values")]
    PowerMismatch { points: usize, powers: usize },
    #[error("coordinates, powers and cutoff must all be finite")]
    NonFinite,
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("vertex {0} is inactive at this cutoff")]
    InactiveVertex(u32),
}

/// Sites with powers and the filtration cutoff, coordinates stored flat
/// row-major (`n * dim` values).
#[derive(Clone, Debug)]
pub struct WeightedPoints {
    coords: Vec<f64>,
    dim: usize,
    power: Vec<f64>,
    cutoff: f64,
}

impl WeightedPoints {
    pub fn new(
        coords: Vec<f64>,
        dim: usize,
        power: Vec<f64>,
        cutoff: f64,
    ) -> Result<Self, PointsError> {
        if dim == 0 {
            return Err(PointsError::ZeroDimension);
        }
        if coords.len() % dim != 0 {
            return Err(PointsError::RaggedCoords {
                len: coords.len(),
                dim,
            });
        }
        let n = coords.len() / dim;
        if n == 0 {
            return Err(PointsError::Empty);
        }
        if power.len() != n {
            return Err(PointsError::PowerMismatch {
                points: n,
                powers: power.len(),
            });
        }
        if !cutoff.is_finite()
            || coords.iter().any(|v| !v.is_finite())
            || power.iter().any(|v| !v.is_finite())
        {
            return Err(PointsError::NonFinite);
        }
        Ok(WeightedPoints {
            coords,
            dim,
            power,
            cutoff,
        })
    }

    /// All powers zero: plain alpha complex of unweighted points.
    pub fn unweighted(coords: Vec<f64>, dim: usize, cutoff: f64) -> Result<Self, PointsError> {
        let n = if dim == 0 { 0 } else { coords.len() / dim };
        Self::new(coords, dim, vec![0.0; n], cutoff)
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn power(&self, i: usize) -> f64 {
        self.power[i]
    }

    /// Power distance `|y - x_i|^2 - p(x_i)`; the ball of vertex `i` is its
    /// sublevel set at the cutoff.
    pub fn power_distance(&self, i: usize, y: &[f64]) -> f64 {
        let x = self.point(i);
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 - self.power[i]
    }
}

/// Vertex activity and ball-intersection adjacency at the cutoff.
#[derive(Clone, Debug)]
pub struct CechGraph {
    active: Vec<bool>,
    adjacency: Vec<Vec<u32>>,
}

impl CechGraph {
    pub fn vertex_count(&self) -> usize {
        self.active.len()
    }

    pub fn is_active(&self, x: u32) -> bool {
        self.active[x as usize]
    }

    pub fn active_vertices(&self) -> impl Iterator<Item = u32> + '_ {
        self.active
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| i as u32)
    }

    pub fn neighbors(&self, x: u32) -> Result<&[u32], GraphError> {
        if !self.active[x as usize] {
            return Err(GraphError::InactiveVertex(x));
        }
        Ok(&self.adjacency[x as usize])
    }

    /// Edges as ordered pairs `(x, y)` with `x < y`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(x, nbrs)| {
            let x = x as u32;
            nbrs.iter()
                .filter(move |&&y| y > x)
                .map(move |&y| (x, y))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Pairwise ball-intersection test over all active vertices. Quadratic in
/// the number of points; graph construction is never the pipeline
/// bottleneck, the QP solves are.
pub fn build_cech_graph(points: &WeightedPoints) -> CechGraph {
    let n = points.len();
    let a1 = points.cutoff();
    let active: Vec<bool> = (0..n).map(|i| a1 + points.power(i) >= 0.0).collect();
    let radius: Vec<f64> = (0..n)
        .map(|i| {
            if active[i] {
                (a1 + points.power(i)).sqrt()
            } else {
                f64::NAN
            }
        })
        .collect();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        if !active[i] {
            continue;
        }
        for j in i + 1..n {
            if !active[j] {
                continue;
            }
            let d2: f64 = points
                .point(i)
                .iter()
                .zip(points.point(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d2.sqrt() <= radius[i] + radius[j] {
                adjacency[i].push(j as u32);
                adjacency[j].push(i as u32);
            }
        }
    }
    CechGraph { active, adjacency }
}

/// Graph with the usual activity rule but every active pair adjacent.
/// Running the builder on it disables all neighbor pruning, which is how
/// the tests check that pruning never changes the result.
pub fn build_complete_graph(points: &WeightedPoints) -> CechGraph {
    let n = points.len();
    let a1 = points.cutoff();
    let active: Vec<bool> = (0..n).map(|i| a1 + points.power(i) >= 0.0).collect();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        if !active[i] {
            continue;
        }
        adjacency[i] = (0..n as u32)
            .filter(|&j| j != i as u32 && active[j as usize])
            .collect();
    }
    CechGraph { active, adjacency }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(coords: &[f64], power: &[f64], cutoff: f64) -> WeightedPoints {
        WeightedPoints::new(coords.to_vec(), 1, power.to_vec(), cutoff).unwrap()
    }

    #[test]
    fn tangent_balls_are_adjacent() {
        let g = build_cech_graph(&line(&[0.0, 2.0], &[0.0, 0.0], 1.0));
        assert_eq!(g.neighbors(0).unwrap(), &[1]);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn separated_balls_are_not_adjacent() {
        let g = build_cech_graph(&line(&[0.0, 2.0], &[0.0, 0.0], 0.81));
        assert!(g.is_active(0) && g.is_active(1));
        assert_eq!(g.neighbors(0).unwrap(), &[] as &[u32]);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn powers_grow_and_shrink_balls() {
        let g = build_cech_graph(&line(&[0.0, 3.0], &[3.0, 1.0], 1.0));
        assert_eq!(g.neighbors(0).unwrap(), &[1]);

        let g = build_cech_graph(&line(&[0.0, 3.0], &[3.0, 1.0], -0.5));
        assert!(g.is_active(0) && g.is_active(1));
        assert_eq!(g.edge_count(), 0);

        let g = build_cech_graph(&line(&[0.0, 3.0], &[3.0, 1.0], -4.0));
        assert!(!g.is_active(0));
        assert_eq!(g.neighbors(0), Err(GraphError::InactiveVertex(0)));
    }

    #[test]
    fn path_and_complete_adjacency() {
        // Radii 0.5 at spacing 1: consecutive balls touch, the end balls
        // do not reach each other.
        let g = build_cech_graph(&line(&[0.0, 1.0, 2.0], &[0.0; 3], 0.25));
        assert_eq!(g.neighbors(0).unwrap(), &[1]);
        assert_eq!(g.neighbors(1).unwrap(), &[0, 2]);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);

        let g = build_cech_graph(&line(&[0.0, 1.0, 2.0], &[0.0; 3], 4.0));
        assert_eq!(g.neighbors(0).unwrap(), &[1, 2]);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn isolated_active_vertex_has_no_neighbors() {
        let g = build_cech_graph(&line(&[0.0], &[0.0], 0.0));
        assert!(g.is_active(0));
        assert_eq!(g.neighbors(0).unwrap(), &[] as &[u32]);
        assert_eq!(g.active_vertices().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn power_distance_matches_definition() {
        let pts =
            WeightedPoints::new(vec![1.0, 0.0, 0.0, 2.0], 2, vec![0.5, 0.0], 1.0).unwrap();
        assert_eq!(pts.power_distance(0, &[1.0, 2.0]), 3.5);
        assert_eq!(pts.power_distance(1, &[0.0, 2.0]), 0.0);
    }

    #[test]
    fn constructor_validation() {
        assert!(matches!(
            WeightedPoints::new(vec![1.0], 0, vec![], 0.0),
            Err(PointsError::ZeroDimension)
        ));
        assert!(matches!(
            WeightedPoints::new(vec![1.0, 2.0, 3.0], 2, vec![0.0], 0.0),
            Err(PointsError::RaggedCoords { len: 3, dim: 2 })
        ));
        assert!(matches!(
            WeightedPoints::new(vec![], 2, vec![], 0.0),
            Err(PointsError::Empty)
        ));
        assert!(matches!(
            WeightedPoints::new(vec![1.0, 2.0], 1, vec![0.0], 0.0),
            Err(PointsError::PowerMismatch { .. })
        ));
        assert!(matches!(
            WeightedPoints::new(vec![f64::NAN], 1, vec![0.0], 0.0),
            Err(PointsError::NonFinite)
        ));
        assert!(matches!(
            WeightedPoints::new(vec![1.0], 1, vec![0.0], f64::INFINITY),
            Err(PointsError::NonFinite)
        ));
    }
}
