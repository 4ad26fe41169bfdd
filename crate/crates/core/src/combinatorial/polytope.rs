//! Geometry constants of the action polytope `conv{1_A}` used to tune LLOO.

use nalgebra::DMatrix;

use super::{ActionSpace, SpaceKind};
use crate::combinatorial::incidence;
use crate::error::{Error, Result};

/// Row systems up to this size get an exact `psi`.
const EXACT_PSI_ROWS: usize = 12;
/// Above this many vertices the pairwise diameter scan is skipped.
const PAIRWISE_DIAMETER_LIMIT: usize = 2000;
const SLACK_EPS: f64 = 1e-12;
const RANK_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolytopeParams {
    pub diameter: f64,
    pub phi: f64,
    pub psi: f64,
    pub mu_poly: f64,
}

impl PolytopeParams {
    pub fn new(diameter: f64, phi: f64, psi: f64) -> Result<Self> {
        if !(diameter > 0.0 && phi > 0.0 && psi > 0.0) {
            return Err(Error::UnsupportedGeometry(format!(
                "non-positive geometry constants (diam {diameter}, phi {phi}, psi {psi})"
            )));
        }
        Ok(Self {
            diameter,
            phi,
            psi,
            mu_poly: psi * diameter / phi,
        })
    }
}

/// Inequality part `A x <= b` of a polytope description.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalitySystem {
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl InequalitySystem {
    /// `0 <= x <= 1`.
    pub fn unit_box(d: usize) -> Self {
        let mut sys = Self::nonnegative(d);
        for i in 0..d {
            let mut row = vec![0.0; d];
            row[i] = 1.0;
            sys.rows.push(row);
            sys.rhs.push(1.0);
        }
        sys
    }

    /// `-x <= 0`.
    pub fn nonnegative(d: usize) -> Self {
        let rows = (0..d)
            .map(|i| {
                let mut row = vec![0.0; d];
                row[i] = -1.0;
                row
            })
            .collect();
        Self {
            rows,
            rhs: vec![0.0; d],
        }
    }

    fn push(&mut self, row: Vec<f64>, rhs: f64) {
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    fn slack(&self, j: usize, x: &[f64]) -> f64 {
        self.rhs[j] - self.rows[j].iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Geometry constants of the polytope of `space`, from closed forms where
/// the family has one and from its vertex list otherwise.
pub fn polytope_params(space: &ActionSpace) -> Result<PolytopeParams> {
    let d = space.dim();
    match space.kind() {
        SpaceKind::TopK => {
            let k = space.top_k_size().expect("top-k family");
            // Disjoint k-sets exist as long as the complement has room.
            let diameter = ((2 * k.min(d - k)) as f64).sqrt();
            PolytopeParams::new(diameter, 1.0, 1.0)
        }
        SpaceKind::DagPaths => {
            // Flow polytope: only the rows -x_e <= 0 are inequalities.
            let diameter = match space.enumerate() {
                Some(paths) if paths.len() <= PAIRWISE_DIAMETER_LIMIT => {
                    let vertices: Vec<Vec<f64>> = paths.iter().map(|p| incidence(p, d)).collect();
                    pairwise_diameter(&vertices)
                }
                _ => ((2 * space.max_action_size()) as f64).sqrt(),
            };
            PolytopeParams::new(diameter, 1.0, 1.0)
        }
        SpaceKind::AlmostAllSets => {
            let vertices = vertices_of(space)?;
            let mut sys = InequalitySystem::unit_box(d);
            // Non-empty sets only.
            sys.push(vec![-1.0; d], -1.0);
            let star = space.star().expect("almost-all family");
            // A singleton star excludes every pair containing it.
            if let [s] = *star.arms() {
                for j in (0..d).filter(|&j| j != s) {
                    let mut row = vec![0.0; d];
                    row[s] = 1.0;
                    row[j] = 1.0;
                    sys.push(row, 1.0);
                }
            }
            polytope_params_from(&vertices, &sys)
        }
        SpaceKind::ExplicitList => {
            let vertices = vertices_of(space)?;
            polytope_params_from(&vertices, &InequalitySystem::unit_box(d))
        }
    }
}

fn vertices_of(space: &ActionSpace) -> Result<Vec<Vec<f64>>> {
    let all = space.enumerate().ok_or_else(|| {
        Error::UnsupportedGeometry("family too large to enumerate and no closed form".into())
    })?;
    Ok(all.iter().map(|a| incidence(a, space.dim())).collect())
}

/// Geometry constants from an explicit vertex list and inequality system.
pub fn polytope_params_from(
    vertices: &[Vec<f64>],
    system: &InequalitySystem,
) -> Result<PolytopeParams> {
    if vertices.is_empty() || system.rows.is_empty() {
        return Err(Error::UnsupportedGeometry("empty description".into()));
    }
    let diameter = pairwise_diameter(vertices);
    let phi = vertices
        .iter()
        .flat_map(|v| (0..system.rows.len()).map(move |j| system.slack(j, v)))
        .filter(|&s| s > SLACK_EPS)
        .fold(f64::INFINITY, f64::min);
    let psi = if system.rows.len() <= EXACT_PSI_ROWS {
        exact_psi(&system.rows)
    } else {
        greedy_psi(&system.rows)
    };
    PolytopeParams::new(diameter, phi, psi)
}

fn pairwise_diameter(vertices: &[Vec<f64>]) -> f64 {
    let mut best = 0.0f64;
    for (i, u) in vertices.iter().enumerate() {
        for v in &vertices[i + 1..] {
            let sq: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.max(sq);
        }
    }
    best.sqrt()
}

fn stack(rows: &[Vec<f64>], pick: &[usize]) -> DMatrix<f64> {
    let cols = rows[0].len();
    DMatrix::from_fn(pick.len(), cols, |i, j| rows[pick[i]][j])
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().max()
}

fn rank_of(m: &DMatrix<f64>) -> usize {
    m.rank(RANK_EPS)
}

/// Largest spectral norm over full-row-rank selections of `rank(A)` rows.
fn exact_psi(rows: &[Vec<f64>]) -> f64 {
    let all: Vec<usize> = (0..rows.len()).collect();
    let r = rank_of(&stack(rows, &all));
    let mut best = 0.0f64;
    let mut pick: Vec<usize> = (0..r).collect();
    loop {
        let m = stack(rows, &pick);
        if rank_of(&m) == r {
            best = best.max(spectral_norm(&m));
        }
        let Some(i) = (0..r).rev().find(|&i| pick[i] < rows.len() - r + i) else {
            break;
        };
        pick[i] += 1;
        for j in i + 1..r {
            pick[j] = pick[j - 1] + 1;
        }
    }
    best
}

/// Grows a linearly independent row selection, each time adding the row
/// that yields the largest spectral norm (ties to the lowest row).
fn greedy_psi(rows: &[Vec<f64>]) -> f64 {
    let all: Vec<usize> = (0..rows.len()).collect();
    let r = rank_of(&stack(rows, &all));
    let mut pick: Vec<usize> = Vec::with_capacity(r);
    let mut norm = 0.0;
    while pick.len() < r {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..rows.len() {
            if pick.contains(&j) {
                continue;
            }
            pick.push(j);
            let m = stack(rows, &pick);
            if rank_of(&m) == pick.len() {
                let n = spectral_norm(&m);
                if best.is_none_or(|(_, b)| n > b) {
                    best = Some((j, n));
                }
            }
            pick.pop();
        }
        match best {
            Some((j, n)) => {
                pick.push(j);
                norm = n;
            }
            None => break,
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorial::{Action, ActionSpace};

    fn simplex_vertices(d: usize) -> Vec<Vec<f64>> {
        (0..d)
            .map(|i| incidence(&Action::singleton(i), d))
            .collect()
    }

    #[test]
    fn probability_simplex_constants() {
        let p =
            polytope_params_from(&simplex_vertices(4), &InequalitySystem::nonnegative(4)).unwrap();
        assert!((p.diameter - 2f64.sqrt()).abs() < 1e-12);
        assert!((p.phi - 1.0).abs() < 1e-12);
        assert!((p.psi - 1.0).abs() < 1e-12);
        assert!((p.mu_poly - 2f64.sqrt()).abs() < 1e-12);
        let closed = polytope_params(&ActionSpace::singletons(4)).unwrap();
        assert!((closed.mu_poly - p.mu_poly).abs() < 1e-12);
    }

    #[test]
    fn top_k_diameter_matches_vertex_scan() {
        let space = ActionSpace::top_k(4, 2).unwrap();
        let vertices: Vec<Vec<f64>> = space
            .enumerate()
            .unwrap()
            .iter()
            .map(|a| incidence(a, 4))
            .collect();
        assert_eq!(vertices.len(), 6);
        assert!((pairwise_diameter(&vertices) - 2.0).abs() < 1e-12);
        assert!((polytope_params(&space).unwrap().diameter - 2.0).abs() < 1e-12);
        for (d, k) in [(5, 3), (7, 2), (6, 6 - 1)] {
            let space = ActionSpace::top_k(d, k).unwrap();
            let vs: Vec<Vec<f64>> = space
                .enumerate()
                .unwrap()
                .iter()
                .map(|a| incidence(a, d))
                .collect();
            let closed = polytope_params(&space).unwrap().diameter;
            assert!(
                (pairwise_diameter(&vs) - closed).abs() < 1e-12,
                "d={d} k={k}"
            );
        }
    }

    #[test]
    fn greedy_psi_matches_exact_on_small_systems() {
        let sys = InequalitySystem::unit_box(4);
        assert!((greedy_psi(&sys.rows) - 1.0).abs() < 1e-12);
        let mut rows = InequalitySystem::nonnegative(3).rows;
        rows.push(vec![1.0, 1.0, 0.0]);
        rows.push(vec![0.0, 1.0, 1.0]);
        let e = exact_psi(&rows);
        let g = greedy_psi(&rows);
        assert!(g <= e + 1e-12);
        assert!(e > 1.0);
    }

    #[test]
    fn mu_poly_is_translation_invariant() {
        let space = ActionSpace::almost_all_sets(5, Action::singleton(0)).unwrap();
        let vertices: Vec<Vec<f64>> = space
            .enumerate()
            .unwrap()
            .iter()
            .map(|a| incidence(a, 5))
            .collect();
        let mut sys = InequalitySystem::unit_box(5);
        sys.push(vec![-1.0; 5], -1.0);
        let base = polytope_params_from(&vertices, &sys).unwrap();

        let shift = [0.3, -1.2, 2.5, 0.0, 7.0];
        let moved: Vec<Vec<f64>> = vertices
            .iter()
            .map(|v| v.iter().zip(&shift).map(|(a, b)| a + b).collect())
            .collect();
        let mut moved_sys = sys.clone();
        for (row, b) in moved_sys.rows.iter().zip(moved_sys.rhs.iter_mut()) {
            *b += row.iter().zip(&shift).map(|(a, s)| a * s).sum::<f64>();
        }
        let shifted = polytope_params_from(&moved, &moved_sys).unwrap();
        assert!((base.mu_poly - shifted.mu_poly).abs() < 1e-9);
    }

    #[test]
    fn single_vertex_is_unsupported() {
        let space = ActionSpace::top_k(3, 3).unwrap();
        assert!(polytope_params(&space).is_err());
    }
}
