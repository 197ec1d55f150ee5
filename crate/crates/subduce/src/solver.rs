//! Computation of the subduction space: intersection of the layer subspaces,
//! and the alternative sparse path driven by the graph's minimal equation set.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::layerspace::{layer_space, BasisLabel, SparseVec, SubspaceBasis};
use crate::linalg::{
    estimate_largest, lobpcg_smallest, normal_apply, nullspace, orthonormal_columns, Csr,
};
use crate::subgraph::{
    build_grid, build_layers, build_subduction_graph, minimal_equation_edges, EquationTag, Grid,
    Layer, Node,
};
use crate::tableaux::Partition;

/// Rank and residual thresholds used throughout the solve pipeline.
#[derive(Debug, Clone, Copy)]
pub struct TolerancePolicy {
    /// Relative singular-value threshold for rank decisions.
    pub rank_cutoff: f64,
    /// Bound on ||Omega v||_inf for accepted solutions.
    pub residual_tol: f64,
    /// Bound on deviations from orthonormality.
    pub orthonormality_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            rank_cutoff: 1e-9,
            residual_tol: 1e-10,
            orthonormality_tol: 1e-10,
        }
    }
}

impl TolerancePolicy {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_cutoff", self.rank_cutoff),
            ("residual_tol", self.residual_tol),
            ("orthonormality_tol", self.orthonormality_tol),
        ] {
            if !(v > 0.0 && v < 1e-3) {
                return Err(Error::DegenerateInput(format!(
                    "tolerance {name} = {v} must be in (0, 1e-3)"
                )));
            }
        }
        Ok(())
    }
}

/// Ambient dimension up to which linear systems are solved by dense SVD.
pub const DENSE_AMBIENT_GUARD: usize = 2000;

/// Seed for the iterative eigensolver starts; fixed for reproducible output.
const SPARSE_SEED: u64 = 0x5dc_0001;

/// The subduction equation written at `node` for layer `i`, as a sparse row:
/// alpha on the node, -beta_m on the m-partner, +beta_m12 on the pair partner.
pub fn sueq_row(grid: &Grid, i: usize, node: Node) -> Vec<(usize, f64)> {
    let dims = grid.dims();
    let d_m = grid.dist_m(i, node);
    let d_f = grid.dist_m12(i, node);
    let alpha = 1.0 / d_f as f64 - 1.0 / d_m as f64;
    let mut row = Vec::with_capacity(3);
    if alpha != 0.0 {
        row.push((dims.flat(node), alpha));
    }
    if d_m.abs() > 1 {
        let beta = (1.0 - 1.0 / (d_m * d_m) as f64).sqrt();
        row.push((dims.flat(grid.apply_generator_m(node, i)), -beta));
    }
    if d_f.abs() > 1 {
        let beta = (1.0 - 1.0 / (d_f * d_f) as f64).sqrt();
        row.push((dims.flat(grid.apply_generator_m12(node, i)), beta));
    }
    row
}

/// Builds the layer solution subspaces, one per valid generator index,
/// in ascending order. Layers are independent and computed in parallel.
pub fn layer_spaces(grid: &Grid, layers: &[Layer]) -> Vec<SubspaceBasis> {
    layers
        .par_iter()
        .map(|layer| layer_space(layer, grid.dims()))
        .collect()
}

fn basis_from_columns(ambient: usize, m: &DMatrix<f64>) -> SubspaceBasis {
    let vectors = (0..m.ncols())
        .map(|j| SparseVec::from_dense(m.column(j).as_slice()))
        .collect();
    SubspaceBasis {
        label: BasisLabel::Final,
        ambient,
        vectors,
    }
}

fn full_basis(ambient: usize) -> SubspaceBasis {
    SubspaceBasis {
        label: BasisLabel::Final,
        ambient,
        vectors: (0..ambient)
            .map(|k| SparseVec::new(ambient, vec![(k, 1.0)]))
            .collect(),
    }
}

/// Intersection of subspaces by iterative pairwise reduction.
///
/// Each step expresses membership in the next space's orthogonal complement
/// as a stacked constraint on the current basis and keeps its nullspace; rank
/// decisions use relative singular values. The empty list yields the whole
/// ambient space; the result is orthonormal.
pub fn intersect(
    ambient: usize,
    spaces: &[SubspaceBasis],
    tol: &TolerancePolicy,
) -> Result<SubspaceBasis> {
    tol.validate()?;
    for s in spaces {
        if s.ambient != ambient {
            return Err(Error::AmbientMismatch {
                left: ambient,
                right: s.ambient,
            });
        }
    }
    if ambient > DENSE_AMBIENT_GUARD {
        return Err(Error::SizeGuardExceeded {
            size: ambient,
            guard: DENSE_AMBIENT_GUARD,
        });
    }
    if spaces.is_empty() {
        return Ok(full_basis(ambient));
    }
    let mut current = orthonormal_columns(&spaces[0].to_matrix(), tol.rank_cutoff);
    for space in &spaces[1..] {
        if current.ncols() == 0 {
            break;
        }
        let b = orthonormal_columns(&space.to_matrix(), tol.rank_cutoff);
        // Constraint: (I - B B^T) current c = 0.
        let w = &current - &b * (b.transpose() * &current);
        let kernel = nullspace(&w, tol.rank_cutoff);
        current = orthonormal_columns(&(&current * kernel), tol.rank_cutoff);
    }
    Ok(basis_from_columns(ambient, &current))
}

/// Solves the subduction problem by intersecting the layer spaces in
/// ascending layer order (dense path; guarded by ambient size).
pub fn solve_via_intersection(grid: &Grid, tol: &TolerancePolicy) -> Result<SubspaceBasis> {
    let layers = build_layers(grid)?;
    let spaces = layer_spaces(grid, &layers);
    intersect(grid.dims().node_count(), &spaces, tol)
}

/// Assembles the minimal sparse equation system selected by the subduction
/// graph and returns an orthonormal basis of its nullspace.
///
/// Small systems go through dense SVD; larger ones through a seeded block
/// eigensolver on the normal operator, so the result is deterministic.
pub fn solve_via_graph(
    grid: &Grid,
    tol: &TolerancePolicy,
    prune_bridge_loops: bool,
) -> Result<SubspaceBasis> {
    tol.validate()?;
    let ambient = grid.dims().node_count();
    let layers = build_layers(grid)?;
    let graph = build_subduction_graph(grid, &layers);
    let equations = minimal_equation_edges(&graph, &layers, prune_bridge_loops);
    let rows: Vec<Vec<(usize, f64)>> = equations
        .iter()
        .map(|eq| {
            let cfg = &layers[eq.layer_pos].configurations[eq.config_pos];
            let node = match eq.tag {
                EquationTag::Pole | EquationTag::Singlet => cfg.pole(),
                EquationTag::CrossingSecond => cfg.members[1],
            };
            sueq_row(grid, cfg.layer, node)
        })
        .collect();

    if rows.is_empty() {
        return Ok(full_basis(ambient));
    }
    if ambient <= DENSE_AMBIENT_GUARD {
        let mut dense = DMatrix::zeros(rows.len(), ambient);
        for (r, row) in rows.iter().enumerate() {
            for &(c, v) in row {
                dense[(r, c)] = v;
            }
        }
        let kernel = nullspace(&dense, tol.rank_cutoff);
        return Ok(basis_from_columns(ambient, &kernel));
    }
    solve_sparse(ambient, &rows)
}

/// Kernel of a large sparse system via LOBPCG on M^T M.
fn solve_sparse(ambient: usize, rows: &[Vec<(usize, f64)>]) -> Result<SubspaceBasis> {
    let m = Csr::from_rows(ambient, rows);
    let apply = |x: &DMatrix<f64>| normal_apply(&m, x);
    let lambda_max = estimate_largest(ambient, apply, 60, SPARSE_SEED).max(1.0);
    // Kernel Ritz values sit at floating noise; anything within 1e-12 of the
    // spectral radius scale is kernel, the smallest nonzero eigenvalue is far
    // above for these structured systems.
    let kernel_floor = 1e-12 * lambda_max;
    let res_tol = (1e-13 * lambda_max).max(5e-14);

    let mut block = 8usize;
    loop {
        let out = lobpcg_smallest(
            ambient,
            block,
            apply,
            4000,
            res_tol,
            SPARSE_SEED.wrapping_add(block as u64),
        );
        let kernel_count = (0..out.values.len())
            .filter(|&j| out.values[j] <= kernel_floor)
            .count();
        if kernel_count == out.values.len() && block < 64 && block < ambient {
            // Whole block converged into the kernel; it may be larger.
            block *= 2;
            continue;
        }
        let kept: Vec<usize> = (0..out.values.len())
            .filter(|&j| out.values[j] <= kernel_floor)
            .collect();
        let v = out.vectors.select_columns(&kept);
        let v = orthonormal_columns(&v, 1e-12);
        return Ok(basis_from_columns(ambient, &v));
    }
}

/// The subduction space, routed through the dense intersection path for
/// small grids and the sparse graph path beyond the dense guard.
pub fn subduction_space(grid: &Grid, tol: &TolerancePolicy) -> Result<SubspaceBasis> {
    if grid.dims().node_count() <= DENSE_AMBIENT_GUARD {
        solve_via_intersection(grid, tol)
    } else {
        solve_via_graph(grid, tol, false)
    }
}

/// Multiplicity of the subduction: the dimension of the subduction space.
pub fn multiplicity(
    lambda: &Partition,
    lambda1: &Partition,
    lambda2: &Partition,
) -> Result<usize> {
    let grid = build_grid(lambda, lambda1, lambda2)?;
    Ok(subduction_space(&grid, &TolerancePolicy::default())?.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::principal_cosines;

    fn part(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn grid(l: &str, l1: &str, l2: &str) -> Grid {
        build_grid(&part(l), &part(l1), &part(l2)).unwrap()
    }

    fn subspace_sine(a: &SubspaceBasis, b: &SubspaceBasis) -> f64 {
        assert_eq!(a.dim(), b.dim());
        if a.dim() == 0 {
            return 0.0;
        }
        let qa = orthonormal_columns(&a.to_matrix(), 1e-9);
        let qb = orthonormal_columns(&b.to_matrix(), 1e-9);
        let cos_min = principal_cosines(&qa, &qb).last().copied().unwrap();
        (1.0 - cos_min * cos_min).max(0.0).sqrt()
    }

    #[test]
    fn intersect_single_space_is_identity_map() {
        let g = grid("2,1", "1", "2");
        let layers = build_layers(&g).unwrap();
        let spaces = layer_spaces(&g, &layers);
        let tol = TolerancePolicy::default();
        let out = intersect(2, &spaces, &tol).unwrap();
        assert_eq!(out.dim(), 1);
        let v = out.vectors[0].to_dense();
        let sign = if v[0] > 0.0 { 1.0 } else { -1.0 };
        assert!((sign * v[0] - 0.5).abs() < 1e-12);
        assert!((sign * v[1] - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn intersect_41_case_has_multiplicity_one() {
        let g = grid("4,1", "1", "3,1");
        let out = solve_via_intersection(&g, &TolerancePolicy::default()).unwrap();
        assert_eq!(out.dim(), 1);
    }

    #[test]
    fn intersect_rejects_mismatched_ambient() {
        let g = grid("2,1", "1", "2");
        let layers = build_layers(&g).unwrap();
        let spaces = layer_spaces(&g, &layers);
        assert!(matches!(
            intersect(3, &spaces, &TolerancePolicy::default()),
            Err(Error::AmbientMismatch { .. })
        ));
    }

    #[test]
    fn graph_path_whole_space_when_no_equations() {
        let g = grid("2", "1", "1");
        let out = solve_via_graph(&g, &TolerancePolicy::default(), false).unwrap();
        assert_eq!(out.dim(), 1);
        assert_eq!(out.vectors[0].to_dense(), vec![1.0]);
    }

    #[test]
    fn graph_and_intersection_agree_on_s3() {
        let g = grid("2,1", "1", "2");
        let tol = TolerancePolicy::default();
        let a = solve_via_intersection(&g, &tol).unwrap();
        let b = solve_via_graph(&g, &tol, false).unwrap();
        assert_eq!(a.dim(), 1);
        assert!(subspace_sine(&a, &b) < 1e-10);
    }

    #[test]
    fn zero_multiplicity_is_success() {
        // [1,1] is not contained in [4]: the restriction has no such block.
        let m = multiplicity(&part("4"), &part("1,1"), &part("2")).unwrap();
        assert_eq!(m, 0);
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicity(&part("2"), &part("1"), &part("1")).unwrap(), 1);
        assert_eq!(
            multiplicity(&part("4,1"), &part("1"), &part("3,1")).unwrap(),
            1
        );
    }

    #[test]
    fn layer_order_does_not_change_the_space() {
        let g = grid("3,2", "2,1", "2");
        let layers = build_layers(&g).unwrap();
        let spaces = layer_spaces(&g, &layers);
        let tol = TolerancePolicy::default();
        let forward = intersect(g.dims().node_count(), &spaces, &tol).unwrap();
        let mut reversed = spaces.clone();
        reversed.reverse();
        let backward = intersect(g.dims().node_count(), &reversed, &tol).unwrap();
        assert_eq!(forward.dim(), backward.dim());
        assert!(subspace_sine(&forward, &backward) < 1e-9);
    }

    #[test]
    fn pruning_preserves_the_kernel() {
        for (l, l1, l2) in [
            ("4,1", "1", "3,1"),
            ("3,2", "2,1", "2"),
            ("3,1,1", "2", "2,1"),
            ("2,2,1", "2", "2,1"),
        ] {
            let g = grid(l, l1, l2);
            let tol = TolerancePolicy::default();
            let plain = solve_via_graph(&g, &tol, false).unwrap();
            let pruned = solve_via_graph(&g, &tol, true).unwrap();
            assert_eq!(plain.dim(), pruned.dim(), "{l}");
            if plain.dim() > 0 {
                assert!(subspace_sine(&plain, &pruned) < 1e-9, "{l}");
            }
        }
    }

    #[test]
    fn sueq_row_s3_system() {
        let g = grid("2,1", "1", "2");
        let r0 = sueq_row(&g, 2, Node { m: 0, m1: 0, m2: 0 });
        let r1 = sueq_row(&g, 2, Node { m: 1, m1: 0, m2: 0 });
        let s3 = 3f64.sqrt() / 2.0;
        assert_eq!(r0.len(), 2);
        assert!((r0[0].1 - 1.5).abs() < 1e-15 && (r0[1].1 + s3).abs() < 1e-15);
        assert!((r1[1].1 - 0.5).abs() < 1e-15 && (r1[0].1 + s3).abs() < 1e-15);
    }

    #[test]
    fn tolerance_policy_validation() {
        assert!(TolerancePolicy::default().validate().is_ok());
        let bad = TolerancePolicy {
            rank_cutoff: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = TolerancePolicy {
            residual_tol: 1e-2,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
