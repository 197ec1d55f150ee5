//! Independent verification paths: the full subduction system built from
//! generator matrix products, its dense nullspace, Littlewood-Richardson
//! multiplicities, and principal-angle subspace comparison.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::layerspace::{SparseVec, SubspaceBasis};
use crate::linalg::{nullspace, orthonormal_columns, principal_cosines, Csr};
use crate::solver::TolerancePolicy;
use crate::subgraph::{build_grid, Grid};
use crate::tableaux::Partition;
use crate::yor::{generator_matrix, split_generator_action};

/// The full subduction system: one row per (layer index, node), built from
/// the generator matrices of the three irreps.
#[derive(Debug, Clone)]
pub struct FullOmega {
    ambient: usize,
    /// Rows grouped by layer index ascending, nodes in flat order.
    rows: Vec<Vec<(usize, f64)>>,
}

impl FullOmega {
    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn to_csr(&self) -> Csr {
        Csr::from_rows(self.ambient, &self.rows)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows.len(), self.ambient);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// max |Omega v|_inf over the rows for a dense vector.
    pub fn residual_inf(&self, v: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for row in &self.rows {
            let acc: f64 = row.iter().map(|&(c, w)| w * v[c]).sum();
            worst = worst.max(acc.abs());
        }
        worst
    }
}

/// Builds the full system from the action identities: for each layer index i
/// and node, the row of the split action minus the row of the standard
/// action, expressed on the grid coordinates.
pub fn build_full_omega(
    lambda: &Partition,
    lambda1: &Partition,
    lambda2: &Partition,
) -> Result<FullOmega> {
    let grid = build_grid(lambda, lambda1, lambda2)?;
    build_full_omega_on(&grid)
}

/// As [`build_full_omega`], reusing an existing grid.
pub fn build_full_omega_on(grid: &Grid) -> Result<FullOmega> {
    let dims = grid.dims();
    let ambient = dims.node_count();
    let pair_dim = dims.n1 * dims.n2;
    let mut rows = Vec::with_capacity(grid.layer_indices().len() * ambient);
    for i in grid.layer_indices() {
        let d_std = generator_matrix(grid.lambda(), i)?.matrix;
        let d_split = split_generator_action(grid.lambda1(), grid.lambda2(), i)?;
        for m in 0..dims.n {
            for f in 0..pair_dim {
                let mut row: Vec<(usize, f64)> = Vec::with_capacity(3);
                let mut push = |idx: usize, v: f64| {
                    if v == 0.0 {
                        return;
                    }
                    match row.iter_mut().find(|(k, _)| *k == idx) {
                        Some(entry) => entry.1 += v,
                        None => row.push((idx, v)),
                    }
                };
                for q in 0..pair_dim {
                    push(m * pair_dim + q, d_split[(f, q)]);
                }
                for p in 0..dims.n {
                    push(p * pair_dim + f, -d_std[(m, p)]);
                }
                row.retain(|&(_, v)| v != 0.0);
                row.sort_by_key(|&(k, _)| k);
                debug_assert!(row.len() <= 3);
                rows.push(row);
            }
        }
    }
    Ok(FullOmega { ambient, rows })
}

/// Orthonormal nullspace basis of the full system by dense SVD.
pub fn dense_nullspace(omega: &FullOmega, tol: &TolerancePolicy) -> Result<SubspaceBasis> {
    const GUARD: usize = 5000;
    if omega.ambient > GUARD {
        return Err(Error::SizeGuardExceeded {
            size: omega.ambient,
            guard: GUARD,
        });
    }
    tol.validate()?;
    let kernel = if omega.rows.is_empty() {
        DMatrix::identity(omega.ambient, omega.ambient)
    } else {
        nullspace(&omega.to_dense(), tol.rank_cutoff)
    };
    let vectors = (0..kernel.ncols())
        .map(|j| SparseVec::from_dense(kernel.column(j).as_slice()))
        .collect();
    Ok(SubspaceBasis {
        label: crate::layerspace::BasisLabel::Final,
        ambient: omega.ambient,
        vectors,
    })
}

/// Littlewood-Richardson coefficient: the number of lattice skew fillings of
/// lambda/lambda1 with content lambda2. Zero when lambda1 is not contained
/// in lambda.
pub fn lr_coefficient(
    lambda: &Partition,
    lambda1: &Partition,
    lambda2: &Partition,
) -> Result<usize> {
    if lambda1.n() + lambda2.n() != lambda.n() {
        return Err(Error::IncompatiblePartitions {
            n: lambda.n(),
            n1: lambda1.n(),
            n2: lambda2.n(),
        });
    }
    if !lambda.contains(lambda1) {
        return Ok(0);
    }
    // Skew cells in reverse reading order: rows top to bottom, each row
    // right to left, so the lattice condition can be checked as we fill.
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for (r, &len) in lambda.parts().iter().enumerate() {
        let inner = lambda1.parts().get(r).copied().unwrap_or(0);
        for c in (inner..len).rev() {
            cells.push((r, c));
        }
    }
    let content = lambda2.parts();
    let k = content.len();
    let mut counts = vec![0usize; k];
    let mut filled: Vec<Vec<usize>> = lambda.parts().iter().map(|&p| vec![0; p]).collect();

    fn go(
        pos: usize,
        cells: &[(usize, usize)],
        content: &[usize],
        counts: &mut Vec<usize>,
        filled: &mut Vec<Vec<usize>>,
        inner: &Partition,
    ) -> usize {
        if pos == cells.len() {
            return 1;
        }
        let (r, c) = cells[pos];
        let mut total = 0;
        for v in 1..=content.len() {
            if counts[v - 1] >= content[v - 1] {
                continue;
            }
            // Lattice: after placing v, #v must not exceed #(v-1).
            if v > 1 && counts[v - 1] + 1 > counts[v - 2] {
                continue;
            }
            // Rows weakly increase left to right; the right neighbour is filled.
            if c + 1 < filled[r].len() && filled[r][c + 1] != 0 && v > filled[r][c + 1] {
                continue;
            }
            // Columns strictly increase downward; the cell above, when it is
            // part of the skew shape, is filled.
            if r > 0 && c >= inner.parts().get(r - 1).copied().unwrap_or(0) {
                if filled[r - 1][c] != 0 && v <= filled[r - 1][c] {
                    continue;
                }
            }
            counts[v - 1] += 1;
            filled[r][c] = v;
            total += go(pos + 1, cells, content, counts, filled, inner);
            filled[r][c] = 0;
            counts[v - 1] -= 1;
        }
        total
    }

    Ok(go(0, &cells, content, &mut counts, &mut filled, lambda1))
}

/// Result of a subspace comparison.
#[derive(Debug, Clone, Copy)]
pub struct SubspaceDistance {
    /// Sine of the largest principal angle; 1.0 when the dimensions differ.
    pub sine: f64,
    pub dim_mismatch: bool,
}

/// Sine of the largest principal angle between the spans of two bases.
pub fn subspace_distance(a: &SubspaceBasis, b: &SubspaceBasis) -> Result<SubspaceDistance> {
    if a.ambient != b.ambient {
        return Err(Error::AmbientMismatch {
            left: a.ambient,
            right: b.ambient,
        });
    }
    let qa = orthonormal_columns(&a.to_matrix(), 1e-12);
    let qb = orthonormal_columns(&b.to_matrix(), 1e-12);
    if qa.ncols() != qb.ncols() {
        return Ok(SubspaceDistance {
            sine: 1.0,
            dim_mismatch: true,
        });
    }
    if qa.ncols() == 0 {
        return Ok(SubspaceDistance {
            sine: 0.0,
            dim_mismatch: false,
        });
    }
    let cos_min = principal_cosines(&qa, &qb).last().copied().unwrap();
    Ok(SubspaceDistance {
        sine: (1.0 - cos_min * cos_min).max(0.0).sqrt(),
        dim_mismatch: false,
    })
}
