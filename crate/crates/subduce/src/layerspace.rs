//! Closed-form local kernels per coupling configuration, and the layer
//! solution subspaces assembled from them.
//!
//! Every configuration's local system is built from the 2x2 reflection
//! rho(d) = [[1/d, s], [s, -1/d]] with s = sqrt(1 - 1/d^2) >= 0, whose
//! eigenvectors have the half-angle form (cos t/2, sin t/2).

use std::fmt;

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};
use crate::subgraph::{ConfigKind, Configuration, GridDims, Layer};

/// The 2x2 symmetric reflection attached to a signed axial distance.
#[derive(Debug, Clone, Copy)]
pub struct Rotation2 {
    pub d: i64,
    pub cos_theta: f64,
    pub sin_theta: f64,
    pub matrix: Matrix2<f64>,
}

/// rho(d): cos t = 1/d, sin t = sqrt(1 - 1/d^2) >= 0.
pub fn rho(d: i64) -> Result<Rotation2> {
    if d == 0 {
        return Err(Error::ZeroAxialDistance);
    }
    let c = 1.0 / d as f64;
    let s = (1.0 - c * c).max(0.0).sqrt();
    Ok(Rotation2 {
        d,
        cos_theta: c,
        sin_theta: s,
        matrix: Matrix2::new(c, s, s, -c),
    })
}

/// Unit eigenvector of rho(d) with eigenvalue `sign` (+1 or -1), in
/// half-angle form: e = (cos t/2, sin t/2), ebar = (-sin t/2, cos t/2),
/// with t = arccos(1/d) in [0, pi].
pub fn eigvec(d: i64, sign: i64) -> Result<[f64; 2]> {
    if d == 0 {
        return Err(Error::ZeroAxialDistance);
    }
    debug_assert!(sign == 1 || sign == -1);
    let c = 1.0 / d as f64;
    let cos_half = ((1.0 + c) / 2.0).max(0.0).sqrt();
    let sin_half = ((1.0 - c) / 2.0).max(0.0).sqrt();
    Ok(if sign == 1 {
        [cos_half, sin_half]
    } else {
        [-sin_half, cos_half]
    })
}

/// A sparse vector over the grid, entries sorted by flat index.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVec {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

/// Entries below this magnitude are not stored.
pub const SPARSE_DROP_TOL: f64 = 1e-14;

impl SparseVec {
    pub fn new(dim: usize, mut entries: Vec<(usize, f64)>) -> Self {
        entries.retain(|&(_, v)| v.abs() > SPARSE_DROP_TOL);
        entries.sort_by_key(|&(k, _)| k);
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.last().is_none_or(|&(k, _)| k < dim));
        SparseVec { dim, entries }
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        SparseVec::new(
            dense.len(),
            dense
                .iter()
                .enumerate()
                .map(|(k, &v)| (k, v))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(k, _)| k)
            .map(|p| self.entries[p].1)
            .unwrap_or(0.0)
    }

    pub fn dot(&self, other: &SparseVec) -> f64 {
        let mut sum = 0.0;
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            match self.entries[i].0.cmp(&other.entries[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += self.entries[i].1 * other.entries[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(k, v) in &self.entries {
            out[k] = v;
        }
        out
    }
}

/// What a subspace basis describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisLabel {
    Layer(usize),
    Final,
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisLabel::Layer(i) => write!(f, "layer {i}"),
            BasisLabel::Final => write!(f, "final"),
        }
    }
}

/// A list of linearly independent sparse vectors spanning a subspace of
/// the grid space.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    pub label: BasisLabel,
    pub ambient: usize,
    pub vectors: Vec<SparseVec>,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Dense column matrix of the basis (ambient x dim).
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.ambient, self.vectors.len());
        for (j, v) in self.vectors.iter().enumerate() {
            for &(k, val) in v.entries() {
                m[(k, j)] = val;
            }
        }
        m
    }
}

fn kron2(a: &Matrix2<f64>, b: &Matrix2<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

fn block_from(kind: ConfigKind, d_m: i64, d_m12: i64) -> Result<DMatrix<f64>> {
    Ok(match kind {
        ConfigKind::Singlet => {
            DMatrix::from_element(1, 1, (d_m12 - d_m) as f64)
        }
        ConfigKind::VerticalBridge => {
            let r = rho(d_m)?;
            DMatrix::identity(2, 2) * d_m12 as f64 - DMatrix::from(r.matrix)
        }
        ConfigKind::HorizontalBridge => {
            let r = rho(d_m12)?;
            DMatrix::from(r.matrix) - DMatrix::identity(2, 2) * d_m as f64
        }
        ConfigKind::Crossing => {
            let rm = rho(d_m)?.matrix;
            let rf = rho(d_m12)?.matrix;
            let id = Matrix2::identity();
            // Member order (pole, <g m; m12>, <m; g m12>, <g m; g m12>):
            // the pair factor is the slow Kronecker slot.
            kron2(&rf, &id) - kron2(&id, &rm)
        }
    })
}

/// The local subduction system at a configuration's pole, rows and columns
/// in member order.
pub fn config_block(cfg: &Configuration) -> DMatrix<f64> {
    block_from(cfg.kind, cfg.d_m, cfg.d_m12).expect("configuration distances are nonzero")
}

/// Kernel vectors of the local system, embedded at the configuration's nodes.
pub fn config_kernel(cfg: &Configuration, dims: GridDims) -> Vec<SparseVec> {
    let total = dims.node_count();
    let at = |pairs: Vec<(usize, f64)>| {
        SparseVec::new(
            total,
            pairs
                .into_iter()
                .map(|(member, v)| (dims.flat(cfg.members[member]), v))
                .collect(),
        )
    };
    match cfg.kind {
        ConfigKind::Singlet => {
            if cfg.singlet_alpha() == 0 {
                vec![at(vec![(0, 1.0)])]
            } else {
                vec![]
            }
        }
        ConfigKind::VerticalBridge => {
            let e = eigvec(cfg.d_m, cfg.d_m12).expect("nonzero distance");
            vec![at(vec![(0, e[0]), (1, e[1])])]
        }
        ConfigKind::HorizontalBridge => {
            let e = eigvec(cfg.d_m12, cfg.d_m).expect("nonzero distance");
            vec![at(vec![(0, e[0]), (1, e[1])])]
        }
        ConfigKind::Crossing => {
            let mut out = Vec::with_capacity(2);
            for sign in [1, -1] {
                let em = eigvec(cfg.d_m, sign).expect("nonzero distance");
                let ef = eigvec(cfg.d_m12, sign).expect("nonzero distance");
                // Coefficient at member k is em[m-bit] * ef[pair-bit].
                out.push(at(vec![
                    (0, em[0] * ef[0]),
                    (1, em[1] * ef[0]),
                    (2, em[0] * ef[1]),
                    (3, em[1] * ef[1]),
                ]));
            }
            out
        }
    }
}

/// The layer solution space: the direct sum of configuration kernels,
/// in pole order.
pub fn layer_space(layer: &Layer, dims: GridDims) -> SubspaceBasis {
    let mut vectors = Vec::new();
    for cfg in &layer.configurations {
        vectors.extend(config_kernel(cfg, dims));
    }
    SubspaceBasis {
        label: BasisLabel::Layer(layer.i),
        ambient: dims.node_count(),
        vectors,
    }
}

/// Verifies that the local systems built at alternative poles are the
/// documented swap conjugations of the pole block.
pub fn pole_change_check(cfg: &Configuration) -> bool {
    const TOL: f64 = 1e-12;
    let eps = Matrix2::new(0.0, 1.0, 1.0, 0.0);
    let id = Matrix2::identity();
    let block = config_block(cfg);
    match cfg.kind {
        ConfigKind::Singlet => true,
        ConfigKind::VerticalBridge | ConfigKind::HorizontalBridge => {
            // Alternative pole flips the moving distance; conjugation by eps.
            let (dm, df) = if cfg.kind == ConfigKind::VerticalBridge {
                (-cfg.d_m, cfg.d_m12)
            } else {
                (cfg.d_m, -cfg.d_m12)
            };
            let alt = block_from(cfg.kind, dm, df).expect("nonzero distance");
            let eps_d = DMatrix::from(eps);
            (alt - &eps_d * &block * &eps_d).amax() < TOL
        }
        ConfigKind::Crossing => {
            // (m flip, pair flip) -> conjugating permutation.
            let cases = [
                ((-cfg.d_m, cfg.d_m12), kron2(&id, &eps)),
                ((cfg.d_m, -cfg.d_m12), kron2(&eps, &id)),
                ((-cfg.d_m, -cfg.d_m12), kron2(&eps, &eps)),
            ];
            cases.iter().all(|((dm, df), p)| {
                let alt = block_from(cfg.kind, *dm, *df).expect("nonzero distance");
                (alt - p * &block * p).amax() < TOL
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subgraph::{build_grid, build_layer, build_layers};
    use crate::tableaux::Partition;

    const TOL: f64 = 1e-12;

    fn part(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn rho_examples() {
        let r = rho(1).unwrap();
        assert_eq!(r.matrix, Matrix2::new(1.0, 0.0, 0.0, -1.0));
        let r = rho(-1).unwrap();
        assert_eq!(r.matrix, Matrix2::new(-1.0, 0.0, 0.0, 1.0));
        let r = rho(-2).unwrap();
        let s3 = 3f64.sqrt() / 2.0;
        assert!((r.matrix - Matrix2::new(-0.5, s3, s3, 0.5)).amax() < TOL);
        assert!(rho(0).is_err());
    }

    #[test]
    fn rho_is_an_orthogonal_involution() {
        for d in [-5i64, -3, -2, -1, 1, 2, 3, 5] {
            let r = rho(d).unwrap().matrix;
            assert!((r * r - Matrix2::identity()).amax() < TOL);
            assert!((r.transpose() - r).amax() == 0.0);
        }
    }

    #[test]
    fn eigvec_examples() {
        assert_eq!(eigvec(1, 1).unwrap(), [1.0, 0.0]);
        let e = eigvec(-2, 1).unwrap();
        assert!((e[0] - 0.5).abs() < TOL && (e[1] - 3f64.sqrt() / 2.0).abs() < TOL);
        let e = eigvec(2, 1).unwrap();
        assert!((e[0] - 3f64.sqrt() / 2.0).abs() < TOL && (e[1] - 0.5).abs() < TOL);
    }

    #[test]
    fn eigvec_satisfies_eigen_equation() {
        for d in [-5i64, -2, 2, 3, 7] {
            for sign in [1i64, -1] {
                let r = rho(d).unwrap().matrix;
                let e = eigvec(d, sign).unwrap();
                let v = nalgebra::Vector2::new(e[0], e[1]);
                assert!((r * v - v * sign as f64).amax() < TOL, "d={d} sign={sign}");
                assert!((v.norm() - 1.0).abs() < TOL);
                assert!(eigvec(d, 1).unwrap()[0] >= 0.0);
            }
        }
    }

    #[test]
    fn singlet_blocks_and_kernels() {
        let g = build_grid(&part("2"), &part("1"), &part("1")).unwrap();
        let layer = build_layer(&g, 1).err();
        assert!(layer.is_some()); // i = n1 is rejected; [2] has no layers at all
        // A singlet with matching distances: the unique node of ([2];[1],[1])
        // has no layers, so build one from ([3,1];[1],[2,1]) instead.
        let g = build_grid(&part("3,1"), &part("1"), &part("2,1")).unwrap();
        let layers = build_layers(&g).unwrap();
        for layer in &layers {
            for cfg in &layer.configurations {
                if cfg.kind == ConfigKind::Singlet {
                    let alpha = cfg.singlet_alpha();
                    assert!(alpha == 0 || alpha == 2 || alpha == -2);
                    let block = config_block(cfg);
                    assert_eq!(block[(0, 0)], alpha as f64);
                    let kernel = config_kernel(cfg, g.dims());
                    assert_eq!(kernel.len(), usize::from(alpha == 0));
                }
            }
        }
    }

    #[test]
    fn vertical_bridge_block_example() {
        // d_m = -2, d_m12 = 1: I - rho(-2).
        let b = block_from(ConfigKind::VerticalBridge, -2, 1).unwrap();
        let s3 = 3f64.sqrt() / 2.0;
        let expected = DMatrix::from_row_slice(2, 2, &[1.5, -s3, -s3, 0.5]);
        assert!((b - expected).amax() < TOL);
    }

    #[test]
    fn s3_bridge_kernel_values() {
        let g = build_grid(&part("2,1"), &part("1"), &part("2")).unwrap();
        let layer = build_layer(&g, 2).unwrap();
        let cfg = &layer.configurations[0];
        assert_eq!(cfg.kind, ConfigKind::VerticalBridge);
        assert_eq!(cfg.d_m, -2);
        assert_eq!(cfg.d_m12, 1);
        let kernel = config_kernel(cfg, g.dims());
        assert_eq!(kernel.len(), 1);
        let v = kernel[0].to_dense();
        assert!((v[0] - 0.5).abs() < TOL);
        assert!((v[1] - 3f64.sqrt() / 2.0).abs() < TOL);
    }

    #[test]
    fn crossing_kernel_outer_products() {
        // d_m = -2, d_m12 = 2.
        let b = block_from(ConfigKind::Crossing, -2, 2).unwrap();
        let em = eigvec(-2, 1).unwrap();
        let ef = eigvec(2, 1).unwrap();
        let v = nalgebra::DVector::from_vec(vec![
            em[0] * ef[0],
            em[1] * ef[0],
            em[0] * ef[1],
            em[1] * ef[1],
        ]);
        assert!((&b * &v).amax() < TOL);
        // Values across the 4 nodes in flat order (m slow) are the products
        // (1/2*r3/2, 1/2*1/2, r3/2*r3/2, r3/2*1/2).
        let s3 = 3f64.sqrt() / 2.0;
        assert!((em[0] * ef[0] - 0.5 * s3).abs() < TOL);
        assert!((em[0] * ef[1] - 0.25).abs() < TOL);
        assert!((em[1] * ef[0] - s3 * s3).abs() < TOL);
        assert!((em[1] * ef[1] - s3 * 0.5).abs() < TOL);
    }

    #[test]
    fn crossing_block_is_kron_difference() {
        let g = build_grid(&part("4,1"), &part("1"), &part("3,1")).unwrap();
        let layer = build_layer(&g, 4).unwrap();
        let cfg = layer
            .configurations
            .iter()
            .find(|c| c.kind == ConfigKind::Crossing)
            .unwrap();
        let b = config_block(cfg);
        let rm = rho(cfg.d_m).unwrap().matrix;
        let rf = rho(cfg.d_m12).unwrap().matrix;
        let id = Matrix2::identity();
        assert!((b.clone() - (kron2(&rf, &id) - kron2(&id, &rm))).amax() < TOL);
        // Symmetry relations between the alpha and beta coefficients.
        assert!((b[(0, 0)] + b[(3, 3)]).abs() < TOL);
        assert!((b[(1, 1)] + b[(2, 2)]).abs() < TOL);
        assert!((b[(0, 1)] - b[(2, 3)]).abs() < TOL);
        assert!((b[(0, 2)] - b[(1, 3)]).abs() < TOL);
    }

    #[test]
    fn blocks_annihilate_kernels_on_sweep() {
        for (l, l1, l2) in [
            ("4,1", "1", "3,1"),
            ("3,2", "2,1", "2"),
            ("3,1,1", "2", "2,1"),
            ("2,2,1", "2,1", "2"),
        ] {
            let g = build_grid(&part(l), &part(l1), &part(l2)).unwrap();
            for layer in build_layers(&g).unwrap() {
                for cfg in &layer.configurations {
                    let block = config_block(cfg);
                    for v in config_kernel(cfg, g.dims()) {
                        let local: Vec<f64> = cfg
                            .members
                            .iter()
                            .map(|&m| v.get(g.dims().flat(m)))
                            .collect();
                        let local = nalgebra::DVector::from_vec(local);
                        assert!((&block * &local).amax() < TOL, "{l} layer {}", layer.i);
                        assert!((v.norm() - 1.0).abs() < TOL);
                    }
                    if cfg.kind == ConfigKind::Crossing {
                        let k = config_kernel(cfg, g.dims());
                        assert_eq!(k.len(), 2);
                        assert!(k[0].dot(&k[1]).abs() < TOL);
                    }
                }
            }
        }
    }

    #[test]
    fn pole_change_examples() {
        let g = build_grid(&part("4,1"), &part("1"), &part("3,1")).unwrap();
        let layer = build_layer(&g, 4).unwrap();
        for cfg in &layer.configurations {
            assert!(pole_change_check(cfg));
        }
        let g = build_grid(&part("3,2"), &part("2,1"), &part("2")).unwrap();
        for layer in build_layers(&g).unwrap() {
            for cfg in &layer.configurations {
                assert!(pole_change_check(cfg));
            }
        }
    }

    #[test]
    fn layer_space_dimension_census() {
        let g = build_grid(&part("4,1"), &part("1"), &part("3,1")).unwrap();
        for layer in build_layers(&g).unwrap() {
            let space = layer_space(&layer, g.dims());
            let expected: usize = layer
                .configurations
                .iter()
                .map(|cfg| match cfg.kind {
                    ConfigKind::Singlet => usize::from(cfg.singlet_alpha() == 0),
                    ConfigKind::VerticalBridge | ConfigKind::HorizontalBridge => 1,
                    ConfigKind::Crossing => 2,
                })
                .sum();
            assert_eq!(space.dim(), expected);
        }
    }

    #[test]
    fn s3_layer_space() {
        let g = build_grid(&part("2,1"), &part("1"), &part("2")).unwrap();
        let layer = build_layer(&g, 2).unwrap();
        let space = layer_space(&layer, g.dims());
        assert_eq!(space.dim(), 1);
        let v = space.vectors[0].to_dense();
        assert!((v[0] - 0.5).abs() < TOL && (v[1] - 3f64.sqrt() / 2.0).abs() < TOL);
    }

    #[test]
    fn sparse_vec_basics() {
        let v = SparseVec::new(4, vec![(2, 1.0), (0, 0.5), (1, 1e-16)]);
        assert_eq!(v.entries(), &[(0, 0.5), (2, 1.0)]);
        assert_eq!(v.get(1), 0.0);
        let w = SparseVec::from_dense(&[0.5, 0.0, 2.0, 0.0]);
        assert!((v.dot(&w) - (0.25 + 2.0)).abs() < TOL);
        assert_eq!(w.to_dense(), vec![0.5, 0.0, 2.0, 0.0]);
    }
}
