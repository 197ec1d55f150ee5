//! Young's orthogonal representation: generator matrices on the standard
//! basis of an irrep, and their Kronecker embeddings on a split basis.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tableaux::{
    apply_generator_tableau, axial_distance, enumerate_standard_tableaux, Partition,
    StandardTableau,
};

/// Matrix of an adjacent transposition on the standard basis of an irrep,
/// rows and columns ordered by tableau rank.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    pub shape: Partition,
    pub index: usize,
    pub matrix: DMatrix<f64>,
}

/// Generator matrix on tableaux with an arbitrary contiguous filling range.
/// `i` is the global value being swapped with `i+1`.
fn generator_matrix_on(tableaux: &[StandardTableau], i: usize) -> Result<DMatrix<f64>> {
    let dim = tableaux.len();
    let index_of = |t: &StandardTableau| -> usize {
        tableaux
            .iter()
            .position(|u| u.entries() == t.entries())
            .expect("generator image must be in the enumeration")
    };
    let mut m = DMatrix::zeros(dim, dim);
    for (k, t) in tableaux.iter().enumerate() {
        let d = axial_distance(t, i)? as f64;
        m[(k, k)] = 1.0 / d;
        let s = apply_generator_tableau(t, i)?;
        if s.entries() != t.entries() {
            let j = index_of(&s);
            m[(k, j)] = (1.0 - 1.0 / (d * d)).sqrt();
        }
    }
    Ok(m)
}

/// YOR matrix of g_i on the irrep labelled by `shape` (filled 1..=n).
pub fn generator_matrix(shape: &Partition, i: usize) -> Result<GeneratorMatrix> {
    let n = shape.n();
    if i == 0 || i >= n {
        return Err(Error::IndexOutOfRange {
            i,
            min: 1,
            max: n.saturating_sub(1).max(1),
        });
    }
    let tableaux = enumerate_standard_tableaux(shape, 1);
    Ok(GeneratorMatrix {
        shape: shape.clone(),
        index: i,
        matrix: generator_matrix_on(&tableaux, i)?,
    })
}

/// Action of g_i on the split basis of `lambda1 x lambda2`, as an
/// N1*N2 matrix with m1 rank slow and m2 rank fast.
///
/// For i < n1 this is `D_{lambda1}(g_i) (x) I`; for i > n1 it is
/// `I (x) D_{lambda2}(g_i)` with the second factor filled n1+1..=n.
pub fn split_generator_action(
    lambda1: &Partition,
    lambda2: &Partition,
    i: usize,
) -> Result<DMatrix<f64>> {
    let n1 = lambda1.n();
    let n2 = lambda2.n();
    let n = n1 + n2;
    if i == 0 || i >= n {
        return Err(Error::IndexOutOfRange {
            i,
            min: 1,
            max: n - 1,
        });
    }
    if i == n1 {
        return Err(Error::UndefinedAction { i });
    }
    let n1_dim = lambda1.dimension();
    let n2_dim = lambda2.dimension();
    if i < n1 {
        let d1 = generator_matrix(lambda1, i)?.matrix;
        Ok(d1.kronecker(&DMatrix::identity(n2_dim, n2_dim)))
    } else {
        let tableaux2 = enumerate_standard_tableaux(lambda2, n1 + 1);
        let d2 = generator_matrix_on(&tableaux2, i)?;
        Ok(DMatrix::identity(n1_dim, n1_dim).kronecker(&d2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(s: &str) -> Partition {
        s.parse().unwrap()
    }

    const TOL: f64 = 1e-12;

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax()
    }

    #[test]
    fn trivial_and_sign_reps() {
        assert_eq!(generator_matrix(&part("2"), 1).unwrap().matrix[(0, 0)], 1.0);
        assert_eq!(
            generator_matrix(&part("1,1"), 1).unwrap().matrix[(0, 0)],
            -1.0
        );
    }

    #[test]
    fn s3_mixed_generator() {
        let g = generator_matrix(&part("2,1"), 2).unwrap().matrix;
        let r3 = 3f64.sqrt() / 2.0;
        let expected = DMatrix::from_row_slice(2, 2, &[-0.5, r3, r3, 0.5]);
        assert!(max_abs_diff(&g, &expected) < TOL);
    }

    #[test]
    fn index_out_of_range() {
        assert!(generator_matrix(&part("2,1"), 0).is_err());
        assert!(generator_matrix(&part("2,1"), 3).is_err());
    }

    #[test]
    fn representation_properties_up_to_n6() {
        for n in 2..=6 {
            for shape in Partition::all(n) {
                let gens: Vec<DMatrix<f64>> = (1..n)
                    .map(|i| generator_matrix(&shape, i).unwrap().matrix)
                    .collect();
                let dim = shape.dimension();
                let id = DMatrix::identity(dim, dim);
                for g in &gens {
                    assert!(max_abs_diff(&(g * g), &id) < TOL, "involution {shape}");
                    assert!(
                        max_abs_diff(&(g.transpose() * g), &id) < TOL,
                        "orthogonality {shape}"
                    );
                }
                for i in 0..gens.len().saturating_sub(1) {
                    let lhs = &gens[i] * &gens[i + 1] * &gens[i];
                    let rhs = &gens[i + 1] * &gens[i] * &gens[i + 1];
                    assert!(max_abs_diff(&lhs, &rhs) < TOL, "braid {shape} i={}", i + 1);
                }
                for i in 0..gens.len() {
                    for j in 0..gens.len() {
                        if i.abs_diff(j) >= 2 {
                            let lhs = &gens[i] * &gens[j];
                            let rhs = &gens[j] * &gens[i];
                            assert!(max_abs_diff(&lhs, &rhs) < TOL, "commutation {shape}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn split_action_trivial_cases() {
        let m = split_generator_action(&part("1"), &part("2"), 2).unwrap();
        assert_eq!(m.nrows(), 1);
        assert!((m[(0, 0)] - 1.0).abs() < TOL);

        // Sign rep on the second factor: N1*N2 = 1.
        let m = split_generator_action(&part("2"), &part("1,1"), 3).unwrap();
        assert_eq!(m.nrows(), 1);
        assert!((m[(0, 0)] + 1.0).abs() < TOL);
    }

    #[test]
    fn split_action_matches_relabeled_generator() {
        // lambda1=[1], lambda2=[3,1], i=3 acts as g_2 of [3,1] under 2..5 -> 1..4.
        let m = split_generator_action(&part("1"), &part("3,1"), 3).unwrap();
        let g = generator_matrix(&part("3,1"), 2).unwrap().matrix;
        assert!(max_abs_diff(&m, &g) < TOL);
    }

    #[test]
    fn split_action_undefined_at_n1() {
        assert!(matches!(
            split_generator_action(&part("2"), &part("2"), 2),
            Err(Error::UndefinedAction { i: 2 })
        ));
    }

    #[test]
    fn split_factors_commute() {
        // Disjoint tensor slots: i < n1 commutes with j > n1.
        let l1 = part("2,1");
        let l2 = part("2,1");
        let a = split_generator_action(&l1, &l2, 1).unwrap();
        let b = split_generator_action(&l1, &l2, 4).unwrap();
        assert!(max_abs_diff(&(&a * &b), &(&b * &a)) < TOL);
        let b = split_generator_action(&l1, &l2, 5).unwrap();
        assert!(max_abs_diff(&(&a * &b), &(&b * &a)) < TOL);
    }
}
