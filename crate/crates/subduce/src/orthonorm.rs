//! Orthonormalized multiplicity separation: Gram form of a subduction basis,
//! its Sylvester factorization, phase conventions, unitarity verification,
//! freedom counting and surd recognition.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::layerspace::{SubspaceBasis, SPARSE_DROP_TOL};
use crate::solver::TolerancePolicy;
use crate::subgraph::Grid;
use crate::tableaux::Partition;

/// Normalized inner-product matrix of a subduction-space basis.
#[derive(Debug, Clone)]
pub struct GramForm {
    pub matrix: DMatrix<f64>,
}

/// tau = (1/N1N2) chi^t chi over the given basis columns.
pub fn gram(basis: &SubspaceBasis, n1n2: usize) -> Result<GramForm> {
    let mu = basis.dim();
    if mu == 0 {
        return Err(Error::DegenerateInput("empty basis has no Gram form".into()));
    }
    let scale = 1.0 / n1n2 as f64;
    let mut m = DMatrix::zeros(mu, mu);
    for i in 0..mu {
        for j in i..mu {
            let v = basis.vectors[i].dot(&basis.vectors[j]) * scale;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(GramForm { matrix: m })
}

/// Factors of the Sylvester matrix sigma = O_tau D_tau^(-1/2) O reducing the
/// Gram form to the identity.
#[derive(Debug, Clone)]
pub struct SylvesterFactors {
    /// Orthogonal eigenvector matrix of tau, eigenvalues ascending, columns
    /// sign-fixed (largest-magnitude entry positive, first on ties).
    pub o_tau: DMatrix<f64>,
    /// Eigenvalues of tau, ascending.
    pub d_tau: DVector<f64>,
    /// The free orthogonal factor; identity unless supplied.
    pub o: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
}

/// Eigendecomposition-based Sylvester factorization with O = identity.
pub fn sylvester(tau: &GramForm) -> Result<SylvesterFactors> {
    let mu = tau.matrix.nrows();
    sylvester_with(tau, DMatrix::identity(mu, mu))
}

/// As [`sylvester`], with a caller-supplied orthogonal free factor.
pub fn sylvester_with(tau: &GramForm, o: DMatrix<f64>) -> Result<SylvesterFactors> {
    let eig = tau.matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let d_tau = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let lambda_max = d_tau[d_tau.len() - 1];
    if d_tau[0] <= 1e-12 * lambda_max.max(0.0) || d_tau[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let mut o_tau = eig.eigenvectors.select_columns(&order);
    for mut col in o_tau.column_iter_mut() {
        let mut lead = 0;
        for k in 1..col.len() {
            if col[k].abs() > col[lead].abs() {
                lead = k;
            }
        }
        if col[lead] < 0.0 {
            col.neg_mut();
        }
    }
    let d_inv_sqrt = DMatrix::from_diagonal(&d_tau.map(|v| 1.0 / v.sqrt()));
    let sigma = &o_tau * d_inv_sqrt * &o;
    Ok(SylvesterFactors {
        o_tau,
        d_tau,
        o,
        sigma,
    })
}

/// A single surd a*sqrt(b)/c.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Surd {
    pub a: i64,
    pub b: u64,
    pub c: u64,
}

impl Surd {
    pub fn value(&self) -> f64 {
        self.a as f64 * (self.b as f64).sqrt() / self.c as f64
    }
}

impl std::fmt::Display for Surd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}*sqrt({})/{}", self.a, self.b, self.c)
    }
}

/// One subduction coefficient, addressed by 1-based tableau ranks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdcEntry {
    pub m: usize,
    pub m1: usize,
    pub m2: usize,
    pub value: f64,
    pub surd: Option<Surd>,
}

/// Coefficients of one multiplicity copy.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaBlock {
    /// 1-based multiplicity label.
    pub eta: usize,
    /// Nonzero coefficients in flat node order.
    pub coefficients: Vec<SdcEntry>,
}

/// Orthonormalized, phase-fixed subduction coefficients with metadata.
#[derive(Debug, Clone)]
pub struct SdcTable {
    pub lambda: Partition,
    pub lambda1: Partition,
    pub lambda2: Partition,
    pub n1: usize,
    pub multiplicity: usize,
    /// max ||Omega v||_inf over the copies, when computed.
    pub residual: Option<f64>,
    pub tolerance: TolerancePolicy,
    pub basis: Vec<EtaBlock>,
}

impl SdcTable {
    /// Dense coefficient vector of one copy over the grid, in flat order.
    pub fn dense_eta(&self, eta_pos: usize, dims: crate::subgraph::GridDims) -> Vec<f64> {
        let mut out = vec![0.0; dims.node_count()];
        for e in &self.basis[eta_pos].coefficients {
            let node = crate::subgraph::Node {
                m: e.m - 1,
                m1: e.m1 - 1,
                m2: e.m2 - 1,
            };
            out[dims.flat(node)] = e.value;
        }
        out
    }
}

/// First coefficient larger than this magnitude anchors the phase convention.
const PHASE_EPS: f64 = 1e-10;

/// Relative deviation under which the Gram form is snapped to a multiple of
/// the identity, keeping repeated orthonormalization bit-stable.
const GRAM_SNAP_TOL: f64 = 1e-13;

/// Orthonormalizes a subduction-space basis into an SDC table.
///
/// The basis columns are mapped through the Sylvester matrix of their Gram
/// form, then each copy's global phase is fixed so its first nonzero
/// coefficient in flat node order is positive.
pub fn orthonormalize(
    grid: &Grid,
    basis: &SubspaceBasis,
    tol: &TolerancePolicy,
    custom_o: Option<&DMatrix<f64>>,
) -> Result<SdcTable> {
    tol.validate()?;
    let dims = grid.dims();
    let n1n2 = dims.n1 * dims.n2;
    let mu = basis.dim();
    let mut table = SdcTable {
        lambda: grid.lambda().clone(),
        lambda1: grid.lambda1().clone(),
        lambda2: grid.lambda2().clone(),
        n1: grid.n1(),
        multiplicity: mu,
        residual: None,
        tolerance: *tol,
        basis: Vec::new(),
    };
    if mu == 0 {
        return Ok(table);
    }

    let tau = gram(basis, n1n2)?;
    let mut chi = basis.to_matrix();
    let mean_diag = tau.matrix.trace() / mu as f64;
    let snap_scale = if (mean_diag - 1.0).abs() <= GRAM_SNAP_TOL {
        1.0
    } else {
        mean_diag
    };
    let near_scalar = {
        let dev = (&tau.matrix - DMatrix::identity(mu, mu) * snap_scale).amax();
        dev <= GRAM_SNAP_TOL * snap_scale.max(1.0)
    };
    if near_scalar && custom_o.is_none() {
        if snap_scale <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        if snap_scale != 1.0 {
            chi *= 1.0 / snap_scale.sqrt();
        }
    } else {
        let o = match custom_o {
            Some(o) => {
                if o.nrows() != mu || o.ncols() != mu {
                    return Err(Error::DegenerateInput(format!(
                        "free factor must be {mu}x{mu}"
                    )));
                }
                o.clone()
            }
            None => DMatrix::identity(mu, mu),
        };
        let factors = sylvester_with(&tau, o)?;
        chi = &chi * &factors.sigma;
    }

    for eta in 0..mu {
        let mut col = chi.column_mut(eta);
        if let Some(lead) = col.iter().position(|v| v.abs() > PHASE_EPS) {
            if col[lead] < 0.0 {
                col.neg_mut();
            }
        }
    }

    debug_assert!({
        let g = chi.transpose() * &chi / n1n2 as f64;
        (g - DMatrix::identity(mu, mu)).amax() < tol.orthonormality_tol
    });

    for eta in 0..mu {
        let mut coefficients = Vec::new();
        for flat in 0..dims.node_count() {
            let v = chi[(flat, eta)];
            if v.abs() > SPARSE_DROP_TOL {
                let node = dims.node_at(flat);
                coefficients.push(SdcEntry {
                    m: node.m_rank(),
                    m1: node.m1_rank(),
                    m2: node.m2_rank(),
                    value: v,
                    surd: None,
                });
            }
        }
        table.basis.push(EtaBlock {
            eta: eta + 1,
            coefficients,
        });
    }
    Ok(table)
}

/// Annotates every coefficient with a surd when one is found in range.
pub fn annotate_surds(table: &mut SdcTable, b_max: u64, c_max: u64) {
    for block in &mut table.basis {
        for entry in &mut block.coefficients {
            entry.surd = identify_surd(entry.value, b_max, c_max);
        }
    }
}

/// Outcome of assembling the standard-to-split transformation for one
/// (lambda, n1) and checking its orthogonality.
#[derive(Debug, Clone, Copy)]
pub struct UnitarityReport {
    /// Dimension of the irrep (rows of the transformation).
    pub n: usize,
    /// Assembled split columns; equals `n` for a complete block set.
    pub columns: usize,
    /// max deviation from orthonormality over rows and columns.
    pub max_deviation: f64,
}

/// Assembles the N x N standard-to-split matrix from the complete set of
/// blocks for a fixed (lambda, n1) and verifies row and column orthonormality.
pub fn verify_unitarity(
    lambda: &Partition,
    n1: usize,
    tables: &[SdcTable],
) -> Result<UnitarityReport> {
    let n_dim = lambda.dimension();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for table in tables {
        if &table.lambda != lambda || table.n1 != n1 {
            return Err(Error::DegenerateInput(format!(
                "table for ({}; {}, {}) does not belong to ({lambda}, n1={n1})",
                table.lambda, table.lambda1, table.lambda2
            )));
        }
        let d1 = table.lambda1.dimension();
        let d2 = table.lambda2.dimension();
        for block in &table.basis {
            let mut slice = vec![vec![0.0; n_dim]; d1 * d2];
            for e in &block.coefficients {
                slice[(e.m1 - 1) * d2 + (e.m2 - 1)][e.m - 1] = e.value;
            }
            columns.extend(slice);
        }
    }
    if columns.len() != n_dim {
        return Err(Error::IncompleteBlockSet {
            assembled: columns.len(),
            expected: n_dim,
        });
    }
    let mut u = DMatrix::zeros(n_dim, n_dim);
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            u[(i, j)] = v;
        }
    }
    let id = DMatrix::identity(n_dim, n_dim);
    let dev_cols = (u.transpose() * &u - &id).amax();
    let dev_rows = (&u * u.transpose() - &id).amax();
    Ok(UnitarityReport {
        n: n_dim,
        columns: n_dim,
        max_deviation: dev_cols.max(dev_rows),
    })
}

/// Number of phases and free factors governing a multiplicity separation:
/// (2^(mu-1) + 1) + mu(mu-1)/2.
pub fn freedom_count(mu: u32) -> u64 {
    assert!(mu >= 1, "multiplicity must be positive");
    (1u64 << (mu - 1)) + 1 + (mu as u64 * (mu as u64 - 1)) / 2
}

fn square_free(b: u64) -> bool {
    let mut d = 2;
    while d * d <= b {
        if b % (d * d) == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Finds the smallest (c, b, |a|) with |x - a sqrt(b)/c| < 1e-9, b square-free
/// and gcd(|a|, c) = 1, if one exists in range.
pub fn identify_surd(x: f64, b_max: u64, c_max: u64) -> Option<Surd> {
    const EPS: f64 = 1e-9;
    for c in 1..=c_max {
        for b in (1..=b_max).filter(|&b| square_free(b)) {
            let target = x * c as f64 / (b as f64).sqrt();
            let a = target.round();
            if a.abs() > i64::MAX as f64 {
                continue;
            }
            let a = a as i64;
            let candidate = Surd { a, b, c };
            if (x - candidate.value()).abs() < EPS && gcd(a.unsigned_abs(), c) == 1 {
                return Some(candidate);
            }
        }
    }
    None
}
