//! Spin-network Hamiltonians.
//!
//! Large computations use the `N × N` restriction of the Hamiltonian to the
//! single-excitation subspace (one spin up, the rest down). The full
//! `2^N`-dimensional operators in [`full`] exist to cross-check that reduction
//! on small networks.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub mod full;

pub use full::{full_hamiltonian, total_sz, FullHamiltonian, Model, ORACLE_SITE_LIMIT};

/// Nearest-neighbour couplings `J_1..J_{N-1}` of an `N`-site chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChainRecord", into = "ChainRecord")]
pub struct CouplingChain {
    couplings: Vec<f64>,
    lambda: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct ChainRecord {
    #[serde(rename = "N")]
    sites: usize,
    #[serde(rename = "J")]
    couplings: Vec<f64>,
    lambda: Option<f64>,
}

impl TryFrom<ChainRecord> for CouplingChain {
    type Error = Error;

    fn try_from(rec: ChainRecord) -> Result<Self> {
        if rec.sites != rec.couplings.len() + 1 {
            return Err(Error::InvalidSize(format!(
                "chain of {} sites needs {} couplings, got {}",
                rec.sites,
                rec.sites.saturating_sub(1),
                rec.couplings.len()
            )));
        }
        let mut chain = CouplingChain::new(rec.couplings)?;
        chain.lambda = rec.lambda;
        Ok(chain)
    }
}

impl From<CouplingChain> for ChainRecord {
    fn from(chain: CouplingChain) -> Self {
        ChainRecord {
            sites: chain.site_count(),
            couplings: chain.couplings,
            lambda: chain.lambda,
        }
    }
}

impl CouplingChain {
    /// A chain with the given couplings; all must be positive and finite.
    pub fn new(couplings: Vec<f64>) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::InvalidSize(
                "a chain needs at least two sites".into(),
            ));
        }
        if let Some(bad) = couplings.iter().find(|j| !(j.is_finite() && **j > 0.0)) {
            return Err(Error::InvalidGraph(format!(
                "coupling {bad} is not positive"
            )));
        }
        Ok(CouplingChain {
            couplings,
            lambda: None,
        })
    }

    /// `N` sites, every coupling equal to `j`.
    pub fn uniform(sites: usize, j: f64) -> Result<Self> {
        Self::new(vec![j; sites.saturating_sub(1)])
    }

    pub fn site_count(&self) -> usize {
        self.couplings.len() + 1
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Rotation rate of an engineered chain; `None` for arbitrary couplings.
    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    /// `J_n == J_{N-n}` for every `n`, compared exactly.
    pub fn is_palindromic(&self) -> bool {
        self.couplings.iter().eq(self.couplings.iter().rev())
    }

    pub fn reversed(&self) -> Self {
        CouplingChain {
            couplings: self.couplings.iter().rev().copied().collect(),
            lambda: self.lambda,
        }
    }
}

/// Couplings `J_n = (λ/2)·√(n(N−n))` of the chain that acts as a spin
/// `(N−1)/2` rotating about x at rate `λ`; transfers end to end at `t = π/λ`.
pub fn engineered_couplings(sites: usize, lambda: f64) -> Result<CouplingChain> {
    if sites < 2 {
        return Err(Error::InvalidSize(format!(
            "engineered chain needs at least 2 sites, got {sites}"
        )));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidSize(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let couplings = (1..sites)
        .map(|n| 0.5 * lambda * ((n * (sites - n)) as f64).sqrt())
        .collect();
    let mut chain = CouplingChain::new(couplings)?;
    chain.lambda = Some(lambda);
    Ok(chain)
}

/// Real symmetric Hamiltonian on the single-excitation subspace `span{|n⟩}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleExcitationHamiltonian {
    matrix: DMatrix<f64>,
}

impl SingleExcitationHamiltonian {
    /// Wraps a matrix, rejecting any asymmetry beyond `1e-14` relative to its
    /// largest entry.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&matrix)?;
        Ok(SingleExcitationHamiltonian { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

pub(crate) fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidSize(format!(
            "Hamiltonian must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let tol = 1e-14 * m.amax().max(1.0);
    for r in 0..m.nrows() {
        for c in r + 1..m.ncols() {
            let deviation = (m[(r, c)] - m[(c, r)]).abs();
            if deviation > tol || deviation.is_nan() {
                return Err(Error::NotSymmetric {
                    row: r + 1,
                    col: c + 1,
                    deviation,
                });
            }
        }
    }
    Ok(())
}

/// The XX Hamiltonian of a uniformly coupled graph restricted to one
/// excitation: exactly the adjacency matrix.
pub fn xx_subspace_hamiltonian(g: &Graph) -> SingleExcitationHamiltonian {
    SingleExcitationHamiltonian {
        matrix: g.adjacency_matrix(),
    }
}

/// Tridiagonal, zero-diagonal restriction of the chain XX Hamiltonian.
pub fn chain_hamiltonian(chain: &CouplingChain) -> SingleExcitationHamiltonian {
    CouplingNetwork::from(chain).subspace_hamiltonian()
}

/// Local z fields `B_1..B_N` for the Heisenberg chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldProfile {
    #[serde(rename = "B")]
    fields: Vec<f64>,
}

impl FieldProfile {
    pub fn new(fields: Vec<f64>) -> Result<Self> {
        if let Some(bad) = fields.iter().find(|b| !b.is_finite()) {
            return Err(Error::InvalidGraph(format!("field {bad} is not finite")));
        }
        Ok(FieldProfile { fields })
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }
}

/// Fields that make the Heisenberg chain transfer like the XX chain:
///
/// `B_n = (J_{n−1} + J_n)/2 − Σ_k J_k / (2(N−2))`, with `J_0 = J_N = 0`.
///
/// With these fields the σᶻσᶻ and field terms cancel on the single-excitation
/// diagonal, so that block coincides with the XX block.
pub fn heisenberg_fields(chain: &CouplingChain) -> Result<FieldProfile> {
    let n = chain.site_count();
    if n < 3 {
        return Err(Error::UndefinedFields(n));
    }
    let j = chain.couplings();
    let total: f64 = j.iter().sum();
    let offset = total / (2.0 * (n - 2) as f64);
    let coupling = |k: usize| if k == 0 || k == n { 0.0 } else { j[k - 1] };
    let fields = (1..=n)
        .map(|site| 0.5 * (coupling(site - 1) + coupling(site)) - offset)
        .collect();
    FieldProfile::new(fields)
}

/// Weighted bonds `(u, v, J)` on sites `1..=N`; the common input for building
/// Hamiltonians from either a uniform graph or a coupling chain.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingNetwork {
    sites: usize,
    bonds: Vec<(usize, usize, f64)>,
}

impl CouplingNetwork {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn bonds(&self) -> &[(usize, usize, f64)] {
        &self.bonds
    }

    /// Weighted adjacency matrix, i.e. the XX Hamiltonian on one excitation.
    pub fn subspace_hamiltonian(&self) -> SingleExcitationHamiltonian {
        let mut m = DMatrix::zeros(self.sites, self.sites);
        for &(u, v, j) in &self.bonds {
            m[(u - 1, v - 1)] += j;
            m[(v - 1, u - 1)] += j;
        }
        SingleExcitationHamiltonian { matrix: m }
    }

    /// The unweighted graph of bonds.
    pub fn topology(&self) -> Graph {
        Graph::new(self.sites, self.bonds.iter().map(|&(u, v, _)| (u, v)))
            .expect("bonds come from a valid graph or chain")
    }
}

impl From<&Graph> for CouplingNetwork {
    fn from(g: &Graph) -> Self {
        CouplingNetwork {
            sites: g.vertex_count(),
            bonds: g.edges().iter().map(|&(u, v)| (u, v, 1.0)).collect(),
        }
    }
}

impl From<&CouplingChain> for CouplingNetwork {
    fn from(chain: &CouplingChain) -> Self {
        CouplingNetwork {
            sites: chain.site_count(),
            bonds: chain
                .couplings()
                .iter()
                .enumerate()
                .map(|(k, &j)| (k + 1, k + 2, j))
                .collect(),
        }
    }
}
