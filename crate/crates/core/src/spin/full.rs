//! Full `2^N`-dimensional spin Hamiltonians assembled from Pauli products.
//!
//! Basis layout: site 1 is the most significant tensor factor, and each site is
//! ordered `(↑, ↓)`, so single-site `σᶻ = diag(1, −1)`. A basis index therefore
//! has bit `N − n` set exactly when site `n` points down. The all-down state
//! `|0̲⟩` is index `2^N − 1`, and `|n⟩` (only site `n` up) clears bit `N − n`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{CouplingNetwork, FieldProfile};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Default largest network handled by the full Hilbert space oracle.
pub const ORACLE_SITE_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    /// `Σ J/2 (σˣσˣ + σʸσʸ)`.
    Xx,
    /// `Σ J/2 σ⃗·σ⃗ + Σ B σᶻ`.
    Heisenberg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pauli {
    X,
    Y,
    Z,
}

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Pauli {
    /// Acts on local state `down` (false = ↑, true = ↓): new state and phase.
    fn act(self, down: bool) -> (bool, Complex64) {
        match (self, down) {
            (Pauli::X, d) => (!d, ONE),
            (Pauli::Y, false) => (true, I),
            (Pauli::Y, true) => (false, -I),
            (Pauli::Z, false) => (false, ONE),
            (Pauli::Z, true) => (true, -ONE),
        }
    }
}

/// Coefficient times a product of single-site Paulis.
struct PauliTerm {
    coefficient: f64,
    factors: Vec<(usize, Pauli)>,
}

impl PauliTerm {
    fn apply(&self, sites: usize, basis: usize) -> (usize, Complex64) {
        let mut state = basis;
        let mut phase = Complex64::new(self.coefficient, 0.0);
        for &(site, p) in &self.factors {
            let bit = 1usize << (sites - site);
            let (down, ph) = p.act(state & bit != 0);
            state = if down { state | bit } else { state & !bit };
            phase *= ph;
        }
        (state, phase)
    }
}

/// Index of the all-down state.
pub fn vacuum_index(sites: usize) -> usize {
    (1usize << sites) - 1
}

/// Index of `|n⟩`, the state with only site `n` (1-based) up.
pub fn excitation_index(sites: usize, n: usize) -> usize {
    vacuum_index(sites) & !(1usize << (sites - n))
}

/// Hermitian Hamiltonian on the full `2^N` space.
#[derive(Clone, Debug)]
pub struct FullHamiltonian {
    sites: usize,
    model: Model,
    matrix: SparseMatrix,
}

impl FullHamiltonian {
    /// Builds the model on `network`, failing above `limit` sites.
    pub fn build(
        network: &CouplingNetwork,
        model: Model,
        fields: Option<&FieldProfile>,
        limit: usize,
    ) -> Result<Self> {
        let sites = network.sites();
        if sites > limit || sites >= usize::BITS as usize {
            return Err(Error::OracleSize { sites, limit });
        }
        if let Some(f) = fields {
            if f.len() != sites {
                return Err(Error::InvalidSize(format!(
                    "{} fields for {sites} sites",
                    f.len()
                )));
            }
        }
        let mut terms = Vec::new();
        for &(u, v, j) in network.bonds() {
            let mut kinds = vec![Pauli::X, Pauli::Y];
            if model == Model::Heisenberg {
                kinds.push(Pauli::Z);
            }
            for p in kinds {
                terms.push(PauliTerm {
                    coefficient: 0.5 * j,
                    factors: vec![(u, p), (v, p)],
                });
            }
        }
        if let Some(f) = fields {
            for (k, &b) in f.fields().iter().enumerate() {
                terms.push(PauliTerm {
                    coefficient: b,
                    factors: vec![(k + 1, Pauli::Z)],
                });
            }
        }
        let dim = 1usize << sites;
        let triplets = (0..dim).flat_map(|col| {
            terms.iter().map(move |term| {
                let (row, value) = term.apply(sites, col);
                (row, col, value)
            })
        });
        Ok(FullHamiltonian {
            sites,
            model,
            matrix: SparseMatrix::from_triplets(dim, triplets),
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dimension(&self) -> usize {
        self.matrix.dim()
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// The `N × N` block in the `|n⟩` basis.
    pub fn single_excitation_block(&self) -> DMatrix<Complex64> {
        let n = self.sites;
        DMatrix::from_fn(n, n, |r, c| {
            self.matrix
                .get(excitation_index(n, r + 1), excitation_index(n, c + 1))
        })
    }

    /// Embeds `α|0̲⟩ + Σ β_n |n⟩` in the full space.
    pub fn embed(&self, alpha: Complex64, beta: &DVector<Complex64>) -> DVector<Complex64> {
        let mut psi = DVector::zeros(self.dimension());
        psi[vacuum_index(self.sites)] = alpha;
        for (k, &b) in beta.iter().enumerate() {
            psi[excitation_index(self.sites, k + 1)] = b;
        }
        psi
    }

    /// Vacuum amplitude, single-excitation amplitudes, and the norm of the
    /// remainder outside those sectors.
    pub fn project(&self, psi: &DVector<Complex64>) -> (Complex64, DVector<Complex64>, f64) {
        let n = self.sites;
        let alpha = psi[vacuum_index(n)];
        let beta = DVector::from_iterator(n, (1..=n).map(|k| psi[excitation_index(n, k)]));
        let rest = psi
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx.count_ones() + 1 < n as u32)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        (alpha, beta, rest)
    }

    /// `e^{−itH} ψ` by Taylor series on short time steps.
    ///
    /// Kept independent of any eigendecomposition so it can serve as an oracle
    /// for the spectral propagator.
    pub fn evolve(&self, psi: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let bound = self.matrix.max_row_sum().max(1e-300);
        let steps = (t.abs() * bound / 0.5).ceil().max(1.0) as usize;
        let dt = t / steps as f64;
        let mut state = psi.clone();
        for _ in 0..steps {
            let mut term = state.clone();
            let mut sum = state.clone();
            for k in 1..=80 {
                term = self.matrix.mul_vec(&term) * Complex64::new(0.0, -dt / k as f64);
                sum += &term;
                if term.norm() <= 1e-18 * sum.norm() {
                    break;
                }
            }
            state = sum;
        }
        state
    }
}

/// Full Hamiltonian with the default [`ORACLE_SITE_LIMIT`].
pub fn full_hamiltonian(
    network: &CouplingNetwork,
    model: Model,
    fields: Option<&FieldProfile>,
) -> Result<FullHamiltonian> {
    FullHamiltonian::build(network, model, fields, ORACLE_SITE_LIMIT)
}

/// `Σ_i σᶻ_i` on `N` sites.
pub fn total_sz(sites: usize) -> Result<SparseMatrix> {
    if sites > ORACLE_SITE_LIMIT {
        return Err(Error::OracleSize {
            sites,
            limit: ORACLE_SITE_LIMIT,
        });
    }
    let diag: Vec<Complex64> = (0..1usize << sites)
        .map(|idx| {
            let down = idx.count_ones() as f64;
            Complex64::new(sites as f64 - 2.0 * down, 0.0)
        })
        .collect();
    Ok(SparseMatrix::diagonal(&diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path_graph, Graph};
    use crate::spin::{
        engineered_couplings, heisenberg_fields, xx_subspace_hamiltonian, CouplingChain,
    };

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_site_is_zero() {
        let g = path_graph(1).unwrap();
        let h = full_hamiltonian(&(&g).into(), Model::Xx, None).unwrap();
        assert_eq!(h.dimension(), 2);
        assert_eq!(h.matrix().nnz(), 0);
    }

    #[test]
    fn two_site_block() {
        let g = path_graph(2).unwrap();
        let h = full_hamiltonian(&(&g).into(), Model::Xx, None).unwrap();
        let block = h.single_excitation_block();
        assert_eq!(
            block,
            DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
        );
        // Only |↑↓⟩ ↔ |↓↑⟩ survives.
        assert_eq!(h.matrix().nnz(), 2);
    }

    #[test]
    fn total_sz_spectrum() {
        assert_eq!(
            total_sz(1).unwrap().to_dense(),
            DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
        );
        for n in 1..=6 {
            let sz = total_sz(n).unwrap();
            let vac = vacuum_index(n);
            assert_eq!(sz.get(vac, vac), c(-(n as f64)));
            for k in 1..=n {
                let e = excitation_index(n, k);
                assert_eq!(sz.get(e, e), c(2.0 - n as f64));
            }
        }
        assert!(matches!(
            total_sz(13),
            Err(Error::OracleSize {
                sites: 13,
                limit: 12
            })
        ));
    }

    #[test]
    fn xx_conserves_total_sz() {
        let g = path_graph(3).unwrap();
        let h = full_hamiltonian(&(&g).into(), Model::Xx, None).unwrap();
        assert_eq!(h.matrix().commutator_norm(&total_sz(3).unwrap()), 0.0);
        assert_eq!(h.matrix().hermiticity_error(), 0.0);
        let vac = vacuum_index(3);
        assert!(h.matrix().row(vac).all(|(_, v)| v == c(0.0)));
    }

    #[test]
    fn block_matches_adjacency_on_small_graphs() {
        let g = Graph::new(5, [(1, 2), (2, 3), (1, 3), (3, 4), (4, 5), (2, 5)]).unwrap();
        let h = full_hamiltonian(&(&g).into(), Model::Xx, None).unwrap();
        let a = xx_subspace_hamiltonian(&g);
        assert!((h.single_excitation_block().map(|z| z.re) - a.matrix()).amax() < 1e-15);
        assert!(h.single_excitation_block().map(|z| z.im).amax() < 1e-15);
    }

    #[test]
    fn fielded_heisenberg_block_equals_xx_block() {
        for n in 3..=7 {
            let chain = engineered_couplings(n, 2.0).unwrap();
            let b = heisenberg_fields(&chain).unwrap();
            let net = (&chain).into();
            let heis = full_hamiltonian(&net, Model::Heisenberg, Some(&b)).unwrap();
            let xx = full_hamiltonian(&net, Model::Xx, None).unwrap();
            let diff = heis.single_excitation_block() - xx.single_excitation_block();
            assert!(diff.camax() < 1e-13, "n={n}: {}", diff.camax());
            assert!(heis.matrix().commutator_norm(&total_sz(n).unwrap()) < 1e-12);
            // Vacuum energy ΣJ/(N−2).
            let vac = vacuum_index(n);
            let total: f64 = chain.couplings().iter().sum();
            assert!((heis.matrix().get(vac, vac).re - total / (n - 2) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn taylor_evolution_of_two_sites() {
        let chain = CouplingChain::uniform(2, 1.0).unwrap();
        let h = full_hamiltonian(&(&chain).into(), Model::Xx, None).unwrap();
        let start = h.embed(c(0.0), &DVector::from_vec(vec![c(1.0), c(0.0)]));
        let out = h.evolve(&start, std::f64::consts::FRAC_PI_2);
        let (_, beta, rest) = h.project(&out);
        assert!(beta[0].norm() < 1e-14);
        assert!((beta[1] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!(rest < 1e-14);
    }

    #[test]
    fn oracle_limit() {
        let g = path_graph(13).unwrap();
        assert!(matches!(
            full_hamiltonian(&(&g).into(), Model::Xx, None),
            Err(Error::OracleSize {
                sites: 13,
                limit: 12
            })
        ));
        assert!(
            FullHamiltonian::build(&(&path_graph(4).unwrap()).into(), Model::Xx, None, 3).is_err()
        );
    }
}
