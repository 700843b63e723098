//! Time evolution on the single-excitation subspace.
//!
//! Propagators come from the spectral decomposition `H = V·diag(E)·Vᵀ`, so
//! `⟨b|e^{−itH}|a⟩ = Σ_k V_bk V_ak e^{−iE_k t}` costs `O(N)` per time once `H`
//! is diagonalised. Site indices are 1-based and `ħ = 1`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ColumnPartition, Graph};
use crate::spin::{chain_hamiltonian, check_symmetric, CouplingChain, SingleExcitationHamiltonian};

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// Refined peak times are located to within this many time units.
pub const PEAK_TIME_TOLERANCE: f64 = 1e-10;

/// Peaks whose magnitudes differ by less than this are ties; the earliest wins.
pub const PEAK_TIE_TOLERANCE: f64 = 1e-12;

/// `|F| ≥ 1 − PST_THRESHOLD` counts as perfect transfer.
pub const PST_THRESHOLD: f64 = 1e-9;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// (as columns).
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    /// Decomposes a real symmetric matrix, rejecting asymmetric input.
    pub fn of_matrix(m: &DMatrix<f64>) -> Result<Self> {
        check_symmetric(m)?;
        Ok(Self::decompose(m))
    }

    fn decompose(m: &DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(m.clone());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        SpectralDecomposition {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `E_max − E_min`.
    pub fn spread(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    /// Weights `⟨target|k⟩⟨k|source⟩` of each eigenvector in the transfer amplitude.
    pub fn transition_weights(&self, source: usize, target: usize) -> Vec<f64> {
        self.check_site(source);
        self.check_site(target);
        (0..self.dim())
            .map(|k| self.eigenvectors[(target - 1, k)] * self.eigenvectors[(source - 1, k)])
            .collect()
    }

    /// `⟨target|e^{−itH}|source⟩`.
    pub fn amplitude(&self, source: usize, target: usize, t: f64) -> Complex64 {
        self.check_site(source);
        self.check_site(target);
        let (s, b) = (source - 1, target - 1);
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &e)| {
                let w = self.eigenvectors[(b, k)] * self.eigenvectors[(s, k)];
                Complex64::from_polar(w, -e * t)
            })
            .sum()
    }

    /// `d|F|²/dt = 2·Re(F̄·F′)` for the amplitude from `source` to `target`.
    pub fn squared_magnitude_slope(&self, source: usize, target: usize, t: f64) -> f64 {
        self.check_site(source);
        self.check_site(target);
        let (s, b) = (source - 1, target - 1);
        let (mut f, mut df) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            let term = Complex64::from_polar(
                self.eigenvectors[(b, k)] * self.eigenvectors[(s, k)],
                -e * t,
            );
            f += term;
            df += term * Complex64::new(0.0, -e);
        }
        2.0 * (f.conj() * df).re
    }

    /// `e^{−itH}` as a dense matrix.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let v = self.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let phases = DVector::from_iterator(
            self.dim(),
            self.eigenvalues
                .iter()
                .map(|&e| Complex64::from_polar(1.0, -e * t)),
        );
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |r, c| v[(r, c)] * phases[c]);
        scaled * v.transpose()
    }

    /// `e^{−itH} β`.
    pub fn evolve(&self, beta: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        assert_eq!(beta.len(), self.dim(), "state dimension mismatch");
        let n = self.dim();
        let coeffs = DVector::from_iterator(
            n,
            (0..n).map(|k| {
                let overlap: Complex64 = (0..n).map(|r| beta[r] * self.eigenvectors[(r, k)]).sum();
                overlap * Complex64::from_polar(1.0, -self.eigenvalues[k] * t)
            }),
        );
        DVector::from_iterator(
            n,
            (0..n).map(|r| (0..n).map(|k| coeffs[k] * self.eigenvectors[(r, k)]).sum()),
        )
    }

    /// `‖H − V·diag(E)·Vᵀ‖_F / max(‖H‖_F, 1)`.
    pub fn reconstruction_error(&self, h: &DMatrix<f64>) -> f64 {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigenvalues));
        let rebuilt = &self.eigenvectors * d * self.eigenvectors.transpose();
        (h - rebuilt).norm() / h.norm().max(1.0)
    }

    /// `max |VᵀV − I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let gram = self.eigenvectors.transpose() * &self.eigenvectors;
        (gram - DMatrix::identity(self.dim(), self.dim())).amax()
    }

    fn check_site(&self, site: usize) {
        assert!(
            (1..=self.dim()).contains(&site),
            "site {site} outside 1..={}",
            self.dim()
        );
    }
}

pub fn spectral_decompose(h: &SingleExcitationHamiltonian) -> SpectralDecomposition {
    SpectralDecomposition::decompose(h.matrix())
}

/// `F(t) = ⟨target|e^{−itH}|source⟩`.
pub fn transfer_amplitude(
    h: &SingleExcitationHamiltonian,
    t: f64,
    source: usize,
    target: usize,
) -> Complex64 {
    spectral_decompose(h).amplitude(source, target, t)
}

/// `α|0̲⟩ + Σ β_n |n⟩`: the vacuum is a zero-energy eigenstate, so only `β` moves.
#[derive(Clone, Debug, PartialEq)]
pub struct ExcitationState {
    alpha: Complex64,
    beta: DVector<Complex64>,
}

impl ExcitationState {
    /// Fails unless `|α|² + Σ|β_n|² = 1` within `1e-12`.
    pub fn new(alpha: Complex64, beta: DVector<Complex64>) -> Result<Self> {
        let total = alpha.norm_sqr() + beta.norm_squared();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(total));
        }
        Ok(ExcitationState { alpha, beta })
    }

    /// The input qubit prepared in `α|0⟩ + β|1⟩` at `site` of an `n`-site network.
    pub fn loaded(sites: usize, site: usize, alpha: Complex64, beta: Complex64) -> Result<Self> {
        if site == 0 || site > sites {
            return Err(Error::InvalidSize(format!(
                "site {site} outside 1..={sites}"
            )));
        }
        let mut amplitudes = DVector::zeros(sites);
        amplitudes[site - 1] = beta;
        Self::new(alpha, amplitudes)
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> &DVector<Complex64> {
        &self.beta
    }

    pub fn norm_squared(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_squared()
    }
}

pub fn evolve_state(
    h: &SingleExcitationHamiltonian,
    state: &ExcitationState,
    t: f64,
) -> ExcitationState {
    ExcitationState {
        alpha: state.alpha,
        beta: spectral_decompose(h).evolve(&state.beta, t),
    }
}

/// End-to-end amplitude of the uniform 2- and 3-site chains:
/// `−i·sin t` and `−sin²(t/√2)`.
pub fn path_amplitude_closed_form(sites: usize, t: f64) -> Result<Complex64> {
    match sites {
        2 => Ok(MINUS_I * t.sin()),
        3 => {
            let s = (t * FRAC_1_SQRT_2).sin();
            Ok(Complex64::new(-s * s, 0.0))
        }
        _ => Err(Error::Unsupported(format!(
            "closed form exists only for 2- and 3-site paths, got {sites}"
        ))),
    }
}

/// Antipodal amplitude of a hypercube: the base path amplitude to the power `d`.
pub fn hypercube_amplitude(d: usize, links: usize, t: f64) -> Result<Complex64> {
    if !(1..=2).contains(&links) {
        return Err(Error::UnsupportedLinks(links));
    }
    if d == 0 {
        return Err(Error::InvalidSize(
            "hypercube dimension must be at least 1".into(),
        ));
    }
    Ok(path_amplitude_closed_form(links + 1, t)?.powu(d as u32))
}

/// End-to-end amplitude `[−i·sin(λt/2)]^{N−1}` of the engineered chain.
pub fn engineered_amplitude_closed_form(sites: usize, lambda: f64, t: f64) -> Result<Complex64> {
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
    Ok((MINUS_I * (0.5 * lambda * t).sin()).powu((sites - 1) as u32))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub time: f64,
    pub magnitude: f64,
}

/// Sampled transfer amplitudes with refined local maxima.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelitySeries {
    pub source: usize,
    pub target: usize,
    pub t_max: f64,
    pub times: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    /// Refined local maxima of `|F|`, ascending in time.
    pub maxima: Vec<Peak>,
    pub peak_time: f64,
    pub peak_magnitude: f64,
}

impl FidelitySeries {
    pub fn magnitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.amplitudes.iter().map(|z| z.norm())
    }

    /// CSV with columns `t, re_F, im_F, abs_F`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let to_io = |e: csv::Error| Error::Io(e.into());
        w.write_record(["t", "re_F", "im_F", "abs_F"])
            .map_err(to_io)?;
        for (t, z) in self.times.iter().zip(&self.amplitudes) {
            w.write_record([fmt17(*t), fmt17(z.re), fmt17(z.im), fmt17(z.norm())])
                .map_err(to_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("series serializes")
    }
}

/// Full double precision in scientific notation.
pub(crate) fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Scans `|F(t)|` on a uniform grid over `[0, t_max]` and refines every local
/// maximum with golden-section search.
pub fn fidelity_scan(
    h: &SingleExcitationHamiltonian,
    t_max: f64,
    samples: usize,
    source: usize,
    target: usize,
) -> Result<FidelitySeries> {
    scan_spectrum(&spectral_decompose(h), t_max, samples, source, target)
}

/// [`fidelity_scan`] on an existing decomposition.
///
/// Samples and refinements are computed independently per point, so the result
/// is bit-identical however rayon splits the work.
pub fn scan_spectrum(
    spectrum: &SpectralDecomposition,
    t_max: f64,
    samples: usize,
    source: usize,
    target: usize,
) -> Result<FidelitySeries> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidSize(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidSize(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    for site in [source, target] {
        if site == 0 || site > spectrum.dim() {
            return Err(Error::InvalidSize(format!(
                "site {site} outside 1..={}",
                spectrum.dim()
            )));
        }
    }
    let step = t_max / (samples - 1) as f64;
    let times: Vec<f64> = (0..samples)
        .map(|i| {
            if i + 1 == samples {
                t_max
            } else {
                i as f64 * step
            }
        })
        .collect();
    let amplitudes: Vec<Complex64> = times
        .par_iter()
        .map(|&t| spectrum.amplitude(source, target, t))
        .collect();
    let mags: Vec<f64> = amplitudes.iter().map(|z| z.norm()).collect();
    if let Some(i) = mags.iter().position(|m| !m.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite amplitude at t = {}",
            times[i]
        )));
    }

    let last = samples - 1;
    let candidates: Vec<usize> = (0..samples)
        .filter(|&i| match i {
            0 => mags[0] > mags[1],
            i if i == last => mags[last] >= mags[last - 1],
            i => mags[i] >= mags[i - 1] && mags[i] > mags[i + 1],
        })
        .collect();
    let magnitude = |t: f64| spectrum.amplitude(source, target, t).norm();
    let maxima: Vec<Peak> = candidates
        .par_iter()
        .map(|&i| {
            let lo = times[i.saturating_sub(1)];
            let hi = times[(i + 1).min(last)];
            let coarse = golden_section_max(magnitude, lo, hi, PEAK_TIME_TOLERANCE);
            let refined = polish_peak(
                coarse,
                lo,
                hi,
                |t| spectrum.squared_magnitude_slope(source, target, t),
                magnitude,
            );
            if refined.magnitude >= mags[i] {
                refined
            } else {
                Peak {
                    time: times[i],
                    magnitude: mags[i],
                }
            }
        })
        .collect();

    let sampled = times
        .iter()
        .zip(&mags)
        .map(|(&time, &magnitude)| Peak { time, magnitude });
    let peak_magnitude = maxima
        .iter()
        .copied()
        .chain(sampled.clone())
        .map(|p| p.magnitude)
        .fold(f64::NEG_INFINITY, f64::max);
    let peak_time = maxima
        .iter()
        .copied()
        .chain(sampled)
        .filter(|p| p.magnitude >= peak_magnitude - PEAK_TIE_TOLERANCE)
        .map(|p| p.time)
        .fold(f64::INFINITY, f64::min);

    Ok(FidelitySeries {
        source,
        target,
        t_max,
        times,
        amplitudes,
        maxima,
        peak_time,
        peak_magnitude,
    })
}

/// `|F|` is flat at a maximum, so comparing magnitudes pins the time down only
/// to about `√ε`. The slope of `|F|²` crosses zero there, which bisection
/// locates to rounding level.
fn polish_peak(
    coarse: Peak,
    lo: f64,
    hi: f64,
    slope: impl Fn(f64) -> f64,
    magnitude: impl Fn(f64) -> f64,
) -> Peak {
    let width = 1e-6 * coarse.time.abs().max(1.0);
    let (mut a, mut b) = ((coarse.time - width).max(lo), (coarse.time + width).min(hi));
    if !(slope(a) > 0.0 && slope(b) < 0.0) {
        return coarse;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if slope(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let time = 0.5 * (a + b);
    let value = magnitude(time);
    if value >= coarse.magnitude - 1e-14 {
        Peak {
            time,
            magnitude: value.max(coarse.magnitude),
        }
    } else {
        coarse
    }
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Peak {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [(mid, f(mid)), (c, fc), (d, fd), (lo, f(lo)), (hi, f(hi))]
        .into_iter()
        .fold(
            Peak {
                time: mid,
                magnitude: f64::NEG_INFINITY,
            },
            |best, (t, v)| {
                if v > best.magnitude {
                    Peak {
                        time: t,
                        magnitude: v,
                    }
                } else {
                    best
                }
            },
        )
}

/// `10·N/λ_eff`, with `λ_eff = (E_max − E_min)/(N − 1)`; an engineered chain
/// recovers its own `λ`.
pub fn default_scan_window(spectrum: &SpectralDecomposition) -> f64 {
    let n = spectrum.dim();
    let spread = spectrum.spread();
    if n < 2 || spread <= 0.0 {
        return 10.0;
    }
    10.0 * n as f64 * (n - 1) as f64 / spread
}

/// Grid size that resolves the fastest oscillation of `F` with 32 points per period.
pub fn default_samples(spectrum: &SpectralDecomposition, t_max: f64) -> usize {
    let periods = t_max * spectrum.spread() / (2.0 * PI);
    ((periods * 32.0).ceil() as usize).max(256) + 1
}

/// Couplings `J_n = ⟨col n|A|col n+1⟩` between uniform column superpositions.
pub fn column_space_couplings(g: &Graph, partition: &ColumnPartition) -> Result<CouplingChain> {
    partition.validate(g)?;
    let columns = partition.columns();
    let mut column_of = vec![0usize; g.vertex_count()];
    for (k, col) in columns.iter().enumerate() {
        for &v in col {
            column_of[v - 1] = k;
        }
    }
    let mut links = vec![0usize; columns.len().saturating_sub(1)];
    for &(u, v) in g.edges() {
        let lower = column_of[u - 1].min(column_of[v - 1]);
        links[lower] += 1;
    }
    let couplings = links
        .iter()
        .enumerate()
        .map(|(k, &count)| count as f64 / ((columns[k].len() * columns[k + 1].len()) as f64).sqrt())
        .collect();
    CouplingChain::new(couplings)
}

/// Worst-case discrepancies between graph evolution and the column chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ColumnEvolutionCheck {
    /// `max_t ‖ψ(t) − P_col ψ(t)‖`.
    pub leakage: f64,
    /// `max_t max_n |⟨col n|ψ(t)⟩ − φ_n(t)|` against the coupling chain.
    pub chain_deviation: f64,
    /// `max_t` of leakage plus chain deviation at the same time.
    pub max_deviation: f64,
}

/// Evolves `|col 1⟩` on the whole graph and compares it with the column chain.
pub fn column_space_evolution_check(
    g: &Graph,
    partition: &ColumnPartition,
    t_grid: &[f64],
) -> Result<ColumnEvolutionCheck> {
    let chain = column_space_couplings(g, partition)?;
    let graph_spec = SpectralDecomposition::decompose(&g.adjacency_matrix());
    let chain_spec = spectral_decompose(&chain_hamiltonian(&chain));
    let mut start = DVector::zeros(g.vertex_count());
    start[g.input_vertex() - 1] = Complex64::new(1.0, 0.0);
    let mut chain_start = DVector::zeros(chain.site_count());
    chain_start[0] = Complex64::new(1.0, 0.0);

    let mut check = ColumnEvolutionCheck {
        leakage: 0.0,
        chain_deviation: 0.0,
        max_deviation: 0.0,
    };
    for &t in t_grid {
        let psi = graph_spec.evolve(&start, t);
        let phi = chain_spec.evolve(&chain_start, t);
        let mut leak_sq = 0.0;
        let mut deviation = 0.0f64;
        for (k, col) in partition.columns().iter().enumerate() {
            let norm = (col.len() as f64).sqrt();
            let overlap: Complex64 = col.iter().map(|&v| psi[v - 1]).sum::<Complex64>() / norm;
            for &v in col {
                leak_sq += (psi[v - 1] - overlap / norm).norm_sqr();
            }
            deviation = deviation.max((overlap - phi[k]).norm());
        }
        let leak = leak_sq.sqrt();
        check.leakage = check.leakage.max(leak);
        check.chain_deviation = check.chain_deviation.max(deviation);
        check.max_deviation = check.max_deviation.max(leak + deviation);
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{column_partition, hypercube, path_graph};
    use crate::spin::{engineered_couplings, xx_subspace_hamiltonian};
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn path_h(n: usize) -> SingleExcitationHamiltonian {
        xx_subspace_hamiltonian(&path_graph(n).unwrap())
    }

    #[test]
    fn small_spectra() {
        let two = spectral_decompose(&path_h(2));
        assert!((two.eigenvalues()[0] + 1.0).abs() < 1e-15);
        assert!((two.eigenvalues()[1] - 1.0).abs() < 1e-15);

        let three = spectral_decompose(&path_h(3));
        let expected = [-SQRT_2, 0.0, SQRT_2];
        for (e, x) in three.eigenvalues().iter().zip(expected) {
            assert!((e - x).abs() < 1e-14);
        }

        let five = spectral_decompose(&path_h(5));
        let mut formula: Vec<f64> = (1..=5)
            .map(|k| -2.0 * (k as f64 * PI / 6.0).cos())
            .collect();
        formula.sort_by(f64::total_cmp);
        for (e, x) in five.eigenvalues().iter().zip(formula) {
            assert!((e - x).abs() < 1e-12);
        }
        assert!(five.reconstruction_error(path_h(5).matrix()) < 1e-14);
        assert!(five.orthogonality_error() < 1e-14);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            SpectralDecomposition::of_matrix(&m),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn amplitudes_of_short_paths() {
        assert!(transfer_amplitude(&path_h(4), 0.0, 1, 4).norm() < 1e-15);
        let f2 = transfer_amplitude(&path_h(2), FRAC_PI_2, 1, 2);
        assert!((f2 - MINUS_I).norm() < 1e-15);
        let f3 = transfer_amplitude(&path_h(3), PI / SQRT_2, 1, 3);
        assert!((f3 + 1.0).norm() < 1e-14);
    }

    #[test]
    fn state_evolution() {
        let h = path_h(2);
        let loaded =
            ExcitationState::loaded(2, 1, Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8))
                .unwrap();
        assert!((evolve_state(&h, &loaded, 0.0).beta() - loaded.beta()).norm() < 1e-15);

        let vacuum = ExcitationState::new(Complex64::new(1.0, 0.0), DVector::zeros(2)).unwrap();
        for t in [0.3, 7.0, -2.0] {
            assert_eq!(evolve_state(&h, &vacuum, t), vacuum);
        }

        let one = ExcitationState::loaded(2, 1, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
            .unwrap();
        let out = evolve_state(&h, &one, FRAC_PI_2);
        assert!(out.beta()[0].norm() < 1e-15);
        assert!((out.beta()[1] - MINUS_I).norm() < 1e-15);

        assert!(matches!(
            ExcitationState::new(
                Complex64::new(1.0, 0.0),
                DVector::from_element(2, Complex64::new(0.1, 0.0))
            ),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn closed_forms() {
        assert!(path_amplitude_closed_form(2, PI).unwrap().norm() < 1e-15);
        assert!((path_amplitude_closed_form(3, PI / SQRT_2).unwrap() + 1.0).norm() < 1e-15);
        assert!(matches!(
            path_amplitude_closed_form(4, 1.0),
            Err(Error::Unsupported(_))
        ));

        for d in 1..=6 {
            let z = hypercube_amplitude(d, 1, FRAC_PI_2).unwrap();
            assert!((z - MINUS_I.powu(d as u32)).norm() < 1e-14);
            let w = hypercube_amplitude(d, 2, PI / SQRT_2).unwrap();
            assert!((w - Complex64::new((-1f64).powi(d as i32), 0.0)).norm() < 1e-14);
        }
        assert!(matches!(
            hypercube_amplitude(2, 3, 1.0),
            Err(Error::UnsupportedLinks(3))
        ));

        for t in [0.0, 0.4, 1.3, 2.9] {
            let a = engineered_amplitude_closed_form(2, 2.0, t).unwrap();
            assert!((a - path_amplitude_closed_form(2, t).unwrap()).norm() < 1e-15);
        }
        for n in 2..20 {
            let lambda = 0.7 + n as f64 * 0.1;
            let z = engineered_amplitude_closed_form(n, lambda, PI / lambda).unwrap();
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hypercube_square_matches_product_rule() {
        let sq = xx_subspace_hamiltonian(&hypercube(2, 1).unwrap());
        let spec = spectral_decompose(&sq);
        for k in 0..50 {
            let t = 0.13 * k as f64;
            let direct = spec.amplitude(1, 4, t);
            assert!((direct - hypercube_amplitude(2, 1, t).unwrap()).norm() < 1e-13);
        }
    }

    #[test]
    fn scan_finds_two_site_peak() {
        let s = fidelity_scan(&path_h(2), PI, 101, 1, 2).unwrap();
        assert!((s.peak_time - FRAC_PI_2).abs() < 1e-9);
        assert!((s.peak_magnitude - 1.0).abs() < 1e-15);
        assert_eq!(s.times.len(), 101);
        assert_eq!(*s.times.last().unwrap(), PI);
        assert!(s.magnitudes().all(|m| m <= 1.0 + 1e-12));
        assert!(matches!(
            fidelity_scan(&path_h(2), 0.0, 10, 1, 2),
            Err(Error::InvalidSize(_))
        ));
        assert!(matches!(
            fidelity_scan(&path_h(2), 1.0, 1, 1, 2),
            Err(Error::InvalidSize(_))
        ));
    }

    #[test]
    fn scan_of_engineered_chain_peaks_at_pi_over_lambda() {
        let h = chain_hamiltonian(&engineered_couplings(10, 2.0).unwrap());
        let s = fidelity_scan(&h, 2.0 * PI, 2001, 1, 10).unwrap();
        // |F| = |sin t|^9 peaks at π/2 and 3π/2 equally; ties go to the earlier one.
        assert!((s.peak_time - FRAC_PI_2).abs() < 1e-9, "{}", s.peak_time);
        assert!(s.peak_magnitude > 1.0 - 1e-12);
    }

    #[test]
    fn golden_section_on_parabola() {
        let p = golden_section_max(|x| 1.0 - (x - 0.3).powi(2), 0.0, 1.0, 1e-12);
        assert!((p.time - 0.3).abs() < 1e-6);
        assert!((p.magnitude - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let s = fidelity_scan(&path_h(2), 1.0, 3, 1, 2).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,re_F,im_F,abs_F");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
    }

    #[test]
    fn column_couplings() {
        let cube = hypercube(3, 1).unwrap();
        let chain = column_space_couplings(&cube, &column_partition(&cube).unwrap()).unwrap();
        let expected = [3f64.sqrt(), 2.0, 3f64.sqrt()];
        assert!(chain
            .couplings()
            .iter()
            .zip(expected)
            .all(|(a, b)| (a - b).abs() < 1e-12));

        let cube5 = hypercube(5, 1).unwrap();
        let chain5 = column_space_couplings(&cube5, &column_partition(&cube5).unwrap()).unwrap();
        let fig = [5f64.sqrt(), 8f64.sqrt(), 3.0, 8f64.sqrt(), 5f64.sqrt()];
        assert!(chain5
            .couplings()
            .iter()
            .zip(fig)
            .all(|(a, b)| (a - b).abs() < 1e-12));

        let p = path_graph(6).unwrap();
        let chain_p = column_space_couplings(&p, &column_partition(&p).unwrap()).unwrap();
        assert_eq!(chain_p.couplings(), &[1.0; 5]);
    }

    #[test]
    fn path_column_check_is_exact() {
        let p = path_graph(7).unwrap();
        let grid: Vec<f64> = (0..20).map(|k| 0.37 * k as f64).collect();
        let check =
            column_space_evolution_check(&p, &column_partition(&p).unwrap(), &grid).unwrap();
        assert!(check.max_deviation < 1e-13, "{check:?}");
    }
}
