//! Certifying and refuting perfect state transfer.
//!
//! Two complementary checks: a scan for times where `|F(t)| ≈ 1`, and the
//! necessary condition that ratios of eigenvalue differences be rational.
//! Floating point cannot decide rationality, so ratios are tested against
//! fractions with bounded denominators and the verdict says exactly that.
//! Likewise "no PST" is only ever a statement about the scanned window.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fmt::Write as _;

use serde::Serialize;

use crate::dynamics::{
    default_samples, default_scan_window, scan_spectrum, spectral_decompose, SpectralDecomposition,
    PST_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::graph::graph_distance;
use crate::spin::{CouplingNetwork, SingleExcitationHamiltonian};

/// Eigenvector weights below this cannot affect the transfer amplitude.
pub const WEIGHT_THRESHOLD: f64 = 1e-12;

/// Above this many distinct gaps, ratios are taken against the smallest gap only.
const PAIRWISE_GAP_LIMIT: usize = 64;

/// Best approximation `p/q` of a real number with `q ≤ q_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RationalApproximation {
    pub numerator: i64,
    pub denominator: u64,
    /// `|q·x − p|`.
    pub residual: f64,
}

/// Partial quotients of the continued fraction of `x`, exact for the binary
/// value of `x`, at most `max_terms` of them.
pub fn continued_fraction(x: f64, max_terms: usize) -> Vec<i128> {
    let Some((mut num, mut den)) = dyadic(x) else {
        return Vec::new();
    };
    let mut terms = Vec::new();
    while den != 0 && terms.len() < max_terms {
        let a = num.div_euclid(den);
        terms.push(a);
        let rem = num - a * den;
        num = den;
        den = rem;
    }
    terms
}

/// `x` as `num / den` exactly, when both fit in `i128`.
fn dyadic(x: f64) -> Option<(i128, i128)> {
    if !x.is_finite() {
        return None;
    }
    let bits = x.to_bits();
    let negative = bits >> 63 == 1;
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut e) = if exp == 0 {
        (frac as i128, -1074)
    } else {
        ((frac | (1u64 << 52)) as i128, exp - 1075)
    };
    if mant == 0 {
        return Some((0, 1));
    }
    while e < 0 && mant & 1 == 0 {
        mant >>= 1;
        e += 1;
    }
    let (num, den) = if e >= 0 {
        if e > 70 {
            return None;
        }
        (mant << e, 1)
    } else {
        if e < -120 {
            return None;
        }
        (mant, 1i128 << -e)
    };
    Some((if negative { -num } else { num }, den))
}

/// Walks the continued-fraction convergents of `x` (its best approximations
/// of the second kind) and returns the first with `|q·x − p| < tol`, or the
/// last with `q ≤ q_max` when none gets that close.
pub fn best_rational_approximation(x: f64, q_max: u64, tol: f64) -> RationalApproximation {
    let residual = |p: i128, q: i128| (q as f64).mul_add(x, -(p as f64)).abs();
    // (p, q) is the latest convergent, seeded with p₋₁/q₋₁ = 1/0 and p₋₂/q₋₂ = 0/1.
    let (mut p_prev, mut q_prev, mut p, mut q) = (0i128, 1i128, 1i128, 0i128);
    for a in continued_fraction(x, 128) {
        let (p_next, q_next) = (a * p + p_prev, a * q + q_prev);
        if q_next > q_max as i128 {
            break;
        }
        (p_prev, q_prev, p, q) = (p, q, p_next, q_next);
        if residual(p, q) < tol {
            break;
        }
    }
    if q == 0 {
        // Not even the integer part fits, which happens only for non-finite x.
        return RationalApproximation {
            numerator: 0,
            denominator: 1,
            residual: f64::INFINITY,
        };
    }
    RationalApproximation {
        numerator: p as i64,
        denominator: q as u64,
        residual: residual(p, q),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    AllRationalWithinBound,
    SomeIrrationalBeyondBound,
}

/// One ratio `larger_gap / smaller_gap` of eigenvalue differences.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapRatio {
    pub larger_gap: f64,
    pub smaller_gap: f64,
    pub ratio: f64,
    pub approximation: RationalApproximation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RationalityReport {
    pub q_max: u64,
    pub tolerance: f64,
    /// Distinct eigenvalues that entered the check.
    pub eigenvalues: Vec<f64>,
    pub pairs: Vec<GapRatio>,
    pub verdict: Verdict,
}

/// Tests whether all ratios of differences between the given eigenvalues are
/// within `tol` (as `|q·r − p|`) of a fraction with denominator at most `q_max`.
///
/// Eigenvalues closer than `1e-9` (relative to the largest magnitude) are
/// merged first. With at most 64 distinct gaps every pair of gaps is reported;
/// beyond that each gap is compared with the smallest one, which decides the
/// same question.
pub fn rationality_check(eigenvalues: &[f64], q_max: u64, tol: f64) -> Result<RationalityReport> {
    if q_max == 0 {
        return Err(Error::InvalidSize("q_max must be at least 1".into()));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidSize(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let distinct = merge_close(eigenvalues.to_vec());
    if distinct.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least 2 distinct eigenvalues, got {}",
            distinct.len()
        )));
    }
    let mut gaps = Vec::new();
    for (i, a) in distinct.iter().enumerate() {
        for b in &distinct[i + 1..] {
            gaps.push(b - a);
        }
    }
    let gaps = merge_close(gaps);

    let ratio_of = |larger: f64, smaller: f64| {
        let ratio = larger / smaller;
        GapRatio {
            larger_gap: larger,
            smaller_gap: smaller,
            ratio,
            approximation: best_rational_approximation(ratio, q_max, tol),
        }
    };
    let mut pairs = Vec::new();
    if gaps.len() <= PAIRWISE_GAP_LIMIT {
        for (i, &small) in gaps.iter().enumerate() {
            for &large in &gaps[i + 1..] {
                pairs.push(ratio_of(large, small));
            }
        }
    } else {
        pairs.extend(gaps[1..].iter().map(|&large| ratio_of(large, gaps[0])));
    }
    let verdict = if pairs.iter().all(|p| p.approximation.residual < tol) {
        Verdict::AllRationalWithinBound
    } else {
        Verdict::SomeIrrationalBeyondBound
    };
    Ok(RationalityReport {
        q_max,
        tolerance: tol,
        eigenvalues: distinct,
        pairs,
        verdict,
    })
}

/// Sorts and merges values closer than `1e-9 · max(1, max|v|)`, keeping the mean.
fn merge_close(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for v in values {
        match groups.last_mut() {
            Some((sum, count)) if v - *sum / *count as f64 <= tol => {
                *sum += v;
                *count += 1;
            }
            _ => groups.push((v, 1)),
        }
    }
    groups.into_iter().map(|(s, c)| s / c as f64).collect()
}

/// Eigenvalues whose eigenspaces carry weight between `source` and `target`.
///
/// Degenerate eigenvalues are grouped first, since only the summed weight of
/// an eigenspace is basis independent.
pub fn relevant_eigenvalues(
    spectrum: &SpectralDecomposition,
    source: usize,
    target: usize,
) -> Vec<f64> {
    let weights = spectrum.transition_weights(source, target);
    let values = spectrum.eigenvalues();
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    let mut clusters: Vec<(f64, usize, f64)> = Vec::new();
    for (&e, &w) in values.iter().zip(&weights) {
        match clusters.last_mut() {
            Some((sum, count, weight)) if e - *sum / *count as f64 <= tol => {
                *sum += e;
                *count += 1;
                *weight += w;
            }
            _ => clusters.push((e, 1, w)),
        }
    }
    clusters
        .into_iter()
        .filter(|(_, _, w)| w.abs() > WEIGHT_THRESHOLD)
        .map(|(s, c, _)| s / c as f64)
        .collect()
}

/// Refined times in `[0, t_max]` where `|F| ≥ 1 − tol`, ascending.
pub fn find_pst_times(
    h: &SingleExcitationHamiltonian,
    source: usize,
    target: usize,
    t_max: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let spectrum = spectral_decompose(h);
    let samples = default_samples(&spectrum, t_max);
    let series = scan_spectrum(&spectrum, t_max, samples, source, target)?;
    Ok(series
        .maxima
        .iter()
        .filter(|p| p.magnitude >= 1.0 - tol)
        .map(|p| p.time)
        .collect())
}

/// Settings for [`transfer_report`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferOptions {
    /// Scan window; `None` picks [`default_scan_window`].
    pub t_max: Option<f64>,
    /// Grid size; `None` picks [`default_samples`].
    pub samples: Option<usize>,
    pub pst_tolerance: f64,
    pub q_max: u64,
    pub rational_tolerance: f64,
}

impl Default for TransferOptions {
    fn default() -> Self {
        TransferOptions {
            t_max: None,
            samples: None,
            pst_tolerance: PST_THRESHOLD,
            q_max: 1_000_000,
            rational_tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkSummary {
    pub description: String,
    pub sites: usize,
    pub bonds: usize,
    pub input: usize,
    pub output: usize,
}

/// Everything known about transfer from input to output within a window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferReport {
    pub network: NetworkSummary,
    pub distance: usize,
    pub t_max: f64,
    pub samples: usize,
    pub pst_tolerance: f64,
    pub pst_times: Vec<f64>,
    pub peak_time: f64,
    pub peak_magnitude: f64,
    /// `None` when fewer than two eigenvalues take part in the transfer.
    pub rationality: Option<RationalityReport>,
}

/// Scans for PST between `input` and `output` and runs the rationality check
/// on the eigenvalues that take part.
pub fn transfer_report(
    description: &str,
    network: &CouplingNetwork,
    input: usize,
    output: usize,
    options: &TransferOptions,
) -> Result<TransferReport> {
    let topology = network.topology();
    let distance = graph_distance(&topology, input, output)?;
    let spectrum = spectral_decompose(&network.subspace_hamiltonian());
    let t_max = options
        .t_max
        .unwrap_or_else(|| default_scan_window(&spectrum));
    let samples = options
        .samples
        .unwrap_or_else(|| default_samples(&spectrum, t_max));
    let series = scan_spectrum(&spectrum, t_max, samples, input, output)?;
    let pst_times = series
        .maxima
        .iter()
        .filter(|p| p.magnitude >= 1.0 - options.pst_tolerance)
        .map(|p| p.time)
        .collect();
    let rationality = match rationality_check(
        &relevant_eigenvalues(&spectrum, input, output),
        options.q_max,
        options.rational_tolerance,
    ) {
        Ok(report) => Some(report),
        Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(TransferReport {
        network: NetworkSummary {
            description: description.to_string(),
            sites: network.sites(),
            bonds: network.bonds().len(),
            input,
            output,
        },
        distance,
        t_max,
        samples,
        pst_tolerance: options.pst_tolerance,
        pst_times,
        peak_time: series.peak_time,
        peak_magnitude: series.peak_magnitude,
        rationality,
    })
}

impl TransferReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable summary.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let mut row = |k: &str, v: String| {
            let _ = writeln!(out, "{k:<22} {v}");
        };
        row("network", self.network.description.clone());
        row("sites", self.network.sites.to_string());
        row("bonds", self.network.bonds.to_string());
        row(
            "input -> output",
            format!("{} -> {}", self.network.input, self.network.output),
        );
        row("distance", self.distance.to_string());
        row(
            "scan window",
            format!("[0, {:.6}] with {} samples", self.t_max, self.samples),
        );
        row(
            "peak |F|",
            format!("{:.15} at t = {:.12}", self.peak_magnitude, self.peak_time),
        );
        let times = if self.pst_times.is_empty() {
            "none in window".to_string()
        } else {
            self.pst_times
                .iter()
                .map(|t| format!("{t:.12}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        row(
            &format!("PST times (tol {:.0e})", self.pst_tolerance),
            times,
        );
        match &self.rationality {
            Some(r) => {
                let verdict = match r.verdict {
                    Verdict::AllRationalWithinBound => "all-rational-within-bound",
                    Verdict::SomeIrrationalBeyondBound => "some-irrational-beyond-bound",
                };
                row(
                    "rationality",
                    format!(
                        "{verdict} (q <= {}, tol {:.0e}, {} ratios)",
                        r.q_max,
                        r.tolerance,
                        r.pairs.len()
                    ),
                );
            }
            None => row("rationality", "not applicable".into()),
        }
        out
    }
}

/// A network that achieves a transfer distance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Construction {
    pub family: String,
    pub dimension: usize,
    pub sites: u64,
    pub distance: usize,
    pub transfer_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceReport {
    pub qubit_budget: u64,
    /// Identical couplings: the best one- or two-link hypercube that fits.
    pub uniform: Construction,
    /// `2·log₃(budget)`, the two-link hypercube distance bound.
    pub uniform_bound: f64,
    /// Engineered couplings: the full chain.
    pub engineered: Construction,
}

/// Longest PST distance reachable with `qubit_budget` qubits, with identical
/// couplings and with engineered couplings.
pub fn communication_distance_report(qubit_budget: u64) -> Result<DistanceReport> {
    if qubit_budget < 2 {
        return Err(Error::InvalidSize(format!(
            "need at least 2 qubits, got {qubit_budget}"
        )));
    }
    let largest_power = |base: u64| {
        let (mut d, mut sites) = (0usize, 1u64);
        while let Some(next) = sites.checked_mul(base).filter(|&s| s <= qubit_budget) {
            sites = next;
            d += 1;
        }
        (d, sites)
    };
    let (d1, s1) = largest_power(2);
    let (d2, s2) = largest_power(3);
    let uniform = if d2 >= 1 && 2 * d2 >= d1 {
        Construction {
            family: "two-link hypercube".into(),
            dimension: d2,
            sites: s2,
            distance: 2 * d2,
            transfer_time: PI / SQRT_2,
        }
    } else {
        Construction {
            family: "one-link hypercube".into(),
            dimension: d1,
            sites: s1,
            distance: d1,
            transfer_time: FRAC_PI_2,
        }
    };
    Ok(DistanceReport {
        qubit_budget,
        uniform,
        uniform_bound: 2.0 * (qubit_budget as f64).ln() / 3f64.ln(),
        engineered: Construction {
            family: "engineered chain".into(),
            dimension: 1,
            sites: qubit_budget,
            distance: (qubit_budget - 1) as usize,
            transfer_time: FRAC_PI_2,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::path_graph;
    use crate::spin::{chain_hamiltonian, engineered_couplings, xx_subspace_hamiltonian};

    fn path_eigenvalues(n: usize) -> Vec<f64> {
        (1..=n)
            .map(|k| -2.0 * (k as f64 * PI / (n + 1) as f64).cos())
            .collect()
    }

    #[test]
    fn continued_fractions() {
        assert_eq!(continued_fraction(0.75, 10), vec![0, 1, 3]);
        assert_eq!(continued_fraction(2.0, 10), vec![2]);
        assert_eq!(continued_fraction(-1.5, 10), vec![-2, 2]);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let cf = continued_fraction(golden, 30);
        assert!(cf.iter().all(|&a| a == 1), "{cf:?}");
        let sqrt2 = continued_fraction(SQRT_2, 15);
        assert_eq!(sqrt2[0], 1);
        assert!(sqrt2[1..].iter().all(|&a| a == 2));
    }

    #[test]
    fn approximations() {
        let a = best_rational_approximation(0.75, 100, 1e-12);
        assert_eq!((a.numerator, a.denominator), (3, 4));
        assert_eq!(a.residual, 0.0);

        let pi = best_rational_approximation(PI, 1000, 1e-12);
        assert_eq!((pi.numerator, pi.denominator), (355, 113));

        // Golden ratio: |qφ − p| ≈ 1/(√5·q), never below 1e-9 for q ≤ 10⁶.
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let g = best_rational_approximation(golden, 1_000_000, 1e-9);
        assert!(g.denominator <= 1_000_000);
        assert!(g.residual > 1e-7, "{g:?}");
    }

    #[test]
    fn short_paths_are_rational() {
        let two = rationality_check(&path_eigenvalues(2), 1_000_000, 1e-9).unwrap();
        assert!(two.pairs.is_empty());
        assert_eq!(two.verdict, Verdict::AllRationalWithinBound);

        let three = rationality_check(&path_eigenvalues(3), 1_000_000, 1e-9).unwrap();
        assert_eq!(three.verdict, Verdict::AllRationalWithinBound);
        // Gaps √2 and 2√2.
        assert_eq!(three.pairs.len(), 1);
        assert_eq!(three.pairs[0].approximation.numerator, 2);
        assert_eq!(three.pairs[0].approximation.denominator, 1);
    }

    #[test]
    fn longer_paths_fail() {
        for n in [4, 5] {
            let r = rationality_check(&path_eigenvalues(n), 1_000_000, 1e-9).unwrap();
            assert_eq!(r.verdict, Verdict::SomeIrrationalBeyondBound, "n={n}");
        }
    }

    #[test]
    fn degenerate_and_invalid_input() {
        assert!(matches!(
            rationality_check(&[1.0], 10, 1e-9),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            rationality_check(&[1.0, 1.0 + 1e-13], 10, 1e-9),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            rationality_check(&[0.0, 1.0], 0, 1e-9),
            Err(Error::InvalidSize(_))
        ));
    }

    #[test]
    fn dark_eigenvalues_are_dropped() {
        // Square 1-2-4-3-1 from the product of two edges; eigenvalues −2, 0, 0, 2.
        let sq = crate::graph::hypercube(2, 1).unwrap();
        let spec = spectral_decompose(&xx_subspace_hamiltonian(&sq));
        let rel = relevant_eigenvalues(&spec, 1, 4);
        assert_eq!(rel.len(), 3);
        assert!(
            (rel[0] + 2.0).abs() < 1e-12 && rel[1].abs() < 1e-12 && (rel[2] - 2.0).abs() < 1e-12
        );
    }

    #[test]
    fn pst_times_of_two_site_chain() {
        let h = xx_subspace_hamiltonian(&path_graph(2).unwrap());
        let times = find_pst_times(&h, 1, 2, 4.0 * PI, 1e-9).unwrap();
        let expected = [0.5, 1.5, 2.5, 3.5].map(|k| k * PI);
        assert_eq!(times.len(), 4);
        for (t, e) in times.iter().zip(expected) {
            assert!((t - e).abs() < 1e-9);
        }
    }

    #[test]
    fn engineered_seven_transfers_at_pi_over_lambda() {
        let h = chain_hamiltonian(&engineered_couplings(7, 2.0).unwrap());
        let times = find_pst_times(&h, 1, 7, 2.0 * PI, 1e-9).unwrap();
        assert!(
            times.iter().any(|t| (t - FRAC_PI_2).abs() < 1e-9),
            "{times:?}"
        );
    }

    #[test]
    fn five_site_path_has_no_pst_in_window() {
        let h = xx_subspace_hamiltonian(&path_graph(5).unwrap());
        assert!(find_pst_times(&h, 1, 5, 50.0, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn distances_for_budgets() {
        let r27 = communication_distance_report(27).unwrap();
        assert_eq!(r27.uniform.family, "two-link hypercube");
        assert_eq!((r27.uniform.dimension, r27.uniform.distance), (3, 6));
        assert!((r27.uniform_bound - 6.0).abs() < 1e-12);
        assert_eq!(r27.engineered.distance, 26);

        let r2 = communication_distance_report(2).unwrap();
        assert_eq!((r2.uniform.distance, r2.engineered.distance), (1, 1));

        let r9 = communication_distance_report(9).unwrap();
        assert_eq!((r9.uniform.dimension, r9.uniform.distance), (2, 4));

        assert!(communication_distance_report(1).is_err());
    }

    #[test]
    fn report_for_three_site_path() {
        let g = path_graph(3).unwrap();
        let r = transfer_report("path 3", &(&g).into(), 1, 3, &TransferOptions::default()).unwrap();
        assert_eq!(r.distance, 2);
        assert!((r.pst_times[0] - PI / SQRT_2).abs() < 1e-9);
        assert_eq!(
            r.rationality.as_ref().unwrap().verdict,
            Verdict::AllRationalWithinBound
        );
        assert!(r.to_table().contains("all-rational-within-bound"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["rationality"]["verdict"], "all-rational-within-bound");
    }
}
