//! Continuous-time classical random walks on the same graphs.
//!
//! Mean hitting times come from one dense linear solve. Hypercubes are
//! lumped first: by BFS column for the one-link family, or by how many
//! coordinates sit at each path position for one- and two-link families.

use std::collections::{HashMap, VecDeque};
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ColumnPartition, Graph};

/// How transition rates are assigned to edges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RateConvention {
    /// Each vertex is left at total rate 1 towards a uniformly chosen
    /// neighbour: `L = D⁻¹A − I`.
    #[default]
    PerVertex,
    /// Every edge carries rate 1 in each direction: `L = A − D`.
    PerEdge,
}

/// Generator `L` of a continuous-time Markov chain: off-diagonal rates, rows
/// summing to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkGenerator {
    matrix: DMatrix<f64>,
}

impl WalkGenerator {
    /// Checks non-negative rates and zero row sums (within `1e-12` per unit rate).
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidSize(format!(
                "generator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for (i, row) in matrix.row_iter().enumerate() {
            let mut sum = 0.0;
            let mut scale = 0.0f64;
            for (j, &rate) in row.iter().enumerate() {
                if i != j && rate < 0.0 {
                    return Err(Error::InvalidGraph(format!(
                        "negative rate {rate} from state {} to {}",
                        i + 1,
                        j + 1
                    )));
                }
                sum += rate;
                scale = scale.max(rate.abs());
            }
            if sum.abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::InvalidGraph(format!(
                    "row {} sums to {sum:e}",
                    i + 1
                )));
            }
        }
        Ok(WalkGenerator { matrix })
    }

    /// The walk on `g` under `convention`.
    pub fn of_graph(g: &Graph, convention: RateConvention) -> Self {
        let n = g.vertex_count();
        let mut m = DMatrix::zeros(n, n);
        for v in 1..=n {
            let rate = match convention {
                RateConvention::PerVertex if g.degree(v) > 0 => 1.0 / g.degree(v) as f64,
                RateConvention::PerVertex => 0.0,
                RateConvention::PerEdge => 1.0,
            };
            for &u in g.neighbors(v) {
                m[(v - 1, u - 1)] = rate;
            }
            m[(v - 1, v - 1)] = -rate * g.degree(v) as f64;
        }
        WalkGenerator { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Largest `|row sum|`.
    pub fn row_sum_error(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| r.sum().abs())
            .fold(0.0, f64::max)
    }

    /// Expected time to first reach `target` from every state (1-based),
    /// `f64::INFINITY` for states that cannot reach it.
    pub fn hitting_times(&self, target: usize) -> Result<Vec<f64>> {
        let n = self.dim();
        if target == 0 || target > n {
            return Err(Error::InvalidGraph(format!(
                "state {target} outside 1..={n}"
            )));
        }
        let t = target - 1;
        // States that can reach the target, found backwards along positive rates.
        let mut reaches = vec![false; n];
        reaches[t] = true;
        let mut queue = VecDeque::from([t]);
        while let Some(v) = queue.pop_front() {
            for (u, reached) in reaches.iter_mut().enumerate() {
                if !*reached && u != v && self.matrix[(u, v)] > 0.0 {
                    *reached = true;
                    queue.push_back(u);
                }
            }
        }
        let unknowns: Vec<usize> = (0..n).filter(|&v| v != t && reaches[v]).collect();
        for &v in &unknowns {
            if let Some(u) = (0..n).find(|&u| !reaches[u] && self.matrix[(v, u)] > 0.0) {
                return Err(Error::Unsupported(format!(
                    "state {} may escape to state {} and never hit {target}",
                    v + 1,
                    u + 1
                )));
            }
        }
        let index: HashMap<usize, usize> =
            unknowns.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let k = unknowns.len();
        let mut system = DMatrix::zeros(k, k);
        for (row, &v) in unknowns.iter().enumerate() {
            for (&u, &col) in &index {
                system[(row, col)] = self.matrix[(v, u)];
            }
        }
        let rhs = DVector::from_element(k, -1.0);
        let solution = if k == 0 {
            DVector::zeros(0)
        } else {
            system
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Numerical("hitting-time system is singular".into()))?
        };
        if solution.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(
                "hitting-time solve produced non-finite values".into(),
            ));
        }
        let mut out = vec![f64::INFINITY; n];
        out[t] = 0.0;
        for (&v, &h) in unknowns.iter().zip(solution.iter()) {
            out[v] = h;
        }
        Ok(out)
    }

    /// Expected time from `source` to first reach `target` (1-based).
    pub fn mean_hitting_time(&self, source: usize, target: usize) -> Result<f64> {
        if source == 0 || source > self.dim() {
            return Err(Error::InvalidGraph(format!(
                "state {source} outside 1..={}",
                self.dim()
            )));
        }
        let h = self.hitting_times(target)?[source - 1];
        if h.is_infinite() {
            return Err(Error::Unreachable {
                from: source,
                to: target,
            });
        }
        Ok(h)
    }
}

/// Mean hitting time under the default [`RateConvention::PerVertex`].
pub fn mean_hitting_time(g: &Graph, source: usize, target: usize) -> Result<f64> {
    mean_hitting_time_with(g, source, target, RateConvention::default())
}

pub fn mean_hitting_time_with(
    g: &Graph,
    source: usize,
    target: usize,
    convention: RateConvention,
) -> Result<f64> {
    WalkGenerator::of_graph(g, convention).mean_hitting_time(source, target)
}

/// The walk lumped onto columns: a birth–death chain on column indices.
///
/// Lumping is exact when every vertex of a column has the same rates into the
/// neighbouring columns, which is checked.
pub fn lumped_generator(
    g: &Graph,
    partition: &ColumnPartition,
    convention: RateConvention,
) -> Result<WalkGenerator> {
    partition.validate(g)?;
    let full = WalkGenerator::of_graph(g, convention);
    let columns = partition.columns();
    let mut column_of = vec![0; g.vertex_count()];
    for (c, col) in columns.iter().enumerate() {
        for &v in col {
            column_of[v - 1] = c;
        }
    }
    let k = columns.len();
    let mut m = DMatrix::zeros(k, k);
    for (c, col) in columns.iter().enumerate() {
        let rates_of = |v: usize| {
            let mut rates = vec![0.0; k];
            for &u in g.neighbors(v) {
                rates[column_of[u - 1]] += full.matrix[(v - 1, u - 1)];
            }
            rates
        };
        let reference = rates_of(col[0]);
        for &v in &col[1..] {
            let rates = rates_of(v);
            if rates
                .iter()
                .zip(&reference)
                .any(|(a, b)| (a - b).abs() > 1e-12)
            {
                return Err(Error::NotInFamily(format!(
                    "vertices {} and {v} of column {} leave at different rates",
                    col[0],
                    c + 1
                )));
            }
        }
        for (d, &r) in reference.iter().enumerate() {
            if d != c {
                m[(c, d)] = r;
            }
        }
        m[(c, c)] = -reference
            .iter()
            .enumerate()
            .filter(|&(d, _)| d != c)
            .map(|(_, r)| r)
            .sum::<f64>();
    }
    WalkGenerator::new(m)
}

/// A hypercube walk lumped by occupation profile.
#[derive(Clone, Debug, PartialEq)]
pub struct LumpedWalk {
    /// `profiles[s][p]` is the number of coordinates at path position `p`.
    pub profiles: Vec<Vec<usize>>,
    pub generator: WalkGenerator,
}

impl LumpedWalk {
    /// Hitting time from the all-zero corner to the opposite corner.
    pub fn hitting_time(&self) -> Result<f64> {
        let last = self.generator.dim();
        self.generator.mean_hitting_time(1, last)
    }
}

/// Lumps the walk on `hypercube(d, links)` by the number of coordinates at
/// each position of the factor path.
///
/// States are ordered by distance from the input corner, so the input is state
/// 1 and the output corner is the last state. For one link this is the column
/// chain.
pub fn hypercube_lumped(d: usize, links: usize, convention: RateConvention) -> Result<LumpedWalk> {
    if !(1..=2).contains(&links) {
        return Err(Error::UnsupportedLinks(links));
    }
    if d == 0 {
        return Err(Error::InvalidSize(
            "hypercube dimension must be at least 1".into(),
        ));
    }
    let m = links + 1;
    let mut profiles = Vec::new();
    compositions(d, m, &mut vec![0; m], 0, &mut profiles);
    let distance = |c: &Vec<usize>| c.iter().enumerate().map(|(p, n)| p * n).sum::<usize>();
    profiles.sort_by(|a, b| distance(a).cmp(&distance(b)).then_with(|| b.cmp(a)));
    let index: HashMap<Vec<usize>, usize> = profiles
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();

    let path_degree = |p: usize| if p == 0 || p == m - 1 { 1 } else { 2 };
    let mut gen = DMatrix::zeros(profiles.len(), profiles.len());
    for (s, c) in profiles.iter().enumerate() {
        let degree: usize = c.iter().enumerate().map(|(p, n)| n * path_degree(p)).sum();
        let unit = match convention {
            RateConvention::PerVertex => 1.0 / degree as f64,
            RateConvention::PerEdge => 1.0,
        };
        let mut out = 0.0;
        for p in 0..m {
            if c[p] == 0 {
                continue;
            }
            for q in [p.wrapping_sub(1), p + 1] {
                if q >= m {
                    continue;
                }
                let mut next = c.clone();
                next[p] -= 1;
                next[q] += 1;
                let rate = c[p] as f64 * unit;
                gen[(s, index[&next])] += rate;
                out += rate;
            }
        }
        gen[(s, s)] = -out;
    }
    Ok(LumpedWalk {
        profiles,
        generator: WalkGenerator::new(gen)?,
    })
}

fn compositions(
    total: usize,
    parts: usize,
    current: &mut Vec<usize>,
    at: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if at + 1 == parts {
        current[at] = total;
        out.push(current.clone());
        return;
    }
    for k in (0..=total).rev() {
        current[at] = k;
        compositions(total - k, parts, current, at + 1, out);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HittingRow {
    pub d: usize,
    pub sites: u128,
    pub hitting: f64,
    /// `hitting(d) / hitting(d − 1)`; absent for the first row.
    pub ratio: Option<f64>,
}

/// Corner-to-corner hitting times of a hypercube family as `d` grows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HittingProfile {
    pub links: usize,
    pub convention: RateConvention,
    pub rows: Vec<HittingRow>,
    /// Limit of the ratios: 2 for one link, 3 for two.
    pub target_ratio: f64,
    /// Smallest `d` from which `|ratio − target_ratio|` strictly decreases
    /// through the end of the profile (needs at least two ratios).
    pub monotone_from: Option<usize>,
    /// The quantum transfer time on the same family, the same for every `d`.
    pub quantum_transfer_time: f64,
}

impl HittingProfile {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let to_io = |e: csv::Error| Error::Io(e.into());
        w.write_record(["d", "sites", "hitting", "ratio"])
            .map_err(to_io)?;
        for r in &self.rows {
            w.write_record([
                r.d.to_string(),
                r.sites.to_string(),
                format!("{:.16e}", r.hitting),
                r.ratio.map(|x| format!("{x:.16e}")).unwrap_or_default(),
            ])
            .map_err(to_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }
}

/// Hitting profile for `d = 1..=d_max` under the default convention.
pub fn hitting_growth_profile(d_max: usize, links: usize) -> Result<HittingProfile> {
    hitting_growth_profile_with(d_max, links, RateConvention::default())
}

pub fn hitting_growth_profile_with(
    d_max: usize,
    links: usize,
    convention: RateConvention,
) -> Result<HittingProfile> {
    if !(1..=2).contains(&links) {
        return Err(Error::UnsupportedLinks(links));
    }
    if d_max == 0 {
        return Err(Error::InvalidSize("d_max must be at least 1".into()));
    }
    let hitting = (1..=d_max)
        .into_par_iter()
        .map(|d| hypercube_lumped(d, links, convention)?.hitting_time())
        .collect::<Result<Vec<f64>>>()?;
    let base = (links + 1) as u128;
    let rows: Vec<HittingRow> = hitting
        .iter()
        .enumerate()
        .map(|(k, &h)| HittingRow {
            d: k + 1,
            sites: base.pow(k as u32 + 1),
            hitting: h,
            ratio: (k > 0).then(|| h / hitting[k - 1]),
        })
        .collect();
    let target_ratio = base as f64;
    let gaps: Vec<(usize, f64)> = rows
        .iter()
        .filter_map(|r| r.ratio.map(|x| (r.d, (x - target_ratio).abs())))
        .collect();
    let mut monotone_from = None;
    if gaps.len() >= 2 {
        let mut start = gaps.len() - 1;
        while start > 0 && gaps[start - 1].1 > gaps[start].1 {
            start -= 1;
        }
        if start < gaps.len() - 1 {
            monotone_from = Some(gaps[start].0);
        }
    }
    let quantum_transfer_time = match links {
        1 => std::f64::consts::FRAC_PI_2,
        _ => std::f64::consts::PI / std::f64::consts::SQRT_2,
    };
    Ok(HittingProfile {
        links,
        convention,
        rows,
        target_ratio,
        monotone_from,
        quantum_transfer_time,
    })
}
