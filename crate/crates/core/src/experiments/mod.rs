//! Random instances and the two simulation campaigns: the greedy ordinal guarantee as
//! a fraction of the proportional share, and bidirectional against unidirectional
//! bag-filling with individual or common thresholds.
//!
//! Every trial gets its own seed drawn from a ChaCha stream keyed by its cell, so
//! results do not depend on the number of worker threads.

mod svg;

pub use svg::render_svg;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covering::{bag_filling, cover_share, BagFillingOracle, CoverResult, FillDirection};
use crate::error::{Error, Result};
use crate::instance::{order_instance, Instance};
use crate::lone_divider::ordinal_d;
use crate::mms::row_greedy_lower_bound;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Distribution {
    /// Integers in `[lo, hi]`.
    Uniform { lo: u64, hi: u64 },
    /// Number of trials up to the first success with probability `1/mean`.
    Geometric { mean: u64 },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Distribution::Uniform { lo, hi } if lo > hi => {
                Err(Error::InvalidParameter(format!("uniform range [{lo}, {hi}] is empty")))
            }
            Distribution::Geometric { mean: 0 } => Err(Error::InvalidParameter("geometric mean must be at least 1".into())),
            _ => Ok(()),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> u64 {
        match *self {
            Distribution::Uniform { lo, hi } => rng.random_range(lo..=hi),
            Distribution::Geometric { mean } => {
                let g = Geometric::new(1.0 / mean as f64).expect("mean >= 1");
                g.sample(rng) + 1
            }
        }
    }
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    /// `uniform:LO:HI` or `geometric:MEAN`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse distribution {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.parse::<u64>().map_err(|_| bad());
        let dist = match parts.as_slice() {
            ["uniform", lo, hi] => Distribution::Uniform { lo: num(lo)?, hi: num(hi)? },
            ["geometric", mean] => Distribution::Geometric { mean: num(mean)? },
            _ => return Err(bad()),
        };
        dist.validate()?;
        Ok(dist)
    }
}

impl std::fmt::Display for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Distribution::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
            Distribution::Geometric { mean } => write!(f, "geometric:{mean}"),
        }
    }
}

/// `n` agents with i.i.d. values for `m` goods.
pub fn gen_instance(n: usize, m: usize, dist: Distribution, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n).map(|_| (0..m).map(|_| dist.sample(&mut rng)).collect()).collect();
    Instance::new(values).expect("rows have equal length")
}

/// Seeds for the trials of cell `(n, m)`.
fn trial_seeds(seed: u64, n: usize, m: usize, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | m as u64);
    (0..trials).map(|_| rng.random()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    pub m: usize,
    pub param: String,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn push(&mut self, n: usize, m: usize, param: &str, metric: &str, value: f64) {
        self.rows.push(ReportRow {
            n,
            m,
            param: param.to_string(),
            metric: metric.to_string(),
            value,
        });
    }

    pub fn get(&self, n: usize, m: usize, param: &str, metric: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.m == m && r.param == param && r.metric == metric)
            .map(|r| r.value)
    }

    /// Distinct `(n, m)` cells in order of first appearance.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut cells: Vec<(usize, usize)> = Vec::new();
        for r in &self.rows {
            if !cells.contains(&(r.n, r.m)) {
                cells.push((r.n, r.m));
            }
        }
        cells
    }

    /// CSV with header `n,m,param,metric,value`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Summary of per-agent ratios over the trials of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSummary {
    pub min: f64,
    pub mean: f64,
    /// Minimum over instances of the mean ratio within the instance.
    pub min_of_means: f64,
}

impl RatioSummary {
    pub fn of(per_instance: &[Vec<f64>]) -> Self {
        let all: Vec<f64> = per_instance.iter().flatten().copied().collect();
        let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
        RatioSummary {
            min: all.iter().copied().fold(f64::INFINITY, f64::min),
            mean: mean(&all),
            min_of_means: per_instance.iter().map(|v| mean(v)).fold(f64::INFINITY, f64::min),
        }
    }

    fn push_to(&self, report: &mut ExperimentReport, n: usize, m: usize, param: &str) {
        report.push(n, m, param, "min", self.min);
        report.push(n, m, param, "mean", self.mean);
        report.push(n, m, param, "min-of-means", self.min_of_means);
    }
}

/// Numbers of goods per cell, either absolute or as multiples of `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoodsGrid {
    Absolute(Vec<usize>),
    PerAgent(Vec<usize>),
}

impl GoodsGrid {
    pub fn goods(&self, n: usize, max_m: Option<usize>) -> Vec<usize> {
        let mut ms: Vec<usize> = match self {
            GoodsGrid::Absolute(ms) => ms.clone(),
            GoodsGrid::PerAgent(fs) => fs.iter().map(|f| f * n).collect(),
        };
        ms.retain(|&m| m >= 1 && max_m.is_none_or(|cap| m <= cap));
        ms.dedup();
        ms
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdinalConfig {
    pub ns: Vec<usize>,
    pub ms: GoodsGrid,
    pub ells: Vec<usize>,
    pub dist: Distribution,
    pub trials: usize,
    pub seed: u64,
}

/// The best known multiplicative guarantee, `3/4 + 1/(12n)`.
pub fn multiplicative_reference(n: usize) -> f64 {
    0.75 + 1.0 / (12.0 * n as f64)
}

fn ratio(value: u64, total: u64, n: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        value as f64 * n as f64 / total as f64
    }
}

/// Greedy lower bound on `MMS^{ℓ,⌊(ℓ+½)n⌋}` over the proportional share. Rows have
/// param `ell=<ℓ>`, plus `multiplicative` carrying the reference line as its mean.
pub fn experiment_ordinal(cfg: &OrdinalConfig) -> Result<ExperimentReport> {
    cfg.dist.validate()?;
    if cfg.ells.contains(&0) {
        return Err(Error::InvalidParameter("ell must be at least 1".into()));
    }
    let mut report = ExperimentReport::default();
    for &n in &cfg.ns {
        for m in cfg.ms.goods(n, None) {
            let seeds = trial_seeds(cfg.seed, n, m, cfg.trials);
            // per trial, per ell, per agent
            let ratios: Vec<Vec<Vec<f64>>> = seeds
                .par_iter()
                .map(|&s| {
                    let inst = gen_instance(n, m, cfg.dist, s);
                    cfg.ells
                        .iter()
                        .map(|&ell| {
                            (0..n)
                                .map(|i| {
                                    let row = inst.row(i);
                                    let w = row_greedy_lower_bound(row, ell, ordinal_d(ell, n)).expect("positive parameters");
                                    ratio(w.value, inst.total(i), n)
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect();
            for (k, &ell) in cfg.ells.iter().enumerate() {
                let per_instance: Vec<Vec<f64>> = ratios.iter().map(|t| t[k].clone()).collect();
                RatioSummary::of(&per_instance).push_to(&mut report, n, m, &format!("ell={ell}"));
            }
            report.push(n, m, "multiplicative", "mean", multiplicative_reference(n));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// Each agent's threshold is its own simulation share under the method's direction.
    Individual,
    /// The largest common fraction of the proportional share, to 0.1%.
    Common,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub ns: Vec<usize>,
    pub ms: GoodsGrid,
    pub max_m: Option<usize>,
    pub dist: Distribution,
    pub trials: usize,
    pub seed: u64,
    pub mode: ThresholdMode,
}

/// One method's result on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTrial {
    pub ratios: Vec<f64>,
    pub served: bool,
    /// Common fraction of the proportional share, in per-mille (common mode only).
    pub permille: Option<u64>,
}

fn method_name(dir: FillDirection) -> &'static str {
    match dir {
        FillDirection::Bidirectional => "bidirectional",
        FillDirection::Unidirectional => "unidirectional",
    }
}

/// Runs one method on one ordered instance.
pub fn threshold_trial(ordered: &Instance, dir: FillDirection, mode: ThresholdMode) -> ThresholdTrial {
    let n = ordered.n();
    let run = |t: &[u64]| bag_filling(ordered, t, dir).expect("ordered instance");
    let (result, permille) = match mode {
        ThresholdMode::Individual => {
            let oracle = BagFillingOracle(dir);
            let t: Vec<u64> = (0..n)
                .map(|i| cover_share(ordered.row(i), n, &oracle).expect("n >= 1").value)
                .collect();
            (run(&t), None)
        }
        ThresholdMode::Common => {
            let thresholds = |p: u64| -> Vec<u64> {
                (0..n)
                    .map(|i| (p * ordered.total(i)).div_ceil(1000 * n as u64))
                    .collect()
            };
            let (mut lo, mut hi) = (0u64, 1000 * n as u64 + 1);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if run(&thresholds(mid)).count() == n {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (run(&thresholds(lo)), Some(lo))
        }
    };
    let ratios = received_ratios(ordered, &result);
    ThresholdTrial {
        served: result.count() == n,
        ratios,
        permille,
    }
}

fn received_ratios(inst: &Instance, result: &CoverResult) -> Vec<f64> {
    let n = inst.n();
    let mut ratios: Vec<f64> = (0..n).map(|i| if inst.total(i) == 0 { 1.0 } else { 0.0 }).collect();
    for (i, b) in &result.filled {
        let v: u64 = b.iter().map(|g| inst.value(*i, g)).sum();
        ratios[*i] = ratio(v, inst.total(*i), n);
    }
    ratios
}

/// Bidirectional against unidirectional bag-filling. Rows have param
/// `bidirectional` or `unidirectional` and metrics `min`, `mean`, `min-of-means`,
/// `served` (fraction of instances where every agent got a bag), `proportional`
/// (fraction where every agent reached its proportional share) and, in common mode,
/// `threshold` (mean common fraction) and `min-threshold`.
pub fn experiment_thresholds(cfg: &ThresholdConfig) -> Result<ExperimentReport> {
    cfg.dist.validate()?;
    let methods = [FillDirection::Bidirectional, FillDirection::Unidirectional];
    let mut report = ExperimentReport::default();
    for &n in &cfg.ns {
        for m in cfg.ms.goods(n, cfg.max_m) {
            let seeds = trial_seeds(cfg.seed, n, m, cfg.trials);
            let trials: Vec<Vec<ThresholdTrial>> = seeds
                .par_iter()
                .map(|&s| {
                    let (ordered, _) = order_instance(&gen_instance(n, m, cfg.dist, s));
                    methods.iter().map(|&dir| threshold_trial(&ordered, dir, cfg.mode)).collect()
                })
                .collect();
            for (k, &dir) in methods.iter().enumerate() {
                let name = method_name(dir);
                let per: Vec<&ThresholdTrial> = trials.iter().map(|t| &t[k]).collect();
                let ratios: Vec<Vec<f64>> = per.iter().map(|t| t.ratios.clone()).collect();
                RatioSummary::of(&ratios).push_to(&mut report, n, m, name);
                let frac = |f: &dyn Fn(&ThresholdTrial) -> bool| {
                    per.iter().filter(|t| f(t)).count() as f64 / per.len().max(1) as f64
                };
                report.push(n, m, name, "served", frac(&|t| t.served));
                report.push(n, m, name, "proportional", frac(&|t| t.ratios.iter().all(|&r| r >= 1.0)));
                if cfg.mode == ThresholdMode::Common {
                    let ps: Vec<f64> = per.iter().filter_map(|t| t.permille).map(|p| p as f64 / 1000.0).collect();
                    report.push(n, m, name, "threshold", ps.iter().sum::<f64>() / ps.len().max(1) as f64);
                    report.push(n, m, name, "min-threshold", ps.iter().copied().fold(f64::INFINITY, f64::min));
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let d = Distribution::Uniform { lo: 1, hi: 1000 };
        let a = gen_instance(3, 10, d, 42);
        assert_eq!(a, gen_instance(3, 10, d, 42));
        assert_ne!(a, gen_instance(3, 10, d, 43));
        assert!(a.values().iter().flatten().all(|&v| (1..=1000).contains(&v)));
    }

    #[test]
    fn geometric_mean() {
        let d = Distribution::Geometric { mean: 1000 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws: Vec<u64> = (0..100_000).map(|_| d.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<u64>() as f64 / draws.len() as f64;
        assert!((mean - 1000.0).abs() < 50.0, "{mean}");
        assert!(draws.iter().all(|&v| v >= 1));
    }

    #[test]
    fn parse_distribution() {
        assert_eq!("uniform:1:1000".parse::<Distribution>().unwrap(), Distribution::Uniform { lo: 1, hi: 1000 });
        assert_eq!("geometric:5".parse::<Distribution>().unwrap(), Distribution::Geometric { mean: 5 });
        assert!("uniform:5:1".parse::<Distribution>().is_err());
        assert!("normal:1".parse::<Distribution>().is_err());
        assert_eq!(Distribution::Uniform { lo: 0, hi: 9 }.to_string(), "uniform:0:9");
    }

    #[test]
    fn identical_goods_ratio() {
        // m = d goods of one value: greedy puts one per part
        for (ell, n) in [(1, 4), (2, 4), (2, 3)] {
            let d = ordinal_d(ell, n);
            let cfg = OrdinalConfig {
                ns: vec![n],
                ms: GoodsGrid::Absolute(vec![d]),
                ells: vec![ell],
                dist: Distribution::Uniform { lo: 7, hi: 7 },
                trials: 3,
                seed: 0,
            };
            let r = experiment_ordinal(&cfg).unwrap();
            let expected = (ell * n) as f64 / d as f64;
            assert!((r.get(n, d, &format!("ell={ell}"), "mean").unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn two_agents_two_unit_goods() {
        let inst = Instance::identical(2, vec![1, 1]).unwrap();
        for dir in [FillDirection::Bidirectional, FillDirection::Unidirectional] {
            let t = threshold_trial(&inst, dir, ThresholdMode::Common);
            assert_eq!(t.permille, Some(1000));
            assert_eq!(t.ratios, vec![1.0, 1.0]);
        }
    }

    #[test]
    fn summary_order() {
        let s = RatioSummary::of(&[vec![0.5, 1.0], vec![0.9, 0.8]]);
        assert!(s.min <= s.min_of_means && s.min_of_means <= s.mean);
        assert_eq!(s.min, 0.5);
        assert_eq!(s.min_of_means, 0.75);
    }

    #[test]
    fn csv_header() {
        let mut r = ExperimentReport::default();
        r.push(3, 6, "bidirectional", "mean", 0.5);
        assert_eq!(r.to_csv().unwrap(), "n,m,param,metric,value\n3,6,bidirectional,mean,0.5\n");
    }
}
