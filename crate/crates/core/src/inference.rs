//! Posterior summaries, interval-based selection, evaluation metrics and
//! convergence diagnostics.

use crate::error::{check_len, Error, Result};
use crate::model::PosteriorDraws;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CredibleInterval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl CredibleInterval {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn excludes_zero(&self) -> bool {
        self.lo > 0.0 || self.hi < 0.0
    }

    /// Closed-interval membership.
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Quantile of sorted data by linear interpolation at 0-based position
/// `q (m - 1)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::State("median of an empty sample".into()));
    }
    let s = sorted(values);
    let m = s.len();
    Ok(if m % 2 == 1 { s[m / 2] } else { 0.5 * (s[m / 2 - 1] + s[m / 2]) })
}

/// Column-wise posterior medians of β.
pub fn posterior_median(draws: &PosteriorDraws) -> Result<Vec<f64>> {
    if draws.is_empty() {
        return Err(Error::State("no retained draws".into()));
    }
    (0..draws.p()).map(|j| median(&draws.column(j))).collect()
}

/// Equal-tailed interval at quantiles `(1-level)/2` and `(1+level)/2`.
pub fn credible_interval(draws_col: &[f64], level: f64) -> Result<CredibleInterval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param("level", level));
    }
    if draws_col.len() < 2 {
        return Err(Error::State(format!("credible interval needs at least 2 draws, got {}", draws_col.len())));
    }
    let s = sorted(draws_col);
    let alpha = (1.0 - level) / 2.0;
    Ok(CredibleInterval { lo: quantile_sorted(&s, alpha), hi: quantile_sorted(&s, 1.0 - alpha), level })
}

pub fn credible_intervals(draws: &PosteriorDraws, level: f64) -> Result<Vec<CredibleInterval>> {
    (0..draws.p()).map(|j| credible_interval(&draws.column(j), level)).collect()
}

pub fn select_by_interval(intervals: &[CredibleInterval]) -> Vec<bool> {
    intervals.iter().map(CredibleInterval::excludes_zero).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub f1: f64,
    pub mcc: f64,
}

impl Confusion {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let (tpf, fpf, fnf, tnf) = (tp as f64, fp as f64, fn_ as f64, tn as f64);
        let f1_den = 2.0 * tpf + fpf + fnf;
        let f1 = if f1_den == 0.0 { 0.0 } else { 2.0 * tpf / f1_den };
        let mcc_den = ((tpf + fpf) * (tpf + fnf) * (tnf + fpf) * (tnf + fnf)).sqrt();
        let mcc = if mcc_den == 0.0 { 0.0 } else { (tpf * tnf - fpf * fnf) / mcc_den };
        Confusion { tp, fp, fn_, tn, f1, mcc }
    }
}

pub fn confusion_and_scores(selected: &[bool], truth_nonzero: &[bool]) -> Result<Confusion> {
    check_len(truth_nonzero.len(), selected.len())?;
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&s, &t) in selected.iter().zip(truth_nonzero) {
        match (s, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(Confusion::from_counts(tp, fp, fn_, tn))
}

pub fn l1_error(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    check_len(truth.len(), estimate.len())?;
    Ok(estimate.iter().zip(truth).map(|(a, b)| (a - b).abs()).sum())
}

pub fn coverage(intervals: &[CredibleInterval], truth: &[f64]) -> Result<Vec<bool>> {
    check_len(truth.len(), intervals.len())?;
    Ok(intervals.iter().zip(truth).map(|(ci, &t)| ci.contains(t)).collect())
}

/// Mean absolute deviation between predictions and observations.
pub fn mad(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check_len(actual.len(), pred.len())?;
    if pred.is_empty() {
        return Err(Error::Shape { expected: 1, found: 0 });
    }
    Ok(pred.iter().zip(actual).map(|(a, b)| (a - b).abs()).sum::<f64>() / pred.len() as f64)
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with denominator `len - 1`.
pub fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Potential scale reduction factor `√(V̂/W)`, with
/// `V̂ = ((n-1)/n) W + B/n`.
///
/// Returns 1 when every chain is constant at a common value and `+∞` when
/// the chains are constant at different values.
pub fn psrf(chains: &[Vec<f64>]) -> Result<f64> {
    if chains.len() < 2 {
        return Err(Error::Config(format!("PSRF needs at least 2 chains, got {}", chains.len())));
    }
    let n = chains[0].len();
    if n < 2 {
        return Err(Error::Config(format!("PSRF needs chains of length at least 2, got {n}")));
    }
    for c in chains {
        check_len(n, c.len())?;
    }
    let w = chains.iter().map(|c| sample_variance(c)).sum::<f64>() / chains.len() as f64;
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let b_over_n = sample_variance(&means);
    if w == 0.0 {
        return Ok(if b_over_n == 0.0 { 1.0 } else { f64::INFINITY });
    }
    let nf = n as f64;
    let v_hat = (nf - 1.0) / nf * w + b_over_n;
    Ok((v_hat / w).sqrt())
}

/// Per-coefficient PSRF across several chains fitted to the same data.
pub fn psrf_by_coefficient(chains: &[PosteriorDraws]) -> Result<Vec<f64>> {
    let p = chains.first().map_or(0, PosteriorDraws::p);
    (0..p).map(|j| psrf(&chains.iter().map(|d| d.column(j)).collect::<Vec<_>>())).collect()
}

/// Full evaluation of one fit against known truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub intervals: Vec<CredibleInterval>,
    pub selected: Vec<bool>,
    pub confusion: Confusion,
    pub l1_error: f64,
    pub coverage: Vec<bool>,
}

pub fn evaluate(draws: &PosteriorDraws, truth: &[f64], level: f64) -> Result<SelectionReport> {
    check_len(draws.p(), truth.len())?;
    let intervals = credible_intervals(draws, level)?;
    let selected = select_by_interval(&intervals);
    let nonzero: Vec<bool> = truth.iter().map(|&b| b != 0.0).collect();
    let confusion = confusion_and_scores(&selected, &nonzero)?;
    let l1 = l1_error(&posterior_median(draws)?, truth)?;
    let coverage = coverage(&intervals, truth)?;
    Ok(SelectionReport { intervals, selected, confusion, l1_error: l1, coverage })
}

/// Sample mean and standard deviation (`len - 1` denominator; 0 for a
/// single value).
pub fn mean_sd(x: &[f64]) -> (f64, f64) {
    let m = mean(x);
    let sd = if x.len() > 1 { sample_variance(x).sqrt() } else { 0.0 };
    (m, sd)
}
