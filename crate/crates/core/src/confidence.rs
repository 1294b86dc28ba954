//! Anytime confidence intervals for 1-subgaussian micro-observables.
//!
//! Each observable keeps a running mean and an interval of half-width
//! `sqrt(2 beta(n, delta / (2L)) / n)` around it. Stored limits are clipped
//! so the lower limit never decreases and the upper limit never increases.
//! Clipping can leave `lower > upper` when the mean drifts; this is only
//! possible outside the event that every interval covers its mean, and is
//! counted as a crossover rather than repaired.

use std::io::Write;

use crate::error::{Error, Result};

/// Largest per-observable risk for which the anytime bound is guaranteed.
pub const MAX_OBSERVABLE_RISK: f64 = 0.1;

/// `beta(t, delta) = log(1/delta) + 3 log log(1/delta) + 3/2 (log log(e t))^+`.
///
/// `t = 0` is accepted and drops the last term.
pub fn beta(t: u64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::RiskOutOfRange(delta));
    }
    let inv = (1.0 / delta).ln();
    let growth = if t == 0 { 0.0 } else { (1.0 + (t as f64).ln()).ln().max(0.0) };
    Ok(inv + 3.0 * inv.ln() + 1.5 * growth)
}

/// Snapshot of one observable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableStats {
    pub n: u64,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug)]
pub struct ConfidenceTracker {
    delta: f64,
    observable_risk: f64,
    clip: bool,
    counts: Vec<u64>,
    // Kahan-compensated sums.
    sums: Vec<f64>,
    comps: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    truth: Option<Vec<f64>>,
    good_event: bool,
    crossovers: u64,
}

impl ConfidenceTracker {
    pub fn new(delta: f64, num_observables: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::RiskOutOfRange(delta));
        }
        let observable_risk = delta / (2.0 * num_observables.max(1) as f64);
        if observable_risk > MAX_OBSERVABLE_RISK {
            log::warn!(
                "per-observable risk {observable_risk} exceeds {MAX_OBSERVABLE_RISK}; \
                 the anytime coverage guarantee does not apply"
            );
        }
        Ok(Self {
            delta,
            observable_risk,
            clip: true,
            counts: vec![0; num_observables],
            sums: vec![0.0; num_observables],
            comps: vec![0.0; num_observables],
            lower: vec![f64::NEG_INFINITY; num_observables],
            upper: vec![f64::INFINITY; num_observables],
            truth: None,
            good_event: true,
            crossovers: 0,
        })
    }

    /// Tracks whether every interval keeps covering `means`.
    pub fn with_truth(mut self, means: &[f64]) -> Result<Self> {
        if means.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: means.len() });
        }
        self.truth = Some(means.to_vec());
        Ok(self)
    }

    /// Diagnostic mode: store the raw interval after every update.
    pub fn without_clipping(mut self) -> Self {
        self.clip = false;
        self
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `delta / (2L)`, the risk spent on each observable.
    pub fn observable_risk(&self) -> f64 {
        self.observable_risk
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Half-width of the raw interval after `n >= 1` observations.
    pub fn radius(&self, n: u64) -> f64 {
        let b = beta(n, self.observable_risk).expect("risk validated at construction");
        (2.0 * b / n as f64).sqrt()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.len() });
        }
        Ok(())
    }

    pub fn observe(&mut self, i: usize, y: f64) -> Result<()> {
        self.check_index(i)?;
        if !y.is_finite() {
            return Err(Error::NonFinite(y));
        }
        self.counts[i] += 1;
        let adj = y - self.comps[i];
        let t = self.sums[i] + adj;
        self.comps[i] = (t - self.sums[i]) - adj;
        self.sums[i] = t;

        let n = self.counts[i];
        let mean = self.sums[i] / n as f64;
        let r = self.radius(n);
        if self.clip {
            self.lower[i] = self.lower[i].max(mean - r);
            self.upper[i] = self.upper[i].min(mean + r);
        } else {
            self.lower[i] = mean - r;
            self.upper[i] = mean + r;
        }
        if self.lower[i] > self.upper[i] {
            self.crossovers += 1;
        }
        if let Some(truth) = &self.truth {
            let mu = truth[i];
            if mu < self.lower[i] || mu > self.upper[i] {
                self.good_event = false;
            }
        }
        Ok(())
    }

    pub fn interval(&self, i: usize) -> Result<(f64, f64)> {
        self.check_index(i)?;
        Ok((self.lower[i], self.upper[i]))
    }

    pub fn stats(&self, i: usize) -> Result<ObservableStats> {
        self.check_index(i)?;
        let n = self.counts[i];
        Ok(ObservableStats {
            n,
            mean: if n == 0 { 0.0 } else { self.sums[i] / n as f64 },
            lower: self.lower[i],
            upper: self.upper[i],
        })
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.upper
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `None` when no ground truth was supplied.
    pub fn good_event(&self) -> Option<bool> {
        self.truth.as_ref().map(|_| self.good_event)
    }

    /// Number of updates that left an observable with `lower > upper`.
    pub fn crossovers(&self) -> u64 {
        self.crossovers
    }

    /// First observable whose stored limits are crossed, if any.
    pub fn first_crossed(&self) -> Option<usize> {
        (0..self.len()).find(|&i| self.lower[i] > self.upper[i])
    }

    /// Writes `observable,n,mean,lower,upper` rows (observables one-based).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["observable", "n", "mean", "lower", "upper"])?;
        for i in 0..self.len() {
            let s = self.stats(i)?;
            w.write_record([
                (i + 1).to_string(),
                s.n.to_string(),
                s.mean.to_string(),
                s.lower.to_string(),
                s.upper.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
