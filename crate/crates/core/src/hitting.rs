//! Hitting-time sequences of orbits started on the outgoing wall of `V2`.
//!
//! Index convention: `t_0 = 0` at the seed on `Out2`; odd indices are
//! crossings of `Out1`, even indices crossings of `Out2`. Transitions
//! between cylinders take no time, so `t_{2i+1} - t_{2i}` is the i-th
//! sojourn in `V1` and `t_{2i+2} - t_{2i+1}` the i-th sojourn in `V2`.

use crate::dd::DoubleDouble;
use crate::error::{BykovError, Result};
use crate::flow::{phi1_with, phi2_with, psi12, psi21, Chart, SectionPoint};
use crate::params::SystemParams;

/// Number of return pairs generated when the caller does not say.
pub const DEFAULT_PAIRS: usize = 12;

/// Past this many pairs the times exceed `10^16` and neighbouring doubles
/// are more than one time unit apart; sojourns stay exact (they are kept
/// in double-double) but the `f64` views of the times do not.
pub const F64_RESOLVABLE_PAIRS: usize = 30;

#[derive(Clone, Debug, PartialEq)]
pub struct HittingSequence {
    times: Vec<DoubleDouble>,
    points: Vec<SectionPoint>,
    sojourns_v1: Vec<DoubleDouble>,
    sojourns_v2: Vec<DoubleDouble>,
    /// Per-leg log-corrections from the higher-order terms, in leg order.
    residuals: Vec<f64>,
}

impl HittingSequence {
    /// Wraps a user-supplied series `t_0 = 0 < t_1 < …`.
    ///
    /// Section points are unknown and left empty; an incomplete final pair
    /// is kept in `times` but contributes only a `V1` sojourn.
    pub fn from_times(times: &[f64]) -> Result<Self> {
        if times.is_empty() {
            return Err(BykovError::InsufficientData {
                needed: 1,
                available: 0,
            });
        }
        if times[0] != 0.0 {
            return Err(BykovError::InvalidTimes(format!(
                "t_0 must be 0, got {}",
                times[0]
            )));
        }
        if let Some(w) = times.windows(2).find(|w| !w[1].is_finite() || w[1] <= w[0]) {
            return Err(BykovError::InvalidTimes(format!(
                "times must increase strictly ({} then {})",
                w[0], w[1]
            )));
        }
        let dd: Vec<DoubleDouble> = times.iter().map(|&t| DoubleDouble::from(t)).collect();
        let mut sojourns_v1 = Vec::new();
        let mut sojourns_v2 = Vec::new();
        for (k, w) in dd.windows(2).enumerate() {
            let s = w[1] - w[0];
            if k.is_multiple_of(2) {
                sojourns_v1.push(s);
            } else {
                sojourns_v2.push(s);
            }
        }
        Ok(HittingSequence {
            times: dd,
            points: Vec::new(),
            sojourns_v1,
            sojourns_v2,
            residuals: Vec::new(),
        })
    }

    /// Number of entries, `t_0` included.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of complete `V1`+`V2` pairs.
    pub fn pairs(&self) -> usize {
        self.sojourns_v2.len()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.times[k].to_f64()
    }

    pub fn time_dd(&self, k: usize) -> DoubleDouble {
        self.times[k]
    }

    pub fn times(&self) -> Vec<f64> {
        self.times.iter().map(|t| t.to_f64()).collect()
    }

    pub fn times_dd(&self) -> &[DoubleDouble] {
        &self.times
    }

    pub fn points(&self) -> &[SectionPoint] {
        &self.points
    }

    /// `t_{2i+1} - t_{2i}`.
    pub fn sojourns_v1(&self) -> &[DoubleDouble] {
        &self.sojourns_v1
    }

    /// `t_{2i+2} - t_{2i+1}`.
    pub fn sojourns_v2(&self) -> &[DoubleDouble] {
        &self.sojourns_v2
    }

    /// `T_i = t_{2i+2} - t_{2i}` for every complete pair.
    pub fn pair_durations(&self) -> Vec<DoubleDouble> {
        self.sojourns_v1
            .iter()
            .zip(&self.sojourns_v2)
            .map(|(a, b)| *a + *b)
            .collect()
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Length of the k-th leg `t_{k+1} - t_k`.
    pub fn leg(&self, k: usize) -> DoubleDouble {
        if k.is_multiple_of(2) {
            self.sojourns_v1[k / 2]
        } else {
            self.sojourns_v2[k / 2]
        }
    }
}

/// Follows the orbit of `q0 ∈ Out2` through `n_pairs` returns, producing
/// `2·n_pairs + 1` times `t_0 = 0, t_1, …, t_{2·n_pairs}`.
pub fn generate_hitting_sequence(
    q0: &SectionPoint,
    p: &SystemParams,
    n_pairs: usize,
) -> Result<HittingSequence> {
    if q0.chart != Chart::Out2 {
        return Err(BykovError::WrongChart {
            expected: Chart::Out2,
            found: q0.chart,
        });
    }
    let d = p.derived()?;
    let mut times = Vec::with_capacity(2 * n_pairs + 1);
    let mut points = Vec::with_capacity(2 * n_pairs + 1);
    let mut sojourns_v1 = Vec::with_capacity(n_pairs);
    let mut sojourns_v2 = Vec::with_capacity(n_pairs);
    let mut residuals = Vec::with_capacity(2 * n_pairs);

    let mut t = DoubleDouble::ZERO;
    let mut here = *q0;
    times.push(t);
    points.push(here);
    for _ in 0..n_pairs {
        let leg1 = phi1_with(&psi21(&here, p)?, p, &d)?;
        t += leg1.duration;
        times.push(t);
        points.push(leg1.exit);
        sojourns_v1.push(leg1.duration);
        residuals.push(leg1.log_correction);

        let leg2 = phi2_with(&psi12(&leg1.exit)?, p, &d)?;
        t += leg2.duration;
        if !t.is_finite() {
            return Err(BykovError::DegenerateInput(
                "hitting time overflowed; too many pairs for these rates".into(),
            ));
        }
        times.push(t);
        points.push(leg2.exit);
        sojourns_v2.push(leg2.duration);
        residuals.push(leg2.log_correction);
        here = leg2.exit;
    }
    Ok(HittingSequence {
        times,
        points,
        sojourns_v1,
        sojourns_v2,
        residuals,
    })
}

/// Fractions of `[0, t_upto]` spent in `V1` and `V2`.
pub fn sojourn_fractions(h: &HittingSequence, upto_index: usize) -> Result<(f64, f64)> {
    if upto_index == 0 || upto_index >= h.len() {
        return Err(BykovError::InsufficientData {
            needed: upto_index.max(1) + 1,
            available: h.len(),
        });
    }
    let in_v2: DoubleDouble = (1..upto_index).step_by(2).map(|k| h.leg(k)).sum();
    let frac_v2 = (in_v2 / h.time_dd(upto_index)).to_f64();
    Ok((1.0 - frac_v2, frac_v2))
}
