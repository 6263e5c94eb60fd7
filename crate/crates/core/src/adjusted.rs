//! Adjusted hitting times: the exactly self-similar sequence that the
//! measured pair durations approach.
//!
//! `T_i = t_{2i+2} - t_{2i}` obeys `T_i = δ·T_{i-1} - τ ln a + R_i` with
//! residuals `R_i` that vanish in the idealized model. Running the
//! recursion backwards from `T_i` gives estimates `T̃0^(i)` of a starting
//! value whose forward orbit under the residual-free recursion shadows
//! the data.

use serde::Serialize;

use crate::dd::DoubleDouble;
use crate::error::{BykovError, Result};
use crate::hitting::HittingSequence;
use crate::params::DerivedConstants;

fn need_pairs(h: &HittingSequence, needed: usize) -> Result<()> {
    if h.pairs() < needed {
        return Err(BykovError::InsufficientData {
            needed,
            available: h.pairs(),
        });
    }
    Ok(())
}

/// `T̃0^(i) = (T_i + (1 + δ + … + δ^(i-1))·τ ln a) / δ^i` for every
/// complete pair `i`.
pub fn backward_t0_family(h: &HittingSequence, d: &DerivedConstants) -> Result<Vec<DoubleDouble>> {
    need_pairs(h, 2)?;
    let mut geometric = DoubleDouble::ZERO;
    let mut power = DoubleDouble::ONE;
    let mut out = Vec::with_capacity(h.pairs());
    for t in h.pair_durations() {
        out.push((t + geometric * d.tau_log_a) / power);
        geometric += power;
        power = power * d.delta;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdjustedTimes {
    pub t0_family: Vec<DoubleDouble>,
    /// Last member of the backward family.
    pub t0: DoubleDouble,
    /// `T̃_i = δ·T̃_{i-1} - τ ln a`, starting from `T̃_0 = t0`.
    pub t_seq: Vec<DoubleDouble>,
    /// `t̃_0, t̃_2, …, t̃_{2n}`.
    pub t_even: Vec<DoubleDouble>,
    /// `t̃_1, t̃_3, …, t̃_{2n-1}`.
    pub t_odd: Vec<DoubleDouble>,
    /// `t̃_0 = Σ (T_k - T̃_k)` over the measured pairs, which makes
    /// `t_{2i} - t̃_{2i} → 0`.
    pub offset: DoubleDouble,
    /// Geometric estimate of how far `t0` still is from the limit of the
    /// backward family.
    pub residual_tail_bound: f64,
}

impl AdjustedTimes {
    /// `t̃_k` for any `k <= 2n`.
    pub fn time(&self, k: usize) -> DoubleDouble {
        if k.is_multiple_of(2) {
            self.t_even[k / 2]
        } else {
            self.t_odd[k / 2]
        }
    }

    /// Interleaved `t̃_0, t̃_1, …, t̃_{2n}`.
    pub fn interleaved(&self) -> Vec<DoubleDouble> {
        (0..self.t_even.len() + self.t_odd.len())
            .map(|k| self.time(k))
            .collect()
    }

    /// Same sequence with `t̃_0 = 0` instead of the offset.
    pub fn zero_anchored(&self) -> Vec<DoubleDouble> {
        self.interleaved()
            .into_iter()
            .map(|t| t - self.offset)
            .collect()
    }
}

/// Builds `n` adjusted pairs from the measured sequence; `n` may exceed the
/// number of measured pairs, in which case the recursion extrapolates.
pub fn adjusted_sequence(
    h: &HittingSequence,
    d: &DerivedConstants,
    n: usize,
) -> Result<AdjustedTimes> {
    let family = backward_t0_family(h, d)?;
    if n == 0 {
        return Err(BykovError::InsufficientData {
            needed: 1,
            available: 0,
        });
    }
    let t0 = family[family.len() - 1];
    let last_step = (family[family.len() - 1] - family[family.len() - 2])
        .to_f64()
        .abs();
    let residual_tail_bound = last_step / (d.delta.to_f64() - 1.0);

    let mut t_seq = Vec::with_capacity(n);
    let mut cur = t0;
    for _ in 0..n {
        t_seq.push(cur);
        cur = d.delta * cur - d.tau_log_a;
    }
    let measured = h.pair_durations();
    let offset: DoubleDouble = measured.iter().zip(&t_seq).map(|(t, tt)| *t - *tt).sum();

    let mut t_even = Vec::with_capacity(n + 1);
    let mut acc = offset;
    t_even.push(acc);
    for tt in &t_seq {
        acc += *tt;
        t_even.push(acc);
    }
    let t_odd = t_even
        .windows(2)
        .map(|w| (w[1] + d.gamma1 * w[0]) / (d.gamma1 + 1.0))
        .collect();
    Ok(AdjustedTimes {
        t0_family: family,
        t0,
        t_seq,
        t_even,
        t_odd,
        offset,
        residual_tail_bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShiftCheck {
    /// `|T̃0,N - (δ^N·T̃0 - (1 + … + δ^(N-1))·τ ln a)|`.
    pub deviation: f64,
    /// `Σ_{j>0} |R_{N+j}| / δ^j` over the measured residuals.
    pub bound: f64,
}

/// Restarts the backward construction at `T_N` and compares its limit with
/// the `N`-th term of the adjusted recursion.
pub fn shift_invariance_check(
    h: &HittingSequence,
    d: &DerivedConstants,
    n: usize,
) -> Result<ShiftCheck> {
    if n + 2 >= h.pairs() {
        return Err(BykovError::InsufficientData {
            needed: n + 3,
            available: h.pairs(),
        });
    }
    let durations = h.pair_durations();
    let t0 = backward_t0_family(h, d)?[durations.len() - 1];

    let mut geometric = DoubleDouble::ZERO;
    let mut power = DoubleDouble::ONE;
    let mut shifted = DoubleDouble::ZERO;
    for t in &durations[n..] {
        shifted = (*t + geometric * d.tau_log_a) / power;
        geometric += power;
        power = power * d.delta;
    }

    let mut predicted = t0;
    for _ in 0..n {
        predicted = d.delta * predicted - d.tau_log_a;
    }

    let mut bound = 0.0;
    let mut scale = DoubleDouble::ONE;
    for i in n + 1..durations.len() {
        scale = scale * d.delta;
        let r = durations[i] - d.delta * durations[i - 1] + d.tau_log_a;
        bound += (r / scale).to_f64().abs();
    }
    Ok(ShiftCheck {
        deviation: (shifted - predicted).to_f64().abs(),
        bound,
    })
}
