//! Convergent combinations of hitting times and the invariants they pin
//! down.
//!
//! Notation, per pair index `i`: `s1_i = t_{2i+1} - t_{2i}` (time in `V1`),
//! `s2_i = t_{2i+2} - t_{2i+1}` (time in `V2`), `T_i = s1_i + s2_i`.
//! Entries that would need a pair before the first are `None`.

use serde::Serialize;

use crate::dd::DoubleDouble;
use crate::error::{BykovError, Result};
use crate::hitting::HittingSequence;
use crate::params::{DerivedConstants, InvariantTuple, SystemParams};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DiagnosticSeries {
    /// `s1_i - γ2·s2_{i-1}`, limit `-ln a / E1`.
    pub lemma1: Vec<Option<f64>>,
    /// `s2_i - γ1·s1_i`, limit 0.
    pub lemma2: Vec<Option<f64>>,
    /// `T_i - δ·T_{i-1}`, limit `-τ ln a`.
    pub lemma3: Vec<Option<f64>>,
    /// `lemma3 + τ ln a`.
    pub residuals: Vec<Option<f64>>,
    /// `s2_i / s1_i`, limit `γ1`.
    pub ratio1: Vec<Option<f64>>,
    /// `s1_i / s2_{i-1}`, limit `γ2`.
    pub ratio2: Vec<Option<f64>>,
    /// `T_i / T_{i-1}`, limit `δ`.
    pub ratio3: Vec<Option<f64>>,
    /// `(ω1·s1_i + ω2·s2_i) / T_i`, limit `(ω1 + γ1ω2)/(1 + γ1)`.
    pub ratio4: Vec<Option<f64>>,
}

impl DiagnosticSeries {
    pub fn len(&self) -> usize {
        self.lemma2.len().max(self.ratio1.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One row per index: `[lemma1, lemma2, lemma3, residual, ratio1..ratio4]`.
    pub fn row(&self, i: usize) -> [Option<f64>; 8] {
        let at = |v: &Vec<Option<f64>>| v.get(i).copied().flatten();
        [
            at(&self.lemma1),
            at(&self.lemma2),
            at(&self.lemma3),
            at(&self.residuals),
            at(&self.ratio1),
            at(&self.ratio2),
            at(&self.ratio3),
            at(&self.ratio4),
        ]
    }
}

fn need_pairs(h: &HittingSequence, needed: usize) -> Result<()> {
    if h.pairs() < needed {
        return Err(BykovError::InsufficientData {
            needed,
            available: h.pairs(),
        });
    }
    Ok(())
}

fn lagged<F>(n: usize, f: F) -> Vec<Option<f64>>
where
    F: Fn(usize) -> DoubleDouble,
{
    (0..n).map(|i| (i >= 1).then(|| f(i).to_f64())).collect()
}

fn every<F>(n: usize, f: F) -> Vec<Option<f64>>
where
    F: Fn(usize) -> DoubleDouble,
{
    (0..n).map(|i| Some(f(i).to_f64())).collect()
}

fn ratios(h: &HittingSequence, omega1: f64, omega2: f64, out: &mut DiagnosticSeries) {
    let s1 = h.sojourns_v1();
    let s2 = h.sojourns_v2();
    let t = h.pair_durations();
    let n = t.len();
    out.ratio1 = every(n, |i| s2[i] / s1[i]);
    out.ratio2 = lagged(n, |i| s1[i] / s2[i - 1]);
    out.ratio3 = lagged(n, |i| t[i] / t[i - 1]);
    out.ratio4 = every(n, |i| (s1[i] * omega1 + s2[i] * omega2) / t[i]);
}

/// All four lemma sequences and all four ratio sequences.
pub fn lemma_diagnostics(h: &HittingSequence, d: &DerivedConstants) -> Result<DiagnosticSeries> {
    need_pairs(h, 3)?;
    let s1 = h.sojourns_v1();
    let s2 = h.sojourns_v2();
    let t = h.pair_durations();
    let n = t.len();
    let mut out = DiagnosticSeries {
        lemma1: lagged(n, |i| s1[i] - d.gamma2 * s2[i - 1]),
        lemma2: every(n, |i| s2[i] - d.gamma1 * s1[i]),
        lemma3: lagged(n, |i| t[i] - d.delta * t[i - 1]),
        residuals: lagged(n, |i| t[i] - d.delta * t[i - 1] + d.tau_log_a),
        ..Default::default()
    };
    ratios(h, d.omega1, d.omega2, &mut out);
    Ok(out)
}

/// Ratio sequences only; the lemma lists come back as `None` throughout.
pub fn corollary_ratios(h: &HittingSequence, p: &SystemParams) -> Result<DiagnosticSeries> {
    need_pairs(h, 2)?;
    let n = h.pairs();
    let mut out = DiagnosticSeries {
        lemma1: vec![None; n],
        lemma2: vec![None; n],
        lemma3: vec![None; n],
        residuals: vec![None; n],
        ..Default::default()
    };
    ratios(h, p.omega1, p.omega2, &mut out);
    Ok(out)
}

/// `sup_{i >= from} (i·|R_i|)^(1/i)`; below 1 when the residuals decay
/// fast enough for `Σ i·|R_i|` to converge.
pub fn root_test(s: &DiagnosticSeries, from: usize) -> f64 {
    s.residuals
        .iter()
        .enumerate()
        .skip(from.max(1))
        .filter_map(|(i, r)| r.map(|r| (i as f64 * r.abs()).powf(1.0 / i as f64)))
        .fold(0.0, f64::max)
}

/// `Σ_{i > from} i·|R_i|`.
pub fn residual_tail(s: &DiagnosticSeries, from: usize) -> f64 {
    s.residuals
        .iter()
        .enumerate()
        .skip(from + 1)
        .filter_map(|(i, r)| r.map(|r| i as f64 * r.abs()))
        .sum()
}

/// Least-squares slope of `ln|lemma2_i|` against `ln(a·z_{2i}) = -E1·s1_i`.
///
/// Only indices where `lemma2` is resolved (nonzero and above double-double
/// noise relative to `s2_i`) take part.
pub fn lemma2_decay_slope(h: &HittingSequence, d: &DerivedConstants) -> Result<f64> {
    need_pairs(h, 3)?;
    let s1 = h.sojourns_v1();
    let s2 = h.sojourns_v2();
    let pts: Vec<(f64, f64)> = (0..h.pairs())
        .filter_map(|i| {
            let r = (s2[i] - d.gamma1 * s1[i]).to_f64().abs();
            let noise = 1e-28 * s2[i].to_f64();
            (r > noise).then(|| (-(s1[i] * d.e1).to_f64(), r.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return Err(BykovError::InsufficientData {
            needed: 2,
            available: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(BykovError::DegenerateInput("all abscissae coincide".into()));
    }
    Ok(sxy / sxx)
}

fn check_settled(name: &str, tail: &[f64]) -> Result<()> {
    let n = tail.len() as f64;
    let mean = tail.iter().sum::<f64>() / n;
    let sd = (tail.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
    if !sd.is_finite() || sd > 1e-3 * mean.abs() {
        return Err(BykovError::NonConvergent(format!(
            "{name}: spread {sd:e} over the last {} estimates (mean {mean})",
            tail.len()
        )));
    }
    Ok(())
}

type Estimate = (DoubleDouble, DoubleDouble, DoubleDouble, DoubleDouble);

/// Reads the invariant tuple off a time series.
///
/// The times of the idealized model do not depend on the angle, so the
/// rotation rates cannot be recovered from them and are passed in; they
/// only enter the `ω1 + γ1·ω2` component. `γ2` comes from differences of
/// successive sojourns, which cancels the constant of the first lemma
/// sequence; `δ` is then `γ1·γ2` and `τ ln a` is minus the last lemma3
/// value.
pub fn estimate_invariants(
    h: &HittingSequence,
    omega1: f64,
    omega2: f64,
) -> Result<InvariantTuple> {
    need_pairs(h, 5)?;
    let s1 = h.sojourns_v1();
    let s2 = h.sojourns_v2();
    let t = h.pair_durations();

    let history: Vec<Estimate> = (2..t.len())
        .map(|i| {
            let g1 = s2[i] / s1[i];
            let g2 = (s1[i] - s1[i - 1]) / (s2[i - 1] - s2[i - 2]);
            let tau_log_a = -(t[i] - g1 * g2 * t[i - 1]);
            let spin = (s1[i] * omega1 + s2[i] * omega2) / t[i];
            (g1, g2, (g1 + 1.0) * spin, tau_log_a)
        })
        .collect();
    let tail = &history[history.len() - 3..];
    let comp = |f: fn(&Estimate) -> DoubleDouble| -> Vec<f64> {
        tail.iter().map(|e| f(e).to_f64()).collect()
    };
    check_settled("gamma1", &comp(|e| e.0))?;
    check_settled("gamma2", &comp(|e| e.1))?;
    check_settled("omega_combo", &comp(|e| e.2))?;
    check_settled("tau_log_a", &comp(|e| e.3))?;
    let last = tail[2];
    Ok(InvariantTuple {
        gamma1: last.0.to_f64(),
        gamma2: last.1.to_f64(),
        omega_combo: last.2.to_f64(),
        tau_log_a: last.3.to_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{Chart, SectionPoint};
    use crate::hitting::generate_hitting_sequence;
    use crate::params::{matching_params, PerturbationSpec};
    use proptest::prelude::*;

    fn p0() -> SystemParams {
        SystemParams::new(2.0, 1.0, 1.0, 3.0, 1.5, 2.0, 0.5)
    }

    fn perturbed() -> SystemParams {
        p0().with_perturbation(PerturbationSpec {
            c1: 0.1,
            c2: 0.1,
            eps: 0.5,
        })
    }

    fn run(p: &SystemParams, pairs: usize) -> HittingSequence {
        let q0 = SectionPoint::from_coordinate(Chart::Out2, 1.0, 0.1).unwrap();
        generate_hitting_sequence(&q0, p, pairs).unwrap()
    }

    #[test]
    fn idealized_lemma_values_are_constant() {
        let p = p0();
        let d = p.derived().unwrap();
        let s = lemma_diagnostics(&run(&p, 11), &d).unwrap();
        assert_eq!(s.lemma1[0], None);
        for i in 1..=10 {
            assert!(
                (s.lemma1[i].unwrap() - 2f64.ln()).abs() < 1e-10,
                "lemma1[{i}]"
            );
            assert!(s.lemma2[i].unwrap().abs() < 1e-10, "lemma2[{i}]");
            assert!(
                (s.lemma3[i].unwrap() - 7.0 / 3.0 * 2f64.ln()).abs() < 1e-10,
                "lemma3[{i}]"
            );
            assert!(s.residuals[i].unwrap().abs() < 1e-10);
        }
        assert!(s.lemma2[0].unwrap().abs() < 1e-12);
    }

    #[test]
    fn reference_ratios() {
        let p = p0();
        let s = corollary_ratios(&run(&p, 3), &p).unwrap();
        assert!((s.ratio1[0].unwrap() - 4.0 / 3.0).abs() < 1e-12);
        // (t4 - t2) / t2 from the closed forms
        assert!((s.ratio3[1].unwrap() - 4.231378).abs() < 1e-6);
        for r in &s.ratio4 {
            assert!((r.unwrap() - 11.0 / 7.0).abs() < 1e-12);
        }
        assert!(s.lemma1.iter().all(Option::is_none));
    }

    #[test]
    fn ratios_approach_their_limits() {
        let p = p0();
        let s = corollary_ratios(&run(&p, 14), &p).unwrap();
        let e2 = |i: usize| (s.ratio2[i].unwrap() - 3.0).abs();
        let e3 = |i: usize| (s.ratio3[i].unwrap() - 4.0).abs();
        for i in 2..14 {
            assert!(e2(i) < e2(i - 1) && e3(i) < e3(i - 1));
        }
        assert!(e2(13) < 2e-8 && e3(13) < 2e-8, "{} {}", e2(13), e3(13));
    }

    #[test]
    fn too_short() {
        let p = p0();
        let d = p.derived().unwrap();
        assert!(matches!(
            lemma_diagnostics(&run(&p, 2), &d),
            Err(BykovError::InsufficientData {
                needed: 3,
                available: 2
            })
        ));
        assert!(corollary_ratios(&run(&p, 1), &p).is_err());
        assert!(estimate_invariants(&run(&p, 4), 1.0, 2.0).is_err());
    }

    #[test]
    fn perturbed_limits() {
        let p = perturbed();
        let d = p.derived().unwrap();
        let s = lemma_diagnostics(&run(&p, 12), &d).unwrap();
        assert!((s.lemma1[10].unwrap() - 2f64.ln()).abs() < 1e-6);
        assert!(s.lemma2[10].unwrap().abs() < 1e-6);
        assert!((s.lemma3[10].unwrap() - 7.0 / 3.0 * 2f64.ln()).abs() < 1e-6);
        assert!(root_test(&s, 1) < 1.0);
        assert!(residual_tail(&s, 10) < 1e-8);
    }

    #[test]
    fn lemma2_decays_at_the_predicted_rate() {
        let p = perturbed();
        let d = p.derived().unwrap();
        let slope = lemma2_decay_slope(&run(&p, 12), &d).unwrap();
        assert!(slope >= 2.0 * 0.5 - 0.1, "slope {slope}");
    }

    #[test]
    fn estimates_match_the_tuple() {
        let p = p0();
        let want = p.invariants().unwrap();
        let got = estimate_invariants(&run(&p, 8), 1.0, 2.0).unwrap();
        for (x, y) in got.as_array().iter().zip(want.as_array()) {
            assert!((x - y).abs() < 1e-9, "{got:?} vs {want:?}");
        }
        let got = estimate_invariants(&run(&perturbed(), 8), 1.0, 2.0).unwrap();
        for (x, y) in got.as_array().iter().zip(want.as_array()) {
            assert!((x - y).abs() < 1e-6, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn matched_system_gives_the_same_estimate() {
        let p = p0();
        let g = matching_params(&p, 2.0, 3.0, 1.0).unwrap();
        let a = estimate_invariants(&run(&p, 8), p.omega1, p.omega2).unwrap();
        let b = estimate_invariants(&run(&g, 8), g.omega1, g.omega2).unwrap();
        assert!(a.max_rel_deviation(&b) < 1e-9);
    }

    #[test]
    fn wandering_series_is_flagged() {
        let mut t = vec![0.0];
        for k in 1..=12 {
            let step = if k % 4 == 0 { 5.0 } else { 1.0 + k as f64 };
            t.push(t[k - 1] + step);
        }
        let h = HittingSequence::from_times(&t).unwrap();
        assert!(matches!(
            estimate_invariants(&h, 1.0, 1.0),
            Err(BykovError::NonConvergent(_))
        ));
    }

    proptest! {
        #[test]
        fn idealized_residuals_vanish(z0 in 1e-3f64..0.9, theta in 0.0f64..std::f64::consts::TAU) {
            let p = p0();
            let d = p.derived().unwrap();
            let q0 = SectionPoint::from_coordinate(Chart::Out2, theta, z0).unwrap();
            let h = generate_hitting_sequence(&q0, &p, 6).unwrap();
            let s = lemma_diagnostics(&h, &d).unwrap();
            for r in s.residuals.iter().flatten() {
                prop_assert!(r.abs() < 1e-9);
            }
        }
    }
}
