//! Section coordinates read back from adjusted times, and the conjugacy
//! between two systems that share their invariant tuple.
//!
//! Given an orbit of `p`, its adjusted times are fed into the inverse
//! hitting-time formulas of a second system `g`. The resulting point of
//! `g` has, when the tuples agree, the same hitting times as the adjusted
//! orbit; matching points at equal times defines the conjugacy.

use serde::Serialize;

use crate::adjusted::{adjusted_sequence, AdjustedTimes};
use crate::dd::DoubleDouble;
use crate::error::{BykovError, Result};
use crate::flow::{reduce_angle, Chart, SectionPoint};
use crate::hitting::generate_hitting_sequence;
use crate::params::SystemParams;

/// Pairs of the orbit used when the caller does not give a horizon.
pub const DEFAULT_HORIZON: usize = 10;

/// Tuples closer than this (componentwise, relative) count as equal.
pub const INVARIANT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecoveredPoint {
    /// `ln z` on `Out2` at the start of the pair.
    pub z0_log: f64,
    /// `ln ρ` on `Out1` after the first `V1` sojourn.
    pub rho1_log: f64,
    pub theta0: f64,
    pub theta0_reduced: f64,
}

impl RecoveredPoint {
    pub fn z0(&self) -> f64 {
        self.z0_log.exp()
    }

    pub fn rho1(&self) -> f64 {
        self.rho1_log.exp()
    }

    /// The point as a seed on `Out2`.
    pub fn section_point(&self) -> Result<SectionPoint> {
        SectionPoint::new(Chart::Out2, self.theta0_reduced, self.z0_log)
    }
}

/// Inverts the hitting-time formulas of `p` on three consecutive adjusted
/// times `t̃_{2N} < t̃_{2N+1} < t̃_{2N+2}`.
fn recover_from(t: [DoubleDouble; 3], p: &SystemParams) -> Result<RecoveredPoint> {
    let d = p.derived()?;
    let in_v1 = t[1] - t[0];
    let in_v2 = t[2] - t[1];
    let (u1, u2) = (in_v1.to_f64(), in_v2.to_f64());
    if u1.is_nan() || u2.is_nan() || u1 <= 0.0 || u2 <= 0.0 {
        return Err(BykovError::InvalidTimes(format!(
            "need t0 < t1 < t2, got {} {} {}",
            t[0], t[1], t[2]
        )));
    }
    let z0_log = -(in_v1 * p.e1) - d.log_a;
    let rho1_log = -(in_v2 * p.e2);
    let theta0 = d.omega_combo() * ((t[2] - t[0]) / (d.gamma1 + 1.0) - in_v2 / d.gamma1);
    let theta0 = theta0.to_f64();
    Ok(RecoveredPoint {
        z0_log: z0_log.to_f64(),
        rho1_log: rho1_log.to_f64(),
        theta0,
        theta0_reduced: reduce_angle(theta0),
    })
}

/// Section point at the start of the adjusted orbit, read through `p`.
pub fn recover_point(t_adj: &AdjustedTimes, p: &SystemParams) -> Result<RecoveredPoint> {
    recover_point_at(t_adj, p, 0)
}

/// Same, starting from pair `n`: the point the orbit occupies on `Out2` at
/// time `t̃_{2n}`.
pub fn recover_point_at(
    t_adj: &AdjustedTimes,
    p: &SystemParams,
    n: usize,
) -> Result<RecoveredPoint> {
    if t_adj.t_even.len() < n + 2 {
        return Err(BykovError::InsufficientData {
            needed: n + 1,
            available: t_adj.t_odd.len(),
        });
    }
    recover_from([t_adj.t_even[n], t_adj.t_odd[n], t_adj.t_even[n + 1]], p)
}

fn invariant_deviation(p: &SystemParams, g: &SystemParams) -> Result<f64> {
    Ok(p.invariants()?.max_rel_deviation(&g.invariants()?))
}

fn adjusted_orbit(q0: &SectionPoint, p: &SystemParams, n_pairs: usize) -> Result<AdjustedTimes> {
    let d = p.derived()?;
    let h = generate_hitting_sequence(q0, p, n_pairs)?;
    adjusted_sequence(&h, &d, n_pairs)
}

/// Image of `q0 ∈ Out2` (a point of `p`) on `Out2` of `g`.
pub fn map_h(q0: &SectionPoint, p: &SystemParams, g: &SystemParams) -> Result<RecoveredPoint> {
    let dev = invariant_deviation(p, g)?;
    if dev > INVARIANT_TOL {
        return Err(BykovError::InvariantMismatch { max_rel_dev: dev });
    }
    recover_point(&adjusted_orbit(q0, p, DEFAULT_HORIZON)?, g)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjugacyReport {
    pub target_params: SystemParams,
    pub image_point: RecoveredPoint,
    /// `|t̄_k - (t̃_k - t̃_0)|` for `k = 1, …, 2·n_pairs`.
    pub time_deviations: Vec<f64>,
    pub max_dev: f64,
    pub invariants_match: bool,
    pub invariant_deviation: f64,
    /// First pair (1-based) containing a time outside tolerance.
    pub first_failure: Option<usize>,
    pub verdict: bool,
}

impl ConjugacyReport {
    /// Largest deviation within each pair, pair 1 first.
    pub fn pair_deviations(&self) -> Vec<f64> {
        self.time_deviations
            .chunks(2)
            .map(|c| c.iter().copied().fold(0.0, f64::max))
            .collect()
    }
}

/// Maps the orbit of `q0` into `g` and compares hitting times.
///
/// A mismatch of invariant tuples is reported rather than raised, so the
/// report of a failed check still carries the deviations. Time `k` passes
/// when its deviation is at most `tol·max(1, |t̃_k|)`.
pub fn verify_conjugacy(
    q0: &SectionPoint,
    p: &SystemParams,
    g: &SystemParams,
    n_pairs: usize,
    tol: f64,
) -> Result<ConjugacyReport> {
    if n_pairs == 0 {
        return Err(BykovError::InsufficientData {
            needed: 1,
            available: 0,
        });
    }
    let inv_dev = invariant_deviation(p, g)?;
    let adj = adjusted_orbit(q0, p, n_pairs)?;
    let image = recover_point(&adj, g)?;
    let image_orbit = generate_hitting_sequence(&image.section_point()?, g, n_pairs)?;

    let origin = adj.t_even[0];
    let mut time_deviations = Vec::with_capacity(2 * n_pairs);
    let mut first_failure = None;
    for k in 1..=2 * n_pairs {
        let want = adj.time(k) - origin;
        let dev = (image_orbit.time_dd(k) - want).to_f64().abs();
        let allowed = tol * want.to_f64().abs().max(1.0);
        if first_failure.is_none() && (dev.is_nan() || dev > allowed) {
            first_failure = Some(k.div_ceil(2));
        }
        time_deviations.push(dev);
    }
    let max_dev = time_deviations.iter().copied().fold(0.0, f64::max);
    let invariants_match = inv_dev <= INVARIANT_TOL;
    Ok(ConjugacyReport {
        target_params: *g,
        image_point: image,
        time_deviations,
        max_dev,
        invariants_match,
        invariant_deviation: inv_dev,
        first_failure,
        verdict: invariants_match && first_failure.is_none(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hitting::generate_hitting_sequence;
    use crate::params::matching_params;
    use proptest::prelude::*;

    fn p0() -> SystemParams {
        SystemParams::new(2.0, 1.0, 1.0, 3.0, 1.5, 2.0, 0.5)
    }

    fn g0() -> SystemParams {
        SystemParams::new(4.0, 2.0, 7.0 / 3.0, 6.0, 3.0, 1.0, 0.25)
    }

    fn q0(z: f64) -> SectionPoint {
        SectionPoint::from_coordinate(Chart::Out2, 1.0, z).unwrap()
    }

    #[test]
    fn roundtrip_on_the_same_system() {
        let p = p0();
        let adj = adjusted_orbit(&q0(0.1), &p, 10).unwrap();
        let r = recover_point(&adj, &p).unwrap();
        assert!((r.z0() - 0.1).abs() < 1e-10 * 0.1);
        assert!((r.rho1() - 0.0025).abs() < 1e-10 * 0.0025);
        assert!(r.theta0.abs() < 1e-12);
        assert!(
            r.theta0_reduced.abs() < 1e-12
                || (r.theta0_reduced - std::f64::consts::TAU).abs() < 1e-12
        );
    }

    #[test]
    fn reference_image() {
        let r = map_h(&q0(0.1), &p0(), &g0()).unwrap();
        assert!((r.z0() - 0.01).abs() < 1e-12);
        assert!((r.rho1() - 6.25e-6).abs() < 1e-17);
        // g's own local map sends āz̄0 to (āz̄0)^δ̄1
        assert!((r.rho1_log - 2.0 * (0.25f64 * r.z0()).ln()).abs() < 1e-10);
    }

    #[test]
    fn mismatched_tuple_is_refused() {
        let mut g = g0();
        g.c2 = 6.6;
        assert!(matches!(
            map_h(&q0(0.1), &p0(), &g),
            Err(BykovError::InvariantMismatch { .. })
        ));
    }

    #[test]
    fn matched_times_agree() {
        let rep = verify_conjugacy(&q0(0.1), &p0(), &g0(), 10, 1e-8).unwrap();
        assert!(rep.verdict, "{rep:?}");
        assert!(rep.max_dev < 1e-8);
        let adj = adjusted_orbit(&q0(0.1), &p0(), 10).unwrap();
        let image =
            generate_hitting_sequence(&rep.image_point.section_point().unwrap(), &g0(), 1).unwrap();
        assert!((image.time(1) - 2.995732273553991).abs() < 1e-12);
        assert!((adj.t_odd[0].to_f64() - 2.995732273553991).abs() < 1e-12);

        let same = verify_conjugacy(&q0(0.1), &p0(), &p0(), 10, 1e-8).unwrap();
        assert!(same.max_dev < 1e-9 && same.verdict);
    }

    #[test]
    fn negative_control_diverges() {
        let mut g = g0();
        g.c2 = 6.6;
        let rep = verify_conjugacy(&q0(0.1), &p0(), &g, 10, 1e-8).unwrap();
        assert!(!rep.verdict && !rep.invariants_match);
        assert!(rep.first_failure.unwrap() <= 3);
        let pairs = rep.pair_deviations();
        for w in pairs[1..].windows(2) {
            assert!(w[1] > 2.0 * w[0], "{pairs:?}");
        }
    }

    #[test]
    fn later_points_from_shifted_times() {
        let p = p0();
        let h = generate_hitting_sequence(&q0(0.3), &p, 10).unwrap();
        let adj = adjusted_sequence(&h, &p.derived().unwrap(), 10).unwrap();
        for n in 1..4 {
            let r = recover_point_at(&adj, &p, n).unwrap();
            let want = h.points()[2 * n].log_coord();
            assert!((r.z0_log - want).abs() <= 1e-9 * want.abs(), "n={n}");
        }
    }

    #[test]
    fn bad_times() {
        let mut adj = adjusted_orbit(&q0(0.1), &p0(), 3).unwrap();
        adj.t_odd[0] = adj.t_even[0];
        assert!(matches!(
            recover_point(&adj, &p0()),
            Err(BykovError::InvalidTimes(_))
        ));
    }

    #[test]
    fn injective_and_continuous() {
        let (p, g) = (p0(), g0());
        let z = 0.1;
        let a = map_h(&q0(z), &p, &g).unwrap().z0();
        let b = map_h(&q0(z * (1.0 + 1e-6)), &p, &g).unwrap().z0();
        assert!((a - b).abs() / a >= 1e-7);

        let dz = 1e-8;
        let c = map_h(&q0(z + dz), &p, &g).unwrap().z0();
        let bound = (g.e1 / p.e1) * dz / z * (1.0 + 1e-6);
        assert!((c - a).abs() / a <= bound);
    }

    proptest! {
        #[test]
        fn matched_family_conjugates(z0 in 1e-3f64..0.9, e1 in 0.6f64..3.0, frac in 0.05f64..0.95) {
            let p = p0();
            let d = p.derived().unwrap();
            // Ē2 strictly between Ē1/γ1 and γ2·Ē1 keeps both C̄ > Ē
            let lo = e1 / d.gamma1.to_f64();
            let hi = d.gamma2.to_f64() * e1;
            let e2 = lo + frac * (hi - lo);
            let g = matching_params(&p, e1, e2, 0.5).unwrap();
            let rep = verify_conjugacy(&q0(z0), &p, &g, 8, 1e-8).unwrap();
            prop_assert!(rep.verdict, "{:?}", rep);
        }
    }
}
