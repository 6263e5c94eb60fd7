//! Acceptance checks on the reference system `(2, 1, 1, 3, 1.5, 2, 0.5)`
//! with seed `θ0 = 1`, `z0 = 0.1`.

use std::f64::consts::LN_2;
use std::fmt;
use std::time::{Duration, Instant};

use bykov_core::diagnostics::{lemma2_decay_slope, root_test};
use bykov_core::oracle::ode_hitting_times;
use bykov_core::{
    adjusted_sequence, birkhoff_average, corollary_ratios, generate_hitting_sequence,
    historic_certificate, lemma_diagnostics, poincare, shift_invariance_check, verify_conjugacy,
    BykovError, Chart, Observable, PerturbationSpec, SectionPoint, SystemParams,
};

pub fn reference_params() -> SystemParams {
    SystemParams::new(2.0, 1.0, 1.0, 3.0, 1.5, 2.0, 0.5)
}

pub fn reference_perturbed() -> SystemParams {
    reference_params().with_perturbation(PerturbationSpec {
        c1: 0.1,
        c2: 0.1,
        eps: 0.5,
    })
}

/// The system with the reference tuple and `(Ē1, Ē2, ω̄2) = (2, 3, 1)`.
pub fn reference_target() -> SystemParams {
    SystemParams::new(4.0, 2.0, 7.0 / 3.0, 6.0, 3.0, 1.0, 0.25)
}

pub fn reference_seed() -> SectionPoint {
    SectionPoint::from_coordinate(Chart::Out2, 1.0, 0.1).expect("reference seed is valid")
}

/// `t_1 … t_4` of the reference orbit, closed forms to 16 digits.
pub const REFERENCE_TIMES: [f64; 4] = [
    2.995732273553991,
    6.990041971625979,
    19.66611824640189,
    36.56755327943643,
];

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "criterion {} {verdict} {}: {}",
            self.id, self.title, self.detail
        )
    }
}

type Check = Result<(bool, String), BykovError>;

fn outcome(id: u8, title: &'static str, check: Check) -> Outcome {
    let (passed, detail) = check.unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome {
        id,
        title,
        passed,
        detail,
    }
}

fn max_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(
        0.0,
        |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) },
    )
}

pub fn hitting_times() -> Outcome {
    outcome(
        1,
        "hitting times",
        (|| {
            let start = Instant::now();
            let h = generate_hitting_sequence(&reference_seed(), &reference_params(), 2)?;
            let closed = max_abs((1..=4).map(|k| h.time(k) - REFERENCE_TIMES[k - 1]));
            let ode = ode_hitting_times(&reference_params(), 1.0, 0.1, 4, 1e-3);
            let vs_ode = max_abs((1..=4).map(|k| h.time(k) - ode[k - 1]));
            let elapsed = start.elapsed();
            let ok = closed <= 1e-9 && vs_ode <= 1e-6 && elapsed < Duration::from_secs(1);
            Ok((
                ok,
                format!("closed-form dev {closed:.1e}, ODE dev {vs_ode:.1e}, {elapsed:.2?}"),
            ))
        })(),
    )
}

pub fn lemma_idealized() -> Outcome {
    outcome(
        2,
        "lemma sequences, idealized",
        (|| {
            let p = reference_params();
            let d = p.derived()?;
            let s = lemma_diagnostics(&generate_hitting_sequence(&reference_seed(), &p, 11)?, &d)?;
            let tau_ln_a = d.tau_log_a.to_f64();
            let mut dev = [0.0f64; 3];
            for i in 1..=10 {
                let vals = [s.lemma1[i], s.lemma2[i], s.lemma3[i]].map(|v| v.unwrap_or(f64::NAN));
                dev[0] = max_abs([dev[0], vals[0] - LN_2]);
                dev[1] = max_abs([dev[1], vals[1]]);
                dev[2] = max_abs([dev[2], vals[2] + tau_ln_a]);
            }
            let ok = dev.iter().all(|x| *x <= 1e-10);
            Ok((
                ok,
                format!(
                    "max dev lemma1 {:.1e}, lemma2 {:.1e}, lemma3 {:.1e}",
                    dev[0], dev[1], dev[2]
                ),
            ))
        })(),
    )
}

pub fn lemma_perturbed() -> Outcome {
    outcome(
        3,
        "lemma sequences, perturbed",
        (|| {
            let p = reference_perturbed();
            let d = p.derived()?;
            let h = generate_hitting_sequence(&reference_seed(), &p, 12)?;
            let s = lemma_diagnostics(&h, &d)?;
            let tau_ln_a = d.tau_log_a.to_f64();
            let limits = max_abs((10..s.len()).flat_map(|i| {
                [
                    s.lemma1[i].unwrap_or(f64::NAN) - LN_2,
                    s.lemma2[i].unwrap_or(f64::NAN),
                    s.lemma3[i].unwrap_or(f64::NAN) + tau_ln_a,
                ]
            }));
            let slope = lemma2_decay_slope(&h, &d)?;
            let want_slope = d.delta1.to_f64() * 0.5 - 0.1;
            let root = root_test(&s, 1);
            let ok = limits <= 1e-6 && slope >= want_slope && root < 1.0;
            Ok((ok, format!("limit dev from i=10 {limits:.1e}, lemma2 slope {slope:.3} (need {want_slope}), root test {root:.3}")))
        })(),
    )
}

pub fn corollary() -> Outcome {
    outcome(
        4,
        "ratio limits",
        (|| {
            let p = reference_params();
            let d = p.derived()?;
            let s = corollary_ratios(&generate_hitting_sequence(&reference_seed(), &p, 12)?, &p)?;
            let err = |v: &Vec<Option<f64>>, limit: f64| {
                max_abs((8..v.len()).map(|i| v[i].unwrap_or(f64::NAN) - limit))
            };
            let e1 = err(&s.ratio1, d.gamma1.to_f64());
            let e2 = err(&s.ratio2, d.gamma2.to_f64());
            let e3 = err(&s.ratio3, d.delta.to_f64());
            let w = (d.omega_combo() / (d.gamma1 + 1.0)).to_f64();
            let e4 = max_abs(s.ratio4.iter().map(|r| r.unwrap_or(f64::NAN) - w));
            let ok = e1 <= 1e-6 && e2 <= 1e-6 && e3 <= 1e-6 && e4 <= 1e-10;
            Ok((ok, format!("from i=8: ratio1 {e1:.1e}, ratio2 {e2:.1e}, ratio3 {e3:.1e}; ratio4 everywhere {e4:.1e}")))
        })(),
    )
}

pub fn historic() -> Outcome {
    outcome(
        5,
        "historic averages",
        (|| {
            let s = birkhoff_average(
                &reference_seed(),
                &reference_params(),
                &Observable::piecewise(0.0, 1.0),
                24,
            )?;
            let even = max_abs(s.even.iter().map(|e| e.average - 4.0 / 7.0));
            let odd = max_abs(s.odd.iter().skip(7).map(|e| e.average - 0.25));
            let c = historic_certificate(&s, 1e-3)?;
            let gap = (c.gap + 9.0 / 28.0).abs();
            let ok = even <= 1e-10 && odd <= 1e-3 && c.historic && gap <= 1e-9;
            Ok((ok, format!(
            "even dev {even:.1e}, odd dev from 8th odd time {odd:.1e}, certificate {}, gap {:.6} (dev {gap:.1e})",
            c.historic, c.gap
        )))
        })(),
    )
}

pub fn adjusted_times() -> Outcome {
    outcome(
        6,
        "adjusted times",
        (|| {
            let p = reference_params();
            let d = p.derived()?;
            let h = generate_hitting_sequence(&reference_seed(), &p, 12)?;
            let a = adjusted_sequence(&h, &d, 12)?;
            let t0_dev = (a.t0.to_f64() - REFERENCE_TIMES[1]).abs();
            let spin = d.omega_combo() / (d.gamma1 + 1.0);
            let mut identity = 0.0f64;
            for i in 1..a.t_seq.len() {
                let rec = (a.t_seq[i] - d.delta * a.t_seq[i - 1] + d.tau_log_a) / a.t_seq[i];
                let s1 = a.t_odd[i] - a.t_even[i];
                let s2 = a.t_even[i + 1] - a.t_odd[i];
                let w = ((s1 * d.omega1 + s2 * d.omega2) / (s1 + s2) - spin) / spin;
                identity = max_abs([identity, rec.to_f64(), w.to_f64()]);
            }

            let q = reference_perturbed();
            let dq = q.derived()?;
            let hq = generate_hitting_sequence(&reference_seed(), &q, 12)?;
            let aq = adjusted_sequence(&hq, &dq, 12)?;
            let shadow = max_abs((10..=12).map(|i| (hq.time_dd(2 * i) - aq.t_even[i]).to_f64()));

            let mut shift = 0.0f64;
            for n in 0..=9 {
                shift = shift.max(shift_invariance_check(&h, &d, n)?.deviation);
            }
            let sq = shift_invariance_check(&hq, &dq, 2)?;
            let ok = t0_dev <= 1e-9
                && a.residual_tail_bound <= 1e-20
                && identity <= 1e-12
                && shadow < 1e-6
                && shift < 1e-9
                && sq.deviation <= sq.bound + 1e-9;
            Ok((ok, format!(
            "T0 {:.9} (tail {:.1e}), identities {identity:.1e}, perturbed shadowing {shadow:.1e}, shift {shift:.1e} / perturbed {:.1e} <= {:.1e}",
            a.t0.to_f64(), a.residual_tail_bound, sq.deviation, sq.bound
        )))
        })(),
    )
}

fn conjugacy_checks() -> Check {
    let p = reference_params();
    let g = reference_target();
    let tuple_dev = p.invariants()?.max_rel_deviation(&g.invariants()?);
    let rep = verify_conjugacy(&reference_seed(), &p, &g, 10, 1e-8)?;
    let image = generate_hitting_sequence(&rep.image_point.section_point()?, &g, 1)?;
    let t1_dev = (image.time(1) - REFERENCE_TIMES[0]).abs();

    let mut wrong = g;
    wrong.c2 = 6.6;
    let neg = verify_conjugacy(&reference_seed(), &p, &wrong, 10, 1e-8)?;
    let pairs = neg.pair_deviations();
    let growing = pairs[1..].windows(2).all(|w| w[1] > 2.0 * w[0]);
    let fails_early = neg.first_failure.is_some_and(|k| k <= 3) && !neg.verdict;
    let ok = tuple_dev <= 1e-12
        && rep.verdict
        && rep.max_dev < 1e-8
        && t1_dev <= 1e-9
        && fails_early
        && growing;
    Ok((ok, format!(
        "tuple dev {tuple_dev:.1e}, max_dev {:.1e}, image t1 dev {t1_dev:.1e}; control fails at pair {:?}, growing {growing}",
        rep.max_dev, neg.first_failure
    )))
}

pub fn conjugacy() -> Outcome {
    outcome(
        7,
        "conjugacy",
        (|| {
            let start = Instant::now();
            let (mut ok, mut detail) = conjugacy_checks()?;
            for check in OTHERS {
                check();
            }
            let elapsed = start.elapsed();
            ok &= elapsed < Duration::from_secs(10);
            detail.push_str(&format!(", whole suite {elapsed:.2?}"));
            Ok((ok, detail))
        })(),
    )
}

pub fn robustness() -> Outcome {
    outcome(
        8,
        "log-space robustness",
        (|| {
            let mut worst = 0.0f64;
            let mut finite = true;
            for p in [reference_params(), reference_perturbed()] {
                let d = p.derived()?;
                let mut q = SectionPoint::from_coordinate(Chart::In1, 1.0, 0.05)?;
                let l0 = q.log_coord_dd();
                for n in 1..=30u32 {
                    let r = poincare(&q, &p)?;
                    q = r.point;
                    let l = q.log_coord_dd();
                    finite &= l.is_finite()
                        && l.hi < 0.0
                        && q.theta_lifted.is_finite()
                        && r.return_time.is_finite();
                    finite &= !q.coordinate().is_nan();
                    if p.active_perturbation().is_none() {
                        // ln z_n = δ^n ln z_0 + ln a (δ^n - 1)/(δ - 1)
                        let dn = d.delta.powi(n);
                        let want = dn * l0 + d.log_a * (dn - 1.0) / (d.delta - 1.0);
                        let scale = want.to_f64().abs().max(1.0);
                        worst = worst.max((l - want).to_f64().abs() / scale);
                    }
                }
                let h = generate_hitting_sequence(&reference_seed(), &p, 30)?;
                finite &= h.times_dd().iter().all(|t| t.is_finite());
            }
            let ok = finite && worst <= 1e-10;
            Ok((
                ok,
                format!("30 iterates finite {finite}, log-height recursion dev {worst:.1e}"),
            ))
        })(),
    )
}

const OTHERS: [fn() -> Outcome; 7] = [
    hitting_times,
    lemma_idealized,
    lemma_perturbed,
    corollary,
    historic,
    adjusted_times,
    robustness,
];

/// Every criterion, run concurrently, in criterion order.
pub fn verify_all() -> Vec<Outcome> {
    let checks: [fn() -> Outcome; 8] = [
        hitting_times,
        lemma_idealized,
        lemma_perturbed,
        corollary,
        historic,
        adjusted_times,
        conjugacy,
        robustness,
    ];
    std::thread::scope(|s| {
        let handles: Vec<_> = checks.iter().map(|c| s.spawn(c)).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("criterion thread panicked"))
            .collect()
    })
}
