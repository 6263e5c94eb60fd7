//! Time averages of observables along orbits, and the two distinct limits
//! they oscillate between.

use serde::{Deserialize, Serialize};

use crate::dd::DoubleDouble;
use crate::error::{BykovError, Result};
use crate::flow::SectionPoint;
use crate::hitting::{generate_hitting_sequence, HittingSequence};
use crate::params::{DerivedConstants, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableKind {
    /// `G ≡ G(σj)` on the whole cylinder `Vj`.
    PiecewiseConstant,
    /// `G = G(σj) + (g_boundary - G(σj))·max(ρ, |z|)^exponent` on `Vj`.
    Smooth { exponent: f64, g_boundary: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    #[serde(flatten)]
    pub kind: ObservableKind,
    pub g_sigma1: f64,
    pub g_sigma2: f64,
}

impl Observable {
    pub fn piecewise(g_sigma1: f64, g_sigma2: f64) -> Self {
        Observable {
            kind: ObservableKind::PiecewiseConstant,
            g_sigma1,
            g_sigma2,
        }
    }

    pub fn smooth(g_sigma1: f64, g_sigma2: f64, exponent: f64, g_boundary: f64) -> Self {
        Observable {
            kind: ObservableKind::Smooth {
                exponent,
                g_boundary,
            },
            g_sigma1,
            g_sigma2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g_sigma1.is_finite() && self.g_sigma2.is_finite()) {
            return Err(BykovError::ConstraintViolation(
                "finite observable values violated".into(),
            ));
        }
        if let ObservableKind::Smooth {
            exponent,
            g_boundary,
        } = self.kind
        {
            if !(exponent > 0.0 && exponent.is_finite()) {
                return Err(BykovError::ConstraintViolation(
                    "exponent > 0 violated".into(),
                ));
            }
            if !g_boundary.is_finite() {
                return Err(BykovError::ConstraintViolation(
                    "finite observable values violated".into(),
                ));
            }
        }
        Ok(())
    }

    /// Smallest and largest value the observable takes.
    pub fn range(&self) -> (f64, f64) {
        let mut vals = vec![self.g_sigma1, self.g_sigma2];
        if let ObservableKind::Smooth { g_boundary, .. } = self.kind {
            vals.push(g_boundary);
        }
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

impl Default for Observable {
    fn default() -> Self {
        Observable::piecewise(0.0, 1.0)
    }
}

/// Limits of the averages along even and odd hitting times.
pub fn predicted_limits(d: &DerivedConstants, g: &Observable) -> (f64, f64) {
    let g1 = d.gamma1.to_f64();
    let g2 = d.gamma2.to_f64();
    let even = g.g_sigma1 / (1.0 + g1) + g1 * g.g_sigma2 / (1.0 + g1);
    let odd = g2 * g.g_sigma1 / (1.0 + g2) + g.g_sigma2 / (1.0 + g2);
    (even, odd)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AverageEntry {
    /// Hitting index `k` of `t_k`.
    pub index: usize,
    pub time: f64,
    pub average: f64,
}

/// Averages at `t_2, t_4, …` (`even`) and `t_1, t_3, …` (`odd`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AverageSeries {
    pub even: Vec<AverageEntry>,
    pub odd: Vec<AverageEntry>,
    pub predicted_even: f64,
    pub predicted_odd: f64,
}

impl AverageSeries {
    pub fn even_averages(&self) -> Vec<f64> {
        self.even.iter().map(|e| e.average).collect()
    }

    pub fn odd_averages(&self) -> Vec<f64> {
        self.odd.iter().map(|e| e.average).collect()
    }
}

// 8-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(x, w)| w * (f(mid - half * x) + f(mid + half * x)))
        .sum::<f64>()
        * half
}

/// Panels cover this many e-folding widths of a boundary layer; beyond it
/// the integrand is below `e^-40`.
const LAYER_WIDTHS: f64 = 40.0;

/// Integral of a boundary layer decaying like `exp(-decay·s)` over
/// `[0, len]`, one Gauss panel per e-folding.
fn layer<F: Fn(f64) -> f64>(f: &F, len: f64, decay: f64) -> f64 {
    let width = 1.0 / decay;
    let end = len.min(LAYER_WIDTHS * width);
    let panels = (end / width).ceil().max(1.0) as usize;
    let h = end / panels as f64;
    (0..panels)
        .map(|j| gauss_legendre(f, j as f64 * h, (j + 1) as f64 * h))
        .sum()
}

/// `∫ max(ρ, |z|)^m` over one sojourn of length `S` in a cylinder whose
/// entry coordinate decays at `c_in` and whose exit coordinate grows at
/// `e_out`.
///
/// In log terms the integrand is `exp(m·max(-c_in·s, -e_out·(S - s)))`:
/// a layer at each wall, split where the two logs cross.
pub(crate) fn wall_integral(m: f64, c_in: f64, e_out: f64, len: f64) -> f64 {
    let cross = len * e_out / (c_in + e_out);
    let entry = |s: f64| (m * (-c_in * s).max(-e_out * (len - s))).exp();
    let exit = |u: f64| (m * (-e_out * u).max(-c_in * (len - u))).exp();
    layer(&entry, cross, m * c_in) + layer(&exit, len - cross, m * e_out)
}

fn leg_integral(h: &HittingSequence, k: usize, p: &SystemParams, g: &Observable) -> DoubleDouble {
    let len = h.leg(k);
    let (base, c_in, e_out) = if k.is_multiple_of(2) {
        (g.g_sigma1, p.c1, p.e1)
    } else {
        (g.g_sigma2, p.c2, p.e2)
    };
    let flat = len * base;
    match g.kind {
        ObservableKind::PiecewiseConstant => flat,
        ObservableKind::Smooth {
            exponent,
            g_boundary,
        } => flat + (g_boundary - base) * wall_integral(exponent, c_in, e_out, len.to_f64()),
    }
}

/// Averages `(1/t_k)∫_0^{t_k} G` at every hitting time of an existing
/// sequence, up to index `upto_index`.
pub fn averages_along(
    h: &HittingSequence,
    p: &SystemParams,
    g: &Observable,
    upto_index: usize,
) -> Result<AverageSeries> {
    g.validate()?;
    let d = p.derived()?;
    if upto_index == 0 || upto_index >= h.len() {
        return Err(BykovError::InsufficientData {
            needed: upto_index.max(1) + 1,
            available: h.len(),
        });
    }
    let (predicted_even, predicted_odd) = predicted_limits(&d, g);
    let mut out = AverageSeries {
        even: Vec::new(),
        odd: Vec::new(),
        predicted_even,
        predicted_odd,
    };
    let mut integral = DoubleDouble::ZERO;
    for k in 1..=upto_index {
        integral += leg_integral(h, k - 1, p, g);
        let t = h.time_dd(k);
        let entry = AverageEntry {
            index: k,
            time: t.to_f64(),
            average: (integral / t).to_f64(),
        };
        if k.is_multiple_of(2) {
            out.even.push(entry);
        } else {
            out.odd.push(entry);
        }
    }
    Ok(out)
}

/// Birkhoff averages of `G` along the orbit of `q0 ∈ Out2`, sampled at
/// `t_1, …, t_upto`.
pub fn birkhoff_average(
    q0: &SectionPoint,
    p: &SystemParams,
    g: &Observable,
    upto_index: usize,
) -> Result<AverageSeries> {
    let h = generate_hitting_sequence(q0, p, upto_index.div_ceil(2))?;
    averages_along(&h, p, g, upto_index)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub historic: bool,
    /// `predicted_odd - predicted_even`, i.e.
    /// `(1 - γ1γ2)(G(σ2) - G(σ1)) / ((1 + γ1)(1 + γ2))`.
    pub gap: f64,
    pub tail_even: f64,
    pub tail_odd: f64,
}

/// Non-convergence certificate: both parity tails sit within `tol` of their
/// predicted limits and those tails are more than `tol` apart.
pub fn historic_certificate(s: &AverageSeries, tol: f64) -> Result<Certificate> {
    let have = s.even.len().min(s.odd.len());
    if have < 4 {
        return Err(BykovError::InsufficientData {
            needed: 4,
            available: have,
        });
    }
    let tail_even = s.even[s.even.len() - 1].average;
    let tail_odd = s.odd[s.odd.len() - 1].average;
    let historic = (tail_even - tail_odd).abs() > tol
        && (tail_even - s.predicted_even).abs() <= tol
        && (tail_odd - s.predicted_odd).abs() <= tol;
    Ok(Certificate {
        historic,
        gap: s.predicted_odd - s.predicted_even,
        tail_even,
        tail_odd,
    })
}
