//! Model parameters, derived constants and the conjugacy invariants.
//!
//! The model is fixed by two saddle-foci with eigenvalues `-C1 ± iω1, E1`
//! and `E2 ± iω2, -C2`, plus the contraction `a` of the transition from
//! the two-dimensional connection back to the first equilibrium.
//! Logarithms are natural throughout.

use serde::{Deserialize, Serialize};

use crate::dd::DoubleDouble;
use crate::error::{BykovError, Result};

/// Amplitudes of the higher-order terms of the local maps.
///
/// `c1 = c2 = 0` is the idealized (purely linear) model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub c1: f64,
    pub c2: f64,
    pub eps: f64,
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(violation("eps in (0,1)"));
        }
        if !(self.c1 >= 0.0 && self.c1.is_finite()) {
            return Err(violation("c1 >= 0"));
        }
        if !(self.c2 >= 0.0 && self.c2.is_finite()) {
            return Err(violation("c2 >= 0"));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.c1 == 0.0 && self.c2 == 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "E1")]
    pub e1: f64,
    pub omega1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    pub omega2: f64,
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSpec>,
}

fn violation(what: &str) -> BykovError {
    BykovError::ConstraintViolation(format!("{what} violated"))
}

impl SystemParams {
    /// Idealized parameter set (no higher-order terms).
    pub fn new(c1: f64, e1: f64, omega1: f64, c2: f64, e2: f64, omega2: f64, a: f64) -> Self {
        SystemParams {
            c1,
            e1,
            omega1,
            c2,
            e2,
            omega2,
            a,
            perturbation: None,
        }
    }

    pub fn with_perturbation(mut self, spec: PerturbationSpec) -> Self {
        self.perturbation = Some(spec);
        self
    }

    /// Returns `self` unchanged when every eigenvalue and transition
    /// constraint holds, otherwise names the first violated inequality.
    pub fn validate(self) -> Result<Self> {
        let fields = [
            self.c1,
            self.e1,
            self.omega1,
            self.c2,
            self.e2,
            self.omega2,
            self.a,
        ];
        if fields.iter().any(|x| !x.is_finite()) {
            return Err(violation("finite parameters"));
        }
        if self.omega1 <= 0.0 {
            return Err(violation("omega1 > 0"));
        }
        if self.omega2 <= 0.0 {
            return Err(violation("omega2 > 0"));
        }
        if self.e1 <= 0.0 {
            return Err(violation("E1 > 0"));
        }
        if self.c1 <= self.e1 {
            return Err(violation("C1 > E1"));
        }
        if self.e2 <= 0.0 {
            return Err(violation("E2 > 0"));
        }
        if self.c2 <= self.e2 {
            return Err(violation("C2 > E2"));
        }
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(violation("a in (0,1)"));
        }
        if let Some(spec) = &self.perturbation {
            spec.validate()?;
        }
        Ok(self)
    }

    /// `ln a`, the one logarithm every downstream computation shares.
    pub fn log_a(&self) -> f64 {
        self.a.ln()
    }

    /// Active perturbation, `None` for the idealized model.
    pub fn active_perturbation(&self) -> Option<&PerturbationSpec> {
        self.perturbation.as_ref().filter(|s| !s.is_zero())
    }

    pub fn derived(&self) -> Result<DerivedConstants> {
        derive_constants(self)
    }

    pub fn invariants(&self) -> Result<InvariantTuple> {
        invariant_tuple(self)
    }
}

/// Ratios and rates that the hitting-time asymptotics are written in.
///
/// Stored in double-double so that identities such as `δ = γ1·γ2 = δ1·δ2`
/// stay consistent when multiplied by times of order `10^7`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedConstants {
    pub gamma1: DoubleDouble,
    pub gamma2: DoubleDouble,
    pub delta1: DoubleDouble,
    pub delta2: DoubleDouble,
    pub delta: DoubleDouble,
    /// Angular drift per unit of `-ln z` over one return.
    pub k: DoubleDouble,
    pub tau: DoubleDouble,
    pub log_a: DoubleDouble,
    /// `τ·ln a`, negative.
    pub tau_log_a: DoubleDouble,
    pub e1: f64,
    pub e2: f64,
    pub omega1: f64,
    pub omega2: f64,
}

pub fn derive_constants(p: &SystemParams) -> Result<DerivedConstants> {
    let p = p.validate()?;
    let gamma1 = DoubleDouble::from_ratio(p.c1, p.e2);
    let gamma2 = DoubleDouble::from_ratio(p.c2, p.e1);
    let delta1 = DoubleDouble::from_ratio(p.c1, p.e1);
    let delta2 = DoubleDouble::from_ratio(p.c2, p.e2);
    let delta = DoubleDouble::from_product(p.c1, p.c2) / DoubleDouble::from_product(p.e1, p.e2);
    let k = (gamma1 * p.omega2 + p.omega1) / p.e1;
    let tau = (gamma1 + 1.0) / p.e1;
    let log_a = DoubleDouble::from(p.log_a());
    Ok(DerivedConstants {
        gamma1,
        gamma2,
        delta1,
        delta2,
        delta,
        k,
        tau,
        log_a,
        tau_log_a: tau * log_a,
        e1: p.e1,
        e2: p.e2,
        omega1: p.omega1,
        omega2: p.omega2,
    })
}

impl DerivedConstants {
    /// `ω1 + γ1·ω2`.
    pub fn omega_combo(&self) -> DoubleDouble {
        self.gamma1 * self.omega2 + self.omega1
    }

    /// `-(1/E1)·ln a`, the limit of the first lemma combination.
    pub fn first_lemma_limit(&self) -> DoubleDouble {
        -self.log_a / self.e1
    }

    pub fn invariants(&self) -> InvariantTuple {
        InvariantTuple {
            gamma1: self.gamma1.to_f64(),
            gamma2: self.gamma2.to_f64(),
            omega_combo: self.omega_combo().to_f64(),
            tau_log_a: self.tau_log_a.to_f64(),
        }
    }
}

/// `(γ1, γ2, ω1 + γ1·ω2, τ·ln a)`: equal tuples is exactly the condition
/// under which two systems are conjugate near their attractors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantTuple {
    pub gamma1: f64,
    pub gamma2: f64,
    pub omega_combo: f64,
    pub tau_log_a: f64,
}

impl InvariantTuple {
    pub fn as_array(&self) -> [f64; 4] {
        [self.gamma1, self.gamma2, self.omega_combo, self.tau_log_a]
    }

    /// Largest componentwise relative deviation from `other`.
    pub fn max_rel_deviation(&self, other: &InvariantTuple) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

pub fn invariant_tuple(p: &SystemParams) -> Result<InvariantTuple> {
    Ok(derive_constants(p)?.invariants())
}

/// Solves the four invariant equations for a second system, taking
/// `(Ē1, Ē2, ω̄2)` as the free coordinates of the 3-parameter family.
///
/// The perturbation spec of `p` is carried over unchanged.
pub fn matching_params(
    p: &SystemParams,
    e1_bar: f64,
    e2_bar: f64,
    omega2_bar: f64,
) -> Result<SystemParams> {
    let p = p.validate()?;
    for (name, v) in [
        ("E1_bar", e1_bar),
        ("E2_bar", e2_bar),
        ("omega2_bar", omega2_bar),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(violation(&format!("{name} > 0")));
        }
    }
    let d = derive_constants(&p)?;
    let c1_bar = (d.gamma1 * e2_bar).to_f64();
    let c2_bar = (d.gamma2 * e1_bar).to_f64();
    let omega1_bar = (d.omega_combo() - d.gamma1 * omega2_bar).to_f64();
    let tau_bar = (d.gamma1 + 1.0) / e1_bar;
    let a_bar = (d.tau_log_a / tau_bar).to_f64().exp();
    if omega1_bar <= 0.0 {
        return Err(BykovError::ConstraintViolation(format!(
            "omega1_bar = {omega1_bar} must be > 0"
        )));
    }
    let q = SystemParams {
        c1: c1_bar,
        e1: e1_bar,
        omega1: omega1_bar,
        c2: c2_bar,
        e2: e2_bar,
        omega2: omega2_bar,
        a: a_bar,
        perturbation: p.perturbation,
    };
    q.validate()
}
