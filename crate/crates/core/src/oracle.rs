//! Reference integrator for the linearized vector fields.
//!
//! Classical RK4 on `(ρ, θ, z)` in ordinary (not log) coordinates, with
//! section crossings located by bisecting the final step. Nothing here
//! uses the closed-form local maps; it exists to check them.

use crate::params::SystemParams;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LegEnd {
    pub time: f64,
    pub rho: f64,
    pub theta: f64,
    pub z: f64,
}

type State = [f64; 3];

fn field(p: &SystemParams, in_v1: bool, s: &State) -> State {
    let [rho, _, z] = *s;
    if in_v1 {
        [-p.c1 * rho, p.omega1, p.e1 * z]
    } else {
        [p.e2 * rho, p.omega2, -p.c2 * z]
    }
}

fn rk4_step(p: &SystemParams, in_v1: bool, s: &State, h: f64) -> State {
    let add = |a: &State, k: &State, f: f64| [a[0] + f * k[0], a[1] + f * k[1], a[2] + f * k[2]];
    let k1 = field(p, in_v1, s);
    let k2 = field(p, in_v1, &add(s, &k1, h / 2.0));
    let k3 = field(p, in_v1, &add(s, &k2, h / 2.0));
    let k4 = field(p, in_v1, &add(s, &k3, h));
    [
        s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        s[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// Integrates inside one cylinder from `(ρ, θ, z)` until the exit section
/// (`z = 1` in `V1`, `ρ = 1` in `V2`) is reached.
pub fn integrate_cylinder(
    p: &SystemParams,
    in_v1: bool,
    theta: f64,
    rho: f64,
    z: f64,
    step: f64,
) -> LegEnd {
    let exit_coord = |s: &State| if in_v1 { s[2] } else { s[0] };
    let mut s: State = [rho, theta, z];
    let mut t = 0.0;
    loop {
        let next = rk4_step(p, in_v1, &s, step);
        if exit_coord(&next) >= 1.0 {
            let (mut lo, mut hi) = (0.0, step);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if exit_coord(&rk4_step(p, in_v1, &s, mid)) >= 1.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let h = 0.5 * (lo + hi);
            let end = rk4_step(p, in_v1, &s, h);
            return LegEnd {
                time: t + h,
                rho: end[0],
                theta: end[1],
                z: end[2],
            };
        }
        s = next;
        t += step;
    }
}

/// Hitting times `t_1, t_2, …` of the orbit starting at `(1, θ0, z0)` on
/// the outgoing wall of the second cylinder, obtained by numerical
/// integration with instantaneous transitions in between.
pub fn ode_hitting_times(
    p: &SystemParams,
    theta0: f64,
    z0: f64,
    legs: usize,
    step: f64,
) -> Vec<f64> {
    let tau = std::f64::consts::TAU;
    let mut times = Vec::with_capacity(legs);
    let mut t = 0.0;
    let mut theta = theta0;
    let mut z = z0;
    let mut rho = 1.0;
    for leg in 0..legs {
        if leg.is_multiple_of(2) {
            // Out2 -> In1
            let end = integrate_cylinder(p, true, theta.rem_euclid(tau) / p.a, 1.0, p.a * z, step);
            t += end.time;
            rho = end.rho;
            theta = end.theta;
        } else {
            let end = integrate_cylinder(p, false, theta, rho, 1.0, step);
            t += end.time;
            z = end.z;
            theta = end.theta;
        }
        times.push(t);
    }
    times
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_exit_time() {
        let p = SystemParams::new(2.0, 1.0, 1.0, 3.0, 1.5, 2.0, 0.5);
        let end = integrate_cylinder(&p, true, 0.0, 1.0, (-1.0f64).exp(), 1e-3);
        assert!((end.time - 1.0).abs() < 1e-10);
        assert!((end.rho - (-2.0f64).exp()).abs() < 1e-10);
    }
}
