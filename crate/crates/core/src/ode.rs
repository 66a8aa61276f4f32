//! Integrators for `u'' = q(r) u` on a node list and for scalar first-order
//! equations.

use crate::error::{Error, Result};

/// Coefficient `q(r)` of `u'' = q u`, with one-sided limits at jumps.
pub(crate) trait Coefficient {
    /// Right limit.
    fn q(&self, r: f64) -> f64;
    /// Left limit.
    fn q_left(&self, r: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Outward,
    Inward,
}

/// Solution samples aligned with ascending nodes, plus the number of sign
/// changes of `u` met along the way.
#[derive(Debug, Clone)]
pub(crate) struct LinearShot {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub zeros: usize,
}

const RESCALE_AT: f64 = 1e100;

/// RK4 with per-interval substeps chosen so that `h·√|q| ≤ phase_step`.
/// The start point is `nodes[0]` when outward and the last node when inward.
pub(crate) fn shoot<C: Coefficient>(c: &C, nodes: &[f64], u0: f64, v0: f64, dir: Direction, phase_step: f64) -> LinearShot {
    let n = nodes.len();
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let (mut cu, mut cv) = (u0, v0);
    let mut zeros = 0;
    let mut sign = if u0 != 0.0 { u0.signum() } else { 0.0 };
    let mut q_nodes = Vec::new();
    let mut q_mid = Vec::new();

    let order: Box<dyn Iterator<Item = usize>> = match dir {
        Direction::Outward => Box::new(0..n),
        Direction::Inward => Box::new((0..n).rev()),
    };
    let mut prev: Option<usize> = None;
    let mut filled: Vec<usize> = Vec::with_capacity(n);
    for i in order {
        if let Some(p) = prev {
            let (lo, hi) = if p < i { (p, i) } else { (i, p) };
            let (a, b) = (nodes[lo], nodes[hi]);
            let q_a = c.q(a);
            let q_b = c.q_left(b);
            let q_c = c.q(0.5 * (a + b));
            let scale = q_a.abs().max(q_b.abs()).max(q_c.abs()).sqrt();
            let m = ((b - a) * scale / phase_step).ceil().clamp(1.0, 20000.0) as usize;
            let h = (b - a) / m as f64;
            q_nodes.clear();
            q_mid.clear();
            for j in 0..=m {
                q_nodes.push(if j == 0 {
                    q_a
                } else if j == m {
                    q_b
                } else {
                    c.q(a + h * j as f64)
                });
            }
            for j in 0..m {
                q_mid.push(c.q(a + h * (j as f64 + 0.5)));
            }
            for jj in 0..m {
                let (hs, q0, qm, q1) = match dir {
                    Direction::Outward => (h, q_nodes[jj], q_mid[jj], q_nodes[jj + 1]),
                    Direction::Inward => {
                        let j = m - 1 - jj;
                        (-h, q_nodes[j + 1], q_mid[j], q_nodes[j])
                    }
                };
                let (nu, nv) = rk4(cu, cv, hs, q0, qm, q1);
                cu = nu;
                cv = nv;
                if cu != 0.0 {
                    let s = cu.signum();
                    if sign != 0.0 && s != sign {
                        zeros += 1;
                    }
                    sign = s;
                }
            }
            let mag = cu.abs() + cv.abs();
            if mag > RESCALE_AT {
                cu /= mag;
                cv /= mag;
                for &k in &filled {
                    u[k] /= mag;
                    v[k] /= mag;
                }
            }
        }
        u[i] = cu;
        v[i] = cv;
        filled.push(i);
        prev = Some(i);
    }
    LinearShot { u, v, zeros }
}

#[inline]
fn rk4(u: f64, v: f64, h: f64, q0: f64, qm: f64, q1: f64) -> (f64, f64) {
    let k1u = v;
    let k1v = q0 * u;
    let k2u = v + 0.5 * h * k1v;
    let k2v = qm * (u + 0.5 * h * k1u);
    let k3u = v + 0.5 * h * k2v;
    let k3v = qm * (u + 0.5 * h * k2u);
    let k4u = v + h * k3v;
    let k4v = q1 * (u + h * k3u);
    (
        u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

/// Adaptive Dormand–Prince 5(4) for a scalar equation from `t0` to `t1`
/// (either direction). Returns the end value and a suggested next step.
pub(crate) fn dopri5(
    f: impl Fn(f64, f64) -> f64,
    t0: f64,
    z0: f64,
    t1: f64,
    h_init: f64,
    rtol: f64,
    atol: f64,
) -> Result<(f64, f64)> {
    const C2: f64 = 1.0 / 5.0;
    const C3: f64 = 3.0 / 10.0;
    const C4: f64 = 4.0 / 5.0;
    const C5: f64 = 8.0 / 9.0;
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    const E1: f64 = 71.0 / 57600.0;
    const E3: f64 = -71.0 / 16695.0;
    const E4: f64 = 71.0 / 1920.0;
    const E5: f64 = -17253.0 / 339200.0;
    const E6: f64 = 22.0 / 525.0;
    const E7: f64 = -1.0 / 40.0;

    let span = t1 - t0;
    if span == 0.0 {
        return Ok((z0, h_init));
    }
    let dir = span.signum();
    let mut h = h_init.abs().min(span.abs()).max(1e-12 * span.abs()) * dir;
    let mut t = t0;
    let mut z = z0;
    let mut k1 = f(t, z);
    for _ in 0..100_000 {
        if (t1 - t) * dir <= 0.0 {
            return Ok((z, h));
        }
        let last = (t + h - t1) * dir >= 0.0;
        let hs = if last { t1 - t } else { h };
        let k2 = f(t + C2 * hs, z + hs * A21 * k1);
        let k3 = f(t + C3 * hs, z + hs * (A31 * k1 + A32 * k2));
        let k4 = f(t + C4 * hs, z + hs * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(t + C5 * hs, z + hs * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = f(t + hs, z + hs * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let zn = z + hs * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(t + hs, zn);
        let err = hs * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let sc = atol + rtol * z.abs().max(zn.abs());
        let ratio = (err / sc).abs();
        if !zn.is_finite() {
            h = 0.25 * hs;
            if h.abs() < 1e-14 * span.abs() {
                return Err(Error::Numerical("Riccati integration diverged".into()));
            }
            continue;
        }
        if ratio <= 1.0 {
            t = if last { t1 } else { t + hs };
            z = zn;
            k1 = k7;
            let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            if !last {
                h = hs * grow;
            } else {
                h *= grow.max(1.0);
            }
        } else {
            h = hs * (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
            if h.abs() < 1e-14 * span.abs().max(1e-300) {
                return Err(Error::Numerical("step size underflow in Riccati integration".into()));
            }
        }
    }
    Err(Error::Numerical("too many steps in Riccati integration".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Constant(f64);
    impl Coefficient for Constant {
        fn q(&self, _: f64) -> f64 {
            self.0
        }
        fn q_left(&self, _: f64) -> f64 {
            self.0
        }
    }

    #[test]
    fn oscillator_zero_count_and_phase() {
        // u'' = -u from u=0, u'=1: u = sin r, zeros at kπ
        let nodes: Vec<f64> = (0..=1000).map(|i| 1e-9 + 10.0 * i as f64 / 1000.0).collect();
        let s = shoot(&Constant(-1.0), &nodes, 1e-9, 1.0, Direction::Outward, 0.05);
        assert_eq!(s.zeros, 3);
        assert_relative_eq!(s.u[1000], (10.0f64 + 1e-9).sin(), epsilon = 1e-8);
        assert_relative_eq!(s.v[1000], (10.0f64 + 1e-9).cos(), epsilon = 1e-8);
    }

    #[test]
    fn inward_growth_is_rescaled() {
        // u'' = u from the far end with the decaying branch: u ∝ e^{-r}
        let nodes: Vec<f64> = (1..=2000).map(|i| i as f64 * 0.5).collect();
        let s = shoot(&Constant(1.0), &nodes, 1.0, -1.0, Direction::Inward, 0.05);
        assert!(s.u.iter().all(|x| x.is_finite()));
        let ratio = s.u[0] / s.u[1];
        assert_relative_eq!(ratio, 0.5f64.exp(), max_relative = 1e-7);
        assert_eq!(s.zeros, 0);
    }

    #[test]
    fn dopri_exponential() {
        let (z, _) = dopri5(|_, z| -z, 0.0, 1.0, 3.0, 0.1, 1e-12, 1e-14).unwrap();
        assert_relative_eq!(z, (-3.0f64).exp(), max_relative = 1e-10);
        let (z, _) = dopri5(|_, z| -z, 3.0, 1.0, 0.0, 0.1, 1e-12, 1e-14).unwrap();
        assert_relative_eq!(z, 3.0f64.exp(), max_relative = 1e-10);
    }
}
