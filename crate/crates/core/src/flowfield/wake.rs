//! Periodic vortex shedding behind a cylinder, as an analytic stream function.
//!
//! The model follows Jung, Tél and Ziemniak (1993): a no-slip factor around a
//! unit cylinder at the origin multiplies two Gaussian vortices that are born
//! alternately above and below the wake, drift downstream and decay, on top of
//! a uniform stream that is screened near the cylinder.

use std::f64::consts::PI;

use super::VectorField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WakeParams {
    /// Steepness of the no-slip factor.
    pub a: f64,
    /// Inverse squared vortex radius.
    pub r0: f64,
    /// Vortex ellipticity.
    pub alpha: f64,
    /// Vortex offset from the wake axis.
    pub y0: f64,
    /// Distance a vortex drifts in one period.
    pub drift: f64,
    /// Vortex strength.
    pub w: f64,
    /// Free-stream speed.
    pub u0: f64,
    /// Shedding period.
    pub period: f64,
}

impl Default for WakeParams {
    fn default() -> Self {
        WakeParams {
            a: 1.0,
            r0: 0.35,
            alpha: 2.0,
            y0: 0.3,
            drift: 2.0,
            w: 24.0,
            u0: 14.0,
            period: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CylinderWake {
    pub params: WakeParams,
}

/// Value and gradient.
type Jet = (f64, f64, f64);

impl CylinderWake {
    /// Stream function and its gradient at `(x, y, t)`.
    pub fn stream(&self, x: f64, y: f64, t: f64) -> Jet {
        let p = &self.params;
        let r = x.hypot(y);
        let e = (-p.a * (r - 1.0).powi(2)).exp();
        let f = 1.0 - e;
        let (fx, fy) = if r > 0.0 {
            let c = 2.0 * p.a * (r - 1.0) * e / r;
            (c * x, c * y)
        } else {
            (0.0, 0.0)
        };

        let phase = t / p.period;
        let vortex = |sign: f64, lag: f64| -> Jet {
            let strength = sign * p.w * (PI * (phase - lag)).sin().abs();
            let xc = 1.0 + p.drift * (phase - lag).rem_euclid(1.0);
            let yc = -sign * p.y0;
            let (dx, dy) = (x - xc, y - yc);
            let gi = strength * (-p.r0 * (dx * dx + p.alpha * p.alpha * dy * dy)).exp();
            (gi, -2.0 * p.r0 * dx * gi, -2.0 * p.r0 * p.alpha * p.alpha * dy * gi)
        };
        let v1 = vortex(-1.0, 0.0);
        let v2 = vortex(1.0, 0.5);

        let es = (-(x - 1.0).powi(2) / (p.alpha * p.alpha) - y * y).exp();
        let s = 1.0 - es;
        let sx = es * 2.0 * (x - 1.0) / (p.alpha * p.alpha);
        let sy = es * 2.0 * y;
        let stream = (p.u0 * y * s, p.u0 * y * sx, p.u0 * (s + y * sy));

        let g = v1.0 + v2.0 + stream.0;
        let gx = v1.1 + v2.1 + stream.1;
        let gy = v1.2 + v2.2 + stream.2;
        (f * g, fx * g + f * gx, fy * g + f * gy)
    }
}

impl VectorField for CylinderWake {
    fn dim(&self) -> usize {
        2
    }

    fn velocity(&self, x: &[f64], t: f64, out: &mut [f64]) {
        let (_, px, py) = self.stream(x[0], x[1], t);
        out[0] = py;
        out[1] = -px;
    }
}
