//! Scalar Dormand–Prince 5(4) stepper with the standard 4th-order dense output.

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Continuous extension of one accepted step, valid on `[t0, t0 + h]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Dense {
    pub t0: f64,
    pub h: f64,
    r: [f64; 5],
}

impl Dense {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.r;
        r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])))
    }
}

/// Result of one trial step.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Trial {
    pub y: f64,
    /// Embedded error estimate (unscaled).
    pub err: f64,
    /// Derivative at the new point (first stage of the next step).
    pub k7: f64,
    pub dense: Dense,
}

pub(crate) fn trial<F: Fn(f64, f64) -> f64>(f: &F, t: f64, y: f64, h: f64, k1: f64) -> Trial {
    let k2 = f(t + C2 * h, y + h * A21 * k1);
    let k3 = f(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
    let k4 = f(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
    let k5 = f(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
    let k6 = f(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
    let y1 = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
    let k7 = f(t + h, y1);
    let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    let ydiff = y1 - y;
    let bspl = h * k1 - ydiff;
    let r = [
        y,
        ydiff,
        bspl,
        ydiff - h * k7 - bspl,
        h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
    ];
    Trial { y: y1, err, k7, dense: Dense { t0: t, h, r } }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Accepted {
    pub t0: f64,
    pub y0: f64,
    pub k1: f64,
    pub t1: f64,
    pub y1: f64,
    pub dense: Dense,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct StepFail {
    pub t: f64,
    pub h: f64,
}

const MAX_STEPS: usize = 2_000_000;

/// Adaptive driver with FSAL reuse; one accepted step per call.
pub(crate) struct Stepper<F> {
    pub f: F,
    pub t: f64,
    pub y: f64,
    k1: f64,
    h: f64,
    rtol: f64,
    atol: f64,
    steps: usize,
}

impl<F: Fn(f64, f64) -> f64> Stepper<F> {
    pub fn new(f: F, t: f64, y: f64, h0: f64, rtol: f64, atol: f64) -> Self {
        let k1 = f(t, y);
        Stepper { f, t, y, k1, h: h0, rtol, atol, steps: 0 }
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Take one accepted step, never passing `t_end`.
    pub fn advance(&mut self, t_end: f64) -> Result<Accepted, StepFail> {
        let mut rejected = false;
        loop {
            self.steps += 1;
            if self.steps > MAX_STEPS {
                return Err(StepFail { t: self.t, h: self.h });
            }
            let remaining = t_end - self.t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            if !(h > 1e-15 * (1.0 + self.t.abs())) && !last {
                return Err(StepFail { t: self.t, h });
            }
            let tr = trial(&self.f, self.t, self.y, h, self.k1);
            let sc = self.atol + self.rtol * self.y.abs().max(tr.y.abs());
            let e = (tr.err / sc).abs();
            if !e.is_finite() || !tr.y.is_finite() {
                self.h = 0.25 * h;
                rejected = true;
                continue;
            }
            if e <= 1.0 {
                let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                let fac = if rejected { fac.min(1.0) } else { fac };
                let acc = Accepted {
                    t0: self.t,
                    y0: self.y,
                    k1: self.k1,
                    t1: if last { t_end } else { self.t + h },
                    y1: tr.y,
                    dense: tr.dense,
                };
                self.t = acc.t1;
                self.y = tr.y;
                self.k1 = tr.k7;
                // Keep the pre-clip step for the next call when the last step was clipped.
                self.h = if last { self.h.max(h * fac) } else { h * fac };
                return Ok(acc);
            }
            rejected = true;
            self.h = h * (0.9 * e.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
}
