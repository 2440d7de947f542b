//! Dormand-Prince 5(4) with dense output.

use super::{AdosVector, SolveReport};
use crate::error::{HeomError, Result};
use crate::liouvillian::HeomMatrix;
use crate::C64;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on accepted steps.
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_steps: 10_000_000,
        }
    }
}

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
// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn combo(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for i in 0..out.len() {
        let mut acc = C64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += *c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

fn err_norm(y0: &[C64], y1: &[C64], e: &[C64], o: &OdeOptions) -> f64 {
    let mut s = 0.0;
    for i in 0..y0.len() {
        let sc = o.atol + o.rtol * y0[i].norm().max(y1[i].norm());
        let r = e[i].norm() / sc;
        s += r * r;
    }
    (s / y0.len().max(1) as f64).sqrt()
}

/// Integrates `dx/dt = M(t)x`, returning the state at every entry of `t_list`.
pub fn evolve_ode(
    m: &HeomMatrix,
    x0: &AdosVector,
    t_list: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<AdosVector>, SolveReport)> {
    x0.check(m)?;
    if t_list.is_empty() {
        return Err(HeomError::Parameter("empty time list".into()));
    }
    if t_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(HeomError::Parameter("time list must be strictly increasing".into()));
    }
    let started = Instant::now();
    let n = x0.data.len();
    let zero = C64::new(0.0, 0.0);
    let f = |t: f64, y: &[C64], out: &mut [C64]| m.apply_into(y, t, out);

    let mut t = t_list[0];
    let t_end = *t_list.last().unwrap();
    let mut y = x0.data.clone();
    let mut k1 = vec![zero; n];
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![zero; n],
        vec![zero; n],
        vec![zero; n],
        vec![zero; n],
        vec![zero; n],
        vec![zero; n],
    );
    let mut ytmp = vec![zero; n];
    let mut ynew = vec![zero; n];
    let mut err = vec![zero; n];
    f(t, &y, &mut k1);

    let mut out = vec![x0.clone()];
    let mut next_out = 1;
    let span = t_end - t;

    // initial step guess
    let mut h = {
        let d0 = norm_scaled(&y, &y, opts);
        let d1 = norm_scaled(&k1, &y, opts);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        combo(&mut ytmp, &y, h0, &[(1.0, &k1)]);
        f(t + h0, &ytmp, &mut k2);
        let diff: Vec<C64> = k2.iter().zip(&k1).map(|(a, b)| a - b).collect();
        let d2 = norm_scaled(&diff, &y, opts) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    };
    let mut steps = 0usize;
    let mut rejected = false;
    while next_out < t_list.len() {
        if steps >= opts.max_steps {
            return Err(HeomError::Solver {
                msg: format!("step limit {} reached at t = {t}", opts.max_steps),
                residual: f64::NAN,
            });
        }
        if t + h > t_end {
            h = t_end - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(HeomError::Stiff { t });
        }
        combo(&mut ytmp, &y, h, &[(A21, &k1)]);
        f(t + C2 * h, &ytmp, &mut k2);
        combo(&mut ytmp, &y, h, &[(A31, &k1), (A32, &k2)]);
        f(t + C3 * h, &ytmp, &mut k3);
        combo(&mut ytmp, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        f(t + C4 * h, &ytmp, &mut k4);
        combo(&mut ytmp, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        f(t + C5 * h, &ytmp, &mut k5);
        combo(
            &mut ytmp,
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        f(t + h, &ytmp, &mut k6);
        combo(
            &mut ynew,
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        f(t + h, &ynew, &mut k7);
        for i in 0..n {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let e = err_norm(&y, &ynew, &err, opts);
        if !e.is_finite() {
            h *= 0.1;
            rejected = true;
            continue;
        }
        if e <= 1.0 {
            let t_new = t + h;
            // dense output for every requested time inside (t, t_new]
            while next_out < t_list.len() && t_list[next_out] <= t_new + 1e-12 * t_new.abs().max(1.0) {
                let theta = ((t_list[next_out] - t) / h).clamp(0.0, 1.0);
                let th1 = 1.0 - theta;
                let data = (0..n)
                    .map(|i| {
                        let ydiff = ynew[i] - y[i];
                        let bspl = h * k1[i] - ydiff;
                        let r4 = ydiff - h * k7[i] - bspl;
                        let r5 = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                        y[i] + theta * (ydiff + th1 * (bspl + theta * (r4 + th1 * r5)))
                    })
                    .collect();
                out.push(AdosVector {
                    data,
                    ..x0.clone_shell()
                });
                next_out += 1;
            }
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            t = t_new;
            steps += 1;
            let mut fac = if e == 0.0 {
                10.0
            } else {
                (0.9 * e.powf(-0.2)).clamp(0.2, 10.0)
            };
            if rejected {
                fac = fac.min(1.0);
            }
            rejected = false;
            h *= fac;
        } else {
            h *= (0.9 * e.powf(-0.2)).clamp(0.2, 1.0);
            rejected = true;
        }
    }
    Ok((out, SolveReport::new("dopri5", steps, f64::NAN, started)))
}

fn norm_scaled(v: &[C64], y: &[C64], o: &OdeOptions) -> f64 {
    let mut s = 0.0;
    for i in 0..v.len() {
        let r = v[i].norm() / (o.atol + o.rtol * y[i].norm());
        s += r * r;
    }
    (s / v.len().max(1) as f64).sqrt()
}

impl AdosVector {
    /// Same space and sector, empty data.
    pub(crate) fn clone_shell(&self) -> AdosVector {
        AdosVector {
            data: Vec::new(),
            space: self.space.clone(),
            parity: self.parity,
            d: self.d,
        }
    }
}
