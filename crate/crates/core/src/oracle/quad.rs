//! Adaptive Gauss-Kronrod (7/15) quadrature for complex integrands.

use crate::C64;
use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
    pub intervals: usize,
}

fn gk15(f: &impl Fn(f64) -> C64, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    ((k * h), ((k - g) * h).norm())
}

struct Piece {
    a: f64,
    b: f64,
    val: C64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// `∫_a^b f`, bisecting the worst interval until `err ≤ max(abs_tol, rel_tol·|I|)`.
pub fn integrate(
    f: impl Fn(f64) -> C64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> QuadResult {
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, val: v, err: e });
    let (mut total, mut err) = (v, e);
    while err > abs_tol.max(rel_tol * total.norm()) && heap.len() < max_intervals {
        let p = heap.pop().unwrap();
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        total += v1 + v2 - p.val;
        err += e1 + e2 - p.err;
        heap.push(Piece {
            a: p.a,
            b: m,
            val: v1,
            err: e1,
        });
        heap.push(Piece {
            a: m,
            b: p.b,
            val: v2,
            err: e2,
        });
    }
    // re-sum to shed the drift of the running totals
    let value = heap.iter().map(|p| p.val).sum();
    let error = heap.iter().map(|p| p.err).sum();
    QuadResult {
        value,
        error,
        intervals: heap.len(),
    }
}

/// `∫_a^∞ f` through `x = a + scale·tan φ`.
pub fn integrate_to_infinity(
    f: impl Fn(f64) -> C64,
    a: f64,
    scale: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> QuadResult {
    let g = |phi: f64| {
        let t = phi.tan();
        let x = a + scale * t;
        let jac = scale * (1.0 + t * t);
        let v = f(x) * jac;
        if v.re.is_finite() && v.im.is_finite() {
            v
        } else {
            C64::new(0.0, 0.0)
        }
    };
    integrate(g, 0.0, std::f64::consts::FRAC_PI_2, abs_tol, rel_tol, max_intervals)
}
