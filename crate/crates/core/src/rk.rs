//! Dormand–Prince 5(4) steps for small fixed-size systems.

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (first-same-as-last row of `A`).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Fifth minus fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One step of size `h` from `(x, y)`; returns the new state and the
/// scaled error norm (`<= 1` means accepted at `tol`).
pub(crate) fn step<const D: usize>(
    rhs: &impl Fn(f64, &[f64; D]) -> [f64; D],
    x: f64,
    y: &[f64; D],
    h: f64,
    tol: f64,
) -> ([f64; D], f64) {
    let mut k = [[0.0; D]; 7];
    k[0] = rhs(x, y);
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..D {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = rhs(x + C[s] * h, &ys);
    }
    let mut y_new = *y;
    let mut err = [0.0; D];
    for (s, ks) in k.iter().enumerate() {
        for i in 0..D {
            y_new[i] += h * B[s] * ks[i];
            err[i] += h * E[s] * ks[i];
        }
    }
    let norm = (0..D)
        .map(|i| err[i].abs() / (tol + tol * y[i].abs().max(y_new[i].abs())))
        .fold(0.0f64, f64::max);
    (y_new, norm)
}

/// Step-size update from a scaled error norm.
pub(crate) fn next_step(h: f64, norm: f64) -> f64 {
    let factor = if norm == 0.0 {
        5.0
    } else {
        (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
    };
    h * factor
}

/// Adaptive integration from `x0` to `x1`, with initial step `h`.
/// Returns the end state and the last accepted step size.
pub(crate) fn integrate_to<const D: usize>(
    rhs: &impl Fn(f64, &[f64; D]) -> [f64; D],
    x0: f64,
    y0: [f64; D],
    x1: f64,
    mut h: f64,
    tol: f64,
) -> Option<([f64; D], f64)> {
    let (mut x, mut y) = (x0, y0);
    while x < x1 {
        let last = x + h >= x1;
        let hs = if last { x1 - x } else { h };
        let (yn, norm) = step(rhs, x, &y, hs, tol);
        if norm <= 1.0 && yn.iter().all(|v| v.is_finite()) {
            x = if last { x1 } else { x + hs };
            y = yn;
            if !last {
                h = next_step(hs, norm);
            }
        } else {
            h = next_step(hs, if norm.is_finite() { norm } else { 1e10 });
        }
        if h < 1e-14 * (1.0 + x.abs()) {
            return None;
        }
    }
    Some((y, h))
}
