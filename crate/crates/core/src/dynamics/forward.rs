//! Forward (storage) sweep.
//!
//! One tau step from level n to n+1:
//!
//! 1. couplings k1 at level n from the stored E, P, S rows;
//! 2. integrating-factor Euler predictor for P1, P2, S;
//! 3. trapezoidal z scan for the predicted field E;
//! 4. couplings k2 at level n+1 from the predicted values;
//! 5. integrating-factor Heun corrector;
//! 6. trapezoidal z scan for the corrected field.
//!
//! The adjoint sweep transposes exactly these assignments, so any change to
//! the stepping here must be mirrored in `adjoint.rs`.

use num_complex::Complex64;

use super::Coeffs;
use crate::error::{Error, Result};
use crate::grid::{Direction, FieldState};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Workspace rows reused across steps.
pub(crate) struct ForwardScratch {
    pub k1p1: Vec<Complex64>,
    pub k1p2: Vec<Complex64>,
    pub k1s: Vec<Complex64>,
    pub hp1: Vec<Complex64>,
    pub hp2: Vec<Complex64>,
    pub hs: Vec<Complex64>,
    pub ehat: Vec<Complex64>,
}

impl ForwardScratch {
    pub fn new(n_z: usize) -> Self {
        let zero = vec![Complex64::new(0.0, 0.0); n_z];
        Self {
            k1p1: zero.clone(),
            k1p2: zero.clone(),
            k1s: zero.clone(),
            hp1: zero.clone(),
            hp2: zero.clone(),
            hs: zero.clone(),
            ehat: zero,
        }
    }
}

/// Predictor stages (couplings at level n and integrating-factor Euler) —
/// shared verbatim between the forward solve and the adjoint replay.
pub(crate) fn predictor(
    c: &Coeffs,
    e_n: &[Complex64],
    p1_n: &[Complex64],
    p2_n: &[Complex64],
    s_n: &[Complex64],
    omega_n: f64,
    scratch: &mut ForwardScratch,
) {
    let n_z = c.n_z;
    let c1s = I * (c.m1s * omega_n);
    let c2s = I * (c.m2s * omega_n);
    let cw = I * omega_n;
    let cga1 = I * (c.m1g * c.a);
    let cga2 = I * (c.m2g * c.a);
    if c.three_level {
        for i in 0..n_z {
            let k1p1 = c1s * s_n[i] + cga1 * e_n[i];
            let k1s = cw * (c.m1s * p1_n[i]);
            scratch.k1p1[i] = k1p1;
            scratch.k1s[i] = k1s;
            scratch.hp1[i] = c.e1 * (p1_n[i] + c.dt * k1p1);
            scratch.hs[i] = c.es * (s_n[i] + c.dt * k1s);
        }
    } else {
        for i in 0..n_z {
            let k1p1 = c1s * s_n[i] + cga1 * e_n[i];
            let k1p2 = c2s * s_n[i] + cga2 * e_n[i];
            let k1s = cw * (c.m1s * p1_n[i] + c.m2s * p2_n[i]);
            scratch.k1p1[i] = k1p1;
            scratch.k1p2[i] = k1p2;
            scratch.k1s[i] = k1s;
            scratch.hp1[i] = c.e1 * (p1_n[i] + c.dt * k1p1);
            scratch.hp2[i] = c.e2 * (p2_n[i] + c.dt * k1p2);
            scratch.hs[i] = c.es * (s_n[i] + c.dt * k1s);
        }
    }
}

/// Trapezoidal z scan of the field equation given polarization rows.
pub(crate) fn field_scan(
    c: &Coeffs,
    boundary: Complex64,
    p1: &[Complex64],
    p2: &[Complex64],
    out: &mut [Complex64],
) {
    let n_z = c.n_z;
    out[0] = boundary;
    if c.three_level {
        let mut r_prev = c.m1g * p1[0];
        for i in 1..n_z {
            let r = c.m1g * p1[i];
            out[i] = out[i - 1] + c.cz * (r_prev + r);
            r_prev = r;
        }
    } else {
        let mut r_prev = c.m1g * p1[0] + c.m2g * p2[0];
        for i in 1..n_z {
            let r = c.m1g * p1[i] + c.m2g * p2[i];
            out[i] = out[i - 1] + c.cz * (r_prev + r);
            r_prev = r;
        }
    }
}

pub(crate) fn storage_solve(c: &Coeffs, ein: &[Complex64]) -> Result<FieldState> {
    let n_z = c.n_z;
    let n_t = c.n_t;
    let grid_shape = crate::grid::SimGrid { n_z, n_t, t_window: c.dt * (n_t - 1) as f64 };
    let mut state = FieldState::zeros(&grid_shape, Direction::Forward);
    // At tau = 0 the polarizations vanish, so E is flat in z.
    state.e.row_mut(0).fill(ein[0]);

    let mut scratch = ForwardScratch::new(n_z);
    for n in 0..n_t - 1 {
        let omega_n = c.omega[n];
        let omega_p = c.omega[n + 1];
        let (now, mut next) = split_rows(&mut state, n, n_z);
        predictor(c, now.e, now.p1, now.p2, now.s, omega_n, &mut scratch);
        field_scan(c, ein[n + 1], &scratch.hp1, &scratch.hp2, &mut scratch.ehat);

        // Corrector with couplings at level n+1.
        let c1s = I * (c.m1s * omega_p);
        let c2s = I * (c.m2s * omega_p);
        let cw = I * omega_p;
        let cga1 = I * (c.m1g * c.a);
        let cga2 = I * (c.m2g * c.a);
        let half = 0.5 * c.dt;
        if c.three_level {
            for i in 0..n_z {
                let k2p1 = c1s * scratch.hs[i] + cga1 * scratch.ehat[i];
                let k2s = cw * (c.m1s * scratch.hp1[i]);
                next.p1[i] = c.e1 * now.p1[i] + half * (c.e1 * scratch.k1p1[i] + k2p1);
                next.s[i] = c.es * now.s[i] + half * (c.es * scratch.k1s[i] + k2s);
            }
        } else {
            for i in 0..n_z {
                let k2p1 = c1s * scratch.hs[i] + cga1 * scratch.ehat[i];
                let k2p2 = c2s * scratch.hs[i] + cga2 * scratch.ehat[i];
                let k2s = cw * (c.m1s * scratch.hp1[i] + c.m2s * scratch.hp2[i]);
                next.p1[i] = c.e1 * now.p1[i] + half * (c.e1 * scratch.k1p1[i] + k2p1);
                next.p2[i] = c.e2 * now.p2[i] + half * (c.e2 * scratch.k1p2[i] + k2p2);
                next.s[i] = c.es * now.s[i] + half * (c.es * scratch.k1s[i] + k2s);
            }
        }
        field_scan(c, ein[n + 1], next.p1, next.p2, next.e);

        if let Some((field, z)) = first_nonfinite(next.e, next.p1, next.s) {
            return Err(Error::SolverInstability { field, z_index: z, t_index: n + 1 });
        }
    }
    Ok(state)
}

pub(crate) struct RowsNow<'a> {
    pub e: &'a [Complex64],
    pub p1: &'a [Complex64],
    pub p2: &'a [Complex64],
    pub s: &'a [Complex64],
}

pub(crate) struct RowsNext<'a> {
    pub e: &'a mut [Complex64],
    pub p1: &'a mut [Complex64],
    pub p2: &'a mut [Complex64],
    pub s: &'a mut [Complex64],
}

fn split_one(data: &mut [Complex64], n: usize, n_z: usize) -> (&[Complex64], &mut [Complex64]) {
    let (head, tail) = data.split_at_mut((n + 1) * n_z);
    (&head[n * n_z..], &mut tail[..n_z])
}

/// Borrows time level n immutably and level n+1 mutably from one state.
pub(crate) fn split_rows(state: &mut FieldState, n: usize, n_z: usize) -> (RowsNow<'_>, RowsNext<'_>) {
    let (e_now, e_next) = split_one(&mut state.e.data, n, n_z);
    let (p1_now, p1_next) = split_one(&mut state.p1.data, n, n_z);
    let (p2_now, p2_next) = split_one(&mut state.p2.data, n, n_z);
    let (s_now, s_next) = split_one(&mut state.s.data, n, n_z);
    (
        RowsNow { e: e_now, p1: p1_now, p2: p2_now, s: s_now },
        RowsNext { e: e_next, p1: p1_next, p2: p2_next, s: s_next },
    )
}

fn first_nonfinite(
    e: &[Complex64],
    p1: &[Complex64],
    s: &[Complex64],
) -> Option<(&'static str, usize)> {
    let check = |row: &[Complex64]| row.iter().position(|v| !v.re.is_finite() || !v.im.is_finite());
    if let Some(z) = check(e) {
        return Some(("E", z));
    }
    if let Some(z) = check(p1) {
        return Some(("P1", z));
    }
    if let Some(z) = check(s) {
        return Some(("S", z));
    }
    None
}
