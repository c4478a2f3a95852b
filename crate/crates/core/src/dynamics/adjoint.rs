//! Adjoint (backward-retrieval) sweep as the exact algebraic transpose of the
//! forward sweep.
//!
//! The forward solve is a linear map from the input photon samples to the
//! stored spin wave. Transposing its assignment sequence step by step yields
//! a sweep that (a) satisfies the discrete adjoint identity
//! `<w, F u>_z = <G w, u>_t` to rounding error, which makes the gradients
//! accumulated along the way exact derivatives of the discrete objective,
//! and (b) is itself a second-order discretization of the backward-retrieval
//! equations (gain +gamma integrated backwards in time, field integrated
//! backwards in space from E(1, tau) = 0).
//!
//! Cotangent variables carry the quadrature weights; the physical adjoint
//! fields recorded in the returned state are the cotangents divided by the
//! z weights, and the retrieved photon is the input-boundary cotangent
//! divided by the time weights.

use num_complex::Complex64;

use super::forward::{predictor, ForwardScratch};
use super::Coeffs;
use crate::error::{Error, Result};
use crate::grid::{Direction, FieldState, SimGrid};

const I: Complex64 = Complex64::new(0.0, 1.0);

struct Lanes {
    lp1: Vec<Complex64>,
    lp2: Vec<Complex64>,
    ls: Vec<Complex64>,
    le: Vec<Complex64>,
    le_next: Vec<Complex64>,
    lk1p1: Vec<Complex64>,
    lk1p2: Vec<Complex64>,
    lk1s: Vec<Complex64>,
    lk2p1: Vec<Complex64>,
    lk2p2: Vec<Complex64>,
    lk2s: Vec<Complex64>,
    lhp1: Vec<Complex64>,
    lhp2: Vec<Complex64>,
    lhs: Vec<Complex64>,
    lehat: Vec<Complex64>,
    lr: Vec<Complex64>,
}

impl Lanes {
    fn new(n_z: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); n_z];
        Self {
            lp1: z.clone(),
            lp2: z.clone(),
            ls: z.clone(),
            le: z.clone(),
            le_next: z.clone(),
            lk1p1: z.clone(),
            lk1p2: z.clone(),
            lk1s: z.clone(),
            lk2p1: z.clone(),
            lk2p2: z.clone(),
            lk2s: z.clone(),
            lhp1: z.clone(),
            lhp2: z.clone(),
            lhs: z.clone(),
            lehat: z.clone(),
            lr: z,
        }
    }
}

/// Transpose of the cumulative trapezoidal field scan.
///
/// Forward: `e[0] = boundary; e[i] = e[i-1] + cz (r[i-1] + r[i])`.
/// Consumes the cotangent of `e`, deposits the `r` cotangent into `lr`, and
/// returns the boundary cotangent.
fn scan_transpose(czc: Complex64, le: &mut [Complex64], lr: &mut [Complex64]) -> Complex64 {
    let n_z = le.len();
    for v in lr.iter_mut() {
        *v = Complex64::new(0.0, 0.0);
    }
    for i in (1..n_z).rev() {
        let li = le[i];
        le[i - 1] += li;
        let t = czc * li;
        lr[i - 1] += t;
        lr[i] += t;
    }
    le[0]
}

/// Runs the transpose sweep seeded by the spin wave `seed` at tau = T.
///
/// With `replay = Some(forward)`, the sweep also accumulates the exact
/// gradient with respect to the control samples of the real pairing
/// `2 Re <seed, S(T)[Omega]>_z` (which is eta_s when the seed is the forward
/// state's own spin wave). The returned gradient is a density in units of
/// gamma, per ns.
pub(crate) fn adjoint_sweep(
    c: &Coeffs,
    seed: &[Complex64],
    replay: Option<&FieldState>,
) -> Result<(FieldState, Option<Vec<f64>>)> {
    let n_z = c.n_z;
    let n_t = c.n_t;
    if seed.len() != n_z {
        return Err(Error::GridMismatch(format!(
            "spin wave has {} samples, grid has {} z nodes",
            seed.len(),
            n_z
        )));
    }
    if let Some(fwd) = replay {
        if fwd.s.n_z != n_z || fwd.s.n_t != n_t {
            return Err(Error::GridMismatch("forward state does not match grid".into()));
        }
    }
    let grid = SimGrid { n_z, n_t, t_window: c.dt * (n_t - 1) as f64 };
    let mut state = FieldState::zeros(&grid, Direction::Adjoint);
    let mut lanes = Lanes::new(n_z);
    let mut lein = vec![Complex64::new(0.0, 0.0); n_t];
    let mut grad = replay.map(|_| vec![0.0; n_t]);
    let mut scratch = ForwardScratch::new(n_z);

    let e1c = c.e1.conj();
    let e2c = c.e2.conj();
    let esc = c.es.conj();
    let czc = c.cz.conj();
    let cga1c = (I * (c.m1g * c.a)).conj();
    let cga2c = (I * (c.m2g * c.a)).conj();
    let half = 0.5 * c.dt;

    // Seed: cotangents carry the z quadrature weights.
    for i in 0..n_z {
        lanes.ls[i] = grid.wz(i) * seed[i];
    }
    state.s.row_mut(n_t - 1).copy_from_slice(seed);
    let wz_inv: Vec<f64> = (0..n_z).map(|i| 1.0 / grid.wz(i)).collect();

    for n in (0..n_t - 1).rev() {
        let omega_n = c.omega[n];
        let omega_p = c.omega[n + 1];
        let four = !c.three_level;

        // Replay the predictor stages of forward step n -> n+1 for the
        // gradient inner products.
        if let Some(fwd) = replay {
            predictor(
                c,
                fwd.e.row(n),
                fwd.p1.row(n),
                fwd.p2.row(n),
                fwd.s.row(n),
                omega_n,
                &mut scratch,
            );
        }

        // Stage G transpose: corrected field scan at level n+1.
        lein[n + 1] += scan_transpose(czc, &mut lanes.le, &mut lanes.lr);
        for i in 0..n_z {
            lanes.lp1[i] += c.m1g * lanes.lr[i];
        }
        if four {
            for i in 0..n_z {
                lanes.lp2[i] += c.m2g * lanes.lr[i];
            }
        }

        // Stage F transpose: Heun corrector. Consumes the level-n+1
        // cotangents and starts the level-n accumulation in place.
        for i in 0..n_z {
            let lp = lanes.lp1[i];
            lanes.lk1p1[i] = half * (e1c * lp);
            lanes.lk2p1[i] = half * lp;
            lanes.lp1[i] = e1c * lp;
            let lsv = lanes.ls[i];
            lanes.lk1s[i] = half * (esc * lsv);
            lanes.lk2s[i] = half * lsv;
            lanes.ls[i] = esc * lsv;
        }
        if four {
            for i in 0..n_z {
                let lp = lanes.lp2[i];
                lanes.lk1p2[i] = half * (e2c * lp);
                lanes.lk2p2[i] = half * lp;
                lanes.lp2[i] = e2c * lp;
            }
        }

        // Stage E transpose: couplings k2 at level n+1.
        let w1p = I * (c.m1s * omega_p);
        let w2p = I * (c.m2s * omega_p);
        let wwp = I * omega_p;
        for i in 0..n_z {
            let a1 = lanes.lk2p1[i];
            let a2 = if four { lanes.lk2p2[i] } else { Complex64::new(0.0, 0.0) };
            let asv = lanes.lk2s[i];
            lanes.lhs[i] = w1p.conj() * a1 + w2p.conj() * a2;
            lanes.lehat[i] = cga1c * a1 + cga2c * a2;
            lanes.lhp1[i] = wwp.conj() * (c.m1s * asv);
            lanes.lhp2[i] = wwp.conj() * (c.m2s * asv);
        }
        if let Some(g) = grad.as_deref_mut() {
            let mut acc = 0.0;
            if four {
                for i in 0..n_z {
                    acc += (lanes.lk2p1[i].conj() * (w1p * scratch.hs[i])).re
                        + (lanes.lk2p2[i].conj() * (w2p * scratch.hs[i])).re
                        + (lanes.lk2s[i].conj()
                            * (wwp * (c.m1s * scratch.hp1[i] + c.m2s * scratch.hp2[i])))
                        .re;
                }
            } else {
                for i in 0..n_z {
                    acc += (lanes.lk2p1[i].conj() * (w1p * scratch.hs[i])).re
                        + (lanes.lk2s[i].conj() * (wwp * (c.m1s * scratch.hp1[i]))).re;
                }
            }
            g[n + 1] += acc;
        }

        // Stage D transpose: predicted field scan.
        lein[n + 1] += scan_transpose(czc, &mut lanes.lehat, &mut lanes.lr);
        for i in 0..n_z {
            lanes.lhp1[i] += c.m1g * lanes.lr[i];
        }
        if four {
            for i in 0..n_z {
                lanes.lhp2[i] += c.m2g * lanes.lr[i];
            }
        }

        // Stage C transpose: integrating-factor Euler predictor.
        for i in 0..n_z {
            lanes.lp1[i] += e1c * lanes.lhp1[i];
            lanes.lk1p1[i] += c.dt * (e1c * lanes.lhp1[i]);
            lanes.ls[i] += esc * lanes.lhs[i];
            lanes.lk1s[i] += c.dt * (esc * lanes.lhs[i]);
        }
        if four {
            for i in 0..n_z {
                lanes.lp2[i] += e2c * lanes.lhp2[i];
                lanes.lk1p2[i] += c.dt * (e2c * lanes.lhp2[i]);
            }
        }

        // Stage B transpose: couplings k1 at level n.
        let w1n = I * (c.m1s * omega_n);
        let w2n = I * (c.m2s * omega_n);
        let wwn = I * omega_n;
        for i in 0..n_z {
            let a1 = lanes.lk1p1[i];
            let a2 = if four { lanes.lk1p2[i] } else { Complex64::new(0.0, 0.0) };
            let asv = lanes.lk1s[i];
            lanes.ls[i] += w1n.conj() * a1 + w2n.conj() * a2;
            lanes.le_next[i] = cga1c * a1 + cga2c * a2;
            lanes.lp1[i] += wwn.conj() * (c.m1s * asv);
            if four {
                lanes.lp2[i] += wwn.conj() * (c.m2s * asv);
            }
        }
        if let Some(g) = grad.as_deref_mut() {
            let fwd = replay.expect("replay present when gradient requested");
            let p1_n = fwd.p1.row(n);
            let p2_n = fwd.p2.row(n);
            let s_n = fwd.s.row(n);
            let mut acc = 0.0;
            if four {
                for i in 0..n_z {
                    acc += (lanes.lk1p1[i].conj() * (w1n * s_n[i])).re
                        + (lanes.lk1p2[i].conj() * (w2n * s_n[i])).re
                        + (lanes.lk1s[i].conj() * (wwn * (c.m1s * p1_n[i] + c.m2s * p2_n[i]))).re;
                }
            } else {
                for i in 0..n_z {
                    acc += (lanes.lk1p1[i].conj() * (w1n * s_n[i])).re
                        + (lanes.lk1s[i].conj() * (wwn * (c.m1s * p1_n[i]))).re;
                }
            }
            g[n] += acc;
        }

        std::mem::swap(&mut lanes.le, &mut lanes.le_next);
        lanes.le_next.fill(Complex64::new(0.0, 0.0));

        // Record the physical adjoint fields at level n.
        let p1_row = state.p1.row_mut(n);
        for i in 0..n_z {
            p1_row[i] = lanes.lp1[i] * wz_inv[i];
        }
        let p2_row = state.p2.row_mut(n);
        for i in 0..n_z {
            p2_row[i] = lanes.lp2[i] * wz_inv[i];
        }
        let s_row = state.s.row_mut(n);
        for i in 0..n_z {
            s_row[i] = lanes.ls[i] * wz_inv[i];
        }
    }

    // Transpose of the tau = 0 field initialization (E flat in z).
    for i in (1..n_z).rev() {
        let li = lanes.le[i];
        lanes.le[i - 1] += li;
    }
    lein[0] += lanes.le[0];

    // Reconstruct the adjoint field rows from the adjoint polarizations
    // (E-bar integrates backwards from z = 1 where it vanishes), then place
    // the transpose-exact retrieved photon on the z = 0 face.
    for n in 0..n_t {
        let p1 = state.p1.row(n);
        let p2 = state.p2.row(n);
        let mut row = vec![Complex64::new(0.0, 0.0); n_z];
        let rbar = |i: usize| c.m1g * p1[i] + c.m2g * p2[i];
        for i in (0..n_z - 1).rev() {
            row[i] = row[i + 1] - c.cz * (rbar(i) + rbar(i + 1));
        }
        state.e.row_mut(n).copy_from_slice(&row);
    }
    for n in 0..n_t {
        let eout = lein[n] / grid.wt(n);
        if !eout.re.is_finite() || !eout.im.is_finite() {
            return Err(Error::SolverInstability { field: "E-bar", z_index: 0, t_index: n });
        }
        state.e.row_mut(n)[0] = eout;
    }

    let grad = grad.map(|raw| {
        raw.iter()
            .enumerate()
            .map(|(j, v)| 2.0 * c.gamma * v / grid.wt(j))
            .collect()
    });
    Ok((state, grad))
}
