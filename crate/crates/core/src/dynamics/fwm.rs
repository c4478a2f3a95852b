//! Stokes-extended (four-wave-mixing) solvers for the three-level reduction.
//!
//! The control field off-resonantly drives the signal transition and, after
//! adiabatic elimination, couples the spin wave to a Stokes field E' while
//! shifting |1> by +2 delta_ls and the two-photon resonance by delta_ls,
//! with delta_ls(tau) = mu_1g^2 |Omega|^2 / Delta_HF. The Stokes coupling is
//! antilinear (E'* drives S), so these solvers step the system directly
//! rather than transposing a linear map.

use num_complex::Complex64;

use super::Coeffs;
use crate::error::{Error, Result};
use crate::grid::{ControlPulse, Direction, Field2D, FieldState, PhotonWaveform, SimGrid};
use crate::medium::LevelScheme;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Result of a Stokes-extended storage solve.
#[derive(Debug, Clone)]
pub struct FwmSolution {
    pub state: FieldState,
    /// Stokes field E'(z, tau).
    pub stokes: Field2D,
    /// Grid-norm ratio of the Stokes drive term to the normal control drive
    /// term in the spin-wave equation.
    pub drive_ratio: f64,
    /// Analytic scale of the same ratio: d gamma^2 / Delta_HF^2.
    pub drive_ratio_estimate: f64,
}

struct FwmCoeffs {
    base: Coeffs,
    /// mu_1g mu_1s sqrt(d gamma) / Delta_HF.
    b: f64,
    /// Light shift per unit Omega^2: mu_1g^2 / Delta_HF.
    ls_per_w2: f64,
}

impl FwmCoeffs {
    fn new(scheme: &LevelScheme, pulse: &ControlPulse, grid: &SimGrid) -> Result<Self> {
        if !scheme.is_three_level() {
            return Err(Error::Parameter {
                name: "scheme",
                reason: "the Stokes-extended system is defined for the three-level reduction"
                    .into(),
            });
        }
        if !(scheme.delta_hf > 0.0) {
            return Err(Error::Parameter {
                name: "delta_hf",
                reason: "adiabatic elimination requires a positive ground hyperfine splitting"
                    .into(),
            });
        }
        let base = Coeffs::new(scheme, pulse, grid)?;
        Ok(Self {
            b: scheme.mu_1g * scheme.mu_1s * base.a / scheme.delta_hf,
            ls_per_w2: scheme.mu_1g * scheme.mu_1g / scheme.delta_hf,
            base,
        })
    }
}

/// Solves the Stokes-extended storage system.
pub fn solve_storage_fwm(
    scheme: &LevelScheme,
    pulse: &ControlPulse,
    photon: &PhotonWaveform,
    grid: &SimGrid,
) -> Result<FwmSolution> {
    if photon.samples.len() != grid.n_t {
        return Err(Error::GridMismatch(format!(
            "photon has {} samples, grid has {}",
            photon.samples.len(),
            grid.n_t
        )));
    }
    let fc = FwmCoeffs::new(scheme, pulse, grid)?;
    let c = &fc.base;
    let n_z = c.n_z;
    let n_t = c.n_t;
    let ein = &photon.samples;

    let mut state = FieldState::zeros(grid, Direction::Forward);
    let mut stokes = Field2D::zeros(n_z, n_t);
    state.e.row_mut(0).fill(ein[0]);

    let cga = I * (c.m1g * c.a);
    let czp = |omega: f64| Complex64::new(0.0, -fc.b * omega) * (grid.dz() * 0.5);
    let mut k1p1 = vec![Complex64::new(0.0, 0.0); n_z];
    let mut k1s = k1p1.clone();
    let mut hp1 = k1p1.clone();
    let mut hs = k1p1.clone();
    let mut ehat = k1p1.clone();
    let mut ephat = k1p1.clone();

    // Drive-term norms in the spin-wave equation, accumulated on the fly.
    let mut stokes_drive = 0.0;
    let mut control_drive = 0.0;

    for n in 0..n_t - 1 {
        let (w_n, w_p) = (c.omega[n], c.omega[n + 1]);
        let (ls_n, ls_p) = (fc.ls_per_w2 * w_n * w_n, fc.ls_per_w2 * w_p * w_p);

        let couple = |omega: f64,
                      ls: f64,
                      e: &[Complex64],
                      ep: &[Complex64],
                      p1: &[Complex64],
                      s: &[Complex64],
                      kp1: &mut [Complex64],
                      ks: &mut [Complex64]| {
            let c1s = I * (c.m1s * omega);
            let cb = I * (fc.b * omega);
            let shift_p = Complex64::new(0.0, -2.0 * ls);
            let shift_s = Complex64::new(0.0, -ls);
            for i in 0..e.len() {
                kp1[i] = c1s * s[i] + cga * e[i] + shift_p * p1[i];
                ks[i] = c1s * p1[i] + shift_s * s[i] + cb * ep[i].conj();
            }
        };

        {
            let e_n = state.e.row(n);
            let ep_n = stokes.row(n);
            let p1_n = state.p1.row(n);
            let s_n = state.s.row(n);
            couple(w_n, ls_n, e_n, ep_n, p1_n, s_n, &mut k1p1, &mut k1s);
            for i in 0..n_z {
                hp1[i] = c.e1 * (p1_n[i] + c.dt * k1p1[i]);
                hs[i] = c.es * (s_n[i] + c.dt * k1s[i]);
            }
        }
        // Predicted fields at level n+1.
        scan(c.cz, c.m1g, ein[n + 1], &hp1, &mut ehat);
        scan_stokes(czp(w_p), &hs, &mut ephat);

        // Corrector.
        let mut k2p1 = vec![Complex64::new(0.0, 0.0); n_z];
        let mut k2s = k2p1.clone();
        couple(w_p, ls_p, &ehat, &ephat, &hp1, &hs, &mut k2p1, &mut k2s);
        {
            let half = 0.5 * c.dt;
            let p1_n: Vec<Complex64> = state.p1.row(n).to_vec();
            let s_n: Vec<Complex64> = state.s.row(n).to_vec();
            let p1_next = state.p1.row_mut(n + 1);
            let s_next = state.s.row_mut(n + 1);
            for i in 0..n_z {
                p1_next[i] = c.e1 * p1_n[i] + half * (c.e1 * k1p1[i] + k2p1[i]);
                s_next[i] = c.es * s_n[i] + half * (c.es * k1s[i] + k2s[i]);
            }
        }
        {
            let p1_next: Vec<Complex64> = state.p1.row(n + 1).to_vec();
            let s_next: Vec<Complex64> = state.s.row(n + 1).to_vec();
            let mut erow = vec![Complex64::new(0.0, 0.0); n_z];
            scan(c.cz, c.m1g, ein[n + 1], &p1_next, &mut erow);
            state.e.row_mut(n + 1).copy_from_slice(&erow);
            let mut eprow = vec![Complex64::new(0.0, 0.0); n_z];
            scan_stokes(czp(w_p), &s_next, &mut eprow);
            stokes.row_mut(n + 1).copy_from_slice(&eprow);

            if let Some(z) = erow
                .iter()
                .position(|v| !v.re.is_finite() || !v.im.is_finite())
            {
                return Err(Error::SolverInstability { field: "E", z_index: z, t_index: n + 1 });
            }

            // Drive-term accumulation at level n+1 (interior weights suffice
            // for a scale diagnostic).
            let wfac = w_p * w_p;
            for i in 0..n_z {
                stokes_drive += wfac * fc.b * fc.b * eprow[i].norm_sqr();
                control_drive += wfac * c.m1s * c.m1s * p1_next[i].norm_sqr();
            }
        }
    }

    let drive_ratio = if control_drive > 0.0 {
        (stokes_drive / control_drive).sqrt()
    } else {
        0.0
    };
    Ok(FwmSolution {
        state,
        stokes,
        drive_ratio,
        drive_ratio_estimate: fwm_drive_term_estimate(scheme),
    })
}

/// Backward-retrieval solve for the Stokes-extended system, mirroring the
/// variational structure of the plain adjoint equations: damping flips sign,
/// light shifts are kept, and the Stokes field is generated from the
/// conjugated adjoint spin wave.
pub fn solve_adjoint_fwm(
    scheme: &LevelScheme,
    pulse: &ControlPulse,
    spin_wave: &[Complex64],
    grid: &SimGrid,
) -> Result<FieldState> {
    let fc = FwmCoeffs::new(scheme, pulse, grid)?;
    let c = &fc.base;
    let n_z = c.n_z;
    let n_t = c.n_t;
    if spin_wave.len() != n_z {
        return Err(Error::GridMismatch(format!(
            "spin wave has {} samples, grid has {} z nodes",
            spin_wave.len(),
            n_z
        )));
    }

    let mut state = FieldState::zeros(grid, Direction::Adjoint);
    let mut stokes = Field2D::zeros(n_z, n_t);
    state.s.row_mut(n_t - 1).copy_from_slice(spin_wave);

    // Backward integrating factors: exp(-(i dg + gamma) dt) etc.
    let dt = c.dt;
    let e1b = (Complex64::new(-c.gamma, -imag_of_log(c.e1, c.gamma, dt)) * dt).exp();
    let esb = c.es.conj();
    let cga = I * (c.m1g * c.a);

    let czp = |omega: f64| Complex64::new(0.0, -fc.b * omega) * (grid.dz() * 0.5);
    // Field rows at the seed level.
    {
        let p1 = state.p1.row(n_t - 1).to_vec();
        let s = state.s.row(n_t - 1).to_vec();
        let mut erow = vec![Complex64::new(0.0, 0.0); n_z];
        back_scan(c.cz, c.m1g, &p1, &mut erow);
        state.e.row_mut(n_t - 1).copy_from_slice(&erow);
        let sconj: Vec<Complex64> = s.iter().map(|v| v.conj()).collect();
        let mut eprow = vec![Complex64::new(0.0, 0.0); n_z];
        back_scan_raw(czp(c.omega[n_t - 1]), &sconj, &mut eprow);
        stokes.row_mut(n_t - 1).copy_from_slice(&eprow);
    }

    let couple = |omega: f64,
                  ls: f64,
                  e: &[Complex64],
                  ep: &[Complex64],
                  p1: &[Complex64],
                  s: &[Complex64],
                  kp1: &mut [Complex64],
                  ks: &mut [Complex64]| {
        let c1s = I * (c.m1s * omega);
        let cb = I * (fc.b * omega);
        let shift_p = Complex64::new(0.0, -2.0 * ls);
        let shift_s = Complex64::new(0.0, -ls);
        for i in 0..e.len() {
            kp1[i] = c1s * s[i] + cga * e[i] + shift_p * p1[i];
            ks[i] = c1s * p1[i] + shift_s * s[i] - cb * ep[i];
        }
    };

    let mut k1p1 = vec![Complex64::new(0.0, 0.0); n_z];
    let mut k1s = k1p1.clone();
    let mut hp1 = k1p1.clone();
    let mut hs = k1p1.clone();
    let mut ehat = k1p1.clone();
    let mut ephat = k1p1.clone();

    for n in (0..n_t - 1).rev() {
        let (w_n, w_p) = (c.omega[n], c.omega[n + 1]);
        let (ls_n, ls_p) = (fc.ls_per_w2 * w_n * w_n, fc.ls_per_w2 * w_p * w_p);
        {
            let e_p = state.e.row(n + 1);
            let ep_p = stokes.row(n + 1);
            let p1_p = state.p1.row(n + 1);
            let s_p = state.s.row(n + 1);
            couple(w_p, ls_p, e_p, ep_p, p1_p, s_p, &mut k1p1, &mut k1s);
            for i in 0..n_z {
                hp1[i] = e1b * (p1_p[i] - dt * k1p1[i]);
                hs[i] = esb * (s_p[i] - dt * k1s[i]);
            }
        }
        back_scan(c.cz, c.m1g, &hp1, &mut ehat);
        let hs_conj: Vec<Complex64> = hs.iter().map(|v| v.conj()).collect();
        back_scan_raw(czp(w_n), &hs_conj, &mut ephat);

        let mut k2p1 = vec![Complex64::new(0.0, 0.0); n_z];
        let mut k2s = k2p1.clone();
        couple(w_n, ls_n, &ehat, &ephat, &hp1, &hs, &mut k2p1, &mut k2s);
        {
            let half = 0.5 * dt;
            let p1_p: Vec<Complex64> = state.p1.row(n + 1).to_vec();
            let s_p: Vec<Complex64> = state.s.row(n + 1).to_vec();
            let p1_n = state.p1.row_mut(n);
            for i in 0..n_z {
                p1_n[i] = e1b * p1_p[i] - half * (e1b * k1p1[i] + k2p1[i]);
            }
            let s_n = state.s.row_mut(n);
            for i in 0..n_z {
                s_n[i] = esb * s_p[i] - half * (esb * k1s[i] + k2s[i]);
            }
        }
        {
            let p1_n: Vec<Complex64> = state.p1.row(n).to_vec();
            let s_n: Vec<Complex64> = state.s.row(n).to_vec();
            let mut erow = vec![Complex64::new(0.0, 0.0); n_z];
            back_scan(c.cz, c.m1g, &p1_n, &mut erow);
            if let Some(z) = erow
                .iter()
                .position(|v| !v.re.is_finite() || !v.im.is_finite())
            {
                return Err(Error::SolverInstability { field: "E-bar", z_index: z, t_index: n });
            }
            state.e.row_mut(n).copy_from_slice(&erow);
            let s_conj: Vec<Complex64> = s_n.iter().map(|v| v.conj()).collect();
            let mut eprow = vec![Complex64::new(0.0, 0.0); n_z];
            back_scan_raw(czp(w_n), &s_conj, &mut eprow);
            stokes.row_mut(n).copy_from_slice(&eprow);
        }
    }
    Ok(state)
}

/// Analytic scale of the Stokes/control drive-term ratio: d gamma^2 / Delta_HF^2.
pub fn fwm_drive_term_estimate(scheme: &LevelScheme) -> f64 {
    scheme.d * scheme.gamma * scheme.gamma / (scheme.delta_hf * scheme.delta_hf)
}

fn scan(cz: Complex64, m1g: f64, boundary: Complex64, p1: &[Complex64], out: &mut [Complex64]) {
    out[0] = boundary;
    for i in 1..p1.len() {
        out[i] = out[i - 1] + cz * (m1g * p1[i - 1] + m1g * p1[i]);
    }
}

/// Forward Stokes scan with E'(0) = 0: coefficient already includes the sign.
fn scan_stokes(czp: Complex64, s: &[Complex64], out: &mut [Complex64]) {
    out[0] = Complex64::new(0.0, 0.0);
    for i in 1..s.len() {
        out[i] = out[i - 1] + czp * (s[i - 1] + s[i]);
    }
}

/// Backward field scan with E(1) = 0 for adjoint states.
fn back_scan(cz: Complex64, m1g: f64, p1: &[Complex64], out: &mut [Complex64]) {
    let n = p1.len();
    out[n - 1] = Complex64::new(0.0, 0.0);
    for i in (0..n - 1).rev() {
        out[i] = out[i + 1] - cz * (m1g * p1[i] + m1g * p1[i + 1]);
    }
}

fn back_scan_raw(czp: Complex64, s: &[Complex64], out: &mut [Complex64]) {
    let n = s.len();
    out[n - 1] = Complex64::new(0.0, 0.0);
    for i in (0..n - 1).rev() {
        out[i] = out[i + 1] - czp * (s[i] + s[i + 1]);
    }
}

fn imag_of_log(_e: Complex64, _gamma: f64, _dt: f64) -> f64 {
    unreachable!("replaced below")
}
