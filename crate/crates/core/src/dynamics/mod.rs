//! Propagation of the storage, retrieval, and four-wave-mixing systems, and
//! the efficiency bookkeeping derived from their solutions.
//!
//! Storage integrates the field equation along z with the trapezoidal rule,
//! interleaved with an integrating-factor Heun step in tau for the atomic
//! variables; the stiff diagonal detuning/decay terms are handled exactly by
//! the integrating factor, so large one-photon detunings stay stable on
//! coarse grids. The adjoint solver is the exact algebraic transpose of the
//! forward sweep; it is simultaneously a second-order discretization of the
//! backward-retrieval equations and the source of discretely exact gradients.

mod adjoint;
mod forward;
mod fwm;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ControlPulse, FieldState, PhotonWaveform, SimGrid};
use crate::medium::LevelScheme;

pub use fwm::{fwm_drive_term_estimate, solve_storage_fwm, FwmSolution};

/// Threshold below which the stored spin wave is considered empty and the
/// retrieval ratio undefined.
pub const ETA_S_FLOOR: f64 = 1e-12;

/// Solver coefficients precomputed from one (scheme, pulse, grid) triple.
#[derive(Debug, Clone)]
pub(crate) struct Coeffs {
    pub n_z: usize,
    pub n_t: usize,
    pub dt: f64,
    /// sqrt(d * gamma), rad/ns.
    pub a: f64,
    pub m1g: f64,
    pub m1s: f64,
    pub m2g: f64,
    pub m2s: f64,
    pub gamma: f64,
    /// exp((i*delta_g - gamma) dt)
    pub e1: Complex64,
    /// exp((i*(delta_g - delta_e) - gamma) dt)
    pub e2: Complex64,
    /// exp(i*(delta_g - delta_s) dt)
    pub es: Complex64,
    /// i * a * dz / 2 (trapezoidal half-step of the field equation)
    pub cz: Complex64,
    /// Control Rabi frequency per time node, rad/ns.
    pub omega: Vec<f64>,
    pub three_level: bool,
}

impl Coeffs {
    pub fn new(scheme: &LevelScheme, pulse: &ControlPulse, grid: &SimGrid) -> Result<Self> {
        if pulse.samples.len() != grid.n_t {
            return Err(Error::GridMismatch(format!(
                "pulse has {} samples, grid has {}",
                pulse.samples.len(),
                grid.n_t
            )));
        }
        let dt = grid.dt();
        let a = (scheme.d * scheme.gamma).sqrt();
        let c1 = Complex64::new(-scheme.gamma, scheme.delta_g);
        let c2 = Complex64::new(-scheme.gamma, scheme.delta_g - scheme.delta_e);
        let cs = Complex64::new(0.0, scheme.delta_g - scheme.delta_s);
        Ok(Self {
            n_z: grid.n_z,
            n_t: grid.n_t,
            dt,
            a,
            m1g: scheme.mu_1g,
            m1s: scheme.mu_1s,
            m2g: scheme.mu_2g,
            m2s: scheme.mu_2s,
            gamma: scheme.gamma,
            e1: (c1 * dt).exp(),
            e2: (c2 * dt).exp(),
            es: (cs * dt).exp(),
            cz: Complex64::new(0.0, a * grid.dz() * 0.5),
            omega: pulse.samples.iter().map(|v| v * scheme.gamma).collect(),
            three_level: scheme.is_three_level(),
        })
    }
}

/// Efficiencies and energy-balance diagnostics of one storage (+ retrieval)
/// solution. All quantities are normalized by the in-domain input norm, so
/// they are true fractions even for unnormalized inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EfficiencyReport {
    /// Storage efficiency: spin-wave norm at tau = T.
    pub eta_s: f64,
    /// Retrieval efficiency eta_tot / eta_s; None when the spin wave is empty.
    pub eta_r: Option<f64>,
    /// Total efficiency: retrieved photon norm.
    pub eta_tot: f64,
    /// Transmitted-field norm at z = 1.
    pub leak: f64,
    /// 2*gamma * double integral of |P1|^2 + |P2|^2.
    pub decay_loss: f64,
    /// Residual polarization norm at tau = T.
    pub residual_pol: f64,
    /// Closure error of the continuity identity.
    pub balance_defect: f64,
}

/// Solves the storage equations of motion with storage boundary conditions.
pub fn solve_storage(
    scheme: &LevelScheme,
    pulse: &ControlPulse,
    photon: &PhotonWaveform,
    grid: &SimGrid,
) -> Result<FieldState> {
    if photon.samples.len() != grid.n_t {
        return Err(Error::GridMismatch(format!(
            "photon has {} samples, grid has {}",
            photon.samples.len(),
            grid.n_t
        )));
    }
    let coeffs = Coeffs::new(scheme, pulse, grid)?;
    forward::storage_solve(&coeffs, &photon.samples)
}

/// Solves the adjoint (backward-retrieval) system seeded by a stored spin
/// wave. The z = 0 column of the returned `e` field is the retrieved photon.
pub fn solve_adjoint(
    scheme: &LevelScheme,
    pulse: &ControlPulse,
    spin_wave: &[Complex64],
    grid: &SimGrid,
) -> Result<FieldState> {
    let coeffs = Coeffs::new(scheme, pulse, grid)?;
    adjoint::adjoint_sweep(&coeffs, spin_wave, None).map(|(state, _)| state)
}

/// Adjoint solve seeded by the forward state's stored spin wave, returning
/// the adjoint fields together with the discretely exact gradient of the
/// storage efficiency with respect to the control samples.
///
/// The gradient is a density: eta_s changes by `sum_j w_j g[j] dOmega[j]`
/// for a perturbation `dOmega` in units of gamma.
pub fn solve_adjoint_with_gradient(
    scheme: &LevelScheme,
    pulse: &ControlPulse,
    forward: &FieldState,
    grid: &SimGrid,
) -> Result<(FieldState, Vec<f64>)> {
    let coeffs = Coeffs::new(scheme, pulse, grid)?;
    let seed = forward.spin_wave_at_t_end().to_vec();
    let (state, grad) = adjoint::adjoint_sweep(&coeffs, &seed, Some(forward))?;
    Ok((state, grad.expect("gradient requested")))
}

/// Same as [`solve_adjoint_with_gradient`] but seeded by an arbitrary spin
/// wave; the gradient is then of the pairing 2 Re<seed, S(T)> rather than of
/// eta_s. Used to assemble total-efficiency gradients.
pub fn solve_adjoint_with_gradient_seeded(
    scheme: &LevelScheme,
    pulse: &ControlPulse,
    forward: &FieldState,
    seed: &[Complex64],
    grid: &SimGrid,
) -> Result<(FieldState, Vec<f64>)> {
    let coeffs = Coeffs::new(scheme, pulse, grid)?;
    let (state, grad) = adjoint::adjoint_sweep(&coeffs, seed, Some(forward))?;
    Ok((state, grad.expect("gradient requested")))
}

/// Computes efficiencies and balance diagnostics from a forward/adjoint pair.
pub fn compute_efficiencies(
    forward: &FieldState,
    adjoint: &FieldState,
    scheme: &LevelScheme,
    grid: &SimGrid,
) -> Result<EfficiencyReport> {
    let norm_in = grid.norm2_t(&forward.photon_at_z0());
    if !(norm_in > 0.0) {
        return Err(Error::Parameter {
            name: "forward",
            reason: "input photon has zero norm".into(),
        });
    }
    let eta_s_raw = grid.norm2_z(forward.spin_wave_at_t_end());
    let eta_s = eta_s_raw / norm_in;
    let eta_tot = grid.norm2_t(&adjoint.photon_at_z0()) / norm_in;
    let eta_r = if eta_s_raw < ETA_S_FLOOR {
        None
    } else {
        Some(eta_tot / eta_s)
    };
    let parts = balance_parts(forward, scheme, grid);
    Ok(EfficiencyReport {
        eta_s,
        eta_r,
        eta_tot,
        leak: parts.leak / norm_in,
        decay_loss: parts.decay / norm_in,
        residual_pol: parts.residual / norm_in,
        balance_defect: parts.defect(norm_in),
    })
}

struct BalanceParts {
    leak: f64,
    decay: f64,
    residual: f64,
    spin: f64,
}

impl BalanceParts {
    fn defect(&self, norm_in: f64) -> f64 {
        ((self.leak + self.decay + self.residual + self.spin) / norm_in - 1.0).abs()
    }
}

fn balance_parts(forward: &FieldState, scheme: &LevelScheme, grid: &SimGrid) -> BalanceParts {
    let n_t = grid.n_t;
    let n_z = grid.n_z;
    let leak = grid.norm2_t(&forward.e.column(n_z - 1));
    let mut decay = 0.0;
    for t in 0..n_t {
        let p1 = forward.p1.row(t);
        let p2 = forward.p2.row(t);
        let mut row_sum = 0.0;
        for i in 0..n_z {
            row_sum += grid.wz(i) * (p1[i].norm_sqr() + p2[i].norm_sqr());
        }
        decay += grid.wt(t) * row_sum;
    }
    decay *= 2.0 * scheme.gamma;
    let p1_end = forward.p1.row(n_t - 1);
    let p2_end = forward.p2.row(n_t - 1);
    let residual: f64 = (0..n_z)
        .map(|i| grid.wz(i) * (p1_end[i].norm_sqr() + p2_end[i].norm_sqr()))
        .sum();
    let spin = grid.norm2_z(forward.spin_wave_at_t_end());
    BalanceParts { leak, decay, residual, spin }
}

/// Closure error of the continuity identity
/// `d|E|^2/dz + d(|P1|^2+|P2|^2+|S|^2)/dtau = -2 gamma (|P1|^2+|P2|^2)`
/// in integrated form: leak + terminal atomic norm + decay loss must equal
/// the input norm.
pub fn energy_balance(forward: &FieldState, scheme: &LevelScheme, grid: &SimGrid) -> f64 {
    let norm_in = grid.norm2_t(&forward.photon_at_z0());
    balance_parts(forward, scheme, grid).defect(norm_in)
}

#[cfg(test)]
mod tests;
