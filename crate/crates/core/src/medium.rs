//! ⁸⁷Rb atomic data: level configurations, relative dipole moments, and unit
//! conversions between Rabi frequency, optical power, and pulse energy.
//!
//! Internal unit system: time in ns, angular frequencies in rad/ns, Rabi
//! amplitudes in units of γ. Dipole moments are dimensionless, relative to
//! the D2 cycling transition moment μ_cyc, so a single optical depth measured
//! on the cycling transition covers every configuration.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ControlPulse, SimGrid};

/// γ for the D2 line: 2π × 3.035 MHz in rad/ns.
pub const GAMMA_D2: f64 = 2.0 * PI * 3.035e-3;
/// γ for the D1 line: π × 5.75 MHz in rad/ns.
pub const GAMMA_D1: f64 = PI * 5.75e-3;
/// Excited-state hyperfine splitting of the D2 line: 2π × 156.95 MHz in rad/ns.
pub const DELTA_E_D2: f64 = 2.0 * PI * 156.95e-3;
/// Excited-state hyperfine splitting of the D1 line: 2π × 814.5 MHz in rad/ns.
pub const DELTA_E_D1: f64 = 2.0 * PI * 814.5e-3;
/// Ground-state hyperfine splitting: 2π × 6.835 GHz in rad/ns.
pub const DELTA_HF: f64 = 2.0 * PI * 6.835;

/// Peak-power coefficient for the D2 cycling transition, W/m²:
/// P = 52.47 W/m² · w0² · (Ω/γ)².
pub const POWER_COEFF_W_PER_M2: f64 = 52.47;

/// Optical line an entry belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Line {
    D1,
    D2,
    /// Idealized or scenario systems not tied to a physical line.
    Model,
}

impl std::fmt::Display for Line {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Line::D1 => f.write_str("D1"),
            Line::D2 => f.write_str("D2"),
            Line::Model => f.write_str("model"),
        }
    }
}

/// Atomic level configuration for one storage scheme.
///
/// `delta_e` is the energy of |2⟩ above |1⟩: configurations that resonate
/// with the upper excited state carry a negative value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelScheme {
    pub label: String,
    pub line: Line,
    /// State labels (g, s, e1, e2) for export; empty for model systems.
    pub states: [String; 4],
    pub mu_1g: f64,
    pub mu_1s: f64,
    pub mu_2g: f64,
    pub mu_2s: f64,
    /// Excited-state coherence decay, rad/ns.
    pub gamma: f64,
    /// Excited-state splitting, rad/ns, signed.
    pub delta_e: f64,
    /// One-photon detuning, rad/ns.
    pub delta_g: f64,
    /// Two-photon detuning, rad/ns.
    pub delta_s: f64,
    /// Dimensionless optical depth (paper convention: half of d_std).
    pub d: f64,
    /// Ground hyperfine splitting, rad/ns; used only by the FWM solver.
    pub delta_hf: f64,
}

impl LevelScheme {
    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::Parameter {
                name: "gamma",
                reason: format!("must be positive, got {}", self.gamma),
            });
        }
        if !(self.d >= 0.0) {
            return Err(Error::Parameter {
                name: "d",
                reason: format!("optical depth must be non-negative, got {}", self.d),
            });
        }
        for (name, mu) in [
            ("mu_1g", self.mu_1g),
            ("mu_1s", self.mu_1s),
            ("mu_2g", self.mu_2g),
            ("mu_2s", self.mu_2s),
        ] {
            if !(mu.abs() <= 1.0 + 1e-12) {
                return Err(Error::Parameter {
                    name: "mu",
                    reason: format!("{name} = {mu} exceeds the cycling moment"),
                });
            }
        }
        Ok(())
    }

    /// True when the second excited state is decoupled.
    pub fn is_three_level(&self) -> bool {
        self.mu_2g == 0.0 && self.mu_2s == 0.0
    }

    /// Copy with |2⟩ decoupled; every solver then reproduces the three-level
    /// system exactly.
    pub fn three_level(&self) -> LevelScheme {
        LevelScheme { mu_2g: 0.0, mu_2s: 0.0, ..self.clone() }
    }

    /// Copy with detunings replaced (rad/ns).
    pub fn with_detunings(&self, delta_g: f64, delta_s: f64) -> LevelScheme {
        LevelScheme { delta_g, delta_s, ..self.clone() }
    }
}

/// One catalog row before optical depth and detunings are chosen.
#[derive(Debug, Clone)]
struct CatalogEntry {
    label: &'static str,
    line: Line,
    states: [&'static str; 4],
    mu: [f64; 4],
    gamma: f64,
    delta_e: f64,
}

/// Fixed table of named level schemes covering the ⁸⁷Rb configurations and
/// the idealized / scenario systems.
pub struct Rb87Catalog {
    entries: Vec<CatalogEntry>,
}

impl Default for Rb87Catalog {
    fn default() -> Self {
        Self::standard()
    }
}

impl Rb87Catalog {
    /// Compiled-in catalog.
    ///
    /// D2 moments are the printed relative values in units of μ_cyc. D1
    /// moments are the printed relative values as well: μ_cyc already carries
    /// the √(1/2) of the cycling transition, so D1 coefficients in their own
    /// reduced-element units coincide with cycling-moment units to 0.09%.
    pub fn standard() -> Self {
        let r5_12 = (5.0f64 / 12.0).sqrt();
        let r1_12 = (1.0f64 / 12.0).sqrt();
        let r1_20 = (1.0f64 / 20.0).sqrt();
        let r1_60 = (1.0f64 / 60.0).sqrt();
        let r1_4 = 0.5f64;
        let de_scenario = 2.0 * PI * 100.0e-3;

        let mut entries = Vec::new();
        // Idealized gas and the two four-level scenarios.
        entries.push(CatalogEntry {
            label: "ideal-3L",
            line: Line::Model,
            states: ["g", "s", "e1", ""],
            mu: [1.0, 1.0, 0.0, 0.0],
            gamma: GAMMA_D2,
            delta_e: 0.0,
        });
        entries.push(CatalogEntry {
            label: "4L-plus",
            line: Line::Model,
            states: ["g", "s", "e1", "e2"],
            mu: [1.0, 1.0, 1.0, 1.0],
            gamma: GAMMA_D2,
            delta_e: de_scenario,
        });
        entries.push(CatalogEntry {
            label: "4L-minus",
            line: Line::Model,
            states: ["g", "s", "e1", "e2"],
            mu: [1.0, 1.0, 1.0, -1.0],
            gamma: GAMMA_D2,
            delta_e: de_scenario,
        });

        // D2, ground states |1,-1> and |2,1> (four configurations).
        let g1 = "1,-1";
        let g2 = "2,1";
        let e1 = "1',0";
        let e2 = "2',0";
        // Moments: |1,-1>->|1',0>, |2,1>->|1',0>, |1,-1>->|2',0>, |2,1>->|2',0>
        let (a_ge1, b_ge1, a_ge2, b_ge2) = (r5_12, r1_20, r1_12, -r1_4);
        entries.push(CatalogEntry {
            label: "D2-stretch-config1",
            line: Line::D2,
            states: [g1, g2, e1, e2],
            mu: [a_ge1, b_ge1, a_ge2, b_ge2],
            gamma: GAMMA_D2,
            delta_e: DELTA_E_D2,
        });
        entries.push(CatalogEntry {
            label: "D2-stretch-config2",
            line: Line::D2,
            states: [g1, g2, e2, e1],
            mu: [a_ge2, b_ge2, a_ge1, b_ge1],
            gamma: GAMMA_D2,
            delta_e: -DELTA_E_D2,
        });
        entries.push(CatalogEntry {
            label: "D2-stretch-config3",
            line: Line::D2,
            states: [g2, g1, e1, e2],
            mu: [b_ge1, a_ge1, b_ge2, a_ge2],
            gamma: GAMMA_D2,
            delta_e: DELTA_E_D2,
        });
        entries.push(CatalogEntry {
            label: "D2-stretch-config4",
            line: Line::D2,
            states: [g2, g1, e2, e1],
            mu: [b_ge2, a_ge2, b_ge1, a_ge1],
            gamma: GAMMA_D2,
            delta_e: -DELTA_E_D2,
        });

        // D2, clock states |1,0> and |2,0>.
        let g1 = "1,0";
        let g2 = "2,0";
        let e1 = "1',1";
        let e2 = "2',1";
        let (a_ge1, b_ge1, a_ge2, b_ge2) = (r5_12, r1_60, r1_4, r1_4);
        entries.push(CatalogEntry {
            label: "D2-clock-config1",
            line: Line::D2,
            states: [g1, g2, e1, e2],
            mu: [a_ge1, b_ge1, a_ge2, b_ge2],
            gamma: GAMMA_D2,
            delta_e: DELTA_E_D2,
        });
        entries.push(CatalogEntry {
            label: "D2-clock-config2",
            line: Line::D2,
            states: [g1, g2, e2, e1],
            mu: [a_ge2, b_ge2, a_ge1, b_ge1],
            gamma: GAMMA_D2,
            delta_e: -DELTA_E_D2,
        });
        entries.push(CatalogEntry {
            label: "D2-clock-config3",
            line: Line::D2,
            states: [g2, g1, e1, e2],
            mu: [b_ge1, a_ge1, b_ge2, a_ge2],
            gamma: GAMMA_D2,
            delta_e: DELTA_E_D2,
        });
        entries.push(CatalogEntry {
            label: "D2-clock-config4",
            line: Line::D2,
            states: [g2, g1, e2, e1],
            mu: [b_ge2, a_ge2, b_ge1, a_ge1],
            gamma: GAMMA_D2,
            delta_e: -DELTA_E_D2,
        });

        // D1, ground states |1,-1> and |2,1>. Interchanging the excited
        // states only permutes signs, so two configurations are unique.
        let g1 = "1,-1";
        let g2 = "2,1";
        let e1 = "1',0";
        let e2 = "2',0";
        let (a_ge1, b_ge1, a_ge2, b_ge2) = (-r1_12, r1_4, -r1_12, -r1_4);
        entries.push(CatalogEntry {
            label: "D1-stretch-config1",
            line: Line::D1,
            states: [g1, g2, e1, e2],
            mu: [a_ge1, b_ge1, a_ge2, b_ge2],
            gamma: GAMMA_D1,
            delta_e: DELTA_E_D1,
        });
        entries.push(CatalogEntry {
            label: "D1-stretch-config2",
            line: Line::D1,
            states: [g2, g1, e1, e2],
            mu: [b_ge1, a_ge1, b_ge2, a_ge2],
            gamma: GAMMA_D1,
            delta_e: DELTA_E_D1,
        });

        // D1, clock states |1,0> and |2,0>.
        let g1 = "1,0";
        let g2 = "2,0";
        let e1 = "1',1";
        let e2 = "2',1";
        let (a_ge1, b_ge1, a_ge2, b_ge2) = (-r1_12, r1_12, -r1_4, r1_4);
        entries.push(CatalogEntry {
            label: "D1-clock-config1",
            line: Line::D1,
            states: [g1, g2, e1, e2],
            mu: [a_ge1, b_ge1, a_ge2, b_ge2],
            gamma: GAMMA_D1,
            delta_e: DELTA_E_D1,
        });
        entries.push(CatalogEntry {
            label: "D1-clock-config2",
            line: Line::D1,
            states: [g1, g2, e2, e1],
            mu: [a_ge2, b_ge2, a_ge1, b_ge1],
            gamma: GAMMA_D1,
            delta_e: -DELTA_E_D1,
        });
        // Config 3 of Table VIII: config 2 with the second excited state
        // neglected. Config 4 evaluates config 2 under the config-3 pulse;
        // the scheme itself is identical to config 2.
        entries.push(CatalogEntry {
            label: "D1-clock-config3",
            line: Line::D1,
            states: [g1, g2, e2, ""],
            mu: [a_ge2, b_ge2, 0.0, 0.0],
            gamma: GAMMA_D1,
            delta_e: -DELTA_E_D1,
        });
        entries.push(CatalogEntry {
            label: "D1-clock-config4",
            line: Line::D1,
            states: [g1, g2, e2, e1],
            mu: [a_ge2, b_ge2, a_ge1, b_ge1],
            gamma: GAMMA_D1,
            delta_e: -DELTA_E_D1,
        });

        Self { entries }
    }

    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.label.to_string()).collect()
    }

    /// Returns the fully populated scheme for `label` at optical depth `d`
    /// with detunings `(delta_g, delta_s)` in rad/ns.
    pub fn lookup(&self, label: &str, d: f64, detunings: (f64, f64)) -> Result<LevelScheme> {
        let entry = self
            .entries
            .iter()
            .find(|e| e.label.eq_ignore_ascii_case(label))
            .ok_or_else(|| Error::UnknownScheme {
                label: label.to_string(),
                valid: self.labels(),
            })?;
        let scheme = LevelScheme {
            label: entry.label.to_string(),
            line: entry.line,
            states: entry.states.map(str::to_string),
            mu_1g: entry.mu[0],
            mu_1s: entry.mu[1],
            mu_2g: entry.mu[2],
            mu_2s: entry.mu[3],
            gamma: entry.gamma,
            delta_e: entry.delta_e,
            delta_g: detunings.0,
            delta_s: detunings.1,
            d,
            delta_hf: DELTA_HF,
        };
        scheme.validate()?;
        Ok(scheme)
    }

    /// Emits the full table as CSV for audit.
    pub fn export_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "label,line,g,s,e1,e2,mu_1g,mu_1s,mu_2g,mu_2s,delta_e_MHz,gamma_MHz"
        )?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{},{},{},{},{:.10},{:.10},{:.10},{:.10},{:.6},{:.6}",
                e.label,
                e.line,
                e.states[0],
                e.states[1],
                e.states[2],
                e.states[3],
                e.mu[0],
                e.mu[1],
                e.mu[2],
                e.mu[3],
                e.delta_e / (2.0 * PI) * 1e3,
                e.gamma / (2.0 * PI) * 1e3,
            )?;
        }
        Ok(())
    }

    pub fn export_csv_to(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.export_csv(std::io::BufWriter::new(f))
    }
}

/// Peak optical power (W) of a Gaussian control beam with waist `waist` (m)
/// at peak Rabi amplitude `omega_m` (units of γ), via the D2
/// cycling-transition coefficient.
pub fn rabi_to_peak_power(omega_m: f64, waist: f64) -> Result<f64> {
    if omega_m < 0.0 {
        return Err(Error::Parameter {
            name: "omega_m",
            reason: format!("Rabi amplitude must be non-negative, got {omega_m}"),
        });
    }
    if !(waist > 0.0) {
        return Err(Error::Parameter {
            name: "waist",
            reason: format!("beam waist must be positive, got {waist}"),
        });
    }
    Ok(POWER_COEFF_W_PER_M2 * waist * waist * omega_m * omega_m)
}

/// Pulse energy (J): U = 52.47 W/m² · w0² · ∫ (Ω/γ)² dτ with the grid's
/// trapezoidal quadrature (τ converted from ns to s).
pub fn pulse_energy(pulse: &ControlPulse, grid: &SimGrid, waist: f64) -> Result<f64> {
    if !(waist > 0.0) {
        return Err(Error::Parameter {
            name: "waist",
            reason: format!("beam waist must be positive, got {waist}"),
        });
    }
    let sq: Vec<f64> = pulse.samples.iter().map(|v| v * v).collect();
    Ok(POWER_COEFF_W_PER_M2 * waist * waist * grid.integrate_t(&sq) * 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn d2_stretch_config1_matches_table() {
        let cat = Rb87Catalog::standard();
        let s = cat.lookup("D2-stretch-config1", 75.0, (0.0, 0.0)).unwrap();
        assert_relative_eq!(s.mu_1g, (5.0f64 / 12.0).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(s.mu_1s, (1.0f64 / 20.0).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(s.mu_2g, (1.0f64 / 12.0).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(s.mu_2s, -0.5, epsilon = 1e-15);
        assert_relative_eq!(s.delta_e, 2.0 * PI * 156.95e-3, epsilon = 1e-15);
        assert_relative_eq!(s.gamma, 2.0 * PI * 3.035e-3, epsilon = 1e-15);
        assert_eq!(s.d, 75.0);
    }

    #[test]
    fn d2_clock_moments_match_table() {
        let cat = Rb87Catalog::standard();
        // Config 1 reads the clock table directly: g = |1,0>, 1 = |1',1>.
        let s = cat.lookup("D2-clock-config1", 75.0, (0.0, 0.0)).unwrap();
        assert_relative_eq!(s.mu_1g, (5.0f64 / 12.0).sqrt(), epsilon = 1e-15); // |1,0>->|1',1>
        assert_relative_eq!(s.mu_2g, 0.5, epsilon = 1e-15); // |1,0>->|2',1>
        assert_relative_eq!(s.mu_1s, (1.0f64 / 60.0).sqrt(), epsilon = 1e-15); // |2,0>->|1',1>
        assert_relative_eq!(s.mu_2s, 0.5, epsilon = 1e-15); // |2,0>->|2',1>
        // Config 4 resonates with the upper excited state: negative splitting.
        let s4 = cat.lookup("D2-clock-config4", 75.0, (0.0, 0.0)).unwrap();
        assert!(s4.delta_e < 0.0);
        assert_relative_eq!(s4.mu_1g, 0.5, epsilon = 1e-15);
        assert_relative_eq!(s4.mu_2s, (5.0f64 / 12.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn ideal_scheme_is_three_level() {
        let cat = Rb87Catalog::standard();
        let s = cat.lookup("ideal-3L", 75.0, (0.0, 0.0)).unwrap();
        assert_eq!(s.mu_1g, 1.0);
        assert_eq!(s.mu_1s, 1.0);
        assert!(s.is_three_level());
    }

    #[test]
    fn d1_clock_config2_uses_printed_moments() {
        // Printed Table VII values are already in cycling-moment units; the
        // paper's own effective optical depth d*mu^2 = 18.75 pins this.
        let cat = Rb87Catalog::standard();
        let s = cat.lookup("D1-clock-config2", 75.0, (0.0, 0.0)).unwrap();
        assert_relative_eq!(s.mu_1g.abs(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(s.d * s.mu_1g * s.mu_1g, 18.75, epsilon = 1e-12);
        assert!(s.delta_e < 0.0);
        assert_relative_eq!(s.gamma, PI * 5.75e-3, epsilon = 1e-15);
    }

    #[test]
    fn unknown_label_lists_valid_names() {
        let cat = Rb87Catalog::standard();
        match cat.lookup("nope", 1.0, (0.0, 0.0)) {
            Err(Error::UnknownScheme { valid, .. }) => {
                assert!(valid.iter().any(|l| l == "ideal-3L"));
                assert!(valid.len() >= 14);
            }
            other => panic!("expected UnknownScheme, got {other:?}"),
        }
    }

    #[test]
    fn all_moments_bounded_by_cycling() {
        let cat = Rb87Catalog::standard();
        for label in cat.labels() {
            let s = cat.lookup(&label, 10.0, (0.0, 0.0)).unwrap();
            for mu in [s.mu_1g, s.mu_1s, s.mu_2g, s.mu_2s] {
                assert!(mu.abs() <= 1.0, "{label}: {mu}");
            }
        }
    }

    #[test]
    fn peak_power_matches_paper_values() {
        // Table IV config 4: Omega_m = 43.12 gamma at 350 um waist -> ~12 mW.
        let p = rabi_to_peak_power(43.12, 350e-6).unwrap();
        assert_relative_eq!(p, 12.0e-3, max_relative = 0.01);
        assert_eq!(rabi_to_peak_power(0.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(rabi_to_peak_power(1.0, 1.0).unwrap(), 52.47, epsilon = 1e-12);
        assert!(rabi_to_peak_power(-1.0, 1.0).is_err());
        assert!(rabi_to_peak_power(1.0, 0.0).is_err());
    }

    #[test]
    fn power_is_quadratic_in_rabi() {
        for omega in [0.3, 1.7, 43.12, 130.0] {
            let p1 = rabi_to_peak_power(omega, 0.01).unwrap();
            let p2 = rabi_to_peak_power(2.0 * omega, 0.01).unwrap();
            assert_relative_eq!(p2, 4.0 * p1, max_relative = 1e-12);
        }
    }

    #[test]
    fn square_pulse_energy_closed_form() {
        // Omega = gamma over 1 ns at 1 m waist: U = 52.47 W * 1 ns = 52.47 nJ.
        let grid = SimGrid::new(2, 1001, 1.0).unwrap();
        let pulse = ControlPulse { samples: vec![1.0; grid.n_t] };
        let u = pulse_energy(&pulse, &grid, 1.0).unwrap();
        assert_relative_eq!(u, 52.47e-9, max_relative = 1e-12);
        let zero = ControlPulse::zeros(&grid);
        assert_eq!(pulse_energy(&zero, &grid, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn export_contains_table_values() {
        let cat = Rb87Catalog::standard();
        let mut out = Vec::new();
        cat.export_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("label,line,g,s,e1,e2,"));
        // sqrt(5/12) = 0.6455 appears for the D2 stretch mu_1g.
        assert!(text.contains("0.6454972244"));
        assert!(text.contains("D2-clock-config4"));
        assert!(text.contains("156.95"));
    }
}
