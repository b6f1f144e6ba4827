use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{ensure_normalized, IonError, JointState, Pulse, PulseKind};

/// How pulse areas are realized in the lab.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleMode {
    /// Fixed Rabi frequency per pulse kind, variable durations.
    FixedRabi,
    /// Fixed duration for every pulse, variable Rabi frequencies.
    FixedDuration,
}

/// Relation between Rabi frequency, duration and pulse area:
/// `theta = rabi * t / factor`. Rabi frequencies are taken as angular rates
/// numerically equal to the quoted value; `factor = 2` selects the
/// `theta = Omega t / 2` convention.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingConvention {
    pub factor: f64,
}

impl Default for TimingConvention {
    fn default() -> Self {
        TimingConvention { factor: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleHeader {
    pub mode: ScheduleMode,
    pub eta: f64,
    pub carrier_rabi_hz: f64,
    pub red_rabi_hz: f64,
    pub fixed_duration_s: f64,
    pub convention_factor: f64,
    /// Phase of the initial `|0,g>` amplitude, as `[re, im]`.
    pub global_phase: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalPulse {
    pub kind: PulseKind,
    pub index: usize,
    pub phase_rad: f64,
    pub theta_rad: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi_hz: Option<f64>,
    /// Zero-area pulse kept only to preserve the `C_k` / `R_k` layout.
    #[serde(default)]
    pub skippable: bool,
}

/// A pulse list with lab parameters attached. Serializes to
/// `{ "header": {..}, "pulses": [..] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalSchedule {
    pub header: ScheduleHeader,
    pub pulses: Vec<PhysicalPulse>,
}

impl PhysicalSchedule {
    /// Attaches durations (fixed Rabi) or Rabi frequencies (fixed duration).
    /// Phases are copied unchanged.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        pulses: &[Pulse],
        mode: ScheduleMode,
        carrier_rabi_hz: f64,
        red_rabi_hz: f64,
        fixed_duration_s: f64,
        eta: f64,
        convention: TimingConvention,
        global_phase: C64,
    ) -> Result<Self, IonError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(convention.factor) {
            return Err(IonError::BadTiming);
        }
        match mode {
            ScheduleMode::FixedRabi if !(positive(carrier_rabi_hz) && positive(red_rabi_hz)) => {
                return Err(IonError::BadTiming)
            }
            ScheduleMode::FixedDuration if !positive(fixed_duration_s) => return Err(IonError::BadTiming),
            _ => {}
        }
        if (global_phase.norm() - 1.0).abs() > 1e-12 {
            return Err(IonError::BadGlobalPhase(global_phase.norm()));
        }
        let physical = pulses
            .iter()
            .map(|p| {
                let rabi = match p.kind {
                    PulseKind::Carrier => carrier_rabi_hz,
                    PulseKind::RedSideband => red_rabi_hz,
                };
                let (duration_s, rabi_hz) = match mode {
                    ScheduleMode::FixedRabi => (Some(convention.factor * p.theta / rabi), None),
                    ScheduleMode::FixedDuration => (None, Some(convention.factor * p.theta / fixed_duration_s)),
                };
                PhysicalPulse {
                    kind: p.kind,
                    index: p.index,
                    phase_rad: p.phase,
                    theta_rad: p.theta,
                    duration_s,
                    rabi_hz,
                    skippable: p.theta == 0.0,
                }
            })
            .collect();
        Ok(PhysicalSchedule {
            header: ScheduleHeader {
                mode,
                eta,
                carrier_rabi_hz,
                red_rabi_hz,
                fixed_duration_s,
                convention_factor: convention.factor,
                global_phase: [global_phase.re, global_phase.im],
            },
            pulses: physical,
        })
    }

    pub fn global_phase(&self) -> C64 {
        C64::new(self.header.global_phase[0], self.header.global_phase[1])
    }

    /// Pulse areas recovered from the lab parameters, so that simulation goes
    /// through the same numbers a device would receive.
    pub fn realized_pulses(&self) -> Result<Vec<Pulse>, IonError> {
        let h = &self.header;
        self.pulses
            .iter()
            .map(|p| {
                let theta = match (h.mode, p.duration_s, p.rabi_hz) {
                    (ScheduleMode::FixedRabi, Some(t), _) => {
                        let rabi = match p.kind {
                            PulseKind::Carrier => h.carrier_rabi_hz,
                            PulseKind::RedSideband => h.red_rabi_hz,
                        };
                        rabi * t / h.convention_factor
                    }
                    (ScheduleMode::FixedDuration, _, Some(rabi)) => rabi * h.fixed_duration_s / h.convention_factor,
                    _ => return Err(IonError::BadTiming),
                };
                Ok(Pulse { kind: p.kind, index: p.index, phase: p.phase_rad, theta })
            })
            .collect()
    }

    /// Forward simulation from `initial`.
    pub fn simulate(&self, initial: &JointState) -> Result<JointState, IonError> {
        let pulses = self.realized_pulses()?;
        super::simulate_pulses(&pulses, initial, self.header.eta)
    }

    /// Forward simulation from `global_phase |0,g>` in `dim` motional levels.
    pub fn simulate_from_ground(&self, dim: usize) -> Result<JointState, IonError> {
        let init = JointState::ground(dim)?.scaled(self.global_phase());
        ensure_normalized(&init)?;
        self.simulate(&init)
    }

    pub fn top_level(&self) -> usize {
        self.pulses.iter().map(|p| p.index).max().unwrap_or(0)
    }

    /// Two-column text table in descending order, `R_M` beside `C_{M-1}`,
    /// durations in microseconds or Rabi frequencies in MHz.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# mode={} eta={} carrier_rabi={} Hz red_rabi={} Hz duration={} s factor={}",
            match self.header.mode {
                ScheduleMode::FixedRabi => "fixed-rabi",
                ScheduleMode::FixedDuration => "fixed-duration",
            },
            self.header.eta,
            self.header.carrier_rabi_hz,
            self.header.red_rabi_hz,
            self.header.fixed_duration_s,
            self.header.convention_factor
        );
        let gp = self.global_phase();
        let _ = writeln!(out, "# initial state ({:+.4} {:+.4}i)|0,g>", gp.re, gp.im);
        let cell = |p: &PhysicalPulse| {
            let label = format!("{}{}:", p.kind.label(), p.index);
            let value = match (p.duration_s, p.rabi_hz) {
                (Some(t), _) => format!("t = {:>10.4} us", t * 1e6),
                (_, Some(r)) => format!("Omega = {:>10.4} MHz", r * 1e-6),
                _ => String::new(),
            };
            format!("{label:<5} phi = {:>7.4}, {value}", p.phase_rad)
        };
        let order: Vec<&PhysicalPulse> = self.pulses.iter().rev().collect();
        for pair in order.chunks(2) {
            let line = pair.iter().map(|p| cell(p)).collect::<Vec<_>>().join(";   ");
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ion::{synthesize, TargetSpec};
    use std::f64::consts::PI;

    fn sample_pulses() -> Vec<Pulse> {
        vec![
            Pulse { kind: PulseKind::Carrier, index: 0, phase: 0.3, theta: PI },
            Pulse { kind: PulseKind::RedSideband, index: 1, phase: -1.0, theta: 150.0 },
            Pulse { kind: PulseKind::Carrier, index: 1, phase: 0.0, theta: 0.0 },
        ]
    }

    #[test]
    fn doubling_rabi_halves_duration() {
        let one = C64::new(1.0, 0.0);
        let conv = TimingConvention::default();
        let a = PhysicalSchedule::new(&sample_pulses(), ScheduleMode::FixedRabi, 1e6, 1e5, 0.0, 0.02, conv, one).unwrap();
        let b = PhysicalSchedule::new(&sample_pulses(), ScheduleMode::FixedRabi, 2e6, 2e5, 0.0, 0.02, conv, one).unwrap();
        for (x, y) in a.pulses.iter().zip(&b.pulses) {
            assert!((x.duration_s.unwrap() - 2.0 * y.duration_s.unwrap()).abs() < 1e-18);
        }
        assert!((a.pulses[0].duration_s.unwrap() - PI * 1e-6).abs() < 1e-18);
        assert!(a.pulses[2].skippable && a.pulses[2].duration_s == Some(0.0));
    }

    #[test]
    fn convention_factor_doubles_times() {
        let one = C64::new(1.0, 0.0);
        let a = PhysicalSchedule::new(&sample_pulses(), ScheduleMode::FixedDuration, 0.0, 0.0, 1e-6, 0.02, TimingConvention { factor: 2.0 }, one)
            .unwrap();
        assert!((a.pulses[1].rabi_hz.unwrap() - 300e6).abs() < 1e-3);
        let back = a.realized_pulses().unwrap();
        assert!((back[1].theta - 150.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_timing() {
        let one = C64::new(1.0, 0.0);
        let conv = TimingConvention::default();
        assert_eq!(
            PhysicalSchedule::new(&sample_pulses(), ScheduleMode::FixedRabi, 0.0, 1e5, 0.0, 0.02, conv, one),
            Err(IonError::BadTiming)
        );
        assert_eq!(
            PhysicalSchedule::new(&sample_pulses(), ScheduleMode::FixedDuration, 1e6, 1e5, -1.0, 0.02, conv, one),
            Err(IonError::BadTiming)
        );
        assert!(matches!(
            PhysicalSchedule::new(&sample_pulses(), ScheduleMode::FixedRabi, 1e6, 1e5, 0.0, 0.02, conv, C64::new(2.0, 0.0)),
            Err(IonError::BadGlobalPhase(_))
        ));
    }

    #[test]
    fn json_round_trip_and_field_names() {
        let sched = PhysicalSchedule::new(
            &sample_pulses(),
            ScheduleMode::FixedRabi,
            1e6,
            1e5,
            1e-6,
            0.02,
            TimingConvention::default(),
            C64::new(0.0, 1.0),
        )
        .unwrap();
        let js = serde_json::to_value(&sched).unwrap();
        assert_eq!(js["header"]["mode"], "fixed-rabi");
        assert_eq!(js["header"]["global_phase"], serde_json::json!([0.0, 1.0]));
        assert_eq!(js["pulses"][1]["kind"], "red-sideband");
        assert!(js["pulses"][0].get("rabi_hz").is_none());
        let back: PhysicalSchedule = serde_json::from_value(js).unwrap();
        assert_eq!(back, sched);
    }

    #[test]
    fn table_layout_pairs_red_with_carrier() {
        let t = TargetSpec::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.48), C64::new(0.64, 0.0)]).unwrap();
        let syn = synthesize(&t, 0.02).unwrap();
        let sched = PhysicalSchedule::new(
            &syn.pulses,
            ScheduleMode::FixedRabi,
            1e6,
            1e5,
            0.0,
            0.02,
            TimingConvention::default(),
            syn.global_phase,
        )
        .unwrap();
        let table = sched.to_table();
        let rows: Vec<&str> = table.lines().skip(2).collect();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].starts_with("R2:") && rows[0].contains("C1:"));
        assert!(rows[1].starts_with("R1:") && rows[1].contains("C0:"));
    }
}
