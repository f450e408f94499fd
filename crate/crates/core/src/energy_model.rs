//! Closed-form steady-state model of a heaving point absorber under a
//! harmonic wave and a harmonic PTO force.
//!
//! Everything in this module is pure algebra on the linear plant
//! `m v' + h_r v + K x = h_ex eta + F_u`: the velocity response split into
//! its PTO- and wave-driven components, the windowed average extracted power,
//! and the analytic optimum of that power over the PTO parameters. The same
//! functions serve as the controller's internal predictor and as the
//! reference the time-domain plant is validated against.
//!
//! Phases are computed with the two-argument arctangent throughout: the
//! reactance `m w - K/w` is negative over the whole sea-state band for
//! realistic buoys, and a plain `atan` of the ratio lands in the wrong
//! quadrant there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{sinc, Scalar};

/// Frequencies below this are rejected: the stiffness term `K/w` diverges
/// and no physical sea state lives there.
pub const MIN_FREQUENCY: f64 = 1e-3;

/// Harmonic wave parameters: elevation `eta(t) = amplitude * cos(frequency * t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams<T> {
    /// Wave amplitude, m (>= 0).
    pub amplitude: T,
    /// Wave phase, rad.
    pub phase: T,
    /// Wave angular frequency, rad/s (> 0).
    pub frequency: T,
}

impl<T: Scalar> WaveParams<T> {
    pub fn new(amplitude: T, phase: T, frequency: T) -> Self {
        Self {
            amplitude,
            phase,
            frequency,
        }
    }

    /// Wave elevation at time `t`.
    pub fn elevation(&self, t: T) -> T {
        self.amplitude * (self.frequency * t + self.phase).cos()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= T::zero()) || !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter {
                name: "wave amplitude",
                value: self.amplitude.to_f64_lossy(),
                reason: "must be finite and non-negative",
            });
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidParameter {
                name: "wave phase",
                value: self.phase.to_f64_lossy(),
                reason: "must be finite",
            });
        }
        check_frequency(self.frequency)?;
        Ok(())
    }
}

/// Harmonic PTO force parameters: `F_u(t) = amplitude * cos(frequency * t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtoProfile<T> {
    /// Force amplitude, N (>= 0).
    pub amplitude: T,
    /// Force phase, rad.
    pub phase: T,
    /// Force angular frequency, rad/s (> 0).
    pub frequency: T,
}

impl<T: Scalar> PtoProfile<T> {
    pub fn new(amplitude: T, phase: T, frequency: T) -> Self {
        Self {
            amplitude,
            phase,
            frequency,
        }
    }

    /// The commanded force at absolute time `t`, before any saturation.
    pub fn force(&self, t: T) -> T {
        self.amplitude * (self.frequency * t + self.phase).cos()
    }
}

/// Plant constants of the point absorber, plus its actuation and motion limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WecParams<T> {
    /// Total (buoy + added) mass, kg.
    pub mass: T,
    /// Radiation damping coefficient h_r, kg/s.
    pub radiation_damping: T,
    /// Hydrostatic stiffness K, N/m.
    pub stiffness: T,
    /// Excitation coefficient h_ex, kg/s^2 (wave elevation -> force).
    pub excitation: T,
    /// PTO force limit, N.
    pub force_limit: T,
    /// Heave excursion limit, m.
    pub heave_limit: T,
    /// Heave velocity limit, m/s.
    pub velocity_limit: T,
}

impl<T: Scalar> WecParams<T> {
    /// Mechanical reactance `m w - K / w` at angular frequency `w`.
    pub fn reactance(&self, freq: T) -> T {
        self.mass * freq - self.stiffness / freq
    }

    /// Squared impedance magnitude `(m w - K/w)^2 + h_r^2`.
    pub fn impedance_sq(&self, freq: T) -> T {
        let x = self.reactance(freq);
        x * x + self.radiation_damping * self.radiation_damping
    }

    /// Velocity response phase lead `atan2(h_r, m w - K/w)`.
    pub fn response_phase(&self, freq: T) -> T {
        self.radiation_damping.atan2(self.reactance(freq))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("radiation_damping", self.radiation_damping),
            ("stiffness", self.stiffness),
            ("excitation", self.excitation),
            ("force_limit", self.force_limit),
            ("heave_limit", self.heave_limit),
            ("velocity_limit", self.velocity_limit),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v.to_f64_lossy(),
                    reason: "must be finite and strictly positive",
                });
            }
        }
        Ok(())
    }
}

/// Amplitudes and phases of the steady-state velocity components
/// `v(t) = a_pto sin(w_u t + b_pto) + a_wave sin(w t + b_wave)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseComponents<T> {
    /// PTO-induced velocity amplitude, m/s.
    pub a_pto: T,
    /// PTO-induced velocity phase, rad.
    pub b_pto: T,
    /// Wave-induced velocity amplitude, m/s.
    pub a_wave: T,
    /// Wave-induced velocity phase, rad.
    pub b_wave: T,
}

impl<T: Scalar> ResponseComponents<T> {
    /// Steady-state velocity: superposition of both components.
    pub fn velocity(&self, t: T, profile: &PtoProfile<T>, wave: &WaveParams<T>) -> T {
        self.a_pto * (profile.frequency * t + self.b_pto).sin()
            + self.a_wave * (wave.frequency * t + self.b_wave).sin()
    }
}

fn check_frequency<T: Scalar>(freq: T) -> Result<()> {
    if !(freq >= T::of(MIN_FREQUENCY)) || !freq.is_finite() {
        return Err(Error::FrequencyOutOfRange {
            value: freq.to_f64_lossy(),
            min: MIN_FREQUENCY,
        });
    }
    Ok(())
}

fn check_duration<T: Scalar>(window: T) -> Result<()> {
    if !(window > T::zero()) || !window.is_finite() {
        return Err(Error::NonPositiveDuration {
            value: window.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Steady-state velocity amplitudes and phases for a PTO profile and a wave.
pub fn response_components<T: Scalar>(
    profile: &PtoProfile<T>,
    wave: &WaveParams<T>,
    plant: &WecParams<T>,
) -> Result<ResponseComponents<T>> {
    check_frequency(profile.frequency)?;
    check_frequency(wave.frequency)?;
    Ok(ResponseComponents {
        a_pto: profile.amplitude / plant.impedance_sq(profile.frequency).sqrt(),
        b_pto: plant.response_phase(profile.frequency) + profile.phase,
        a_wave: wave.amplitude * plant.excitation / plant.impedance_sq(wave.frequency).sqrt(),
        b_wave: plant.response_phase(wave.frequency) + wave.phase,
    })
}

/// Average extracted power over a window of `window` seconds,
/// `P_avg = P_pto + P_wave`.
///
/// The PTO self-interaction term is the intrinsic impedance loss and is
/// always non-positive. The cross term is evaluated through
/// `sin(phi + x) * sinc(x)` with `x = (w_u - w) * window / 2`, which is the
/// exact value of the defining integral and stays finite and smooth through
/// the resonance `w_u = w` where the textbook quotient form divides by zero.
pub fn average_power<T: Scalar>(
    profile: &PtoProfile<T>,
    wave: &WaveParams<T>,
    plant: &WecParams<T>,
    window: T,
) -> Result<T> {
    check_duration(window)?;
    check_frequency(profile.frequency)?;
    check_frequency(wave.frequency)?;

    let two = T::of(2.0);
    let p_pto = -profile.amplitude * profile.amplitude * plant.radiation_damping
        / (two * plant.impedance_sq(profile.frequency));

    let a_wave = wave.amplitude * plant.excitation / plant.impedance_sq(wave.frequency).sqrt();
    let phi = profile.phase - wave.phase - plant.response_phase(wave.frequency);
    let x = (profile.frequency - wave.frequency) * window / two;
    let p_wave = profile.amplitude * a_wave / two * (phi + x).sin() * sinc(x);

    Ok(p_pto + p_wave)
}

/// The PTO profile that maximizes [`average_power`] for a known wave.
///
/// The result is not clamped to actuation limits; saturation policy belongs
/// to the caller.
pub fn optimal_profile<T: Scalar>(
    wave: &WaveParams<T>,
    plant: &WecParams<T>,
) -> Result<PtoProfile<T>> {
    check_frequency(wave.frequency)?;
    let two = T::of(2.0);
    Ok(PtoProfile {
        amplitude: wave.amplitude * plant.excitation * plant.impedance_sq(wave.frequency).sqrt()
            / (two * plant.radiation_damping),
        phase: wave.phase + plant.response_phase(wave.frequency) + T::FRAC_PI_2(),
        frequency: wave.frequency,
    })
}

/// Maximum achievable average power for a wave: `A^2 h_ex^2 / (8 h_r)`.
///
/// Independent of wave frequency and phase.
pub fn optimal_average_power<T: Scalar>(wave: &WaveParams<T>, plant: &WecParams<T>) -> T {
    let ex = wave.amplitude * plant.excitation;
    ex * ex / (T::of(8.0) * plant.radiation_damping)
}

/// Buoy velocity under the optimal PTO profile.
///
/// The two response components collapse to a single sinusoid in phase with
/// the excitation force: `v*(t) = A h_ex / (2 h_r) * sin(w t + B + pi/2)`.
/// Equivalently `R sin(w t + atan2(h_r, m w - K/w) + B + pi/2 + lambda)` with
/// `R = A h_ex / (2 h_r)` and `lambda = -atan2(h_r, m w - K/w)`.
pub fn optimal_velocity<T: Scalar>(t: T, wave: &WaveParams<T>, plant: &WecParams<T>) -> Result<T> {
    check_frequency(wave.frequency)?;
    let r = wave.amplitude * plant.excitation / (T::of(2.0) * plant.radiation_damping);
    Ok(r * (wave.frequency * t + wave.phase + T::FRAC_PI_2()).sin())
}

/// Velocity amplitude under the optimal profile, `R = A h_ex / (2 h_r)`.
pub fn optimal_velocity_amplitude<T: Scalar>(wave: &WaveParams<T>, plant: &WecParams<T>) -> T {
    wave.amplitude * plant.excitation / (T::of(2.0) * plant.radiation_damping)
}
