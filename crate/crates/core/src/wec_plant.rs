//! Time-domain ground truth for the point absorber.
//!
//! The plant `m v' + h_r v + K x = h_ex eta(t) + F_u(t)` is advanced with a
//! fixed-step classical Runge-Kutta integrator; elevation and force are
//! supplied as closures so stage evaluations land on the true sub-step times
//! (state feedback in the force closure sees the stage states as well).
//!
//! Heave and velocity limits are flagged, never enforced: the simulation has
//! no end-stop model and acceptance checks assert feasibility instead.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::energy_model::WecParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Heave state of the buoy at a simulation instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WecState<T> {
    /// Heave position, m.
    pub position: T,
    /// Heave velocity, m/s.
    pub velocity: T,
    /// Simulation time, s.
    pub time: T,
}

impl<T: Scalar> WecState<T> {
    pub fn at_rest() -> Self {
        Self::default()
    }

    /// Mechanical energy `m v^2 / 2 + K x^2 / 2` stored in the oscillator.
    pub fn mechanical_energy(&self, plant: &WecParams<T>) -> T {
        let half = T::of(0.5);
        half * plant.mass * self.velocity * self.velocity
            + half * plant.stiffness * self.position * self.position
    }

    /// Motion-limit flags `(|x| > x_max, |v| > v_max)`.
    pub fn limit_violations(&self, plant: &WecParams<T>) -> (bool, bool) {
        (
            self.position.abs() > plant.heave_limit,
            self.velocity.abs() > plant.velocity_limit,
        )
    }
}

/// One classical fourth-order Runge-Kutta step of length `dt`.
///
/// `elevation` maps time to eta(t); `force` maps `(t, position, velocity)` to
/// the applied PTO force and is expected to already include any saturation.
pub fn step<T, E, F>(
    plant: &WecParams<T>,
    state: WecState<T>,
    elevation: E,
    force: F,
    dt: T,
) -> Result<WecState<T>>
where
    T: Scalar,
    E: Fn(T) -> T,
    F: Fn(T, T, T) -> T,
{
    if !(dt > T::zero()) {
        return Err(Error::NonPositiveDuration {
            value: dt.to_f64_lossy(),
        });
    }
    let accel = |t: T, x: T, v: T| -> T {
        (plant.excitation * elevation(t) + force(t, x, v)
            - plant.radiation_damping * v
            - plant.stiffness * x)
            / plant.mass
    };

    let (x0, v0, t0) = (state.position, state.velocity, state.time);
    let half = T::of(0.5);
    let th = t0 + half * dt;

    let k1x = v0;
    let k1v = accel(t0, x0, v0);
    let k2x = v0 + half * dt * k1v;
    let k2v = accel(th, x0 + half * dt * k1x, v0 + half * dt * k1v);
    let k3x = v0 + half * dt * k2v;
    let k3v = accel(th, x0 + half * dt * k2x, v0 + half * dt * k2v);
    let k4x = v0 + dt * k3v;
    let k4v = accel(t0 + dt, x0 + dt * k3x, v0 + dt * k3v);

    let sixth = T::of(1.0 / 6.0);
    let two = T::of(2.0);
    let next = WecState {
        position: x0 + dt * sixth * (k1x + two * k2x + two * k3x + k4x),
        velocity: v0 + dt * sixth * (k1v + two * k2v + two * k3v + k4v),
        time: t0 + dt,
    };
    if !(next.position.is_finite() && next.velocity.is_finite()) {
        return Err(Error::NonFiniteState {
            t: next.time.to_f64_lossy(),
        });
    }
    Ok(next)
}

/// Power extracted by the PTO: `P = -F_u * v`.
pub fn instantaneous_power<T: Scalar>(state: &WecState<T>, force: T) -> T {
    -force * state.velocity
}

/// Measurement window lengths and the sensor noise level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementWindows<T> {
    /// Shortest averaging window T1, s.
    pub t1: T,
    /// Middle averaging window T2, s.
    pub t2: T,
    /// Controller decision window T, s.
    pub t: T,
    /// Noise std as a fraction of the clean windowed value.
    pub noise_fraction: T,
}

impl<T: Scalar> MeasurementWindows<T> {
    /// Checks 0 < T1 < T2 < T, a sane noise fraction, and that T is an
    /// integer multiple of the plant step.
    pub fn validate(&self, dt: T) -> Result<()> {
        if !(T::zero() < self.t1 && self.t1 < self.t2 && self.t2 < self.t) {
            return Err(Error::WindowOrdering {
                t1: self.t1.to_f64_lossy(),
                t2: self.t2.to_f64_lossy(),
                t: self.t.to_f64_lossy(),
            });
        }
        if !(self.noise_fraction >= T::zero()) {
            return Err(Error::InvalidParameter {
                name: "noise_fraction",
                value: self.noise_fraction.to_f64_lossy(),
                reason: "must be non-negative",
            });
        }
        let steps = self.t / dt;
        if (steps - steps.round()).abs() > T::of(1e-6) {
            return Err(Error::InvalidParameter {
                name: "window T",
                value: self.t.to_f64_lossy(),
                reason: "must be an integer multiple of the plant step",
            });
        }
        Ok(())
    }

    pub fn samples(&self, dt: T) -> (usize, usize, usize) {
        let n = |w: T| (w / dt).round().to_f64_lossy() as usize;
        (n(self.t1), n(self.t2), n(self.t))
    }
}

/// Trailing average powers over the three windows, after sensor noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowedPower<T> {
    pub t1: T,
    pub t2: T,
    pub t: T,
}

/// Ring buffer of instantaneous power samples covering the last T seconds.
#[derive(Debug, Clone)]
pub struct PowerTrace<T> {
    samples: Vec<T>,
    capacity: usize,
    head: usize,
    filled: usize,
}

impl<T: Scalar> PowerTrace<T> {
    /// A trace able to hold `capacity` plant steps.
    pub fn new(capacity: usize) -> Self {
        Self {
            samples: vec![T::zero(); capacity],
            capacity,
            head: 0,
            filled: 0,
        }
    }

    pub fn push(&mut self, power: T) {
        self.samples[self.head] = power;
        self.head = (self.head + 1) % self.capacity;
        self.filled = (self.filled + 1).min(self.capacity);
    }

    pub fn len(&self) -> usize {
        self.filled
    }

    pub fn is_empty(&self) -> bool {
        self.filled == 0
    }

    /// Mean of the most recent `count` samples.
    pub fn trailing_mean(&self, count: usize) -> Result<T> {
        if count == 0 || count > self.filled {
            return Err(Error::TraceTooShort {
                have: self.filled,
                need: count.max(1),
            });
        }
        let mut sum = T::zero();
        let mut idx = (self.head + self.capacity - count) % self.capacity;
        for _ in 0..count {
            sum = sum + self.samples[idx];
            idx += 1;
            if idx == self.capacity {
                idx = 0;
            }
        }
        Ok(sum / T::of(count as f64))
    }

    /// Noisy trailing means over the three windows.
    ///
    /// Each clean mean is corrupted by zero-mean Gaussian noise with std
    /// `noise_fraction * |clean|`; the three draws are independent and
    /// consumed in (T1, T2, T) order so a seeded stream reproduces exactly.
    pub fn windowed<R: Rng + ?Sized>(
        &self,
        windows: &MeasurementWindows<T>,
        dt: T,
        rng: &mut R,
    ) -> Result<WindowedPower<T>> {
        let (n1, n2, n) = windows.samples(dt);
        if n > self.filled {
            return Err(Error::TraceTooShort {
                have: self.filled,
                need: n,
            });
        }
        let mut noisy = |count: usize| -> Result<T> {
            let clean = self.trailing_mean(count)?;
            let sigma = windows.noise_fraction * clean.abs();
            Ok(clean + sigma * T::standard_normal(rng))
        };
        Ok(WindowedPower {
            t1: noisy(n1)?,
            t2: noisy(n2)?,
            t: noisy(n)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy_model::{response_components, PtoProfile, WaveParams};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::PI;

    fn plant() -> WecParams<f64> {
        WecParams {
            mass: 8.0e3,
            radiation_damping: 2.0e5,
            stiffness: 6.39e5,
            excitation: 2.0e4,
            force_limit: 2.1e4,
            heave_limit: 1.0,
            velocity_limit: 3.0,
        }
    }

    #[test]
    fn equilibrium_is_preserved() {
        let mut state = WecState::<f64>::at_rest();
        for _ in 0..1000 {
            state = step(&plant(), state, |_| 0.0, |_, _, _| 0.0, 0.01).unwrap();
        }
        assert_eq!(state.position, 0.0);
        assert_eq!(state.velocity, 0.0);
        assert_relative_eq!(state.time, 10.0, max_relative = 1e-9);
    }

    #[test]
    fn power_sign_convention() {
        let state = WecState {
            position: 0.0,
            velocity: 2.0,
            time: 0.0,
        };
        assert_eq!(instantaneous_power(&state, 0.0), 0.0);
        assert_eq!(instantaneous_power(&state, -1000.0), 2000.0);
        assert_eq!(instantaneous_power(&state, 1000.0), -2000.0);
    }

    /// Least-squares fit of `a sin(w t) + b cos(w t)` over sampled data;
    /// returns (amplitude, phase) of `A sin(w t + B)`.
    fn fit_sinusoid(ts: &[f64], ys: &[f64], freq: f64) -> (f64, f64) {
        let (mut ss, mut sc, mut cc, mut ys_, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&t, &y) in ts.iter().zip(ys) {
            let (s, c) = (freq * t).sin_cos();
            ss += s * s;
            sc += s * c;
            cc += c * c;
            ys_ += y * s;
            yc += y * c;
        }
        let det = ss * cc - sc * sc;
        let a = (ys_ * cc - yc * sc) / det;
        let b = (ss * yc - sc * ys_) / det;
        (a.hypot(b), b.atan2(a))
    }

    #[test]
    fn free_response_matches_closed_form_amplitude_and_phase() {
        let plant = plant();
        let wave = WaveParams::new(1.0, 0.0, 0.4 * PI);
        let profile = PtoProfile::new(0.0, 0.0, 1.0);
        let rc = response_components(&profile, &wave, &plant).unwrap();

        let dt = 0.01;
        let period = 2.0 * PI / wave.frequency;
        let mut state = WecState::at_rest();
        // settle for 10 wave periods
        while state.time < 10.0 * period {
            state = step(&plant, state, |t| wave.elevation(t), |_, _, _| 0.0, dt).unwrap();
        }
        let (mut ts, mut vs) = (Vec::new(), Vec::new());
        while state.time < 12.0 * period {
            ts.push(state.time);
            vs.push(state.velocity);
            state = step(&plant, state, |t| wave.elevation(t), |_, _, _| 0.0, dt).unwrap();
        }
        let (amp, phase) = fit_sinusoid(&ts, &vs, wave.frequency);
        assert_relative_eq!(amp, rc.a_wave, max_relative = 0.01);
        // compare phases on the circle
        let dphi = (phase - rc.b_wave).sin().atan2((phase - rc.b_wave).cos());
        assert!(dphi.abs() < 0.01, "phase mismatch: {dphi}");
    }

    #[test]
    fn fourth_order_convergence() {
        let plant = plant();
        let wave = WaveParams::new(1.0, 0.3, 0.4 * PI);
        let fu = |t: f64| 15_000.0 * (1.1 * t + 0.4).cos();
        let run = |dt: f64| -> WecState<f64> {
            let mut s = WecState::at_rest();
            let n = (100.0 / dt).round() as usize;
            for _ in 0..n {
                s = step(&plant, s, |t| wave.elevation(t), |t, _, _| fu(t), dt).unwrap();
            }
            s
        };
        let truth = run(0.00125);
        let err = |s: &WecState<f64>| {
            (s.position - truth.position).hypot(s.velocity - truth.velocity)
        };
        let e_coarse = err(&run(0.01));
        let e_fine = err(&run(0.005));
        let ratio = e_coarse / e_fine;
        assert!(
            (10.0..30.0).contains(&ratio),
            "expected ~16x error reduction, got {ratio} ({e_coarse} / {e_fine})"
        );
    }

    #[test]
    fn passive_decay_is_monotone() {
        let plant = plant();
        let mut state = WecState {
            position: 0.5,
            velocity: 1.0,
            time: 0.0,
        };
        let mut energy = state.mechanical_energy(&plant);
        for _ in 0..5000 {
            state = step(&plant, state, |_| 0.0, |_, _, _| 0.0, 0.01).unwrap();
            let e = state.mechanical_energy(&plant);
            assert!(e <= energy * (1.0 + 1e-12));
            energy = e;
        }
        assert!(energy < 1e-6);
    }

    #[test]
    fn limit_flags() {
        let plant = plant();
        let ok = WecState {
            position: 0.9,
            velocity: 2.9,
            time: 0.0,
        };
        assert_eq!(ok.limit_violations(&plant), (false, false));
        let bad = WecState {
            position: -1.2,
            velocity: 3.5,
            time: 0.0,
        };
        assert_eq!(bad.limit_violations(&plant), (true, true));
    }

    fn windows() -> MeasurementWindows<f64> {
        MeasurementWindows {
            t1: 20.0,
            t2: 30.0,
            t: 50.0,
            noise_fraction: 0.0,
        }
    }

    #[test]
    fn window_validation() {
        assert!(windows().validate(0.01).is_ok());
        let mut w = windows();
        w.t1 = 40.0;
        assert!(w.validate(0.01).is_err());
        let mut w = windows();
        w.t = 50.003;
        assert!(w.validate(0.01).is_err());
    }

    #[test]
    fn constant_power_means_are_exact() {
        let mut trace = PowerTrace::new(5000);
        for _ in 0..5000 {
            trace.push(100.0);
        }
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let m = trace.windowed(&windows(), 0.01, &mut rng).unwrap();
        assert_eq!((m.t1, m.t2, m.t), (100.0, 100.0, 100.0));
    }

    #[test]
    fn short_trace_is_an_error() {
        let mut trace = PowerTrace::new(5000);
        for _ in 0..4000 {
            trace.push(1.0);
        }
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert!(trace.windowed(&windows(), 0.01, &mut rng).is_err());
    }

    #[test]
    fn sinusoidal_trailing_mean_matches_integral() {
        // power P(t) = 40 + 25 sin(w t): trailing mean over [t-W, t] has the
        // closed form 40 + 25 (cos(w(t-W)) - cos(w t)) / (w W).
        let dt = 0.01;
        let freq = 1.3;
        let mut trace = PowerTrace::new(5000);
        let n_total = 9000;
        for k in 0..n_total {
            let t = k as f64 * dt;
            trace.push(40.0 + 25.0 * (freq * t).sin());
        }
        let t_end = (n_total - 1) as f64 * dt;
        for window in [20.0, 30.0, 50.0] {
            let n = (window / dt).round() as usize;
            let mean = trace.trailing_mean(n).unwrap();
            // samples cover [t_end - W + dt, t_end]; use midpoint-matched bounds
            let a = t_end - window + dt * 0.5;
            let b = t_end + dt * 0.5;
            let exact = 40.0 + 25.0 * ((freq * a).cos() - (freq * b).cos()) / (freq * window);
            assert_relative_eq!(mean, exact, epsilon = 25.0 * freq * dt * dt);
        }
    }

    #[test]
    fn noise_statistics_match_configuration() {
        let mut trace = PowerTrace::new(5000);
        for _ in 0..5000 {
            trace.push(100.0);
        }
        let mut w = windows();
        w.noise_fraction = 0.05;
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let n = 10_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let m = trace.windowed(&w, 0.01, &mut rng).unwrap();
            sum += m.t;
            sumsq += m.t * m.t;
        }
        let mean = sum / f64::from(n);
        let std = (sumsq / f64::from(n) - mean * mean).sqrt();
        assert_relative_eq!(mean, 100.0, max_relative = 0.005);
        assert_relative_eq!(std, 5.0, max_relative = 0.05);
    }

    #[test]
    fn seeded_measurements_are_bit_identical() {
        let mut trace = PowerTrace::new(100);
        for k in 0..100 {
            trace.push(k as f64);
        }
        let w = MeasurementWindows {
            t1: 0.2,
            t2: 0.3,
            t: 0.5,
            noise_fraction: 0.05,
        };
        let run = || {
            let mut rng = ChaCha12Rng::seed_from_u64(7);
            let mut out = Vec::new();
            for _ in 0..50 {
                let m = trace.windowed(&w, 0.01, &mut rng).unwrap();
                out.push((m.t1.to_bits(), m.t2.to_bits(), m.t.to_bits()));
            }
            out
        };
        assert_eq!(run(), run());
    }
}
