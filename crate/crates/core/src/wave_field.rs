//! Ocean elevation signals: piecewise-scheduled regular waves and
//! multi-harmonic irregular spectra.
//!
//! Schedule segments are evaluated in absolute time with no phase blending:
//! a segment switch is a hard discontinuity, which is what the estimator is
//! expected to detect and re-converge from.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::energy_model::WaveParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One piece of a time-varying wave schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveSegment<T> {
    /// Absolute time this segment becomes active, s.
    pub start_time: T,
    pub wave: WaveParams<T>,
}

/// A piecewise-constant sequence of regular waves, strictly increasing in
/// start time.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSchedule<T> {
    segments: Vec<WaveSegment<T>>,
}

impl<T: Scalar> WaveSchedule<T> {
    pub fn new(segments: Vec<WaveSegment<T>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptySchedule);
        }
        for seg in &segments {
            seg.wave.validate()?;
            if !(seg.start_time >= T::zero()) {
                return Err(Error::InvalidParameter {
                    name: "segment start_time",
                    value: seg.start_time.to_f64_lossy(),
                    reason: "must be non-negative",
                });
            }
        }
        for pair in segments.windows(2) {
            if !(pair[1].start_time > pair[0].start_time) {
                return Err(Error::InvalidParameter {
                    name: "segment start_time",
                    value: pair[1].start_time.to_f64_lossy(),
                    reason: "segments must be strictly increasing in start time",
                });
            }
        }
        Ok(Self { segments })
    }

    /// A schedule with a single regular wave active from t = 0.
    pub fn constant(wave: WaveParams<T>) -> Result<Self> {
        Self::new(vec![WaveSegment {
            start_time: T::zero(),
            wave,
        }])
    }

    pub fn segments(&self) -> &[WaveSegment<T>] {
        &self.segments
    }

    /// The segment active at time `t`.
    pub fn active(&self, t: T) -> Result<&WaveSegment<T>> {
        let first = self.segments[0].start_time;
        if t < first {
            return Err(Error::TimeBeforeSchedule {
                t: t.to_f64_lossy(),
                start: first.to_f64_lossy(),
            });
        }
        let idx = self
            .segments
            .iter()
            .rposition(|seg| seg.start_time <= t)
            .expect("t >= first start_time");
        Ok(&self.segments[idx])
    }

    /// Elevation at absolute time `t` from the active segment.
    pub fn elevation(&self, t: T) -> Result<T> {
        Ok(self.active(t)?.wave.elevation(t))
    }
}

/// An irregular sea as a superposition of harmonic components.
#[derive(Debug, Clone, PartialEq)]
pub struct IrregularSpec<T> {
    components: Vec<WaveParams<T>>,
}

impl<T: Scalar> IrregularSpec<T> {
    pub fn new(components: Vec<WaveParams<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        for c in &components {
            c.validate()?;
        }
        Ok(Self { components })
    }

    /// A seeded synthetic spectrum: the given dominant component plus
    /// `n_secondary` harmonics with amplitudes up to 40% of the dominant,
    /// frequencies uniform in [0.2 pi, 0.6 pi] and phases uniform in [0, 2 pi).
    pub fn synthesize(dominant: WaveParams<T>, n_secondary: usize, seed: u64) -> Result<Self> {
        dominant.validate()?;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut components = vec![dominant];
        let pi = T::PI();
        for _ in 0..n_secondary {
            let amplitude = dominant.amplitude * T::of(0.4) * T::unit_uniform(&mut rng);
            let frequency = T::range_uniform(&mut rng, T::of(0.2) * pi, T::of(0.6) * pi);
            let phase = T::range_uniform(&mut rng, T::zero(), T::of(2.0) * pi);
            components.push(WaveParams::new(amplitude, phase, frequency));
        }
        Self::new(components)
    }

    pub fn components(&self) -> &[WaveParams<T>] {
        &self.components
    }

    /// Superposed elevation at time `t`.
    pub fn elevation(&self, t: T) -> T {
        self.components.iter().map(|c| c.elevation(t)).sum()
    }

    /// The component with the largest amplitude; ties broken by lowest
    /// frequency.
    pub fn dominant_component(&self) -> WaveParams<T> {
        *self
            .components
            .iter()
            .reduce(|best, c| {
                if c.amplitude > best.amplitude
                    || (c.amplitude == best.amplitude && c.frequency < best.frequency)
                {
                    c
                } else {
                    best
                }
            })
            .expect("spectrum is non-empty")
    }
}

/// Any elevation source the harness can drive the plant with.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveField<T> {
    Schedule(WaveSchedule<T>),
    Irregular(IrregularSpec<T>),
    /// Flat water: zero elevation everywhere.
    Still,
}

impl<T: Scalar> WaveField<T> {
    pub fn elevation(&self, t: T) -> Result<T> {
        match self {
            WaveField::Schedule(s) => s.elevation(t),
            WaveField::Irregular(s) => Ok(s.elevation(t)),
            WaveField::Still => Ok(T::zero()),
        }
    }

    /// The single-harmonic wave an estimator should identify at time `t`:
    /// the active segment for schedules, the dominant component for spectra.
    pub fn reference_wave(&self, t: T) -> Result<Option<WaveParams<T>>> {
        match self {
            WaveField::Schedule(s) => Ok(Some(s.active(t)?.wave)),
            WaveField::Irregular(s) => Ok(Some(s.dominant_component())),
            WaveField::Still => Ok(None),
        }
    }

    /// Sum of active component amplitudes at `t` (bound on |elevation|).
    pub fn amplitude_budget(&self, t: T) -> Result<T> {
        match self {
            WaveField::Schedule(s) => Ok(s.active(t)?.wave.amplitude),
            WaveField::Irregular(s) => Ok(s.components.iter().map(|c| c.amplitude).sum()),
            WaveField::Still => Ok(T::zero()),
        }
    }
}
