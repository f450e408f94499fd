//! Recursive Bayesian estimation of the wave parameters with a constrained
//! particle filter.
//!
//! Particles are static hypotheses (identity transition); diversity after
//! resampling comes from per-dimension Gaussian roughening reflected back
//! into the constraint region. Likelihood exponents are shifted by their
//! minimum before exponentiation, so the reweight stays exact even when a
//! regime change makes every particle wildly inconsistent with the data —
//! the filter then re-converges through resample/roughen cycles instead of
//! stalling on underflowed weights.
//!
//! The phase dimension is an angle: nominal estimates use the circular mean
//! and spreads are computed on wrapped deviations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::energy_model::{average_power, PtoProfile, WaveParams, WecParams, MIN_FREQUENCY};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::wec_plant::{MeasurementWindows, WindowedPower};

/// Per-dimension box constraints on (amplitude, phase, frequency).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRegion<T> {
    pub amplitude: (T, T),
    pub phase: (T, T),
    pub frequency: (T, T),
}

impl<T: Scalar> ConstraintRegion<T> {
    pub fn new(amplitude: (T, T), phase: (T, T), frequency: (T, T)) -> Result<Self> {
        for (name, (lo, hi)) in [
            ("amplitude bounds", amplitude),
            ("phase bounds", phase),
            ("frequency bounds", frequency),
        ] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: lo.to_f64_lossy(),
                    reason: "lower bound must be finite and below upper bound",
                });
            }
        }
        if amplitude.0 < T::zero() {
            return Err(Error::InvalidParameter {
                name: "amplitude bounds",
                value: amplitude.0.to_f64_lossy(),
                reason: "amplitudes are non-negative",
            });
        }
        if frequency.0 < T::of(MIN_FREQUENCY) {
            return Err(Error::InvalidParameter {
                name: "frequency bounds",
                value: frequency.0.to_f64_lossy(),
                reason: "frequency lower bound must respect the model floor",
            });
        }
        Ok(Self {
            amplitude,
            phase,
            frequency,
        })
    }

    pub fn contains(&self, p: &WaveParams<T>) -> bool {
        let inside = |v: T, (lo, hi): (T, T)| v >= lo && v <= hi;
        inside(p.amplitude, self.amplitude)
            && inside(p.phase, self.phase)
            && inside(p.frequency, self.frequency)
    }

    pub fn widths(&self) -> [T; 3] {
        [
            self.amplitude.1 - self.amplitude.0,
            self.phase.1 - self.phase.0,
            self.frequency.1 - self.frequency.0,
        ]
    }
}

/// Reflects `x` into `[lo, hi]` by folding at the boundaries.
fn reflect<T: Scalar>(mut x: T, lo: T, hi: T) -> T {
    for _ in 0..64 {
        if x < lo {
            x = lo + (lo - x);
        } else if x > hi {
            x = hi - (x - hi);
        } else {
            return x;
        }
    }
    // pathological excursion, many widths out: give up and clamp
    x.max(lo).min(hi)
}

/// Measurement-noise model used for likelihood evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SigmaModel<T> {
    /// Fixed std in watts.
    Absolute(T),
    /// Std proportional to the predicted power, with a floor in watts.
    Relative { fraction: T, floor: T },
}

impl<T: Scalar> SigmaModel<T> {
    pub fn sigma(&self, predicted: T) -> T {
        match *self {
            SigmaModel::Absolute(s) => s,
            SigmaModel::Relative { fraction, floor } => (fraction * predicted.abs()).max(floor),
        }
    }
}

/// Particle filter tuning parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig<T> {
    /// Particle count N drawn at initialization.
    pub n_particles: usize,
    /// Resample when the effective sample size drops below this count.
    pub ess_threshold: T,
    /// Post-resampling jitter std per dimension (amplitude, phase, frequency).
    pub roughening: [T; 3],
    /// Likelihood std model.
    pub sigma_model: SigmaModel<T>,
}

impl<T: Scalar> EstimatorConfig<T> {
    /// Standard tuning: threshold N/2, jitter 0.5% of each constraint width,
    /// likelihood std of 5% of predicted power floored at 1 mW.
    pub fn standard(n_particles: usize, region: &ConstraintRegion<T>) -> Self {
        let w = region.widths();
        let half_pct = T::of(0.005);
        Self {
            n_particles,
            ess_threshold: T::of(n_particles as f64 / 2.0),
            roughening: [w[0] * half_pct, w[1] * half_pct, w[2] * half_pct],
            sigma_model: SigmaModel::Relative {
                fraction: T::of(0.05),
                floor: T::of(1e-3),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::InvalidParameter {
                name: "n_particles",
                value: 0.0,
                reason: "must be positive",
            });
        }
        let n = T::of(self.n_particles as f64);
        if !(self.ess_threshold > T::zero() && self.ess_threshold <= n) {
            return Err(Error::InvalidParameter {
                name: "ess_threshold",
                value: self.ess_threshold.to_f64_lossy(),
                reason: "must be in (0, N]",
            });
        }
        for s in self.roughening {
            if !(s >= T::zero()) {
                return Err(Error::InvalidParameter {
                    name: "roughening",
                    value: s.to_f64_lossy(),
                    reason: "jitter std must be non-negative",
                });
            }
        }
        Ok(())
    }
}

/// What one Bayesian update did, for diagnostics and traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateDiagnostics<T> {
    /// Effective sample size before any resampling.
    pub ess: T,
    pub resampled: bool,
    /// True when constraint rejection zeroed every particle and the prior
    /// weights were kept.
    pub underflow: bool,
}

/// Weighted particle approximation of the wave-parameter posterior.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble<T> {
    particles: Vec<WaveParams<T>>,
    weights: Vec<T>,
    rng: ChaCha12Rng,
    underflow_events: u64,
}

impl<T: Scalar> ParticleEnsemble<T> {
    /// Draws N particles from a normal prior, rejecting draws outside the
    /// constraint region. Errors if the prior mean is outside the region or
    /// if acceptance is so poor that rejection would stall (< 1% of draws).
    pub fn init(
        prior_mean: &WaveParams<T>,
        prior_std: &[T; 3],
        config: &EstimatorConfig<T>,
        region: &ConstraintRegion<T>,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if !region.contains(prior_mean) {
            return Err(Error::PriorOutsideConstraints);
        }
        let n = config.n_particles;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut particles = Vec::with_capacity(n);
        let max_attempts = n.saturating_mul(100);
        let mut attempts = 0;
        while particles.len() < n && attempts < max_attempts {
            attempts += 1;
            let candidate = WaveParams::new(
                prior_mean.amplitude + prior_std[0] * T::standard_normal(&mut rng),
                prior_mean.phase + prior_std[1] * T::standard_normal(&mut rng),
                prior_mean.frequency + prior_std[2] * T::standard_normal(&mut rng),
            );
            if region.contains(&candidate) {
                particles.push(candidate);
            }
        }
        if particles.len() < n {
            return Err(Error::PriorMassTooLow {
                accepted: particles.len(),
                requested: n,
                attempts,
            });
        }
        let weights = vec![T::one() / T::of(n as f64); n];
        Ok(Self {
            particles,
            weights,
            rng,
            underflow_events: 0,
        })
    }

    /// Builds an ensemble from explicit particles and (unnormalized) weights.
    /// Intended for tests and small hand-checked instances; particles are not
    /// checked against any constraint region.
    pub fn from_parts(particles: Vec<WaveParams<T>>, weights: Vec<T>, seed: u64) -> Result<Self> {
        if particles.is_empty() || particles.len() != weights.len() {
            return Err(Error::InvalidParameter {
                name: "particles",
                value: particles.len() as f64,
                reason: "need matching, non-empty particle and weight vectors",
            });
        }
        let sum: T = neumaier_sum(&weights);
        if !(sum > T::zero()) || weights.iter().any(|w| *w < T::zero()) {
            return Err(Error::InvalidParameter {
                name: "weights",
                value: sum.to_f64_lossy(),
                reason: "weights must be non-negative with positive sum",
            });
        }
        let weights = weights.iter().map(|w| *w / sum).collect();
        Ok(Self {
            particles,
            weights,
            rng: ChaCha12Rng::seed_from_u64(seed),
            underflow_events: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[WaveParams<T>] {
        &self.particles
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// How many updates fell back to prior weights because constraint
    /// rejection removed every particle.
    pub fn underflow_events(&self) -> u64 {
        self.underflow_events
    }

    /// Effective sample size `1 / sum(w^2)`.
    pub fn ess(&self) -> T {
        let sq: T = self.weights.iter().map(|w| *w * *w).sum();
        T::one() / sq
    }

    /// Posterior mean; the phase dimension uses the circular mean.
    pub fn nominal_estimate(&self) -> WaveParams<T> {
        let mut amp = T::zero();
        let mut freq = T::zero();
        let mut sin_sum = T::zero();
        let mut cos_sum = T::zero();
        for (p, w) in self.particles.iter().zip(&self.weights) {
            amp = amp + *w * p.amplitude;
            freq = freq + *w * p.frequency;
            sin_sum = sin_sum + *w * p.phase.sin();
            cos_sum = cos_sum + *w * p.phase.cos();
        }
        WaveParams::new(amp, sin_sum.atan2(cos_sum), freq)
    }

    /// Posterior spread per dimension; the phase spread is computed on
    /// deviations wrapped to (-pi, pi] around the circular mean.
    pub fn posterior_std(&self) -> [T; 3] {
        let mean = self.nominal_estimate();
        let mut va = T::zero();
        let mut vb = T::zero();
        let mut vf = T::zero();
        for (p, w) in self.particles.iter().zip(&self.weights) {
            let da = p.amplitude - mean.amplitude;
            let db = wrap_angle(p.phase - mean.phase);
            let df = p.frequency - mean.frequency;
            va = va + *w * da * da;
            vb = vb + *w * db * db;
            vf = vf + *w * df * df;
        }
        [va.sqrt(), vb.sqrt(), vf.sqrt()]
    }

    /// Predicted average power per particle for an applied profile.
    pub fn predicted_powers(
        &self,
        profile: &PtoProfile<T>,
        window: T,
        plant: &WecParams<T>,
    ) -> Result<Vec<T>> {
        self.particles
            .iter()
            .map(|p| average_power(profile, p, plant, window))
            .collect()
    }

    /// One Bayesian update from a measured windowed average power.
    ///
    /// Per particle, the power the applied profile would have produced is
    /// predicted from the closed-form model and the weight is multiplied by
    /// the Gaussian likelihood of the measurement; particles outside the
    /// constraint region get zero weight. If the effective sample size then
    /// falls below the configured threshold, the ensemble is systematically
    /// resampled and roughened back into the region.
    pub fn update(
        &mut self,
        measured: T,
        profile: &PtoProfile<T>,
        window: T,
        plant: &WecParams<T>,
        config: &EstimatorConfig<T>,
        region: &ConstraintRegion<T>,
    ) -> Result<UpdateDiagnostics<T>> {
        let preds = self.predicted_powers(profile, window, plant)?;

        // Gaussian exponents, shifted by their minimum before exponentiation.
        let mut exponents = Vec::with_capacity(self.len());
        let mut min_exp = T::infinity();
        for (i, p) in self.particles.iter().enumerate() {
            if region.contains(p) && self.weights[i] > T::zero() {
                let sigma = config.sigma_model.sigma(preds[i]);
                let d = (measured - preds[i]) / sigma;
                let z = T::of(0.5) * d * d;
                if z < min_exp {
                    min_exp = z;
                }
                exponents.push(z);
            } else {
                exponents.push(T::infinity());
            }
        }

        let mut underflow = false;
        if min_exp.is_finite() {
            for i in 0..self.len() {
                let z = exponents[i];
                self.weights[i] = if z.is_finite() {
                    let sigma = config.sigma_model.sigma(preds[i]);
                    self.weights[i] * (-(z - min_exp)).exp() / sigma
                } else {
                    T::zero()
                };
            }
            let sum = neumaier_sum(&self.weights);
            debug_assert!(sum > T::zero());
            for w in &mut self.weights {
                *w = *w / sum;
            }
        } else {
            // every particle rejected: keep the prior weights for this update
            self.underflow_events += 1;
            underflow = true;
        }

        let ess = self.ess();
        let resampled = ess < config.ess_threshold;
        if resampled {
            self.systematic_resample();
            self.roughen(&config.roughening, region);
        }
        Ok(UpdateDiagnostics {
            ess,
            resampled,
            underflow,
        })
    }

    /// The three-window cascade: T1, then T2, then T, threading the posterior
    /// of each update into the next as its prior.
    pub fn cascade_update(
        &mut self,
        measurements: &WindowedPower<T>,
        profile: &PtoProfile<T>,
        windows: &MeasurementWindows<T>,
        plant: &WecParams<T>,
        config: &EstimatorConfig<T>,
        region: &ConstraintRegion<T>,
    ) -> Result<[UpdateDiagnostics<T>; 3]> {
        if !(T::zero() < windows.t1 && windows.t1 < windows.t2 && windows.t2 < windows.t) {
            return Err(Error::WindowOrdering {
                t1: windows.t1.to_f64_lossy(),
                t2: windows.t2.to_f64_lossy(),
                t: windows.t.to_f64_lossy(),
            });
        }
        Ok([
            self.update(measurements.t1, profile, windows.t1, plant, config, region)?,
            self.update(measurements.t2, profile, windows.t2, plant, config, region)?,
            self.update(measurements.t, profile, windows.t, plant, config, region)?,
        ])
    }

    /// Pure reweight by the likelihood of a given (synthetic) measurement:
    /// no resampling, no roughening, no constraint rejection, no mutation.
    pub fn reweighted(
        &self,
        measurement: T,
        profile: &PtoProfile<T>,
        window: T,
        plant: &WecParams<T>,
        config: &EstimatorConfig<T>,
    ) -> Result<Self> {
        let preds = self.predicted_powers(profile, window, plant)?;
        let mut out = self.clone();
        reweight_in_place(&mut out.weights, &preds, measurement, &config.sigma_model);
        Ok(out)
    }

    /// The planning-time hypothetical update: synthesizes the measurement the
    /// candidate profile would produce at the current nominal estimate, then
    /// reweights (without resampling) as [`Self::reweighted`] does.
    pub fn hypothetical_update(
        &self,
        candidate: &PtoProfile<T>,
        window: T,
        plant: &WecParams<T>,
        config: &EstimatorConfig<T>,
    ) -> Result<Self> {
        let synthetic = average_power(candidate, &self.nominal_estimate(), plant, window)?;
        self.reweighted(synthetic, candidate, window, plant, config)
    }

    /// Weighted sampling of `count` particles without replacement
    /// (exponential-keys method), returned with uniform weights in draw order.
    pub fn downsample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Self> {
        let indices = self.downsample_indices(count, rng)?;
        let particles = indices.iter().map(|&i| self.particles[i]).collect();
        let weights = vec![T::one() / T::of(count as f64); count];
        Ok(Self {
            particles,
            weights,
            rng: ChaCha12Rng::seed_from_u64(rng.next_u64()),
            underflow_events: 0,
        })
    }

    /// Indices of a weighted sample without replacement, in draw order.
    pub fn downsample_indices<R: Rng + ?Sized>(
        &self,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        if count == 0 || count > self.len() {
            return Err(Error::BadSubsampleSize {
                count,
                available: self.len(),
            });
        }
        Ok(weighted_indices_without_replacement(
            &self.weights,
            count,
            rng,
        ))
    }

    fn systematic_resample(&mut self) {
        let n = self.len();
        let n_t = T::of(n as f64);
        let step = T::one() / n_t;
        let mut u = T::unit_uniform(&mut self.rng) * step;
        let mut out = Vec::with_capacity(n);
        let mut cumulative = self.weights[0];
        let mut j = 0usize;
        for _ in 0..n {
            while u > cumulative && j + 1 < n {
                j += 1;
                cumulative = cumulative + self.weights[j];
            }
            out.push(self.particles[j]);
            u = u + step;
        }
        self.particles = out;
        let uniform = T::one() / n_t;
        for w in &mut self.weights {
            *w = uniform;
        }
    }

    fn roughen(&mut self, scales: &[T; 3], region: &ConstraintRegion<T>) {
        for p in &mut self.particles {
            p.amplitude = reflect(
                p.amplitude + scales[0] * T::standard_normal(&mut self.rng),
                region.amplitude.0,
                region.amplitude.1,
            );
            p.phase = reflect(
                p.phase + scales[1] * T::standard_normal(&mut self.rng),
                region.phase.0,
                region.phase.1,
            );
            p.frequency = reflect(
                p.frequency + scales[2] * T::standard_normal(&mut self.rng),
                region.frequency.0,
                region.frequency.1,
            );
        }
    }
}

/// Multiplies weights by the Gaussian likelihood of `measurement` given the
/// per-particle predictions, normalizing afterwards. Exponents are shifted
/// by their minimum so the result is exact for arbitrarily unlikely data.
pub(crate) fn reweight_in_place<T: Scalar>(
    weights: &mut [T],
    preds: &[T],
    measurement: T,
    sigma_model: &SigmaModel<T>,
) {
    let mut min_exp = T::infinity();
    for (i, w) in weights.iter().enumerate() {
        if *w > T::zero() {
            let sigma = sigma_model.sigma(preds[i]);
            let d = (measurement - preds[i]) / sigma;
            let z = T::of(0.5) * d * d;
            if z < min_exp {
                min_exp = z;
            }
        }
    }
    if !min_exp.is_finite() {
        return; // no live particles; leave weights untouched
    }
    for (i, w) in weights.iter_mut().enumerate() {
        if *w > T::zero() {
            let sigma = sigma_model.sigma(preds[i]);
            let d = (measurement - preds[i]) / sigma;
            let z = T::of(0.5) * d * d;
            *w = *w * (-(z - min_exp)).exp() / sigma;
        }
    }
    let sum = neumaier_sum(weights);
    if sum > T::zero() {
        for w in weights.iter_mut() {
            *w = *w / sum;
        }
    }
}

/// Weighted sampling without replacement via exponential keys: each live
/// particle gets key `E_i / w_i` with `E_i ~ Exp(1)` and the `count` smallest
/// keys win, in ascending key order.
pub(crate) fn weighted_indices_without_replacement<T: Scalar, R: Rng + ?Sized>(
    weights: &[T],
    count: usize,
    rng: &mut R,
) -> Vec<usize> {
    let n = weights.len();
    let mut keyed: Vec<(T, usize)> = Vec::with_capacity(n);
    for (i, w) in weights.iter().enumerate() {
        let u = T::unit_uniform(rng);
        let key = if *w > T::zero() {
            -(T::one() - u).ln() / *w
        } else {
            T::infinity()
        };
        keyed.push((key, i));
    }
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    keyed.truncate(count);
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Compensated (Neumaier) summation.
pub(crate) fn neumaier_sum<T: Scalar>(values: &[T]) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp = comp + (sum - t) + v;
        } else {
            comp = comp + (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn wrap_angle<T: Scalar>(mut a: T) -> T {
    let pi = T::PI();
    let two_pi = T::of(2.0) * pi;
    while a > pi {
        a = a - two_pi;
    }
    while a < -pi {
        a = a + two_pi;
    }
    a
}
