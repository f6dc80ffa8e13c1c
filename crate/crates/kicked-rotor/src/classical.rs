//! Classical standard map and its sign-modulated variant: ensemble
//! evolution, Poincare sections, diffusion curves and transporting-island
//! diagnostics.
//!
//! One kick maps (L, theta) to
//!
//! ```text
//! L'     = L + sign * kappa * sin(theta)
//! theta' = (theta + L') mod 2*pi
//! ```
//!
//! and the modulated map replaces `sign` by f_M(n). The momentum is kept
//! twice: folded into [0, 2*pi) for phase-portrait work (the map commutes
//! with L -> L + 2*pi) and unwrapped for transport and energy measurements.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{modulation_sign, Sign};
use crate::real::{rf, Real};
use crate::state::EnergyRecord;

/// Folds into [0, 2*pi).
#[inline]
pub fn fold_angle<T: Real>(x: T) -> T {
    let tau = T::TAU();
    let mut r = x % tau;
    if r < T::zero() {
        r = r + tau;
    }
    // x % tau can round up to tau itself for tiny negative x.
    if r >= tau {
        T::zero()
    } else {
        r
    }
}

#[inline]
fn step_point<T: Real>(theta: &mut T, l_folded: &mut T, l_unwrapped: &mut T, kick: T) {
    let delta = kick * theta.sin();
    *l_unwrapped = *l_unwrapped + delta;
    *l_folded = fold_angle(*l_folded + delta);
    *theta = fold_angle(*theta + *l_folded);
}

/// Ensemble of classical phase-space points.
#[derive(Clone, Debug)]
pub struct ClassicalEnsemble<T> {
    theta: Vec<T>,
    l_folded: Vec<T>,
    l_unwrapped: Vec<T>,
    kick_index: u64,
}

impl<T: Real> ClassicalEnsemble<T> {
    /// Builds an ensemble from explicit (L, theta) points.
    pub fn from_points(points: &[(T, T)]) -> Self {
        let mut ensemble = ClassicalEnsemble {
            theta: Vec::with_capacity(points.len()),
            l_folded: Vec::with_capacity(points.len()),
            l_unwrapped: Vec::with_capacity(points.len()),
            kick_index: 0,
        };
        for &(l, theta) in points {
            ensemble.theta.push(fold_angle(theta));
            ensemble.l_folded.push(fold_angle(l));
            ensemble.l_unwrapped.push(l);
        }
        ensemble
    }

    /// `n` points with uniformly random theta and fixed momentum `l0`
    /// (the classical counterpart of starting in a single momentum state).
    pub fn uniform_theta(n: usize, l0: T, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<(T, T)> = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                (l0, rf::<T>(u) * T::TAU())
            })
            .collect();
        Self::from_points(&points)
    }

    /// `n` points uniform over a disk around `(l_center, theta_center)`;
    /// the seeding used for island-drift measurements.
    pub fn disk(center: (T, T), radius: T, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<(T, T)> = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let v: f64 = rng.random();
                let r = radius * rf::<T>(u.sqrt());
                let phi = rf::<T>(v) * T::TAU();
                (center.0 + r * phi.cos(), center.1 + r * phi.sin())
            })
            .collect();
        Self::from_points(&points)
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn kick_index(&self) -> u64 {
        self.kick_index
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    /// Folded momenta, in [0, 2*pi).
    pub fn l_folded(&self) -> &[T] {
        &self.l_folded
    }

    /// True (unwrapped) momenta.
    pub fn l_unwrapped(&self) -> &[T] {
        &self.l_unwrapped
    }

    /// One step of the standard map with an explicit kick sign.
    pub fn std_map_step(&mut self, kappa: T, sign: Sign) {
        let kick = sign.factor::<T>() * kappa;
        let theta = &mut self.theta;
        let lf = &mut self.l_folded;
        let lu = &mut self.l_unwrapped;
        theta
            .par_iter_mut()
            .zip(lf.par_iter_mut())
            .zip(lu.par_iter_mut())
            .for_each(|((t, f), u)| step_point(t, f, u, kick));
        self.kick_index += 1;
    }

    /// `n_kicks` steps of the sign-modulated map with period `m_period`.
    /// The modulation is tied to the absolute kick counter, so evolution may
    /// be split into several calls.
    pub fn mkr_map_evolve(&mut self, kappa: T, m_period: u32, n_kicks: u64) {
        let start = self.kick_index;
        let theta = &mut self.theta;
        let lf = &mut self.l_folded;
        let lu = &mut self.l_unwrapped;
        theta
            .par_iter_mut()
            .zip(lf.par_iter_mut())
            .zip(lu.par_iter_mut())
            .for_each(|((t, f), u)| {
                for n in start..start + n_kicks {
                    let kick = modulation_sign(m_period, n).factor::<T>() * kappa;
                    step_point(t, f, u, kick);
                }
            });
        self.kick_index += n_kicks;
    }

    /// Plain standard-map evolution (constant kick sign).
    pub fn kr_map_evolve(&mut self, kappa: T, n_kicks: u64) {
        let theta = &mut self.theta;
        let lf = &mut self.l_folded;
        let lu = &mut self.l_unwrapped;
        theta
            .par_iter_mut()
            .zip(lf.par_iter_mut())
            .zip(lu.par_iter_mut())
            .for_each(|((t, f), u)| {
                for _ in 0..n_kicks {
                    step_point(t, f, u, kappa);
                }
            });
        self.kick_index += n_kicks;
    }

    /// Mean scaled energy <L^2>/2 over the unwrapped momenta.
    pub fn mean_energy(&self) -> T {
        assert!(!self.is_empty(), "mean energy of an empty ensemble");
        let sum: T = self.l_unwrapped.iter().map(|&l| l * l).sum();
        sum / rf::<T>(2.0 * self.len() as f64)
    }
}

/// Evolves the ensemble under the modulated map, recording the mean energy
/// every `record_every` kicks (plus the initial and final kick counts).
pub fn diffusion_curve<T: Real>(
    ensemble: &mut ClassicalEnsemble<T>,
    kappa: T,
    m_period: u32,
    n_kicks: u64,
    record_every: u64,
) -> Vec<EnergyRecord<T>> {
    let record_every = record_every.max(1);
    let start = ensemble.kick_index;
    let offsets: Vec<u64> = {
        let mut v: Vec<u64> = (0..=n_kicks).step_by(record_every as usize).collect();
        if v.last() != Some(&n_kicks) {
            v.push(n_kicks);
        }
        v
    };

    // Per-point sampling keeps the reduction order independent of how rayon
    // partitions the ensemble.
    let samples: Vec<Vec<T>> = ensemble
        .theta
        .par_iter_mut()
        .zip(ensemble.l_folded.par_iter_mut())
        .zip(ensemble.l_unwrapped.par_iter_mut())
        .map(|((t, f), u)| {
            let mut row = Vec::with_capacity(offsets.len());
            let mut cursor = 0usize;
            for n in 0..=n_kicks {
                if cursor < offsets.len() && offsets[cursor] == n {
                    row.push(*u * *u);
                    cursor += 1;
                }
                if n < n_kicks {
                    let kick = modulation_sign(m_period, start + n).factor::<T>() * kappa;
                    step_point(t, f, u, kick);
                }
            }
            row
        })
        .collect();

    ensemble.kick_index += n_kicks;
    let norm = rf::<T>(2.0 * ensemble.len() as f64);
    offsets
        .iter()
        .enumerate()
        .map(|(r, &offset)| {
            let sum: T = samples.iter().map(|row| row[r]).sum();
            EnergyRecord { kick_index: start + offset, e_tilde: sum / norm }
        })
        .collect()
}

/// Rectangular phase-space window for section plots.
#[derive(Clone, Copy, Debug)]
pub struct PhaseWindow<T> {
    pub theta: (T, T),
    pub l: (T, T),
}

impl<T: Real> PhaseWindow<T> {
    pub fn contains(&self, theta: T, l: T) -> bool {
        theta >= self.theta.0 && theta <= self.theta.1 && l >= self.l.0 && l <= self.l.1
    }
}

/// Accumulates post-step (theta, L mod 2*pi) points of the modulated map,
/// optionally filtered to a window of the 2*pi x 2*pi cell.
pub fn poincare_section<T: Real>(
    kappa: T,
    m_period: u32,
    seeds: &[(T, T)],
    n_kicks: u64,
    window: Option<PhaseWindow<T>>,
) -> Vec<(T, T)> {
    let per_seed: Vec<Vec<(T, T)>> = seeds
        .par_iter()
        .map(|&(l, theta)| {
            let mut t = fold_angle(theta);
            let mut f = fold_angle(l);
            let mut u = l;
            let mut points = Vec::with_capacity(n_kicks as usize);
            for n in 0..n_kicks {
                let kick = modulation_sign(m_period, n).factor::<T>() * kappa;
                step_point(&mut t, &mut f, &mut u, kick);
                if window.map_or(true, |w| w.contains(t, f)) {
                    points.push((t, f));
                }
            }
            points
        })
        .collect();
    per_seed.into_iter().flatten().collect()
}

/// Result of probing a single seed for transporting behavior.
#[derive(Clone, Copy, Debug)]
pub struct IslandReport<T> {
    /// Net momentum gain per kick over the probe run.
    pub drift_per_kick: T,
    /// Fraction of the theta circle visited (coarse 128-bin histogram).
    pub theta_coverage: T,
    /// Drifting and angularly confined.
    pub is_transporting: bool,
}

/// Minimum drift per kick for a trajectory to count as transporting.
pub const TRANSPORT_DRIFT_THRESHOLD: f64 = 0.5;

/// Maximum theta coverage for a trajectory to count as island-confined.
pub const TRANSPORT_COVERAGE_THRESHOLD: f64 = 0.25;

/// Evolves one seed and classifies it as transporting or not: transporting
/// trajectories gain momentum at a steady rate while their folded orbit
/// stays confined to a small part of the theta circle.
pub fn detect_transporting_island<T: Real>(
    kappa: T,
    m_period: u32,
    seed: (T, T),
    n_kicks: u64,
) -> Result<IslandReport<T>> {
    if n_kicks < 100 {
        return Err(Error::InvalidParams(format!(
            "island detection needs at least 100 kicks, got {n_kicks}"
        )));
    }
    const BINS: usize = 128;
    let mut occupied = [false; BINS];
    let (l0, theta0) = seed;
    let mut t = fold_angle(theta0);
    let mut f = fold_angle(l0);
    let mut u = l0;
    for n in 0..n_kicks {
        let kick = modulation_sign(m_period, n).factor::<T>() * kappa;
        step_point(&mut t, &mut f, &mut u, kick);
        let bin = (t / T::TAU() * rf::<T>(BINS as f64))
            .to_f64()
            .unwrap_or(0.0) as usize;
        occupied[bin.min(BINS - 1)] = true;
    }
    let coverage = occupied.iter().filter(|&&b| b).count() as f64 / BINS as f64;
    let drift = (u - l0) / rf::<T>(n_kicks as f64);
    Ok(IslandReport {
        drift_per_kick: drift,
        theta_coverage: rf(coverage),
        is_transporting: drift.abs() > rf(TRANSPORT_DRIFT_THRESHOLD)
            && coverage < TRANSPORT_COVERAGE_THRESHOLD,
    })
}
