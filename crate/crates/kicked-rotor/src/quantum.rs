//! Split-operator propagation of the kicked rotor and its sign-modified
//! variants.
//!
//! One kick cycle is the kick phase `exp(-i*sign*k*cos(theta))` applied in
//! the angle representation, followed by the free phase `exp(i*tau*m^2/2)`
//! applied in the momentum representation. The angle grid has N = 2*m_max
//! uniform points on [0, 2*pi) and the momentum index set is
//! {-m_max, ..., m_max-1}, matching discrete-transform frequency ordering so
//! both transforms are plain power-of-two FFTs.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::params::{RotorParams, Sign, Variant};
use crate::real::{rf, Real};
use crate::state::{index_to_m, DistributionRecord, EnergyRecord, QuantumState};

/// Probability at either momentum-grid edge above which a propagation is
/// flagged as contaminated by basis truncation.
pub const EDGE_PROBABILITY_THRESHOLD: f64 = 1e-16;

/// Momentum quantum number carried by DFT-order index `j` on a grid of `n`
/// points: j for j < n/2, j - n otherwise.
#[inline]
fn dft_m(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Swaps the two halves of the buffer, converting between natural storage
/// order (index 0 <-> m = -m_max) and DFT frequency order. Self-inverse.
pub(crate) fn shift_halves<T>(buf: &mut [T]) {
    let half = buf.len() / 2;
    let (lo, hi) = buf.split_at_mut(half);
    lo.swap_with_slice(hi);
}

/// Cached FFT plans and phase tables for one (m_max, k, tau) combination.
///
/// The propagator itself is immutable and shareable across threads; each
/// worker owns a scratch buffer from [`SpectralPropagator::make_scratch`].
pub struct SpectralPropagator<T: Real> {
    m_max: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    /// exp(-i k cos theta_j) / N, angle order.
    kick_plus: Vec<Complex<T>>,
    /// exp(+i k cos theta_j) / N, angle order.
    kick_minus: Vec<Complex<T>>,
    /// exp(i tau m^2 / 2), DFT order.
    free: Vec<Complex<T>>,
    /// Free evolution over the delay time t_d: exp(i pi m^2), DFT order.
    delay: Vec<Complex<T>>,
    scratch_len: usize,
}

fn free_phase_table<T: Real>(tau: T, n: usize) -> Vec<Complex<T>> {
    let half = rf::<T>(0.5);
    (0..n)
        .map(|j| {
            let m = dft_m(j, n) as f64;
            Complex::cis(tau * rf::<T>(m * m) * half)
        })
        .collect()
}

impl<T: Real> SpectralPropagator<T> {
    pub fn new(m_max: usize, k: T, tau: T) -> Self {
        assert!(m_max >= 1, "m_max must be at least 1");
        let n = 2 * m_max;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());

        let inv_n = rf::<T>(1.0 / n as f64);
        let two_pi = T::TAU();
        let mut kick_plus = Vec::with_capacity(n);
        let mut kick_minus = Vec::with_capacity(n);
        for j in 0..n {
            let theta = two_pi * rf::<T>(j as f64) / rf::<T>(n as f64);
            let phase = k * theta.cos();
            // Fold the 1/N round-trip normalization into the kick tables.
            kick_plus.push(Complex::cis(-phase).scale(inv_n));
            kick_minus.push(Complex::cis(phase).scale(inv_n));
        }

        SpectralPropagator {
            m_max,
            fwd,
            inv,
            kick_plus,
            kick_minus,
            free: free_phase_table(tau, n),
            delay: free_phase_table(two_pi, n),
            scratch_len,
        }
    }

    pub fn from_params(m_max: usize, params: &RotorParams<T>) -> Self {
        Self::new(m_max, params.k, params.tau)
    }

    #[inline]
    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// Angle-grid size N = 2 * m_max.
    #[inline]
    pub fn n(&self) -> usize {
        2 * self.m_max
    }

    pub fn make_scratch(&self) -> Vec<Complex<T>> {
        vec![Complex::new(T::zero(), T::zero()); self.scratch_len]
    }

    /// Kick phase in the angle representation. `buf` is in DFT order.
    pub fn kick(&self, buf: &mut [Complex<T>], scratch: &mut [Complex<T>], sign: Sign) {
        let table = match sign {
            Sign::Plus => &self.kick_plus,
            Sign::Minus => &self.kick_minus,
        };
        self.inv.process_with_scratch(buf, scratch);
        for (c, phase) in buf.iter_mut().zip(table) {
            *c *= phase;
        }
        self.fwd.process_with_scratch(buf, scratch);
    }

    /// Free-evolution phase in the momentum representation (DFT order).
    pub fn free(&self, buf: &mut [Complex<T>]) {
        for (c, phase) in buf.iter_mut().zip(&self.free) {
            *c *= phase;
        }
    }

    /// One full kick cycle: kick, then free evolution.
    pub fn step(&self, buf: &mut [Complex<T>], scratch: &mut [Complex<T>], sign: Sign) {
        self.kick(buf, scratch, sign);
        self.free(buf);
    }

    /// Parity operator D: C_m <- (-1)^m C_m. In DFT order the sign of m and
    /// of the storage index agree, so this alternates on the index.
    pub fn parity(buf: &mut [Complex<T>]) {
        for (j, c) in buf.iter_mut().enumerate() {
            if j % 2 == 1 {
                *c = -*c;
            }
        }
    }

    /// Extra free evolution over the delay time (phase exp(i pi m^2)),
    /// evaluated through the same trigonometric route as ordinary free
    /// evolution rather than reduced to exact signs.
    pub fn delay(&self, buf: &mut [Complex<T>]) {
        for (c, phase) in buf.iter_mut().zip(&self.delay) {
            *c *= phase;
        }
    }

    /// Probability on the extreme momentum states, DFT order.
    pub fn edge_probability(&self, buf: &[Complex<T>]) -> T {
        let n = buf.len();
        buf[n / 2].norm_sqr().max(buf[n / 2 - 1].norm_sqr())
    }
}

/// Kick counts at which observables are captured during [`evolve`].
#[derive(Clone, Debug)]
pub struct PropagationSchedule {
    n_kicks: u64,
    energy_kicks: Vec<u64>,
    distribution_kicks: Vec<u64>,
}

fn validate_kicks(kicks: &[u64], n_kicks: u64, what: &str) -> Result<()> {
    if !kicks.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidSchedule(format!(
            "{what} kicks must be strictly increasing"
        )));
    }
    if let Some(&last) = kicks.last() {
        if last > n_kicks {
            return Err(Error::InvalidSchedule(format!(
                "{what} kick {last} exceeds n_kicks={n_kicks}"
            )));
        }
    }
    Ok(())
}

impl PropagationSchedule {
    /// Captures both distributions and energies at the given kick counts.
    pub fn new(n_kicks: u64, record_kicks: Vec<u64>) -> Result<Self> {
        Self::with_records(n_kicks, record_kicks.clone(), record_kicks)
    }

    /// Separate capture lists: distributions are 2*m_max values each, so long
    /// runs usually record energies densely and distributions sparsely.
    pub fn with_records(
        n_kicks: u64,
        energy_kicks: Vec<u64>,
        distribution_kicks: Vec<u64>,
    ) -> Result<Self> {
        validate_kicks(&energy_kicks, n_kicks, "energy")?;
        validate_kicks(&distribution_kicks, n_kicks, "distribution")?;
        Ok(PropagationSchedule { n_kicks, energy_kicks, distribution_kicks })
    }

    /// Only the final state is recorded.
    pub fn final_only(n_kicks: u64) -> Self {
        PropagationSchedule {
            n_kicks,
            energy_kicks: vec![n_kicks],
            distribution_kicks: vec![n_kicks],
        }
    }

    /// Energies every `cadence` kicks (plus kick 0 and the final kick);
    /// distribution at the final kick only.
    pub fn energy_every(n_kicks: u64, cadence: u64) -> Self {
        let cadence = cadence.max(1);
        let mut energy_kicks: Vec<u64> = (0..=n_kicks).step_by(cadence as usize).collect();
        if energy_kicks.last() != Some(&n_kicks) {
            energy_kicks.push(n_kicks);
        }
        PropagationSchedule {
            n_kicks,
            energy_kicks,
            distribution_kicks: vec![n_kicks],
        }
    }

    #[inline]
    pub fn n_kicks(&self) -> u64 {
        self.n_kicks
    }

    pub fn energy_kicks(&self) -> &[u64] {
        &self.energy_kicks
    }

    pub fn distribution_kicks(&self) -> &[u64] {
        &self.distribution_kicks
    }
}

/// Output of [`evolve`]: the final state, any scheduled records, and the
/// kick count at which edge probability first exceeded the overflow
/// threshold (if it ever did).
#[derive(Clone, Debug)]
pub struct Evolution<T> {
    pub final_state: QuantumState<T>,
    pub distributions: Vec<DistributionRecord<T>>,
    pub energies: Vec<EnergyRecord<T>>,
    pub overflow_at: Option<u64>,
}

fn energy_dft<T: Real>(buf: &[Complex<T>], tau: T) -> T {
    let n = buf.len();
    let half = rf::<T>(0.5);
    let sum: T = buf
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let m = dft_m(j, n) as f64;
            rf::<T>(m * m) * c.norm_sqr()
        })
        .sum();
    tau * tau * half * sum
}

/// Propagates `initial` through `schedule.n_kicks()` kick cycles of the
/// rotor described by `params`.
///
/// Records are captured after the free evolution of the scheduled kick. The
/// returned states keep their full accumulated kick count.
pub fn evolve<T: Real>(
    initial: &QuantumState<T>,
    params: &RotorParams<T>,
    schedule: &PropagationSchedule,
) -> Result<Evolution<T>> {
    let params = params.validate()?;
    let propagator = SpectralPropagator::from_params(initial.m_max(), &params);
    let mut scratch = propagator.make_scratch();

    let mut buf = initial.amplitudes().to_vec();
    shift_halves(&mut buf);

    let mut energies = Vec::with_capacity(schedule.energy_kicks.len());
    let mut distributions = Vec::with_capacity(schedule.distribution_kicks.len());
    let mut energy_cursor = schedule.energy_kicks.iter().peekable();
    let mut dist_cursor = schedule.distribution_kicks.iter().peekable();
    let mut overflow_at = None;

    let base_kick = initial.kick_index();
    let mut capture = |kick: u64,
                       buf: &[Complex<T>],
                       energies: &mut Vec<EnergyRecord<T>>,
                       distributions: &mut Vec<DistributionRecord<T>>| {
        if energy_cursor.next_if_eq(&&kick).is_some() {
            energies.push(EnergyRecord {
                kick_index: base_kick + kick,
                e_tilde: energy_dft(buf, params.tau),
            });
        }
        if dist_cursor.next_if_eq(&&kick).is_some() {
            let mut p: Vec<T> = buf.iter().map(|c| c.norm_sqr()).collect();
            shift_halves(&mut p);
            distributions.push(DistributionRecord {
                p,
                m_max: initial.m_max(),
                kick_index: base_kick + kick,
                params,
            });
        }
    };

    capture(0, &buf, &mut energies, &mut distributions);

    let threshold = rf::<T>(EDGE_PROBABILITY_THRESHOLD);
    for n in 0..schedule.n_kicks {
        propagator.step(&mut buf, &mut scratch, params.kick_sign(n));
        if params.phase_operator_due(n) {
            match params.variant {
                Variant::MkrDOperator => SpectralPropagator::parity(&mut buf),
                Variant::MkrTimeDelay => propagator.delay(&mut buf),
                _ => unreachable!(),
            }
        }
        if overflow_at.is_none() && propagator.edge_probability(&buf) > threshold {
            overflow_at = Some(n + 1);
        }
        capture(n + 1, &buf, &mut energies, &mut distributions);
    }

    shift_halves(&mut buf);
    let final_state =
        QuantumState::from_amplitudes_unchecked(buf, base_kick + schedule.n_kicks);
    Ok(Evolution { final_state, distributions, energies, overflow_at })
}

/// Applies the kick phase exp(-i*sign*k*cos(theta)) once.
///
/// Convenience entry point that plans transforms on every call; long runs
/// should go through [`evolve`]. The kick count is not advanced (a cycle is
/// only complete after the free evolution).
pub fn apply_kick<T: Real>(state: &QuantumState<T>, k: T, sign: Sign) -> QuantumState<T> {
    let propagator = SpectralPropagator::new(state.m_max(), k, T::zero());
    let mut scratch = propagator.make_scratch();
    let mut out = state.clone();
    shift_halves(out.amplitudes_mut());
    propagator.kick(out.amplitudes_mut(), &mut scratch, sign);
    shift_halves(out.amplitudes_mut());
    out
}

/// Applies the free-evolution phase C_m <- exp(i*tau*m^2/2) C_m.
pub fn apply_free<T: Real>(state: &QuantumState<T>, tau: T) -> QuantumState<T> {
    let mut out = state.clone();
    let m_max = out.m_max();
    let half = rf::<T>(0.5);
    for (i, c) in out.amplitudes_mut().iter_mut().enumerate() {
        let m = index_to_m(i, m_max) as f64;
        *c *= Complex::cis(tau * rf::<T>(m * m) * half);
    }
    out
}

/// Applies the parity operator D: C_m <- (-1)^m C_m. An involution.
pub fn apply_d_operator<T: Real>(state: &QuantumState<T>) -> QuantumState<T> {
    let mut out = state.clone();
    let m_max = out.m_max();
    for (i, c) in out.amplitudes_mut().iter_mut().enumerate() {
        if index_to_m(i, m_max) % 2 != 0 {
            *c = -*c;
        }
    }
    out
}

/// Scaled rotational energy (tau^2/2) * sum_m m^2 |C_m|^2.
pub fn scaled_energy<T: Real>(state: &QuantumState<T>, tau: T) -> T {
    let m_max = state.m_max();
    let half = rf::<T>(0.5);
    let sum: T = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let m = index_to_m(i, m_max) as f64;
            rf::<T>(m * m) * c.norm_sqr()
        })
        .sum();
    tau * tau * half * sum
}

/// Momentum distribution P(m) = |C_m|^2 with parameter metadata attached.
pub fn momentum_distribution<T: Real>(
    state: &QuantumState<T>,
    params: &RotorParams<T>,
) -> DistributionRecord<T> {
    DistributionRecord {
        p: state.probabilities(),
        m_max: state.m_max(),
        kick_index: state.kick_index(),
        params: *params,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::jn_array;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn zero_strength_kick_is_identity() {
        let state = QuantumState::<f64>::basis_state(16, 3).unwrap();
        let kicked = apply_kick(&state, 0.0, Sign::Plus);
        assert!(state.max_amplitude_diff(&kicked) < 1e-14);
    }

    #[test]
    fn kick_matches_bessel_expansion_of_ground_state() {
        // <m|exp(-ik cos theta)|0> = (-i)^m J_m(k); the Jacobi-Anger
        // expansion is the independent reference here.
        let k = 4.0f64;
        let m_max = 64;
        let kicked = apply_kick(&QuantumState::ground(m_max), k, Sign::Plus);
        let j = jn_array(k, m_max);
        for m in -(m_max as i64)..m_max as i64 {
            let order = m.unsigned_abs() as usize;
            let jm = if m < 0 && m % 2 != 0 { -j[order] } else { j[order] };
            let phase = match m.rem_euclid(4) {
                0 => c(1.0, 0.0),
                1 => c(0.0, -1.0),
                2 => c(-1.0, 0.0),
                _ => c(0.0, 1.0),
            };
            let expected = phase * jm;
            assert!(
                (kicked.amplitude(m) - expected).norm() < 1e-12,
                "m={m}: got {} expected {}",
                kicked.amplitude(m),
                expected
            );
        }
    }

    #[test]
    fn opposite_kicks_cancel() {
        let state = apply_kick(&QuantumState::<f64>::ground(64), 2.5, Sign::Plus);
        let there = apply_kick(&state, 4.0, Sign::Plus);
        let back = apply_kick(&there, 4.0, Sign::Minus);
        assert!(state.max_amplitude_diff(&back) < 1e-12);
    }

    #[test]
    fn kick_preserves_norm() {
        let state = apply_kick(&QuantumState::<f64>::ground(128), 10.0, Sign::Plus);
        assert_relative_eq!(state.norm_sq(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn free_evolution_at_zero_tau_is_identity() {
        let state = apply_kick(&QuantumState::<f64>::ground(16), 1.0, Sign::Plus);
        let evolved = apply_free(&state, 0.0);
        assert!(state.max_amplitude_diff(&evolved) == 0.0);
    }

    #[test]
    fn free_phases_compose_additively() {
        use std::f64::consts::TAU;
        let state = apply_kick(&QuantumState::<f64>::ground(32), 3.0, Sign::Plus);
        let twice = apply_free(&apply_free(&state, TAU), TAU);
        let once = apply_free(&state, 2.0 * TAU);
        assert!(twice.max_amplitude_diff(&once) < 1e-12);
    }

    #[test]
    fn free_evolution_phases_single_mode() {
        let state = QuantumState::<f64>::basis_state(8, 3).unwrap();
        let evolved = apply_free(&state, 2.0);
        // exp(i * 2 * 9 / 2) = exp(9i)
        let expected = Complex::cis(9.0f64);
        assert!((evolved.amplitude(3) - expected).norm() < 1e-15);
    }

    #[test]
    fn d_operator_signs_and_involution() {
        let zero = QuantumState::<f64>::basis_state(8, 0).unwrap();
        assert_eq!(apply_d_operator(&zero).amplitude(0), c(1.0, 0.0));
        let one = QuantumState::<f64>::basis_state(8, 1).unwrap();
        assert_eq!(apply_d_operator(&one).amplitude(1), c(-1.0, 0.0));

        let state = apply_kick(&QuantumState::<f64>::ground(32), 5.0, Sign::Plus);
        let twice = apply_d_operator(&apply_d_operator(&state));
        assert!(state.max_amplitude_diff(&twice) == 0.0);
    }

    #[test]
    fn scaled_energy_examples() {
        let ground = QuantumState::<f64>::ground(16);
        assert_eq!(scaled_energy(&ground, 2.0), 0.0);

        let mut amps = vec![c(0.0, 0.0); 32];
        let w = 1.0 / 2.0f64.sqrt();
        amps[16 + 1] = c(w, 0.0);
        amps[16 - 1] = c(w, 0.0);
        let superposition = QuantumState::from_amplitudes(amps).unwrap();
        assert_relative_eq!(scaled_energy(&superposition, 2.0), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn momentum_distribution_is_normalized_delta_for_ground() {
        let params = RotorParams::plain(4.0, 2.0).unwrap();
        let dist = momentum_distribution(&QuantumState::<f64>::ground(32), &params);
        assert_eq!(dist.probability(0), 1.0);
        assert_relative_eq!(dist.total(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn one_evolve_step_equals_composed_operations() {
        let params = RotorParams::plain(3.0, 2.0).unwrap();
        let initial = QuantumState::<f64>::ground(64);
        let evolution = evolve(&initial, &params, &PropagationSchedule::final_only(1)).unwrap();
        let composed = apply_free(&apply_kick(&initial, 3.0, Sign::Plus), 2.0);
        assert!(evolution.final_state.max_amplitude_diff(&composed) < 1e-13);
        assert_eq!(evolution.final_state.kick_index(), 1);
    }

    #[test]
    fn sign_flip_and_d_operator_agree_after_two_periods() {
        let m = 3u32;
        let initial = QuantumState::<f64>::ground(64);
        let schedule = PropagationSchedule::final_only(u64::from(2 * m));
        let flip = RotorParams::new(4.0, 2.0, m, Variant::MkrSignFlip).unwrap();
        let dop = RotorParams::new(4.0, 2.0, m, Variant::MkrDOperator).unwrap();
        let a = evolve(&initial, &flip, &schedule).unwrap().final_state;
        let b = evolve(&initial, &dop, &schedule).unwrap().final_state;
        assert!(a.max_amplitude_diff(&b) < 1e-10);
    }

    #[test]
    fn momentum_distributions_agree_across_variants_at_each_period() {
        // State vectors differ by a pure parity phase at odd multiples of M,
        // so P(m) is the variant-independent observable there.
        let m = 2u32;
        let initial = QuantumState::<f64>::ground(64);
        let kicks: Vec<u64> = (1..=4).map(|i| u64::from(m) * i).collect();
        let schedule = PropagationSchedule::new(u64::from(4 * m), kicks).unwrap();
        let flip = RotorParams::new(5.0, 1.0, m, Variant::MkrSignFlip).unwrap();
        let dop = RotorParams::new(5.0, 1.0, m, Variant::MkrDOperator).unwrap();
        let a = evolve(&initial, &flip, &schedule).unwrap();
        let b = evolve(&initial, &dop, &schedule).unwrap();
        for (da, db) in a.distributions.iter().zip(&b.distributions) {
            let max_diff = da
                .p
                .iter()
                .zip(&db.p)
                .map(|(x, y)| (*x - *y).abs())
                .fold(0.0, f64::max);
            assert!(max_diff < 1e-12, "P(m) mismatch: {max_diff}");
        }
    }

    #[test]
    fn records_are_captured_at_scheduled_kicks() {
        let params = RotorParams::plain(2.0, 1.0).unwrap();
        let schedule = PropagationSchedule::new(10, vec![0, 3, 10]).unwrap();
        let out = evolve(&QuantumState::<f64>::ground(32), &params, &schedule).unwrap();
        let kicks: Vec<u64> = out.energies.iter().map(|e| e.kick_index).collect();
        assert_eq!(kicks, vec![0, 3, 10]);
        assert_eq!(out.distributions.len(), 3);
        assert_eq!(out.energies[0].e_tilde, 0.0);
    }

    #[test]
    fn schedule_rejects_unsorted_or_out_of_range() {
        assert!(PropagationSchedule::new(10, vec![3, 3]).is_err());
        assert!(PropagationSchedule::new(10, vec![5, 2]).is_err());
        assert!(PropagationSchedule::new(10, vec![11]).is_err());
    }

    #[test]
    fn tiny_basis_reports_overflow() {
        let params = RotorParams::plain(4.0, 2.0).unwrap();
        let out = evolve(
            &QuantumState::<f64>::ground(8),
            &params,
            &PropagationSchedule::final_only(20),
        )
        .unwrap();
        assert!(out.overflow_at.is_some());
    }

    #[test]
    fn ample_basis_reports_no_overflow() {
        let params = RotorParams::plain(4.0, 2.0).unwrap();
        let out = evolve(
            &QuantumState::<f64>::ground(512),
            &params,
            &PropagationSchedule::final_only(200),
        )
        .unwrap();
        assert_eq!(out.overflow_at, None);
    }

    #[test]
    fn norm_is_preserved_over_many_kicks() {
        let params = RotorParams::modified(4.0, 2.0, 10).unwrap();
        let out = evolve(
            &QuantumState::<f64>::ground(256),
            &params,
            &PropagationSchedule::final_only(1000),
        )
        .unwrap();
        assert!((out.final_state.norm_sq() - 1.0).abs() < 1e-12);
    }
}
