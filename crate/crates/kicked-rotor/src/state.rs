//! Quantum state over the angular-momentum basis and the record types
//! captured during propagation.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::params::RotorParams;
use crate::real::{rf, Real};

/// Tolerance on the state norm at construction.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Complex amplitude vector over |m> with m in [-m_max, m_max).
///
/// Storage index 0 corresponds to m = -m_max; the grid has 2*m_max states so
/// that the conjugate angle grid is a power of two when m_max is. The single
/// missing state at +m_max is immaterial at the probability floor the edge
/// monitor enforces.
#[derive(Clone, Debug)]
pub struct QuantumState<T> {
    amplitudes: Vec<Complex<T>>,
    m_max: usize,
    kick_index: u64,
}

/// Maps an angular momentum quantum number to its storage index.
#[inline]
pub fn m_to_index(m: i64, m_max: usize) -> Option<usize> {
    let half = m_max as i64;
    if m >= -half && m < half {
        Some((m + half) as usize)
    } else {
        None
    }
}

/// Maps a storage index back to the angular momentum quantum number.
#[inline]
pub fn index_to_m(index: usize, m_max: usize) -> i64 {
    index as i64 - m_max as i64
}

impl<T: Real> QuantumState<T> {
    /// The basis state |m>.
    pub fn basis_state(m_max: usize, m: i64) -> Result<Self> {
        let index = m_to_index(m, m_max)
            .ok_or_else(|| Error::Dimension(format!("m={m} outside [-{m_max}, {m_max})")))?;
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); 2 * m_max];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Ok(QuantumState { amplitudes, m_max, kick_index: 0 })
    }

    /// The default initial state |0>.
    pub fn ground(m_max: usize) -> Self {
        Self::basis_state(m_max, 0).expect("m=0 is always on the grid")
    }

    /// Builds a state from explicit amplitudes (index 0 <-> m = -m_max).
    /// The vector length must be even and the norm must be 1 within 1e-10.
    pub fn from_amplitudes(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.len() < 2 || amplitudes.len() % 2 != 0 {
            return Err(Error::Dimension(format!(
                "amplitude vector length must be even and >= 2, got {}",
                amplitudes.len()
            )));
        }
        let m_max = amplitudes.len() / 2;
        let state = QuantumState { amplitudes, m_max, kick_index: 0 };
        let norm_err = (state.norm_sq() - T::one()).abs();
        if norm_err > rf(NORM_TOLERANCE) {
            return Err(Error::InvalidParams(format!(
                "state norm deviates from 1 by {:e}",
                norm_err
            )));
        }
        Ok(state)
    }

    /// Wraps amplitudes that are known to be propagation output; skips the
    /// norm gate so long runs can report their true accumulated drift.
    pub(crate) fn from_amplitudes_unchecked(amplitudes: Vec<Complex<T>>, kick_index: u64) -> Self {
        let m_max = amplitudes.len() / 2;
        QuantumState { amplitudes, m_max, kick_index }
    }

    /// Rescales to unit norm (for assembling custom initial states).
    pub fn normalized(mut self) -> Self {
        let norm = self.norm_sq().sqrt();
        if norm > T::zero() {
            for a in &mut self.amplitudes {
                *a = a.unscale(norm);
            }
        }
        self
    }

    #[inline]
    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// Number of basis states (2 * m_max).
    #[inline]
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    #[inline]
    pub fn kick_index(&self) -> u64 {
        self.kick_index
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amplitudes
    }

    /// Amplitude C_m, or zero off the grid.
    pub fn amplitude(&self, m: i64) -> Complex<T> {
        m_to_index(m, self.m_max)
            .map(|i| self.amplitudes[i])
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    pub fn norm_sq(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// |C_m|^2 in storage order.
    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability sitting on the two extreme momentum states; the signal
    /// used to detect truncation contamination.
    pub fn edge_probability(&self) -> T {
        let lo = self.amplitudes[0].norm_sqr();
        let hi = self.amplitudes[self.amplitudes.len() - 1].norm_sqr();
        lo.max(hi)
    }

    /// Maximum norm of the elementwise difference to another state.
    pub fn max_amplitude_diff(&self, other: &Self) -> T {
        assert_eq!(self.len(), other.len(), "state sizes differ");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }
}

/// Momentum distribution snapshot P(m) at a given kick count.
#[derive(Clone, Debug)]
pub struct DistributionRecord<T> {
    /// P(m) >= 0 in storage order (index 0 <-> m = -m_max).
    pub p: Vec<T>,
    pub m_max: usize,
    pub kick_index: u64,
    pub params: RotorParams<T>,
}

impl<T: Real> DistributionRecord<T> {
    pub fn probability(&self, m: i64) -> T {
        m_to_index(m, self.m_max)
            .map(|i| self.p[i])
            .unwrap_or_else(T::zero)
    }

    pub fn total(&self) -> T {
        self.p.iter().copied().sum()
    }

    /// Iterates (m, P(m)).
    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        let m_max = self.m_max;
        self.p
            .iter()
            .enumerate()
            .map(move |(i, &p)| (index_to_m(i, m_max), p))
    }
}

/// Dimensionless scaled rotational energy at a given kick count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRecord<T> {
    pub kick_index: u64,
    /// E-tilde = <L^2> tau^2 / (2 hbar^2) = (tau^2/2) * sum m^2 |C_m|^2.
    pub e_tilde: T,
}
