//! Dense one-period propagator matrices in the angular-momentum basis, their
//! truncation and diagonalization, and the eigenvector statistics used to
//! characterize localization (average Shannon entropy and matrix band width).
//!
//! The single-kick matrix follows from the Jacobi-Anger expansion of the kick
//! phase: with the kick convention `exp(-i k cos theta)`,
//!
//! ```text
//! <m1| F |m2> = exp(i tau m1^2 / 2) * (-i)^(m1-m2) * J_{m1-m2}(k).
//! ```
//!
//! The M-kick modified propagator is D * F^M with D = diag((-1)^m). Its
//! columns are never formed by dense matrix powers at scale: each column is
//! the spectral propagation of a basis vector over M kicks, which is both
//! faster (O(n^2 M log n) instead of O(n^3 M)) and reuses the tested
//! propagation kernel.

use num_complex::Complex;
use rayon::prelude::*;

use crate::bessel::jn_array;
use crate::eig::{eig_dense, EigScalar};
use crate::error::{Error, Result};
use crate::params::{RotorParams, Sign};
use crate::quantum::{shift_halves, SpectralPropagator};
use crate::real::{rf, Real};

/// Normalization constant of the averaged Shannon entropy.
pub const DEFAULT_SHANNON_ALPHA: f64 = 0.96;

/// What a [`FloquetMatrix`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    /// Single-kick propagator of the plain rotor.
    KrSingleKick,
    /// M-fold product of single-kick propagators.
    KrPower(u32),
    /// Modified propagator D * F^M.
    Mkr(u32),
}

impl std::fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MatrixKind::KrSingleKick => write!(f, "kr"),
            MatrixKind::KrPower(m) => write!(f, "kr^{m}"),
            MatrixKind::Mkr(m) => write!(f, "mkr(M={m})"),
        }
    }
}

/// Dense complex propagator matrix over m in [-dim/2, dim/2), column-major.
#[derive(Clone, Debug)]
pub struct FloquetMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
    params: RotorParams<T>,
    kind: MatrixKind,
}

/// Eigenvalues and (right) eigenvectors of a truncated propagator.
#[derive(Clone, Debug)]
pub struct EigenstateSet<T> {
    dim: usize,
    values: Vec<Complex<T>>,
    /// Column-major, unit Euclidean norm each.
    vectors: Vec<Complex<T>>,
}

impl<T: Real> EigenstateSet<T> {
    pub fn len(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn vector(&self, j: usize) -> &[Complex<T>] {
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }

    /// Builds a set from explicit column vectors (mainly for tests).
    pub fn from_vectors(dim: usize, values: Vec<Complex<T>>, vectors: Vec<Complex<T>>) -> Self {
        assert_eq!(vectors.len(), dim * values.len());
        EigenstateSet { dim, values, vectors }
    }
}

/// (-i)^delta for the kick-matrix phase.
fn quarter_phase<T: Real>(delta: i64) -> Complex<T> {
    match delta.rem_euclid(4) {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), -T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), T::one()),
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 || dim % 2 != 0 {
        return Err(Error::Dimension(format!(
            "ambient dimension must be even and >= 2, got {dim}"
        )));
    }
    Ok(())
}

/// Builds the single-kick propagator matrix from Bessel elements.
pub fn build_kr_matrix<T: Real>(
    params: &RotorParams<T>,
    ambient_dim: usize,
) -> Result<FloquetMatrix<T>> {
    let params = params.validate()?;
    check_dim(ambient_dim)?;
    let half = (ambient_dim / 2) as i64;
    let bessel = jn_array(params.k, ambient_dim);
    let free: Vec<Complex<T>> = (0..ambient_dim)
        .map(|i| {
            let m1 = (i as i64 - half) as f64;
            Complex::cis(params.tau * rf::<T>(m1 * m1) * rf::<T>(0.5))
        })
        .collect();

    let mut data = vec![Complex::new(T::zero(), T::zero()); ambient_dim * ambient_dim];
    data.par_chunks_mut(ambient_dim)
        .enumerate()
        .for_each(|(col, column)| {
            let m2 = col as i64 - half;
            for (row, entry) in column.iter_mut().enumerate() {
                let m1 = row as i64 - half;
                let delta = m1 - m2;
                let j = bessel[delta.unsigned_abs() as usize];
                let j = if delta < 0 && delta % 2 != 0 { -j } else { j };
                *entry = free[row] * quarter_phase::<T>(delta).scale(j);
            }
        });

    Ok(FloquetMatrix { dim: ambient_dim, data, params, kind: MatrixKind::KrSingleKick })
}

/// Columns of F^M (optionally with the parity rows of D), built by spectral
/// propagation of basis vectors. Only columns in `[col_lo, col_hi)` of the
/// ambient matrix are produced; rows are restricted to the same window.
fn power_columns<T: Real>(
    params: &RotorParams<T>,
    ambient_dim: usize,
    m_kicks: u32,
    apply_parity: bool,
    window: std::ops::Range<usize>,
) -> Vec<Complex<T>> {
    let propagator = SpectralPropagator::new(ambient_dim / 2, params.k, params.tau);
    let half = (ambient_dim / 2) as i64;
    let out_dim = window.len();
    let mut data = vec![Complex::new(T::zero(), T::zero()); out_dim * out_dim];
    data.par_chunks_mut(out_dim)
        .enumerate()
        .for_each(|(col, column)| {
            let mut buf = vec![Complex::new(T::zero(), T::zero()); ambient_dim];
            let mut scratch = propagator.make_scratch();
            buf[window.start + col] = Complex::new(T::one(), T::zero());
            shift_halves(&mut buf);
            for _ in 0..m_kicks {
                propagator.step(&mut buf, &mut scratch, Sign::Plus);
            }
            shift_halves(&mut buf);
            for (row, entry) in column.iter_mut().enumerate() {
                let m1 = (window.start + row) as i64 - half;
                let v = buf[window.start + row];
                *entry = if apply_parity && m1 % 2 != 0 { -v } else { v };
            }
        });
    data
}

/// F^M over the full ambient basis, by spectral column propagation.
pub fn build_kr_power_matrix<T: Real>(
    params: &RotorParams<T>,
    ambient_dim: usize,
    m_kicks: u32,
) -> Result<FloquetMatrix<T>> {
    let params = params.validate()?;
    check_dim(ambient_dim)?;
    if m_kicks < 1 {
        return Err(Error::InvalidParams("matrix power must be >= 1".into()));
    }
    let data = power_columns(&params, ambient_dim, m_kicks, false, 0..ambient_dim);
    Ok(FloquetMatrix { dim: ambient_dim, data, params, kind: MatrixKind::KrPower(m_kicks) })
}

/// The modified propagator D * F^M in the ambient basis of `kr`.
pub fn build_mkr_matrix<T: Real>(
    kr: &FloquetMatrix<T>,
    m_kicks: u32,
) -> Result<FloquetMatrix<T>> {
    if kr.kind != MatrixKind::KrSingleKick {
        return Err(Error::Dimension(format!(
            "expected a single-kick matrix, got {}",
            kr.kind
        )));
    }
    if m_kicks < 1 {
        return Err(Error::InvalidParams("M must be >= 1".into()));
    }
    let data = power_columns(&kr.params, kr.dim, m_kicks, true, 0..kr.dim);
    Ok(FloquetMatrix { dim: kr.dim, data, params: kr.params, kind: MatrixKind::Mkr(m_kicks) })
}

/// D * F^M built in a large ambient basis and restricted to the central
/// `d` x `d` block in one pass, skipping the never-used outer columns.
pub fn build_mkr_truncated<T: Real>(
    params: &RotorParams<T>,
    ambient_dim: usize,
    m_kicks: u32,
    d: usize,
) -> Result<FloquetMatrix<T>> {
    let params = params.validate()?;
    check_dim(ambient_dim)?;
    if m_kicks < 1 {
        return Err(Error::InvalidParams("M must be >= 1".into()));
    }
    if d > ambient_dim || d == 0 || (ambient_dim - d) % 2 != 0 {
        return Err(Error::Dimension(format!(
            "cannot center a {d}-dim block in ambient dimension {ambient_dim}"
        )));
    }
    let offset = (ambient_dim - d) / 2;
    let data = power_columns(&params, ambient_dim, m_kicks, true, offset..offset + d);
    Ok(FloquetMatrix { dim: d, data, params, kind: MatrixKind::Mkr(m_kicks) })
}

impl<T: Real> FloquetMatrix<T> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn params(&self) -> &RotorParams<T> {
        &self.params
    }

    /// Raw column-major storage.
    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Complex<T> {
        self.data[col * self.dim + row]
    }

    /// Element <m1| . |m2> with m in [-dim/2, dim/2).
    pub fn element(&self, m1: i64, m2: i64) -> Complex<T> {
        let half = (self.dim / 2) as i64;
        assert!(m1 >= -half && m1 < half && m2 >= -half && m2 < half);
        self.at((m1 + half) as usize, (m2 + half) as usize)
    }

    pub fn column(&self, col: usize) -> &[Complex<T>] {
        &self.data[col * self.dim..(col + 1) * self.dim]
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.dim];
        for (col, &x) in v.iter().enumerate() {
            if x == Complex::new(T::zero(), T::zero()) {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.column(col)) {
                *o += a * x;
            }
        }
        out
    }

    /// Dense matrix power by repeated multiplication. Small-instance oracle
    /// for the spectral column construction; O(dim^3 * exponent).
    pub fn dense_power(&self, exponent: u32) -> FloquetMatrix<T> {
        assert!(exponent >= 1);
        let mut out = self.clone();
        for _ in 1..exponent {
            out = FloquetMatrix {
                dim: self.dim,
                data: mat_mul(self.dim, &self.data, &out.data),
                params: self.params,
                kind: MatrixKind::KrPower(0),
            };
        }
        out.kind = MatrixKind::KrPower(exponent);
        out
    }

    /// Central d x d block, symmetric about m = 0.
    pub fn truncate(&self, d: usize) -> Result<FloquetMatrix<T>> {
        if d > self.dim {
            return Err(Error::Dimension(format!(
                "truncation dimension {d} exceeds ambient dimension {}",
                self.dim
            )));
        }
        if d == 0 || (self.dim - d) % 2 != 0 {
            return Err(Error::Dimension(format!(
                "cannot center a {d}-dim block in dimension {}",
                self.dim
            )));
        }
        let offset = (self.dim - d) / 2;
        let mut data = Vec::with_capacity(d * d);
        for col in 0..d {
            let src = self.column(offset + col);
            data.extend_from_slice(&src[offset..offset + d]);
        }
        Ok(FloquetMatrix { dim: d, data, params: self.params, kind: self.kind })
    }

    /// Largest deviation of the Gram matrix from the identity, probing the
    /// columns at least `margin` away from both ambient edges.
    pub fn gram_deviation(&self, margin: usize) -> T {
        let lo = margin.min(self.dim / 2);
        let hi = self.dim - lo;
        let mut worst = T::zero();
        for j in lo..hi {
            let cj = self.column(j);
            for i in lo..hi {
                let ci = self.column(i);
                let mut dot = Complex::new(T::zero(), T::zero());
                for (a, b) in ci.iter().zip(cj) {
                    dot += a.conj() * b;
                }
                let target = if i == j { T::one() } else { T::zero() };
                let dev = (dot - Complex::new(target, T::zero())).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }

    /// Full eigendecomposition of the (generally non-unitary, truncated)
    /// matrix.
    pub fn diagonalize(&self) -> Result<EigenstateSet<T>>
    where
        T: EigScalar,
    {
        let (values, vectors) = eig_dense(self.dim, &self.data).map_err(|info| {
            Error::Eigensolver {
                info,
                detail: format!(
                    "{} dim={} k={} tau={}",
                    self.kind,
                    self.dim,
                    self.params.k,
                    self.params.tau
                ),
            }
        })?;
        Ok(EigenstateSet { dim: self.dim, values, vectors })
    }

    /// Band half-width per interior row at the given magnitude cutoff,
    /// aggregated over the central half of the rows.
    pub fn band_width(&self, cutoff: T, stat: BandStat) -> T {
        assert!(cutoff > T::zero(), "cutoff must be positive");
        let lo = self.dim / 4;
        let hi = self.dim - lo;
        let mut sum = 0.0f64;
        let mut max = 0i64;
        let mut rows = 0usize;
        for row in lo..hi {
            let mut w = 0i64;
            for col in 0..self.dim {
                if self.at(row, col).norm() > cutoff {
                    w = w.max((row as i64 - col as i64).abs());
                }
            }
            sum += w as f64;
            max = max.max(w);
            rows += 1;
        }
        match stat {
            BandStat::Mean => rf(sum / rows as f64),
            BandStat::Max => rf(max as f64),
        }
    }
}

/// Aggregation of per-row band widths into one scalar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BandStat {
    /// Mean over the central half of the rows (the default diagnostic).
    Mean,
    /// Maximum over the same rows.
    Max,
}

/// Dense matrix with an explicit band bound: column `j` only holds rows in
/// `[j - half_width, j + half_width]`. Products of banded matrices compute
/// far-off-diagonal elements as sums of products of small numbers, so the
/// tiny magnitudes that define the band at deep cutoffs keep their relative
/// accuracy; the spectral kernel cannot do this (its FFT passes leave a
/// noise floor of ~1e-16 times the column norm across the whole column).
struct BandedMatrix<T> {
    dim: usize,
    half_width: usize,
    /// Column-major windows: column j stores rows [j - w, j + w] in a slot
    /// of fixed size 2w + 1 (edge overhang stays zero).
    data: Vec<Complex<T>>,
}

impl<T: Real> BandedMatrix<T> {
    fn slot(&self) -> usize {
        2 * self.half_width + 1
    }

    #[inline]
    fn at(&self, row: usize, col: usize) -> Complex<T> {
        let lo = col as i64 - self.half_width as i64;
        let offset = row as i64 - lo;
        if offset < 0 || offset as usize >= self.slot() {
            Complex::new(T::zero(), T::zero())
        } else {
            self.data[col * self.slot() + offset as usize]
        }
    }

    /// Single-kick propagator in banded form; the half-width is where the
    /// Bessel tail underflows to exact zero.
    fn single_kick(params: &RotorParams<T>, dim: usize) -> Self {
        let half = (dim / 2) as i64;
        let bessel = jn_array(params.k, dim);
        let width = bessel
            .iter()
            .rposition(|&j| j != T::zero())
            .unwrap_or(0)
            .min(dim - 1);
        let mut out = BandedMatrix {
            dim,
            half_width: width,
            data: vec![Complex::new(T::zero(), T::zero()); dim * (2 * width + 1)],
        };
        let slot = out.slot();
        for col in 0..dim {
            let m2 = col as i64 - half;
            let lo = col as i64 - width as i64;
            for offset in 0..slot {
                let row = lo + offset as i64;
                if row < 0 || row >= dim as i64 {
                    continue;
                }
                let m1 = row - half;
                let delta = m1 - m2;
                let j = bessel[delta.unsigned_abs() as usize];
                if j == T::zero() {
                    continue;
                }
                let j = if delta < 0 && delta % 2 != 0 { -j } else { j };
                let free = Complex::cis(params.tau * rf::<T>((m1 * m1) as f64) * rf::<T>(0.5));
                out.data[col * slot + offset] = free * quarter_phase::<T>(delta).scale(j);
            }
        }
        out
    }

    /// C = A * B with the result band capped at `cap` (projection: rows
    /// outside the cap are dropped; callers pick `cap` so the dropped
    /// magnitudes sit well below the cutoff of interest).
    fn multiply(&self, other: &Self, cap: usize) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let wc = (self.half_width + other.half_width).min(cap).min(n - 1);
        let slot_c = 2 * wc + 1;
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * slot_c];
        data.par_chunks_mut(slot_c).enumerate().for_each(|(j, out)| {
            let c_lo = j as i64 - wc as i64;
            let l_min = j.saturating_sub(other.half_width);
            let l_max = (j + other.half_width).min(n - 1);
            for l in l_min..=l_max {
                let blj = other.at(l, j);
                if blj == Complex::new(T::zero(), T::zero()) {
                    continue;
                }
                let a_lo = l as i64 - self.half_width as i64;
                let i0 = a_lo.max(c_lo).max(0);
                let i1 = (l as i64 + self.half_width as i64)
                    .min(c_lo + slot_c as i64 - 1)
                    .min(n as i64 - 1);
                if i1 < i0 {
                    continue;
                }
                let a_col = &self.data[l * self.slot()..(l + 1) * self.slot()];
                let a_from = (i0 - a_lo) as usize;
                let a_to = (i1 - a_lo) as usize;
                let c_from = (i0 - c_lo) as usize;
                for (c, &a) in out[c_from..=c_from + (a_to - a_from)]
                    .iter_mut()
                    .zip(&a_col[a_from..=a_to])
                {
                    *c += a * blj;
                }
            }
        });
        BandedMatrix { dim: n, half_width: wc, data }
    }

    /// Central d x d block as a dense matrix, with the parity rows of D
    /// applied when `mkr` is set.
    fn extract(&self, d: usize, mkr: bool, params: RotorParams<T>, kind: MatrixKind) -> FloquetMatrix<T> {
        let offset = (self.dim - d) / 2;
        let half = (self.dim / 2) as i64;
        let mut data = Vec::with_capacity(d * d);
        for col in 0..d {
            for row in 0..d {
                let mut v = self.at(offset + row, offset + col);
                let m1 = (offset + row) as i64 - half;
                if mkr && m1 % 2 != 0 {
                    v = -v;
                }
                data.push(v);
            }
        }
        FloquetMatrix { dim: d, data, params, kind }
    }
}

/// Band widths of the modified propagator D * F^M for every M in `m_list`,
/// measured on the central `d` x `d` block at the given cutoff.
///
/// The powers are assembled by binary squaring of the banded single-kick
/// matrix (sharing the power-of-two chain across the whole list), which
/// preserves the relative accuracy of matrix elements all the way down to
/// underflow and so supports cutoffs far below the spectral kernel's
/// ~1e-16 noise floor.
pub fn mkr_band_widths<T: Real>(
    params: &RotorParams<T>,
    ambient_dim: usize,
    m_list: &[u32],
    d: usize,
    cutoff: T,
    stat: BandStat,
) -> Result<Vec<(u32, T)>> {
    let params = params.validate()?;
    check_dim(ambient_dim)?;
    if d > ambient_dim || d == 0 || (ambient_dim - d) % 2 != 0 {
        return Err(Error::Dimension(format!(
            "cannot center a {d}-dim block in ambient dimension {ambient_dim}"
        )));
    }
    if m_list.iter().any(|&m| m < 1) {
        return Err(Error::InvalidParams("M values must be >= 1".into()));
    }
    // Keep enough band that anything dropped is orders of magnitude below
    // the cutoff once localization saturates the element magnitudes.
    let cap = ambient_dim / 2;

    let single = BandedMatrix::single_kick(&params, ambient_dim);
    let mut powers_of_two = vec![single]; // powers_of_two[j] = F^(2^j)
    let max_m = *m_list.iter().max().unwrap();
    while (1u32 << (powers_of_two.len() - 1)) < max_m {
        let last = powers_of_two.last().unwrap();
        powers_of_two.push(last.multiply(last, cap));
    }

    let mut out = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let mut acc: Option<BandedMatrix<T>> = None;
        for bit in 0..32 {
            if m & (1 << bit) != 0 {
                acc = Some(match acc {
                    None => {
                        let p = &powers_of_two[bit];
                        BandedMatrix { dim: p.dim, half_width: p.half_width, data: p.data.clone() }
                    }
                    Some(current) => powers_of_two[bit].multiply(&current, cap),
                });
            }
        }
        let block = acc
            .unwrap()
            .extract(d, true, params, MatrixKind::Mkr(m));
        out.push((m, block.band_width(cutoff, stat)));
    }
    Ok(out)
}

fn mat_mul<T: Real>(dim: usize, a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; dim * dim];
    out.par_chunks_mut(dim).enumerate().for_each(|(j, col)| {
        for l in 0..dim {
            let blj = b[j * dim + l];
            if blj == zero {
                continue;
            }
            let a_col = &a[l * dim..(l + 1) * dim];
            for (o, &ail) in col.iter_mut().zip(a_col) {
                *o += ail * blj;
            }
        }
    });
    out
}

/// Average Shannon entropy of an eigenvector set:
/// S = (2 / (alpha * d)) * sum_j exp(-sum_m p ln p), p = |<m|phi_j>|^2.
pub fn shannon_entropy_avg<T: Real>(eigs: &EigenstateSet<T>, alpha: T) -> T {
    let d = eigs.values.len();
    assert!(d >= 1, "need at least one eigenvector");
    let sum: T = (0..d)
        .map(|j| {
            let h: T = eigs
                .vector(j)
                .iter()
                .map(|c| {
                    let p = c.norm_sqr();
                    if p > T::zero() {
                        -p * p.ln()
                    } else {
                        T::zero()
                    }
                })
                .sum();
            h.exp()
        })
        .sum();
    rf::<T>(2.0) / (alpha * rf::<T>(d as f64)) * sum
}
