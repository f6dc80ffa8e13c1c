//! Lineshape analysis: exponential fits of momentum distributions,
//! two-scale (nonexponential) shape detection, and energy-saturation checks.

use crate::error::{Error, Result};
use crate::real::{rf, Real};
use crate::state::{DistributionRecord, EnergyRecord};

/// Knobs of the lineshape fits.
#[derive(Clone, Copy, Debug)]
pub struct FitConfig<T> {
    /// Probabilities at or below this are treated as noise and skipped.
    pub floor: T,
    /// Number of central states excluded from fits (the elastic peak).
    pub central_exclusion: usize,
    /// Minimum usable points per side.
    pub min_points: usize,
}

impl<T: Real> Default for FitConfig<T> {
    fn default() -> Self {
        FitConfig { floor: rf(1e-15), central_exclusion: 5, min_points: 10 }
    }
}

/// Exponential lineshape fit P(m) ~ exp(-|m|/l).
#[derive(Clone, Copy, Debug)]
pub struct LineshapeFit<T> {
    /// Localization length from the single-exponential fit.
    pub l: T,
    /// |m| range used by the fit.
    pub fit_range: (i64, i64),
    /// Root-mean-square residual of the ln P fit.
    pub residual: T,
    /// Present when a two-segment model was fitted.
    pub two_scale: Option<TwoScale<T>>,
}

/// Two-segment (broken-line) decomposition of ln P vs |m|.
#[derive(Clone, Copy, Debug)]
pub struct TwoScale<T> {
    /// Decay length of the inner segment (infinite for a flat inner part).
    pub l_inner: T,
    /// Decay length of the outer segment.
    pub l_outer: T,
    /// Breakpoint between the segments.
    pub m_break: i64,
    /// RMS residual of the two-segment fit.
    pub residual: T,
}

#[derive(Clone, Copy)]
struct Line<T> {
    slope: T,
    rms: T,
}

fn fit_line<T: Real>(points: &[(T, T)]) -> Line<T> {
    let n = rf::<T>(points.len() as f64);
    let sx: T = points.iter().map(|p| p.0).sum();
    let sy: T = points.iter().map(|p| p.1).sum();
    let sxx: T = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: T = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let ss: T = points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    Line { slope, rms: (ss / n).sqrt() }
}

/// (|m|, ln P) samples of one side of the distribution, floor-trimmed and
/// with the central peak excluded. `side` is +1 or -1.
fn side_points<T: Real>(
    dist: &DistributionRecord<T>,
    config: &FitConfig<T>,
    side: i64,
) -> Vec<(T, T)> {
    // `central_exclusion` counts states symmetric about m = 0, so e.g. 5
    // excludes {-2..2} and the fit starts at |m| = 3.
    let m_lo = (config.central_exclusion as i64 + 1) / 2;
    // Largest |m| still above the floor bounds the fit range; points below
    // the floor inside that range are individually skipped.
    let mut m_hi = 0i64;
    let half = dist.m_max as i64;
    for abs_m in m_lo..half {
        if dist.probability(side * abs_m) > config.floor {
            m_hi = abs_m;
        }
    }
    let mut points = Vec::new();
    for abs_m in m_lo..=m_hi {
        let p = dist.probability(side * abs_m);
        if p > config.floor {
            points.push((rf::<T>(abs_m as f64), p.ln()));
        }
    }
    points
}

/// Least-squares exponential fit of a momentum distribution.
///
/// Fits ln P(m) against |m| separately on the two sides (skipping the
/// central `central_exclusion` states and anything at or below `floor`),
/// then averages the sides. Returns l = -1/slope.
pub fn fit_localization_length<T: Real>(
    dist: &DistributionRecord<T>,
    config: &FitConfig<T>,
) -> Result<LineshapeFit<T>> {
    let mut lengths = Vec::new();
    let mut rms_sq = T::zero();
    let mut range = (i64::MAX, 0i64);
    for side in [1i64, -1] {
        let points = side_points(dist, config, side);
        if points.len() < config.min_points {
            return Err(Error::TooFewPoints {
                needed: config.min_points,
                got: points.len(),
            });
        }
        let line = fit_line(&points);
        lengths.push(-T::one() / line.slope);
        rms_sq += line.rms * line.rms;
        range.0 = range.0.min(points[0].0.to_f64().unwrap() as i64);
        range.1 = range.1.max(points[points.len() - 1].0.to_f64().unwrap() as i64);
    }
    let two = rf::<T>(2.0);
    let l = (lengths[0] + lengths[1]) / two;
    if l <= T::zero() {
        return Err(Error::InvalidParams(
            "distribution does not decay with |m|; no localization length".into(),
        ));
    }
    Ok(LineshapeFit {
        l,
        fit_range: range,
        residual: (rms_sq / two).sqrt(),
        two_scale: None,
    })
}

/// Arithmetic mean of several distribution snapshots (same grid and
/// parameters). Localized states carry a quasi-static speckle pattern, so
/// lineshape classification works on profiles averaged over a window of
/// late kicks rather than on a single snapshot.
pub fn average_distributions<T: Real>(
    records: &[DistributionRecord<T>],
) -> Result<DistributionRecord<T>> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidParams("no distributions to average".into()))?;
    let mut p = vec![T::zero(); first.p.len()];
    for record in records {
        if record.m_max != first.m_max {
            return Err(Error::Dimension("mixed grids in distribution average".into()));
        }
        for (acc, &value) in p.iter_mut().zip(&record.p) {
            *acc += value;
        }
    }
    let n = rf::<T>(records.len() as f64);
    for value in &mut p {
        *value = *value / n;
    }
    Ok(DistributionRecord {
        p,
        m_max: first.m_max,
        kick_index: records.last().unwrap().kick_index,
        params: first.params,
    })
}

/// Continuous broken-line least squares at a fixed breakpoint `b`:
/// y = a + s1*x + (s2 - s1)*max(0, x - b). Returns (s1, s2, rms).
fn fit_hinge<T: Real>(points: &[(T, T)], b: T) -> Option<(T, T, T)> {
    let n = rf::<T>(points.len() as f64);
    // Normal equations over regressors [1, x, h] with h = max(0, x - b).
    let mut sx = T::zero();
    let mut sh = T::zero();
    let mut sy = T::zero();
    let mut sxx = T::zero();
    let mut sxh = T::zero();
    let mut shh = T::zero();
    let mut sxy = T::zero();
    let mut shy = T::zero();
    for &(x, y) in points {
        let h = (x - b).max(T::zero());
        sx += x;
        sh += h;
        sy += y;
        sxx += x * x;
        sxh += x * h;
        shh += h * h;
        sxy += x * y;
        shy += h * y;
    }
    // Solve the symmetric 3x3 system via cofactors.
    let a = [[n, sx, sh], [sx, sxx, sxh], [sh, sxh, shh]];
    let rhs = [sy, sxy, shy];
    let det = |m: &[[T; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    if d.abs() < rf(1e-30) {
        return None;
    }
    let mut sol = [T::zero(); 3];
    for (i, s) in sol.iter_mut().enumerate() {
        let mut m = a;
        for row in 0..3 {
            m[row][i] = rhs[row];
        }
        *s = det(&m) / d;
    }
    let (a0, s1, ds) = (sol[0], sol[1], sol[2]);
    let ss: T = points
        .iter()
        .map(|&(x, y)| {
            let h = (x - b).max(T::zero());
            let r = y - (a0 + s1 * x + ds * h);
            r * r
        })
        .sum();
    Some((s1, s1 + ds, (ss / n).sqrt()))
}

/// Verdict of the two-scale shape detector.
#[derive(Clone, Copy, Debug)]
pub struct NonexponentialReport<T> {
    pub is_nonexponential: bool,
    pub fit: LineshapeFit<T>,
    /// Largest forward increase of the smoothed log-profile (in ln P units).
    /// An exponential profile with speckle stays near zero; shoulders and
    /// plateaus push this to one unit and beyond.
    pub profile_rise: T,
}

/// Residual improvement the two-segment fit must deliver.
pub const TWO_SEGMENT_RESIDUAL_GAIN: f64 = 2.0;

/// Minimum inner/outer length ratio for a two-scale verdict. Plain-rotor
/// profiles bow at ratios up to ~2.7 on their own, so the threshold sits
/// well above that.
pub const TWO_SEGMENT_LENGTH_RATIO: f64 = 4.0;

/// Smoothed-profile rise (in ln P units) that flags a shoulder or plateau.
pub const PROFILE_RISE_THRESHOLD: f64 = 0.65;

/// Half-width (in states) of the boxcar that suppresses speckle before
/// shape classification.
const SMOOTHING_HALF_WIDTH: usize = 15;

/// The analysis range ends this many ln P units above the floor, keeping
/// floor censoring out of the shape statistics.
const TRIM_MARGIN: f64 = 2.0;

/// Side-averaged, speckle-smoothed log-profile: x = |m|, y = smoothed
/// ln sqrt(P(m) * P(-m)), trimmed shortly above the floor.
fn smoothed_profile<T: Real>(
    dist: &DistributionRecord<T>,
    config: &FitConfig<T>,
) -> Vec<(T, T)> {
    let m_lo = (config.central_exclusion as i64 + 1) / 2;
    let half = dist.m_max as i64;
    let tiny = rf::<T>(1e-300);
    let mut m_hi = 0i64;
    for abs_m in m_lo..half {
        let q = (dist.probability(abs_m) * dist.probability(-abs_m)).sqrt();
        if q > config.floor {
            m_hi = abs_m;
        }
    }
    let raw: Vec<(T, T)> = (m_lo..=m_hi)
        .map(|abs_m| {
            let q = (dist.probability(abs_m) * dist.probability(-abs_m)).sqrt();
            (rf::<T>(abs_m as f64), q.max(tiny).ln())
        })
        .collect();

    let w = SMOOTHING_HALF_WIDTH;
    let mut smoothed = Vec::with_capacity(raw.len());
    for i in 0..raw.len() {
        let lo = i.saturating_sub(w);
        let hi = (i + w + 1).min(raw.len());
        let mean: T = raw[lo..hi].iter().map(|p| p.1).sum::<T>()
            / rf::<T>((hi - lo) as f64);
        smoothed.push((raw[i].0, mean));
    }
    let cutoff = config.floor.ln() + rf::<T>(TRIM_MARGIN);
    if let Some(cut) = smoothed.iter().position(|&(_, y)| y < cutoff) {
        smoothed.truncate(cut);
    }
    smoothed
}

/// Flags distributions whose ln P vs |m| shape cannot be described by one
/// decay length. Two signatures count, both measured on the side-averaged,
/// speckle-smoothed profile:
///
/// - a shoulder or plateau: the profile rises back by more than
///   [`PROFILE_RISE_THRESHOLD`] ln P units somewhere inside the range;
/// - a strong clean break: a two-segment fit cuts the RMS residual by 2x
///   and its inner segment decays at least 4x slower than the outer one.
///
/// Snapshot distributions carry quasi-static speckle; feeding a window
/// average from [`average_distributions`] makes the verdict robust.
pub fn detect_nonexponential<T: Real>(
    dist: &DistributionRecord<T>,
    config: &FitConfig<T>,
) -> Result<NonexponentialReport<T>> {
    let single = fit_localization_length(dist, config)?;

    let profile = smoothed_profile(dist, config);
    if profile.len() < 4 * config.min_points {
        return Err(Error::TooFewPoints {
            needed: 4 * config.min_points,
            got: profile.len(),
        });
    }

    let mut rise = T::zero();
    let mut running_min = profile[0].1;
    for &(_, y) in &profile {
        running_min = running_min.min(y);
        rise = rise.max(y - running_min);
    }

    let single_smooth = fit_line(&profile);
    let margin = config.min_points;
    let mut best: Option<(T, T, T, T)> = None; // (s1, s2, rms, break)
    for &(b, _) in &profile[margin..profile.len() - margin] {
        if let Some((s1, s2, rms)) = fit_hinge(&profile, b) {
            if best.map_or(true, |(_, _, r, _)| rms < r) {
                best = Some((s1, s2, rms, b));
            }
        }
    }
    let Some((s1, s2, rms_two, m_break)) = best else {
        return Ok(NonexponentialReport {
            is_nonexponential: rise >= rf(PROFILE_RISE_THRESHOLD),
            fit: single,
            profile_rise: rise,
        });
    };

    let residual_gain_ok = single_smooth.rms >= rf::<T>(TWO_SEGMENT_RESIDUAL_GAIN) * rms_two;
    // Inner decay slower than outer: with negative slopes this is
    // s2/s1 >= ratio; a flat or rising inner segment counts as slower.
    let ratio_ok = s2 < T::zero()
        && (s1 >= T::zero() || s2 / s1 >= rf::<T>(TWO_SEGMENT_LENGTH_RATIO));

    let l_inner = if s1 < T::zero() { -T::one() / s1 } else { T::infinity() };
    let l_outer = if s2 < T::zero() { -T::one() / s2 } else { T::infinity() };
    let fit = LineshapeFit {
        two_scale: Some(TwoScale {
            l_inner,
            l_outer,
            m_break: m_break.to_f64().unwrap() as i64,
            residual: rms_two,
        }),
        ..single
    };
    Ok(NonexponentialReport {
        is_nonexponential: rise >= rf(PROFILE_RISE_THRESHOLD)
            || (residual_gain_ok && ratio_ok),
        fit,
        profile_rise: rise,
    })
}

/// Saturation verdict: ratio of late- to early-window mean energy.
#[derive(Clone, Copy, Debug)]
pub struct SaturationReport<T> {
    pub saturated: bool,
    pub ratio: T,
}

/// Energy-ratio band treated as saturated.
pub const SATURATION_BAND: (f64, f64) = (0.8, 1.25);

fn window_mean<T: Real>(energies: &[EnergyRecord<T>], window: (u64, u64)) -> Result<T> {
    let mut sum = T::zero();
    let mut count = 0usize;
    for record in energies {
        if record.kick_index >= window.0 && record.kick_index <= window.1 {
            sum += record.e_tilde;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InvalidParams(format!(
            "no energy records inside window [{}, {}]",
            window.0, window.1
        )));
    }
    Ok(sum / rf::<T>(count as f64))
}

/// Compares mean energies over two kick windows; a ratio inside
/// [0.8, 1.25] counts as saturated.
pub fn saturation_check<T: Real>(
    energies: &[EnergyRecord<T>],
    window_a: (u64, u64),
    window_b: (u64, u64),
) -> Result<SaturationReport<T>> {
    let a = window_mean(energies, window_a)?;
    let b = window_mean(energies, window_b)?;
    let ratio = b / a;
    Ok(SaturationReport {
        saturated: ratio >= rf(SATURATION_BAND.0) && ratio <= rf(SATURATION_BAND.1),
        ratio,
    })
}
