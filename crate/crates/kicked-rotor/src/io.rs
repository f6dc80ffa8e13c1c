//! Plot-ready CSV emission and parsing.
//!
//! Every file starts with a `# key=value ...` metadata line echoing the
//! rotor parameters (and any extra run metadata), followed by a column
//! header. Values use shortest round-trip decimal formatting, LF endings.

use std::io::{BufRead, Write};

use crate::analysis::{LineshapeFit, NonexponentialReport};
use crate::error::{Error, Result};
use crate::params::{fmt_scalar, RotorParams};
use crate::real::Real;
use crate::state::{DistributionRecord, EnergyRecord};

/// `# k=... tau=... M=... variant=... kappa=...` plus extras.
fn meta_line<T: Real>(params: &RotorParams<T>, extra: &[(&str, String)]) -> String {
    let mut line = format!(
        "# k={} tau={} M={} variant={} kappa={}",
        fmt_scalar(params.k),
        fmt_scalar(params.tau),
        params.m_period,
        params.variant,
        fmt_scalar(params.kappa()),
    );
    for (key, value) in extra {
        line.push_str(&format!(" {key}={value}"));
    }
    line
}

/// Momentum distribution as `m,p` rows.
pub fn write_distribution_csv<T: Real, W: Write>(
    w: &mut W,
    dist: &DistributionRecord<T>,
    extra: &[(&str, String)],
) -> Result<()> {
    let mut extra = extra.to_vec();
    extra.push(("kick", dist.kick_index.to_string()));
    extra.push(("m_max", dist.m_max.to_string()));
    writeln!(w, "{}", meta_line(&dist.params, &extra))?;
    writeln!(w, "m,p")?;
    for (m, p) in dist.iter() {
        writeln!(w, "{},{}", m, fmt_scalar(p))?;
    }
    Ok(())
}

/// Reads a distribution written by [`write_distribution_csv`].
pub fn read_distribution_csv<T: Real, R: BufRead>(r: R) -> Result<DistributionRecord<T>> {
    let mut params: Option<RotorParams<T>> = None;
    let mut kick_index = 0u64;
    let mut rows: Vec<(i64, T)> = Vec::new();
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let entries: Vec<(&str, &str)> = meta
                .split_whitespace()
                .filter_map(|item| item.split_once('='))
                .collect();
            for (key, value) in &entries {
                if *key == "kick" {
                    kick_index = value
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad kick count '{value}'")))?;
                }
            }
            params = Some(RotorParams::from_kv_entries(entries)?);
            continue;
        }
        if line.starts_with(|c: char| c.is_alphabetic()) {
            continue; // column header
        }
        let (m_str, p_str) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("expected 'm,p' row, got '{line}'")))?;
        let m: i64 = m_str
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad m value '{m_str}'")))?;
        rows.push((m, crate::params::parse_scalar(p_str)?));
    }
    let params = params.ok_or_else(|| Error::Parse("missing metadata line".into()))?;
    if rows.is_empty() {
        return Err(Error::Parse("no data rows".into()));
    }
    rows.sort_by_key(|r| r.0);
    let m_max = rows
        .iter()
        .map(|r| if r.0 < 0 { -r.0 } else { r.0 + 1 })
        .max()
        .unwrap() as usize;
    let mut p = vec![T::zero(); 2 * m_max];
    for (m, value) in rows {
        p[(m + m_max as i64) as usize] = value;
    }
    Ok(DistributionRecord { p, m_max, kick_index, params })
}

/// Energy time series as `kick,e_tilde` rows.
pub fn write_energy_csv<T: Real, W: Write>(
    w: &mut W,
    records: &[EnergyRecord<T>],
    params: &RotorParams<T>,
    extra: &[(&str, String)],
) -> Result<()> {
    writeln!(w, "{}", meta_line(params, extra))?;
    writeln!(w, "kick,e_tilde")?;
    for record in records {
        writeln!(w, "{},{}", record.kick_index, fmt_scalar(record.e_tilde))?;
    }
    Ok(())
}

/// Classical diffusion curve as `kick,mean_energy` rows.
pub fn write_diffusion_csv<T: Real, W: Write>(
    w: &mut W,
    records: &[EnergyRecord<T>],
    params: &RotorParams<T>,
    extra: &[(&str, String)],
) -> Result<()> {
    writeln!(w, "{}", meta_line(params, extra))?;
    writeln!(w, "kick,mean_energy")?;
    for record in records {
        writeln!(w, "{},{}", record.kick_index, fmt_scalar(record.e_tilde))?;
    }
    Ok(())
}

/// Phase-space section points as `theta,l` rows.
pub fn write_section_csv<T: Real, W: Write>(
    w: &mut W,
    points: &[(T, T)],
    params: &RotorParams<T>,
    extra: &[(&str, String)],
) -> Result<()> {
    writeln!(w, "{}", meta_line(params, extra))?;
    writeln!(w, "theta,l")?;
    for &(theta, l) in points {
        writeln!(w, "{},{}", fmt_scalar(theta), fmt_scalar(l))?;
    }
    Ok(())
}

/// (M, value) spectrum diagnostics, e.g. entropy or band width vs M.
pub fn write_spectrum_csv<T: Real, W: Write>(
    w: &mut W,
    rows: &[(u32, T)],
    value_name: &str,
    params: &RotorParams<T>,
    extra: &[(&str, String)],
) -> Result<()> {
    writeln!(w, "{}", meta_line(params, extra))?;
    writeln!(w, "m_period,{value_name}")?;
    for &(m, value) in rows {
        writeln!(w, "{},{}", m, fmt_scalar(value))?;
    }
    Ok(())
}

/// Magnitudes of selected matrix rows as `m2,abs` blocks (band profiling).
pub fn write_row_profile_csv<T: Real, W: Write>(
    w: &mut W,
    matrix: &crate::floquet::FloquetMatrix<T>,
    rows: &[i64],
    extra: &[(&str, String)],
) -> Result<()> {
    writeln!(w, "{}", meta_line(matrix.params(), extra))?;
    writeln!(w, "m1,m2,abs")?;
    let half = (matrix.dim() / 2) as i64;
    for &m1 in rows {
        for m2 in -half..half {
            writeln!(
                w,
                "{},{},{}",
                m1,
                m2,
                fmt_scalar(matrix.element(m1, m2).norm())
            )?;
        }
    }
    Ok(())
}

/// Header for fit-summary tables.
pub const FIT_CSV_HEADER: &str = "k,tau,M,kicks,l,l_inner,l_outer,residual,is_nonexponential";

/// One fit-summary row matching [`FIT_CSV_HEADER`].
pub fn write_fit_row<T: Real, W: Write>(
    w: &mut W,
    params: &RotorParams<T>,
    kicks: u64,
    fit: &LineshapeFit<T>,
    report: Option<&NonexponentialReport<T>>,
) -> Result<()> {
    let (l_inner, l_outer) = report
        .and_then(|r| r.fit.two_scale)
        .map(|t| (fmt_scalar(t.l_inner), fmt_scalar(t.l_outer)))
        .unwrap_or_else(|| (String::from(""), String::from("")));
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{}",
        fmt_scalar(params.k),
        fmt_scalar(params.tau),
        params.m_period,
        kicks,
        fmt_scalar(fit.l),
        l_inner,
        l_outer,
        fmt_scalar(fit.residual),
        report.map_or(false, |r| r.is_nonexponential),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Variant;
    use crate::quantum::{evolve, momentum_distribution, PropagationSchedule};
    use crate::state::QuantumState;

    #[test]
    fn distribution_csv_round_trips() {
        let params = RotorParams::new(4.0, 2.0, 50, Variant::MkrSignFlip).unwrap();
        let run = evolve(
            &QuantumState::<f64>::ground(32),
            &params,
            &PropagationSchedule::final_only(5),
        )
        .unwrap();
        let dist = momentum_distribution(&run.final_state, &params);

        let mut buffer = Vec::new();
        write_distribution_csv(&mut buffer, &dist, &[]).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        assert!(text.starts_with("# k=4 tau=2 M=50 variant=mkr_sign_flip kappa=8"));
        assert!(text.contains("\nm,p\n"));

        let back: DistributionRecord<f64> =
            read_distribution_csv(text.as_bytes()).unwrap();
        assert_eq!(back.m_max, dist.m_max);
        assert_eq!(back.kick_index, 5);
        assert_eq!(back.params, params);
        for (a, b) in back.p.iter().zip(&dist.p) {
            assert_eq!(a.to_bits(), b.to_bits(), "CSV must round-trip bit-exactly");
        }
    }

    #[test]
    fn energy_csv_shape() {
        let params = RotorParams::plain(1.0, 1.0).unwrap();
        let records = vec![
            EnergyRecord { kick_index: 0, e_tilde: 0.0f64 },
            EnergyRecord { kick_index: 10, e_tilde: 1.5 },
        ];
        let mut buffer = Vec::new();
        write_energy_csv(&mut buffer, &records, &params, &[("note", "x".into())]).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "kick,e_tilde");
        assert_eq!(lines[2], "0,0");
        assert_eq!(lines[3], "10,1.5");
        assert!(lines[0].ends_with("note=x"));
    }

    #[test]
    fn unreadable_distribution_is_a_parse_error() {
        let bad = "m,p\n1,0.5\n";
        assert!(read_distribution_csv::<f64, _>(bad.as_bytes()).is_err());
    }
}
