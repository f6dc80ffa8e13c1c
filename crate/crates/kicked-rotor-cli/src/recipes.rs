//! Built-in experiment presets (`fig1` ... `fig7`).
//!
//! Each recipe runs a short list of configured experiments and drops
//! plot-ready CSV files (plus an optional gnuplot script) into the output
//! directory. The `ci` scale finishes on a laptop in seconds to a couple of
//! minutes; `paper` runs the full production scale.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::config::{ClassicalAction, ExperimentConfig, Mode};
use crate::runs::{execute, RunReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Ci,
    Paper,
}

impl std::str::FromStr for Scale {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ci" => Ok(Scale::Ci),
            "paper" => Ok(Scale::Paper),
            other => bail!("scale must be 'ci' or 'paper', got '{other}'"),
        }
    }
}

fn base(out: &Path, prefix: &str) -> ExperimentConfig {
    ExperimentConfig {
        out: out.to_path_buf(),
        prefix: prefix.to_string(),
        ..ExperimentConfig::default()
    }
}

pub fn run_recipe(name: &str, scale: Scale, out: &Path, gnuplot: bool) -> Result<RunReport> {
    let mut report = RunReport { outputs: Vec::new(), warnings: Vec::new() };
    let mut merge = |r: RunReport| {
        report.outputs.extend(r.outputs);
        report.warnings.extend(r.warnings);
    };

    match name {
        // Momentum lineshapes and energy absorption, plain vs modified
        // rotor at k=4, tau=2, M=50.
        "fig1" => {
            let kicks = match scale {
                Scale::Ci => 20_000,
                Scale::Paper => 400_000,
            };
            let mut kr = base(out, "fig1_kr_");
            kr.mode = Mode::Evolve;
            kr.k = 4.0;
            kr.tau = 2.0;
            kr.kicks = kicks;
            kr.mmax = 2048;
            merge(execute(&kr)?);

            let mut mkr = base(out, "fig1_mkr_");
            mkr.mode = Mode::Evolve;
            mkr.k = 4.0;
            mkr.tau = 2.0;
            mkr.m_period = 50;
            mkr.variant = "mkr_sign_flip".into();
            mkr.kicks = kicks;
            // The broadened lineshape needs the larger basis to keep the
            // grid edges below the overflow threshold.
            mkr.mmax = match scale {
                Scale::Ci => 4096,
                Scale::Paper => 8192,
            };
            merge(execute(&mkr)?);

            if gnuplot {
                let path = out.join("fig1.gp");
                write_gnuplot(&path, &[
                    "set logscale y",
                    "set xlabel 'm'; set ylabel 'P(m)'",
                    "plot 'fig1_kr_pm_final.csv' skip 2 using 1:2 with lines title 'KR', \\",
                    "     'fig1_mkr_pm_final.csv' skip 2 using 1:2 with lines title 'MKR M=50'",
                    "pause -1",
                    "unset logscale",
                    "set xlabel 'kick'; set ylabel 'E'",
                    "plot 'fig1_kr_energy.csv' skip 2 using 1:2 with lines title 'KR', \\",
                    "     'fig1_mkr_energy.csv' skip 2 using 1:2 with lines title 'MKR M=50'",
                    "pause -1",
                ])?;
                report.outputs.push(path);
            }
        }

        // Average eigenvector entropy and band width of the M-kick
        // propagator against M.
        "fig2" => {
            let mut config = base(out, "fig2_");
            config.mode = Mode::Spectrum;
            config.k = 4.0;
            config.tau = 2.0;
            config.variant = "mkr_sign_flip".into();
            match scale {
                Scale::Ci => {
                    config.ambient = 4096;
                    config.d = 1024;
                    config.m_list = vec![2, 5, 10, 20, 50, 100, 200];
                }
                Scale::Paper => {
                    config.ambient = 16_384;
                    config.d = 2700;
                    config.m_list =
                        vec![2, 3, 5, 7, 10, 15, 20, 30, 50, 70, 100, 150, 200, 300, 400];
                }
            }
            merge(execute(&config)?);
            if gnuplot {
                let path = out.join("fig2.gp");
                write_gnuplot(&path, &[
                    "set logscale xy",
                    "set xlabel 'M'",
                    "plot 'fig2_entropy.csv' skip 2 using 1:2 with linespoints title 'S(M)'",
                    "pause -1",
                    "plot 'fig2_bandwidth.csv' skip 2 using 1:2 with linespoints title 'b(M)'",
                    "pause -1",
                ])?;
                report.outputs.push(path);
            }
        }

        // Classical phase portraits at kappa=5 (plain map vs M=2 modulated
        // map) and kappa=10.
        "fig3" | "fig4" => {
            let kappa = if name == "fig3" { 5.0 } else { 10.0 };
            let (n_traj, kicks) = match scale {
                Scale::Ci => (400, 300),
                Scale::Paper => (1024, 1500),
            };
            for (m, tag) in [(1u32, "kr"), (2, "mkr")] {
                let mut config = base(out, &format!("{name}_{tag}_"));
                config.mode = Mode::Classical;
                config.action = ClassicalAction::Section;
                config.kappa = Some(kappa);
                config.m_period = m;
                config.n_traj = n_traj;
                config.kicks = kicks;
                merge(execute(&config)?);
            }
            if gnuplot {
                let path = out.join(format!("{name}.gp"));
                write_gnuplot(&path, &[
                    "set xlabel 'theta'; set ylabel 'L mod 2pi'",
                    "set pointsize 0.1",
                    &format!("plot '{name}_kr_section.csv' skip 2 using 1:2 with dots title 'plain'"),
                    "pause -1",
                    &format!("plot '{name}_mkr_section.csv' skip 2 using 1:2 with dots title 'M=2'"),
                    "pause -1",
                ])?;
                report.outputs.push(path);
            }
        }

        // Quantum energy absorption at tau=1 for k=5 (fig5) and k=10 (fig6):
        // plain rotor vs M=2 and M=3 modulation.
        "fig5" | "fig6" => {
            let k = if name == "fig5" { 5.0 } else { 10.0 };
            for (m, variant, tag) in [
                (1u32, "plain_kr", "kr"),
                (2, "mkr_sign_flip", "m2"),
                (3, "mkr_sign_flip", "m3"),
            ] {
                let mut config = base(out, &format!("{name}_{tag}_"));
                config.mode = Mode::Evolve;
                config.k = k;
                config.tau = 1.0;
                config.m_period = m;
                config.variant = variant.into();
                config.kicks = 1500;
                config.record_every = 5;
                config.mmax = 8192;
                merge(execute(&config)?);
            }
            if gnuplot {
                let path = out.join(format!("{name}.gp"));
                write_gnuplot(&path, &[
                    "set xlabel 'kick'; set ylabel 'E'",
                    &format!("plot '{name}_kr_energy.csv' skip 2 using 1:2 with lines title 'KR', \\"),
                    &format!("     '{name}_m2_energy.csv' skip 2 using 1:2 with lines title 'MKR M=2', \\"),
                    &format!("     '{name}_m3_energy.csv' skip 2 using 1:2 with lines title 'MKR M=3'"),
                    "pause -1",
                ])?;
                report.outputs.push(path);
            }
        }

        // Nonexponential lineshapes of the M=2 modified rotor after 8000
        // kicks, with the matching plain-rotor lineshapes for contrast.
        "fig7" => {
            let panels = [
                ('a', 1.0, 5.0),
                ('b', 2.0, 5.0),
                ('c', 1.0, 5.7),
                ('d', 2.0, 6.0),
            ];
            for (panel, tau, k) in panels {
                for (m, variant, tag) in
                    [(1u32, "plain_kr", "kr"), (2, "mkr_sign_flip", "mkr")]
                {
                    let mut config = base(out, &format!("fig7{panel}_{tag}_"));
                    config.mode = Mode::Evolve;
                    config.k = k;
                    config.tau = tau;
                    config.m_period = m;
                    config.variant = variant.into();
                    config.kicks = 8000;
                    config.mmax = 4096;
                    config.average_window = 1000;
                    merge(execute(&config)?);
                }
            }
            if gnuplot {
                let path = out.join("fig7.gp");
                let mut lines = vec![
                    "set logscale y".to_string(),
                    "set xlabel 'm'; set ylabel 'P(m)'".to_string(),
                ];
                for (panel, tau, k) in panels {
                    lines.push(format!(
                        "plot 'fig7{panel}_mkr_pm_final.csv' skip 2 using 1:2 with lines title 'MKR tau={tau} k={k}', \\"
                    ));
                    lines.push(format!(
                        "     'fig7{panel}_kr_pm_final.csv' skip 2 using 1:2 with lines title 'KR'"
                    ));
                    lines.push("pause -1".to_string());
                }
                let refs: Vec<&str> = lines.iter().map(|s| s.as_str()).collect();
                write_gnuplot(&path, &refs)?;
                report.outputs.push(path);
            }
        }

        other => bail!("unknown recipe '{other}' (expected fig1..fig7)"),
    }
    Ok(report)
}

fn write_gnuplot(path: &PathBuf, lines: &[&str]) -> Result<()> {
    let mut w = std::fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    writeln!(w, "# gnuplot script; run from the directory containing the CSVs")?;
    for line in lines {
        writeln!(w, "{line}")?;
    }
    Ok(())
}
