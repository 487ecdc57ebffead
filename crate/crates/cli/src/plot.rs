//! gnuplot scripts for the CSV schemas the pipelines write.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schema {
    /// `omega,value,count`
    Profile,
    /// `omega,value,stderr`
    Semiclassical,
    /// `x,y,fit`
    Scaling,
    /// `index,energy`
    Spectrum,
}

impl Schema {
    pub fn from_header(header: &str) -> Option<Self> {
        match header.trim() {
            "omega,value,count" => Some(Schema::Profile),
            "omega,value,stderr" => Some(Schema::Semiclassical),
            "x,y,fit" => Some(Schema::Scaling),
            "index,energy" => Some(Schema::Spectrum),
            _ => None,
        }
    }
}

/// Axis labels for a scaling plot.
#[derive(Clone, Debug)]
pub struct Labels {
    pub x: String,
    pub y: String,
    pub log: bool,
}

fn sniff(path: &Path) -> Result<Schema> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let schema =
        Schema::from_header(header).with_context(|| format!("{}: unknown CSV schema `{header}`", path.display()))?;
    if !lines.any(|l| !l.trim().is_empty()) {
        bail!("{}: no data rows", path.display());
    }
    Ok(schema)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Script for one or more CSVs plotted together. Profiles and semiclassical
/// predictions overlay on shared axes with a log-y inset; scaling files get
/// their fit line. File references are relative to the script's directory.
pub fn emit_plot_script(csvs: &[&Path], labels: Option<&Labels>) -> Result<String> {
    if csvs.is_empty() {
        bail!("no CSV files given");
    }
    let schemas: Vec<Schema> = csvs.iter().map(|p| sniff(p)).collect::<Result<_>>()?;
    let names: Vec<String> = csvs.iter().map(|p| file_name(p)).collect();
    let mut s = String::from("set datafile separator ','\nset key top right\n");
    let band = |k: Schema| matches!(k, Schema::Profile | Schema::Semiclassical);
    if schemas.iter().all(|&k| band(k)) {
        let series: Vec<String> = schemas
            .iter()
            .zip(&names)
            .map(|(k, n)| match k {
                Schema::Profile => format!("'{n}' skip 1 using 1:2 with points pt 7 ps 0.6 title 'quantum'"),
                _ => format!("'{n}' skip 1 using 1:2 with lines lw 2 title 'semiclassical'"),
            })
            .collect();
        let plot = series.join(", \\\n     ");
        s.push_str("set multiplot\nset xlabel 'omega'\nset ylabel '|O_ij|^2'\n");
        writeln!(s, "plot {plot}").unwrap();
        s.push_str("set origin 0.55,0.5\nset size 0.42,0.42\nset logscale y\nunset xlabel\nunset ylabel\nunset key\n");
        writeln!(s, "plot {plot}").unwrap();
        s.push_str("unset multiplot\n");
        return Ok(s);
    }
    if schemas.len() != 1 {
        bail!("only profile and semiclassical files can share a plot");
    }
    let n = &names[0];
    match schemas[0] {
        Schema::Scaling => {
            let l = labels.cloned().unwrap_or(Labels { x: "x".into(), y: "y".into(), log: false });
            writeln!(s, "set xlabel '{}'\nset ylabel '{}'", l.x, l.y).unwrap();
            if l.log {
                s.push_str("set logscale xy\n");
            }
            writeln!(s, "plot '{n}' skip 1 using 1:2 with points pt 7 title 'data', \\\n     '{n}' skip 1 using 1:3 with lines lw 2 title 'fit'")
                .unwrap();
        }
        Schema::Spectrum => {
            writeln!(s, "set xlabel 'index'\nset ylabel 'energy'\nplot '{n}' skip 1 using 1:2 with lines title 'levels'").unwrap();
        }
        _ => unreachable!("band schemas handled above"),
    }
    Ok(s)
}
