//! Fixed-schema CSV emitters. Floats use shortest round-trip formatting;
//! empty profile bins leave the value cell blank.

use std::io::{self, Write};

use super::fit::Fit;
use super::profile::BandProfile;

/// `omega,value,count`
pub fn write_profile_csv<W: Write>(mut w: W, p: &BandProfile) -> io::Result<()> {
    writeln!(w, "omega,value,count")?;
    for ((om, v), c) in p.omegas.iter().zip(&p.values).zip(&p.counts) {
        match v {
            Some(v) => writeln!(w, "{om},{v},{c}")?,
            None => writeln!(w, "{om},,{c}")?,
        }
    }
    Ok(())
}

/// `x,y,fit`
pub fn write_scaling_csv<W: Write>(mut w: W, xs: &[f64], ys: &[f64], fit: &Fit) -> io::Result<()> {
    writeln!(w, "x,y,fit")?;
    for (x, y) in xs.iter().zip(ys) {
        writeln!(w, "{x},{y},{}", fit.predict(*x))?;
    }
    Ok(())
}

/// `index,energy`
pub fn write_spectrum_csv<W: Write>(mut w: W, levels: &[f64]) -> io::Result<()> {
    writeln!(w, "index,energy")?;
    for (i, e) in levels.iter().enumerate() {
        writeln!(w, "{i},{e}")?;
    }
    Ok(())
}
