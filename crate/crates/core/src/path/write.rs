use std::io::{self, Write};

use crate::wiener::BridgeKind;

use super::bundle::PathBundle;
use super::plan::Process;

/// Writes the header `[lead,]t,X,X_av,X_ir,X_st` with `X` = `W` or `U`.
pub fn write_paths_header<W: Write + ?Sized>(out: &mut W, process: &Process, lead: Option<&str>) -> io::Result<()> {
    let sym = match process {
        Process::Ou(_) => "U",
        Process::Wiener => "W",
    };
    if let Some(lead) = lead {
        write!(out, "{lead},")?;
    }
    writeln!(out, "t,{sym},{sym}_av,{sym}_ir,{sym}_st")
}

/// Writes one row per grid point of `bundle`, prefixed by `lead` when
/// given. Values use 17 significant digits.
pub fn write_paths_rows<W: Write + ?Sized>(out: &mut W, bundle: &PathBundle, lead: Option<&str>) -> io::Result<()> {
    let t = bundle.times();
    for k in 0..t.len() {
        if let Some(lead) = lead {
            write!(out, "{lead},")?;
        }
        write!(out, "{:.16e},{:.16e}", t[k], bundle.process()[k])?;
        for kind in BridgeKind::ALL {
            write!(out, ",{:.16e}", bundle.bridge(kind)[k])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes the bundles in order under one header, with a `replicate` column
/// holding the position in `bundles` when `with_replicate` is set.
pub fn write_paths_csv<W: Write>(out: &mut W, bundles: &[PathBundle], with_replicate: bool) -> io::Result<()> {
    let process = bundles.first().map(|b| b.plan().process()).unwrap_or(Process::Wiener);
    write_paths_header(out, &process, with_replicate.then_some("replicate"))?;
    for (r, b) in bundles.iter().enumerate() {
        let lead = with_replicate.then(|| r.to_string());
        write_paths_rows(out, b, lead.as_deref())?;
    }
    Ok(())
}
