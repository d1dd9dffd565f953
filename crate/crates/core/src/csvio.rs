//! Deterministic CSV artifacts: fixed float formatting, optional
//! config-hash header line, and the fixture-cache schemas
//! (`r,U` profiles and `mode,index,eigenvalue` spectra keyed by
//! (n, p, grid_size)).

use crate::error::{Error, Result};
use crate::radial::{ModeSpectrum, ProblemParams, RadialProfile, ShootingDiagnostics};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

/// Deterministic float formatting shared by every artifact.
pub fn fmt(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v:.12e}")
    }
}

/// Write a CSV with an optional `# config_hash=...` first line.
pub fn write_csv<P: AsRef<Path>>(
    path: P,
    config_hash: Option<&str>,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    if let Some(dir) = path.as_ref().parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    if let Some(h) = config_hash {
        writeln!(f, "# config_hash={h}")?;
    }
    writeln!(f, "{}", header.join(","))?;
    for row in rows {
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

/// Read a CSV written by [`write_csv`]; returns (header, rows), skipping
/// `#` comment lines.
pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for line in f.lines() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let cells: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if header.is_empty() {
            header = cells;
        } else {
            rows.push(cells);
        }
    }
    Ok((header, rows))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad float {s:?}")))
}

/// Canonical exponent tag for cache filenames (trailing zeros trimmed).
fn p_tag(p: f64) -> String {
    let s = format!("{p}");
    s.replace('.', "_")
}

fn profile_path(dir: &Path, params: ProblemParams, grid_size: usize) -> PathBuf {
    dir.join(format!("ground_state_n{}_p{}_N{}.csv", params.n, p_tag(params.p), grid_size))
}

fn spectrum_path(dir: &Path, params: ProblemParams, grid_size: usize) -> PathBuf {
    dir.join(format!("spectrum_n{}_p{}_N{}.csv", params.n, p_tag(params.p), grid_size))
}

/// Persist a profile under the `r,U` schema.
pub fn save_profile(dir: &Path, profile: &RadialProfile) -> Result<PathBuf> {
    let grid_size = profile.grid.len() - 1;
    let path = profile_path(dir, profile.params, grid_size);
    let rows: Vec<Vec<String>> = profile
        .grid
        .iter()
        .zip(&profile.values)
        .map(|(r, u)| vec![fmt(*r), fmt(*u)])
        .collect();
    write_csv(&path, None, &["r", "U"], &rows)?;
    Ok(path)
}

/// Load a cached profile if present (the shooting diagnostics are not
/// persisted; the cached values carry the converged collocation state).
pub fn load_profile(
    dir: &Path,
    params: ProblemParams,
    grid_size: usize,
) -> Result<Option<RadialProfile>> {
    let path = profile_path(dir, params, grid_size);
    if !path.exists() {
        return Ok(None);
    }
    let (header, rows) = read_csv(&path)?;
    if header != ["r", "U"] {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut grid = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for row in &rows {
        grid.push(parse_f64(&row[0])?);
        values.push(parse_f64(&row[1])?);
    }
    let n = grid.len() - 1;
    let h = grid[1] - grid[0];
    let slope = (3.0 * values[n] - 4.0 * values[n - 1] + values[n - 2]) / (2.0 * h);
    Ok(Some(RadialProfile {
        grid,
        values,
        derivative_at_boundary: slope,
        params,
        shooting: ShootingDiagnostics {
            bracket: (0.0, 0.0),
            bracket_monotone: true,
            bisections: 0,
            newton_iterations: 0,
            collocation_residual: f64::NAN,
        },
    }))
}

/// Persist mode spectra under the `mode,index,eigenvalue` schema.
pub fn save_spectrum(
    dir: &Path,
    params: ProblemParams,
    grid_size: usize,
    modes: &[ModeSpectrum],
) -> Result<PathBuf> {
    let path = spectrum_path(dir, params, grid_size);
    let mut rows = Vec::new();
    for m in modes {
        for (j, v) in m.eigenvalues.iter().enumerate() {
            rows.push(vec![m.angular_mode.to_string(), j.to_string(), fmt(*v)]);
        }
    }
    write_csv(&path, None, &["mode", "index", "eigenvalue"], &rows)?;
    Ok(path)
}

/// Load cached eigenvalues as (mode, index, value) triples.
pub fn load_spectrum(
    dir: &Path,
    params: ProblemParams,
    grid_size: usize,
) -> Result<Option<Vec<(usize, usize, f64)>>> {
    let path = spectrum_path(dir, params, grid_size);
    if !path.exists() {
        return Ok(None);
    }
    let (header, rows) = read_csv(&path)?;
    if header != ["mode", "index", "eigenvalue"] {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::with_capacity(rows.len());
    for row in &rows {
        let mode = row[0].parse::<usize>().map_err(|_| Error::Parse("bad mode".into()))?;
        let idx = row[1].parse::<usize>().map_err(|_| Error::Parse("bad index".into()))?;
        out.push((mode, idx, parse_f64(&row[2])?));
    }
    Ok(Some(out))
}

/// Read a closed-curve sample file with header `t,x1,...,xm`.
pub fn read_curve_csv<P: AsRef<Path>>(path: P) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let (header, rows) = read_csv(path)?;
    if header.is_empty() || header[0] != "t" || header.len() < 3 {
        return Err(Error::Parse(format!(
            "curve CSV needs header t,x1,...,xm with m >= 2, got {header:?}"
        )));
    }
    let m = header.len() - 1;
    let mut ts = Vec::with_capacity(rows.len());
    let mut pts = Vec::with_capacity(rows.len());
    for row in &rows {
        if row.len() != m + 1 {
            return Err(Error::Parse("curve CSV row width mismatch".into()));
        }
        ts.push(parse_f64(&row[0])?);
        let mut p = Vec::with_capacity(m);
        for cell in &row[1..] {
            p.push(parse_f64(cell)?);
        }
        pts.push(p);
    }
    Ok((ts, pts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::solve_ground_state;

    #[test]
    fn profile_cache_roundtrip() {
        let dir = std::env::temp_dir().join("tube_elliptic_cache_test");
        let _ = std::fs::remove_dir_all(&dir);
        let prm = ProblemParams::new(1, 3.0, 1).unwrap();
        let prof = solve_ground_state(prm, 1e-10, 64).unwrap();
        save_profile(&dir, &prof).unwrap();
        let loaded = load_profile(&dir, prm, 64).unwrap().unwrap();
        for (a, b) in prof.values.iter().zip(&loaded.values) {
            assert!((a - b).abs() < 1e-11 * (1.0 + a.abs()));
        }
        assert!(load_profile(&dir, prm, 128).unwrap().is_none());
        let modes = crate::radial::linearized_spectrum(&prof, 1, 3).unwrap();
        save_spectrum(&dir, prm, 64, &modes).unwrap();
        let cached = load_spectrum(&dir, prm, 64).unwrap().unwrap();
        assert_eq!(cached.len(), 6);
        assert_eq!(cached[0].0, 0);
        assert!((cached[0].2 - modes[0].eigenvalues[0]).abs() < 1e-9);
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn deterministic_formatting() {
        assert_eq!(fmt(3.0), "3.0");
        assert_eq!(fmt(0.1), format!("{:.12e}", 0.1));
        assert_eq!(fmt(-2.0), "-2.0");
    }
}
