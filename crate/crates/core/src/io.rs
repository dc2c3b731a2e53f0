//! CSV reports, PGM snapshots and grid dumps. Every writer has a reader that
//! recovers the written values exactly (floats use 17 significant digits).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::harness::scenario::{Cut, Method};
use crate::harness::signal::Seismogram;
use crate::harness::study::{ConvergenceReport, CutErrorRow, Slope, SweepRow, TimingRow};

type Parsed<T> = std::result::Result<T, String>;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str, line: usize) -> Parsed<f64> {
    s.trim().parse().map_err(|_| format!("line {line}: bad number `{s}`"))
}

fn parse_usize(s: &str, line: usize) -> Parsed<usize> {
    s.trim().parse().map_err(|_| format!("line {line}: bad integer `{s}`"))
}

fn parse_method(s: &str, line: usize) -> Parsed<Method> {
    s.parse().map_err(|_| format!("line {line}: unknown method `{s}`"))
}

fn expect_header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, want: &str) -> Parsed<()> {
    match lines.next() {
        Some((_, h)) if h.trim() == want => Ok(()),
        Some((n, h)) => Err(format!("line {n}: expected header `{want}`, found `{h}`")),
        None => Err("empty file".into()),
    }
}

fn fields(line: &str, n: usize, at: usize) -> Parsed<Vec<&str>> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != n {
        return Err(format!("line {at}: expected {n} columns, found {}", f.len()));
    }
    Ok(f)
}

fn numbered(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(k, l)| (k + 1, l)).filter(|(_, l)| !l.trim().is_empty())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn read_parsed<T>(path: &Path, parse: impl FnOnce(&str) -> Parsed<T>) -> Result<T> {
    let text = fs::read_to_string(path)?;
    parse(&text).map_err(|msg| Error::Parse { path: path.to_path_buf(), msg })
}

// ---------------------------------------------------------------- seismogram

/// Header `t,rx_<x1>,...`, one row per recorded time.
pub fn seismogram_csv(s: &Seismogram) -> String {
    let mut out = String::from("t");
    for x in &s.xs {
        write!(out, ",rx_{}", num(*x)).unwrap();
    }
    out.push('\n');
    for (k, t) in s.times.iter().enumerate() {
        out.push_str(&num(*t));
        for tr in &s.traces {
            out.push(',');
            out.push_str(&num(tr[k]));
        }
        out.push('\n');
    }
    out
}

pub fn parse_seismogram_csv(text: &str) -> Parsed<Seismogram> {
    let mut lines = numbered(text);
    let (_, header) = lines.next().ok_or("empty file")?;
    let mut cols = header.trim().split(',');
    if cols.next() != Some("t") {
        return Err("line 1: first column must be `t`".into());
    }
    let xs = cols
        .map(|c| c.strip_prefix("rx_").ok_or(format!("line 1: bad receiver column `{c}`")).and_then(|v| parse_f64(v, 1)))
        .collect::<Parsed<Vec<f64>>>()?;
    let mut s = Seismogram::new(xs);
    let mut row = vec![0.0; s.xs.len()];
    for (n, line) in lines {
        let f = fields(line, row.len() + 1, n)?;
        for (r, v) in row.iter_mut().zip(&f[1..]) {
            *r = parse_f64(v, n)?;
        }
        s.push(parse_f64(f[0], n)?, &row);
    }
    Ok(s)
}

pub fn write_seismogram(path: &Path, s: &Seismogram) -> Result<()> {
    write_text(path, &seismogram_csv(s))
}

pub fn read_seismogram(path: &Path) -> Result<Seismogram> {
    read_parsed(path, parse_seismogram_csv)
}

// --------------------------------------------------------------- convergence

const CONVERGENCE_HEADER: &str = "method,h,max_norm,one_norm";

/// Error rows followed by one `# slope,<method>,<max>,<one>` line per method.
pub fn convergence_csv(r: &ConvergenceReport) -> String {
    let mut out = format!("{CONVERGENCE_HEADER}\n");
    for row in &r.rows {
        writeln!(out, "{},{},{},{}", row.method, num(row.h), num(row.max_norm), num(row.one_norm)).unwrap();
    }
    for s in &r.slopes {
        writeln!(out, "# slope,{},{},{}", s.method, num(s.max_norm), num(s.one_norm)).unwrap();
    }
    out
}

pub fn parse_convergence_csv(text: &str) -> Parsed<ConvergenceReport> {
    let mut lines = numbered(text);
    expect_header(&mut lines, CONVERGENCE_HEADER)?;
    let mut rep = ConvergenceReport { rows: Vec::new(), slopes: Vec::new() };
    for (n, line) in lines {
        if let Some(rest) = line.strip_prefix("# slope,") {
            let f = fields(rest, 3, n)?;
            rep.slopes.push(Slope {
                method: parse_method(f[0], n)?,
                max_norm: parse_f64(f[1], n)?,
                one_norm: parse_f64(f[2], n)?,
            });
        } else if line.starts_with('#') {
            continue;
        } else {
            let f = fields(line, 4, n)?;
            rep.rows.push(CutErrorRow {
                method: parse_method(f[0], n)?,
                h: parse_f64(f[1], n)?,
                max_norm: parse_f64(f[2], n)?,
                one_norm: parse_f64(f[3], n)?,
            });
        }
    }
    Ok(rep)
}

pub fn write_convergence(path: &Path, r: &ConvergenceReport) -> Result<()> {
    write_text(path, &convergence_csv(r))
}

pub fn read_convergence(path: &Path) -> Result<ConvergenceReport> {
    read_parsed(path, parse_convergence_csv)
}

// --------------------------------------------------------------------- sweep

const SWEEP_HEADER: &str = "lambda,method,max_norm,one_norm";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", num(r.lambda), r.method, num(r.max_norm), num(r.one_norm)).unwrap();
    }
    out
}

pub fn parse_sweep_csv(text: &str) -> Parsed<Vec<SweepRow>> {
    let mut lines = numbered(text);
    expect_header(&mut lines, SWEEP_HEADER)?;
    lines
        .map(|(n, line)| {
            let f = fields(line, 4, n)?;
            Ok(SweepRow {
                lambda: parse_f64(f[0], n)?,
                method: parse_method(f[1], n)?,
                max_norm: parse_f64(f[2], n)?,
                one_norm: parse_f64(f[3], n)?,
            })
        })
        .collect()
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    write_text(path, &sweep_csv(rows))
}

pub fn read_sweep(path: &Path) -> Result<Vec<SweepRow>> {
    read_parsed(path, parse_sweep_csv)
}

// -------------------------------------------------------------------- timing

const TIMING_HEADER: &str = "method,h,nx,ny,steps,seconds,per_cell_step_ns";

pub fn timing_csv(rows: &[TimingRow]) -> String {
    let mut out = format!("{TIMING_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.method,
            num(r.h),
            r.nx,
            r.ny,
            r.steps,
            num(r.seconds),
            num(r.per_cell_step_ns)
        )
        .unwrap();
    }
    out
}

pub fn parse_timing_csv(text: &str) -> Parsed<Vec<TimingRow>> {
    let mut lines = numbered(text);
    expect_header(&mut lines, TIMING_HEADER)?;
    lines
        .map(|(n, line)| {
            let f = fields(line, 7, n)?;
            Ok(TimingRow {
                method: parse_method(f[0], n)?,
                h: parse_f64(f[1], n)?,
                nx: parse_usize(f[2], n)?,
                ny: parse_usize(f[3], n)?,
                steps: parse_usize(f[4], n)?,
                seconds: parse_f64(f[5], n)?,
                per_cell_step_ns: parse_f64(f[6], n)?,
            })
        })
        .collect()
}

pub fn write_timing(path: &Path, rows: &[TimingRow]) -> Result<()> {
    write_text(path, &timing_csv(rows))
}

pub fn read_timing(path: &Path) -> Result<Vec<TimingRow>> {
    read_parsed(path, parse_timing_csv)
}

// ----------------------------------------------------------------------- cut

/// `# x=<x>` then `y,sigma` rows at cell centres.
pub fn cut_csv(c: &Cut) -> String {
    let mut out = format!("# x={}\ny,sigma\n", num(c.x));
    for (k, v) in c.values.iter().enumerate() {
        writeln!(out, "{},{}", num(c.y0 + (k as f64 + 0.5) * c.dy), num(*v)).unwrap();
    }
    out
}

/// Recovers `x`, the y coordinates and the values.
pub fn parse_cut_csv(text: &str) -> Parsed<(f64, Vec<f64>, Vec<f64>)> {
    let mut lines = numbered(text);
    let x = match lines.next() {
        Some((n, l)) => parse_f64(l.strip_prefix("# x=").ok_or(format!("line {n}: expected `# x=`"))?, n)?,
        None => return Err("empty file".into()),
    };
    expect_header(&mut lines, "y,sigma")?;
    let (mut ys, mut vs) = (Vec::new(), Vec::new());
    for (n, line) in lines {
        let f = fields(line, 2, n)?;
        ys.push(parse_f64(f[0], n)?);
        vs.push(parse_f64(f[1], n)?);
    }
    Ok((x, ys, vs))
}

pub fn write_cut(path: &Path, c: &Cut) -> Result<()> {
    write_text(path, &cut_csv(c))
}

// ------------------------------------------------------------------ grid dump

/// Interior values, one CSV line per row, row `j = 0` (the `y0` edge) first.
pub fn grid_csv(f: &Field) -> String {
    let g = f.geometry();
    let mut out = String::new();
    for j in 0..g.ny as isize {
        let row: Vec<String> = (0..g.nx as isize).map(|i| num(f.get(i, j))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Returns `(nx, ny, values)` in row-major order.
pub fn parse_grid_csv(text: &str) -> Parsed<(usize, usize, Vec<f64>)> {
    let mut values = Vec::new();
    let (mut nx, mut ny) = (0, 0);
    for (n, line) in numbered(text) {
        let row = line.split(',').map(|v| parse_f64(v, n)).collect::<Parsed<Vec<f64>>>()?;
        if ny == 0 {
            nx = row.len();
        } else if row.len() != nx {
            return Err(format!("line {n}: expected {nx} columns, found {}", row.len()));
        }
        values.extend(row);
        ny += 1;
    }
    Ok((nx, ny, values))
}

pub fn write_grid(path: &Path, f: &Field) -> Result<()> {
    write_text(path, &grid_csv(f))
}

pub fn read_grid(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    read_parsed(path, parse_grid_csv)
}

// ----------------------------------------------------------------------- PGM

/// 16-bit binary PGM of a field, linearly mapped from `[min, max]` to
/// `[0, 65535]`. The range goes to a sidecar file (see [`pgm_sidecar`]).
pub fn encode_pgm(f: &Field) -> (Vec<u8>, f64, f64) {
    let g = f.geometry();
    let (lo, hi) = f.interior_iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let span = hi - lo;
    let mut out = format!("P5\n{} {}\n65535\n", g.nx, g.ny).into_bytes();
    out.reserve(2 * g.nx * g.ny);
    for j in 0..g.ny as isize {
        for i in 0..g.nx as isize {
            let level = if span > 0.0 { ((f.get(i, j) - lo) / span * 65535.0).round() as u16 } else { 0 };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    (out, lo, hi)
}

/// `(nx, ny, levels)` from a 16-bit P5 image.
pub fn decode_pgm(bytes: &[u8]) -> Parsed<(usize, usize, Vec<u16>)> {
    let mut pos = 0;
    let mut token = || -> Parsed<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err("not a binary PGM (P5)".into());
    }
    let nx: usize = token()?.parse().map_err(|_| "bad width")?;
    let ny: usize = token()?.parse().map_err(|_| "bad height")?;
    if token()? != "65535" {
        return Err("expected maxval 65535".into());
    }
    let data = &bytes[pos + 1..];
    if data.len() != 2 * nx * ny {
        return Err(format!("expected {} data bytes, found {}", 2 * nx * ny, data.len()));
    }
    Ok((nx, ny, data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()))
}

/// `snap.pgm` → `snap.pgm.txt`.
pub fn pgm_sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".txt");
    PathBuf::from(s)
}

pub fn write_pgm(path: &Path, f: &Field) -> Result<()> {
    let (bytes, lo, hi) = encode_pgm(f);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, bytes)?;
    write_text(&pgm_sidecar(path), &format!("min {}\nmax {}\n", num(lo), num(hi)))
}

/// Image plus the values it decodes to, `min + level/65535 (max - min)`.
pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let bytes = fs::read(path)?;
    let (nx, ny, levels) = decode_pgm(&bytes).map_err(|msg| Error::Parse { path: path.to_path_buf(), msg })?;
    let side = pgm_sidecar(path);
    let (lo, hi) = read_parsed(&side, |text| {
        let mut lo = None;
        let mut hi = None;
        for (n, line) in numbered(text) {
            match line.split_once(' ') {
                Some(("min", v)) => lo = Some(parse_f64(v, n)?),
                Some(("max", v)) => hi = Some(parse_f64(v, n)?),
                _ => return Err(format!("line {n}: expected `min <v>` or `max <v>`")),
            }
        }
        Ok((lo.ok_or("missing min")?, hi.ok_or("missing max")?))
    })?;
    let values = levels.iter().map(|&l| lo + l as f64 / 65535.0 * (hi - lo)).collect();
    Ok((nx, ny, values))
}
