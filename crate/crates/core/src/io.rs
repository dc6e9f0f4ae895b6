//! Plain-text CSV formats for profiles, traffic matrices, response histories and sweeps.
//!
//! Each file may start with `#` comment lines carrying `key=value` metadata.

use std::io::{self, BufRead, Write};

use crate::error::{Result, VbiError};
use crate::excitation::{RoughnessProfile, TrafficLoadMatrix};
use crate::integrators::TimeSeriesResult;
use crate::scalar::Real;
use crate::theory::SweepRow;

fn parse_err(line: usize, reason: impl Into<String>) -> VbiError {
    VbiError::Parse {
        line,
        reason: reason.into(),
    }
}

fn num<T: Real>(s: &str, line: usize) -> Result<T> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("not a number: `{}`", s.trim())))?;
    Ok(T::lit(v))
}

fn int(s: &str, line: usize) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("not an integer: `{}`", s.trim())))
}

/// Metadata pairs from a `# k=v,k=v` line.
fn meta(line: &str) -> Vec<(String, String)> {
    line.trim_start_matches('#')
        .split(',')
        .filter_map(|kv| {
            let (k, v) = kv.split_once('=')?;
            Some((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn lookup<'a>(pairs: &'a [(String, String)], key: &str, line: usize) -> Result<&'a str> {
    pairs
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| parse_err(line, format!("missing `{key}` in header")))
}

struct Lines<R> {
    inner: io::Lines<R>,
    number: usize,
    meta: Vec<(String, String)>,
}

impl<R: BufRead> Lines<R> {
    fn new(r: R) -> Self {
        Self {
            inner: r.lines(),
            number: 0,
            meta: Vec::new(),
        }
    }

    /// Next non-comment, non-empty line; comment metadata is collected on the way.
    fn next_data(&mut self) -> Result<Option<String>> {
        for l in self.inner.by_ref() {
            self.number += 1;
            let l = l.map_err(|e| parse_err(self.number, e.to_string()))?;
            let t = l.trim();
            if t.is_empty() {
                continue;
            }
            if t.starts_with('#') {
                self.meta.extend(meta(t));
                continue;
            }
            return Ok(Some(t.to_string()));
        }
        Ok(None)
    }

    fn expect_header(&mut self, header: &str) -> Result<()> {
        match self.next_data()? {
            Some(h) if h.replace(' ', "") == header => Ok(()),
            Some(h) => Err(parse_err(self.number, format!("expected header `{header}`, found `{h}`"))),
            None => Err(parse_err(self.number, "empty file")),
        }
    }
}

pub fn write_roughness_csv<T: Real, W: Write>(p: &RoughnessProfile<T>, mut w: W) -> io::Result<()> {
    writeln!(w, "# spacing={},seed={},class_coefficient={:e}", p.spacing, p.seed, p.coefficient.as_f64())?;
    writeln!(w, "x,elevation,slope")?;
    for i in 0..p.len() {
        writeln!(
            w,
            "{},{:.17e},{:.17e}",
            p.sample_positions[i],
            p.elevation[i].as_f64(),
            p.slope[i].as_f64()
        )?;
    }
    Ok(())
}

pub fn read_roughness_csv<T: Real, R: BufRead>(r: R) -> Result<RoughnessProfile<T>> {
    let mut lines = Lines::new(r);
    lines.expect_header("x,elevation,slope")?;
    let hdr_line = lines.number;
    let mut p = RoughnessProfile {
        sample_positions: Vec::new(),
        elevation: Vec::new(),
        slope: Vec::new(),
        spacing: num(lookup(&lines.meta, "spacing", hdr_line)?, hdr_line)?,
        coefficient: num(lookup(&lines.meta, "class_coefficient", hdr_line)?, hdr_line)?,
        seed: int(lookup(&lines.meta, "seed", hdr_line)?, hdr_line)? as u64,
    };
    while let Some(l) = lines.next_data()? {
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 3 {
            return Err(parse_err(lines.number, "expected 3 fields"));
        }
        p.sample_positions.push(num(f[0], lines.number)?);
        p.elevation.push(num(f[1], lines.number)?);
        p.slope.push(num(f[2], lines.number)?);
    }
    Ok(p)
}

/// Sparse triplets `step,node,force`.
pub fn write_traffic_csv<T: Real, W: Write>(m: &TrafficLoadMatrix<T>, mut w: W) -> io::Result<()> {
    writeln!(
        w,
        "# time_step={},seed={},n_vehicles={},density={},node_count={},steps={}",
        m.time_step,
        m.seed,
        m.vehicle_count_equivalent,
        m.density,
        m.node_count,
        m.steps()
    )?;
    writeln!(w, "step,node,force")?;
    for s in 0..m.steps() {
        for &(node, f) in m.row(s) {
            writeln!(w, "{s},{node},{:.17e}", f.as_f64())?;
        }
    }
    Ok(())
}

pub fn read_traffic_csv<T: Real, R: BufRead>(r: R) -> Result<TrafficLoadMatrix<T>> {
    let mut lines = Lines::new(r);
    lines.expect_header("step,node,force")?;
    let h = lines.number;
    let steps = int(lookup(&lines.meta, "steps", h)?, h)?;
    let node_count = int(lookup(&lines.meta, "node_count", h)?, h)?;
    let time_step = num(lookup(&lines.meta, "time_step", h)?, h)?;
    let n_vehicles = int(lookup(&lines.meta, "n_vehicles", h)?, h)?;
    let density = num(lookup(&lines.meta, "density", h)?, h)?;
    let seed = int(lookup(&lines.meta, "seed", h)?, h)? as u64;
    let mut rows = vec![Vec::new(); steps];
    while let Some(l) = lines.next_data()? {
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 3 {
            return Err(parse_err(lines.number, "expected 3 fields"));
        }
        let s = int(f[0], lines.number)?;
        if s >= steps {
            return Err(parse_err(lines.number, format!("step {s} beyond {steps} rows")));
        }
        rows[s].push((int(f[1], lines.number)?, num(f[2], lines.number)?));
    }
    for row in &mut rows {
        row.sort_by_key(|&(n, _)| n);
    }
    TrafficLoadMatrix::from_rows(rows, node_count, time_step, n_vehicles, density, seed)
}

/// Columns: `t`, then `u_<label>,v_<label>,a_<label>` per recorded DOF.
pub fn write_time_series_csv<T: Real, W: Write>(r: &TimeSeriesResult<T>, mut w: W) -> io::Result<()> {
    writeln!(w, "# dt={},dofs={}", r.time_step, r.dof_labels.join(";"))?;
    let mut header = String::from("t");
    for l in &r.dof_labels {
        header += &format!(",u_{l},v_{l},a_{l}");
    }
    writeln!(w, "{header}")?;
    for s in 0..r.steps() {
        let mut line = format!("{}", (r.time_step * T::from_usize_lossy(s)).as_f64());
        for c in 0..r.dof_labels.len() {
            line += &format!(
                ",{:.17e},{:.17e},{:.17e}",
                r.displacement[[s, c]].as_f64(),
                r.velocity[[s, c]].as_f64(),
                r.acceleration[[s, c]].as_f64()
            );
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_time_series_csv<T: Real, R: BufRead>(r: R) -> Result<TimeSeriesResult<T>> {
    let mut lines = Lines::new(r);
    let header = lines
        .next_data()?
        .ok_or_else(|| parse_err(0, "empty file"))?;
    let h = lines.number;
    let dt = num(lookup(&lines.meta, "dt", h)?, h)?;
    let labels: Vec<String> = lookup(&lines.meta, "dofs", h)?
        .split(';')
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    let cols = header.split(',').count();
    if cols != 1 + 3 * labels.len() {
        return Err(parse_err(h, "header does not match the DOF list"));
    }
    let mut data: Vec<Vec<T>> = Vec::new();
    while let Some(l) = lines.next_data()? {
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != cols {
            return Err(parse_err(lines.number, format!("expected {cols} fields")));
        }
        data.push(f[1..].iter().map(|x| num(x, lines.number)).collect::<Result<_>>()?);
    }
    let mut out = TimeSeriesResult::zeros(dt, labels, data.len());
    let nl = out.dof_labels.len();
    for (s, row) in data.iter().enumerate() {
        let u: Vec<T> = (0..nl).map(|c| row[3 * c]).collect();
        let v: Vec<T> = (0..nl).map(|c| row[3 * c + 1]).collect();
        let a: Vec<T> = (0..nl).map(|c| row[3 * c + 2]).collect();
        out.set_row(s, &u, &v, &a);
    }
    Ok(out)
}

pub const SWEEP_HEADER: &str = "alpha,beta,gamma,coupled,uncoupled,oracle,error_pct";

/// Pole cells are written with `NaN` amplitudes and error.
pub fn write_sweep_csv<T: Real, W: Write>(rows: &[SweepRow<T>], mut w: W) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.alpha.as_f64(),
            r.beta.as_f64(),
            r.gamma.as_f64(),
            r.coupled.as_f64(),
            r.uncoupled.as_f64(),
            r.oracle.as_f64(),
            r.error_pct.as_f64()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::excitation::{generate_roughness, generate_traffic};

    #[test]
    fn roughness_round_trip() {
        let p = generate_roughness(10.0, 0.1, 16e-6, 7).unwrap();
        let mut buf = Vec::new();
        write_roughness_csv(&p, &mut buf).unwrap();
        let q: RoughnessProfile<f64> = read_roughness_csv(buf.as_slice()).unwrap();
        assert_eq!(p.elevation, q.elevation);
        assert_eq!(p.slope, q.slope);
        assert_eq!(q.seed, 7);
    }

    #[test]
    fn traffic_round_trip() {
        let m = generate_traffic(2.0, 0.01, 51, 10, 0.1, 4).unwrap();
        let mut buf = Vec::new();
        write_traffic_csv(&m, &mut buf).unwrap();
        let q: TrafficLoadMatrix<f64> = read_traffic_csv(buf.as_slice()).unwrap();
        assert_eq!(m, q);
    }

    #[test]
    fn time_series_round_trip() {
        let mut r = TimeSeriesResult::<f64>::zeros(0.01, vec!["a".into(), "b".into()], 3);
        r.set_row(1, &[1.0, 2.0], &[3.0, 4.0], &[5.0, 1e-300]);
        let mut buf = Vec::new();
        write_time_series_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# dt=0.01,dofs=a;b\nt,u_a,v_a,a_a,u_b,v_b,a_b\n"));
        let q: TimeSeriesResult<f64> = read_time_series_csv(buf.as_slice()).unwrap();
        assert_eq!(r, q);
    }

    #[test]
    fn bad_number_reports_line() {
        let text = "# dt=0.1,dofs=x\nt,u_x,v_x,a_x\n0,1,2,oops\n";
        let e = read_time_series_csv::<f64, _>(text.as_bytes()).unwrap_err();
        assert_eq!(
            e,
            VbiError::Parse {
                line: 3,
                reason: "not a number: `oops`".into()
            }
        );
    }
}
