//! `t,value` and `freq_hz,psd` CSV codecs.

use std::io::{BufRead, Write};
use std::str::FromStr;

use super::{Result, SignalError, Spectrum, TimeSeries, Unit};
use crate::scalar::Real;

pub fn write_timeseries_csv<T: Real, W: Write>(x: &TimeSeries<T>, mut w: W) -> Result<()> {
    w.write_all(b"t,value\n")?;
    for (t, v) in x.times().zip(x.samples()) {
        writeln!(w, "{t},{v}")?;
    }
    Ok(())
}

pub fn write_spectrum_csv<T: Real, W: Write>(s: &Spectrum<T>, mut w: W) -> Result<()> {
    w.write_all(b"freq_hz,psd\n")?;
    for (f, p) in s.frequencies().iter().zip(s.psd()) {
        writeln!(w, "{f},{p}")?;
    }
    Ok(())
}

/// Reads a `t,value` CSV. The sample rate is recovered from the time column,
/// which must be uniform to within 1e-6 relative.
pub fn read_timeseries_csv<T: Real + FromStr, R: BufRead>(r: R, unit: Unit) -> Result<TimeSeries<T>> {
    let rows = read_pairs::<T, R>(r, "t,value")?;
    if rows.len() < 2 {
        return Err(SignalError::Csv { line: rows.len() + 1, reason: "need at least two samples".into() });
    }
    let t0 = rows[0].0;
    let span = rows[rows.len() - 1].0 - t0;
    let dt = span / T::count(rows.len() - 1);
    if !(dt > T::zero()) {
        return Err(SignalError::Csv { line: 2, reason: "time column must increase".into() });
    }
    for (i, (t, _)) in rows.iter().enumerate() {
        let expected = t0 + T::count(i) * dt;
        if (*t - expected).abs() > T::lit(1e-6) * dt.max(span) {
            return Err(SignalError::Csv { line: i + 2, reason: "non-uniform sampling".into() });
        }
    }
    let fs = T::one() / dt;
    TimeSeries::with_start(rows.into_iter().map(|(_, v)| v).collect(), fs, t0, unit)
}

pub fn read_spectrum_csv<T: Real + FromStr, R: BufRead>(r: R, unit: Unit) -> Result<Spectrum<T>> {
    let rows = read_pairs::<T, R>(r, "freq_hz,psd")?;
    let (f, p) = rows.into_iter().unzip();
    Spectrum::new(f, p, unit)
}

fn read_pairs<T: Real + FromStr, R: BufRead>(r: R, header: &str) -> Result<Vec<(T, T)>> {
    let mut lines = r.lines();
    match lines.next().transpose()? {
        Some(h) if h.trim_end_matches('\r') == header => {}
        _ => return Err(SignalError::Csv { line: 1, reason: format!("expected header `{header}`") }),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 2;
        let mut cols = line.split(',');
        let mut field = || -> Result<T> {
            cols.next()
                .and_then(|c| c.trim().parse::<T>().ok())
                .ok_or_else(|| SignalError::Csv { line: lineno, reason: "expected two numeric fields".into() })
        };
        let (a, b) = (field()?, field()?);
        rows.push((a, b));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn timeseries_round_trip(vals in prop::collection::vec(-1e6f64..1e6, 2..200), fs in 1.0f64..1000.0) {
            let x = TimeSeries::new(vals, fs, Unit::METERS).unwrap();
            let mut buf = Vec::new();
            write_timeseries_csv(&x, &mut buf).unwrap();
            let y: TimeSeries<f64> = read_timeseries_csv(&buf[..], Unit::METERS).unwrap();
            prop_assert_eq!(x.samples(), y.samples());
            prop_assert!((x.sample_rate() - y.sample_rate()).abs() < 1e-6 * fs);
        }
    }

    #[test]
    fn rejects_wrong_header() {
        let err = read_timeseries_csv::<f64, _>(&b"time,v\n0,1\n1,2\n"[..], Unit::METERS).unwrap_err();
        assert!(matches!(err, SignalError::Csv { line: 1, .. }));
    }

    #[test]
    fn spectrum_header() {
        let s = Spectrum::new(vec![0.0, 0.5], vec![1.0, 2.0], Unit::METERS).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&s, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "freq_hz,psd\n0,1\n0.5,2\n");
    }
}
