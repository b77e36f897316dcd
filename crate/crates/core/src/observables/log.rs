use std::io::{Read, Write};
use std::path::Path;

use crate::{Error, Result};

/// Time-stamped observation vectors as stored on disk: a header
/// `t, v_1, ..., v_{2N}` and one row per sample with strictly increasing
/// times.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservationLog {
    dimension: usize,
    times: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl ObservationLog {
    pub fn new(dimension: usize) -> Self {
        Self { dimension, times: Vec::new(), rows: Vec::new() }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn push(&mut self, t: f64, values: Vec<f64>) -> Result<()> {
        if values.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: values.len() });
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::ObservationLog(format!("time {t} does not follow {last}")));
            }
        }
        self.times.push(t);
        self.rows.push(values);
        Ok(())
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = LogWriter::new(out, self.dimension)?;
        for (t, row) in self.times.iter().zip(&self.rows) {
            w.write_row(*t, row)?;
        }
        w.finish()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let header = reader.headers().map_err(|e| Error::ObservationLog(format!("line 1: {e}")))?.clone();
        let fields: Vec<&str> = header.iter().collect();
        if fields.first() != Some(&"t") || fields.len() < 2 {
            return Err(Error::ObservationLog("line 1: header must start with `t, v_1`".into()));
        }
        for (i, f) in fields.iter().enumerate().skip(1) {
            if *f != format!("v_{i}") {
                return Err(Error::ObservationLog(format!("line 1: expected column `v_{i}`, found `{f}`")));
            }
        }
        let mut log = Self::new(fields.len() - 1);
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| Error::ObservationLog(format!("line {line}: {e}")))?;
            let mut nums = Vec::with_capacity(record.len());
            for f in record.iter() {
                let v: f64 = f
                    .parse()
                    .map_err(|_| Error::ObservationLog(format!("line {line}: `{f}` is not a number")))?;
                nums.push(v);
            }
            if nums.len() != log.dimension + 1 {
                return Err(Error::ObservationLog(format!(
                    "line {line}: expected {} fields, found {}",
                    log.dimension + 1,
                    nums.len()
                )));
            }
            let t = nums.remove(0);
            log.push(t, nums).map_err(|e| Error::ObservationLog(format!("line {line}: {e}")))?;
        }
        Ok(log)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}

/// Streams an observation log row by row.
pub struct LogWriter<W: Write> {
    out: W,
    dimension: usize,
}

impl<W: Write> LogWriter<W> {
    pub fn new(mut out: W, dimension: usize) -> Result<Self> {
        write!(out, "t")?;
        for i in 1..=dimension {
            write!(out, ", v_{i}")?;
        }
        writeln!(out)?;
        Ok(Self { out, dimension })
    }

    pub fn write_row(&mut self, t: f64, values: &[f64]) -> Result<()> {
        if values.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: values.len() });
        }
        write!(self.out, "{t}")?;
        for v in values {
            write!(self.out, ", {v}")?;
        }
        writeln!(self.out)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut log = ObservationLog::new(2);
        log.push(0.1, vec![1.0 / 3.0, -2.5e-17]).unwrap();
        log.push(0.2, vec![f64::MIN_POSITIVE, 7.0]).unwrap();
        let mut buf = Vec::new();
        log.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t, v_1, v_2\n"));
        assert_eq!(ObservationLog::read_from(buf.as_slice()).unwrap(), log);
    }

    #[test]
    fn rejects_bad_input() {
        let mut log = ObservationLog::new(1);
        log.push(1.0, vec![0.0]).unwrap();
        assert!(log.push(1.0, vec![0.0]).is_err());
        assert!(log.push(2.0, vec![0.0, 1.0]).is_err());

        let bad_time = "t, v_1\n0.0, 1\n0.0, 2\n";
        let err = ObservationLog::read_from(bad_time.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        let bad_num = "t, v_1\n0.0, x\n";
        let err = ObservationLog::read_from(bad_num.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(ObservationLog::read_from("time, v_1\n".as_bytes()).is_err());
        assert!(ObservationLog::read_from("t, v_2\n".as_bytes()).is_err());
    }
}
