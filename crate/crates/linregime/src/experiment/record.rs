//! CSV schemas written by the experiment runner.

use crate::error::Result;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Header of sweep output files. Downstream plotting relies on it verbatim.
pub const RUN_HEADER: &str = "model,target,d,N,p,n,lambda,seed,train_mse,test_mse,R0,normalized_risk,elapsed_s";
pub const STAIRCASE_HEADER: &str = "model,target,d,N,p,log_p_over_log_d,risk,normalized_risk,std_error,seed";
pub const SPECTRUM_HEADER: &str = "d,k,xi,B,xi_times_B";
pub const GRAM_HEADER: &str = "d,k,N,seed,opnorm_deviation";

pub trait CsvRow {
    fn fields(&self) -> Vec<String>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub model: String,
    pub target: String,
    pub d: usize,
    /// Neuron count; 0 for kernel ridge regression.
    pub neurons: usize,
    pub p: usize,
    pub n: usize,
    pub lambda: f64,
    pub seed: u64,
    pub train_mse: f64,
    pub test_mse: f64,
    pub r0: f64,
    pub normalized_risk: f64,
    pub elapsed_s: f64,
}

impl CsvRow for RunRecord {
    fn fields(&self) -> Vec<String> {
        vec![
            self.model.clone(),
            self.target.clone(),
            self.d.to_string(),
            self.neurons.to_string(),
            self.p.to_string(),
            self.n.to_string(),
            self.lambda.to_string(),
            self.seed.to_string(),
            self.train_mse.to_string(),
            self.test_mse.to_string(),
            self.r0.to_string(),
            self.normalized_risk.to_string(),
            self.elapsed_s.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaircaseRecord {
    pub model: String,
    pub target: String,
    pub d: usize,
    pub neurons: usize,
    pub p: usize,
    pub log_p_over_log_d: f64,
    pub risk: f64,
    pub normalized_risk: f64,
    pub std_error: f64,
    pub seed: u64,
}

impl CsvRow for StaircaseRecord {
    fn fields(&self) -> Vec<String> {
        vec![
            self.model.clone(),
            self.target.clone(),
            self.d.to_string(),
            self.neurons.to_string(),
            self.p.to_string(),
            self.log_p_over_log_d.to_string(),
            self.risk.to_string(),
            self.normalized_risk.to_string(),
            self.std_error.to_string(),
            self.seed.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub d: usize,
    pub k: usize,
    pub xi: f64,
    pub b: f64,
}

impl CsvRow for SpectrumRow {
    fn fields(&self) -> Vec<String> {
        vec![self.d.to_string(), self.k.to_string(), self.xi.to_string(), self.b.to_string(), (self.xi * self.b).to_string()]
    }
}

impl CsvRow for crate::labkit::GramRecord {
    fn fields(&self) -> Vec<String> {
        vec![
            self.d.to_string(),
            self.k.to_string(),
            self.n.to_string(),
            self.seed.to_string(),
            self.opnorm_deviation.to_string(),
        ]
    }
}

pub fn write_csv<W: Write, R: CsvRow>(out: W, header: &str, rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header.split(','))?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file<R: CsvRow>(path: &Path, header: &str, rows: &[R]) -> Result<()> {
    write_csv(std::fs::File::create(path)?, header, rows)
}

pub fn to_csv_string<R: CsvRow>(header: &str, rows: &[R]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Sidecar path for per-task failures: `<out>.errors`.
pub fn errors_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".errors");
    PathBuf::from(s)
}

/// Reads a sweep CSV back; numeric fields parse `NaN` for failed tasks.
pub fn read_run_records(path: &Path) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let f = |i: usize| row.get(i).unwrap_or("").to_string();
        let num = |i: usize| f(i).parse::<f64>().unwrap_or(f64::NAN);
        let int = |i: usize| f(i).parse::<u64>().unwrap_or(0);
        out.push(RunRecord {
            model: f(0),
            target: f(1),
            d: int(2) as usize,
            neurons: int(3) as usize,
            p: int(4) as usize,
            n: int(5) as usize,
            lambda: num(6),
            seed: int(7),
            train_mse: num(8),
            test_mse: num(9),
            r0: num(10),
            normalized_risk: num(11),
            elapsed_s: num(12),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunRecord {
        RunRecord {
            model: "rf".into(),
            target: "quad_split".into(),
            d: 30,
            neurons: 240,
            p: 240,
            n: 100,
            lambda: 0.0,
            seed: 12,
            train_mse: 0.5,
            test_mse: 45.0,
            r0: 56.25,
            normalized_risk: 0.8,
            elapsed_s: 0.0,
        }
    }

    #[test]
    fn header_and_round_trip() {
        let s = to_csv_string(RUN_HEADER, &[sample()]).unwrap();
        assert_eq!(s.lines().next().unwrap(), RUN_HEADER);
        assert_eq!(s.lines().nth(1).unwrap(), "rf,quad_split,30,240,240,100,0,12,0.5,45,56.25,0.8,0");
        let dir = std::env::temp_dir().join(format!("linregime-record-{}", std::process::id()));
        std::fs::write(&dir, s).unwrap();
        assert_eq!(read_run_records(&dir).unwrap(), vec![sample()]);
        std::fs::remove_file(&dir).unwrap();
        assert!(errors_path(Path::new("a/b.csv")).ends_with("b.csv.errors"));
    }

    #[test]
    fn nan_rows_format() {
        let mut r = sample();
        r.test_mse = f64::NAN;
        assert!(to_csv_string(RUN_HEADER, &[r]).unwrap().contains(",NaN,"));
    }
}
