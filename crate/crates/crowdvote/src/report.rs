//! CSV output: RFC-4180 quoting, mandatory header, `.` decimals, LF endings.

use std::io::Write;

use crate::error::CliError;

/// One scheme's result at one experiment point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub seed: u64,
    pub scheme: String,
    pub param_mode: String,
    pub mu: f64,
    pub m: f64,
    pub workers: usize,
    pub skip_all: usize,
    pub answer_all: usize,
    pub microtasks: usize,
    pub gold: usize,
    pub trials: u64,
    pub pc_mean: f64,
    pub pc_stderr: f64,
    /// Mean estimates over trials where estimation succeeded; blank in
    /// ground-truth mode.
    pub mhat: Option<f64>,
    pub muhat: Option<f64>,
    pub ma_hat: Option<f64>,
    pub m0_hat: Option<f64>,
}

pub const RESULT_HEADER: [&str; 17] = [
    "seed", "scheme", "param_mode", "mu", "m", "W", "M_0", "M_A", "N", "G", "trials", "pc_mean", "pc_stderr", "mhat",
    "muhat", "MA_hat", "M0_hat",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ResultRow {
    pub fn fields(&self) -> Vec<String> {
        vec![
            self.seed.to_string(),
            self.scheme.clone(),
            self.param_mode.clone(),
            self.mu.to_string(),
            self.m.to_string(),
            self.workers.to_string(),
            self.skip_all.to_string(),
            self.answer_all.to_string(),
            self.microtasks.to_string(),
            self.gold.to_string(),
            self.trials.to_string(),
            self.pc_mean.to_string(),
            self.pc_stderr.to_string(),
            opt(self.mhat),
            opt(self.muhat),
            opt(self.ma_hat),
            opt(self.m0_hat),
        ]
    }
}

/// A header plus string records, ready to be written as CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|h| h.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn from_results(rows: &[ResultRow]) -> Self {
        let mut t = Self::new(&RESULT_HEADER);
        for r in rows {
            t.push(r.fields());
        }
        t
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, CliError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    /// Column-aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|i| self.rows.iter().map(|r| r[i].len()).chain([self.header[i].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| {
            cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
        };
        let mut s = line(&self.header);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&line(r));
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_lf_and_quotes() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), "1.5".into()]);
        assert_eq!(t.to_csv_string().unwrap(), "a,b\n\"x,y\",1.5\n");
    }

    #[test]
    fn text_table_aligns() {
        let mut t = Table::new(&["name", "v"]);
        t.push(vec!["a".into(), "10".into()]);
        assert_eq!(t.to_text(), "name   v\n   a  10\n");
    }
}
