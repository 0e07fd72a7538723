//! Structured pass/fail records emitted by every check.
//!
//! A report carries named scalar metrics, optional per-level tables and a
//! verdict consistent with the tolerances it lists. Reports serialize to CSV
//! with a stable header (`.` decimal separator, `,` field separator, Unix
//! newlines).

use std::fmt;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Informational,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
            Verdict::Informational => write!(f, "info"),
        }
    }
}

/// A named table of f64 rows, e.g. the radiation profile E_l vs l.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    pub name: String,
    pub inputs_digest: String,
    pub metrics: Vec<(String, f64)>,
    pub tables: Vec<Table>,
    pub tolerances: Vec<(String, f64)>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

impl DiagnosticsReport {
    pub fn new(name: &str) -> Self {
        DiagnosticsReport {
            name: name.to_string(),
            inputs_digest: String::new(),
            metrics: Vec::new(),
            tables: Vec::new(),
            tolerances: Vec::new(),
            notes: Vec::new(),
            verdict: Verdict::Informational,
        }
    }

    pub fn metric(&mut self, key: &str, value: f64) -> &mut Self {
        self.metrics.push((key.to_string(), value));
        self
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.push((key.to_string(), value));
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn get_metric(&self, key: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    /// Serializes the scalar part as CSV rows `report,key,value`, followed by
    /// each table under a `# table:<name>` marker line.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "report,key,value")?;
        writeln!(w, "{},verdict,{}", self.name, self.verdict)?;
        for (k, v) in &self.metrics {
            writeln!(w, "{},{},{}", self.name, k, fmt_f64(*v))?;
        }
        for (k, v) in &self.tolerances {
            writeln!(w, "{},tol:{},{}", self.name, k, fmt_f64(*v))?;
        }
        for t in &self.tables {
            writeln!(w, "# table:{}", t.name)?;
            writeln!(w, "{}", t.columns.join(","))?;
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
                writeln!(w, "{}", cells.join(","))?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("csv is utf8")
    }
}

/// Deterministic float formatting so re-runs are byte-identical.
pub fn fmt_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{:.1}", v)
    } else {
        format!("{:.12e}", v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_is_stable() {
        let mut r = DiagnosticsReport::new("demo");
        r.metric("worst", 1.25e-3);
        r.tolerance("abs", 1e-9);
        r.verdict = Verdict::Pass;
        let a = r.to_csv_string();
        let b = r.to_csv_string();
        assert_eq!(a, b);
        assert!(a.starts_with("report,key,value\n"));
        assert!(a.contains("demo,verdict,pass"));
    }

    #[test]
    fn table_rows_serialize() {
        let mut r = DiagnosticsReport::new("t");
        let mut tab = Table::new("levels", &["l", "e"]);
        tab.push(vec![0.0, 1.0]);
        tab.push(vec![1.0, 0.5]);
        r.tables.push(tab);
        let s = r.to_csv_string();
        assert!(s.contains("# table:levels"));
        assert!(s.contains("l,e"));
    }
}
