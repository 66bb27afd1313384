use std::fmt;

use koopman_lyap::flow::HypothesisReport;

/// Structured text report: `key = value` lines grouped in `[sections]`, in
/// insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub hypotheses: Vec<HypothesisReport>,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<(String, f64)>,
    pub errors: Vec<(String, f64)>,
    pub info: Vec<(String, String)>,
    pub timings: Vec<(String, f64)>,
    pub files: Vec<String>,
    /// Failed checks other than hypotheses (e.g. a compare tolerance).
    pub failures: Vec<String>,
}

impl RunReport {
    pub fn new(command: &str, config_hash: &str, seed: u64) -> Self {
        Self {
            command: command.into(),
            config_hash: config_hash.into(),
            seed,
            ..Self::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.hypotheses.iter().all(|h| h.passed) && self.failures.is_empty()
    }

    pub fn residual(&mut self, name: &str, v: f64) {
        self.residuals.push((name.into(), v));
    }

    pub fn error(&mut self, name: &str, v: f64) {
        self.errors.push((name.into(), v));
    }

    pub fn info(&mut self, name: &str, v: impl ToString) {
        self.info.push((name.into(), v.to_string()));
    }

    pub fn timing(&mut self, name: &str, seconds: f64) {
        self.timings.push((name.into(), seconds));
    }
}

fn section<T>(f: &mut fmt::Formatter<'_>, name: &str, rows: &[(String, T)], show: impl Fn(&T) -> String) -> fmt::Result {
    if rows.is_empty() {
        return Ok(());
    }
    writeln!(f, "\n[{name}]")?;
    for (k, v) in rows {
        writeln!(f, "{k} = {}", show(v))?;
    }
    Ok(())
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "command = {}", self.command)?;
        writeln!(f, "config_hash = {}", self.config_hash)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "status = {}", if self.passed() { "pass" } else { "fail" })?;
        if !self.hypotheses.is_empty() {
            writeln!(f, "\n[hypotheses]")?;
            for h in &self.hypotheses {
                writeln!(f, "{h}")?;
            }
        }
        if !self.failures.is_empty() {
            writeln!(f, "\n[failures]")?;
            for m in &self.failures {
                writeln!(f, "{m}")?;
            }
        }
        section(f, "info", &self.info, |v| v.clone())?;
        if !self.eigenvalues.is_empty() {
            writeln!(f, "\n[eigenvalues]")?;
            for (i, l) in self.eigenvalues.iter().enumerate() {
                writeln!(f, "{} = {l:.12e}", i + 1)?;
            }
        }
        section(f, "residuals", &self.residuals, |v| format!("{v:.6e}"))?;
        section(f, "errors", &self.errors, |v| format!("{v:.6e}"))?;
        section(f, "timings_s", &self.timings, |v| format!("{v:.3}"))?;
        if !self.files.is_empty() {
            writeln!(f, "\n[files]")?;
            for p in &self.files {
                writeln!(f, "{p}")?;
            }
        }
        Ok(())
    }
}
