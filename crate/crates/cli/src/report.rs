use std::fmt;

/// Outcome of one command, printed as `key: value` lines.
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<(String, String)>,
    pub results: Vec<(String, String)>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        RunReport { command: command.into(), inputs: Vec::new(), results: Vec::new(), pass: true }
    }

    pub fn input(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        self.inputs.push((key.to_string(), value.to_string()));
        self
    }

    pub fn result(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        self.results.push((key.to_string(), value.to_string()));
        self
    }

    /// Records a checked quantity; the report fails if any check does.
    pub fn check(&mut self, key: &str, value: impl fmt::Display, ok: bool) -> &mut Self {
        self.result(key, value);
        self.pass &= ok;
        self
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "command: {}", self.command)?;
        for (k, v) in &self.inputs {
            writeln!(f, "input.{k}: {v}")?;
        }
        for (k, v) in &self.results {
            writeln!(f, "{k}: {v}")?;
        }
        writeln!(f, "pass: {}", self.pass)
    }
}
