//! External models run as separate processes. Inputs go to a file of
//! `name=value` lines; the process writes its outputs in the same format.

use std::path::PathBuf;
use std::process::Command;

use hybrid_pdem_core::dynamics::{BlackBoxModel, ModelSchema, ParameterRow};
use hybrid_pdem_core::{Error, Result};

use crate::io::fmt_f64;

#[derive(Debug, Clone)]
pub struct CommandAdapter {
    pub program: PathBuf,
    /// Arguments; `{input}` and `{output}` are replaced by file paths.
    pub args: Vec<String>,
    pub schema: ModelSchema,
}

pub fn format_row(row: &ParameterRow) -> String {
    row.entries.iter().map(|(n, v)| format!("{n}={}\n", fmt_f64(*v))).collect()
}

pub fn parse_row(text: &str) -> Result<Vec<(String, f64)>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (k, v) = l.split_once('=').ok_or_else(|| Error::AdapterFailure(format!("malformed line `{l}`")))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::AdapterFailure(format!("non-numeric value in `{l}`")))?;
            Ok((k.trim().to_owned(), v))
        })
        .collect()
}

impl BlackBoxModel for CommandAdapter {
    fn schema(&self) -> &ModelSchema {
        &self.schema
    }

    fn call(&self, inputs: &ParameterRow) -> Result<Vec<(String, f64)>> {
        let fail = |what: &str, e: &dyn std::fmt::Display| Error::AdapterFailure(format!("{what}: {e}"));
        let dir = tempfile::tempdir().map_err(|e| fail("creating work directory", &e))?;
        let input = dir.path().join("inputs.txt");
        let output = dir.path().join("outputs.txt");
        std::fs::write(&input, format_row(inputs)).map_err(|e| fail("writing inputs", &e))?;
        let args: Vec<String> = self
            .args
            .iter()
            .map(|a| a.replace("{input}", &input.to_string_lossy()).replace("{output}", &output.to_string_lossy()))
            .collect();
        let out = Command::new(&self.program)
            .args(&args)
            .current_dir(dir.path())
            .output()
            .map_err(|e| fail(&format!("starting {}", self.program.display()), &e))?;
        if !out.status.success() {
            return Err(Error::AdapterFailure(format!(
                "{} exited with {}: {}",
                self.program.display(),
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        let text = std::fs::read_to_string(&output).map_err(|e| fail("reading outputs", &e))?;
        parse_row(&text)
    }
}
