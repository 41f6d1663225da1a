//! Verdict reports shared by the command line and the acceptance suite.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;
use crate::table::OpTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Unknown,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Unknown => "UNKNOWN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
    pub tuples_checked: u64,
    pub tables_enumerated: u64,
}

impl Check {
    pub fn new(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            verdict: Verdict::Pass,
            detail: String::new(),
            counterexample: None,
            tuples_checked: 0,
            tables_enumerated: 0,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Records a failure; the first counterexample is kept.
    pub fn fail(&mut self, why: impl Into<String>, counterexample: Value) {
        if self.verdict != Verdict::Fail {
            self.verdict = Verdict::Fail;
            self.detail = why.into();
            self.counterexample = Some(counterexample);
        }
    }

    pub fn unknown(&mut self, why: impl Into<String>) {
        if self.verdict == Verdict::Pass {
            self.verdict = Verdict::Unknown;
            self.detail = why.into();
        }
    }

    pub fn note(&mut self, detail: impl Into<String>) {
        if self.verdict == Verdict::Pass {
            self.detail = detail.into();
        }
    }

    /// Asserts two tables agree, counting the tuples compared.
    pub fn expect_equal(&mut self, what: &str, got: &OpTable, want: &OpTable) {
        self.tuples_checked += want.values().len() as u64;
        if got != want {
            let tuple = got.first_difference(want);
            self.fail(
                format!("{what}: tables differ"),
                serde_json::json!({ "what": what, "tuple": tuple, "key": got.key_hex() }),
            );
        }
    }

    pub fn expect(&mut self, cond: bool, what: impl Into<String>, counterexample: Value) {
        if !cond {
            self.fail(what, counterexample);
        }
    }

    /// Runs `body`, turning an error into a failure of this check.
    pub fn run(name: impl Into<String>, body: impl FnOnce(&mut Check) -> Result<()>) -> Check {
        let mut c = Check::new(name);
        if let Err(e) = body(&mut c) {
            c.fail(format!("error: {e}"), Value::String(e.to_string()));
        }
        c
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub parameters: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub tuples_checked: u64,
    pub tables_enumerated: u64,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub data: Value,
    /// Human-readable result lines; the same facts live in `data`.
    #[serde(skip)]
    pub facts: Vec<(String, String)>,
    /// Not serialized, so JSON stays byte-deterministic.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl Report {
    pub fn new(command: Vec<String>) -> Self {
        Report {
            command,
            parameters: BTreeMap::new(),
            checks: Vec::new(),
            tuples_checked: 0,
            tables_enumerated: 0,
            data: Value::Null,
            facts: Vec::new(),
            wall_time: Duration::ZERO,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("parameters serialize"),
        );
        self
    }

    pub fn fact(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.facts.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, check: Check) {
        self.tuples_checked += check.tuples_checked;
        self.tables_enumerated += check.tables_enumerated;
        self.checks.push(check);
    }

    pub fn verdict(&self) -> Verdict {
        if self.checks.iter().any(|c| c.verdict == Verdict::Fail) {
            Verdict::Fail
        } else if self.checks.iter().any(|c| c.verdict == Verdict::Unknown) {
            Verdict::Unknown
        } else {
            Verdict::Pass
        }
    }

    /// 0 iff every check passed.
    pub fn exit_code(&self) -> i32 {
        match self.verdict() {
            Verdict::Pass => 0,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "$ clonelab {}", self.command.join(" "));
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "  {k} = {v}");
        }
        for (k, v) in &self.facts {
            let _ = writeln!(out, "{k}: {v}");
        }
        for c in &self.checks {
            let _ = write!(out, "{} {}", c.verdict.label(), c.name);
            if !c.detail.is_empty() {
                let _ = write!(out, ": {}", c.detail);
            }
            out.push('\n');
            if let Some(cx) = &c.counterexample {
                let _ = writeln!(out, "  counterexample: {cx}");
            }
        }
        let _ = writeln!(
            out,
            "{} ({} tuples checked, {} tables enumerated, {:.2?})",
            self.verdict().label(),
            self.tuples_checked,
            self.tables_enumerated,
            self.wall_time
        );
        out
    }
}
