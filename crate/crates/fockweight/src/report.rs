//! Scenario reports.
//!
//! Reports are deterministic: exact values are rendered as
//! numerator/denominator strings, task details use ordered containers, and
//! timings are opt-in so that default output is byte-identical across runs.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Assertion-type task succeeded.
    Pass,
    /// Assertion-type task failed.
    Fail,
    /// Informational task (no expectation attached).
    Info,
    /// The task could not run.
    Error,
}

#[derive(Debug, Serialize)]
pub struct TaskReport {
    pub task: String,
    pub params: Value,
    pub status: Status,
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub config: String,
    pub tasks: Vec<TaskReport>,
    pub overall: Status,
}

impl Report {
    pub fn new(config: &str) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            tool: "fockweight".into(),
            config: config.to_string(),
            tasks: Vec::new(),
            overall: Status::Pass,
        }
    }

    pub fn push(&mut self, task: TaskReport) {
        match task.status {
            Status::Fail => self.overall = Status::Fail,
            Status::Error if self.overall != Status::Fail => self.overall = Status::Error,
            _ => {}
        }
        self.tasks.push(task);
    }

    /// 0 on success, 1 on assertion failure or task error, 3 when a
    /// dimension cap was hit.
    pub fn exit_code(&self) -> i32 {
        if self.tasks.iter().any(|t| {
            t.status == Status::Error
                && t.details.get("resource_cap").and_then(Value::as_bool) == Some(true)
        }) {
            return 3;
        }
        match self.overall {
            Status::Pass | Status::Info => 0,
            Status::Fail | Status::Error => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("config: {}\n", self.config));
        for t in &self.tasks {
            let tag = match t.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Info => "info",
                Status::Error => "ERROR",
            };
            out.push_str(&format!("[{tag:5}] {} {}\n", t.task, summarize(&t.params)));
            if t.status == Status::Fail || t.status == Status::Error {
                out.push_str(&format!("        {}\n", summarize(&t.details)));
            }
        }
        out.push_str(&format!(
            "overall: {}\n",
            match self.overall {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Info => "info",
                Status::Error => "error",
            }
        ));
        out
    }
}

fn summarize(v: &Value) -> String {
    match v {
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| format!("{k}={}", compact(v)))
            .collect::<Vec<_>>()
            .join(" "),
        other => compact(other),
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
