use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA: &str = "report/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageVerdict {
    Passed,
    Failed,
    Unknown,
    Skipped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObligationVerdict {
    Proved,
    Failed,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObligationRow {
    pub name: String,
    pub verdict: ObligationVerdict,
    pub time_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    pub verdict: StageVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub obligations: Vec<ObligationRow>,
}

impl StageReport {
    pub fn new(stage: &str) -> StageReport {
        StageReport { stage: stage.to_string(), verdict: StageVerdict::Passed, detail: None, obligations: vec![] }
    }

    pub fn skipped(stage: &str) -> StageReport {
        StageReport { verdict: StageVerdict::Skipped, ..StageReport::new(stage) }
    }

    /// Record a result; the stage verdict only ever gets worse.
    pub fn push(&mut self, name: impl Into<String>, verdict: ObligationVerdict, time_ms: u64) {
        self.obligations.push(ObligationRow { name: name.into(), verdict, time_ms });
        match verdict {
            ObligationVerdict::Failed => self.fail(None),
            ObligationVerdict::Unknown if self.verdict == StageVerdict::Passed => self.verdict = StageVerdict::Unknown,
            _ => {}
        }
    }

    pub fn fail(&mut self, detail: Option<String>) {
        self.verdict = StageVerdict::Failed;
        if self.detail.is_none() {
            self.detail = detail;
        }
    }

    pub fn unknown(&mut self, detail: String) {
        if self.verdict == StageVerdict::Passed {
            self.verdict = StageVerdict::Unknown;
        }
        if self.detail.is_none() {
            self.detail = Some(detail);
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == StageVerdict::Passed
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FinalVerdict {
    #[serde(rename = "QHP-verified")]
    Verified,
    #[serde(rename = "stage-failed")]
    StageFailed,
    #[serde(rename = "unknown")]
    Unknown,
}

impl FinalVerdict {
    /// Process exit code for this verdict.
    pub fn exit_code(self) -> i32 {
        match self {
            FinalVerdict::Verified => 0,
            FinalVerdict::StageFailed => 1,
            FinalVerdict::Unknown => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertySummary {
    pub cmp: String,
    pub bound: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub tool: String,
    pub solver: String,
    pub project: String,
    pub property: PropertySummary,
    pub stages: Vec<StageReport>,
    pub verdict: FinalVerdict,
    /// The first stage that did not pass, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub time_ms: u64,
}

impl Report {
    pub fn verified(&self) -> bool {
        self.verdict == FinalVerdict::Verified
    }

    pub fn stage(&self, name: &str) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.stage == name)
    }

    /// First obligation that did not come back proved.
    pub fn first_failed_obligation(&self) -> Option<&ObligationRow> {
        self.stages.iter().flat_map(|s| &s.obligations).find(|o| o.verdict != ObligationVerdict::Proved)
    }

    /// Derive `verdict` and `failed_stage` from the stages.
    pub fn conclude(&mut self) {
        match self.stages.iter().find(|s| s.verdict != StageVerdict::Passed) {
            None => {
                self.verdict = FinalVerdict::Verified;
                self.failed_stage = None;
            }
            Some(s) => {
                self.verdict = if s.verdict == StageVerdict::Failed { FinalVerdict::StageFailed } else { FinalVerdict::Unknown };
                self.failed_stage = Some(s.stage.clone());
            }
        }
    }
}

/// Remove every `time_ms` field, so identical runs serialize identically.
pub fn strip_timing(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            m.remove("time_ms");
            m.values_mut().for_each(strip_timing);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

pub fn to_json<T: Serialize>(value: &T, timing: bool) -> String {
    let mut v = serde_json::to_value(value).expect("reports serialize");
    if !timing {
        strip_timing(&mut v);
    }
    serde_json::to_string_pretty(&v).expect("reports serialize") + "\n"
}
