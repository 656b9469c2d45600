use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// A computation with nothing to verify.
    Ok,
    Pass,
    Fail,
    /// The hypothesis of a check was not met; nothing was tested.
    Skipped,
    /// The core rejected the input.
    Error,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
            Status::Error => "ERROR",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Entry {
    pub index: usize,
    pub op: String,
    /// The statement or definition the entry exercises.
    pub anchor: String,
    pub status: Status,
    /// One line for humans.
    pub summary: String,
    pub result: Value,
}

#[derive(Debug, Default, Clone, Serialize)]
pub struct Totals {
    pub ok: usize,
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    pub error: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub seed: u64,
    pub entries: Vec<Entry>,
    pub totals: Totals,
}

impl Report {
    pub fn new(seed: u64, entries: Vec<Entry>) -> Self {
        let mut totals = Totals::default();
        for e in &entries {
            *match e.status {
                Status::Ok => &mut totals.ok,
                Status::Pass => &mut totals.pass,
                Status::Fail => &mut totals.fail,
                Status::Skipped => &mut totals.skipped,
                Status::Error => &mut totals.error,
            } += 1;
        }
        Report {
            schema: crate::scenario::SCHEMA,
            seed,
            entries,
            totals,
        }
    }

    /// 2 if any entry errored, 1 if any check failed, else 0.
    pub fn exit_code(&self) -> u8 {
        if self.totals.error > 0 {
            2
        } else if self.totals.fail > 0 {
            1
        } else {
            0
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "[{}] {} {}: {}\n    ({})\n",
                e.index,
                e.op,
                e.status.label(),
                e.summary,
                e.anchor
            ));
        }
        let t = &self.totals;
        out.push_str(&format!(
            "{} entries: {} ok, {} pass, {} fail, {} skipped, {} error\n",
            self.entries.len(),
            t.ok,
            t.pass,
            t.fail,
            t.skipped,
            t.error
        ));
        out
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
