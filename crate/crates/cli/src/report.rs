//! Report schema and rendering.
//!
//! JSON keys are emitted in struct declaration order. `report_digest` is the
//! SHA-256 of the report serialized without `timing` and without the digest
//! itself, so identical inputs give identical digests.

use proxilift::lift::Outcome;
use proxilift::proximality::{Claim, Status, Verdict};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub input_digest: String,
    pub mode: String,
    pub settings: Settings,
    pub system: SystemSummary,
    pub verdicts: Vec<VerdictEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub harness: Vec<HarnessEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant_metas: Option<InvariantEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub tallies: Tallies,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    pub report_digest: String,
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub grid: usize,
    pub max_word_len: usize,
    pub max_closure: usize,
    pub epsilon: String,
    pub seed: u64,
    pub trials: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemSummary {
    pub points: usize,
    pub kind: String,
    pub generators: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monoid_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monoid_truncated: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictEntry {
    pub name: String,
    /// Which system the verdict is about: `base`, `lift q=2`, `hull q=2`, …
    pub target: String,
    pub status: String,
    pub witness: Option<Vec<usize>>,
    pub witness_length: Option<usize>,
    pub claim: Option<String>,
    pub certificate: Option<String>,
}

impl VerdictEntry {
    pub fn new(name: impl Into<String>, target: impl Into<String>, v: &Verdict) -> Self {
        VerdictEntry {
            name: name.into(),
            target: target.into(),
            status: v.status.to_string(),
            witness: v.witness.as_ref().map(|w| w.letters().to_vec()),
            witness_length: v.witness.as_ref().map(|w| w.len()),
            claim: v.claim.as_ref().map(describe_claim),
            certificate: v.certificate.clone(),
        }
    }
}

pub fn describe_claim(c: &Claim) -> String {
    match c {
        Claim::Collapse => "word acts as a constant map".into(),
        Claim::MergePair { x, y, tolerance: None } => format!("word merges points {x} and {y}"),
        Claim::MergePair { x, y, tolerance: Some(e) } => {
            format!("word brings points {x} and {y} within total variation {e}")
        }
        Claim::MergeMeasures { mu, nu, tolerance: None } => format!("word equalizes {mu} and {nu}"),
        Claim::MergeMeasures { mu, nu, tolerance: Some(e) } => {
            format!("word brings {mu} and {nu} within total variation {e}")
        }
        Claim::Contract => "word has dobrushin coefficient below 1".into(),
        Claim::NearVertex { vertex, epsilon } => {
            format!("every row of the word puts more than 1-{epsilon} on point {vertex}")
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HarnessEntry {
    pub name: String,
    /// `None` when no grid is involved.
    pub resolution: Option<usize>,
    pub left: String,
    pub right: String,
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl HarnessEntry {
    pub fn new(name: &str, resolution: Option<usize>, left: Status, right: Status, outcome: Outcome) -> Self {
        HarnessEntry {
            name: name.into(),
            resolution,
            left: left.to_string(),
            right: right.to_string(),
            outcome: outcome.to_string(),
            label: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub checks: usize,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantEntry {
    pub resolution: usize,
    /// Each extreme invariant meta-measure as `(atom, weight)` pairs, with
    /// atoms written as measures.
    pub extremes: Vec<Vec<(String, String)>>,
    pub all_vertex_point_masses: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Tallies {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub unknown_verdicts: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub replayed: usize,
    pub failed: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub elapsed_ms: u128,
}

impl Report {
    /// Serializes everything except the timing and the digest itself.
    pub fn canonical_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        let object = value.as_object_mut().expect("report is an object");
        object.remove("timing");
        object.remove("report_digest");
        serde_json::to_string(&value).expect("report serializes")
    }

    pub fn seal(&mut self) {
        self.report_digest = sha256_hex(self.canonical_json().as_bytes());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{} {} mode {}\n", self.tool, self.version, self.mode));
        out.push_str(&format!(
            "system: {} points, {} {} generator(s)\n",
            self.system.points, self.system.generators, self.system.kind
        ));
        if let Some(size) = self.system.monoid_size {
            let cut = if self.system.monoid_truncated == Some(true) { " (truncated)" } else { "" };
            out.push_str(&format!("monoid size: {size}{cut}\n"));
        }
        for v in &self.verdicts {
            out.push_str(&format!("{} [{}]: {}", v.name, v.target, v.status));
            if let Some(w) = &v.witness {
                out.push_str(&format!(" witness {:?} (length {})", w, w.len()));
            }
            out.push('\n');
            if let Some(c) = &v.certificate {
                out.push_str(&format!("    {c}\n"));
            }
        }
        for h in &self.harness {
            out.push_str(&format!(
                "harness {}{}: {} vs {} -> {}{}\n",
                h.name,
                h.resolution.map(|q| format!(" q={q}")).unwrap_or_default(),
                h.left,
                h.right,
                h.outcome,
                h.label.as_ref().map(|l| format!(" [{l}]")).unwrap_or_default()
            ));
        }
        for c in &self.checks {
            out.push_str(&format!("check {}: {} checks, {} violations\n", c.name, c.checks, c.violations.len()));
            for v in &c.violations {
                out.push_str(&format!("    {v}\n"));
            }
        }
        if let Some(inv) = &self.invariant_metas {
            out.push_str(&format!("invariant meta-measures at q={}: {}\n", inv.resolution, inv.extremes.len()));
            for e in &inv.extremes {
                let parts: Vec<String> = e.iter().map(|(a, w)| format!("{w}@{a}")).collect();
                out.push_str(&format!("    {}\n", parts.join(" + ")));
            }
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        let t = &self.tallies;
        out.push_str(&format!(
            "tallies: {} pass, {} fail, {} inconclusive, {} unknown, {} violations\n",
            t.pass, t.fail, t.inconclusive, t.unknown_verdicts, t.violations
        ));
        if let Some(v) = &self.verification {
            out.push_str(&format!("verification: {} witnesses replayed, {} failed\n", v.replayed, v.failed.len()));
        }
        out.push_str(&format!("digest: {}\n", self.report_digest));
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
