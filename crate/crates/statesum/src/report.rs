//! Uniform presentation of check results: one line per verified item, with
//! residuals, plus text and JSON renderings for the command line.

use serde::{Deserialize, Serialize};

use crate::frob::CheckReport;
use crate::fusioncat::ConstraintReport;

/// One verified item.  `required` is present for axiom checks, where
/// informational lines do not gate the overall outcome; constraint lines
/// always gate and leave it unset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportLine {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub required: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub title: String,
    pub passed: bool,
    pub max_residual: f64,
    pub lines: Vec<ReportLine>,
}

impl Report {
    pub fn from_check(title: &str, check: &CheckReport) -> Report {
        let lines = check
            .items
            .iter()
            .map(|item| ReportLine {
                name: item.name.clone(),
                passed: item.passed,
                residual: item.residual,
                required: Some(item.required),
                witness: item.witness.clone(),
            })
            .collect();
        Report {
            title: title.to_string(),
            passed: check.passed(),
            max_residual: check.max_residual(),
            lines,
        }
    }

    pub fn from_constraints(title: &str, constraints: &ConstraintReport) -> Report {
        let lines = constraints
            .items
            .iter()
            .map(|item| ReportLine {
                name: item.name.clone(),
                passed: item.passed,
                residual: item.residual,
                required: None,
                witness: item.witness.clone(),
            })
            .collect();
        Report {
            title: title.to_string(),
            passed: constraints.passed(),
            max_residual: constraints.max_residual(),
            lines,
        }
    }

    pub fn render_text(&self) -> String {
        let width = self.lines.iter().map(|l| l.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        out.push_str(&format!("== {} ==\n", self.title));
        for line in &self.lines {
            let verdict = if line.passed { "PASS" } else { "FAIL" };
            let info = match line.required {
                Some(false) => "  (informational)",
                _ => "",
            };
            out.push_str(&format!(
                "{verdict}  {:width$}  residual {:.3e}{info}\n",
                line.name, line.residual
            ));
            if let Some(witness) = &line.witness {
                if !line.passed {
                    out.push_str(&format!("      {witness}\n"));
                }
            }
        }
        let overall = if self.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "overall: {overall} ({} items, max residual {:.3e})\n",
            self.lines.len(),
            self.max_residual
        ));
        out
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
