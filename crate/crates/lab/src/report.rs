//! Table of the explicit constants against their stated intervals.

use serde::{Deserialize, Serialize};
use sctl_core::certify::{worst_status, BoundConstants, Certificate, InputDigest, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub name: String,
    pub value: f64,
    /// Open interval `(lo, hi)`; `None` for constants without one.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub rows: Vec<ConstantRow>,
    pub status: Status,
}

fn row(name: &str, value: f64, lo: Option<f64>, hi: Option<f64>) -> ConstantRow {
    let inside = lo.is_none_or(|l| value > l) && hi.is_none_or(|h| value < h);
    ConstantRow { name: name.into(), value, lo, hi, status: if inside { Status::Pass } else { Status::Fail } }
}

pub fn certify_constants() -> ConstantsReport {
    let k = BoundConstants::universal();
    let rows = vec![
        row("theta1", k.theta1, Some(0.38), Some(0.39)),
        row("theta2", k.theta2, Some(0.43), Some(0.44)),
        row("c", k.c, None, Some(1.57)),
        row("x0", k.x0, Some(0.27), Some(0.28)),
        row("c2", k.c2, None, Some(2.07)),
        row("y0", k.y0, None, Some(1.3)),
        row("phi(x0)", k.phi_x0(), None, None),
        row("delta_star", k.linear_branch_excess(), None, None),
    ];
    let status = rows.iter().map(|r| r.status).max().unwrap_or(Status::Pass);
    ConstantsReport { rows, status }
}

impl ConstantsReport {
    /// Aligned text table, values with 15 decimals.
    pub fn render(&self) -> String {
        let mut s = format!("{:<11} {:>18}  {:<16} {}\n", "constant", "value", "interval", "status");
        for r in &self.rows {
            let interval = match (r.lo, r.hi) {
                (Some(l), Some(h)) => format!("({l}, {h})"),
                (None, Some(h)) => format!("< {h}"),
                (Some(l), None) => format!("> {l}"),
                (None, None) => "-".into(),
            };
            let status = if r.lo.is_none() && r.hi.is_none() { "info" } else if r.status == Status::Pass { "pass" } else { "FAIL" };
            s.push_str(&format!("{:<11} {:>18.15}  {:<16} {}\n", r.name, r.value, interval, status));
        }
        s
    }

    /// One certificate per interval row.
    pub fn certificates(&self) -> Vec<Certificate> {
        self.rows
            .iter()
            .filter(|r| r.lo.is_some() || r.hi.is_some())
            .map(|r| {
                let digest = InputDigest::new().str("constant").str(&r.name);
                let bound = r.hi.unwrap_or(f64::INFINITY);
                let mut c = Certificate::with_status(&format!("constant_{}", r.name), digest, bound, r.value, 0.0, r.status);
                if let Some(l) = r.lo {
                    c = c.metric("lower_end", l);
                }
                c
            })
            .collect()
    }

    pub fn worst(&self) -> Status {
        worst_status(&self.certificates())
    }
}
