//! Structural validation of a network model.

use std::fmt;

use super::NetworkModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    /// Blocks all analysis.
    Error,
    /// Transient analysis remains meaningful; stationary analysis may not.
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    fn error(&mut self, message: String) {
        self.issues.push(ValidationIssue {
            severity: Severity::Error,
            message,
        });
    }

    fn warning(&mut self, message: String) {
        self.issues.push(ValidationIssue {
            severity: Severity::Warning,
            message,
        });
    }

    /// No error-level issues (warnings allowed).
    pub fn is_valid(&self) -> bool {
        self.issues.iter().all(|i| i.severity != Severity::Error)
    }

    /// No issues at all.
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "model is well-formed");
        }
        for issue in &self.issues {
            let tag = match issue.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            writeln!(f, "  [{tag}] {}", issue.message)?;
        }
        Ok(())
    }
}

impl NetworkModel {
    /// Check every structural invariant and return the full list of
    /// violations. Pure: validating twice yields identical reports.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.n_queues;
        let i_dim = self.n_env;

        if n == 0 {
            report.error("model must have at least one queue".into());
        }
        if i_dim == 0 {
            report.error("model must have at least one environment state".into());
        }
        if self.arrival_rates.dim() != (i_dim, n) {
            report.error(format!(
                "arrival rate matrix has shape {:?}, expected ({i_dim}, {n})",
                self.arrival_rates.dim()
            ));
            return report;
        }
        if self.departure_rates.dim() != (i_dim, n, n + 1) {
            report.error(format!(
                "departure rate tensor has shape {:?}, expected ({i_dim}, {n}, {})",
                self.departure_rates.dim(),
                n + 1
            ));
            return report;
        }

        for i in 0..i_dim {
            for q in 0..n {
                let rate = self.arrival_rates[[i, q]];
                if !rate.is_finite() || rate < 0.0 {
                    report.error(format!(
                        "negative or non-finite arrival rate at (env {}, queue {}): {rate}",
                        i + 1,
                        q + 1
                    ));
                }
                for target in 0..=n {
                    let mu = self.departure_rates[[i, q, target]];
                    if !mu.is_finite() || mu < 0.0 {
                        report.error(format!(
                            "negative or non-finite departure rate at (env {}, queue {}, target {target}): {mu}",
                            i + 1,
                            q + 1
                        ));
                    }
                }
                // self-routing is a no-op service completion; reject nonzero
                // to avoid silent dead weight in the drift matrix
                let self_rate = self.departure_rates[[i, q, q + 1]];
                if self_rate != 0.0 {
                    report.error(format!(
                        "self-routing departure rate at (env {}, queue {}) must be 0, got {self_rate}",
                        i + 1,
                        q + 1
                    ));
                }
            }
        }

        for (idx, tr) in self.transitions.iter().enumerate() {
            if tr.from_env >= i_dim || tr.to_env >= i_dim {
                report.error(format!(
                    "transition {} references environment states ({}, {}) outside 1..={}",
                    idx + 1,
                    tr.from_env + 1,
                    tr.to_env + 1,
                    i_dim
                ));
                continue;
            }
            if !tr.rate.is_finite() || tr.rate < 0.0 {
                report.error(format!(
                    "transition {} has negative or non-finite rate {}",
                    idx + 1,
                    tr.rate
                ));
            }
            if tr.matrix.dim() != (n, n) {
                report.error(format!(
                    "transition {} has matrix shape {:?}, expected ({n}, {n})",
                    idx + 1,
                    tr.matrix.dim()
                ));
                continue;
            }
            if tr.loss_weights.len() != n {
                report.error(format!(
                    "transition {} has {} loss weights, expected {n}",
                    idx + 1,
                    tr.loss_weights.len()
                ));
                continue;
            }
            // a customer is counted lost only if its column relocates nowhere
            for q in 0..n {
                if tr.loss_weights[q] > 0 {
                    let col_sum: u64 = (0..n).map(|r| tr.matrix[[r, q]]).sum();
                    if col_sum != 0 {
                        report.error(format!(
                            "transition {}: queue {} has loss weight {} but its column also relocates customers",
                            idx + 1,
                            q + 1,
                            tr.loss_weights[q]
                        ));
                    }
                }
            }
        }

        if i_dim > 0 && !self.env_digraph_strongly_connected() {
            report.warning(
                "environment chain is not irreducible (aggregated digraph not strongly connected); \
                 stationary analysis is unreliable"
                    .into(),
            );
        }

        report
    }

    /// Strong connectivity of the digraph with an edge (i, j), i != j,
    /// whenever some transition i -> j has positive rate.
    fn env_digraph_strongly_connected(&self) -> bool {
        let i_dim = self.n_env;
        if i_dim <= 1 {
            return true;
        }
        let mut fwd = vec![vec![]; i_dim];
        let mut bwd = vec![vec![]; i_dim];
        for tr in &self.transitions {
            if tr.from_env != tr.to_env
                && tr.rate > 0.0
                && tr.from_env < i_dim
                && tr.to_env < i_dim
            {
                fwd[tr.from_env].push(tr.to_env);
                bwd[tr.to_env].push(tr.from_env);
            }
        }
        let reaches_all = |adj: &Vec<Vec<usize>>| {
            let mut seen = vec![false; i_dim];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reaches_all(&fwd) && reaches_all(&bwd)
    }
}
