use alloc::string::String;
use alloc::vec::Vec;

/// One violated rule. `code` is a stable identifier such as `MISSING_START`
/// or `C3_CAPACITY`; `reference` names the offending node, edge, container or
/// item, and is `None` for graph-wide findings.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub reference: Option<String>,
    pub code: &'static str,
    pub message: String,
}

impl Violation {
    pub fn new(code: &'static str, reference: Option<String>, message: String) -> Self {
        Violation {
            reference,
            code,
            message,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    /// Builds a report, ordering violations by reference (graph-wide first)
    /// and then by code.
    pub fn from_violations(mut violations: Vec<Violation>) -> Self {
        violations.sort_by(|a, b| {
            a.reference
                .cmp(&b.reference)
                .then_with(|| a.code.cmp(b.code))
                .then_with(|| a.message.cmp(&b.message))
        });
        ValidationReport { violations }
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn is_correct(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    pub fn count_code(&self, code: &str) -> usize {
        self.violations.iter().filter(|v| v.code == code).count()
    }

    pub fn merge(self, other: ValidationReport) -> ValidationReport {
        let mut all = self.violations;
        all.extend(other.violations);
        ValidationReport::from_violations(all)
    }
}
