use serde::Serialize;

/// One failed instance of a checked equation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub witness: String,
    pub lhs: String,
    pub rhs: String,
}

/// Outcome of an exhaustive check: how many instances were examined and
/// which of them failed, in enumeration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub checked: usize,
    pub failures: Vec<Failure>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn first_failure(&self) -> Option<&Failure> {
        self.failures.first()
    }

    pub(crate) fn record(&mut self, outcome: Option<Failure>) {
        self.checked += 1;
        self.failures.extend(outcome);
    }

    /// Collects per-instance outcomes, keeping their order.
    pub(crate) fn from_outcomes(outcomes: impl IntoIterator<Item = Option<Failure>>) -> Self {
        let mut r = CheckReport::default();
        for o in outcomes {
            r.record(o);
        }
        r
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.checked += other.checked;
        self.failures.extend(other.failures);
    }
}
