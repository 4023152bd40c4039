//! The built-in demo systems: each one is a structure-definition file
//! shipped with the crate, so the `demo` command, file-driven runs, and
//! the test suite all share one source of truth.

use crate::sdef::{run_definition, RunReport, SdefError, StructureDefinition};
use crate::zero::Policy;

/// A named built-in system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fixture {
    pub name: &'static str,
    /// One-line summary shown by `list-demos`.
    pub summary: &'static str,
    /// The structure-definition source.
    pub source: &'static str,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "example2-derived",
        summary: "rotation + height tensor with the angular Hamiltonian; the full ten-point assembly audit passes",
        source: include_str!("../fixtures/example2-derived.toml"),
    },
    Fixture {
        name: "example2-paper",
        summary: "the published closed-form extension field; sign discrepancies pinned as regressions under both operator orientations",
        source: include_str!("../fixtures/example2-paper.toml"),
    },
    Fixture {
        name: "negative-theorem2",
        summary: "radial Hamiltonian counterexample: the algebra holds but the second tensor fails the Jacobi identity at relation 6b",
        source: include_str!("../fixtures/negative-theorem2.toml"),
    },
    Fixture {
        name: "so3-jacobi",
        summary: "Jacobi structure from the rotation algebra with (A, B, C) = (0, -1, -1), all certificates exact",
        source: include_str!("../fixtures/so3-jacobi.toml"),
    },
    Fixture {
        name: "hojman",
        summary: "one-symmetry construction in dimension two with conserved scaling, plus the 2-d bi-Hamiltonian conditions",
        source: include_str!("../fixtures/hojman.toml"),
    },
    Fixture {
        name: "linear-abelian",
        summary: "linear abelian extension at n = 2 with a logarithmic third field solving the three-relation algebra",
        source: include_str!("../fixtures/linear-abelian.toml"),
    },
];

impl Fixture {
    pub fn definition(&self) -> Result<StructureDefinition, SdefError> {
        StructureDefinition::parse(self.source)
    }

    pub fn run(&self, policy: &Policy) -> Result<RunReport, SdefError> {
        run_definition(&self.definition()?, policy, false)
    }
}

pub fn by_name(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

/// Result of one fixture execution: the report plus whether every check
/// matched its expected verdicts.
#[derive(Debug, Clone)]
pub struct FixtureRun {
    pub name: &'static str,
    pub report: RunReport,
    pub matched: bool,
}

/// Runs every built-in fixture, comparing verdicts against the expected
/// annotations in its definition.
pub fn run_all(policy: &Policy) -> Result<Vec<FixtureRun>, SdefError> {
    FIXTURES
        .iter()
        .map(|f| {
            let report = f.run(policy)?;
            let matched = report.overall_pass();
            Ok(FixtureRun {
                name: f.name,
                report,
                matched,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_six_fixtures_parse() {
        assert_eq!(FIXTURES.len(), 6);
        for f in FIXTURES {
            let def = f.definition().unwrap_or_else(|e| panic!("{}: {e}", f.name));
            assert!(!def.checks.is_empty(), "{} has no checks", f.name);
        }
    }

    #[test]
    fn lookup_by_name() {
        assert!(by_name("so3-jacobi").is_some());
        assert!(by_name("nope").is_none());
    }

    #[test]
    fn every_fixture_matches_its_expectations() {
        let runs = run_all(&Policy::default()).unwrap();
        for run in &runs {
            assert!(
                run.matched,
                "{} mismatched: {}",
                run.name,
                summarize_mismatches(&run.report)
            );
        }
    }

    #[test]
    fn tightened_tolerance_degrades_gracefully() {
        // At 1e-14 the transcendental residuals may cross the threshold;
        // runs must complete and report, never crash.
        let policy = Policy {
            tolerance: 1e-14,
            ..Policy::default()
        };
        for f in FIXTURES {
            let report = f.run(&policy).unwrap_or_else(|e| panic!("{}: {e}", f.name));
            assert!(!report.checks.is_empty());
        }
    }

    #[test]
    fn seed_independence_of_flagship_audit() {
        for seed in 1..=5 {
            let policy = Policy::default().with_seed(seed);
            let run = by_name("example2-derived").unwrap().run(&policy).unwrap();
            assert!(run.overall_pass(), "seed {seed}: {}", summarize_mismatches(&run));
        }
    }

    fn summarize_mismatches(report: &RunReport) -> String {
        let mut out = String::new();
        for c in &report.checks {
            for e in &c.entries {
                if !e.matched {
                    out.push_str(&format!(
                        "[{}/{}] passed={} expected={} outcome={:?}; ",
                        c.id, e.id, e.passed, e.expected, e.outcome
                    ));
                }
            }
        }
        out
    }
}
