//! Human-readable report rendering.

use qbh_core::report::CheckOutcome;
use qbh_core::sdef::RunReport;
use qbh_core::zero::ZeroVerdict;

pub fn print_human(report: &RunReport, title: &str) {
    println!(
        "{title}  (tol {:.0e}, {} samples, seed {})",
        report.policy.tolerance, report.policy.samples, report.policy.seed
    );
    for check in &report.checks {
        let mark = if check.matched { "ok " } else { "MISS" };
        println!("[{mark}] {} ({})", check.id, check.kind);
        for entry in &check.entries {
            let status = if entry.matched { " " } else { "!" };
            println!(
                "  {status} {:<28} {:<10} {}",
                entry.id,
                if entry.passed { "pass" } else { "fail" },
                describe(&entry.outcome)
            );
        }
        println!("      {:.1} ms", check.wall_ms);
    }
    println!("overall: {}", report.overall);
}

fn describe(outcome: &CheckOutcome) -> String {
    match outcome {
        CheckOutcome::Zero { verdict } | CheckOutcome::SignedZero { verdict, .. } => {
            let sign = match outcome {
                CheckOutcome::SignedZero { sign, .. } => match sign {
                    1 => " (sign +1)",
                    -1 => " (sign -1)",
                    _ => " (no sign matched)",
                },
                _ => "",
            };
            match verdict {
                ZeroVerdict::ExactZero => format!("exact-zero{sign}"),
                ZeroVerdict::NumericallyZero {
                    max_residual,
                    samples,
                } => format!("numerically-zero (max residual {max_residual:.2e}, {samples} samples){sign}"),
                ZeroVerdict::NonZero { residual, witness } => format!(
                    "non-zero (residual {residual:.3e} at {}){sign}",
                    format_point(witness)
                ),
            }
        }
        CheckOutcome::MinAbs { min, threshold, at } => format!(
            "min |value| {min:.3e} (threshold {threshold:.0e}) at {}",
            format_point(at)
        ),
        CheckOutcome::Rank {
            expected,
            full_rank_everywhere,
            min_relative_pivot,
            worst_point,
        } => {
            if *full_rank_everywhere {
                format!("rank {expected} everywhere (min pivot ratio {min_relative_pivot:.2e})")
            } else {
                format!("rank deficient at {}", format_point(worst_point))
            }
        }
    }
}

fn format_point(p: &[f64]) -> String {
    let coords: Vec<String> = p.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", coords.join(", "))
}
