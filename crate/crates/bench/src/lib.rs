//! Shared inputs for the criterion benches.

use std::sync::Arc;

use qbh_core::Chart;

/// The guarded-annulus chart used by the flagship demo system.
pub fn annulus_chart() -> Arc<Chart> {
    Chart::new(
        vec!["x1".into(), "x2".into(), "x3".into()],
        vec![(0.6, 2.0), (-1.5, 1.5), (-2.0, 2.0)],
        vec![],
    )
    .unwrap()
}
