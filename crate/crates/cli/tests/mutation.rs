//! The extraversion-ordering check must notice a broken extraversion rule.

use marker_crowds::{MarkerInput, MarkerWeighting, StandardWeighting, WeighingContext, WeightedMarker};
use marker_crowds_cli::extraversion_ordering;

/// Extraversion read back to front: `E` replaced by `1 - E`.
struct SwappedExtraversion;

impl MarkerWeighting<f64> for SwappedExtraversion {
    fn weigh(&self, ctx: &WeighingContext<f64>, markers: &[MarkerInput<f64>]) -> Vec<WeightedMarker> {
        let swapped = WeighingContext { extraversion: 1.0 - ctx.extraversion, ..*ctx };
        StandardWeighting.weigh(&swapped, markers)
    }
}

#[test]
fn swapped_extraversion_fails_the_ordering() {
    let outcome = extraversion_ordering(10, &SwappedExtraversion);
    println!("{}", outcome.line());
    assert!(!outcome.passed);
}

#[test]
fn standard_rule_passes_the_ordering() {
    let outcome = extraversion_ordering(3, &StandardWeighting);
    assert!(outcome.passed, "{}", outcome.line());
}
