//! Numerical tolerance policy shared by the verifiers.

/// Relative tolerance for exact identities evaluated with exhaustive plans.
pub const IDENTITY_REL: f64 = 1e-9;

/// Slack for inequalities in the witness chain, relative to the larger side.
pub const WITNESS_SLACK: f64 = 1e-10;

/// Slack for harness-level inequalities under exhaustive plans, relative to
/// `max(1, |lhs|, |rhs|)`.
pub const HARNESS_SLACK: f64 = 1e-8;

/// Standard errors of statistical slack allowed under Monte Carlo plans.
pub const MC_SIGMAS: f64 = 4.0;

/// `|a − b| ≤ 1e−9 · max(|a|, |b|) + 4σ`.
pub fn identity_holds(a: f64, b: f64, std_error: f64) -> bool {
    (a - b).abs() <= IDENTITY_REL * a.abs().max(b.abs()) + MC_SIGMAS * std_error
}

/// `lhs ≤ rhs` up to witness slack and statistical error.
pub fn witness_le(lhs: f64, rhs: f64, std_error: f64) -> bool {
    lhs <= rhs + WITNESS_SLACK * lhs.abs().max(rhs.abs()) + MC_SIGMAS * std_error
}

/// Slack used by harness verdicts for a margin `rhs − lhs`.
pub fn harness_slack(lhs: f64, rhs: f64, std_error: f64) -> f64 {
    if std_error > 0.0 {
        MC_SIGMAS * std_error
    } else {
        HARNESS_SLACK * 1f64.max(lhs.abs()).max(rhs.abs())
    }
}
