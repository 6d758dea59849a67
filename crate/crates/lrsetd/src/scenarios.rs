//! The fifteen structured-missing scenarios for week-long traffic tensors of
//! shape `pairs × 288 × 7` (five-minute intervals, day 0 = Monday).
//!
//! 1: every third interval slice dropped.
//! 2–10: a daily window dropped (11:00–12:00, 10:00–12:00, 10:00–13:00 for
//! ids ≡ 2, 0, 1 mod 3) with 20%, 50% or 80% retention elsewhere (ids 2–4,
//! 5–7, 8–10).
//! 11–15: whole days dropped (Fri; Fri+Sun; Wed+Fri+Sun; Fri+Sat;
//! Fri+Sat+Sun) with 80% retention elsewhere.

use lrsetd_core::MissingSpec;

use crate::error::{CliError, Result};

const FILES: [&str; 15] = [
    include_str!("../presets/missing/01.json"),
    include_str!("../presets/missing/02.json"),
    include_str!("../presets/missing/03.json"),
    include_str!("../presets/missing/04.json"),
    include_str!("../presets/missing/05.json"),
    include_str!("../presets/missing/06.json"),
    include_str!("../presets/missing/07.json"),
    include_str!("../presets/missing/08.json"),
    include_str!("../presets/missing/09.json"),
    include_str!("../presets/missing/10.json"),
    include_str!("../presets/missing/11.json"),
    include_str!("../presets/missing/12.json"),
    include_str!("../presets/missing/13.json"),
    include_str!("../presets/missing/14.json"),
    include_str!("../presets/missing/15.json"),
];

/// Scenario `id` in `1..=15`.
pub fn scenario(id: usize) -> Result<MissingSpec> {
    let text = id
        .checked_sub(1)
        .and_then(|i| FILES.get(i))
        .ok_or_else(|| CliError::Config(format!("missing scenario id {id} outside 1..=15")))?;
    Ok(serde_json::from_str(text).expect("bundled scenarios parse"))
}
