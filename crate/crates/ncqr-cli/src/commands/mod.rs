pub mod adjust;
pub mod evaluate;
pub mod fit;
pub mod simulate;

use std::time::Instant;

/// Milliseconds elapsed since `start`, saturating into the manifest's u64.
pub(crate) fn elapsed_ms(start: Instant) -> u64 {
    u64::try_from(start.elapsed().as_millis()).unwrap_or(u64::MAX)
}
