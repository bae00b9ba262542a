//! Measures single-worker KDF throughput and suggests an iteration count for
//! a target hash rate.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::hashcore::{kdf, KdfParams};
use crate::{Error, Result};

pub const MIN_DURATION: Duration = Duration::from_secs(5);
/// Hashes per minute the secure profile aims for on one consumer core.
pub const DEFAULT_TARGET_RATE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub params: KdfParams,
    pub hashes: u64,
    pub elapsed_secs: f64,
    pub rate_per_minute: f64,
}

/// Hashes back to back on the calling thread for at least `duration`, and
/// always at least once.
pub fn measure(params: &KdfParams, duration: Duration) -> Result<Calibration> {
    params.validate()?;
    let salt = [0x5au8; 32];
    let start = Instant::now();
    let mut hashes = 0u64;
    loop {
        kdf(&hashes.to_le_bytes(), &salt, params)?;
        hashes += 1;
        if start.elapsed() >= duration {
            break;
        }
    }
    let elapsed_secs = start.elapsed().as_secs_f64();
    Ok(Calibration { params: *params, hashes, elapsed_secs, rate_per_minute: hashes as f64 * 60.0 / elapsed_secs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub target_rate_per_minute: f64,
    pub memory_kib: u32,
    pub iterations: u32,
    pub predicted_rate_per_minute: f64,
}

/// Iteration count reaching `target_rate` at fixed memory, assuming the
/// cost of a hash scales linearly with its pass count.
pub fn suggest_iterations(calibration: &Calibration, target_rate: f64) -> Result<Suggestion> {
    if !(target_rate > 0.0 && target_rate.is_finite()) {
        return Err(Error::InvalidParams(format!("target rate must be positive, got {target_rate}")));
    }
    let current = calibration.params.iterations as f64;
    let scaled = current * calibration.rate_per_minute / target_rate;
    let iterations = scaled.round().clamp(1.0, u32::MAX as f64) as u32;
    Ok(Suggestion {
        target_rate_per_minute: target_rate,
        memory_kib: calibration.params.memory_kib,
        iterations,
        predicted_rate_per_minute: calibration.rate_per_minute * current / iterations as f64,
    })
}
