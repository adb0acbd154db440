//! Seed derivation for benchmark cells. Masks depend on the master seed and
//! the cell coordinates (day, missingness level, trial) — never on the
//! method or on scheduling order — so every method inside a cell sees the
//! same mask and reruns reproduce the grid exactly.

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives the mask seed for a grid cell: successive SplitMix64 mixes of the
/// master seed with the day index, the level index and the trial index.
pub fn mask_seed(master: u64, day: u64, level_index: u64, trial: u64) -> u64 {
    let s = mix(master ^ mix(day.wrapping_add(1)));
    let s = mix(s ^ mix(level_index.wrapping_add(0x100)));
    mix(s ^ mix(trial.wrapping_add(0x10000)))
}
