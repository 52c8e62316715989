//! Size caps for the exhaustive parts of the library.

/// Environment variable overriding every size cap below.
pub const MAX_N_ENV: &str = "TTC_VERIFY_MAX_N";

/// Ex-post checkers enumerate all `n!` permutations.
pub const DEFAULT_PERMUTATION_CAP: usize = 6;

/// Full profile sweeps walk `|D|^n` profiles.
pub const DEFAULT_SWEEP_CAP: usize = 4;

pub fn env_override() -> Option<usize> {
    std::env::var(MAX_N_ENV).ok()?.trim().parse().ok()
}

pub fn permutation_cap() -> usize {
    env_override().unwrap_or(DEFAULT_PERMUTATION_CAP)
}

pub fn sweep_cap() -> usize {
    env_override().unwrap_or(DEFAULT_SWEEP_CAP)
}
