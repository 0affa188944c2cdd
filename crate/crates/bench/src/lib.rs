//! Benchmark fixtures shared by the criterion targets in `benches/`.

use vnfscale_core::SystemParams;

/// Chains of increasing size at 95% of full capacity load.
pub fn solver_sizes() -> Vec<(&'static str, SystemParams)> {
    [
        ("n0=110,k=28,K=250", (130.0, 110, 28, 250)),
        ("n0=250,k=50,K=1000", (240.0, 250, 50, 1000)),
        ("n0=500,k=100,K=2000", (480.0, 500, 100, 2000)),
    ]
    .into_iter()
    .map(|(name, (lambda, n0, k, cap))| (name, SystemParams::new(lambda, 1.0, 0.005, n0, k, cap).unwrap()))
    .collect()
}
