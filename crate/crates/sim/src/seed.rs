//! Splittable seeds: one root seed fans out to independent per-run streams.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of child `index` under `root`. Distinct indices give unrelated streams.
pub fn split_seed(root: u64, index: u64) -> u64 {
    splitmix64(splitmix64(root) ^ index.wrapping_mul(GOLDEN))
}

/// Topology and protocol draws of one replication use separate streams.
pub fn topology_seed(run_seed: u64) -> u64 {
    split_seed(run_seed, 0x746f_706f)
}
