//! Small shared helpers.

/// splitmix64 finalizer; good enough to decorrelate seed streams.
pub(crate) fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derives an RNG seed from a base seed and an item set. Items are folded
/// in sorted order so the result does not depend on enumeration order.
pub(crate) fn derive_seed(base: u64, tag: u64, items: &[u32]) -> u64 {
    let mut sorted: Vec<u32> = items.to_vec();
    sorted.sort_unstable();
    let mut h = mix64(base ^ mix64(tag));
    for id in sorted {
        h = mix64(h ^ u64::from(id));
    }
    h
}
