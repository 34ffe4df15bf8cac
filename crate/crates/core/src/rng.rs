//! SplitMix64, the only source of randomness in the crate.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 generator state.
///
/// `Rng` is a plain value. [`splitmix64_next`] returns the advanced state
/// together with the output; [`Rng::next_u64`] is the in-place shorthand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rng {
    pub state: u64,
}

/// Advances `rng` by one step of the SplitMix64 recurrence.
pub fn splitmix64_next(rng: Rng) -> (Rng, u64) {
    let state = rng.state.wrapping_add(GOLDEN_GAMMA);
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (Rng { state }, z ^ (z >> 31))
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        let (next, out) = splitmix64_next(*self);
        *self = next;
        out
    }

    /// Uniform double in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `next_u64() mod bound`. The modulo bias is part of the reproducible
    /// contract and is left in.
    pub fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        (self.next_u64() % bound as u64) as usize
    }

    /// Partial Fisher–Yates: after the call the first `m` entries of
    /// `items` hold the draw. Step `t` swaps `t` with `t + (next mod (n - t))`.
    pub fn partial_shuffle<T>(&mut self, items: &mut [T], m: usize) {
        let n = items.len();
        for t in 0..m.min(n) {
            let j = t + self.below(n - t);
            items.swap(t, j);
        }
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        let n = items.len();
        self.partial_shuffle(items, n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_zero_reference_outputs() {
        let (rng, first) = splitmix64_next(Rng::new(0));
        assert_eq!(first, 0xE220_A839_7B1D_CDAF);
        let (_, second) = splitmix64_next(rng);
        assert_eq!(second, 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn value_and_in_place_agree() {
        let mut a = Rng::new(99);
        let mut b = Rng::new(99);
        for _ in 0..32 {
            let (next, out) = splitmix64_next(b);
            b = next;
            assert_eq!(a.next_u64(), out);
        }
        assert_eq!(a, b);
    }

    #[test]
    fn repeated_construction_is_identical() {
        for seed in [0, 1, 7, u64::MAX] {
            let a: Vec<u64> = {
                let mut r = Rng::new(seed);
                (0..16).map(|_| r.next_u64()).collect()
            };
            let b: Vec<u64> = {
                let mut r = Rng::new(seed);
                (0..16).map(|_| r.next_u64()).collect()
            };
            assert_eq!(a, b);
        }
    }

    #[test]
    fn unit_interval() {
        let mut r = Rng::new(3);
        for _ in 0..10_000 {
            let u = r.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn shuffle_seed_42_reference() {
        let mut idx: Vec<usize> = (0..5).collect();
        Rng::new(42).shuffle(&mut idx);
        assert_eq!(idx, vec![3, 4, 2, 0, 1]);
    }
}
