const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over `seed` and `step`, each as 8 big-endian bytes.
pub fn fnv1a_step(seed: u64, step: u64) -> u64 {
    seed.to_be_bytes()
        .iter()
        .chain(step.to_be_bytes().iter())
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// Index of the candidate fired at `step` among `k` canonically ordered ones.
pub fn choose(seed: u64, step: u64, k: usize) -> usize {
    assert!(k > 0, "no candidate to choose from");
    (fnv1a_step(seed, step) % k as u64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Byte-at-a-time reference straight from the FNV-1a definition.
    fn reference(bytes: &[u8]) -> u64 {
        let mut h: u64 = 14695981039346656037;
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(1099511628211);
        }
        h
    }

    #[test]
    fn matches_reference_on_pairs() {
        for (seed, step) in [(0u64, 0u64), (1, 0), (0, 1), (42, 7), (u64::MAX, 12345)] {
            let mut bytes = seed.to_be_bytes().to_vec();
            bytes.extend_from_slice(&step.to_be_bytes());
            assert_eq!(fnv1a_step(seed, step), reference(&bytes));
        }
    }

    #[test]
    fn empty_input_is_offset_basis() {
        assert_eq!(reference(&[]), FNV_OFFSET);
        // published test vector: FNV-1a 64 of "a"
        assert_eq!(reference(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn choice_is_in_range() {
        for step in 0..100 {
            assert!(choose(3, step, 5) < 5);
        }
        assert_eq!(choose(9, 9, 1), 0);
    }
}
