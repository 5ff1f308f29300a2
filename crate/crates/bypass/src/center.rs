//! Random center priorities and coverage depths.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::runtime::ceil_log2;

/// Per-vertex priorities in `1..=levels` with P(priority = j)
/// proportional to 2^-j, plus the depth cutoff below which a center of a
/// given priority covers its tree edges.
#[derive(Clone, Debug)]
pub struct CenterAssignment {
    pub priorities: Vec<u8>,
    pub levels: usize,
    pub seed: u64,
    pub gamma: f64,
    ln_n: f64,
}

impl CenterAssignment {
    /// A priority-k center covers tree edges down to this depth.
    pub fn cover_depth(&self, priority: u8) -> u32 {
        let d = (self.gamma * (1u64 << priority.min(62)) as f64 * self.ln_n).ceil();
        (d as u32).max(1)
    }
}

/// Draw priorities for `n` vertices. Exact integer thresholds: priority j
/// has weight 2^(levels-j) out of 2^levels - 1, which realizes
/// P(j) = c / 2^j with c normalizing over j = 1..=levels.
pub fn assign_priorities(n: usize, seed: u64, gamma: f64) -> CenterAssignment {
    let levels = (ceil_log2(n as u64) as usize).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: u64 = (1u64 << levels) - 1;
    let mut priorities = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.gen_range(0..total);
        // cumulative weight of priorities 1..=j is 2^levels - 2^(levels-j)
        let mut j = 1u8;
        while j < levels as u8 {
            let cum = (1u64 << levels) - (1u64 << (levels - j as usize));
            if r < cum {
                break;
            }
            j += 1;
        }
        priorities.push(j);
    }
    CenterAssignment {
        priorities,
        levels,
        seed,
        gamma,
        ln_n: (n.max(2) as f64).ln(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_gets_priority_one() {
        let a = assign_priorities(1, 7, 4.0);
        assert_eq!(a.levels, 1);
        assert_eq!(a.priorities, vec![1]);
    }

    #[test]
    fn same_seed_reproduces() {
        let a = assign_priorities(512, 99, 4.0);
        let b = assign_priorities(512, 99, 4.0);
        assert_eq!(a.priorities, b.priorities);
        let c = assign_priorities(512, 100, 4.0);
        assert_ne!(a.priorities, c.priorities);
    }

    #[test]
    fn counts_concentrate_per_level() {
        // one draw over n = 2^20; count(priority = k) within
        // [n/2^(k+1), 3n/2^(k+1)] for k <= 10
        let n = 1usize << 20;
        let a = assign_priorities(n, 4242, 4.0);
        let mut counts = vec![0u64; a.levels + 1];
        for &p in &a.priorities {
            counts[p as usize] += 1;
        }
        for k in 1..=10usize {
            let lo = (n as u64) >> (k + 1);
            let hi = 3 * ((n as u64) >> (k + 1));
            assert!(
                counts[k] >= lo && counts[k] <= hi,
                "priority {k}: count {} outside [{lo}, {hi}]",
                counts[k]
            );
        }
    }

    #[test]
    fn cover_depth_grows_with_priority() {
        let a = assign_priorities(32, 1, 4.0);
        assert!(a.cover_depth(1) >= 1);
        assert!(a.cover_depth(2) > a.cover_depth(1));
    }
}
