//! Bounded FIFO experience pool with uniform with-replacement sampling.

use std::collections::VecDeque;

use crate::rng::SeededRng;

#[derive(Clone, Debug)]
pub struct ReplayPool<T> {
    items: VecDeque<T>,
    capacity: usize,
}

impl<T> ReplayPool<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayPool { items: VecDeque::with_capacity(capacity), capacity }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Insert, evicting the oldest item when full.
    pub fn push(&mut self, item: T) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(item);
    }

    pub fn get(&self, index: usize) -> &T {
        &self.items[index]
    }

    /// Uniform with-replacement sample of item indices.
    pub fn sample_indices(&self, count: usize, rng: &mut SeededRng) -> Vec<usize> {
        assert!(!self.items.is_empty(), "cannot sample an empty pool");
        (0..count).map(|_| rng.next_below(self.items.len())).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifo_eviction_keeps_size_constant() {
        let mut pool = ReplayPool::new(4);
        for i in 0..10 {
            pool.push(i);
        }
        assert_eq!(pool.len(), 4);
        let contents: Vec<i32> = pool.iter().copied().collect();
        assert_eq!(contents, vec![6, 7, 8, 9]);
    }

    #[test]
    fn sampling_is_uniform_chi_squared() {
        let mut pool = ReplayPool::new(32);
        for i in 0..32 {
            pool.push(i);
        }
        let mut rng = SeededRng::new(55);
        let n = 10_000usize;
        let mut counts = vec![0usize; 32];
        for idx in pool.sample_indices(n, &mut rng) {
            counts[idx] += 1;
        }
        let expected = n as f64 / 32.0;
        let stat: f64 =
            counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 31 degrees of freedom: mean 31, sd sqrt(62); ~3 sigma bound.
        assert!(stat < 31.0 + 3.0 * 62.0f64.sqrt(), "chi-squared {stat}");
    }
}
