use std::collections::HashMap;
use std::hash::Hash;
use std::sync::RwLock;

/// Get-or-compute store shared by the recursion engines.
///
/// Lookups take a read lock; the first write for a key wins and later
/// writers get the stored value back. No lock is held while a value is being
/// computed, so two threads may race on the same key; both compute the same
/// deterministic value.
#[derive(Debug)]
pub struct Memo<K, V> {
    map: RwLock<HashMap<K, V>>,
}

impl<K, V> Default for Memo<K, V> {
    fn default() -> Self {
        Self {
            map: RwLock::new(HashMap::new()),
        }
    }
}

impl<K: Eq + Hash + Clone, V: Clone> Memo<K, V> {
    pub fn get(&self, key: &K) -> Option<V> {
        self.map.read().expect("memo poisoned").get(key).cloned()
    }

    /// Stores `value` unless `key` is already present; returns the stored value.
    pub fn insert(&self, key: K, value: V) -> V {
        self.map
            .write()
            .expect("memo poisoned")
            .entry(key)
            .or_insert(value)
            .clone()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("memo poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.map.write().expect("memo poisoned").clear();
    }

    pub fn snapshot(&self) -> Vec<(K, V)> {
        self.map
            .read()
            .expect("memo poisoned")
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_write_wins() {
        let memo = Memo::default();
        assert_eq!(memo.insert(1, "a"), "a");
        assert_eq!(memo.insert(1, "b"), "a");
        assert_eq!(memo.get(&1), Some("a"));
        assert_eq!(memo.len(), 1);
        memo.clear();
        assert!(memo.is_empty());
    }

    #[test]
    fn concurrent_inserts_store_once() {
        let memo: Memo<u32, u32> = Memo::default();
        std::thread::scope(|s| {
            for _ in 0..8 {
                let memo = &memo;
                s.spawn(move || {
                    for k in 0..100 {
                        memo.insert(k, k * 10);
                    }
                });
            }
        });
        assert_eq!(memo.len(), 100);
        assert!((0..100).all(|k| memo.get(&k) == Some(k * 10)));
    }
}
