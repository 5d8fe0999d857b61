use crate::env::Transition;

/// Fixed-capacity ring buffer; the oldest transition is evicted when full.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer<T> {
    items: Vec<Transition<T>>,
    capacity: usize,
    head: usize,
}

impl<T: Clone> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { items: Vec::with_capacity(capacity.min(1 << 16)), capacity, head: 0 }
    }

    pub fn push(&mut self, t: Transition<T>) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.head] = t;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Storage-order access; indices are stable until the next push.
    pub fn get(&self, i: usize) -> &Transition<T> {
        &self.items[i]
    }

    /// Oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition<T>> {
        let (newer, older) = self.items.split_at(self.head);
        older.iter().chain(newer.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(r: f64) -> Transition<f64> {
        Transition { state: vec![r], action: 0, next_state: vec![r + 1.0], reward: r, done: false }
    }

    #[test]
    fn ring_keeps_latest() {
        let mut b = ReplayBuffer::new(2);
        for r in [1.0, 2.0, 3.0] {
            b.push(t(r));
        }
        assert_eq!(b.len(), 2);
        let kept: Vec<_> = b.iter().cloned().collect();
        assert_eq!(kept, vec![t(2.0), t(3.0)]);
        b.push(t(4.0));
        let kept: Vec<f64> = b.iter().map(|x| x.reward).collect();
        assert_eq!(kept, vec![3.0, 4.0]);
    }
}
