use core::cell::Cell;

/// Search budget polled by the exact solver once per explored node.
pub trait Budget {
    fn exhausted(&self) -> bool;
}

/// Never runs out.
#[derive(Clone, Copy, Debug, Default)]
pub struct Unlimited;

impl Budget for Unlimited {
    fn exhausted(&self) -> bool {
        false
    }
}

/// Runs out after a fixed number of polls.
#[derive(Debug)]
pub struct NodeLimit {
    remaining: Cell<u64>,
}

impl NodeLimit {
    pub fn new(nodes: u64) -> Self {
        NodeLimit {
            remaining: Cell::new(nodes),
        }
    }
}

impl Budget for NodeLimit {
    fn exhausted(&self) -> bool {
        let left = self.remaining.get();
        if left == 0 {
            return true;
        }
        self.remaining.set(left - 1);
        false
    }
}

impl<B: Budget + ?Sized> Budget for &B {
    fn exhausted(&self) -> bool {
        (**self).exhausted()
    }
}
