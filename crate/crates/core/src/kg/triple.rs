use serde::{Deserialize, Serialize};

/// One directed fact, `(head, relation, tail)`, by dense integer id.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
pub struct Triple {
    pub head: u32,
    pub relation: u32,
    pub tail: u32,
}

impl Triple {
    pub fn new(head: u32, relation: u32, tail: u32) -> Self {
        Triple {
            head,
            relation,
            tail,
        }
    }

    /// Replaces the head, keeping relation and tail.
    pub fn with_head(self, head: u32) -> Self {
        Triple { head, ..self }
    }

    /// Replaces the tail, keeping head and relation.
    pub fn with_tail(self, tail: u32) -> Self {
        Triple { tail, ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corruption_helpers_touch_one_slot() {
        let t = Triple::new(1, 2, 3);
        assert_eq!(t.with_head(9), Triple::new(9, 2, 3));
        assert_eq!(t.with_tail(9), Triple::new(1, 2, 9));
    }
}
