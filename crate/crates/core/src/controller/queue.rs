use std::collections::VecDeque;

use super::intent::SemanticGoal;
use crate::error::{Error, Result};

pub const DEFAULT_QUEUE_CAPACITY: usize = 16;

/// Goals detected while a task is running, served first in, first out.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalQueue {
    capacity: usize,
    items: VecDeque<SemanticGoal>,
    dropped: Vec<String>,
}

impl Default for GoalQueue {
    fn default() -> Self {
        Self::new(DEFAULT_QUEUE_CAPACITY)
    }
}

impl GoalQueue {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            items: VecDeque::new(),
            dropped: Vec::new(),
        }
    }

    /// Rejects the goal when full; the drop is remembered.
    pub fn push(&mut self, goal: SemanticGoal) -> Result<()> {
        if self.items.len() >= self.capacity {
            self.dropped.push(goal.id.clone());
            return Err(Error::QueueOverflow {
                capacity: self.capacity,
                goal: goal.id,
            });
        }
        self.items.push_back(goal);
        Ok(())
    }

    pub fn pop(&mut self) -> Option<SemanticGoal> {
        self.items.pop_front()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dropped(&self) -> &[String] {
        &self.dropped
    }
}
