//! Fixed, non-learned policies.

use super::{ActionDist, Interpreter, Programmer, StepView, TokenDist};
use crate::corpus::{TokenId, EOS};
use crate::program::{Action, Program};

/// Streaming wait-k: keep `k` tokens ahead of the output, then write.
#[derive(Debug, Clone, Copy)]
pub struct WaitK {
    k: usize,
}

impl WaitK {
    pub fn new(k: usize) -> Self {
        WaitK { k: k.max(1) }
    }
}

impl Programmer for WaitK {
    fn action_dist(&mut self, view: &StepView<'_>) -> ActionDist {
        let read = !view.source_exhausted && view.reads() < self.k + view.writes();
        ActionDist::certain(if read { Action::Read } else { Action::Write })
    }
}

/// Replays a program, then keeps writing.
#[derive(Debug, Clone)]
pub struct Scripted {
    program: Program,
}

impl Scripted {
    pub fn new(program: Program) -> Self {
        Scripted { program }
    }
}

impl Programmer for Scripted {
    fn action_dist(&mut self, view: &StepView<'_>) -> ActionDist {
        let a = self
            .program
            .actions()
            .get(view.actions.len())
            .copied()
            .unwrap_or(Action::Write);
        ActionDist::certain(a)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AlwaysRead;

impl Programmer for AlwaysRead {
    fn action_dist(&mut self, _: &StepView<'_>) -> ActionDist {
        ActionDist::certain(Action::Read)
    }
}

/// Writes the reference translation token by token, then ends the sentence.
#[derive(Debug, Clone)]
pub struct Teacher {
    reference: Vec<TokenId>,
}

impl Teacher {
    pub fn new(reference: Vec<TokenId>) -> Self {
        Teacher { reference }
    }
}

impl Interpreter for Teacher {
    fn token_dist(&mut self, view: &StepView<'_>) -> TokenDist {
        TokenDist::Point(self.reference.get(view.writes()).copied().unwrap_or(EOS))
    }
}

/// Copies source token `j` at the `j`-th WRITE; ends the sentence once it runs out.
#[derive(Debug, Clone, Copy)]
pub struct Echo;

impl Interpreter for Echo {
    fn token_dist(&mut self, view: &StepView<'_>) -> TokenDist {
        TokenDist::Point(view.source.get(view.writes()).copied().unwrap_or(EOS))
    }
}
