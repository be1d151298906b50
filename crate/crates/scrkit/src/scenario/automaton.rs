//! Program-counter automaton.
//!
//! Each sentence gets a program counter equal to its 1-based position; pc
//! `n+1` is the accepting position reached exactly by complete runs. Sequence
//! chains positions; iteration adds a skip edge (zero repetitions) and a back
//! edge (another repetition), both epsilon. Epsilon edges are eliminated
//! during construction, so every remaining edge is labeled by a sentence and
//! the engine tracks a single pc value.

use super::{Program, Scenario};

pub type Pc = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct PcAutomaton {
    /// Number of sentences `n`; pcs range over `1..=n+1`.
    pub sentence_count: usize,
    pub initial: Pc,
    /// `accepting[pc]` — index 0 is unused padding.
    pub accepting: Vec<bool>,
    /// `edges[pc]` — sentence-labeled transitions, sorted by
    /// (sentence index, target pc); index 0 is unused padding.
    pub edges: Vec<Vec<(usize, Pc)>>,
}

impl PcAutomaton {
    pub fn state_count(&self) -> usize {
        self.sentence_count + 1
    }

    pub fn accepting_pc(&self) -> Pc {
        self.sentence_count + 1
    }

    /// NFA membership for a sequence of sentence indices.
    pub fn accepts(&self, seq: &[usize]) -> bool {
        let mut current = vec![self.initial];
        for &symbol in seq {
            let mut next: Vec<Pc> = Vec::new();
            for &pc in &current {
                for &(sentence, target) in &self.edges[pc] {
                    if sentence == symbol && !next.contains(&target) {
                        next.push(target);
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            current = next;
        }
        current.iter().any(|&pc| self.accepting[pc])
    }
}

/// Epsilon-NFA under construction. Each sentence contributes one labeled
/// edge between two dedicated nodes; sequencing and iteration wire
/// fragments with epsilon edges over fresh gate nodes, so an iteration can
/// only be skipped or finished at its boundary, never mid-body.
struct Builder {
    epsilon: Vec<Vec<usize>>,
    /// (from node, sentence index, to node); `to` is sentence's end node.
    labeled: Vec<(usize, usize, usize)>,
    /// End node of each sentence's labeled edge, indexed by sentence.
    sentence_end: Vec<usize>,
}

impl Builder {
    fn fresh(&mut self) -> usize {
        self.epsilon.push(Vec::new());
        self.epsilon.len() - 1
    }

    /// Returns (start, accept) nodes of the fragment for `p`.
    fn build(&mut self, p: &Program) -> (usize, usize) {
        match p {
            Program::Sentence(i) => {
                let start = self.fresh();
                let end = self.fresh();
                self.labeled.push((start, *i, end));
                self.sentence_end[*i] = end;
                (start, end)
            }
            Program::Seq(a, b) => {
                let (a_start, a_accept) = self.build(a);
                let (b_start, b_accept) = self.build(b);
                self.epsilon[a_accept].push(b_start);
                (a_start, b_accept)
            }
            Program::Star(body) => {
                let (b_start, b_accept) = self.build(body);
                let start = self.fresh();
                let accept = self.fresh();
                self.epsilon[start].push(b_start); // first repetition
                self.epsilon[start].push(accept); // zero repetitions
                self.epsilon[b_accept].push(b_start); // another repetition
                self.epsilon[b_accept].push(accept); // done
                (start, accept)
            }
        }
    }

    fn closure(&self, node: usize) -> Vec<usize> {
        let mut closure = vec![node];
        let mut queue = vec![node];
        while let Some(q) = queue.pop() {
            for &t in &self.epsilon[q] {
                if !closure.contains(&t) {
                    closure.push(t);
                    queue.push(t);
                }
            }
        }
        closure
    }
}

pub fn compile_to_automaton(scenario: &Scenario) -> PcAutomaton {
    let n = scenario.sentences.len();
    let mut builder = Builder {
        epsilon: Vec::new(),
        labeled: Vec::new(),
        sentence_end: vec![usize::MAX; n],
    };
    let (start, accept) = builder.build(&scenario.program);

    // Eliminate epsilon edges. The observable states are the initial node
    // and each sentence's end node; they become pcs 1 and i+2 respectively,
    // recovering the position numbering with accept at n+1. A sentence's
    // end node doubles as the pc reached by executing it, so the accepting
    // pc of a star-free program is n+1 with no outgoing edges.
    let pc_of = |node: usize| -> Pc {
        if node == start {
            1
        } else {
            let i = builder
                .sentence_end
                .iter()
                .position(|&e| e == node)
                .expect("observable node");
            i + 2
        }
    };

    let mut edges: Vec<Vec<(usize, Pc)>> = vec![Vec::new(); n + 2];
    let mut accepting = vec![false; n + 2];
    let observable: Vec<usize> = std::iter::once(start)
        .chain(builder.sentence_end.iter().copied())
        .collect();
    for &node in &observable {
        let pc = pc_of(node);
        let closure = builder.closure(node);
        let mut out: Vec<(usize, Pc)> = Vec::new();
        for &q in &closure {
            for &(from, sentence, target) in &builder.labeled {
                if from == q {
                    let edge = (sentence, pc_of(target));
                    if !out.contains(&edge) {
                        out.push(edge);
                    }
                }
            }
        }
        out.sort_unstable();
        edges[pc] = out;
        accepting[pc] = closure.contains(&accept);
    }

    PcAutomaton {
        sentence_count: n,
        initial: 1,
        accepting,
        edges,
    }
}
