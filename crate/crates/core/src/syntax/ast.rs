use std::fmt;

use serde::{Deserialize, Serialize};

use crate::charclass::CharClass;

/// Largest accepted repetition bound (exclusive).
pub const MAX_REPEAT_BOUND: u32 = 1 << 31;

/// Identifies one occurrence of bounded repetition inside a pattern.
///
/// Ids are allocated by [`Regex`] and never reused, even after the
/// occurrence they named is unfolded away.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InstanceId(pub u32);

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ast {
    Epsilon,
    Class(CharClass),
    Concat(Vec<Ast>),
    Alt(Vec<Ast>),
    Star(Box<Ast>),
    Repeat { child: Box<Ast>, min: u32, max: u32, id: InstanceId },
}

impl Ast {
    pub fn class(c: CharClass) -> Ast {
        Ast::Class(c)
    }

    pub fn byte(b: u8) -> Ast {
        Ast::Class(CharClass::singleton(b))
    }

    pub fn literal(s: &[u8]) -> Ast {
        Ast::concat(s.iter().map(|b| Ast::byte(*b)).collect())
    }

    /// Builds a concatenation, flattening nested concatenations.
    pub fn concat(items: Vec<Ast>) -> Ast {
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Ast::Concat(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Ast::Epsilon,
            1 => out.pop().unwrap(),
            _ => Ast::Concat(out),
        }
    }

    /// Builds an alternation, flattening nested alternations.
    pub fn alt(branches: Vec<Ast>) -> Ast {
        let mut out = Vec::with_capacity(branches.len());
        for b in branches {
            match b {
                Ast::Alt(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Ast::Epsilon,
            1 => out.pop().unwrap(),
            _ => Ast::Alt(out),
        }
    }

    pub fn star(child: Ast) -> Ast {
        Ast::Star(Box::new(child))
    }

    pub fn repeat(child: Ast, min: u32, max: u32, id: InstanceId) -> Ast {
        Ast::Repeat { child: Box::new(child), min, max, id }
    }

    pub fn is_nullable(&self) -> bool {
        match self {
            Ast::Epsilon | Ast::Star(_) => true,
            Ast::Class(_) => false,
            Ast::Concat(items) => items.iter().all(Ast::is_nullable),
            Ast::Alt(branches) => branches.iter().any(Ast::is_nullable),
            Ast::Repeat { child, min, .. } => *min == 0 || child.is_nullable(),
        }
    }

    /// Number of character-class occurrences (Glushkov positions).
    pub fn class_count(&self) -> usize {
        match self {
            Ast::Epsilon => 0,
            Ast::Class(_) => 1,
            Ast::Concat(xs) | Ast::Alt(xs) => xs.iter().map(Ast::class_count).sum(),
            Ast::Star(c) => c.class_count(),
            Ast::Repeat { child, .. } => child.class_count(),
        }
    }

    /// Total number of nodes in the tree.
    pub fn node_count(&self) -> usize {
        1 + match self {
            Ast::Epsilon | Ast::Class(_) => 0,
            Ast::Concat(xs) | Ast::Alt(xs) => xs.iter().map(Ast::node_count).sum(),
            Ast::Star(c) => c.node_count(),
            Ast::Repeat { child, .. } => child.node_count(),
        }
    }

    pub fn has_repeat(&self) -> bool {
        match self {
            Ast::Epsilon | Ast::Class(_) => false,
            Ast::Concat(xs) | Ast::Alt(xs) => xs.iter().any(Ast::has_repeat),
            Ast::Star(c) => c.has_repeat(),
            Ast::Repeat { .. } => true,
        }
    }

    /// Visits every node in pre-order.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Ast)) {
        f(self);
        match self {
            Ast::Epsilon | Ast::Class(_) => {}
            Ast::Concat(xs) | Ast::Alt(xs) => xs.iter().for_each(|x| x.walk(f)),
            Ast::Star(c) => c.walk(f),
            Ast::Repeat { child, .. } => child.walk(f),
        }
    }
}

/// A parsed pattern: its syntax tree plus the instance-id allocator.
#[derive(Clone, Debug)]
pub struct Regex {
    pub root: Ast,
    next_instance: u32,
    /// Rewrites applied while parsing that a reader may want to know about,
    /// such as `{m,}` being expanded to `r{m}r*`.
    pub notes: Vec<String>,
}

impl PartialEq for Regex {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl Regex {
    /// Wraps a tree, reserving ids above every id already present.
    pub fn new(root: Ast) -> Regex {
        let mut next = 0;
        root.walk(&mut |n| {
            if let Ast::Repeat { id, .. } = n {
                next = next.max(id.0 + 1);
            }
        });
        Regex { root, next_instance: next, notes: Vec::new() }
    }

    pub(crate) fn with_allocator(root: Ast, next_instance: u32, notes: Vec<String>) -> Regex {
        Regex { root, next_instance, notes }
    }

    pub fn next_instance(&self) -> u32 {
        self.next_instance
    }

    pub fn fresh_id(&mut self) -> InstanceId {
        let id = InstanceId(self.next_instance);
        self.next_instance += 1;
        id
    }

    /// Replaces the root, keeping the allocator state.
    pub fn with_root(&self, root: Ast) -> Regex {
        Regex { root, next_instance: self.next_instance, notes: self.notes.clone() }
    }
}

/// Source-order id allocation shared by the parser and the rewriters.
pub(crate) struct IdAlloc<'a>(pub &'a mut u32);

impl IdAlloc<'_> {
    pub fn fresh(&mut self) -> InstanceId {
        let id = InstanceId(*self.0);
        *self.0 += 1;
        id
    }

    /// Deep copy of `ast` with every repetition given a fresh id, allocated
    /// in post-order (the order a parser would meet the quantifiers).
    pub fn copy_fresh(&mut self, ast: &Ast) -> Ast {
        match ast {
            Ast::Epsilon => Ast::Epsilon,
            Ast::Class(c) => Ast::Class(*c),
            Ast::Concat(xs) => Ast::Concat(xs.iter().map(|x| self.copy_fresh(x)).collect()),
            Ast::Alt(xs) => Ast::Alt(xs.iter().map(|x| self.copy_fresh(x)).collect()),
            Ast::Star(c) => Ast::Star(Box::new(self.copy_fresh(c))),
            Ast::Repeat { child, min, max, .. } => {
                let child = self.copy_fresh(child);
                Ast::repeat(child, *min, *max, self.fresh())
            }
        }
    }
}
