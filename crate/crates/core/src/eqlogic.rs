//! Conjunctive equality logic over registers, primed registers, parameters
//! and constants.
//!
//! Every formula the analysis builds (guards, `E(w)`, `E(π)`, `E'(w')`) is a
//! conjunction of atoms `a = b` / `a ≠ b`, so consistency is decided by
//! merging equality classes with a union-find and then checking that no
//! disequality falls inside a class and no class holds two distinct
//! constants. Distinct constants are unequal by fiat: they are concrete
//! alphabet symbols.

use std::collections::BTreeSet;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::automaton::{Polarity, Symbol, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Reg(usize),
    Primed(usize),
    /// 1-based formal parameter.
    Param(usize),
    Const(Symbol),
}

impl From<Term> for Var {
    fn from(t: Term) -> Self {
        match t {
            Term::Reg(i) => Var::Reg(i),
            Term::Param(j) => Var::Param(j),
            Term::Const(c) => Var::Const(c),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Reg(i) => write!(f, "x{}", i + 1),
            Var::Primed(i) => write!(f, "x{}'", i + 1),
            Var::Param(j) => write!(f, "p{j}"),
            Var::Const(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub lhs: Var,
    pub rhs: Var,
    pub polarity: Polarity,
}

impl Atom {
    pub fn eq(lhs: Var, rhs: Var) -> Self {
        Atom { lhs, rhs, polarity: Polarity::Eq }
    }

    pub fn neq(lhs: Var, rhs: Var) -> Self {
        Atom { lhs, rhs, polarity: Polarity::Neq }
    }

    pub fn negated(self) -> Self {
        Atom { polarity: self.polarity.flip(), ..self }
    }

    /// Same atom with the operands in ascending order.
    pub fn normalized(self) -> Self {
        if self.lhs <= self.rhs {
            self
        } else {
            Atom { lhs: self.rhs, rhs: self.lhs, polarity: self.polarity }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.polarity {
            Polarity::Eq => "=",
            Polarity::Neq => "!=",
        };
        write!(f, "{} {op} {}", self.lhs, self.rhs)
    }
}

/// A conjunction of equalities and disequalities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSystem {
    universe: BTreeSet<Var>,
    equalities: Vec<(Var, Var)>,
    disequalities: Vec<(Var, Var)>,
}

impl ConstraintSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Self {
        let mut s = Self::new();
        s.extend(atoms);
        s
    }

    /// Returns the system with `a` appended. Variables of `a` join the
    /// universe if they are not already in it.
    pub fn conjoin(mut self, a: Atom) -> Self {
        self.push(a);
        self
    }

    pub fn push(&mut self, a: Atom) {
        self.universe.insert(a.lhs);
        self.universe.insert(a.rhs);
        match a.polarity {
            Polarity::Eq => self.equalities.push((a.lhs, a.rhs)),
            Polarity::Neq => self.disequalities.push((a.lhs, a.rhs)),
        }
    }

    pub fn extend(&mut self, atoms: impl IntoIterator<Item = Atom>) {
        for a in atoms {
            self.push(a);
        }
    }

    /// Conjunction of two systems.
    pub fn and(mut self, other: &ConstraintSystem) -> Self {
        self.universe.extend(other.universe.iter().copied());
        self.equalities.extend(other.equalities.iter().copied());
        self.disequalities.extend(other.disequalities.iter().copied());
        self
    }

    /// Adds a variable that no atom mentions (yet).
    pub fn declare(&mut self, v: Var) {
        self.universe.insert(v);
    }

    pub fn universe(&self) -> &BTreeSet<Var> {
        &self.universe
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        let eqs = self.equalities.iter().map(|&(l, r)| Atom::eq(l, r));
        let neqs = self.disequalities.iter().map(|&(l, r)| Atom::neq(l, r));
        eqs.chain(neqs)
    }

    /// The atoms as an order-insensitive set.
    pub fn atom_set(&self) -> BTreeSet<Atom> {
        self.atoms().map(Atom::normalized).collect()
    }

    pub fn len(&self) -> usize {
        self.equalities.len() + self.disequalities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_consistent(&self) -> bool {
        self.closure().is_consistent()
    }

    /// `⊢ s ⟹ a`. An inconsistent system entails everything.
    pub fn entails(&self, a: Atom) -> bool {
        !self.clone().conjoin(a.negated()).is_consistent()
    }

    pub fn closure(&self) -> Closure {
        Closure::new(self)
    }
}

/// Equality classes of a [`ConstraintSystem`] after merging its equalities.
#[derive(Clone, Debug)]
pub struct Closure {
    vars: Vec<Var>,
    class_of: Vec<usize>,
    constant: Vec<Option<Symbol>>,
    apart: Vec<FixedBitSet>,
    consistent: bool,
}

impl Closure {
    fn new(s: &ConstraintSystem) -> Self {
        let vars: Vec<Var> = s.universe.iter().copied().collect();
        let idx = |v: &Var| vars.binary_search(v).expect("variable outside universe");
        let mut parent: Vec<usize> = (0..vars.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (l, r) in &s.equalities {
            let (a, b) = (find(&mut parent, idx(l)), find(&mut parent, idx(r)));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        // dense class numbering in order of first member
        let mut class_of = vec![usize::MAX; vars.len()];
        let mut roots: Vec<usize> = Vec::new();
        for i in 0..vars.len() {
            let root = find(&mut parent, i);
            let class = match roots.iter().position(|&r| r == root) {
                Some(c) => c,
                None => {
                    roots.push(root);
                    roots.len() - 1
                }
            };
            class_of[i] = class;
        }
        let classes = roots.len();
        let mut consistent = true;
        let mut constant: Vec<Option<Symbol>> = vec![None; classes];
        for (i, v) in vars.iter().enumerate() {
            if let Var::Const(c) = v {
                let slot = &mut constant[class_of[i]];
                match slot {
                    Some(d) if d != c => consistent = false,
                    _ => *slot = Some(*c),
                }
            }
        }
        let mut apart = vec![FixedBitSet::with_capacity(classes); classes];
        for (l, r) in &s.disequalities {
            let (a, b) = (class_of[idx(l)], class_of[idx(r)]);
            if a == b {
                consistent = false;
            }
            apart[a].insert(b);
            apart[b].insert(a);
        }
        Closure { vars, class_of, constant, apart, consistent }
    }

    pub fn is_consistent(&self) -> bool {
        self.consistent
    }

    pub fn num_classes(&self) -> usize {
        self.constant.len()
    }

    pub fn class(&self, v: &Var) -> Option<usize> {
        self.vars.binary_search(v).ok().map(|i| self.class_of[i])
    }

    pub fn constant_of(&self, class: usize) -> Option<Symbol> {
        self.constant[class]
    }

    /// Whether an explicit disequality separates the two classes.
    pub fn apart(&self, a: usize, b: usize) -> bool {
        self.apart[a].contains(b)
    }

    /// Whether the system forces the two classes to differ: an explicit
    /// disequality, or two distinct constants.
    pub fn forced_distinct(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        if self.apart(a, b) {
            return true;
        }
        matches!((self.constant[a], self.constant[b]), (Some(c), Some(d)) if c != d)
    }
}
