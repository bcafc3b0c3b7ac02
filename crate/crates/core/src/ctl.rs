//! CTL over locations and register equalities, labelled on the quotient
//! graph.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use crate::automaton::Symbol;
use crate::error::{Error, Result};
use crate::reach::QuotientGraph;
use crate::repr::{MatrixEntry, RepConfig};

/// Core CTL syntax. The remaining operators are built by the derived
/// constructors ([`CtlFormula::truth`], [`CtlFormula::af`], ...).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CtlFormula {
    AtLocation(usize),
    RegEq(usize, usize),
    RegEqConst(usize, Symbol),
    Not(Box<CtlFormula>),
    And(Box<CtlFormula>, Box<CtlFormula>),
    EX(Box<CtlFormula>),
    EU(Box<CtlFormula>, Box<CtlFormula>),
    EG(Box<CtlFormula>),
}

impl CtlFormula {
    pub fn not(f: CtlFormula) -> Self {
        CtlFormula::Not(Box::new(f))
    }

    pub fn and(f: CtlFormula, g: CtlFormula) -> Self {
        CtlFormula::And(Box::new(f), Box::new(g))
    }

    pub fn ex(f: CtlFormula) -> Self {
        CtlFormula::EX(Box::new(f))
    }

    pub fn eu(f: CtlFormula, g: CtlFormula) -> Self {
        CtlFormula::EU(Box::new(f), Box::new(g))
    }

    pub fn eg(f: CtlFormula) -> Self {
        CtlFormula::EG(Box::new(f))
    }

    /// `¬(x₁ = x₁)`.
    pub fn falsity() -> Self {
        Self::not(CtlFormula::RegEq(0, 0))
    }

    pub fn truth() -> Self {
        Self::not(Self::falsity())
    }

    pub fn or(f: CtlFormula, g: CtlFormula) -> Self {
        Self::not(Self::and(Self::not(f), Self::not(g)))
    }

    pub fn implies(f: CtlFormula, g: CtlFormula) -> Self {
        Self::or(Self::not(f), g)
    }

    pub fn ax(f: CtlFormula) -> Self {
        Self::not(Self::ex(Self::not(f)))
    }

    pub fn ef(f: CtlFormula) -> Self {
        Self::eu(Self::truth(), f)
    }

    pub fn ag(f: CtlFormula) -> Self {
        Self::not(Self::ef(Self::not(f)))
    }

    pub fn af(f: CtlFormula) -> Self {
        Self::not(Self::eg(Self::not(f)))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(
            self,
            CtlFormula::AtLocation(_) | CtlFormula::RegEq(..) | CtlFormula::RegEqConst(..)
        )
    }

    /// Nesting depth of temporal and boolean operators; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            CtlFormula::AtLocation(_) | CtlFormula::RegEq(..) | CtlFormula::RegEqConst(..) => 0,
            CtlFormula::Not(f) | CtlFormula::EX(f) | CtlFormula::EG(f) => 1 + f.depth(),
            CtlFormula::And(f, g) | CtlFormula::EU(f, g) => 1 + f.depth().max(g.depth()),
        }
    }

    /// Checks indices against a graph's locations, registers and constants.
    pub fn validate(&self, graph: &QuotientGraph) -> Result<()> {
        let n = graph.universe().registers();
        match self {
            CtlFormula::AtLocation(l) if *l >= graph.num_locations() => {
                Err(Error::Usage(format!("location index {l} out of range")))
            }
            CtlFormula::RegEq(i, j) if *i >= n || *j >= n => {
                Err(Error::Usage(format!("register index out of range in x{} = x{}", i + 1, j + 1)))
            }
            CtlFormula::RegEqConst(i, _) if *i >= n => {
                Err(Error::Usage(format!("register index {} out of range", i + 1)))
            }
            CtlFormula::RegEqConst(_, c) if !graph.universe().constants().contains(*c) => {
                Err(Error::Usage(format!("{c} is not a constant of the automaton")))
            }
            CtlFormula::Not(f) | CtlFormula::EX(f) | CtlFormula::EG(f) => f.validate(graph),
            CtlFormula::And(f, g) | CtlFormula::EU(f, g) => {
                f.validate(graph)?;
                g.validate(graph)
            }
            _ => Ok(()),
        }
    }
}

/// A set of quotient-graph nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSet(FixedBitSet);

impl LabelSet {
    pub fn empty(graph: &QuotientGraph) -> Self {
        LabelSet(FixedBitSet::with_capacity(graph.num_nodes()))
    }

    pub fn full(graph: &QuotientGraph) -> Self {
        let mut s = Self::empty(graph);
        s.0.insert_range(..);
        s
    }

    pub fn from_nodes(graph: &QuotientGraph, nodes: impl IntoIterator<Item = u32>) -> Self {
        let mut s = Self::empty(graph);
        for n in nodes {
            s.0.insert(n as usize);
        }
        s
    }

    pub fn contains(&self, node: u32) -> bool {
        self.0.contains(node as usize)
    }

    pub fn insert(&mut self, node: u32) {
        self.0.insert(node as usize);
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn nodes(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.ones().map(|n| n as u32)
    }

    pub fn is_subset(&self, other: &LabelSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn configs(&self, graph: &QuotientGraph) -> Vec<RepConfig> {
        self.nodes().map(|n| graph.config(n)).collect()
    }
}

pub fn compute_ap(graph: &QuotientGraph, atom: &CtlFormula) -> Result<LabelSet> {
    atom.validate(graph)?;
    let test: Box<dyn Fn(u32) -> bool> = match *atom {
        CtlFormula::AtLocation(l) => Box::new(move |n| graph.location_of(n) == l),
        CtlFormula::RegEq(i, j) => Box::new(move |n| !graph.matrix_of(n).get(i, j).is_zero()),
        CtlFormula::RegEqConst(i, c) => {
            Box::new(move |n| graph.matrix_of(n).get(i, i) == MatrixEntry::Const(c))
        }
        _ => return Err(Error::Usage("compute_ap expects an atomic formula".into())),
    };
    Ok(LabelSet::from_nodes(graph, (0..graph.num_nodes() as u32).filter(|&n| test(n))))
}

pub fn compute_not(graph: &QuotientGraph, s: &LabelSet) -> LabelSet {
    let mut out = LabelSet::full(graph);
    out.0.difference_with(&s.0);
    out
}

pub fn compute_and(s0: &LabelSet, s1: &LabelSet) -> LabelSet {
    let mut out = s0.clone();
    out.0.intersect_with(&s1.0);
    out
}

pub fn compute_ex(graph: &QuotientGraph, s: &LabelSet) -> LabelSet {
    LabelSet::from_nodes(
        graph,
        (0..graph.num_nodes() as u32)
            .filter(|&n| graph.successors(n).iter().any(|&m| s.contains(m))),
    )
}

/// Least fixpoint of `Z ↦ s1 ∪ (s0 ∩ EX Z)`.
pub fn compute_eu(graph: &QuotientGraph, s0: &LabelSet, s1: &LabelSet) -> LabelSet {
    let mut u = s1.clone();
    loop {
        let mut next = compute_and(&compute_ex(graph, &u), s0);
        next.0.union_with(&u.0);
        if next == u {
            return u;
        }
        u = next;
    }
}

/// Greatest fixpoint of `Z ↦ s ∩ EX Z`, iterated down from `s`.
pub fn compute_eg(graph: &QuotientGraph, s: &LabelSet) -> LabelSet {
    let mut u = s.clone();
    loop {
        let next = compute_and(&u, &compute_ex(graph, &u));
        if next == u {
            return u;
        }
        u = next;
    }
}

/// The nodes satisfying `f`, labelled bottom-up. Structurally equal
/// subformulas are labelled once.
pub fn compute_ctl(graph: &QuotientGraph, f: &CtlFormula) -> Result<LabelSet> {
    f.validate(graph)?;
    let mut memo = HashMap::new();
    Ok(label(graph, f, &mut memo))
}

fn label(
    graph: &QuotientGraph,
    f: &CtlFormula,
    memo: &mut HashMap<CtlFormula, LabelSet>,
) -> LabelSet {
    if let Some(s) = memo.get(f) {
        return s.clone();
    }
    let s = match f {
        CtlFormula::AtLocation(_) | CtlFormula::RegEq(..) | CtlFormula::RegEqConst(..) => {
            compute_ap(graph, f).expect("validated atom")
        }
        CtlFormula::Not(g) => compute_not(graph, &label(graph, g, memo)),
        CtlFormula::And(g, h) => compute_and(&label(graph, g, memo), &label(graph, h, memo)),
        CtlFormula::EX(g) => compute_ex(graph, &label(graph, g, memo)),
        CtlFormula::EU(g, h) => {
            let s0 = label(graph, g, memo);
            compute_eu(graph, &s0, &label(graph, h, memo))
        }
        CtlFormula::EG(g) => compute_eg(graph, &label(graph, g, memo)),
    };
    memo.insert(f.clone(), s.clone());
    s
}

/// Whether every initial representative configuration satisfies `f`.
pub fn model_check(graph: &QuotientGraph, f: &CtlFormula) -> Result<bool> {
    let sat = compute_ctl(graph, f)?;
    Ok(graph.initial_nodes().all(|n| sat.contains(n)))
}
