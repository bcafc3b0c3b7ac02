//! The abstract successor relation on representative configurations and the
//! reachability fixpoint built on it.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::automaton::{ConstantSet, Guard, RegisterAutomaton, Symbol, Transition, Valuation};
use crate::eqlogic::{Atom, Closure, ConstraintSystem, Var};
use crate::error::{Error, Result};
use crate::repr::{
    canonical_valuation_unchecked, const_code, formula_e_of_assignment, formula_e_of_valuation,
    is_consistent_matrix, Partition, RepConfig, RepMatrix, Universe,
};

fn guard_system(g: &Guard) -> ConstraintSystem {
    ConstraintSystem::from_atoms(g.atoms.iter().map(|a| Atom {
        lhs: a.lhs.into(),
        rhs: a.rhs.into(),
        polarity: a.polarity,
    }))
}

/// `g ∧ E(w) ∧ E(π)`, with every primed register and every constant of `C`
/// declared so that the closure has a class for each.
fn step_formula(t: &Transition, w: &Valuation, constants: &ConstantSet) -> ConstraintSystem {
    let mut f = formula_e_of_valuation(w, constants, false)
        .and(&guard_system(&t.guard))
        .and(&formula_e_of_assignment(&t.assignment));
    for k in 0..w.len() {
        f.declare(Var::Primed(k));
    }
    for c in constants.iter() {
        f.declare(Var::Const(c));
    }
    f
}

fn check_source(ra: &RegisterAutomaton, c: &RepConfig) -> Result<()> {
    if c.location >= ra.locations().len() {
        return Err(Error::Usage(format!("location index {} out of range", c.location)));
    }
    if c.matrix.size() != ra.num_registers() {
        return Err(Error::Usage(format!(
            "matrix has size {}, automaton has {} registers",
            c.matrix.size(),
            ra.num_registers()
        )));
    }
    if !is_consistent_matrix(&c.matrix, ra.constants()) {
        return Err(Error::Precondition("post of an inconsistent matrix".into()));
    }
    Ok(())
}

/// Search state for the labelled partitions of `X'` compatible with a
/// consistent closure.
struct Completion<'a> {
    cl: &'a Closure,
    constants: &'a ConstantSet,
    primed: Vec<usize>,
    const_class: Vec<usize>,
    owner: Vec<Option<usize>>,
    blocks: Vec<Vec<usize>>,
    block_const: Vec<Option<Symbol>>,
    block_of: Vec<usize>,
    block_first: Vec<usize>,
    labels: Vec<Option<Symbol>>,
    label_used: Vec<bool>,
}

impl<'a> Completion<'a> {
    fn new(cl: &'a Closure, n: usize, constants: &'a ConstantSet) -> Self {
        Completion {
            cl,
            constants,
            primed: (0..n).map(|k| cl.class(&Var::Primed(k)).expect("declared")).collect(),
            const_class: constants.iter().map(|c| cl.class(&Var::Const(c)).expect("declared")).collect(),
            owner: vec![None; cl.num_classes()],
            blocks: Vec::new(),
            block_const: Vec::new(),
            block_of: Vec::with_capacity(n),
            block_first: Vec::new(),
            labels: Vec::new(),
            label_used: vec![false; constants.len()],
        }
    }

    fn joinable(&self, b: usize, f: usize) -> bool {
        !(self.block_const[b].is_some() && self.cl.constant_of(f).is_some())
            && self.blocks[b].iter().all(|&x| !self.cl.apart(x, f))
    }

    fn assign(&mut self, k: usize, out: &mut dyn FnMut(&Completion)) {
        if k == self.primed.len() {
            self.labels = vec![None; self.blocks.len()];
            self.label(0, out);
            return;
        }
        let f = self.primed[k];
        if let Some(b) = self.owner[f] {
            self.block_of.push(b);
            self.assign(k + 1, out);
            self.block_of.pop();
            return;
        }
        let fc = self.cl.constant_of(f);
        for b in 0..self.blocks.len() {
            if !self.joinable(b, f) {
                continue;
            }
            let saved = self.block_const[b];
            self.blocks[b].push(f);
            self.owner[f] = Some(b);
            self.block_const[b] = saved.or(fc);
            self.block_of.push(b);
            self.assign(k + 1, out);
            self.block_of.pop();
            self.block_const[b] = saved;
            self.owner[f] = None;
            self.blocks[b].pop();
        }
        let b = self.blocks.len();
        self.blocks.push(vec![f]);
        self.block_first.push(k);
        self.block_const.push(fc);
        self.owner[f] = Some(b);
        self.block_of.push(b);
        self.assign(k + 1, out);
        self.block_of.pop();
        self.owner[f] = None;
        self.block_const.pop();
        self.block_first.pop();
        self.blocks.pop();
    }

    fn label(&mut self, b: usize, out: &mut dyn FnMut(&Completion)) {
        if b == self.blocks.len() {
            out(self);
            return;
        }
        if let Some(c) = self.block_const[b] {
            self.labels[b] = Some(c);
            self.label(b + 1, out);
            return;
        }
        self.labels[b] = None;
        self.label(b + 1, out);
        for (k, c) in self.constants.iter().enumerate() {
            let cc = self.const_class[k];
            if self.label_used[k]
                || self.owner[cc].is_some()
                || self.blocks[b].iter().any(|&x| self.cl.apart(x, cc))
            {
                continue;
            }
            self.label_used[k] = true;
            self.labels[b] = Some(c);
            self.label(b + 1, out);
            self.label_used[k] = false;
        }
        self.labels[b] = None;
    }

    fn partition(&self) -> Partition {
        Partition { block_of: self.block_of.clone(), labels: self.labels.clone() }
    }

    /// The matrix key of the current labelled partition.
    fn key_into(&self, buf: &mut Vec<u64>) {
        buf.clear();
        buf.extend(self.block_of.iter().map(|&b| match self.labels[b] {
            Some(c) => const_code(c),
            None => self.block_first[b] as u64,
        }));
    }
}

/// Labelled partitions of the primed registers consistent with `f`, each
/// exactly once. Empty when `f` itself is inconsistent.
fn successor_partitions(
    f: &ConstraintSystem,
    n: usize,
    constants: &ConstantSet,
    out: &mut dyn FnMut(&Completion),
) {
    let cl = f.closure();
    if !cl.is_consistent() {
        return;
    }
    Completion::new(&cl, n, constants).assign(0, out);
}

/// `Post(⟨l, R⟩)`: all representative successors, ordered by location and
/// then by the canonical matrix order.
pub fn post(ra: &RegisterAutomaton, c: &RepConfig) -> Result<Vec<RepConfig>> {
    check_source(ra, c)?;
    let constants = ra.constants();
    let w = canonical_valuation_unchecked(&c.matrix, constants);
    let mut found = Vec::new();
    for t in ra.outgoing(c.location) {
        let f = step_formula(t, &w, constants);
        successor_partitions(&f, w.len(), constants, &mut |c| found.push((t.target, c.partition())));
    }
    found.sort_by_cached_key(|(l, p)| (*l, p.order_key(constants)));
    found.dedup();
    Ok(found.into_iter().map(|(l, p)| RepConfig::new(l, p.to_matrix())).collect())
}

/// `Post(⟨l, R⟩)` by scanning every consistent matrix `R'` and testing
/// `F ∧ E'(w')` for consistency. Same output as [`post`]; only usable for
/// small register counts.
pub fn post_literal(ra: &RegisterAutomaton, c: &RepConfig) -> Result<Vec<RepConfig>> {
    check_source(ra, c)?;
    let universe = Universe::literal(ra.num_registers(), ra.constants())?;
    let ids = literal_successors(ra, &universe, c.location, &c.matrix)?;
    Ok(ids
        .into_iter()
        .map(|id| RepConfig::new(id as usize / universe.len(), universe.get(id % universe.len() as u32).clone()))
        .collect())
}

fn literal_successors(
    ra: &RegisterAutomaton,
    universe: &Universe,
    location: usize,
    matrix: &RepMatrix,
) -> Result<Vec<u32>> {
    let constants = ra.constants();
    let w = canonical_valuation_unchecked(matrix, constants);
    let size = universe.len() as u32;
    let mut out = Vec::new();
    for t in ra.outgoing(location) {
        let f = step_formula(t, &w, constants);
        if !f.is_consistent() {
            continue;
        }
        for (k, r) in universe.matrices().iter().enumerate() {
            let w2 = canonical_valuation_unchecked(r, constants);
            if f.clone().and(&formula_e_of_valuation(&w2, constants, true)).is_consistent() {
                out.push(t.target as u32 * size + k as u32);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn pruned_successors(
    ra: &RegisterAutomaton,
    universe: &Universe,
    location: usize,
    matrix: &RepMatrix,
) -> Vec<u32> {
    let constants = ra.constants();
    let w = canonical_valuation_unchecked(matrix, constants);
    let size = universe.len() as u32;
    let mut out = Vec::new();
    let mut key = Vec::with_capacity(w.len());
    for t in ra.outgoing(location) {
        let f = step_formula(t, &w, constants);
        successor_partitions(&f, w.len(), constants, &mut |c| {
            c.key_into(&mut key);
            let idx = universe.index_of_key_slice(&key).expect("partition in universe");
            out.push(t.target as u32 * size + idx);
        });
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// How the quotient graph is built.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildOptions {
    /// `Some(0)` builds sequentially, `Some(k)` on `k` worker threads,
    /// `None` on rayon's default pool.
    pub threads: Option<usize>,
    /// Use the exhaustive matrix scans instead of the pruned search.
    pub literal: bool,
}

impl BuildOptions {
    /// Reads the thread cap from `REGMC_THREADS`.
    pub fn from_env() -> Result<Self> {
        let threads = match std::env::var("REGMC_THREADS") {
            Ok(s) => Some(s.trim().parse::<usize>().map_err(|_| {
                Error::Usage(format!("REGMC_THREADS must be a non-negative integer, got {s:?}"))
            })?),
            Err(_) => None,
        };
        Ok(BuildOptions { threads, literal: false })
    }

    pub fn literal(mut self, literal: bool) -> Self {
        self.literal = literal;
        self
    }
}

/// The finite graph `L × UniverseR` with edges given by `Post`.
///
/// Node `loc * |UniverseR| + k` is location `loc` paired with the `k`-th
/// matrix of the universe.
#[derive(Clone, Debug)]
pub struct QuotientGraph {
    universe: Universe,
    locations: usize,
    initial: usize,
    succ: Vec<Vec<u32>>,
}

impl QuotientGraph {
    pub fn build(ra: &RegisterAutomaton, opts: &BuildOptions) -> Result<Self> {
        let n = ra.num_registers();
        let universe = if opts.literal {
            Universe::literal(n, ra.constants())?
        } else {
            Universe::new(n, ra.constants())
        };
        let size = universe.len();
        let nodes = ra.locations().len() * size;
        let compute = |id: usize| -> Result<Vec<u32>> {
            let (loc, k) = (id / size, id % size);
            let m = &universe.matrices()[k];
            if opts.literal {
                literal_successors(ra, &universe, loc, m)
            } else {
                Ok(pruned_successors(ra, &universe, loc, m))
            }
        };
        let succ: Result<Vec<Vec<u32>>> = match opts.threads {
            Some(0) => (0..nodes).map(compute).collect(),
            Some(k) => rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Usage(format!("cannot start thread pool: {e}")))?
                .install(|| (0..nodes).into_par_iter().map(compute).collect()),
            None => (0..nodes).into_par_iter().map(compute).collect(),
        };
        Ok(QuotientGraph { universe, locations: ra.locations().len(), initial: ra.initial(), succ: succ? })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn num_locations(&self) -> usize {
        self.locations
    }

    pub fn initial_location(&self) -> usize {
        self.initial
    }

    pub fn num_nodes(&self) -> usize {
        self.succ.len()
    }

    pub fn node(&self, location: usize, matrix_index: u32) -> u32 {
        (location * self.universe.len()) as u32 + matrix_index
    }

    pub fn location_of(&self, node: u32) -> usize {
        node as usize / self.universe.len()
    }

    pub fn matrix_index_of(&self, node: u32) -> u32 {
        node % self.universe.len() as u32
    }

    pub fn matrix_of(&self, node: u32) -> &RepMatrix {
        self.universe.get(self.matrix_index_of(node))
    }

    pub fn config(&self, node: u32) -> RepConfig {
        RepConfig::new(self.location_of(node), self.matrix_of(node).clone())
    }

    /// Node of a configuration; `None` if the location is out of range or
    /// the matrix is not in the universe.
    pub fn node_of(&self, c: &RepConfig) -> Option<u32> {
        if c.location >= self.locations {
            return None;
        }
        self.universe.index_of(&c.matrix).map(|k| self.node(c.location, k))
    }

    pub fn successors(&self, node: u32) -> &[u32] {
        &self.succ[node as usize]
    }

    pub fn initial_nodes(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.universe.len() as u32).map(|k| self.node(self.initial, k))
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Nodes reachable from the initial ones, as a bitset over node ids.
    pub fn reachable(&self) -> FixedBitSet {
        let mut seen = FixedBitSet::with_capacity(self.num_nodes());
        let mut queue: VecDeque<u32> = self.initial_nodes().collect();
        for &n in &queue {
            seen.insert(n as usize);
        }
        while let Some(n) = queue.pop_front() {
            for &m in self.successors(n) {
                if !seen.put(m as usize) {
                    queue.push_back(m);
                }
            }
        }
        seen
    }
}

/// Breadth-first search from `{⟨l₀, R₀⟩ | R₀ ∈ UniverseR}`, computing `Post`
/// on demand. Stops early once `target` is seen.
fn explore(
    ra: &RegisterAutomaton,
    opts: &BuildOptions,
    target: Option<(usize, &RepMatrix)>,
) -> Result<(Universe, FixedBitSet, bool)> {
    let n = ra.num_registers();
    let universe = if opts.literal {
        Universe::literal(n, ra.constants())?
    } else {
        Universe::new(n, ra.constants())
    };
    let size = universe.len();
    let target = match target {
        Some((loc, m)) => Some(
            (loc * size) as u32 + universe.index_of(m).ok_or_else(|| {
                Error::Precondition("reachability target is not a consistent matrix".into())
            })?,
        ),
        None => None,
    };
    let mut seen = FixedBitSet::with_capacity(ra.locations().len() * size);
    let mut queue = VecDeque::new();
    for k in 0..size {
        let id = ra.initial() * size + k;
        seen.insert(id);
        queue.push_back(id as u32);
    }
    if target.is_some_and(|t| seen.contains(t as usize)) {
        return Ok((universe, seen, true));
    }
    while let Some(id) = queue.pop_front() {
        let (loc, k) = (id as usize / size, id as usize % size);
        let m = &universe.matrices()[k];
        let next = if opts.literal {
            literal_successors(ra, &universe, loc, m)?
        } else {
            pruned_successors(ra, &universe, loc, m)
        };
        for s in next {
            if !seen.put(s as usize) {
                if Some(s) == target {
                    return Ok((universe, seen, true));
                }
                queue.push_back(s);
            }
        }
    }
    Ok((universe, seen, false))
}

/// Whether `target` is reachable from some initial representative
/// configuration.
pub fn reach(ra: &RegisterAutomaton, target: &RepConfig) -> Result<bool> {
    reach_with(ra, target, &BuildOptions::default())
}

pub fn reach_with(ra: &RegisterAutomaton, target: &RepConfig, opts: &BuildOptions) -> Result<bool> {
    if target.location >= ra.locations().len() {
        return Err(Error::Usage(format!("location index {} out of range", target.location)));
    }
    if target.matrix.size() != ra.num_registers()
        || !is_consistent_matrix(&target.matrix, ra.constants())
    {
        return Err(Error::Precondition("reachability target is not a consistent matrix".into()));
    }
    Ok(explore(ra, opts, Some((target.location, &target.matrix)))?.2)
}

/// The least set containing every initial representative configuration and
/// closed under `Post`, in node order.
pub fn reachable_set(ra: &RegisterAutomaton) -> Result<Vec<RepConfig>> {
    reachable_set_with(ra, &BuildOptions::default())
}

pub fn reachable_set_with(ra: &RegisterAutomaton, opts: &BuildOptions) -> Result<Vec<RepConfig>> {
    let (universe, seen, _) = explore(ra, opts, None)?;
    let size = universe.len();
    Ok(seen
        .ones()
        .map(|id| RepConfig::new(id / size, universe.matrices()[id % size].clone()))
        .collect())
}
