//! Brute-force reference implementations and random instance generators
//! shared by the integration tests.

#![allow(dead_code)]

pub mod checks;

use std::collections::{BTreeSet, HashMap};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::seq::SliceRandom;
use rand::Rng;

use regmc::automaton::concrete_successors;
use regmc::ctl::CtlFormula;
use regmc::repr::{matrix_of_valuation, RepConfig};
use regmc::{
    Action, Assignment, Configuration, ConstantSet, Guard, GuardAtom, Polarity, RegisterAutomaton,
    Symbol, Term, Transition, Valuation,
};

/// Every configuration over a finite pool with its one-step successors.
pub struct ConcreteGraph {
    pub nodes: Vec<Configuration>,
    pub index: HashMap<Configuration, usize>,
    pub succ: Vec<Vec<usize>>,
}

impl ConcreteGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.len()];
        for (n, ss) in self.succ.iter().enumerate() {
            for &m in ss {
                pred[m].push(n);
            }
        }
        pred
    }
}

fn all_valuations(n: usize, pool: &[Symbol]) -> Vec<Valuation> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<Symbol>| {
                pool.iter().map(move |s| {
                    let mut w = v.clone();
                    w.push(*s);
                    w
                })
            })
            .collect();
    }
    out.into_iter().map(Valuation).collect()
}

/// The concrete graph on `L × pool^X`, every node included.
pub fn concrete_graph(ra: &RegisterAutomaton, pool: &[Symbol]) -> ConcreteGraph {
    let vals = all_valuations(ra.num_registers(), pool);
    let nodes: Vec<Configuration> = (0..ra.locations().len())
        .flat_map(|l| vals.iter().map(move |v| Configuration::new(l, v.clone())))
        .collect();
    let index: HashMap<Configuration, usize> =
        nodes.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
    let succ = nodes
        .iter()
        .map(|c| {
            concrete_successors(ra, c, pool)
                .expect("well-formed automaton")
                .iter()
                .map(|s| index[s])
                .collect()
        })
        .collect();
    ConcreteGraph { nodes, index, succ }
}

/// Whether `pool` holds every constant and enough fresh symbols for the
/// quotient to be exact.
pub fn pool_is_sufficient(ra: &RegisterAutomaton, pool: &[Symbol]) -> bool {
    let c = ra.constants();
    let fresh = pool.iter().filter(|s| !c.contains(**s)).collect::<BTreeSet<_>>().len();
    c.iter().all(|k| pool.contains(&k)) && fresh >= ra.num_registers() + ra.max_arity() + 1
}

pub type QuotientEdges = BTreeSet<(RepConfig, RepConfig)>;

/// Nodes and edges of the concrete graph projected through `R_[·]`.
pub fn concrete_quotient(
    ra: &RegisterAutomaton,
    pool: &[Symbol],
) -> Result<(BTreeSet<RepConfig>, QuotientEdges), String> {
    if !pool_is_sufficient(ra, pool) {
        return Err("pool too small for an exact quotient".into());
    }
    let g = concrete_graph(ra, pool);
    let project =
        |c: &Configuration| RepConfig::new(c.location, matrix_of_valuation(&c.valuation, ra.constants()));
    let nodes = g.nodes.iter().map(project).collect();
    let mut edges = BTreeSet::new();
    for (n, ss) in g.succ.iter().enumerate() {
        for &m in ss {
            edges.insert((project(&g.nodes[n]), project(&g.nodes[m])));
        }
    }
    Ok((nodes, edges))
}

/// Concrete configurations reachable from `⟨l₀, v⟩` for every `v` over the
/// pool, projected through `R_[·]`.
pub fn concrete_reachable_quotient(ra: &RegisterAutomaton, pool: &[Symbol]) -> BTreeSet<RepConfig> {
    let g = concrete_graph(ra, pool);
    let mut seen = vec![false; g.len()];
    let mut stack: Vec<usize> = (0..g.len()).filter(|&i| g.nodes[i].location == ra.initial()).collect();
    for &i in &stack {
        seen[i] = true;
    }
    while let Some(n) = stack.pop() {
        for &m in &g.succ[n] {
            if !seen[m] {
                seen[m] = true;
                stack.push(m);
            }
        }
    }
    (0..g.len())
        .filter(|&i| seen[i])
        .map(|i| {
            let c = &g.nodes[i];
            RepConfig::new(c.location, matrix_of_valuation(&c.valuation, ra.constants()))
        })
        .collect()
}

/// Textbook explicit-state CTL labelling of a concrete graph. `EU` is a
/// backward search from the goal through the hold set; `EG` keeps the
/// nodes of the hold-subgraph that can reach a non-trivial strongly
/// connected component.
pub fn explicit_ctl(g: &ConcreteGraph, f: &CtlFormula) -> Vec<bool> {
    let pred = g.predecessors();
    explicit(g, &pred, f)
}

fn explicit(g: &ConcreteGraph, pred: &[Vec<usize>], f: &CtlFormula) -> Vec<bool> {
    match f {
        CtlFormula::AtLocation(l) => g.nodes.iter().map(|c| c.location == *l).collect(),
        CtlFormula::RegEq(i, j) => {
            g.nodes.iter().map(|c| c.valuation.get(*i) == c.valuation.get(*j)).collect()
        }
        CtlFormula::RegEqConst(i, k) => g.nodes.iter().map(|c| c.valuation.get(*i) == *k).collect(),
        CtlFormula::Not(h) => explicit(g, pred, h).into_iter().map(|b| !b).collect(),
        CtlFormula::And(a, b) => {
            let (x, y) = (explicit(g, pred, a), explicit(g, pred, b));
            x.iter().zip(&y).map(|(p, q)| *p && *q).collect()
        }
        CtlFormula::EX(h) => {
            let s = explicit(g, pred, h);
            g.succ.iter().map(|ss| ss.iter().any(|&m| s[m])).collect()
        }
        CtlFormula::EU(a, b) => {
            let (hold, goal) = (explicit(g, pred, a), explicit(g, pred, b));
            let mut sat = goal.clone();
            let mut stack: Vec<usize> = (0..g.len()).filter(|&n| goal[n]).collect();
            while let Some(n) = stack.pop() {
                for &p in &pred[n] {
                    if !sat[p] && hold[p] {
                        sat[p] = true;
                        stack.push(p);
                    }
                }
            }
            sat
        }
        CtlFormula::EG(h) => {
            let hold = explicit(g, pred, h);
            let mut sub = DiGraph::<usize, ()>::new();
            let mut id = vec![None; g.len()];
            for n in (0..g.len()).filter(|&n| hold[n]) {
                id[n] = Some(sub.add_node(n));
            }
            for n in 0..g.len() {
                if let Some(a) = id[n] {
                    for &m in &g.succ[n] {
                        if let Some(b) = id[m] {
                            sub.add_edge(a, b, ());
                        }
                    }
                }
            }
            let mut sat = vec![false; g.len()];
            let mut stack = Vec::new();
            for scc in tarjan_scc(&sub) {
                let cyclic = scc.len() > 1 || sub.contains_edge(scc[0], scc[0]);
                if cyclic {
                    for v in scc {
                        let n = sub[v];
                        sat[n] = true;
                        stack.push(n);
                    }
                }
            }
            while let Some(n) = stack.pop() {
                for &p in &pred[n] {
                    if hold[p] && !sat[p] {
                        sat[p] = true;
                        stack.push(p);
                    }
                }
            }
            sat
        }
    }
}

/// Size limits for random automata.
#[derive(Clone, Copy, Debug)]
pub struct Bounds {
    pub registers: usize,
    pub locations: usize,
    pub transitions: usize,
    pub arity: usize,
    pub constants: usize,
}

impl Bounds {
    pub const SMALL: Bounds =
        Bounds { registers: 3, locations: 3, transitions: 5, arity: 2, constants: 1 };
}

fn random_term(rng: &mut impl Rng, n: usize, arity: usize, constants: &[Symbol]) -> Term {
    loop {
        match rng.gen_range(0..3) {
            0 => return Term::Reg(rng.gen_range(0..n)),
            1 if arity > 0 => return Term::Param(rng.gen_range(1..=arity)),
            2 if !constants.is_empty() => return Term::Const(*constants.choose(rng).unwrap()),
            _ => {}
        }
    }
}

/// A random automaton within `b`. Constants are drawn from `{0, 1, 2}` so
/// they sometimes collide with the fresh symbols of canonical valuations.
pub fn random_automaton(rng: &mut impl Rng, b: Bounds) -> RegisterAutomaton {
    let n = rng.gen_range(1..=b.registers);
    let locs = rng.gen_range(1..=b.locations);
    let k = rng.gen_range(0..=b.constants);
    let mut pool = vec![0u32, 1, 2];
    pool.shuffle(rng);
    let mut constants: Vec<Symbol> = pool[..k].iter().copied().map(Symbol).collect();
    constants.sort();
    let actions: Vec<Action> = (0..rng.gen_range(1..=2))
        .map(|i| Action::new(format!("a{i}"), rng.gen_range(0..=b.arity)))
        .collect();
    let transitions = (0..rng.gen_range(0..=b.transitions))
        .map(|_| {
            let action = rng.gen_range(0..actions.len());
            let arity = actions[action].arity;
            let atoms = (0..rng.gen_range(0..=2))
                .map(|_| GuardAtom {
                    lhs: random_term(rng, n, arity, &constants),
                    rhs: random_term(rng, n, arity, &constants),
                    polarity: if rng.gen_bool(0.5) { Polarity::Eq } else { Polarity::Neq },
                })
                .collect();
            let mut bindings = Vec::new();
            for r in 0..n {
                if rng.gen_bool(0.6) {
                    bindings.push((r, random_term(rng, n, arity, &constants)));
                }
            }
            Transition {
                source: rng.gen_range(0..locs),
                action,
                guard: Guard::new(atoms),
                assignment: Assignment::new(bindings).unwrap(),
                target: rng.gen_range(0..locs),
            }
        })
        .collect();
    RegisterAutomaton::new(
        actions,
        (1..=n).map(|i| format!("x{i}")).collect(),
        (0..locs).map(|i| format!("l{i}")).collect(),
        rng.gen_range(0..locs),
        transitions,
        ConstantSet::new(constants).unwrap(),
    )
    .unwrap()
}

/// A random formula of depth at most `depth` over `ra`'s locations,
/// registers and constants.
pub fn random_formula(rng: &mut impl Rng, ra: &RegisterAutomaton, depth: usize) -> CtlFormula {
    let n = ra.num_registers();
    if depth == 0 || rng.gen_bool(0.25) {
        let consts: Vec<Symbol> = ra.constants().iter().collect();
        return match rng.gen_range(0..3) {
            0 => CtlFormula::AtLocation(rng.gen_range(0..ra.locations().len())),
            1 if !consts.is_empty() => {
                CtlFormula::RegEqConst(rng.gen_range(0..n), *consts.choose(rng).unwrap())
            }
            _ => CtlFormula::RegEq(rng.gen_range(0..n), rng.gen_range(0..n)),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..6) {
        0 => CtlFormula::not(random_formula(rng, ra, d)),
        1 => CtlFormula::and(random_formula(rng, ra, d), random_formula(rng, ra, d)),
        2 => CtlFormula::ex(random_formula(rng, ra, d)),
        3 => CtlFormula::eu(random_formula(rng, ra, d), random_formula(rng, ra, d)),
        4 => CtlFormula::eg(random_formula(rng, ra, d)),
        _ => match rng.gen_range(0..4) {
            0 => CtlFormula::af(random_formula(rng, ra, d)),
            1 => CtlFormula::ag(random_formula(rng, ra, d)),
            2 => CtlFormula::or(random_formula(rng, ra, d), random_formula(rng, ra, d)),
            _ => CtlFormula::ax(random_formula(rng, ra, d)),
        },
    }
}

/// A random bijection of `pool` that fixes every constant.
pub fn constant_fixing_permutation(
    rng: &mut impl Rng,
    pool: &[Symbol],
    constants: &ConstantSet,
) -> HashMap<Symbol, Symbol> {
    let free: Vec<Symbol> = pool.iter().copied().filter(|s| !constants.contains(*s)).collect();
    let mut image = free.clone();
    image.shuffle(rng);
    let mut map: HashMap<Symbol, Symbol> = free.into_iter().zip(image).collect();
    for c in constants.iter() {
        map.insert(c, c);
    }
    map
}

pub fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn load_fixture(name: &str) -> RegisterAutomaton {
    regmc::dsl::parse_automaton(&fixture(name)).unwrap()
}
