//! Each check returns a one-line summary on success and a description of
//! the first mismatch on failure. The acceptance target runs them at full
//! size; the other test targets run smaller instances.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regmc::automaton::{concrete_successors, transits};
use regmc::ctl::{compute_ctl, compute_ex, compute_not, CtlFormula, LabelSet};
use regmc::dsl;
use regmc::reach::{post, BuildOptions, QuotientGraph};
use regmc::repr::{canonical_valuation, matrix_of_valuation, universe, MatrixEntry, RepConfig, RepMatrix};
use regmc::{
    Action, Configuration, ConstantSet, DataSymbol, RegisterAutomaton, Symbol, Valuation,
};

use super::*;

pub type Check = Result<String, String>;

fn consts(cs: &[u32]) -> ConstantSet {
    ConstantSet::new(cs.iter().copied().map(Symbol)).unwrap()
}

fn sequential() -> BuildOptions {
    BuildOptions { threads: Some(0), literal: false }
}

/// `Bell(n)` from the Bell triangle.
pub fn bell(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for x in &row {
            next.push(next.last().unwrap() + x);
        }
        row = next;
    }
    row[0]
}

/// Number of consistent matrices: partitions of `n` registers into `k`
/// blocks, times the partial injections from blocks into `c` constants.
pub fn universe_size_formula(n: usize, c: usize) -> u64 {
    let mut s = vec![vec![0u64; n + 1]; n + 1];
    s[0][0] = 1;
    for i in 1..=n {
        for k in 1..=i {
            s[i][k] = k as u64 * s[i - 1][k] + s[i - 1][k - 1];
        }
    }
    let choose = |a: usize, b: usize| -> u64 {
        (0..b).fold(1u64, |acc, i| acc * (a - i) as u64 / (i as u64 + 1))
    };
    let falling = |a: usize, b: usize| -> u64 { (0..b).map(|i| (a - i) as u64).product() };
    (0..=n)
        .map(|k| s[n][k] * (0..=k.min(c)).map(|j| choose(k, j) * falling(c, j)).sum::<u64>())
        .sum()
}

/// Matrices of every valuation over `C` plus `n` fresh symbols.
pub fn brute_force_universe(n: usize, constants: &ConstantSet) -> BTreeSet<RepMatrix> {
    let mut pool: Vec<Symbol> = constants.iter().collect();
    pool.extend((100..100 + n as u32).map(Symbol));
    let mut out = BTreeSet::new();
    let mut v = vec![0usize; n];
    loop {
        let val = Valuation(v.iter().map(|&i| pool[i]).collect());
        out.insert(matrix_of_valuation(&val, constants));
        let mut i = 0;
        while i < n && v[i] + 1 == pool.len() {
            v[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        v[i] += 1;
    }
    out
}

const CONSTANT_SETS: &[&[u32]] = &[&[], &[0], &[2], &[0, 1], &[1, 5]];

pub fn universe_counts() -> Check {
    for n in 1..=4 {
        for cs in CONSTANT_SETS {
            let c = consts(cs);
            let got: BTreeSet<RepMatrix> = universe(n, &c).into_iter().collect();
            let want = brute_force_universe(n, &c);
            if got != want {
                return Err(format!("n={n} C={cs:?}: {} matrices, brute force {}", got.len(), want.len()));
            }
            if universe(n, &c).len() as u64 != universe_size_formula(n, cs.len()) {
                return Err(format!("n={n} C={cs:?}: count disagrees with the partition formula"));
            }
        }
    }
    let two = universe(2, &consts(&[3])).len();
    let eight = universe(8, &consts(&[0])).len();
    if two != 5 || bell(3) != 5 {
        return Err(format!("|universe(2,{{c}})| = {two}"));
    }
    if eight as u64 != bell(9) || bell(9) != 21147 || universe_size_formula(8, 1) != 21147 {
        return Err(format!("|universe(8,{{0}})| = {eight}"));
    }
    Ok("n<=4, |C|<=2 match brute force; |U(2,{c})|=5, |U(8,{0})|=21147=Bell(9)".into())
}

pub fn canonical_round_trip() -> Check {
    let mut total = 0;
    for n in 1..=4 {
        for cs in CONSTANT_SETS {
            let c = consts(cs);
            for r in universe(n, &c) {
                let w = canonical_valuation(&r, &c).map_err(|e| e.to_string())?;
                if matrix_of_valuation(&w, &c) != r {
                    return Err(format!("n={n} C={cs:?}: {r:?} -> {w:?}"));
                }
                total += 1;
            }
        }
    }
    Ok(format!("{total} matrices round-trip"))
}

fn rows(rows: &[&[i64]]) -> RepMatrix {
    // 1 and 0 stand for the booleans, other values for constants
    RepMatrix::from_rows(
        rows.iter()
            .map(|r| {
                r.iter()
                    .map(|&x| match x {
                        0 => MatrixEntry::Zero,
                        1 => MatrixEntry::One,
                        c => MatrixEntry::Const(Symbol(c as u32)),
                    })
                    .collect()
            })
            .collect(),
    )
    .unwrap()
}

pub fn golden_values() -> Check {
    let ra = load_fixture("post_example.ra");
    let r = rows(&[&[1, 0, 0], &[0, 1, 1], &[0, 1, 1]]);
    let w = canonical_valuation(&r, ra.constants()).map_err(|e| e.to_string())?;
    if w != Valuation::new([1, 2, 2]) {
        return Err(format!("canonical valuation {w:?}, expected 122"));
    }

    let fig = load_fixture("two_location.ra");
    let c = fig.constants();
    let all_one = rows(&[&[1, 1], &[1, 1]]);
    let id = rows(&[&[1, 0], &[0, 1]]);
    let pinned = rows(&[&[2, 0], &[0, 1]]);
    let expected = [&all_one, &id, &id, &pinned, &id];
    for (k, (v, m)) in [[7, 7], [1, 3], [1, 3], [2, 3], [6, 9]].iter().zip(expected).enumerate() {
        let got = matrix_of_valuation(&Valuation::new(*v), c);
        if got != *m {
            return Err(format!("R[v{k}] = {got:?}"));
        }
    }

    let lp = ra.location_index("lp").unwrap();
    let succ: BTreeSet<RepConfig> = post(&ra, &RepConfig::new(0, r)).map_err(|e| e.to_string())?.into_iter().collect();
    for (name, m) in [
        ("R'0", rows(&[&[1, 1, 0], &[1, 1, 0], &[0, 0, 1]])),
        ("R'1", rows(&[&[1, 0, 1], &[0, 1, 0], &[1, 0, 1]])),
        ("R'2", rows(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])),
    ] {
        if !succ.contains(&RepConfig::new(lp, m)) {
            return Err(format!("Post misses {name}"));
        }
    }
    if succ.iter().any(|s| s.matrix.get(1, 2) == MatrixEntry::One) {
        return Err("Post contains a matrix with x2 = x3".into());
    }
    Ok(format!("w=122, R[v0..v4] as printed, Post has {} successors incl. R'0..R'2", succ.len()))
}

/// Successors of the canonical valuation over the sufficient pool,
/// projected to representative configurations.
pub fn concrete_post(ra: &RegisterAutomaton, c: &RepConfig, pool: &[Symbol]) -> BTreeSet<RepConfig> {
    let w = canonical_valuation(&c.matrix, ra.constants()).unwrap();
    concrete_successors(ra, &Configuration::new(c.location, w), pool)
        .unwrap()
        .iter()
        .map(|s| RepConfig::new(s.location, matrix_of_valuation(&s.valuation, ra.constants())))
        .collect()
}

pub fn post_oracle(count: u64) -> Check {
    let mut sources = 0;
    for seed in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ra = random_automaton(&mut rng, Bounds::SMALL);
        let pool = ra.sufficient_pool();
        for m in universe(ra.num_registers(), ra.constants()) {
            for l in 0..ra.locations().len() {
                let c = RepConfig::new(l, m.clone());
                let got: BTreeSet<RepConfig> = post(&ra, &c).unwrap().into_iter().collect();
                let want = concrete_post(&ra, &c, &pool);
                if got != want {
                    return Err(format!(
                        "seed {seed}: post of {} has {} successors, concrete {}\n{}",
                        dsl::serialize_repconfig(&c, &ra),
                        got.len(),
                        want.len(),
                        dsl::serialize_automaton(&ra)
                    ));
                }
                sources += 1;
            }
        }
    }
    Ok(format!("{count} automata, {sources} source configurations"))
}

pub fn worked_run_chain() -> Check {
    let ra = load_fixture("two_location.ra");
    let g = QuotientGraph::build(&ra, &sequential()).map_err(|e| e.to_string())?;
    let (l0, l1) = (ra.location_index("l0").unwrap(), ra.location_index("l1").unwrap());
    // the printed chain ends in l'; the run it abstracts ends in l0
    let chain = [(l0, [7, 7]), (l1, [1, 3]), (l1, [1, 3]), (l1, [2, 3]), (l0, [6, 9])];
    let nodes: Vec<u32> = chain
        .iter()
        .map(|(l, v)| {
            let m = matrix_of_valuation(&Valuation::new(*v), ra.constants());
            g.node_of(&RepConfig::new(*l, m)).expect("consistent")
        })
        .collect();
    for (k, w) in nodes.windows(2).enumerate() {
        if !g.successors(w[0]).contains(&w[1]) {
            return Err(format!("no edge from step {k} to step {}", k + 1));
        }
    }
    Ok("4 edges present in the quotient graph".into())
}

fn project(ra: &RegisterAutomaton, c: &Configuration) -> RepConfig {
    RepConfig::new(c.location, matrix_of_valuation(&c.valuation, ra.constants()))
}

pub fn ctl_oracle(automata: u64, formulas_each: usize) -> Check {
    let mut formulas = 0;
    for seed in 0..automata {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let ra = random_automaton(&mut rng, Bounds::SMALL);
        let g = QuotientGraph::build(&ra, &sequential()).unwrap();
        let cg = concrete_graph(&ra, &ra.sufficient_pool());
        let node_of: Vec<u32> = cg.nodes.iter().map(|c| g.node_of(&project(&ra, c)).unwrap()).collect();
        for _ in 0..formulas_each {
            let depth = rng.gen_range(0..=3);
            let f = random_formula(&mut rng, &ra, depth);
            let sat = compute_ctl(&g, &f).unwrap();
            let explicit = explicit_ctl(&cg, &f);
            let mut class_value: HashMap<u32, bool> = HashMap::new();
            for (i, &b) in explicit.iter().enumerate() {
                if *class_value.entry(node_of[i]).or_insert(b) != b {
                    return Err(format!(
                        "seed {seed}: {} is not constant on the class of {:?}",
                        dsl::serialize_formula(&f, &ra),
                        cg.nodes[i]
                    ));
                }
                if sat.contains(node_of[i]) != b {
                    return Err(format!(
                        "seed {seed}: {} disagrees at {:?}\n{}",
                        dsl::serialize_formula(&f, &ra),
                        cg.nodes[i],
                        dsl::serialize_automaton(&ra)
                    ));
                }
            }
            formulas += 1;
        }
    }
    Ok(format!("{formulas} formulas over {automata} automata, constant on every class"))
}

/// Applies a symbol map pointwise.
fn rename(map: &HashMap<Symbol, Symbol>, xs: &[Symbol]) -> Vec<Symbol> {
    xs.iter().map(|s| map[s]).collect()
}

fn rename_config(map: &HashMap<Symbol, Symbol>, c: &Configuration) -> Configuration {
    Configuration::new(c.location, Valuation(rename(map, c.valuation.values())))
}

pub fn automorphisms(trials: u64) -> Check {
    let mut steps = 0;
    for seed in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let ra = random_automaton(&mut rng, Bounds::SMALL);
        let n = ra.num_registers();
        let pool = ra.constants().pool_with_fresh(n + ra.max_arity() + 3);
        let pick = |rng: &mut ChaCha8Rng| pool[rng.gen_range(0..pool.len())];
        let from = Configuration::new(
            rng.gen_range(0..ra.locations().len()),
            Valuation((0..n).map(|_| pick(&mut rng)).collect()),
        );
        let action = rng.gen_range(0..ra.actions().len());
        let sym = DataSymbol { action, args: (0..ra.actions()[action].arity).map(|_| pick(&mut rng)).collect() };
        let succ: Vec<Configuration> = concrete_successors(&ra, &from, &pool).unwrap().into_iter().collect();
        let to = if !succ.is_empty() && rng.gen_bool(0.7) {
            succ[rng.gen_range(0..succ.len())].clone()
        } else {
            Configuration::new(
                rng.gen_range(0..ra.locations().len()),
                Valuation((0..n).map(|_| pick(&mut rng)).collect()),
            )
        };
        let sigma = constant_fixing_permutation(&mut rng, &pool, ra.constants());
        let moved_sym = DataSymbol { action, args: rename(&sigma, &sym.args) };
        let before = transits(&ra, &from, &sym, &to).unwrap();
        let after = transits(&ra, &rename_config(&sigma, &from), &moved_sym, &rename_config(&sigma, &to)).unwrap();
        if before != after {
            return Err(format!("trial {seed}: step relation changed under {sigma:?}"));
        }
        let moved: BTreeSet<Configuration> = succ.iter().map(|c| rename_config(&sigma, c)).collect();
        if concrete_successors(&ra, &rename_config(&sigma, &from), &pool).unwrap() != moved {
            return Err(format!("trial {seed}: successor set not equivariant under {sigma:?}"));
        }
        steps += before as usize;
    }
    Ok(format!("{trials} trials ({steps} with a step), relation preserved"))
}

pub fn dsl_round_trips(automata: u64, formulas: u64) -> Check {
    for name in ["two_location.ra", "byzantine.ra", "post_example.ra"] {
        let ra = load_fixture(name);
        let text = dsl::serialize_automaton(&ra);
        let back = dsl::parse_automaton(&text).map_err(|e| format!("{name}: {e}"))?;
        if back != ra || dsl::serialize_automaton(&back) != text {
            return Err(format!("{name} does not round-trip"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9000);
    for k in 0..automata {
        let ra = random_automaton(&mut rng, Bounds::SMALL);
        let text = dsl::serialize_automaton(&ra);
        match dsl::parse_automaton(&text) {
            Ok(back) if back == ra => {}
            _ => return Err(format!("automaton {k} does not round-trip:\n{text}")),
        }
    }
    for k in 0..formulas {
        let ra = random_automaton(&mut rng, Bounds::SMALL);
        let depth = rng.gen_range(0..=4);
        let f = random_formula(&mut rng, &ra, depth);
        let text = dsl::serialize_formula(&f, &ra);
        match dsl::parse_formula(&text, &ra) {
            Ok(back) if back == f => {}
            _ => return Err(format!("formula {k} does not round-trip: {text}")),
        }
    }
    let mut configs = 0;
    for cs in [&[][..], &[0], &[0, 1], &[4, 7, 9]] {
        let ra = RegisterAutomaton::new(
            vec![Action::new("a", 0)],
            vec!["x1".into(), "x2".into(), "x3".into()],
            vec!["l0".into(), "l1".into()],
            0,
            Vec::new(),
            consts(cs),
        )
        .unwrap();
        for m in universe(3, ra.constants()) {
            for l in 0..2 {
                let c = RepConfig::new(l, m.clone());
                let text = dsl::serialize_repconfig(&c, &ra);
                match dsl::parse_repconfig(&text, &ra) {
                    Ok(back) if back == c => configs += 1,
                    _ => return Err(format!("configuration does not round-trip: {text}")),
                }
            }
        }
    }
    Ok(format!("3 fixtures, {automata} automata, {formulas} formulas, {configs} configurations"))
}

/// The Byzantine generals model and its quotient graph.
pub struct Byzantine {
    pub ra: RegisterAutomaton,
    pub graph: QuotientGraph,
}

impl Byzantine {
    pub fn load() -> Self {
        let ra = load_fixture("byzantine.ra");
        let graph = QuotientGraph::build(&ra, &BuildOptions::default()).unwrap();
        Byzantine { ra, graph }
    }

    pub fn formula(&self, text: &str) -> CtlFormula {
        dsl::parse_formula(text, &self.ra).unwrap()
    }

    pub fn sat(&self, text: &str) -> LabelSet {
        compute_ctl(&self.graph, &self.formula(text)).unwrap()
    }

    pub fn node(&self, config: &str) -> u32 {
        let c = dsl::parse_repconfig(config, &self.ra).unwrap();
        self.graph.node_of(&c).unwrap()
    }

    /// Nodes at `location` whose canonical valuation satisfies `pred`.
    pub fn slice(&self, location: &str, pred: impl Fn(&dyn Fn(&str) -> Symbol) -> bool) -> BTreeSet<u32> {
        let l = self.ra.location_index(location).unwrap();
        let size = self.graph.universe().len() as u32;
        (0..size)
            .map(|k| self.graph.node(l, k))
            .filter(|&node| {
                let w = canonical_valuation(self.graph.matrix_of(node), self.ra.constants()).unwrap();
                let get = |r: &str| w.get(self.ra.register_index(r).unwrap());
                pred(&get)
            })
            .collect()
    }
}

pub fn byzantine(b: &Byzantine) -> Check {
    let g = &b.graph;
    if b.ra.num_registers() != 8 || b.ra.locations().len() != 6 || g.universe().len() != 21147 {
        return Err("unexpected model size".into());
    }
    let zero = Symbol(0);

    let af = b.sat("AF (D1 = D2)");
    for node in b.slice("l0", |v| v("D1") == v("D2") || v("r1") == v("r2")) {
        if !af.contains(node) {
            return Err(format!("(a) {} is not in AF(D1 = D2)", dsl::serialize_repconfig(&g.config(node), &b.ra)));
        }
    }

    let eg = b.sat("EG !(D1 = D2)");
    let l0 = b.ra.location_index("l0").unwrap();
    let got: BTreeSet<u32> = eg.nodes().filter(|&n| g.location_of(n) == l0).collect();
    let want = b.slice("l0", |v| v("D1") != v("D2") && v("r1") != v("r2"));
    if got != want {
        return Err(format!("(b) l0-slice of EG has {} nodes, expected {}", got.len(), want.len()));
    }

    // iterates of the EG fixpoint
    let u0 = b.sat("!(D1 = D2)");
    let w0 = compute_ex(g, &u0);
    let u1 = regmc::ctl::compute_and(&u0, &w0);
    let in_l2_w0 = |v: &dyn Fn(&str) -> Symbol| {
        let (r2, s, t, d1) = (v("r2"), v("s"), v("t"), v("D1"));
        (r2 == s && d1 != s)
            || (r2 == t && d1 != t)
            || (s == t && d1 != s)
            || (r2 != s && r2 != t && s != t && d1 != zero)
    };
    let mut checks = 0;
    let mut expect = |set: &LabelSet, name: &str, config: &str, member: bool| -> Result<(), String> {
        checks += 1;
        if set.contains(b.node(config)) != member {
            return Err(format!("{name}: `{config}` should {}be a member", if member { "" } else { "not " }));
        }
        Ok(())
    };
    expect(&u0, "U0", "l1 | {D1 D2}", false)?;
    expect(&u0, "U0", "L3 | {r1 r2}", true)?;
    expect(&w0, "W0", "l0 | {D1 D2}", true)?;
    expect(&w0, "W0", "L1 | {D1 D2 r1 r2 r3 D3 s t}", true)?;
    expect(&w0, "W0", "l2 | {r2 s} {D1}", true)?;
    expect(&w0, "W0", "l2 | {r2 s D1}", false)?;
    expect(&w0, "W0", "l2 | {D1=0}", false)?;
    expect(&w0, "W0", "l2 | {s t D2} {D1=0}", true)?;
    expect(&w0, "W0", "L2 | {D1 D2}", false)?;
    expect(&u1, "U1", "l2 | {r2 t} {D1 D2}", false)?;
    expect(&u1, "U1", "l2 | {r2 t}", true)?;
    expect(&eg, "EG", "l0", true)?;
    expect(&eg, "EG", "l0 | {r1 r2}", false)?;
    expect(&eg, "EG", "L2 | {D1 s} {D2 t}", true)?;
    expect(&eg, "EG", "L2 | {D1 D2=0}", false)?;

    // whole-slice comparisons where the printed rows are exact
    let slice_of = |set: &LabelSet, loc: &str| -> BTreeSet<u32> {
        let l = b.ra.location_index(loc).unwrap();
        set.nodes().filter(|&n| g.location_of(n) == l).collect()
    };
    let whole = |loc: &str| b.slice(loc, |_| true);
    for loc in ["l0", "l1", "L1", "L3"] {
        if slice_of(&w0, loc) != whole(loc) {
            return Err(format!("W0 at {loc} is not the whole universe"));
        }
    }
    if slice_of(&w0, "l2") != b.slice("l2", in_l2_w0) {
        return Err("W0 at l2 differs from the printed row".into());
    }
    let l2_u1 = b.slice("l2", |v| v("D1") != v("D2") && in_l2_w0(v));
    if slice_of(&u1, "l2") != l2_u1 || slice_of(&eg, "l2") != l2_u1 {
        return Err("U1 or the final set at l2 differs from the printed row".into());
    }
    let l2_neq = b.slice("L2", |v| v("D1") != v("D2"));
    if slice_of(&w0, "L2") != l2_neq || slice_of(&eg, "L2") != l2_neq {
        return Err("W0 or the final set at L2 differs from D1 != D2".into());
    }
    if u0.len() + b.sat("D1 = D2").len() != g.num_nodes() || compute_not(g, &u0) != b.sat("D1 = D2") {
        return Err("U0 is not the complement of D1 = D2".into());
    }
    Ok(format!(
        "(a) holds, (b) l0-slice has {} nodes, (c) {checks} spot-checks and 4 row comparisons pass",
        want.len()
    ))
}
