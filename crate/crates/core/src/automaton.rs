//! Register automata and their concrete one-step semantics.
//!
//! The infinite alphabet is modelled by the natural numbers ([`Symbol`]). A
//! transition reads a data symbol `α(d₁ … dₙ)`, checks a conjunctive guard
//! over registers, parameters and constants, and rewrites the registers named
//! by its assignment.
//!
//! **Havoc semantics.** Registers that an assignment does not mention are
//! *not* preserved: after the step they may hold any symbol at all. The empty
//! assignment (written `-`) therefore scrambles every register. Transitions
//! that want to keep a value must copy it explicitly (`x1 := x1`).
//!
//! Since the alphabet is infinite, the concrete operations here take an
//! explicit finite `pool` of symbols over which data-symbol arguments and
//! havocked registers range. [`RegisterAutomaton::sufficient_pool`] returns a
//! pool large enough to realise every abstract successor of a configuration
//! whose values are drawn from the same pool.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// An element of the infinite alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u32);

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The finite set of constants `C`, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ConstantSet(Vec<Symbol>);

impl ConstantSet {
    pub fn new(symbols: impl IntoIterator<Item = Symbol>) -> Result<Self> {
        let mut v: Vec<Symbol> = symbols.into_iter().collect();
        v.sort();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Usage(format!("duplicate constant {}", w[0])));
        }
        Ok(ConstantSet(v))
    }

    pub fn empty() -> Self {
        ConstantSet(Vec::new())
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.0.binary_search(&s).is_ok()
    }

    pub fn index_of(&self, s: Symbol) -> Option<usize> {
        self.0.binary_search(&s).ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The first `k` positive naturals that are not constants, ascending.
    ///
    /// These are the fresh symbols used for canonical valuations: the `i`-th
    /// register without a constant gets the `i`-th fresh symbol.
    pub fn fresh_symbols(&self, k: usize) -> Vec<Symbol> {
        (1u32..)
            .map(Symbol)
            .filter(|s| !self.contains(*s))
            .take(k)
            .collect()
    }

    /// `C` together with the first `fresh` non-constant symbols.
    pub fn pool_with_fresh(&self, fresh: usize) -> Vec<Symbol> {
        let mut pool = self.0.clone();
        pool.extend(self.fresh_symbols(fresh));
        pool.sort();
        pool
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Action {
    pub name: String,
    pub arity: usize,
}

impl Action {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Action { name: name.into(), arity }
    }
}

/// Operand of a guard atom or assignment: a register, a formal parameter of
/// the action (1-based, as in `p1`), or a constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Reg(usize),
    Param(usize),
    Const(Symbol),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Eq,
    Neq,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Eq => Polarity::Neq,
            Polarity::Neq => Polarity::Eq,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GuardAtom {
    pub lhs: Term,
    pub rhs: Term,
    pub polarity: Polarity,
}

impl GuardAtom {
    pub fn eq(lhs: Term, rhs: Term) -> Self {
        GuardAtom { lhs, rhs, polarity: Polarity::Eq }
    }

    pub fn neq(lhs: Term, rhs: Term) -> Self {
        GuardAtom { lhs, rhs, polarity: Polarity::Neq }
    }
}

/// A conjunction of atomic (dis)equalities; the empty guard is `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Guard {
    pub atoms: Vec<GuardAtom>,
}

impl Guard {
    pub fn new(atoms: Vec<GuardAtom>) -> Self {
        Guard { atoms }
    }

    pub fn truth() -> Self {
        Guard::default()
    }
}

/// Simultaneous assignment `(x_k1 … x_kn) ↦ (e_1 … e_n)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Assignment {
    bindings: BTreeMap<usize, Term>,
}

impl Assignment {
    /// Fails if a register is assigned twice.
    pub fn new(bindings: impl IntoIterator<Item = (usize, Term)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (reg, term) in bindings {
            if map.insert(reg, term).is_some() {
                return Err(Error::MalformedTransition(format!(
                    "register {reg} assigned more than once"
                )));
            }
        }
        Ok(Assignment { bindings: map })
    }

    pub fn empty() -> Self {
        Assignment::default()
    }

    pub fn get(&self, reg: usize) -> Option<&Term> {
        self.bindings.get(&reg)
    }

    pub fn bindings(&self) -> impl Iterator<Item = (usize, Term)> + '_ {
        self.bindings.iter().map(|(r, t)| (*r, *t))
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: usize,
    /// Index into [`RegisterAutomaton::actions`].
    pub action: usize,
    pub guard: Guard,
    pub assignment: Assignment,
    pub target: usize,
}

/// `(Σ, A, X, L, l₀, Δ)` together with the constant set `C`.
///
/// Locations, registers and actions are referred to by index; the names are
/// kept for printing and parsing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterAutomaton {
    actions: Vec<Action>,
    registers: Vec<String>,
    locations: Vec<String>,
    initial: usize,
    transitions: Vec<Transition>,
    constants: ConstantSet,
}

impl RegisterAutomaton {
    pub fn new(
        actions: Vec<Action>,
        registers: Vec<String>,
        locations: Vec<String>,
        initial: usize,
        transitions: Vec<Transition>,
        constants: ConstantSet,
    ) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidAutomaton(m));
        if registers.is_empty() {
            return invalid("at least one register is required".into());
        }
        if let Some(d) = first_duplicate(&registers) {
            return invalid(format!("duplicate register `{d}`"));
        }
        if let Some(d) = first_duplicate(&locations) {
            return invalid(format!("duplicate location `{d}`"));
        }
        let action_names: Vec<String> = actions.iter().map(|a| a.name.clone()).collect();
        if let Some(d) = first_duplicate(&action_names) {
            return invalid(format!("duplicate action `{d}`"));
        }
        if initial >= locations.len() {
            return invalid("initial location is not declared".into());
        }
        let ra = RegisterAutomaton {
            actions,
            registers,
            locations,
            initial,
            transitions,
            constants,
        };
        for (k, t) in ra.transitions.iter().enumerate() {
            ra.validate_transition(t)
                .map_err(|e| Error::InvalidAutomaton(format!("transition {k}: {e}")))?;
        }
        Ok(ra)
    }

    fn validate_transition(&self, t: &Transition) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedTransition(m));
        if t.source >= self.locations.len() || t.target >= self.locations.len() {
            return bad("endpoint is not a declared location".into());
        }
        let Some(action) = self.actions.get(t.action) else {
            return bad("unknown action".into());
        };
        let check = |term: &Term| -> Result<()> {
            match *term {
                Term::Reg(i) if i >= self.registers.len() => {
                    Err(Error::MalformedTransition(format!("unknown register index {i}")))
                }
                Term::Param(j) if j == 0 || j > action.arity => Err(Error::MalformedTransition(
                    format!("parameter p{j} exceeds arity {} of `{}`", action.arity, action.name),
                )),
                Term::Const(c) if !self.constants.contains(c) => {
                    Err(Error::MalformedTransition(format!("{c} is not a declared constant")))
                }
                _ => Ok(()),
            }
        };
        for atom in &t.guard.atoms {
            check(&atom.lhs)?;
            check(&atom.rhs)?;
        }
        for (reg, term) in t.assignment.bindings() {
            if reg >= self.registers.len() {
                return bad(format!("assignment to unknown register index {reg}"));
            }
            check(&term)?;
        }
        Ok(())
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub fn num_registers(&self) -> usize {
        self.registers.len()
    }

    pub fn locations(&self) -> &[String] {
        &self.locations
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn constants(&self) -> &ConstantSet {
        &self.constants
    }

    pub fn outgoing(&self, location: usize) -> impl Iterator<Item = &Transition> + '_ {
        self.transitions.iter().filter(move |t| t.source == location)
    }

    pub fn register_index(&self, name: &str) -> Option<usize> {
        self.registers.iter().position(|r| r == name)
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn max_arity(&self) -> usize {
        self.actions.iter().map(|a| a.arity).max().unwrap_or(0)
    }

    /// `C` plus `|X| + max-arity + 1` fresh symbols: enough room to realise
    /// every representative successor of a configuration over this pool.
    pub fn sufficient_pool(&self) -> Vec<Symbol> {
        self.constants
            .pool_with_fresh(self.num_registers() + self.max_arity() + 1)
    }

    /// Same automaton with a different transition relation.
    pub fn with_transitions(&self, transitions: Vec<Transition>) -> Result<Self> {
        RegisterAutomaton::new(
            self.actions.clone(),
            self.registers.clone(),
            self.locations.clone(),
            self.initial,
            transitions,
            self.constants.clone(),
        )
    }
}

fn first_duplicate(names: &[String]) -> Option<&str> {
    let mut seen = BTreeSet::new();
    names.iter().find(|n| !seen.insert(n.as_str())).map(|s| s.as_str())
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation(pub Vec<Symbol>);

impl Valuation {
    pub fn new(values: impl IntoIterator<Item = u32>) -> Self {
        Valuation(values.into_iter().map(Symbol).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Symbol {
        self.0[i]
    }

    pub fn values(&self) -> &[Symbol] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub location: usize,
    pub valuation: Valuation,
}

impl Configuration {
    pub fn new(location: usize, valuation: Valuation) -> Self {
        Configuration { location, valuation }
    }
}

/// `α(d₁ … dₙ)`: an action index with its concrete arguments.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DataSymbol {
    pub action: usize,
    pub args: Vec<Symbol>,
}

impl DataSymbol {
    pub fn new(action: usize, args: impl IntoIterator<Item = u32>) -> Self {
        DataSymbol { action, args: args.into_iter().map(Symbol).collect() }
    }
}

/// `⟦e⟧` under a valuation and a parameter valuation.
pub fn eval_term(t: &Term, v: &Valuation, args: &[Symbol]) -> Result<Symbol> {
    match *t {
        Term::Reg(i) => v.0.get(i).copied().ok_or_else(|| {
            Error::MalformedTransition(format!("register index {i} out of range"))
        }),
        Term::Param(j) => j
            .checked_sub(1)
            .and_then(|k| args.get(k))
            .copied()
            .ok_or_else(|| {
                Error::MalformedTransition(format!(
                    "parameter p{j} out of range for {} argument(s)",
                    args.len()
                ))
            }),
        Term::Const(c) => Ok(c),
    }
}

pub fn eval_guard(g: &Guard, v: &Valuation, args: &[Symbol]) -> Result<bool> {
    for atom in &g.atoms {
        let l = eval_term(&atom.lhs, v, args)?;
        let r = eval_term(&atom.rhs, v, args)?;
        let holds = match atom.polarity {
            Polarity::Eq => l == r,
            Polarity::Neq => l != r,
        };
        if !holds {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `⟦π⟧` restricted to `pool`: bound registers take their assigned value,
/// every other register ranges over the pool.
pub fn apply_assignment(
    pi: &Assignment,
    v: &Valuation,
    args: &[Symbol],
    pool: &[Symbol],
) -> Result<BTreeSet<Valuation>> {
    let mut fixed: Vec<Option<Symbol>> = vec![None; v.len()];
    for (reg, term) in pi.bindings() {
        let slot = fixed.get_mut(reg).ok_or_else(|| {
            Error::MalformedTransition(format!("assignment to register index {reg} out of range"))
        })?;
        *slot = Some(eval_term(&term, v, args)?);
    }
    let mut out = BTreeSet::new();
    for_each_completion(&fixed, pool, |vals| {
        out.insert(Valuation(vals.to_vec()));
    });
    Ok(out)
}

/// Calls `f` with every vector that agrees with `fixed` where it is `Some`
/// and ranges over `pool` elsewhere.
pub(crate) fn for_each_completion(
    fixed: &[Option<Symbol>],
    pool: &[Symbol],
    mut f: impl FnMut(&[Symbol]),
) {
    let free: Vec<usize> = (0..fixed.len()).filter(|&i| fixed[i].is_none()).collect();
    if !free.is_empty() && pool.is_empty() {
        return;
    }
    let mut current: Vec<Symbol> = fixed.iter().map(|s| s.unwrap_or(Symbol(0))).collect();
    let mut digits = vec![0usize; free.len()];
    for &i in &free {
        current[i] = pool[0];
    }
    loop {
        f(&current);
        // odometer over the free positions
        let mut k = 0;
        loop {
            if k == free.len() {
                return;
            }
            digits[k] += 1;
            if digits[k] < pool.len() {
                current[free[k]] = pool[digits[k]];
                break;
            }
            digits[k] = 0;
            current[free[k]] = pool[0];
            k += 1;
        }
    }
}

/// Every `(transition index, arguments)` pair over `pool` whose guard holds
/// in configuration `c`.
pub fn enabled_moves(
    ra: &RegisterAutomaton,
    c: &Configuration,
    pool: &[Symbol],
) -> Result<Vec<(usize, Vec<Symbol>)>> {
    let mut moves = Vec::new();
    for (k, t) in ra.transitions().iter().enumerate() {
        if t.source != c.location {
            continue;
        }
        let arity = ra.actions()[t.action].arity;
        let mut result = Ok(());
        for_each_completion(&vec![None; arity], pool, |args| {
            if result.is_err() {
                return;
            }
            match eval_guard(&t.guard, &c.valuation, args) {
                Ok(true) => moves.push((k, args.to_vec())),
                Ok(false) => {}
                Err(e) => result = Err(e),
            }
        });
        result?;
    }
    Ok(moves)
}

/// All one-step successors of `c` with arguments and havocked registers
/// drawn from `pool`.
pub fn concrete_successors(
    ra: &RegisterAutomaton,
    c: &Configuration,
    pool: &[Symbol],
) -> Result<BTreeSet<Configuration>> {
    let mut out = BTreeSet::new();
    for (k, args) in enabled_moves(ra, c, pool)? {
        let t = &ra.transitions()[k];
        for v in apply_assignment(&t.assignment, &c.valuation, &args, pool)? {
            out.insert(Configuration::new(t.target, v));
        }
    }
    Ok(out)
}

/// Whether `from` transits to `to` on `symbol`.
pub fn transits(
    ra: &RegisterAutomaton,
    from: &Configuration,
    symbol: &DataSymbol,
    to: &Configuration,
) -> Result<bool> {
    let n = ra.num_registers();
    if from.valuation.len() != n || to.valuation.len() != n {
        return Err(Error::Usage(format!("valuations must have length {n}")));
    }
    let Some(action) = ra.actions().get(symbol.action) else {
        return Ok(false);
    };
    if symbol.args.len() != action.arity {
        return Ok(false);
    }
    for t in ra.outgoing(from.location) {
        if t.action != symbol.action || t.target != to.location {
            continue;
        }
        if !eval_guard(&t.guard, &from.valuation, &symbol.args)? {
            continue;
        }
        let mut ok = true;
        for (reg, term) in t.assignment.bindings() {
            if to.valuation.get(reg) != eval_term(&term, &from.valuation, &symbol.args)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Checks that `run` is a run of `ra` on `word` starting at the initial
/// location.
pub fn check_run(
    ra: &RegisterAutomaton,
    word: &[DataSymbol],
    run: &[Configuration],
) -> Result<bool> {
    if run.len() != word.len() + 1 {
        return Err(Error::Usage(format!(
            "a run over {} data symbol(s) needs {} configuration(s), got {}",
            word.len(),
            word.len() + 1,
            run.len()
        )));
    }
    if run[0].location != ra.initial() {
        return Ok(false);
    }
    for (i, symbol) in word.iter().enumerate() {
        if !transits(ra, &run[i], symbol, &run[i + 1])? {
            return Ok(false);
        }
    }
    Ok(true)
}
