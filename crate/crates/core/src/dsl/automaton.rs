use std::collections::HashMap;
use std::fmt::Write;

use super::lexer::{tokenize, Parser, Tok};
use super::{is_reserved, param_index, ParseError, SourceSpan};
use crate::automaton::{
    Action, Assignment, ConstantSet, Guard, GuardAtom, Polarity, RegisterAutomaton, Symbol, Term,
    Transition,
};

#[derive(Default)]
struct Decls {
    constants: Option<ConstantSet>,
    registers: Option<Vec<String>>,
    actions: Option<Vec<Action>>,
    locations: Option<(Vec<String>, usize)>,
    transitions: Vec<Transition>,
}

impl Decls {
    fn constants(&self) -> ConstantSet {
        self.constants.clone().unwrap_or_default()
    }
}

/// Parses the line-oriented automaton format:
///
/// ```text
/// format 1
/// constants 2
/// registers x1 x2
/// actions alpha/2 beta/1
/// locations l0* l1
/// trans l0 -> l1 on alpha(p1, p2) when p1 != p2 do x1 := p1, x2 := p2
/// trans l0 -> l0 on alpha(p1, p2) when p1 = p2 do -
/// ```
pub fn parse_automaton(text: &str) -> Result<RegisterAutomaton, ParseError> {
    let mut p = Parser::new(tokenize(text)?);
    skip_blank(&mut p);
    p.expect_keyword("format")?;
    let (version, span) = p.expect_num("format version")?;
    if version != 1 {
        return Err(ParseError::new(span, format!("unsupported format version {version}")));
    }
    end_line(&mut p)?;

    let mut d = Decls::default();
    loop {
        skip_blank(&mut p);
        if matches!(p.peek().tok, Tok::Eof) {
            break;
        }
        let (kw, span) = p.expect_ident("a declaration")?;
        let declared_after_trans = |what: &str| {
            ParseError::new(span, format!("`{what}` must be declared before any transition"))
        };
        let duplicate = |what: &str| ParseError::new(span, format!("`{what}` declared twice"));
        match kw.as_str() {
            "constants" => {
                if d.constants.is_some() {
                    return Err(duplicate("constants"));
                }
                if !d.transitions.is_empty() {
                    return Err(declared_after_trans("constants"));
                }
                let mut seen = Vec::new();
                while !p.at_line_end() {
                    let (c, sp) = p.expect_num("a constant")?;
                    if seen.contains(&Symbol(c)) {
                        return Err(ParseError::new(sp, format!("constant {c} listed twice")));
                    }
                    seen.push(Symbol(c));
                }
                d.constants = Some(ConstantSet::new(seen).expect("duplicates rejected"));
            }
            "registers" => {
                if d.registers.is_some() {
                    return Err(duplicate("registers"));
                }
                let mut regs: Vec<String> = Vec::new();
                while !p.at_line_end() {
                    let (name, sp) = p.expect_ident("a register name")?;
                    if is_reserved(&name) {
                        return Err(ParseError::new(sp, format!("`{name}` is reserved")));
                    }
                    if regs.contains(&name) {
                        return Err(ParseError::new(sp, format!("register `{name}` declared twice")));
                    }
                    regs.push(name);
                }
                if regs.is_empty() {
                    return Err(p.unexpected(&["a register name"]));
                }
                d.registers = Some(regs);
            }
            "actions" => {
                if d.actions.is_some() {
                    return Err(duplicate("actions"));
                }
                let mut acts: Vec<Action> = Vec::new();
                while !p.at_line_end() {
                    let (name, sp) = p.expect_ident("an action name")?;
                    p.expect_sym("/")?;
                    let (arity, _) = p.expect_num("an arity")?;
                    if acts.iter().any(|a| a.name == name) {
                        return Err(ParseError::new(sp, format!("action `{name}` declared twice")));
                    }
                    acts.push(Action::new(name, arity as usize));
                }
                d.actions = Some(acts);
            }
            "locations" => {
                if d.locations.is_some() {
                    return Err(duplicate("locations"));
                }
                let mut locs: Vec<String> = Vec::new();
                let mut initial = None;
                while !p.at_line_end() {
                    let (name, sp) = p.expect_ident("a location name")?;
                    if locs.contains(&name) {
                        return Err(ParseError::new(sp, format!("location `{name}` declared twice")));
                    }
                    if p.eat_sym("*") {
                        if initial.is_some() {
                            return Err(ParseError::new(sp, "more than one initial location"));
                        }
                        initial = Some(locs.len());
                    }
                    locs.push(name);
                }
                let initial = initial.ok_or_else(|| {
                    ParseError::new(span, "no initial location (mark one with `*`)")
                })?;
                d.locations = Some((locs, initial));
            }
            "trans" => {
                let t = parse_transition(&mut p, &d, span)?;
                d.transitions.push(t);
            }
            _ => {
                return Err(ParseError {
                    span,
                    message: format!("unknown declaration `{kw}`"),
                    expected: ["constants", "registers", "actions", "locations", "trans"]
                        .iter()
                        .map(|s| format!("`{s}`"))
                        .collect(),
                })
            }
        }
        end_line(&mut p)?;
    }

    let eof = p.peek().span;
    let missing = |what: &str| ParseError::new(eof, format!("missing `{what}` declaration"));
    let constants = d.constants();
    let registers = d.registers.ok_or_else(|| missing("registers"))?;
    let actions = d.actions.ok_or_else(|| missing("actions"))?;
    let (locations, initial) = d.locations.ok_or_else(|| missing("locations"))?;
    RegisterAutomaton::new(actions, registers, locations, initial, d.transitions, constants)
        .map_err(|e| ParseError::new(eof, e.to_string()))
}

fn skip_blank(p: &mut Parser) {
    while matches!(p.peek().tok, Tok::Newline) {
        p.next();
    }
}

fn end_line(p: &mut Parser) -> Result<(), ParseError> {
    match p.peek().tok {
        Tok::Newline => {
            p.next();
            Ok(())
        }
        Tok::Eof => Ok(()),
        _ => Err(p.unexpected(&["end of line"])),
    }
}

fn parse_transition(p: &mut Parser, d: &Decls, span: SourceSpan) -> Result<Transition, ParseError> {
    let need = |what: &str| {
        ParseError::new(span, format!("`{what}` must be declared before transitions"))
    };
    let registers = d.registers.as_ref().ok_or_else(|| need("registers"))?;
    let actions = d.actions.as_ref().ok_or_else(|| need("actions"))?;
    let (locations, _) = d.locations.as_ref().ok_or_else(|| need("locations"))?;
    let constants = d.constants();

    let location = |p: &mut Parser| -> Result<usize, ParseError> {
        let (name, sp) = p.expect_ident("a location name")?;
        locations
            .iter()
            .position(|l| *l == name)
            .ok_or_else(|| ParseError::new(sp, format!("unknown location `{name}`")))
    };
    let source = location(p)?;
    p.expect_sym("->")?;
    let target = location(p)?;

    p.expect_keyword("on")?;
    let (act_name, act_span) = p.expect_ident("an action name")?;
    let action = actions
        .iter()
        .position(|a| a.name == act_name)
        .ok_or_else(|| ParseError::new(act_span, format!("unknown action `{act_name}`")))?;
    let arity = actions[action].arity;
    let mut params = 0;
    if p.eat_sym("(") {
        if !p.at_sym(")") {
            loop {
                let (name, sp) = p.expect_ident("a parameter")?;
                params += 1;
                if param_index(&name) != Some(params) {
                    return Err(ParseError {
                        span: sp,
                        message: format!("parameters must be written p1, p2, ... in order; got `{name}`"),
                        expected: vec![format!("`p{params}`")],
                    });
                }
                if !p.eat_sym(",") {
                    break;
                }
            }
        }
        p.expect_sym(")")?;
    }
    if params != arity {
        return Err(ParseError::new(
            act_span,
            format!("action `{act_name}` has arity {arity} but {params} parameter(s) are listed"),
        ));
    }

    let ctx = TermCtx { registers, constants: &constants, arity, action: &act_name };
    p.expect_keyword("when")?;
    let mut atoms = Vec::new();
    if p.at_ident("true") {
        p.next();
    } else {
        loop {
            let lhs = ctx.term(p)?;
            let polarity = if p.eat_sym("=") {
                Polarity::Eq
            } else if p.eat_sym("!=") {
                Polarity::Neq
            } else {
                return Err(p.unexpected(&["`=`", "`!=`"]));
            };
            let rhs = ctx.term(p)?;
            atoms.push(GuardAtom { lhs, rhs, polarity });
            if !p.eat_sym("&") {
                break;
            }
        }
    }

    p.expect_keyword("do")?;
    let mut bindings: HashMap<usize, Term> = HashMap::new();
    let mut order = Vec::new();
    if !p.eat_sym("-") {
        loop {
            let (name, sp) = p.expect_ident("a register name")?;
            let reg = registers
                .iter()
                .position(|r| *r == name)
                .ok_or_else(|| ParseError::new(sp, format!("unknown register `{name}`")))?;
            p.expect_sym(":=")?;
            let term = ctx.term(p)?;
            if bindings.insert(reg, term).is_some() {
                return Err(ParseError::new(sp, format!("register `{name}` assigned twice")));
            }
            order.push(reg);
            if !p.eat_sym(",") {
                break;
            }
        }
    }
    let assignment = Assignment::new(order.into_iter().map(|r| (r, bindings[&r])))
        .expect("duplicates rejected");
    Ok(Transition { source, action, guard: Guard::new(atoms), assignment, target })
}

struct TermCtx<'a> {
    registers: &'a [String],
    constants: &'a ConstantSet,
    arity: usize,
    action: &'a str,
}

impl TermCtx<'_> {
    fn term(&self, p: &mut Parser) -> Result<Term, ParseError> {
        let t = p.peek().clone();
        match t.tok {
            Tok::Num(n) => {
                p.next();
                if self.constants.contains(Symbol(n)) {
                    Ok(Term::Const(Symbol(n)))
                } else {
                    Err(ParseError::new(t.span, format!("{n} is not a declared constant")))
                }
            }
            Tok::Ident(name) => {
                p.next();
                if let Some(k) = param_index(&name) {
                    if k > self.arity {
                        return Err(ParseError::new(
                            t.span,
                            format!("`{name}` exceeds the arity {} of `{}`", self.arity, self.action),
                        ));
                    }
                    return Ok(Term::Param(k));
                }
                self.registers
                    .iter()
                    .position(|r| *r == name)
                    .map(Term::Reg)
                    .ok_or_else(|| ParseError::new(t.span, format!("unknown register `{name}`")))
            }
            _ => Err(p.unexpected(&["a register", "a parameter", "a constant"])),
        }
    }
}

fn term_text(ra: &RegisterAutomaton, t: &Term) -> String {
    match t {
        Term::Reg(i) => ra.registers()[*i].clone(),
        Term::Param(k) => format!("p{k}"),
        Term::Const(c) => c.to_string(),
    }
}

pub fn serialize_automaton(ra: &RegisterAutomaton) -> String {
    let mut out = String::from("format 1\n");
    let join = |items: Vec<String>| items.join(" ");
    let consts = join(ra.constants().iter().map(|c| c.to_string()).collect());
    writeln!(out, "constants {consts}").unwrap();
    writeln!(out, "registers {}", join(ra.registers().to_vec())).unwrap();
    let acts = join(ra.actions().iter().map(|a| format!("{}/{}", a.name, a.arity)).collect());
    writeln!(out, "actions {acts}").unwrap();
    let locs = join(
        ra.locations()
            .iter()
            .enumerate()
            .map(|(i, l)| if i == ra.initial() { format!("{l}*") } else { l.clone() })
            .collect(),
    );
    writeln!(out, "locations {locs}").unwrap();
    for t in ra.transitions() {
        let act = &ra.actions()[t.action];
        let params = if act.arity == 0 {
            String::new()
        } else {
            let ps: Vec<String> = (1..=act.arity).map(|k| format!("p{k}")).collect();
            format!("({})", ps.join(", "))
        };
        let guard = if t.guard.atoms.is_empty() {
            "true".to_string()
        } else {
            t.guard
                .atoms
                .iter()
                .map(|a| {
                    let op = if a.polarity == Polarity::Eq { "=" } else { "!=" };
                    format!("{} {op} {}", term_text(ra, &a.lhs), term_text(ra, &a.rhs))
                })
                .collect::<Vec<_>>()
                .join(" & ")
        };
        let assign = if t.assignment.is_empty() {
            "-".to_string()
        } else {
            t.assignment
                .bindings()
                .map(|(r, e)| format!("{} := {}", ra.registers()[r], term_text(ra, &e)))
                .collect::<Vec<_>>()
                .join(", ")
        };
        writeln!(
            out,
            "trans {} -> {} on {}{params} when {guard} do {assign}",
            ra.locations()[t.source],
            ra.locations()[t.target],
            act.name
        )
        .unwrap();
    }
    out
}
