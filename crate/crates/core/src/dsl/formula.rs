use super::lexer::{Parser, Tok};
use super::ParseError;
use crate::automaton::{RegisterAutomaton, Symbol};
use crate::ctl::CtlFormula;

/// Parses a CTL formula. Derived operators (`true`, `false`, `|`, `->`,
/// `AX`, `EF`, `AG`, `AF`) are expanded into the core syntax.
///
/// Precedence from loosest: `->` (right-associative), `|`, `&`, then the
/// prefix operators `! EX EG EF AX AF AG` and `E [ f U g ]`.
pub fn parse_formula(text: &str, ra: &RegisterAutomaton) -> Result<CtlFormula, ParseError> {
    let mut p = Parser::ignoring_newlines(text)?;
    let f = FormulaParser { ra }.implication(&mut p)?;
    p.expect_end()?;
    Ok(f)
}

struct FormulaParser<'a> {
    ra: &'a RegisterAutomaton,
}

const UNARY: &[&str] = &["EX", "EG", "EF", "AX", "AF", "AG"];

impl FormulaParser<'_> {
    fn implication(&self, p: &mut Parser) -> Result<CtlFormula, ParseError> {
        let lhs = self.disjunction(p)?;
        if p.eat_sym("->") {
            let rhs = self.implication(p)?;
            return Ok(CtlFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&self, p: &mut Parser) -> Result<CtlFormula, ParseError> {
        let mut f = self.conjunction(p)?;
        while p.eat_sym("|") {
            f = CtlFormula::or(f, self.conjunction(p)?);
        }
        Ok(f)
    }

    fn conjunction(&self, p: &mut Parser) -> Result<CtlFormula, ParseError> {
        let mut f = self.unary(p)?;
        while p.eat_sym("&") {
            f = CtlFormula::and(f, self.unary(p)?);
        }
        Ok(f)
    }

    fn unary(&self, p: &mut Parser) -> Result<CtlFormula, ParseError> {
        if p.eat_sym("!") {
            return Ok(CtlFormula::not(self.unary(p)?));
        }
        if p.eat_sym("(") {
            let f = self.implication(p)?;
            p.expect_sym(")")?;
            return Ok(f);
        }
        if p.eat_sym("@") {
            let (name, sp) = p.expect_ident("a location name")?;
            return self
                .ra
                .location_index(&name)
                .map(CtlFormula::AtLocation)
                .ok_or_else(|| ParseError::new(sp, format!("unknown location `{name}`")));
        }
        let t = p.peek().clone();
        let Tok::Ident(word) = &t.tok else {
            return Err(p.unexpected(&["a formula"]));
        };
        if let Some(op) = UNARY.iter().find(|op| *op == word) {
            p.next();
            let f = self.unary(p)?;
            return Ok(match *op {
                "EX" => CtlFormula::ex(f),
                "EG" => CtlFormula::eg(f),
                "EF" => CtlFormula::ef(f),
                "AX" => CtlFormula::ax(f),
                "AF" => CtlFormula::af(f),
                _ => CtlFormula::ag(f),
            });
        }
        match word.as_str() {
            "E" => {
                p.next();
                p.expect_sym("[")?;
                let f = self.implication(p)?;
                p.expect_keyword("U")?;
                let g = self.implication(p)?;
                p.expect_sym("]")?;
                Ok(CtlFormula::eu(f, g))
            }
            "true" => {
                p.next();
                Ok(CtlFormula::truth())
            }
            "false" => {
                p.next();
                Ok(CtlFormula::falsity())
            }
            _ => self.equality(p),
        }
    }

    fn equality(&self, p: &mut Parser) -> Result<CtlFormula, ParseError> {
        let (name, sp) = p.expect_ident("a register")?;
        let i = self
            .ra
            .register_index(&name)
            .ok_or_else(|| ParseError::new(sp, format!("unknown register `{name}`")))?;
        if p.at_sym("!=") {
            let mut e = p.unexpected(&["`=`"]);
            e.message = "`!=` is not allowed in formulas; write `!(a = b)`".into();
            return Err(e);
        }
        p.expect_sym("=")?;
        let t = p.next();
        match t.tok {
            Tok::Num(c) if self.ra.constants().contains(Symbol(c)) => {
                Ok(CtlFormula::RegEqConst(i, Symbol(c)))
            }
            Tok::Num(c) => Err(ParseError::new(t.span, format!("{c} is not a declared constant"))),
            Tok::Ident(other) => self
                .ra
                .register_index(&other)
                .map(|j| CtlFormula::RegEq(i, j))
                .ok_or_else(|| ParseError::new(t.span, format!("unknown register `{other}`"))),
            _ => Err(ParseError {
                span: t.span,
                message: format!("unexpected {}", t.tok.describe()),
                expected: vec!["a register".into(), "a constant".into()],
            }),
        }
    }
}

/// Renders `f` in fully parenthesised core syntax.
pub fn serialize_formula(f: &CtlFormula, ra: &RegisterAutomaton) -> String {
    let reg = |i: usize| ra.registers()[i].as_str();
    match f {
        CtlFormula::AtLocation(l) => format!("@{}", ra.locations()[*l]),
        CtlFormula::RegEq(i, j) => format!("({} = {})", reg(*i), reg(*j)),
        CtlFormula::RegEqConst(i, c) => format!("({} = {c})", reg(*i)),
        CtlFormula::Not(g) => format!("!{}", serialize_formula(g, ra)),
        CtlFormula::And(g, h) => {
            format!("({} & {})", serialize_formula(g, ra), serialize_formula(h, ra))
        }
        CtlFormula::EX(g) => format!("EX {}", serialize_formula(g, ra)),
        CtlFormula::EG(g) => format!("EG {}", serialize_formula(g, ra)),
        CtlFormula::EU(g, h) => {
            format!("E [{} U {}]", serialize_formula(g, ra), serialize_formula(h, ra))
        }
    }
}
