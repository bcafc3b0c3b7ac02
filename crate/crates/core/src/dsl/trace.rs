use super::lexer::{tokenize, Parser, Tok};
use super::ParseError;
use crate::automaton::{Configuration, DataSymbol, RegisterAutomaton, Symbol, Valuation};

/// A concrete run: `configs[i]` steps to `configs[i + 1]` on `symbols[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub configs: Vec<Configuration>,
    pub symbols: Vec<DataSymbol>,
}

pub fn serialize_configuration(c: &Configuration, ra: &RegisterAutomaton) -> String {
    let vals: Vec<String> = c.valuation.values().iter().map(|s| s.to_string()).collect();
    format!("config {} ({})", ra.locations()[c.location], vals.join(", "))
}

pub fn serialize_data_symbol(d: &DataSymbol, ra: &RegisterAutomaton) -> String {
    let args: Vec<String> = d.args.iter().map(|s| s.to_string()).collect();
    format!("step {}({})", ra.actions()[d.action].name, args.join(", "))
}

pub fn serialize_trace(t: &Trace, ra: &RegisterAutomaton) -> String {
    let mut out = String::new();
    for (i, c) in t.configs.iter().enumerate() {
        if i > 0 {
            out.push_str(&serialize_data_symbol(&t.symbols[i - 1], ra));
            out.push('\n');
        }
        out.push_str(&serialize_configuration(c, ra));
        out.push('\n');
    }
    out
}

fn symbols(p: &mut Parser) -> Result<Vec<Symbol>, ParseError> {
    p.expect_sym("(")?;
    let mut out = Vec::new();
    if !p.eat_sym(")") {
        loop {
            out.push(Symbol(p.expect_num("a symbol")?.0));
            if p.eat_sym(")") {
                break;
            }
            p.expect_sym(",")?;
        }
    }
    Ok(out)
}

/// Parses alternating `config <loc> (<values>)` and `step <action>(<args>)`
/// lines, starting and ending with a configuration.
pub fn parse_trace(text: &str, ra: &RegisterAutomaton) -> Result<Trace, ParseError> {
    let mut p = Parser::new(tokenize(text)?);
    let mut trace = Trace { configs: Vec::new(), symbols: Vec::new() };
    loop {
        while matches!(p.peek().tok, Tok::Newline) {
            p.next();
        }
        if matches!(p.peek().tok, Tok::Eof) {
            break;
        }
        let want_config = trace.configs.len() == trace.symbols.len();
        if want_config {
            p.expect_keyword("config")?;
            let (name, sp) = p.expect_ident("a location name")?;
            let location = ra
                .location_index(&name)
                .ok_or_else(|| ParseError::new(sp, format!("unknown location `{name}`")))?;
            let open = p.peek().span;
            let vals = symbols(&mut p)?;
            if vals.len() != ra.num_registers() {
                return Err(ParseError::new(
                    open,
                    format!("expected {} register value(s), got {}", ra.num_registers(), vals.len()),
                ));
            }
            trace.configs.push(Configuration::new(location, Valuation(vals)));
        } else {
            p.expect_keyword("step")?;
            let (name, sp) = p.expect_ident("an action name")?;
            let action = ra
                .action_index(&name)
                .ok_or_else(|| ParseError::new(sp, format!("unknown action `{name}`")))?;
            let args = symbols(&mut p)?;
            if args.len() != ra.actions()[action].arity {
                return Err(ParseError::new(
                    sp,
                    format!("action `{name}` takes {} argument(s)", ra.actions()[action].arity),
                ));
            }
            trace.symbols.push(DataSymbol { action, args });
        }
        if !p.at_line_end() {
            return Err(p.unexpected(&["end of line"]));
        }
    }
    if trace.configs.is_empty() || trace.configs.len() == trace.symbols.len() {
        let mut e = p.unexpected(&["`config`"]);
        e.message = "a trace must start and end with a configuration".into();
        return Err(e);
    }
    Ok(trace)
}
