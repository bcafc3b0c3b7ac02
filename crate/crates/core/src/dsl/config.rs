use super::lexer::{Parser, Tok};
use super::ParseError;
use crate::automaton::{ConstantSet, RegisterAutomaton, Symbol};
use crate::repr::{Partition, RepConfig, RepMatrix};

/// Parses `loc | {x1 x2} {x3=0}`. Registers not mentioned in any class
/// are singletons; `=c` inside a class pins the whole class to `c`.
pub fn parse_repconfig(text: &str, ra: &RegisterAutomaton) -> Result<RepConfig, ParseError> {
    let mut p = Parser::ignoring_newlines(text)?;
    let (name, sp) = p.expect_ident("a location name")?;
    let location = ra
        .location_index(&name)
        .ok_or_else(|| ParseError::new(sp, format!("unknown location `{name}`")))?;
    let matrix = if p.eat_sym("|") {
        classes(&mut p, ra.registers(), ra.constants())?
    } else {
        RepMatrix::identity(ra.num_registers())
    };
    p.expect_end()?;
    Ok(RepConfig::new(location, matrix))
}

/// Parses class notation `{x1 x2} {x3=0}` on its own.
pub fn parse_matrix(
    text: &str,
    registers: &[String],
    constants: &ConstantSet,
) -> Result<RepMatrix, ParseError> {
    let mut p = Parser::ignoring_newlines(text)?;
    let m = classes(&mut p, registers, constants)?;
    p.expect_end()?;
    Ok(m)
}

fn classes(
    p: &mut Parser,
    registers: &[String],
    constants: &ConstantSet,
) -> Result<RepMatrix, ParseError> {
    let n = registers.len();
    let mut class_of: Vec<Option<usize>> = vec![None; n];
    let mut labels: Vec<Option<Symbol>> = Vec::new();
    while p.eat_sym("{") {
        let class = labels.len();
        labels.push(None);
        let mut members = 0;
        while !p.eat_sym("}") {
            let (name, sp) = p.expect_ident("a register")?;
            let r = registers
                .iter()
                .position(|x| *x == name)
                .ok_or_else(|| ParseError::new(sp, format!("unknown register `{name}`")))?;
            if class_of[r].is_some() {
                return Err(ParseError::new(sp, format!("register `{name}` appears in two classes")));
            }
            class_of[r] = Some(class);
            members += 1;
            if p.eat_sym("=") {
                let (c, csp) = p.expect_num("a constant")?;
                let c = Symbol(c);
                if !constants.contains(c) {
                    return Err(ParseError::new(csp, format!("{c} is not a declared constant")));
                }
                match labels[class] {
                    Some(d) if d != c => {
                        return Err(ParseError::new(csp, format!("class holds both {d} and {c}")))
                    }
                    _ => {}
                }
                if labels.iter().enumerate().any(|(k, l)| k != class && *l == Some(c)) {
                    return Err(ParseError::new(csp, format!("constant {c} used by two classes")));
                }
                labels[class] = Some(c);
            }
        }
        if members == 0 {
            return Err(ParseError::new(p.peek().span, "empty class"));
        }
    }
    if !matches!(p.peek().tok, Tok::Eof) {
        return Err(p.unexpected(&["`{`", "end of input"]));
    }
    // omitted registers become singletons; renumber blocks in order of first
    // member
    let mut block_of = vec![0; n];
    let mut renumber: Vec<Option<usize>> = vec![None; labels.len()];
    let mut out_labels = Vec::new();
    for r in 0..n {
        let b = match class_of[r] {
            Some(k) => *renumber[k].get_or_insert_with(|| {
                out_labels.push(labels[k]);
                out_labels.len() - 1
            }),
            None => {
                out_labels.push(None);
                out_labels.len() - 1
            }
        };
        block_of[r] = b;
    }
    Ok(Partition { block_of, labels: out_labels }.to_matrix())
}

/// Class notation for a consistent matrix: every class, ordered by its
/// smallest register, with its constant after the last member.
pub fn serialize_matrix(m: &RepMatrix, registers: &[String]) -> String {
    let p = m.partition().expect("serialize_matrix needs a consistent matrix");
    p.blocks()
        .iter()
        .zip(&p.labels)
        .map(|(members, label)| {
            let names: Vec<&str> = members.iter().map(|&r| registers[r].as_str()).collect();
            match label {
                Some(c) => format!("{{{}={c}}}", names.join(" ")),
                None => format!("{{{}}}", names.join(" ")),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn serialize_repconfig(c: &RepConfig, ra: &RegisterAutomaton) -> String {
    format!("{} | {}", ra.locations()[c.location], serialize_matrix(&c.matrix, ra.registers()))
}
