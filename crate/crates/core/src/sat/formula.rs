//! Propositional formulas over named atoms and their Tseitin translation.
//!
//! Text syntax, loosest binding first:
//!
//! ```text
//! expr    := implies
//! implies := or ( "->" implies )?        right associative
//! or      := and ( "|" and )*
//! and     := unary ( "&" unary )*
//! unary   := "!" unary | "(" expr ")" | "true" | "false" | atom
//! atom    := ident | ident "(" ident ")"   e.g. v12b, low(x1)
//! ```

use std::collections::HashMap;
use std::fmt;

use super::cnf::{CnfFormula, Lit, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    /// Empty conjunction is `true`.
    And(Vec<Formula>),
    /// Empty disjunction is `false`.
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn truth() -> Self {
        Formula::And(Vec::new())
    }

    pub fn falsity() -> Self {
        Formula::Or(Vec::new())
    }

    /// Literal for an atom with the given polarity.
    pub fn literal(name: impl Into<String>, positive: bool) -> Self {
        if positive {
            Formula::atom(name)
        } else {
            Formula::not(Formula::atom(name))
        }
    }

    /// All atom names, in first-occurrence order, without duplicates.
    pub fn atoms(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Formula::Atom(a) => {
                if !out.contains(&a.as_str()) {
                    out.push(a);
                }
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
            Formula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Direct evaluation; unknown atoms read as false.
    pub fn eval(&self, value: &dyn Fn(&str) -> bool) -> bool {
        match self {
            Formula::Atom(a) => value(a),
            Formula::Not(f) => !f.eval(value),
            Formula::And(fs) => fs.iter().all(|f| f.eval(value)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(value)),
            Formula::Implies(a, b) => !a.eval(value) || b.eval(value),
        }
    }

    pub fn parse(text: &str) -> Result<Formula> {
        let tokens = tokenize(text)?;
        let mut parser = Parser { tokens, pos: 0 };
        let f = parser.implies()?;
        if parser.pos != parser.tokens.len() {
            return Err(Error::Schema(format!(
                "unexpected `{}` in `{text}`",
                parser.tokens[parser.pos]
            )));
        }
        Ok(f)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // parenthesize every compound child; readable enough and unambiguous
        fn child(f: &mut fmt::Formatter<'_>, x: &Formula) -> fmt::Result {
            match x {
                Formula::Atom(_) | Formula::Not(_) => write!(f, "{x}"),
                Formula::And(v) | Formula::Or(v) if v.is_empty() => write!(f, "{x}"),
                _ => write!(f, "({x})"),
            }
        }
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => {
                write!(f, "!")?;
                child(f, x)
            }
            Formula::And(v) if v.is_empty() => write!(f, "true"),
            Formula::Or(v) if v.is_empty() => write!(f, "false"),
            Formula::And(v) | Formula::Or(v) => {
                let sep = if matches!(self, Formula::And(_)) { " & " } else { " | " };
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    child(f, x)?;
                }
                Ok(())
            }
            Formula::Implies(a, b) => {
                child(f, a)?;
                write!(f, " -> ")?;
                child(f, b)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Not,
    And,
    Or,
    Arrow,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "{s}"),
            Token::Not => write!(f, "!"),
            Token::And => write!(f, "&"),
            Token::Or => write!(f, "|"),
            Token::Arrow => write!(f, "->"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            c if c.is_whitespace() => {}
            '!' | '~' => out.push(Token::Not),
            '&' => out.push(Token::And),
            '|' => out.push(Token::Or),
            '(' => out.push(Token::LParen),
            ')' => out.push(Token::RParen),
            '-' if matches!(chars.peek(), Some((_, '>'))) => {
                chars.next();
                out.push(Token::Arrow);
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut end = i + c.len_utf8();
                while let Some(&(j, d)) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' || d == '.' {
                        end = j + d.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Token::Ident(text[i..end].to_string()));
            }
            other => {
                return Err(Error::Schema(format!(
                    "unexpected character `{other}` in `{text}`"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, t: &Token) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn implies(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if self.eat(&Token::Arrow) {
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut parts = vec![self.and()?];
        while self.eat(&Token::Or) {
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn and(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while self.eat(&Token::And) {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let f = self.implies()?;
                if !self.eat(&Token::RParen) {
                    return Err(Error::Schema("missing `)`".into()));
                }
                Ok(f)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "true" => return Ok(Formula::truth()),
                    "false" => return Ok(Formula::falsity()),
                    _ => {}
                }
                // predicate application: low(x1)
                if self.peek() == Some(&Token::LParen) {
                    if let (Some(Token::Ident(arg)), Some(Token::RParen)) =
                        (self.tokens.get(self.pos + 1), self.tokens.get(self.pos + 2))
                    {
                        let atom = format!("{name}({arg})");
                        self.pos += 3;
                        return Ok(Formula::Atom(atom));
                    }
                }
                Ok(Formula::Atom(name))
            }
            Some(t) => Err(Error::Schema(format!("unexpected `{t}`"))),
            None => Err(Error::Schema("unexpected end of expression".into())),
        }
    }
}

/// Single source of variable numbering: atom `i` (0-based) is variable `i + 1`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AtomTable {
    names: Vec<String>,
    index: HashMap<String, Var>,
}

impl AtomTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares an atom, returning its variable. Re-declaring is a no-op.
    pub fn declare(&mut self, name: impl Into<String>) -> Var {
        let name = name.into();
        if let Some(&v) = self.index.get(&name) {
            return v;
        }
        let var = Var::new(self.names.len() as u32 + 1);
        self.index.insert(name.clone(), var);
        self.names.push(name);
        var
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.index.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<Var> {
        self.var(name)
            .ok_or_else(|| Error::Encoding(format!("undeclared atom `{name}`")))
    }

    pub fn name(&self, var: Var) -> Option<&str> {
        self.names.get(var.slot()).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Equisatisfiable CNF for `f`. Atoms keep their table numbering; definition
/// variables are allocated after the table. Every model of `f` extends to
/// exactly one model of the result and every model of the result projects
/// onto a model of `f`.
pub fn to_cnf(f: &Formula, table: &AtomTable) -> Result<CnfFormula> {
    for atom in f.atoms() {
        table.lookup(atom)?;
    }
    let mut cnf = CnfFormula::new(table.len() as u32);
    add_formula(&mut cnf, f, table)?;
    Ok(cnf)
}

/// Conjoins `f` onto an existing CNF that already uses `table`'s numbering.
pub fn add_formula(cnf: &mut CnfFormula, f: &Formula, table: &AtomTable) -> Result<()> {
    cnf.reserve_vars(table.len() as u32);
    let mut tseitin = Tseitin { cnf, table };
    tseitin.assert_true(f)
}

struct Tseitin<'a> {
    cnf: &'a mut CnfFormula,
    table: &'a AtomTable,
}

impl Tseitin<'_> {
    /// Top-level conjuncts and flat clauses are emitted directly.
    fn assert_true(&mut self, f: &Formula) -> Result<()> {
        match f {
            Formula::And(parts) => parts.iter().try_for_each(|p| self.assert_true(p)),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Or(parts) => parts
                    .iter()
                    .try_for_each(|p| self.assert_true(&Formula::not(p.clone()))),
                Formula::Not(g) => self.assert_true(g),
                Formula::Implies(a, b) => {
                    self.assert_true(a)?;
                    self.assert_true(&Formula::not((**b).clone()))
                }
                _ => {
                    let l = self.define(f)?;
                    self.cnf.add_clause([l])?;
                    Ok(())
                }
            },
            Formula::Or(parts) => {
                let lits = parts
                    .iter()
                    .map(|p| self.define(p))
                    .collect::<Result<Vec<_>>>()?;
                self.cnf.add_clause(lits)?;
                Ok(())
            }
            Formula::Implies(a, b) => {
                let la = self.define(a)?;
                let lb = self.define(b)?;
                self.cnf.add_clause([!la, lb])?;
                Ok(())
            }
            Formula::Atom(_) => {
                let l = self.define(f)?;
                self.cnf.add_clause([l])?;
                Ok(())
            }
        }
    }

    /// Literal equivalent to `f`, introducing definition variables as needed.
    fn define(&mut self, f: &Formula) -> Result<Lit> {
        match f {
            Formula::Atom(name) => Ok(self.table.lookup(name)?.pos()),
            Formula::Not(inner) => Ok(!self.define(inner)?),
            Formula::And(parts) => {
                let lits = parts
                    .iter()
                    .map(|p| self.define(p))
                    .collect::<Result<Vec<_>>>()?;
                let d = self.cnf.fresh_var().pos();
                // d -> each part; all parts -> d
                for &l in &lits {
                    self.cnf.add_clause([!d, l])?;
                }
                self.cnf
                    .add_clause(lits.iter().map(|&l| !l).chain(std::iter::once(d)))?;
                Ok(d)
            }
            Formula::Or(parts) => {
                let lits = parts
                    .iter()
                    .map(|p| self.define(p))
                    .collect::<Result<Vec<_>>>()?;
                let d = self.cnf.fresh_var().pos();
                for &l in &lits {
                    self.cnf.add_clause([!l, d])?;
                }
                self.cnf
                    .add_clause(lits.iter().copied().chain(std::iter::once(!d)))?;
                Ok(d)
            }
            Formula::Implies(a, b) => {
                let la = self.define(a)?;
                let lb = self.define(b)?;
                let d = self.cnf.fresh_var().pos();
                self.cnf.add_clause([!d, !la, lb])?;
                self.cnf.add_clause([la, d])?;
                self.cnf.add_clause([!lb, d])?;
                Ok(d)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_guarded_constraint() {
        let f = Formula::parse("low(x1) -> !v12b | ext_T1").unwrap();
        assert_eq!(
            f,
            Formula::implies(
                Formula::atom("low(x1)"),
                Formula::Or(vec![Formula::not(Formula::atom("v12b")), Formula::atom("ext_T1")])
            )
        );
        assert_eq!(f.atoms(), vec!["low(x1)", "v12b", "ext_T1"]);
    }

    #[test]
    fn precedence_and_display_round_trip() {
        for text in [
            "a & b | c",
            "a -> b -> c",
            "!(a | b) & (c -> !d)",
            "true",
            "false | a",
            "!(a & b) & !(a & c)",
        ] {
            let f = Formula::parse(text).unwrap();
            let again = Formula::parse(&f.to_string()).unwrap();
            assert_eq!(f, again, "{text} -> {f}");
        }
        let f = Formula::parse("a & b | c").unwrap();
        assert!(matches!(f, Formula::Or(_)));
    }

    #[test]
    fn parse_errors() {
        assert!(Formula::parse("a &").is_err());
        assert!(Formula::parse("(a").is_err());
        assert!(Formula::parse("a $ b").is_err());
        assert!(Formula::parse("a b").is_err());
    }

    #[test]
    fn single_atom_is_one_unit_clause() {
        let mut t = AtomTable::new();
        t.declare("a");
        let cnf = to_cnf(&Formula::atom("a"), &t).unwrap();
        assert_eq!(cnf.len(), 1);
        assert_eq!(cnf.clauses()[0], vec![Var::new(1).pos()]);
        assert_eq!(cnf.num_vars(), 1);
    }

    #[test]
    fn undeclared_atom_is_an_encoding_error() {
        let t = AtomTable::new();
        assert!(matches!(
            to_cnf(&Formula::atom("ghost"), &t),
            Err(Error::Encoding(_))
        ));
    }

    #[test]
    fn atom_table_is_stable() {
        let mut t = AtomTable::new();
        let a = t.declare("a");
        let b = t.declare("b");
        assert_eq!(t.declare("a"), a);
        assert_eq!(b.index(), 2);
        assert_eq!(t.name(b), Some("b"));
    }
}
