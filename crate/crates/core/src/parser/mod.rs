//! Text formats: knowledge bases (`.okb`), example sets (`.oex`), language
//! biases (`.obias`) and single rules.
//!
//! ```text
//! concept RICH, UNMARRIED.
//! role WANTS-TO-MARRY, LOVES.
//! pred famous/1, scientist/1, happy/1, meets/3.
//!
//! #tbox
//! RICH and UNMARRIED subclass some inv(WANTS-TO-MARRY) Top.
//! WANTS-TO-MARRY subrole LOVES.
//!
//! #rules
//! RICH(X) :- famous(X), not scientist(X).
//!
//! #facts
//! UNMARRIED(Mary).
//! famous(Mary).
//! ```

mod lexer;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{
    is_skolem_name, is_variable_name, validate_safeness, Atom, ConceptExpr, DlAxiom, ExampleSet, HybridKb,
    LanguageBias, Literal, PredKind, Predicate, Rule, SafenessReport, Signature, Term,
};
use lexer::{tokenize, Spanned, Tok};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceLocation {
    pub file: String,
    pub line: usize,
    pub col: usize,
}

impl SourceLocation {
    pub fn new(line: usize, col: usize) -> Self {
        SourceLocation { file: "<input>".into(), line, col }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    Lexical(char),
    #[error("expected {expected}, found {found}")]
    Syntax { expected: String, found: String },
    #[error("`{name}` takes {expected} argument(s), found {found}")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("undeclared predicate `{0}`")]
    Undeclared(String),
    #[error("`{name}` is declared twice")]
    Redeclared { name: String },
    #[error("`{name}` is not a {expected} name")]
    WrongKind { name: String, expected: PredKind },
    #[error("negation as failure on DL predicate `{0}`")]
    NafOnDl(String),
    #[error(transparent)]
    Unsafe(SafenessReport),
    #[error("fact `{0}` is not ground")]
    NonGround(String),
    #[error("`{0}` is reserved for skolem constants")]
    ReservedName(String),
    #[error("target predicate `{0}` occurs in the knowledge base")]
    TargetInKb(String),
    #[error("target `{name}/{arity}` must be a concept (arity 1) or a role (arity 2)")]
    BadTarget { name: String, arity: usize },
    #[error("examples mix targets `{first}` and `{second}`")]
    MixedTargets { first: String, second: String },
    #[error("constant `{0}` does not occur in the facts of the knowledge base")]
    UnknownConstant(String),
    #[error("`{0}` is both a positive and a negative example")]
    ContradictoryExample(String),
    #[error("no examples")]
    NoExamples,
    #[error("`{pred}` is not in the KB's {alphabet}")]
    NotInAlphabet { pred: String, alphabet: &'static str },
    #[error("{0}")]
    Io(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{loc}: {kind}")]
pub struct ParseError {
    pub loc: SourceLocation,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn at(line: usize, col: usize, kind: ParseErrorKind) -> Self {
        ParseError { loc: SourceLocation::new(line, col), kind }
    }

    /// Attributes the error to `file`.
    pub fn in_file(mut self, file: impl fmt::Display) -> Self {
        self.loc.file = file.to_string();
        self
    }
}

type Result<T> = std::result::Result<T, ParseError>;

/// An atom as written, before predicate resolution.
struct RawAtom {
    name: String,
    args: Vec<(String, usize, usize)>,
    line: usize,
    col: usize,
}

impl RawAtom {
    fn text(&self) -> String {
        format!("{}({})", self.name, self.args.iter().map(|a| a.0.as_str()).collect::<Vec<_>>().join(","))
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(text: &str, keep_newlines: bool) -> Result<Self> {
        let mut toks = tokenize(text)?;
        if !keep_newlines {
            toks.retain(|t| t.tok != Tok::Newline);
        }
        Ok(Parser { toks, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        let (l, c) = self.here();
        ParseError::at(l, c, kind)
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error(ParseErrorKind::Syntax { expected: expected.into(), found: self.peek().describe() })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize, usize)> {
        let (l, c) = self.here();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, l, c))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn skip_newlines(&mut self) {
        while self.eat(&Tok::Newline) {}
    }

    fn raw_atom(&mut self) -> Result<RawAtom> {
        let (name, line, col) = self.ident("a predicate name")?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                args.push(self.ident("a term")?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        Ok(RawAtom { name, args, line, col })
    }

    fn pred_ref(&mut self) -> Result<(String, Option<usize>, usize, usize)> {
        let (name, l, c) = self.ident("a predicate name")?;
        let arity = if self.eat(&Tok::Slash) {
            match self.bump() {
                Tok::Int(n) => Some(n),
                _ => {
                    return Err(ParseError::at(
                        l,
                        c,
                        ParseErrorKind::Syntax { expected: "an arity".into(), found: "something else".into() },
                    ))
                }
            }
        } else {
            None
        };
        Ok((name, arity, l, c))
    }
}

fn term(name: &str, line: usize, col: usize) -> Result<Term> {
    if is_variable_name(name) {
        Ok(Term::var(name))
    } else if is_skolem_name(name) {
        Err(ParseError::at(line, col, ParseErrorKind::ReservedName(name.into())))
    } else {
        Ok(Term::constant(name))
    }
}

fn resolve_with(raw: &RawAtom, pred: &Predicate) -> Result<Atom> {
    if raw.args.len() != pred.arity {
        return Err(ParseError::at(
            raw.line,
            raw.col,
            ParseErrorKind::ArityMismatch { name: raw.name.clone(), expected: pred.arity, found: raw.args.len() },
        ));
    }
    let args = raw.args.iter().map(|(n, l, c)| term(n, *l, *c)).collect::<Result<Vec<_>>>()?;
    Ok(Atom::new(pred.clone(), args))
}

fn resolve(raw: &RawAtom, sig: &Signature) -> Result<Atom> {
    match sig.lookup(&raw.name) {
        Some(p) => resolve_with(raw, p),
        None => Err(ParseError::at(raw.line, raw.col, ParseErrorKind::Undeclared(raw.name.clone()))),
    }
}

fn ground(raw: &RawAtom, atom: Atom) -> Result<Atom> {
    if atom.is_ground() {
        Ok(atom)
    } else {
        Err(ParseError::at(raw.line, raw.col, ParseErrorKind::NonGround(raw.text())))
    }
}

fn body(p: &mut Parser, sig: &Signature) -> Result<Vec<Literal>> {
    let mut out = Vec::new();
    loop {
        let negated = p.at_keyword("not") && matches!(p.peek_at(1), Tok::Ident(_));
        if negated {
            p.bump();
        }
        let raw = p.raw_atom()?;
        let atom = resolve(&raw, sig)?;
        if negated {
            if atom.pred.is_dl() {
                return Err(ParseError::at(raw.line, raw.col, ParseErrorKind::NafOnDl(raw.name)));
            }
            out.push(Literal::naf(atom));
        } else {
            out.push(Literal::pos(atom));
        }
        if !p.eat(&Tok::Comma) {
            return Ok(out);
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Tbox,
    Rules,
    Facts,
}

/// Parses a knowledge base. IDB rules must be safe.
pub fn parse_kb(text: &str) -> Result<HybridKb> {
    let mut p = Parser::new(text, false)?;
    let mut kb = HybridKb::default();
    let mut section = Section::None;
    while *p.peek() != Tok::Eof {
        if p.eat(&Tok::Hash) {
            let (name, l, c) = p.ident("a section name")?;
            section = match name.as_str() {
                "tbox" => Section::Tbox,
                "rules" => Section::Rules,
                "facts" => Section::Facts,
                other => {
                    return Err(ParseError::at(
                        l,
                        c,
                        ParseErrorKind::Syntax {
                            expected: "`tbox`, `rules` or `facts`".into(),
                            found: format!("`{other}`"),
                        },
                    ))
                }
            };
            continue;
        }
        if let (Tok::Ident(kw), Tok::Ident(_)) = (p.peek(), p.peek_at(1)) {
            let kind = match kw.as_str() {
                "concept" => Some(PredKind::Concept),
                "role" => Some(PredKind::Role),
                "pred" => Some(PredKind::Datalog),
                _ => None,
            };
            if let Some(kind) = kind {
                p.bump();
                declaration(&mut p, &mut kb.signature, kind)?;
                continue;
            }
        }
        match section {
            Section::None => return Err(p.unexpected("a declaration or a section header")),
            Section::Tbox => kb.tbox.push(axiom(&mut p, &kb.signature)?),
            Section::Rules => {
                let (l, c) = p.here();
                let head = resolve(&p.raw_atom()?, &kb.signature)?;
                let body = if p.eat(&Tok::If) { body(&mut p, &kb.signature)? } else { Vec::new() };
                p.expect(Tok::Dot)?;
                let rule = Rule::new(head, body);
                validate_safeness(&rule).map_err(|r| ParseError::at(l, c, ParseErrorKind::Unsafe(r)))?;
                kb.idb.push(rule);
            }
            Section::Facts => {
                let raw = p.raw_atom()?;
                let atom = ground(&raw, resolve(&raw, &kb.signature)?)?;
                p.expect(Tok::Dot)?;
                if atom.pred.is_dl() {
                    kb.abox.push(atom);
                } else {
                    kb.edb.push(atom);
                }
            }
        }
    }
    Ok(kb)
}

fn declaration(p: &mut Parser, sig: &mut Signature, kind: PredKind) -> Result<()> {
    loop {
        let (name, arity, l, c) = p.pred_ref()?;
        let arity = match (kind, arity) {
            (PredKind::Concept, None | Some(1)) => 1,
            (PredKind::Role, None | Some(2)) => 2,
            (PredKind::Datalog, Some(n)) if n >= 1 => n,
            (PredKind::Datalog, None) => {
                return Err(ParseError::at(
                    l,
                    c,
                    ParseErrorKind::Syntax { expected: format!("`{name}/<arity>`"), found: format!("`{name}`") },
                ))
            }
            (_, Some(n)) => {
                let expected = if kind == PredKind::Role { 2 } else { 1 };
                return Err(ParseError::at(l, c, ParseErrorKind::ArityMismatch { name, expected, found: n }));
            }
        };
        if sig.contains_name(&name) {
            return Err(ParseError::at(l, c, ParseErrorKind::Redeclared { name }));
        }
        sig.declare(Predicate::new(&name, arity, kind));
        if !p.eat(&Tok::Comma) {
            return p.expect(Tok::Dot);
        }
    }
}

fn named(p: &mut Parser, sig: &Signature, kind: PredKind) -> Result<Predicate> {
    let (name, l, c) = p.ident(if kind == PredKind::Role { "a role name" } else { "a concept name" })?;
    match sig.lookup(&name) {
        Some(pred) if pred.kind == kind => Ok(pred.clone()),
        Some(_) => Err(ParseError::at(l, c, ParseErrorKind::WrongKind { name, expected: kind })),
        None => Err(ParseError::at(l, c, ParseErrorKind::Undeclared(name))),
    }
}

fn concept(p: &mut Parser, sig: &Signature) -> Result<ConceptExpr> {
    if p.at_keyword("Top") {
        p.bump();
        return Ok(ConceptExpr::Top);
    }
    if p.at_keyword("some") && !matches!(p.peek_at(1), Tok::Ident(s) if s == "subclass" || s == "and") {
        p.bump();
        let inverse = p.at_keyword("inv") && *p.peek_at(1) == Tok::LParen;
        let role = if inverse {
            p.bump();
            p.expect(Tok::LParen)?;
            let r = named(p, sig, PredKind::Role)?;
            p.expect(Tok::RParen)?;
            r
        } else {
            named(p, sig, PredKind::Role)?
        };
        p.keyword("Top")?;
        return Ok(ConceptExpr::Exists { role, inverse });
    }
    Ok(ConceptExpr::Atomic(named(p, sig, PredKind::Concept)?))
}

fn conjunction(p: &mut Parser, sig: &Signature) -> Result<ConceptExpr> {
    let mut parts = vec![concept(p, sig)?];
    while p.at_keyword("and") {
        p.bump();
        parts.push(concept(p, sig)?);
    }
    Ok(if parts.len() == 1 { parts.pop().expect("one part") } else { ConceptExpr::And(parts) })
}

fn axiom(p: &mut Parser, sig: &Signature) -> Result<DlAxiom> {
    if matches!(p.peek_at(1), Tok::Ident(s) if s == "subrole") {
        let sub = named(p, sig, PredKind::Role)?;
        p.bump();
        let sup = named(p, sig, PredKind::Role)?;
        p.expect(Tok::Dot)?;
        return Ok(DlAxiom::RoleInclusion { sub, sup });
    }
    let (l, c) = p.here();
    let sub = conjunction(p, sig)?;
    p.keyword("subclass")?;
    let sup = conjunction(p, sig)?;
    p.expect(Tok::Dot)?;
    if matches!(sub, ConceptExpr::Top) {
        return Err(ParseError::at(
            l,
            c,
            ParseErrorKind::Syntax { expected: "a concept other than `Top` on the left".into(), found: "`Top`".into() },
        ));
    }
    Ok(DlAxiom::ConceptInclusion { sub, sup })
}

/// Target predicate implied by an example or rule head that the KB does not declare.
fn undeclared_target(raw: &RawAtom) -> Result<Predicate> {
    match raw.args.len() {
        1 => Ok(Predicate::concept(&raw.name)),
        2 => Ok(Predicate::role(&raw.name)),
        n => Err(ParseError::at(raw.line, raw.col, ParseErrorKind::BadTarget { name: raw.name.clone(), arity: n })),
    }
}

/// Parses lines of the form `+ LONER(Mary)` / `- LONER(Paul)`.
pub fn parse_examples(text: &str, kb: &HybridKb) -> Result<ExampleSet> {
    let mut p = Parser::new(text, true)?;
    let individuals = kb.individuals();
    let mut set: Option<ExampleSet> = None;
    loop {
        p.skip_newlines();
        if *p.peek() == Tok::Eof {
            break;
        }
        let positive = match p.bump() {
            Tok::Plus => true,
            Tok::Minus => false,
            _ => {
                p.pos -= 1;
                return Err(p.unexpected("`+` or `-`"));
            }
        };
        let raw = p.raw_atom()?;
        p.eat(&Tok::Dot);
        if !matches!(p.peek(), Tok::Newline | Tok::Eof) {
            return Err(p.unexpected("end of line"));
        }
        if kb.signature.contains_name(&raw.name) {
            return Err(ParseError::at(raw.line, raw.col, ParseErrorKind::TargetInKb(raw.name.clone())));
        }
        let target = match &set {
            Some(s) => {
                if *s.target.name != raw.name || s.target.arity != raw.args.len() {
                    return Err(ParseError::at(
                        raw.line,
                        raw.col,
                        ParseErrorKind::MixedTargets {
                            first: s.target.to_string(),
                            second: format!("{}/{}", raw.name, raw.args.len()),
                        },
                    ));
                }
                s.target.clone()
            }
            None => undeclared_target(&raw)?,
        };
        let atom = ground(&raw, resolve_with(&raw, &target)?)?;
        for ((name, l, c), t) in raw.args.iter().zip(&atom.args) {
            if !individuals.contains(t.name()) {
                return Err(ParseError::at(*l, *c, ParseErrorKind::UnknownConstant(name.clone())));
            }
        }
        let s = set.get_or_insert_with(|| ExampleSet::new(target));
        let (same, other) = if positive { (&mut s.positives, &s.negatives) } else { (&mut s.negatives, &s.positives) };
        if other.contains(&atom) {
            return Err(ParseError::at(raw.line, raw.col, ParseErrorKind::ContradictoryExample(atom.to_string())));
        }
        if !same.contains(&atom) {
            same.push(atom);
        }
    }
    set.ok_or_else(|| p.error(ParseErrorKind::NoExamples))
}

/// Parses `key = p/n, ...` entries separated by `;` or newlines. Keys are
/// `datalog+`, `datalog-`, `concepts` and `roles`.
pub fn parse_bias(text: &str, kb: &HybridKb) -> Result<LanguageBias> {
    let mut p = Parser::new(text, true)?;
    let mut bias = LanguageBias::default();
    loop {
        while p.eat(&Tok::Newline) || p.eat(&Tok::Semi) {}
        if *p.peek() == Tok::Eof {
            return Ok(bias);
        }
        let (key, l, c) = p.ident("`datalog+`, `datalog-`, `concepts` or `roles`")?;
        let key = if key == "datalog" && p.eat(&Tok::Plus) { "datalog+".to_string() } else { key };
        let (alphabet, kinds, target): (&'static str, &BTreeSet<Predicate>, &mut BTreeSet<Predicate>) =
            match key.as_str() {
                "datalog+" => ("datalog predicates", &kb.signature.datalog, &mut bias.datalog_pos),
                "datalog-" => ("datalog predicates", &kb.signature.datalog, &mut bias.datalog_neg),
                "concepts" => ("concepts", &kb.signature.concepts, &mut bias.concepts),
                "roles" => ("roles", &kb.signature.roles, &mut bias.roles),
                other => {
                    return Err(ParseError::at(
                        l,
                        c,
                        ParseErrorKind::Syntax {
                            expected: "`datalog+`, `datalog-`, `concepts` or `roles`".into(),
                            found: format!("`{other}`"),
                        },
                    ))
                }
            };
        p.expect(Tok::Eq)?;
        if matches!(p.peek(), Tok::Newline | Tok::Semi | Tok::Eof) {
            continue;
        }
        loop {
            let (name, arity, l, c) = p.pred_ref()?;
            let found = kinds.iter().find(|q| *q.name == name && arity.is_none_or(|n| n == q.arity));
            match found {
                Some(q) => {
                    target.insert(q.clone());
                }
                None => {
                    let pred = arity.map_or_else(|| name.clone(), |n| format!("{name}/{n}"));
                    return Err(ParseError::at(l, c, ParseErrorKind::NotInAlphabet { pred, alphabet }));
                }
            }
            if !p.eat(&Tok::Comma) {
                break;
            }
        }
        if !matches!(p.peek(), Tok::Newline | Tok::Semi | Tok::Eof) {
            return Err(p.unexpected("`;` or end of line"));
        }
    }
}

/// Parses one rule. The head predicate may be undeclared in `sig`, in which
/// case it is a concept (arity 1) or role (arity 2); body predicates must be
/// declared. Safeness is not checked.
pub fn parse_rule(text: &str, sig: &Signature) -> Result<Rule> {
    let mut p = Parser::new(text, false)?;
    let raw = p.raw_atom()?;
    let head = match sig.lookup(&raw.name) {
        Some(pred) => resolve_with(&raw, pred)?,
        None => resolve_with(&raw, &undeclared_target(&raw)?)?,
    };
    let body = if p.eat(&Tok::If) { body(&mut p, sig)? } else { Vec::new() };
    p.eat(&Tok::Dot);
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    Ok(Rule::new(head, body))
}

/// Parses a ground atom over declared predicates, with an optional final `.`.
pub fn parse_atom(text: &str, sig: &Signature) -> Result<Atom> {
    let mut p = Parser::new(text, false)?;
    let raw = p.raw_atom()?;
    let atom = ground(&raw, resolve(&raw, sig)?)?;
    p.eat(&Tok::Dot);
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    Ok(atom)
}

/// `HEAD :- L1, ..., Ln.` or `HEAD.`
pub fn serialize_rule(rule: &Rule) -> String {
    rule.to_string()
}
