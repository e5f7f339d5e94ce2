//! The `.laf` knowledge-base language and its JSON equivalent.
//!
//! ```text
//! algebra relevance fuzzy;
//! algebra intuition tags { PL > NG > FCH > PCH };
//! domain cp;
//! fact ~physical_imp(cp) labels [0.8, {PL}];
//! rule r1: med_repr(X) <- ~physical_imp(X) labels [0.7, {PL}];
//! ```
//!
//! Statements end with `;`. Comments run from `//` or `#` to the end of the
//! line. Argument identifiers starting with an uppercase letter are
//! variables. Label vectors are positional (declaration order of the
//! algebras) or fully named (`[relevance=0.8, intuition={PL}]`).
//!
//! Parsing recovers at the next `;` after a syntax error, so a single run
//! reports every diagnosable problem.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraDecl, AlgebraKind, Fuzzy, Label, LabelVector};
use crate::kb::{ElementRef, Fact, KnowledgeBase, Literal, Pattern, Rule, Term};

/// A position in a source text. Lines and columns count from 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ErrorKind {
    Lexical,
    Syntactic,
    Semantic,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Lexical => "lexical error",
            ErrorKind::Syntactic => "syntax error",
            ErrorKind::Semantic => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {kind}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ErrorKind,
    pub message: String,
}

/// Where a position came from; file name is filled in when errors are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Pos {
    line: usize,
    column: usize,
}

impl Pos {
    const START: Pos = Pos { line: 1, column: 1 };
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Semi,
    Comma,
    Colon,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Tilde,
    Arrow,
    Gt,
    Eq,
    Minus,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Arrow => f.write_str("`<-`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Minus => f.write_str("`-`"),
        }
    }
}

type Diag = (Pos, ErrorKind, String);

fn lex(source: &str) -> (Vec<(Tok, Pos)>, Vec<Diag>) {
    let mut toks = Vec::new();
    let mut errors = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '<' if chars.get(i + 1) == Some(&'-') => {
                toks.push((Tok::Arrow, pos));
                advance(2, &mut i, &mut col);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                toks.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                col += i - start;
                toks.push((Tok::Number(chars[start..i].iter().collect()), pos));
            }
            _ => {
                let tok = match c {
                    ';' => Some(Tok::Semi),
                    ',' => Some(Tok::Comma),
                    ':' => Some(Tok::Colon),
                    '(' => Some(Tok::LParen),
                    ')' => Some(Tok::RParen),
                    '[' => Some(Tok::LBracket),
                    ']' => Some(Tok::RBracket),
                    '{' => Some(Tok::LBrace),
                    '}' => Some(Tok::RBrace),
                    '~' => Some(Tok::Tilde),
                    '>' => Some(Tok::Gt),
                    '=' => Some(Tok::Eq),
                    '-' => Some(Tok::Minus),
                    _ => None,
                };
                match tok {
                    Some(t) => toks.push((t, pos)),
                    None => errors.push((pos, ErrorKind::Lexical, format!("unexpected character `{c}`"))),
                }
                advance(1, &mut i, &mut col);
            }
        }
    }
    (toks, errors)
}

#[derive(Debug, Clone)]
enum RawLabel {
    Number(f64, Pos),
    Tags(Vec<(String, Pos)>, Pos),
}

impl RawLabel {
    fn pos(&self) -> Pos {
        match self {
            RawLabel::Number(_, p) | RawLabel::Tags(_, p) => *p,
        }
    }
}

#[derive(Debug, Clone)]
enum RawLabels {
    Positional(Vec<RawLabel>),
    Named(Vec<(String, Pos, RawLabel)>),
}

#[derive(Debug, Clone)]
enum Stmt {
    Algebra { name: String, tags: Option<Vec<String>>, pos: Pos },
    Domain { consts: Vec<(String, Pos)> },
    Fact { literal: Pattern, labels: RawLabels, pos: Pos, labels_pos: Pos },
    Rule { name: String, conclusion: Pattern, premises: Vec<Pattern>, labels: RawLabels, pos: Pos, labels_pos: Pos },
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    idx: usize,
    eof: Pos,
}

type PResult<T> = Result<T, Diag>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.idx).map(|(_, p)| *p).unwrap_or(self.eof)
    }

    fn bump(&mut self) -> Option<(Tok, Pos)> {
        let t = self.toks.get(self.idx).cloned();
        self.idx += 1;
        t
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        let found = match self.peek() {
            Some(t) => t.to_string(),
            None => "end of input".to_string(),
        };
        Err((self.pos(), ErrorKind::Syntactic, format!("expected {expected}, found {found}")))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Pos> {
        if self.peek() == Some(&tok) {
            Ok(self.bump().unwrap().1)
        } else {
            self.unexpected(&tok.to_string())
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek() {
            Some(Tok::Ident(_)) => match self.bump() {
                Some((Tok::Ident(s), p)) => Ok((s, p)),
                _ => unreachable!(),
            },
            _ => self.unexpected(what),
        }
    }

    fn recover(&mut self) {
        while let Some((tok, _)) = self.bump() {
            if tok == Tok::Semi {
                break;
            }
        }
    }

    fn statements(&mut self) -> (Vec<Stmt>, Vec<Diag>) {
        let mut stmts = Vec::new();
        let mut errors = Vec::new();
        while self.peek().is_some() {
            match self.statement() {
                Ok(s) => stmts.push(s),
                Err(e) => {
                    errors.push(e);
                    self.recover();
                }
            }
        }
        (stmts, errors)
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let (kw, pos) = self.ident("`algebra`, `domain`, `fact` or `rule`")?;
        let stmt = match kw.as_str() {
            "algebra" => {
                let (name, _) = self.ident("algebra name")?;
                let (kind, kind_pos) = self.ident("`fuzzy` or `tags`")?;
                let tags = match kind.as_str() {
                    "fuzzy" => None,
                    "tags" => {
                        self.expect(Tok::LBrace)?;
                        let mut tags = Vec::new();
                        if !self.eat(&Tok::RBrace) {
                            loop {
                                tags.push(self.ident("tag name")?.0);
                                if self.eat(&Tok::RBrace) {
                                    break;
                                }
                                self.expect(Tok::Gt)?;
                            }
                        }
                        Some(tags)
                    }
                    other => {
                        return Err((
                            kind_pos,
                            ErrorKind::Syntactic,
                            format!("unknown algebra kind `{other}`, expected `fuzzy` or `tags`"),
                        ))
                    }
                };
                Stmt::Algebra { name, tags, pos }
            }
            "domain" => {
                let mut consts = vec![self.ident("constant")?];
                while self.eat(&Tok::Comma) {
                    consts.push(self.ident("constant")?);
                }
                Stmt::Domain { consts }
            }
            "fact" => {
                let literal = self.literal()?;
                let labels_pos = self.pos();
                let labels = self.labels()?;
                Stmt::Fact { literal, labels, pos, labels_pos }
            }
            "rule" => {
                let (name, _) = self.ident("rule name")?;
                self.expect(Tok::Colon)?;
                let conclusion = self.literal()?;
                self.expect(Tok::Arrow)?;
                let mut premises = vec![self.literal()?];
                while self.eat(&Tok::Comma) {
                    premises.push(self.literal()?);
                }
                let labels_pos = self.pos();
                let labels = self.labels()?;
                Stmt::Rule { name, conclusion, premises, labels, pos, labels_pos }
            }
            other => {
                return Err((
                    pos,
                    ErrorKind::Syntactic,
                    format!("unknown statement `{other}`, expected `algebra`, `domain`, `fact` or `rule`"),
                ))
            }
        };
        self.expect(Tok::Semi)?;
        Ok(stmt)
    }

    fn literal(&mut self) -> PResult<Pattern> {
        let negated = self.eat(&Tok::Tilde);
        let (predicate, _) = self.ident("predicate")?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(Term::from_ident(&self.ident("argument")?.0));
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        Ok(Pattern { predicate, args, negated })
    }

    fn labels(&mut self) -> PResult<RawLabels> {
        match self.peek() {
            Some(Tok::Ident(kw)) if kw == "labels" => {
                self.idx += 1;
            }
            Some(Tok::Semi) => return Ok(RawLabels::Positional(Vec::new())),
            _ => return self.unexpected("`labels` or `;`"),
        }
        self.expect(Tok::LBracket)?;
        let mut positional = Vec::new();
        let mut named = Vec::new();
        if !self.eat(&Tok::RBracket) {
            loop {
                let is_named = matches!(self.peek(), Some(Tok::Ident(_)))
                    && matches!(self.toks.get(self.idx + 1), Some((Tok::Eq, _)));
                if is_named {
                    let (name, p) = self.ident("algebra name")?;
                    self.expect(Tok::Eq)?;
                    named.push((name, p, self.label()?));
                } else {
                    positional.push(self.label()?);
                }
                if self.eat(&Tok::RBracket) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        match (positional.is_empty(), named.is_empty()) {
            (_, true) => Ok(RawLabels::Positional(positional)),
            (true, false) => Ok(RawLabels::Named(named)),
            (false, false) => Err((
                positional[0].pos(),
                ErrorKind::Syntactic,
                "label vector mixes named and positional labels".into(),
            )),
        }
    }

    fn label(&mut self) -> PResult<RawLabel> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Minus) | Some(Tok::Number(_)) => {
                let negative = self.eat(&Tok::Minus);
                match self.bump() {
                    Some((Tok::Number(text), _)) => {
                        let value: f64 = text.parse().map_err(|_| {
                            (pos, ErrorKind::Lexical, format!("malformed number `{text}`"))
                        })?;
                        Ok(RawLabel::Number(if negative { -value } else { value }, pos))
                    }
                    _ => {
                        self.idx -= 1;
                        self.unexpected("number")
                    }
                }
            }
            Some(Tok::LBrace) => {
                self.idx += 1;
                let mut tags = Vec::new();
                if !self.eat(&Tok::RBrace) {
                    loop {
                        tags.push(self.ident("tag name")?);
                        if self.eat(&Tok::RBrace) {
                            break;
                        }
                        self.expect(Tok::Comma)?;
                    }
                }
                Ok(RawLabel::Tags(tags, pos))
            }
            _ => self.unexpected("a number or a tag set"),
        }
    }
}

/// Syntax-level view of a knowledge base, shared by the DSL and JSON readers.
struct RawKb {
    algebras: Vec<(String, Option<Vec<String>>, Pos)>,
    domain: Vec<(String, Pos)>,
    facts: Vec<(Pattern, RawLabels, Pos, Pos)>,
    rules: Vec<(String, Pattern, Vec<Pattern>, RawLabels, Pos, Pos)>,
}

impl RawKb {
    fn from_statements(stmts: Vec<Stmt>) -> RawKb {
        let mut raw = RawKb { algebras: vec![], domain: vec![], facts: vec![], rules: vec![] };
        for stmt in stmts {
            match stmt {
                Stmt::Algebra { name, tags, pos } => raw.algebras.push((name, tags, pos)),
                Stmt::Domain { consts } => raw.domain.extend(consts),
                Stmt::Fact { literal, labels, pos, labels_pos } => {
                    raw.facts.push((literal, labels, pos, labels_pos))
                }
                Stmt::Rule { name, conclusion, premises, labels, pos, labels_pos } => {
                    raw.rules.push((name, conclusion, premises, labels, pos, labels_pos))
                }
            }
        }
        raw
    }

    fn resolve(self, errors: &mut Vec<Diag>) -> Option<KnowledgeBase> {
        let start = errors.len();
        let mut algebras = Vec::new();
        for (name, tags, pos) in &self.algebras {
            let decl = match tags {
                None => Ok(AlgebraDecl::fuzzy(name.clone())),
                Some(tags) => AlgebraDecl::tags(name.clone(), tags.clone()),
            };
            match decl {
                Ok(d) => algebras.push(d),
                Err(e) => errors.push((*pos, ErrorKind::Semantic, format!("algebra `{name}`: {e}"))),
            }
        }
        if errors.len() > start {
            return None;
        }

        let mut facts = Vec::new();
        for (pattern, labels, pos, labels_pos) in &self.facts {
            let labels = resolve_labels(&algebras, labels, *labels_pos, errors);
            let Some(literal) = pattern.to_ground() else {
                errors.push((*pos, ErrorKind::Semantic, format!("presumption `{pattern}` contains a variable")));
                continue;
            };
            if let Some(labels) = labels {
                facts.push(Fact { literal, labels });
            }
        }
        let mut rules = Vec::new();
        for (name, conclusion, premises, labels, _, labels_pos) in &self.rules {
            if let Some(labels) = resolve_labels(&algebras, labels, *labels_pos, errors) {
                rules.push(Rule {
                    name: name.clone(),
                    conclusion: conclusion.clone(),
                    premises: premises.clone(),
                    labels,
                });
            }
        }
        if errors.len() > start {
            return None;
        }

        let domain = self.domain.iter().map(|(c, _)| c.clone()).collect();
        match KnowledgeBase::new(algebras, domain, facts, rules) {
            Ok(kb) => Some(kb),
            Err(kb_errors) => {
                for e in kb_errors {
                    let pos = match e.at {
                        ElementRef::Algebra(i) => self.algebras[i].2,
                        ElementRef::Domain(i) => self.domain[i].1,
                        ElementRef::Fact(i) => self.facts[i].2,
                        ElementRef::Rule(i) => self.rules[i].4,
                    };
                    errors.push((pos, ErrorKind::Semantic, e.to_string()));
                }
                None
            }
        }
    }
}

fn resolve_labels(
    algebras: &[AlgebraDecl],
    raw: &RawLabels,
    pos: Pos,
    errors: &mut Vec<Diag>,
) -> Option<LabelVector> {
    let start = errors.len();
    let ordered: Vec<Option<&RawLabel>> = match raw {
        RawLabels::Positional(labels) => {
            if labels.len() != algebras.len() {
                errors.push((
                    pos,
                    ErrorKind::Semantic,
                    format!(
                        "label vector has {} components but {} algebras are declared",
                        labels.len(),
                        algebras.len()
                    ),
                ));
                return None;
            }
            labels.iter().map(Some).collect()
        }
        RawLabels::Named(named) => {
            let mut slots = vec![None; algebras.len()];
            for (name, p, label) in named {
                match algebras.iter().position(|a| &a.name == name) {
                    None => errors.push((*p, ErrorKind::Semantic, format!("unknown algebra `{name}`"))),
                    Some(i) if slots[i].is_some() => {
                        errors.push((*p, ErrorKind::Semantic, format!("algebra `{name}` labeled twice")))
                    }
                    Some(i) => slots[i] = Some(label),
                }
            }
            for (alg, slot) in algebras.iter().zip(&slots) {
                if slot.is_none() {
                    errors.push((pos, ErrorKind::Semantic, format!("missing label for algebra `{}`", alg.name)));
                }
            }
            slots
        }
    };
    let mut out = Vec::new();
    for (alg, raw) in algebras.iter().zip(ordered) {
        let Some(raw) = raw else { continue };
        match (&alg.kind, raw) {
            (AlgebraKind::Fuzzy(_), RawLabel::Number(v, p)) => match Fuzzy::new(*v) {
                Some(f) => out.push(Label::Fuzzy(f)),
                None => errors.push((
                    *p,
                    ErrorKind::Semantic,
                    format!("fuzzy value outside [0,1]: {v} (algebra `{}`)", alg.name),
                )),
            },
            (AlgebraKind::Tags(t), RawLabel::Tags(tags, _)) => {
                let mut ok = true;
                for (tag, p) in tags {
                    if t.rank(tag).is_none() {
                        ok = false;
                        errors.push((
                            *p,
                            ErrorKind::Semantic,
                            format!("tag `{tag}` is not in the universe of algebra `{}`", alg.name),
                        ));
                    }
                }
                if ok {
                    let set = t.set_of(tags.iter().map(|(s, _)| s.as_str())).expect("tags checked");
                    out.push(Label::Tags(set));
                }
            }
            (AlgebraKind::Fuzzy(_), RawLabel::Tags(_, p)) => errors.push((
                *p,
                ErrorKind::Semantic,
                format!("algebra `{}` expects a number, found a tag set", alg.name),
            )),
            (AlgebraKind::Tags(_), RawLabel::Number(_, p)) => errors.push((
                *p,
                ErrorKind::Semantic,
                format!("algebra `{}` expects a tag set, found a number", alg.name),
            )),
        }
    }
    (errors.len() == start).then_some(LabelVector(out))
}

fn finish(file: &str, mut diags: Vec<Diag>) -> Vec<ParseError> {
    diags.sort_by_key(|(p, _, _)| (p.line, p.column));
    diags
        .into_iter()
        .map(|(pos, kind, message)| ParseError {
            span: SourceSpan { file: file.to_string(), line: pos.line, column: pos.column },
            kind,
            message,
        })
        .collect()
}

fn eof_pos(source: &str) -> Pos {
    let line = source.matches('\n').count() + 1;
    let column = source.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Pos { line, column }
}

/// Parses DSL text. Errors are sorted by position.
pub fn parse_kb(source: &str) -> Result<KnowledgeBase, Vec<ParseError>> {
    parse_kb_named(source, "<input>")
}

/// Like [`parse_kb`], attributing spans to `file`.
pub fn parse_kb_named(source: &str, file: &str) -> Result<KnowledgeBase, Vec<ParseError>> {
    let (toks, mut diags) = lex(source);
    let mut parser = Parser { toks, idx: 0, eof: eof_pos(source) };
    let (stmts, syntax) = parser.statements();
    diags.extend(syntax);
    if !diags.is_empty() {
        return Err(finish(file, diags));
    }
    match RawKb::from_statements(stmts).resolve(&mut diags) {
        Some(kb) => Ok(kb),
        None => Err(finish(file, diags)),
    }
}

fn parse_single<T>(text: &str, f: impl FnOnce(&mut Parser) -> PResult<T>) -> Result<T, ParseError> {
    let to_err = |(pos, kind, message): Diag| ParseError {
        span: SourceSpan { file: "<literal>".into(), line: pos.line, column: pos.column },
        kind,
        message,
    };
    let (toks, diags) = lex(text);
    if let Some(d) = diags.into_iter().next() {
        return Err(to_err(d));
    }
    let mut parser = Parser { toks, idx: 0, eof: eof_pos(text) };
    let value = f(&mut parser).map_err(to_err)?;
    if parser.peek().is_some() {
        return Err(to_err(parser.unexpected::<()>("end of literal").unwrap_err()));
    }
    Ok(value)
}

/// Parses a literal pattern such as `~med_repr(X)`.
pub fn parse_pattern(text: &str) -> Result<Pattern, ParseError> {
    parse_single(text, |p| p.literal())
}

/// Parses a ground literal such as `~med_repr(cp)`.
pub fn parse_literal(text: &str) -> Result<Literal, ParseError> {
    let pattern = parse_pattern(text)?;
    pattern.to_ground().ok_or_else(|| ParseError {
        span: SourceSpan { file: "<literal>".into(), line: 1, column: 1 },
        kind: ErrorKind::Semantic,
        message: format!("`{text}` is not ground"),
    })
}

fn render_label(alg: &AlgebraDecl, label: &Label) -> String {
    match (&alg.kind, label) {
        (AlgebraKind::Tags(t), Label::Tags(set)) => format!("{{{}}}", t.names(set).join(", ")),
        // `{}` on f64 prints the shortest text that parses back to the same value.
        (_, Label::Fuzzy(v)) => format!("{}", v.value()),
        (_, Label::Tags(_)) => unreachable!("validated knowledge base"),
    }
}

fn render_labels(kb: &KnowledgeBase, labels: &LabelVector) -> String {
    let parts: Vec<String> = kb
        .algebras()
        .iter()
        .zip(labels.iter())
        .map(|(a, l)| render_label(a, l))
        .collect();
    format!("labels [{}]", parts.join(", "))
}

/// Renders a knowledge base as DSL text that parses back to an equal value.
pub fn serialize_kb(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    for alg in kb.algebras() {
        match &alg.kind {
            AlgebraKind::Fuzzy(_) => out.push_str(&format!("algebra {} fuzzy;\n", alg.name)),
            AlgebraKind::Tags(t) => {
                out.push_str(&format!("algebra {} tags {{ {} }};\n", alg.name, t.tags().join(" > ")))
            }
        }
    }
    if !kb.domain().is_empty() {
        out.push_str(&format!("domain {};\n", kb.domain().join(", ")));
    }
    for fact in kb.facts() {
        out.push_str(&format!("fact {} {};\n", fact.literal, render_labels(kb, &fact.labels)));
    }
    for rule in kb.rules() {
        let premises: Vec<String> = rule.premises.iter().map(|p| p.to_string()).collect();
        out.push_str(&format!(
            "rule {}: {} <- {} {};\n",
            rule.name,
            rule.conclusion,
            premises.join(", "),
            render_labels(kb, &rule.labels)
        ));
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonKb {
    #[serde(default)]
    algebras: Vec<JsonAlgebra>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    domain: Vec<String>,
    #[serde(default)]
    facts: Vec<JsonFact>,
    #[serde(default)]
    rules: Vec<JsonRule>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonAlgebra {
    name: String,
    kind: JsonAlgebraKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tags: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum JsonAlgebraKind {
    Fuzzy,
    Tags,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonFact {
    literal: String,
    #[serde(default)]
    labels: JsonLabels,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRule {
    name: String,
    conclusion: String,
    premises: Vec<String>,
    #[serde(default)]
    labels: JsonLabels,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum JsonLabels {
    Positional(Vec<JsonLabel>),
    Named(BTreeMap<String, JsonLabel>),
}

impl Default for JsonLabels {
    fn default() -> Self {
        JsonLabels::Positional(Vec::new())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum JsonLabel {
    Number(f64),
    Tags(Vec<String>),
}

impl JsonLabel {
    fn into_raw(self) -> RawLabel {
        match self {
            JsonLabel::Number(v) => RawLabel::Number(v, Pos::START),
            JsonLabel::Tags(t) => RawLabel::Tags(t.into_iter().map(|s| (s, Pos::START)).collect(), Pos::START),
        }
    }
}

impl JsonLabels {
    fn into_raw(self) -> RawLabels {
        match self {
            JsonLabels::Positional(v) => RawLabels::Positional(v.into_iter().map(JsonLabel::into_raw).collect()),
            JsonLabels::Named(m) => {
                RawLabels::Named(m.into_iter().map(|(k, v)| (k, Pos::START, v.into_raw())).collect())
            }
        }
    }
}

/// Parses the JSON form (`algebras`, `facts`, `rules`, optional `domain`).
///
/// Syntax errors carry the JSON parser's position; semantic errors point at
/// the start of the document.
pub fn parse_kb_json(source: &str, file: &str) -> Result<KnowledgeBase, Vec<ParseError>> {
    let doc: JsonKb = serde_json::from_str(source).map_err(|e| {
        vec![ParseError {
            span: SourceSpan { file: file.into(), line: e.line().max(1), column: e.column().max(1) },
            kind: ErrorKind::Syntactic,
            message: e.to_string(),
        }]
    })?;
    let mut diags = Vec::new();
    let mut literal = |text: &str| match parse_pattern(text) {
        Ok(p) => Some(p),
        Err(e) => {
            diags.push((Pos::START, e.kind, format!("in `{text}`: {}", e.message)));
            None
        }
    };
    let mut raw = RawKb { algebras: vec![], domain: vec![], facts: vec![], rules: vec![] };
    for a in doc.algebras {
        let tags = match a.kind {
            JsonAlgebraKind::Fuzzy => None,
            JsonAlgebraKind::Tags => Some(a.tags),
        };
        raw.algebras.push((a.name, tags, Pos::START));
    }
    raw.domain = doc.domain.into_iter().map(|c| (c, Pos::START)).collect();
    for f in doc.facts {
        if let Some(p) = literal(&f.literal) {
            raw.facts.push((p, f.labels.into_raw(), Pos::START, Pos::START));
        }
    }
    for r in doc.rules {
        let conclusion = literal(&r.conclusion);
        let premises: Option<Vec<Pattern>> = r.premises.iter().map(|p| literal(p)).collect();
        if let (Some(conclusion), Some(premises)) = (conclusion, premises) {
            raw.rules.push((r.name, conclusion, premises, r.labels.into_raw(), Pos::START, Pos::START));
        }
    }
    if !diags.is_empty() {
        return Err(finish(file, diags));
    }
    match raw.resolve(&mut diags) {
        Some(kb) => Ok(kb),
        None => Err(finish(file, diags)),
    }
}

fn json_labels(kb: &KnowledgeBase, labels: &LabelVector) -> JsonLabels {
    JsonLabels::Positional(
        kb.algebras()
            .iter()
            .zip(labels.iter())
            .map(|(alg, label)| match (&alg.kind, label) {
                (AlgebraKind::Tags(t), Label::Tags(set)) => JsonLabel::Tags(t.names(set)),
                (_, Label::Fuzzy(v)) => JsonLabel::Number(v.value()),
                (_, Label::Tags(_)) => unreachable!("validated knowledge base"),
            })
            .collect(),
    )
}

/// Renders a knowledge base in the JSON form accepted by [`parse_kb_json`].
pub fn serialize_kb_json(kb: &KnowledgeBase) -> String {
    let doc = JsonKb {
        algebras: kb
            .algebras()
            .iter()
            .map(|a| match &a.kind {
                AlgebraKind::Fuzzy(_) => JsonAlgebra { name: a.name.clone(), kind: JsonAlgebraKind::Fuzzy, tags: vec![] },
                AlgebraKind::Tags(t) => JsonAlgebra {
                    name: a.name.clone(),
                    kind: JsonAlgebraKind::Tags,
                    tags: t.tags().to_vec(),
                },
            })
            .collect(),
        domain: kb.domain().to_vec(),
        facts: kb
            .facts()
            .iter()
            .map(|f| JsonFact { literal: f.literal.to_string(), labels: json_labels(kb, &f.labels) })
            .collect(),
        rules: kb
            .rules()
            .iter()
            .map(|r| JsonRule {
                name: r.name.clone(),
                conclusion: r.conclusion.to_string(),
                premises: r.premises.iter().map(|p| p.to_string()).collect(),
                labels: json_labels(kb, &r.labels),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("knowledge base serializes")
}
