//! Concrete syntax: a shared lexer, recursive-descent parsers and printers
//! for processes, networks, formulas, choreographies and derivations.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::choreography::{Choreography, Network};
use crate::formula::Formula;
use crate::process::{Name, Process};
use crate::prover::Derivation;

const KEYWORDS: &[&str] = &[
    "new", "sel", "bra", "par", "tens", "seq", "oplus", "with", "all", "ex", "ya",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
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

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: expected {expected}, found {found}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: String,
    pub found: String,
}

impl ParseError {
    pub fn with_file(mut self, file: &str) -> Self {
        self.span.file = file.to_string();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Zero,
    One,
    Bang,
    Query,
    Dot,
    Bar,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Comma,
    Colon,
    Semi,
    Arrow,
    Eof,
}

impl Tok {
    fn lexeme(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{}'", s),
            Tok::Zero => "'0'".into(),
            Tok::One => "'1'".into(),
            Tok::Bang => "'!'".into(),
            Tok::Query => "'?'".into(),
            Tok::Dot => "'.'".into(),
            Tok::Bar => "'|'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LBrack => "'['".into(),
            Tok::RBrack => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Colon => "':'".into(),
            Tok::Semi => "';'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexed {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut column) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, column);
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            column += j - i;
            i = j;
            Tok::Ident(word)
        } else {
            let (tok, width) = match c {
                '0' => (Tok::Zero, 1),
                '1' => (Tok::One, 1),
                '!' => (Tok::Bang, 1),
                '?' => (Tok::Query, 1),
                '.' => (Tok::Dot, 1),
                '|' => (Tok::Bar, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                '[' => (Tok::LBrack, 1),
                ']' => (Tok::RBrack, 1),
                ',' => (Tok::Comma, 1),
                ':' => (Tok::Colon, 1),
                ';' => (Tok::Semi, 1),
                '-' if chars.get(i + 1) == Some(&'>') => (Tok::Arrow, 2),
                _ => {
                    return Err(ParseError {
                        span: SourceSpan {
                            file: "<input>".into(),
                            line,
                            column,
                        },
                        expected: "a token".into(),
                        found: format!("'{}'", c),
                    })
                }
            };
            if matches!(tok, Tok::Zero | Tok::One)
                && chars.get(i + 1).is_some_and(|d| d.is_ascii_alphanumeric() || *d == '_')
            {
                return Err(ParseError {
                    span: SourceSpan {
                        file: "<input>".into(),
                        line,
                        column,
                    },
                    expected: "an identifier starting with a letter".into(),
                    found: format!("'{}{}'", c, chars[i + 1]),
                });
            }
            i += width;
            column += width;
            tok
        };
        out.push(Lexed {
            tok,
            line: start.0,
            column: start.1,
        });
    }
    out.push(Lexed {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str) -> PResult<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> ParseError {
        self.error_at(self.pos, expected)
    }

    fn error_at(&self, pos: usize, expected: &str) -> ParseError {
        let l = &self.toks[pos];
        ParseError {
            span: SourceSpan {
                file: "<input>".into(),
                line: l.line,
                column: l.column,
            },
            expected: expected.into(),
            found: l.tok.lexeme(),
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(&tok.lexeme()))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn name(&mut self) -> PResult<Name> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error_here("a name")),
        }
    }

    fn end(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error_here("end of input"))
        }
    }

    /// `new x, y.` or `new x y.`; the keyword is already consumed.
    fn binders(&mut self) -> PResult<Vec<Name>> {
        let mut names = vec![self.name()?];
        loop {
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                    names.push(self.name()?);
                }
                Tok::Ident(_) => names.push(self.name()?),
                _ => break,
            }
        }
        self.expect(Tok::Dot)?;
        Ok(names)
    }

    fn process(&mut self) -> PResult<Process> {
        let mut items = vec![self.process_unit()?];
        while *self.peek() == Tok::Bar {
            self.bump();
            items.push(self.process_unit()?);
        }
        Ok(Process::par_all(items))
    }

    fn process_unit(&mut self) -> PResult<Process> {
        match self.peek().clone() {
            Tok::Zero => {
                self.bump();
                Ok(Process::Nil)
            }
            Tok::LParen => {
                self.bump();
                let p = self.process()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::Ident(kw) if kw == "new" => {
                self.bump();
                let names = self.binders()?;
                let body = self.process()?;
                Ok(Process::res_all(&names, body))
            }
            Tok::Ident(_) => {
                let subject = self.name()?;
                match self.peek() {
                    Tok::Bang => {
                        self.bump();
                        let object = self.name()?;
                        self.expect(Tok::Dot)?;
                        Ok(Process::send(subject, object, self.process_unit()?))
                    }
                    Tok::Query => {
                        self.bump();
                        let binder = self.name()?;
                        self.expect(Tok::Dot)?;
                        Ok(Process::recv(subject, binder, self.process_unit()?))
                    }
                    Tok::Ident(kw) if kw == "sel" || kw == "bra" => {
                        let is_sel = kw == "sel";
                        self.bump();
                        let branches = self.labelled(|p| p.process())?;
                        Ok(if is_sel {
                            Process::sel(subject, branches)
                        } else {
                            Process::bra(subject, branches)
                        })
                    }
                    _ => Err(self.error_here("'!', '?', 'sel' or 'bra'")),
                }
            }
            _ => Err(self.error_here("a process")),
        }
    }

    /// `{ l: X, m: X }`, rejecting duplicate labels.
    fn labelled<T>(&mut self, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<(Name, T)>> {
        self.expect(Tok::LBrace)?;
        let mut out: Vec<(Name, T)> = Vec::new();
        loop {
            let at = self.pos;
            let label = self.name()?;
            if out.iter().any(|(l, _)| *l == label) {
                return Err(self.error_at(at, "a label not already used in this block"));
            }
            self.expect(Tok::Colon)?;
            out.push((label, item(self)?));
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(out)
    }

    fn network(&mut self) -> PResult<Network> {
        let restricted = if self.is_keyword("new") {
            self.bump();
            self.binders()?
        } else {
            Vec::new()
        };
        let mut components = Vec::new();
        let mut seen = HashSet::new();
        loop {
            let at = self.pos;
            let name = self.name()?;
            if !seen.insert(name.clone()) {
                return Err(self.error_at(at, "a process name not already used"));
            }
            self.expect(Tok::LBrack)?;
            let body_at = self.pos;
            let body = self.process()?;
            if !body.is_sequential() {
                return Err(self.error_at(body_at, "a sequential process"));
            }
            self.expect(Tok::RBrack)?;
            components.push((name, body));
            if *self.peek() == Tok::Bar {
                self.bump();
            } else {
                break;
            }
        }
        Ok(Network {
            restricted,
            components,
        })
    }

    fn formula(&mut self) -> PResult<Formula> {
        let a = self.formula_atom()?;
        let op = match self.peek() {
            Tok::Ident(s) if s == "par" || s == "tens" || s == "seq" => s.clone(),
            _ => return Ok(a),
        };
        self.bump();
        let b = self.formula_atom()?;
        if matches!(self.peek(), Tok::Ident(s) if s == "par" || s == "tens" || s == "seq") {
            return Err(self.error_here("a closing parenthesis (binary connectives do not chain)"));
        }
        Ok(match op.as_str() {
            "par" => Formula::par(a, b),
            "tens" => Formula::tensor(a, b),
            _ => Formula::prec(a, b),
        })
    }

    fn formula_atom(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::One => {
                self.bump();
                Ok(Formula::Unit)
            }
            Tok::LBrack => {
                self.bump();
                self.expect(Tok::RBrack)?;
                Ok(Formula::Hole)
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(kw) if kw == "oplus" || kw == "with" => {
                self.bump();
                self.expect(Tok::LBrace)?;
                if *self.peek() == Tok::RBrace {
                    return Err(self.error_here("at least one operand"));
                }
                let mut items = vec![self.formula()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    items.push(self.formula()?);
                }
                self.expect(Tok::RBrace)?;
                Ok(if kw == "oplus" {
                    Formula::Oplus(items)
                } else {
                    Formula::With(items)
                })
            }
            Tok::Ident(kw) if matches!(kw.as_str(), "all" | "ex" | "new" | "ya") => {
                self.bump();
                let x = self.name()?;
                self.expect(Tok::Dot)?;
                let body = self.formula_atom()?;
                Ok(match kw.as_str() {
                    "all" => Formula::forall(x, body),
                    "ex" => Formula::exists(x, body),
                    "new" => Formula::new_(x, body),
                    _ => Formula::ya(x, body),
                })
            }
            Tok::Ident(_) => {
                let x = self.name()?;
                match self.bump() {
                    Tok::Bang => Ok(Formula::Send(x, self.name()?)),
                    Tok::Query => Ok(Formula::Recv(x, self.name()?)),
                    _ => Err(self.error_at(self.pos - 1, "'!' or '?'")),
                }
            }
            _ => Err(self.error_here("a formula")),
        }
    }

    fn choreography(&mut self) -> PResult<Choreography> {
        match self.peek().clone() {
            Tok::Zero => {
                self.bump();
                Ok(Choreography::End)
            }
            Tok::LParen => {
                self.bump();
                let c = self.choreography()?;
                self.expect(Tok::RParen)?;
                Ok(c)
            }
            Tok::Ident(kw) if kw == "new" => {
                self.bump();
                let names = self.binders()?;
                Ok(Choreography::res_all(&names, self.choreography()?))
            }
            Tok::Ident(_) => {
                let at = self.pos;
                let sender = self.name()?;
                match self.peek() {
                    Tok::Dot => {
                        self.bump();
                        let object = self.name()?;
                        self.expect(Tok::Arrow)?;
                        let recv_at = self.pos;
                        let receiver = self.name()?;
                        if receiver == sender {
                            return Err(self.error_at(recv_at, "a process name distinct from the sender"));
                        }
                        self.expect(Tok::Dot)?;
                        let binder = self.name()?;
                        self.expect(Tok::Colon)?;
                        let channel = self.name()?;
                        self.expect(Tok::Semi)?;
                        let cont = self.choreography()?;
                        Ok(Choreography::com(sender, object, receiver, binder, channel, cont))
                    }
                    Tok::Arrow => {
                        self.bump();
                        let recv_at = self.pos;
                        let receiver = self.name()?;
                        if receiver == sender {
                            return Err(self.error_at(recv_at, "a process name distinct from the sender"));
                        }
                        self.expect(Tok::Colon)?;
                        let channel = self.name()?;
                        self.choice_body(sender, receiver, channel)
                    }
                    _ => Err(self.error_at(at + 1, "'.' or '->'")),
                }
            }
            _ => Err(self.error_here("a choreography")),
        }
    }

    fn choice_body(&mut self, sender: Name, receiver: Name, channel: Name) -> PResult<Choreography> {
        self.expect(Tok::LBrace)?;
        let mut labels: Vec<Name> = Vec::new();
        let mut selectable = Vec::new();
        let mut garbage = Vec::new();
        let mut in_garbage = false;
        loop {
            let at = self.pos;
            let label = self.name()?;
            if labels.contains(&label) {
                return Err(self.error_at(at, "a label not already used in this block"));
            }
            labels.push(label.clone());
            self.expect(Tok::Colon)?;
            if in_garbage {
                let body_at = self.pos;
                let body = self.process_unit()?;
                if !body.is_sequential() {
                    return Err(self.error_at(body_at, "a sequential process"));
                }
                garbage.push((label, body));
            } else {
                selectable.push((label, self.choreography()?));
            }
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::Bar if !in_garbage => {
                    self.bump();
                    in_garbage = true;
                }
                _ => break,
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(Choreography::Choice {
            sender,
            receiver,
            channel,
            selectable,
            garbage,
        })
    }

    fn annotated(&mut self) -> PResult<(Formula, Option<Name>)> {
        if *self.peek() == Tok::LBrack && *self.peek_at(1) != Tok::RBrack {
            self.bump();
            let f = self.formula()?;
            self.expect(Tok::RBrack)?;
            let owner = self.name()?;
            Ok((f, Some(owner)))
        } else {
            Ok((self.formula()?, None))
        }
    }
}

fn parse_whole<T>(text: &str, f: impl FnOnce(&mut Parser) -> PResult<T>) -> PResult<T> {
    let mut p = Parser::new(text)?;
    let out = f(&mut p)?;
    p.end()?;
    Ok(out)
}

pub fn parse_process(text: &str) -> Result<Process, ParseError> {
    parse_whole(text, |p| p.process())
}

pub fn parse_network(text: &str) -> Result<Network, ParseError> {
    parse_whole(text, |p| p.network())
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_whole(text, |p| p.formula())
}

/// `[A]p` or a plain formula.
pub fn parse_annotated_formula(text: &str) -> Result<(Formula, Option<Name>), ParseError> {
    parse_whole(text, |p| p.annotated())
}

pub fn parse_choreography(text: &str) -> Result<Choreography, ParseError> {
    parse_whole(text, |p| p.choreography())
}

/// Input accepted by the process-level commands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcessInput {
    Process(Process),
    Network(Network),
}

/// Parses a network if the text has the `name[...]` shape, else a process.
pub fn parse_process_or_network(text: &str) -> Result<ProcessInput, ParseError> {
    let toks = lex(text)?;
    let mut i = 0;
    if matches!(&toks[0].tok, Tok::Ident(s) if s == "new") {
        while i < toks.len() && toks[i].tok != Tok::Dot {
            i += 1;
        }
        i += 1;
    }
    let is_network = matches!(toks.get(i).map(|t| &t.tok), Some(Tok::Ident(_)))
        && matches!(toks.get(i + 1).map(|t| &t.tok), Some(Tok::LBrack));
    if is_network {
        parse_network(text).map(ProcessInput::Network)
    } else {
        parse_process(text).map(ProcessInput::Process)
    }
}

pub fn print_process(p: &Process) -> String {
    let mut out = String::new();
    write_process(p, &mut out);
    out
}

fn write_process(p: &Process, out: &mut String) {
    match p {
        Process::Par(l, r) => {
            write_guarded(l, matches!(**l, Process::Par(..) | Process::Res { .. }), out);
            out.push_str(" | ");
            write_process(r, out);
        }
        Process::Res { binder, body } => {
            out.push_str("new ");
            out.push_str(binder);
            out.push('.');
            match **body {
                Process::Par(..) => write_guarded(body, true, out),
                _ => write_process(body, out),
            }
        }
        Process::Nil => out.push('0'),
        Process::Send {
            subject,
            object,
            cont,
        } => {
            out.push_str(&format!("{}!{}.", subject, object));
            write_continuation(cont, out);
        }
        Process::Recv {
            subject,
            binder,
            cont,
        } => {
            out.push_str(&format!("{}?{}.", subject, binder));
            write_continuation(cont, out);
        }
        Process::LabelSend { subject, branches } | Process::LabelRecv { subject, branches } => {
            let kw = if matches!(p, Process::LabelSend { .. }) {
                "sel"
            } else {
                "bra"
            };
            out.push_str(&format!("{} {}{{", subject, kw));
            for (i, (l, q)) in branches.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(l);
                out.push_str(": ");
                write_process(q, out);
            }
            out.push('}');
        }
    }
}

fn write_guarded(p: &Process, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_process(p, out);
        out.push(')');
    } else {
        write_process(p, out);
    }
}

fn write_continuation(p: &Process, out: &mut String) {
    write_guarded(p, matches!(p, Process::Par(..) | Process::Res { .. }), out);
}

pub fn print_network(n: &Network) -> String {
    let mut out = String::new();
    if !n.restricted.is_empty() {
        out.push_str("new ");
        out.push_str(&n.restricted.join(", "));
        out.push_str(". ");
    }
    let parts: Vec<String> = n
        .components
        .iter()
        .map(|(name, body)| format!("{}[{}]", name, print_process(body)))
        .collect();
    out.push_str(&parts.join(" | "));
    out
}

pub fn print_formula(f: &Formula) -> String {
    match f {
        Formula::Par(a, b) => format!("{} par {}", formula_atom(a), formula_atom(b)),
        Formula::Tensor(a, b) => format!("{} tens {}", formula_atom(a), formula_atom(b)),
        Formula::Prec(a, b) => format!("{} seq {}", formula_atom(a), formula_atom(b)),
        _ => formula_atom(f),
    }
}

fn formula_atom(f: &Formula) -> String {
    match f {
        Formula::Unit => "1".into(),
        Formula::Hole => "[]".into(),
        Formula::Send(x, y) => format!("{}!{}", x, y),
        Formula::Recv(x, y) => format!("{}?{}", x, y),
        Formula::Par(..) | Formula::Tensor(..) | Formula::Prec(..) => format!("({})", print_formula(f)),
        Formula::Oplus(items) | Formula::With(items) => {
            let kw = if matches!(f, Formula::Oplus(_)) {
                "oplus"
            } else {
                "with"
            };
            let parts: Vec<String> = items.iter().map(print_formula).collect();
            format!("{}{{{}}}", kw, parts.join(", "))
        }
        Formula::Forall(x, a) => format!("all {}.{}", x, formula_atom(a)),
        Formula::Exists(x, a) => format!("ex {}.{}", x, formula_atom(a)),
        Formula::New(x, a) => format!("new {}.{}", x, formula_atom(a)),
        Formula::Ya(x, a) => format!("ya {}.{}", x, formula_atom(a)),
    }
}

pub fn print_annotated(f: &Formula, owner: &str) -> String {
    format!("[{}]{}", print_formula(f), owner)
}

pub fn print_choreography(c: &Choreography) -> String {
    match c {
        Choreography::End => "0".into(),
        Choreography::Res { binder, body } => format!("new {}. {}", binder, print_choreography(body)),
        Choreography::Com {
            sender,
            object,
            receiver,
            binder,
            channel,
            cont,
        } => format!(
            "{}.{} -> {}.{} : {} ; {}",
            sender,
            object,
            receiver,
            binder,
            channel,
            print_choreography(cont)
        ),
        Choreography::Choice {
            sender,
            receiver,
            channel,
            selectable,
            garbage,
        } => {
            let sel: Vec<String> = selectable
                .iter()
                .map(|(l, c)| format!("{}: {}", l, print_choreography(c)))
                .collect();
            let mut body = sel.join(", ");
            if !garbage.is_empty() {
                let gar: Vec<String> = garbage
                    .iter()
                    .map(|(l, s)| format!("{}: {}", l, print_process(s)))
                    .collect();
                body.push_str(" | ");
                body.push_str(&gar.join(", "));
            }
            format!("{} -> {} : {} {{ {} }}", sender, receiver, channel, body)
        }
    }
}

pub fn print_derivation(d: &Derivation) -> String {
    serde_json::to_string_pretty(&d.to_json()).unwrap_or_default()
}

pub fn parse_derivation(text: &str) -> Result<Derivation, ParseError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ParseError {
        span: SourceSpan {
            file: "<input>".into(),
            line: e.line().max(1),
            column: e.column().max(1),
        },
        expected: "a JSON derivation".into(),
        found: e.to_string(),
    })?;
    Derivation::from_json(&value)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EQ1: &str = "new x. new y. ( x!a. y sel{l: y!b.0} | x?a. y bra{l: y?b.0, m: z!c.0} )";

    #[test]
    fn process_basics() {
        assert_eq!(parse_process("0").unwrap(), Process::Nil);
        assert_eq!(print_process(&parse_process("((x!y.0))").unwrap()), "x!y.0");
        let three = parse_process("x!a.0 | x?b.0 | x?c.0").unwrap();
        assert_eq!(three.par_components().len(), 3);
        assert!(matches!(three, Process::Par(_, ref r) if matches!(**r, Process::Par(..))));
    }

    #[test]
    fn eq1_structure() {
        let p = parse_process(EQ1).unwrap();
        let expected = Process::res(
            "x",
            Process::res(
                "y",
                Process::par(
                    Process::send("x", "a", Process::sel("y", vec![("l".into(), Process::send("y", "b", Process::Nil))])),
                    Process::recv(
                        "x",
                        "a",
                        Process::bra(
                            "y",
                            vec![
                                ("l".into(), Process::recv("y", "b", Process::Nil)),
                                ("m".into(), Process::send("z", "c", Process::Nil)),
                            ],
                        ),
                    ),
                ),
            ),
        );
        assert_eq!(p, expected);
        assert_eq!(parse_process(&print_process(&p)).unwrap(), p);
    }

    #[test]
    fn process_errors() {
        let e = parse_process("x sel{l: 0, l: 0}").unwrap_err();
        assert_eq!((e.span.line, e.span.column), (1, 13));
        let e = parse_process("x!y.\n  ?").unwrap_err();
        assert_eq!((e.span.line, e.span.column), (2, 3));
        assert!(parse_process("x!y").is_err());
        assert!(parse_process("x!y.0 |").is_err());
    }

    #[test]
    fn left_nested_par_round_trips() {
        let p = Process::par(
            Process::par(Process::send("x", "a", Process::Nil), Process::Nil),
            Process::res("z", Process::send("z", "a", Process::Nil)),
        );
        assert_eq!(parse_process(&print_process(&p)).unwrap(), p);
    }

    #[test]
    fn formula_examples() {
        assert_eq!(parse_formula("1").unwrap(), Formula::Unit);
        let f = parse_formula("(x!y seq 1) par ex z.(x?z seq 1)").unwrap();
        assert_eq!(print_formula(&f), "(x!y seq 1) par ex z.(x?z seq 1)");
        assert!(parse_formula("oplus{}").is_err());
        assert!(parse_formula("1 par 1 par 1").is_err());
        assert_eq!(
            parse_formula("new a.(x!a seq 1)").unwrap(),
            Formula::new_("a", Formula::prec(Formula::send("x", "a"), Formula::Unit))
        );
    }

    #[test]
    fn choreography_examples() {
        assert_eq!(parse_choreography("0").unwrap(), Choreography::End);
        let s = "p.a -> q.a : x ; p -> q : y { l: p.b -> q.b : y ; 0 | m: z!c.0 }";
        let c = parse_choreography(s).unwrap();
        assert_eq!(print_choreography(&c), s);
        let r = parse_choreography("new x. p.a -> q.b : x ; 0").unwrap();
        assert!(matches!(r, Choreography::Res { .. }));
        assert!(parse_choreography("p -> q : y { l: 0 | m: (a!b.0 | c!d.0) }").is_err());
        assert!(parse_choreography("p.a -> p.b : x ; 0").is_err());
    }

    #[test]
    fn network_examples() {
        let n = parse_network("new x y. p[x!a.0] | q[x?b.0]").unwrap();
        assert_eq!(n.restricted, vec!["x".to_string(), "y".to_string()]);
        assert_eq!(print_network(&n), "new x, y. p[x!a.0] | q[x?b.0]");
        assert!(parse_network("p[x!a.0 | x?b.0]").is_err());
        assert!(matches!(
            parse_process_or_network("new x. p[0]").unwrap(),
            ProcessInput::Network(_)
        ));
        assert!(matches!(
            parse_process_or_network("new x. x!a.0").unwrap(),
            ProcessInput::Process(_)
        ));
    }
}
