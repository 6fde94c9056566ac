//! The specification file format: a signature, labels, rules, templates,
//! measures and support maps, plus the tab-separated LTS format.
//!
//! ```text
//! signature { f: 1; g: 1; }
//! labels { l(i); }
//! rule "L": |- g(l1) -[l1]-> l1;
//! template "R" (i >= 1): g^i(x) -[l(i)]-> x |- f(x) -[l1]-> x;
//! strat S0 { g(l1) => 0; f(p) => 1; }
//! eta E { f(x) => {g(x)}; }
//! ```
//!
//! Declarations are read in a first pass, so blocks may come in any order.
//! Identifiers that are neither symbols nor family members are variables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;

use logos::Logos;
use thiserror::Error;

use crate::dyadic::DyadicKind;
use crate::lts::Lts;
use crate::strat::{Clause, MTerm, StratMeasure};
use crate::stypes::EtaMap;
use crate::term::{name, show_tuple, Signature, Symbol, Term, ANY_INDEX};
use crate::tss::{show_ituple, Affine, Formula, ITerm, Ix, Rule, Shape, Template, Tss};

#[derive(Logos, Debug, Clone, PartialEq, Eq)]
#[logos(skip r"[ \t\r\n\f]+")]
#[logos(skip r"#[^\n]*")]
enum Tok {
    #[token("{")]
    LBrace,
    #[token("}")]
    RBrace,
    #[token("(")]
    LParen,
    #[token(")")]
    RParen,
    #[token(",")]
    Comma,
    #[token(";")]
    Semi,
    #[token(":")]
    Colon,
    #[token(".")]
    Dot,
    #[token("^")]
    Caret,
    #[token("+")]
    Plus,
    #[token("-")]
    Minus,
    #[token("|")]
    Bar,
    #[token("-[")]
    LabelOpen,
    #[token("]->")]
    LabelClose,
    #[token("]-/->")]
    NegClose,
    #[token("->")]
    Arrow,
    #[token("|-")]
    Turnstile,
    #[token("=>")]
    FatArrow,
    #[token(">=")]
    Ge,
    #[regex(r"[0-9]+", |lex| lex.slice().parse::<u64>().ok())]
    Nat(u64),
    #[regex(r"[A-Za-z_][A-Za-z0-9_']*", |lex| lex.slice().to_string())]
    Ident(String),
    #[regex(r#""[^"\n]*""#, |lex| { let s = lex.slice(); s[1..s.len() - 1].to_string() })]
    Str(String),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Nat(n) => format!("number `{n}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("\"{s}\""),
            other => format!("`{}`", punct(other)),
        }
    }
}

fn punct(t: &Tok) -> &'static str {
    match t {
        Tok::LBrace => "{",
        Tok::RBrace => "}",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::Comma => ",",
        Tok::Semi => ";",
        Tok::Colon => ":",
        Tok::Dot => ".",
        Tok::Caret => "^",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Bar => "|",
        Tok::LabelOpen => "-[",
        Tok::LabelClose => "]->",
        Tok::NegClose => "]-/->",
        Tok::Arrow => "->",
        Tok::Turnstile => "|-",
        Tok::FatArrow => "=>",
        Tok::Ge => ">=",
        Tok::Nat(_) | Tok::Ident(_) | Tok::Str(_) => "",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Lexical,
    Syntax,
    Arity,
    Undefined,
    NegativePremise,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub kind: ErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// A parsed specification file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecFile {
    pub tss: Tss,
    pub measures: Vec<StratMeasure>,
    pub etas: Vec<EtaMap>,
}

impl SpecFile {
    pub fn measure(&self, name: &str) -> Option<&StratMeasure> {
        self.measures.iter().find(|m| m.name == name)
    }

    pub fn eta(&self, name: &str) -> Option<&EtaMap> {
        self.etas.iter().find(|e| e.name == name)
    }
}

/// Which indices and wildcards a term may use.
#[derive(Debug, Clone, Copy, Default)]
struct Ctx {
    i: bool,
    j: bool,
    any: bool,
}

impl Ctx {
    const PLAIN: Ctx = Ctx { i: false, j: false, any: false };
    const PATTERN: Ctx = Ctx { i: false, j: false, any: true };

    fn allows(self, ix: Ix) -> bool {
        match ix {
            Ix::I => self.i,
            Ix::J => self.j,
        }
    }
}

struct Parser<'s> {
    src: &'s str,
    toks: Vec<(Tok, Range<usize>)>,
    pos: usize,
    sig: Signature,
    shape: Shape,
}

type PResult<T> = Result<T, ParseError>;
/// Plain premises and indexed premise families.
type Premises = (Vec<Formula<ITerm>>, Vec<Formula<ITerm>>);

fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.chars().count(), |n| before[n + 1..].chars().count()) + 1;
    (line, col)
}

fn lex(src: &str) -> PResult<Vec<(Tok, Range<usize>)>> {
    let mut out = Vec::new();
    let mut lexer = Tok::lexer(src);
    while let Some(t) = lexer.next() {
        match t {
            Ok(t) => out.push((t, lexer.span())),
            Err(()) => {
                let (line, col) = position(src, lexer.span().start);
                return Err(ParseError {
                    kind: ErrorKind::Lexical,
                    line,
                    col,
                    message: format!("unexpected character `{}`", lexer.slice()),
                });
            }
        }
    }
    Ok(out)
}

impl<'s> Parser<'s> {
    fn err(&self, kind: ErrorKind, message: impl Into<String>) -> ParseError {
        self.err_at(self.pos, kind, message)
    }

    fn err_at(&self, pos: usize, kind: ErrorKind, message: impl Into<String>) -> ParseError {
        let offset = self.toks.get(pos).map_or(self.src.len(), |(_, r)| r.start);
        let (line, col) = position(self.src, offset);
        ParseError { kind, line, col, message: message.into() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(t, _)| t)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", punct(t))))
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.err(ErrorKind::Syntax, format!("expected {wanted}, found {}", t.describe())),
            None => self.err(ErrorKind::Syntax, format!("expected {wanted}, found end of input")),
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    fn nat(&mut self) -> PResult<u64> {
        match self.peek() {
            Some(Tok::Nat(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn rule_name(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Str(s)) | Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("a rule name")),
        }
    }

    /// Skips one block in the first pass.
    fn skip_block(&mut self) -> PResult<()> {
        let mut depth = 0usize;
        while let Some(t) = self.bump() {
            match t {
                Tok::LBrace => depth += 1,
                Tok::RBrace => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 && matches!(self.toks.get(self.pos - 1), Some((Tok::RBrace, _))) {
                        // A brace-delimited block ends at its closing brace
                        // unless a `;` follows inside a rule.
                        if !self.in_rule_block() {
                            return Ok(());
                        }
                    }
                }
                Tok::Semi if depth == 0 => return Ok(()),
                _ => {}
            }
        }
        Ok(())
    }

    fn in_rule_block(&self) -> bool {
        // Rules and templates end with `;`; their braces are premise families.
        let mut k = self.pos;
        while k > 0 {
            k -= 1;
            if let (Tok::Ident(s), _) = &self.toks[k] {
                if matches!(s.as_str(), "rule" | "template" | "strat" | "eta" | "signature" | "labels" | "dyadic") {
                    let at_block_start = k == 0 || matches!(self.toks[k - 1].0, Tok::Semi | Tok::RBrace);
                    if at_block_start {
                        return matches!(s.as_str(), "rule" | "template");
                    }
                }
            }
        }
        false
    }

    fn declarations(&mut self) -> PResult<()> {
        while let Some(t) = self.peek().cloned() {
            match t {
                Tok::Ident(kw) if kw == "signature" => {
                    self.pos += 1;
                    self.signature_block()?;
                }
                Tok::Ident(kw) if kw == "labels" => {
                    self.pos += 1;
                    self.labels_block()?;
                }
                Tok::Ident(kw) if kw == "dyadic" => {
                    self.pos += 1;
                    let start = self.pos;
                    let k = self.ident()?;
                    self.expect(&Tok::Dot)?;
                    let p = self.ident()?;
                    let kind: DyadicKind = format!("{k}.{p}").parse().map_err(|_| {
                        self.err_at(start, ErrorKind::Invalid, format!("unknown dyadic kind `{k}.{p}`"))
                    })?;
                    self.shape = Shape::Dyadic(kind);
                    self.expect(&Tok::Semi)?;
                }
                Tok::Ident(kw) if matches!(kw.as_str(), "rule" | "template" | "strat" | "eta") => {
                    self.pos += 1;
                    self.skip_block()?;
                }
                _ => return Err(self.unexpected("a block keyword")),
            }
        }
        Ok(())
    }

    fn signature_block(&mut self) -> PResult<()> {
        self.expect(&Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            let at = self.pos;
            let f = self.ident()?;
            self.expect(&Tok::Colon)?;
            let n = self.nat()?;
            self.expect(&Tok::Semi)?;
            self.sig
                .add_symbol(Symbol { name: name(&f), arity: n as usize, label: false })
                .map_err(|e| self.err_at(at, ErrorKind::Invalid, e.to_string()))?;
        }
        Ok(())
    }

    fn labels_block(&mut self) -> PResult<()> {
        self.expect(&Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            let at = self.pos;
            let l = self.ident()?;
            if self.eat(&Tok::LParen) {
                let ix = self.ident()?;
                if ix != "i" {
                    return Err(self.err(ErrorKind::Syntax, "an indexed label family is written `name(i)`"));
                }
                self.expect(&Tok::RParen)?;
                if self.sig.family().is_some() {
                    return Err(self.err_at(at, ErrorKind::Invalid, "only one indexed family is supported"));
                }
                self.sig.set_family(&l).map_err(|e| self.err_at(at, ErrorKind::Invalid, e.to_string()))?;
            } else {
                self.sig
                    .add_symbol(Symbol { name: name(&l), arity: 0, label: true })
                    .map_err(|e| self.err_at(at, ErrorKind::Invalid, e.to_string()))?;
            }
            self.expect(&Tok::Semi)?;
        }
        Ok(())
    }

    fn affine(&mut self, ctx: Ctx) -> PResult<Affine> {
        let at = self.pos;
        let base = match self.bump() {
            Some(Tok::Nat(n)) => return Ok(Affine::constant(n as i64)),
            Some(Tok::Ident(s)) if s == "i" => Ix::I,
            Some(Tok::Ident(s)) if s == "j" => Ix::J,
            _ => {
                self.pos = at;
                return Err(self.unexpected("an index expression"));
            }
        };
        if !ctx.allows(base) {
            return Err(self.err_at(at, ErrorKind::Invalid, format!("index `{base}` is not bound here")));
        }
        let offset = if self.eat(&Tok::Plus) {
            self.nat()? as i64
        } else if self.eat(&Tok::Minus) {
            -(self.nat()? as i64)
        } else {
            0
        };
        Ok(Affine::index(base, offset))
    }

    fn exponent(&mut self, ctx: Ctx) -> PResult<Affine> {
        if self.eat(&Tok::LParen) {
            let a = self.affine(ctx)?;
            self.expect(&Tok::RParen)?;
            Ok(a)
        } else if self.eat(&Tok::LBrace) {
            let a = self.affine(ctx)?;
            self.expect(&Tok::RBrace)?;
            Ok(a)
        } else {
            let at = self.pos;
            let a = self.affine(ctx)?;
            if a.var.is_some() && a.offset != 0 {
                return Err(self.err_at(at, ErrorKind::Syntax, "write offset exponents in parentheses, as `g^(i+1)`"));
            }
            Ok(a)
        }
    }

    fn iterm(&mut self, ctx: Ctx) -> PResult<ITerm> {
        let at = self.pos;
        let id = self.ident()?;
        if self.eat(&Tok::Caret) {
            let e = self.exponent(ctx)?;
            match self.sig.symbol(&id) {
                Some(s) if s.arity == 1 => {}
                Some(s) => {
                    return Err(self.err_at(
                        at,
                        ErrorKind::Arity,
                        format!("`{id}` has arity {}, powers need a unary symbol", s.arity),
                    ))
                }
                None => return Err(self.err_at(at, ErrorKind::Undefined, format!("undefined symbol `{id}`"))),
            }
            self.expect(&Tok::LParen)?;
            let inner = self.iterm(ctx)?;
            self.expect(&Tok::RParen)?;
            return Ok(ITerm::Pow(name(&id), e, Box::new(inner)));
        }
        if self.sig.family().is_some_and(|f| **f == *id) {
            self.expect(&Tok::LParen)?;
            let a = if matches!(self.peek(), Some(Tok::Ident(s)) if s == "_") {
                if !ctx.any {
                    return Err(self.err(ErrorKind::Invalid, "the index wildcard `_` is only allowed in patterns"));
                }
                self.pos += 1;
                Affine::constant(ANY_INDEX as i64)
            } else {
                self.affine(ctx)?
            };
            self.expect(&Tok::RParen)?;
            return Ok(ITerm::Fam(name(&id), a));
        }
        if let Some(n) = self.sig.family_member(&id) {
            return Ok(ITerm::Fam(self.sig.family().unwrap().clone(), Affine::constant(n as i64)));
        }
        if self.peek() == Some(&Tok::LParen) {
            let Some(sym) = self.sig.symbol(&id).cloned() else {
                return Err(self.err_at(at, ErrorKind::Undefined, format!("undefined symbol `{id}`")));
            };
            self.pos += 1;
            let mut args = Vec::new();
            if !self.eat(&Tok::RParen) {
                loop {
                    args.push(self.iterm(ctx)?);
                    if self.eat(&Tok::RParen) {
                        break;
                    }
                    self.expect(&Tok::Comma)?;
                }
            }
            if args.len() != sym.arity {
                return Err(self.err_at(
                    at,
                    ErrorKind::Arity,
                    format!("`{id}` takes {} argument(s), found {}", sym.arity, args.len()),
                ));
            }
            return Ok(ITerm::App(name(&id), args));
        }
        if let Some(sym) = self.sig.symbol(&id) {
            if sym.arity != 0 {
                return Err(self.err_at(
                    at,
                    ErrorKind::Arity,
                    format!("`{id}` takes {} argument(s), found 0", sym.arity),
                ));
            }
            return Ok(ITerm::App(name(&id), vec![]));
        }
        if id == "_" {
            return Err(self.err_at(at, ErrorKind::Syntax, "`_` is only allowed as a family index"));
        }
        for ix in [Ix::I, Ix::J] {
            if ctx.allows(ix) {
                if let Some(base) = id.strip_suffix(&format!("_{ix}")) {
                    if !base.is_empty() {
                        return Ok(ITerm::IVar(name(base), ix));
                    }
                }
            }
        }
        Ok(ITerm::Var(name(&id)))
    }

    fn term(&mut self, ctx: Ctx) -> PResult<Term> {
        let t = self.iterm(Ctx { i: false, j: false, ..ctx })?;
        Ok(plain(&t))
    }

    fn tuple(&mut self, ctx: Ctx) -> PResult<Vec<ITerm>> {
        if self.eat(&Tok::LParen) {
            let mut out = vec![self.iterm(ctx)?];
            while self.eat(&Tok::Comma) {
                out.push(self.iterm(ctx)?);
            }
            self.expect(&Tok::RParen)?;
            Ok(out)
        } else {
            Ok(vec![self.iterm(ctx)?])
        }
    }

    fn formula(&mut self, ctx: Ctx) -> PResult<Formula<ITerm>> {
        let at = self.pos;
        match self.shape {
            Shape::Triadic => {
                let s = self.iterm(ctx)?;
                self.expect(&Tok::LabelOpen)?;
                let l = self.iterm(ctx)?;
                if self.eat(&Tok::NegClose) {
                    return Err(self.err_at(
                        at,
                        ErrorKind::NegativePremise,
                        "negative premises are not supported; only positive premises are read",
                    ));
                }
                self.expect(&Tok::LabelClose)?;
                let t = self.iterm(ctx)?;
                Ok(Formula::new(vec![s], vec![l, t]))
            }
            Shape::Dyadic(k) => {
                let s = self.tuple(ctx)?;
                self.expect(&Tok::Arrow)?;
                let t = self.tuple(ctx)?;
                let (sa, ta) = k.arities();
                if s.len() != sa || t.len() != ta {
                    return Err(self.err_at(
                        at,
                        ErrorKind::Arity,
                        format!("{k} formulas have shape {sa}/{ta}, found {}/{}", s.len(), t.len()),
                    ));
                }
                Ok(Formula::new(s, t))
            }
        }
    }

    /// Premises before `|-`: plain formulas and families `{ ... | j }`.
    fn premises(&mut self, ctx: Ctx) -> PResult<Premises> {
        let mut plain_ps = Vec::new();
        let mut fams = Vec::new();
        if self.eat(&Tok::Turnstile) {
            return Ok((plain_ps, fams));
        }
        loop {
            if self.eat(&Tok::LBrace) {
                let f = self.formula(Ctx { j: true, ..ctx })?;
                self.expect(&Tok::Bar)?;
                match self.bump() {
                    Some(Tok::Ident(j)) if j == "j" => {}
                    _ => {
                        self.pos -= 1;
                        return Err(self.unexpected("`j`"));
                    }
                }
                self.expect(&Tok::RBrace)?;
                fams.push(f);
            } else {
                plain_ps.push(self.formula(ctx)?);
            }
            if self.eat(&Tok::Turnstile) {
                return Ok((plain_ps, fams));
            }
            self.expect(&Tok::Comma)?;
        }
    }

    fn rule(&mut self) -> PResult<Rule> {
        let name = self.rule_name()?;
        self.expect(&Tok::Colon)?;
        let (ps, fams) = self.premises(Ctx::PLAIN)?;
        let c = self.formula(Ctx::PLAIN)?;
        self.expect(&Tok::Semi)?;
        Ok(Rule { name, premises: ps.iter().map(|f| f.map(plain)).collect(), families: fams, conclusion: c.map(plain) })
    }

    fn template(&mut self) -> PResult<Template> {
        let name = self.rule_name()?;
        self.expect(&Tok::LParen)?;
        match self.bump() {
            Some(Tok::Ident(i)) if i == "i" => {}
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("`i`"));
            }
        }
        let start = if self.eat(&Tok::Ge) { self.nat()? } else { 0 };
        self.expect(&Tok::RParen)?;
        self.expect(&Tok::Colon)?;
        let ctx = Ctx { i: true, j: false, any: false };
        let (premises, families) = self.premises(ctx)?;
        let conclusion = self.formula(ctx)?;
        self.expect(&Tok::Semi)?;
        Ok(Template { name, start, premises, families, conclusion })
    }

    fn pattern_tuple(&mut self) -> PResult<Vec<Term>> {
        if self.eat(&Tok::LParen) {
            let mut out = vec![self.term(Ctx::PATTERN)?];
            while self.eat(&Tok::Comma) {
                out.push(self.term(Ctx::PATTERN)?);
            }
            self.expect(&Tok::RParen)?;
            Ok(out)
        } else {
            Ok(vec![self.term(Ctx::PATTERN)?])
        }
    }

    fn strat(&mut self) -> PResult<StratMeasure> {
        let mname = self.ident()?;
        self.expect(&Tok::LBrace)?;
        let mut m = StratMeasure::new(&mname);
        while !self.eat(&Tok::RBrace) {
            let pattern = self.pattern_tuple()?;
            self.expect(&Tok::FatArrow)?;
            let mut expr = Vec::new();
            loop {
                match self.peek().cloned() {
                    Some(Tok::Nat(n)) => {
                        self.pos += 1;
                        expr.push(MTerm::Nat(n));
                    }
                    Some(Tok::Ident(c)) if self.peek_at(1) == Some(&Tok::LParen) => {
                        if c != "S" && c != mname {
                            return Err(self.err(ErrorKind::Undefined, format!("`{c}` is not the measure `{mname}`")));
                        }
                        self.pos += 2;
                        let mut args = vec![self.term(Ctx::PATTERN)?];
                        while self.eat(&Tok::Comma) {
                            args.push(self.term(Ctx::PATTERN)?);
                        }
                        self.expect(&Tok::RParen)?;
                        expr.push(MTerm::Call(args));
                    }
                    _ => return Err(self.unexpected("a number or a recursive call")),
                }
                if !self.eat(&Tok::Plus) {
                    break;
                }
            }
            self.expect(&Tok::Semi)?;
            m.clauses.push(Clause { pattern, expr });
        }
        Ok(m)
    }

    fn eta(&mut self) -> PResult<EtaMap> {
        let ename = self.ident()?;
        self.expect(&Tok::LBrace)?;
        let mut e = EtaMap::new(&ename);
        while !self.eat(&Tok::RBrace) {
            let s = self.term(Ctx::PATTERN)?;
            self.expect(&Tok::FatArrow)?;
            self.expect(&Tok::LBrace)?;
            let mut img = Vec::new();
            while !self.eat(&Tok::RBrace) {
                img.push(self.term(Ctx::PATTERN)?);
                self.eat(&Tok::Comma);
            }
            self.expect(&Tok::Semi)?;
            e.entries.insert(s, img);
        }
        Ok(e)
    }

    fn body(&mut self) -> PResult<SpecFile> {
        let mut tss = Tss::new(self.sig.clone());
        tss.shape = self.shape;
        let mut measures: Vec<StratMeasure> = Vec::new();
        let mut etas: Vec<EtaMap> = Vec::new();
        let mut names: BTreeMap<String, usize> = BTreeMap::new();
        while let Some(Tok::Ident(kw)) = self.peek().cloned() {
            let at = self.pos;
            self.pos += 1;
            match kw.as_str() {
                "signature" | "labels" => {
                    self.skip_block()?;
                }
                "dyadic" => while self.bump().is_some_and(|t| t != Tok::Semi) {},
                "rule" => {
                    let r = self.rule()?;
                    if names.insert(r.name.clone(), at).is_some() {
                        return Err(self.err_at(
                            at,
                            ErrorKind::Invalid,
                            format!("rule name `{}` is used twice", r.name),
                        ));
                    }
                    tss.rules.push(r);
                }
                "template" => {
                    let t = self.template()?;
                    if names.insert(t.name.clone(), at).is_some() {
                        return Err(self.err_at(
                            at,
                            ErrorKind::Invalid,
                            format!("rule name `{}` is used twice", t.name),
                        ));
                    }
                    tss.templates.push(t);
                }
                "strat" => {
                    let m = self.strat()?;
                    if measures.iter().any(|x| x.name == m.name) {
                        return Err(self.err_at(
                            at,
                            ErrorKind::Invalid,
                            format!("measure `{}` is defined twice", m.name),
                        ));
                    }
                    measures.push(m);
                }
                "eta" => {
                    let e = self.eta()?;
                    if etas.iter().any(|x| x.name == e.name) {
                        return Err(self.err_at(
                            at,
                            ErrorKind::Invalid,
                            format!("support map `{}` is defined twice", e.name),
                        ));
                    }
                    etas.push(e);
                }
                _ => {
                    self.pos = at;
                    return Err(self.unexpected("a block keyword"));
                }
            }
        }
        if self.pos < self.toks.len() {
            return Err(self.unexpected("a block keyword"));
        }
        Ok(SpecFile { tss, measures, etas })
    }
}

/// Converts a term without indices; the index wildcard survives as
/// [`ANY_INDEX`] and constant powers are unfolded.
fn plain(t: &ITerm) -> Term {
    match t {
        ITerm::Var(v) => Term::Var(v.clone()),
        ITerm::IVar(v, ix) => Term::Var(name(&format!("{v}_{ix}"))),
        ITerm::App(f, args) => Term::App(f.clone(), args.iter().map(plain).collect()),
        ITerm::Fam(l, a) => Term::Fam(l.clone(), a.offset.clamp(0, ANY_INDEX as i64) as u32),
        ITerm::Pow(g, a, inner) => {
            let mut acc = plain(inner);
            for _ in 0..a.offset.max(0) {
                acc = Term::App(g.clone(), vec![acc]);
            }
            acc
        }
    }
}

/// Parses a specification file.
pub fn parse_spec_file(text: &str) -> Result<SpecFile, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { src: text, toks, pos: 0, sig: Signature::new(), shape: Shape::Triadic };
    p.declarations()?;
    p.pos = 0;
    p.body()
}

fn render_formula_i(shape: Shape, f: &Formula<ITerm>) -> String {
    match shape {
        Shape::Triadic => format!("{} -[{}]-> {}", f.source[0], f.target[0], f.target[1]),
        Shape::Dyadic(_) => format!("{} -> {}", show_ituple(&f.source), show_ituple(&f.target)),
    }
}

fn render_formula(shape: Shape, f: &Formula<Term>) -> String {
    match shape {
        Shape::Triadic => format!("{} -[{}]-> {}", f.source[0], f.target[0], f.target[1]),
        Shape::Dyadic(_) => format!("{} -> {}", show_tuple(&f.source), show_tuple(&f.target)),
    }
}

fn quote(s: &str) -> String {
    format!("\"{s}\"")
}

/// Renders a specification file; parsing the result gives back `spec`.
pub fn render_spec_file(spec: &SpecFile) -> String {
    let mut out = String::new();
    let tss = &spec.tss;
    let sig = &tss.signature;
    let (labels, syms): (Vec<&Symbol>, Vec<&Symbol>) = sig.symbols().partition(|s| s.label && s.arity == 0);
    if !syms.is_empty() {
        out.push_str("signature {\n");
        for s in syms {
            let _ = writeln!(out, "  {}: {};", s.name, s.arity);
        }
        out.push_str("}\n");
    }
    if !labels.is_empty() || sig.family().is_some() {
        out.push_str("labels {\n");
        for s in labels {
            let _ = writeln!(out, "  {};", s.name);
        }
        if let Some(f) = sig.family() {
            let _ = writeln!(out, "  {f}(i);");
        }
        out.push_str("}\n");
    }
    if let Shape::Dyadic(k) = tss.shape {
        let _ = writeln!(out, "dyadic {k};");
    }
    let premises = |ps: Vec<String>| if ps.is_empty() { String::new() } else { format!("{} ", ps.join(", ")) };
    let family = |f: &Formula<ITerm>| format!("{{ {} | j }}", render_formula_i(tss.shape, f));
    for r in &tss.rules {
        let mut ps: Vec<String> = r.premises.iter().map(|p| render_formula(tss.shape, p)).collect();
        ps.extend(r.families.iter().map(family));
        let _ =
            writeln!(out, "rule {}: {}|- {};", quote(&r.name), premises(ps), render_formula(tss.shape, &r.conclusion));
    }
    for t in &tss.templates {
        let mut ps: Vec<String> = t.premises.iter().map(|p| render_formula_i(tss.shape, p)).collect();
        ps.extend(t.families.iter().map(family));
        let head = if t.start == 0 { "(i)".to_string() } else { format!("(i >= {})", t.start) };
        let _ = writeln!(
            out,
            "template {} {head}: {}|- {};",
            quote(&t.name),
            premises(ps),
            render_formula_i(tss.shape, &t.conclusion)
        );
    }
    for m in &spec.measures {
        let _ = writeln!(out, "{m}");
    }
    for e in &spec.etas {
        let _ = writeln!(out, "{e}");
    }
    out
}

/// Renders a dyadic or triadic specification without measures.
pub fn render_tss(tss: &Tss) -> String {
    render_spec_file(&SpecFile { tss: tss.clone(), measures: vec![], etas: vec![] })
}

/// Parses `source TAB label TAB target` lines. Terms are read without a
/// signature: `name digits` is a family member and other bare names are
/// constants.
pub fn parse_lts_tsv(text: &str) -> Result<Lts, ParseError> {
    let mut ts = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(ParseError {
                kind: ErrorKind::Syntax,
                line: n + 1,
                col: 1,
                message: format!("expected 3 tab-separated columns, found {}", cols.len()),
            });
        }
        let mut terms = Vec::new();
        let mut col = 1;
        for c in &cols {
            let t = closed_term(c).map_err(|(off, message)| ParseError {
                kind: ErrorKind::Syntax,
                line: n + 1,
                col: col + off,
                message,
            })?;
            terms.push(t);
            col += c.chars().count() + 1;
        }
        let t2 = terms.pop().unwrap();
        let l = terms.pop().unwrap();
        let t = terms.pop().unwrap();
        ts.push(Formula::triadic(t, l, t2));
    }
    Ok(Lts::from_triadic(ts))
}

fn closed_term(s: &str) -> Result<Term, (usize, String)> {
    let toks = lex(s).map_err(|e| (e.col - 1, e.message))?;
    let mut pos = 0;
    let t = closed_at(&toks, &mut pos, s)?;
    if pos != toks.len() {
        return Err((toks[pos].1.start, "trailing input after term".into()));
    }
    Ok(t)
}

fn closed_at(toks: &[(Tok, Range<usize>)], pos: &mut usize, s: &str) -> Result<Term, (usize, String)> {
    let Some((Tok::Ident(id), span)) = toks.get(*pos) else {
        let off = toks.get(*pos).map_or(s.len(), |(_, r)| r.start);
        return Err((off, "expected a term".into()));
    };
    *pos += 1;
    if toks.get(*pos).map(|(t, _)| t) == Some(&Tok::LParen) {
        *pos += 1;
        let mut args = Vec::new();
        loop {
            args.push(closed_at(toks, pos, s)?);
            match toks.get(*pos).map(|(t, _)| t) {
                Some(Tok::Comma) => *pos += 1,
                Some(Tok::RParen) => {
                    *pos += 1;
                    break;
                }
                _ => return Err((span.start, format!("unterminated arguments of `{id}`"))),
            }
        }
        return Ok(Term::App(name(id), args));
    }
    let digits = id.trim_start_matches(|c: char| !c.is_ascii_digit());
    let stem = &id[..id.len() - digits.len()];
    if !stem.is_empty()
        && !digits.is_empty()
        && digits.bytes().all(|b| b.is_ascii_digit())
        && (digits == "0" || !digits.starts_with('0'))
    {
        if let Ok(i) = digits.parse() {
            return Ok(Term::Fam(name(stem), i));
        }
    }
    Ok(Term::App(name(id), vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX6: &str = r#"
# stratification example
signature { f: 1; g: 1; }
labels { l(i); }
rule "L": |- g(l1) -[l1]-> l1;
template "R" (i >= 1): g^i(x) -[l(i)]-> x |- f(x) -[l1]-> x;
strat S0 { g(l1) => 0; f(p) => 1; }
eta E { f(x) => {g(x)}; }
"#;

    #[test]
    fn parses_and_round_trips() {
        let spec = parse_spec_file(EX6).unwrap();
        assert_eq!(spec.tss.rules.len(), 1);
        assert_eq!(spec.tss.templates[0].start, 1);
        assert_eq!(spec.measure("S0").unwrap().clauses.len(), 2);
        assert_eq!(spec.eta("E").unwrap().entries.len(), 1);
        let r1 = spec.tss.templates[0].instance(2).unwrap();
        assert_eq!(r1.premises[0].to_string(), "g(g(x)) -> (l2, x)");
        let text = render_spec_file(&spec);
        assert_eq!(parse_spec_file(&text).unwrap(), spec);
    }

    #[test]
    fn empty_file_is_empty_tss() {
        let spec = parse_spec_file("  # nothing\n").unwrap();
        assert!(spec.tss.is_empty() && spec.measures.is_empty());
    }

    #[test]
    fn declarations_may_follow_rules() {
        let spec = parse_spec_file("rule A: |- f(x) -[c]-> x;\nsignature { f: 1; }\nlabels { c; }").unwrap();
        assert_eq!(spec.tss.rules[0].conclusion.to_string(), "f(x) -> (c, x)");
    }

    #[test]
    fn negative_premise_is_rejected() {
        let e =
            parse_spec_file("signature { f: 1; }\nlabels { a; }\nrule N: x -[a]-/-> y |- f(x) -[a]-> x;").unwrap_err();
        assert_eq!(e.kind, ErrorKind::NegativePremise);
        assert_eq!((e.line, e.col), (3, 9));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_spec_file("signature { f: 1; }\nrule A: |- f(x, x) -[f]-> x;").unwrap_err();
        assert_eq!(e.kind, ErrorKind::Arity);
        assert_eq!((e.line, e.col), (2, 12));
        let e = parse_spec_file("rule A: |- h(x) -[x]-> x;").unwrap_err();
        assert_eq!(e.kind, ErrorKind::Undefined);
        let e = parse_spec_file("rule A: |- x -[x]-> x; $").unwrap_err();
        assert_eq!(e.kind, ErrorKind::Lexical);
        assert_eq!(e.to_string(), "1:24: unexpected character `$`");
    }

    #[test]
    fn template_index_forms() {
        let src = "signature { g: 1; f: 1; }\nlabels { l(i); }\ntemplate T (i): { l1 -[l(j)]-> l(j) | j }, x -[l(i+1)]-> y_i |- f(x) -[l(i)]-> g^(i+1)(y_i);";
        let spec = parse_spec_file(src).unwrap();
        let t = &spec.tss.templates[0];
        assert_eq!(t.families.len(), 1);
        assert_eq!(t.premises[0].target[1], ITerm::IVar(name("y"), Ix::I));
        let r = t.instance(1).unwrap();
        assert_eq!(r.conclusion.to_string(), "f(x) -> (l1, g(g(y_1)))");
        assert_eq!(parse_spec_file(&render_spec_file(&spec)).unwrap(), spec);
    }

    #[test]
    fn dyadic_files_round_trip() {
        let src = "signature { f: 1; }\nlabels { l(i); }\ndyadic d4.id;\nrule A: |- (x, l1) -> f(x);";
        let spec = parse_spec_file(src).unwrap();
        assert_eq!(spec.tss.shape, Shape::Dyadic(DyadicKind::D4));
        assert_eq!(parse_spec_file(&render_spec_file(&spec)).unwrap(), spec);
        let e = parse_spec_file("dyadic d4.id;\nrule A: |- x -> x;").unwrap_err();
        assert_eq!(e.kind, ErrorKind::Arity);
    }

    #[test]
    fn lts_tsv_round_trip() {
        let lts = parse_lts_tsv("p0\tl1\tp1\nf(a)\tb\tg(l3, c)\n").unwrap();
        assert_eq!(lts.len(), 2);
        assert_eq!(parse_lts_tsv(&lts.to_tsv()).unwrap(), lts);
        assert_eq!(parse_lts_tsv("a\tb\n").unwrap_err().line, 1);
    }
}
