//! Concrete syntax of signature and rule files.
//!
//! ```text
//! -- division
//! type nat : *
//! constructor 0 : nat^0
//! constructor s : nat^a => nat^(s a) acc(1)
//! fun - : nat^a => nat^b => nat^a status lex(mult(1))
//! prec - > s
//! rule - (s x) (s y) -> - x y where x : nat^d, y : nat^e sizes { a := s d, b := s e }
//! ```
//!
//! Files are parsed in two passes: declarations are read first, then every
//! name is resolved, so a symbol may be used before it is declared. Inside a
//! term, binders shadow rule variables, which shadow symbols.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::metric::{placeholder, Metric};
use crate::signature::{PrecChain, PrecOp, Precedence, Signature, SizeSymbolDecl, SymbolDecl, SymbolKind};
use crate::size::{is_builtin_symbol, SizeExpr, SizeSubst, MAX, PLUS, TIMES};
use crate::term::{Env, Sort, Term};
use crate::termination::Rule;
use crate::Name;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{location}: {message}")]
pub struct ParseError {
    pub location: Location,
    pub message: String,
}

fn error<T>(location: Location, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { location, message: message.into() })
}

/// A parsed file: the signature, its rules in file order, and where each
/// declaration starts.
#[derive(Clone, Debug, Default)]
pub struct SpecFile {
    pub signature: Signature,
    pub rules: Vec<Rule>,
    /// Start of each symbol and size symbol declaration.
    pub declarations: BTreeMap<String, Location>,
    /// Start of each rule, in rule order.
    pub rule_locations: Vec<Location>,
}

impl PartialEq for SpecFile {
    fn eq(&self, other: &SpecFile) -> bool {
        self.signature == other.signature && self.rules == other.rules
    }
}

impl Eq for SpecFile {}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Placeholder(usize),
    Star,
    Box,
    Arrow,
    DArrow,
    Gt,
    Tilde,
    Colon,
    Assign,
    Caret,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Placeholder(i) => return write!(f, "`#{i}`"),
            Tok::Star => "`*`",
            Tok::Box => "`□`",
            Tok::Arrow => "`->`",
            Tok::DArrow => "`=>`",
            Tok::Gt => "`>`",
            Tok::Tilde => "`~`",
            Tok::Colon => "`:`",
            Tok::Assign => "`:=`",
            Tok::Caret => "`^`",
            Tok::Comma => "`,`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

const OP_CHARS: &str = "+-/<>=~!?&|%$@.";

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<(Tok, Location)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let at = Location { line, column: col };
        let start = i;
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let tok = if is_ident_char(c) {
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if OP_CHARS.contains(c) {
            while i < chars.len() && OP_CHARS.contains(chars[i]) {
                if chars[i] == '-' && chars.get(i + 1) == Some(&'-') && i > start {
                    break;
                }
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            match s.as_str() {
                "->" => Tok::Arrow,
                "=>" => Tok::DArrow,
                ">" => Tok::Gt,
                "~" => Tok::Tilde,
                _ => Tok::Ident(s),
            }
        } else if c == '#' {
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start + 1..i].iter().collect();
            match digits.parse() {
                Ok(n) => Tok::Placeholder(n),
                Err(_) => return error(at, "`#` must be followed by an argument index"),
            }
        } else if c == ':' && chars.get(i + 1) == Some(&'=') {
            i += 2;
            Tok::Assign
        } else {
            i += 1;
            match c {
                '*' | '★' => Tok::Star,
                '□' => Tok::Box,
                '⇒' => Tok::DArrow,
                '→' => Tok::Arrow,
                '∞' => Tok::Ident("inf".into()),
                ':' => Tok::Colon,
                '^' => Tok::Caret,
                ',' => Tok::Comma,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                _ => return error(at, format!("unexpected character `{c}`")),
            }
        };
        col += i - start;
        out.push((tok, at));
    }
    out.push((Tok::Eof, Location { line, column: col }));
    Ok(out)
}

/// Words that end a term and cannot name symbols.
const KEYWORDS: [&str; 15] = [
    "size",
    "type",
    "constructor",
    "fun",
    "prec",
    "rule",
    "where",
    "sizes",
    "psi",
    "acc",
    "status",
    "metric",
    "monotone",
    "antimonotone",
    "inf",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

// ---------------------------------------------------------------------------
// Unresolved syntax

#[derive(Clone, Debug)]
enum Raw {
    Sort(Sort),
    Name(String, Location),
    Sized(String, SizeExpr, Location),
    Abs(String, Box<Raw>, Box<Raw>),
    Prod(String, Box<Raw>, Box<Raw>),
    Arrow(Box<Raw>, Box<Raw>),
    App(Box<Raw>, Box<Raw>),
}

/// `a := e` entries of a `sizes` or `psi` block.
type RawSubst = Vec<(String, SizeExpr, Location)>;

#[derive(Clone, Debug)]
enum RawDecl {
    Size { name: String, arity: usize, monotone: Vec<usize>, antimonotone: Vec<usize> },
    Symbol {
        name: String,
        kind: RawKind,
        ty: Raw,
        acc: Vec<usize>,
        metric: Option<Metric>,
        monotone: Vec<usize>,
        antimonotone: Vec<usize>,
    },
    Prec(Vec<(Option<PrecOp>, String, Location)>),
    Rule {
        lhs: Raw,
        rhs: Raw,
        env: Vec<(String, Raw, Location)>,
        phi: RawSubst,
        psi: Vec<(String, Location, RawSubst)>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RawKind {
    Type,
    Constructor,
    Function,
}

struct Parser {
    toks: Vec<(Tok, Location)>,
    pos: usize,
    /// Whether `#i` placeholders may appear in size expressions.
    placeholders: bool,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, ParseError> {
        Ok(Parser { toks: lex(text)?, pos: 0, placeholders: false })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn loc(&self) -> Location {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Location) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        error(self.loc(), format!("expected {wanted}, found {}", self.peek()))
    }

    fn expect(&mut self, tok: Tok) -> Result<Location, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.unexpected(&tok.to_string())
        }
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.at_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<(), ParseError> {
        if self.eat_word(w) {
            Ok(())
        } else {
            self.unexpected(&format!("`{w}`"))
        }
    }

    /// A name that is not a keyword.
    fn name(&mut self) -> Result<(String, Location), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                let at = self.bump().1;
                Ok((s, at))
            }
            _ => self.unexpected("a name"),
        }
    }

    fn nat(&mut self) -> Result<usize, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => match s.parse() {
                Ok(n) => {
                    self.bump();
                    Ok(n)
                }
                Err(_) => self.unexpected("a number"),
            },
            _ => self.unexpected("a number"),
        }
    }

    /// `( NAT? (, NAT)* )`
    fn nat_list(&mut self) -> Result<Vec<usize>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if *self.peek() != Tok::RParen {
            out.push(self.nat()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                out.push(self.nat()?);
            }
        }
        self.expect(Tok::RParen)?;
        Ok(out)
    }

    // -- terms

    fn at_binder(&self) -> bool {
        matches!(self.peek(), Tok::LParen | Tok::LBracket)
            && matches!(self.peek_at(1), Tok::Ident(s) if !is_keyword(s))
            && *self.peek_at(2) == Tok::Colon
    }

    fn term(&mut self) -> Result<Raw, ParseError> {
        if self.at_binder() {
            let open = self.bump().0;
            let (x, _) = self.name()?;
            self.expect(Tok::Colon)?;
            let dom = self.term()?;
            let abs = open == Tok::LBracket;
            self.expect(if abs { Tok::RBracket } else { Tok::RParen })?;
            let body = self.term()?;
            return Ok(if abs {
                Raw::Abs(x, Box::new(dom), Box::new(body))
            } else {
                Raw::Prod(x, Box::new(dom), Box::new(body))
            });
        }
        let head = self.application()?;
        if *self.peek() == Tok::DArrow {
            self.bump();
            let cod = self.term()?;
            return Ok(Raw::Arrow(Box::new(head), Box::new(cod)));
        }
        Ok(head)
    }

    fn at_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !is_keyword(s),
            Tok::LParen => !self.at_binder(),
            Tok::Star | Tok::Box => true,
            _ => false,
        }
    }

    fn application(&mut self) -> Result<Raw, ParseError> {
        if !self.at_atom() {
            return self.unexpected("a term");
        }
        let mut t = self.atom()?;
        while self.at_atom() {
            let u = self.atom()?;
            t = Raw::App(Box::new(t), Box::new(u));
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Raw, ParseError> {
        match self.peek().clone() {
            Tok::Star => {
                self.bump();
                Ok(Raw::Sort(Sort::Star))
            }
            Tok::Box => {
                self.bump();
                Ok(Raw::Sort(Sort::Box))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(_) => {
                let (name, at) = self.name()?;
                if *self.peek() == Tok::Caret {
                    self.bump();
                    let a = self.size_atom()?;
                    Ok(Raw::Sized(name, a, at))
                } else {
                    Ok(Raw::Name(name, at))
                }
            }
            _ => self.unexpected("a term"),
        }
    }

    // -- sizes

    fn size(&mut self) -> Result<SizeExpr, ParseError> {
        let mut summands = vec![self.size_product()?];
        while self.at_word(PLUS) {
            self.bump();
            summands.push(self.size_product()?);
        }
        Ok(if summands.len() == 1 {
            summands.pop().unwrap()
        } else {
            SizeExpr::Ext(Name::from(PLUS), summands)
        })
    }

    fn size_product(&mut self) -> Result<SizeExpr, ParseError> {
        let mut factors = vec![self.size_unary()?];
        while *self.peek() == Tok::Star {
            self.bump();
            factors.push(self.size_unary()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            SizeExpr::Ext(Name::from(TIMES), factors)
        })
    }

    fn size_unary(&mut self) -> Result<SizeExpr, ParseError> {
        if self.at_word("s") {
            self.bump();
            return Ok(SizeExpr::succ(self.size_unary()?));
        }
        self.size_atom()
    }

    fn size_atom(&mut self) -> Result<SizeExpr, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let a = self.size()?;
                self.expect(Tok::RParen)?;
                Ok(a)
            }
            Tok::Placeholder(i) if self.placeholders => {
                self.bump();
                Ok(SizeExpr::Var(placeholder(i)))
            }
            Tok::Placeholder(_) => error(self.loc(), "argument placeholders only occur in metrics"),
            Tok::Ident(s) if s == "inf" => {
                self.bump();
                Ok(SizeExpr::Infty)
            }
            Tok::Ident(s) if s == "s" => error(self.loc(), "`s` takes an argument; write `(s a)`"),
            Tok::Ident(s) if !is_keyword(&s) && s != PLUS => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = vec![self.size()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.size()?);
                    }
                    self.expect(Tok::RParen)?;
                    Ok(SizeExpr::Ext(Name::from(s.as_str()), args))
                } else if s.parse::<u64>().is_ok() {
                    Ok(SizeExpr::Ext(Name::from(s.as_str()), Vec::new()))
                } else {
                    Ok(SizeExpr::Var(Name::from(s.as_str())))
                }
            }
            _ => self.unexpected("a size"),
        }
    }

    /// `{ a := size, … }`
    fn size_bindings(&mut self) -> Result<RawSubst, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                let (v, at) = self.name()?;
                self.expect(Tok::Assign)?;
                out.push((v, self.size()?, at));
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(out)
    }

    // -- declarations

    fn decl(&mut self) -> Result<(RawDecl, Location), ParseError> {
        let at = self.loc();
        let Tok::Ident(kw) = self.peek().clone() else {
            return self.unexpected("a declaration");
        };
        self.bump();
        let d = match kw.as_str() {
            "size" => {
                let (name, _) = self.name()?;
                match self.bump() {
                    (Tok::Ident(s), _) if s == "/" => {}
                    (t, at) => return error(at, format!("expected `/`, found {t}")),
                }
                let arity = self.nat()?;
                let (mut monotone, mut antimonotone) = (Vec::new(), Vec::new());
                loop {
                    if self.eat_word("monotone") {
                        monotone = self.nat_list()?;
                    } else if self.eat_word("antimonotone") {
                        antimonotone = self.nat_list()?;
                    } else {
                        break;
                    }
                }
                RawDecl::Size { name, arity, monotone, antimonotone }
            }
            "type" | "constructor" | "fun" => {
                let kind = match kw.as_str() {
                    "type" => RawKind::Type,
                    "constructor" => RawKind::Constructor,
                    _ => RawKind::Function,
                };
                let (name, _) = self.name()?;
                self.expect(Tok::Colon)?;
                let ty = self.term()?;
                let (mut acc, mut metric, mut monotone, mut antimonotone) = (Vec::new(), None, Vec::new(), Vec::new());
                loop {
                    let clause = self.loc();
                    if self.eat_word("acc") {
                        if kind != RawKind::Constructor {
                            return error(clause, "only constructors have accessible arguments");
                        }
                        acc = self.nat_list()?;
                    } else if self.at_word("status") || self.at_word("metric") {
                        if kind != RawKind::Function {
                            return error(clause, "only functions have a status or metric");
                        }
                        metric = Some(self.metric()?);
                    } else if self.eat_word("monotone") {
                        monotone = self.nat_list()?;
                    } else if self.eat_word("antimonotone") {
                        antimonotone = self.nat_list()?;
                    } else {
                        break;
                    }
                }
                RawDecl::Symbol { name, kind, ty, acc, metric, monotone, antimonotone }
            }
            "prec" => {
                let (first, loc) = self.name()?;
                let mut chain = vec![(None, first, loc)];
                loop {
                    let op = match self.peek() {
                        Tok::Gt => PrecOp::Greater,
                        Tok::Tilde => PrecOp::Equiv,
                        _ => break,
                    };
                    self.bump();
                    let (n, loc) = self.name()?;
                    chain.push((Some(op), n, loc));
                }
                if chain.len() < 2 {
                    return self.unexpected("`>` or `~`");
                }
                RawDecl::Prec(chain)
            }
            "rule" => {
                let lhs = self.term()?;
                self.expect(Tok::Arrow)?;
                let rhs = self.term()?;
                let mut env = Vec::new();
                if self.eat_word("where") {
                    loop {
                        let (x, at) = self.name()?;
                        self.expect(Tok::Colon)?;
                        env.push((x, self.term()?, at));
                        if *self.peek() != Tok::Comma {
                            break;
                        }
                        self.bump();
                    }
                }
                let phi = if self.eat_word("sizes") { self.size_bindings()? } else { Vec::new() };
                let mut psi = Vec::new();
                while self.eat_word("psi") {
                    let (f, at) = self.name()?;
                    psi.push((f, at, self.size_bindings()?));
                }
                RawDecl::Rule { lhs, rhs, env, phi, psi }
            }
            _ => return error(at, format!("expected a declaration, found `{kw}`")),
        };
        Ok((d, at))
    }

    fn metric(&mut self) -> Result<Metric, ParseError> {
        if self.eat_word("metric") {
            self.placeholders = true;
            let p = self.size();
            self.placeholders = false;
            return Ok(Metric::Poly(p?));
        }
        self.expect_word("status")?;
        self.expect_word("lex")?;
        self.expect(Tok::LParen)?;
        let mut ms = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                self.expect_word("mult")?;
                ms.push(self.nat_list()?);
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
        }
        self.expect(Tok::RParen)?;
        Ok(Metric::Status(ms))
    }
}

// ---------------------------------------------------------------------------
// Name resolution

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Known {
    Type,
    Other,
    SizeSymbol(usize),
}

/// What an unknown name means.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Unknown {
    Error,
    /// A pattern variable of a left-hand side.
    Pattern,
    /// A free variable.
    Free,
}

struct Resolver<'a> {
    known: &'a HashMap<String, Known>,
    /// Innermost last.
    bound: Vec<String>,
    unknown: Unknown,
    /// Pattern variables met so far, when resolving a left-hand side.
    patterns: Vec<String>,
    lenient: bool,
}

impl Resolver<'_> {
    fn term(&mut self, r: &Raw) -> Result<Term, ParseError> {
        Ok(match r {
            Raw::Sort(s) => Term::Sort(*s),
            Raw::Name(x, at) => {
                if self.bound.iter().any(|b| b == x) || self.patterns.contains(x) {
                    Term::var(x)
                } else {
                    match self.known.get(x) {
                        Some(Known::Type) => Term::sized(x, SizeExpr::Infty),
                        Some(Known::Other) => Term::sym(x),
                        Some(Known::SizeSymbol(_)) => return error(*at, format!("`{x}` is a size symbol")),
                        None => match self.unknown {
                            Unknown::Error => return error(*at, format!("unknown name `{x}`")),
                            Unknown::Pattern => {
                                self.patterns.push(x.clone());
                                Term::var(x)
                            }
                            Unknown::Free => Term::var(x),
                        },
                    }
                }
            }
            Raw::Sized(c, a, at) => {
                match self.known.get(c) {
                    Some(Known::Type) => {}
                    None if self.lenient => {}
                    _ => return error(*at, format!("`{c}` is not a declared type and cannot carry a size")),
                }
                Term::sized(c, self.size(a, *at)?)
            }
            Raw::Abs(x, a, b) | Raw::Prod(x, a, b) => {
                let dom = self.term(a)?;
                self.bound.push(x.clone());
                let body = self.term(b);
                self.bound.pop();
                if matches!(r, Raw::Abs(..)) {
                    Term::abs(x.as_str(), dom, body?)
                } else {
                    Term::prod(x.as_str(), dom, body?)
                }
            }
            Raw::Arrow(a, b) => Term::arrow(self.term(a)?, self.term(b)?),
            Raw::App(f, u) => Term::app(self.term(f)?, self.term(u)?),
        })
    }

    fn size(&self, a: &SizeExpr, at: Location) -> Result<SizeExpr, ParseError> {
        resolve_size(self.known, a, at, self.lenient)
    }
}

fn resolve_size(known: &HashMap<String, Known>, a: &SizeExpr, at: Location, lenient: bool) -> Result<SizeExpr, ParseError> {
    Ok(match a {
        SizeExpr::Var(v) => match known.get(&**v) {
            Some(Known::SizeSymbol(0)) => SizeExpr::Ext(v.clone(), Vec::new()),
            Some(Known::SizeSymbol(n)) => return error(at, format!("size symbol `{v}` expects {n} arguments")),
            _ => a.clone(),
        },
        SizeExpr::Infty => SizeExpr::Infty,
        SizeExpr::Succ(b) => SizeExpr::succ(resolve_size(known, b, at, lenient)?),
        SizeExpr::Ext(h, args) => {
            let builtin = &**h == MAX || ((&**h == PLUS || &**h == TIMES) && args.len() >= 2) || (args.is_empty() && a.as_numeral().is_some());
            if !builtin {
                match known.get(&**h) {
                    Some(Known::SizeSymbol(n)) if *n == args.len() => {}
                    Some(Known::SizeSymbol(n)) => {
                        return error(at, format!("size symbol `{h}` expects {n} arguments, given {}", args.len()))
                    }
                    None if lenient => {}
                    _ => return error(at, format!("unknown size symbol `{h}`")),
                }
            }
            let args = args.iter().map(|b| resolve_size(known, b, at, lenient)).collect::<Result<_, _>>()?;
            SizeExpr::Ext(h.clone(), args)
        }
    })
}

fn sizes_of(
    known: &HashMap<String, Known>,
    bindings: &[(String, SizeExpr, Location)],
) -> Result<SizeSubst, ParseError> {
    let mut out = SizeSubst::new();
    for (v, a, at) in bindings {
        if out.insert(Name::from(v.as_str()), resolve_size(known, a, *at, false)?).is_some() {
            return error(*at, format!("size variable `{v}` is bound twice"));
        }
    }
    Ok(out)
}

/// Parses a whole file.
pub fn parse_spec(text: &str) -> Result<SpecFile, ParseError> {
    let mut p = Parser::new(text)?;
    let mut decls = Vec::new();
    while *p.peek() != Tok::Eof {
        decls.push(p.decl()?);
    }

    let mut known: HashMap<String, Known> = HashMap::new();
    let mut file = SpecFile::default();
    for (d, at) in &decls {
        let (name, k) = match d {
            RawDecl::Size { name, arity, .. } => {
                if is_builtin_symbol(name) || name == "s" {
                    return error(*at, format!("`{name}` is a built-in size symbol"));
                }
                (name, Known::SizeSymbol(*arity))
            }
            RawDecl::Symbol { name, kind, .. } => (name, if *kind == RawKind::Type { Known::Type } else { Known::Other }),
            _ => continue,
        };
        if known.insert(name.clone(), k).is_some() {
            return error(*at, format!("`{name}` is declared twice"));
        }
        file.declarations.insert(name.clone(), *at);
    }

    let mut chains = Vec::new();
    for (d, at) in decls {
        match d {
            RawDecl::Size { name, arity, monotone, antimonotone } => {
                let decl = SizeSymbolDecl { name: Name::from(name.as_str()), arity, monotone, antimonotone };
                file.signature.add_size_symbol(decl).map_err(|e| ParseError { location: at, message: e.to_string() })?;
            }
            RawDecl::Symbol { name, kind, ty, acc, metric, monotone, antimonotone } => {
                let mut r = Resolver { known: &known, bound: Vec::new(), unknown: Unknown::Error, patterns: Vec::new(), lenient: false };
                let ty = r.term(&ty)?;
                let kind = match kind {
                    RawKind::Type => SymbolKind::Type,
                    RawKind::Function => SymbolKind::Function,
                    RawKind::Constructor => {
                        let (_, out) = ty.split_prods(usize::MAX);
                        match out.spine().0 {
                            Term::Sized(c, _) => SymbolKind::Constructor { of: c.clone(), acc },
                            _ => return error(at, format!("the type of constructor `{name}` must end in a declared type")),
                        }
                    }
                };
                let decl = SymbolDecl { name: Name::from(name.as_str()), kind, ty, monotone, antimonotone, metric };
                file.signature.add_symbol(decl).map_err(|e| ParseError { location: at, message: e.to_string() })?;
            }
            RawDecl::Prec(chain) => {
                for (_, n, loc) in &chain {
                    if !matches!(known.get(n), Some(Known::Type | Known::Other)) {
                        return error(*loc, format!("unknown symbol `{n}` in precedence"));
                    }
                }
                let mut it = chain.into_iter();
                let (_, first, _) = it.next().unwrap();
                chains.push(PrecChain {
                    first: Name::from(first.as_str()),
                    steps: it.map(|(op, n, _)| (op.unwrap(), Name::from(n.as_str()))).collect(),
                });
            }
            RawDecl::Rule { lhs, rhs, env, phi, psi } => {
                let index = file.rules.len() + 1;
                file.rules.push(resolve_rule(&known, &file.signature, index, at, lhs, rhs, env, phi, psi)?);
                file.rule_locations.push(at);
            }
        }
    }
    file.signature.precedence = Precedence::new(chains);
    Ok(file)
}

#[allow(clippy::too_many_arguments)]
fn resolve_rule(
    known: &HashMap<String, Known>,
    sig: &Signature,
    index: usize,
    at: Location,
    lhs: Raw,
    rhs: Raw,
    env: Vec<(String, Raw, Location)>,
    phi: RawSubst,
    psi: Vec<(String, Location, RawSubst)>,
) -> Result<Rule, ParseError> {
    let mut r = Resolver { known, bound: Vec::new(), unknown: Unknown::Error, patterns: Vec::new(), lenient: false };
    let mut entries = Vec::new();
    for (x, ty, loc) in &env {
        if r.bound.contains(x) {
            return error(*loc, format!("rule variable `{x}` is declared twice"));
        }
        entries.push((Name::from(x.as_str()), r.term(ty)?));
        r.bound.push(x.clone());
    }

    r.unknown = Unknown::Pattern;
    let lhs = r.term(&lhs)?;
    r.unknown = Unknown::Error;
    let (head, args) = lhs.spine();
    let head = match head {
        Term::Symbol(f) => f.clone(),
        other => return error(at, format!("the left-hand side must be headed by a function symbol, not `{other}`")),
    };
    let decl = sig.get(&head).ok_or_else(|| ParseError { location: at, message: format!("`{head}` must be declared before its rules") })?;
    if decl.kind != SymbolKind::Function {
        return error(at, format!("`{head}` is not a function symbol and cannot be defined by rules"));
    }
    if args.len() > decl.arity() {
        return error(at, format!("`{head}` takes {} arguments but the rule gives {}", decl.arity(), args.len()));
    }
    let args: Vec<Term> = args.into_iter().cloned().collect();
    let rhs = r.term(&rhs)?;

    let mut psi_map = BTreeMap::new();
    for (f, loc, bindings) in &psi {
        if !matches!(known.get(f), Some(Known::Other)) {
            return error(*loc, format!("unknown function symbol `{f}`"));
        }
        psi_map.insert(Name::from(f.as_str()), sizes_of(known, bindings)?);
    }
    Ok(Rule { index, head, args, rhs, env: Env::from_entries(entries), phi: sizes_of(known, &phi)?, psi: psi_map })
}

fn names_of(sig: &Signature) -> HashMap<String, Known> {
    let mut known = HashMap::new();
    for d in sig.size_symbols() {
        known.insert(d.name.to_string(), Known::SizeSymbol(d.arity));
    }
    for d in sig.symbols() {
        known.insert(d.name.to_string(), if d.is_type() { Known::Type } else { Known::Other });
    }
    known
}

/// Parses a term against a signature. Names that are neither bound nor
/// declared are free variables; with `lenient`, undeclared names may also
/// carry sizes and size symbols need not be declared.
pub fn parse_term(text: &str, sig: &Signature, lenient: bool) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let raw = p.term()?;
    if *p.peek() != Tok::Eof {
        return p.unexpected("end of input");
    }
    let known = names_of(sig);
    let mut r = Resolver { known: &known, bound: Vec::new(), unknown: Unknown::Free, patterns: Vec::new(), lenient };
    r.term(&raw)
}

/// Parses a size expression; `#i` placeholders are accepted.
pub fn parse_size(text: &str) -> Result<SizeExpr, ParseError> {
    let mut p = Parser::new(text)?;
    p.placeholders = true;
    let a = p.size()?;
    if *p.peek() != Tok::Eof {
        return p.unexpected("end of input");
    }
    Ok(a)
}

// ---------------------------------------------------------------------------
// Printing

fn nat_list(xs: &[usize]) -> String {
    let v: Vec<String> = xs.iter().map(usize::to_string).collect();
    format!("({})", v.join(", "))
}

fn mon_clauses(f: &mut fmt::Formatter<'_>, mon: &[usize], anti: &[usize]) -> fmt::Result {
    if !mon.is_empty() {
        write!(f, " monotone{}", nat_list(mon))?;
    }
    if !anti.is_empty() {
        write!(f, " antimonotone{}", nat_list(anti))?;
    }
    Ok(())
}

fn bindings(phi: &SizeSubst) -> String {
    let v: Vec<String> = phi.iter().map(|(k, a)| format!("{k} := {a}")).collect();
    format!("{{ {} }}", v.join(", "))
}

impl fmt::Display for SpecFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = &self.signature;
        for d in sig.size_symbols() {
            write!(f, "size {} / {}", d.name, d.arity)?;
            mon_clauses(f, &d.monotone, &d.antimonotone)?;
            writeln!(f)?;
        }
        for d in sig.symbols() {
            let kw = match d.kind {
                SymbolKind::Type => "type",
                SymbolKind::Constructor { .. } => "constructor",
                SymbolKind::Function => "fun",
            };
            write!(f, "{kw} {} : {}", d.name, d.ty)?;
            if let SymbolKind::Constructor { acc, .. } = &d.kind {
                write!(f, " acc{}", nat_list(acc))?;
            }
            if let Some(m) = &d.metric {
                write!(f, " {m}")?;
            }
            mon_clauses(f, &d.monotone, &d.antimonotone)?;
            writeln!(f)?;
        }
        for chain in sig.precedence.chains() {
            writeln!(f, "prec {chain}")?;
        }
        for rule in &self.rules {
            write!(f, "rule {} -> {}", rule.lhs(), rule.rhs)?;
            if !rule.env.is_empty() {
                write!(f, "\n  where {}", rule.env)?;
            }
            if !rule.phi.is_empty() {
                write!(f, "\n  sizes {}", bindings(&rule.phi))?;
            }
            for (g, psi) in &rule.psi {
                write!(f, "\n  psi {g} {}", bindings(psi))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
