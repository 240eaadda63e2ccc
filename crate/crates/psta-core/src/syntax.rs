//! Concrete ASCII syntax: lexer, term parser (with sugar), type parser,
//! and printers. Parse errors carry byte spans into the source text.

use std::fmt;

use thiserror::Error;

use crate::sugar::SugaredTerm;
use crate::term::Term;
use crate::types::Type;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bytes {}..{}", self.start, self.end)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("syntax error at {span}: {message}")]
    Parse { span: Span, message: String },
    #[error("s-linearity violation at binder `{binder}` ({span}): {message}")]
    SLinearity {
        binder: String,
        span: Span,
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Lambda,
    Bang,
    Dot,
    LParen,
    RParen,
    LAngle,
    RAngle,
    LBrace,
    RBrace,
    Comma,
    Star,
    Caret,
    DerOpen, // `d(`
    Ident(String),
    Let,
    Be,
    In,
    If,
    Then,
    Else,
    As,
    Copy,
    Proj,
    UnitI,
    Arrow,  // -o (types)
    Amp,    // & (types)
    Forall, // forall (types)
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Span)>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos >= self.src.len() {
                return Ok(out);
            }
            let start = self.pos;
            let c = self.src[self.pos];
            let tok = match c {
                b'\\' => {
                    self.pos += 1;
                    Tok::Lambda
                }
                b'!' => {
                    self.pos += 1;
                    Tok::Bang
                }
                b'.' => {
                    self.pos += 1;
                    Tok::Dot
                }
                b'(' => {
                    self.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    self.pos += 1;
                    Tok::RParen
                }
                b'<' => {
                    self.pos += 1;
                    Tok::LAngle
                }
                b'>' => {
                    self.pos += 1;
                    Tok::RAngle
                }
                b'{' => {
                    self.pos += 1;
                    Tok::LBrace
                }
                b'}' => {
                    self.pos += 1;
                    Tok::RBrace
                }
                b',' => {
                    self.pos += 1;
                    Tok::Comma
                }
                b'*' => {
                    self.pos += 1;
                    Tok::Star
                }
                b'^' => {
                    self.pos += 1;
                    Tok::Caret
                }
                b'&' => {
                    self.pos += 1;
                    Tok::Amp
                }
                b'-' => {
                    if self.src.get(self.pos + 1) == Some(&b'o') {
                        self.pos += 2;
                        Tok::Arrow
                    } else {
                        return Err(SyntaxError::Parse {
                            span: Span::new(start, start + 1),
                            message: "expected `-o`".into(),
                        });
                    }
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let mut end = self.pos;
                    while end < self.src.len()
                        && (self.src[end].is_ascii_alphanumeric()
                            || self.src[end] == b'_'
                            || self.src[end] == b'\'')
                    {
                        end += 1;
                    }
                    let word = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                    self.pos = end;
                    match word {
                        "let" => Tok::Let,
                        "be" => Tok::Be,
                        "in" => Tok::In,
                        "if" => Tok::If,
                        "then" => Tok::Then,
                        "else" => Tok::Else,
                        "as" => Tok::As,
                        "copy" => Tok::Copy,
                        "proj" => Tok::Proj,
                        "forall" => Tok::Forall,
                        "I" => Tok::UnitI,
                        // `d(` glues into the dereliction opener
                        "d" if self.src.get(self.pos) == Some(&b'(') => {
                            self.pos += 1;
                            Tok::DerOpen
                        }
                        _ => Tok::Ident(word.to_string()),
                    }
                }
                other => {
                    return Err(SyntaxError::Parse {
                        span: Span::new(start, start + 1),
                        message: format!("unexpected character `{}`", other as char),
                    })
                }
            };
            out.push((tok, Span::new(start, self.pos)));
        }
    }
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn span(&self) -> Span {
        self.toks
            .get(self.pos)
            .map(|(_, s)| *s)
            .unwrap_or(Span::new(self.end, self.end))
    }

    fn next(&mut self) -> Option<(Tok, Span)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Span, SyntaxError> {
        match self.next() {
            Some((t, s)) if t == tok => Ok(s),
            Some((t, s)) => Err(SyntaxError::Parse {
                span: s,
                message: format!("expected {what}, found {t:?}"),
            }),
            None => Err(SyntaxError::Parse {
                span: Span::new(self.end, self.end),
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError::Parse {
            span: self.span(),
            message: message.into(),
        })
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), SyntaxError> {
        match self.next() {
            Some((Tok::Ident(x), s)) => Ok((x, s)),
            Some((t, s)) => Err(SyntaxError::Parse {
                span: s,
                message: format!("expected {what}, found {t:?}"),
            }),
            None => Err(SyntaxError::Parse {
                span: Span::new(self.end, self.end),
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    // term := lam | let | if | tensor
    fn term(&mut self) -> Result<SugaredTerm, SyntaxError> {
        match self.peek() {
            Some(Tok::Lambda) => self.lam(),
            Some(Tok::Let) => self.letexpr(),
            Some(Tok::If) => self.ifexpr(),
            _ => self.tensor(),
        }
    }

    fn binder(&mut self) -> Result<(String, bool, Span), SyntaxError> {
        if matches!(self.peek(), Some(Tok::Bang)) {
            self.next();
            let (x, s) = self.ident("a binder name")?;
            Ok((x, true, s))
        } else {
            let (x, s) = self.ident("a binder name")?;
            Ok((x, false, s))
        }
    }

    fn lam(&mut self) -> Result<SugaredTerm, SyntaxError> {
        self.expect(Tok::Lambda, "`\\`")?;
        let mut binders = Vec::new();
        loop {
            binders.push(self.binder()?);
            if matches!(self.peek(), Some(Tok::Dot)) {
                self.next();
                break;
            }
        }
        let mut body = self.term()?;
        for (x, bang, span) in binders.into_iter().rev() {
            body = if bang {
                SugaredTerm::BangLam(x, span, Box::new(body))
            } else {
                SugaredTerm::Lam(x, span, Box::new(body))
            };
        }
        Ok(body)
    }

    fn letexpr(&mut self) -> Result<SugaredTerm, SyntaxError> {
        self.expect(Tok::Let, "`let`")?;
        let scrutinee = self.term()?;
        self.expect(Tok::Be, "`be`")?;
        if matches!(self.peek(), Some(Tok::UnitI)) {
            self.next();
            self.expect(Tok::In, "`in`")?;
            let body = self.term()?;
            return Ok(SugaredTerm::LetUnit(Box::new(scrutinee), Box::new(body)));
        }
        let mut binders = vec![self.binder()?];
        while matches!(self.peek(), Some(Tok::Star)) {
            self.next();
            binders.push(self.binder()?);
        }
        if binders.len() < 2 {
            return self.err("a tensor pattern needs at least two binders");
        }
        self.expect(Tok::In, "`in`")?;
        let body = self.term()?;
        Ok(SugaredTerm::LetTensor(
            Box::new(scrutinee),
            binders,
            Box::new(body),
        ))
    }

    fn ifexpr(&mut self) -> Result<SugaredTerm, SyntaxError> {
        self.expect(Tok::If, "`if`")?;
        let c = self.term()?;
        self.expect(Tok::Then, "`then`")?;
        let t = self.term()?;
        self.expect(Tok::Else, "`else`")?;
        let e = self.term()?;
        Ok(SugaredTerm::IfThenElse(Box::new(c), Box::new(t), Box::new(e)))
    }

    // tensor := app (`*` tensor)?
    fn tensor(&mut self) -> Result<SugaredTerm, SyntaxError> {
        let left = self.app()?;
        if matches!(self.peek(), Some(Tok::Star)) {
            self.next();
            let right = self.tensor()?;
            Ok(SugaredTerm::TensorPair(Box::new(left), Box::new(right)))
        } else {
            Ok(left)
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(
                Tok::Ident(_)
                    | Tok::UnitI
                    | Tok::Bang
                    | Tok::DerOpen
                    | Tok::LAngle
                    | Tok::Proj
                    | Tok::Copy
                    | Tok::LParen
            )
        )
    }

    fn app(&mut self) -> Result<SugaredTerm, SyntaxError> {
        if !self.starts_atom() {
            return self.err("expected a term");
        }
        let mut acc = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            acc = SugaredTerm::App(Box::new(acc), Box::new(arg));
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<SugaredTerm, SyntaxError> {
        match self.next() {
            Some((Tok::Ident(x), _)) => Ok(SugaredTerm::Var(x)),
            Some((Tok::UnitI, _)) => Ok(SugaredTerm::UnitI),
            Some((Tok::Bang, _)) => Ok(SugaredTerm::Bang(Box::new(self.atom()?))),
            Some((Tok::DerOpen, _)) => {
                let inner = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(SugaredTerm::Der(Box::new(inner)))
            }
            Some((Tok::LAngle, _)) => {
                let l = self.term()?;
                self.expect(Tok::Comma, "`,`")?;
                let r = self.term()?;
                self.expect(Tok::RAngle, "`>`")?;
                Ok(SugaredTerm::Pair(Box::new(l), Box::new(r)))
            }
            Some((Tok::Proj, _)) => {
                self.expect(Tok::LParen, "`(`")?;
                let inner = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(SugaredTerm::Proj(Box::new(inner)))
            }
            Some((Tok::Copy, _)) => {
                self.expect(Tok::Caret, "`^`")?;
                self.expect(Tok::LBrace, "`{`")?;
                let bound = self.term()?;
                self.expect(Tok::RBrace, "`}`")?;
                let scrutinee = self.term()?;
                self.expect(Tok::As, "`as`")?;
                let (x, xs) = self.ident("the first copy binder")?;
                self.expect(Tok::Comma, "`,`")?;
                let (y, ys) = self.ident("the second copy binder")?;
                self.expect(Tok::In, "`in`")?;
                self.expect(Tok::LAngle, "`<`")?;
                let l = self.term()?;
                self.expect(Tok::Comma, "`,`")?;
                let r = self.term()?;
                self.expect(Tok::RAngle, "`>`")?;
                Ok(SugaredTerm::Copy {
                    bound: Box::new(bound),
                    scrutinee: Box::new(scrutinee),
                    left_var: (x, xs),
                    right_var: (y, ys),
                    left: Box::new(l),
                    right: Box::new(r),
                })
            }
            Some((Tok::LParen, _)) => {
                let inner = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some((t, s)) => Err(SyntaxError::Parse {
                span: s,
                message: format!("unexpected {t:?}"),
            }),
            None => Err(SyntaxError::Parse {
                span: Span::new(self.end, self.end),
                message: "unexpected end of input".into(),
            }),
        }
    }

    // ty := forall | arrow ; arrow := withty (-o arrow)? ;
    // withty := atomty (& atomty)* ; atomty := ident | !atomty | (ty)
    fn ty(&mut self) -> Result<Type, SyntaxError> {
        if matches!(self.peek(), Some(Tok::Forall)) {
            self.next();
            let (a, _) = self.ident("a type variable")?;
            self.expect(Tok::Dot, "`.`")?;
            let body = self.ty()?;
            return Type::forall(a, body).map_err(|e| SyntaxError::Parse {
                span: self.span(),
                message: e.to_string(),
            });
        }
        self.arrow_ty()
    }

    fn arrow_ty(&mut self) -> Result<Type, SyntaxError> {
        let left = self.with_ty()?;
        if matches!(self.peek(), Some(Tok::Arrow)) {
            self.next();
            let right = if matches!(self.peek(), Some(Tok::Forall)) {
                self.ty()?
            } else {
                self.arrow_ty()?
            };
            return Type::imp(left, right).map_err(|e| SyntaxError::Parse {
                span: self.span(),
                message: e.to_string(),
            });
        }
        Ok(left)
    }

    fn with_ty(&mut self) -> Result<Type, SyntaxError> {
        let mut acc = self.atom_ty()?;
        while matches!(self.peek(), Some(Tok::Amp)) {
            self.next();
            let r = self.atom_ty()?;
            acc = Type::with(acc, r).map_err(|e| SyntaxError::Parse {
                span: self.span(),
                message: e.to_string(),
            })?;
        }
        Ok(acc)
    }

    fn atom_ty(&mut self) -> Result<Type, SyntaxError> {
        match self.next() {
            Some((Tok::Ident(a), _)) => Ok(Type::var(a)),
            Some((Tok::Bang, _)) => Ok(Type::bang(self.atom_ty()?)),
            Some((Tok::LParen, _)) => {
                let t = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Some((Tok::Forall, s)) => {
                // allow `forall` inside parens-free atom position too
                let (a, _) = self.ident("a type variable")?;
                self.expect(Tok::Dot, "`.`")?;
                let body = self.ty()?;
                Type::forall(a, body).map_err(|e| SyntaxError::Parse {
                    span: s,
                    message: e.to_string(),
                })
            }
            Some((t, s)) => Err(SyntaxError::Parse {
                span: s,
                message: format!("unexpected {t:?} in a type"),
            }),
            None => Err(SyntaxError::Parse {
                span: Span::new(self.end, self.end),
                message: "unexpected end of input in a type".into(),
            }),
        }
    }
}

fn parser_for(text: &str) -> Result<Parser, SyntaxError> {
    let toks = Lexer::new(text).tokens()?;
    Ok(Parser {
        toks,
        pos: 0,
        end: text.len(),
    })
}

/// Parse the sugared surface syntax.
pub fn parse_sugared(text: &str) -> Result<SugaredTerm, SyntaxError> {
    let mut p = parser_for(text)?;
    let t = p.term()?;
    if p.peek().is_some() {
        return p.err("trailing input after the term");
    }
    Ok(t)
}

/// Parse and elaborate into a raw term, rejecting s-linearity violations
/// with the offending binder's span.
pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    let sugared = parse_sugared(text)?;
    crate::sugar::elaborate(&sugared)
}

pub fn parse_type(text: &str) -> Result<Type, SyntaxError> {
    let mut p = parser_for(text)?;
    let t = p.ty()?;
    if p.peek().is_some() {
        return p.err("trailing input after the type");
    }
    Ok(t)
}

// ---------------------------------------------------------------------
// printers
// ---------------------------------------------------------------------

fn is_atom(t: &Term) -> bool {
    matches!(
        t,
        Term::Var(_) | Term::Der(_) | Term::Pair(..) | Term::Proj(_)
    )
}

fn print_atom(t: &Term, out: &mut String) {
    if is_atom(t) || matches!(t, Term::Bang(_)) {
        print_rec(t, out);
    } else {
        out.push('(');
        print_rec(t, out);
        out.push(')');
    }
}

fn print_rec(t: &Term, out: &mut String) {
    match t {
        Term::Var(x) => out.push_str(x),
        Term::Lam(..) | Term::BangLam(..) => {
            out.push('\\');
            let mut cur = t;
            let mut first = true;
            loop {
                match cur {
                    Term::Lam(x, b1) => {
                        if !first {
                            out.push(' ');
                        }
                        out.push_str(x);
                        cur = b1;
                    }
                    Term::BangLam(x, b1) => {
                        if !first {
                            out.push(' ');
                        }
                        out.push('!');
                        out.push_str(x);
                        cur = b1;
                    }
                    _ => break,
                }
                first = false;
            }
            out.push_str(". ");
            print_rec(cur, out);
        }
        Term::App(f, a) => {
            match &**f {
                Term::App(..) => print_rec(f, out),
                other if is_atom(other) || matches!(other, Term::Bang(_)) => print_rec(f, out),
                _ => {
                    out.push('(');
                    print_rec(f, out);
                    out.push(')');
                }
            }
            out.push(' ');
            print_atom(a, out);
        }
        Term::Bang(b1) => {
            out.push('!');
            print_atom(b1, out);
        }
        Term::Der(b1) => {
            out.push_str("d(");
            print_rec(b1, out);
            out.push(')');
        }
        Term::Pair(l, r) => {
            out.push('<');
            print_rec(l, out);
            out.push_str(", ");
            print_rec(r, out);
            out.push('>');
        }
        Term::Proj(b1) => {
            out.push_str("proj(");
            print_rec(b1, out);
            out.push(')');
        }
        Term::Copy {
            bound,
            scrutinee,
            left_var,
            right_var,
            left,
            right,
        } => {
            out.push_str("copy^{");
            print_rec(bound, out);
            out.push_str("} ");
            match &**scrutinee {
                t2 if is_atom(t2) || matches!(t2, Term::Bang(_) | Term::App(..)) => {
                    print_rec(scrutinee, out)
                }
                _ => {
                    out.push('(');
                    print_rec(scrutinee, out);
                    out.push(')');
                }
            }
            out.push_str(&format!(" as {left_var}, {right_var} in <"));
            print_rec(left, out);
            out.push_str(", ");
            print_rec(right, out);
            out.push('>');
        }
    }
}

pub fn print_term(t: &Term) -> String {
    let mut s = String::new();
    print_rec(t, &mut s);
    s
}

fn type_atomish(t: &Type) -> bool {
    matches!(t, Type::Var(_) | Type::Bang(_))
}

fn print_type_rec(t: &Type, out: &mut String) {
    match t {
        Type::Var(a) => out.push_str(a),
        Type::Bang(b1) => {
            out.push('!');
            if type_atomish(b1) {
                print_type_rec(b1, out);
            } else {
                out.push('(');
                print_type_rec(b1, out);
                out.push(')');
            }
        }
        Type::Imp(l, r) => {
            if matches!(&**l, Type::Imp(..) | Type::Forall(..)) {
                out.push('(');
                print_type_rec(l, out);
                out.push(')');
            } else {
                print_type_rec(l, out);
            }
            out.push_str(" -o ");
            print_type_rec(r, out);
        }
        Type::With(l, r) => {
            let print_side = |s: &Type, out: &mut String| {
                if type_atomish(s) {
                    print_type_rec(s, out);
                } else {
                    out.push('(');
                    print_type_rec(s, out);
                    out.push(')');
                }
            };
            print_side(l, out);
            out.push_str(" & ");
            print_side(r, out);
        }
        Type::Forall(a, b1) => {
            out.push_str("forall ");
            out.push_str(a);
            out.push_str(". ");
            print_type_rec(b1, out);
        }
    }
}

pub fn print_type(t: &Type) -> String {
    let mut s = String::new();
    print_type_rec(t, &mut s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_delta_bang_term() {
        let t = parse_term("\\!x. d(x) !d(x)").unwrap();
        let delta = Term::bang_lam(
            "x",
            Term::app(
                Term::der(Term::var("x")),
                Term::bang(Term::der(Term::var("x"))),
            ),
        );
        assert_eq!(t, delta);
    }

    #[test]
    fn parses_coin() {
        let t = parse_term("proj(<\\x.\\y.x, \\x.\\y.y>)").unwrap();
        let coin = Term::proj(Term::pair(
            Term::lam("x", Term::lam("y", Term::var("x")).unwrap()).unwrap(),
            Term::lam("x", Term::lam("y", Term::var("y")).unwrap()).unwrap(),
        ));
        assert_eq!(t, coin);
    }

    #[test]
    fn rejects_non_s_linear_binders() {
        let e = parse_term("\\x. x x").unwrap_err();
        assert!(matches!(e, SyntaxError::SLinearity { .. }));
        let e = parse_term("\\x. !x").unwrap_err();
        assert!(matches!(e, SyntaxError::SLinearity { .. }));
    }

    #[test]
    fn parses_copy() {
        let t = parse_term("copy^{\\z.z} w as a, b in <a, b>").unwrap();
        let expected = Term::copy(
            Term::lam("z", Term::var("z")).unwrap(),
            Term::var("w"),
            "a",
            "b",
            Term::var("a"),
            Term::var("b"),
        )
        .unwrap();
        assert_eq!(t, expected);
    }

    #[test]
    fn sugar_elaborates() {
        // let I be I in x --> plain application
        let t = parse_term("let I be I in \\x.x").unwrap();
        assert!(matches!(t, Term::App(..)));
        // tensor pair
        let t = parse_term("(\\x.x) * (\\y.y)").unwrap();
        match &t {
            Term::Lam(f, _) => assert!(!f.is_empty()),
            other => panic!("expected elaborated tensor, got {other:?}"),
        }
    }

    #[test]
    fn print_parse_round_trip() {
        let samples = [
            "\\x. x",
            "\\!x. d(x) !d(x)",
            "proj(<\\x.\\y.x, \\x.\\y.y>)",
            "copy^{\\z.z} (\\w.w) as a, b in <a, b>",
            "(\\x.x) ((\\y.y) z)",
            "!(\\x.x)",
            "d(d(y))",
        ];
        for s in samples {
            let t = parse_term(s).unwrap();
            let printed = print_term(&t);
            let back = parse_term(&printed)
                .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
            assert_eq!(t, back, "round trip through `{printed}`");
        }
    }

    #[test]
    fn type_round_trip() {
        let samples = [
            "forall a. a -o a",
            "!a -o b",
            "forall a. !(a -o a) -o a -o a",
            "(a -o b) & (b -o a)",
            "!!(a & b)",
        ];
        for s in samples {
            let t = parse_type(s).unwrap();
            let printed = print_type(&t);
            let back = parse_type(&printed).unwrap();
            assert_eq!(t, back, "round trip through `{printed}`");
        }
    }
}
