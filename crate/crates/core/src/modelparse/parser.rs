//! Recursive-descent parser with inline typing. Every expression node is
//! typed as it is built so that type errors point at the offending
//! operator or operand rather than at the start of the item.

use std::sync::Arc;

use super::error::{ParseError, ParseErrorKind};
use super::lexer::{tokenize, Tok, Token};
use super::Model;
use crate::factgen::{typecheck, Arg, Atom, BuiltinDef, BuiltinKind, Param, PredRef, PredicateDef};
use crate::kernel::{
    arith_type, cmp_type, describe, infer, member_type, unify, ArithOp, CmpOp, Domain, Expr,
    KernelError, Mode, ParamKind, Property, QuantKind, Signature, SymbolicTransitionSystem, Type,
    Value, VarId,
};
use crate::tracecon::TraceConstraint;

type PResult<T> = Result<T, ParseError>;

/// Words that may not be used as declared names.
const RESERVED: &[&str] = &[
    "type", "record", "var", "vars", "init", "trans", "invariant", "pred", "builtin", "predset",
    "if", "then", "else", "unchanged", "all", "some", "bool", "int", "set", "pos", "over",
];

/// Parses a complete model.
pub fn parse_model(src: &str) -> PResult<Model> {
    let mut p = Parser::new(src, empty_model())?;
    if p.peek() == &Tok::Eof {
        return Err(p.error(ParseErrorKind::Syntax, "empty model"));
    }
    let first = p.tok().clone();
    while p.peek() != &Tok::Eof {
        p.item(Items::Model)?;
    }
    if p.model.system.sig.vars.is_empty() {
        return Err(p.err_at(&first, ParseErrorKind::Syntax, "model declares no variables"));
    }
    p.finish()
}

/// Parses predicate, built-in, predicate-set and invariant declarations
/// against `base`, returning the extended model.
pub fn parse_library(src: &str, base: &Model) -> PResult<Model> {
    let mut p = Parser::new(src, base.clone())?;
    p.inits.push(base.system.init.clone());
    p.transes.push(base.system.trans.clone());
    while p.peek() != &Tok::Eof {
        p.item(Items::Library)?;
    }
    let mut m = p.model;
    m.system.init = base.system.init.clone();
    m.system.trans = base.system.trans.clone();
    Ok(m)
}

/// Parses a single `pred` declaration in the context of `model`.
pub fn parse_predicate(src: &str, model: &Model) -> PResult<PredicateDef> {
    let mut p = Parser::new(src, model.clone())?;
    let kw = p.tok().clone();
    if !p.is_kw("pred") {
        return Err(p.err_at(&kw, ParseErrorKind::Syntax, "expected `pred`"));
    }
    p.bump();
    let def = p.pred_body()?;
    p.eat(&Tok::Semi);
    p.expect(&Tok::Eof)?;
    Ok(def)
}

/// Parses one trace constraint, e.g. `exists i1,i2 : x@i2 = 1 /\ i1 < i2`.
pub fn parse_constraint(src: &str, model: &Model) -> PResult<TraceConstraint> {
    let mut p = Parser::new(src, model.clone())?;
    let w = p.constraint()?;
    p.eat(&Tok::Semi);
    p.expect(&Tok::Eof)?;
    Ok(w)
}

/// Parses a sequence of trace constraints, optionally `;`-separated.
pub fn parse_constraints(src: &str, model: &Model) -> PResult<Vec<TraceConstraint>> {
    let mut p = Parser::new(src, model.clone())?;
    let mut out = Vec::new();
    while p.peek() != &Tok::Eof {
        out.push(p.constraint()?);
        while p.eat(&Tok::Semi) {}
    }
    Ok(out)
}

fn empty_model() -> Model {
    Model {
        system: SymbolicTransitionSystem {
            sig: Signature::new(),
            init: Expr::tt(),
            trans: Expr::tt(),
        },
        properties: Vec::new(),
        predicates: Vec::new(),
        builtins: Vec::new(),
        predsets: Vec::new(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Items {
    Model,
    Library,
}

/// An expression with its type and the token it starts at.
struct Typed {
    e: Expr,
    ty: Type,
    at: Token,
}

/// Names visible inside an expression.
struct Scope<'a> {
    mode: Mode,
    params: &'a [Param],
    quants: Vec<String>,
}

impl Scope<'_> {
    fn plain(mode: Mode) -> Scope<'static> {
        Scope {
            mode,
            params: &[],
            quants: Vec::new(),
        }
    }

    fn kinds(&self) -> Vec<ParamKind> {
        self.params.iter().map(|p| p.kind).collect()
    }

    /// Position slot named `name`, innermost quantifier first.
    fn position(&self, name: &str) -> Option<Result<usize, ()>> {
        if let Some(i) = self.quants.iter().rposition(|q| q == name) {
            return Some(Ok(self.params.len() + i));
        }
        let i = self.params.iter().position(|p| p.name == name)?;
        Some(if self.params[i].kind == ParamKind::Pos {
            Ok(i)
        } else {
            Err(())
        })
    }
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    model: Model,
    inits: Vec<Expr>,
    transes: Vec<Expr>,
}

impl Parser {
    fn new(src: &str, model: Model) -> PResult<Self> {
        Ok(Parser {
            toks: tokenize(src)?,
            i: 0,
            model,
            inits: Vec::new(),
            transes: Vec::new(),
        })
    }

    fn sig(&self) -> &Signature {
        &self.model.system.sig
    }

    fn finish(mut self) -> PResult<Model> {
        self.model.system.init = conjoin(std::mem::take(&mut self.inits));
        self.model.system.trans = conjoin(std::mem::take(&mut self.transes));
        Ok(self.model)
    }

    // ---- token plumbing ----

    fn tok(&self) -> &Token {
        &self.toks[self.i]
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.i + n).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn err_at(&self, tok: &Token, kind: ParseErrorKind, msg: impl Into<String>) -> ParseError {
        ParseError {
            kind,
            line: tok.line,
            column: tok.column,
            message: msg.into(),
            token: tok.text.clone(),
        }
    }

    fn error(&self, kind: ParseErrorKind, msg: impl Into<String>) -> ParseError {
        self.err_at(self.tok(), kind, msg)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error(
            ParseErrorKind::Syntax,
            format!("expected {wanted}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, t: &Tok) -> PResult<Token> {
        if self.peek() == t {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&t.describe()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Token> {
        if self.is_kw(kw) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self) -> PResult<(String, Token)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump())),
            _ => Err(self.unexpected("a name")),
        }
    }

    /// A name being declared: not reserved.
    fn decl_name(&mut self) -> PResult<(String, Token)> {
        let (name, tok) = self.ident()?;
        if RESERVED.contains(&name.as_str()) {
            return Err(self.err_at(
                &tok,
                ParseErrorKind::Syntax,
                format!("`{name}` is a reserved word"),
            ));
        }
        Ok((name, tok))
    }

    /// `a.b.c`, with reserved words allowed after a dot.
    fn dotted(&mut self) -> PResult<(Vec<String>, Token)> {
        let (first, tok) = self.ident()?;
        let mut segs = vec![first];
        while self.peek() == &Tok::Dot && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.bump();
            segs.push(self.ident()?.0);
        }
        Ok((segs, tok))
    }

    fn kernel_err(&self, tok: &Token, e: KernelError) -> ParseError {
        let kind = match e {
            KernelError::Duplicate(_) => ParseErrorKind::DuplicateName,
            KernelError::UnknownType(_) => ParseErrorKind::UnknownType,
            KernelError::Type(_) => ParseErrorKind::TypeMismatch,
            _ => ParseErrorKind::Syntax,
        };
        self.err_at(tok, kind, e.to_string())
    }

    fn comma_list<T>(&mut self, mut f: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = vec![f(self)?];
        while self.eat(&Tok::Comma) {
            out.push(f(self)?);
        }
        Ok(out)
    }

    // ---- items ----

    fn item(&mut self, allowed: Items) -> PResult<()> {
        if self.eat(&Tok::Semi) {
            return Ok(());
        }
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return Err(self.unexpected("a declaration")),
        };
        let library_ok = matches!(kw.as_str(), "pred" | "builtin" | "predset" | "invariant");
        if allowed == Items::Library && !library_ok && RESERVED.contains(&kw.as_str()) {
            return Err(self.error(
                ParseErrorKind::Syntax,
                format!("`{kw}` is not allowed in a predicate library"),
            ));
        }
        match kw.as_str() {
            "type" => self.type_decl(),
            "record" => self.record_decl(),
            "var" | "vars" => self.var_decl(),
            "init" => {
                self.bump();
                let e = self.top_expr(Mode::State)?;
                self.inits.push(e);
                Ok(())
            }
            "trans" => {
                self.bump();
                let e = self.top_expr(Mode::Transition)?;
                self.transes.push(e);
                Ok(())
            }
            "invariant" => self.invariant_decl(),
            "pred" => {
                self.bump();
                let def = self.pred_body()?;
                self.model.predicates.push(Arc::new(def));
                Ok(())
            }
            "builtin" => self.builtin_decl(),
            "predset" => self.predset_decl(),
            _ => Err(self.error(
                ParseErrorKind::Syntax,
                format!(
                    "expected a declaration (type, record, var, init, trans, invariant, pred, \
                     builtin, predset), found `{kw}`"
                ),
            )),
        }
    }

    fn type_decl(&mut self) -> PResult<()> {
        self.bump();
        let (name, tok) = self.decl_name()?;
        self.expect(&Tok::Eq)?;
        self.expect(&Tok::LBrace)?;
        let mut symbols = Vec::new();
        if self.peek() != &Tok::RBrace {
            symbols = self.comma_list(|p| {
                let (s, t) = p.decl_name()?;
                if p.sig().var(&s).is_some() || p.sig().record_var(&s).is_some() {
                    return Err(p.err_at(
                        &t,
                        ParseErrorKind::DuplicateName,
                        format!("symbol `{s}` clashes with a variable"),
                    ));
                }
                Ok(s)
            })?;
        }
        self.expect(&Tok::RBrace)?;
        if self.sig().record(&name).is_some() {
            return Err(self.err_at(
                &tok,
                ParseErrorKind::DuplicateName,
                format!("duplicate type `{name}`"),
            ));
        }
        self.model
            .system
            .sig
            .types
            .add_enum(&name, symbols)
            .map_err(|e| self.kernel_err(&tok, e))?;
        Ok(())
    }

    fn record_decl(&mut self) -> PResult<()> {
        self.bump();
        let (name, tok) = self.decl_name()?;
        self.expect(&Tok::LBrace)?;
        let fields = self.comma_list(|p| {
            let (f, _) = p.ident()?;
            p.expect(&Tok::Colon)?;
            let d = p.domain()?;
            Ok((f, d))
        })?;
        self.eat(&Tok::Comma);
        self.expect(&Tok::RBrace)?;
        self.model
            .system
            .sig
            .add_record(&name, fields)
            .map_err(|e| self.kernel_err(&tok, e))?;
        Ok(())
    }

    fn var_decl(&mut self) -> PResult<()> {
        self.bump();
        self.comma_list(|p| {
            let (name, tok) = p.decl_name()?;
            if p.sig().types.symbol(&name).is_some() {
                return Err(p.err_at(
                    &tok,
                    ParseErrorKind::DuplicateName,
                    format!("variable `{name}` clashes with a symbol"),
                ));
            }
            p.expect(&Tok::Colon)?;
            if let Tok::Ident(r) = p.peek().clone() {
                if let Some(rid) = p.sig().record(&r) {
                    p.bump();
                    p.model
                        .system
                        .sig
                        .add_record_var(&name, rid)
                        .map_err(|e| p.kernel_err(&tok, e))?;
                    return Ok(());
                }
            }
            let d = p.domain()?;
            p.model
                .system
                .sig
                .add_var(&name, d)
                .map_err(|e| p.kernel_err(&tok, e))?;
            Ok(())
        })?;
        Ok(())
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat(&Tok::Minus);
        match *self.peek() {
            Tok::Int(i) => {
                self.bump();
                Ok(if neg { -i } else { i })
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn domain(&mut self) -> PResult<Domain> {
        let (name, tok) = self.ident()?;
        let d = match name.as_str() {
            "bool" => Domain::Bool,
            "int" => {
                self.expect(&Tok::LBracket)?;
                let lo = self.signed_int()?;
                self.expect(&Tok::DotDot)?;
                let hi = self.signed_int()?;
                self.expect(&Tok::RBracket)?;
                Domain::Int { lo, hi }
            }
            "set" => {
                let (t, ttok) = self.ident()?;
                let id = self.enum_type(&t, &ttok)?;
                Domain::Set(id)
            }
            other => Domain::Enum(self.enum_type(other, &tok)?),
        };
        self.sig()
            .types
            .validate(d)
            .map_err(|e| self.kernel_err(&tok, e))?;
        Ok(d)
    }

    fn enum_type(&self, name: &str, tok: &Token) -> PResult<usize> {
        self.sig().types.lookup(name).ok_or_else(|| {
            self.err_at(
                tok,
                ParseErrorKind::UnknownType,
                format!("unknown type `{name}`"),
            )
        })
    }

    fn invariant_decl(&mut self) -> PResult<()> {
        self.bump();
        let (name, tok) = self.decl_name()?;
        if self.model.properties.iter().any(|p| p.name == name) {
            return Err(self.err_at(
                &tok,
                ParseErrorKind::DuplicateName,
                format!("duplicate property `{name}`"),
            ));
        }
        self.expect(&Tok::Colon)?;
        let e = self.top_expr(Mode::State)?;
        self.model.properties.push(Property::invariant(&name, e));
        Ok(())
    }

    fn check_fresh_predicate_name(&self, name: &str, tok: &Token) -> PResult<()> {
        let m = &self.model;
        let taken = m.predicate(name).is_some()
            || m.builtins.iter().any(|b| b.name == name)
            || m.predsets.iter().any(|(n, _)| n == name);
        if taken {
            return Err(self.err_at(
                tok,
                ParseErrorKind::DuplicateName,
                format!("duplicate predicate name `{name}`"),
            ));
        }
        Ok(())
    }

    /// `name[params] { body }`, after the `pred` keyword.
    fn pred_body(&mut self) -> PResult<PredicateDef> {
        let (name, tok) = self.decl_name()?;
        self.check_fresh_predicate_name(&name, &tok)?;
        self.expect(&Tok::LBracket)?;
        let mut params: Vec<Param> = Vec::new();
        if self.peek() != &Tok::RBracket {
            let declared = self.comma_list(|p| {
                let (pname, ptok) = p.decl_name()?;
                p.expect(&Tok::Colon)?;
                let kind = p.param_kind()?;
                Ok((Param { name: pname, kind }, ptok))
            })?;
            for (param, ptok) in declared {
                if params.iter().any(|q| q.name == param.name) {
                    return Err(self.err_at(
                        &ptok,
                        ParseErrorKind::DuplicateName,
                        format!("duplicate parameter `{}`", param.name),
                    ));
                }
                params.push(param);
            }
        }
        self.expect(&Tok::RBracket)?;
        self.expect(&Tok::LBrace)?;
        let mut sc = Scope {
            mode: Mode::Predicate,
            params: &params,
            quants: Vec::new(),
        };
        let body = self.expr(&mut sc)?;
        self.want_bool(&body)?;
        if body.e.has_quantifier() && params.is_empty() {
            return Err(self.err_at(
                &tok,
                ParseErrorKind::Syntax,
                "a predicate with quantifiers needs at least one parameter",
            ));
        }
        infer(&body.e, self.sig(), &sc.kinds(), Mode::Predicate)
            .map_err(|e| self.err_at(&body.at, ParseErrorKind::TypeMismatch, e.0))?;
        self.expect(&Tok::RBrace)?;
        Ok(PredicateDef {
            name,
            params,
            body: body.e,
        })
    }

    fn param_kind(&mut self) -> PResult<ParamKind> {
        let (name, tok) = self.ident()?;
        Ok(match name.as_str() {
            "pos" => ParamKind::Pos,
            "bool" => ParamKind::Value(Type::Bool),
            "int" => ParamKind::Value(Type::Int),
            "set" => {
                let (t, ttok) = self.ident()?;
                ParamKind::Value(Type::Set(self.enum_type(&t, &ttok)?))
            }
            other => match self.sig().record(other) {
                Some(r) => ParamKind::Record(r),
                None => ParamKind::Value(Type::Enum(self.enum_type(other, &tok)?)),
            },
        })
    }

    fn builtin_decl(&mut self) -> PResult<()> {
        self.bump();
        let (name, tok) = self.decl_name()?;
        self.check_fresh_predicate_name(&name, &tok)?;
        self.expect(&Tok::Eq)?;
        let (k, ktok) = self.ident()?;
        let kind = match k.as_str() {
            "equality" => BuiltinKind::Equality,
            "disequality" => BuiltinKind::Disequality,
            "order" => BuiltinKind::Order,
            "trivial" => BuiltinKind::Trivial,
            _ => {
                return Err(self.err_at(
                    &ktok,
                    ParseErrorKind::Syntax,
                    "expected equality, disequality, order or trivial",
                ))
            }
        };
        let mut scope = None;
        if self.is_kw("over") {
            self.bump();
            let groups = self.comma_list(|p| {
                let (segs, t) = p.dotted()?;
                let full = segs.join(".");
                if let Some(v) = p.sig().var(&full) {
                    return Ok(vec![v]);
                }
                if let Some(r) = p.sig().record_var(&full) {
                    return Ok(p.sig().record_vars[r].fields.clone());
                }
                Err(p.err_at(
                    &t,
                    ParseErrorKind::UnknownVariable,
                    format!("unknown variable `{full}`"),
                ))
            })?;
            let mut vars: Vec<VarId> = Vec::new();
            for v in groups.into_iter().flatten() {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
            scope = Some(vars);
        }
        self.model.builtins.push(BuiltinDef { name, kind, scope });
        Ok(())
    }

    fn predset_decl(&mut self) -> PResult<()> {
        self.bump();
        let (name, tok) = self.decl_name()?;
        self.check_fresh_predicate_name(&name, &tok)?;
        self.expect(&Tok::Eq)?;
        let members = self.comma_list(|p| {
            let t = p.bump();
            match t.tok {
                Tok::Ident(s) => Ok(s),
                Tok::Eq | Tok::Lt | Tok::Ne | Tok::True => Ok(t.text.clone()),
                _ => Err(p.err_at(&t, ParseErrorKind::Syntax, "expected a predicate name")),
            }
        })?;
        self.model.predsets.push((name, members));
        Ok(())
    }

    // ---- expressions ----

    fn top_expr(&mut self, mode: Mode) -> PResult<Expr> {
        let mut sc = Scope::plain(mode);
        let t = self.expr(&mut sc)?;
        self.want_bool(&t)?;
        infer(&t.e, self.sig(), &[], mode)
            .map_err(|e| self.err_at(&t.at, ParseErrorKind::TypeMismatch, e.0))?;
        Ok(t.e)
    }

    fn want_bool(&self, t: &Typed) -> PResult<()> {
        if t.ty == Type::Bool {
            Ok(())
        } else {
            Err(self.err_at(
                &t.at,
                ParseErrorKind::TypeMismatch,
                format!("expected a boolean, found {}", describe(t.ty)),
            ))
        }
    }

    fn expr(&mut self, sc: &mut Scope) -> PResult<Typed> {
        let l = self.or(sc)?;
        if self.peek() == &Tok::Implies {
            self.bump();
            let r = self.expr(sc)?;
            self.want_bool(&l)?;
            self.want_bool(&r)?;
            return Ok(Typed {
                e: Expr::implies(l.e, r.e),
                ty: Type::Bool,
                at: l.at,
            });
        }
        Ok(l)
    }

    fn or(&mut self, sc: &mut Scope) -> PResult<Typed> {
        self.nary(sc, &Tok::Or, Self::and, Expr::Or)
    }

    fn and(&mut self, sc: &mut Scope) -> PResult<Typed> {
        self.nary(sc, &Tok::And, Self::not, Expr::And)
    }

    fn nary(
        &mut self,
        sc: &mut Scope,
        op: &Tok,
        sub: fn(&mut Self, &mut Scope) -> PResult<Typed>,
        build: fn(Vec<Expr>) -> Expr,
    ) -> PResult<Typed> {
        let first = sub(self, sc)?;
        if self.peek() != op {
            return Ok(first);
        }
        self.want_bool(&first)?;
        let at = first.at.clone();
        let mut items = vec![first.e];
        while self.eat(op) {
            let t = sub(self, sc)?;
            self.want_bool(&t)?;
            items.push(t.e);
        }
        Ok(Typed {
            e: build(items),
            ty: Type::Bool,
            at,
        })
    }

    fn not(&mut self, sc: &mut Scope) -> PResult<Typed> {
        if self.peek() == &Tok::Not {
            let at = self.bump();
            let t = self.not(sc)?;
            self.want_bool(&t)?;
            return Ok(Typed {
                e: Expr::negation(t.e),
                ty: Type::Bool,
                at,
            });
        }
        self.cmp(sc)
    }

    fn cmp(&mut self, sc: &mut Scope) -> PResult<Typed> {
        let l = self.add(sc)?;
        let op = match self.peek() {
            Tok::Eq => Some(CmpOp::Eq),
            Tok::Ne => Some(CmpOp::Ne),
            Tok::Lt => Some(CmpOp::Lt),
            Tok::Le => Some(CmpOp::Le),
            Tok::Gt => Some(CmpOp::Gt),
            Tok::Ge => Some(CmpOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            let optok = self.bump();
            let r = self.add(sc)?;
            cmp_type(op, l.ty, r.ty)
                .map_err(|e| self.err_at(&optok, ParseErrorKind::TypeMismatch, e.0))?;
            return Ok(Typed {
                e: Expr::cmp(op, l.e, r.e),
                ty: Type::Bool,
                at: l.at,
            });
        }
        let negated = match (self.peek(), self.peek_at(1)) {
            (Tok::In, _) => Some(false),
            (Tok::NotIn, _) => Some(true),
            (Tok::Not, Tok::In) => {
                self.bump();
                Some(true)
            }
            _ => None,
        };
        if let Some(negated) = negated {
            let optok = self.bump();
            let r = self.add(sc)?;
            member_type(l.ty, r.ty)
                .map_err(|e| self.err_at(&optok, ParseErrorKind::TypeMismatch, e.0))?;
            let m = Expr::Member(Box::new(l.e), Box::new(r.e));
            return Ok(Typed {
                e: if negated { Expr::negation(m) } else { m },
                ty: Type::Bool,
                at: l.at,
            });
        }
        Ok(l)
    }

    fn add(&mut self, sc: &mut Scope) -> PResult<Typed> {
        let mut l = self.unary(sc)?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(l),
            };
            let optok = self.bump();
            let r = self.unary(sc)?;
            let ty = arith_type(op, l.ty, r.ty)
                .map_err(|e| self.err_at(&optok, ParseErrorKind::TypeMismatch, e.0))?;
            l = Typed {
                e: Expr::arith(op, l.e, r.e),
                ty,
                at: l.at,
            };
        }
    }

    fn unary(&mut self, sc: &mut Scope) -> PResult<Typed> {
        if self.peek() == &Tok::Minus {
            let at = self.bump();
            return match *self.peek() {
                Tok::Int(i) => {
                    self.bump();
                    Ok(Typed {
                        e: Expr::int(-i),
                        ty: Type::Int,
                        at,
                    })
                }
                _ => Err(self.err_at(
                    &at,
                    ParseErrorKind::Syntax,
                    "unary minus applies only to integer literals",
                )),
            };
        }
        self.primary(sc)
    }

    fn primary(&mut self, sc: &mut Scope) -> PResult<Typed> {
        let at = self.tok().clone();
        match at.tok.clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Typed {
                    e: Expr::int(i),
                    ty: Type::Int,
                    at,
                })
            }
            Tok::True | Tok::False => {
                self.bump();
                Ok(Typed {
                    e: Expr::Lit(Value::Bool(at.tok == Tok::True), Type::Bool),
                    ty: Type::Bool,
                    at,
                })
            }
            Tok::LParen => {
                self.bump();
                let mut t = self.expr(sc)?;
                self.expect(&Tok::RParen)?;
                t.at = at;
                Ok(t)
            }
            Tok::LBrace => self.set_literal(sc),
            Tok::Ident(w) if w == "if" => self.ite(sc),
            Tok::Ident(w) if w == "unchanged" => self.unchanged(sc),
            Tok::Ident(w) if (w == "all" || w == "some") && sc.mode == Mode::Predicate => {
                self.quantifier(sc)
            }
            Tok::Ident(_) => self.name(sc),
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn set_literal(&mut self, sc: &mut Scope) -> PResult<Typed> {
        let at = self.bump();
        let mut elems = Vec::new();
        let mut ty = None;
        if self.peek() != &Tok::RBrace {
            let items = self.comma_list(|p| p.add(sc))?;
            for t in items {
                match (t.ty, ty) {
                    (Type::Enum(e), None) => ty = Some(e),
                    (Type::Enum(e), Some(prev)) if e == prev => {}
                    _ => {
                        return Err(self.err_at(
                            &t.at,
                            ParseErrorKind::TypeMismatch,
                            "set elements must be symbols of one enumerated type",
                        ))
                    }
                }
                elems.push(t.e);
            }
        }
        self.expect(&Tok::RBrace)?;
        Ok(Typed {
            e: Expr::SetOf(ty, elems),
            ty: ty.map_or(Type::EmptySet, Type::Set),
            at,
        })
    }

    fn ite(&mut self, sc: &mut Scope) -> PResult<Typed> {
        let at = self.bump();
        let c = self.expr(sc)?;
        self.want_bool(&c)?;
        self.expect_kw("then")?;
        let a = self.expr(sc)?;
        let else_tok = self.expect_kw("else")?;
        let b = self.expr(sc)?;
        let ty = unify(a.ty, b.ty).ok_or_else(|| {
            self.err_at(
                &else_tok,
                ParseErrorKind::TypeMismatch,
                format!(
                    "branches of `if` differ in type: {} and {}",
                    describe(a.ty),
                    describe(b.ty)
                ),
            )
        })?;
        Ok(Typed {
            e: Expr::Ite(Box::new(c.e), Box::new(a.e), Box::new(b.e)),
            ty,
            at,
        })
    }

    fn unchanged(&mut self, sc: &mut Scope) -> PResult<Typed> {
        let at = self.bump();
        if sc.mode != Mode::Transition {
            return Err(self.err_at(
                &at,
                ParseErrorKind::TypeMismatch,
                "`unchanged` is only allowed in transition predicates",
            ));
        }
        self.expect(&Tok::LParen)?;
        let groups = self.comma_list(|p| {
            let (segs, t) = p.dotted()?;
            let full = segs.join(".");
            if let Some(v) = p.sig().var(&full) {
                return Ok(vec![v]);
            }
            if let Some(r) = p.sig().record_var(&full) {
                return Ok(p.sig().record_vars[r].fields.clone());
            }
            Err(p.err_at(
                &t,
                ParseErrorKind::UnknownVariable,
                format!("unknown variable `{full}`"),
            ))
        })?;
        self.expect(&Tok::RParen)?;
        let mut eqs: Vec<Expr> = groups
            .into_iter()
            .flatten()
            .map(|v| Expr::cmp(CmpOp::Eq, Expr::Next(v), Expr::Var(v)))
            .collect();
        let e = if eqs.len() == 1 {
            eqs.pop().expect("one element")
        } else {
            Expr::And(eqs)
        };
        Ok(Typed {
            e,
            ty: Type::Bool,
            at,
        })
    }

    fn quantifier(&mut self, sc: &mut Scope) -> PResult<Typed> {
        let at = self.bump();
        let kind = if at.text == "all" {
            QuantKind::All
        } else {
            QuantKind::Some
        };
        let names = self.comma_list(|p| p.decl_name())?;
        if self.is_kw("pos") || self.peek() == &Tok::Colon {
            // Optional `: pos` annotation.
            self.expect(&Tok::Colon)?;
            self.expect_kw("pos")?;
        }
        self.expect(&Tok::Bar)?;
        let first_slot = sc.params.len() + sc.quants.len();
        for (n, _) in &names {
            sc.quants.push(n.clone());
        }
        let body = self.expr(sc);
        for _ in &names {
            sc.quants.pop();
        }
        let body = body?;
        self.want_bool(&body)?;
        let mut e = body.e;
        for i in (0..names.len()).rev() {
            e = Expr::Quant(kind, first_slot + i, Box::new(e));
        }
        Ok(Typed {
            e,
            ty: Type::Bool,
            at,
        })
    }

    fn name(&mut self, sc: &mut Scope) -> PResult<Typed> {
        let (segs, at) = self.dotted()?;
        let full = segs.join(".");
        let unknown = |p: &Self| {
            p.err_at(
                &at,
                ParseErrorKind::UnknownVariable,
                format!("unknown name `{full}`"),
            )
        };

        if self.peek() == &Tok::Prime {
            let ptok = self.bump();
            let v = self.sig().var(&full).ok_or_else(|| unknown(self))?;
            if sc.mode != Mode::Transition {
                return Err(self.err_at(
                    &ptok,
                    ParseErrorKind::TypeMismatch,
                    format!("primed variable `{full}'` is only allowed in transition predicates"),
                ));
            }
            return Ok(Typed {
                e: Expr::Next(v),
                ty: self.sig().var_type(v),
                at,
            });
        }

        if self.peek() == &Tok::At {
            let attok = self.bump();
            let v = self.sig().var(&full).ok_or_else(|| unknown(self))?;
            if sc.mode != Mode::Predicate {
                return Err(self.err_at(
                    &attok,
                    ParseErrorKind::TypeMismatch,
                    "positional access is only allowed in predicate bodies",
                ));
            }
            let (pname, ptok) = self.ident()?;
            let slot = match sc.position(&pname) {
                Some(Ok(s)) => s,
                Some(Err(())) => {
                    return Err(self.err_at(
                        &ptok,
                        ParseErrorKind::TypeMismatch,
                        format!("`{pname}` is not a position"),
                    ))
                }
                None => {
                    return Err(self.err_at(
                        &ptok,
                        ParseErrorKind::UnknownVariable,
                        format!("unknown position `{pname}`"),
                    ))
                }
            };
            return Ok(Typed {
                e: Expr::At(v, slot),
                ty: self.sig().var_type(v),
                at,
            });
        }

        // Parameters and quantified positions.
        if let Some(slot) = sc.quants.iter().rposition(|q| *q == segs[0]) {
            if segs.len() == 1 {
                return Ok(Typed {
                    e: Expr::Pos(sc.params.len() + slot),
                    ty: Type::Pos,
                    at,
                });
            }
        }
        if let Some(slot) = sc.params.iter().position(|p| p.name == segs[0]) {
            let kind = sc.params[slot].kind;
            return match (kind, segs.len()) {
                (ParamKind::Pos, 1) => Ok(Typed {
                    e: Expr::Pos(slot),
                    ty: Type::Pos,
                    at,
                }),
                (ParamKind::Value(t), 1) => Ok(Typed {
                    e: Expr::Param(slot, None),
                    ty: t,
                    at,
                }),
                (ParamKind::Record(r), 2) => {
                    let rec = &self.sig().records[r];
                    let f = rec.fields.iter().position(|(n, _)| *n == segs[1]);
                    match f {
                        Some(f) => Ok(Typed {
                            e: Expr::Param(slot, Some(f)),
                            ty: rec.fields[f].1.ty(),
                            at,
                        }),
                        None => Err(self.err_at(
                            &at,
                            ParseErrorKind::UnknownVariable,
                            format!("record `{}` has no field `{}`", rec.name, segs[1]),
                        )),
                    }
                }
                (ParamKind::Record(_), _) => Err(self.err_at(
                    &at,
                    ParseErrorKind::TypeMismatch,
                    format!("record parameter `{}` must be accessed through one field", segs[0]),
                )),
                _ => Err(self.err_at(
                    &at,
                    ParseErrorKind::TypeMismatch,
                    format!("`{}` has no fields", segs[0]),
                )),
            };
        }

        if let Some(v) = self.sig().var(&full) {
            if sc.mode == Mode::Predicate {
                return Err(self.err_at(
                    &at,
                    ParseErrorKind::TypeMismatch,
                    format!("variable `{full}` needs a position (`{full}@t`) inside a predicate"),
                ));
            }
            return Ok(Typed {
                e: Expr::Var(v),
                ty: self.sig().var_type(v),
                at,
            });
        }
        if segs.len() == 1 {
            if let Some((t, s)) = self.sig().types.symbol(&full) {
                return Ok(Typed {
                    e: Expr::Lit(Value::Sym(s), Type::Enum(t)),
                    ty: Type::Enum(t),
                    at,
                });
            }
        }
        if self.sig().record_var(&full).is_some() {
            return Err(self.err_at(
                &at,
                ParseErrorKind::TypeMismatch,
                format!("record variable `{full}` must be accessed through a field"),
            ));
        }
        Err(unknown(self))
    }

    // ---- trace constraints ----

    fn constraint(&mut self) -> PResult<TraceConstraint> {
        let start = self.tok().clone();
        let mut vars: Vec<String> = Vec::new();
        if self.eat(&Tok::Exists) {
            vars = self.comma_list(|p| p.ident().map(|(n, _)| n))?;
            self.expect(&Tok::Colon)?;
        }
        let mut atoms = vec![self.atom(&vars)?];
        while self.eat(&Tok::And) {
            atoms.push(self.atom(&vars)?);
        }
        TraceConstraint::new(vars.len(), atoms)
            .map_err(|e| self.err_at(&start, ParseErrorKind::Syntax, e.to_string()))
    }

    fn pos_var(&mut self, vars: &[String]) -> PResult<usize> {
        let (n, t) = self.ident()?;
        vars.iter().position(|v| *v == n).ok_or_else(|| {
            self.err_at(
                &t,
                ParseErrorKind::UnknownVariable,
                format!("unbound position variable `{n}`"),
            )
        })
    }

    fn atom(&mut self, vars: &[String]) -> PResult<Atom> {
        if self.eat(&Tok::True) {
            return Ok(Atom::True);
        }
        let (segs, at) = self.dotted()?;
        let full = segs.join(".");
        match self.peek() {
            Tok::Lt => {
                let p = vars.iter().position(|v| *v == full).ok_or_else(|| {
                    self.err_at(
                        &at,
                        ParseErrorKind::UnknownVariable,
                        format!("unbound position variable `{full}`"),
                    )
                })?;
                self.bump();
                let q = self.pos_var(vars)?;
                Ok(Atom::Less(p, q))
            }
            Tok::LBracket => {
                self.bump();
                let def = self.model.predicate(&full).cloned().ok_or_else(|| {
                    self.err_at(
                        &at,
                        ParseErrorKind::UnknownVariable,
                        format!("unknown predicate `{full}`"),
                    )
                })?;
                let mut args = Vec::new();
                if self.peek() != &Tok::RBracket {
                    args = self.comma_list(|p| p.pred_arg(vars))?;
                }
                self.expect(&Tok::RBracket)?;
                if !typecheck(self.sig(), &def, &args) {
                    return Err(self.err_at(
                        &at,
                        ParseErrorKind::TypeMismatch,
                        format!("arguments do not match the parameters of `{full}`"),
                    ));
                }
                Ok(Atom::Pred {
                    def: PredRef(def),
                    args,
                })
            }
            Tok::At => {
                self.bump();
                let var = self.sig().var(&full).ok_or_else(|| {
                    self.err_at(
                        &at,
                        ParseErrorKind::UnknownVariable,
                        format!("unknown variable `{full}`"),
                    )
                })?;
                let pos = self.pos_var(vars)?;
                let optok = self.bump();
                let eq = match optok.tok {
                    Tok::Eq => true,
                    Tok::Ne => false,
                    _ => {
                        return Err(self.err_at(&optok, ParseErrorKind::Syntax, "expected `=` or `!=`"))
                    }
                };
                let rhs_is_slot = matches!(self.peek(), Tok::Ident(_))
                    && (self.peek_at(1) == &Tok::At
                        || (self.peek_at(1) == &Tok::Dot && {
                            // dotted variable name followed by `@`
                            let mut j = 1;
                            while self.peek_at(j) == &Tok::Dot
                                && matches!(self.peek_at(j + 1), Tok::Ident(_))
                            {
                                j += 2;
                            }
                            self.peek_at(j) == &Tok::At
                        }));
                if rhs_is_slot {
                    let (segs2, at2) = self.dotted()?;
                    let full2 = segs2.join(".");
                    let var2 = self.sig().var(&full2).ok_or_else(|| {
                        self.err_at(
                            &at2,
                            ParseErrorKind::UnknownVariable,
                            format!("unknown variable `{full2}`"),
                        )
                    })?;
                    self.expect(&Tok::At)?;
                    let pos2 = self.pos_var(vars)?;
                    if self.sig().var_type(var) != self.sig().var_type(var2) {
                        return Err(self.err_at(
                            &at2,
                            ParseErrorKind::TypeMismatch,
                            format!("`{full}` and `{full2}` have different types"),
                        ));
                    }
                    let (a, b) = ((var, pos), (var2, pos2));
                    return Ok(if eq {
                        Atom::EqVars { a, b }
                    } else {
                        Atom::NeqVars { a, b }
                    });
                }
                let value = self.constant(var)?;
                Ok(if eq {
                    Atom::EqConst { var, pos, value }
                } else {
                    Atom::NeqConst { var, pos, value }
                })
            }
            _ => Err(self.unexpected("`@`, `[` or `<`")),
        }
    }

    fn pred_arg(&mut self, vars: &[String]) -> PResult<Arg> {
        let (segs, at) = self.dotted()?;
        let full = segs.join(".");
        if !self.eat(&Tok::At) {
            let p = vars.iter().position(|v| *v == full).ok_or_else(|| {
                self.err_at(
                    &at,
                    ParseErrorKind::UnknownVariable,
                    format!("unbound position variable `{full}`"),
                )
            })?;
            return Ok(Arg::Pos(p));
        }
        let pos = self.pos_var(vars)?;
        if let Some(var) = self.sig().var(&full) {
            return Ok(Arg::Var { var, pos });
        }
        if let Some(rec) = self.sig().record_var(&full) {
            return Ok(Arg::Record { rec, pos });
        }
        Err(self.err_at(
            &at,
            ParseErrorKind::UnknownVariable,
            format!("unknown variable `{full}`"),
        ))
    }

    /// A literal value in the domain of `var`.
    fn constant(&mut self, var: VarId) -> PResult<Value> {
        let at = self.tok().clone();
        let domain = self.sig().vars[var].domain;
        let bad = |p: &Self, what: &str| {
            p.err_at(
                &at,
                ParseErrorKind::TypeMismatch,
                format!("expected {what} for `{}`", p.sig().vars[var].name),
            )
        };
        let value = match domain {
            Domain::Bool => match self.bump().tok {
                Tok::True => Value::Bool(true),
                Tok::False => Value::Bool(false),
                _ => return Err(bad(self, "a boolean")),
            },
            Domain::Int { .. } => Value::Int(self.signed_int().map_err(|_| bad(self, "an integer"))?),
            Domain::Enum(t) => {
                let (s, _) = self.ident().map_err(|_| bad(self, "a symbol"))?;
                match self.sig().types.symbol(&s) {
                    Some((t2, i)) if t2 == t => Value::Sym(i),
                    _ => return Err(bad(self, "a symbol of its type")),
                }
            }
            Domain::Set(t) => {
                self.expect(&Tok::LBrace)?;
                let mut mask = 0u64;
                if self.peek() != &Tok::RBrace {
                    let names = self.comma_list(|p| p.ident().map(|(n, _)| n))?;
                    for n in names {
                        match self.sig().types.symbol(&n) {
                            Some((t2, i)) if t2 == t => mask |= 1 << i,
                            _ => return Err(bad(self, "symbols of its element type")),
                        }
                    }
                }
                self.expect(&Tok::RBrace)?;
                Value::Set(mask)
            }
        };
        if !self.sig().types.contains(domain, value) {
            return Err(self.err_at(
                &at,
                ParseErrorKind::TypeMismatch,
                format!("value outside the domain of `{}`", self.sig().vars[var].name),
            ));
        }
        Ok(value)
    }
}

fn conjoin(mut es: Vec<Expr>) -> Expr {
    match es.len() {
        0 => Expr::tt(),
        1 => es.pop().expect("one element"),
        _ => Expr::And(es),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const COUNTER: &str = "
        var a: int[-3..3]
        init a = 1
        trans a' = a + 1 or a' = a - 1 or a' = a
        invariant Phi: a = 1
        pred lessThanOne[v: int] { v < 1 }
    ";

    #[test]
    fn counter_model_parses() {
        let m = parse_model(COUNTER).unwrap();
        assert_eq!(m.system.sig.vars.len(), 1);
        assert_eq!(m.properties.len(), 1);
        assert_eq!(m.predicates[0].arity(), 1);
    }

    #[test]
    fn empty_source_is_a_syntax_error_at_origin() {
        let e = parse_model("").unwrap_err();
        assert_eq!((e.kind, e.line, e.column), (ParseErrorKind::Syntax, 1, 1));
        let e = parse_model("  -- only a comment\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
    }

    #[test]
    fn undeclared_variable_is_named() {
        let e = parse_model("var a: bool\ninit b = 1").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownVariable);
        assert!(e.message.contains("`b`"), "{}", e.message);
        assert_eq!((e.line, e.column), (2, 6));
    }

    #[test]
    fn type_errors_point_at_operator() {
        let e = parse_model("var a: bool\ninit a = 1").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::TypeMismatch);
        assert_eq!((e.line, e.column), (2, 8));
    }

    #[test]
    fn primes_only_in_transitions() {
        let e = parse_model("var a: bool\ninit a'").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::TypeMismatch);
    }

    #[test]
    fn duplicates_are_rejected() {
        let e = parse_model("var a: bool\nvar a: bool").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DuplicateName);
        let e = parse_model("type T = {A}\ntype U = {A}\nvar x: T").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DuplicateName);
    }

    #[test]
    fn unknown_type() {
        let e = parse_model("var a: Colour").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownType);
    }

    #[test]
    fn quantified_predicate_needs_a_parameter() {
        let m = parse_model(COUNTER).unwrap();
        let e = parse_predicate("pred p[] { all t | a@t = 1 }", &m).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
        let p = parse_predicate("pred p[u: pos] { all t | t < u => a@t = 1 }", &m).unwrap();
        assert!(p.body.has_quantifier());
    }

    #[test]
    fn predicate_bodies_need_positions() {
        let m = parse_model(COUNTER).unwrap();
        let e = parse_predicate("pred p[] { a = 1 }", &m).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::TypeMismatch);
        assert!(parse_predicate("pred alwaysTrue[] { true }", &m).is_ok());
    }

    #[test]
    fn constraint_round_trips_through_render() {
        let m = parse_model(COUNTER).unwrap();
        for src in [
            "exists i1 : lessThanOne[a@i1]",
            "exists i1,i2 : a@i2 = 1 /\\ i1 < i2",
            "exists i1,i2 : a@i1 = a@i2",
            "exists i1 : a@i1 != -2",
            "true",
        ] {
            let w = parse_constraint(src, &m).unwrap();
            assert_eq!(w.render(&m.system.sig), src);
        }
    }

    #[test]
    fn constraint_errors() {
        let m = parse_model(COUNTER).unwrap();
        assert!(parse_constraint("exists i1 : a@i2 = 1", &m).is_err());
        assert!(parse_constraint("exists i1 : a@i1 = 9", &m).is_err());
        assert!(parse_constraint("exists i1 : nope[a@i1]", &m).is_err());
    }
}
