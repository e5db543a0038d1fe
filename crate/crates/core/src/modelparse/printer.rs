//! Prints models back to source. Every compound expression is fully
//! parenthesized, so the output reparses to an identical model.

use std::fmt::Write;

use super::Model;
use crate::factgen::{Param, PredicateDef};
use crate::kernel::{ArithOp, Domain, Expr, ParamKind, QuantKind, Signature, Type};

pub fn print_model(m: &Model) -> String {
    let sig = &m.system.sig;
    let mut out = String::new();
    for t in sig.types.iter() {
        let _ = writeln!(out, "type {} = {{{}}}", t.name, t.symbols.join(", "));
    }
    for r in &sig.records {
        let fields: Vec<String> = r
            .fields
            .iter()
            .map(|(f, d)| format!("{f}: {}", domain(sig, *d)))
            .collect();
        let _ = writeln!(out, "record {} {{ {} }}", r.name, fields.join(", "));
    }
    let mut v = 0;
    while v < sig.vars.len() {
        if let Some(rv) = sig.record_vars.iter().find(|rv| rv.fields.first() == Some(&v)) {
            let _ = writeln!(out, "var {}: {}", rv.name, sig.records[rv.record].name);
            v += rv.fields.len();
            continue;
        }
        let d = &sig.vars[v];
        let _ = writeln!(out, "var {}: {}", d.name, domain(sig, d.domain));
        v += 1;
    }
    let _ = writeln!(out, "init {}", print_expr(&m.system.init, sig, &[]));
    let _ = writeln!(out, "trans {}", print_expr(&m.system.trans, sig, &[]));
    for p in &m.properties {
        let _ = writeln!(out, "invariant {}: {}", p.name, print_expr(&p.expr, sig, &[]));
    }
    for p in &m.predicates {
        let _ = writeln!(out, "{}", print_predicate(p, sig));
    }
    for b in &m.builtins {
        let _ = write!(out, "builtin {} = {}", b.name, b.kind.keyword());
        if let Some(scope) = &b.scope {
            let names: Vec<&str> = scope.iter().map(|v| sig.vars[*v].name.as_str()).collect();
            let _ = write!(out, " over {}", names.join(", "));
        }
        out.push('\n');
    }
    for (name, members) in &m.predsets {
        let _ = writeln!(out, "predset {name} = {}", members.join(", "));
    }
    out
}

pub fn print_predicate(p: &PredicateDef, sig: &Signature) -> String {
    let params: Vec<String> = p
        .params
        .iter()
        .map(|q| format!("{}: {}", q.name, param_kind(sig, q.kind)))
        .collect();
    format!(
        "pred {}[{}] {{ {} }}",
        p.name,
        params.join(", "),
        print_expr(&p.body, sig, &p.params)
    )
}

fn domain(sig: &Signature, d: Domain) -> String {
    match d {
        Domain::Bool => "bool".into(),
        Domain::Int { lo, hi } => format!("int[{lo}..{hi}]"),
        Domain::Enum(t) => sig.types.get(t).name.clone(),
        Domain::Set(t) => format!("set {}", sig.types.get(t).name),
    }
}

fn param_kind(sig: &Signature, k: ParamKind) -> String {
    match k {
        ParamKind::Pos => "pos".into(),
        ParamKind::Value(Type::Bool) => "bool".into(),
        ParamKind::Value(Type::Int) => "int".into(),
        ParamKind::Value(Type::Enum(t)) => sig.types.get(t).name.clone(),
        ParamKind::Value(Type::Set(t)) => format!("set {}", sig.types.get(t).name),
        ParamKind::Value(t) => format!("<{t:?}>"),
        ParamKind::Record(r) => sig.records[r].name.clone(),
    }
}

/// Prints an expression; `params` names the parameters of the enclosing
/// predicate, and quantified positions print as `q_<slot>`.
pub fn print_expr(e: &Expr, sig: &Signature, params: &[Param]) -> String {
    let slot = |s: usize| match params.get(s) {
        Some(p) => p.name.clone(),
        None => format!("q_{s}"),
    };
    let go = |x: &Expr| print_expr(x, sig, params);
    let join = |xs: &[Expr], op: &str| {
        let parts: Vec<String> = xs.iter().map(go).collect();
        format!("({})", parts.join(&format!(" {op} ")))
    };
    match e {
        Expr::Lit(v, t) => sig.types.render(*t, *v),
        Expr::SetOf(_, xs) => {
            let parts: Vec<String> = xs.iter().map(go).collect();
            format!("{{{}}}", parts.join(", "))
        }
        Expr::Var(v) => sig.vars[*v].name.clone(),
        Expr::Next(v) => format!("{}'", sig.vars[*v].name),
        Expr::At(v, s) => format!("{}@{}", sig.vars[*v].name, slot(*s)),
        Expr::Pos(s) => slot(*s),
        Expr::Param(s, None) => slot(*s),
        Expr::Param(s, Some(f)) => {
            let field = match params.get(*s).map(|p| p.kind) {
                Some(ParamKind::Record(r)) => sig.records[r].fields[*f].0.clone(),
                _ => format!("#{f}"),
            };
            format!("{}.{field}", slot(*s))
        }
        Expr::Not(x) => format!("(not {})", go(x)),
        Expr::And(xs) => join(xs, "and"),
        Expr::Or(xs) => join(xs, "or"),
        Expr::Implies(a, b) => format!("({} => {})", go(a), go(b)),
        Expr::Ite(c, a, b) => format!("(if {} then {} else {})", go(c), go(a), go(b)),
        Expr::Cmp(op, a, b) => format!("({} {} {})", go(a), op.symbol(), go(b)),
        Expr::Arith(op, a, b) => {
            let sym = if *op == ArithOp::Add { "+" } else { "-" };
            format!("({} {sym} {})", go(a), go(b))
        }
        Expr::Member(a, b) => format!("({} in {})", go(a), go(b)),
        Expr::Quant(k, s, body) => {
            let kw = if *k == QuantKind::All { "all" } else { "some" };
            format!("({kw} q_{s} | {})", go(body))
        }
    }
}
