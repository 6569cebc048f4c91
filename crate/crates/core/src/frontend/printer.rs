//! Canonical domain text.

use std::fmt::Write;

use crate::solver::{primed, Bounded, Cond, CpfKind, Expr, HmdpModel};

fn num(v: f64) -> String {
    format!("{}", v)
}

fn bounded(b: &Bounded) -> String {
    format!("{} in [{}, {}]", b.name, num(b.lo), num(b.hi))
}

/// Render `model` so that parsing the text gives the same model back.
pub fn print(model: &HmdpModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "domain {}", model.name);
    if !model.cvars.is_empty() {
        let _ = writeln!(s, "\ncvariables {{");
        for v in &model.cvars {
            let _ = writeln!(s, "  {}", bounded(v));
        }
        s.push_str("}\n");
    }
    if !model.bvars.is_empty() {
        let _ = writeln!(s, "\nbvariables {{");
        for (b, _) in &model.bvars {
            let _ = writeln!(s, "  {}", b);
        }
        s.push_str("}\n");
    }
    let _ = writeln!(s, "\ndiscount {};", num(model.discount));
    if let Some(h) = model.horizon {
        let _ = writeln!(s, "horizon {};", h);
    }
    for a in &model.actions {
        let params: Vec<String> = a.params.iter().map(bounded).collect();
        let _ = writeln!(s, "\naction {}({}) {{", a.name, params.join(", "));
        for c in &a.cpfs {
            match &c.kind {
                CpfKind::Ple(e) => {
                    let _ = writeln!(s, "  {} = {};", primed(&c.var), expr(e));
                }
                CpfKind::Bernoulli(p) => {
                    let _ = writeln!(s, "  {} = bernoulli({});", primed(&c.var), expr(p));
                }
            }
        }
        if let Some(r) = &a.reward {
            let _ = writeln!(s, "  reward = {};", expr(r));
        }
        s.push_str("}\n");
    }
    if let Some(r) = &model.reward {
        let _ = writeln!(s, "\nreward = {};", expr(r));
    }
    s
}

pub fn expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

pub fn cond(c: &Cond) -> String {
    let mut s = String::new();
    write_cond(&mut s, c, 0);
    s
}

// expression levels: 0 if, 1 sum, 2 product, 3 unary, 4 atom
fn write_expr(s: &mut String, e: &Expr, ctx: u8) {
    let own = match e {
        Expr::Ite(..) => 0,
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) => 2,
        Expr::Neg(..) => 3,
        _ => 4,
    };
    let paren = own < ctx;
    if paren {
        s.push('(');
    }
    match e {
        Expr::Num(v) => s.push_str(&num(*v)),
        Expr::Var(n, _) => s.push_str(n),
        Expr::Neg(a) => {
            s.push('-');
            // keep `-(3)` apart from the literal `-3`
            let ctx = if matches!(**a, Expr::Num(_)) { 5 } else { 3 };
            write_expr(s, a, ctx);
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            write_expr(s, a, 1);
            s.push_str(if matches!(e, Expr::Add(..)) { " + " } else { " - " });
            write_expr(s, b, 2);
        }
        Expr::Mul(a, b) => {
            write_expr(s, a, 2);
            s.push_str(" * ");
            write_expr(s, b, 3);
        }
        Expr::Abs(a) => {
            s.push_str("abs(");
            write_expr(s, a, 0);
            s.push(')');
        }
        Expr::Ite(c, a, b) => {
            s.push_str("if ");
            write_cond(s, c, 0);
            s.push_str(" then ");
            write_expr(s, a, 0);
            s.push_str(" else ");
            write_expr(s, b, 0);
        }
    }
    if paren {
        s.push(')');
    }
}

// condition levels: 0 or, 1 and, 2 not, 3 atom
fn write_cond(s: &mut String, c: &Cond, ctx: u8) {
    let own = match c {
        Cond::Or(..) => 0,
        Cond::And(..) => 1,
        Cond::Not(..) => 2,
        _ => 3,
    };
    let paren = own < ctx;
    if paren {
        s.push('(');
    }
    match c {
        Cond::Const(b) => s.push_str(if *b { "true" } else { "false" }),
        Cond::Bool(n, _) => s.push_str(n),
        Cond::Cmp(a, op, b) => {
            write_expr(s, a, 1);
            s.push(' ');
            s.push_str(op.symbol());
            s.push(' ');
            write_expr(s, b, 1);
        }
        Cond::Not(a) => {
            s.push('!');
            write_cond(s, a, 2);
        }
        Cond::And(a, b) => {
            write_cond(s, a, 1);
            s.push_str(" & ");
            write_cond(s, b, 2);
        }
        Cond::Or(a, b) => {
            write_cond(s, a, 0);
            s.push_str(" | ");
            write_cond(s, b, 1);
        }
    }
    if paren {
        s.push(')');
    }
}
