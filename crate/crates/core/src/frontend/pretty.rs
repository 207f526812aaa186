use std::fmt::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::expr::{Comparison, Expr, ExprKind};
use crate::fp::{ExactReal, FloatFormat, RoundingMode};

use super::ast::{AstExpr, Cond, Range, SourceProgram, Stmt};

/// Source text for `p`. Expressions are fully parenthesized, so parsing the
/// output gives back the same program.
pub fn pretty(p: &SourceProgram) -> String {
    let mut out = String::new();
    for d in &p.decls {
        let _ = write!(out, "var {} : {}", d.name, d.format);
        if let Some(r) = &d.range {
            let _ = write!(out, " in {}", range(r));
        }
        out.push_str(";\n");
    }
    stmts(&mut out, &p.stmts, 0);
    out
}

fn range(r: &Range) -> String {
    format!("[{}; {}]", r.lo.text, r.hi.text)
}

fn stmts(out: &mut String, ss: &[Stmt], depth: usize) {
    for s in ss {
        stmt(out, s, depth);
    }
}

fn block(out: &mut String, ss: &[Stmt], depth: usize) {
    out.push_str("{\n");
    stmts(out, ss, depth + 1);
    out.push_str(&"    ".repeat(depth));
    out.push('}');
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    out.push_str(&"    ".repeat(depth));
    match s {
        Stmt::Assign { target, value, .. } => {
            let _ = writeln!(out, "{target} = {};", ast_expr(value));
        }
        Stmt::Input { target, range: r, .. } => {
            let _ = writeln!(out, "input {target} in {};", range(r));
        }
        Stmt::If { cond: c, then_branch, else_branch, .. } => {
            let _ = write!(out, "if ({}) ", cond(c));
            block(out, then_branch, depth);
            if !else_branch.is_empty() {
                out.push_str(" else ");
                block(out, else_branch, depth);
            }
            out.push('\n');
        }
        Stmt::While { cond: c, body, .. } => {
            let _ = write!(out, "while ({}) ", cond(c));
            block(out, body, depth);
            out.push('\n');
        }
    }
}

fn cond(c: &Cond) -> String {
    match c {
        Cond::True => "true".into(),
        Cond::Any => "*".into(),
        Cond::Compare { lhs, op, rhs } => format!("{} {} {}", ast_expr(lhs), op.symbol(), ast_expr(rhs)),
    }
}

fn annotation(r: RoundingMode) -> String {
    match r {
        RoundingMode::NearestEven => String::new(),
        r => format!("@rm({})", r.short_name()),
    }
}

fn cast_name(f: FloatFormat) -> String {
    format!("cast_{f}")
}

fn ast_expr(e: &AstExpr) -> String {
    match e {
        AstExpr::Num(lit) => lit.text.clone(),
        AstExpr::Var { name, .. } => name.clone(),
        AstExpr::Neg { operand, .. } => format!("-({})", ast_expr(operand)),
        AstExpr::Binary { op, rounding, lhs, rhs, .. } => {
            format!("({} {}{} {})", ast_expr(lhs), op.symbol(), annotation(*rounding), ast_expr(rhs))
        }
        AstExpr::Cast { format, rounding, operand, .. } => {
            format!("{}{}({})", cast_name(*format), annotation(*rounding), ast_expr(operand))
        }
    }
}

/// An elaborated expression in source syntax, constants written exactly.
pub fn show_expr(e: &Expr, names: &[String]) -> String {
    match &e.kind {
        ExprKind::Const(c) => exact_decimal(c.value()),
        ExprKind::Var(v) => names[v.index()].clone(),
        ExprKind::Neg(operand) => format!("-({})", show_expr(operand, names)),
        ExprKind::Binary { op, lhs, rhs, rounding } => {
            format!("({} {}{} {})", show_expr(lhs, names), op.symbol(), annotation(*rounding), show_expr(rhs, names))
        }
        ExprKind::Cast { operand, rounding } => {
            format!("{}{}({})", cast_name(e.format), annotation(*rounding), show_expr(operand, names))
        }
    }
}

pub fn show_comparison(c: &Comparison, names: &[String]) -> String {
    format!("{} {} {}", show_expr(&c.lhs, names), c.op.symbol(), show_expr(&c.rhs, names))
}

/// Exact decimal text of a rational whose denominator has only the prime
/// factors 2 and 5, in scientific form when that is shorter. Other values
/// are written as a quotient.
pub fn exact_decimal(x: &ExactReal) -> String {
    let ten = BigInt::from(10);
    let mut den = x.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while den.is_even() {
        den /= 2;
        twos += 1;
    }
    while (&den % 5u32).is_zero() {
        den /= 5;
        fives += 1;
    }
    if !den.is_one() {
        return format!("({} / {})", x.numer(), x.denom());
    }
    let k = twos.max(fives);
    // x = digits * 10^exp
    let mut digits = x.numer() * num_traits::pow(ten.clone(), k as usize) / x.denom();
    let mut exp = -(k as i64);
    while !digits.is_zero() && (&digits % &ten).is_zero() {
        digits /= &ten;
        exp += 1;
    }
    let sign = if digits.is_negative() { "-" } else { "" };
    let mag = digits.abs().to_string();
    if exp >= 0 {
        return if exp <= 6 { format!("{sign}{mag}{}", "0".repeat(exp as usize)) } else { format!("{sign}{mag}e{exp}") };
    }
    let frac = (-exp) as usize;
    if frac <= 20 {
        if mag.len() > frac {
            let (int, rest) = mag.split_at(mag.len() - frac);
            format!("{sign}{int}.{rest}")
        } else {
            format!("{sign}0.{}{mag}", "0".repeat(frac - mag.len()))
        }
    } else {
        format!("{sign}{mag}e{exp}")
    }
}
