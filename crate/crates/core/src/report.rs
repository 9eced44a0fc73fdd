//! Report documents.
//!
//! A report is built once as an ordered JSON tree. The machine rendering is
//! that tree; the text rendering walks the same tree, so both show the same
//! digits.

use serde_json::{json, Map, Number, Value};

use crate::flattening::{Certificate, DominationFlag, FlatteningOutcome, MajorantTable};
use crate::germ::GermTriple;
use crate::obstructions::{LedgerEntry, ObstructionLedger};
use crate::scalar::{Cx, Precision, Real};

/// A real as a JSON value: a number in double mode, a decimal string otherwise.
pub fn num<T: Real>(x: &T) -> Value {
    if T::precision() == Precision::Double {
        match Number::from_f64(x.to_f64()) {
            Some(n) => Value::Number(n),
            None => Value::String(format!("{}", x.to_f64())),
        }
    } else {
        Value::String(x.to_decimal())
    }
}

pub fn fnum(x: f64) -> Value {
    Number::from_f64(x).map_or_else(|| Value::String(format!("{x}")), Value::Number)
}

pub fn cnum<T: Real>(z: &Cx<T>) -> Value {
    json!([num(&z.re), num(&z.im)])
}

pub fn germ_header<T: Real>(g: &GermTriple<T>, tol: f64) -> Value {
    let shape = g.shape();
    let win = g.window();
    json!({
        "fingerprint": crate::scenario::fingerprint(g),
        "precision": T::precision().to_string(),
        "rho": cnum(&g.rho),
        "t": cnum(&g.t.value),
        "s": cnum(&g.s.value),
        "orders": [shape.nw, shape.nz],
        "window": [win.min, win.max],
        "tol": fnum(tol),
    })
}

pub fn ledger_entry<T: Real>(e: &LedgerEntry<T>) -> Value {
    json!({
        "class": format!("{}_({},{})", e.kind, e.n, e.m),
        "n": e.n,
        "m": e.m,
        "value": cnum(&e.class_value),
        "factor": cnum(&e.factor),
        "resonant": e.resonant,
    })
}

pub fn ledger<T: Real>(l: &ObstructionLedger<T>) -> Value {
    json!({
        "fingerprint": l.fingerprint,
        "entries": l.entries.iter().map(ledger_entry).collect::<Vec<_>>(),
    })
}

pub fn outcome<T: Real>(out: &FlatteningOutcome<T>) -> Value {
    let pd = &out.germ.polydisc;
    let norms = |jet: &crate::series::TransverseJet<T>| {
        jet.terms()
            .map(|((nu, mu), p)| json!({"nu": nu, "mu": mu, "norm": num(&p.annulus_norm(&pd.r_in, &pd.r_out))}))
            .collect::<Vec<_>>()
    };
    let q1: Vec<Value> = out
        .tables
        .q1
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(mu, p)| json!({"mu": mu, "norm": num(&p.annulus_norm(&pd.r_in, &pd.r_out))}))
        .collect();
    json!({
        "success": out.success,
        "failure": out.failure.map_or(Value::Null, |s| Value::String(s.to_string())),
        "residual": num(&out.residual),
        "stages": out.stages,
        "max_denominator_inverse": num(&out.max_denominator_inverse),
        "ledger": ledger(&out.ledger),
        "tables": {"G": norms(&out.tables.g), "Q": norms(&out.tables.q), "Q1": q1},
    })
}

pub fn majorant<T: Real>(t: &MajorantTable<T>) -> Value {
    json!({
        "K": num(&t.k),
        "R": num(&t.r),
        "M": num(&t.m),
        "orders": [t.shape.nw, t.shape.nz],
        "coefficients": t.coeffs.iter().map(|((nu, mu), a)| json!({"nu": nu, "mu": mu, "A": num(a)})).collect::<Vec<_>>(),
        "residual": num(&t.residual),
        "iterations": t.iterations,
        "radius_estimate": fnum(t.radius_estimate()),
    })
}

fn flag<T: Real>(f: &DominationFlag<T>) -> Value {
    json!({"kind": f.kind.to_string(), "nu": f.nu, "mu": f.mu, "bound": num(&f.bound), "majorant": num(&f.majorant)})
}

pub fn certificate<T: Real>(c: &Certificate<T>) -> Value {
    let violations: Vec<Value> = c.flags.iter().chain(&c.q1_flags).filter(|f| !f.dominated).map(flag).collect();
    json!({
        "K": num(&c.k),
        "R": num(&c.r),
        "M": num(&c.m),
        "required": {"K": num(&c.required.0), "R": num(&c.required.1), "M": num(&c.required.2)},
        "findings": c.findings,
        "certified": c.all_dominated(),
        "flags_checked": c.flags.len() + c.q1_flags.len(),
        "violations": violations,
        "radius_estimate": c.radius.map_or(Value::Null, fnum),
    })
}

/// Canonical machine rendering: pretty JSON, keys in insertion order.
pub fn render_machine(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("json values always serialize");
    s.push('\n');
    s
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            Some(format!("[{}]", a.iter().map(|x| scalar(x).unwrap_or_default()).collect::<Vec<_>>().join(", ")))
        }
        _ => None,
    }
}

fn walk(out: &mut String, map: &Map<String, Value>, indent: usize) {
    let pad = "  ".repeat(indent);
    for (k, v) in map {
        if let Some(s) = scalar(v) {
            out.push_str(&format!("{pad}{k}: {s}\n"));
            continue;
        }
        match v {
            Value::Object(m) => {
                out.push_str(&format!("{pad}{k}:\n"));
                walk(out, m, indent + 1);
            }
            Value::Array(items) => {
                out.push_str(&format!("{pad}{k}: ({} items)\n", items.len()));
                for item in items {
                    match item {
                        Value::Object(m) => {
                            let line: Vec<String> =
                                m.iter().map(|(k, v)| format!("{k}={}", scalar(v).unwrap_or_else(|| v.to_string()))).collect();
                            out.push_str(&format!("{pad}  - {}\n", line.join(" ")));
                        }
                        other => out.push_str(&format!("{pad}  - {}\n", scalar(other).unwrap_or_else(|| other.to_string()))),
                    }
                }
            }
            _ => unreachable!("scalars handled above"),
        }
    }
}

/// Human rendering of the same tree.
pub fn render_text(doc: &Value) -> String {
    let mut out = String::new();
    match doc {
        Value::Object(m) => walk(&mut out, m, 0),
        other => out.push_str(&format!("{other}\n")),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_machine_share_digits() {
        let doc = json!({"a": fnum(0.1 + 0.2), "b": {"c": [fnum(1e-300), Value::Null]}, "d": [{"x": 1}]});
        let text = render_text(&doc);
        let machine = render_machine(&doc);
        assert!(text.contains("a: 0.30000000000000004"));
        assert!(machine.contains("0.30000000000000004"));
        assert!(text.contains("c: [1e-300, -]"));
        assert!(text.contains("  - x=1"));
    }
}
