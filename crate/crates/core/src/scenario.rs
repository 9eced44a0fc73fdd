//! Scenario files and built-in fixtures.
//!
//! A scenario is line-oriented text. Header lines are `key value...`;
//! coefficient lines are `g|q <nu> <mu> <mode> <re> <im>`; `#` starts a
//! comment. Every header key is optional:
//!
//! ```text
//! rho 2 0              # deck multiplier (re im), default 2
//! t 1 0                # flat factors, default 1
//! s 1 0
//! torsion_t 1          # order of t, or `none`
//! torsion_s 1
//! window -8 8          # x-mode window
//! orders 4 4           # N_w N_z
//! polydisc 0.7 1.4 1 1 # r_in r_out r_w r_z, default from rho
//! tol 1e-9
//! precision double     # or a digit count
//! g 2 0 0 5e-1 0e0
//! ```
//!
//! Numbers are written so that they parse back to the identical value.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::germ::{default_polydisc, FlatFactor, GaugeChange, GermTriple, DEFAULT_TOL};
use crate::scalar::{cabs, cone, cpowi, cx, Cx, Precision, Real};
use crate::series::{JetShape, ModeWindow, PolydiscSpec, TransverseJet};

pub const DEFAULT_ORDERS: (usize, usize) = (4, 4);
pub const DEFAULT_WINDOW: i32 = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario<T: Real> {
    pub germ: GermTriple<T>,
    pub tol: f64,
}

impl<T: Real> Scenario<T> {
    pub fn new(germ: GermTriple<T>) -> Self {
        Scenario { germ, tol: DEFAULT_TOL }
    }
}

fn parse_err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

/// Whitespace-separated tokens with their 1-based columns; comments removed.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let body = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &body[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &body[s..]));
    }
    out.into_iter()
        .map(|(b, tok)| (body[..b].chars().count() + 1, tok))
        .collect()
}

struct Line<'a> {
    no: usize,
    toks: Vec<(usize, &'a str)>,
}

impl<'a> Line<'a> {
    fn end_col(&self) -> usize {
        self.toks.last().map_or(1, |(c, t)| c + t.chars().count())
    }

    fn arity(&self, n: usize) -> Result<()> {
        if self.toks.len() - 1 < n {
            return Err(parse_err(self.no, self.end_col(), format!("`{}` expects {n} values", self.toks[0].1)));
        }
        if self.toks.len() - 1 > n {
            let (c, t) = self.toks[n + 1];
            return Err(parse_err(self.no, c, format!("unexpected token `{t}`")));
        }
        Ok(())
    }

    fn real<T: Real>(&self, i: usize) -> Result<T> {
        let (c, t) = self.toks[i];
        T::parse_decimal(t).ok_or_else(|| parse_err(self.no, c, format!("expected a finite number, got `{t}`")))
    }

    fn int<I: std::str::FromStr>(&self, i: usize) -> Result<I> {
        let (c, t) = self.toks[i];
        t.parse::<I>().map_err(|_| parse_err(self.no, c, format!("expected an integer, got `{t}`")))
    }

    fn complex<T: Real>(&self, i: usize) -> Result<Cx<T>> {
        Ok(Cx::new(self.real(i)?, self.real(i + 1)?))
    }
}

fn lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| Line { no: i + 1, toks: tokens(l) })
        .filter(|l| !l.toks.is_empty())
        .collect()
}

/// The declared precision, if the text has a `precision` line.
pub fn peek_precision(text: &str) -> Result<Option<Precision>> {
    for l in lines(text) {
        if l.toks[0].1 == "precision" {
            l.arity(1)?;
            let (c, t) = l.toks[1];
            return Precision::parse(t)
                .map(Some)
                .ok_or_else(|| parse_err(l.no, c, format!("precision must be `double` or a digit count, got `{t}`")));
        }
    }
    Ok(None)
}

/// Parses and validates a scenario in the precision of `T`, which must
/// match the file's `precision` line.
pub fn parse_scenario<T: Real>(text: &str) -> Result<Scenario<T>> {
    parse_scenario_in(text, true)
}

/// As [`parse_scenario`]; with `strict = false` a different declared
/// precision is accepted and the values are read at the precision of `T`.
pub fn parse_scenario_in<T: Real>(text: &str, strict: bool) -> Result<Scenario<T>> {
    let all = lines(text);
    let mut seen: HashSet<&str> = HashSet::new();
    let mut rho: Cx<T> = cx(2.0, 0.0);
    let mut t: Option<Cx<T>> = None;
    let mut s: Option<Cx<T>> = None;
    let mut tor_t: Option<Option<u32>> = None;
    let mut tor_s: Option<Option<u32>> = None;
    let mut window = ModeWindow::symmetric(DEFAULT_WINDOW);
    let mut shape = JetShape::new(DEFAULT_ORDERS.0, DEFAULT_ORDERS.1);
    let mut polydisc: Option<PolydiscSpec<T>> = None;
    let mut tol = DEFAULT_TOL;

    for l in all.iter().filter(|l| !matches!(l.toks[0].1, "g" | "q")) {
        let (c0, key) = l.toks[0];
        if !seen.insert(key) {
            return Err(parse_err(l.no, c0, format!("duplicate header key `{key}`")));
        }
        match key {
            "rho" => {
                l.arity(2)?;
                rho = l.complex(1)?;
            }
            "t" | "s" => {
                l.arity(2)?;
                let v = l.complex(1)?;
                if key == "t" { t = Some(v) } else { s = Some(v) }
            }
            "torsion_t" | "torsion_s" => {
                l.arity(1)?;
                let v = if l.toks[1].1 == "none" { None } else { Some(l.int::<u32>(1)?) };
                if key == "torsion_t" { tor_t = Some(v) } else { tor_s = Some(v) }
            }
            "window" => {
                l.arity(2)?;
                window = ModeWindow::new(l.int(1)?, l.int(2)?)
                    .map_err(|e| parse_err(l.no, l.toks[1].0, e.to_string()))?;
            }
            "orders" => {
                l.arity(2)?;
                shape = JetShape::new(l.int(1)?, l.int(2)?);
            }
            "polydisc" => {
                l.arity(4)?;
                polydisc = Some(PolydiscSpec { r_in: l.real(1)?, r_out: l.real(2)?, r_w: l.real(3)?, r_z: l.real(4)? });
            }
            "tol" => {
                l.arity(1)?;
                tol = l.real::<f64>(1)?;
                if !(tol > 0.0) {
                    return Err(parse_err(l.no, l.toks[1].0, "tolerance must be positive"));
                }
            }
            "precision" => {
                l.arity(1)?;
                let (c, p) = l.toks[1];
                match Precision::parse(p) {
                    Some(p) if p == T::precision() || !strict => {}
                    Some(p) => {
                        return Err(parse_err(l.no, c, format!("file declares precision {p}, reader uses {}", T::precision())))
                    }
                    None => return Err(parse_err(l.no, c, format!("bad precision `{p}`"))),
                }
            }
            other => return Err(parse_err(l.no, c0, format!("unknown key `{other}`"))),
        }
    }

    let factor = |v: Option<Cx<T>>, tor: Option<Option<u32>>| match v {
        None => FlatFactor { value: cone(), torsion_order: tor.unwrap_or(Some(1)) },
        Some(v) => FlatFactor { value: v, torsion_order: tor.flatten() },
    };
    let t = factor(t, tor_t);
    let s = factor(s, tor_s);
    let mut germ = GermTriple::linear(rho.clone(), t, s, shape, window);
    if let Some(p) = polydisc {
        germ.polydisc = p;
    } else if cabs(&rho) > T::zero() {
        germ.polydisc = default_polydisc(&rho);
    }

    let mut entries = HashSet::new();
    for l in all.iter().filter(|l| matches!(l.toks[0].1, "g" | "q")) {
        l.arity(5)?;
        let table = l.toks[0].1;
        let nu: usize = l.int(1)?;
        let mu: usize = l.int(2)?;
        let mode: i32 = l.int(3)?;
        if !shape.contains(nu, mu) {
            return Err(parse_err(l.no, l.toks[1].0, format!("({nu},{mu}) outside orders ({}, {})", shape.nw, shape.nz)));
        }
        if !window.contains(mode) {
            return Err(parse_err(l.no, l.toks[3].0, format!("mode {mode} outside window {window}")));
        }
        if !entries.insert((table, nu, mu, mode)) {
            return Err(parse_err(l.no, l.toks[0].0, format!("duplicate coefficient {table} {nu} {mu} {mode}")));
        }
        let c = l.complex(4)?;
        let jet = if table == "g" { &mut germ.g } else { &mut germ.q };
        jet.add_term(nu, mu, mode, c)?;
    }

    let findings = germ.validate_with_tol(tol.max(DEFAULT_TOL));
    if !findings.is_empty() {
        return Err(Error::Invalid(findings));
    }
    Ok(Scenario { germ, tol })
}

fn write_cx<T: Real>(out: &mut String, z: &Cx<T>) {
    let _ = write!(out, " {} {}", z.re.to_decimal(), z.im.to_decimal());
}

fn write_germ<T: Real>(out: &mut String, g: &GermTriple<T>, tol: Option<f64>) {
    let tor = |o: Option<u32>| o.map_or("none".to_string(), |p| p.to_string());
    let shape = g.shape();
    let win = g.window();
    let pd = &g.polydisc;
    out.push_str("rho");
    write_cx(out, &g.rho);
    out.push_str("\nt");
    write_cx(out, &g.t.value);
    out.push_str("\ns");
    write_cx(out, &g.s.value);
    let _ = writeln!(out, "\ntorsion_t {}\ntorsion_s {}", tor(g.t.torsion_order), tor(g.s.torsion_order));
    let _ = writeln!(out, "window {} {}\norders {} {}", win.min, win.max, shape.nw, shape.nz);
    let _ = writeln!(
        out,
        "polydisc {} {} {} {}",
        pd.r_in.to_decimal(),
        pd.r_out.to_decimal(),
        pd.r_w.to_decimal(),
        pd.r_z.to_decimal()
    );
    if let Some(tol) = tol {
        let _ = writeln!(out, "tol {:e}", tol);
    }
    let _ = writeln!(out, "precision {}", T::precision());
    for (name, jet) in [("g", &g.g), ("q", &g.q)] {
        for ((nu, mu), p) in jet.terms() {
            for (n, c) in p.modes() {
                if !(c.re.is_zero() && c.im.is_zero()) {
                    let _ = write!(out, "{name} {nu} {mu} {n}");
                    write_cx(out, c);
                    out.push('\n');
                }
            }
        }
    }
}

pub fn serialize_scenario<T: Real>(sc: &Scenario<T>) -> String {
    let mut out = String::new();
    write_germ(&mut out, &sc.germ, Some(sc.tol));
    out
}

/// First 16 hex digits of the SHA-256 of the germ's canonical text.
pub fn fingerprint<T: Real>(g: &GermTriple<T>) -> String {
    let mut text = String::new();
    write_germ(&mut text, g, None);
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(&digest[..8])
}

// ---------------------------------------------------------------------------
// Fixtures

/// Linear germ with the given data.
pub fn linear<T: Real>(
    rho: Cx<T>,
    t: FlatFactor<T>,
    s: FlatFactor<T>,
    shape: JetShape,
    window: ModeWindow,
) -> GermTriple<T> {
    GermTriple::linear(rho, t, s, shape, window)
}

/// `ρ = e^{2π}`, `t = s = 1`, zero tables.
pub fn tate_hopf<T: Real>(shape: JetShape, window: ModeWindow) -> GermTriple<T> {
    let rho = Cx::new((T::from_i64(2) * T::pi()).exp(), T::zero());
    GermTriple::linear(rho, FlatFactor::one(), FlatFactor::one(), shape, window)
}

/// Random tangent-to-identity gauge: entries of total degree ≤ 3, modes
/// in `{−1, 0, 1}`, each coefficient of modulus ≤ `eps`.
pub fn random_gauge<T: Real>(seed: u64, eps: f64, shape: JetShape, window: ModeWindow) -> Result<GaugeChange<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dw = TransverseJet::zero(shape, window);
    let mut dz = TransverseJet::zero(shape, window);
    let modes: Vec<i32> = (-1..=1).filter(|n| window.contains(*n)).collect();
    for (nu, mu) in shape.iter() {
        if nu + mu > 3 || nu == 0 {
            continue;
        }
        for (jet, min_row) in [(&mut dw, 2), (&mut dz, 1)] {
            if nu < min_row {
                continue;
            }
            for &n in &modes {
                let r = eps * rng.gen::<f64>();
                let a = std::f64::consts::TAU * rng.gen::<f64>();
                jet.add_term(nu, mu, n, cx(r * a.cos(), r * a.sin()))?;
            }
        }
    }
    Ok(GaugeChange::tangent(dw, dz))
}

/// The linear germ seen through [`random_gauge`].
pub fn scrambled<T: Real>(
    seed: u64,
    eps: f64,
    rho: Cx<T>,
    t: FlatFactor<T>,
    s: FlatFactor<T>,
    shape: JetShape,
    window: ModeWindow,
) -> Result<GermTriple<T>> {
    let base = GermTriple::linear(rho, t, s, shape, window);
    base.apply_gauge(&random_gauge(seed, eps, shape, window)?)
}

/// Linear germ plus `c` at g-entry `(n+1, m)`, mode 0. Needs `tⁿsᵐ = 1`
/// so that the entry is a genuine class.
#[allow(clippy::too_many_arguments)]
pub fn obstructed<T: Real>(
    n: usize,
    m: usize,
    c: Cx<T>,
    rho: Cx<T>,
    t: FlatFactor<T>,
    s: FlatFactor<T>,
    shape: JetShape,
    window: ModeWindow,
) -> Result<GermTriple<T>> {
    if n == 0 {
        return Err(Error::Precondition("obstructed fixture needs n >= 1".into()));
    }
    if !shape.contains(n + 1, m) {
        return Err(Error::Undecidable { nu: n + 1, mu: m });
    }
    let f = cpowi(&t.value, n as i64) * cpowi(&s.value, m as i64);
    if !crate::germ::is_unit(&f, DEFAULT_TOL) {
        return Err(Error::Precondition(format!("t^{n} s^{m} != 1; the entry would not be resonant")));
    }
    let mut g = GermTriple::linear(rho, t, s, shape, window);
    g.g.add_term(n + 1, m, 0, c)?;
    Ok(g)
}
