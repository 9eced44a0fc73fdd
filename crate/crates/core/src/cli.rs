//! Command-line driver.
//!
//! Exit codes: 0 when everything vanishes or succeeds, 2 when an obstruction
//! was found, 1 on usage, validation or internal errors.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::flattening::{certify, flatten, solve_majorant, CertifyParams, FlattenOptions};
use crate::germ::{FlatFactor, GermTriple, DEFAULT_TOL};
use crate::report;
use crate::scalar::{set_mp_digits, Cx, MpReal, Precision, Real};
use crate::scenario::{self, Scenario, DEFAULT_ORDERS, DEFAULT_WINDOW};
use crate::series::{JetShape, ModeWindow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_OBSTRUCTED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "ueda", version, about = "Obstruction classes and linearizing coordinates for quotient germs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Truncation order in w (overrides the scenario).
    #[arg(long, global = true)]
    pub order_w: Option<usize>,
    /// Truncation order in z (overrides the scenario).
    #[arg(long, global = true)]
    pub order_z: Option<usize>,
    /// Symmetric x-mode window [-W, W] (overrides the scenario).
    #[arg(long, global = true)]
    pub mode_window: Option<i32>,
    /// Resonance and obstruction tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// `double` or a number of decimal digits.
    #[arg(long, global = true, value_parser = parse_precision)]
    pub precision: Option<Precision>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Text)]
    pub out: OutFormat,
    /// Keep going past obstructions, recording every nonvanishing class.
    #[arg(long = "continue", global = true)]
    pub cont: bool,
    /// Add wall-clock timings to the report.
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Text,
    Machine,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lists the nonvanishing obstruction classes up to the truncation orders.
    Check {
        /// Scenario file, or `-` for stdin.
        scenario: String,
    },
    /// Computes linearizing coordinates and verifies them.
    Flatten {
        scenario: String,
        /// Majorant certificate: `K R M`, or `auto`.
        #[arg(long, num_args = 1..=3, value_name = "K R M|auto")]
        certify: Option<Vec<String>>,
    },
    /// Prints the majorant coefficients A_{ν,μ}.
    Majorant {
        #[arg(long = "K")]
        k: String,
        #[arg(long = "R")]
        r: String,
        #[arg(long = "M")]
        m: String,
    },
    /// Writes a built-in scenario to stdout.
    Fixture {
        #[arg(value_enum)]
        name: FixtureName,
        /// Deck multiplier as `re` or `re,im`.
        #[arg(long)]
        rho: Option<String>,
        /// Flat factor t as a root of unity `k/p`.
        #[arg(long, default_value = "0/1")]
        t: String,
        #[arg(long, default_value = "0/1")]
        s: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long, default_value = "0.5")]
        c: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FixtureName {
    Linear,
    TateHopf,
    Scrambled,
    Obstructed,
}

fn parse_precision(s: &str) -> std::result::Result<Precision, String> {
    Precision::parse(s).ok_or_else(|| format!("expected `double` or a digit count, got `{s}`"))
}

/// Parses `argv` and runs; diagnostics go to `err`.
pub fn run<I, A>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn read_input(path: &str) -> Result<String> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::Usage(format!("reading stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("reading {path}: {e}")))?;
    }
    Ok(text)
}

/// Precision to run at: flag, else the file's declaration, else double.
fn choose_precision(cli: &Cli, text: Option<&str>) -> Result<Precision> {
    if let Some(p) = cli.precision {
        return Ok(p);
    }
    if let Some(t) = text {
        if let Some(p) = scenario::peek_precision(t)? {
            return Ok(p);
        }
    }
    Ok(Precision::Double)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let text = match &cli.command {
        Command::Check { scenario } | Command::Flatten { scenario, .. } => Some(read_input(scenario)?),
        _ => None,
    };
    match choose_precision(cli, text.as_deref())? {
        Precision::Double => execute_in::<f64>(cli, text.as_deref(), out),
        Precision::Digits(d) => {
            set_mp_digits(d);
            execute_in::<MpReal>(cli, text.as_deref(), out)
        }
    }
}

fn emit(cli: &Cli, doc: &Value, out: &mut dyn Write) -> Result<()> {
    let s = match cli.out {
        OutFormat::Text => report::render_text(doc),
        OutFormat::Machine => report::render_machine(doc),
    };
    out.write_all(s.as_bytes()).map_err(|e| Error::Internal(format!("writing output: {e}")))
}

/// Applies the order/window/tolerance overrides.
fn load<T: Real>(cli: &Cli, text: &str) -> Result<Scenario<T>> {
    let mut sc: Scenario<T> = scenario::parse_scenario_in(text, cli.precision.is_none())?;
    let shape = sc.germ.shape();
    let new_shape = JetShape::new(cli.order_w.unwrap_or(shape.nw), cli.order_z.unwrap_or(shape.nz));
    let new_window = cli.mode_window.map_or(Ok(sc.germ.window()), |w| {
        if w < 0 {
            Err(Error::Usage("--mode-window must be nonnegative".into()))
        } else {
            Ok(ModeWindow::symmetric(w))
        }
    })?;
    let g = &sc.germ;
    let (gt, qt) = (g.g.reshape(new_shape).rewindow(new_window)?, g.q.reshape(new_shape).rewindow(new_window)?);
    sc.germ = g.with_tables(gt, qt);
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err(Error::Usage("--tol must be positive".into()));
        }
        sc.tol = t;
    }
    Ok(sc)
}

fn real_arg<T: Real>(name: &str, s: &str) -> Result<T> {
    T::parse_decimal(s).ok_or_else(|| Error::Usage(format!("{name}: expected a number, got `{s}`")))
}

fn root_arg<T: Real>(name: &str, s: &str) -> Result<FlatFactor<T>> {
    let bad = || Error::Usage(format!("--{name}: expected `k/p`, got `{s}`"));
    let (k, p) = s.split_once('/').ok_or_else(bad)?;
    let k: i64 = k.trim().parse().map_err(|_| bad())?;
    let p: u32 = p.trim().parse().map_err(|_| bad())?;
    if p == 0 {
        return Err(bad());
    }
    Ok(FlatFactor::root_of_unity(k, p))
}

fn rho_arg<T: Real>(s: Option<&str>) -> Result<Cx<T>> {
    let Some(s) = s else {
        return Ok(Cx::new(T::from_i64(2), T::zero()));
    };
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    Ok(Cx::new(real_arg("--rho", re.trim())?, real_arg("--rho", im.trim())?))
}

fn base_doc<T: Real>(command: &str, sc: &Scenario<T>) -> Map<String, Value> {
    let mut doc = Map::new();
    doc.insert("command".into(), json!(command));
    doc.insert("germ".into(), report::germ_header(&sc.germ, sc.tol));
    doc
}

fn execute_in<T: Real>(cli: &Cli, text: Option<&str>, out: &mut dyn Write) -> Result<i32> {
    let start = Instant::now();
    match &cli.command {
        Command::Check { .. } => {
            let sc: Scenario<T> = load(cli, text.expect("read above"))?;
            let opts = FlattenOptions { tol: sc.tol, continue_past_obstructions: true, stop_before: None };
            let res = flatten(&sc.germ, &opts)?;
            let mut doc = base_doc("check", &sc);
            let first = res.ledger.entries.first().map_or(Value::Null, report::ledger_entry);
            doc.insert("vanishing".into(), json!(res.ledger.is_empty()));
            doc.insert("first_obstruction".into(), first);
            doc.insert("stages".into(), json!(res.stages));
            doc.insert("ledger".into(), report::ledger(&res.ledger));
            finish(cli, doc, start, out)?;
            Ok(if res.ledger.is_empty() { EXIT_OK } else { EXIT_OBSTRUCTED })
        }
        Command::Flatten { certify: cert_args, .. } => {
            let sc: Scenario<T> = load(cli, text.expect("read above"))?;
            let params = match cert_args.as_deref() {
                None => None,
                Some([a]) if a == "auto" => Some(CertifyParams::Auto),
                Some([k, r, m]) => Some(CertifyParams::Explicit {
                    k: real_arg("K", k)?,
                    r: real_arg("R", r)?,
                    m: real_arg("M", m)?,
                }),
                Some(other) => {
                    return Err(Error::Usage(format!("--certify takes `K R M` or `auto`, got {other:?}")))
                }
            };
            let opts = FlattenOptions { tol: sc.tol, continue_past_obstructions: cli.cont, stop_before: None };
            let res = flatten(&sc.germ, &opts)?;
            let mut doc = base_doc("flatten", &sc);
            doc.insert("outcome".into(), report::outcome(&res));
            let obstructed = !res.ledger.is_empty();
            let mut code = if obstructed {
                EXIT_OBSTRUCTED
            } else if res.success {
                EXIT_OK
            } else {
                doc.insert("error".into(), json!("residual above tolerance"));
                EXIT_ERROR
            };
            if let Some(p) = params {
                if res.success {
                    let c = certify(&res, p, sc.tol)?;
                    if !c.all_dominated() {
                        code = EXIT_ERROR;
                    }
                    let mut cv = report::certificate(&c);
                    if let (Some(t), Value::Object(m)) = (&c.table, &mut cv) {
                        m.insert("majorant".into(), report::majorant(t));
                    }
                    doc.insert("certificate".into(), cv);
                } else {
                    doc.insert("certificate".into(), json!({"findings": ["flattening did not succeed; nothing to certify"]}));
                }
            }
            finish(cli, doc, start, out)?;
            Ok(code)
        }
        Command::Majorant { k, r, m } => {
            let shape = JetShape::new(
                cli.order_w.unwrap_or(DEFAULT_ORDERS.0),
                cli.order_z.unwrap_or(DEFAULT_ORDERS.1),
            );
            let table = solve_majorant::<T>(real_arg("K", k)?, real_arg("R", r)?, real_arg("M", m)?, shape)?;
            let mut doc = Map::new();
            doc.insert("command".into(), json!("majorant"));
            doc.insert("precision".into(), json!(T::precision().to_string()));
            doc.insert("majorant".into(), report::majorant(&table));
            finish(cli, doc, start, out)?;
            Ok(EXIT_OK)
        }
        Command::Fixture { name, rho, t, s, seed, eps, n, m, c } => {
            let shape = JetShape::new(
                cli.order_w.unwrap_or(DEFAULT_ORDERS.0),
                cli.order_z.unwrap_or(DEFAULT_ORDERS.1),
            );
            let window = ModeWindow::symmetric(cli.mode_window.unwrap_or(DEFAULT_WINDOW).max(0));
            let rho = rho_arg::<T>(rho.as_deref())?;
            let (t, s) = (root_arg::<T>("t", t)?, root_arg::<T>("s", s)?);
            let germ: GermTriple<T> = match name {
                FixtureName::Linear => scenario::linear(rho, t, s, shape, window),
                FixtureName::TateHopf => scenario::tate_hopf(shape, window),
                FixtureName::Scrambled => {
                    if !(*eps >= 0.0 && eps.is_finite()) {
                        return Err(Error::Usage("--eps must be a finite nonnegative number".into()));
                    }
                    scenario::scrambled(*seed, *eps, rho, t, s, shape, window)?
                }
                FixtureName::Obstructed => {
                    let c = Cx::new(real_arg("--c", c)?, T::zero());
                    scenario::obstructed(*n, *m, c, rho, t, s, shape, window)?
                }
            };
            let findings = germ.validate();
            if !findings.is_empty() {
                return Err(Error::Invalid(findings));
            }
            let sc = Scenario { germ, tol: cli.tol.unwrap_or(DEFAULT_TOL) };
            out.write_all(scenario::serialize_scenario(&sc).as_bytes())
                .map_err(|e| Error::Internal(format!("writing output: {e}")))?;
            Ok(EXIT_OK)
        }
    }
}

fn finish(cli: &Cli, mut doc: Map<String, Value>, start: Instant, out: &mut dyn Write) -> Result<()> {
    if cli.timings {
        doc.insert("timings".into(), json!({"total_seconds": report::fnum(start.elapsed().as_secs_f64())}));
    }
    emit(cli, &Value::Object(doc), out)
}
