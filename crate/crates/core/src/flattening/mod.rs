//! Order-by-order linearization of the deck map.
//!
//! Flat coordinates `(v, ζ)` satisfy `t·(v∘Γ) = v` and `s·(ζ∘Γ) = ζ`. They are
//! built in two steps:
//!
//! 1. a z-change `z = ξ + Σ_μ Q1_μ(x)·w·ξᵘ` kills the w-linear row of the
//!    z-table (the germ becomes an extension of type `(2, 0)`);
//! 2. old coordinates are expanded in the new ones,
//!    `w = v + Σ G_{ν,μ} vᵛζᵘ`, `ξ = ζ + Σ Q_{ν,μ} vᵛζᵘ` (ν ≥ 2), and the
//!    conjugacy `Γ∘Φ = Φ∘Λ` with `Λ(x, v, ζ) = (ρx, t⁻¹v, s⁻¹ζ)` is solved
//!    coefficient by coefficient in lexicographic order.
//!
//! Each coefficient equation reads `G − λ·G(ρx) = −h` where `h` only involves
//! earlier coefficients. The resonant part of `h` cannot be removed; it is
//! exactly the obstruction class of that stage.

mod majorant;

pub use majorant::{
    certify, lemma312_majorant, solve_majorant, Certificate, CertifyParams, DominationFlag,
    MajorantTable,
};

use std::fmt;

use crate::cohomology::solve_delta;
use crate::error::{Error, Result};
use crate::germ::{GaugeChange, GermTriple};
use crate::obstructions::{u_factor, v_factor, ClassKind, LedgerEntry, ObstructionLedger};
use crate::scalar::{cabs, cone, cpowi, Cx, Real};
use crate::series::{invert_map, substitute, LaurentPoly, TransverseJet};

/// One δ-solve: the w-coefficient (`U`) or z-coefficient (`V`) at `(ν, μ)`.
///
/// Ordered lexicographically in `(ν, μ)`, the w-stage before the z-stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Stage {
    pub nu: usize,
    pub mu: usize,
    pub kind: ClassKind,
}

impl Stage {
    pub fn new(kind: ClassKind, nu: usize, mu: usize) -> Self {
        Stage { nu, mu, kind }
    }

    /// `(n, m)` of the class this stage computes.
    pub fn class_index(&self) -> (usize, usize) {
        match self.kind {
            ClassKind::U => (self.nu - 1, self.mu),
            ClassKind::V => (self.nu, self.mu),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, m) = self.class_index();
        write!(f, "{}_({},{}) at ({},{})", self.kind, n, m, self.nu, self.mu)
    }
}

#[derive(Clone, Debug)]
pub struct FlattenOptions {
    pub tol: f64,
    pub continue_past_obstructions: bool,
    /// Stop before this stage (used for partial normalization).
    pub stop_before: Option<Stage>,
}

impl Default for FlattenOptions {
    fn default() -> Self {
        FlattenOptions { tol: crate::germ::DEFAULT_TOL, continue_past_obstructions: false, stop_before: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTables<T: Real> {
    pub g: TransverseJet<T>,
    pub q: TransverseJet<T>,
    pub q1: Vec<LaurentPoly<T>>,
}

#[derive(Clone, Debug)]
pub struct FlatteningOutcome<T: Real> {
    pub success: bool,
    pub tables: CoefficientTables<T>,
    /// New coordinates as jets in the original `(w, z)`.
    pub v_jet: TransverseJet<T>,
    pub zeta_jet: TransverseJet<T>,
    /// Nonvanishing classes met on the way.
    pub ledger: ObstructionLedger<T>,
    pub residual: T,
    pub failure: Option<Stage>,
    /// Resonant terms left in place (continue mode): `Λ = (ρx, t⁻¹(v + N_w), s⁻¹(ζ + N_z))`.
    pub normal_form: (TransverseJet<T>, TransverseJet<T>),
    /// Stages solved, δ-solves performed.
    pub stages: usize,
    pub max_denominator_inverse: T,
    pub germ: GermTriple<T>,
    /// The germ after the row-1 z-change.
    pub extension: GermTriple<T>,
}

impl<T: Real> FlatteningOutcome<T> {
    /// Gauge `(w, z) ↦ (v, ζ)` realized by the outcome.
    pub fn gauge(&self) -> Result<GaugeChange<T>> {
        let shape = self.germ.shape();
        let window = self.germ.window();
        let dw = self.v_jet.sub(&TransverseJet::var_w(shape, window))?;
        let dz = self.zeta_jet.sub(&TransverseJet::var_z(shape, window))?;
        Ok(GaugeChange::tangent(dw, dz))
    }
}

/// The row-1 step alone: returns the germ in the coordinate `ξ` and the
/// chosen `Q1_μ`. Fails with the first nonvanishing `v_{1,μ}`.
pub fn build_type20_extension<T: Real>(
    g: &GermTriple<T>,
    tol: f64,
) -> Result<(GermTriple<T>, Vec<LaurentPoly<T>>)> {
    g.ensure_valid()?;
    let mut ledger = ObstructionLedger::new(g);
    let row = solve_row1(g, tol, false, None, &mut ledger)?;
    if let Some(e) = ledger.entries.first() {
        return Err(Error::Obstructed {
            kind: 'v',
            n: e.n,
            m: e.m,
            class: crate::scalar::cx_to_f64(&e.class_value),
        });
    }
    Ok((row.germ2, row.q1))
}

struct Row1<T: Real> {
    q1: Vec<LaurentPoly<T>>,
    residues: Vec<LaurentPoly<T>>,
    /// `z` as a jet in `(w, ξ)`.
    xi_map: TransverseJet<T>,
    germ2: GermTriple<T>,
    failure: Option<Stage>,
    stopped: bool,
    stages: usize,
    max_inv: T,
}

fn solve_row1<T: Real>(
    g: &GermTriple<T>,
    tol: f64,
    cont: bool,
    stop_before: Option<Stage>,
    ledger: &mut ObstructionLedger<T>,
) -> Result<Row1<T>> {
    let shape = g.shape();
    let window = g.window();
    let zero = LaurentPoly::zero(window);
    let rows = if shape.nw >= 1 { shape.row_max(1) + 1 } else { 0 };
    let mut q1 = vec![zero.clone(); rows];
    let mut residues = vec![zero; rows];
    let mut failure = None;
    let mut stopped = false;
    let mut stages = 0;
    let mut max_inv = T::zero();
    let t_inv = cone::<T>() / g.t.value.clone();

    for mu in 0..rows {
        let stage = Stage::new(ClassKind::V, 1, mu);
        if stop_before == Some(stage) {
            stopped = true;
            break;
        }
        // Q1 − t⁻¹s^{1−μ}·Q1(ρx) = −q_{1,μ}
        let lambda = t_inv.clone() * cpowi(&g.s.value, 1 - mu as i64);
        let h = g.q.get(1, mu);
        let out = solve_delta(h, &lambda, &g.rho, tol);
        stages += 1;
        max_inv = max_inv.max_of(out.max_denominator_inverse);
        q1[mu] = out.solution.neg();
        if out.residue.max_abs().to_f64() > tol {
            ledger
                .entries
                .push(LedgerEntry::new(ClassKind::V, 1, mu, v_factor(g, 1, mu), h.clone(), tol));
            if cont {
                residues[mu] = out.residue;
            } else {
                failure = Some(stage);
                break;
            }
        }
    }

    let mut xi_map = TransverseJet::var_z(shape, window);
    for (mu, p) in q1.iter().enumerate() {
        if !p.is_zero() {
            xi_map.set(1, mu, p.clone())?;
        }
    }
    let germ2 = if q1.iter().all(|p| p.is_zero()) {
        g.clone()
    } else {
        let id_w = TransverseJet::var_w(shape, window);
        let (_, xi) = invert_map(&id_w, &xi_map)?;
        let dz = xi.sub(&TransverseJet::var_z(shape, window))?;
        g.apply_gauge(&GaugeChange::tangent(TransverseJet::zero(shape, window), dz))?
    };
    Ok(Row1 { q1, residues, xi_map, germ2, failure, stopped, stages, max_inv })
}

/// The two expansions compared at one stage: `h2 = [g∘Φ]` and
/// `h1 = [t·Φ∘Λ]` without the stage's own unknown (w- and z-components).
#[derive(Clone, Debug, PartialEq)]
pub struct HTerms<T: Real> {
    pub h1: LaurentPoly<T>,
    pub h2: LaurentPoly<T>,
}

impl<T: Real> HTerms<T> {
    /// Right-hand side of the stage equation, `h2 − h1`.
    pub fn h(&self) -> Result<LaurentPoly<T>> {
        self.h2.sub(&self.h1)
    }
}

struct Defect<T: Real> {
    h2_w: TransverseJet<T>,
    h2_z: TransverseJet<T>,
    h1_w: TransverseJet<T>,
    h1_z: TransverseJet<T>,
}

/// `g∘Φ`, `q∘Φ`, `t·Φ_w∘Λ`, `s·Φ_z∘Λ` for the current tables.
fn defect<T: Real>(
    germ2: &GermTriple<T>,
    gt: &TransverseJet<T>,
    qt: &TransverseJet<T>,
    nf_w: &TransverseJet<T>,
    nf_z: &TransverseJet<T>,
) -> Result<Defect<T>> {
    let shape = germ2.shape();
    let window = germ2.window();
    let one = cone::<T>();
    let v = TransverseJet::var_w(shape, window);
    let zeta = TransverseJet::var_z(shape, window);
    let phi_w = v.add(gt)?;
    let phi_z = zeta.add(qt)?;
    let lam_w = v.add(nf_w)?.scale(&(one.clone() / germ2.t.value.clone()));
    let lam_z = zeta.add(nf_z)?.scale(&(one.clone() / germ2.s.value.clone()));
    Ok(Defect {
        h2_w: substitute(&germ2.g, &phi_w, &phi_z, &one)?,
        h2_z: substitute(&germ2.q, &phi_w, &phi_z, &one)?,
        h1_w: substitute(&phi_w, &lam_w, &lam_z, &germ2.rho)?.scale(&germ2.t.value),
        h1_z: substitute(&phi_z, &lam_w, &lam_z, &germ2.rho)?.scale(&germ2.s.value),
    })
}

impl<T: Real> Defect<T> {
    fn terms(&self, stage: Stage) -> HTerms<T> {
        let (h1, h2) = match stage.kind {
            ClassKind::U => (&self.h1_w, &self.h2_w),
            ClassKind::V => (&self.h1_z, &self.h2_z),
        };
        HTerms { h1: h1.get(stage.nu, stage.mu).clone(), h2: h2.get(stage.nu, stage.mu).clone() }
    }
}

/// Recomputes both expansions at `stage` from scratch for the given tables;
/// the stage's own entry is ignored.
pub fn h_terms<T: Real>(
    germ2: &GermTriple<T>,
    tables: &CoefficientTables<T>,
    normal_form: &(TransverseJet<T>, TransverseJet<T>),
    stage: Stage,
) -> Result<HTerms<T>> {
    let window = germ2.window();
    let mut gt = tables.g.clone();
    let mut qt = tables.q.clone();
    let mut nf = normal_form.clone();
    let zero = LaurentPoly::zero(window);
    match stage.kind {
        ClassKind::U => {
            gt.set(stage.nu, stage.mu, zero.clone())?;
            qt.set(stage.nu, stage.mu, zero.clone())?;
            nf.0.set(stage.nu, stage.mu, zero.clone())?;
            nf.1.set(stage.nu, stage.mu, zero)?;
        }
        ClassKind::V => {
            qt.set(stage.nu, stage.mu, zero.clone())?;
            nf.1.set(stage.nu, stage.mu, zero)?;
        }
    }
    Ok(defect(germ2, &gt, &qt, &nf.0, &nf.1)?.terms(stage))
}

/// Runs the lexicographic induction and inverts the result.
///
/// An obstruction is reported in the outcome (`success = false`, `failure`
/// set) rather than as an error; the partial coordinates are still returned.
pub fn flatten<T: Real>(g: &GermTriple<T>, opts: &FlattenOptions) -> Result<FlatteningOutcome<T>> {
    let findings = g.validate_with_tol(opts.tol.max(crate::germ::DEFAULT_TOL));
    if !findings.is_empty() {
        return Err(Error::Invalid(findings));
    }
    let tol = opts.tol;
    let cont = opts.continue_past_obstructions;
    let shape = g.shape();
    let window = g.window();
    let mut ledger = ObstructionLedger::new(g);

    let row1 = solve_row1(g, tol, cont, opts.stop_before, &mut ledger)?;
    let germ2 = row1.germ2.clone();
    let mut failure = row1.failure;
    let mut stopped = row1.stopped;
    let mut stages = row1.stages;
    let mut max_inv = row1.max_inv.clone();

    let mut gt = TransverseJet::zero(shape, window);
    let mut qt = TransverseJet::zero(shape, window);
    let mut nf_w = TransverseJet::zero(shape, window);
    let mut nf_z = TransverseJet::zero(shape, window);
    for (mu, r) in row1.residues.iter().enumerate() {
        if !r.is_zero() {
            nf_z.set(1, mu, r.clone())?;
        }
    }
    // a w-linear z-term couples z-stages to w-coefficients of the same row;
    // then the expansions are recomputed at every stage instead of once per row
    let per_stage = row1.residues.iter().any(|r| !r.is_zero());

    let t_inv = cone::<T>() / g.t.value.clone();
    let s_inv = cone::<T>() / g.s.value.clone();
    'rows: for nu in 2..=shape.nw {
        if failure.is_some() || stopped {
            break;
        }
        let mut batch: Option<Defect<T>> = None;
        for mu in 0..=shape.row_max(nu) {
            for kind in [ClassKind::U, ClassKind::V] {
                let stage = Stage::new(kind, nu, mu);
                if opts.stop_before == Some(stage) {
                    stopped = true;
                    break 'rows;
                }
                if per_stage || batch.is_none() {
                    batch = Some(defect(&germ2, &gt, &qt, &nf_w, &nf_z)?);
                }
                let h = batch.as_ref().expect("computed above").terms(stage).h()?;
                let (lambda, factor) = match kind {
                    ClassKind::U => (
                        cpowi(&t_inv, nu as i64 - 1) * cpowi(&s_inv, mu as i64),
                        u_factor(g, nu - 1, mu),
                    ),
                    ClassKind::V => (
                        cpowi(&t_inv, nu as i64) * cpowi(&s_inv, mu as i64 - 1),
                        v_factor(g, nu, mu),
                    ),
                };
                let out = solve_delta(&h, &lambda, &g.rho, tol);
                stages += 1;
                max_inv = max_inv.max_of(out.max_denominator_inverse);
                let sol = out.solution.neg();
                match kind {
                    ClassKind::U => gt.set(nu, mu, sol)?,
                    ClassKind::V => qt.set(nu, mu, sol)?,
                }
                if out.residue.max_abs().to_f64() > tol {
                    let (n, m) = stage.class_index();
                    ledger.entries.push(LedgerEntry::new(kind, n, m, factor, h, tol));
                    if !cont {
                        failure = Some(stage);
                        break 'rows;
                    }
                    match kind {
                        ClassKind::U => nf_w.set(nu, mu, out.residue)?,
                        ClassKind::V => nf_z.set(nu, mu, out.residue)?,
                    }
                }
            }
        }
    }

    // old coordinates in terms of (v, ζ): (w, z) = Ξ(Φ(v, ζ)), then invert
    let one = cone::<T>();
    let phi_w = TransverseJet::var_w(shape, window).add(&gt)?;
    let phi_z = TransverseJet::var_z(shape, window).add(&qt)?;
    let comp_z = substitute(&row1.xi_map, &phi_w, &phi_z, &one)?;
    let (v_jet, zeta_jet) = invert_map(&phi_w, &comp_z)?;
    let residual = verify_linearization(g, &v_jet, &zeta_jet)?;

    let success = failure.is_none()
        && !stopped
        && ledger.entries.is_empty()
        && residual.to_f64() <= tol;
    Ok(FlatteningOutcome {
        success,
        tables: CoefficientTables { g: gt, q: qt, q1: row1.q1 },
        v_jet,
        zeta_jet,
        ledger,
        residual,
        failure,
        normal_form: (nf_w, nf_z),
        stages,
        max_denominator_inverse: max_inv,
        germ: g.clone(),
        extension: germ2,
    })
}

/// `max |t·(v∘Γ) − v|, |s·(ζ∘Γ) − ζ|` over all retained coefficients.
pub fn verify_linearization<T: Real>(
    g: &GermTriple<T>,
    v: &TransverseJet<T>,
    zeta: &TransverseJet<T>,
) -> Result<T> {
    let rv = g.deck_pullback(v)?.scale(&g.t.value).sub(v)?;
    let rz = g.deck_pullback(zeta)?.scale(&g.s.value).sub(zeta)?;
    Ok(rv.max_abs().max_of(rz.max_abs()))
}

/// Applies every flattening stage strictly before `stop` and returns the
/// germ in the resulting coordinates. Resonant residues are left in place.
pub fn normalize_below<T: Real>(g: &GermTriple<T>, stop: Stage, tol: f64) -> Result<GermTriple<T>> {
    let opts = FlattenOptions { tol, continue_past_obstructions: true, stop_before: Some(stop) };
    let out = flatten(g, &opts)?;
    g.apply_gauge(&out.gauge()?)
}

/// Largest coefficient of a stage class relative to `|c|`, for tests.
pub fn relative_gap<T: Real>(a: &Cx<T>, b: &Cx<T>) -> f64 {
    let d = cabs(&(a.clone() - b.clone())).to_f64();
    let s = cabs(b).to_f64();
    if s == 0.0 {
        d
    } else {
        d / s
    }
}
