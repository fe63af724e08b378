//! Time steppers for every splitting scheme, in original and fundamental
//! (matrix-operator-free right-hand side) form.
//!
//! A [`Stepper`] owns exactly two six-component arrays: the field state `u`
//! (physical or doubled, see [`Scaling`]) and a second set that holds either
//! the auxiliary variables `v` or the other half of a ping-pong pair.

mod crank_nicolson;
pub(crate) mod kernels;
pub(crate) mod procedures;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{AuxFieldSet, Component, FieldSet, Medium, Scaling, YeeGrid};
use crate::operators::{identity_plus, Split};
use crate::scalar::{Real, Work};

pub use crate::exec::Exec;
pub use crank_nicolson::{crank_nicolson_reference_step, CrankNicolson, MAX_UNKNOWNS};

use procedures::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeId {
    Adi,
    Lod1,
    Ss2,
    Lod2,
    Dyakonov,
    DouglasGunn,
    CrankNicolsonRef,
}

impl SchemeId {
    pub const ALL: [SchemeId; 7] = [
        SchemeId::Adi,
        SchemeId::Lod1,
        SchemeId::Ss2,
        SchemeId::Lod2,
        SchemeId::Dyakonov,
        SchemeId::DouglasGunn,
        SchemeId::CrankNicolsonRef,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Adi => "adi",
            SchemeId::Lod1 => "lod1",
            SchemeId::Ss2 => "ss2",
            SchemeId::Lod2 => "lod2",
            SchemeId::Dyakonov => "dyakonov",
            SchemeId::DouglasGunn => "douglas-gunn",
            SchemeId::CrankNicolsonRef => "crank-nicolson",
        }
    }

    /// Implicit sweeps per full step.
    pub fn procedures(self) -> usize {
        match self {
            SchemeId::Ss2 => 3,
            SchemeId::CrankNicolsonRef => 1,
            _ => 2,
        }
    }

    /// Order of temporal accuracy.
    pub fn temporal_order(self) -> u32 {
        match self {
            SchemeId::Lod1 => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = s.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match k.as_str() {
            "adi" => SchemeId::Adi,
            "lod1" | "lod" | "ss1" => SchemeId::Lod1,
            "ss2" => SchemeId::Ss2,
            "lod2" => SchemeId::Lod2,
            "dyakonov" | "dy" => SchemeId::Dyakonov,
            "douglas-gunn" | "dg" => SchemeId::DouglasGunn,
            "crank-nicolson" | "cn" => SchemeId::CrankNicolsonRef,
            _ => return Err(Error::Capability(format!("unknown scheme '{s}'"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Formulation {
    Original,
    Fundamental,
}

impl Formulation {
    pub const ALL: [Formulation; 2] = [Formulation::Original, Formulation::Fundamental];

    pub fn name(self) -> &'static str {
        match self {
            Formulation::Original => "original",
            Formulation::Fundamental => "fundamental",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "original" | "orig" => Ok(Formulation::Original),
            "fundamental" | "fund" | "new" => Ok(Formulation::Fundamental),
            _ => Err(Error::Capability(format!("unknown formulation '{s}'"))),
        }
    }
}

/// How fundamental-form steppers treat the magnetic field.
///
/// `Combined` folds the magnetic field and its auxiliary into one update and
/// reconstructs the physical H only on output. `Explicit` keeps both stored
/// at every step, at extra cost.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum HUpdate {
    #[default]
    Combined,
    Explicit,
}

impl FromStr for HUpdate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "combined" => Ok(HUpdate::Combined),
            "explicit" => Ok(HUpdate::Explicit),
            _ => Err(Error::Capability(format!("unknown magnetic update mode '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig {
    pub scheme: SchemeId,
    pub formulation: Formulation,
    pub dt: f64,
    pub medium: Medium,
    pub h_update: HUpdate,
    pub exec: Exec,
}

impl StepperConfig {
    pub fn new(scheme: SchemeId, formulation: Formulation, dt: f64, medium: Medium) -> Self {
        Self {
            scheme,
            formulation,
            dt,
            medium,
            h_update: HUpdate::Combined,
            exec: Exec::Serial,
        }
    }

    pub fn with_h_update(mut self, h_update: HUpdate) -> Self {
        self.h_update = h_update;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }
}

#[derive(Clone, Debug)]
enum Engine<T> {
    /// Fundamental alternating-direction iteration; `k` is the factor
    /// between stored and physical fields (2 for `ũ`, 1 otherwise).
    AdiFundamental { a: Sweep<T>, b: Sweep<T>, k: f64 },
    AdiOriginal { a: Sweep<T>, b: Sweep<T> },
    LodFundamental { sweeps: Vec<Sweep<T>> },
    LodOriginal { sweeps: Vec<Sweep<T>> },
    DyOriginal { a: Sweep<T>, b: Sweep<T> },
    DgOriginal { a: Sweep<T>, b: Sweep<T> },
    CrankNicolson(Box<CrankNicolson>),
}

/// The increments of one delta-form Douglas-Gunn step.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaPair {
    /// `Δu*`, the result of the first implicit sweep.
    pub intermediate: FieldSet<f64>,
    /// `Δu = u^{n+1} − u^n`.
    pub full: FieldSet<f64>,
}

#[derive(Clone, Debug)]
pub struct Stepper<T: Real = f64> {
    config: StepperConfig,
    grid: YeeGrid,
    u: FieldSet<T>,
    aux: AuxFieldSet<T>,
    steps: usize,
    engine: Engine<T>,
}

fn lod_sweeps<T: Real>(
    scheme: SchemeId,
    alpha: f64,
    dt: f64,
    grid: YeeGrid,
    medium: Medium,
) -> Result<Vec<Sweep<T>>> {
    // τ of the original form; the fundamental form halves it
    let scale = if alpha == 1.0 { 1.0 } else { 0.5 };
    let plan: &[(Split, f64)] = match scheme {
        SchemeId::Ss2 => &[(Split::A, 0.25), (Split::B, 0.5), (Split::A, 0.25)],
        _ => &[(Split::A, 0.5), (Split::B, 0.5)],
    };
    plan.iter()
        .map(|&(s, f)| Sweep::new(s, alpha, scale * f * dt, grid, medium))
        .collect()
}

fn check_input(u0: &FieldSet<f64>, dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidTimeStep(format!("dt must be positive, got {dt}")));
    }
    if !u0.is_finite() {
        return Err(Error::State("initial fields contain non-finite values".into()));
    }
    Ok(())
}

/// Input processing of the second-order locally one-dimensional scheme:
/// advances `u0` to the quarter-offset state.
pub fn lod2_input(u0: &FieldSet<f64>, form: Formulation, dt: f64, medium: &Medium) -> Result<FieldSet<f64>> {
    check_input(u0, dt)?;
    lod2_edge(u0.physical(), form, dt, medium, 1.0, Exec::Serial)
}

/// Output processing of the second-order locally one-dimensional scheme:
/// maps a quarter-offset state back to the integer time level.
pub fn lod2_output(state: &FieldSet<f64>, form: Formulation, dt: f64, medium: &Medium) -> Result<FieldSet<f64>> {
    check_input(state, dt)?;
    lod2_edge(state.physical(), form, dt, medium, -1.0, Exec::Serial)
}

fn lod2_edge(
    mut u: FieldSet<f64>,
    form: Formulation,
    dt: f64,
    medium: &Medium,
    sign: f64,
    exec: Exec,
) -> Result<FieldSet<f64>> {
    let grid = u.grid;
    let mut aux = AuxFieldSet::zeros(grid);
    match form {
        Formulation::Original => {
            let sw = Sweep::new(Split::B, 1.0, sign * dt / 4.0, grid, *medium)?;
            original_lod(exec, &sw, &u.e, &u.h, &mut aux.e, &mut aux.h);
            Ok(FieldSet {
                grid,
                e: aux.e,
                h: aux.h,
                scaling: Scaling::Physical,
            })
        }
        Formulation::Fundamental => {
            let sw = Sweep::new(Split::B, 0.5, sign * dt / 8.0, grid, *medium)?;
            fundamental_lod(exec, &sw, HUpdate::Combined, &mut u.e, &mut u.h, &mut aux.e, &mut aux.h);
            Ok(u)
        }
    }
}

/// `(½I + Δt/4 B) v`: seeds the fundamental locally one-dimensional
/// iteration so that its auxiliary variables track the alternating-direction
/// solution started from `v`.
pub fn lod_to_adi_convert(v: &FieldSet<f64>, dt: f64, medium: &Medium) -> FieldSet<f64> {
    let mut out = identity_plus(Split::B, dt / 2.0, &v.physical(), medium);
    out.scale(0.5);
    out
}

impl<T: Real> Stepper<T> {
    /// Build a stepper and perform the scheme's input initialization on the
    /// physical initial fields `u0`.
    pub fn new(config: StepperConfig, u0: &FieldSet<f64>) -> Result<Self> {
        check_input(u0, config.dt)?;
        let u0 = u0.physical();
        let grid = u0.grid;
        let (dt, medium) = (config.dt, config.medium);
        let exec = config.exec;
        let mut aux = AuxFieldSet::<f64>::zeros(grid);
        let mut u = u0.clone();

        let engine = match (config.scheme, config.formulation) {
            (SchemeId::Adi | SchemeId::DouglasGunn | SchemeId::Dyakonov, Formulation::Fundamental) => {
                let k = if config.scheme == SchemeId::Dyakonov { 1.0 } else { 2.0 };
                let w = identity_plus(Split::B, -dt / 2.0, &u0, &medium);
                u.scale(k);
                u.scaling = if k == 2.0 { Scaling::Doubled } else { Scaling::Physical };
                for d in 0..3 {
                    aux.e[d] = &w.e[d] * (k / 2.0);
                    aux.h[d] = match config.h_update {
                        HUpdate::Combined => &u0.h[d] * k - &w.h[d] * (k / 2.0),
                        HUpdate::Explicit => &w.h[d] * (k / 2.0),
                    };
                }
                Engine::AdiFundamental {
                    a: Sweep::new(Split::A, 0.5, dt / 4.0, grid, medium)?,
                    b: Sweep::new(Split::B, 0.5, dt / 4.0, grid, medium)?,
                    k,
                }
            }
            (SchemeId::Adi, Formulation::Original) => Engine::AdiOriginal {
                a: Sweep::new(Split::A, 1.0, dt / 2.0, grid, medium)?,
                b: Sweep::new(Split::B, 1.0, dt / 2.0, grid, medium)?,
            },
            (SchemeId::Lod1 | SchemeId::Ss2 | SchemeId::Lod2, form) => {
                if config.scheme == SchemeId::Lod2 {
                    u = lod2_edge(u0.clone(), form, dt, &medium, 1.0, exec)?;
                }
                match form {
                    Formulation::Original => Engine::LodOriginal {
                        sweeps: lod_sweeps(config.scheme, 1.0, dt, grid, medium)?,
                    },
                    Formulation::Fundamental => Engine::LodFundamental {
                        sweeps: lod_sweeps(config.scheme, 0.5, dt, grid, medium)?,
                    },
                }
            }
            (SchemeId::Dyakonov, Formulation::Original) => Engine::DyOriginal {
                a: Sweep::new(Split::A, 1.0, dt / 2.0, grid, medium)?,
                b: Sweep::new(Split::B, 1.0, dt / 2.0, grid, medium)?,
            },
            (SchemeId::DouglasGunn, Formulation::Original) => Engine::DgOriginal {
                a: Sweep::new(Split::A, 1.0, dt / 2.0, grid, medium)?,
                b: Sweep::new(Split::B, 1.0, dt / 2.0, grid, medium)?,
            },
            (SchemeId::CrankNicolsonRef, form) => {
                Engine::CrankNicolson(Box::new(CrankNicolson::new(grid, &medium, dt, form)?))
            }
        };

        Ok(Self {
            config,
            grid,
            u: u.cast(),
            aux: AuxFieldSet::from_fields(aux.into_fields().cast()),
            steps: 0,
            engine,
        })
    }

    /// Rebuild a stepper from raw arrays previously read through
    /// [`Stepper::state`] and [`Stepper::auxiliary`] of a stepper with the
    /// same configuration. Continuing from here is bitwise identical to
    /// continuing the original.
    pub fn resume(
        config: StepperConfig,
        state: &FieldSet<f64>,
        aux: &AuxFieldSet<f64>,
        steps: usize,
    ) -> Result<Self> {
        let grid = state.grid;
        if aux.grid != grid {
            return Err(Error::Dimension("state and auxiliary grids differ".into()));
        }
        let mut s = Self::new(config, &FieldSet::zeros(grid))?;
        if s.u.scaling != state.scaling {
            return Err(Error::State(format!(
                "stored scaling {:?} does not match {} {} ({:?})",
                state.scaling, config.scheme, config.formulation, s.u.scaling
            )));
        }
        if !state.is_finite() || !aux.clone().into_fields().is_finite() {
            return Err(Error::State("resumed arrays contain non-finite values".into()));
        }
        s.u = state.cast();
        s.aux = AuxFieldSet::from_fields(aux.clone().into_fields().cast());
        s.steps = steps;
        Ok(s)
    }

    pub fn config(&self) -> &StepperConfig {
        &self.config
    }

    pub fn grid(&self) -> YeeGrid {
        self.grid
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    /// Raw stored state (`u`, `ũ`, or a quarter-offset `u`).
    pub fn state(&self) -> &FieldSet<T> {
        &self.u
    }

    /// Raw second array: auxiliary variables for fundamental forms that keep
    /// them, scratch otherwise.
    pub fn auxiliary(&self) -> &AuxFieldSet<T> {
        &self.aux
    }

    /// Soft source: add `value` to stored electric entry `idx` of component
    /// `c`, scaled to the stored representation.
    pub fn add_source(&mut self, c: Component, idx: [usize; 3], value: f64) -> Result<()> {
        if !c.is_electric() {
            return Err(Error::Capability(format!("sources drive electric components, got {}", c.name())));
        }
        let k = match self.u.scaling {
            Scaling::Physical => 1.0,
            Scaling::Doubled => 2.0,
        };
        let arr = self.u.component_mut(c);
        let dim = arr.dim();
        let slot = arr.get_mut(idx).ok_or_else(|| {
            Error::Dimension(format!("source index {idx:?} outside {} extent {:?}", c.name(), dim))
        })?;
        *slot = *slot + T::from_f64(k * value);
        Ok(())
    }

    /// Advance one full time step.
    pub fn step(&mut self) -> Result<()> {
        let exec = self.config.exec;
        let mode = self.config.h_update;
        let Self { u, aux, engine, .. } = self;
        match engine {
            Engine::AdiFundamental { a, b, .. } => {
                for sw in [&*a, &*b] {
                    fundamental_adi(exec, sw, mode, &mut u.e, &mut u.h, &mut aux.e, &mut aux.h);
                }
            }
            Engine::LodFundamental { sweeps } => {
                for sw in sweeps.iter() {
                    fundamental_lod(exec, sw, mode, &mut u.e, &mut u.h, &mut aux.e, &mut aux.h);
                }
            }
            Engine::LodOriginal { sweeps } => {
                for sw in sweeps.iter() {
                    original_lod(exec, sw, &u.e, &u.h, &mut aux.e, &mut aux.h);
                    swap(u, aux);
                }
            }
            Engine::AdiOriginal { a, b } => {
                original_adi(exec, a, b, &u.e, &u.h, &mut aux.e, &mut aux.h);
                swap(u, aux);
                original_adi(exec, b, a, &u.e, &u.h, &mut aux.e, &mut aux.h);
                swap(u, aux);
            }
            Engine::DyOriginal { a, b } => {
                explicit_product(exec, b, &u.e, &u.h, &mut aux.e, &mut aux.h);
                original_lod(exec, a, &aux.e, &aux.h, &mut u.e, &mut u.h);
                implicit_only(exec, b, &mut u.e, &mut u.h);
            }
            Engine::DgOriginal { .. } => {
                self.dg_original(false)?;
            }
            Engine::CrankNicolson(cn) => {
                let next = cn.step(&u.cast())?;
                *u = next.cast();
            }
        }
        self.steps += 1;
        Ok(())
    }

    /// Advance `n` steps.
    pub fn run(&mut self, n: usize) -> Result<()> {
        for _ in 0..n {
            self.step()?;
        }
        Ok(())
    }

    fn dg_original(&mut self, capture: bool) -> Result<Option<DeltaPair>> {
        let exec = self.config.exec;
        let (dt, medium, grid) = (self.config.dt, self.config.medium, self.grid);
        let Self { u, aux, engine, .. } = self;
        let Engine::DgOriginal { a, b } = engine else {
            return Err(Error::State("not a delta-form stepper".into()));
        };
        T::attribute(Work::Untracked);
        curl_increment(exec, dt, &grid, &medium, &u.e, &u.h, &mut aux.e, &mut aux.h);
        implicit_only(exec, a, &mut aux.e, &mut aux.h);
        let intermediate = capture.then(|| aux_to_f64(aux));
        implicit_only(exec, b, &mut aux.e, &mut aux.h);
        let full = capture.then(|| aux_to_f64(aux));
        accumulate_all(exec, &mut u.e, &mut u.h, &aux.e, &aux.h);
        Ok(intermediate.zip(full).map(|(intermediate, full)| DeltaPair { intermediate, full }))
    }

    /// Stored `ũ` (or `u` for `k = 1`) of the fundamental alternating-direction
    /// engine, reconstructing the magnetic part after sweep `last` when it is
    /// not stored.
    fn stored_fields(&self, last: &Sweep<T>) -> FieldSet<f64> {
        let mut out: FieldSet<f64> = self.u.cast();
        if self.config.h_update == HUpdate::Combined {
            let aux: AuxFieldSet<f64> = AuxFieldSet::from_fields(FieldSet {
                grid: self.grid,
                e: self.aux.e.clone(),
                h: self.aux.h.clone(),
                scaling: Scaling::Physical,
            }
            .cast());
            for c in last.split.couplings() {
                let base = &aux.h[c.h] * 2.0;
                let mut h = base.clone();
                kernels::padded_from(
                    Exec::Serial,
                    Work::Untracked,
                    &mut h,
                    &base,
                    &out.e[c.e],
                    c.axis,
                    -last_gamma(last, c),
                );
                out.h[c.h] = h;
            }
        }
        out
    }

    /// Physical fields at the current integer time level. Does not disturb
    /// the iteration state.
    pub fn output(&self) -> Result<FieldSet<f64>> {
        T::attribute(Work::Untracked);
        let out = match &self.engine {
            Engine::AdiFundamental { b, k, .. } => {
                let mut f = self.stored_fields(b);
                f.scale(1.0 / *k);
                f.scaling = Scaling::Physical;
                f
            }
            Engine::LodOriginal { .. } | Engine::LodFundamental { .. }
                if self.config.scheme == SchemeId::Lod2 =>
            {
                lod2_edge(
                    self.u.cast(),
                    self.config.formulation,
                    self.config.dt,
                    &self.config.medium,
                    -1.0,
                    self.config.exec,
                )?
            }
            _ => self.u.cast(),
        };
        Ok(out)
    }
}

fn last_gamma<T: Real>(sw: &Sweep<T>, c: &crate::operators::Coupling) -> f64 {
    sw.gamma(c)
}

fn aux_to_f64<T: Real>(aux: &AuxFieldSet<T>) -> FieldSet<f64> {
    FieldSet {
        grid: aux.grid,
        e: aux.e.clone(),
        h: aux.h.clone(),
        scaling: Scaling::Physical,
    }
    .cast()
}

fn swap<T>(u: &mut FieldSet<T>, aux: &mut AuxFieldSet<T>) {
    std::mem::swap(&mut u.e, &mut aux.e);
    std::mem::swap(&mut u.h, &mut aux.h);
}

/// One Douglas-Gunn step that also reports its increments. The delta form
/// captures them directly; the fundamental form reconstructs them from the
/// doubled states before, between and after the two sweeps.
pub fn douglas_gunn_step<T: Real>(stepper: &mut Stepper<T>) -> Result<DeltaPair> {
    if stepper.config.scheme != SchemeId::DouglasGunn {
        return Err(Error::State(format!(
            "delta extraction needs a douglas-gunn stepper, got {}",
            stepper.config.scheme
        )));
    }
    if let Engine::DgOriginal { .. } = stepper.engine {
        let pair = stepper.dg_original(true)?.expect("capture requested");
        stepper.steps += 1;
        return Ok(pair);
    }
    let Engine::AdiFundamental { a, b, .. } = stepper.engine.clone() else {
        unreachable!("douglas-gunn uses the alternating-direction engine");
    };
    let exec = stepper.config.exec;
    let mode = stepper.config.h_update;
    let before = stepper.stored_fields(&b);
    {
        let Stepper { u, aux, .. } = &mut *stepper;
        fundamental_adi(exec, &a, mode, &mut u.e, &mut u.h, &mut aux.e, &mut aux.h);
    }
    let mid = stepper.stored_fields(&a);
    {
        let Stepper { u, aux, .. } = &mut *stepper;
        fundamental_adi(exec, &b, mode, &mut u.e, &mut u.h, &mut aux.e, &mut aux.h);
    }
    let after = stepper.stored_fields(&b);
    stepper.steps += 1;

    let mut intermediate = mid;
    intermediate.axpy(-1.0, &before);
    let mut full = after;
    full.axpy(-1.0, &before);
    full.scale(0.5);
    intermediate.scaling = Scaling::Physical;
    full.scaling = Scaling::Physical;
    Ok(DeltaPair { intermediate, full })
}

/// The D'Yakonov intermediate `u*` belonging to the step just taken.
///
/// The fundamental form reads it off the auxiliary variables (`u* = 2v`);
/// the original form evaluates `(I − Δt/2 B) u^{n+1}`.
pub fn dyakonov_intermediate<T: Real>(stepper: &Stepper<T>) -> Result<FieldSet<f64>> {
    if stepper.config.scheme != SchemeId::Dyakonov || stepper.steps == 0 {
        return Err(Error::State("needs a D'Yakonov stepper that has taken a step".into()));
    }
    match &stepper.engine {
        Engine::AdiFundamental { b, .. } => {
            let mut v = aux_to_f64(&stepper.aux);
            if stepper.config.h_update == HUpdate::Combined {
                let u: FieldSet<f64> = stepper.u.cast();
                for c in b.split.couplings() {
                    let base = v.h[c.h].clone();
                    kernels::padded_from(
                        Exec::Serial,
                        Work::Untracked,
                        &mut v.h[c.h],
                        &base,
                        &u.e[c.e],
                        c.axis,
                        -b.gamma(c),
                    );
                }
            }
            v.scale(2.0);
            Ok(v)
        }
        _ => {
            let u = stepper.output()?;
            Ok(identity_plus(Split::B, -stepper.config.dt / 2.0, &u, &stepper.config.medium))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeConfig;

    fn setup(n: usize) -> (YeeGrid, Medium, f64) {
        let g = YeeGrid::new([n, n + 1, n - 1], [1.0, 0.8, 1.2]).unwrap();
        let m = Medium::new(1.3, 0.9).unwrap();
        let dt = TimeConfig::from_cfl(&g, &m, 3.0).unwrap().dt;
        (g, m, dt)
    }

    fn all_configs(m: Medium, dt: f64) -> Vec<StepperConfig> {
        let mut out = Vec::new();
        for s in SchemeId::ALL {
            for f in Formulation::ALL {
                out.push(StepperConfig::new(s, f, dt, m));
            }
        }
        out
    }

    #[test]
    fn zero_fields_stay_zero() {
        let (g, m, dt) = setup(4);
        for cfg in all_configs(m, dt) {
            let mut s = Stepper::<f64>::new(cfg, &FieldSet::zeros(g)).unwrap();
            s.run(3).unwrap();
            assert_eq!(s.output().unwrap().max_abs(), 0.0, "{cfg:?}");
        }
    }

    #[test]
    fn output_without_steps_returns_input() {
        let (g, m, dt) = setup(5);
        let u0 = FieldSet::random(g, 4);
        for cfg in all_configs(m, dt) {
            for mode in [HUpdate::Combined, HUpdate::Explicit] {
                let s = Stepper::<f64>::new(cfg.with_h_update(mode), &u0).unwrap();
                let out = s.output().unwrap();
                assert_eq!(out.scaling, Scaling::Physical);
                assert!(out.relative_difference(&u0) < 1e-13, "{cfg:?} {mode:?}");
            }
        }
    }

    #[test]
    fn adi_output_is_exact_after_init() {
        let (g, m, dt) = setup(4);
        let u0 = FieldSet::random(g, 5);
        let cfg = StepperConfig::new(SchemeId::Adi, Formulation::Fundamental, dt, m)
            .with_h_update(HUpdate::Explicit);
        let s = Stepper::<f64>::new(cfg, &u0).unwrap();
        assert_eq!(s.state().scaling, Scaling::Doubled);
        assert_eq!(s.output().unwrap(), u0);
    }

    #[test]
    fn forms_agree_over_a_few_steps() {
        let (g, m, dt) = setup(5);
        let u0 = FieldSet::random(g, 6);
        for scheme in SchemeId::ALL {
            let run = |f, mode| {
                let cfg = StepperConfig::new(scheme, f, dt, m).with_h_update(mode);
                let mut s = Stepper::<f64>::new(cfg, &u0).unwrap();
                s.run(5).unwrap();
                s.output().unwrap()
            };
            let o = run(Formulation::Original, HUpdate::Combined);
            for mode in [HUpdate::Combined, HUpdate::Explicit] {
                let f = run(Formulation::Fundamental, mode);
                assert!(f.relative_difference(&o) < 1e-12, "{scheme} {mode:?}");
            }
        }
    }

    #[test]
    fn parallel_matches_serial_bitwise() {
        let (g, m, dt) = setup(6);
        let u0 = FieldSet::random(g, 7);
        for cfg in all_configs(m, dt) {
            let mut a = Stepper::<f64>::new(cfg, &u0).unwrap();
            let mut b = Stepper::<f64>::new(cfg.with_exec(Exec::Parallel), &u0).unwrap();
            a.run(3).unwrap();
            b.run(3).unwrap();
            assert_eq!(a.state(), b.state(), "{cfg:?}");
        }
    }

    #[test]
    fn lod2_input_output_are_inverse() {
        let (g, m, dt) = setup(4);
        let u0 = FieldSet::random(g, 8);
        for f in Formulation::ALL {
            let q = lod2_input(&u0, f, dt, &m).unwrap();
            let back = lod2_output(&q, f, dt, &m).unwrap();
            assert!(back.relative_difference(&u0) < 1e-13);
        }
        let qo = lod2_input(&u0, Formulation::Original, dt, &m).unwrap();
        let qf = lod2_input(&u0, Formulation::Fundamental, dt, &m).unwrap();
        assert!(qo.relative_difference(&qf) < 1e-13);
        let c = FieldSet::uniform_magnetic(g, [0.5, -1.0, 2.0]);
        assert!(lod2_input(&c, Formulation::Fundamental, dt, &m).unwrap().relative_difference(&c) < 1e-15);
    }

    #[test]
    fn conversion_of_constants_halves() {
        let (g, m, dt) = setup(4);
        let c = FieldSet::uniform_magnetic(g, [1.0, 2.0, 3.0]);
        assert_eq!(lod_to_adi_convert(&c, dt, &m), c.scaled(0.5));
        assert_eq!(lod_to_adi_convert(&FieldSet::zeros(g), dt, &m).max_abs(), 0.0);
    }

    #[test]
    fn sources_respect_scaling() {
        let (g, m, dt) = setup(4);
        let cfg = StepperConfig::new(SchemeId::Adi, Formulation::Fundamental, dt, m);
        let mut s = Stepper::<f64>::new(cfg, &FieldSet::zeros(g)).unwrap();
        s.add_source(Component::Ez, [1, 1, 1], 0.25).unwrap();
        assert_eq!(s.state().e[2][[1, 1, 1]], 0.5);
        assert!(s.add_source(Component::Hz, [1, 1, 1], 1.0).is_err());
        assert!(s.add_source(Component::Ez, [40, 1, 1], 1.0).is_err());
    }

    #[test]
    fn delta_extraction_and_intermediate() {
        let (g, m, dt) = setup(4);
        let u0 = FieldSet::random(g, 9);
        let mut pairs = Vec::new();
        for f in Formulation::ALL {
            let cfg = StepperConfig::new(SchemeId::DouglasGunn, f, dt, m);
            let mut s = Stepper::<f64>::new(cfg, &u0).unwrap();
            let before = s.output().unwrap();
            let p = douglas_gunn_step(&mut s).unwrap();
            let mut rebuilt = before.clone();
            rebuilt.axpy(1.0, &p.full);
            assert!(rebuilt.relative_difference(&s.output().unwrap()) < 1e-13);
            pairs.push(p);
        }
        assert!(pairs[0].intermediate.relative_difference(&pairs[1].intermediate) < 1e-12);

        let mut stars = Vec::new();
        for f in Formulation::ALL {
            let cfg = StepperConfig::new(SchemeId::Dyakonov, f, dt, m);
            let mut s = Stepper::<f64>::new(cfg, &u0).unwrap();
            assert!(dyakonov_intermediate(&s).is_err());
            s.run(2).unwrap();
            stars.push(dyakonov_intermediate(&s).unwrap());
        }
        assert!(stars[0].relative_difference(&stars[1]) < 1e-12);
    }

    #[test]
    fn resume_continues_bitwise() {
        let (g, m, dt) = setup(4);
        let u0 = FieldSet::random(g, 10);
        for cfg in all_configs(m, dt) {
            let mut a = Stepper::<f64>::new(cfg, &u0).unwrap();
            a.run(3).unwrap();
            let mut b = Stepper::<f64>::resume(cfg, a.state(), a.auxiliary(), 3).unwrap();
            a.run(4).unwrap();
            b.run(4).unwrap();
            assert_eq!(a.state(), b.state(), "{cfg:?}");
            assert_eq!(b.steps_taken(), 7);
        }
        let cfg = StepperConfig::new(SchemeId::Adi, Formulation::Fundamental, dt, m);
        let phys = FieldSet::zeros(g);
        assert!(Stepper::<f64>::resume(cfg, &phys, &AuxFieldSet::zeros(g), 0).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        let (g, m, _) = setup(4);
        let cfg = StepperConfig::new(SchemeId::Adi, Formulation::Original, -1.0, m);
        assert!(Stepper::<f64>::new(cfg, &FieldSet::zeros(g)).is_err());
        let mut bad = FieldSet::<f64>::zeros(g);
        bad.e[0][[0, 0, 0]] = f64::NAN;
        let cfg = StepperConfig::new(SchemeId::Adi, Formulation::Original, 1.0, m);
        assert!(Stepper::<f64>::new(cfg, &bad).is_err());
        assert!("bogus".parse::<SchemeId>().is_err());
        assert_eq!("SS1".parse::<SchemeId>().unwrap(), SchemeId::Lod1);
    }
}
