//! C ABI over `lflx`.
//!
//! Every function returns an [`LflxStatus`]; results come back through out
//! pointers. Objects are opaque handles owned by the caller and released with
//! the matching `*_free`. On failure, [`lflx_last_error`] returns a message for
//! the calling thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lflx::experiment::{load_snapshot, save_snapshot, SnapshotFile};
use lflx::solver::{self, ForcingSpec, Snapshot, SolverConfig};
use lflx::synthetic::{self, SyntheticSpec};
use lflx::{coarse, stats, Error, Grid, Mollifier, Profile, RealSamples, SpectralField};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LflxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGrid = 3,
    ShapeMismatch = 4,
    Domain = 5,
    /// CFL violation, non-finite state or blow-up
    Numerical = 6,
    /// bad magic, version mismatch or truncation in a snapshot file
    Format = 7,
    Io = 8,
    Config = 9,
    Panic = 10,
}

/// Kernel shape selector for [`lflx_mollifier_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LflxProfile {
    Bump = 0,
    Gaussian = 1,
}

/// Spectral field (scalar or vector) on a periodic grid.
pub struct LflxField(SpectralField);

/// Radial mollifier with cached multipliers.
pub struct LflxMollifier(Mollifier);

/// Output of a solver run: snapshots plus the energy budget.
pub struct LflxRun(solver::RunOutput);

/// Integrated energy budget of a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LflxBudget {
    pub initial_energy: f64,
    pub final_energy: f64,
    pub cumulative_dissipation: f64,
    pub cumulative_injection: f64,
    /// `E(T) - E(0) + ∫D - ∫I`
    pub residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LflxStatus {
    match e {
        Error::InvalidGrid(_) => LflxStatus::InvalidGrid,
        Error::ShapeMismatch { .. } | Error::GridMismatch | Error::NotAVectorField(_) => {
            LflxStatus::ShapeMismatch
        }
        Error::AxisOutOfRange { .. } | Error::InvalidArgument(_) => LflxStatus::InvalidArgument,
        Error::Domain(_) => LflxStatus::Domain,
        Error::CflViolation { .. } | Error::NonFinite { .. } | Error::BlowUp { .. } => {
            LflxStatus::Numerical
        }
        Error::BadMagic(_) | Error::VersionMismatch { .. } | Error::Truncated { .. } => {
            LflxStatus::Format
        }
        Error::Config(_) => LflxStatus::Config,
        Error::Io { .. } => LflxStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LflxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LflxStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            LflxStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            LflxStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidArgument("path is not valid UTF-8".into())))
}

fn boxed<T>(slot: &mut *mut T, value: T) {
    *slot = Box::into_raw(Box::new(value));
}

fn grid(dim: u32, n: u32) -> Result<Grid, Failure> {
    Ok(Grid::new(dim as usize, n as usize)?)
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lflx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lflx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Wraps real samples into a field. `values` holds `components * n^dim`
/// doubles, component-major, row-major within a component.
#[no_mangle]
pub unsafe extern "C" fn lflx_field_from_samples(
    dim: u32,
    n: u32,
    components: u32,
    values: *const f64,
    len: usize,
    out_field: *mut *mut LflxField,
) -> LflxStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        let g = grid(dim, n)?;
        let v = slice(values, len, "values")?.to_vec();
        let samples = RealSamples::new(g, components as usize, v)?;
        boxed(slot, LflxField(samples.to_spectral()));
        Ok(())
    })
}

/// Taylor–Green vortex on a `dim`-dimensional grid.
#[no_mangle]
pub unsafe extern "C" fn lflx_field_taylor_green(
    dim: u32,
    n: u32,
    out_field: *mut *mut LflxField,
) -> LflxStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        boxed(slot, LflxField(synthetic::taylor_green(&grid(dim, n)?)));
        Ok(())
    })
}

/// Laminar shear `u = (sin y, 0[, 0])`.
#[no_mangle]
pub unsafe extern "C" fn lflx_field_shear(
    dim: u32,
    n: u32,
    out_field: *mut *mut LflxField,
) -> LflxStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        boxed(slot, LflxField(synthetic::shear(&grid(dim, n)?)));
        Ok(())
    })
}

/// Solenoidal random field with `E(k) ~ k^{-(2σ+1)}`, scaled to `‖u‖₂ = 1`.
#[no_mangle]
pub unsafe extern "C" fn lflx_field_random_besov(
    dim: u32,
    n: u32,
    sigma: f64,
    seed: u64,
    out_field: *mut *mut LflxField,
) -> LflxStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        let g = grid(dim, n)?;
        let f = synthetic::generate(&g, &SyntheticSpec::random_besov(sigma, seed))?;
        boxed(slot, LflxField(f));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lflx_field_free(field: *mut LflxField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Grid shape of a field.
#[no_mangle]
pub unsafe extern "C" fn lflx_field_shape(
    field: *const LflxField,
    dim: *mut u32,
    n: *mut u32,
    components: *mut u32,
) -> LflxStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        *out(dim, "dim")? = f.grid().dim() as u32;
        *out(n, "n")? = f.grid().n() as u32;
        *out(components, "components")? = f.components() as u32;
        Ok(())
    })
}

/// Number of doubles [`lflx_field_samples`] writes.
#[no_mangle]
pub unsafe extern "C" fn lflx_field_sample_len(field: *const LflxField, len: *mut usize) -> LflxStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        *out(len, "len")? = f.components() * f.grid().len();
        Ok(())
    })
}

/// Copies grid-point samples into `buf`, which must hold exactly
/// [`lflx_field_sample_len`] doubles.
#[no_mangle]
pub unsafe extern "C" fn lflx_field_samples(
    field: *const LflxField,
    buf: *mut f64,
    len: usize,
) -> LflxStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        let s = f.to_real();
        copy_out(s.values(), buf, len)
    })
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    if len != src.len() {
        return Err(Error::ShapeMismatch {
            expected: src.len(),
            actual: len,
        }
        .into());
    }
    if buf.is_null() {
        return Err(Failure::Null("buf"));
    }
    std::slice::from_raw_parts_mut(buf, len).copy_from_slice(src);
    Ok(())
}

/// Kinetic energy `½∫|u|²`.
#[no_mangle]
pub unsafe extern "C" fn lflx_field_energy(field: *const LflxField, energy: *mut f64) -> LflxStatus {
    guard(|| {
        *out(energy, "energy")? = deref(field, "field")?.0.energy();
        Ok(())
    })
}

/// `L^p` norm of `|u|`; pass `p = INFINITY` for the sup norm.
#[no_mangle]
pub unsafe extern "C" fn lflx_field_lp_norm(
    field: *const LflxField,
    p: f64,
    norm: *mut f64,
) -> LflxStatus {
    guard(|| {
        *out(norm, "norm")? = deref(field, "field")?.0.lp_norm(p)?;
        Ok(())
    })
}

/// Largest spectral divergence `max_k |k·û(k)|`.
#[no_mangle]
pub unsafe extern "C" fn lflx_field_max_divergence(
    field: *const LflxField,
    value: *mut f64,
) -> LflxStatus {
    guard(|| {
        *out(value, "value")? = deref(field, "field")?.0.max_divergence_mode()?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lflx_mollifier_new(
    profile: LflxProfile,
    out_mollifier: *mut *mut LflxMollifier,
) -> LflxStatus {
    guard(|| {
        let slot = out(out_mollifier, "out_mollifier")?;
        let p = match profile {
            LflxProfile::Bump => Profile::Bump,
            LflxProfile::Gaussian => Profile::Gaussian,
        };
        boxed(slot, LflxMollifier(Mollifier::new(p)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lflx_mollifier_free(m: *mut LflxMollifier) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Radial Fourier transform `Ĝ(ξ)` of the normalized kernel.
#[no_mangle]
pub unsafe extern "C" fn lflx_mollifier_transform(
    m: *const LflxMollifier,
    dim: u32,
    xi: f64,
    value: *mut f64,
) -> LflxStatus {
    guard(|| {
        let m = &deref(m, "mollifier")?.0;
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidArgument(format!("dimension {dim} not supported")).into());
        }
        *out(value, "value")? = m.transform(dim as usize, xi);
        Ok(())
    })
}

/// Coarse-grained field `ū_ℓ = G_ℓ * u`.
#[no_mangle]
pub unsafe extern "C" fn lflx_filter(
    field: *const LflxField,
    ell: f64,
    m: *const LflxMollifier,
    out_field: *mut *mut LflxField,
) -> LflxStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        let f = coarse::filter(&deref(field, "field")?.0, ell, &deref(m, "mollifier")?.0)?;
        boxed(slot, LflxField(f));
        Ok(())
    })
}

/// Number of doubles [`lflx_flux`] writes: the refined `(2n)^dim` lattice.
#[no_mangle]
pub unsafe extern "C" fn lflx_flux_len(field: *const LflxField, len: *mut usize) -> LflxStatus {
    guard(|| {
        *out(len, "len")? = deref(field, "field")?.0.grid().refined().len();
        Ok(())
    })
}

/// Pointwise flux `Π_ℓ = -∇ū_ℓ : τ_ℓ` on the refined lattice, plus its
/// integral over the box.
#[no_mangle]
pub unsafe extern "C" fn lflx_flux(
    field: *const LflxField,
    ell: f64,
    m: *const LflxMollifier,
    buf: *mut f64,
    len: usize,
    integral: *mut f64,
) -> LflxStatus {
    guard(|| {
        let u = &deref(field, "field")?.0;
        let pi = coarse::flux(u, ell, &deref(m, "mollifier")?.0)?;
        if !integral.is_null() {
            *integral = RealSamples::integrate(pi.grid(), pi.values());
        }
        if !buf.is_null() || len != 0 {
            copy_out(pi.values(), buf, len)?;
        }
        Ok(())
    })
}

/// Direction-averaged structure functions `S_p(r)` for one order `p` at
/// lattice-multiple separations.
#[no_mangle]
pub unsafe extern "C" fn lflx_structure_function(
    field: *const LflxField,
    p: f64,
    separations: *const f64,
    count: usize,
    values: *mut f64,
) -> LflxStatus {
    guard(|| {
        let u = &deref(field, "field")?.0;
        let seps = slice(separations, count, "separations")?;
        let table = stats::structure_function(u, &[p], seps)?;
        copy_out(&table.values[0], values, count)
    })
}

/// `σ = α/(3 - α)` for `α ∈ [0, 1)`.
#[no_mangle]
pub unsafe extern "C" fn lflx_sigma_of_alpha(alpha: f64, sigma: *mut f64) -> LflxStatus {
    guard(|| {
        *out(sigma, "sigma")? = stats::sigma_of_alpha(alpha)?;
        Ok(())
    })
}

/// Inverse of [`lflx_sigma_of_alpha`].
#[no_mangle]
pub unsafe extern "C" fn lflx_alpha_of_sigma(sigma: f64, alpha: *mut f64) -> LflxStatus {
    guard(|| {
        *out(alpha, "alpha")? = stats::alpha_of_sigma(sigma)?;
        Ok(())
    })
}

/// Integrates from `initial` for `t_end` with step `dt`, storing every
/// `stride`-th step. `forcing_amplitude = 0` runs unforced; otherwise the
/// fixed low-mode forcing at wavenumber `k_f` is applied.
#[no_mangle]
pub unsafe extern "C" fn lflx_run(
    initial: *const LflxField,
    nu: f64,
    dt: f64,
    t_end: f64,
    stride: u32,
    forcing_amplitude: f64,
    k_f: u32,
    out_run: *mut *mut LflxRun,
) -> LflxStatus {
    guard(|| {
        let slot = out(out_run, "out_run")?;
        let u0 = &deref(initial, "initial")?.0;
        let mut cfg = SolverConfig::new(*u0.grid(), nu, dt, t_end);
        cfg.snapshot_stride = stride as usize;
        if forcing_amplitude != 0.0 {
            cfg.forcing = ForcingSpec::fixed_low_mode(forcing_amplitude, k_f);
        }
        let u0 = u0.dealias().leray_project()?;
        boxed(slot, LflxRun(solver::run_from(&cfg, u0)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lflx_run_free(run: *mut LflxRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of stored snapshots, including `t = 0`.
#[no_mangle]
pub unsafe extern "C" fn lflx_run_snapshot_count(run: *const LflxRun, count: *mut usize) -> LflxStatus {
    guard(|| {
        *out(count, "count")? = deref(run, "run")?.0.trajectory.snapshots.len();
        Ok(())
    })
}

/// Copies snapshot `index` into a new field handle and reports its time.
#[no_mangle]
pub unsafe extern "C" fn lflx_run_snapshot(
    run: *const LflxRun,
    index: usize,
    t: *mut f64,
    out_field: *mut *mut LflxField,
) -> LflxStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        let snaps = &deref(run, "run")?.0.trajectory.snapshots;
        let s = snaps.get(index).ok_or_else(|| {
            Error::InvalidArgument(format!("snapshot {index} out of range ({})", snaps.len()))
        })?;
        if !t.is_null() {
            *t = s.t;
        }
        boxed(slot, LflxField(s.u.clone()));
        Ok(())
    })
}

/// Integrated energy budget of the run.
#[no_mangle]
pub unsafe extern "C" fn lflx_run_budget(run: *const LflxRun, budget: *mut LflxBudget) -> LflxStatus {
    guard(|| {
        let b = &deref(run, "run")?.0.budget;
        let last = |v: &[f64]| v.last().copied().unwrap_or(0.0);
        *out(budget, "budget")? = LflxBudget {
            initial_energy: b.kinetic_energy.first().copied().unwrap_or(0.0),
            final_energy: last(&b.kinetic_energy),
            cumulative_dissipation: last(&b.cumulative_dissipation),
            cumulative_injection: last(&b.cumulative_injection),
            residual: b.balance_residual(),
        };
        Ok(())
    })
}

/// Writes `field` as a binary snapshot with viscosity `nu` and time `t`. The
/// pressure is solved for the unforced flow and stored alongside.
#[no_mangle]
pub unsafe extern "C" fn lflx_snapshot_save(
    file: *const c_char,
    field: *const LflxField,
    nu: f64,
    t: f64,
) -> LflxStatus {
    guard(|| {
        let p = path(file)?;
        let u = deref(field, "field")?.0.clone();
        let zero = SpectralField::zeros(*u.grid(), u.components());
        let snap = Snapshot::new(t, u, &zero)?;
        save_snapshot(p, &SnapshotFile::from_snapshot(nu, &snap))?;
        Ok(())
    })
}

/// Reads a snapshot's velocity. `nu`, `t` and `divergence_warning` may be
/// NULL; the warning flag is set when the stored field is not solenoidal.
#[no_mangle]
pub unsafe extern "C" fn lflx_snapshot_load(
    file: *const c_char,
    out_field: *mut *mut LflxField,
    nu: *mut f64,
    t: *mut f64,
    divergence_warning: *mut bool,
) -> LflxStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        let loaded = load_snapshot(path(file)?)?;
        if !nu.is_null() {
            *nu = loaded.file.nu;
        }
        if !t.is_null() {
            *t = loaded.file.t;
        }
        if !divergence_warning.is_null() {
            *divergence_warning = loaded.divergence_warning;
        }
        boxed(slot, LflxField(loaded.file.velocity.to_spectral()));
        Ok(())
    })
}
