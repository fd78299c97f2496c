//! C interface to `kgcoherent`.
//!
//! States are opaque handles created by `kg_*_new` and released with the
//! matching `kg_*_free`. Every fallible call returns a [`KgStatus`] and
//! writes results through out-pointers; on failure a message is available
//! from [`kg_last_error`] on the same thread. Panics never cross the
//! boundary and are reported as `KG_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kgcoherent::freefield::{
    energy_moments, evolved_moments, kg_field, probability_density, velocity_moments,
    FreeCoherentState, Moment, NormalizationConvention,
};
use kgcoherent::magnetic::{self, LandauSeries, MagneticCoherentState, PositionVariant, SeriesSpec};
use kgcoherent::neutral::{neutral_field, NeutralCoherentState};
use kgcoherent::quadrature::QuadratureSpec;
use kgcoherent::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    NonConvergence = 3,
    Panic = 4,
}

/// Moment selector for [`kg_free_moment`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KgMoment {
    XMean = 0,
    XVar = 1,
    PMean = 2,
    PVar = 3,
    VMean = 4,
    VVar = 5,
    EMean = 6,
    EVar = 7,
    UncertaintyProduct = 8,
}

impl From<KgMoment> for Moment {
    fn from(m: KgMoment) -> Self {
        match m {
            KgMoment::XMean => Moment::XMean,
            KgMoment::XVar => Moment::XVar,
            KgMoment::PMean => Moment::PMean,
            KgMoment::PVar => Moment::PVar,
            KgMoment::VMean => Moment::VMean,
            KgMoment::VVar => Moment::VVar,
            KgMoment::EMean => Moment::EMean,
            KgMoment::EVar => Moment::EVar,
            KgMoment::UncertaintyProduct => Moment::UncertaintyProduct,
        }
    }
}

/// Which reading of the transverse position series to use.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KgPositionVariant {
    Printed = 0,
    Symmetric = 1,
}

/// Free charged packet in 1+1 dimensions.
pub struct KgFreeState {
    state: FreeCoherentState,
    quad: QuadratureSpec,
}

/// Real field built from a charge-parity pair.
pub struct KgNeutralState {
    state: NeutralCoherentState,
    quad: QuadratureSpec,
}

/// Packet in a uniform magnetic field with its Landau series.
pub struct KgMagneticState {
    series: LandauSeries,
    spec: SeriesSpec,
    quad: QuadratureSpec,
}

/// Time-independent expectations of a magnetic packet.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KgConserved {
    pub energy: f64,
    pub x3dot: f64,
    pub l3: f64,
    pub r_mean: f64,
    pub r_sq_mean: f64,
    pub r_var: f64,
    pub r_gc_sq_mean: f64,
    pub occupation_sum: f64,
}

/// Classical helix with the same mean momenta.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KgClassical {
    pub energy: f64,
    pub radius: f64,
    pub period: f64,
    pub parallel_velocity: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> KgStatus {
    if e.is_non_convergence() {
        KgStatus::NonConvergence
    } else {
        KgStatus::InvalidParameter
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), KgStatus>) -> KgStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KgStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            KgStatus::Panic
        }
    }
}

fn lib<T>(r: kgcoherent::Result<T>) -> Result<T, KgStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> KgStatus {
    set_error(format!("{what} is null"));
    KgStatus::NullPointer
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, KgStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(p: *mut T, v: T, what: &str) -> Result<(), KgStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

fn quad_spec(rel_tol: f64) -> Result<QuadratureSpec, KgStatus> {
    let q = if rel_tol > 0.0 {
        QuadratureSpec::default().with_rel_tol(rel_tol)
    } else {
        QuadratureSpec::default()
    };
    lib(q.validate())?;
    Ok(q)
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn kg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a free packet. `quad_rel_tol <= 0` selects the default.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kg_free_new(
    lambda: f64,
    alpha: f64,
    p_mean: f64,
    epsilon: i32,
    quad_rel_tol: f64,
    out: *mut *mut KgFreeState,
) -> KgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let eps = i8::try_from(epsilon).map_err(|_| {
            set_error(format!("epsilon must be +1 or -1, got {epsilon}"));
            KgStatus::InvalidParameter
        })?;
        let state = lib(FreeCoherentState::new(lambda, alpha, p_mean, eps))?;
        let quad = quad_spec(quad_rel_tol)?;
        out.write(Box::into_raw(Box::new(KgFreeState { state, quad })));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`kg_free_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kg_free_free(h: *mut KgFreeState) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// `⟨v⟩` and its variance.
///
/// # Safety
/// `h` must be a live handle; out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kg_free_velocity(h: *const KgFreeState, mean: *mut f64, var: *mut f64) -> KgStatus {
    guard(|| {
        let h = get(h, "handle")?;
        let v = lib(velocity_moments(&h.state, &h.quad))?;
        put(mean, v.mean, "mean")?;
        put(var, v.var, "var")
    })
}

/// `⟨E⟩` and its variance.
///
/// # Safety
/// As [`kg_free_velocity`].
#[no_mangle]
pub unsafe extern "C" fn kg_free_energy(h: *const KgFreeState, mean: *mut f64, var: *mut f64) -> KgStatus {
    guard(|| {
        let h = get(h, "handle")?;
        let (m, v) = lib(energy_moments(&h.state, &h.quad))?;
        put(mean, m, "mean")?;
        put(var, v, "var")
    })
}

/// One moment of the evolved packet at time `tau`.
///
/// # Safety
/// As [`kg_free_velocity`]. `which` must be a declared `KgMoment` value; any
/// other integer is undefined behavior.
#[no_mangle]
pub unsafe extern "C" fn kg_free_moment(
    h: *const KgFreeState,
    tau: f64,
    which: KgMoment,
    out: *mut f64,
) -> KgStatus {
    guard(|| {
        let h = get(h, "handle")?;
        let m = lib(evolved_moments(&h.state, tau, &h.quad))?;
        put(out, m.value(which.into()), "out")
    })
}

/// Probability density `ρ(τ, x)`.
///
/// # Safety
/// As [`kg_free_velocity`].
#[no_mangle]
pub unsafe extern "C" fn kg_free_density(h: *const KgFreeState, tau: f64, x: f64, out: *mut f64) -> KgStatus {
    guard(|| {
        let h = get(h, "handle")?;
        put(out, lib(probability_density(&h.state, tau, x, &h.quad))?, "out")
    })
}

/// Field `ψ(τ, x)` with the symmetric normalization.
///
/// # Safety
/// As [`kg_free_velocity`].
#[no_mangle]
pub unsafe extern "C" fn kg_free_field(
    h: *const KgFreeState,
    tau: f64,
    x: f64,
    re: *mut f64,
    im: *mut f64,
) -> KgStatus {
    guard(|| {
        let h = get(h, "handle")?;
        let z = lib(kg_field(&h.state, tau, x, &NormalizationConvention::default(), &h.quad))?;
        put(re, z.re, "re")?;
        put(im, z.im, "im")
    })
}

/// Creates a neutral packet. `quad_rel_tol <= 0` selects the default.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kg_neutral_new(
    lambda: f64,
    alpha: f64,
    p_mean: f64,
    quad_rel_tol: f64,
    out: *mut *mut KgNeutralState,
) -> KgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let state = lib(NeutralCoherentState::from_params(lambda, alpha, p_mean))?;
        let quad = quad_spec(quad_rel_tol)?;
        out.write(Box::into_raw(Box::new(KgNeutralState { state, quad })));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`kg_neutral_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kg_neutral_free(h: *mut KgNeutralState) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Neutral field at `(τ, x)`; the imaginary part is rounding noise.
///
/// # Safety
/// `h` must be a live handle; out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kg_neutral_field(
    h: *const KgNeutralState,
    tau: f64,
    x: f64,
    re: *mut f64,
    im: *mut f64,
) -> KgStatus {
    guard(|| {
        let h = get(h, "handle")?;
        let z = lib(neutral_field(&h.state, tau, x, &h.quad))?;
        put(re, z.re, "re")?;
        put(im, z.im, "im")
    })
}

/// Creates a magnetic packet and sums its Landau series.
/// `tail_tol <= 0` and `quad_rel_tol <= 0` select the defaults.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn kg_magnetic_new(
    lambda_field: f64,
    lambda_perp: f64,
    lambda3: f64,
    p1_mean: f64,
    p3_mean: f64,
    tail_tol: f64,
    quad_rel_tol: f64,
    out: *mut *mut KgMagneticState,
) -> KgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let st = lib(MagneticCoherentState::new(lambda_field, lambda_perp, lambda3, p1_mean, p3_mean))?;
        let mut spec = SeriesSpec::default();
        if tail_tol > 0.0 {
            spec.tail_tol = tail_tol;
        }
        lib(spec.validate())?;
        let quad = quad_spec(quad_rel_tol)?;
        let series = lib(LandauSeries::new(&st, &spec, &quad))?;
        out.write(Box::into_raw(Box::new(KgMagneticState { series, spec, quad })));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`kg_magnetic_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kg_magnetic_free(h: *mut KgMagneticState) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Conserved expectations.
///
/// # Safety
/// `h` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kg_magnetic_conserved(h: *const KgMagneticState, out: *mut KgConserved) -> KgStatus {
    guard(|| {
        let h = get(h, "handle")?;
        let c = h.series.conserved();
        let v = KgConserved {
            energy: c.energy,
            x3dot: h.series.parallel(0.0).x3dot_mean,
            l3: c.l3,
            r_mean: c.r_mean,
            r_sq_mean: c.r_sq_mean,
            r_var: c.r_var,
            r_gc_sq_mean: c.r_gc_sq_mean,
            occupation_sum: c.total_mass,
        };
        put(out, v, "out")
    })
}

/// Classical helix values for the same mean momenta.
///
/// # Safety
/// As [`kg_magnetic_conserved`].
#[no_mangle]
pub unsafe extern "C" fn kg_magnetic_classical(h: *const KgMagneticState, out: *mut KgClassical) -> KgStatus {
    guard(|| {
        let h = get(h, "handle")?;
        let st = &h.series.state;
        let v = KgClassical {
            energy: st.classical_energy(),
            radius: st.classical_radius(),
            period: st.classical_period(),
            parallel_velocity: st.classical_parallel_velocity(),
        };
        put(out, v, "out")
    })
}

/// `⟨x¹⟩, ⟨x²⟩, ⟨x³⟩` at time `tau`, written to `out[0..3]`.
///
/// # Safety
/// `h` must be a live handle; `out` must be valid for three writes.
/// `variant` must be a declared `KgPositionVariant` value.
#[no_mangle]
pub unsafe extern "C" fn kg_magnetic_position(
    h: *const KgMagneticState,
    tau: f64,
    variant: KgPositionVariant,
    out: *mut f64,
) -> KgStatus {
    guard(|| {
        let h = get(h, "handle")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = match variant {
            KgPositionVariant::Printed => PositionVariant::Printed,
            KgPositionVariant::Symmetric => PositionVariant::Symmetric,
        };
        let x = lib(h.series.transverse(tau, v))?;
        let x3 = h.series.parallel(tau).x3_mean;
        std::slice::from_raw_parts_mut(out, 3).copy_from_slice(&[x[0], x[1], x3]);
        Ok(())
    })
}

/// `Δx³Δp₃` at time `tau`.
///
/// # Safety
/// As [`kg_magnetic_conserved`].
#[no_mangle]
pub unsafe extern "C" fn kg_magnetic_x3_uncertainty(h: *const KgMagneticState, tau: f64, out: *mut f64) -> KgStatus {
    guard(|| {
        let h = get(h, "handle")?;
        put(out, h.series.x3_uncertainty(tau), "out")
    })
}

/// Field `ψ(τ; ρ, φ, x³)` with the symmetric normalization.
///
/// # Safety
/// `h` must be a live handle; out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kg_magnetic_field(
    h: *const KgMagneticState,
    tau: f64,
    rho: f64,
    phi: f64,
    x3: f64,
    re: *mut f64,
    im: *mut f64,
) -> KgStatus {
    guard(|| {
        let h = get(h, "handle")?;
        let z = lib(magnetic::kg_field(
            &h.series.state,
            tau,
            rho,
            phi,
            x3,
            &NormalizationConvention::default(),
            &h.spec,
            &h.quad,
        ))?;
        put(re, z.re, "re")?;
        put(im, z.im, "im")
    })
}
