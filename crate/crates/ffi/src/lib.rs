//! C interface to `fluxlat`.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns a [`FluxlatStatus`]; on failure the message
//! is available from [`fluxlat_last_error_message`] on the same thread.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use fluxlat::basis::{
    enumerate_gauss_sector, validate_charges, ChargeConfig, EnumerationLimits, GaugeSectorBasis, Picture,
};
use fluxlat::hamiltonian::{build_kogut_susskind, CouplingParams, KsCoefficients};
use fluxlat::lattice::{Boundary, LatticeGeometry};
use fluxlat::observables::{field_map, static_potential};
use fluxlat::solver::{low_spectrum, SolverOptions};
use fluxlat::{Error, ErrorClass};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxlatStatus {
    Ok = 0,
    Validation = 1,
    Capacity = 2,
    Io = 3,
    NullPointer = 4,
    InvalidArgument = 5,
    Panic = 6,
    NotFound = 7,
}

/// Charge convention selector for `convention` arguments.
pub const FLUXLAT_CONVENTION_QED: i32 = 0;
pub const FLUXLAT_CONVENTION_MICRO: i32 = 1;

/// One static charge `q` at vertex `(m, n)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FluxlatCharge {
    pub m: usize,
    pub n: usize,
    pub q: i32,
}

/// Lattice geometry handle.
pub struct FluxlatGeometry {
    inner: LatticeGeometry,
}

/// Gauss-sector basis handle; owns a copy of its geometry.
pub struct FluxlatSector {
    geom: LatticeGeometry,
    basis: GaugeSectorBasis,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).expect("nul bytes removed"));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::default());
}

enum Failure {
    Core(Error),
    Status(FluxlatStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(FluxlatStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Status(FluxlatStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FluxlatStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FluxlatStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            set_error(&e.to_string());
            match e.class() {
                ErrorClass::Validation => FluxlatStatus::Validation,
                ErrorClass::Capacity => FluxlatStatus::Capacity,
                ErrorClass::Io => FluxlatStatus::Io,
            }
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            FluxlatStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: caller passes a handle from the matching `_new` or null.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn as_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller guarantees `len` readable elements.
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

unsafe fn as_mut_slice<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller guarantees `len` writable elements.
    Ok(unsafe { slice::from_raw_parts_mut(p, len) })
}

fn picture(convention: i32) -> Result<Picture, Failure> {
    match convention {
        FLUXLAT_CONVENTION_QED => Ok(Picture::Qed),
        FLUXLAT_CONVENTION_MICRO => Ok(Picture::Micro),
        c => Err(invalid(format!("unknown charge convention {c}"))),
    }
}

unsafe fn charges(
    geom: &LatticeGeometry,
    sites: *const FluxlatCharge,
    n_sites: usize,
    convention: i32,
) -> Result<ChargeConfig, Failure> {
    let sites = unsafe { as_slice(sites, n_sites, "sites") }?;
    Ok(ChargeConfig::from_sites(
        geom,
        picture(convention)?,
        sites.iter().map(|s| (s.m, s.n, s.q)),
    )?)
}

/// Creates an `lx × ly` lattice; `periodic` nonzero selects periodic
/// boundaries.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn fluxlat_geometry_new(
    lx: usize,
    ly: usize,
    periodic: i32,
    out: *mut *mut FluxlatGeometry,
) -> FluxlatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let boundary = if periodic != 0 {
            Boundary::Periodic
        } else {
            Boundary::Open
        };
        let inner = LatticeGeometry::new(lx, ly, boundary)?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(FluxlatGeometry { inner })) };
        Ok(())
    })
}

/// # Safety
/// `geom` must come from [`fluxlat_geometry_new`] and not be freed yet, or
/// be null.
#[no_mangle]
pub unsafe extern "C" fn fluxlat_geometry_free(geom: *mut FluxlatGeometry) {
    if !geom.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(geom) });
    }
}

/// # Safety
/// `geom` must be a live handle; each output pointer may be null to skip it.
#[no_mangle]
pub unsafe extern "C" fn fluxlat_geometry_counts(
    geom: *const FluxlatGeometry,
    n_vertices: *mut usize,
    n_links: *mut usize,
    n_plaquettes: *mut usize,
) -> FluxlatStatus {
    guard(|| {
        let g = &unsafe { as_ref(geom, "geom") }?.inner;
        for (p, v) in [
            (n_vertices, g.n_vertices()),
            (n_links, g.n_links()),
            (n_plaquettes, g.n_plaquettes()),
        ] {
            if !p.is_null() {
                // SAFETY: non-null output supplied by the caller.
                unsafe { *p = v };
            }
        }
        Ok(())
    })
}

/// Sets `*valid` to 1 if the charges satisfy the rules of `convention`
/// and 0 otherwise; in the latter case the violations are the last error
/// message.
///
/// # Safety
/// `geom` must be a live handle, `sites` must point to `n_sites` records
/// and `valid` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fluxlat_charges_validate(
    geom: *const FluxlatGeometry,
    sites: *const FluxlatCharge,
    n_sites: usize,
    convention: i32,
    valid: *mut i32,
) -> FluxlatStatus {
    let mut report = None;
    let status = guard(|| {
        let g = &unsafe { as_ref(geom, "geom") }?.inner;
        if valid.is_null() {
            return Err(null("valid"));
        }
        let q = unsafe { charges(g, sites, n_sites, convention) }?;
        let r = validate_charges(&q, g);
        // SAFETY: checked non-null above.
        unsafe { *valid = i32::from(r.is_ok()) };
        if !r.is_ok() {
            report = Some(r.to_string());
        }
        Ok(())
    });
    if let Some(msg) = report {
        set_error(&msg);
    }
    status
}

/// Enumerates the Gauss-law sector of the given charges at truncation
/// `trunc`.
///
/// # Safety
/// `geom` must be a live handle, `sites` must point to `n_sites` records
/// and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fluxlat_sector_new(
    geom: *const FluxlatGeometry,
    sites: *const FluxlatCharge,
    n_sites: usize,
    convention: i32,
    trunc: u8,
    out: *mut *mut FluxlatSector,
) -> FluxlatStatus {
    guard(|| {
        let g = &unsafe { as_ref(geom, "geom") }?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let q = unsafe { charges(g, sites, n_sites, convention) }?;
        let basis = enumerate_gauss_sector(g, &q, trunc, EnumerationLimits::default())?;
        let sector = FluxlatSector { geom: g.clone(), basis };
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(sector)) };
        Ok(())
    })
}

/// # Safety
/// `sector` must come from [`fluxlat_sector_new`] and not be freed yet, or
/// be null.
#[no_mangle]
pub unsafe extern "C" fn fluxlat_sector_free(sector: *mut FluxlatSector) {
    if !sector.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(sector) });
    }
}

/// # Safety
/// `sector` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn fluxlat_sector_len(sector: *const FluxlatSector, len: *mut usize) -> FluxlatStatus {
    guard(|| {
        let s = unsafe { as_ref(sector, "sector") }?;
        if len.is_null() {
            return Err(null("len"));
        }
        // SAFETY: checked non-null above.
        unsafe { *len = s.basis.len() };
        Ok(())
    })
}

/// Copies the electric fields of state `index` into `links`
/// (`n_links` entries, link ordinal order).
///
/// # Safety
/// `sector` must be a live handle and `links` must hold `n_links` entries.
#[no_mangle]
pub unsafe extern "C" fn fluxlat_sector_state(
    sector: *const FluxlatSector,
    index: usize,
    links: *mut i8,
    n_links: usize,
) -> FluxlatStatus {
    guard(|| {
        let s = unsafe { as_ref(sector, "sector") }?;
        if index >= s.basis.len() {
            return Err(invalid(format!("index {index} out of range {}", s.basis.len())));
        }
        if n_links != s.basis.n_links() {
            return Err(invalid(format!("expected {} links, got {n_links}", s.basis.n_links())));
        }
        unsafe { as_mut_slice(links, n_links, "links") }?.copy_from_slice(s.basis.state(index));
        Ok(())
    })
}

/// Ordinal of a link configuration; [`FluxlatStatus::NotFound`] if it is
/// not in the sector.
///
/// # Safety
/// `sector` must be a live handle, `links` must hold `n_links` entries and
/// `index` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fluxlat_sector_index_of(
    sector: *const FluxlatSector,
    links: *const i8,
    n_links: usize,
    index: *mut usize,
) -> FluxlatStatus {
    guard(|| {
        let s = unsafe { as_ref(sector, "sector") }?;
        if index.is_null() {
            return Err(null("index"));
        }
        if n_links != s.basis.n_links() {
            return Err(invalid(format!("expected {} links, got {n_links}", s.basis.n_links())));
        }
        let config = unsafe { as_slice(links, n_links, "links") }?;
        match s.basis.index_of(config) {
            Some(i) => {
                // SAFETY: checked non-null above.
                unsafe { *index = i };
                Ok(())
            }
            None => Err(Failure::Status(
                FluxlatStatus::NotFound,
                "configuration is not in the sector".to_string(),
            )),
        }
    })
}

fn ground(s: &FluxlatSector, g2: f64) -> Result<(f64, Vec<f64>), Failure> {
    let coefficients = CouplingParams::qed(g2)?.ks_coefficients()?;
    ground_with(s, coefficients)
}

fn ground_with(s: &FluxlatSector, coefficients: KsCoefficients) -> Result<(f64, Vec<f64>), Failure> {
    if s.basis.is_empty() {
        return Err(Error::EmptyBasis.into());
    }
    let h = build_kogut_susskind(&s.basis, &s.geom, coefficients)?;
    let r = low_spectrum(&h, &SolverOptions::default().with_k(1))?.require_converged()?;
    let energy = r.eigenvalues[0];
    let vector = r.eigenvectors.into_iter().next().expect("one eigenpair");
    Ok((energy, vector))
}

/// Kogut-Susskind ground energy on the sector at coupling `g2`. If `state`
/// is non-null it receives the ground-state amplitudes (`state_len` must
/// equal the sector size).
///
/// # Safety
/// `sector` must be a live handle, `energy` writable, and `state` null or
/// writable for `state_len` entries.
#[no_mangle]
pub unsafe extern "C" fn fluxlat_ks_ground_state(
    sector: *const FluxlatSector,
    g2: f64,
    energy: *mut f64,
    state: *mut f64,
    state_len: usize,
) -> FluxlatStatus {
    guard(|| {
        let s = unsafe { as_ref(sector, "sector") }?;
        if energy.is_null() {
            return Err(null("energy"));
        }
        if !state.is_null() && state_len != s.basis.len() {
            return Err(invalid(format!(
                "state needs {} entries, got {state_len}",
                s.basis.len()
            )));
        }
        let (e, v) = ground(s, g2)?;
        // SAFETY: checked non-null above.
        unsafe { *energy = e };
        if !state.is_null() {
            unsafe { as_mut_slice(state, state_len, "state") }?.copy_from_slice(&v);
        }
        Ok(())
    })
}

/// Per-link `⟨E⟩` and `⟨E²⟩` in the Kogut-Susskind ground state.
///
/// # Safety
/// `sector` must be a live handle; `e_mean` and `e2_mean` must hold
/// `n_links` entries each.
#[no_mangle]
pub unsafe extern "C" fn fluxlat_ks_field_means(
    sector: *const FluxlatSector,
    g2: f64,
    e_mean: *mut f64,
    e2_mean: *mut f64,
    n_links: usize,
) -> FluxlatStatus {
    guard(|| {
        let s = unsafe { as_ref(sector, "sector") }?;
        if n_links != s.geom.n_links() {
            return Err(invalid(format!("expected {} links, got {n_links}", s.geom.n_links())));
        }
        let e_out = unsafe { as_mut_slice(e_mean, n_links, "e_mean") }?;
        let e2_out = unsafe { as_mut_slice(e2_mean, n_links, "e2_mean") }?;
        let (_, v) = ground(s, g2)?;
        let map = field_map(&v, &s.basis, &s.geom)?;
        e_out.copy_from_slice(&map.e_mean);
        e2_out.copy_from_slice(&map.e2_mean);
        Ok(())
    })
}

/// Static potential `V(R)` for each separation in `r_list`, written to
/// `v_out` in the same order. Separations must be even.
///
/// # Safety
/// `geom` must be a live handle; `r_list` and `v_out` must hold `n`
/// entries each.
#[no_mangle]
pub unsafe extern "C" fn fluxlat_static_potential(
    geom: *const FluxlatGeometry,
    g2: f64,
    trunc: u8,
    r_list: *const usize,
    n: usize,
    v_out: *mut f64,
) -> FluxlatStatus {
    guard(|| {
        let g = &unsafe { as_ref(geom, "geom") }?.inner;
        let rs = unsafe { as_slice(r_list, n, "r_list") }?;
        let out = unsafe { as_mut_slice(v_out, n, "v_out") }?;
        let params = CouplingParams::qed(g2)?;
        let table = static_potential(
            g,
            &params,
            trunc,
            rs,
            EnumerationLimits::default(),
            &SolverOptions::default(),
        )?;
        for (slot, r) in out.iter_mut().zip(rs) {
            *slot = table.rows.iter().find(|row| row.r == *r).expect("every R tabulated").v;
        }
        Ok(())
    })
}

/// Message of the last failed call on this thread; empty if it succeeded.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn fluxlat_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn fluxlat_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

#[doc(hidden)]
pub fn last_error() -> String {
    // SAFETY: the pointer refers to the thread-local string.
    unsafe { CStr::from_ptr(fluxlat_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}
