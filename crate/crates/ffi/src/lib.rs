//! C interface over opaque handles. Every call returns an `LgStatus`; on failure the
//! message is kept per thread and read back with `lg_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use liegraph::geometry::{build_geometric_graph, trial_rng, GeometricGraph, SpaceKind, SpaceSpec};
use liegraph::rootdata::{DominantWeight, Family, RootSystem};
use liegraph::spectra::{eig_symmetric, SpectralMeasure};
use liegraph::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Unsupported = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LgFamily {
    A = 0,
    B = 1,
    C = 2,
    D = 3,
}

/// Root system handle.
pub struct LgRootSystem {
    inner: RootSystem,
}

/// Geometric graph handle.
pub struct LgGraph {
    inner: GeometricGraph,
}

/// Spectrum handle, eigenvalues in descending order.
pub struct LgSpectrum {
    inner: SpectralMeasure,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> LgStatus {
    match e {
        Error::Config(_) | Error::Size(_) => LgStatus::Unsupported,
        Error::Numerical(_) => LgStatus::Numerical,
        _ => LgStatus::InvalidArgument,
    }
}

fn guard<F: FnOnce() -> Result<(), (LgStatus, String)>>(f: F) -> LgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside liegraph".into());
            LgStatus::Panic
        }
    }
}

fn lib<T>(r: liegraph::Result<T>) -> Result<T, (LgStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), (LgStatus, String)> {
    if p.is_null() {
        Err((LgStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to fit)
/// and returns its full length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn lg_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn lg_root_system_new(family: LgFamily, n: usize, out: *mut *mut LgRootSystem) -> LgStatus {
    guard(|| {
        non_null(out, "out")?;
        let f = match family {
            LgFamily::A => Family::A,
            LgFamily::B => Family::B,
            LgFamily::C => Family::C,
            LgFamily::D => Family::D,
        };
        let rs = lib(RootSystem::new(f, n))?;
        *out = Box::into_raw(Box::new(LgRootSystem { inner: rs }));
        Ok(())
    })
}

/// # Safety
/// `rs` must come from `lg_root_system_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lg_root_system_free(rs: *mut LgRootSystem) {
    if !rs.is_null() {
        drop(Box::from_raw(rs));
    }
}

/// # Safety
/// `rs` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_root_system_rank(rs: *const LgRootSystem, out: *mut usize) -> LgStatus {
    guard(|| {
        non_null(rs, "rs")?;
        non_null(out, "out")?;
        *out = (*rs).inner.rank;
        Ok(())
    })
}

/// vol(𝔱/𝔱_ℤ) and vol(G) (Macdonald product).
///
/// # Safety
/// `rs` must be a live handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_volumes(rs: *const LgRootSystem, vol_torus: *mut f64, vol_group: *mut f64) -> LgStatus {
    guard(|| {
        non_null(rs, "rs")?;
        non_null(vol_torus, "vol_torus")?;
        non_null(vol_group, "vol_group")?;
        let v = (*rs).inner.volumes();
        *vol_torus = v.vol_t_mod_tz;
        *vol_group = v.vol_g_macdonald;
        Ok(())
    })
}

/// c_λ at level L for λ given in fundamental-weight coordinates.
///
/// # Safety
/// `coords` must point to `len` integers; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_limiting_eigenvalue(rs: *const LgRootSystem, coords: *const i64, len: usize, level: f64, out: *mut f64) -> LgStatus {
    guard(|| {
        non_null(rs, "rs")?;
        non_null(coords, "coords")?;
        non_null(out, "out")?;
        let rs = &(*rs).inner;
        let lambda = lib(DominantWeight::new(rs, std::slice::from_raw_parts(coords, len).to_vec()))?;
        *out = lib(liegraph::gaussian::limiting_eigenvalue(rs, &lambda, level))?;
        Ok(())
    })
}

/// I_k for rank ≤ 2.
///
/// # Safety
/// `rs` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_one_vertex_integral(rs: *const LgRootSystem, k: usize, out: *mut f64) -> LgStatus {
    guard(|| {
        non_null(rs, "rs")?;
        non_null(out, "out")?;
        *out = lib(liegraph::moments::one_vertex_integral(&(*rs).inner, k))?;
        Ok(())
    })
}

/// Geometric graph on N Haar points of `space` ("su2", "so3", "s2", ...) at level L.
///
/// # Safety
/// `space` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_graph_new(space: *const c_char, n_points: usize, level: f64, seed: u64, out: *mut *mut LgGraph) -> LgStatus {
    guard(|| {
        non_null(space, "space")?;
        non_null(out, "out")?;
        let name = CStr::from_ptr(space).to_str().map_err(|_| (LgStatus::InvalidArgument, "space is not UTF-8".to_string()))?;
        let kind: SpaceKind = lib(name.parse())?;
        let sp = lib(SpaceSpec::new(kind))?;
        let mut rng = trial_rng(seed, 0);
        let g = lib(build_geometric_graph(&sp, n_points, level, &mut rng))?;
        *out = Box::into_raw(Box::new(LgGraph { inner: g }));
        Ok(())
    })
}

/// # Safety
/// `g` must come from `lg_graph_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lg_graph_free(g: *mut LgGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_graph_size(g: *const LgGraph, vertices: *mut usize, edges: *mut usize) -> LgStatus {
    guard(|| {
        non_null(g, "graph")?;
        non_null(vertices, "vertices")?;
        non_null(edges, "edges")?;
        *vertices = (*g).inner.len();
        *edges = (*g).inner.edge_count();
        Ok(())
    })
}

/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_spectrum_from_graph(g: *const LgGraph, out: *mut *mut LgSpectrum) -> LgStatus {
    guard(|| {
        non_null(g, "graph")?;
        non_null(out, "out")?;
        let sm = lib(SpectralMeasure::from_adjacency(&(*g).inner.adj))?;
        *out = Box::into_raw(Box::new(LgSpectrum { inner: sm }));
        Ok(())
    })
}

/// Spectrum of a dense symmetric row-major n×n matrix.
///
/// # Safety
/// `matrix` must point to n·n doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_spectrum_from_matrix(matrix: *const f64, n: usize, out: *mut *mut LgSpectrum) -> LgStatus {
    guard(|| {
        non_null(matrix, "matrix")?;
        non_null(out, "out")?;
        let a = std::slice::from_raw_parts(matrix, n * n);
        let ev = lib(eig_symmetric(a, n))?;
        *out = Box::into_raw(Box::new(LgSpectrum { inner: SpectralMeasure::from_eigenvalues(ev) }));
        Ok(())
    })
}

/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_spectrum_len(s: *const LgSpectrum, out: *mut usize) -> LgStatus {
    guard(|| {
        non_null(s, "spectrum")?;
        non_null(out, "out")?;
        *out = (*s).inner.eigenvalues.len();
        Ok(())
    })
}

/// Copies the eigenvalues into `buf`, which must hold at least `lg_spectrum_len` values.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lg_spectrum_copy(s: *const LgSpectrum, buf: *mut f64, len: usize) -> LgStatus {
    guard(|| {
        non_null(s, "spectrum")?;
        non_null(buf, "buf")?;
        let ev = &(*s).inner.eigenvalues;
        if len < ev.len() {
            return Err((LgStatus::BufferTooSmall, format!("need {} values, got room for {len}", ev.len())));
        }
        ptr::copy_nonoverlapping(ev.as_ptr(), buf, ev.len());
        Ok(())
    })
}

/// # Safety
/// `s` must come from a `lg_spectrum_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lg_spectrum_free(s: *mut LgSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
