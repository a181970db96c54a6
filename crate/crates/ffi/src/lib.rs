//! C interface to `barron-bridge`.
//!
//! Networks cross the boundary as opaque [`BbNet`] handles; everything
//! structured (polynomials, spectral representations, certificates, reports)
//! crosses as JSON text in the same formats the command-line tool reads and
//! writes. Every fallible function returns a [`BbStatus`]; on failure the
//! message is available from [`bb_last_error`] on the same thread.
//!
//! Ownership: handles from `bb_*` constructors are freed with
//! [`bb_net_free`], strings returned through `char **` out-parameters with
//! [`bb_string_free`]. Out-parameters are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use barron_bridge::convert::{convert, ConvertOptions};
use barron_bridge::io;
use barron_bridge::poly::{build_pairs, poly_to_repu, BasisScale, Polynomial};
use barron_bridge::spectral::{spectral_to_repu, SpectralRep};
use barron_bridge::verify::{check_certificate, sup_error, Sampler};
use barron_bridge::{EmbeddingCertificate, Error, QuadratureSpec, Rule, ShallowNet};
use serde_json::json;

/// Opaque network handle.
pub struct BbNet(ShallowNet);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    DimensionMismatch = 4,
    Json = 5,
    Io = 6,
    UnknownActivation = 7,
    NoConstruction = 8,
    /// Ill-conditioned solve, quadrature non-convergence, non-finite input.
    Numerical = 9,
    /// A construction's precondition does not hold (radius, order, kink, ...).
    Precondition = 10,
    /// Certificate check ran and failed.
    CertificateFailed = 11,
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BbQuadRule {
    Midpoint = 0,
    Trapezoid = 1,
    GaussLegendre = 2,
}

/// Conversion options. Fields set to NaN are treated as absent.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct BbConvertOptions {
    pub quad_rule: BbQuadRule,
    pub quad_nodes: usize,
    /// Taylor expansion point; NaN picks it automatically.
    pub expansion_point: f64,
    /// Required for smooth to RePU(s >= 2).
    pub radius: f64,
    /// Shift for derivative-to-antiderivative conversions.
    pub h: f64,
    /// Nonzero: check a user substitution measure pointwise before use.
    pub check_gamma: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BbStatus {
    match e {
        Error::DimensionMismatch { .. } => BbStatus::DimensionMismatch,
        Error::InvalidArgument(_) => BbStatus::InvalidArgument,
        Error::UnknownActivation(_) => BbStatus::UnknownActivation,
        Error::NoConstruction { .. } => BbStatus::NoConstruction,
        Error::Json(_) => BbStatus::Json,
        Error::File { .. } | Error::Io(_) => BbStatus::Io,
        Error::NonFinite(_) | Error::IllConditioned { .. } | Error::NonConvergence { .. } => BbStatus::Numerical,
        Error::OrderExceeded { .. }
        | Error::AmbiguousAtKink { .. }
        | Error::NotIntegrable { .. }
        | Error::MissingOracle(_)
        | Error::MissingTailBound(_)
        | Error::AtomOutsideRadius { .. }
        | Error::WrongActivation { .. }
        | Error::SymmetryViolated(_)
        | Error::DegenerateTruncation(_)
        | Error::GammaMismatch { .. } => BbStatus::Precondition,
    }
}

/// Failure inside the wrapper: a status plus its message.
struct Fail(BbStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type FfiResult<T> = Result<T, Fail>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> BbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BbStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            BbStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(BbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(BbStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

unsafe fn net_arg<'a>(p: *const BbNet, what: &str) -> FfiResult<&'a ShallowNet> {
    p.as_ref().map(|n| &n.0).ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn boxed(net: ShallowNet) -> *mut BbNet {
    Box::into_raw(Box::new(BbNet(net)))
}

fn c_string(s: String) -> FfiResult<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(BbStatus::InvalidArgument, "output contains a NUL byte".into()))
}

fn json_err(e: serde_json::Error) -> Fail {
    Fail(BbStatus::Json, e.to_string())
}

fn present(v: f64) -> Option<f64> {
    (!v.is_nan()).then_some(v)
}

impl From<BbQuadRule> for Rule {
    fn from(r: BbQuadRule) -> Self {
        match r {
            BbQuadRule::Midpoint => Rule::Midpoint,
            BbQuadRule::Trapezoid => Rule::Trapezoid,
            BbQuadRule::GaussLegendre => Rule::GaussLegendre,
        }
    }
}

impl BbConvertOptions {
    fn quad(&self) -> QuadratureSpec {
        QuadratureSpec::new(self.quad_rule.into(), self.quad_nodes)
    }
}

/// Defaults: Gauss-Legendre with 256 nodes, automatic expansion point, no
/// radius, no shift, gamma check on.
#[no_mangle]
pub extern "C" fn bb_convert_options_default() -> BbConvertOptions {
    let q = QuadratureSpec::default();
    BbConvertOptions {
        quad_rule: match q.rule {
            Rule::Midpoint => BbQuadRule::Midpoint,
            Rule::Trapezoid => BbQuadRule::Trapezoid,
            Rule::GaussLegendre => BbQuadRule::GaussLegendre,
        },
        quad_nodes: q.nodes,
        expansion_point: f64::NAN,
        radius: f64::NAN,
        h: f64::NAN,
        check_gamma: 1,
    }
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn bb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next `bb_*` call on the same thread.
#[no_mangle]
pub extern "C" fn bb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a network from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bb_net_from_json(json: *const c_char, out: *mut *mut BbNet) -> BbStatus {
    guard(|| {
        let net = io::net_from_json(str_arg(json, "json")?)?;
        put(out, boxed(net), "out")
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bb_net_read(path: *const c_char, out: *mut *mut BbNet) -> BbStatus {
    guard(|| {
        let net = io::read_net(str_arg(path, "path")?)?;
        put(out, boxed(net), "out")
    })
}

/// Serializes a network; free the result with [`bb_string_free`].
///
/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bb_net_to_json(net: *const BbNet, out: *mut *mut c_char) -> BbStatus {
    guard(|| {
        let s = io::net_to_json(net_arg(net, "net")?)?;
        put(out, c_string(s)?, "out")
    })
}

/// # Safety
/// `net` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bb_net_free(net: *mut BbNet) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Input dimension `d`.
///
/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bb_net_dim(net: *const BbNet, out: *mut usize) -> BbStatus {
    guard(|| put(out, net_arg(net, "net")?.d(), "out"))
}

/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bb_net_atom_count(net: *const BbNet, out: *mut usize) -> BbStatus {
    guard(|| put(out, net_arg(net, "net")?.measure.len(), "out"))
}

/// Evaluates the network at `x[0..len]`; `len` must equal the dimension.
///
/// # Safety
/// `x` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bb_net_evaluate(net: *const BbNet, x: *const f64, len: usize, out: *mut f64) -> BbStatus {
    guard(|| {
        let net = net_arg(net, "net")?;
        if x.is_null() && len > 0 {
            return Err(null("x"));
        }
        let xs = if len == 0 { &[][..] } else { std::slice::from_raw_parts(x, len) };
        put(out, net.evaluate(xs)?, "out")
    })
}

/// Representation norm value (Lipschitz form, or RePU form for RePU nets).
///
/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bb_net_norm(net: *const BbNet, out: *mut f64) -> BbStatus {
    guard(|| put(out, net_arg(net, "net")?.representation_norm().value, "out"))
}

/// Full norm report as JSON.
///
/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bb_net_norm_json(net: *const BbNet, out: *mut *mut c_char) -> BbStatus {
    guard(|| {
        let s = serde_json::to_string(&net_arg(net, "net")?.representation_norm()).map_err(json_err)?;
        put(out, c_string(s)?, "out")
    })
}

/// Sup distance on `[-1, 1]^d`. `sampler` is `grid:N`, `rand:M` or
/// `rand:M:SEED`; null selects the default for the dimension (seed 0).
///
/// # Safety
/// `a`, `b` must be live handles; `sampler` null or NUL-terminated; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bb_sup_error(
    a: *const BbNet,
    b: *const BbNet,
    sampler: *const c_char,
    out: *mut f64,
) -> BbStatus {
    guard(|| {
        let (a, b) = (net_arg(a, "a")?, net_arg(b, "b")?);
        let sampler = match opt_str_arg(sampler, "sampler")? {
            Some(s) => s.parse::<Sampler>()?,
            None => Sampler::default_for(a.d()),
        };
        put(out, sup_error(a, b, sampler)?, "out")
    })
}

/// Converts `net` to the activation named `target` (`relu`, `repu3`, ...).
///
/// `gamma_json` is an optional substitution measure `{"d":1,"atoms":[...]}`.
/// `report` (optional, may be null) receives
/// `{"route":..., "certificate":..., "error_bound":...}`.
///
/// # Safety
/// Pointers must be valid as documented; `opts` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn bb_convert(
    net: *const BbNet,
    target: *const c_char,
    opts: *const BbConvertOptions,
    gamma_json: *const c_char,
    out: *mut *mut BbNet,
    report: *mut *mut c_char,
) -> BbStatus {
    guard(|| {
        let net = net_arg(net, "net")?;
        let target = io::parse_activation(str_arg(target, "target")?)?;
        let o = opts.as_ref().copied().unwrap_or_else(|| bb_convert_options_default());
        let gamma = match opt_str_arg(gamma_json, "gamma_json")? {
            Some(s) => {
                let m: barron_bridge::DiscreteMeasure = serde_json::from_str(s).map_err(json_err)?;
                m.validate()?;
                Some(m)
            }
            None => None,
        };
        let options = ConvertOptions {
            quad: o.quad(),
            expansion_point: present(o.expansion_point),
            radius: present(o.radius),
            h: present(o.h),
            gamma,
            check_gamma: o.check_gamma != 0,
            ..ConvertOptions::default()
        };
        let c = convert(net, &target, &options)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = if report.is_null() {
            None
        } else {
            let r = json!({ "route": c.route, "certificate": c.certificate, "error_bound": c.error_bound });
            Some(c_string(r.to_string())?)
        };
        out.write(boxed(c.net));
        if let Some(t) = text {
            report.write(t);
        }
        Ok(())
    })
}

/// Exact RePU(s) representation of a polynomial given as JSON
/// `{"d":..,"s":..,"terms":[{"alpha":[..],"c":..}]}`. `scale` is `lattice`
/// (null), `compact[:ratio]` or `classic`.
///
/// # Safety
/// Strings must be NUL-terminated (`scale` may be null); `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bb_poly_to_repu(
    poly_json: *const c_char,
    scale: *const c_char,
    out: *mut *mut BbNet,
) -> BbStatus {
    guard(|| {
        let poly: Polynomial = serde_json::from_str(str_arg(poly_json, "poly_json")?).map_err(json_err)?;
        let scale = match opt_str_arg(scale, "scale")? {
            Some(s) => s.parse::<BasisScale>()?,
            None => BasisScale::default(),
        };
        let pairs = build_pairs(poly.s, poly.d, scale)?;
        let res = poly_to_repu(&poly, &pairs)?;
        put(out, boxed(res.net), "out")
    })
}

/// RePU(s) net for a finite spectral representation given as JSON
/// `{"d":..,"terms":[{"xi":[..],"re":..,"im":..}]}`. Only the quadrature
/// fields of `opts` are used. `cert` (optional) receives the certificate.
///
/// # Safety
/// Pointers must be valid as documented; `opts` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn bb_spectral_to_repu(
    spectral_json: *const c_char,
    s: u32,
    opts: *const BbConvertOptions,
    out: *mut *mut BbNet,
    cert: *mut *mut c_char,
) -> BbStatus {
    guard(|| {
        let rep: SpectralRep = serde_json::from_str(str_arg(spectral_json, "spectral_json")?).map_err(json_err)?;
        rep.validate()?;
        let o = opts.as_ref().copied().unwrap_or_else(|| bb_convert_options_default());
        let pairs = build_pairs(s, rep.d, BasisScale::default())?;
        let (net, c) = spectral_to_repu(&rep, s, &pairs, &o.quad())?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = if cert.is_null() {
            None
        } else {
            Some(c_string(serde_json::to_string(&c).map_err(json_err)?)?)
        };
        out.write(boxed(net));
        if let Some(t) = text {
            cert.write(t);
        }
        Ok(())
    })
}

/// Rechecks a certificate against the nets. Returns
/// [`BbStatus::CertificateFailed`] when the inequality or a recorded norm does
/// not hold; the check report (optional `report`) is written either way.
/// `source` may be null for spectral certificates.
///
/// # Safety
/// Pointers must be valid as documented.
#[no_mangle]
pub unsafe extern "C" fn bb_check_certificate(
    cert_json: *const c_char,
    source: *const BbNet,
    target: *const BbNet,
    tol_rel: f64,
    report: *mut *mut c_char,
) -> BbStatus {
    guard(|| {
        let cert: EmbeddingCertificate = serde_json::from_str(str_arg(cert_json, "cert_json")?).map_err(json_err)?;
        let source = source.as_ref().map(|n| &n.0);
        let target = net_arg(target, "target")?;
        let check = check_certificate(&cert, source, target, tol_rel);
        if !report.is_null() {
            report.write(c_string(serde_json::to_string(&check).map_err(json_err)?)?);
        }
        if check.pass {
            Ok(())
        } else {
            Err(Fail(BbStatus::CertificateFailed, check.messages.join("; ")))
        }
    })
}
