//! C ABI over the estimation engine.
//!
//! Conventions:
//! - every fallible call returns an [`ImpactStatus`]; `IMPACT_STATUS_OK` is 0;
//! - on failure, [`impact_last_error_message`] describes the most recent error
//!   on the calling thread;
//! - strings returned through `char **` are owned by the caller and released
//!   with [`impact_string_free`];
//! - a catalog handle is immutable after loading and may be shared across threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use impact_screen::api::{self, ApiError, ErrorCode, EstimateRequest, ParseRequest};
use impact_screen::catalog::{load_catalog, lookup_model, Catalog};
use impact_screen::inference::{estimate_inference, TokenLoad};
use impact_screen::ledger::{Provenance, Sourced};
use impact_screen::report::{build_observatory, export_table, resolve_country, ExportFormat};
use impact_screen::training::estimate_training;
use impact_screen::ScreeningBand;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImpactStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    CatalogIo = 3,
    CatalogInvalid = 4,
    UnknownModel = 5,
    AmbiguousModel = 6,
    UnknownCountry = 7,
    InvalidTokens = 8,
    InvalidVolume = 9,
    ParseFailed = 10,
    BadRequest = 11,
    Internal = 12,
    Panic = 13,
}

/// Screening band: `low <= central <= high`, in the unit documented by the call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ImpactBand {
    pub low: f64,
    pub central: f64,
    pub high: f64,
}

impl From<ScreeningBand> for ImpactBand {
    fn from(b: ScreeningBand) -> Self {
        ImpactBand {
            low: b.low,
            central: b.central,
            high: b.high,
        }
    }
}

/// Opaque catalog handle.
pub struct ImpactCatalog {
    catalog: Catalog,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: ImpactStatus, message: impl Into<String>) -> ImpactStatus {
    set_error(message);
    status
}

fn api_status(code: ErrorCode) -> ImpactStatus {
    match code {
        ErrorCode::UnknownModel | ErrorCode::NotFound => ImpactStatus::UnknownModel,
        ErrorCode::AmbiguousModel => ImpactStatus::AmbiguousModel,
        ErrorCode::UnknownCountry => ImpactStatus::UnknownCountry,
        ErrorCode::InvalidTokens => ImpactStatus::InvalidTokens,
        ErrorCode::InvalidVolume => ImpactStatus::InvalidVolume,
        ErrorCode::ParseFailed => ImpactStatus::ParseFailed,
        ErrorCode::BadRequest | ErrorCode::BadFormat | ErrorCode::UnknownVersion => ImpactStatus::BadRequest,
        ErrorCode::Internal => ImpactStatus::Internal,
    }
}

fn api_fail(e: &ApiError) -> ImpactStatus {
    fail(api_status(e.code), e.to_string())
}

/// Runs `f`, converting a panic into `IMPACT_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> ImpactStatus) -> ImpactStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(ImpactStatus::Panic, "internal panic"),
    }
}

/// # Safety
/// `s` is null or a valid NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, ImpactStatus> {
    if s.is_null() {
        return Err(fail(ImpactStatus::NullArgument, format!("`{what}` is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(ImpactStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

/// # Safety
/// `s` is null or a valid NUL-terminated string.
unsafe fn read_opt_str<'a>(s: *const c_char, what: &str) -> Result<Option<&'a str>, ImpactStatus> {
    if s.is_null() {
        Ok(None)
    } else {
        read_str(s, what).map(Some)
    }
}

/// # Safety
/// `catalog` is null or a live handle from this library.
unsafe fn read_catalog<'a>(catalog: *const ImpactCatalog) -> Result<&'a Catalog, ImpactStatus> {
    catalog
        .as_ref()
        .map(|c| &c.catalog)
        .ok_or_else(|| fail(ImpactStatus::NullArgument, "`catalog` is null"))
}

/// # Safety
/// `out` is null or valid for one pointer write.
unsafe fn write_string(out: *mut *mut c_char, text: String) -> ImpactStatus {
    if out.is_null() {
        return fail(ImpactStatus::NullArgument, "output pointer is null");
    }
    match CString::new(text) {
        Ok(c) => {
            *out = c.into_raw();
            ImpactStatus::Ok
        }
        Err(_) => fail(ImpactStatus::Internal, "output contains a NUL byte"),
    }
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

fn store_catalog(out: *mut *mut ImpactCatalog, catalog: Catalog) -> ImpactStatus {
    let handle = Box::into_raw(Box::new(ImpactCatalog { catalog }));
    // SAFETY: checked non-null by callers
    unsafe { *out = handle };
    ImpactStatus::Ok
}

/// Loads and validates the catalog bundle in directory `dir`.
///
/// # Safety
/// `dir` is a NUL-terminated path; `out` is valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn impact_catalog_load(dir: *const c_char, out: *mut *mut ImpactCatalog) -> ImpactStatus {
    guard(|| {
        if out.is_null() {
            return fail(ImpactStatus::NullArgument, "`out` is null");
        }
        *out = ptr::null_mut();
        let dir = tri!(read_str(dir, "dir"));
        match load_catalog(Path::new(dir)) {
            Ok(c) => store_catalog(out, c),
            Err(e) if e.is_io() => fail(ImpactStatus::CatalogIo, e.to_string()),
            Err(e) => fail(ImpactStatus::CatalogInvalid, e.to_string()),
        }
    })
}

/// Loads the bundle compiled into the library.
///
/// # Safety
/// `out` is valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn impact_catalog_load_default(out: *mut *mut ImpactCatalog) -> ImpactStatus {
    guard(|| {
        if out.is_null() {
            return fail(ImpactStatus::NullArgument, "`out` is null");
        }
        store_catalog(out, Catalog::shipped())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `catalog` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn impact_catalog_free(catalog: *mut ImpactCatalog) {
    if !catalog.is_null() {
        drop(Box::from_raw(catalog));
    }
}

/// Number of models in the catalog; 0 for a null handle.
///
/// # Safety
/// `catalog` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn impact_catalog_model_count(catalog: *const ImpactCatalog) -> usize {
    catalog.as_ref().map_or(0, |c| c.catalog.models.len())
}

/// Per-request inference bands: `energy_wh` in Wh/request, `carbon_g` in
/// gCO2e/request. `country` may be null for the model's provider country.
///
/// # Safety
/// String arguments are NUL-terminated; band pointers are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn impact_estimate_inference(
    catalog: *const ImpactCatalog,
    model: *const c_char,
    input_tokens: u64,
    output_tokens: u64,
    country: *const c_char,
    energy_wh: *mut ImpactBand,
    carbon_g: *mut ImpactBand,
) -> ImpactStatus {
    guard(|| {
        let catalog = tri!(read_catalog(catalog));
        let model = tri!(read_str(model, "model"));
        let country = tri!(read_opt_str(country, "country"));
        if energy_wh.is_null() || carbon_g.is_null() {
            return fail(ImpactStatus::NullArgument, "output band is null");
        }
        let profile = match lookup_model(catalog, model) {
            Ok(p) => p,
            Err(e) => return api_fail(&e.into()),
        };
        let load = match TokenLoad::new(input_tokens, output_tokens) {
            Ok(l) => l,
            Err(e) => return fail(ImpactStatus::InvalidTokens, e.to_string()),
        };
        let (code, provenance) = match country {
            Some(c) => (c, Provenance::User),
            None => (profile.provider_country.as_str(), Provenance::Default),
        };
        let mix = match resolve_country(catalog, code) {
            Ok(m) => m,
            Err(e) => return api_fail(&e.into()),
        };
        match estimate_inference(
            profile,
            Sourced::user(load),
            Sourced::new(mix, provenance),
            &catalog.anchors,
            &catalog.factors,
        ) {
            Ok(est) => {
                *energy_wh = est.energy_wh.into();
                *carbon_g = est.carbon_g.into();
                ImpactStatus::Ok
            }
            Err(e) => fail(ImpactStatus::Internal, e.to_string()),
        }
    })
}

/// Training-energy band in GWh.
///
/// # Safety
/// `model` is NUL-terminated; `energy_gwh` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn impact_estimate_training(
    catalog: *const ImpactCatalog,
    model: *const c_char,
    energy_gwh: *mut ImpactBand,
) -> ImpactStatus {
    guard(|| {
        let catalog = tri!(read_catalog(catalog));
        let model = tri!(read_str(model, "model"));
        if energy_gwh.is_null() {
            return fail(ImpactStatus::NullArgument, "`energy_gwh` is null");
        }
        let profile = match lookup_model(catalog, model) {
            Ok(p) => p,
            Err(e) => return api_fail(&e.into()),
        };
        match estimate_training(
            profile,
            &catalog.training_anchor,
            &catalog.anchors,
            &catalog.factors,
            None,
        ) {
            Ok(est) => {
                *energy_gwh = est.energy_gwh.into();
                ImpactStatus::Ok
            }
            Err(e) => fail(ImpactStatus::Internal, e.to_string()),
        }
    })
}

/// JSON in, JSON out, with the HTTP API's `/v1/estimate` request and
/// response shapes. On an API error `*out_json` holds the error body too.
///
/// # Safety
/// `request_json` is NUL-terminated; `out_json` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn impact_estimate_json(
    catalog: *const ImpactCatalog,
    request_json: *const c_char,
    out_json: *mut *mut c_char,
) -> ImpactStatus {
    guard(|| {
        let catalog = tri!(read_catalog(catalog));
        let text = tri!(read_str(request_json, "request_json"));
        if out_json.is_null() {
            return fail(ImpactStatus::NullArgument, "`out_json` is null");
        }
        *out_json = ptr::null_mut();
        let req: EstimateRequest = match serde_json::from_str(text) {
            Ok(r) => r,
            Err(e) => {
                let err = ApiError::new(ErrorCode::BadRequest, format!("invalid JSON body: {e}"));
                write_string(out_json, api::error_json(catalog, err.clone()));
                return api_fail(&err);
            }
        };
        match api::estimate(catalog, &req) {
            Ok((_, response)) => write_string(out_json, api::to_json(catalog, response)),
            Err(err) => {
                write_string(out_json, api::error_json(catalog, err.clone()));
                api_fail(&err)
            }
        }
    })
}

/// Parses a description; JSON shaped like `/v1/parse`.
///
/// # Safety
/// `description` is NUL-terminated; `out_json` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn impact_parse_json(
    catalog: *const ImpactCatalog,
    description: *const c_char,
    out_json: *mut *mut c_char,
) -> ImpactStatus {
    guard(|| {
        let catalog = tri!(read_catalog(catalog));
        let description = tri!(read_str(description, "description"));
        if out_json.is_null() {
            return fail(ImpactStatus::NullArgument, "`out_json` is null");
        }
        *out_json = ptr::null_mut();
        let req = ParseRequest {
            description: description.to_string(),
        };
        match api::parse(catalog, &req) {
            Ok(response) => write_string(out_json, api::to_json(catalog, response)),
            Err(err) => {
                write_string(out_json, api::error_json(catalog, err.clone()));
                api_fail(&err)
            }
        }
    })
}

/// Observatory table as CSV, byte-identical to the CLI and HTTP exports.
///
/// # Safety
/// `out_csv` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn impact_observatory_csv(catalog: *const ImpactCatalog, out_csv: *mut *mut c_char) -> ImpactStatus {
    guard(|| {
        let catalog = tri!(read_catalog(catalog));
        let bytes = export_table(
            &build_observatory(catalog),
            ExportFormat::Csv,
            &catalog.methodology_version(),
        );
        let text = String::from_utf8(bytes).expect("csv writer emits UTF-8");
        write_string(out_csv, text)
    })
}

/// Methodology version string of the loaded bundle.
///
/// # Safety
/// `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn impact_methodology_version(catalog: *const ImpactCatalog, out: *mut *mut c_char) -> ImpactStatus {
    guard(|| {
        let catalog = tri!(read_catalog(catalog));
        write_string(out, catalog.methodology_version())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn impact_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread; do not free.
#[no_mangle]
pub extern "C" fn impact_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
