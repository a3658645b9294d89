//! C interface to hicomp.
//!
//! Objects are opaque handles created by `*_load`/`*_build`/`*_train`
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`HicompStatus`]; on failure `hicomp_last_error` gives a message
//! for the calling thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use hicomp::data::{Dataset, ModelKind, RawTable};
use hicomp::grouping::Grouping;
use hicomp::mcmc::{run_chain, ChainSample, CompressedModel, Schedule};
use hicomp::predict::predict_all;
use hicomp::prior::{Family, InverseGamma, PriorSpec};
use hicomp::split::{cauchy_split_cdf, split_sample, SplitQuery};
use hicomp::Error;
use rand::SeedableRng;

pub const HICOMP_MODEL_SEQUENCE: u32 = 0;
pub const HICOMP_MODEL_CLASSIFICATION: u32 = 1;
pub const HICOMP_FAMILY_CAUCHY: u32 = 1;
pub const HICOMP_FAMILY_GAUSSIAN: u32 = 2;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HicompStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Config = 5,
    Numerical = 6,
    Panic = 7,
}

pub struct HicompDataset {
    inner: Dataset,
}

pub struct HicompGrouping {
    inner: Grouping,
}

pub struct HicompChain {
    samples: Vec<ChainSample>,
    family: Family,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HicompStatus {
    match e {
        Error::Io(_) | Error::ChainIo { .. } => HicompStatus::Io,
        Error::Parse { .. } | Error::ChainFormat(_) => HicompStatus::Parse,
        Error::Config(_) => HicompStatus::Config,
        Error::Numerical(_) | Error::SliceExhausted(_) => HicompStatus::Numerical,
        _ => HicompStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard<F>(f: F) -> HicompStatus
where
    F: FnOnce() -> Result<(), (HicompStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HicompStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside hicomp");
            HicompStatus::Panic
        }
    }
}

fn lib<T>(r: hicomp::Result<T>) -> Result<T, (HicompStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn invalid(msg: &str) -> (HicompStatus, String) {
    (HicompStatus::InvalidArgument, msg.to_string())
}

fn null(what: &str) -> (HicompStatus, String) {
    (HicompStatus::NullPointer, format!("{what} is null"))
}

fn family_of(code: u32) -> Result<Family, (HicompStatus, String)> {
    match code {
        HICOMP_FAMILY_CAUCHY => Ok(Family::Cauchy),
        HICOMP_FAMILY_GAUSSIAN => Ok(Family::Gaussian),
        _ => Err(invalid("unknown family code")),
    }
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next hicomp call on the same thread.
#[no_mangle]
pub extern "C" fn hicomp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hicomp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Reads a dataset file. `order < 0` keeps the full history (sequence) or
/// uses the number of features (classification).
#[no_mangle]
pub unsafe extern "C" fn hicomp_dataset_load(
    path: *const c_char,
    model: u32,
    order: i64,
    out: *mut *mut HicompDataset,
) -> HicompStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = match model {
            HICOMP_MODEL_SEQUENCE => ModelKind::Sequence,
            HICOMP_MODEL_CLASSIFICATION => ModelKind::Classification,
            _ => return Err(invalid("unknown model code")),
        };
        let path = CStr::from_ptr(path).to_str().map_err(|_| invalid("path is not UTF-8"))?;
        let raw = lib(RawTable::read(Path::new(path)))?;
        let order = usize::try_from(order).ok();
        let inner = lib(Dataset::from_table(&raw, kind, order))?;
        *out = Box::into_raw(Box::new(HicompDataset { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hicomp_dataset_free(data: *mut HicompDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Number of cases, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn hicomp_dataset_n_cases(data: *const HicompDataset) -> usize {
    data.as_ref().map_or(0, |d| d.inner.n_cases())
}

/// Number of response classes, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn hicomp_dataset_n_classes(data: *const HicompDataset) -> usize {
    data.as_ref().map_or(0, |d| d.inner.n_classes() as usize)
}

#[no_mangle]
pub unsafe extern "C" fn hicomp_grouping_build(
    data: *const HicompDataset,
    out: *mut *mut HicompGrouping,
) -> HicompStatus {
    guard(|| {
        let data = data.as_ref().ok_or_else(|| null("data"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = Grouping::build(&data.inner);
        *out = Box::into_raw(Box::new(HicompGrouping { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hicomp_grouping_free(grouping: *mut HicompGrouping) {
    if !grouping.is_null() {
        drop(Box::from_raw(grouping));
    }
}

#[no_mangle]
pub unsafe extern "C" fn hicomp_grouping_n_groups(grouping: *const HicompGrouping) -> usize {
    grouping.as_ref().map_or(0, |g| g.inner.n_groups())
}

/// Number of distinct patterns expressed by the training data.
#[no_mangle]
pub unsafe extern "C" fn hicomp_grouping_n_original(grouping: *const HicompGrouping) -> u64 {
    grouping.as_ref().map_or(0, |g| g.inner.n_original())
}

/// Runs the sampler with the default prior for `family`.
#[no_mangle]
pub unsafe extern "C" fn hicomp_train(
    data: *const HicompDataset,
    grouping: *const HicompGrouping,
    family: u32,
    iterations: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
    out: *mut *mut HicompChain,
) -> HicompStatus {
    guard(|| {
        let data = data.as_ref().ok_or_else(|| null("data"))?;
        let grouping = grouping.as_ref().ok_or_else(|| null("grouping"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let family = family_of(family)?;
        let model = lib(CompressedModel::new(&grouping.inner, &data.inner, family))?;
        let prior = PriorSpec::defaults(family, model.order);
        let schedule = Schedule {
            iterations,
            burn_in,
            thin,
            ..Schedule::default()
        };
        let samples = lib(run_chain(&model, &prior, &schedule, seed))?;
        *out = Box::into_raw(Box::new(HicompChain { samples, family }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hicomp_chain_free(chain: *mut HicompChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Number of retained samples.
#[no_mangle]
pub unsafe extern "C" fn hicomp_chain_len(chain: *const HicompChain) -> usize {
    chain.as_ref().map_or(0, |c| c.samples.len())
}

/// Writes class probabilities for every test case, row-major, into
/// `probs` which must hold `n_cases * n_classes` values.
#[no_mangle]
pub unsafe extern "C" fn hicomp_predict(
    grouping: *const HicompGrouping,
    chain: *const HicompChain,
    test: *const HicompDataset,
    seed: u64,
    probs: *mut f64,
    probs_len: usize,
) -> HicompStatus {
    guard(|| {
        let grouping = grouping.as_ref().ok_or_else(|| null("grouping"))?;
        let chain = chain.as_ref().ok_or_else(|| null("chain"))?;
        let test = test.as_ref().ok_or_else(|| null("test"))?;
        if probs.is_null() {
            return Err(null("probs"));
        }
        let k = test.inner.n_classes() as usize;
        if probs_len != test.inner.n_cases() * k {
            return Err(invalid("probs_len must equal n_cases * n_classes"));
        }
        if test.inner.order() != grouping.inner.order() {
            return Err(invalid("test data order differs from the grouping"));
        }
        let records = lib(predict_all(&grouping.inner, &chain.samples, chain.family, &test.inner, seed, false))?;
        let out = std::slice::from_raw_parts_mut(probs, probs_len);
        for (row, r) in out.chunks_mut(k).zip(&records) {
            row.copy_from_slice(&r.probs);
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hicomp_cauchy_split_cdf(
    x: f64,
    s: f64,
    sigma1: f64,
    sigma2: f64,
    out: *mut f64,
) -> HicompStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(sigma1 > 0.0 && sigma2 > 0.0) {
            return Err(invalid("widths must be positive"));
        }
        let q = lib(SplitQuery::new(s, sigma1, sigma2, Family::Cauchy))?;
        *out = cauchy_split_cdf(x, &q);
        Ok(())
    })
}

/// One draw of the part of `s` with width `sigma1`.
#[no_mangle]
pub unsafe extern "C" fn hicomp_split_sample(
    family: u32,
    s: f64,
    sigma1: f64,
    sigma2: f64,
    seed: u64,
    out: *mut f64,
) -> HicompStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let q = lib(SplitQuery::new(s, sigma1, sigma2, family_of(family)?))?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        *out = lib(split_sample(&q, &mut rng))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hicomp_inverse_gamma_quantile(
    shape: f64,
    rate: f64,
    prob: f64,
    out: *mut f64,
) -> HicompStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let ig = lib(InverseGamma::new(shape, rate))?;
        *out = lib(ig.quantile(prob))?;
        Ok(())
    })
}

