//! Registry of the shipped envelope methods.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};
use crate::family::PValueFamily;
use crate::hetero::{bret_m0, bret_topk_zeta, hetero_simes_envelope, van_zuijlen_zeta, HSimesVariant};
use crate::homogeneous::{
    dkw_adaptive_zeta, kr_adaptive_zeta, m0_hat_homogeneous, simes_ell, topk_zeta_homogeneous, HomogeneousMethod,
    KR_ALPHA_MAX,
};
use crate::local_tests::LocalTests;
use crate::reference::{InterpolatedEnvelope, ReferenceFamily};

/// Largest `m` for which full envelope curves of shortcut methods are computed.
pub const SHORTCUT_CURVE_MAX_M: usize = 150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Bretagnolle,
    BretagnolleAdaptive,
    BretagnolleSc1,
    Hsimes,
    HsimesAdaptiveJer,
    HsimesAdaptiveSc1,
    HsimesSc1,
    Vanzuijlen,
    Dkw,
    DkwAdaptive,
    Wellner,
    Simes,
    SimesAdaptive,
    Kr,
    KrAdaptive,
}

/// Static description of a method.
#[derive(Debug, Clone, Serialize)]
pub struct MethodInfo {
    pub name: &'static str,
    /// Uses the null cdfs rather than assuming uniform nulls.
    pub heterogeneous: bool,
    pub adaptive: bool,
    /// Bound computed from local-test shortcuts instead of a reference family.
    pub shortcut: bool,
    /// Exclusive upper bound on `alpha`.
    pub alpha_max: f64,
    pub description: &'static str,
}

impl Method {
    pub const ALL: [Method; 15] = [
        Method::Bretagnolle,
        Method::BretagnolleAdaptive,
        Method::BretagnolleSc1,
        Method::Hsimes,
        Method::HsimesAdaptiveJer,
        Method::HsimesAdaptiveSc1,
        Method::HsimesSc1,
        Method::Vanzuijlen,
        Method::Dkw,
        Method::DkwAdaptive,
        Method::Wellner,
        Method::Simes,
        Method::SimesAdaptive,
        Method::Kr,
        Method::KrAdaptive,
    ];

    pub fn name(self) -> &'static str {
        self.info().name
    }

    pub fn info(self) -> MethodInfo {
        let (name, heterogeneous, adaptive, shortcut, description) = match self {
            Method::Bretagnolle => ("bretagnolle", true, false, false, "Bretagnolle top-k envelope"),
            Method::BretagnolleAdaptive => {
                ("bretagnolle-adaptive", true, true, false, "Bretagnolle top-k envelope with plug-in null count")
            }
            Method::BretagnolleSc1 => ("bretagnolle-sc1", true, true, true, "Bretagnolle local-test shortcut"),
            Method::Hsimes => ("hsimes", true, false, false, "heterogeneous Simes k-FWER envelope"),
            Method::HsimesAdaptiveJer => {
                ("hsimes-adaptive-jer", true, true, false, "heterogeneous Simes, plug-in from the envelope")
            }
            Method::HsimesAdaptiveSc1 => {
                ("hsimes-adaptive-sc1", true, true, false, "heterogeneous Simes, plug-in from the local tests")
            }
            Method::HsimesSc1 => ("hsimes-sc1", true, true, true, "heterogeneous Simes local-test shortcut"),
            Method::Vanzuijlen => ("vanzuijlen", true, false, false, "Van Zuijlen top-k envelope"),
            Method::Dkw => ("dkw", false, false, false, "DKW top-k envelope"),
            Method::DkwAdaptive => ("dkw-adaptive", false, true, false, "DKW top-k envelope with plug-in null count"),
            Method::Wellner => ("wellner", false, false, false, "Wellner top-k envelope"),
            Method::Simes => ("simes", false, false, false, "Simes k-FWER envelope"),
            Method::SimesAdaptive => ("simes-adaptive", false, true, false, "Simes envelope with plug-in null count"),
            Method::Kr => ("kr", false, false, false, "Kahale-Rozenholc top-k envelope"),
            Method::KrAdaptive => {
                ("kr-adaptive", false, true, false, "Kahale-Rozenholc envelope with plug-in null count")
            }
        };
        let alpha_max = if matches!(self, Method::Kr | Method::KrAdaptive) { KR_ALPHA_MAX } else { 1.0 };
        MethodInfo { name, heterogeneous, adaptive, shortcut, alpha_max, description }
    }

    pub fn check_alpha(self, alpha: f64) -> Result<()> {
        check_alpha(alpha)?;
        if matches!(self, Method::Kr | Method::KrAdaptive) && alpha >= KR_ALPHA_MAX {
            return Err(Error::InvalidAlpha { alpha, range: "(0, 0.31)" });
        }
        Ok(())
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

enum Envelope<'a> {
    Reference { family: ReferenceFamily, interp: InterpolatedEnvelope },
    Shortcut(LocalTests<'a>),
}

/// A method applied to a family at a given level.
pub struct MethodFit<'a> {
    method: Method,
    alpha: f64,
    fam: &'a PValueFamily,
    envelope: Envelope<'a>,
    m0_hat: Option<usize>,
}

impl<'a> MethodFit<'a> {
    pub fn new(method: Method, fam: &'a PValueFamily, alpha: f64) -> Result<Self> {
        method.check_alpha(alpha)?;
        let m = fam.m();
        let order = fam.sort_order();
        let top_k = |zetas: Vec<usize>| ReferenceFamily::top_k(order.clone(), zetas);
        let (reference, m0_hat) = match method {
            Method::Bretagnolle => (top_k(bret_topk_zeta(fam, alpha, m)?)?, None),
            Method::BretagnolleAdaptive => {
                let m0 = bret_m0(fam, alpha)?;
                (top_k(bret_topk_zeta(fam, alpha, m0)?)?, Some(m0))
            }
            Method::Vanzuijlen => (top_k(van_zuijlen_zeta(fam, alpha)?)?, None),
            Method::Dkw => (top_k(topk_zeta_homogeneous(HomogeneousMethod::Dkw, fam, alpha, m)?)?, None),
            Method::DkwAdaptive => {
                let m0 = m0_hat_homogeneous(HomogeneousMethod::Dkw, fam, alpha)?;
                (top_k(dkw_adaptive_zeta(fam, alpha, m0)?)?, Some(m0))
            }
            Method::Wellner => (top_k(topk_zeta_homogeneous(HomogeneousMethod::Wellner, fam, alpha, m)?)?, None),
            Method::Kr => (top_k(topk_zeta_homogeneous(HomogeneousMethod::Kr, fam, alpha, m)?)?, None),
            Method::KrAdaptive => {
                let m0 = m0_hat_homogeneous(HomogeneousMethod::Kr, fam, alpha)?;
                (top_k(kr_adaptive_zeta(fam, alpha, m0)?)?, Some(m0))
            }
            Method::Simes => {
                let taus = (1..=m).map(|k| simes_ell(k as i64, m, alpha)).collect();
                (ReferenceFamily::k_fwer(fam.pvalues().to_vec(), taus), None)
            }
            Method::SimesAdaptive => {
                let m0 = m0_hat_homogeneous(HomogeneousMethod::Simes, fam, alpha)?;
                (simes_adaptive_family(fam, alpha, m0), Some(m0))
            }
            Method::Hsimes | Method::HsimesAdaptiveJer | Method::HsimesAdaptiveSc1 => {
                let variant = match method {
                    Method::Hsimes => HSimesVariant::NonAdaptive,
                    Method::HsimesAdaptiveJer => HSimesVariant::AdaptiveJer,
                    _ => HSimesVariant::AdaptiveSc1,
                };
                let fit = hetero_simes_envelope(fam, alpha, variant)?;
                (fit.family, fit.m0_hat)
            }
            Method::BretagnolleSc1 | Method::HsimesSc1 => {
                let tests = if method == Method::BretagnolleSc1 {
                    LocalTests::bretagnolle(fam, alpha)?
                } else {
                    LocalTests::hetero_simes(fam, alpha, None)?
                };
                let m0 = tests.m0_hat();
                return Ok(MethodFit { method, alpha, fam, envelope: Envelope::Shortcut(tests), m0_hat: Some(m0) });
            }
        };
        let interp = InterpolatedEnvelope::new(&reference)?;
        Ok(MethodFit { method, alpha, fam, envelope: Envelope::Reference { family: reference, interp }, m0_hat })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Plug-in null-count estimate of adaptive methods.
    pub fn m0_hat(&self) -> Option<usize> {
        self.m0_hat
    }

    /// Plug-in estimate when available, otherwise the bound on all hypotheses.
    pub fn m0_estimate(&self) -> usize {
        match self.m0_hat {
            Some(m0) => m0,
            None => {
                let all: Vec<usize> = (0..self.fam.m()).collect();
                self.bound(&all).expect("full index set is valid")
            }
        }
    }

    pub fn reference(&self) -> Option<&ReferenceFamily> {
        match &self.envelope {
            Envelope::Reference { family, .. } => Some(family),
            Envelope::Shortcut(_) => None,
        }
    }

    pub fn local_tests(&self) -> Option<&LocalTests<'a>> {
        match &self.envelope {
            Envelope::Shortcut(t) => Some(t),
            Envelope::Reference { .. } => None,
        }
    }

    /// Bound on the number of false discoveries in `selection`.
    pub fn bound(&self, selection: &[usize]) -> Result<usize> {
        match &self.envelope {
            Envelope::Reference { interp, .. } => interp.bound(selection),
            Envelope::Shortcut(tests) => tests.vsc1(selection),
        }
    }

    /// Bounds on the prefixes of the p-value order.
    pub fn path(&self) -> Result<Vec<usize>> {
        let order = self.fam.sort_order();
        match &self.envelope {
            Envelope::Reference { interp, .. } => interp.path(&order),
            Envelope::Shortcut(tests) => {
                if self.fam.m() > SHORTCUT_CURVE_MAX_M {
                    return Err(Error::Contract(format!("shortcut curves are limited to m <= {SHORTCUT_CURVE_MAX_M}")));
                }
                (1..=order.len()).map(|k| tests.vsc1(&order[..k])).collect()
            }
        }
    }

    /// Envelope along the p-value order.
    pub fn curve(&self) -> Result<EnvelopeCurve> {
        let vhat = self.path()?;
        Ok(EnvelopeCurve::from_path(self.method, self.alpha, self.m0_hat, self.fam, &vhat))
    }
}

fn simes_adaptive_family(fam: &PValueFamily, alpha: f64, m0: usize) -> ReferenceFamily {
    let mut taus: Vec<f64> = (1..=m0).map(|k| simes_ell(k as i64, m0, alpha)).collect();
    taus.push(f64::INFINITY);
    ReferenceFamily::k_fwer(fam.pvalues().to_vec(), taus)
}

/// One point of an envelope curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub k: usize,
    pub p_k: f64,
    pub vhat: usize,
    pub dhat: usize,
}

/// Bounds on false (`vhat`) and true (`dhat`) discoveries among the `k` smallest p-values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCurve {
    pub method: Method,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m0_hat: Option<usize>,
    /// Hypothesis indices in p-value order.
    pub order: Vec<usize>,
    pub rows: Vec<CurveRow>,
}

impl EnvelopeCurve {
    pub const CSV_HEADER: &'static str = "k,p_k,vhat,dhat";

    /// Assembles a curve from prefix bounds `vhat` along `fam.sort_order()`.
    pub fn from_path(method: Method, alpha: f64, m0_hat: Option<usize>, fam: &PValueFamily, vhat: &[usize]) -> Self {
        let order = fam.sort_order();
        let rows = order
            .iter()
            .zip(vhat)
            .enumerate()
            .map(|(j, (&i, &v))| CurveRow { k: j + 1, p_k: fam.pvalue(i), vhat: v, dhat: j + 1 - v })
            .collect();
        EnvelopeCurve { method, alpha, m0_hat, order, rows }
    }

    pub fn vhat(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.vhat).collect()
    }

    pub fn dhat(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.dhat).collect()
    }

    /// CSV with header `k,p_k,vhat,dhat`, LF line endings and round-trip floats.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.k, r.p_k, r.vhat, r.dhat));
        }
        out
    }
}
