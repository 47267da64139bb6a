//! Observed p-values together with their null cdfs.

use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::cdf::StepCdf;
use crate::error::{Error, Result};

/// Grid resolution used for identity cdfs when a finite grid of candidate
/// thresholds is required.
pub const IDENTITY_GRID_SIZE: usize = 2000;

/// A family of `m` p-values with their null cdfs and optional labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr", into = "FamilyRepr")]
pub struct PValueFamily {
    pvalues: Vec<f64>,
    cdfs: Vec<StepCdf>,
    labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyRepr {
    pvalues: Vec<f64>,
    cdfs: Vec<StepCdf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<FamilyRepr> for PValueFamily {
    type Error = Error;
    fn try_from(r: FamilyRepr) -> Result<Self> {
        PValueFamily::with_labels(r.pvalues, r.cdfs, r.labels)
    }
}

impl From<PValueFamily> for FamilyRepr {
    fn from(f: PValueFamily) -> Self {
        FamilyRepr { pvalues: f.pvalues, cdfs: f.cdfs, labels: f.labels }
    }
}

impl PValueFamily {
    pub fn new(pvalues: Vec<f64>, cdfs: Vec<StepCdf>) -> Result<Self> {
        Self::with_labels(pvalues, cdfs, None)
    }

    pub fn with_labels(pvalues: Vec<f64>, cdfs: Vec<StepCdf>, labels: Option<Vec<String>>) -> Result<Self> {
        if pvalues.is_empty() {
            return Err(Error::invalid("pvalues", "family must contain at least one p-value"));
        }
        if cdfs.len() != pvalues.len() {
            return Err(Error::invalid("cdfs", format!("expected {} cdfs, got {}", pvalues.len(), cdfs.len())));
        }
        for (i, &p) in pvalues.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("pvalues[{i}]"), format!("{p} not in [0, 1]")));
            }
        }
        if let Some(l) = &labels {
            if l.len() != pvalues.len() {
                return Err(Error::invalid("labels", format!("expected {} labels, got {}", pvalues.len(), l.len())));
            }
        }
        Ok(PValueFamily { pvalues, cdfs, labels })
    }

    /// Family of p-values with uniform null cdfs.
    pub fn uniform(pvalues: Vec<f64>) -> Result<Self> {
        let cdfs = vec![StepCdf::identity(); pvalues.len()];
        Self::new(pvalues, cdfs)
    }

    pub fn m(&self) -> usize {
        self.pvalues.len()
    }

    pub fn pvalues(&self) -> &[f64] {
        &self.pvalues
    }

    pub fn pvalue(&self, i: usize) -> f64 {
        self.pvalues[i]
    }

    pub fn cdfs(&self) -> &[StepCdf] {
        &self.cdfs
    }

    pub fn cdf(&self, i: usize) -> &StepCdf {
        &self.cdfs[i]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn has_identity(&self) -> bool {
        self.cdfs.iter().any(StepCdf::is_identity)
    }

    /// Indices sorted by `(p, index)`; ties keep input order.
    pub fn sort_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.m()).collect();
        order.sort_by(|&a, &b| self.pvalues[a].total_cmp(&self.pvalues[b]).then(a.cmp(&b)));
        order
    }

    /// Ascending p-values.
    pub fn sorted_pvalues(&self) -> Vec<f64> {
        self.sort_order().into_iter().map(|i| self.pvalues[i]).collect()
    }

    /// `{0}` joined with every finite support, sorted and deduplicated.
    pub fn merged_support(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        for c in &self.cdfs {
            out.extend_from_slice(c.support());
        }
        sort_dedup(&mut out);
        out
    }

    /// Candidate thresholds: the merged support, the observed p-values and 1;
    /// identity cdfs add the regular grid of step `1 / IDENTITY_GRID_SIZE`.
    pub fn threshold_grid(&self) -> Vec<f64> {
        let mut out = self.merged_support();
        out.extend_from_slice(&self.pvalues);
        out.push(1.0);
        if self.has_identity() {
            out.extend((1..IDENTITY_GRID_SIZE).map(|j| j as f64 / IDENTITY_GRID_SIZE as f64));
        }
        sort_dedup(&mut out);
        out
    }

    /// `i(t) = #{i : p_i <= t}`.
    pub fn count_at_most(&self, t: f64) -> usize {
        self.pvalues.iter().filter(|&&p| p <= t).count()
    }

    /// `{0}` joined with the observed p-values, sorted and deduplicated.
    pub fn pvalue_grid(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        out.extend_from_slice(&self.pvalues);
        sort_dedup(&mut out);
        out
    }

    /// Restriction to the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        for &i in indices {
            if i >= self.m() {
                return Err(Error::IndexOutOfRange { index: i, m: self.m() });
            }
        }
        Self::with_labels(
            indices.iter().map(|&i| self.pvalues[i]).collect(),
            indices.iter().map(|&i| self.cdfs[i].clone()).collect(),
            self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i].clone()).collect()),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid("family", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("family serializes")
    }

    /// Reads a CSV with columns `pvalue,cdf_id[,label]` and resolves each
    /// `cdf_id` against a JSON object mapping ids to cdfs. The id `identity`
    /// always resolves to the uniform cdf.
    pub fn from_csv<R: Read>(table: R, cdf_sidecar: &str) -> Result<Self> {
        let cdf_map: HashMap<String, StepCdf> =
            serde_json::from_str(cdf_sidecar).map_err(|e| Error::invalid("cdfs", e.to_string()))?;
        let mut rdr = csv::Reader::from_reader(table);
        let headers = rdr.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let p_col = col("pvalue").ok_or_else(|| Error::invalid("pvalue", "missing column"))?;
        let id_col = col("cdf_id").ok_or_else(|| Error::invalid("cdf_id", "missing column"))?;
        let label_col = col("label");
        let mut pvalues = Vec::new();
        let mut cdfs = Vec::new();
        let mut labels = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            let raw = rec.get(p_col).unwrap_or("").trim();
            let p: f64 = raw
                .parse()
                .map_err(|_| Error::invalid(format!("rows[{row}].pvalue"), format!("not a number: {raw:?}")))?;
            let id = rec.get(id_col).unwrap_or("").trim();
            let cdf = if id == "identity" {
                StepCdf::identity()
            } else {
                cdf_map
                    .get(id)
                    .cloned()
                    .ok_or_else(|| Error::invalid(format!("rows[{row}].cdf_id"), format!("unknown cdf id {id:?}")))?
            };
            pvalues.push(p);
            cdfs.push(cdf);
            if let Some(c) = label_col {
                labels.push(rec.get(c).unwrap_or("").to_string());
            }
        }
        let labels = label_col.map(|_| labels);
        Self::with_labels(pvalues, cdfs, labels)
    }
}

pub(crate) fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_cdf(points: &[f64]) -> StepCdf {
        StepCdf::identity_on(points.to_vec()).unwrap()
    }

    #[test]
    fn sort_is_stable() {
        let f = PValueFamily::uniform(vec![0.3, 0.1, 0.3]).unwrap();
        assert_eq!(f.sort_order(), vec![1, 0, 2]);
    }

    #[test]
    fn merged_support_of_discretized_identity() {
        let c = grid_cdf(&[0.5, 1.0]);
        let f = PValueFamily::new(vec![0.5, 1.0], vec![c.clone(), c]).unwrap();
        assert_eq!(f.merged_support(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn json_roundtrip() {
        let text = r#"{"pvalues":[0.1,0.5],"cdfs":[{"identity":true},{"support":[0.5,1.0],"values":[0.5,1.0]}],"labels":["a","b"]}"#;
        let f = PValueFamily::from_json(text).unwrap();
        assert_eq!(f.m(), 2);
        assert_eq!(f.labels().unwrap()[1], "b");
        assert_eq!(PValueFamily::from_json(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn json_rejects_mismatch() {
        let text = r#"{"pvalues":[0.1,0.5],"cdfs":[{"identity":true}]}"#;
        assert!(PValueFamily::from_json(text).is_err());
        let text = r#"{"pvalues":[1.5],"cdfs":[{"identity":true}]}"#;
        assert!(PValueFamily::from_json(text).is_err());
    }

    #[test]
    fn csv_with_sidecar() {
        let table = "pvalue,cdf_id,label\n0.25,a,x\n0.7,identity,y\n";
        let sidecar = r#"{"a":{"support":[0.25,1.0],"values":[0.25,1.0]}}"#;
        let f = PValueFamily::from_csv(table.as_bytes(), sidecar).unwrap();
        assert_eq!(f.pvalues(), &[0.25, 0.7]);
        assert!(f.cdf(1).is_identity());
        assert_eq!(f.cdf(0).eval(0.3), 0.25);
        assert_eq!(f.labels().unwrap(), &["x".to_string(), "y".to_string()]);
        assert!(PValueFamily::from_csv("pvalue,cdf_id\n0.2,zz\n".as_bytes(), "{}").is_err());
    }
}
