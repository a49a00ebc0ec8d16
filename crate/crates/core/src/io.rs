//! JSON formats for kernels, models and chaos vectors.
//!
//! Index sets in files are one-based and strictly increasing.

use serde::{Deserialize, Serialize};

use crate::chaos::ChaosVector;
use crate::error::{ChaosError, Result};
use crate::kernel::Kernel;
use crate::model::RademacherModel;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryRecord {
    pub set: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Probs { probs: Vec<f64> },
    Homogeneous { homogeneous: f64, n: usize },
}

impl ModelSpec {
    pub fn build(&self) -> Result<RademacherModel> {
        match self {
            ModelSpec::Probs { probs } => RademacherModel::new(probs.clone()),
            ModelSpec::Homogeneous { homogeneous, n } => {
                RademacherModel::homogeneous(*homogeneous, *n)
            }
        }
    }

    pub fn of(model: &RademacherModel) -> Self {
        if model.is_homogeneous() && model.horizon() > 0 {
            ModelSpec::Homogeneous {
                homogeneous: model.p(0),
                n: model.horizon(),
            }
        } else {
            ModelSpec::Probs {
                probs: model.probs().to_vec(),
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelRecord {
    pub m: usize,
    pub n: usize,
    pub entries: Vec<EntryRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl KernelRecord {
    pub fn from_kernel(f: &Kernel) -> Self {
        KernelRecord {
            m: f.order(),
            n: f.horizon(),
            entries: f
                .entries()
                .map(|(s, value)| EntryRecord {
                    set: s.indices().into_iter().map(|i| i + 1).collect(),
                    value,
                })
                .collect(),
            model: None,
            provenance: None,
        }
    }

    pub fn to_kernel(&self) -> Result<Kernel> {
        let mut k = Kernel::zero(self.m, self.n)?;
        let mut seen = std::collections::BTreeSet::new();
        for (i, e) in self.entries.iter().enumerate() {
            let fail = |msg: String| ChaosError::Parse(format!("entries[{i}]: {msg}"));
            if e.set.len() != self.m {
                return Err(fail(format!(
                    "set {:?} has {} indices, expected m = {}",
                    e.set,
                    e.set.len(),
                    self.m
                )));
            }
            if e.set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(fail(format!("set {:?} is not strictly increasing", e.set)));
            }
            if let Some(&bad) = e.set.iter().find(|&&x| x == 0 || x > self.n) {
                return Err(fail(format!("index {bad} outside 1..={}", self.n)));
            }
            if !e.value.is_finite() {
                return Err(fail("value is not finite".into()));
            }
            let zero_based: Vec<usize> = e.set.iter().map(|x| x - 1).collect();
            let s = crate::kernel::Subset::from_indices(&zero_based)
                .map_err(|err| fail(err.to_string()))?;
            if !seen.insert(s) {
                return Err(fail(format!("set {:?} listed twice", e.set)));
            }
            k.set(s, e.value).map_err(|err| fail(err.to_string()))?;
        }
        Ok(k)
    }
}

fn json_error(e: serde_json::Error) -> ChaosError {
    ChaosError::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
}

pub fn parse_kernel(text: &str) -> Result<(Kernel, Option<RademacherModel>)> {
    let rec: KernelRecord = serde_json::from_str(text).map_err(json_error)?;
    let k = rec.to_kernel()?;
    let model = rec.model.as_ref().map(ModelSpec::build).transpose()?;
    if let Some(m) = &model {
        if m.horizon() != k.horizon() {
            return Err(ChaosError::Horizon {
                expected: k.horizon(),
                found: m.horizon(),
            });
        }
    }
    Ok((k, model))
}

pub fn kernel_to_json(
    f: &Kernel,
    model: Option<&RademacherModel>,
    provenance: Option<serde_json::Value>,
) -> String {
    let mut rec = KernelRecord::from_kernel(f);
    rec.model = model.map(ModelSpec::of);
    rec.provenance = provenance;
    serde_json::to_string_pretty(&rec).expect("records always serialize")
}

pub fn parse_model(text: &str) -> Result<RademacherModel> {
    let spec: ModelSpec = serde_json::from_str(text).map_err(json_error)?;
    spec.build()
}

pub fn model_to_json(model: &RademacherModel) -> String {
    serde_json::to_string(&ModelSpec::of(model)).expect("model always serializes")
}

/// A chaos vector is an array of kernel records, one per order.
pub fn chaos_to_json(f: &ChaosVector) -> String {
    let recs: Vec<KernelRecord> = f.kernels().iter().map(KernelRecord::from_kernel).collect();
    serde_json::to_string_pretty(&recs).expect("records always serialize")
}

pub fn parse_chaos(text: &str) -> Result<ChaosVector> {
    let recs: Vec<KernelRecord> = serde_json::from_str(text).map_err(json_error)?;
    let n = recs
        .first()
        .map(|r| r.n)
        .ok_or_else(|| ChaosError::Parse("empty chaos vector".into()))?;
    let kernels = recs
        .iter()
        .map(KernelRecord::to_kernel)
        .collect::<Result<Vec<_>>>()?;
    ChaosVector::from_kernels(n, kernels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_round_trip() {
        let f = Kernel::from_entries(2, 5, [(vec![0, 3], 0.25), (vec![2, 4], -1.5)]).unwrap();
        let model = RademacherModel::homogeneous(0.3, 5).unwrap();
        let text = kernel_to_json(&f, Some(&model), None);
        let (g, m) = parse_kernel(&text).unwrap();
        assert_eq!(f, g);
        assert_eq!(m.unwrap(), model);
    }

    #[test]
    fn diagnostics_name_the_entry() {
        let text = r#"{"m":2,"n":4,"entries":[{"set":[1,2],"value":1},{"set":[3,3],"value":2}]}"#;
        let err = parse_kernel(text).unwrap_err().to_string();
        assert!(err.contains("entries[1]"), "{err}");
        let text = r#"{"m":2,"n":4,"entries":[{"set":[1,5],"value":1}]}"#;
        assert!(parse_kernel(text)
            .unwrap_err()
            .to_string()
            .contains("index 5"));
        let err = parse_kernel("{\n\"m\": 2,\n oops }")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn model_formats() {
        let a = parse_model(r#"{"probs":[0.2,0.5]}"#).unwrap();
        assert_eq!(a.probs(), &[0.2, 0.5]);
        let b = parse_model(r#"{"homogeneous":0.4,"n":3}"#).unwrap();
        assert_eq!(b.probs(), &[0.4; 3]);
        assert!(parse_model(r#"{"probs":[0.0]}"#).is_err());
    }

    #[test]
    fn chaos_round_trip() {
        let f = Kernel::from_entries(1, 3, [(vec![1], 2.0)]).unwrap();
        let c = ChaosVector::integral(&f)
            .add(&ChaosVector::constant(3, 0.5))
            .unwrap();
        assert_eq!(parse_chaos(&chaos_to_json(&c)).unwrap(), c);
    }
}
