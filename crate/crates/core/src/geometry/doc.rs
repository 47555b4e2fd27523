//! JSON form of a profile:
//! `{n, k, tau_min, form: "lebrun"|"samples", params: {a, b} | samples: [[τ, φ], …]}`.

use serde::{Deserialize, Serialize};

use super::interp::MonotoneCubic;
use super::profile::{RadialProfile, Shape};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileForm {
    Lebrun,
    Samples,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaurentParams {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDoc {
    pub n: usize,
    pub k: usize,
    pub tau_min: f64,
    pub form: ProfileForm,
    /// Omitted for `lebrun`: coefficients are derived from `k` and `tau_min`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<LaurentParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[f64; 2]>>,
}

impl ProfileDoc {
    pub fn to_profile(&self) -> Result<RadialProfile> {
        match self.form {
            ProfileForm::Lebrun => {
                let LaurentParams { a, b } = match self.params {
                    Some(p) => p,
                    None if self.tau_min > 0.0 => {
                        let k = self.k as f64;
                        LaurentParams {
                            a: (k - 2.0) * self.tau_min,
                            b: (1.0 - k) * self.tau_min * self.tau_min,
                        }
                    }
                    None => LaurentParams { a: 0.0, b: 0.0 },
                };
                RadialProfile::new(
                    self.n,
                    self.k,
                    self.tau_min,
                    1e6 * self.tau_min.max(1.0),
                    Shape::Laurent { a, b },
                )
            }
            ProfileForm::Samples => {
                let samples = self
                    .samples
                    .as_ref()
                    .ok_or_else(|| invalid("samples", "required for form \"samples\""))?;
                let (t, v): (Vec<f64>, Vec<f64>) = samples.iter().map(|s| (s[0], s[1])).unzip();
                let hi = *t.last().ok_or_else(|| invalid("samples", "empty"))?;
                let cubic = MonotoneCubic::new(t, v)
                    .ok_or_else(|| invalid("samples", "need ≥ 2 strictly increasing τ values"))?;
                RadialProfile::new(self.n, self.k, self.tau_min, hi, Shape::Samples(cubic))
            }
        }
    }

    pub fn from_profile(p: &RadialProfile) -> Result<Self> {
        match &p.shape {
            Shape::Laurent { a, b } => Ok(Self {
                n: p.n,
                k: p.k,
                tau_min: p.tau_min,
                form: ProfileForm::Lebrun,
                params: Some(LaurentParams { a: *a, b: *b }),
                samples: None,
            }),
            Shape::Samples(c) => Ok(Self {
                n: p.n,
                k: p.k,
                tau_min: p.tau_min,
                form: ProfileForm::Samples,
                params: None,
                samples: Some(c.knots().iter().zip(c.values()).map(|(&t, &v)| [t, v]).collect()),
            }),
            _ => Err(invalid("form", "only lebrun and samples profiles serialize")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lebrun_doc_defaults_coefficients() {
        let doc: ProfileDoc =
            serde_json::from_str(r#"{"n":2,"k":3,"tau_min":1.0,"form":"lebrun"}"#).unwrap();
        let p = doc.to_profile().unwrap();
        assert_eq!(p.shape, Shape::Laurent { a: 1.0, b: -2.0 });
        let back = ProfileDoc::from_profile(&p).unwrap();
        assert_eq!(back.to_profile().unwrap(), p);
    }

    #[test]
    fn samples_doc_builds_interpolant() {
        let samples: Vec<[f64; 2]> = (0..200)
            .map(|i| {
                let t = 1.0 + i as f64 * 0.5;
                [t, t - 1.0 / t]
            })
            .collect();
        let doc = ProfileDoc {
            n: 2,
            k: 2,
            tau_min: 1.0,
            form: ProfileForm::Samples,
            params: None,
            samples: Some(samples),
        };
        let p = doc.to_profile().unwrap();
        assert!((p.phi(3.25)[0] - (3.25 - 1.0 / 3.25)).abs() < 1e-3);
        let json = serde_json::to_string(&doc).unwrap();
        let again: ProfileDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(again, doc);
    }

    #[test]
    fn samples_form_requires_samples() {
        let doc: ProfileDoc =
            serde_json::from_str(r#"{"n":2,"k":1,"tau_min":1.0,"form":"samples"}"#).unwrap();
        assert!(doc.to_profile().is_err());
    }
}
