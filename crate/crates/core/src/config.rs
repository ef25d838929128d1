//! JSON description of a series ring `E_Δ`.

use serde::{Deserialize, Serialize};

use crate::coeff::{CoefficientAlgebra, FiniteFieldSpec, ResidueFieldSpec};
use crate::error::{Error, Result};
use crate::padic::PAdicUnitApprox;
use crate::series::{Ring, SeriesRing};

/// Version stamped into every JSON document this crate writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub label: String,
    /// Degree `n_α` of the finite field.
    pub n: usize,
    /// Monic modulus, low degree first; a standard one is chosen if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
    /// Number `d_α` of transcendentals; named `t_<label>_<i>`.
    #[serde(default)]
    pub d: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSpec {
    pub p: u64,
    pub factors: Vec<FactorSpec>,
    /// Precision `N_α` per factor (a single entry applies to all).
    pub precision: Vec<i64>,
    /// Digit precision `M` for p-adic exponents; defaults to the least
    /// sufficient value.
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub digits: Option<u32>,
}

impl RingSpec {
    /// Uniform spec with factors labelled `a, b, …` and `(n_α, d_α)`.
    pub fn standard(p: u64, degrees: &[(usize, usize)], n: i64) -> Self {
        RingSpec {
            p,
            factors: degrees
                .iter()
                .enumerate()
                .map(|(i, &(deg, d))| FactorSpec {
                    label: crate::coeff::default_label(i),
                    n: deg,
                    modulus: None,
                    d,
                })
                .collect(),
            precision: vec![n],
            digits: None,
        }
    }

    pub fn build(&self) -> Result<Ring> {
        if self.factors.is_empty() {
            return Err(Error::Config("at least one factor required".into()));
        }
        let mut labels = Vec::new();
        let mut factors = Vec::new();
        for f in &self.factors {
            let base = match &f.modulus {
                Some(m) => {
                    let spec = FiniteFieldSpec::new(self.p, m.clone())?;
                    if spec.n != f.n {
                        return Err(Error::Config(format!(
                            "modulus degree for {} is not {}",
                            f.label, f.n
                        )));
                    }
                    spec
                }
                None => FiniteFieldSpec::standard(self.p, f.n)?,
            };
            labels.push(f.label.clone());
            let transcendentals = (1..=f.d).map(|i| format!("t_{}_{i}", f.label)).collect();
            factors.push(ResidueFieldSpec {
                base,
                transcendentals,
            });
        }
        let k = CoefficientAlgebra::with_labels(labels, factors)?;
        let precision = match self.precision.len() {
            1 => vec![self.precision[0]; self.factors.len()],
            n if n == self.factors.len() => self.precision.clone(),
            _ => {
                return Err(Error::Config(
                    "precision needs one entry or one per factor".into(),
                ))
            }
        };
        let ring = SeriesRing::new(k, precision)?;
        if let Some(m) = self.digits {
            let need = Self::min_digits(&ring);
            if m < need {
                return Err(Error::DigitPrecision { need, have: m });
            }
        }
        Ok(ring)
    }

    /// Least `M` with `p^M > max N_α`.
    pub fn min_digits(ring: &Ring) -> u32 {
        let n = ring.precision().iter().copied().max().unwrap_or(1);
        PAdicUnitApprox::digits_needed(ring.p(), n as u64)
    }

    pub fn digits_for(&self, ring: &Ring) -> u32 {
        self.digits.unwrap_or_else(|| Self::min_digits(ring))
    }
}
