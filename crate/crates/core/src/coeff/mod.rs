//! The coefficient ring `k_Δ = ⊗_α F_{p^{n_α}}(t_{α,1}, …, t_{α,d_α})`.

pub mod element;
pub mod fdelta;
pub mod idempotents;

use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use element::{CoefficientElement, MPoly, UnitStatus};
pub use fdelta::{FiniteFieldSpec, TensorAlgebra};
pub use idempotents::{
    phi_orbit_transitivity, tensor_idempotents, tensor_idempotents_capped, IdempotentDecomposition,
    OrbitReport, DEFAULT_DEGREE_CAP,
};

use crate::error::{Error, Result};

/// One factor `k_α = F_{p^{n_α}}(t_{α,1}, …, t_{α,d_α})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueFieldSpec {
    pub base: FiniteFieldSpec,
    pub transcendentals: Vec<String>,
}

impl ResidueFieldSpec {
    pub fn finite(base: FiniteFieldSpec) -> Self {
        Self {
            base,
            transcendentals: Vec::new(),
        }
    }

    pub fn d(&self) -> usize {
        self.transcendentals.len()
    }
}

/// `k_Δ` together with its idempotent decomposition.
#[derive(Debug, Clone)]
pub struct CoefficientAlgebra {
    labels: Vec<String>,
    factors: Vec<ResidueFieldSpec>,
    fdelta: TensorAlgebra,
    decomposition: IdempotentDecomposition,
    groups: Vec<Range<usize>>,
    owner: Vec<usize>,
}

impl PartialEq for CoefficientAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.factors == other.factors
    }
}

impl CoefficientAlgebra {
    /// Builds `k_Δ` with factor labels `a, b, c, …`.
    pub fn new(factors: Vec<ResidueFieldSpec>) -> Result<Self> {
        let labels = (0..factors.len()).map(default_label).collect();
        Self::with_labels(labels, factors)
    }

    pub fn with_labels(labels: Vec<String>, factors: Vec<ResidueFieldSpec>) -> Result<Self> {
        if labels.len() != factors.len() {
            return Err(Error::Config("one label per factor required".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(Error::Config(format!("duplicate label {l}")));
            }
        }
        let mut syms = std::collections::BTreeSet::new();
        for f in &factors {
            for t in &f.transcendentals {
                if !syms.insert(t.clone()) {
                    return Err(Error::Config(format!("transcendental {t} used twice")));
                }
            }
        }
        let fdelta = TensorAlgebra::new(factors.iter().map(|f| f.base.clone()).collect())?;
        let decomposition = tensor_idempotents(&fdelta)?;
        let mut groups = Vec::new();
        let mut owner = Vec::new();
        let mut start = 0;
        for (alpha, f) in factors.iter().enumerate() {
            groups.push(start..start + f.d());
            owner.extend(std::iter::repeat_n(alpha, f.d()));
            start += f.d();
        }
        Ok(Self {
            labels,
            factors,
            fdelta,
            decomposition,
            groups,
            owner,
        })
    }

    /// `k_Δ` with `F_{p^{n_α}}` (standard moduli) and `d_α` transcendentals
    /// named `t_<label>_<i>`.
    pub fn standard(p: u64, degrees: &[(usize, usize)]) -> Result<Self> {
        let mut factors = Vec::new();
        for (alpha, &(n, d)) in degrees.iter().enumerate() {
            let base = FiniteFieldSpec::standard(p, n)?;
            let label = default_label(alpha);
            let transcendentals = (1..=d).map(|i| format!("t_{label}_{i}")).collect();
            factors.push(ResidueFieldSpec {
                base,
                transcendentals,
            });
        }
        Self::new(factors)
    }

    pub fn p(&self) -> u32 {
        self.fdelta.p()
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn factors(&self) -> &[ResidueFieldSpec] {
        &self.factors
    }

    pub fn fdelta(&self) -> &TensorAlgebra {
        &self.fdelta
    }

    pub fn decomposition(&self) -> &IdempotentDecomposition {
        &self.decomposition
    }

    /// Total number of transcendental symbols.
    pub fn num_t(&self) -> usize {
        self.owner.len()
    }

    /// Positions of the `t_{α,*}` inside a full exponent vector.
    pub fn group(&self, alpha: usize) -> Range<usize> {
        self.groups[alpha].clone()
    }

    /// Factor owning the `i`-th transcendental.
    pub fn owner(&self, i: usize) -> usize {
        self.owner[i]
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.factors
            .iter()
            .flat_map(|f| f.transcendentals.iter())
            .position(|s| s == name)
    }

    pub fn symbol(&self, i: usize) -> &str {
        self.factors
            .iter()
            .flat_map(|f| f.transcendentals.iter())
            .nth(i)
            .expect("symbol")
    }

    /// Order of the absolute Frobenius on `F_Δ`.
    pub fn frobenius_order(&self) -> usize {
        self.factors.iter().map(|f| f.base.n).fold(1, lcm)
    }
}

pub(crate) fn default_label(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("x{i}")
    }
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}
