//! JSON and CSV file formats.
//!
//! Measures: `{"dim":1,"locations":[...],"amp_re":[...],"amp_im":[...]}`, with
//! `[x, y]` pairs as locations in 2-D. Samples: `{"dim":1,"fc":50,"k_min":-50,
//! "coeff_re":[...],"coeff_im":[...]}` in increasing-`k` order (row-major over
//! `(k1, k2)` in 2-D). Grid vectors: `{"n_grid":N,"re":[...],"im":[...]}`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AtomicMeasure, Locations, SampleVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub dim: usize,
    pub locations: Locations,
    #[serde(default)]
    pub amp_re: Vec<f64>,
    #[serde(default)]
    pub amp_im: Vec<f64>,
}

impl MeasureJson {
    pub fn from_measure(x: &AtomicMeasure) -> Self {
        Self {
            dim: x.dim(),
            locations: x.locations().clone(),
            amp_re: x.amplitudes().iter().map(|a| a.re).collect(),
            amp_im: x.amplitudes().iter().map(|a| a.im).collect(),
        }
    }

    /// Amplitudes; missing imaginary parts read as zero.
    pub fn amplitudes(&self) -> Result<Vec<Complex64>> {
        if !self.amp_im.is_empty() && self.amp_im.len() != self.amp_re.len() {
            return Err(Error::Format("amp_re and amp_im differ in length".into()));
        }
        Ok(self
            .amp_re
            .iter()
            .enumerate()
            .map(|(i, &re)| Complex64::new(re, self.amp_im.get(i).copied().unwrap_or(0.0)))
            .collect())
    }

    pub fn into_measure(self) -> Result<AtomicMeasure> {
        if self.locations.len() > 0 && self.locations.dim() != self.dim {
            return Err(Error::Format(format!(
                "dim {} does not match the locations",
                self.dim
            )));
        }
        let amps = self.amplitudes()?;
        AtomicMeasure::new(self.locations, amps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplesJson {
    pub dim: usize,
    pub fc: usize,
    pub k_min: i64,
    pub coeff_re: Vec<f64>,
    pub coeff_im: Vec<f64>,
}

impl SamplesJson {
    pub fn from_samples(y: &SampleVector) -> Self {
        Self {
            dim: y.dim(),
            fc: y.fc(),
            k_min: -(y.fc() as i64),
            coeff_re: y.coeffs().iter().map(|c| c.re).collect(),
            coeff_im: y.coeffs().iter().map(|c| c.im).collect(),
        }
    }

    pub fn into_samples(self) -> Result<SampleVector> {
        if self.k_min != -(self.fc as i64) {
            return Err(Error::Format(format!("k_min must be -fc = -{}", self.fc)));
        }
        if self.coeff_re.len() != self.coeff_im.len() {
            return Err(Error::Format("coeff_re and coeff_im differ in length".into()));
        }
        let coeffs = self
            .coeff_re
            .iter()
            .zip(&self.coeff_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        SampleVector::new(self.dim, self.fc, coeffs)
    }
}

/// A length-N grid signal plus a sparsity summary on output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridVectorJson {
    pub n_grid: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// Indices with modulus above `1e-8` times the largest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1_norm: Option<f64>,
}

impl GridVectorJson {
    pub fn from_vector(x: &[Complex64]) -> Self {
        let peak = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let support = (0..x.len()).filter(|&i| x[i].norm() > 1e-8 * peak).collect();
        Self {
            n_grid: x.len(),
            re: x.iter().map(|v| v.re).collect(),
            im: x.iter().map(|v| v.im).collect(),
            support: Some(support),
            l1_norm: Some(x.iter().map(|v| v.norm()).sum()),
        }
    }

    pub fn into_vector(self) -> Result<Vec<Complex64>> {
        if self.re.len() != self.n_grid || (!self.im.is_empty() && self.im.len() != self.n_grid) {
            return Err(Error::Format(format!("expected {} entries", self.n_grid)));
        }
        Ok(self
            .re
            .iter()
            .enumerate()
            .map(|(i, &re)| Complex64::new(re, self.im.get(i).copied().unwrap_or(0.0)))
            .collect())
    }
}

/// A plain list of complex values, e.g. a sign pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexListJson {
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

impl ComplexListJson {
    pub fn into_values(self) -> Result<Vec<Complex64>> {
        if !self.im.is_empty() && self.im.len() != self.re.len() {
            return Err(Error::Format("re and im differ in length".into()));
        }
        Ok(self
            .re
            .iter()
            .enumerate()
            .map(|(i, &re)| Complex64::new(re, self.im.get(i).copied().unwrap_or(0.0)))
            .collect())
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))
}

pub fn read_measure(path: &Path) -> Result<AtomicMeasure> {
    read_json::<MeasureJson>(path)?.into_measure()
}

pub fn read_samples(path: &Path) -> Result<SampleVector> {
    read_json::<SamplesJson>(path)?.into_samples()
}
