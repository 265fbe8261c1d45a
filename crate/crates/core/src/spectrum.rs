//! Sideband amplitudes on the integer energy-exchange index ℓ.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Which solver produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Analytic,
    Recoil,
    Oracle,
    Constructed,
}

/// Complex amplitudes `α_ℓ` for `ℓ ∈ [-l_max, l_max]`. Index ℓ counts quanta
/// `ħΩ` gained by the electron: the envelope is `Σ α_ℓ exp(iℓΩ(z/v - t))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidebandSpectrum {
    amplitudes: Vec<C64>,
    l_max: usize,
    pub beta: Option<C64>,
    pub provenance: Provenance,
}

impl SidebandSpectrum {
    pub fn new(amplitudes: Vec<C64>, provenance: Provenance) -> Result<Self> {
        if amplitudes.len() % 2 == 0 {
            return Err(Error::Domain("sideband support must be symmetric (odd length)".into()));
        }
        let l_max = amplitudes.len() / 2;
        Ok(Self { amplitudes, l_max, beta: None, provenance })
    }

    /// `α_ℓ = δ_ℓ0`.
    pub fn delta(l_max: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 2 * l_max + 1];
        amplitudes[l_max] = C64::new(1.0, 0.0);
        Self { amplitudes, l_max, beta: None, provenance: Provenance::Constructed }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    /// `α_ℓ`, zero outside the stored support.
    pub fn get(&self, l: i64) -> C64 {
        if l.unsigned_abs() as usize > self.l_max {
            return C64::new(0.0, 0.0);
        }
        self.amplitudes[(l + self.l_max as i64) as usize]
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let l = self.l_max as i64;
        -l..=l
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.indices().zip(self.amplitudes.iter().copied())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn total_probability(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.total_probability().sqrt();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
        self
    }

    /// Errors unless `Σ|α_ℓ|² = 1` within `tol`.
    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let total = self.total_probability();
        if (total - 1.0).abs() > tol {
            return Err(Error::Unnormalized { total });
        }
        Ok(())
    }

    /// Zero-pads (or crops) to a new symmetric support.
    pub fn resized(&self, l_max: usize) -> Self {
        let amplitudes = (-(l_max as i64)..=l_max as i64).map(|l| self.get(l)).collect();
        Self { amplitudes, l_max, beta: self.beta, provenance: self.provenance }
    }

    /// Largest |ℓ| carrying probability above `threshold`.
    pub fn occupied_extent(&self, threshold: f64) -> usize {
        self.iter().filter(|(_, a)| a.norm_sqr() > threshold).map(|(l, _)| l.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Columnar text: `l, re, im, prob`.
    pub fn to_columns(&self) -> String {
        let mut s = String::from("l,re,im,prob\n");
        for (l, a) in self.iter() {
            let _ = writeln!(s, "{l},{:.15e},{:.15e},{:.15e}", a.re, a.im, a.norm_sqr());
        }
        s
    }

    pub fn from_columns(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with('l')) {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() < 3 {
                return Err(Error::Config(format!("bad spectrum row {i}: {line}")));
            }
            let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| Error::Config(format!("row {i}: {e}")));
            let l: i64 = f[0].trim().parse().map_err(|e| Error::Config(format!("row {i}: {e}")))?;
            rows.push((l, C64::new(parse(f[1])?, parse(f[2])?)));
        }
        let l_max = rows.iter().map(|(l, _)| l.unsigned_abs() as usize).max().unwrap_or(0);
        let mut amplitudes = vec![C64::new(0.0, 0.0); 2 * l_max + 1];
        for (l, a) in rows {
            amplitudes[(l + l_max as i64) as usize] = a;
        }
        Ok(Self { amplitudes, l_max, beta: None, provenance: Provenance::Constructed })
    }
}
