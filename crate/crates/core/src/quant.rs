//! Discretization of continuous observations and mixed-radix state indexing.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuantError {
    #[error("quantizer range is empty: lo {lo} >= hi {hi}")]
    EmptyRange { lo: f64, hi: f64 },
    #[error("quantizer needs at least one bin")]
    ZeroBins,
    #[error("field {field} has bin {bin} but only {bins} bins")]
    BinOutOfRange { field: usize, bin: usize, bins: usize },
    #[error("bins_per_field and field_bins lengths differ: {lhs} vs {rhs}")]
    LengthMismatch { lhs: usize, rhs: usize },
}

/// Uniform quantizer over [lo, hi]; inputs outside the range clamp to the
/// edge bins, and x == hi maps to the last bin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantizer {
    lo: f64,
    hi: f64,
    bins: usize,
}

impl Quantizer {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self, QuantError> {
        if !(hi > lo) {
            return Err(QuantError::EmptyRange { lo, hi });
        }
        if bins == 0 {
            return Err(QuantError::ZeroBins);
        }
        Ok(Quantizer { lo, hi, bins })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// floor((clamp(x) - lo) / (hi - lo) * bins), capped at bins - 1.
    pub fn bin(&self, x: f64) -> usize {
        let c = x.clamp(self.lo, self.hi);
        let i = ((c - self.lo) / (self.hi - self.lo) * self.bins as f64).floor() as usize;
        i.min(self.bins - 1)
    }
}

/// Row-major mixed-radix index of a bin tuple; bijective with the tuple.
pub fn state_index(bins_per_field: &[usize], field_bins: &[usize]) -> Result<usize, QuantError> {
    if bins_per_field.len() != field_bins.len() {
        return Err(QuantError::LengthMismatch {
            lhs: bins_per_field.len(),
            rhs: field_bins.len(),
        });
    }
    let mut index = 0usize;
    for (field, (&bins, &bin)) in bins_per_field.iter().zip(field_bins.iter()).enumerate() {
        if bin >= bins {
            return Err(QuantError::BinOutOfRange { field, bin, bins });
        }
        index = index * bins + bin;
    }
    Ok(index)
}

/// Inverse of [`state_index`].
pub fn state_decode(bins_per_field: &[usize], mut index: usize) -> Vec<usize> {
    let mut out = vec![0usize; bins_per_field.len()];
    for (slot, &bins) in out.iter_mut().zip(bins_per_field.iter()).rev() {
        *slot = index % bins;
        index /= bins;
    }
    out
}

/// Total number of tuples, i.e. the product of the radices.
pub fn state_space_size(bins_per_field: &[usize]) -> usize {
    bins_per_field.iter().product()
}
