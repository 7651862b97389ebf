//! Interchangeable ways of computing `Ω^t W X` for a truncated resolution
//! `X`, looked up by name.

use crate::error::{Error, Result};
use crate::perchain::{periodic_syzygy_power, wrap, PeriodicComplex};
use crate::trunres::{iterate_syzygy, TruncatedResolution};

pub trait SyzygyEngine: Send + Sync {
    fn name(&self) -> &'static str;

    /// Periodic complexes whose direct sum is `Ω^t W X`. The pieces need
    /// not be indecomposable.
    fn syzygy_parts(&self, x: &TruncatedResolution, t: usize) -> Result<Vec<PeriodicComplex>>;

    fn syzygy(&self, x: &TruncatedResolution, t: usize) -> Result<PeriodicComplex> {
        let parts = self.syzygy_parts(x, t)?;
        if parts.is_empty() {
            return Ok(PeriodicComplex::zero(x.algebra()));
        }
        PeriodicComplex::direct_sum(&parts.iter().collect::<Vec<_>>())
    }
}

/// Iterates the explicit formula on bounded complexes, then wraps each
/// summand.
pub struct FormulaEngine;

impl SyzygyEngine for FormulaEngine {
    fn name(&self) -> &'static str {
        "formula"
    }

    fn syzygy_parts(&self, x: &TruncatedResolution, t: usize) -> Result<Vec<PeriodicComplex>> {
        Ok(iterate_syzygy(x, t)?
            .iter()
            .map(|s| wrap(&s.to_complex()))
            .collect())
    }
}

/// Wraps first, then takes syzygies of modules over the tensor algebra.
pub struct TensorEngine;

impl SyzygyEngine for TensorEngine {
    fn name(&self) -> &'static str {
        "tensor"
    }

    fn syzygy_parts(&self, x: &TruncatedResolution, t: usize) -> Result<Vec<PeriodicComplex>> {
        let p = periodic_syzygy_power(&wrap(&x.to_complex()), t)?;
        Ok(if p.is_zero() { Vec::new() } else { vec![p] })
    }
}

pub const ENGINE_NAMES: &[&str] = &["formula", "tensor"];

pub fn engine(name: &str) -> Result<Box<dyn SyzygyEngine>> {
    match name {
        "formula" => Ok(Box::new(FormulaEngine)),
        "tensor" => Ok(Box::new(TensorEngine)),
        _ => Err(Error::Config(format!(
            "unknown engine {name}; available: {}",
            ENGINE_NAMES.join(", ")
        ))),
    }
}
