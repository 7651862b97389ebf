use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactla::Matrix;
use crate::quiver::Algebra;

use super::Module;

/// Wire form of a module: entries are residues mod p, one row list per arrow.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleJson {
    pub algebra_id: String,
    pub dims: Vec<usize>,
    pub action: BTreeMap<String, Vec<Vec<u64>>>,
}

impl ModuleJson {
    pub fn from_module(m: &Module) -> Self {
        let q = m.algebra().quiver();
        let action = q
            .arrows()
            .iter()
            .zip(m.actions())
            .map(|(a, mat)| {
                let rows = (0..mat.rows()).map(|r| mat.row(r).to_vec()).collect();
                (a.label.clone(), rows)
            })
            .collect();
        ModuleJson {
            algebra_id: m.algebra().name().to_string(),
            dims: m.dims().to_vec(),
            action,
        }
    }

    pub fn to_module(&self, algebra: &Arc<Algebra>) -> Result<Module> {
        if self.algebra_id != algebra.name() {
            return Err(Error::Invalid(format!(
                "module belongs to {}, not {}",
                self.algebra_id,
                algebra.name()
            )));
        }
        let f = algebra.field();
        let q = algebra.quiver();
        if self.dims.len() != q.vertex_count() {
            return Err(Error::Invalid("dimension vector has the wrong length".into()));
        }
        let mut action = Vec::with_capacity(q.arrow_count());
        for a in q.arrows() {
            let (r, c) = (self.dims[a.target], self.dims[a.source]);
            let rows = self.action.get(&a.label).cloned().unwrap_or_default();
            if rows.is_empty() && r * c > 0 {
                return Err(Error::Invalid(format!("missing matrix for arrow {}", a.label)));
            }
            if rows.len() != r || rows.iter().any(|row| row.len() != c) {
                return Err(Error::Invalid(format!("matrix for arrow {} has the wrong shape", a.label)));
            }
            let data: Vec<u64> = rows.into_iter().flatten().collect();
            if data.iter().any(|&x| x >= f.modulus()) {
                return Err(Error::Invalid(format!("entry out of range for arrow {}", a.label)));
            }
            action.push(Matrix::from_vec(f, r, c, data));
        }
        Module::new(algebra.clone(), self.dims.clone(), action)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::Field;

    #[test]
    fn round_trip() {
        let a = Algebra::builtin("A", Field::default()).unwrap();
        let m = Module::direct_sum(&[&Module::projective(&a, 1), &Module::simple(&a, 0)]).unwrap();
        let j = ModuleJson::from_module(&m);
        let text = serde_json::to_string(&j).unwrap();
        let back: ModuleJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_module(&a).unwrap(), m);
        let c = Algebra::builtin("A3CT", Field::default()).unwrap();
        assert!(back.to_module(&c).is_err());
    }
}
