//! Text formats: matrix documents and the precise JSON writer shared by every
//! file this crate emits.
//!
//! A matrix document is a JSON object
//! `{"dim": n, "kind": "effect", "entries": [[re, im], ...]}` with the entries
//! listed row-major; `kind` is optional. Floats are written in scientific
//! notation with 17 significant digits so values round-trip exactly.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{c, CMatrix, Effect, HermitianMatrix, UnitaryMatrix};

pub const EFFECT_KIND: &str = "effect";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixDocument {
    pub fn from_matrix(m: &CMatrix, kind: Option<&str>) -> Self {
        let n = m.nrows();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        Self { dim: n, kind: kind.map(str::to_string), entries }
    }

    pub fn from_effect(e: &Effect) -> Self {
        Self::from_matrix(e.matrix(), Some(EFFECT_KIND))
    }

    pub fn from_hermitian(h: &HermitianMatrix) -> Self {
        Self::from_matrix(h.matrix(), None)
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.dim == 0 {
            return Err(Error::Parse("dim must be at least 1".into()));
        }
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::Parse(format!(
                "expected {} entries for dim {}, found {}",
                self.dim * self.dim,
                self.dim,
                self.entries.len()
            )));
        }
        if self.entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Parse("non-finite entry".into()));
        }
        let n = self.dim;
        Ok(CMatrix::from_fn(n, n, |i, j| {
            let [re, im] = self.entries[i * n + j];
            c(re, im)
        }))
    }

    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.to_matrix()?)
    }

    pub fn to_effect(&self) -> Result<Effect> {
        Effect::new(self.to_hermitian()?)
    }

    pub fn to_unitary(&self) -> Result<UnitaryMatrix> {
        UnitaryMatrix::new(self.to_matrix()?)
    }
}

/// Compact JSON with every float printed as `{:.16e}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PreciseFormatter;

impl serde_json::ser::Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write!(writer, "{:.16e}", f64::from(value))
    }
}

pub fn to_precise_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_document<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_precise_json(value)?)?;
    Ok(())
}

pub fn read_document<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_effect(path: &Path) -> Result<Effect> {
    read_document::<MatrixDocument>(path)?.to_effect()
}

pub fn write_effect(path: &Path, e: &Effect) -> Result<()> {
    write_document(path, &MatrixDocument::from_effect(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_effect;
    use proptest::prelude::*;

    #[test]
    fn layout_is_row_major_with_kind() {
        let h = HermitianMatrix::new(CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c(0.25, 0.25),
            (1, 0) => c(0.25, -0.25),
            _ => c(0.5, 0.0),
        }))
        .unwrap();
        let e = Effect::new(h).unwrap();
        let text = to_precise_json(&MatrixDocument::from_effect(&e)).unwrap();
        assert_eq!(
            text,
            "{\"dim\":2,\"kind\":\"effect\",\"entries\":[[5.0000000000000000e-1,0.0000000000000000e0],\
[2.5000000000000000e-1,2.5000000000000000e-1],[2.5000000000000000e-1,-2.5000000000000000e-1],\
[5.0000000000000000e-1,0.0000000000000000e0]]}\n"
        );
    }

    #[test]
    fn rejects_wrong_entry_count() {
        let doc = MatrixDocument { dim: 2, kind: None, entries: vec![[0.0, 0.0]; 3] };
        assert!(matches!(doc.to_matrix(), Err(Error::Parse(_))));
    }

    proptest! {
        #[test]
        fn effect_documents_round_trip_bit_exactly(seed in any::<u64>(), dim in 1usize..6) {
            let e = random_effect(dim, None, seed).unwrap();
            let text = to_precise_json(&MatrixDocument::from_effect(&e)).unwrap();
            let back: MatrixDocument = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back.to_matrix().unwrap(), e.matrix().clone());
        }
    }
}
