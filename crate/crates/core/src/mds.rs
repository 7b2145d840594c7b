//! Systematic (theta, M) Reed-Solomon code over GF(q).
//!
//! The generator is the Vandermonde matrix on the first `theta` canonical
//! field elements, row-reduced so that its first `M` columns are the
//! identity. Erasure decoding solves the `M x M` system on `M` known
//! coordinates and checks the rest.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Field, FieldElement, GfError, MAX_ORDER};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MdsError {
    #[error("field of order {q} is too small for length {theta}")]
    FieldTooSmall { theta: usize, q: u64 },
    #[error("bad dimension M = {m} for length {theta}")]
    BadDimension { m: usize, theta: usize },
    #[error("expected {expected} symbols, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("need {need} distinct coordinates, have {have}")]
    InsufficientSymbols { need: usize, have: usize },
    #[error("known symbols do not lie on one codeword (position {position})")]
    Inconsistent { position: usize },
    #[error("position {position} outside codeword of length {theta}")]
    PositionOutOfRange { position: usize, theta: usize },
    #[error(transparent)]
    Field(#[from] GfError),
    #[error("symbol container: {0}")]
    Container(String),
}

/// Public parameters of a code, as recorded in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdsParams {
    pub theta: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub q: u32,
}

#[derive(Debug, Clone)]
pub struct MdsCode {
    field: Arc<Field>,
    theta: usize,
    m: usize,
    eval_points: Vec<FieldElement>,
    /// `m` rows of length `theta`.
    generator: Vec<Vec<FieldElement>>,
}

/// Smallest power of two that is at least `theta` (and at least 2).
pub fn default_field_order(theta: usize) -> u64 {
    (theta.max(2) as u64).next_power_of_two()
}

impl MdsCode {
    pub fn new(theta: usize, m: usize, q: u64) -> Result<Self, MdsError> {
        if m == 0 || m > theta {
            return Err(MdsError::BadDimension { m, theta });
        }
        let field = Field::new(q)?;
        if (field.order() as usize) < theta {
            return Err(MdsError::FieldTooSmall { theta, q });
        }
        Ok(Self::with_field(Arc::new(field), theta, m))
    }

    /// Uses the default binary field for `theta`.
    pub fn with_default_field(theta: usize, m: usize) -> Result<Self, MdsError> {
        let q = default_field_order(theta);
        if q > MAX_ORDER as u64 {
            return Err(MdsError::FieldTooSmall {
                theta,
                q: MAX_ORDER as u64,
            });
        }
        MdsCode::new(theta, m, q)
    }

    fn with_field(field: Arc<Field>, theta: usize, m: usize) -> Self {
        let eval_points: Vec<FieldElement> = field.elements().take(theta).collect();
        let mut g: Vec<Vec<FieldElement>> = (0..m)
            .map(|i| {
                eval_points
                    .iter()
                    .map(|&x| field.pow(x, i as u64))
                    .collect()
            })
            .collect();
        // Gauss-Jordan on the first m columns
        for col in 0..m {
            let pivot = (col..m)
                .find(|&r| !g[r][col].is_zero())
                .expect("Vandermonde columns on distinct points are independent");
            g.swap(col, pivot);
            let inv = field.inv(g[col][col]).expect("pivot is nonzero");
            for v in g[col].iter_mut() {
                *v = field.mul(*v, inv);
            }
            let pivot_row = g[col].clone();
            for (r, row) in g.iter_mut().enumerate() {
                if r != col && !row[col].is_zero() {
                    let factor = row[col];
                    for (x, &p) in row.iter_mut().zip(&pivot_row) {
                        *x = field.sub(*x, field.mul(factor, p));
                    }
                }
            }
        }
        MdsCode {
            field,
            theta,
            m,
            eval_points,
            generator: g,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn theta(&self) -> usize {
        self.theta
    }

    pub fn dimension(&self) -> usize {
        self.m
    }

    pub fn eval_points(&self) -> &[FieldElement] {
        &self.eval_points
    }

    pub fn generator(&self) -> &[Vec<FieldElement>] {
        &self.generator
    }

    pub fn params(&self) -> MdsParams {
        MdsParams {
            theta: self.theta,
            m: self.m,
            q: self.field.order(),
        }
    }

    pub fn encode(&self, file: &[FieldElement]) -> Result<Vec<FieldElement>, MdsError> {
        if file.len() != self.m {
            return Err(MdsError::LengthMismatch {
                expected: self.m,
                got: file.len(),
            });
        }
        let f = &*self.field;
        Ok((0..self.theta)
            .map(|j| {
                file.iter()
                    .zip(&self.generator)
                    .fold(FieldElement::ZERO, |acc, (&x, row)| {
                        f.add(acc, f.mul(x, row[j]))
                    })
            })
            .collect())
    }

    /// Precomputes the inverse of the generator restricted to `positions`
    /// (exactly `M` distinct coordinates).
    pub fn decoder(&self, positions: &[usize]) -> Result<ErasureDecoder, MdsError> {
        if positions.len() != self.m {
            return Err(MdsError::InsufficientSymbols {
                need: self.m,
                have: positions.len(),
            });
        }
        let f = &*self.field;
        let m = self.m;
        // a[r][c] = G[c][positions[r]]; solve a * file = known
        let mut a: Vec<Vec<FieldElement>> = positions
            .iter()
            .map(|&p| {
                if p >= self.theta {
                    return Err(MdsError::PositionOutOfRange {
                        position: p,
                        theta: self.theta,
                    });
                }
                Ok((0..m).map(|c| self.generator[c][p]).collect())
            })
            .collect::<Result<_, _>>()?;
        let mut inv: Vec<Vec<FieldElement>> = (0..m)
            .map(|r| {
                (0..m)
                    .map(|c| {
                        if r == c {
                            FieldElement::ONE
                        } else {
                            FieldElement::ZERO
                        }
                    })
                    .collect()
            })
            .collect();
        for col in 0..m {
            let pivot = (col..m)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(MdsError::InsufficientSymbols { need: m, have: col })?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let pinv = f.inv(a[col][col])?;
            for j in 0..m {
                a[col][j] = f.mul(a[col][j], pinv);
                inv[col][j] = f.mul(inv[col][j], pinv);
            }
            for r in 0..m {
                if r != col && !a[r][col].is_zero() {
                    let factor = a[r][col];
                    for j in 0..m {
                        let da = f.mul(factor, a[col][j]);
                        a[r][j] = f.sub(a[r][j], da);
                        let di = f.mul(factor, inv[col][j]);
                        inv[r][j] = f.sub(inv[r][j], di);
                    }
                }
            }
        }
        Ok(ErasureDecoder {
            field: Arc::clone(&self.field),
            positions: positions.to_vec(),
            inverse: inv,
        })
    }

    /// Recovers the file from at least `M` known `(position, symbol)` pairs.
    pub fn decode_erasures(
        &self,
        known: &[(usize, FieldElement)],
    ) -> Result<Vec<FieldElement>, MdsError> {
        let mut sorted = known.to_vec();
        sorted.sort_by_key(|&(p, _)| p);
        let mut distinct: Vec<(usize, FieldElement)> = Vec::with_capacity(sorted.len());
        for (p, s) in sorted {
            if p >= self.theta {
                return Err(MdsError::PositionOutOfRange {
                    position: p,
                    theta: self.theta,
                });
            }
            match distinct.last() {
                Some(&(lp, ls)) if lp == p => {
                    if ls != s {
                        return Err(MdsError::Inconsistent { position: p });
                    }
                }
                _ => distinct.push((p, s)),
            }
        }
        if distinct.len() < self.m {
            return Err(MdsError::InsufficientSymbols {
                need: self.m,
                have: distinct.len(),
            });
        }
        let positions: Vec<usize> = distinct[..self.m].iter().map(|&(p, _)| p).collect();
        let symbols: Vec<FieldElement> = distinct[..self.m].iter().map(|&(_, s)| s).collect();
        let file = self.decoder(&positions)?.apply(&symbols);
        let codeword = self.encode(&file)?;
        if let Some(&(p, _)) = distinct[self.m..].iter().find(|&&(p, s)| codeword[p] != s) {
            return Err(MdsError::Inconsistent { position: p });
        }
        Ok(file)
    }
}

/// Inverse of an `M x M` generator restriction.
#[derive(Debug, Clone)]
pub struct ErasureDecoder {
    field: Arc<Field>,
    positions: Vec<usize>,
    inverse: Vec<Vec<FieldElement>>,
}

impl ErasureDecoder {
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// `symbols[i]` is the codeword symbol at `positions()[i]`.
    pub fn apply(&self, symbols: &[FieldElement]) -> Vec<FieldElement> {
        let f = &*self.field;
        self.inverse
            .iter()
            .map(|row| {
                row.iter()
                    .zip(symbols)
                    .fold(FieldElement::ZERO, |acc, (&a, &s)| f.add(acc, f.mul(a, s)))
            })
            .collect()
    }
}

/// Serialization format of a symbol container.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolFormat {
    Json,
    U16Le,
}

const MAGIC: &[u8; 4] = b"FRBS";

/// Container: `"FRBS"`, one format byte (0 = JSON array, 1 = little-endian
/// u16 words), the field order as u32 LE, then the payload.
pub fn write_symbols(
    q: u32,
    symbols: &[FieldElement],
    format: SymbolFormat,
) -> Result<Vec<u8>, MdsError> {
    let mut out = MAGIC.to_vec();
    match format {
        SymbolFormat::Json => {
            out.push(0);
            out.extend_from_slice(&q.to_le_bytes());
            let idx: Vec<u32> = symbols.iter().map(|s| s.index()).collect();
            out.extend_from_slice(serde_json::to_string(&idx).expect("u32 list").as_bytes());
        }
        SymbolFormat::U16Le => {
            if q > 1 << 16 {
                return Err(MdsError::Container(format!(
                    "GF({q}) symbols do not fit 16 bits"
                )));
            }
            out.push(1);
            out.extend_from_slice(&q.to_le_bytes());
            for s in symbols {
                out.extend_from_slice(&(s.index() as u16).to_le_bytes());
            }
        }
    }
    Ok(out)
}

/// Parses a container written by [`write_symbols`], checking every symbol
/// against `field`.
pub fn read_symbols(
    bytes: &[u8],
    field: &Field,
) -> Result<(SymbolFormat, Vec<FieldElement>), MdsError> {
    let bad = |msg: &str| MdsError::Container(msg.to_string());
    if bytes.len() < 9 || &bytes[..4] != MAGIC {
        return Err(bad("missing header"));
    }
    let q = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes"));
    if q != field.order() {
        return Err(bad(&format!(
            "container is over GF({q}), expected GF({})",
            field.order()
        )));
    }
    let payload = &bytes[9..];
    let (format, raw): (SymbolFormat, Vec<u32>) = match bytes[4] {
        0 => (
            SymbolFormat::Json,
            serde_json::from_slice(payload).map_err(|e| bad(&e.to_string()))?,
        ),
        1 => {
            if !payload.len().is_multiple_of(2) {
                return Err(bad("odd payload length"));
            }
            (
                SymbolFormat::U16Le,
                payload
                    .chunks_exact(2)
                    .map(|c| u16::from_le_bytes([c[0], c[1]]) as u32)
                    .collect(),
            )
        }
        other => return Err(bad(&format!("unknown format byte {other}"))),
    };
    let symbols = raw
        .into_iter()
        .map(|i| field.element(i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((format, symbols))
}
