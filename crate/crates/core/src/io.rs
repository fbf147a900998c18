//! Canonical JSON file formats.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::LaurentPolynomial;
use crate::periods::{DiffOperator, PeriodError, PeriodSequence, Provenance};
use crate::toric::Fan;
use crate::IVec;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad number {0:?}")]
    BadNumber(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("exponent vectors of different lengths")]
    RaggedExponents,
    #[error(transparent)]
    Period(#[from] PeriodError),
}

/// Compact JSON with a trailing newline; struct fields keep declaration order, so output is byte-stable.
pub fn to_canonical<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("serializable value");
    s.push('\n');
    s
}

/// Integer stored as a JSON number when it fits in `i64`, otherwise as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonInt {
    Small(i64),
    Big(String),
}

impl From<&BigInt> for JsonInt {
    fn from(n: &BigInt) -> Self {
        match n.to_i64() {
            Some(v) => JsonInt::Small(v),
            None => JsonInt::Big(n.to_string()),
        }
    }
}

impl TryFrom<&JsonInt> for BigInt {
    type Error = IoError;
    fn try_from(j: &JsonInt) -> Result<Self, IoError> {
        match j {
            JsonInt::Small(v) => Ok(BigInt::from(*v)),
            JsonInt::Big(s) => BigInt::from_str(s.trim()).map_err(|_| IoError::BadNumber(s.clone())),
        }
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational, IoError> {
    let s = s.trim();
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n = BigInt::from_str(n.trim()).map_err(|_| IoError::BadNumber(s.to_string()))?;
    let d = BigInt::from_str(d.trim()).map_err(|_| IoError::BadNumber(s.to_string()))?;
    if d.is_zero() {
        return Err(IoError::ZeroDenominator);
    }
    Ok(BigRational::new(n, d))
}

pub fn fan_to_json(f: &Fan) -> String {
    to_canonical(f)
}

pub fn fan_from_json(s: &str) -> Result<Fan, IoError> {
    Ok(serde_json::from_str(s)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaurentTerm {
    pub exp: IVec,
    pub num: String,
    pub den: String,
}

pub fn laurent_terms(f: &LaurentPolynomial) -> Vec<LaurentTerm> {
    f.terms()
        .iter()
        .map(|(e, c)| LaurentTerm { exp: e.clone(), num: c.numer().to_string(), den: c.denom().to_string() })
        .collect()
}

/// Rebuild from terms; `n_vars` is only consulted when the list is empty.
pub fn laurent_from_terms(terms: &[LaurentTerm], n_vars: usize) -> Result<LaurentPolynomial, IoError> {
    let n = terms.first().map_or(n_vars, |t| t.exp.len());
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        if t.exp.len() != n {
            return Err(IoError::RaggedExponents);
        }
        out.push((t.exp.clone(), parse_rational(&format!("{}/{}", t.num, t.den))?));
    }
    Ok(LaurentPolynomial::from_terms(n, out))
}

pub fn laurent_to_json(f: &LaurentPolynomial) -> String {
    to_canonical(&laurent_terms(f))
}

pub fn laurent_from_json(s: &str) -> Result<LaurentPolynomial, IoError> {
    let terms: Vec<LaurentTerm> = serde_json::from_str(s)?;
    laurent_from_terms(&terms, 0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorFile {
    pub order: usize,
    pub polys: Vec<Vec<JsonInt>>,
}

impl From<&DiffOperator> for OperatorFile {
    fn from(l: &DiffOperator) -> Self {
        OperatorFile { order: l.order(), polys: l.polys().iter().map(|p| p.iter().map(JsonInt::from).collect()).collect() }
    }
}

impl OperatorFile {
    pub fn to_operator(&self) -> Result<DiffOperator, IoError> {
        let polys = self
            .polys
            .iter()
            .map(|p| p.iter().map(BigInt::try_from).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let l = DiffOperator::new(polys)?;
        if l.order() != self.order {
            return Err(IoError::BadNumber(format!("order {} but {} polynomials", self.order, self.polys.len())));
        }
        Ok(l)
    }
}

pub fn operator_to_json(l: &DiffOperator) -> String {
    to_canonical(&OperatorFile::from(l))
}

pub fn operator_from_json(s: &str) -> Result<DiffOperator, IoError> {
    serde_json::from_str::<OperatorFile>(s)?.to_operator()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodFile {
    pub alpha: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl From<&PeriodSequence> for PeriodFile {
    fn from(p: &PeriodSequence) -> Self {
        PeriodFile { alpha: p.coeffs.iter().map(ToString::to_string).collect(), provenance: Some(p.provenance) }
    }
}

impl PeriodFile {
    pub fn to_sequence(&self) -> Result<PeriodSequence, IoError> {
        let coeffs = self.alpha.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?;
        Ok(PeriodSequence::new(coeffs, self.provenance.unwrap_or(Provenance::Supplied)))
    }
}

pub fn period_to_json(p: &PeriodSequence) -> String {
    to_canonical(&PeriodFile::from(p))
}

pub fn period_from_json(s: &str) -> Result<PeriodSequence, IoError> {
    serde_json::from_str::<PeriodFile>(s)?.to_sequence()
}

/// A complete intersection as stored on disk: ambient label, its fan, and the bundle classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleFile {
    pub ambient: String,
    pub fan: Fan,
    pub bundles: Vec<IVec>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog;
    use proptest::prelude::*;

    #[test]
    fn fan_round_trip() {
        let f = catalog("P1xP3").unwrap();
        let s = fan_to_json(&f);
        assert!(s.starts_with("{\"rays\":[[1,0,0,0],"));
        assert!(s.contains("\"cones\":"));
        let g = fan_from_json(&s).unwrap();
        assert_eq!(f, g);
        assert_eq!(fan_to_json(&g), s);
    }

    #[test]
    fn operator_ints_and_strings() {
        let big = "123456789012345678901234567890";
        let text = format!("{{\"order\":1,\"polys\":[[0,\"{big}\"],[\"2\"]]}}");
        let l = operator_from_json(&text).unwrap();
        assert_eq!(l.polys()[0][1], BigInt::from_str(big).unwrap());
        let out = operator_to_json(&l);
        assert_eq!(out, format!("{{\"order\":1,\"polys\":[[0,\"{big}\"],[2]]}}\n"));
        assert_eq!(operator_from_json(&out).unwrap(), l);
        assert!(operator_from_json("{\"order\":2,\"polys\":[[1],[1]]}").is_err());
        assert!(operator_from_json("{\"order\":0,\"polys\":[[\"x\"]]}").is_err());
    }

    #[test]
    fn period_format() {
        let p = PeriodSequence::new(
            vec![BigRational::from_integer(1.into()), BigRational::new((-3).into(), 4.into())],
            Provenance::DirectExpansion,
        );
        let s = period_to_json(&p);
        assert_eq!(s, "{\"alpha\":[\"1\",\"-3/4\"],\"provenance\":\"direct-expansion\"}\n");
        let q = period_from_json(&s).unwrap();
        assert_eq!(q, p);
        assert_eq!(q.provenance, Provenance::DirectExpansion);
        let bare = period_from_json("{\"alpha\":[\"2\",\"6/4\"]}").unwrap();
        assert_eq!(bare.coeffs[1], BigRational::new(3.into(), 2.into()));
        assert_eq!(bare.provenance, Provenance::Supplied);
        assert!(matches!(period_from_json("{\"alpha\":[\"1/0\"]}"), Err(IoError::ZeroDenominator)));
    }

    #[test]
    fn laurent_format() {
        let f = LaurentPolynomial::from_int_terms(2, &[(vec![-1, 0], 3), (vec![0, 2], -1)]);
        let s = laurent_to_json(&f);
        assert_eq!(s, "[{\"exp\":[-1,0],\"num\":\"3\",\"den\":\"1\"},{\"exp\":[0,2],\"num\":\"-1\",\"den\":\"1\"}]\n");
        assert_eq!(laurent_from_json(&s).unwrap(), f);
        assert!(matches!(
            laurent_from_json("[{\"exp\":[1],\"num\":\"1\",\"den\":\"1\"},{\"exp\":[1,1],\"num\":\"1\",\"den\":\"1\"}]"),
            Err(IoError::RaggedExponents)
        ));
    }

    proptest! {
        #[test]
        fn laurent_round_trip(terms in prop::collection::vec((prop::collection::vec(-4i64..5, 3), -50i64..50, 1i64..9), 0..8)) {
            let f = LaurentPolynomial::from_terms(
                3,
                terms.into_iter().map(|(e, n, d)| (e, BigRational::new(n.into(), d.into()))),
            );
            let s = laurent_to_json(&f);
            let g = laurent_from_terms(&serde_json::from_str::<Vec<LaurentTerm>>(&s).unwrap(), 3).unwrap();
            prop_assert_eq!(&g, &f);
            prop_assert_eq!(laurent_to_json(&g), s);
        }

        #[test]
        fn operator_round_trip(polys in prop::collection::vec(prop::collection::vec(any::<i64>(), 1..4), 1..4), hi in any::<bool>()) {
            let mut polys: Vec<Vec<BigInt>> = polys.into_iter().map(|p| p.into_iter().map(BigInt::from).collect()).collect();
            if hi {
                polys.last_mut().unwrap().push(BigInt::from(u64::MAX) * 7);
            }
            if let Ok(l) = DiffOperator::new(polys) {
                let s = operator_to_json(&l);
                let m = operator_from_json(&s).unwrap();
                prop_assert_eq!(&m, &l);
                prop_assert_eq!(operator_to_json(&m), s);
            }
        }
    }
}
