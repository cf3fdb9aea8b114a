//! JSON wire formats for algebras, elements, states, sum elements, and
//! witnesses.
//!
//! Matrices serialize as `{"blocks": [[[re, im], …], …]}` with one row-major
//! entry list per block; algebras as `{"block_sizes": [...], "label": "..."}`.
//! Element and state objects carry their algebra either inline or as a label
//! resolved against a registry. Numbers round-trip exactly (shortest
//! representation that re-parses to the same double).

use crate::algebra::{AlgElement, FdAlgebra};
use crate::linalg::CMat;
use crate::opsys::{CompatiblePair, MarginalCertificate, MonogamyWitness, SumElement};
use crate::states::State;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("json: {0}")]
    Json(String),
    #[error("unknown algebra label '{0}' (provide it inline or register it)")]
    UnknownAlgebra(String),
    #[error("malformed payload: {0}")]
    Malformed(String),
}

impl From<serde_json::Error> for WireError {
    fn from(e: serde_json::Error) -> Self {
        WireError::Json(e.to_string())
    }
}

/// Resolves algebra labels appearing in payloads.
#[derive(Debug, Default, Clone)]
pub struct AlgebraRegistry {
    by_label: BTreeMap<String, FdAlgebra>,
}

impl AlgebraRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, alg: &FdAlgebra) {
        self.by_label.insert(alg.label().to_string(), alg.clone());
    }

    pub fn resolve(&self, label: &str) -> Result<FdAlgebra, WireError> {
        self.by_label
            .get(label)
            .cloned()
            .ok_or_else(|| WireError::UnknownAlgebra(label.to_string()))
    }
}

#[derive(Serialize, Deserialize, Clone)]
pub struct AlgebraDto {
    pub block_sizes: Vec<usize>,
    pub label: String,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(untagged)]
pub enum AlgebraRef {
    Label(String),
    Inline(AlgebraDto),
}

pub fn algebra_to_dto(a: &FdAlgebra) -> AlgebraDto {
    AlgebraDto {
        block_sizes: a.block_sizes().to_vec(),
        label: a.label().to_string(),
    }
}

pub fn algebra_from_dto(dto: &AlgebraDto) -> Result<FdAlgebra, WireError> {
    FdAlgebra::with_label(&dto.block_sizes, &dto.label)
        .map_err(|e| WireError::Malformed(e.to_string()))
}

fn resolve_ref(r: &AlgebraRef, reg: &AlgebraRegistry) -> Result<FdAlgebra, WireError> {
    match r {
        AlgebraRef::Label(l) => reg.resolve(l),
        AlgebraRef::Inline(dto) => algebra_from_dto(dto),
    }
}

fn blocks_to_wire(blocks: &[CMat]) -> Vec<Vec<[f64; 2]>> {
    blocks
        .iter()
        .map(|b| {
            b.row_iter()
                .flat_map(|r| r.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
                .collect()
        })
        .collect()
}

fn blocks_from_wire(raw: &[Vec<[f64; 2]>], dims: &[usize]) -> Result<Vec<CMat>, WireError> {
    if raw.len() != dims.len() {
        return Err(WireError::Malformed(format!(
            "expected {} blocks, got {}",
            dims.len(),
            raw.len()
        )));
    }
    raw.iter()
        .zip(dims)
        .map(|(entries, &d)| {
            if entries.len() != d * d {
                return Err(WireError::Malformed(format!(
                    "block must have {} entries, got {}",
                    d * d,
                    entries.len()
                )));
            }
            Ok(CMat::from_fn(d, d, |r, c| {
                let [re, im] = entries[r * d + c];
                Complex64::new(re, im)
            }))
        })
        .collect()
}

#[derive(Serialize, Deserialize, Clone)]
pub struct ElementDto {
    pub algebra: AlgebraRef,
    pub level: usize,
    pub blocks: Vec<Vec<[f64; 2]>>,
}

pub fn element_to_dto(x: &AlgElement) -> ElementDto {
    ElementDto {
        algebra: AlgebraRef::Inline(algebra_to_dto(x.algebra())),
        level: x.level(),
        blocks: blocks_to_wire(x.blocks()),
    }
}

pub fn element_from_dto(dto: &ElementDto, reg: &AlgebraRegistry) -> Result<AlgElement, WireError> {
    let alg = resolve_ref(&dto.algebra, reg)?;
    let dims: Vec<usize> = alg.block_sizes().iter().map(|&n| dto.level * n).collect();
    let blocks = blocks_from_wire(&dto.blocks, &dims)?;
    AlgElement::from_blocks(&alg, dto.level, blocks).map_err(|e| WireError::Malformed(e.to_string()))
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(untagged)]
pub enum AlgebraRefList {
    One(AlgebraRef),
    Many(Vec<AlgebraRef>),
}

#[derive(Serialize, Deserialize, Clone)]
pub struct StateDto {
    pub algebra: AlgebraRefList,
    pub level: usize,
    pub blocks: Vec<Vec<[f64; 2]>>,
}

pub fn state_to_dto(s: &State) -> StateDto {
    let refs: Vec<AlgebraRef> = s
        .factors()
        .iter()
        .map(|f| AlgebraRef::Inline(algebra_to_dto(f)))
        .collect();
    let algebra = if refs.len() == 1 {
        AlgebraRefList::One(refs.into_iter().next().unwrap())
    } else {
        AlgebraRefList::Many(refs)
    };
    StateDto {
        algebra,
        level: s.level(),
        blocks: blocks_to_wire(s.blocks()),
    }
}

pub fn state_from_dto(dto: &StateDto, reg: &AlgebraRegistry) -> Result<State, WireError> {
    let factors: Vec<FdAlgebra> = match &dto.algebra {
        AlgebraRefList::One(r) => vec![resolve_ref(r, reg)?],
        AlgebraRefList::Many(rs) => rs
            .iter()
            .map(|r| resolve_ref(r, reg))
            .collect::<Result<_, _>>()?,
    };
    let dims = State::block_dims(&factors, dto.level);
    let blocks = blocks_from_wire(&dto.blocks, &dims)?;
    State::new(&factors, dto.level, blocks).map_err(|e| WireError::Malformed(e.to_string()))
}

#[derive(Serialize, Deserialize, Clone)]
pub struct SumElementDto {
    pub level: usize,
    pub a: ElementDto,
    pub b: ElementDto,
}

pub fn sum_element_to_dto(x: &SumElement) -> SumElementDto {
    SumElementDto {
        level: x.level(),
        a: element_to_dto(x.a()),
        b: element_to_dto(x.b()),
    }
}

pub fn sum_element_from_dto(
    dto: &SumElementDto,
    reg: &AlgebraRegistry,
) -> Result<SumElement, WireError> {
    let a = element_from_dto(&dto.a, reg)?;
    let b = element_from_dto(&dto.b, reg)?;
    if a.level() != dto.level || b.level() != dto.level {
        return Err(WireError::Malformed("component level disagrees".into()));
    }
    SumElement::new(a, b).map_err(|e| WireError::Malformed(e.to_string()))
}

#[derive(Serialize, Deserialize, Clone)]
pub struct CompatiblePairDto {
    pub alpha: StateDto,
    pub beta: StateDto,
    pub marginal_gap: f64,
}

pub fn pair_to_dto(p: &CompatiblePair) -> CompatiblePairDto {
    CompatiblePairDto {
        alpha: state_to_dto(&p.alpha),
        beta: state_to_dto(&p.beta),
        marginal_gap: p.marginal_gap,
    }
}

pub fn pair_from_dto(dto: &CompatiblePairDto, reg: &AlgebraRegistry) -> Result<CompatiblePair, WireError> {
    let alpha = state_from_dto(&dto.alpha, reg)?;
    let beta = state_from_dto(&dto.beta, reg)?;
    CompatiblePair::new(alpha, beta).map_err(|e| WireError::Malformed(e.to_string()))
}

#[derive(Serialize, Deserialize, Clone)]
pub struct MarginalCertificateDto {
    pub z_alpha: ElementDto,
    pub z_beta: ElementDto,
    pub violation: f64,
}

pub fn marginal_cert_to_dto(c: &MarginalCertificate) -> MarginalCertificateDto {
    MarginalCertificateDto {
        z_alpha: element_to_dto(&c.z_alpha),
        z_beta: element_to_dto(&c.z_beta),
        violation: c.violation,
    }
}

pub fn marginal_cert_from_dto(
    dto: &MarginalCertificateDto,
    reg: &AlgebraRegistry,
) -> Result<MarginalCertificate, WireError> {
    Ok(MarginalCertificate {
        z_alpha: element_from_dto(&dto.z_alpha, reg)?,
        z_beta: element_from_dto(&dto.z_beta, reg)?,
        violation: dto.violation,
    })
}

/// Full witness payload with everything needed for offline re-verification.
#[derive(Serialize, Deserialize, Clone)]
pub struct MonogamyWitnessDto {
    pub alpha: StateDto,
    pub beta: StateDto,
    pub marginal_gap: f64,
    pub certificate: MarginalCertificateDto,
    pub separating: SumElementDto,
    pub value: f64,
    pub coproduct_margin: f64,
    pub witness_pair: CompatiblePairDto,
    pub pair_value: f64,
}

pub fn witness_to_dto(w: &MonogamyWitness) -> MonogamyWitnessDto {
    MonogamyWitnessDto {
        alpha: state_to_dto(&w.alpha),
        beta: state_to_dto(&w.beta),
        marginal_gap: w.marginal_gap,
        certificate: marginal_cert_to_dto(&w.certificate),
        separating: sum_element_to_dto(&w.separating),
        value: w.value,
        coproduct_margin: w.coproduct_margin,
        witness_pair: pair_to_dto(&w.witness_pair),
        pair_value: w.pair_value,
    }
}

pub fn witness_from_dto(
    dto: &MonogamyWitnessDto,
    reg: &AlgebraRegistry,
) -> Result<MonogamyWitness, WireError> {
    Ok(MonogamyWitness {
        alpha: state_from_dto(&dto.alpha, reg)?,
        beta: state_from_dto(&dto.beta, reg)?,
        marginal_gap: dto.marginal_gap,
        certificate: marginal_cert_from_dto(&dto.certificate, reg)?,
        separating: sum_element_from_dto(&dto.separating, reg)?,
        value: dto.value,
        coproduct_margin: dto.coproduct_margin,
        witness_pair: pair_from_dto(&dto.witness_pair, reg)?,
        pair_value: dto.pair_value,
    })
}

pub fn to_json_pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn element_roundtrip_is_exact() {
        let mut rng = ChaCha12Rng::seed_from_u64(30);
        let alg = FdAlgebra::new(&[2, 3]).unwrap();
        let x = crate::sample::ginibre_element(&alg, 2, &mut rng);
        let json = serde_json::to_string(&element_to_dto(&x)).unwrap();
        let dto: ElementDto = serde_json::from_str(&json).unwrap();
        let back = element_from_dto(&dto, &AlgebraRegistry::new()).unwrap();
        for (a, b) in x.blocks().iter().zip(back.blocks()) {
            assert_eq!(a, b, "round trip must be exact");
        }
    }

    #[test]
    fn state_roundtrip_is_exact() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let m2 = FdAlgebra::full(2);
        let c2 = FdAlgebra::new(&[1, 1]).unwrap();
        let s = crate::sample::random_state(&[m2, c2], 2, &mut rng);
        let json = serde_json::to_string(&state_to_dto(&s)).unwrap();
        let dto: StateDto = serde_json::from_str(&json).unwrap();
        let back = state_from_dto(&dto, &AlgebraRegistry::new()).unwrap();
        for (a, b) in s.blocks().iter().zip(back.blocks()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn label_reference_resolves_through_registry() {
        let alg = FdAlgebra::full(2);
        let mut reg = AlgebraRegistry::new();
        reg.register(&alg);
        let dto = ElementDto {
            algebra: AlgebraRef::Label("M2".into()),
            level: 1,
            blocks: vec![vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]],
        };
        let x = element_from_dto(&dto, &reg).unwrap();
        assert_eq!(x.algebra().label(), "M2");
        assert!(matches!(
            element_from_dto(
                &ElementDto {
                    algebra: AlgebraRef::Label("nope".into()),
                    ..dto
                },
                &reg
            ),
            Err(WireError::UnknownAlgebra(_))
        ));
    }

    proptest! {
        #[test]
        fn doubles_roundtrip_exactly(re in proptest::num::f64::NORMAL, im in proptest::num::f64::NORMAL) {
            let alg = FdAlgebra::new(&[1]).unwrap();
            let x = AlgElement::from_blocks(
                &alg,
                1,
                vec![CMat::from_fn(1, 1, |_, _| Complex64::new(re, im))],
            )
            .unwrap();
            let json = serde_json::to_string(&element_to_dto(&x)).unwrap();
            let dto: ElementDto = serde_json::from_str(&json).unwrap();
            let back = element_from_dto(&dto, &AlgebraRegistry::new()).unwrap();
            prop_assert_eq!(back.blocks()[0][(0, 0)], Complex64::new(re, im));
        }
    }
}
