//! End-to-end processing of complete intersections into records.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{laurent_terms, LaurentTerm, OperatorFile, PeriodFile};
use crate::mirror::{build_mirror, valid_choices, MirrorError, PrzyjalkowskiChoice};
use crate::monodromy::{ramification, MonodromyError, MonodromyReport, Precision};
use crate::periods::{bucket_id, fit_operator_within, period_coeffs_with_budget, PeriodError, DEFAULT_POINT_BUDGET};
use crate::search::{CITriple, SearchError};
use crate::toric::ToricFano;
use crate::IVec;

/// Error classes, each with its process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    Validation,
    Budget,
    Numerical,
}

impl FailureKind {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureKind::Validation => 2,
            FailureKind::Budget => 3,
            FailureKind::Numerical => 4,
        }
    }
}

pub fn classify_period(e: &PeriodError) -> FailureKind {
    match e {
        PeriodError::OutOfBudget { .. } | PeriodError::NoOperatorFound { .. } | PeriodError::TooFewForFit { .. } => {
            FailureKind::Budget
        }
        PeriodError::SingularRecursion { .. } => FailureKind::Numerical,
        _ => FailureKind::Validation,
    }
}

pub fn classify_mirror(e: &MirrorError) -> FailureKind {
    match e {
        MirrorError::Period(p) => classify_period(p),
        _ => FailureKind::Validation,
    }
}

pub fn classify_monodromy(_: &MonodromyError) -> FailureKind {
    FailureKind::Numerical
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: String,
    pub kind: FailureKind,
    pub message: String,
}

impl Failure {
    fn new(stage: &str, kind: FailureKind, e: impl std::fmt::Display) -> Self {
        Failure { stage: stage.to_string(), kind, message: e.to_string() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub terms: usize,
    pub fit: bool,
    pub max_order: usize,
    pub max_degree: usize,
    pub holdout: usize,
    pub ramify: bool,
    pub precision: Precision,
    pub point_budget: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            terms: 40,
            fit: false,
            max_order: 12,
            max_degree: 24,
            holdout: 5,
            ramify: false,
            precision: Precision::default(),
            point_budget: DEFAULT_POINT_BUDGET,
        }
    }
}

/// Everything computed for one complete intersection. Optional fields are absent when
/// the stage was not requested or an earlier stage failed; `failure` says which.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineRecord {
    pub id: String,
    pub ambient: String,
    pub bundles: Vec<IVec>,
    pub lambda: IVec,
    pub degree: Option<i64>,
    pub euler: Option<i64>,
    pub choice: Option<PrzyjalkowskiChoice>,
    pub mirror: Option<Vec<LaurentTerm>>,
    pub period: Option<PeriodFile>,
    pub bucket: Option<String>,
    pub operator: Option<OperatorFile>,
    pub monodromy: Option<MonodromyReport>,
    /// Soft outcome, such as a triple without a valid choice.
    pub note: Option<String>,
    pub failure: Option<Failure>,
}

impl PipelineRecord {
    /// Present fields agree: the ID, the bucket of the periods, the periods of the mirror
    /// (checked on the first few terms) and the operator on the periods.
    pub fn check(&self) -> Result<(), String> {
        if self.id != record_id(&self.ambient, &self.bundles) {
            return Err("id does not match ambient and bundles".into());
        }
        let seq = self.period.as_ref().map(PeriodFile::to_sequence).transpose().map_err(|e| e.to_string())?;
        if let (Some(s), Some(b)) = (&seq, &self.bucket) {
            if &bucket_id(&s.coeffs) != b {
                return Err("bucket does not match periods".into());
            }
        }
        if let (Some(s), Some(m)) = (&seq, &self.mirror) {
            let f = crate::io::laurent_from_terms(m, 0).map_err(|e| e.to_string())?;
            let k = s.len().min(8);
            let direct = crate::periods::period_coeffs(&f, k).map_err(|e| e.to_string())?;
            if direct.coeffs != s.coeffs[..k] {
                return Err("periods do not match the mirror".into());
            }
        }
        if let (Some(s), Some(o)) = (&seq, &self.operator) {
            let l = o.to_operator().map_err(|e| e.to_string())?;
            if !l.annihilates(&s.coeffs) {
                return Err("operator does not annihilate the periods".into());
            }
        }
        Ok(())
    }
}

pub fn record_id(ambient: &str, bundles: &[IVec]) -> String {
    format!("{ambient}:{}", serde_json::to_string(bundles).expect("integer arrays"))
}

/// Run every requested stage on one triple.
pub fn process(ambient: &str, t: &CITriple, cfg: &PipelineConfig) -> PipelineRecord {
    let mut r = PipelineRecord {
        id: record_id(ambient, &t.bundles),
        ambient: ambient.to_string(),
        bundles: t.bundles.clone(),
        lambda: t.lambda.clone(),
        degree: None,
        euler: None,
        choice: None,
        mirror: None,
        period: None,
        bucket: None,
        operator: None,
        monodromy: None,
        note: None,
        failure: None,
    };
    match (t.degree(), t.euler()) {
        (Ok(d), Ok(e)) => {
            r.degree = Some(d);
            r.euler = Some(e);
        }
        (Err(e), _) | (_, Err(e)) => {
            r.failure = Some(Failure::new("invariants", FailureKind::Validation, e));
            return r;
        }
    }
    let choice = match valid_choices(t, Some(1)) {
        Ok(c) => c.into_iter().next(),
        Err(e) => {
            r.failure = Some(Failure::new("mirror", classify_mirror(&e), e));
            return r;
        }
    };
    let Some(choice) = choice else {
        r.note = Some(MirrorError::NoValidChoice.to_string());
        return r;
    };
    let f = match build_mirror(t, &choice) {
        Ok(f) => f,
        Err(e) => {
            r.failure = Some(Failure::new("mirror", classify_mirror(&e), e));
            return r;
        }
    };
    r.choice = Some(choice);
    r.mirror = Some(laurent_terms(&f));
    let seq = match period_coeffs_with_budget(&f, cfg.terms, cfg.point_budget) {
        Ok(s) => s,
        Err(e) => {
            r.failure = Some(Failure::new("period", classify_period(&e), e));
            return r;
        }
    };
    r.bucket = Some(bucket_id(&seq.coeffs));
    r.period = Some(PeriodFile::from(&seq));
    if !cfg.fit {
        return r;
    }
    let fit = match fit_operator_within(&seq, cfg.max_order, cfg.max_degree, cfg.holdout) {
        Ok(f) => f,
        Err(e) => {
            r.failure = Some(Failure::new("pf-fit", classify_period(&e), e));
            return r;
        }
    };
    if fit.ambiguous {
        r.note = Some(format!("operator of order {} has a {}-dimensional solution space", fit.order, fit.nullity));
    }
    r.operator = Some(OperatorFile::from(&fit.operator));
    if !cfg.ramify {
        return r;
    }
    match ramification(&fit.operator, cfg.precision) {
        Ok(m) => r.monodromy = Some(m),
        Err(e) => r.failure = Some(Failure::new("ramify", classify_monodromy(&e), e)),
    }
    r
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub id: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub ambient: String,
    pub config: PipelineConfig,
    pub triples: usize,
    pub records_written: usize,
    pub without_choice: usize,
    pub failures: Vec<(String, Failure)>,
    pub timings: Vec<Timing>,
    pub total_seconds: f64,
}

impl Manifest {
    /// Exit code of the most severe failure kind present, or 0.
    pub fn exit_code(&self) -> i32 {
        self.failures.iter().map(|(_, f)| f.kind).min().map_or(0, FailureKind::exit_code)
    }
}

/// Enumerate triples on an ambient and process them in parallel; records come back sorted by ID.
pub fn scan(
    ambient_name: &str,
    y: &Arc<ToricFano>,
    cfg: &PipelineConfig,
) -> Result<(Vec<PipelineRecord>, Manifest), SearchError> {
    let start = Instant::now();
    let triples = crate::search::enumerate_triples(y)?;
    let mut out: Vec<(PipelineRecord, f64)> = triples
        .par_iter()
        .map(|t| {
            let s = Instant::now();
            let r = process(ambient_name, t, cfg);
            (r, s.elapsed().as_secs_f64())
        })
        .collect();
    out.sort_by(|a, b| (&a.0.bundles, &a.0.id).cmp(&(&b.0.bundles, &b.0.id)));
    let manifest = Manifest {
        ambient: ambient_name.to_string(),
        config: *cfg,
        triples: triples.len(),
        records_written: out.len(),
        without_choice: out.iter().filter(|(r, _)| r.choice.is_none() && r.failure.is_none()).count(),
        failures: out.iter().filter_map(|(r, _)| r.failure.clone().map(|f| (r.id.clone(), f))).collect(),
        timings: out.iter().map(|(r, s)| Timing { id: r.id.clone(), seconds: *s }).collect(),
        total_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((out.into_iter().map(|(r, _)| r).collect(), manifest))
}
