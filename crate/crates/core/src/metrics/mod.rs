//! Training-efficiency metrics over loss logs, loss deltas, and the
//! dependency-identification ambiguity profile of bracket corpora.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::TokenSequence;
use crate::dyck::classify_typed;
use crate::error::{Error, Result};

/// Loss log with strictly increasing steps and positive losses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossCurve {
    points: Vec<(u64, f64)>,
}

#[derive(Deserialize)]
struct LossRow {
    step: u64,
    loss: f64,
}

impl LossCurve {
    /// Sorts by step; rejects empty logs, duplicate steps and losses that are
    /// not finite and positive.
    pub fn new(mut points: Vec<(u64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("loss curve has no points"));
        }
        if let Some(&(step, loss)) = points.iter().find(|(_, l)| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::param(format!("loss at step {step} must be positive, got {loss}")));
        }
        points.sort_by_key(|&(s, _)| s);
        if let Some(w) = points.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::param(format!("duplicate step {}", w[0].0)));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(u64, f64)] {
        &self.points
    }

    /// CSV with a required `step,loss` header.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| Error::parse(1, e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["step", "loss"] {
            return Err(Error::parse(1, "expected header `step,loss`"));
        }
        let mut points = Vec::new();
        for (i, row) in reader.deserialize::<LossRow>().enumerate() {
            let row = row.map_err(|e| Error::parse(i + 2, e.to_string()))?;
            points.push((row.step, row.loss));
        }
        Self::new(points)
    }

    /// One `{"step": .., "loss": ..}` object per line; blank lines skipped.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: LossRow = serde_json::from_str(line).map_err(|e| Error::parse(i + 1, e.to_string()))?;
            points.push((row.step, row.loss));
        }
        Self::new(points)
    }

    /// jsonl when the first non-blank character is `{`, CSV otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_jsonl(text)
        } else {
            Self::from_csv(text)
        }
    }

    /// Loss at `step`, linearly interpolated between logged points.
    pub fn loss_at(&self, step: f64) -> Result<f64> {
        let (first, last) = (self.points[0], self.points[self.points.len() - 1]);
        if step < first.0 as f64 || step > last.0 as f64 {
            return Err(Error::param(format!(
                "step {step} outside the logged range {}..={}",
                first.0, last.0
            )));
        }
        let hi = self.points.partition_point(|&(s, _)| (s as f64) < step);
        let (s1, l1) = self.points[hi];
        if s1 as f64 == step || hi == 0 {
            return Ok(l1);
        }
        let (s0, l0) = self.points[hi - 1];
        Ok(l0 + (step - s0 as f64) / (s1 - s0) as f64 * (l1 - l0))
    }

    pub fn last_step(&self) -> u64 {
        self.points[self.points.len() - 1].0
    }
}

/// First step at which the loss is at or below `threshold`. With
/// `interpolate`, the crossing is placed linearly between the last point above
/// and the first point at or below the threshold.
pub fn crossing_step(curve: &LossCurve, threshold: f64, interpolate: bool) -> Option<f64> {
    let pts = curve.points();
    let hit = pts.iter().position(|&(_, l)| l <= threshold)?;
    let (s1, l1) = pts[hit];
    if !interpolate || hit == 0 {
        return Some(s1 as f64);
    }
    let (s0, l0) = pts[hit - 1];
    Some(s0 as f64 + (l0 - threshold) / (l0 - l1) * (s1 - s0) as f64)
}

/// Pretraining steps saved per pre-pretraining step.
pub fn mrs(y1: f64, y2: f64, x: u64) -> Result<f64> {
    if x == 0 {
        return Err(Error::param("MRS is undefined for x = 0"));
    }
    Ok((y1 - y2) / x as f64)
}

/// Fractional reduction in total steps to the reference loss.
pub fn efficiency_gain(y1: f64, y2: f64, x: u64) -> Result<f64> {
    if y1 == 0.0 {
        return Err(Error::param("efficiency gain is undefined for y1 = 0"));
    }
    Ok(1.0 - (y2 + x as f64) / y1)
}

/// `l_variant - l_nl`; sensitivity or selectivity depending on the variant.
pub fn loss_delta(l_variant: f64, l_nl: f64) -> f64 {
    l_variant - l_nl
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyResult {
    pub y1: f64,
    pub y2: f64,
    pub x: u64,
    pub mrs: f64,
    pub efficiency_gain: f64,
}

impl EfficiencyResult {
    pub fn compute(y1: f64, y2: f64, x: u64) -> Result<Self> {
        Ok(Self {
            y1,
            y2,
            x,
            mrs: mrs(y1, y2, x)?,
            efficiency_gain: efficiency_gain(y1, y2, x)?,
        })
    }
}

/// Baseline-versus-candidate comparison at a reference step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub y1: f64,
    /// Baseline loss at `y1`.
    pub threshold: f64,
    /// Candidate crossing step; `None` when the threshold is never reached.
    pub y2: Option<f64>,
    pub x: u64,
    pub mrs: Option<f64>,
    pub efficiency_gain: Option<f64>,
    /// The candidate reached the threshold at all.
    pub reached: bool,
    /// The candidate reached the threshold strictly before `y1`.
    pub improved: bool,
}

pub fn compare(baseline: &LossCurve, candidate: &LossCurve, y1: f64, x: u64, interpolate: bool) -> Result<Comparison> {
    let threshold = baseline.loss_at(y1)?;
    let y2 = crossing_step(candidate, threshold, interpolate);
    let result = y2.map(|y2| EfficiencyResult::compute(y1, y2, x)).transpose()?;
    Ok(Comparison {
        y1,
        threshold,
        y2,
        x,
        mrs: result.map(|r| r.mrs),
        efficiency_gain: result.map(|r| r.efficiency_gain),
        reached: y2.is_some(),
        improved: y2.is_some_and(|y2| y2 < y1),
    })
}

/// Version label of the ambiguity operationalization.
pub const AMBIGUITY_DEFINITION: &str = "same-type-open-count-v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmbiguityProfile {
    pub definition: &'static str,
    /// `(close index, unmatched same-type opens at that close)`.
    pub per_close_counts: Vec<(usize, usize)>,
    /// Mean count; 0 when there are no closes.
    pub mean: f64,
    pub max: usize,
    /// First unbalanced position, when the projections are not balanced.
    pub partial: Option<usize>,
}

/// Dependency brackets are `(i` / `)i`; bare `(` / `)` form their own type.
/// Every other token is ignored.
fn dependency_bracket(tok: &str) -> Option<(bool, Option<u32>)> {
    match tok {
        "(" => Some((true, None)),
        ")" => Some((false, None)),
        _ => classify_typed(tok, '(', ')').map(|(open, ty)| (open, Some(ty))),
    }
}

/// Candidate-antecedent count at every dependency close.
pub fn ambiguity_profile(seq: &TokenSequence) -> AmbiguityProfile {
    let mut open: BTreeMap<Option<u32>, Vec<usize>> = BTreeMap::new();
    let mut counts = Vec::new();
    let mut partial = None;
    for (i, tok) in seq.iter().enumerate() {
        let Some((is_open, ty)) = dependency_bracket(tok) else { continue };
        let stack = open.entry(ty).or_default();
        if is_open {
            stack.push(i);
        } else {
            counts.push((i, stack.len()));
            if stack.pop().is_none() && partial.is_none() {
                partial = Some(i);
            }
        }
    }
    if partial.is_none() {
        partial = open.values().filter_map(|s| s.first().copied()).min();
    }
    let max = counts.iter().map(|&(_, c)| c).max().unwrap_or(0);
    let mean = if counts.is_empty() {
        0.0
    } else {
        counts.iter().map(|&(_, c)| c as f64).sum::<f64>() / counts.len() as f64
    };
    AmbiguityProfile {
        definition: AMBIGUITY_DEFINITION,
        per_close_counts: counts,
        mean,
        max,
        partial,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(points: &[(u64, f64)]) -> LossCurve {
        LossCurve::new(points.to_vec()).unwrap()
    }

    #[test]
    fn worked_example() {
        // 9245 / 500 is exactly representable after rounding to 18.49.
        assert_eq!(mrs(25000.0, 15755.0, 500).unwrap(), 18.49);
        let g = efficiency_gain(25000.0, 15755.0, 500).unwrap();
        assert!((g - 0.35).abs() <= 0.005, "{g}");
        assert!((g - 0.3498).abs() < 1e-12);
    }

    #[test]
    fn metric_edge_cases() {
        assert_eq!(mrs(25000.0, 25000.0, 500).unwrap(), 0.0);
        assert_eq!(mrs(25000.0, 26000.0, 500).unwrap(), -2.0);
        assert!(mrs(1.0, 1.0, 0).is_err());
        assert_eq!(efficiency_gain(25000.0, 25000.0, 0).unwrap(), 0.0);
        assert!((efficiency_gain(25000.0, 25000.0, 500).unwrap() + 0.02).abs() < 1e-12);
        assert!(efficiency_gain(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn loss_delta_signs() {
        assert!((loss_delta(3.9, 3.6) - 0.3).abs() < 1e-12);
        assert_eq!(loss_delta(3.6, 3.6), 0.0);
        assert!((loss_delta(3.5, 3.6) + 0.1).abs() < 1e-12);
    }

    #[test]
    fn crossing_steps() {
        let c = curve(&[(0, 5.0), (100, 3.0)]);
        assert_eq!(crossing_step(&c, 3.0, false), Some(100.0));
        assert_eq!(crossing_step(&c, 4.0, true), Some(50.0));
        assert_eq!(crossing_step(&c, 4.0, false), Some(100.0));
        assert_eq!(crossing_step(&c, 2.0, true), None);
        assert_eq!(crossing_step(&c, 6.0, true), Some(0.0));
    }

    #[test]
    fn curve_validation() {
        assert!(LossCurve::new(vec![]).is_err());
        assert!(LossCurve::new(vec![(1, 2.0), (1, 3.0)]).is_err());
        assert!(LossCurve::new(vec![(1, 0.0)]).is_err());
        assert!(LossCurve::new(vec![(1, f64::NAN)]).is_err());
        let c = curve(&[(10, 2.0), (0, 4.0)]);
        assert_eq!(c.points(), &[(0, 4.0), (10, 2.0)]);
    }

    #[test]
    fn log_formats() {
        let csv = "step,loss\n0,5.0\n100, 3.0\n";
        let js = "{\"step\":0,\"loss\":5.0}\n\n{\"step\":100,\"loss\":3.0}\n";
        assert_eq!(LossCurve::parse(csv).unwrap(), LossCurve::parse(js).unwrap());
        assert!(LossCurve::from_csv("loss,step\n1,2\n").is_err());
        assert!(LossCurve::from_csv("step,loss\nx,2\n").is_err());
        assert!(LossCurve::from_jsonl("{\"step\":1}\n").is_err());
        assert!(LossCurve::parse("step,loss\n1,2\n1,3\n").is_err());
    }

    #[test]
    fn loss_interpolation() {
        let c = curve(&[(0, 5.0), (100, 3.0), (200, 2.0)]);
        assert_eq!(c.loss_at(100.0).unwrap(), 3.0);
        assert_eq!(c.loss_at(0.0).unwrap(), 5.0);
        assert_eq!(c.loss_at(150.0).unwrap(), 2.5);
        assert!(c.loss_at(201.0).is_err());
    }

    #[test]
    fn comparison_outcomes() {
        let base = curve(&[(0, 5.0), (25000, 3.633)]);
        let cand = curve(&[(0, 5.0), (15000, 3.7), (15755, 3.633), (25000, 3.2)]);
        let c = compare(&base, &cand, 25000.0, 500, false).unwrap();
        assert_eq!(c.mrs, Some(18.49));
        assert!(c.improved && c.reached);

        let same = compare(&base, &base, 25000.0, 500, false).unwrap();
        assert_eq!(same.mrs, Some(0.0));
        assert!(same.reached && !same.improved);

        let flat = curve(&[(0, 5.0), (25000, 4.0)]);
        let none = compare(&base, &flat, 25000.0, 500, false).unwrap();
        assert_eq!((none.y2, none.mrs, none.reached, none.improved), (None, None, false, false));
    }

    #[test]
    fn ambiguity_counts() {
        let p = ambiguity_profile(&TokenSequence::from_text("(1 )1"));
        assert_eq!(p.per_close_counts, vec![(1, 1)]);
        assert_eq!(p.mean, 1.0);
        let p = ambiguity_profile(&TokenSequence::from_text("(1 (1 )1 )1"));
        assert_eq!(p.per_close_counts, vec![(2, 2), (3, 1)]);
        assert_eq!((p.mean, p.max, p.partial), (1.5, 2, None));
        let p = ambiguity_profile(&TokenSequence::from_text("[0 (1 (2 (4 ]0 )4 )1 [0 )2 ]0"));
        assert!(p.per_close_counts.iter().all(|&(_, c)| c == 1));
        assert_eq!(p.per_close_counts.len(), 3);
    }

    #[test]
    fn ambiguity_marks_unbalanced_input() {
        assert_eq!(ambiguity_profile(&TokenSequence::from_text("(1 )2 )1")).partial, Some(1));
        assert_eq!(ambiguity_profile(&TokenSequence::from_text("( (1 )1")).partial, Some(0));
        let p = ambiguity_profile(&TokenSequence::from_text("H_C [0 ]0"));
        assert_eq!((p.mean, p.max, p.partial), (0.0, 0, None));
    }
}
