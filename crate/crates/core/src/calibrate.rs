//! Temperature fitting by NLL minimization, and label-smoothed targets.
//!
//! The fitter works in `log τ`: a coarse log-spaced grid over
//! `[tau_min, tau_max]` that always contains `τ = 1`, followed by
//! golden-section refinement inside the bracket around the best grid point.
//! A refined point replaces the grid optimum only when strictly better, so the
//! result never scores worse than `τ = 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::Matcher;
use crate::prediction_log::{ModelKind, PredictionRecord, SpanLogitRecord};
use crate::scoring::{generative_logits, TemperatureParams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitConfig {
    pub tau_min: f64,
    pub tau_max: f64,
    /// Number of log-spaced grid points (τ = 1 is added if absent).
    pub grid: usize,
    /// Golden-section stopping width in log τ.
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            tau_min: 0.05,
            tau_max: 50.0,
            grid: 50,
            tolerance: 1e-4,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_min > 0.0
            && self.tau_min < 1.0
            && self.tau_max > 1.0
            && self.tau_max.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "need 0 < tau_min < 1 < tau_max, got [{}, {}]",
                self.tau_min, self.tau_max
            )));
        }
        if self.grid < 3 {
            return Err(Error::InvalidConfig("grid needs at least 3 points".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Ascending log τ grid including 0.
    fn log_grid(&self) -> Vec<f64> {
        let lo = self.tau_min.ln();
        let hi = self.tau_max.ln();
        let step = (hi - lo) / (self.grid - 1) as f64;
        let mut grid: Vec<f64> = (0..self.grid).map(|i| lo + step * i as f64).collect();
        grid[self.grid - 1] = hi;
        if !grid.contains(&0.0) {
            grid.push(0.0);
            grid.sort_by(f64::total_cmp);
        }
        grid
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Position {
    Start,
    End,
}

impl Position {
    fn name(self) -> &'static str {
        match self {
            Position::Start => "start",
            Position::End => "end",
        }
    }
}

/// `-log softmax(logits / tau)[gold]`, accurate for tiny losses.
pub fn nll_single(logits: &[f64], gold: usize, tau: f64) -> f64 {
    let zg = logits[gold];
    let max = logits.iter().map(|z| (z - zg) / tau).fold(0.0f64, f64::max);
    if max <= 0.0 {
        let rest: f64 = logits
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != gold)
            .map(|(_, z)| ((z - zg) / tau).exp())
            .sum();
        rest.ln_1p()
    } else {
        let total: f64 = logits.iter().map(|z| ((z - zg) / tau - max).exp()).sum();
        max + total.ln()
    }
}

fn position_data(rec: &SpanLogitRecord, which: Position) -> Result<(&[f64], usize)> {
    let (logits, gold) = match which {
        Position::Start => (&rec.start_logits, rec.gold_start),
        Position::End => (&rec.end_logits, rec.gold_end),
    };
    let gold = gold.ok_or_else(|| Error::MissingGold {
        qid: rec.qid.clone(),
        which: which.name(),
    })?;
    if gold >= logits.len() {
        return Err(Error::OutOfRange {
            index: gold,
            len: logits.len(),
        });
    }
    Ok((logits, gold))
}

/// Mean NLL of the gold start (or end) position over all records.
pub fn nll_position(recs: &[SpanLogitRecord], which: Position, tau: f64) -> Result<f64> {
    if recs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut total = 0.0;
    for rec in recs {
        let (logits, gold) = position_data(rec, which)?;
        total += nll_single(logits, gold, tau);
    }
    Ok(total / recs.len() as f64)
}

/// Minimizes a one-dimensional objective over `τ`.
pub fn fit_single_temperature<F>(objective: F, cfg: &FitConfig) -> Result<TemperatureParams>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    let grid = cfg.log_grid();
    let values: Vec<f64> = grid.iter().map(|&u| objective(u.exp())).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Fit(format!(
            "objective is not finite at tau = {}",
            grid[i].exp()
        )));
    }
    let unit = grid
        .iter()
        .position(|&u| u == 0.0)
        .expect("grid contains log 1");
    let before = values[unit];

    let mut best = 0;
    for i in 1..grid.len() {
        let better = values[i] < values[best]
            || (values[i] == values[best] && grid[i].abs() < grid[best].abs());
        if better {
            best = i;
        }
    }

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let f = |u: f64| {
        let v = objective(u.exp());
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let (mut log_tau, mut after) = (grid[best], values[best]);
    let (u, fu) = golden_section(&f, lo, hi, cfg.tolerance);
    if fu < after {
        log_tau = u;
        after = fu;
    }

    let tau = if log_tau == grid[0] {
        cfg.tau_min
    } else if log_tau == grid[grid.len() - 1] {
        cfg.tau_max
    } else {
        log_tau.exp()
    };
    let mut params = TemperatureParams::single(tau);
    params.fit_nll_before = Some(before);
    params.fit_nll_after = Some(after);
    params.hit_bound = tau == cfg.tau_min || tau == cfg.tau_max;
    Ok(params)
}

/// Golden-section search for a minimum on `[a, b]`; returns the best point
/// visited and its value.
fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = (a + b) / 2.0;
    let fm = f(mid);
    [(c, fc), (d, fd), (mid, fm)]
        .into_iter()
        .fold((mid, fm), |acc, p| if p.1 < acc.1 { p } else { acc })
}

/// Fits independent temperatures for start and end logits.
pub fn fit_dual_temperature(
    recs: &[SpanLogitRecord],
    cfg: &FitConfig,
) -> Result<TemperatureParams> {
    if recs.is_empty() {
        return Err(Error::EmptyInput);
    }
    for rec in recs {
        position_data(rec, Position::Start)?;
        position_data(rec, Position::End)?;
    }
    let objective =
        |which| move |tau: f64| nll_position(recs, which, tau).expect("gold positions checked");
    let start = fit_single_temperature(objective(Position::Start), cfg)?;
    let end = fit_single_temperature(objective(Position::End), cfg)?;
    if start.hit_bound || end.hit_bound {
        log::warn!(
            "temperature fit reached a search bound (tau_start = {}, tau_end = {})",
            start.tau.unwrap_or(f64::NAN),
            end.tau.unwrap_or(f64::NAN)
        );
    }

    let sum = |a: Option<f64>, b: Option<f64>| Some(a? + b?);
    let mut params = TemperatureParams::dual(
        start.tau.expect("single fit sets tau"),
        end.tau.expect("single fit sets tau"),
    );
    params.fit_nll_before = sum(start.fit_nll_before, end.fit_nll_before);
    params.fit_nll_after = sum(start.fit_nll_after, end.fit_nll_after);
    params.hit_bound = start.hit_bound || end.hit_bound;
    Ok(params)
}

/// Per-record data for the generative temperature objective.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GenerativeFitSet {
    /// `(log p̂ over candidates, gold candidate index)` for usable records.
    pub items: Vec<(Vec<f64>, usize)>,
    /// Records without any candidate matching a gold answer.
    pub excluded: usize,
}

impl GenerativeFitSet {
    pub fn build(recs: &[PredictionRecord], matcher: &Matcher) -> Result<Self> {
        let mut set = GenerativeFitSet::default();
        for rec in recs {
            if rec.model_kind != ModelKind::Generative {
                return Err(Error::InvalidConfig(format!(
                    "record `{}` is not generative",
                    rec.qid
                )));
            }
            let gold = rec
                .candidates
                .iter()
                .position(|c| matcher.matches(&c.text, &rec.gold_answers, &rec.language));
            match gold {
                Some(g) => set.items.push((generative_logits(&rec.candidates)?, g)),
                None => set.excluded += 1,
            }
        }
        Ok(set)
    }

    pub fn nll(&self, tau: f64) -> f64 {
        let total: f64 = self
            .items
            .iter()
            .map(|(logits, gold)| nll_single(logits, *gold, tau))
            .sum();
        total / self.items.len() as f64
    }
}

/// Fits one temperature on `log p̂` logits; the gold class is the first
/// candidate matching a gold answer and unmatched records are skipped.
pub fn fit_generative_temperature(
    recs: &[PredictionRecord],
    matcher: &Matcher,
    cfg: &FitConfig,
) -> Result<TemperatureParams> {
    let set = GenerativeFitSet::build(recs, matcher)?;
    if set.items.is_empty() {
        return Err(Error::Fit(format!(
            "no usable records: all {} records lack a candidate matching a gold answer",
            set.excluded
        )));
    }
    let mut params = fit_single_temperature(|tau| set.nll(tau), cfg)?;
    params.excluded_count = Some(set.excluded);
    if params.hit_bound {
        log::warn!(
            "temperature fit reached a search bound (tau = {:?})",
            params.tau
        );
    }
    Ok(params)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothingConfig {
    pub alpha_start: f64,
    pub alpha_end: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            alpha_start: 0.1,
            alpha_end: 0.1,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )))
    }
}

/// `(1 - α)·onehot(gold) + α/C` over `classes` entries.
pub fn smooth_targets(classes: usize, gold: usize, alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if gold >= classes {
        return Err(Error::OutOfRange {
            index: gold,
            len: classes,
        });
    }
    let share = alpha / classes as f64;
    let mut targets = vec![share; classes];
    targets[gold] = (1.0 - alpha) + share;
    Ok(targets)
}

/// Smoothed start/end targets for one record over the full token vector;
/// the uniform mass goes to context tokens only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothedTargets {
    pub qid: String,
    pub start_targets: Vec<f64>,
    pub end_targets: Vec<f64>,
}

pub fn smooth_span_targets(
    rec: &SpanLogitRecord,
    cfg: &SmoothingConfig,
) -> Result<SmoothedTargets> {
    let context: Vec<usize> = (0..rec.len()).filter(|&i| rec.context_mask[i]).collect();
    let expand = |gold: usize, alpha: f64| -> Result<Vec<f64>> {
        let pos = context
            .iter()
            .position(|&i| i == gold)
            .ok_or(Error::OutOfRange {
                index: gold,
                len: rec.len(),
            })?;
        let compact = smooth_targets(context.len(), pos, alpha)?;
        let mut full = vec![0.0; rec.len()];
        for (&i, v) in context.iter().zip(compact) {
            full[i] = v;
        }
        Ok(full)
    };
    let (_, start) = position_data(rec, Position::Start)?;
    let (_, end) = position_data(rec, Position::End)?;
    Ok(SmoothedTargets {
        qid: rec.qid.clone(),
        start_targets: expand(start, cfg.alpha_start)?,
        end_targets: expand(end, cfg.alpha_end)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span_rec(start: Vec<f64>, gold_start: usize, gold_end: usize) -> SpanLogitRecord {
        let n = start.len();
        SpanLogitRecord {
            qid: format!("q{gold_start}"),
            language: "en".into(),
            end_logits: start.clone(),
            start_logits: start,
            context_mask: vec![true; n],
            token_offsets: (0..n).map(|i| (i, i + 1)).collect(),
            context_text: "x".repeat(n),
            gold_start: Some(gold_start),
            gold_end: Some(gold_end),
        }
    }

    fn closed_form_family() -> Vec<SpanLogitRecord> {
        vec![
            span_rec(vec![2.0, 0.0], 0, 0),
            span_rec(vec![2.0, 0.0], 0, 0),
            span_rec(vec![2.0, 0.0], 1, 1),
        ]
    }

    #[test]
    fn nll_examples() {
        let uniform = vec![span_rec(vec![0.7; 5], 3, 3)];
        for tau in [0.1, 1.0, 7.0] {
            let v = nll_position(&uniform, Position::Start, tau).unwrap();
            assert!((v - 5f64.ln()).abs() < 1e-12);
        }
        let rec = vec![span_rec(vec![2.0, 0.0], 0, 0)];
        let v = nll_position(&rec, Position::Start, 1.0).unwrap();
        assert!((v - (1.0 + (-2.0f64).exp()).ln()).abs() < 1e-15);
        assert!((v - 0.126_928_011).abs() < 1e-9);
        let v = nll_position(&rec, Position::Start, 1e6).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-5);
    }

    #[test]
    fn nll_matches_naive_formula() {
        let logits = [1.3, -0.4, 2.2, 0.0];
        for gold in 0..4 {
            for tau in [0.3, 1.0, 4.0] {
                let scaled: Vec<f64> = logits.iter().map(|z| z / tau).collect();
                let denom: f64 = scaled.iter().map(|s| s.exp()).sum();
                let naive = -(scaled[gold].exp() / denom).ln();
                assert!((nll_single(&logits, gold, tau) - naive).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn missing_gold_names_record() {
        let mut rec = span_rec(vec![1.0, 0.0], 0, 0);
        rec.gold_end = None;
        rec.qid = "missing".into();
        match nll_position(&[rec], Position::End, 1.0) {
            Err(Error::MissingGold { qid, which }) => {
                assert_eq!(qid, "missing");
                assert_eq!(which, "end");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn closed_form_fit() {
        let recs = closed_form_family();
        let params = fit_single_temperature(
            |t| nll_position(&recs, Position::Start, t).unwrap(),
            &FitConfig::default(),
        )
        .unwrap();
        let tau = params.tau.unwrap();
        let expected = 2.0 / 2f64.ln();
        assert!((tau - expected).abs() < 5e-3, "tau = {tau}");
        let nll_star = (2.0 * 1.5f64.ln() + 3f64.ln()) / 3.0;
        assert!((params.fit_nll_after.unwrap() - nll_star).abs() < 1e-6);
        assert!(params.fit_nll_after <= params.fit_nll_before);
        assert!(!params.hit_bound);
    }

    #[test]
    fn confident_and_correct_hits_lower_bound() {
        let recs = vec![
            span_rec(vec![3.0, 0.0, -1.0], 0, 0),
            span_rec(vec![0.0, 2.0], 1, 1),
        ];
        let cfg = FitConfig::default();
        let params = fit_dual_temperature(&recs, &cfg).unwrap();
        assert_eq!(params.tau_start, Some(cfg.tau_min));
        assert_eq!(params.tau_end, Some(cfg.tau_min));
        assert!(params.hit_bound);
    }

    #[test]
    fn constant_objective_keeps_unit_temperature() {
        let params = fit_single_temperature(|_| 0.5, &FitConfig::default()).unwrap();
        assert_eq!(params.tau, Some(1.0));
        assert!(!params.hit_bound);
    }

    #[test]
    fn underconfident_family_sharpens() {
        // Gold always the top logit but by a small margin, with a few
        // strong disagreements: optimum below 1 when accuracy outruns confidence.
        let mut recs: Vec<_> = (0..9).map(|_| span_rec(vec![0.2, 0.0], 0, 0)).collect();
        recs.push(span_rec(vec![0.2, 0.0], 1, 1));
        let params = fit_dual_temperature(&recs, &FitConfig::default()).unwrap();
        assert!(params.tau_start.unwrap() < 1.0);
    }

    #[test]
    fn nonfinite_objective_is_rejected() {
        let err = fit_single_temperature(
            |t| if t > 10.0 { f64::NAN } else { t },
            &FitConfig::default(),
        );
        assert!(matches!(err, Err(Error::Fit(_))));
    }

    #[test]
    fn invalid_fit_config() {
        for cfg in [
            FitConfig {
                tau_min: 1.5,
                ..Default::default()
            },
            FitConfig {
                tau_max: 0.9,
                ..Default::default()
            },
            FitConfig {
                grid: 2,
                ..Default::default()
            },
        ] {
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn dual_fit_needs_records() {
        assert!(fit_dual_temperature(&[], &FitConfig::default()).is_err());
    }

    #[test]
    fn smoothing_examples() {
        assert_eq!(
            smooth_targets(4, 2, 0.1).unwrap(),
            vec![0.025, 0.025, 0.925, 0.025]
        );
        assert_eq!(smooth_targets(3, 1, 0.0).unwrap(), vec![0.0, 1.0, 0.0]);
        assert_eq!(smooth_targets(4, 0, 1.0).unwrap(), vec![0.25; 4]);
        assert!(matches!(
            smooth_targets(4, 4, 0.1),
            Err(Error::OutOfRange { .. })
        ));
        assert!(smooth_targets(4, 1, 1.5).is_err());
    }

    #[test]
    fn span_targets_spread_over_context_only() {
        let mut rec = span_rec(vec![0.0; 5], 2, 3);
        rec.context_mask = vec![false, true, true, true, true];
        let t = smooth_span_targets(&rec, &SmoothingConfig::default()).unwrap();
        assert_eq!(t.start_targets[0], 0.0);
        assert!((t.start_targets[2] - (0.9 + 0.025)).abs() < 1e-15);
        assert!((t.end_targets.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((t.end_targets[3] - 0.925).abs() < 1e-15);
    }
}
