//! Interpolation constant against Carleson lower bound, per family.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::generate::Family;
use crate::report::ExperimentReport;

/// A column is bounded when its last value is at most this multiple of its midpoint value.
pub const TAIL_RATIO_BOUND: f64 = 1.5;
/// Grid resolution below which BMO proxies stay out of the slopes.
pub const MIN_NODES_PER_PEAK: f64 = 1.0;
/// Fewest distinct sweep points for a trend verdict.
pub const MIN_TREND_POINTS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Bounded,
    Diverging,
    Insufficient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    #[serde(rename = "N")]
    pub big_n: usize,
    /// `None` when the Gram matrix was singular; counted as infinite.
    pub interpolation_constant_h2: Option<f64>,
    pub rectangular_constant: Option<f64>,
    pub ratio: Option<f64>,
    /// Deepest BMO proxy; `None` when the grid does not resolve the kernel peaks.
    pub bmo: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyTrend {
    pub family: Family,
    pub n: usize,
    pub points: Vec<ScatterPoint>,
    pub interpolation_trend: Trend,
    pub rectangular_trend: Trend,
    pub interpolation_tail_ratio: Option<f64>,
    pub rectangular_tail_ratio: Option<f64>,
    pub interpolation_increasing_fraction: Option<f64>,
    pub rectangular_increasing_fraction: Option<f64>,
    /// Least-squares slope of the BMO proxy against the rectangular constant.
    pub bmo_rect_slope: Option<f64>,
    pub degenerate: bool,
    /// `interpolation-degenerate`, `both-bounded`, `degenerate-scatter` or `mixed`.
    pub flag: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub reports: usize,
    pub families: Vec<FamilyTrend>,
    /// Pooled over every family.
    pub bmo_rect_slope: Option<f64>,
}

fn column(points: &[ScatterPoint], f: impl Fn(&ScatterPoint) -> Option<f64>, missing: f64) -> Vec<f64> {
    points.iter().map(|p| f(p).unwrap_or(missing)).collect()
}

fn tail_ratio(xs: &[f64]) -> Option<f64> {
    if xs.len() < MIN_TREND_POINTS {
        return None;
    }
    let mid = xs[(xs.len() - 1) / 2];
    let last = xs[xs.len() - 1];
    if last.is_infinite() {
        return Some(f64::INFINITY);
    }
    (mid > 0.0 && last.is_finite()).then(|| last / mid)
}

fn trend(ratio: Option<f64>) -> Trend {
    match ratio {
        None => Trend::Insufficient,
        Some(r) if r <= TAIL_RATIO_BOUND => Trend::Bounded,
        Some(_) => Trend::Diverging,
    }
}

fn increasing_fraction(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let up = xs.windows(2).filter(|w| w[1] > w[0] || (w[1].is_infinite() && w[0].is_infinite())).count();
    Some(up as f64 / (xs.len() - 1) as f64)
}

/// Ordinary least squares `y ≈ a + b x`; `None` without spread in `x`.
pub fn slope(pairs: &[(f64, f64)]) -> Option<f64> {
    let pairs: Vec<_> = pairs.iter().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 1e-300 * n).then(|| sxy / sxx)
}

fn scatter(r: &ExperimentReport) -> ScatterPoint {
    let a = &r.analyses;
    let ic = a.interpolation_constant_h2.as_ref().and_then(|o| o.value().copied());
    let rect = a.rectangular_constant.as_ref().and_then(|o| o.value().map(|v| v.constant));
    let resolved = r.grid.nodes_per_peak.is_some_and(|v| v >= MIN_NODES_PER_PEAK);
    let bmo = a.bmo.as_ref().and_then(|o| o.value().and_then(|b| b.by_depth.last().map(|d| d.1))).filter(|_| resolved);
    ScatterPoint {
        big_n: r.big_n,
        interpolation_constant_h2: ic,
        rectangular_constant: rect,
        ratio: ic.zip(rect).map(|(i, c)| i / c),
        bmo,
    }
}

fn family_trend(family: Family, n: usize, mut points: Vec<ScatterPoint>) -> FamilyTrend {
    points.sort_by_key(|p| p.big_n);
    let mut distinct = points.clone();
    distinct.dedup();
    // repeated sweep points carry no trend information
    let degenerate = distinct.len() < points.len() || distinct.len() < 2;
    let ic = column(&distinct, |p| p.interpolation_constant_h2, f64::INFINITY);
    let rect = column(&distinct, |p| p.rectangular_constant, f64::NAN);
    let (ict, rectt) = (tail_ratio(&ic), tail_ratio(&rect));
    let (icv, rectv) = (trend(ict), trend(rectt));
    let flag = if degenerate {
        "degenerate-scatter"
    } else {
        match (icv, rectv) {
            (Trend::Diverging, Trend::Bounded) => "interpolation-degenerate",
            (Trend::Bounded, Trend::Bounded) => "both-bounded",
            _ => "mixed",
        }
    };
    let bmo_pairs: Vec<(f64, f64)> = distinct.iter().filter_map(|p| p.rectangular_constant.zip(p.bmo)).collect();
    FamilyTrend {
        family,
        n,
        interpolation_trend: icv,
        rectangular_trend: rectv,
        interpolation_tail_ratio: ict,
        rectangular_tail_ratio: rectt,
        interpolation_increasing_fraction: increasing_fraction(&ic),
        rectangular_increasing_fraction: increasing_fraction(&rect),
        bmo_rect_slope: slope(&bmo_pairs),
        degenerate,
        flag: flag.into(),
        points,
    }
}

/// Groups reports by (family, dimension) and summarizes each sweep.
pub fn correlation_report(reports: &[ExperimentReport]) -> CorrelationReport {
    let mut groups: BTreeMap<(Family, usize), Vec<ScatterPoint>> = BTreeMap::new();
    for r in reports.iter().filter(|r| r.generation_error.is_none()) {
        groups.entry((r.family, r.n)).or_default().push(scatter(r));
    }
    let pooled: Vec<(f64, f64)> = groups
        .values()
        .flatten()
        .filter_map(|p| p.rectangular_constant.zip(p.bmo))
        .collect();
    CorrelationReport {
        reports: reports.len(),
        families: groups.into_iter().map(|((f, n), pts)| family_trend(f, n, pts)).collect(),
        bmo_rect_slope: slope(&pooled),
    }
}
