use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Aggregate, ChartType, FeatureVector, VisualizationNode, VizError, YAxis};
use crate::executor::ResultTable;
use crate::onboarding::DataType;
use crate::value::Value;

pub const HISTOGRAM_BINS: usize = 10;
const BAR_MAX_DISTINCT: usize = 50;
const PIE_DISTINCT: std::ops::RangeInclusive<usize> = 2..=10;
const SCATTER_MIN_ROWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    Categorical,
    Numeric,
    Temporal,
}

impl AxisKind {
    pub const ALL: [AxisKind; 3] = [AxisKind::Categorical, AxisKind::Numeric, AxisKind::Temporal];

    fn of(t: DataType) -> Self {
        match t {
            DataType::Textual => AxisKind::Categorical,
            DataType::Numeric => AxisKind::Numeric,
            DataType::Datetime => AxisKind::Temporal,
        }
    }

    fn ordered(self) -> bool {
        matches!(self, AxisKind::Numeric | AxisKind::Temporal)
    }
}

fn key(v: &Value) -> String {
    v.to_string()
}

struct Column<'a> {
    name: &'a str,
    kind: AxisKind,
    values: Vec<&'a Value>,
    distinct: usize,
}

/// (x value, y) per group, or per row when not aggregated.
fn series(x: &Column, y: Option<&Column>, agg: Aggregate) -> Vec<(f64, f64)> {
    let x_num = |v: &Value| v.as_f64().or_else(|| key(v).parse().ok());
    if agg == Aggregate::None {
        let y = y.expect("raw series needs a y column");
        return x
            .values
            .iter()
            .zip(&y.values)
            .filter_map(|(a, b)| Some((x_num(a)?, b.as_f64()?)))
            .collect();
    }
    let mut groups: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
    for (i, xv) in x.values.iter().enumerate() {
        if xv.is_null() {
            continue;
        }
        let Some(xn) = x_num(xv) else { continue };
        let g = groups.entry(key(xv)).or_insert((xn, 0.0, 0));
        match y.map(|c| c.values[i].as_f64()) {
            None => g.2 += 1,
            Some(Some(yv)) => {
                g.1 += yv;
                g.2 += 1;
            }
            Some(None) => {}
        }
    }
    groups
        .into_values()
        .filter(|g| g.2 > 0)
        .map(|(xn, sum, n)| match agg {
            Aggregate::Count => (xn, n as f64),
            Aggregate::Avg => (xn, sum / n as f64),
            _ => (xn, sum),
        })
        .collect()
}

/// Whether every aggregated y is non-negative.
fn non_negative(x: &Column, y: Option<&Column>, agg: Aggregate) -> bool {
    if agg == Aggregate::Count {
        return true;
    }
    let y = y.expect("aggregated series needs a y column");
    let mut sums: BTreeMap<String, f64> = BTreeMap::new();
    for (xv, yv) in x.values.iter().zip(&y.values) {
        if let (false, Some(n)) = (xv.is_null(), yv.as_f64()) {
            *sums.entry(key(xv)).or_default() += n;
        }
    }
    sums.values().all(|s| *s >= 0.0)
}

fn pearson(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in points {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx <= f64::EPSILON || syy <= f64::EPSILON {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

fn features(chart: ChartType, x: &Column, y: Option<&Column>, agg: Aggregate, rows: usize) -> FeatureVector {
    let y_kind = y.map_or(AxisKind::Numeric, |c| c.kind);
    let correlation_xy = (x.kind == AxisKind::Numeric && y_kind == AxisKind::Numeric)
        .then(|| pearson(&series(x, y, agg)));
    let nulls = (0..rows)
        .filter(|&i| x.values[i].is_null() || y.is_some_and(|c| c.values[i].is_null()))
        .count();
    FeatureVector {
        chart_type: chart,
        aggregate: agg,
        x_kind: x.kind,
        y_kind,
        distinct_ratio_x: x.distinct as f64 / rows as f64,
        correlation_xy,
        group_count: x.distinct,
        null_ratio: nulls as f64 / rows as f64,
        row_count: rows,
    }
}

/// Every valid (chart, x, y, aggregate) combination for the result.
///
/// Bars need a categorical x with at most 50 distinct values; pies a
/// categorical x with 2 to 10 distinct values and non-negative y; lines an
/// ordered x; scatters an ordered x, a numeric y and at least 10 rows. A
/// lone numeric column gets a binned count histogram.
pub fn enumerate_candidates(result: &ResultTable) -> Result<Vec<VisualizationNode>, VizError> {
    let rows = result.rows.len();
    if rows == 0 || result.columns.is_empty() {
        return Err(VizError::NoCandidates);
    }
    let columns: Vec<Column> = result
        .columns
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let values: Vec<&Value> = result.column_values(i).collect();
            let distinct =
                values.iter().filter(|v| !v.is_null()).map(|v| key(v)).collect::<BTreeSet<_>>().len();
            Column { name: &c.name, kind: AxisKind::of(c.data_type), values, distinct }
        })
        .collect();

    let mut out: Vec<VisualizationNode> = Vec::new();
    let mut push = |chart, x: &Column, y: Option<&Column>, agg, bins| {
        let node = VisualizationNode {
            chart_type: chart,
            x: x.name.to_string(),
            y: y.map_or(YAxis::Count, |c| YAxis::Column(c.name.to_string())),
            aggregate: agg,
            bins,
            features: features(chart, x, y, agg, rows),
            score: 0.0,
        };
        if !out.iter().any(|n| n.key() == node.key()) {
            out.push(node);
        }
    };

    if let [only] = columns.as_slice() {
        if only.kind == AxisKind::Numeric && only.distinct > 0 {
            push(ChartType::Bar, only, None, Aggregate::Count, Some(HISTOGRAM_BINS.min(only.distinct)));
            return Ok(out);
        }
    }

    for x in &columns {
        let cat = x.kind == AxisKind::Categorical;
        let bar = cat && x.distinct <= BAR_MAX_DISTINCT && x.distinct > 0;
        let pie = cat && PIE_DISTINCT.contains(&x.distinct);
        if x.distinct > 0 && x.distinct < rows {
            if bar {
                push(ChartType::Bar, x, None, Aggregate::Count, None);
            }
            if pie {
                push(ChartType::Pie, x, None, Aggregate::Count, None);
            }
            if x.kind.ordered() {
                push(ChartType::Line, x, None, Aggregate::Count, None);
            }
        }
        for y in columns.iter().filter(|y| y.name != x.name && y.kind == AxisKind::Numeric) {
            for agg in [Aggregate::None, Aggregate::Sum, Aggregate::Avg] {
                if bar {
                    push(ChartType::Bar, x, Some(y), agg, None);
                }
                if x.kind.ordered() {
                    push(ChartType::Line, x, Some(y), agg, None);
                }
            }
            if pie && non_negative(x, Some(y), Aggregate::Sum) {
                push(ChartType::Pie, x, Some(y), Aggregate::Sum, None);
                if x.distinct == rows {
                    push(ChartType::Pie, x, Some(y), Aggregate::None, None);
                }
            }
            if x.kind.ordered() && rows >= SCATTER_MIN_ROWS {
                push(ChartType::Scatter, x, Some(y), Aggregate::None, None);
            }
        }
    }
    if out.is_empty() {
        return Err(VizError::NoCandidates);
    }
    Ok(out)
}
