//! Daily aggregation of timestamped items into stacked category counts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::{DateTime, FixedOffset, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::StatsError;

/// Label used for items that carry no category under a labeled dimension.
pub const UNLABELED: &str = "unlabeled";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalSeries {
    /// Contiguous local dates from the first to the last item.
    pub dates: Vec<NaiveDate>,
    /// Empty for a volume-only series.
    pub categories: Vec<String>,
    /// `counts[d][c]`: items on `dates[d]` in `categories[c]`.
    pub counts: Vec<Vec<u64>>,
    pub volume: Vec<u64>,
}

impl TemporalSeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,volume");
        for c in &self.categories {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for (d, date) in self.dates.iter().enumerate() {
            let _ = write!(out, "{},{}", date.format("%Y-%m-%d"), self.volume[d]);
            for v in &self.counts[d] {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Bucket items by local calendar day at `offset`, zero-filling gaps.
///
/// With `categories = None` only volume is counted. Otherwise every item
/// lands in its category column; unknown categories are appended in sorted
/// order and missing labels go to [`UNLABELED`], so each date's counts sum to
/// its volume.
pub fn temporal_series<I>(
    items: I,
    offset: FixedOffset,
    categories: Option<&[String]>,
) -> Result<TemporalSeries, StatsError>
where
    I: IntoIterator<Item = (DateTime<Utc>, Option<String>)>,
{
    let mut per_day: BTreeMap<NaiveDate, BTreeMap<String, u64>> = BTreeMap::new();
    let mut volume_by_day: BTreeMap<NaiveDate, u64> = BTreeMap::new();
    for (ts, label) in items {
        let day = ts.with_timezone(&offset).date_naive();
        *volume_by_day.entry(day).or_default() += 1;
        if categories.is_some() {
            let label = label.unwrap_or_else(|| UNLABELED.to_string());
            *per_day.entry(day).or_default().entry(label).or_default() += 1;
        }
    }
    let (first, last) = match (volume_by_day.keys().next(), volume_by_day.keys().next_back()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(StatsError::Empty("no timestamped items")),
    };

    let mut axis: Vec<String> = categories.map(<[String]>::to_vec).unwrap_or_default();
    if categories.is_some() {
        let mut extra: Vec<String> = per_day
            .values()
            .flat_map(|m| m.keys())
            .filter(|k| !axis.contains(k))
            .cloned()
            .collect();
        extra.sort();
        extra.dedup();
        // keep the unlabeled bucket last
        extra.sort_by_key(|k| k == UNLABELED);
        axis.extend(extra);
    }

    let mut dates = Vec::new();
    let mut counts = Vec::new();
    let mut volume = Vec::new();
    let mut day = first;
    while day <= last {
        dates.push(day);
        volume.push(volume_by_day.get(&day).copied().unwrap_or(0));
        let row = per_day.get(&day);
        counts.push(
            axis.iter()
                .map(|c| row.and_then(|m| m.get(c)).copied().unwrap_or(0))
                .collect(),
        );
        day = day.succ_opt().expect("date overflow");
    }
    Ok(TemporalSeries { dates, categories: axis, counts, volume })
}
