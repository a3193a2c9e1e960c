use serde::{Deserialize, Serialize};

use super::{HingeError, HingeFit};
use crate::dataset::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    BeforeFirst,
    Between,
    AfterSecond,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTiming {
    pub event_name: String,
    pub event_x: f64,
    pub label: Label,
    /// `event_x - breakpoint` for each of the two breakpoints.
    pub margins: [f64; 2],
}

/// Labels `event_x` against a two-breakpoint fit. A value on a breakpoint
/// takes the label on its right.
pub fn classify_event_timing(event_name: &str, event_x: f64, fit: &HingeFit) -> Result<EventTiming, HingeError> {
    let [b1, b2] = fit.breakpoints[..] else {
        return Err(HingeError::WrongBreakpointCount { expected: 2, found: fit.breakpoints.len() });
    };
    let label = if event_x < b1 {
        Label::BeforeFirst
    } else if event_x < b2 {
        Label::Between
    } else {
        Label::AfterSecond
    };
    Ok(EventTiming { event_name: event_name.to_string(), event_x, label, margins: [event_x - b1, event_x - b2] })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Onset {
    pub series_id: String,
    pub onset_time: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub before_first: usize,
    pub between: usize,
    pub after_second: usize,
}

impl LabelCounts {
    pub fn total(&self) -> usize {
        self.before_first + self.between + self.after_second
    }

    fn add(&mut self, l: Label) {
        match l {
            Label::BeforeFirst => self.before_first += 1,
            Label::Between => self.between += 1,
            Label::AfterSecond => self.after_second += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesTiming {
    pub series_id: String,
    pub onset_time: f64,
    pub timing: EventTiming,
    /// The onset lies outside the series' observed times; `event_x` is then
    /// the nearest observed score and the event is left out of `counts`.
    pub extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub counts: LabelCounts,
    pub timings: Vec<SeriesTiming>,
    pub extrapolated: usize,
    /// Series with no onset event.
    pub censored: Vec<String>,
}

/// Maps each onset to the series' score `var` by linear interpolation between
/// the bracketing observations and labels it against `fit`.
pub fn mg_timing_report(dataset: &Dataset, var: usize, onsets: &[Onset], fit: &HingeFit) -> Result<TimingReport, HingeError> {
    if fit.breakpoints.len() != 2 {
        return Err(HingeError::WrongBreakpointCount { expected: 2, found: fit.breakpoints.len() });
    }
    let mut counts = LabelCounts::default();
    let mut timings = Vec::with_capacity(onsets.len());
    let mut extrapolated = 0;
    for o in onsets {
        if !o.onset_time.is_finite() {
            return Err(HingeError::InvalidOnset(o.onset_time));
        }
        let series = dataset.series_by_id(&o.series_id).ok_or_else(|| HingeError::UnknownSeries(o.series_id.clone()))?;
        let pts = series.column(var);
        let Some((x, outside)) = interpolate(&pts, o.onset_time) else {
            return Err(HingeError::UnknownSeries(o.series_id.clone()));
        };
        let timing = classify_event_timing(&o.series_id, x, fit)?;
        if outside {
            extrapolated += 1;
        } else {
            counts.add(timing.label);
        }
        timings.push(SeriesTiming { series_id: o.series_id.clone(), onset_time: o.onset_time, timing, extrapolated: outside });
    }
    let censored = dataset.series.iter().filter(|s| !onsets.iter().any(|o| o.series_id == s.id)).map(|s| s.id.clone()).collect();
    Ok(TimingReport { counts, timings, extrapolated, censored })
}

/// `None` if the series has no observed values of the variable.
fn interpolate(pts: &[(f64, f64)], t: f64) -> Option<(f64, bool)> {
    let (first, last) = (pts.first()?, pts.last()?);
    if t < first.0 {
        return Some((first.1, true));
    }
    if t > last.0 {
        return Some((last.1, true));
    }
    let i = pts.partition_point(|p| p.0 <= t);
    if i == 0 || pts[i - 1].0 == t {
        return Some((pts[i.max(1) - 1].1, false));
    }
    let (a, b) = (pts[i - 1], pts[i]);
    Some((a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0), false))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit() -> HingeFit {
        HingeFit {
            breakpoints: vec![-2.5, -0.5],
            segment_slopes: vec![-1.0, 1.0, -1.0],
            segment_intercepts: vec![-5.0, 0.0, -1.0],
            sse: 0.0,
            bic: 0.0,
            n_points: 0,
        }
    }

    #[test]
    fn labels() {
        let f = fit();
        assert_eq!(classify_event_timing("a", -3.0, &f).unwrap().label, Label::BeforeFirst);
        assert_eq!(classify_event_timing("a", -1.5, &f).unwrap().label, Label::Between);
        assert_eq!(classify_event_timing("a", -2.5, &f).unwrap().label, Label::Between);
        assert_eq!(classify_event_timing("a", -0.5, &f).unwrap().label, Label::AfterSecond);
        let mut one = f.clone();
        one.breakpoints.pop();
        assert!(matches!(classify_event_timing("a", 0.0, &one), Err(HingeError::WrongBreakpointCount { .. })));
    }

    #[test]
    fn report_interpolates_and_censors() {
        let d = Dataset::univariate(
            "pc1",
            vec![
                ("a".into(), vec![(0.0, -4.0), (10.0, -2.0)]),
                ("b".into(), vec![(0.0, -1.0), (10.0, 1.0)]),
                ("c".into(), vec![(0.0, 0.0)]),
            ],
        )
        .unwrap();
        let onsets = vec![Onset { series_id: "a".into(), onset_time: 5.0 }, Onset { series_id: "b".into(), onset_time: 20.0 }];
        let r = mg_timing_report(&d, 0, &onsets, &fit()).unwrap();
        assert_eq!(r.timings[0].timing.event_x, -3.0);
        assert_eq!(r.counts, LabelCounts { before_first: 1, between: 0, after_second: 0 });
        assert!(r.timings[1].extrapolated);
        assert_eq!(r.extrapolated, 1);
        assert_eq!(r.censored, vec!["c".to_string()]);
        let empty = mg_timing_report(&d, 0, &[], &fit()).unwrap();
        assert_eq!(empty.counts.total(), 0);
        assert_eq!(empty.censored.len(), 3);
    }
}
