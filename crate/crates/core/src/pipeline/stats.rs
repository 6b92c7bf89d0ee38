use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::manifest::SynthesisManifest;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Bucket {
    pub value: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StatsReport {
    pub composites: usize,
    pub skips: usize,
    pub orientation: BTreeMap<String, usize>,
    pub slope_residual: Vec<Bucket>,
    pub height_residual: Vec<Bucket>,
    pub relaxation_level: BTreeMap<u32, usize>,
    pub donor_reuse: BTreeMap<String, usize>,
    pub skip_reasons: BTreeMap<String, usize>,
}

fn histogram(values: impl Iterator<Item = f64>) -> Vec<Bucket> {
    // Keyed on micro-units so that float keys sort and compare exactly.
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for v in values {
        *counts.entry((v * 1e6).round() as i64).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(k, count)| Bucket {
            value: k as f64 / 1e6,
            count,
        })
        .collect()
}

pub fn stats(manifest: &SynthesisManifest) -> StatsReport {
    let mut report = StatsReport::default();
    for row in &manifest.rows {
        if let Some(reason) = &row.skip_reason {
            report.skips += 1;
            *report.skip_reasons.entry(reason.clone()).or_default() += 1;
            continue;
        }
        report.composites += 1;
        if let Some(o) = row.orientation {
            *report.orientation.entry(o.to_string()).or_default() += 1;
        }
        if let Some(level) = row.relaxation_level {
            *report.relaxation_level.entry(level).or_default() += 1;
        }
        if let Some(donor) = &row.donor_path {
            *report.donor_reuse.entry(donor.clone()).or_default() += 1;
        }
    }
    report.slope_residual = histogram(manifest.fakes().filter_map(|r| r.slope_residual_q));
    report.height_residual = histogram(manifest.fakes().filter_map(|r| r.height_residual_q));
    report
}

impl StatsReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "composites\t{}", self.composites);
        let _ = writeln!(out, "skips\t{}", self.skips);
        let sections: [(&str, Vec<(String, usize)>); 6] = [
            ("orientation", self.orientation.iter().map(|(k, v)| (k.clone(), *v)).collect()),
            (
                "slope_residual",
                self.slope_residual.iter().map(|b| (b.value.to_string(), b.count)).collect(),
            ),
            (
                "height_residual",
                self.height_residual.iter().map(|b| (b.value.to_string(), b.count)).collect(),
            ),
            (
                "relaxation_level",
                self.relaxation_level.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            ),
            ("donor_reuse", self.donor_reuse.iter().map(|(k, v)| (k.clone(), *v)).collect()),
            ("skip_reason", self.skip_reasons.iter().map(|(k, v)| (k.clone(), *v)).collect()),
        ];
        for (name, entries) in sections {
            for (key, count) in entries {
                let _ = writeln!(out, "{name}\t{key}\t{count}");
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::manifest::ManifestRow;
    use crate::pose::Orientation;

    fn fake(donor: &str, slope: f64, height: f64) -> ManifestRow {
        ManifestRow {
            output_path: Some("images/x_fake.png".into()),
            donor_path: Some(donor.into()),
            orientation: Some(Orientation::Right),
            slope_residual_q: Some(slope),
            height_residual_q: Some(height),
            relaxation_level: Some(0),
            ..Default::default()
        }
    }

    #[test]
    fn zero_residuals_land_in_bucket_zero() {
        let m = SynthesisManifest {
            rows: vec![fake("a", 0.0, 0.0), fake("b", 0.0, 0.0)],
            ..Default::default()
        };
        let r = stats(&m);
        assert_eq!(r.slope_residual, vec![Bucket { value: 0.0, count: 2 }]);
        assert_eq!(r.height_residual, vec![Bucket { value: 0.0, count: 2 }]);
    }

    #[test]
    fn donor_reuse_is_conserved() {
        let rows = (0..10)
            .map(|i| fake(if i % 3 == 0 { "a" } else { "b" }, 15.0 * (i % 2) as f64, 0.0))
            .collect();
        let r = stats(&SynthesisManifest {
            rows,
            ..Default::default()
        });
        assert_eq!(r.donor_reuse.values().sum::<usize>(), 10);
        assert_eq!(r.donor_reuse.len(), 2);
        assert_eq!(r.slope_residual.len(), 2);
    }

    #[test]
    fn empty_manifest_gives_empty_report() {
        let r = stats(&SynthesisManifest::default());
        assert_eq!(r, StatsReport::default());
        assert!(r.to_text().starts_with("composites\t0\nskips\t0\n"));
        assert!(r.to_json().contains("\"composites\": 0"));
    }
}
