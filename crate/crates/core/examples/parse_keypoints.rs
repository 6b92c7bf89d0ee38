// Parses a keypoint annotation file holding both supported layouts and
// prints the pose descriptor of every usable entry.

use std::path::Path;

use posepaste::ingest::parse_keypoints_str;
use posepaste::pose::{describe, Bins};

const ANNOTATIONS: &str = r#"[
  {"file": "0002_c1s1_000451_03.jpg",
   "named_points": {
     "left_shoulder":  [22.0, 40.0, 0.9],
     "right_shoulder": [42.0, 40.0, 0.9],
     "left_hip":       [26.0, 75.0, 0.8],
     "right_hip":      [38.0, 75.0, 0.8],
     "neck":           [32.0, 40.0, 0.9]}},
  {"file": "0007_c2s3_070952_01.jpg",
   "coco17": [[0,0,0],[0,0,0],[0,0,0],[0,0,0],[0,0,0],
              [40,30,0.7],[20,32,0.7],[0,0,0],[0,0,0],[0,0,0],[0,0,0],
              [36,70,0.6],[24,70,0.6],[0,0,0],[0,0,0],[0,0,0],[0,0,0]]},
  {"file": "0011_c3s1_001201_00.jpg",
   "named_points": {
     "left_shoulder":  [22.0, 40.0, 0.1],
     "right_shoulder": [42.0, 40.0, 0.9],
     "left_hip":       [26.0, 75.0, 0.8],
     "right_hip":      [38.0, 75.0, 0.8],
     "neck":           [32.0, 40.0, 0.9]}}
]"#;

pub fn run_example() -> posepaste::Result<Vec<String>> {
    let parsed = parse_keypoints_str(ANNOTATIONS, Path::new("inline.json"), posepaste::ingest::MIN_CONFIDENCE)?;
    let mut lines = Vec::new();
    for entry in &parsed.entries {
        let d = describe(&entry.keypoints, Bins::default())?;
        lines.push(format!(
            "{}\t{}\tslope {:.2} -> {}\theight {:.2} -> {}",
            entry.file, d.orientation, d.slope_raw, d.slope_q, d.height_raw, d.height_q
        ));
    }
    for skip in &parsed.skipped {
        lines.push(format!("{}\tskipped: {}", skip.file, skip.reason));
    }
    Ok(lines)
}

fn main() -> posepaste::Result<()> {
    for line in run_example()? {
        println!("{line}");
    }
    Ok(())
}
