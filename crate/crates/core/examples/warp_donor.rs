// Aligns a donor's torso with a pedestrian's and checks where the donor
// keypoints land after the warp.

use posepaste::geometry::{similarity_from_match, warp_mask};
use posepaste::pose::{describe, mid_hip};
use posepaste::{synthetic, Bins};

pub fn run_example() -> posepaste::Result<Vec<String>> {
    let (_, person) = synthetic::pedestrian(64, 128, 5)?;
    let (_, mask, donor) = synthetic::donor(96, 9)?;
    let p = describe(&person, Bins::default())?;
    let d = describe(&donor, Bins::default())?;

    let sim = similarity_from_match(&p, &d, true)?;
    let t = sim.to_affine();
    let hip = mid_hip(donor.left_hip, donor.right_hip);
    let neck = t.apply(donor.neck);
    let warped_desc = describe(&donor.map_points(|q| t.apply(q)), Bins::default())?;
    let warped = warp_mask(&mask, &t, 96, 96)?;

    Ok(vec![
        format!(
            "rotate {:.3} deg, scale {:.4} about ({:.2}, {:.2})",
            sim.theta_deg, sim.scale, hip.x, hip.y
        ),
        format!("pivot moves to ({:.6}, {:.6})", t.apply(hip).x, t.apply(hip).y),
        format!("donor neck lands at ({:.3}, {:.3})", neck.x, neck.y),
        format!("slope {:.6} vs pedestrian {:.6}", warped_desc.slope_raw, p.slope_raw),
        format!("torso {:.6} vs pedestrian {:.6}", warped_desc.height_raw, p.height_raw),
        format!("mask pixels {} -> {}", mask.count_ones(), warped.count_ones()),
    ])
}

fn main() -> posepaste::Result<()> {
    for line in run_example()? {
        println!("{line}");
    }
    Ok(())
}
