// Pastes one donor onto one pedestrian and writes the result as a PNG.
// Pass an output path to keep the image.

use std::path::PathBuf;

use posepaste::compositor::compose_fake;
use posepaste::geometry::affine_from_match;
use posepaste::pose::describe;
use posepaste::{synthetic, Bins};

pub fn run_example(out: Option<PathBuf>) -> posepaste::Result<Vec<String>> {
    let person = synthetic::persons(1, 1, 64, 128, 3)?.remove(0);
    let donor = synthetic::donors(1, 96, 3)?.remove(0);
    let t = affine_from_match(
        &describe(&person.keypoints, Bins::default())?,
        &describe(&donor.keypoints, Bins::default())?,
        true,
    )?;
    let fake = compose_fake(&person, &donor, &t)?;
    let mut lines = vec![
        format!(
            "anchor ({:.2}, {:.2}) -> target ({:.2}, {:.2})",
            fake.meta.anchor.x, fake.meta.anchor.y, fake.meta.target.x, fake.meta.target.y
        ),
        format!("offset {:?}, {} pixels pasted", fake.meta.offset, fake.meta.pasted_pixels),
    ];
    if let Some(path) = out {
        fake.image.save(&path)?;
        lines.push(format!("wrote {}", path.display()));
    }
    Ok(lines)
}

fn main() -> posepaste::Result<()> {
    for line in run_example(std::env::args_os().nth(1).map(PathBuf::from))? {
        println!("{line}");
    }
    Ok(())
}
