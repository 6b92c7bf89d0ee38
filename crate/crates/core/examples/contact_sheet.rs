// Lays original/composite pairs out on a grid for a quick visual check.
// Pass an output path to keep the sheet.

use std::path::PathBuf;

use posepaste::compositor::compose_fake;
use posepaste::geometry::affine_from_match;
use posepaste::pose::describe;
use posepaste::preview::{contact_sheet, SheetLayout};
use posepaste::{synthetic, Bins};

pub fn run_example(out: Option<PathBuf>) -> posepaste::Result<Vec<String>> {
    let persons = synthetic::persons(6, 6, 64, 128, 8)?;
    let donor = synthetic::donors(1, 96, 8)?.remove(0);
    let dd = describe(&donor.keypoints, Bins::default())?;
    let mut pairs = Vec::new();
    for p in &persons {
        let t = affine_from_match(&describe(&p.keypoints, Bins::default())?, &dd, true)?;
        pairs.push((p.image.clone(), compose_fake(p, &donor, &t)?.image));
    }
    let sheet = contact_sheet(&pairs, SheetLayout::new(3, 2))?;
    let mut lines = vec![format!("sheet {}x{} with {} pairs", sheet.width(), sheet.height(), pairs.len())];
    if let Some(path) = out {
        sheet.save(&path)?;
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
