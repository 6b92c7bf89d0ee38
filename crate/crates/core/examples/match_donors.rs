// Matches a handful of pedestrians against a donor pool and shows which
// filter stage decided each pick.

use posepaste::matcher::{candidates, match_one, pedestrian_rng};
use posepaste::pose::describe;
use posepaste::{synthetic, Bins};

pub fn run_example() -> posepaste::Result<Vec<String>> {
    let persons = synthetic::persons(6, 3, 64, 128, 42)?;
    let donors = synthetic::donors(8, 96, 42)?;
    let bins = Bins::default();
    let donor_desc = donors.iter().map(|d| describe(&d.keypoints, bins)).collect::<Result<Vec<_>, _>>()?;

    let mut lines = Vec::new();
    for (i, p) in persons.iter().enumerate() {
        let pd = describe(&p.keypoints, bins)?;
        let (pool, _) = candidates(&pd, &donor_desc)?;
        let m = match_one(i, &pd, &donor_desc, &mut pedestrian_rng(42, i))?;
        lines.push(format!(
            "{} {:>5} slope_q {:>6} -> {} (pool {:?}, slope residual {}, height residual {}, relaxation {})",
            p.file_name(),
            pd.orientation.as_str(),
            pd.slope_q,
            donors[m.donor_index].file_name(),
            pool,
            m.slope_residual_q,
            m.height_residual_q,
            m.relaxation_level
        ));
    }
    Ok(lines)
}

fn main() -> posepaste::Result<()> {
    for line in run_example()? {
        println!("{line}");
    }
    Ok(())
}
