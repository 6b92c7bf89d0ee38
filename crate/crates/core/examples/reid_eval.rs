// Scores a small re-identification ranking with the Market1501 protocol.

use posepaste::metrics::{evaluate, EvalSet, Protocol};

pub fn run_example() -> posepaste::Result<Vec<String>> {
    // Two queries against five gallery images. Gallery id -1 is junk, and
    // gallery 3 shares id and camera with query 0 so it is ignored there.
    let queries = vec![vec![0.0, 0.0], vec![5.0, 5.0]];
    let gallery = vec![vec![0.1, 0.0], vec![0.0, 0.4], vec![5.0, 5.2], vec![0.0, 0.05], vec![4.0, 4.0]];
    let e = EvalSet::from_embeddings(
        &queries,
        vec![1, 2],
        vec![1, 1],
        &gallery,
        vec![-1, 1, 2, 1, 3],
        vec![2, 2, 3, 1, 2],
    )?;
    let report = evaluate(&e, Protocol::Market)?;
    let mut lines: Vec<String> = [1, 5].iter().map(|&k| format!("Rank-{k}\t{:.4}", report.rank(k))).collect();
    lines.push(format!("mAP\t{:.4}", report.mean_ap));
    lines.push(format!("{} valid queries", report.valid_queries));
    Ok(lines)
}

fn main() -> posepaste::Result<()> {
    for line in run_example()? {
        println!("{line}");
    }
    Ok(())
}
