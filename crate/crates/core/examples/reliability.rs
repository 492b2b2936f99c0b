//! ECE and a reliability diagram for a simulated model that is
//! underconfident at low confidence and overconfident at high confidence.
//!
//! Usage: `cargo run --example reliability [SVG_PATH]`

use qacal::metrics::{compute_ece, reliability_bins, BinningConfig};
use qacal::report::{percent, reliability_svg};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> qacal::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // Stated confidence c, actual hit rate 0.2 + 0.6c.
    let preds: Vec<(f64, bool)> = (0..5000)
        .map(|_| {
            let c: f64 = rng.gen_range(0.0..1.0);
            (c, rng.gen::<f64>() < 0.2 + 0.6 * c)
        })
        .collect();

    for bins in [1, 5, 10, 15] {
        let ece = compute_ece(&preds, &BinningConfig::new(bins)?)?;
        println!("M = {bins:>2}: ECE {}", percent(ece));
    }

    let table = reliability_bins(&preds, &BinningConfig::default())?;
    println!("bin  count  confidence  accuracy");
    for b in &table.bins {
        println!(
            "{:>3}  {:>5}  {:>10.3}  {:>8.3}",
            b.bin, b.count, b.mean_confidence, b.mean_accuracy
        );
    }

    // The two-prediction case: |1 - 0.95| / 2 + |0 - 0.55| / 2.
    let pair = compute_ece(&[(0.95, true), (0.55, false)], &BinningConfig::default())?;
    println!("pair ECE {}", percent(pair));

    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, reliability_svg(&table))?;
        println!("wrote {path}");
    }
    Ok(())
}
