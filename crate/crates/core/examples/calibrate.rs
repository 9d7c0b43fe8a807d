//! Fits L, r, d to the reference summaries and prints the per-entry residuals.
//! `--write <path>` also saves the resulting config.

use pkstiff::calibration::{calibrate, extended_targets, predict, reference_targets};
use pkstiff::config::Config;
use pkstiff::orthoglide::{LinkCompliances, Summary};

fn main() -> pkstiff::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let links = LinkCompliances::prototype();
    for (summary, start) in [
        (Summary::MeanDiagonal, [310.0, 40.0, 80.0]),
        (Summary::MaxEigen, [420.0, 60.0, 100.0]),
    ] {
        let fit = calibrate(&links, summary, &reference_targets(), start, 1000)?;
        println!(
            "{summary:?}: L = {:.4}, r = {:.4}, d = {:.4}, cost {:.3e}, worst {:.2}%",
            fit.l,
            fit.r,
            fit.d,
            fit.cost,
            100.0 * fit.max_abs_rel_error()
        );
        let ext = predict(&links, fit.l, fit.r, fit.d, summary, &extended_targets())?;
        for r in fit.residuals.iter().chain(&ext) {
            println!(
                "  {:>5} {:>5} s = {:>7.2} {:?}: {:.4e} vs {:.3e} ({:+.2}%)",
                r.variant.to_string(),
                if r.axis_flexibility { "ext" } else { "" },
                r.s,
                r.quantity,
                r.model,
                r.reference,
                100.0 * r.rel_error
            );
        }
    }
    if let Some(i) = args.iter().position(|a| a == "--write") {
        let path = args.get(i + 1).expect("--write needs a path");
        Config::prototype().save(path)?;
        println!("wrote {path}");
    }
    Ok(())
}
