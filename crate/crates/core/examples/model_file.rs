//! Writes a Cantor model file, reads it back and computes the full report.

use regpart::diagnostics::ProbeConfig;
use regpart::io::{cantor_model_file, compute_report, ModelFile};

fn main() -> regpart::Result<()> {
    let dir = std::env::temp_dir().join("regpart-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("cantor3.json");
    cantor_model_file(3, 1)?.write(&path)?;

    let model = ModelFile::read(&path)?.load()?;
    let report = compute_report(&model, &ProbeConfig::default())?;
    let out = dir.join("cantor3-report.json");
    report.write(&out)?;

    println!("model  {}", path.display());
    println!("report {}", out.display());
    println!("oracle max relative error {:.3e}", report.oracle_max_rel_err());
    println!("identity residual max {:.3e}", report.identities.max.iter().copied().fold(0.0, f64::max));
    for (name, v) in report.diagnostics.verdicts.as_array() {
        println!("({name}) {v:?}");
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
