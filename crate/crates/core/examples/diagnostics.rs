//! Verdicts on whether the singular part is sectorial, for a commuting and a
//! non-commuting random model.

use regpart::diagnostics::{check_equivalences, ProbeConfig};
use regpart::model::derive_fields;
use regpart::random::{random_model, rng, ModelOptions};
use regpart::regular::build_singular_structure;

fn main() -> regpart::Result<()> {
    for commuting in [true, false] {
        let m = random_model(&mut rng(5), &ModelOptions::new(2, commuting))?;
        let der = derive_fields(&m.coeffs, Default::default())?;
        let s = build_singular_structure(m.q.clone(), &der)?;
        let r = check_equivalences(&m.coeffs, &der, &s, &m.funcs, &ProbeConfig::default())?;

        println!("{} model", if commuting { "commuting" } else { "non-commuting" });
        println!("  max |QZ - ZQ| = {:.3e} (cell {})", r.commutator_max, r.commutator_cell);
        println!("  probe slope   = {:.3e}", r.probe_slope);
        for (name, v) in r.verdicts.as_array() {
            println!("  ({name}) {v:?}");
        }
        for n in r.inconsistencies() {
            println!("  inconsistency: {n}");
        }
    }
    Ok(())
}
