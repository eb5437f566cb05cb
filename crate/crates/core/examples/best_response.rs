//! Evaluate the Hamiltonian and its minimiser at one snapshot, comparing the
//! general linear solve, the two-group closed form and the quoted formula.
//!
//! ```bash
//! cargo run -p netform --example best_response
//! ```

use netform::best_response::{
    closed_form_k2, hamiltonian, implicit_best_response, published_closed_form_k2, AgentSnapshot,
};
use netform::model::{preset, Preset};

fn main() -> netform::Result<()> {
    let (params, _, _) = preset(Preset::Exp3);
    let means = [1.0, 2.0];
    let snap = AgentSnapshot::new(1.2, 0.3, &means);

    for k in 0..2 {
        let w = implicit_best_response(k, &snap, &params)?;
        let h = hamiltonian(k, &w, &snap, &params)?;
        println!("group {}: w-hat = {:?}, H(w-hat) = {h:.6}", k + 1, w.0);
        for l in 0..2 {
            println!(
                "  l={}: closed form {:.12}, quoted formula {:.12}",
                l + 1,
                closed_form_k2(k, l, &snap, &params)?,
                published_closed_form_k2(k, l, &snap, &params)?
            );
        }
        let doubled: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
        println!("  H at the quoted formula's weights: {:.6}", hamiltonian(k, &doubled, &snap, &params)?);
    }
    Ok(())
}
