//! Many-to-one through the size-biased spine, checked against brute-force
//! enumeration of a whole generation.
//!
//! cargo run --release --example spine_many_to_one

use gwlab::environment::EnvironmentLaw;
use gwlab::rng;
use gwlab::spine::{
    enumerate_generation, many_to_one, many_to_one_line, SignTable, SpineConfig, SpineMode,
};

fn main() -> gwlab::Result<()> {
    let law = EnvironmentLaw::two_point();
    let n = 5;
    let table = SignTable::random(&mut rng::stream(&[11]), n);
    let exact = enumerate_generation(&law, n, |p| table.ln_eval(p))?;
    let est = many_to_one(&law, n, |p| table.ln_eval(p), &SpineConfig::new(100_000, 1))?;
    println!(
        "sum over generation {n} of g: exact {exact:.5}, spine {:.5} +- {:.5}",
        est.value, est.stderr
    );

    // e^{-V} summed over the first-passage line above r is identically one
    let line = many_to_one_line(&law, 4.0, |p| -p.end(), &SpineConfig::new(10_000, 2))?;
    println!(
        "telescoping line sum: {} (stderr {})",
        line.estimate.value, line.estimate.stderr
    );

    // Gaussian families in both sampling modes
    let g = EnvironmentLaw::fixed_gaussian(3)?;
    for mode in [SpineMode::Exact, SpineMode::Weighted] {
        let e = many_to_one(
            &g,
            3,
            |_| 0.0,
            &SpineConfig::new(100_000, 3).with_mode(mode),
        )?;
        println!(
            "{mode:?}: generation-3 size {:.3} +- {:.3} (exact 27)",
            e.value, e.stderr
        );
    }
    Ok(())
}
