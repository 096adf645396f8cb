//! Check the boundary-case normalization of each built-in environment law.
//!
//! cargo run --example boundary_case

use gwlab::environment::{verify_boundary_case, EnvironmentLaw, VerifyMethod};

fn main() -> gwlab::Result<()> {
    let laws = [
        EnvironmentLaw::two_point(),
        EnvironmentLaw::fixed_gaussian(2)?,
        EnvironmentLaw::fixed_gaussian(5)?,
        EnvironmentLaw::poisson_gaussian(1.7)?,
    ];
    println!(
        "{:<22} {:>12} {:>12} {:>10} {:>16}",
        "law", "m0", "m1", "sigma2", "mc m0 (+-se)"
    );
    for law in &laws {
        let exact = verify_boundary_case(law, VerifyMethod::ClosedForm, 0, 0);
        let mc = verify_boundary_case(law, VerifyMethod::MonteCarlo, 100_000, 1);
        println!(
            "{:<22} {:>12.3e} {:>12.3e} {:>10.5} {:>9.4} +- {:.4}",
            format!("{:?}", law.family()),
            exact.m0.value - 1.0,
            exact.m1.value,
            exact.sigma2.value,
            mc.m0.value,
            mc.m0.stderr,
        );
    }
    Ok(())
}
