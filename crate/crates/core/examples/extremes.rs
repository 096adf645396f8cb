//! Maxima of i.i.d. exponential samples: max / ln n tends to 1 / alpha.
//!
//! cargo run --release --example extremes

use gwlab::rw1d::extremes_check;

fn main() -> gwlab::Result<()> {
    for alpha in [0.5, 1.0, 2.0] {
        for n in [1_000, 100_000] {
            let e = extremes_check(alpha, n, 100, 1)?;
            println!(
                "alpha = {alpha}, n = {n:>6}: median ratio {:.3} (IQR {:.3} .. {:.3}), 1/alpha = {}",
                e.median, e.q25, e.q75, 1.0 / alpha
            );
        }
    }
    Ok(())
}
