//! Large-N closed forms against the numerical optimum, and the breakdown of
//! the bosonic expansion at 27λ̄/2J = 1.

use tci::variational::{self as var, AnsatzSpec};

fn main() -> tci::Result<()> {
    let lambda_bar = 0.01;
    for n in [100, 1000, 10_000, 100_000] {
        let spec = AnsatzSpec::rescaled(n, lambda_bar)?;
        let exact = var::minimize_theta(&spec);
        let asym = var::asymptotic_quantities(&spec)?;
        let gap = exact.symmetrized.map_or(f64::NAN, |s| s.at_theta_star.gap);
        println!(
            "N = {n:>6}: θ* {:.4} vs {:.4}, E rel. dev {:.2e}, gap {:.4e} vs {:.4e}",
            exact.theta_star,
            asym.theta_star,
            ((asym.energy - exact.energy) / exact.energy).abs(),
            gap,
            var::asymptotic_gap(&spec)?
        );
    }

    println!();
    for ratio in [0.5, 0.9, 0.99, 1.0, 1.2] {
        let spec = AnsatzSpec::rescaled(1000, 2.0 * ratio / 27.0)?;
        let leading = var::leading_order_minimum(&spec).map(|m| format!("{:.4}", m.theta));
        let bosonic = var::bosonic_minimum(&spec).map(|m| format!("{:.4}", m.theta_star));
        println!(
            "27λ̄/2J = {ratio:<4}: breakdown flag {:<5}  leading-order θ* {:<8} bosonic θ* {}",
            var::bosonic_breakdown(&spec),
            leading.unwrap_or_else(|| "none".into()),
            bosonic.unwrap_or_else(|| "none".into())
        );
    }
    Ok(())
}
