//! Self-test battery run by the `check` subcommand.

use std::time::Instant;

use serde::Serialize;

use crate::energy::{energy_decomposed, energy_full, EnergyParams};
use crate::error::Result;
use crate::geometry::{make_preset, Preset};
use crate::sobolev::equivalence_check;
use crate::symbol::rho_asymptotic;
use crate::variation::{gradient_fd_error, projected_gradient};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Measured quantity compared against `threshold`.
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
    pub seconds: f64,
}

fn timed<F>(name: &'static str, threshold: f64, f: F) -> CheckResult
where
    F: FnOnce() -> Result<(f64, bool, String)>,
{
    let start = Instant::now();
    let (value, passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (f64::NAN, false, e.to_string()),
    };
    CheckResult {
        name,
        passed,
        value,
        threshold,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn decomposition(n: usize, pq: &EnergyParams) -> Result<(f64, bool, String)> {
    let mut worst = 0.0f64;
    for seed in 1..=3 {
        let c = make_preset(&Preset::PerturbedCircle { eps: 0.1, seed }, n, 3)?;
        let full = energy_full(&c, pq)?.value;
        let dec = energy_decomposed(&c, pq)?.value;
        worst = worst.max(((full - dec) / full).abs());
    }
    Ok((worst, worst <= 1e-12, format!("N = {n}, 3 curves")))
}

fn gradient(n: usize, pq: &EnergyParams) -> Result<(f64, bool, String)> {
    let c = make_preset(&Preset::PerturbedCircle { eps: 0.05, seed: 5 }, n, 3)?;
    let err = gradient_fd_error(&c, pq, 1e-5)?;
    Ok((err, err <= 1e-6, format!("N = {n}, step 1e-5")))
}

fn criticality(n: usize, pq: &EnergyParams) -> Result<(f64, bool, String)> {
    let c = make_preset(&Preset::Circle, n, 2)?;
    let pg = projected_gradient(&c, pq)?;
    let ratio = pg.residual / pg.energy_gradient.sup_norm();
    Ok((
        ratio,
        ratio <= 1e-3,
        format!("N = {n}, lambda = {:.6e}", pg.lambda),
    ))
}

fn seminorms(n: usize) -> Result<(f64, bool, String)> {
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut ratios = Vec::new();
    for preset in [
        Preset::Circle,
        Preset::PerturbedCircle { eps: 0.05, seed: 2 },
    ] {
        let c = make_preset(&preset, n, 3)?;
        let r = equivalence_check(&c, 0.5, 2.0)?;
        ok &= r.within_slack;
        ratios.push(format!("{preset}: {:.4}", r.ratio));
        worst = worst.max(r.ratio);
    }
    Ok((worst, ok, format!("N = {n}, {}", ratios.join(", "))))
}

fn symbol(ks: &[u32]) -> Result<(f64, bool, String)> {
    let p = 2.5;
    let t = rho_asymptotic(p, ks)?;
    let off = (t.slope - (3.0 * p - 4.0)).abs();
    Ok((
        off,
        off <= 0.05,
        format!("p = {p}, ks = {ks:?}, slope {:.4}", t.slope),
    ))
}

/// Runs every battery; `fast` halves the sizes.
pub fn check_suite(fast: bool) -> Result<Vec<CheckResult>> {
    let pq = EnergyParams::new(2.5, 2.0)?;
    let div = if fast { 2 } else { 1 };
    let ks: &[u32] = if fast { &[4, 8, 16] } else { &[8, 16, 32] };
    Ok(vec![
        timed("decomposition", 1e-12, || decomposition(32 / div, &pq)),
        timed("gradient_fd", 1e-6, || gradient(16 / div, &pq)),
        timed("circle_criticality", 1e-3, || criticality(64 / div, &pq)),
        timed("seminorm_interval", f64::NAN, || seminorms(256 / div)),
        timed("symbol_slope", 0.05, || symbol(ks)),
    ])
}

/// Fixed-width pass/fail table.
pub fn format_table(results: &[CheckResult]) -> String {
    let mut out = format!(
        "{:<20} {:<6} {:>12} {:>9}  detail\n",
        "check", "result", "value", "seconds"
    );
    for r in results {
        out.push_str(&format!(
            "{:<20} {:<6} {:>12.4e} {:>9.3}  {}\n",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.value,
            r.seconds,
            r.detail
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suite_passes() {
        let results = check_suite(true).unwrap();
        assert_eq!(results.len(), 5);
        for r in &results {
            assert!(r.passed, "{}", format_table(&results));
        }
        assert!(format_table(&results).contains("PASS"));
    }
}
