//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use miso_capacity::asymptotics::{asymptotic_intercept, convergence_probe};
use miso_capacity::numerics::roots::{solve_a, solve_mu, ROOT_TOLERANCE};
use miso_capacity::oracles::{bruteforce_vmax, mutual_information, sandwich_report, AggregateLaw, SandwichOptions};
use miso_capacity::upper::duality::DualitySearch;
use miso_capacity::{high_snr_gap, low_snr_slope, vmax, ChannelGains, Noise, PowerBudget};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Gains, alpha, gamma and the nonzero achieving masses.
type TableRow = (&'static [f64], f64, f64, &'static [(usize, f64)]);

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn channel(gains: &[f64]) -> ChannelGains {
    ChannelGains::new(gains).expect("valid gains")
}

fn within_budget(elapsed: Duration, limit: Duration) -> Outcome {
    if elapsed < limit {
        Ok(format!("{:.2?}", elapsed))
    } else {
        Err(format!("took {:.2?}, limit {:.0?}", elapsed, limit))
    }
}

fn table_variance() -> Outcome {
    let start = Instant::now();
    let rows: [TableRow; 3] = [
        (&[3.0, 2.2, 0.1], 0.9, 6.6924, &[(0, 0.55), (2, 0.45)]),
        (&[3.0, 2.2, 1.1], 0.7, 7.1001, &[(0, 0.7667), (3, 0.2333)]),
        (&[3.0, 1.5, 0.3], 0.95, 5.1158, &[(0, 0.5907), (2, 0.2780), (3, 0.1313)]),
    ];
    let mut found = Vec::new();
    for (gains, alpha, gamma, masses) in rows {
        let ch = channel(gains);
        let r = vmax(&ch, &PowerBudget::new(&ch, 1.0, alpha).unwrap());
        if (r.gamma - gamma).abs() > 1e-3 {
            return Err(format!("{gains:?}: gamma {} vs {gamma}", r.gamma));
        }
        for (k, m) in r.law.masses.iter().enumerate() {
            let expected = masses.iter().find(|(j, _)| *j == k).map_or(0.0, |(_, m)| *m);
            if (m - expected).abs() > 1e-3 {
                return Err(format!("{gains:?}: mass {k} is {m}, expected {expected}"));
            }
        }
        found.push(format!("{:.4}", r.gamma));
    }
    within_budget(start.elapsed(), Duration::from_secs(1)).map(|t| format!("gamma = {} in {t}", found.join(", ")))
}

fn thresholds() -> Outcome {
    let a = channel(&[3.0, 2.0, 1.5]).alpha_threshold();
    let b = channel(&[3.0, 1.0]).alpha_threshold();
    if (a - 1.2692).abs() > 1e-4 || b != 0.75 {
        return Err(format!("alpha_th = {a}, {b}"));
    }
    Ok(format!("alpha_th = {a:.6}, {b}"))
}

fn sweep_grid() -> Vec<f64> {
    (0..71).map(|i| 10f64.powf((-15.0 + 0.5 * i as f64) / 10.0)).collect()
}

fn sandwich(search: DualitySearch, limit: Duration) -> Outcome {
    let start = Instant::now();
    let ch = channel(&[3.0, 2.0, 1.5]);
    let noise = Noise::new(1.0).unwrap();
    let options = SandwichOptions { search, ..SandwichOptions::default() };
    let report = sandwich_report(&ch, 0.6, &noise, &sweep_grid(), options).map_err(|e| e.to_string())?;
    if let Some(v) = report.violations.first() {
        return Err(format!("{} violation(s), first: {v}", report.violations.len()));
    }
    let slack = report
        .rows
        .iter()
        .map(|r| {
            let lo = r.lower.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
            let hi = r.upper.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
            (r.mutual_information.value - lo).min(hi - r.mutual_information.value)
        })
        .fold(f64::INFINITY, f64::min);
    within_budget(start.elapsed(), limit)
        .map(|t| format!("{} amplitudes, smallest margin {slack:.3e} nats, {t}", report.rows.len()))
}

fn high_snr() -> Outcome {
    let ch = channel(&[3.0, 2.0, 1.5]);
    let noise = Noise::new(1.0).unwrap();
    // 60 dB under the default 10 log10(A / sigma) convention.
    let row = convergence_probe(&ch, 0.6, &noise, &[1e6], &DualitySearch::default()).map_err(|e| e.to_string())?[0];
    let gap = high_snr_gap(&ch, 0.6).map_err(|e| e.to_string())?.gap;
    let limit = asymptotic_intercept(&ch, &noise, gap);
    let diff = row.difference();
    let lo = (row.lower_minus_log - limit).abs();
    let hi = (row.upper_minus_log - limit).abs();
    let detail = format!("upper - lower = {diff:.3e}, distances to limit {lo:.3e}, {hi:.3e}");
    if diff < 0.05 && lo < 0.02 && hi < 0.02 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn low_snr() -> Outcome {
    let ch = channel(&[3.0, 1.0]);
    let noise = Noise::new(1.0).unwrap();
    let amplitude = 1e-2;
    let half_gamma = low_snr_slope(&ch, 0.5).map_err(|e| e.to_string())?;
    let law = vmax(&ch, &PowerBudget::new(&ch, amplitude, 0.5).unwrap()).law;
    let mi = mutual_information(&AggregateLaw::from_discrete(&law), &noise, 1e-12).map_err(|e| e.to_string())?;
    let ratio = mi.value / (amplitude * amplitude);
    let detail = format!("I / (A/sigma)^2 = {ratio:.5}, gamma/2 = {half_gamma:.5}");
    if (ratio / half_gamma - 1.0).abs() < 0.1 && (half_gamma - 1.5).abs() < 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn root_residuals() -> Outcome {
    let n = 1000;
    let mut worst: f64 = 0.0;
    let mut previous = f64::INFINITY;
    for i in 0..n {
        let lambda = 1e-4 + (0.4999 - 1e-4) * i as f64 / (n - 1) as f64;
        let r = solve_mu(lambda).map_err(|e| e.to_string())?;
        if r.root >= previous {
            return Err(format!("mu not decreasing at lambda = {lambda}"));
        }
        previous = r.root;
        worst = worst.max(r.residual.abs());
    }
    for gains in [&[3.0, 2.0, 1.5][..], &[3.0, 1.0], &[5.0, 2.0, 1.0, 0.1], &[1.0, 1.0, 1.0, 1.0, 1.0]] {
        let ch = channel(gains);
        let nt = ch.nt() as f64;
        let mut previous = 0.0;
        for i in 1..n {
            let target = 1.0 + (nt - 1.0) * i as f64 / n as f64;
            let r = solve_a(&ch, target).map_err(|e| e.to_string())?;
            if r.root <= previous {
                return Err(format!("a not increasing for {gains:?} at target {target}"));
            }
            previous = r.root;
            worst = worst.max(r.residual.abs());
        }
    }
    if worst <= ROOT_TOLERANCE {
        Ok(format!("largest residual {worst:.2e}"))
    } else {
        Err(format!("largest residual {worst:.2e}"))
    }
}

fn bruteforce_agreement() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cases: Vec<(Vec<f64>, f64, u64)> = (0..100)
        .map(|_| {
            let nt = rng.gen_range(2..=4);
            let gains: Vec<f64> = (0..nt).map(|_| rng.gen_range(0.05..5.0)).collect();
            let alpha = rng.gen_range(0.01..0.5 * nt as f64);
            (gains, alpha, rng.gen())
        })
        .collect();
    let worst = cases
        .par_iter()
        .map(|(gains, alpha, seed)| -> Result<f64, String> {
            let ch = channel(gains);
            let budget = PowerBudget::new(&ch, 1.0, *alpha).map_err(|e| e.to_string())?;
            let exact = vmax(&ch, &budget);
            let bf = bruteforce_vmax(&ch, &budget, 100_000, *seed).map_err(|e| e.to_string())?;
            if bf.variance > exact.certified_gamma() + 1e-12 {
                return Err(format!("{gains:?}, alpha {alpha}: brute force {} above {}", bf.variance, exact.gamma));
            }
            if exact.gamma - bf.variance > 1e-6 {
                return Err(format!("{gains:?}, alpha {alpha}: brute force {} below {}", bf.variance, exact.gamma));
            }
            Ok(exact.gamma - bf.variance)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    within_budget(start.elapsed(), Duration::from_secs(60))
        .map(|t| format!("100 channels, largest shortfall {worst:.2e}, {t}"))
}

fn run_binary(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_miso-capacity")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {}", out.status));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 2] = [&["bounds", "--amin-db", "-15", "--amax-db", "20"], &["verify", "--seed", "42"]];
    for args in runs {
        let first = run_binary(args)?;
        let second = run_binary(args)?;
        if first != second || first.is_empty() {
            return Err(format!("{args:?} output differs between runs"));
        }
    }
    Ok("bounds and verify byte-identical over two runs".into())
}

fn main() {
    let crippled = DualitySearch { multistarts: 1, max_evals: 10, ..DualitySearch::default() };
    let criteria: Vec<Criterion> = vec![
        ("variance program reproduces the reference table", Box::new(table_variance)),
        ("regime thresholds", Box::new(thresholds)),
        (
            "bounds sandwich the exact information",
            Box::new(|| sandwich(DualitySearch::default(), Duration::from_secs(120))),
        ),
        ("high-SNR tightness", Box::new(high_snr)),
        ("low-SNR slope", Box::new(low_snr)),
        ("root-finder residuals", Box::new(root_residuals)),
        ("brute-force variance agreement", Box::new(bruteforce_agreement)),
        ("duality bound valid under crippled search", Box::new(move || sandwich(crippled, Duration::from_secs(120)))),
        ("deterministic CLI output", Box::new(determinism)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criterion/criteria failed");
        std::process::exit(1);
    }
}
