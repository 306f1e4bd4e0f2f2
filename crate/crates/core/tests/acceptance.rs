//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shuffle_accountant::asymptotics::jsd_canonical_asymptotic;
use shuffle_accountant::bounds::chernoff_delta;
use shuffle_accountant::exact_dist::{
    binomial_atoms, binomial_curve, divergences, linearization_residual, lr_atoms, privacy_curve,
    PiConvention,
};
use shuffle_accountant::io::{parse_eps_grid, DEFAULT_EPS_GRID};
use shuffle_accountant::montecarlo::{
    frequency_mse, kolmogorov_to_gaussian, rate_exponent, rr_boundary, Hypothesis, LossLaw,
    RegimeThresholds, SimConfig,
};
use shuffle_accountant::multimessage::{mm_gdp_compare, unbundled_lr};
use shuffle_accountant::simplex_linalg::{fisher_constant, fisher_via_mixture};
use shuffle_accountant::{rr_channel, score_stats, Channel, Composition, Sidedness};

const LN3: f64 = 1.098_612_288_668_109_8;
const LN2: f64 = std::f64::consts::LN_2;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Full-support channel with every entry drawn from [0.05, 1) before normalizing.
fn random_channel(rng: &mut ChaCha8Rng, d: usize) -> Channel {
    let mut row = || -> Vec<f64> {
        let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|x| x / total).collect()
    };
    let (w0, w1) = (row(), row());
    Channel::new(&w0, &w1).expect("random channel")
}

fn comp(n: usize, k: usize) -> Composition {
    Composition::new(n, k).unwrap()
}

fn exact_curve_oracle() -> Outcome {
    let grid = parse_eps_grid(DEFAULT_EPS_GRID).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let channels = [
        rr_channel(LN3).unwrap(),
        random_channel(&mut rng, 2),
        random_channel(&mut rng, 2),
    ];
    let mut worst = 0.0f64;
    for ch in &channels {
        for n in 1..=20 {
            let a = binomial_curve(ch, n, &grid).unwrap();
            let b = privacy_curve(
                &lr_atoms(ch, comp(n, 0)).unwrap(),
                &grid,
                Sidedness::OneSidedQOverP,
            )
            .unwrap();
            for (x, y) in a.deltas().iter().zip(b.deltas()) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max curve difference {worst:e}"))?;
    let rr = rr_channel(LN3).unwrap();
    let anchors = privacy_curve(
        &lr_atoms(&rr, comp(2, 0)).unwrap(),
        &[0.0, LN2, LN3],
        Sidedness::OneSidedQOverP,
    )
    .unwrap()
    .deltas();
    for (got, want) in anchors.iter().zip([0.375, 0.0625, 0.0]) {
        ensure((got - want).abs() <= 1e-12, || {
            format!("anchor {got} != {want}")
        })?;
    }
    Ok(format!("max difference {worst:.2e}; anchors 3/8, 1/16, 0"))
}

fn fisher_cross_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let ch = random_channel(&mut rng, 2 + i % 3);
        for pi in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let a = fisher_constant(&ch, pi).unwrap().i_pi;
            let b = fisher_via_mixture(&ch, pi).unwrap();
            worst = worst.max((a - b).abs() / (1.0 + a));
        }
    }
    ensure(worst <= 1e-9, || format!("relative gap {worst:e}"))?;
    let rr = rr_channel(LN3).unwrap();
    for pi in [0.0, 0.5] {
        let i = fisher_constant(&rr, pi).unwrap().i_pi;
        ensure((i - 4.0 / 3.0).abs() <= 1e-12, || {
            format!("RR I_{pi} = {i}")
        })?;
    }
    Ok(format!("max gap {worst:.2e}; RR I_0 = I_0.5 = 4/3"))
}

fn jsd_expansion_order() -> Outcome {
    let ch = rr_channel(LN3).unwrap();
    let mut scaled = Vec::new();
    for n in [50, 100, 200] {
        let exact = divergences(&binomial_atoms(&ch, n).unwrap(), &[])
            .unwrap()
            .jsd;
        let rep = jsd_canonical_asymptotic(&ch, n, Some(exact)).unwrap();
        scaled.push((n as f64).powi(3) * rep.residual.unwrap().abs());
    }
    let max = scaled.iter().cloned().fold(f64::MIN, f64::max);
    let min = scaled.iter().cloned().fold(f64::MAX, f64::min);
    ensure(min > 0.0 && max / min <= 3.0, || {
        format!("n^3 residuals {scaled:?}")
    })?;
    Ok(format!(
        "n^3 |residual| = {:.4}, {:.4}, {:.4}",
        scaled[0], scaled[1], scaled[2]
    ))
}

fn proportional_constant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ch = random_channel(&mut rng, 2);
    let mut errs = Vec::new();
    for n in [200, 400] {
        let k = n / 2;
        let jsd = divergences(&lr_atoms(&ch, comp(n, k)).unwrap(), &[])
            .unwrap()
            .jsd;
        let i = fisher_constant(&ch, k as f64 / n as f64).unwrap().i_pi;
        errs.push((8.0 * n as f64 * jsd / i - 1.0).abs());
    }
    ensure(errs[0] <= 0.1 && errs[1] < errs[0], || {
        format!("relative errors {errs:?}")
    })?;
    Ok(format!(
        "|8n JSD / I - 1| = {:.2e} (n=200), {:.2e} (n=400)",
        errs[0], errs[1]
    ))
}

fn kolmogorov_slopes(ch: &Channel, ns: &[usize]) -> Result<(f64, f64), String> {
    let chi2 = score_stats(ch).unwrap().chi2;
    let mut pts_p = Vec::new();
    let mut pts_q = Vec::new();
    for &n in ns {
        let atoms = binomial_atoms(ch, n).unwrap();
        let mu = (chi2 / n as f64).sqrt();
        pts_p.push((
            n as f64,
            kolmogorov_to_gaussian(LossLaw::Exact(&atoms), mu, Hypothesis::P).unwrap(),
        ));
        pts_q.push((
            n as f64,
            kolmogorov_to_gaussian(LossLaw::Exact(&atoms), mu, Hypothesis::Q).unwrap(),
        ));
    }
    Ok((
        rate_exponent(&pts_p).map_err(|e| e.to_string())?,
        rate_exponent(&pts_q).map_err(|e| e.to_string())?,
    ))
}

fn gdp_rate() -> Outcome {
    let ch = rr_channel(1.0).unwrap();
    let (sp, sq) = kolmogorov_slopes(&ch, &[400, 1600, 6400])?;
    let ok = |s: f64| (-0.75..=-0.35).contains(&s);
    ensure(ok(sp) && ok(sq), || format!("slopes P {sp}, Q {sq}"))?;
    Ok(format!("slopes P {sp:.3}, Q {sq:.3}"))
}

fn chernoff_soundness() -> Outcome {
    let mut checked = 0;
    for eps0 in [0.5, LN3] {
        let ch = rr_channel(eps0).unwrap();
        let grid: Vec<f64> = (0..20)
            .map(|i| 1.5 * eps0 * i as f64 / 19.0)
            .chain([eps0])
            .collect();
        let mut sorted = grid.clone();
        sorted.sort_by(f64::total_cmp);
        for n in 2..=30 {
            let exact = privacy_curve(
                &lr_atoms(&ch, comp(n, 0)).unwrap(),
                &sorted,
                Sidedness::OneSidedQOverP,
            )
            .unwrap()
            .deltas();
            for (&eps, ex) in sorted.iter().zip(exact) {
                let b = chernoff_delta(&ch, n, eps).unwrap().bound;
                ensure(b + 1e-12 >= ex, || {
                    format!("eps0 {eps0} n {n} eps {eps}: bound {b} < exact {ex}")
                })?;
                if eps >= eps0 {
                    ensure(b == 0.0, || {
                        format!("eps0 {eps0} n {n} eps {eps}: bound {b} != 0")
                    })?;
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (n, eps) points"))
}

/// `P(N)` and `Q(N)` by summing over every ordered message sequence; under `Q`
/// the first `m` messages belong to the user holding 1.
fn brute_force_unbundled(ch: &Channel, n: usize, m: usize) -> HashMap<Vec<u32>, (f64, f64)> {
    let d = ch.d();
    let len = n * m;
    let mut out: HashMap<Vec<u32>, (f64, f64)> = HashMap::new();
    let mut seq = vec![0usize; len];
    loop {
        let mut hist = vec![0u32; d];
        let (mut p, mut q) = (1.0, 1.0);
        for (j, &y) in seq.iter().enumerate() {
            hist[y] += 1;
            p *= ch.w0()[y];
            q *= if j < m { ch.w1()[y] } else { ch.w0()[y] };
        }
        let e = out.entry(hist).or_default();
        e.0 += p;
        e.1 += q;
        let mut i = 0;
        while i < len {
            seq[i] += 1;
            if seq[i] < d {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
        if i == len {
            return out;
        }
    }
}

fn unbundled_lr_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut count = 0;
    for c in 0..10 {
        let ch = random_channel(&mut rng, 2 + c % 2);
        for m in 1..=3 {
            for n in 1..=8 / m {
                for (h, (p, q)) in brute_force_unbundled(&ch, n, m) {
                    let lr = unbundled_lr(&ch, n, m, &h).unwrap();
                    worst = worst.max((lr - q / p).abs());
                    count += 1;
                }
            }
        }
    }
    ensure(worst <= 1e-10, || format!("max LR gap {worst:e}"))?;
    let rr = rr_channel(LN3).unwrap();
    let a = unbundled_lr(&rr, 2, 2, &[4, 0]).unwrap();
    let b = unbundled_lr(&rr, 2, 2, &[2, 2]).unwrap();
    ensure(
        (a - 1.0 / 9.0).abs() <= 1e-12 && (b - 59.0 / 27.0).abs() <= 1e-12,
        || format!("anchors {a}, {b}"),
    )?;
    Ok(format!(
        "{count} histograms, max gap {worst:.2e}; anchors 1/9, 59/27"
    ))
}

fn bundled_vs_unbundled() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..50 {
        let ch = random_channel(&mut rng, 2 + i % 3);
        for m in 2..=4 {
            let c = mm_gdp_compare(&ch, m).unwrap();
            ensure(c.mu_unb_sq_times_n < c.mu_bund_sq_times_n, || {
                format!("channel {i} m {m}: {c:?}")
            })?;
            // m = 2 is the equality case, so compare up to rounding
            ensure(
                c.ratio >= c.ratio_lower_bound * (1.0 - 8.0 * f64::EPSILON),
                || format!("channel {i} m {m}: {c:?}"),
            )?;
        }
    }
    let c = mm_gdp_compare(&rr_channel(LN3).unwrap(), 2).unwrap();
    let tol = 4.0 * f64::EPSILON;
    ensure(
        (c.ratio - 5.0 / 3.0).abs() <= tol && (c.ratio_lower_bound - 5.0 / 3.0).abs() <= tol,
        || format!("RR m=2: {c:?}"),
    )?;
    Ok("150 (channel, m) pairs; RR m=2 ratio = bound = 5/3".into())
}

fn boundary_scaling() -> Outcome {
    let ns = [400usize, 1600, 6400];
    let mut pts_p = Vec::new();
    let mut pts_q = Vec::new();
    for &n in &ns {
        let eps0 = 0.5 * (n as f64).ln();
        let ch = rr_channel(eps0).unwrap();
        let atoms = binomial_atoms(&ch, n).unwrap();
        let mu = (score_stats(&ch).unwrap().chi2 / n as f64).sqrt();
        pts_p.push((
            n as f64,
            kolmogorov_to_gaussian(LossLaw::Exact(&atoms), mu, Hypothesis::P).unwrap(),
        ));
        pts_q.push((
            n as f64,
            kolmogorov_to_gaussian(LossLaw::Exact(&atoms), mu, Hypothesis::Q).unwrap(),
        ));
    }
    let sp = rate_exponent(&pts_p).map_err(|e| e.to_string())?;
    let sq = rate_exponent(&pts_q).map_err(|e| e.to_string())?;
    let ok = |s: f64| (-0.45..=-0.10).contains(&s);
    ensure(ok(sp) && ok(sq), || format!("slopes P {sp}, Q {sq}"))?;
    let mut cells = 0;
    for i in 0..=60 {
        let eps0 = 0.1 * i as f64;
        for n in [10, 100, 1000] {
            let b = rr_boundary(eps0, n, RegimeThresholds::default()).unwrap();
            let ratio = if b.sigma2 > 0.0 {
                b.rho3 / b.sigma2.powf(1.5)
            } else {
                b.lyapunov_ratio
            };
            ensure(ratio <= 2.0 * (eps0 / 2.0).exp() * (1.0 + 1e-12), || {
                format!("eps0 {eps0}: ratio {ratio}")
            })?;
            ensure(
                ratio / (n as f64).sqrt() <= b.lyapunov_bound * (1.0 + 1e-12),
                || format!("eps0 {eps0} n {n}: {ratio} vs {}", b.lyapunov_bound),
            )?;
            cells += 1;
        }
    }
    Ok(format!(
        "slopes P {sp:.3}, Q {sq:.3}; {cells} boundary cells"
    ))
}

fn frequency_estimation() -> Outcome {
    let mut parts = Vec::new();
    for p in [0.0, 0.5, 1.0] {
        let cfg = SimConfig::new(10, 100_000, 4);
        let r = frequency_mse(LN3, 100, p, &cfg).unwrap();
        ensure(r.mse_estimate <= 0.01 * 1.05, || {
            format!("p {p}: mse {}", r.mse_estimate)
        })?;
        ensure(r.bias.abs() <= 4.0 * r.bias_se, || {
            format!("p {p}: bias {} se {}", r.bias, r.bias_se)
        })?;
        parts.push(format!("p={p}: mse {:.5}", r.mse_estimate));
    }
    Ok(parts.join(", "))
}

fn linearization_decay() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let channels = [
        ("RR(ln 3)", rr_channel(LN3).unwrap()),
        ("random d=3", random_channel(&mut rng, 3)),
    ];
    let mut parts = Vec::new();
    for (name, ch) in &channels {
        let at = |n: usize| {
            linearization_residual(ch, comp(n, n / 2), 0.25, PiConvention::LeaveOneOut)
                .unwrap()
                .max_residual
        };
        let (r8, r16) = (at(8), at(16));
        ensure(r16 <= 0.8 * r8, || {
            format!("{name}: residual {r8} (n=8) -> {r16} (n=16)")
        })?;
        parts.push(format!("{name} {r8:.4} -> {r16:.4}"));
    }
    Ok(parts.join(", "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let channel = dir.path().join("rr3.json");
    std::fs::write(
        &channel,
        r#"{"d": 2, "W0": [0.75, 0.25], "W1": [0.25, 0.75]}"#,
    )
    .unwrap();
    let run = |workers: usize, k: usize| -> Result<Vec<u8>, String> {
        let out = dir.path().join(format!("sim-{workers}-{k}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_shuffle-accountant"))
            .args(["simulate", "--channel"])
            .arg(&channel)
            .args([
                "--n",
                "50",
                "--k",
                &k.to_string(),
                "--seed",
                "2024",
                "--reps",
                "20000",
            ])
            .args([
                "--workers",
                &workers.to_string(),
                "--timestamp",
                "fixed",
                "--out",
            ])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || {
            format!("simulate exited with {status}")
        })?;
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    for k in [0, 10] {
        let (a, b) = (run(1, k)?, run(4, k)?);
        ensure(!a.is_empty() && a == b, || {
            format!("k={k}: outputs differ between 1 and 4 workers")
        })?;
    }
    Ok("k=0 and k=10, 20000 reps each".into())
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "exact curve oracle equivalence",
            budget: Duration::from_secs(5),
            run: exact_curve_oracle,
        },
        Criterion {
            id: 2,
            name: "Fisher constant cross-check",
            budget: Duration::from_secs(1),
            run: fisher_cross_check,
        },
        Criterion {
            id: 3,
            name: "canonical JSD expansion order",
            budget: Duration::from_secs(10),
            run: jsd_expansion_order,
        },
        Criterion {
            id: 4,
            name: "proportional JSD constant",
            budget: Duration::from_secs(30),
            run: proportional_constant,
        },
        Criterion {
            id: 5,
            name: "GDP convergence rate",
            budget: Duration::from_secs(60),
            run: gdp_rate,
        },
        Criterion {
            id: 6,
            name: "Chernoff bound soundness",
            budget: Duration::from_secs(5),
            run: chernoff_soundness,
        },
        Criterion {
            id: 7,
            name: "unbundled likelihood ratio",
            budget: Duration::from_secs(5),
            run: unbundled_lr_check,
        },
        Criterion {
            id: 8,
            name: "bundled vs unbundled GDP",
            budget: Duration::from_secs(1),
            run: bundled_vs_unbundled,
        },
        Criterion {
            id: 9,
            name: "RR boundary scaling",
            budget: Duration::from_secs(60),
            run: boundary_scaling,
        },
        Criterion {
            id: 10,
            name: "frequency estimation MSE",
            budget: Duration::from_secs(10),
            run: frequency_estimation,
        },
        Criterion {
            id: 11,
            name: "linearization residual decay",
            budget: Duration::from_secs(30),
            run: linearization_decay,
        },
        Criterion {
            id: 12,
            name: "simulation determinism",
            budget: Duration::from_secs(10),
            run: determinism,
        },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => Err(format!(
                "{detail}; took {elapsed:.2?}, budget {:?}",
                c.budget
            )),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {} ({elapsed:.2?}): {detail}", c.id, c.name),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {:>2}. {} ({elapsed:.2?}): {detail}", c.id, c.name);
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
