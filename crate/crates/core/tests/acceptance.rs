//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::{Command, Output};
use std::time::{Duration, Instant};

use kerrpol::analysis::{
    dbm_add, electronic_noise_correct, extract_minimum, linear_to_db, loss_apply, loss_correct,
    total_efficiency,
};
use kerrpol::experiment::{
    apply_bench_losses, build_source, inclusive_grid, rotate_sweep, BenchConfig,
    REFERENCE_ENERGY_PJ,
};
use kerrpol::fock::commutator_check;
use kerrpol::gaussian::{GaussianState, SymplecticTransform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BIN: &str = env!("CARGO_BIN_EXE_kerrpol");

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn kerrpol(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("KERRPOL_THREADS")
        .output()
        .expect("spawn kerrpol")
}

fn ok_stdout(o: &Output) -> std::result::Result<String, String> {
    if o.status.code() != Some(0) {
        return Err(format!(
            "exit {:?}: {}",
            o.status.code(),
            String::from_utf8_lossy(&o.stderr).trim()
        ));
    }
    String::from_utf8(o.stdout.clone()).map_err(|e| e.to_string())
}

fn report_field(text: &str, key: &str) -> std::result::Result<f64, String> {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .ok_or_else(|| format!("no `{key}` in report"))?
        .trim()
        .parse()
        .map_err(|e| format!("`{key}`: {e}"))
}

fn csv_column(text: &str, col: usize) -> Vec<(f64, f64)> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[0], f[col])
        })
        .collect()
}

fn pure_kerr_bench(gamma: f64) -> BenchConfig {
    BenchConfig {
        pulse_energy: Some(1.0),
        kerr_coefficient: gamma,
        thermal_noise_coeff: 0.0,
        fiber_end_loss: 0.0,
        optics_loss: 0.0,
        detector_loss: 0.0,
        mean_photon_number: 1e6,
        ..BenchConfig::default()
    }
}

fn loss_inference() -> Check {
    let text = ok_stdout(&kerrpol(&[
        "analyze",
        "--measured-db",
        "-5.1",
        "--eta",
        "0.795",
    ]))?;
    let db = report_field(&text, "inferred_source_db")?;
    if (-8.9..=-8.7).contains(&db) && (db + 8.8).abs() <= 0.1 {
        Ok(format!("inferred {db} dB"))
    } else {
        Err(format!("inferred {db} dB outside [-8.9, -8.7]"))
    }
}

fn efficiency_budget() -> Check {
    let eta = total_efficiency(&[0.04, 0.078, 0.10]).map_err(|e| e.to_string())?;
    let loss = 100.0 * (1.0 - eta);
    if (eta - 0.7965).abs() <= 0.0005 && (20.3..=20.5).contains(&loss) {
        Ok(format!("eta {eta:.6}, loss {loss:.2}%"))
    } else {
        Err(format!("eta {eta}"))
    }
}

fn calibrated_figure() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let frag = dir.path().join("calibrated.cfg");
    let frag = frag.to_str().unwrap();
    ok_stdout(&kerrpol(&[
        "calibrate",
        "--target-db",
        "-5.1",
        "--at-energy",
        "83.7",
        "--out",
        frag,
    ]))?;
    let e = REFERENCE_ENERGY_PJ.to_string();

    let coarse = ok_stdout(&kerrpol(&[
        "--config",
        frag,
        "rotate-sweep",
        "--energy",
        &e,
        "--phi-start",
        "0",
        "--phi-end",
        "90",
        "--phi-step",
        "1",
    ]))?;
    let coarse = csv_column(&coarse, 5);
    let coarse_min = coarse.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let at_zero = coarse.iter().find(|p| p.0 == 0.0).ok_or("no Φ=0 row")?.1;

    let fine = ok_stdout(&kerrpol(&[
        "--config",
        frag,
        "rotate-sweep",
        "--energy",
        &e,
        "--phi-start",
        "0",
        "--phi-end",
        "45",
        "--phi-step",
        "0.01",
    ]))?;
    let fine_min = csv_column(&fine, 5)
        .iter()
        .map(|p| p.1)
        .fold(f64::INFINITY, f64::min);

    // the same sweep through the library, refined by parabolic interpolation
    let text = std::fs::read_to_string(frag).map_err(|e| e.to_string())?;
    let kappa: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("kerr_coefficient = "))
        .ok_or("fragment lacks kerr_coefficient")?
        .parse()
        .map_err(|e| format!("{e}"))?;
    let cfg = BenchConfig {
        kerr_coefficient: kappa,
        ..BenchConfig::default()
    }
    .with_energy(REFERENCE_ENERGY_PJ);
    let trace =
        rotate_sweep(&cfg, &inclusive_grid(0.0, 90.0, 1.0).unwrap()).map_err(|e| e.to_string())?;
    let refined = extract_minimum(&trace).map_err(|e| e.to_string())?.v_min_db;

    let within = |x: f64| (x + 5.1).abs() <= 0.05;
    let detail = format!(
        "min {coarse_min:.4} dB (1° grid), {fine_min:.4} dB (0.01° grid), {refined:.4} dB (refined); Φ=0 {at_zero:.2e} dB"
    );
    if within(coarse_min) && within(fine_min) && within(refined) && at_zero.abs() <= 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn minimum_uncertainty() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_prod, mut worst_amp) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let gamma = rng.random_range(0.0..=10.0);
        let s = GaussianState::vacuum(1)
            .apply(&SymplecticTransform::kerr_shear(gamma).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let e = s.min_variance_direction(0).map_err(|e| e.to_string())?;
        worst_prod = worst_prod.max((e.v_min * e.v_max - 1.0).abs());
        worst_amp =
            worst_amp.max((s.quadrature_variance(0, 0.0).map_err(|e| e.to_string())? - 1.0).abs());
    }
    let detail =
        format!("max |v_min·v_max − 1| = {worst_prod:.1e}, max |V(0) − 1| = {worst_amp:.1e}");
    if worst_prod <= 1e-9 && worst_amp <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn squeezing_angle_law() -> Check {
    let step_theta_deg = 1.0;
    let grid = inclusive_grid(0.0, 45.0, step_theta_deg / 4.0).unwrap();
    let mut prev = f64::INFINITY;
    let mut worst = 0.0f64;
    for gamma in [0.25, 0.5, 1.0, 2.0, 5.0] {
        let trace = rotate_sweep(&pure_kerr_bench(gamma), &grid).map_err(|e| e.to_string())?;
        let m = extract_minimum(&trace).map_err(|e| e.to_string())?;
        // fold into [-90°, 90°)
        let got = (m.theta.to_degrees() + 90.0).rem_euclid(180.0) - 90.0;
        let want = (-0.5 * (1.0 / gamma).atan()).to_degrees();
        worst = worst.max((got - want).abs());
        if got.abs() >= prev {
            return Err(format!("|θ_sq| not decreasing at γ = {gamma}"));
        }
        prev = got.abs();
    }
    let detail = format!("max error {worst:.4}° (limit {}°)", step_theta_deg / 4.0);
    if worst <= step_theta_deg / 4.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalence() -> Check {
    let text = ok_stdout(&kerrpol(&[
        "verify-oracle",
        "--alpha2",
        "4",
        "--gamma",
        "0.05",
        "--nmax",
        "30",
    ]))?;
    let dev = report_field(&text, "max_rel_deviation")?;
    let n = text.lines().filter(|l| l.starts_with("point_")).count();
    if dev <= 0.05 && n == 16 {
        Ok(format!("max relative deviation {dev:.3e} over {n} angles"))
    } else {
        Err(format!("deviation {dev} over {n} angles"))
    }
}

fn operator_algebra() -> Check {
    let r = commutator_check(5).map_err(|e| e.to_string())?;
    let detail = format!(
        "safe {:.1e}, [S0,Si] {:.1e}, boundary {:.2}",
        r.safe_deviation, r.s0_deviation, r.full_deviation
    );
    if r.safe_deviation < 1e-12 && r.s0_deviation < 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn heisenberg_bound() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let cfg = BenchConfig {
            pulse_energy: Some(rng.random_range(1.0..150.0)),
            kerr_coefficient: rng.random_range(0.0..0.2),
            thermal_noise_coeff: rng.random_range(0.0..1e-4),
            thermal_exponent: rng.random_range(0.0..3.0),
            fiber_end_loss: rng.random_range(0.0..0.95),
            optics_loss: rng.random_range(0.0..0.95),
            detector_loss: rng.random_range(0.0..0.95),
            mean_photon_number: 10f64.powf(rng.random_range(0.0..9.0)),
            ..BenchConfig::default()
        };
        let p = build_source(&cfg)
            .and_then(|s| apply_bench_losses(&s, &cfg))
            .map_err(|e| e.to_string())?;
        let v1 = p.stokes_variance(1).map_err(|e| e.to_string())?;
        let v2 = p.stokes_variance(2).map_err(|e| e.to_string())?;
        let s3sq = p.stokes_means().s3.powi(2);
        let margin = v1 * v2 / s3sq;
        if v1 * v2 < s3sq - 1e-8 * s3sq {
            return Err(format!("violated: Var1·Var2/⟨S3⟩² = {margin}"));
        }
        worst = worst.min(margin);
    }
    Ok(format!("min Var(S1)·Var(S2)/⟨S3⟩² = {worst:.6}"))
}

fn round_trips() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut el_err, mut loss_err) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let electronic = rng.random_range(-110.0..-60.0);
        let signal = electronic + rng.random_range(0.5..60.0);
        let raw = dbm_add(signal, electronic);
        let back = electronic_noise_correct(raw, electronic).map_err(|e| e.to_string())?;
        el_err = el_err.max((back - signal).abs());

        let v: f64 = rng.random_range(0.01..100.0);
        let eta = rng.random_range(0.01..=1.0);
        let restored = loss_correct(loss_apply(v, eta), eta).map_err(|e| e.to_string())?;
        let d = linear_to_db(restored).map_err(|e| e.to_string())?
            - linear_to_db(v).map_err(|e| e.to_string())?;
        loss_err = loss_err.max(d.abs());
    }
    let detail = format!("electronic {el_err:.1e} dB, loss {loss_err:.1e} dB");
    if el_err <= 1e-9 && loss_err <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn periodicity() -> Check {
    let cfg = BenchConfig::default().with_energy(REFERENCE_ENERGY_PJ);
    // 0.25° steps: index i and i + 180 are Φ and Φ + 45°
    let grid = inclusive_grid(0.0, 90.0, 0.25).unwrap();
    let t = rotate_sweep(&cfg, &grid).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for i in 0..=180 {
        worst = worst.max((t.points[i].corrected_db - t.points[i + 180].corrected_db).abs());
    }
    let detail = format!("max |ΔdB| = {worst:.1e}");
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "1 loss inference reproduction",
            Duration::from_secs(1),
            loss_inference,
        ),
        (
            "2 efficiency budget",
            Duration::from_secs(1),
            efficiency_budget,
        ),
        (
            "3 calibrated figure reproduction",
            Duration::from_secs(5),
            calibrated_figure,
        ),
        (
            "4 minimum uncertainty",
            Duration::from_secs(60),
            minimum_uncertainty,
        ),
        (
            "5 squeezing-angle law",
            Duration::from_secs(60),
            squeezing_angle_law,
        ),
        (
            "6 oracle equivalence",
            Duration::from_secs(30),
            oracle_equivalence,
        ),
        (
            "7 operator algebra",
            Duration::from_secs(60),
            operator_algebra,
        ),
        (
            "8 Heisenberg bound",
            Duration::from_secs(10),
            heisenberg_bound,
        ),
        (
            "9 round-trip corrections",
            Duration::from_secs(60),
            round_trips,
        ),
        ("10 periodicity", Duration::from_secs(60), periodicity),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if took <= budget => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(d) => (false, d),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] {name}: {detail} ({:.3} s, limit {} s)",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
