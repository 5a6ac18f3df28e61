//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints its PASS/FAIL line; the process exits nonzero if any fails.

use std::time::Instant;

use blocknorm::blocks::{bbsb_partition, interlace_partition, BlockTag};
use blocknorm::dist::RefDist;
use blocknorm::infer::{simultaneous_ci, CiOptions};
use blocknorm::mc::{estimate_tail_with, ks_distance, linear_grid, simulate_values, table1};
use blocknorm::procgen::{derive_rep_seed, gen_iid_panel};
use blocknorm::stats::{i_n, i_n_star, t_n_star, two_sample_w, w_n, w_n_star};
use blocknorm::{Normalization, ProcessSpec, Seed, Series, SimConfig, StatKind, TwoSampleData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: Seed = Seed(12345);

/// Published tail table: x, 1-Phi, 1-t19, 1-t9, ratio.
const TABLE1: [[f64; 5]; 25] = [
    [1.6, 0.05480, 0.06305, 0.07203, 1.31446],
    [1.7, 0.04457, 0.05272, 0.06167, 1.38389],
    [1.8, 0.03593, 0.04388, 0.05270, 1.46660],
    [1.9, 0.02872, 0.03636, 0.04494, 1.56509],
    [2.0, 0.02275, 0.03000, 0.03828, 1.68247],
    [2.1, 0.01786, 0.02466, 0.03256, 1.82257],
    [2.2, 0.01390, 0.02019, 0.02767, 1.99017],
    [2.3, 0.01072, 0.01648, 0.02350, 2.19130],
    [2.4, 0.00820, 0.01340, 0.01995, 2.43353],
    [2.5, 0.00621, 0.01087, 0.01693, 2.72654],
    [2.6, 0.00466, 0.00879, 0.01437, 3.08271],
    [2.7, 0.00347, 0.00709, 0.01220, 3.51801],
    [2.8, 0.00256, 0.00571, 0.01036, 4.05315],
    [2.9, 0.00187, 0.00459, 0.00880, 4.71520],
    [3.0, 0.00135, 0.00368, 0.00748, 5.53981],
    [3.1, 0.00097, 0.00295, 0.00636, 6.57421],
    [3.2, 0.00069, 0.00236, 0.00542, 7.88146],
    [3.3, 0.00048, 0.00188, 0.00461, 9.54639],
    [3.4, 0.00034, 0.00150, 0.00394, 11.68395],
    [3.5, 0.00023, 0.00120, 0.00336, 14.45115],
    [3.6, 0.00016, 0.00095, 0.00287, 18.06411],
    [3.7, 0.00011, 0.00076, 0.00246, 22.82270],
    [3.8, 0.00007, 0.00060, 0.00211, 29.14637],
    [3.9, 0.00005, 0.00048, 0.00181, 37.62668],
    [4.0, 0.00003, 0.00038, 0.00156, 49.10493],
];

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn design(process: ProcessSpec, stat: StatKind) -> SimConfig {
    SimConfig::paper_design(process, stat, SEED).expect("valid design")
}

fn ratios(process: ProcessSpec, stat: StatKind) -> Vec<(f64, f64)> {
    let table = estimate_tail_with(&design(process, stat), None).expect("simulation");
    table.rows.iter().map(|r| (r.x, r.ratio.unwrap_or(f64::NAN))).collect()
}

fn at(rows: &[(f64, f64)], x: f64) -> f64 {
    rows.iter().find(|(g, _)| (g - x).abs() < 1e-9).map(|r| r.1).expect("grid point")
}

fn table_reproduction() -> Outcome {
    let start = Instant::now();
    let rows = table1();
    let elapsed = start.elapsed().as_secs_f64();
    let mut worst: f64 = 0.0;
    for (ours, want) in rows.iter().zip(TABLE1.iter()) {
        assert!((ours.x - want[0]).abs() < 1e-12);
        let got = [ours.normal, ours.t19, ours.t9, ours.ratio];
        for (g, w) in got.iter().zip(&want[1..]) {
            let rounded = (g * 1e5).round() / 1e5;
            worst = worst.max((rounded - w).abs());
        }
    }
    let pass = rows.len() == 25 && worst <= 1.0e-5 + 1e-12 && elapsed < 1.0;
    outcome(pass, format!("25x4 cells, max |diff| after rounding {worst:.1e}, {elapsed:.4} s"))
}

fn exact_t_null_law() -> Outcome {
    let cases = [
        (StatKind::InStar, RefDist::StudentT(9)),
        (StatKind::WnStar, RefDist::StudentT(19)),
        (StatKind::TnStar, RefDist::StudentT(19)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (stat, reference) in cases {
        let values = simulate_values(&design(ProcessSpec::IidNormal, stat), None).expect("simulation");
        let d = ks_distance(&values, reference).expect("ks");
        pass &= d < 0.006;
        parts.push(format!("{}~{reference} KS={d:.4}", stat.name()));
    }
    outcome(pass, parts.join(", "))
}

fn independence_columns() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for stat in [StatKind::TnStar, StatKind::InStar, StatKind::WnStar] {
        let rows = ratios(ProcessSpec::Ar1 { rho: 0.0 }, stat);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(x, r) in &rows {
            let band = if x <= 2.5 + 1e-9 { 0.05 } else { 0.15 };
            pass &= (r - 1.0).abs() <= band;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        parts.push(format!("{} in [{lo:.3}, {hi:.3}] (x=2.5: {:.3}, x=4: {:.3})", stat.name(), at(&rows, 2.5), at(&rows, 4.0)));
    }
    outcome(pass, parts.join("; "))
}

fn strong_dependence() -> Outcome {
    let ar = ProcessSpec::Ar1 { rho: 0.9 };
    let t = ratios(ar, StatKind::TnStar);
    let i = ratios(ar, StatKind::InStar);
    let (t16, t20, t40) = (at(&t, 1.6), at(&t, 2.0), at(&t, 4.0));
    let i40 = at(&i, 4.0);
    let pass = t40 > 2.0 && (0.85..=1.15).contains(&i40) && t40 > t20 && t20 > t16;
    outcome(pass, format!("t-star 1.6/2.0/4.0 = {t16:.3}/{t20:.3}/{t40:.3}, i-star(4.0) = {i40:.3}"))
}

fn arch_spot_check() -> Outcome {
    let arch = ProcessSpec::Arch1 { a: 1.0, b: 0.9 };
    let targets = [(StatKind::TnStar, 0.65), (StatKind::InStar, 0.70), (StatKind::WnStar, 0.63)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (stat, target) in targets {
        let r = at(&ratios(arch, stat), 4.0);
        pass &= (r - target).abs() <= 0.2;
        parts.push(format!("{}={r:.3} (target {target})", stat.name()));
    }
    outcome(pass, parts.join(", "))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
}

/// Evaluates all six statistics on `xs` (and a second sample `zs`) at
/// center `mu` with fixed block sizes.
fn six(xs: &[f64], zs: &[f64], mu: f64, m1: usize, m2: usize, m: usize) -> [f64; 6] {
    let s = Series::new(xs.to_vec()).unwrap();
    let two = TwoSampleData { x1: s.clone(), x2: Series::new(zs.to_vec()).unwrap() };
    let norm = Normalization::Student;
    [
        w_n(&s, m1, m2).unwrap().value,
        w_n_star(&s, m1, m2, mu, norm).unwrap().value,
        i_n(&s, m).unwrap().value,
        i_n_star(&s, m, mu, norm).unwrap().value,
        t_n_star(&s, m, norm).unwrap().value,
        two_sample_w(&two, m1, m2).unwrap().value,
    ]
}

fn property_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED.0);
    let mut failures = Vec::new();

    for case in 0..1000 {
        let n = rng.random_range(40..400);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let zs: Vec<f64> = (0..n + 7).map(|_| rng.random_range(-3.0..3.0)).collect();
        let m2 = rng.random_range(1..=n / 8);
        let m1 = rng.random_range(m2..=n / 4 - m2);
        let m = rng.random_range(1..=n / 4);
        let mu = rng.random_range(-0.5..0.5);
        let c = rng.random_range(0.01..100.0);

        // t_n_star is centered at zero, so its scale check shifts nothing
        let base = six(&xs, &zs, mu, m1, m2, m);
        let scaled_x: Vec<f64> = xs.iter().map(|v| c * v).collect();
        let scaled_z: Vec<f64> = zs.iter().map(|v| c * v).collect();
        let scaled = six(&scaled_x, &scaled_z, c * mu, m1, m2, m);
        let neg_x: Vec<f64> = xs.iter().map(|v| -v).collect();
        let neg_z: Vec<f64> = zs.iter().map(|v| -v).collect();
        let negated = six(&neg_x, &neg_z, -mu, m1, m2, m);
        for j in 0..6 {
            if !close(base[j], scaled[j]) {
                failures.push(format!("scale case {case} stat {j}"));
            }
            if !close(base[j], -negated[j]) {
                failures.push(format!("odd case {case} stat {j}"));
            }
        }

        let s = Series::new(xs.clone()).unwrap();
        if i_n(&s, m).unwrap().value.to_bits() != w_n(&s, m, m).unwrap().value.to_bits() {
            failures.push(format!("i_n != w_n case {case}"));
        }

        let (pn, pm2) = (rng.random_range(1..5000), rng.random_range(1..80));
        let pm1 = pm2 + rng.random_range(0..80);
        match bbsb_partition(pn, pm1, pm2) {
            Ok(p) => {
                let mut covered = 0;
                let mut last_end = 0;
                for b in &p.blocks {
                    let want = if b.tag == BlockTag::Big { pm1 } else { pm2 };
                    if b.start != last_end + 1 || b.len() != want {
                        failures.push(format!("partition ({pn},{pm1},{pm2})"));
                    }
                    last_end = b.end;
                    covered += b.len();
                }
                if p.k != pn / (pm1 + pm2) || covered != p.k * (pm1 + pm2) || last_end > pn {
                    failures.push(format!("partition sizes ({pn},{pm1},{pm2})"));
                }
            }
            Err(_) if pm1 + pm2 > pn => {}
            Err(e) => failures.push(format!("partition ({pn},{pm1},{pm2}): {e}")),
        }
        if let Ok(p) = interlace_partition(pn, pm2) {
            if p.with_tag(BlockTag::Odd).count() != pn / (2 * pm2) {
                failures.push(format!("interlace ({pn},{pm2})"));
            }
        }

        let x = rng.random_range(-6.0..6.0);
        let df = rng.random_range(1..300);
        for dist in [RefDist::Normal, RefDist::StudentT(df)] {
            let back = dist.quantile(dist.cdf(x).unwrap()).unwrap();
            if (back - x).abs() >= 1e-8 {
                failures.push(format!("round trip {dist} at {x}: {back}"));
            }
        }
    }

    let mut config = design(ProcessSpec::Arch1 { a: 1.0, b: 0.5 }, StatKind::TnStar);
    config.reps = 4000;
    config.x_grid = linear_grid(0.0, 4.0, 0.25).unwrap();
    let one = estimate_tail_with(&config, Some(1)).unwrap();
    let eight = estimate_tail_with(&config, Some(8)).unwrap();
    let bitwise = one.rows.len() == eight.rows.len()
        && one.rows.iter().zip(&eight.rows).all(|(a, b)| {
            a.exceedances == b.exceedances
                && a.mc_tail.to_bits() == b.mc_tail.to_bits()
                && a.mc_se.to_bits() == b.mc_se.to_bits()
                && a.ratio.map(f64::to_bits) == b.ratio.map(f64::to_bits)
        });
    if !bitwise {
        failures.push("worker count changed estimate_tail output".into());
    }

    let detail = if failures.is_empty() {
        "1000 random cases: scale, odd symmetry, i_n = w_n(m,m), partitions, round trips; 1 vs 8 workers bitwise equal".to_string()
    } else {
        format!("{} failures, first: {}", failures.len(), failures[0])
    };
    outcome(failures.is_empty(), detail)
}

fn inference_coverage() -> Outcome {
    let reps = 2000u64;
    let (n, p) = (2000, 20);
    let opts = CiOptions { alpha: 0.05, m: None, use_t: true, normalization: Normalization::Student };
    let mut covered = 0u64;
    for r in 0..reps {
        let panel = gen_iid_panel(n, p, derive_rep_seed(SEED, r)).expect("panel");
        let ci = simultaneous_ci(&panel, &opts).expect("intervals");
        if ci.intervals.iter().all(|iv| iv.contains(0.0)) {
            covered += 1;
        }
    }
    let coverage = covered as f64 / reps as f64;
    let fwer = 1.0 - coverage;
    outcome(coverage >= 0.93 && fwer <= 0.07, format!("coverage {coverage:.4}, family-wise rejection {fwer:.4}"))
}

fn hand_oracles() -> Outcome {
    let s = Series::new((1..=8).map(f64::from).collect()).unwrap();
    let plain = Normalization::Plain;
    let checks = [
        ("w_n(2,2)", w_n(&s, 2, 2).unwrap().value, 14.0 / 130f64.sqrt()),
        ("i_n(2)", i_n(&s, 2).unwrap().value, 14.0 / 130f64.sqrt()),
        ("w_n_star(2,2) plain", w_n_star(&s, 2, 2, 0.0, plain).unwrap().value, 14.0 / 32f64.sqrt()),
        ("i_n_star(2) plain", i_n_star(&s, 2, 0.0, plain).unwrap().value, 14.0 / 32f64.sqrt()),
        ("t_n_star(2) plain", t_n_star(&s, 2, plain).unwrap().value, 36.0 / 80f64.sqrt()),
        (
            "i_n_star(2) student",
            i_n_star(&s, 2, 0.0, Normalization::Student).unwrap().value,
            14.0 / 32f64.sqrt() * 0.5f64.sqrt(),
        ),
        (
            "t_n_star(2) student",
            t_n_star(&s, 2, Normalization::Student).unwrap().value,
            36.0 / 80f64.sqrt() * 0.75f64.sqrt(),
        ),
    ];
    let worst = checks.iter().map(|(_, got, want)| (got - want).abs()).fold(0.0, f64::max);
    let names: Vec<&str> = checks.iter().map(|c| c.0).collect();
    outcome(worst <= 1e-12, format!("{}; max |diff| {worst:.1e}", names.join(", ")))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 tail table reproduction", table_reproduction),
        ("2 exact-t null law", exact_t_null_law),
        ("3 independence ratios", independence_columns),
        ("4 strong dependence signature", strong_dependence),
        ("5 ARCH spot check", arch_spot_check),
        ("6 property suite", property_suite),
        ("7 inference coverage", inference_coverage),
        ("8 hand-computed oracles", hand_oracles),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {name}: {} ({:.1} s)", o.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
