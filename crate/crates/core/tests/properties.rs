use blocknorm::blocks::{batch_partition, bbsb_partition, block_sums, interlace_partition, BlockTag};
use blocknorm::dist::{normal_cdf, t_cdf, RefDist};
use blocknorm::infer::{simultaneous_ci, CiOptions};
use blocknorm::stats::{i_n, i_n_star, t_n_star, two_sample_w, w_n, w_n_star};
use blocknorm::{Normalization, PanelSeries, Series, TwoSampleData};
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn series_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0_f64, 24..240)
}

proptest! {
    #[test]
    fn partitions_are_disjoint_and_sized(n in 1usize..3000, m2 in 1usize..40, extra in 0usize..60) {
        let m1 = m2 + extra;
        match bbsb_partition(n, m1, m2) {
            Ok(p) => {
                prop_assert_eq!(p.k, n / (m1 + m2));
                let mut seen = vec![false; n + 1];
                for b in &p.blocks {
                    prop_assert!(b.start >= 1 && b.end <= n);
                    let want = if b.tag == BlockTag::Big { m1 } else { m2 };
                    prop_assert_eq!(b.len(), want);
                    for slot in &mut seen[b.start..=b.end] {
                        prop_assert!(!*slot);
                        *slot = true;
                    }
                }
                for tag in [BlockTag::Big, BlockTag::Small] {
                    let starts: Vec<usize> = p.with_tag(tag).map(|b| b.start).collect();
                    prop_assert!(starts.windows(2).all(|w| w[0] < w[1]));
                }
            }
            Err(_) => prop_assert!(m1 + m2 > n),
        }
    }

    #[test]
    fn equal_blocks_match_interlace(n in 2usize..2000, m in 1usize..60) {
        prop_assume!(2 * m <= n);
        let big: Vec<(usize, usize)> = bbsb_partition(n, m, m).unwrap()
            .with_tag(BlockTag::Big).map(|b| (b.start, b.end)).collect();
        let odd: Vec<(usize, usize)> = interlace_partition(n, m).unwrap()
            .with_tag(BlockTag::Odd).map(|b| (b.start, b.end)).collect();
        prop_assert_eq!(big, odd);
    }

    #[test]
    fn batch_sums_total(xs in series_strategy(), m in 1usize..12) {
        prop_assume!(2 * m <= xs.len());
        let p = batch_partition(xs.len(), m).unwrap();
        let s = block_sums(&xs, &p, BlockTag::Batch).unwrap();
        let direct: f64 = xs[..2 * p.k * m].iter().sum();
        prop_assert!(close(s.values.iter().sum::<f64>(), direct, 1e-12));
    }

    #[test]
    fn block_sums_are_linear(
        pair in prop::collection::vec((-5.0..5.0_f64, -5.0..5.0_f64), 20..200),
        a in -3.0..3.0_f64, b in -3.0..3.0_f64, m in 1usize..8,
    ) {
        let (x, z): (Vec<f64>, Vec<f64>) = pair.into_iter().unzip();
        prop_assume!(2 * m <= x.len());
        let p = interlace_partition(x.len(), m).unwrap();
        let combo: Vec<f64> = x.iter().zip(&z).map(|(u, v)| a * u + b * v).collect();
        let sx = block_sums(&x, &p, BlockTag::Odd).unwrap().values;
        let sz = block_sums(&z, &p, BlockTag::Odd).unwrap().values;
        let sc = block_sums(&combo, &p, BlockTag::Odd).unwrap().values;
        for j in 0..sc.len() {
            prop_assert!((sc[j] - (a * sx[j] + b * sz[j])).abs() < 1e-9);
        }
    }

    #[test]
    fn starred_statistics_are_shift_invariant(xs in series_strategy(), c in -50.0..50.0_f64, mu in -1.0..1.0_f64) {
        let n = xs.len();
        let s = Series::new(xs.clone()).unwrap();
        let shifted = Series::new(xs.iter().map(|x| x + c).collect()).unwrap();
        let m = (n / 8).max(1);
        if let Ok(a) = i_n_star(&s, m, mu, Normalization::Student) {
            let b = i_n_star(&shifted, m, mu + c, Normalization::Student).unwrap();
            prop_assert!(close(a.value, b.value, 1e-6), "{} vs {}", a.value, b.value);
        }
        let (m1, m2) = ((n / 10).max(2), (n / 20).max(1));
        if let Ok(a) = w_n_star(&s, m1, m2, mu, Normalization::Plain) {
            let b = w_n_star(&shifted, m1, m2, mu + c, Normalization::Plain).unwrap();
            prop_assert!(close(a.value, b.value, 1e-6));
        }
    }

    #[test]
    fn two_sample_scale_invariance(x1 in series_strategy(), x2 in series_strategy(), c in 0.01..100.0_f64) {
        let m = 4;
        let d = TwoSampleData { x1: Series::new(x1.clone()).unwrap(), x2: Series::new(x2.clone()).unwrap() };
        let scaled = TwoSampleData {
            x1: Series::new(x1.iter().map(|v| c * v).collect()).unwrap(),
            x2: Series::new(x2.iter().map(|v| c * v).collect()).unwrap(),
        };
        let a = two_sample_w(&d, m, m).unwrap();
        let b = two_sample_w(&scaled, m, m).unwrap();
        prop_assert!(close(a.value, b.value, 1e-9));
    }

    #[test]
    fn interval_affine_equivariance(
        col in prop::collection::vec(-3.0..3.0_f64, 60..300),
        other in -3.0..3.0_f64,
        c in 0.1..20.0_f64, d in -100.0..100.0_f64,
    ) {
        let rows: Vec<Vec<f64>> = col.iter().enumerate().map(|(i, &v)| vec![v, other * (i % 5) as f64]).collect();
        let panel = PanelSeries::from_rows(&rows).unwrap();
        let moved_rows: Vec<Vec<f64>> = rows.iter().map(|r| vec![c * r[0] + d, r[1]]).collect();
        let moved = PanelSeries::from_rows(&moved_rows).unwrap();
        let opts = CiOptions { m: Some(3), ..Default::default() };
        let a = simultaneous_ci(&panel, &opts).unwrap();
        let b = simultaneous_ci(&moved, &opts).unwrap();
        prop_assert!((b.intervals[0].center - (c * a.intervals[0].center + d)).abs() < 1e-9 * (1.0 + d.abs() + c));
        prop_assert!((b.intervals[0].halfwidth - c * a.intervals[0].halfwidth).abs() < 1e-9 * (1.0 + c));
        // column 1 is untouched
        prop_assert_eq!(a.intervals[1], b.intervals[1]);
    }

    #[test]
    fn quantile_round_trip(x in -6.0..6.0_f64, df in 1u32..300) {
        for dist in [RefDist::Normal, RefDist::StudentT(df)] {
            let p = dist.cdf(x).unwrap();
            let back = dist.quantile(p).unwrap();
            prop_assert!((back - x).abs() < 1e-8, "{dist} x={x} back={back}");
        }
    }
}

#[test]
fn unstarred_and_starred_stats_on_negated_data() {
    let xs: Vec<f64> = (0..200).map(|i| ((i * 37 % 23) as f64 - 11.0) * 0.3 + 0.1).collect();
    let s = Series::new(xs.clone()).unwrap();
    let neg = Series::new(xs.iter().map(|v| -v).collect()).unwrap();
    assert_eq!(w_n(&s, 12, 4).unwrap().value, -w_n(&neg, 12, 4).unwrap().value);
    assert_eq!(i_n(&s, 10).unwrap().value, -i_n(&neg, 10).unwrap().value);
    assert_eq!(
        t_n_star(&s, 10, Normalization::Student).unwrap().value,
        -t_n_star(&neg, 10, Normalization::Student).unwrap().value
    );
}

#[test]
fn cdfs_bounded_monotone_symmetric_on_grid() {
    let xs: Vec<f64> = (-800..=800).map(|i| f64::from(i) / 100.0).collect();
    let check = |cdf: &dyn Fn(f64) -> f64, label: &str| {
        let mut prev = 0.0;
        for &x in &xs {
            let f = cdf(x);
            assert!((0.0..=1.0).contains(&f), "{label} x={x}");
            assert!(f >= prev, "{label} not monotone at {x}");
            assert!((f + cdf(-x) - 1.0).abs() < 1e-13, "{label} asymmetric at {x}");
            prev = f;
        }
    };
    check(&|x| normal_cdf(x).unwrap(), "normal");
    for df in 1..=200 {
        check(&|x| t_cdf(x, df).unwrap(), &format!("t{df}"));
    }
}

#[test]
fn large_df_t_approaches_normal() {
    for i in -500..=500 {
        let x = f64::from(i) / 100.0;
        assert!((t_cdf(x, 10_000).unwrap() - normal_cdf(x).unwrap()).abs() < 1e-4, "x={x}");
    }
}

#[test]
fn quantile_upper_relative_round_trip() {
    for dist in [RefDist::Normal, RefDist::StudentT(9), RefDist::StudentT(19)] {
        for &q in &[0.3, 0.1, 0.025, 1e-3, 1e-4] {
            let x = dist.quantile(1.0 - q).unwrap();
            let back = dist.upper(x).unwrap();
            assert!(((back - q) / q).abs() < 1e-10, "{dist} q={q}");
        }
    }
}
