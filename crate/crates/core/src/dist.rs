//! Standard normal and Student-t distribution functions.
//!
//! Tails are computed directly rather than as `1 - cdf`, so upper-tail
//! probabilities keep full relative precision far into the tail:
//!
//! * normal: `P(Z >= x) = Q(1/2, x^2/2) / 2`, with `Q` the regularized upper
//!   incomplete gamma function (series for small arguments, Lentz continued
//!   fraction otherwise);
//! * Student-t: `P(T_df >= x) = I_z(df/2, 1/2) / 2` with `z = df/(df + x^2)`
//!   and `I` the regularized incomplete beta function (continued fraction).
//!
//! Quantiles use a bracketing bisection/Newton hybrid on the upper tail.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;
const CF_MAX_ITER: usize = 20_000;
const QUANTILE_TOL: f64 = 1e-12;

/// Reference distribution for a normalized statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", content = "df", rename_all = "snake_case")]
pub enum RefDist {
    Normal,
    StudentT(u32),
}

impl fmt::Display for RefDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefDist::Normal => write!(f, "normal"),
            RefDist::StudentT(df) => write!(f, "t{df}"),
        }
    }
}

/// Parses `normal` or `t<df>`, the inverse of `Display`.
impl FromStr for RefDist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "normal" {
            return Ok(RefDist::Normal);
        }
        s.strip_prefix('t')
            .and_then(|df| df.parse::<u32>().ok())
            .ok_or_else(|| Error::Config(format!("unknown reference '{s}'; use 'normal' or 't<df>'")))
            .and_then(RefDist::student)
    }
}

impl RefDist {
    pub fn student(df: u32) -> Result<Self> {
        if df == 0 {
            return Err(Error::Domain("Student-t degrees of freedom must be >= 1".into()));
        }
        Ok(RefDist::StudentT(df))
    }

    pub(crate) fn validate(self) -> Result<Self> {
        match self {
            RefDist::StudentT(0) => Err(Error::Domain(
                "Student-t degrees of freedom must be >= 1".into(),
            )),
            d => Ok(d),
        }
    }

    pub fn cdf(self, x: f64) -> Result<f64> {
        match self.validate()? {
            RefDist::Normal => normal_cdf(x),
            RefDist::StudentT(df) => t_cdf(x, df),
        }
    }

    /// `P(X >= x)`.
    pub fn upper(self, x: f64) -> Result<f64> {
        match self.validate()? {
            RefDist::Normal => normal_upper(x),
            RefDist::StudentT(df) => t_upper(x, df),
        }
    }

    pub fn pdf(self, x: f64) -> Result<f64> {
        check_finite(x)?;
        Ok(match self.validate()? {
            RefDist::Normal => (-0.5 * x * x).exp() / (2.0 * PI).sqrt(),
            RefDist::StudentT(df) => {
                let nu = df as f64;
                (ln_gamma(0.5 * (nu + 1.0))
                    - ln_gamma(0.5 * nu)
                    - 0.5 * (nu * PI).ln()
                    - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p())
                .exp()
            }
        })
    }

    /// The `x` with `cdf(x) = p`.
    pub fn quantile(self, p: f64) -> Result<f64> {
        check_probability(p)?;
        if p >= 0.5 {
            // exact for p in [0.5, 1)
            self.upper_quantile(1.0 - p)
        } else {
            Ok(-self.upper_quantile(p)?)
        }
    }

    /// The `x` with `upper(x) = q`. Preferred over `quantile(1 - q)` for
    /// small `q`, where forming `1 - q` loses digits.
    pub fn upper_quantile(self, q: f64) -> Result<f64> {
        self.validate()?;
        check_probability(q)?;
        if q > 0.5 {
            return Ok(-self.upper_quantile(1.0 - q)?);
        }
        if q == 0.5 {
            return Ok(0.0);
        }
        self.solve_upper(q)
    }

    /// Solves `upper(x) = q` for `0 < q < 1/2`, so `x > 0`.
    fn solve_upper(self, q: f64) -> Result<f64> {
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64;
        while self.upper(hi)? > q {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Domain(format!("tail probability {q} is out of range")));
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..400 {
            let f = self.upper(x)? - q;
            if f > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let dens = self.pdf(x)?;
            let newton = x + f / dens;
            let next = if dens > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            let tol = QUANTILE_TOL.max(4.0 * f64::EPSILON * next.abs());
            if (next - x).abs() <= tol || hi - lo <= tol {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }
}

/// `P(X >= x)` for the given reference distribution.
pub fn ref_upper(dist: RefDist, x: f64) -> Result<f64> {
    dist.upper(x)
}

/// Inverse CDF of the given reference distribution.
pub fn ref_quantile(dist: RefDist, p: f64) -> Result<f64> {
    dist.quantile(p)
}

pub fn normal_cdf(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(if x <= 0.0 {
        normal_upper_nonneg(-x)
    } else {
        1.0 - normal_upper_nonneg(x)
    })
}

/// `1 - Phi(x)`.
pub fn normal_upper(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(if x >= 0.0 {
        normal_upper_nonneg(x)
    } else {
        1.0 - normal_upper_nonneg(-x)
    })
}

pub fn t_cdf(x: f64, df: u32) -> Result<f64> {
    check_finite(x)?;
    check_df(df)?;
    Ok(if x <= 0.0 {
        t_upper_nonneg(-x, df)
    } else {
        1.0 - t_upper_nonneg(x, df)
    })
}

/// `P(T_df >= x)`.
pub fn t_upper(x: f64, df: u32) -> Result<f64> {
    check_finite(x)?;
    check_df(df)?;
    Ok(if x >= 0.0 {
        t_upper_nonneg(x, df)
    } else {
        1.0 - t_upper_nonneg(-x, df)
    })
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("argument must be finite, got {x}")))
    }
}

fn check_df(df: u32) -> Result<()> {
    if df == 0 {
        Err(Error::Domain("Student-t degrees of freedom must be >= 1".into()))
    } else {
        Ok(())
    }
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability must lie in (0, 1), got {p}")))
    }
}

fn normal_upper_nonneg(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    0.5 * gamma_q_half(0.5 * x * x)
}

/// Regularized upper incomplete gamma `Q(1/2, s)`, i.e. `erfc(sqrt(s))`.
fn gamma_q_half(s: f64) -> f64 {
    const A: f64 = 0.5;
    if s == 0.0 {
        return 1.0;
    }
    let log_front = -s + A * s.ln() - LN_SQRT_PI;
    if s < A + 1.0 {
        // series for P(a, s)
        let mut term = 1.0 / A;
        let mut sum = term;
        let mut n = 1.0;
        loop {
            term *= s / (A + n);
            sum += term;
            if term.abs() < sum.abs() * CF_EPS {
                break;
            }
            n += 1.0;
        }
        1.0 - sum * log_front.exp()
    } else {
        // modified Lentz on the continued fraction for Q(a, s)
        let mut b = s + 1.0 - A;
        let mut c = 1.0 / CF_TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..CF_MAX_ITER {
            let i = i as f64;
            let an = -i * (i - A);
            b += 2.0;
            d = an * d + b;
            if d.abs() < CF_TINY {
                d = CF_TINY;
            }
            c = b + an / c;
            if c.abs() < CF_TINY {
                c = CF_TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < CF_EPS {
                break;
            }
        }
        log_front.exp() * h
    }
}

fn t_upper_nonneg(x: f64, df: u32) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return 0.5;
    }
    let nu = df as f64;
    let a = 0.5 * nu;
    let b = 0.5;
    let x2 = x * x;
    // z = nu/(nu + x^2), w = 1 - z, both formed without cancellation
    let ln_z = -(x2 / nu).ln_1p();
    let ln_w = 2.0 * x.ln() - (nu + x2).ln();
    let z = ln_z.exp();
    let w = x2 / (nu + x2);
    let ln_beta = ln_gamma(a) + LN_SQRT_PI - ln_gamma(a + b);
    let front = (a * ln_z + b * ln_w - ln_beta).exp();
    let ibeta = if z < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, z) / a
    } else {
        1.0 - front * beta_cf(b, a, w) / b
    };
    0.5 * ibeta
}

/// Continued fraction for the regularized incomplete beta function
/// (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// Lanczos approximation (g = 7, 9 terms) of `ln Gamma(z)` for `z > 0`.
pub(crate) fn ln_gamma(z: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if z < 0.5 {
        // reflection
        return (PI / (PI * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}
