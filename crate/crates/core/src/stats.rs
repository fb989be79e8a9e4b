//! Statistical primitives: error function, normal CDF/quantile,
//! Kolmogorov-Smirnov statistics and sample moments.

use crate::{Error, Real, Result};

/// Complementary error function, rational minimax approximation
/// (Cody-style, three regions), relative error below 1e-15 in `f64`.
pub fn erfc<F: Real>(x: F) -> F {
    let ax = x.abs();
    let thresh = F::cast(0.46875);
    let result = if ax <= thresh {
        F::one() - erf_small(ax)
    } else if ax <= F::cast(4.0) {
        erfc_mid(ax)
    } else {
        erfc_large(ax)
    };
    if x < F::zero() {
        F::cast(2.0) - result
    } else {
        result
    }
}

/// Error function on `|x| <= 0.46875`.
fn erf_small<F: Real>(y: F) -> F {
    const A: [f64; 5] = [
        3.16112374387056560e0,
        1.13864154151050156e2,
        3.77485237685302021e2,
        3.20937758913846947e3,
        1.85777706184603153e-1,
    ];
    const B: [f64; 4] = [
        2.36012909523441209e1,
        2.44024637934444173e2,
        1.28261652607737228e3,
        2.84423683343917062e3,
    ];
    let z = y * y;
    let mut num = F::cast(A[4]) * z;
    let mut den = z;
    for i in 0..3 {
        num = (num + F::cast(A[i])) * z;
        den = (den + F::cast(B[i])) * z;
    }
    y * (num + F::cast(A[3])) / (den + F::cast(B[3]))
}

/// erfc on `0.46875 < x <= 4`.
fn erfc_mid<F: Real>(y: F) -> F {
    const C: [f64; 9] = [
        5.64188496988670089e-1,
        8.88314979438837594e0,
        6.61191906371416295e1,
        2.98635138197400131e2,
        8.81952221241769090e2,
        1.71204761263407058e3,
        2.05107837782607147e3,
        1.23033935479799725e3,
        2.15311535474403846e-8,
    ];
    const D: [f64; 8] = [
        1.57449261107098347e1,
        1.17693950891312499e2,
        5.37181101862009858e2,
        1.62138957456669019e3,
        3.29079923573345963e3,
        4.36261909014324716e3,
        3.43936767414372164e3,
        1.23033935480374942e3,
    ];
    let mut num = F::cast(C[8]) * y;
    let mut den = y;
    for i in 0..7 {
        num = (num + F::cast(C[i])) * y;
        den = (den + F::cast(D[i])) * y;
    }
    let ratio = (num + F::cast(C[7])) / (den + F::cast(D[7]));
    scaled_exp(y, ratio)
}

/// erfc on `x > 4`.
fn erfc_large<F: Real>(y: F) -> F {
    const P: [f64; 6] = [
        3.05326634961232344e-1,
        3.60344899949804439e-1,
        1.25781726111229246e-1,
        1.60837851487422766e-2,
        6.58749161529837803e-4,
        1.63153871373020978e-2,
    ];
    const Q: [f64; 5] = [
        2.56852019228982242e0,
        1.87295284992346047e0,
        5.27905102951428412e-1,
        6.05183413124413191e-2,
        2.33520497626869185e-3,
    ];
    const INV_SQRT_PI: f64 = 5.6418958354775628695e-1;
    if y > F::cast(26.5) {
        return F::zero();
    }
    let z = F::one() / (y * y);
    let mut num = F::cast(P[5]) * z;
    let mut den = z;
    for i in 0..4 {
        num = (num + F::cast(P[i])) * z;
        den = (den + F::cast(Q[i])) * z;
    }
    let poly = z * (num + F::cast(P[4])) / (den + F::cast(Q[4]));
    let ratio = (F::cast(INV_SQRT_PI) - poly) / y;
    scaled_exp(y, ratio)
}

/// `exp(-y^2) * ratio` computed with the split `y^2 = ysq^2 + del` to
/// avoid cancellation in the exponent.
fn scaled_exp<F: Real>(y: F, ratio: F) -> F {
    let sixteen = F::cast(16.0);
    let ysq = (y * sixteen).floor() / sixteen;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp() * ratio
}

/// Standard normal CDF.
pub fn normal_cdf<F: Real>(x: F) -> F {
    let half = F::cast(0.5);
    half * erfc(-x / F::cast(std::f64::consts::SQRT_2))
}

/// Standard normal quantile: Acklam's rational approximation refined by one
/// Halley step against [`normal_cdf`]. Accurate to full `f64` precision on
/// `(0, 1)`.
pub fn normal_quantile<F: Real>(p: F) -> F {
    assert!(
        p > F::zero() && p < F::one(),
        "normal quantile needs p in (0,1)"
    );
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = F::cast(0.02425);
    let p_high = F::one() - p_low;

    let mut x = if p < p_low {
        let q = (F::cast(-2.0) * p.ln()).sqrt();
        (((((F::cast(C[0]) * q + F::cast(C[1])) * q + F::cast(C[2])) * q + F::cast(C[3])) * q
            + F::cast(C[4]))
            * q
            + F::cast(C[5]))
            / ((((F::cast(D[0]) * q + F::cast(D[1])) * q + F::cast(D[2])) * q + F::cast(D[3]))
                * q
                + F::one())
    } else if p <= p_high {
        let q = p - F::cast(0.5);
        let r = q * q;
        (((((F::cast(A[0]) * r + F::cast(A[1])) * r + F::cast(A[2])) * r + F::cast(A[3])) * r
            + F::cast(A[4]))
            * r
            + F::cast(A[5]))
            * q
            / (((((F::cast(B[0]) * r + F::cast(B[1])) * r + F::cast(B[2])) * r + F::cast(B[3]))
                * r
                + F::cast(B[4]))
                * r
                + F::one())
    } else {
        let q = (F::cast(-2.0) * (F::one() - p).ln()).sqrt();
        -((((((F::cast(C[0]) * q + F::cast(C[1])) * q + F::cast(C[2])) * q + F::cast(C[3])) * q
            + F::cast(C[4]))
            * q
            + F::cast(C[5]))
            / ((((F::cast(D[0]) * q + F::cast(D[1])) * q + F::cast(D[2])) * q + F::cast(D[3]))
                * q
                + F::one()))
    };

    // one Halley step: e = ncdf(x) - p, u = e / pdf(x)
    let half = F::cast(0.5);
    let e = half * erfc(-x / F::cast(std::f64::consts::SQRT_2)) - p;
    let u = e * F::cast((2.0 * std::f64::consts::PI).sqrt()) * (x * x * half).exp();
    x = x - u / (F::one() + x * u * half);
    x
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against a CDF.
pub fn ks_statistic<F: Real>(samples: &mut [F], cdf: impl Fn(F) -> F) -> F {
    assert!(!samples.is_empty());
    samples.sort_unstable_by(|a, b| a.partial_cmp(b).expect("no NaN in KS samples"));
    let n = F::cast_usize(samples.len());
    let mut sup = F::zero();
    for (i, &x) in samples.iter().enumerate() {
        let fx = cdf(x);
        let hi = (F::cast_usize(i + 1) / n - fx).abs();
        let lo = (fx - F::cast_usize(i) / n).abs();
        sup = sup.max(hi).max(lo);
    }
    sup
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample<F: Real>(a: &mut [F], b: &mut [F]) -> F {
    assert!(!a.is_empty() && !b.is_empty());
    a.sort_unstable_by(|x, y| x.partial_cmp(y).expect("no NaN"));
    b.sort_unstable_by(|x, y| x.partial_cmp(y).expect("no NaN"));
    let (na, nb) = (F::cast_usize(a.len()), F::cast_usize(b.len()));
    let mut i = 0usize;
    let mut j = 0usize;
    let mut sup = F::zero();
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        let diff = (F::cast_usize(i) / na - F::cast_usize(j) / nb).abs();
        sup = sup.max(diff);
    }
    sup
}

/// Survival function of the Kolmogorov distribution,
/// `Q(x) = 2 sum_k (-1)^(k-1) exp(-2 k^2 x^2)`.
pub fn kolmogorov_survival<F: Real>(x: F) -> F {
    if x <= F::cast(0.05) {
        return F::one();
    }
    let mut sum = F::zero();
    let mut sign = F::one();
    for k in 1..200 {
        let kf = F::cast_usize(k);
        let term = (-F::cast(2.0) * kf * kf * x * x).exp();
        sum += sign * term;
        if term < F::cast(1e-16) {
            break;
        }
        sign = -sign;
    }
    (F::cast(2.0) * sum).min(F::one()).max(F::zero())
}

/// Asymptotic critical value of the one-sample KS statistic at level `alpha`:
/// `D_crit = sqrt(-ln(alpha/2) / 2) / sqrt(n)`.
pub fn ks_critical_value<F: Real>(alpha: F, n: usize) -> F {
    let c = (-(alpha / F::cast(2.0)).ln() / F::cast(2.0)).sqrt();
    c / F::cast_usize(n).sqrt()
}

/// Critical value for the two-sample KS distance at level `alpha`.
pub fn ks_two_sample_critical<F: Real>(alpha: F, n: usize, m: usize) -> F {
    let c = (-(alpha / F::cast(2.0)).ln() / F::cast(2.0)).sqrt();
    let nf = F::cast_usize(n);
    let mf = F::cast_usize(m);
    c * ((nf + mf) / (nf * mf)).sqrt()
}

/// Outcome of a one-sample KS test.
#[derive(Clone, Copy, Debug)]
pub struct KsResult<F: Real> {
    pub statistic: F,
    pub critical: F,
    pub alpha: F,
    pub p_value: F,
    pub n_samples: usize,
    pub pass: bool,
}

/// Two-sided KS test of `samples` against `Normal(0, variance)`.
pub fn ks_test_normal<F: Real>(samples: &[F], variance: F, alpha: F) -> Result<KsResult<F>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if variance <= F::zero() {
        return Err(Error::InvalidVariance(
            variance.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let sd = variance.sqrt();
    let mut sorted = samples.to_vec();
    let stat = ks_statistic(&mut sorted, |x| normal_cdf(x / sd));
    let n = samples.len();
    let critical = ks_critical_value(alpha, n);
    let p_value = kolmogorov_survival(F::cast_usize(n).sqrt() * stat);
    Ok(KsResult {
        statistic: stat,
        critical,
        alpha,
        p_value,
        n_samples: n,
        pass: stat <= critical,
    })
}

/// Mean and standard error of a sample.
pub fn mean_stderr<F: Real>(samples: &[F]) -> (F, F) {
    let n = F::cast_usize(samples.len());
    let mean = samples.iter().copied().sum::<F>() / n;
    if samples.len() < 2 {
        return (mean, F::zero());
    }
    let var = samples
        .iter()
        .map(|&x| (x - mean) * (x - mean))
        .sum::<F>()
        / (n - F::one());
    (mean, (var / n).sqrt())
}
