//! Exact check of the three-term recursion for the Taylor coefficients of the
//! ambient harmonic extension, its closed form, and the factorization of the
//! weighted GJMS operators.
//!
//! The Laplacian `Δ` is represented by the scalar `-t`, so every identity
//! becomes an identity of polynomials in `t` with rational coefficients.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{rat, RationalPoly};
use crate::report::VerificationReport;
use crate::special::pochhammer;

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn binomial(n: u32, k: u32) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, i| acc * int(i64::from(n - i)) / int(i64::from(i + 1)))
}

/// `q_0 … q_k` from the three-term recursion.
pub fn q_via_recursion(k: u32, m: &BigRational, n: &BigRational) -> Vec<RationalPoly> {
    let kk = int(i64::from(k));
    let half = rat(1, 2);
    let one = BigRational::one();
    let mn1 = m + n + &one;
    let mut q: Vec<RationalPoly> = vec![RationalPoly::one()];
    for l in 0..k {
        let ll = int(i64::from(l));
        let lk = &ll * (&kk - &ll);
        // shift of the 4ℓ term: m + n + 1 - 2k + 4ℓ
        let base = &mn1 - int(2) * &kk + int(4) * &ll;

        let c0 = &lk / int(2) - (n + &one - m) * &base / int(8);
        let mut next = &RationalPoly::linear(half.clone(), c0) * &q[l as usize];

        if l >= 1 {
            let c1 = (&ll - &one) * (&kk - &ll + &one) / int(2) - m * (&base - int(4)) / int(4);
            let factor = RationalPoly::linear(half.clone(), c1).scale(&(&lk / int(2)));
            next = &next + &(&factor * &q[l as usize - 1]);
        }
        if l >= 2 {
            let pre = pochhammer(&(&ll - &one), 2) * pochhammer(&(&kk - &ll), 2) / int(4);
            let c2 = -(&ll - int(2)) * (&kk - &ll + int(2)) / int(2) + &mn1 * (&base - int(8)) / int(8);
            next = &next + &q[l as usize - 2].scale(&(pre * c2));
        }
        q.push(next);
    }
    q
}

/// `½t - (n-m+2k-4i+3)(m+n-2k+4i-3)/8`.
fn closed_form_factor(k: u32, i: u32, m: &BigRational, n: &BigRational) -> RationalPoly {
    let shift = int(2 * i64::from(k) - 4 * i64::from(i) + 3);
    let c = (n - m + &shift) * (m + n - &shift) / int(8);
    RationalPoly::linear(rat(1, 2), -c)
}

/// `q_ℓ` from the binomial-sum closed form.
pub fn q_via_closed_form(k: u32, ell: u32, m: &BigRational, n: &BigRational) -> RationalPoly {
    let kk = int(i64::from(k));
    let ll = int(i64::from(ell));
    let mut total = RationalPoly::zero();
    let mut product = RationalPoly::one();
    for j in 0..=ell {
        if j > 0 {
            product = &product * &closed_form_factor(k, j, m, n);
        }
        let a = (m + n + BigRational::one() - int(2) * &kk + int(4 * i64::from(j))) / int(2);
        let coeff = binomial(ell, j)
            * BigRational::new(BigInt::one(), BigInt::one() << (ell - j))
            * pochhammer(&(&kk - &ll), ell - j)
            * pochhammer(&a, ell - j);
        if !coeff.is_zero() {
            total = &total + &product.scale(&coeff);
        }
    }
    total
}

/// `t - (n-m+1)(m+n-1)/4`, the order-two factor with weight `m`.
pub fn order_two_factor(m: &BigRational, n: &BigRational) -> RationalPoly {
    let one = BigRational::one();
    let c = (n - m + &one) * (m + n - &one) / int(4);
    RationalPoly::linear(one, -c)
}

/// `∏_{j=1}^k (t - (n-m+2k-4j+3)(m+n-2k+4j-3)/4)`.
pub fn factorization_polynomial(k: u32, m: &BigRational, n: &BigRational) -> RationalPoly {
    (1..=k).fold(RationalPoly::one(), |acc, j| {
        let shift = int(2 * i64::from(k) - 4 * i64::from(j) + 3);
        let c = (n - m + &shift) * (m + n - &shift) / int(4);
        &acc * &RationalPoly::linear(BigRational::one(), -c)
    })
}

/// First failing check of [`verify_recursion`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecursionFailure {
    pub check: String,
    pub k: u32,
    pub ell: Option<u32>,
    pub m: String,
    pub n: String,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionReport {
    pub k_max: u32,
    pub trials: usize,
    pub seed: u64,
    /// Number of exact polynomial equalities that were checked.
    pub checks: usize,
    pub samples: Vec<(String, String)>,
    pub failure: Option<RecursionFailure>,
    pub runtime: f64,
}

impl RecursionReport {
    pub fn pass(&self) -> bool {
        self.failure.is_none()
    }

    pub fn to_verification(&self) -> VerificationReport {
        let detail = match &self.failure {
            None => format!("{} exact equalities", self.checks),
            Some(f) => format!(
                "{} failed at k={} ell={:?} m={} n={}: expected {} found {}",
                f.check, f.k, f.ell, f.m, f.n, f.expected, f.found
            ),
        };
        VerificationReport::exact(format!("recursion-exactness kmax={}", self.k_max), self.pass(), detail)
            .with_runtime(self.runtime)
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let p: i64 = rng.gen_range(-50..=50);
    let q: i64 = rng.gen_range(1..=50);
    rat(p, q)
}

fn check_sample(k_max: u32, m: &BigRational, n: &BigRational) -> std::result::Result<usize, RecursionFailure> {
    let fail = |check: &str, k: u32, ell: Option<u32>, expected: &RationalPoly, found: &RationalPoly| RecursionFailure {
        check: check.into(),
        k,
        ell,
        m: m.to_string(),
        n: n.to_string(),
        expected: expected.to_string(),
        found: found.to_string(),
    };
    let mut checks = 0;
    for k in 1..=k_max {
        let q = q_via_recursion(k, m, n);
        for (ell, q_l) in q.iter().enumerate() {
            let closed = q_via_closed_form(k, ell as u32, m, n);
            if *q_l != closed {
                return Err(fail("recursion=closed-form", k, Some(ell as u32), &closed, q_l));
            }
            checks += 1;
        }
        let scaled = q[k as usize].scale(&BigRational::from_integer(BigInt::one() << k));
        let product = factorization_polynomial(k, m, n);
        if scaled != product {
            return Err(fail("2^k q_k=factorization", k, None, &product, &scaled));
        }
        checks += 1;
        let composed = (1..=k).fold(RationalPoly::one(), |acc, j| {
            let shifted = m - int(2 * i64::from(k)) + int(4 * i64::from(j) - 2);
            &acc * &order_two_factor(&shifted, n)
        });
        if composed != product {
            return Err(fail("shifted order-two factors", k, None, &product, &composed));
        }
        checks += 1;
    }
    Ok(checks)
}

/// Checks, for `k ≤ k_max` and `trials` random rational `(m, n)`, that the
/// recursion equals the closed form for every `ℓ ≤ k`, that `2^k q_k` is the
/// factorization polynomial, and that the factorization is the product of
/// order-two factors with weights `m - 2k + 4j - 2`.
pub fn verify_recursion(k_max: u32, trials: usize, seed: u64) -> Result<RecursionReport> {
    if k_max == 0 || k_max > 10 {
        return Err(Error::InvalidParameter(format!("k_max = {k_max} must lie in 1..=10")));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<(BigRational, BigRational)> =
        (0..trials).map(|_| (random_rational(&mut rng), random_rational(&mut rng))).collect();
    let outcomes: Vec<_> = samples.par_iter().map(|(m, n)| check_sample(k_max, m, n)).collect();
    let mut checks = 0;
    let mut failure = None;
    for outcome in outcomes {
        match outcome {
            Ok(c) => checks += c,
            Err(f) => {
                failure = Some(f);
                break;
            }
        }
    }
    Ok(RecursionReport {
        k_max,
        trials,
        seed,
        checks,
        samples: samples.iter().map(|(m, n)| (m.to_string(), n.to_string())).collect(),
        failure,
        runtime: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_step() {
        let (m, n) = (rat(2, 7), rat(-3, 5));
        let q = q_via_recursion(1, &m, &n);
        assert_eq!(q[0], RationalPoly::one());
        let c = (&n + int(1) - &m) * (&m + &n - int(1)) / int(8);
        assert_eq!(q[1], RationalPoly::linear(rat(1, 2), -c));
    }

    #[test]
    fn order_two_example() {
        let p = factorization_polynomial(1, &int(0), &int(3));
        assert_eq!(p, RationalPoly::linear(int(1), int(-2)));
        assert_eq!(q_via_recursion(1, &int(0), &int(3))[1].scale(&int(2)), p);
    }

    #[test]
    fn closed_form_examples() {
        let q = q_via_recursion(2, &int(0), &int(4));
        assert_eq!(q[2], q_via_closed_form(2, 2, &int(0), &int(4)));
        let q = q_via_recursion(3, &rat(1, 3), &int(5));
        assert_eq!(q[2], q_via_closed_form(3, 2, &rat(1, 3), &int(5)));
        assert_eq!(q_via_closed_form(4, 0, &rat(1, 3), &int(5)), RationalPoly::one());
    }

    #[test]
    fn small_run_passes() {
        let report = verify_recursion(3, 4, 7).unwrap();
        assert!(report.pass(), "{:?}", report.failure);
        assert_eq!(report.checks, 4 * (2 + 3 + 4 + 2 * 3));
    }

    #[test]
    fn rejects_large_kmax() {
        assert!(verify_recursion(11, 1, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn degree_and_leading_coefficient(k in 1u32..7, mp in -50i64..50, mq in 1i64..50, np in -50i64..50, nq in 1i64..50) {
            let q = q_via_recursion(k, &rat(mp, mq), &rat(np, nq));
            for (l, p) in q.iter().enumerate() {
                prop_assert_eq!(p.degree(), Some(l));
                prop_assert_eq!(p.leading(), BigRational::new(BigInt::one(), BigInt::one() << l));
            }
            prop_assert_eq!(q[k as usize].scale(&BigRational::from_integer(BigInt::one() << k)).leading(), BigRational::one());
        }
    }
}
