//! Fibration parameters `(g, h, n)`, the derived branch degree `r`,
//! multiplicity classification and the slope constants.

use crate::rat::Rat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by parameter and multiplicity operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    /// `2(g-1-n(h-1))` is not divisible by `n-1`.
    #[error("r = 2(g-1-n(h-1))/(n-1) is not an integer for (g={g}, h={h}, n={n})")]
    NonIntegralR { g: i64, h: i64, n: i64 },
    /// `r` is an integer but not a multiple of `n`.
    #[error("r = {r} is not a multiple of n = {n}")]
    RNotMultipleOfN { r: i64, n: i64 },
    /// `r <= 0`.
    #[error("r = {r} is not positive")]
    RNonPositive { r: i64 },
    /// Parameter outside the admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A multiplicity that is neither `0` nor `1` mod `n`.
    #[error("multiplicity m = {m} is neither 0 nor 1 mod n = {n}")]
    InvalidMultiplicity { m: i64, n: i64 },
    /// Operation needs the other base genus.
    #[error("operation requires base genus h = {expected}, got h = {got}")]
    WrongBaseGenus { expected: i64, got: i64 },
    /// `(g, h, n)` outside the range covered by the theorems.
    #[error("out of scope: {0}")]
    OutOfScope(String),
    /// `chi = 0`: the fibration is locally trivial and has no slope.
    #[error("locally trivial: chi = 0, slope undefined")]
    LocallyTrivial,
    /// Extremal family incompatible with the parameters.
    #[error("inapplicable family: {0}")]
    InapplicableFamily(String),
}

/// Parameters of a primitive cyclic covering fibration of type `(g, h, n)`.
///
/// `r` is the number of branch points on a general fiber of the base
/// fibration; it is derived from `(g, h, n)` by the Hurwitz formula and is
/// always a positive multiple of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FibrationParams {
    g: i64,
    h: i64,
    n: i64,
    r: i64,
}

impl FibrationParams {
    pub fn g(&self) -> i64 {
        self.g
    }

    pub fn h(&self) -> i64 {
        self.h
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn r(&self) -> i64 {
        self.r
    }
}

/// Residue class of a branch-curve multiplicity mod `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MultClass {
    /// `m` is a multiple of `n`; the exceptional curve stays out of the
    /// branch locus.
    NZ,
    /// `m = 1 mod n`; the exceptional curve joins the branch locus.
    NZPlus1,
}

/// A multiplicity together with its class and `k = floor(m/n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassifiedMult {
    pub class: MultClass,
    pub k: i64,
}

/// Derives `r = 2(g-1-n(h-1))/(n-1)` and checks admissibility.
pub fn compute_params(g: i64, h: i64, n: i64) -> Result<FibrationParams, CoreError> {
    if g < 2 {
        return Err(CoreError::InvalidParameter(format!("g = {g} must be >= 2")));
    }
    if h != 0 && h != 1 {
        return Err(CoreError::InvalidParameter(format!(
            "h = {h} must be 0 or 1"
        )));
    }
    if n < 2 {
        return Err(CoreError::InvalidParameter(format!("n = {n} must be >= 2")));
    }
    let num = 2 * (g - 1 - n * (h - 1));
    if num % (n - 1) != 0 {
        return Err(CoreError::NonIntegralR { g, h, n });
    }
    let r = num / (n - 1);
    if r <= 0 {
        return Err(CoreError::RNonPositive { r });
    }
    if r % n != 0 {
        return Err(CoreError::RNotMultipleOfN { r, n });
    }
    Ok(FibrationParams { g, h, n, r })
}

/// Classifies a multiplicity `m >= 2` as `n Z` or `n Z + 1`.
pub fn classify_multiplicity(m: i64, n: i64) -> Result<ClassifiedMult, CoreError> {
    if m < 2 {
        return Err(CoreError::InvalidParameter(format!("m = {m} must be >= 2")));
    }
    if n < 2 {
        return Err(CoreError::InvalidParameter(format!("n = {n} must be >= 2")));
    }
    match m % n {
        0 => Ok(ClassifiedMult {
            class: MultClass::NZ,
            k: m / n,
        }),
        1 => Ok(ClassifiedMult {
            class: MultClass::NZPlus1,
            k: m / n,
        }),
        _ => Err(CoreError::InvalidMultiplicity { m, n }),
    }
}

/// The slope-equality constant `lambda_{g,1,n} = 12(n-1)/(2n-1)`.
pub fn lambda_slope(params: &FibrationParams) -> Result<Rat, CoreError> {
    if params.h != 1 {
        return Err(CoreError::WrongBaseGenus {
            expected: 1,
            got: params.h,
        });
    }
    Ok(Rat::new(12 * (params.n - 1), 2 * params.n - 1))
}

/// Upper bound for the slope `lambda_f`.
///
/// For `h = 0, n = 3, g = 4` the bound depends on whether triple fibers are
/// allowed; everywhere else the flag is ignored.
pub fn upper_bound_slope(
    params: &FibrationParams,
    triple_fibers_allowed: bool,
) -> Result<Rat, CoreError> {
    Ok(Rat::int(12) - mu_threshold(params, triple_fibers_allowed)?)
}

/// The defect `mu` with `lambda_f <= 12 - mu`, expressed so that the per-germ
/// audit reads `e(F_p) - mu * chi(F_p) >= 0` uniformly.
pub fn mu_threshold(params: &FibrationParams, triple_fibers_allowed: bool) -> Result<Rat, CoreError> {
    let (g, n, r) = (params.g, params.n, params.r);
    match params.h {
        1 => {
            if n >= 4 || (n == 3 && g == 4) {
                Ok(Rat::new(12 * n * n, r * (n - 1) * (n + 1)))
            } else if n == 3 {
                Ok(Rat::new(24, 4 * r - 13))
            } else {
                // n = 2
                if g < 3 {
                    return Err(CoreError::OutOfScope(format!(
                        "(g, h, n) = ({g}, 1, 2) needs g >= 3"
                    )));
                }
                Ok(Rat::new(4, r - 2))
            }
        }
        0 => match n {
            3 => {
                if g == 4 && triple_fibers_allowed {
                    // 12 - 129/17, so that e >= mu * chi also covers the
                    // triple-fiber equality case.
                    Ok(Rat::new(75, 17))
                } else {
                    let delta = if r % 6 == 0 { 0 } else { 1 };
                    Ok(Rat::new(72 * (r - 1), 4 * r * r - 15 * r + 27 - 36 * delta))
                }
            }
            2 => {
                let delta = if g % 2 == 0 { 1 } else { 0 };
                Ok(Rat::new(4 * (2 * g + 1), g * g - 1 + delta))
            }
            _ => Err(CoreError::OutOfScope(format!(
                "(g, 0, n) with n = {n} >= 4 is covered by prior work, not here"
            ))),
        },
        _ => Err(CoreError::InvalidParameter(format!("h = {}", params.h))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compute_params_examples() {
        assert_eq!(compute_params(6, 1, 2).unwrap().r(), 10);
        assert_eq!(compute_params(4, 1, 3).unwrap().r(), 3);
        assert_eq!(
            compute_params(5, 1, 3).unwrap_err(),
            CoreError::RNotMultipleOfN { r: 4, n: 3 }
        );
        // r = 2g + 2 for hyperelliptic
        assert_eq!(compute_params(3, 0, 2).unwrap().r(), 8);
    }

    #[test]
    fn compute_params_rejects_bad_input() {
        assert!(matches!(
            compute_params(1, 1, 2),
            Err(CoreError::InvalidParameter(_))
        ));
        assert!(matches!(
            compute_params(4, 2, 2),
            Err(CoreError::InvalidParameter(_))
        ));
        assert!(matches!(
            compute_params(6, 1, 4),
            Err(CoreError::NonIntegralR { .. })
        ));
    }

    #[test]
    fn classify_examples() {
        let c = classify_multiplicity(6, 3).unwrap();
        assert_eq!((c.class, c.k), (MultClass::NZ, 2));
        let c = classify_multiplicity(7, 3).unwrap();
        assert_eq!((c.class, c.k), (MultClass::NZPlus1, 2));
        assert_eq!(
            classify_multiplicity(5, 3).unwrap_err(),
            CoreError::InvalidMultiplicity { m: 5, n: 3 }
        );
    }

    #[test]
    fn lambda_examples() {
        let p = compute_params(3, 1, 2).unwrap();
        assert_eq!(lambda_slope(&p).unwrap(), Rat::int(4));
        let p = compute_params(4, 1, 3).unwrap();
        assert_eq!(lambda_slope(&p).unwrap(), Rat::new(24, 5));
        let p = compute_params(21, 1, 5).unwrap();
        assert_eq!(lambda_slope(&p).unwrap(), Rat::new(16, 3));
        let p = compute_params(3, 0, 2).unwrap();
        assert!(matches!(
            lambda_slope(&p),
            Err(CoreError::WrongBaseGenus { .. })
        ));
    }

    #[test]
    fn upper_bound_examples() {
        let p = compute_params(6, 1, 2).unwrap();
        assert_eq!(upper_bound_slope(&p, false).unwrap(), Rat::new(23, 2));
        let p = compute_params(4, 0, 3).unwrap();
        assert_eq!(upper_bound_slope(&p, true).unwrap(), Rat::new(129, 17));
        // 12 - 4(2g+1)/(g^2-1+delta) at g=2 (even, delta=1): 12 - 20/4 = 7
        let p = compute_params(2, 0, 2).unwrap();
        assert_eq!(upper_bound_slope(&p, false).unwrap(), Rat::int(7));
    }

    #[test]
    fn mu_examples() {
        let p = compute_params(3, 1, 2).unwrap(); // r = 4
        assert_eq!(mu_threshold(&p, false).unwrap(), Rat::int(2));
        let p = compute_params(10, 1, 3).unwrap(); // r = 9
        assert_eq!(mu_threshold(&p, false).unwrap(), Rat::new(24, 23));
        let p = compute_params(13, 1, 4).unwrap(); // r = 8
        assert_eq!(mu_threshold(&p, false).unwrap(), Rat::new(8, 5));
        let p = compute_params(4, 0, 3).unwrap();
        assert_eq!(mu_threshold(&p, true).unwrap(), Rat::new(75, 17));
        assert_eq!(mu_threshold(&p, false).unwrap(), Rat::new(40, 9));
        let p = compute_params(3, 0, 4).unwrap();
        assert!(matches!(
            mu_threshold(&p, false),
            Err(CoreError::OutOfScope(_))
        ));
    }

    #[test]
    fn out_of_scope_small_bielliptic() {
        // (2, 1, 2) has r = 2; the n = 2 bound needs g >= 3.
        let p = compute_params(2, 1, 2).unwrap();
        assert!(matches!(
            mu_threshold(&p, false),
            Err(CoreError::OutOfScope(_))
        ));
    }
}
