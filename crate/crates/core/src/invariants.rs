//! Local and global relative invariants: `K^2`, `chi`, `e` per fiber germ,
//! the local index `Ind` and signature, slope equality and gonality.

use crate::blowup::IndexRecord;
use crate::fiber::FiberDescriptor;
use crate::params::{lambda_slope, CoreError, FibrationParams};
use crate::rat::Rat;
use serde::Serialize;

/// Exact local invariants of one fiber germ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalInvariants {
    pub k2: Rat,
    pub chi: Rat,
    pub e: Rat,
    /// The local slope-equality index; only defined for base genus 1.
    pub ind: Option<Rat>,
    /// Local signature `K^2 - 8 chi`.
    pub sigma: Rat,
    /// `K^2 / chi` when `chi != 0`.
    pub lambda_local: Option<Rat>,
}

/// Sums of local invariants over a germ multiset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GlobalInvariants {
    pub k2: Rat,
    pub chi: Rat,
    pub e: Rat,
    pub lambda: Rat,
    pub ind_sum: Option<Rat>,
    pub sigma: Rat,
}

fn finish(k2: Rat, chi: Rat, e: Rat, ind: Option<Rat>) -> LocalInvariants {
    let sigma = k2.clone() - Rat::int(8) * chi.clone();
    let lambda_local = if chi.is_zero() {
        None
    } else {
        Some(k2.clone() / chi.clone())
    };
    LocalInvariants {
        k2,
        chi,
        e,
        ind,
        sigma,
        lambda_local,
    }
}

/// `chi_phi(F_p) = e_phi(Gamma_p)/12` for the elliptic base fibration.
pub fn chi_phi(fiber: &FiberDescriptor) -> Rat {
    Rat::int(fiber.euler_number()) / 12
}

/// `nu(F_p) = 1 - 1/m_p`.
pub fn nu(fiber: &FiberDescriptor) -> Rat {
    Rat::one() - Rat::new(1, fiber.multiplicity.max(1))
}

/// Local invariants for base genus 1 (cyclic covers of elliptic surfaces).
pub fn local_invariants_h1(
    idx: &IndexRecord,
    fiber: &FiberDescriptor,
    params: &FibrationParams,
) -> Result<LocalInvariants, CoreError> {
    if params.h() != 1 {
        return Err(CoreError::WrongBaseGenus {
            expected: 1,
            got: params.h(),
        });
    }
    let n = params.n();
    let r = params.r();
    let chi_phi = chi_phi(fiber);
    let nu = nu(fiber);
    let alpha0 = Rat::int(idx.alpha0());
    let eps = Rat::int(idx.epsilon);
    let base = chi_phi.clone() + nu.clone();

    let mut k2 = Rat::zero();
    let mut chi = Rat::zero();
    let mut ksum = Rat::zero();
    let mut total = Rat::zero();
    for (&k, a) in &idx.alpha {
        let count = Rat::int(a.total());
        k2 += Rat::int((n + 1) * (n - 1) * k - n) * count.clone();
        ksum += Rat::int(k) * count.clone();
        total += count;
    }
    k2 += Rat::new((n - 1) * (n - 1), n) * (alpha0.clone() - Rat::int(2) * eps.clone())
        + Rat::new((n + 1) * (n - 1) * r, n) * base.clone()
        + eps.clone();
    chi += Rat::new((n - 1) * (n + 1), 12) * ksum.clone()
        + Rat::new((n - 1) * (2 * n - 1), 12 * n) * (alpha0.clone() - Rat::int(2) * eps.clone())
        + Rat::new((n + 1) * (n - 1) * r, 12 * n) * base
        + Rat::int(n) * chi_phi.clone();
    let e = Rat::int(n - 1) * alpha0
        + Rat::int(n) * total
        - Rat::int(2 * n - 1) * eps.clone()
        + Rat::int(12 * n) * chi_phi.clone();

    // the displayed formula for Ind, kept independent of K^2 - lambda*chi
    let mut ind = Rat::zero();
    for (&k, a) in &idx.alpha {
        ind += Rat::int(n)
            * (Rat::new((n + 1) * (n - 1) * k, 2 * n - 1) - Rat::one())
            * Rat::int(a.total());
    }
    ind += Rat::new(n - 1, 2 * n - 1) * Rat::int((n + 1) * r - 12 * n) * chi_phi
        + Rat::new((n + 1) * (n - 1) * r, 2 * n - 1) * nu
        + eps;

    Ok(finish(k2, chi, e, Some(ind)))
}

/// Local invariants for base genus 0 (cyclic covers of ruled surfaces).
pub fn local_invariants_h0(
    idx: &IndexRecord,
    params: &FibrationParams,
) -> Result<LocalInvariants, CoreError> {
    if params.h() != 0 {
        return Err(CoreError::WrongBaseGenus {
            expected: 0,
            got: params.h(),
        });
    }
    let n = params.n();
    let r = params.r();
    let alpha0 = Rat::int(idx.alpha0());
    let eps = Rat::int(idx.epsilon);
    let a_minus_2e = alpha0.clone() - Rat::int(2) * eps.clone();

    let mut quad = Rat::zero();
    let mut total = Rat::zero();
    for (&k, a) in &idx.alpha {
        quad += Rat::int(k * (r - n * k) * a.total());
        total += Rat::int(a.total());
    }
    let k2 = Rat::new(n - 1, r - 1)
        * (Rat::new((n - 1) * r - 2 * n, n) * a_minus_2e.clone() + Rat::int(n + 1) * quad.clone())
        - Rat::int(n) * total.clone()
        + eps.clone();
    let chi = Rat::new(n - 1, 12 * (r - 1))
        * (Rat::new((2 * n - 1) * r - 3 * n, n) * a_minus_2e + Rat::int(n + 1) * quad);
    let e = Rat::int(n - 1) * alpha0 + Rat::int(n) * total - Rat::int(2 * n - 1) * eps;

    Ok(finish(k2, chi, e, None))
}

/// Dispatches on the base genus.
pub fn local_invariants(
    idx: &IndexRecord,
    fiber: &FiberDescriptor,
    params: &FibrationParams,
) -> Result<LocalInvariants, CoreError> {
    match params.h() {
        1 => local_invariants_h1(idx, fiber, params),
        0 => local_invariants_h0(idx, params),
        h => Err(CoreError::InvalidParameter(format!("h = {h}"))),
    }
}

/// Component-wise exact sums; the slope needs `chi > 0`.
pub fn aggregate(
    locals: &[LocalInvariants],
    _params: &FibrationParams,
) -> Result<GlobalInvariants, CoreError> {
    let k2: Rat = locals.iter().map(|l| l.k2.clone()).sum();
    let chi: Rat = locals.iter().map(|l| l.chi.clone()).sum();
    let e: Rat = locals.iter().map(|l| l.e.clone()).sum();
    if !chi.is_positive() {
        return Err(CoreError::LocallyTrivial);
    }
    let ind_sum = if locals.iter().all(|l| l.ind.is_some()) {
        Some(locals.iter().map(|l| l.ind.clone().unwrap()).sum())
    } else {
        None
    };
    let sigma = k2.clone() - Rat::int(8) * chi.clone();
    let lambda = k2.clone() / chi.clone();
    Ok(GlobalInvariants {
        k2,
        chi,
        e,
        lambda,
        ind_sum,
        sigma,
    })
}

/// Residual of the slope equality `K^2 = lambda_{g,1,n} chi + sum Ind`;
/// exactly zero for every germ multiset assembled from the h = 1 formulas.
pub fn slope_equality_check(
    global: &GlobalInvariants,
    params: &FibrationParams,
) -> Result<Rat, CoreError> {
    let lambda = lambda_slope(params)?;
    let ind_sum = global.ind_sum.clone().ok_or(CoreError::WrongBaseGenus {
        expected: 1,
        got: params.h(),
    })?;
    Ok(global.k2.clone() - lambda * global.chi.clone() - ind_sum)
}

/// Local signature `K^2 - 8 chi`.
pub fn signature(k2: &Rat, chi: &Rat) -> Rat {
    k2.clone() - Rat::int(8) * chi.clone()
}

/// The corollary's printed coefficient formula for `sigma(F_p)`.
///
/// Shipped for the documented coefficient comparison only: the printed
/// `alpha_k` and `epsilon` coefficients disagree with the direct expansion
/// of `K^2 - 8 chi`, which is what this crate defines `sigma` to be.
pub fn sigma_printed_display(
    idx: &IndexRecord,
    fiber: &FiberDescriptor,
    params: &FibrationParams,
) -> Result<Rat, CoreError> {
    if params.h() != 1 {
        return Err(CoreError::WrongBaseGenus {
            expected: 1,
            got: params.h(),
        });
    }
    let n = params.n();
    let r = params.r();
    let mut s = Rat::zero();
    for (&k, a) in &idx.alpha {
        s += Rat::int(n)
            * (Rat::new((n + 1) * (n - 1) * k, 3) - Rat::one())
            * Rat::int(a.total());
    }
    s += (Rat::new((n - 1) * (n + 1) * r, 3 * n) - Rat::int(8 * n)) * chi_phi(fiber)
        + Rat::new((n + 1) * (2 * n - 1), 3 * n) * Rat::int(idx.epsilon)
        + Rat::new((n + 1) * (n - 1) * r, 3 * n) * nu(fiber)
        - Rat::new((n + 1) * (n - 1), 3 * n) * Rat::int(idx.alpha0());
    Ok(s)
}

/// Result of the gonality formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gonality {
    Known(i64),
    /// The hypothesis `r >= 2 n gon(base)` fails; the formula says nothing.
    Unknown,
}

/// Gonality of the fibration: `n * gon(base)` once `r >= 2 n gon(base)`.
pub fn fibration_gonality(params: &FibrationParams, gon_base: i64) -> Gonality {
    if params.r() >= 2 * params.n() * gon_base {
        Gonality::Known(params.n() * gon_base)
    } else {
        Gonality::Unknown
    }
}

/// Default base gonality: 1 for rational base fibers, 2 for elliptic.
pub fn default_base_gonality(params: &FibrationParams) -> i64 {
    if params.h() == 0 {
        1
    } else {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::compute_params;

    #[test]
    fn gonality_examples() {
        let p = compute_params(3, 0, 2).unwrap(); // r = 8 >= 4
        assert_eq!(fibration_gonality(&p, 1), Gonality::Known(2));
        let p = compute_params(3, 1, 2).unwrap(); // r = 4 < 8
        assert_eq!(fibration_gonality(&p, 2), Gonality::Unknown);
        let p = compute_params(10, 1, 3).unwrap(); // r = 9 < 12
        assert_eq!(fibration_gonality(&p, 2), Gonality::Unknown);
    }
}
