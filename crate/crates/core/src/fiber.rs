//! Scalar one-dimensional analysis along the dilation fiber.
//!
//! The energy along the mass-preserving dilation family tau * u is
//!
//!   J(tau) = c2 e^{2 s tau} + c4 e^{4 s tau} - cq e^{3 tau (q/2 - 1)}
//!            - cp e^{3 tau (p/2 - 1)},
//!
//! and the substitution t = e^{s tau} turns J into the four-term scalar
//! profile f(t) = a t^2 + b t^4 - c t^p - d t^q studied by the two shape
//! lemmas: in the mixed regime (q-hat < 2 < 4 < p-hat) a printed inequality
//! decides whether f has a negative local minimum followed by a positive
//! global maximum; with both exponents above 4 the maximum is unique.

use crate::error::{Error, Result};
use crate::grid::Moments;
use crate::params::{ProblemParams, Regime};
use serde::{Deserialize, Serialize};

/// Coefficients and exponents of the fiber map tau -> J(tau).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberProfile {
    pub coeff_2: f64,
    pub coeff_4: f64,
    pub coeff_q: f64,
    pub coeff_p: f64,
    pub exp_2: f64,
    pub exp_4: f64,
    pub exp_q: f64,
    pub exp_p: f64,
}

impl FiberProfile {
    /// J(tau).
    pub fn value(&self, tau: f64) -> f64 {
        self.coeff_2 * (self.exp_2 * tau).exp() + self.coeff_4 * (self.exp_4 * tau).exp()
            - self.coeff_q * (self.exp_q * tau).exp()
            - self.coeff_p * (self.exp_p * tau).exp()
    }

    /// Analytic J'(tau); equals s * P_mu(tau * u) at moment level.
    pub fn derivative(&self, tau: f64) -> f64 {
        self.exp_2 * self.coeff_2 * (self.exp_2 * tau).exp()
            + self.exp_4 * self.coeff_4 * (self.exp_4 * tau).exp()
            - self.exp_q * self.coeff_q * (self.exp_q * tau).exp()
            - self.exp_p * self.coeff_p * (self.exp_p * tau).exp()
    }

    /// Analytic J''(tau).
    pub fn second_derivative(&self, tau: f64) -> f64 {
        self.exp_2 * self.exp_2 * self.coeff_2 * (self.exp_2 * tau).exp()
            + self.exp_4 * self.exp_4 * self.coeff_4 * (self.exp_4 * tau).exp()
            - self.exp_q * self.exp_q * self.coeff_q * (self.exp_q * tau).exp()
            - self.exp_p * self.exp_p * self.coeff_p * (self.exp_p * tau).exp()
    }
}

/// Builds the fiber profile of u from its moments; J(0) = E_mu(u) exactly,
/// and the mass enters only through the constraint, never the profile.
pub fn fiber_from_moments(params: &ProblemParams, m: &Moments) -> FiberProfile {
    let a = m.seminorm_sq;
    FiberProfile {
        coeff_2: params.a / 2.0 * a,
        coeff_4: params.b / 4.0 * a * a,
        coeff_q: params.mu / params.q * m.lq,
        coeff_p: m.lp / params.p,
        exp_2: 2.0 * params.s,
        exp_4: 4.0 * params.s,
        exp_q: 3.0 * (params.q / 2.0 - 1.0),
        exp_p: 3.0 * (params.p / 2.0 - 1.0),
    }
}

/// The scalar four-term profile f(t) = a t^2 + b t^4 - c t^p - d t^q, t >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarQuartic {
    pub a_hat: f64,
    pub b_hat: f64,
    pub c_hat: f64,
    pub d_hat: f64,
    pub p_hat: f64,
    pub q_hat: f64,
}

impl ScalarQuartic {
    pub fn value(&self, t: f64) -> f64 {
        self.a_hat * t * t + self.b_hat * t.powi(4)
            - self.c_hat * t.powf(self.p_hat)
            - self.d_hat * t.powf(self.q_hat)
    }
}

/// The printed two-critical-point inequality for the mixed shape
/// (p-hat > 4, q-hat in (0, 2)): with K = 8(4-q)/(p(p-2)(p-q)),
///
///   [K^{(4-q)/(p-4)} - K^{(p-q)/(p-4)}]
///     * [(a/d)(b/c)^{(2-q)/(p-4)} + (1/d) b^{(p-q)/(p-4)} / c^{(4-q)/(p-4)}] > 1
///
/// guarantees a strict negative local minimum and a strict positive global
/// maximum of f on (0, infinity).
pub fn lemma28_condition(sq: &ScalarQuartic) -> Result<bool> {
    if !(sq.p_hat > 4.0) {
        return Err(Error::invalid("p_hat", format!("must exceed 4, got {}", sq.p_hat)));
    }
    if !(sq.q_hat > 0.0 && sq.q_hat < 2.0) {
        return Err(Error::invalid("q_hat", format!("must lie in (0, 2), got {}", sq.q_hat)));
    }
    for (name, v) in [
        ("a_hat", sq.a_hat),
        ("b_hat", sq.b_hat),
        ("c_hat", sq.c_hat),
        ("d_hat", sq.d_hat),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter {
                name: "quartic",
                reason: format!("{name} must be positive, got {v}"),
            });
        }
    }
    let (ph, qh) = (sq.p_hat, sq.q_hat);
    let k = 8.0 * (4.0 - qh) / (ph * (ph - 2.0) * (ph - qh));
    let left = k.powf((4.0 - qh) / (ph - 4.0)) - k.powf((ph - qh) / (ph - 4.0));
    let bracket = sq.a_hat / sq.d_hat * (sq.b_hat / sq.c_hat).powf((2.0 - qh) / (ph - 4.0))
        + sq.b_hat.powf((ph - qh) / (ph - 4.0))
            / (sq.d_hat * sq.c_hat.powf((4.0 - qh) / (ph - 4.0)));
    Ok(left * bracket > 1.0)
}

/// Critical-point structure of a fiber map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CriticalStructure {
    /// Mixed shape: local minimum s_u < zero c_u < global maximum t_u < zero d_u,
    /// with J(s_u) < 0 < J(t_u).
    TwoCritical {
        s_u: f64,
        t_u: f64,
        c_u: f64,
        d_u: f64,
        level_min: f64,
        level_max: f64,
    },
    /// Single strict maximum at a positive level; J strictly decreasing beyond.
    OneCritical { t_u: f64, level_max: f64 },
    /// Pure Kirchhoff profile (both nonlinear coefficients zero): strictly
    /// increasing fiber, no interior maximum. A sentinel, not an error.
    Monotone,
}

impl CriticalStructure {
    /// Location of the global maximum where one exists.
    pub fn maximizer(&self) -> Option<f64> {
        match self {
            CriticalStructure::TwoCritical { t_u, .. } => Some(*t_u),
            CriticalStructure::OneCritical { t_u, .. } => Some(*t_u),
            CriticalStructure::Monotone => None,
        }
    }

    pub fn minimizer(&self) -> Option<f64> {
        match self {
            CriticalStructure::TwoCritical { s_u, .. } => Some(*s_u),
            _ => None,
        }
    }
}

/// Search window e^{s tau} in [1e-6, 1e6], covering what double-precision
/// moments can reach without overflowing t^{p theta}.
const T_LO: f64 = 1e-6;
const T_HI: f64 = 1e6;
const SCAN_POINTS: usize = 512;
const TAU_TOL: f64 = 1e-12;

/// Converts the fiber profile to the scalar quartic via t = e^{s tau}.
pub fn quartic_from_fiber(profile: &FiberProfile, s: f64) -> ScalarQuartic {
    ScalarQuartic {
        a_hat: profile.coeff_2,
        b_hat: profile.coeff_4,
        c_hat: profile.coeff_p,
        d_hat: profile.coeff_q,
        p_hat: profile.exp_p / s,
        q_hat: profile.exp_q / s,
    }
}

fn newton_on_derivative(profile: &FiberProfile, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = profile.derivative(lo);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = profile.derivative(x);
        if f == 0.0 {
            return x;
        }
        if (f > 0.0) == (flo > 0.0) {
            lo = x;
            flo = f;
        } else {
            hi = x;
        }
        let df = profile.second_derivative(x);
        let newton = x - f / df;
        x = if df != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < TAU_TOL {
            return x;
        }
    }
    x
}

fn bisect_value(profile: &FiberProfile, mut lo: f64, mut hi: f64) -> f64 {
    let flo = profile.value(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = profile.value(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < TAU_TOL {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn scan_derivative_brackets(
    profile: &FiberProfile,
    s: f64,
    t_lo: f64,
    t_hi: f64,
) -> Vec<(f64, f64)> {
    let tau_lo = t_lo.ln() / s;
    let tau_hi = t_hi.ln() / s;
    // keep the base density of SCAN_POINTS per 12 decades on wider windows
    let decades = (t_hi.log10() - t_lo.log10()).max(1.0);
    let points = ((SCAN_POINTS as f64 * decades / 12.0).ceil() as usize).max(SCAN_POINTS);
    let step = (tau_hi - tau_lo) / (points - 1) as f64;
    let mut brackets = Vec::new();
    let mut prev_tau = tau_lo;
    let mut prev = profile.derivative(prev_tau);
    for i in 1..points {
        let tau = tau_lo + i as f64 * step;
        let cur = profile.derivative(tau);
        if prev != 0.0 && cur != 0.0 && (prev > 0.0) != (cur > 0.0) {
            brackets.push((prev_tau, tau));
        }
        prev_tau = tau;
        prev = cur;
    }
    brackets
}

/// Scans the base window, then widens it (down to 1e-78, up to 1e30) until
/// the expected number of sign changes appears. Small mu pushes the fiber
/// minimum far left of any fixed window, but it always exists below the
/// thresholds, so the search follows it.
fn brackets_with_extension(
    profile: &FiberProfile,
    s: f64,
    expected: usize,
) -> Vec<(f64, f64)> {
    let mut t_lo = T_LO;
    let mut t_hi = T_HI;
    for _ in 0..7 {
        let brackets = scan_derivative_brackets(profile, s, t_lo, t_hi);
        if brackets.len() >= expected {
            return brackets;
        }
        t_lo = (t_lo * 1e-12).max(1e-78);
        t_hi = (t_hi * 1e4).min(1e30);
    }
    scan_derivative_brackets(profile, s, t_lo, t_hi)
}

/// Locates the critical points of the fiber map.
///
/// In the mixed regime the two-critical-point inequality is checked first
/// (after the t = e^{s tau} substitution) and its failure reported as
/// `ConditionViolated`; a missing sign change on the search grid reports
/// `BracketNotFound`. In the supercritical regime the unique maximum needs
/// no condition.
pub fn classify_fiber(
    profile: &FiberProfile,
    regime: Regime,
    s: f64,
) -> Result<CriticalStructure> {
    if profile.coeff_q == 0.0 && profile.coeff_p == 0.0 {
        return Ok(CriticalStructure::Monotone);
    }
    let expect_two = match regime {
        Regime::Mixed => {
            if profile.coeff_p == 0.0 {
                return Err(Error::BracketNotFound(
                    "mixed-regime profile without the focusing p-term has no maximum".into(),
                ));
            }
            if profile.coeff_q > 0.0 {
                let quartic = quartic_from_fiber(profile, s);
                if !lemma28_condition(&quartic)? {
                    return Err(Error::ConditionViolated(
                        "two-critical-point inequality fails for this profile".into(),
                    ));
                }
                true
            } else {
                // vanishing subcritical term: single-maximum shape
                false
            }
        }
        Regime::Supercritical => false,
        Regime::Unsupported => {
            return Err(Error::Regime(
                "fiber classification needs the mixed or supercritical regime".into(),
            ))
        }
    };

    let brackets = brackets_with_extension(profile, s, if expect_two { 2 } else { 1 });
    if expect_two {
        if brackets.len() != 2 {
            return Err(Error::BracketNotFound(format!(
                "expected 2 critical points, found {} sign changes",
                brackets.len()
            )));
        }
        let s_u = newton_on_derivative(profile, brackets[0].0, brackets[0].1);
        let t_u = newton_on_derivative(profile, brackets[1].0, brackets[1].1);
        let level_min = profile.value(s_u);
        let level_max = profile.value(t_u);
        if !(level_min < 0.0 && level_max > 0.0) {
            return Err(Error::ConditionViolated(format!(
                "levels J(s_u) = {level_min:.3e}, J(t_u) = {level_max:.3e} violate the mixed shape"
            )));
        }
        let c_u = bisect_value(profile, s_u, t_u);
        // d_u: J -> -infinity beyond t_u; expand until the sign flips
        let mut hi = t_u + 1.0;
        let mut guard = 0;
        while profile.value(hi) > 0.0 && guard < 200 {
            hi = t_u + (hi - t_u) * 2.0;
            guard += 1;
        }
        let d_u = bisect_value(profile, t_u, hi);
        Ok(CriticalStructure::TwoCritical {
            s_u,
            t_u,
            c_u,
            d_u,
            level_min,
            level_max,
        })
    } else {
        if brackets.len() != 1 {
            return Err(Error::BracketNotFound(format!(
                "expected a unique maximum, found {} sign changes",
                brackets.len()
            )));
        }
        let t_u = newton_on_derivative(profile, brackets[0].0, brackets[0].1);
        let level_max = profile.value(t_u);
        if !(level_max > 0.0) {
            return Err(Error::ConditionViolated(format!(
                "maximum level {level_max:.3e} is not positive"
            )));
        }
        Ok(CriticalStructure::OneCritical { t_u, level_max })
    }
}

/// The lower envelope of the constrained energy as a function of the
/// seminorm t = ||(-Delta)^{s/2} u||_2:
///
///   h(t) = a/2 t^2 + b/4 t^4 - C_p^p/p c^{p(1-theta_p)} t^{p theta_p}
///          - mu C_q^q/q c^{q(1-theta_q)} t^{q theta_q}.
pub fn h_envelope_quartic(params: &ProblemParams, c_q: f64, c_p: f64) -> ScalarQuartic {
    let tq = params.theta_q();
    let tp = params.theta_p();
    ScalarQuartic {
        a_hat: params.a / 2.0,
        b_hat: params.b / 4.0,
        c_hat: c_p.powf(params.p) / params.p * params.c.powf(params.p * (1.0 - tp)),
        d_hat: params.mu * c_q.powf(params.q) / params.q * params.c.powf(params.q * (1.0 - tq)),
        p_hat: params.p * tp,
        q_hat: params.q * tq,
    }
}

/// The two positive zeros R0 < R1 of the envelope h; h > 0 exactly on
/// (R0, R1). Fails with `RootsNotFound` at mu >= mu_2.
///
/// The two-critical-point inequality behind mu_2 is sufficient, not sharp:
/// a positive window can survive somewhat past mu_2. Only the certified
/// range mu < mu_2 is served here, since everything downstream (the basin
/// radius of the local minimizer) relies on the certified shape.
pub fn h_roots(params: &ProblemParams, c_q: f64, c_p: f64) -> Result<(f64, f64)> {
    if params.regime() != Regime::Mixed {
        return Err(Error::Regime("the envelope analysis needs the mixed regime".into()));
    }
    if !(params.mu > 0.0) {
        return Err(Error::invalid("mu", "envelope roots need mu > 0"));
    }
    let (_, mu2) = mu_thresholds(params, c_q, c_p)?;
    if params.mu >= mu2 {
        return Err(Error::RootsNotFound(format!(
            "mu = {:.6e} is not below mu_2 = {mu2:.6e}; the certified window is closed",
            params.mu
        )));
    }
    let quartic = h_envelope_quartic(params, c_q, c_p);
    // R0 collapses like a power of mu; push the window's left edge below it
    let mut lo = 1e-9;
    let mut guard = 0;
    while quartic.value(lo) > 0.0 && guard < 40 {
        lo *= 1e-3;
        guard += 1;
    }
    for (points, lo, hi) in [(1024usize, lo, 1e9), (16384, lo * 1e-3, 1e12)] {
        let roots = scan_positive_window(&quartic, points, lo, hi);
        if let Some((r0, r1)) = roots {
            return Ok((r0, r1));
        }
    }
    Err(Error::RootsNotFound(format!(
        "no positive envelope window located at mu = {:.6e} despite mu < mu_2",
        params.mu
    )))
}

fn scan_positive_window(
    quartic: &ScalarQuartic,
    points: usize,
    lo: f64,
    hi: f64,
) -> Option<(f64, f64)> {
    let lgl = lo.ln();
    let step = (hi.ln() - lgl) / (points - 1) as f64;
    let mut crossings = Vec::new();
    let mut prev_t = lo;
    let mut prev = quartic.value(prev_t);
    for i in 1..points {
        let t = (lgl + i as f64 * step).exp();
        let cur = quartic.value(t);
        if prev != 0.0 && cur != 0.0 && (prev > 0.0) != (cur > 0.0) {
            crossings.push((prev_t, t));
            if crossings.len() == 2 {
                break;
            }
        }
        prev_t = t;
        prev = cur;
    }
    if crossings.len() != 2 {
        return None;
    }
    let refine = |(mut lo, mut hi): (f64, f64)| -> f64 {
        let flo = quartic.value(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = quartic.value(mid);
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) < 1e-14 * hi.abs().max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    Some((refine(crossings[0]), refine(crossings[1])))
}

/// The two explicit smallness thresholds of the mixed regime.
///
/// mu_1 bounds the parameter below which the manifold decomposition has no
/// degenerate part; mu_2 is exactly the boundary of the two-critical-point
/// inequality for the envelope h.
pub fn mu_thresholds(params: &ProblemParams, c_q: f64, c_p: f64) -> Result<(f64, f64)> {
    if params.regime() != Regime::Mixed {
        return Err(Error::Regime("thresholds are defined in the mixed regime".into()));
    }
    let tq = params.theta_q();
    let tp = params.theta_p();
    let qh = params.q * tq;
    let ph = params.p * tp;
    let (a, b, c) = (params.a, params.b, params.c);
    let (q, p) = (params.q, params.p);
    let cqq = c_q.powf(q);
    let cpp = c_p.powf(p);

    let exp1 = q * (1.0 - tq) + p * (1.0 - tp) * (4.0 - qh) / (ph - 4.0);
    let mu1 = c.powf(-exp1)
        * (q * (ph - 4.0) * b / (4.0 * (ph - qh) * cqq))
        * (p * (4.0 - qh) * b / (4.0 * (ph - qh) * cpp)).powf((4.0 - qh) / (ph - 4.0));

    let k0 = 8.0 * (4.0 - qh) / (ph * (ph - 2.0) * (ph - qh));
    let a_pqs = k0.powf((4.0 - qh) / (ph - 4.0)) - k0.powf((ph - qh) / (ph - 4.0));
    let term1 = a / 2.0 * (b * p / (4.0 * cpp)).powf((2.0 - qh) / (ph - 4.0))
        / c.powf(q * (1.0 - tq) + p * (1.0 - tp) * (2.0 - qh) / (ph - 4.0));
    let term2 = (b / 4.0).powf((ph - qh) / (ph - 4.0)) * (p / cpp).powf((4.0 - qh) / (ph - 4.0))
        / c.powf(q * (1.0 - tq) + p * (1.0 - tp) * (4.0 - qh) / (ph - 4.0));
    let mu2 = q * a_pqs / cqq * (term1 + term2);

    Ok((mu1, mu2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixed_params(mu: f64) -> ProblemParams {
        ProblemParams::new(1.0, 1.0, 1.0, 0.9, 3.0, 4.7, mu).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn fiber_profile_reproduces_energy_at_zero() {
        let p = mixed_params(0.1);
        let m = Moments {
            seminorm_sq: 1.7,
            mass_sq: 1.0,
            lq: 0.8,
            lp: 0.35,
        };
        let profile = fiber_from_moments(&p, &m);
        assert!(rel(profile.value(0.0), crate::variational::energy(&p, &m)) < 1e-15);
        // zero moments give the zero profile
        let z = fiber_from_moments(&p, &Moments::ZERO);
        assert_eq!((z.coeff_2, z.coeff_4, z.coeff_q, z.coeff_p), (0.0, 0.0, 0.0, 0.0));
        // and J' matches s * P on the scaled moments
        let tau = 0.37;
        let scaled = Moments {
            seminorm_sq: (2.0 * p.s * tau).exp() * m.seminorm_sq,
            mass_sq: m.mass_sq,
            lq: (profile.exp_q * tau).exp() * m.lq,
            lp: (profile.exp_p * tau).exp() * m.lp,
        };
        let rhs = p.s * crate::variational::pohozaev(&p, &scaled);
        assert!(rel(profile.derivative(tau), rhs) < 1e-12);
    }

    #[test]
    fn fiber_derivative_matches_finite_differences() {
        let p = mixed_params(0.05);
        let m = Moments {
            seminorm_sq: 2.3,
            mass_sq: 1.0,
            lq: 1.1,
            lp: 0.6,
        };
        let profile = fiber_from_moments(&p, &m);
        let h = 1e-6;
        for tau in [-1.0, -0.3, 0.0, 0.4, 1.2] {
            let fd = (profile.value(tau + h) - profile.value(tau - h)) / (2.0 * h);
            assert!(rel(profile.derivative(tau), fd) < 1e-6, "tau={tau}");
        }
    }

    #[test]
    fn supercritical_toy_unique_maximum() {
        // a=b=1, c=d=1, p=6, q=5: dense sampling locates the unique maximum
        let profile = FiberProfile {
            coeff_2: 1.0,
            coeff_4: 1.0,
            coeff_q: 1.0,
            coeff_p: 1.0,
            exp_2: 1.8,
            exp_4: 3.6,
            exp_q: 4.5,  // q_hat = 5
            exp_p: 5.4,  // p_hat = 6
        };
        let st = classify_fiber(&profile, Regime::Supercritical, 0.9).unwrap();
        let CriticalStructure::OneCritical { t_u, level_max } = st else {
            panic!("expected a unique maximum, got {st:?}");
        };
        assert!(level_max > 0.0);
        // dense-sampling oracle
        let mut best_tau = f64::NAN;
        let mut best = f64::NEG_INFINITY;
        let n = 1_000_000;
        for i in 0..n {
            let t = -15.0 + 30.0 * i as f64 / (n - 1) as f64;
            let v = profile.value(t);
            if v > best {
                best = v;
                best_tau = t;
            }
        }
        assert!((best_tau - t_u).abs() < 1e-4, "{best_tau} vs {t_u}");
        assert!(profile.derivative(t_u).abs() < 1e-10 * level_max.abs().max(1.0));
    }

    #[test]
    fn mixed_toy_two_critical_points_with_ordering() {
        let p = mixed_params(0.05);
        let m = Moments {
            seminorm_sq: 1.0,
            mass_sq: 1.0,
            lq: 0.5,
            lp: 0.2,
        };
        let profile = fiber_from_moments(&p, &m);
        let quartic = quartic_from_fiber(&profile, p.s);
        assert!(lemma28_condition(&quartic).unwrap());
        let st = classify_fiber(&profile, Regime::Mixed, p.s).unwrap();
        let CriticalStructure::TwoCritical { s_u, t_u, c_u, d_u, level_min, level_max } = st
        else {
            panic!("expected two critical points, got {st:?}");
        };
        assert!(s_u < c_u && c_u < t_u && t_u < d_u);
        assert!(level_min < 0.0 && level_max > 0.0);
        assert!(profile.derivative(s_u).abs() < 1e-9);
        assert!(profile.derivative(t_u).abs() < 1e-9);
        // J strictly decreasing beyond t_u
        let mut prev = profile.value(t_u);
        for k in 1..=20 {
            let v = profile.value(t_u + 0.3 * k as f64);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn condition_limit_small_c_d_holds() {
        let sq = ScalarQuartic {
            a_hat: 1.0,
            b_hat: 1.0,
            c_hat: 1e-12,
            d_hat: 1e-12,
            p_hat: 5.0,
            q_hat: 1.0,
        };
        assert!(lemma28_condition(&sq).unwrap());
    }

    #[test]
    fn condition_failing_instance_has_no_positive_max() {
        let sq = ScalarQuartic {
            a_hat: 1e-6,
            b_hat: 1e-6,
            c_hat: 1.0,
            d_hat: 1.0,
            p_hat: 5.0,
            q_hat: 1.0,
        };
        assert!(!lemma28_condition(&sq).unwrap());
        // dense sampling: f never rises above zero after its initial dip
        let mut max_val = f64::NEG_INFINITY;
        let n = 1_000_000;
        for i in 0..n {
            let t = 10f64.powf(-6.0 + 12.0 * i as f64 / (n - 1) as f64);
            max_val = max_val.max(sq.value(t));
        }
        assert!(max_val <= 0.0, "max {max_val}");
    }

    #[test]
    fn condition_rejects_exponents_outside_lemma() {
        let mut sq = ScalarQuartic {
            a_hat: 1.0,
            b_hat: 1.0,
            c_hat: 1.0,
            d_hat: 1.0,
            p_hat: 3.5,
            q_hat: 1.0,
        };
        assert!(lemma28_condition(&sq).is_err());
        sq.p_hat = 5.0;
        sq.q_hat = 2.5;
        assert!(lemma28_condition(&sq).is_err());
    }

    #[test]
    fn degenerate_profile_is_monotone_sentinel() {
        let p = mixed_params(0.1);
        let m = Moments {
            seminorm_sq: 1.0,
            mass_sq: 1.0,
            lq: 0.0,
            lp: 0.0,
        };
        let profile = fiber_from_moments(&p, &m);
        assert_eq!(
            classify_fiber(&profile, Regime::Mixed, p.s).unwrap(),
            CriticalStructure::Monotone
        );
    }

    #[test]
    fn mu_thresholds_frozen_unit_constants() {
        // independently evaluated with 30-digit arithmetic at C_q = C_p = 1
        let p = mixed_params(0.01);
        let (mu1, mu2) = mu_thresholds(&p, 1.0, 1.0).unwrap();
        assert!(rel(mu1, 0.113521862463891492) < 1e-12, "mu1 {mu1}");
        assert!(rel(mu2, 0.111286175258391031) < 1e-12, "mu2 {mu2}");
        assert!(mu1 > 0.0 && mu2 > 0.0);
    }

    #[test]
    fn mu1_decreasing_in_mass() {
        let mut prev = f64::INFINITY;
        for c in [0.5, 1.0, 2.0, 4.0] {
            let p = ProblemParams::new(1.0, 1.0, c, 0.9, 3.0, 4.7, 0.01).unwrap();
            let (mu1, _) = mu_thresholds(&p, 0.6, 0.5).unwrap();
            assert!(mu1 < prev);
            prev = mu1;
        }
    }

    #[test]
    fn mu2_is_the_condition_boundary() {
        // the two-critical-point inequality for h flips exactly across mu_2
        let (c_q, c_p) = (0.56, 0.44);
        let p0 = mixed_params(1.0);
        let (_, mu2) = mu_thresholds(&p0, c_q, c_p).unwrap();
        let eps = 1e-8 * mu2;
        let below = h_envelope_quartic(&p0.with_mu(mu2 - eps), c_q, c_p);
        let above = h_envelope_quartic(&p0.with_mu(mu2 + eps), c_q, c_p);
        assert!(lemma28_condition(&below).unwrap());
        assert!(!lemma28_condition(&above).unwrap());
    }

    #[test]
    fn h_roots_bracketing_and_positivity() {
        let (c_q, c_p) = (0.56, 0.44);
        let p0 = mixed_params(1.0);
        let (_, mu2) = mu_thresholds(&p0, c_q, c_p).unwrap();
        let p = p0.with_mu(mu2 / 8.0);
        let (r0, r1) = h_roots(&p, c_q, c_p).unwrap();
        assert!(0.0 < r0 && r0 < r1);
        let quartic = h_envelope_quartic(&p, c_q, c_p);
        let eps = 1e-3;
        assert!(quartic.value(r0 * (1.0 - eps)) < 0.0);
        assert!(quartic.value(r0 * (1.0 + eps)) > 0.0);
        // h > 0 sampled strictly inside (R0, R1)
        for i in 1..1000 {
            let t = r0 + (r1 - r0) * i as f64 / 1000.0;
            assert!(quartic.value(t) > 0.0, "t={t}");
        }
        // beyond mu_2 the window is closed
        assert!(matches!(
            h_roots(&p.with_mu(mu2 * 1.01), c_q, c_p),
            Err(Error::RootsNotFound(_))
        ));
    }

    #[test]
    fn h_root_r0_shrinks_with_mu() {
        let (c_q, c_p) = (0.56, 0.44);
        let p0 = mixed_params(1.0);
        let (mu1, mu2) = mu_thresholds(&p0, c_q, c_p).unwrap();
        let mut mu = mu1.min(mu2) / 4.0;
        let mut prev_r0 = f64::INFINITY;
        for _ in 0..6 {
            let (r0, _) = h_roots(&p0.with_mu(mu), c_q, c_p).unwrap();
            assert!(r0 < prev_r0, "R0 must shrink as mu decreases");
            prev_r0 = r0;
            mu /= 10.0;
        }
    }
}
