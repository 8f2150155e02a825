//! Rotation hypersurfaces of the spherical and hyperbolic products.
//!
//! A profile curve `s -> (cos s, 0, ..., sin s, h(s))` (hyperbolic: cosh/sinh)
//! swept by the orbit sphere gives closed-form principal curvatures
//!
//! ```text
//! k1 = -h'' / (1 + h'^2)^{3/2},      k2 = -h' q(s) / (1 + h'^2)^{1/2}
//! ```
//!
//! with `q = cot` for the sphere and `q = coth` for hyperbolic space, `k2`
//! carrying multiplicity m - 1. The angle satisfies `tan a = h'`,
//! `cos a = 1 / sqrt(1 + h'^2)`, and `k1 = -a'(s) cos a` identically. These
//! formulas are stated with respect to the normal whose vertical component is
//! negative; the generic frame engine with its default orientation produces
//! the opposite signs, so cross-validation flips one side.
//!
//! On top of the curvatures sit: the first-order ODE a lambda-biharmonic
//! rotation hypersurface must satisfy, a fixed-step RK4 integrator for
//! minimal profiles, the semi-parallel candidate sweep, and the integrated
//! sine-Gordon chain used by the umbilical classification argument.

use crate::error::{GeomError, Result};
use crate::jet::{Analytic, Jet1};

/// Clip bound on |cot s| (resp. |coth s|); beyond this the profile parameter
/// counts as singular.
pub const SINGULARITY_BOUND: f64 = 1e6;

/// Orbit-direction curvature factor: `cot` on the sphere, `coth` in
/// hyperbolic space.
pub fn orbit_factor<T: Analytic>(c: f64, s: T) -> T {
    if c > 0.0 {
        s.cos() / s.sin()
    } else {
        s.cosh() / s.sinh()
    }
}

/// A rotation-hypersurface profile: the height along the profile curve as a
/// function of arc parameter, with three exact derivatives.
pub trait Profile: Send + Sync {
    fn h_jet(&self, s: f64) -> Result<Jet1>;
    fn s_domain(&self) -> (f64, f64);
}

/// Profile given in closed form.
pub struct AnalyticProfile<F: Fn(Jet1) -> Jet1 + Send + Sync> {
    pub f: F,
    pub domain: (f64, f64),
}

impl<F: Fn(Jet1) -> Jet1 + Send + Sync> Profile for AnalyticProfile<F> {
    fn h_jet(&self, s: f64) -> Result<Jet1> {
        check_domain(s, self.domain)?;
        Ok((self.f)(Jet1::variable(s)))
    }

    fn s_domain(&self) -> (f64, f64) {
        self.domain
    }
}

fn check_domain(s: f64, (lo, hi): (f64, f64)) -> Result<()> {
    let slack = 1e-12 * (hi - lo).abs();
    if s < lo - slack || s > hi + slack {
        return Err(GeomError::ProfileOutOfDomain { s, lo, hi });
    }
    Ok(())
}

/// A rotation profile in an ambient of curvature `c = +-1`.
pub struct RotationProfile {
    pub c: f64,
    profile: Box<dyn Profile>,
}

impl RotationProfile {
    pub fn new(c: f64, profile: impl Profile + 'static) -> Result<Self> {
        if c != 1.0 && c != -1.0 {
            return Err(GeomError::InvalidCurvature(c));
        }
        let (lo, hi) = profile.s_domain();
        for endpoint in [lo, hi] {
            if orbit_factor(c, endpoint).abs() > SINGULARITY_BOUND {
                return Err(GeomError::ProfileSingularity { s: endpoint });
            }
        }
        Ok(RotationProfile {
            c,
            profile: Box::new(profile),
        })
    }

    pub fn from_boxed(c: f64, profile: Box<dyn Profile>) -> Result<Self> {
        let (lo, hi) = profile.s_domain();
        if c != 1.0 && c != -1.0 {
            return Err(GeomError::InvalidCurvature(c));
        }
        for endpoint in [lo, hi] {
            if orbit_factor(c, endpoint).abs() > SINGULARITY_BOUND {
                return Err(GeomError::ProfileSingularity { s: endpoint });
            }
        }
        Ok(RotationProfile { c, profile })
    }

    pub fn s_domain(&self) -> (f64, f64) {
        self.profile.s_domain()
    }

    pub fn h_jet(&self, s: f64) -> Result<Jet1> {
        self.profile.h_jet(s)
    }

    fn factor_checked(&self, s: f64) -> Result<f64> {
        let q = orbit_factor(self.c, s);
        if !q.is_finite() || q.abs() > SINGULARITY_BOUND {
            return Err(GeomError::ProfileSingularity { s });
        }
        Ok(q)
    }
}

/// Closed-form principal curvatures `(k1, k2)` at `s`; `k2` has multiplicity
/// m - 1.
pub fn rotation_principal_curvatures(profile: &RotationProfile, s: f64) -> Result<(f64, f64)> {
    let h = profile.h_jet(s)?;
    let q = profile.factor_checked(s)?;
    let w2 = 1.0 + h.d1 * h.d1;
    let k1 = -h.d2 / w2.powf(1.5);
    let k2 = -h.d1 * q / w2.sqrt();
    Ok((k1, k2))
}

/// State of the profile at one parameter value, everything the first-order
/// ODE residual needs.
#[derive(Clone, Copy, Debug)]
pub struct ProfileState {
    pub s: f64,
    pub sin_alpha: f64,
    pub cos_alpha: f64,
    pub k1: f64,
    pub k2: f64,
    pub mean: f64,
    pub mean_prime: f64,
}

/// Builds the state with jets: `H'` needs `h'''`, which [`Jet1`] carries.
pub fn profile_state(profile: &RotationProfile, m: usize, s: f64) -> Result<ProfileState> {
    let h = profile.h_jet(s)?;
    profile.factor_checked(s)?;
    let sj = Jet1::variable(s);
    let q = orbit_factor(profile.c, sj);
    let hp = Jet1 {
        val: h.d1,
        d1: h.d2,
        d2: h.d3,
        d3: 0.0,
    };
    let hpp = Jet1 {
        val: h.d2,
        d1: h.d3,
        d2: 0.0,
        d3: 0.0,
    };
    let one = Jet1::constant(1.0);
    let w2 = one + hp * hp;
    let k1 = -hpp / w2.powf(1.5);
    let k2 = -(hp * q) / w2.sqrt();
    let mean = (k1 + k2.scale(m as f64 - 1.0)).scale(1.0 / m as f64);
    let w = w2.val.sqrt();
    Ok(ProfileState {
        s,
        sin_alpha: h.d1 / w,
        cos_alpha: 1.0 / w,
        k1: k1.val,
        k2: k2.val,
        mean: mean.val,
        mean_prime: mean.d1,
    })
}

/// Residual of the first-order rotation ODE,
/// `((m/2) H - a'(s) cos a) H' - c (m-1) sin a H`, written through
/// `k1 = -a' cos a`. Zero along lambda-biharmonic rotation hypersurfaces,
/// for every lambda.
pub fn ode_residual_from_state(c: f64, m: usize, st: &ProfileState) -> f64 {
    (0.5 * m as f64 * st.mean + st.k1) * st.mean_prime
        - c * (m as f64 - 1.0) * st.sin_alpha * st.mean
}

/// Rotation ODE residual straight from a profile.
pub fn ode_residual(profile: &RotationProfile, m: usize, s: f64) -> Result<f64> {
    let st = profile_state(profile, m, s)?;
    Ok(ode_residual_from_state(profile.c, m, &st))
}

/// Hermite quintic through three equally spaced nodes `{-d, 0, d}` with
/// value/derivative pairs, evaluated at local coordinate `u`. Returns the
/// value and first three derivatives of the interpolant.
pub fn hermite_quintic(d: f64, a: (f64, f64), b: (f64, f64), c: (f64, f64), u: f64) -> Jet1 {
    let nodes = [-d, -d, 0.0, 0.0, d, d];
    let mut table = [[0.0f64; 6]; 6];
    for (r, h) in [(0usize, a.0), (1, a.0), (2, b.0), (3, b.0), (4, c.0), (5, c.0)] {
        table[r][0] = h;
    }
    // first differences: the derivative at confluent node pairs, ordinary
    // quotients between distinct nodes
    table[0][1] = a.1;
    table[1][1] = (b.0 - a.0) / d;
    table[2][1] = b.1;
    table[3][1] = (c.0 - b.0) / d;
    table[4][1] = c.1;
    for col in 2..6 {
        for row in 0..6 - col {
            table[row][col] =
                (table[row + 1][col - 1] - table[row][col - 1]) / (nodes[row + col] - nodes[row]);
        }
    }
    // expand the Newton form to monomial coefficients in u by Horner steps
    let mut coeff = [0.0f64; 6];
    for k in (0..6).rev() {
        let mut next = [0.0f64; 6];
        for i in 0..5 {
            next[i + 1] += coeff[i];
        }
        for i in 0..6 {
            next[i] -= coeff[i] * nodes[k];
        }
        next[0] += table[0][k];
        coeff = next;
    }
    let mut out = Jet1::constant(0.0);
    for (p, &cf) in coeff.iter().enumerate() {
        let pf = p as f64;
        out.val += cf * u.powi(p as i32);
        if p >= 1 {
            out.d1 += cf * pf * u.powi(p as i32 - 1);
        }
        if p >= 2 {
            out.d2 += cf * pf * (pf - 1.0) * u.powi(p as i32 - 2);
        }
        if p >= 3 {
            out.d3 += cf * pf * (pf - 1.0) * (pf - 2.0) * u.powi(p as i32 - 3);
        }
    }
    out
}

/// Densely sampled minimal profile. Interpolation only supplies `h` and
/// `h'`; the second and third derivatives come from the minimal-surface ODE
/// itself, which keeps them at full precision instead of amplifying sample
/// noise through divided differences.
pub struct SampledProfile {
    pub c: f64,
    pub m: usize,
    pub s0: f64,
    pub step: f64,
    /// `(h, h')` at `s0 + k step`.
    pub samples: Vec<(f64, f64)>,
    /// Events recorded during generation (domain clips etc.).
    pub events: Vec<String>,
}

impl SampledProfile {
    pub fn s_end(&self) -> f64 {
        self.s0 + self.step * (self.samples.len() - 1) as f64
    }

    /// Minimal-profile equation `h'' = -(m-1) h' q(s) (1 + h'^2)`.
    fn ode_rhs(&self, s: f64, p: f64) -> f64 {
        -(self.m as f64 - 1.0) * p * orbit_factor(self.c, s) * (1.0 + p * p)
    }

    /// Total s-derivative of the right-hand side along the trajectory.
    fn ode_rhs_derivative(&self, s: f64, p: f64, pp: f64) -> f64 {
        let mf = self.m as f64 - 1.0;
        let q = orbit_factor(self.c, s);
        // d/ds cot = -csc^2, d/ds coth = -csch^2
        let dq = if self.c > 0.0 {
            -1.0 / (s.sin() * s.sin())
        } else {
            -1.0 / (s.sinh() * s.sinh())
        };
        -mf * (p * dq * (1.0 + p * p) + pp * q * (1.0 + 3.0 * p * p))
    }
}

impl Profile for SampledProfile {
    fn h_jet(&self, s: f64) -> Result<Jet1> {
        check_domain(s, (self.s0, self.s_end()))?;
        let pos = (s - self.s0) / self.step;
        let mid = (pos.round() as isize).clamp(1, self.samples.len() as isize - 2) as usize;
        let u = s - (self.s0 + self.step * mid as f64);
        let d = self.step;
        let (ha, pa) = self.samples[mid - 1];
        let (hb, pb) = self.samples[mid];
        let (hc, pc) = self.samples[mid + 1];
        let val = hermite_quintic(d, (ha, pa), (hb, pb), (hc, pc), u).val;
        // slope from its own Hermite fit, with ODE values as derivatives
        let sa = self.s0 + self.step * (mid - 1) as f64;
        let sb = sa + d;
        let sc = sb + d;
        let d1 = hermite_quintic(
            d,
            (pa, self.ode_rhs(sa, pa)),
            (pb, self.ode_rhs(sb, pb)),
            (pc, self.ode_rhs(sc, pc)),
            u,
        )
        .val;
        let d2 = self.ode_rhs(s, d1);
        let d3 = self.ode_rhs_derivative(s, d1, d2);
        Ok(Jet1 { val, d1, d2, d3 })
    }

    fn s_domain(&self) -> (f64, f64) {
        (self.s0, self.s_end())
    }
}

/// Integrates the minimal-rotation profile equation
/// `h'' = -(m-1) h' q(s) (1 + h'^2)` with classical fixed-step RK4, clipping
/// the requested range away from orbit-factor singularities.
pub fn minimal_profile_integrate(
    c: f64,
    m: usize,
    initial_slope: f64,
    s0: f64,
    s1: f64,
    step: f64,
) -> Result<SampledProfile> {
    if c != 1.0 && c != -1.0 {
        return Err(GeomError::InvalidCurvature(c));
    }
    if !(step > 0.0) || !(s1 > s0) {
        return Err(GeomError::InvalidParameter(
            "need s1 > s0 and a positive step".into(),
        ));
    }
    let mut events = Vec::new();
    let (mut lo, mut hi) = (s0, s1);
    // clip the range where the orbit factor exceeds the singularity bound
    while lo < hi && orbit_factor(c, lo).abs() > SINGULARITY_BOUND {
        lo += step;
    }
    while hi > lo && orbit_factor(c, hi).abs() > SINGULARITY_BOUND {
        hi -= step;
    }
    if !(hi > lo) {
        return Err(GeomError::ProfileSingularity { s: s0 });
    }
    if lo != s0 || hi != s1 {
        events.push(format!(
            "domain clipped to [{lo:.6}, {hi:.6}] away from orbit singularities"
        ));
    }

    let n_steps = ((hi - lo) / step).ceil() as usize;
    let dt = (hi - lo) / n_steps as f64;
    let rhs = |s: f64, hp: f64| -> f64 {
        -(m as f64 - 1.0) * hp * orbit_factor(c, s) * (1.0 + hp * hp)
    };
    let mut h = 0.0f64;
    let mut hp = initial_slope;
    let mut samples = Vec::with_capacity(n_steps + 1);
    samples.push((h, hp));
    for k in 0..n_steps {
        let s = lo + k as f64 * dt;
        let (k1h, k1p) = (hp, rhs(s, hp));
        let (k2h, k2p) = (hp + 0.5 * dt * k1p, rhs(s + 0.5 * dt, hp + 0.5 * dt * k1p));
        let (k3h, k3p) = (hp + 0.5 * dt * k2p, rhs(s + 0.5 * dt, hp + 0.5 * dt * k2p));
        let (k4h, k4p) = (hp + dt * k3p, rhs(s + dt, hp + dt * k3p));
        h += dt * (k1h + 2.0 * k2h + 2.0 * k3h + k4h) / 6.0;
        hp += dt * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0;
        if !hp.is_finite() || hp.abs() > SINGULARITY_BOUND {
            return Err(GeomError::OdeBlowUp {
                s: s + dt,
                value: hp,
            });
        }
        samples.push((h, hp));
    }
    Ok(SampledProfile {
        c,
        m,
        s0: lo,
        step: dt,
        samples,
        events,
    })
}

/// Report of the semi-parallel candidate sweep: the algebraic identity the
/// candidate does satisfy, and the minimum modulus of the rotation ODE
/// residual it fails to satisfy.
#[derive(Clone, Debug)]
pub struct SemiParallelReport {
    pub constant: f64,
    pub s_range: (f64, f64),
    pub samples: usize,
    /// Max |u u' cot s - (u^2 - 1)| over the sample grid.
    pub algebraic_max: f64,
    /// Min |ODE residual| over the sample grid; strictly positive is the
    /// numerical content of the classification contradiction.
    pub ode_min_abs: f64,
}

/// Sweeps the semi-parallel rotation candidate `u = sqrt(1 + C sec^2 s)`,
/// `u = -sin a`, over `s_range`. The candidate solves the Riccati relation
/// `u u' cot s = u^2 - 1` exactly; the report records how far its rotation
/// ODE residual stays from zero.
pub fn semi_parallel_candidate_check(
    constant: f64,
    s_range: (f64, f64),
    m: usize,
    samples: usize,
) -> Result<SemiParallelReport> {
    let (lo, hi) = s_range;
    if !(hi > lo) || samples < 2 {
        return Err(GeomError::InvalidParameter(
            "need an increasing s range and at least 2 samples".into(),
        ));
    }
    let mut algebraic_max = 0.0f64;
    let mut ode_min_abs = f64::INFINITY;
    for k in 0..samples {
        let s = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
        let sj = Jet1::variable(s);
        let sec2 = {
            let c = sj.cos();
            (c * c).recip()
        };
        let inside = Jet1::constant(1.0) + sec2.scale(constant);
        if inside.val <= 0.0 {
            return Err(GeomError::CandidateUndefined {
                s,
                value: inside.val,
            });
        }
        let u = inside.sqrt();
        let cot = sj.cos() / sj.sin();

        // algebraic identity of the candidate
        let alg = u * Jet1::constant(u.d1) * Jet1::constant(cot.val)
            - (u * u - Jet1::constant(1.0));
        algebraic_max = algebraic_max.max(alg.val.abs());

        // rotation ODE residual with u = -sin a, k1 = u', k2 = u cot s
        let k1 = Jet1 {
            val: u.d1,
            d1: u.d2,
            d2: u.d3,
            d3: 0.0,
        };
        let k2 = u * cot;
        let mean = (k1 + k2.scale(m as f64 - 1.0)).scale(1.0 / m as f64);
        let st = ProfileState {
            s,
            sin_alpha: -u.val,
            cos_alpha: f64::NAN, // not used by the residual
            k1: k1.val,
            k2: k2.val,
            mean: mean.val,
            mean_prime: mean.d1,
        };
        let r = ode_residual_from_state(1.0, m, &st);
        ode_min_abs = ode_min_abs.min(r.abs());
    }
    Ok(SemiParallelReport {
        constant,
        s_range,
        samples,
        algebraic_max,
        ode_min_abs,
    })
}

/// Report of the sine-Gordon chain: discrepancy between the numerically
/// differentiated bracket and its closed form, and the smallest magnitude
/// the derivative attains (bounded away from zero except in the degenerate
/// branch).
#[derive(Clone, Debug)]
pub struct UmbilicChainReport {
    pub m: usize,
    pub c: f64,
    pub steps: usize,
    pub step: f64,
    /// Max |numeric - closed form| along the trajectory.
    pub max_discrepancy: f64,
    /// Min |numeric derivative| along the trajectory interior.
    pub min_derivative_abs: f64,
    /// Whether the trajectory touched `sin a cos a = 0` (the excluded
    /// branch of the argument).
    pub degenerate: bool,
}

/// Coefficient `4 m^2 + 3 m - 4` appearing in the umbilical contradiction.
pub fn umbilic_coefficient(m: i64) -> i64 {
    4 * m * m + 3 * m - 4
}

/// True iff `4 m^2 + 3 m - 4 > 0` for every integer `1 <= m <= m_max`
/// (checked exhaustively), so the bracket can never vanish at an admissible
/// dimension.
pub fn coefficient_positivity(m_max: i64) -> bool {
    if m_max < 1 {
        return false;
    }
    (1..=m_max).all(|m| umbilic_coefficient(m) > 0)
}

/// Integrates the sine-Gordon equation `a'' = -(c/2) sin 2a` in the
/// adapted-frame arclength and compares the derivative of the constraint
/// bracket
///
/// ```text
/// L = (2c(m-1)/(m+2)) cos 2a + (2c(m-1)^2/(m+2)) cos^2 a
///     - c(m-1) sin^2 a + m (a')^2
/// ```
///
/// (the lambda shift drops out of the derivative) against its closed form
/// `-c sin 2a a' (4m^2 + 3m - 4)/(m + 2)` along the trajectory.
pub fn umbilic_chain_check(
    m: usize,
    c: f64,
    alpha0: f64,
    alpha_prime0: f64,
    length: f64,
    step: f64,
) -> Result<UmbilicChainReport> {
    if c != 1.0 && c != -1.0 {
        return Err(GeomError::InvalidCurvature(c));
    }
    if !(step > 0.0 && length > 4.0 * step) {
        return Err(GeomError::InvalidParameter(
            "need a positive step much smaller than the trajectory length".into(),
        ));
    }
    let mf = m as f64;
    let steps = (length / step).ceil() as usize;
    let dt = length / steps as f64;
    let rhs = |a: f64| -0.5 * c * (2.0 * a).sin();
    let mut a = alpha0;
    let mut ap = alpha_prime0;
    let mut alphas = Vec::with_capacity(steps + 1);
    let mut aprimes = Vec::with_capacity(steps + 1);
    alphas.push(a);
    aprimes.push(ap);
    let mut degenerate = (a.sin() * a.cos()).abs() < 1e-8;
    for _ in 0..steps {
        let k1a = ap;
        let k1p = rhs(a);
        let k2a = ap + 0.5 * dt * k1p;
        let k2p = rhs(a + 0.5 * dt * k1a);
        let k3a = ap + 0.5 * dt * k2p;
        let k3p = rhs(a + 0.5 * dt * k2a);
        let k4a = ap + dt * k3p;
        let k4p = rhs(a + dt * k3a);
        a += dt * (k1a + 2.0 * k2a + 2.0 * k3a + k4a) / 6.0;
        ap += dt * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0;
        alphas.push(a);
        aprimes.push(ap);
        if (a.sin() * a.cos()).abs() < 1e-8 {
            degenerate = true;
        }
    }

    let bracket = |a: f64, ap: f64| -> f64 {
        let cm1 = c * (mf - 1.0);
        2.0 * cm1 / (mf + 2.0) * (2.0 * a).cos()
            + 2.0 * cm1 * (mf - 1.0) / (mf + 2.0) * a.cos() * a.cos()
            - cm1 * a.sin() * a.sin()
            + mf * ap * ap
    };
    let coeff = umbilic_coefficient(m as i64) as f64;
    let mut max_discrepancy = 0.0f64;
    let mut min_derivative_abs = f64::INFINITY;
    for k in 2..alphas.len() - 2 {
        let numeric = crate::calculus::stencil5(
            bracket(alphas[k - 2], aprimes[k - 2]),
            bracket(alphas[k - 1], aprimes[k - 1]),
            bracket(alphas[k + 1], aprimes[k + 1]),
            bracket(alphas[k + 2], aprimes[k + 2]),
            dt,
        );
        let closed =
            -c * (2.0 * alphas[k]).sin() * aprimes[k] * coeff / (mf + 2.0);
        max_discrepancy = max_discrepancy.max((numeric - closed).abs());
        min_derivative_abs = min_derivative_abs.min(numeric.abs());
    }
    Ok(UmbilicChainReport {
        m,
        c,
        steps,
        step: dt,
        max_discrepancy,
        min_derivative_abs,
        degenerate,
    })
}
