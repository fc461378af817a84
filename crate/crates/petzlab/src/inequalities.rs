//! One operation per inequality, each producing a `CheckReport`.
//!
//! Reports put the provably-larger side in `lhs` and the bound in `rhs`,
//! so every suite shares the convention `pass <=> gap = lhs - rhs >= -tol`.
//! Where a right-hand side comes from an optimizer or sampled supremum, the
//! computed value is a certified lower bound of the true one: a reported
//! violation is a genuine counterexample candidate.

use crate::channels::{
    alpha_quadrature, beta_quadrature, cocycle_generator, KrausChannel, PetzFamily,
    QuadratureRule,
};
use crate::divergences::{
    measured_relative_entropy, relative_entropy, sandwiched_renyi, MeasOptConfig,
};
use crate::hermlin::{
    eigh, expm_herm, hs_inner, hs_norm, logm_pd, CMat, DensityMatrix, HermitianMatrix,
    MatrixError, PsdMatrix, Result, C64,
};
pub use crate::report::CheckReport;
use crate::standard_form::{am_lp_norm, perturbed_vector, StandardVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Argument order of the measured relative entropy on the right-hand side
/// of the improved DPI. The main theorem reads `S_meas(rho | recovered)`;
/// the introduction's display has the arguments swapped. Both are exercised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasOrder {
    Theorem,
    Intro,
}

const DPI_TOL: f64 = 1e-8;
const IMPROVED_TOL: f64 = 1e-6;

fn entropy_drop(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: &KrausChannel,
) -> (f64, Option<&'static str>) {
    let s_a = relative_entropy(rho, sigma);
    if s_a.is_infinite() {
        return (f64::INFINITY, Some("support"));
    }
    let s_b = relative_entropy(
        &channel.apply_schrodinger(rho),
        &channel.apply_schrodinger(sigma),
    );
    (s_a.value - s_b.value, None)
}

/// Data-processing inequality: `S(rho|sigma) - S(T rho|T sigma) >= 0`.
pub fn check_dpi(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: &KrausChannel,
    instance: impl Into<String>,
    seed: u64,
) -> CheckReport {
    let (lhs, vac) = entropy_drop(rho, sigma, channel);
    match vac {
        Some(reason) => CheckReport::vacuous_pass("dpi", reason, lhs, 0.0, instance, seed),
        None => CheckReport::from_sides("dpi", lhs, 0.0, DPI_TOL, instance, seed),
    }
}

/// The recovered state `alpha(T rho)` for the integrated recovery channel.
pub fn recovered_state(
    rho_b: &DensityMatrix,
    channel: &KrausChannel,
    sigma: &DensityMatrix,
    rule: &QuadratureRule,
) -> Result<DensityMatrix> {
    PetzFamily::new(channel, sigma)?.recover(rule, rho_b)
}

/// Improved DPI (the main bound): entropy drop bounded below by the
/// measured relative entropy against the recovered state.
pub fn check_improved_dpi(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: &KrausChannel,
    order: MeasOrder,
    cfg: &MeasOptConfig,
    rule: &QuadratureRule,
    instance: impl Into<String>,
    seed: u64,
) -> Result<CheckReport> {
    let suite = match order {
        MeasOrder::Theorem => "improved_dpi",
        MeasOrder::Intro => "improved_dpi_intro",
    };
    let (lhs, vac) = entropy_drop(rho, sigma, channel);
    if let Some(reason) = vac {
        return Ok(CheckReport::vacuous_pass(suite, reason, lhs, 0.0, instance, seed));
    }
    let rho_b = channel.apply_schrodinger(rho);
    let rec = recovered_state(&rho_b, channel, sigma, rule)?;
    let meas = match order {
        MeasOrder::Theorem => measured_relative_entropy(rho, &rec, cfg)?,
        MeasOrder::Intro => measured_relative_entropy(&rec, rho, cfg)?,
    };
    Ok(CheckReport::from_sides(suite, lhs, meas.value, IMPROVED_TOL, instance, seed))
}

/// Fidelity form of the bound: entropy drop against `-log F(recovered, rho)^2`,
/// with the measured bound required to dominate it (so a failed dominance
/// shows up as an infinite rhs).
pub fn check_fidelity_bound(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: &KrausChannel,
    cfg: &MeasOptConfig,
    rule: &QuadratureRule,
    instance: impl Into<String>,
    seed: u64,
) -> Result<CheckReport> {
    let instance = instance.into();
    let (lhs, vac) = entropy_drop(rho, sigma, channel);
    if let Some(reason) = vac {
        return Ok(CheckReport::vacuous_pass("fidelity_bound", reason, lhs, 0.0, instance, seed));
    }
    let rho_b = channel.apply_schrodinger(rho);
    let rec = recovered_state(&rho_b, channel, sigma, rule)?;
    let f = crate::divergences::fidelity(&rec, rho);
    let rhs_fid = -2.0 * f.ln();
    let rhs_meas = measured_relative_entropy(rho, &rec, cfg)?.value;
    let dominance_ok = rhs_meas >= rhs_fid - 1e-6;
    let rhs = if dominance_ok { rhs_fid } else { f64::INFINITY };
    let instance = if dominance_ok {
        instance
    } else {
        format!("{instance} [dominance violated: meas={rhs_meas} fid={rhs_fid}]")
    };
    Ok(CheckReport::from_sides("fidelity_bound", lhs, rhs, IMPROVED_TOL, instance, seed))
}

/// Renyi form with the integral outside the divergence: entropy drop
/// against `((1-s)/s) Int dt beta_0(t) D_s(alpha^t(T rho) | rho)`. Also
/// enforces the Jensen ordering against the integrated-channel form.
pub fn check_renyi_integral_bound(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: &KrausChannel,
    s: f64,
    rule: &QuadratureRule,
    instance: impl Into<String>,
    seed: u64,
) -> Result<CheckReport> {
    let instance = instance.into();
    let (lhs, vac) = entropy_drop(rho, sigma, channel);
    if let Some(reason) = vac {
        return Ok(CheckReport::vacuous_pass("renyi_integral", reason, lhs, 0.0, instance, seed));
    }
    let rho_b = channel.apply_schrodinger(rho);
    let prefactor = (1.0 - s) / s;
    let family = PetzFamily::new(channel, sigma)?;
    let mut integral = 0.0;
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let moved = family.apply_rotated(t, rho_b.mat());
        let state = DensityMatrix::new((&moved + moved.adjoint()).scale(0.5))?;
        let d = sandwiched_renyi(&state, rho, s)?;
        if d.is_infinite() {
            return Ok(CheckReport::vacuous_pass(
                "renyi_integral",
                "renyi-support",
                lhs,
                f64::INFINITY,
                instance,
                seed,
            ));
        }
        integral += w * d.value;
    }
    let rhs_outside = prefactor * integral;
    let rec = recovered_state(&rho_b, channel, sigma, rule)?;
    let d_in = sandwiched_renyi(&rec, rho, s)?;
    let rhs_inside = prefactor * d_in.value;
    let jensen_ok = rhs_outside >= rhs_inside - 1e-8;
    let rhs = if jensen_ok { rhs_outside } else { f64::INFINITY };
    let instance = if jensen_ok {
        instance
    } else {
        format!("{instance} [jensen ordering violated: outside={rhs_outside} inside={rhs_inside}]")
    };
    Ok(CheckReport::from_sides("renyi_integral", lhs, rhs, IMPROVED_TOL, instance, seed))
}

/// Renyi form with the recovery channel inside the divergence.
pub fn check_renyi_channel_bound(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: &KrausChannel,
    s: f64,
    rule: &QuadratureRule,
    instance: impl Into<String>,
    seed: u64,
) -> Result<CheckReport> {
    let instance = instance.into();
    let (lhs, vac) = entropy_drop(rho, sigma, channel);
    if let Some(reason) = vac {
        return Ok(CheckReport::vacuous_pass("renyi_channel", reason, lhs, 0.0, instance, seed));
    }
    let rho_b = channel.apply_schrodinger(rho);
    let rec = recovered_state(&rho_b, channel, sigma, rule)?;
    let d = sandwiched_renyi(&rec, rho, s)?;
    if d.is_infinite() {
        return Ok(CheckReport::vacuous_pass(
            "renyi_channel",
            "renyi-support",
            lhs,
            f64::INFINITY,
            instance,
            seed,
        ));
    }
    let rhs = (1.0 - s) / s * d.value;
    Ok(CheckReport::from_sides("renyi_channel", lhs, rhs, IMPROVED_TOL, instance, seed))
}

/// A holomorphic scalar family with constructive holomorphy on the strip.
#[derive(Debug, Clone)]
pub enum HoloScalarFamily {
    Constant(C64),
    /// z -> exp(c z)
    ExpLinear(C64),
    /// z -> <phi | A^z | chi> for strictly positive A
    MatrixElement {
        a: PsdMatrix,
        phi: CMat,
        chi: CMat,
    },
}

impl HoloScalarFamily {
    pub fn eval(&self, z: C64) -> C64 {
        match self {
            Self::Constant(c) => *c,
            Self::ExpLinear(c) => (*c * z).exp(),
            Self::MatrixElement { a, phi, chi } => {
                let az = a.spectral().power(z);
                (phi.adjoint() * az * chi)[(0, 0)]
            }
        }
    }
}

/// Hirschman three-lines bound: `ln|g(theta)|` against the weighted
/// boundary integrals of `ln|g|`.
pub fn check_hirschman(
    g: &HoloScalarFamily,
    theta: f64,
    n_nodes: usize,
    t_max: f64,
    instance: impl Into<String>,
    seed: u64,
) -> Result<CheckReport> {
    if !(0.0 < theta && theta < 0.5) {
        return Err(MatrixError::Invalid(format!("theta {theta} outside (0, 1/2)")));
    }
    let alpha_rule = alpha_quadrature(theta, n_nodes, t_max)?;
    let beta_rule = beta_quadrature(theta, n_nodes, t_max)?;
    let lower = alpha_rule.integrate(|t| g.eval(C64::new(0.0, t)).norm().ln());
    let upper = beta_rule.integrate(|t| g.eval(C64::new(0.5, t)).norm().ln());
    let bound = (1.0 - 2.0 * theta) * lower + 2.0 * theta * upper;
    let value = g.eval(C64::new(theta, 0.0)).norm().ln();
    Ok(CheckReport::from_sides("hirschman", bound, value, 1e-7, instance, seed))
}

/// Vector family `z -> X_1^z ... X_m^z zeta` with strictly positive factors.
#[derive(Debug, Clone)]
pub struct PowerProductFamily {
    pub factors: Vec<PsdMatrix>,
    pub zeta: StandardVector,
}

impl PowerProductFamily {
    pub fn eval(&self, z: C64) -> StandardVector {
        let mut m = self.zeta.mat.clone();
        for x in self.factors.iter().rev() {
            m = x.spectral().power(z) * m;
        }
        StandardVector { mat: m }
    }
}

/// Interpolation of the weighted Lp norms along the strip:
/// `ln ||G(theta)||_{p_theta, psi}` against the boundary integrals at
/// `(p0, p1)`. Index pairs must lie in the same regime, `[1,2]` or `[2,inf]`.
pub fn check_lp_interpolation(
    family: &PowerProductFamily,
    psi: &DensityMatrix,
    p0: f64,
    p1: f64,
    theta: f64,
    n_nodes: usize,
    t_max: f64,
    instance: impl Into<String>,
    seed: u64,
) -> Result<CheckReport> {
    if !(0.0 < theta && theta < 0.5) {
        return Err(MatrixError::Invalid(format!("theta {theta} outside (0, 1/2)")));
    }
    let low = (1.0..=2.0).contains(&p0) && (1.0..=2.0).contains(&p1);
    let high = p0 >= 2.0 && p1 >= 2.0;
    if !(low || high) {
        return Err(MatrixError::Invalid(format!(
            "index pair ({p0}, {p1}) must both lie in [1,2] or [2,inf]"
        )));
    }
    let inv = |p: f64| if p.is_infinite() { 0.0 } else { 1.0 / p };
    let p_theta = 1.0 / ((1.0 - 2.0 * theta) * inv(p0) + 2.0 * theta * inv(p1));
    let value = am_lp_norm(&family.eval(C64::new(theta, 0.0)), psi, p_theta)?
        .value
        .ln();
    let alpha_rule = alpha_quadrature(theta, n_nodes, t_max)?;
    let beta_rule = beta_quadrature(theta, n_nodes, t_max)?;
    let mut lower = 0.0;
    for (&t, &w) in alpha_rule.nodes.iter().zip(&alpha_rule.weights) {
        lower += w
            * am_lp_norm(&family.eval(C64::new(0.0, t)), psi, p0)?
                .value
                .ln();
    }
    let mut upper = 0.0;
    for (&t, &w) in beta_rule.nodes.iter().zip(&beta_rule.weights) {
        upper += w
            * am_lp_norm(&family.eval(C64::new(0.5, t)), psi, p1)?
                .value
                .ln();
    }
    let bound = (1.0 - 2.0 * theta) * lower + 2.0 * theta * upper;
    Ok(CheckReport::from_sides("lp_interpolation", bound, value, 1e-6, instance, seed))
}

/// Multi-operator corollary: `(1/r) ln || a_1^r ... a_n^r psi ||_{p/r, psi}`
/// against the `beta_{r/2}`-weighted integral of
/// `ln || a_1^{1+2it} ... a_n^{1+2it} psi ||_{p, psi}`.
///
/// At r = 1 the weight degenerates to a point mass at t = 0 and the bound
/// is an equality.
pub fn check_cor1(
    a_list: &[PsdMatrix],
    psi: &DensityMatrix,
    r: f64,
    p: f64,
    n_nodes: usize,
    t_max: f64,
    instance: impl Into<String>,
    seed: u64,
) -> Result<CheckReport> {
    if !(0.0 < r && r <= 1.0) {
        return Err(MatrixError::Invalid(format!("r = {r} outside (0, 1]")));
    }
    if p < 2.0 {
        return Err(MatrixError::Invalid(format!("p = {p} must be >= 2")));
    }
    if !psi.is_faithful() {
        return Err(MatrixError::Singular);
    }
    let psi_vec = StandardVector::from_natural_cone(psi.psd());
    let specs: Vec<_> = a_list.iter().map(|a| a.spectral()).collect();
    let product_vec = |z: C64| -> StandardVector {
        let mut m = psi_vec.mat.clone();
        for s in specs.iter().rev() {
            m = s.power(z) * m;
        }
        StandardVector { mat: m }
    };
    let value =
        am_lp_norm(&product_vec(C64::new(r, 0.0)), psi, p / r)?.value.ln() / r;
    let rule = if r == 1.0 {
        QuadratureRule::point_mass()
    } else {
        beta_quadrature(r / 2.0, n_nodes, t_max)?
    };
    let mut bound = 0.0;
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        bound += w
            * am_lp_norm(&product_vec(C64::new(1.0, 2.0 * t)), psi, p)?
                .value
                .ln();
    }
    Ok(CheckReport::from_sides("cor1", bound, value, 1e-6, instance, seed))
}

/// Araki-Lieb-Thirring corollary: `||zeta||_{r,psi}^2` bounded by
/// `[Tr(omega_psi^{(2-r)/4} omega_zeta^{r/2} omega_psi^{(2-r)/4})]^{2/r}`.
pub fn check_alt(
    zeta: &StandardVector,
    psi: &DensityMatrix,
    r: f64,
    instance: impl Into<String>,
    seed: u64,
) -> Result<CheckReport> {
    if r < 2.0 {
        return Err(MatrixError::Invalid(format!("r = {r} must be >= 2")));
    }
    let value = am_lp_norm(zeta, psi, r)?.value.powi(2);
    let omega_zeta = crate::standard_form::functional_of(zeta);
    let x = omega_zeta.spectral().real_power(r / 4.0)
        * psi.spectral().real_power(0.5 - r / 4.0);
    let bound = hs_norm(&x).powi(2).powf(2.0 / r);
    Ok(CheckReport::from_sides("alt", bound, value, 1e-8, instance, seed))
}

/// Generalized Golden-Thompson corollary:
/// `ln || psi^{h_1+...+h_k} ||^2` against the `beta_0`-weighted integral of
/// `ln { || prod_j e^{(1/2+it)h_j} psi || * || prod_rev e^{(1/2-it)h_j} psi || }`.
pub fn check_cor3(
    h_list: &[HermitianMatrix],
    psi: &StandardVector,
    n_nodes: usize,
    t_max: f64,
    instance: impl Into<String>,
    seed: u64,
) -> Result<CheckReport> {
    if h_list.is_empty() {
        return Err(MatrixError::Invalid("need at least one perturbation".into()));
    }
    let mut total = HermitianMatrix::zeros(psi.dim());
    for h in h_list {
        total = HermitianMatrix::new_unchecked(total.mat() + h.mat());
    }
    let perturbed = perturbed_vector(psi, &total)?;
    let value = perturbed.norm().powi(2).ln();
    let specs: Vec<_> = h_list.iter().map(eigh).collect();
    let rule = beta_quadrature(0.0, n_nodes, t_max)?;
    let integrand = |t: f64| -> f64 {
        let mut fwd = psi.mat.clone();
        for s in specs.iter().rev() {
            fwd = s.apply_cfn(|l| (C64::new(0.5, t) * l).exp()) * fwd;
        }
        let mut rev = psi.mat.clone();
        for s in specs.iter() {
            rev = s.apply_cfn(|l| (C64::new(0.5, -t) * l).exp()) * rev;
        }
        (hs_norm(&fwd) * hs_norm(&rev)).ln()
    };
    let bound = rule.integrate(integrand);
    Ok(CheckReport::from_sides("cor3", bound, value, 1e-6, instance, seed))
}

/// Entropy-difference identity through the cocycle generator:
/// `S_A - S_B = sup_h { Tr(rho h) - ln Tr e^{log sigma + h + k} }`, with the
/// sampled sup staying below and the informed choice attaining it.
pub fn check_entropy_difference_identity(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: &KrausChannel,
    n_samples: usize,
    instance: impl Into<String>,
    seed: u64,
) -> Result<CheckReport> {
    let instance = instance.into();
    let k = cocycle_generator(channel, rho, sigma)?;
    let s_a = relative_entropy(rho, sigma).value;
    let s_b = relative_entropy(
        &channel.apply_schrodinger(rho),
        &channel.apply_schrodinger(sigma),
    )
    .value;
    let lhs = s_a - s_b;
    let log_sigma = logm_pd(sigma.psd())?;
    let d = rho.dim();
    let objective = |h: &CMat| -> f64 {
        let first = hs_inner(rho.mat(), h).unwrap().re;
        let z = expm_herm(&HermitianMatrix::new_unchecked(log_sigma.mat() + h + k.mat()))
            .mat()
            .trace()
            .re;
        first - z.ln()
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..n_samples {
        let g = CMat::from_fn(d, d, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let h = (&g + g.adjoint()).scale(0.5 * rng.random_range(0.2..2.0));
        best = best.max(objective(&h));
    }
    let informed = rho.spectral().apply_fn(f64::ln) - sigma.spectral().apply_fn(f64::ln)
        - k.mat();
    let v_informed = objective(&informed);
    best = best.max(v_informed);
    let attained = (lhs - v_informed).abs() <= 1e-5;
    let rhs = if attained { best } else { f64::INFINITY };
    let instance = if attained {
        instance
    } else {
        format!("{instance} [informed objective {v_informed} missed {lhs}]")
    };
    Ok(CheckReport::from_sides("entropy_difference", lhs, rhs, 1e-6, instance, seed))
}

/// Product-formula convergence of
/// `(Delta_{sigma,rho}^{1/2n} e^{h/n} Delta_{sigma,rho}^{1/2n})^{n/2} psi_rho`
/// to the perturbed vector `e^{(log sigma + h)/2}`. The deviation sequence
/// must decrease and end below the stated tolerance.
pub fn check_trotter_limit(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    h: &HermitianMatrix,
    n_sequence: &[usize],
    allowed_final: f64,
    instance: impl Into<String>,
    seed: u64,
) -> Result<CheckReport> {
    if rho.dim() > 4 {
        return Err(MatrixError::Invalid("product-formula check restricted to dim <= 4".into()));
    }
    if !rho.is_faithful() || !sigma.is_faithful() {
        return Err(MatrixError::Singular);
    }
    let log_sigma = logm_pd(sigma.psd())?;
    let target = expm_herm(&HermitianMatrix::new_unchecked(
        (log_sigma.mat() + h.mat()).scale(0.5),
    ));
    let sspec = sigma.spectral();
    let hspec = eigh(h);
    let mut devs = Vec::with_capacity(n_sequence.len());
    for &n in n_sequence {
        if n < 2 || n % 2 != 0 {
            return Err(MatrixError::Invalid("n_sequence entries must be even and >= 2".into()));
        }
        let nf = n as f64;
        let b = sspec.real_power(0.5 / nf)
            * hspec.apply_fn(|l| (l / nf).exp())
            * sspec.real_power(0.5 / nf);
        let mut p = CMat::identity(rho.dim(), rho.dim());
        let mut base = b;
        let mut e = n / 2;
        while e > 0 {
            if e & 1 == 1 {
                p = &p * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        devs.push(hs_norm(&(p - target.mat())));
    }
    // the decreasing trend is only meaningful above the rounding floor
    let floor = 1e-13 * hs_norm(target.mat()).max(1.0);
    let mut trend_ok = true;
    for w in devs.windows(2) {
        if w[0] > floor && w[1] > w[0] * 1.05 + floor {
            trend_ok = false;
        }
    }
    let final_dev = *devs.last().unwrap_or(&f64::INFINITY);
    let observed = if trend_ok { final_dev } else { f64::INFINITY };
    Ok(CheckReport::from_sides("trotter", allowed_final, observed, 0.0, instance, seed))
}
