//! Standard-form representation of the matrix algebra.
//!
//! Vectors are matrices with the Hilbert-Schmidt inner product, the algebra
//! acts by left multiplication. This module provides the modular
//! conjugation, relative modular operators, Connes cocycles, the weighted
//! (Araki-Masuda) Lp norms with their small-dimension variational oracle,
//! and perturbed vectors with their series expansion.

use crate::gl;
use crate::hermlin::{
    self, ensure_same_dim, eigh, expm_herm, hs_norm, logm_pd, op_norm, CMat, DensityMatrix,
    HermitianMatrix, MatrixError, PsdMatrix, Result, SpectralDecomposition, C64,
};
use crate::report::CheckReport;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Vector in the standard Hilbert space, identified with a square matrix.
#[derive(Debug, Clone)]
pub struct StandardVector {
    pub mat: CMat,
}

impl StandardVector {
    pub fn new(mat: CMat) -> Result<Self> {
        hermlin::ensure_square(&mat)?;
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MatrixError::Invalid("non-finite entry".into()));
        }
        Ok(Self { mat })
    }

    /// Vector representative of a positive functional in the natural cone.
    pub fn from_natural_cone(p: &PsdMatrix) -> Self {
        Self {
            mat: hermlin::sqrtm_psd(p).mat().clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn norm(&self) -> f64 {
        hs_norm(&self.mat)
    }

    /// Natural-cone membership: Hermitian and PSD within tolerance.
    pub fn is_natural_cone(&self) -> bool {
        PsdMatrix::new(self.mat.clone()).is_ok()
    }
}

/// The linear functional of a vector, `omega_zeta = zeta zeta*`.
pub fn functional_of(zeta: &StandardVector) -> PsdMatrix {
    PsdMatrix::new(&zeta.mat * zeta.mat.adjoint()).expect("zeta zeta* is PSD")
}

/// Natural-cone representative of a positive functional: its PSD square root.
pub fn natural_cone_rep(omega: &PsdMatrix) -> StandardVector {
    StandardVector::from_natural_cone(omega)
}

/// Modular conjugation `J|zeta> = |zeta*>` (antilinear involution).
pub fn modular_conjugation(zeta: &StandardVector) -> StandardVector {
    StandardVector {
        mat: zeta.mat.adjoint(),
    }
}

/// Relative modular operator `Delta_{eta,psi}`, acting as
/// `zeta -> omega_eta^z zeta omega_psi^{-z}` with pseudo-powers on supports.
#[derive(Debug, Clone)]
pub struct RelModularOp {
    left: SpectralDecomposition,
    right: SpectralDecomposition,
}

impl RelModularOp {
    pub fn new(left_weight: &PsdMatrix, right_weight: &PsdMatrix) -> Result<Self> {
        ensure_same_dim(left_weight.mat(), right_weight.mat())?;
        Ok(Self {
            left: left_weight.spectral(),
            right: right_weight.spectral(),
        })
    }

    pub fn from_vectors(eta: &StandardVector, psi: &StandardVector) -> Result<Self> {
        Self::new(&functional_of(eta), &functional_of(psi))
    }

    pub fn apply(&self, z: C64, zeta: &StandardVector) -> StandardVector {
        let l = self.left.power(z);
        let r = self.right.power(-z);
        StandardVector {
            mat: l * &zeta.mat * r,
        }
    }
}

/// `Delta_{eta,psi}^z zeta` built from the vectors' functionals.
pub fn rel_modular_apply(
    eta: &StandardVector,
    psi: &StandardVector,
    z: C64,
    zeta: &StandardVector,
) -> Result<StandardVector> {
    Ok(RelModularOp::from_vectors(eta, psi)?.apply(z, zeta))
}

/// Connes cocycle `[D eta : D psi]_t = omega_eta^{it} omega_psi^{-it}`,
/// acting by left multiplication; unitary on the joint support.
pub fn connes_cocycle(eta: &DensityMatrix, psi: &DensityMatrix, t: f64) -> Result<CMat> {
    ensure_same_dim(eta.mat(), psi.mat())?;
    let it = C64::new(0.0, t);
    Ok(eta.spectral().power(it) * psi.spectral().power(-it))
}

/// Analytic continuation `[D eta : D psi]_{iz}`; requires the two states to
/// majorize one another (`c^{-1} eta <= psi <= c eta` for some finite c),
/// which in finite dimension means equal supports.
pub fn connes_cocycle_analytic(eta: &DensityMatrix, psi: &DensityMatrix, z: C64) -> Result<CMat> {
    ensure_same_dim(eta.mat(), psi.mat())?;
    let pe = eta.spectral();
    let pp = psi.spectral();
    if pe.rank() != pp.rank()
        || hs_norm(&(pe.support_projection() - pp.support_projection())) > 1e-8
    {
        return Err(MatrixError::Invalid(
            "analytic continuation of the cocycle needs mutually majorized states".into(),
        ));
    }
    let iz = C64::new(0.0, 1.0) * z;
    Ok(pe.power(iz) * pp.power(-iz))
}

/// Weighted Lp norm evaluation.
#[derive(Debug, Clone)]
pub struct LpNormResult {
    pub value: f64,
    pub p: f64,
    pub reference_state: DensityMatrix,
}

/// Weighted Lp norm `||zeta||_{p,psi} = [Tr(zeta omega_psi^{2/p-1} zeta*)^{p/2}]^{1/p}`.
///
/// At p = 2 this is the Hilbert-Schmidt norm for every reference state. For
/// p > 2 (including infinity) the reference state must be faithful; p =
/// infinity returns the operator norm of `zeta omega_psi^{-1/2}`.
pub fn am_lp_norm(zeta: &StandardVector, psi: &DensityMatrix, p: f64) -> Result<LpNormResult> {
    ensure_same_dim(&zeta.mat, psi.mat())?;
    if p.is_nan() || p < 1.0 {
        return Err(MatrixError::Invalid(format!("Lp index p = {p} is below 1")));
    }
    if p > 2.0 && !psi.is_faithful() {
        return Err(MatrixError::Invalid(
            "weighted Lp norm with p > 2 needs a faithful reference state".into(),
        ));
    }
    let value = if (p - 2.0).abs() < 1e-12 {
        hs_norm(&zeta.mat)
    } else if p.is_infinite() {
        op_norm(&(&zeta.mat * psi.spectral().real_power(-0.5)))
    } else {
        let w = psi.spectral().real_power(2.0 / p - 1.0);
        let m = HermitianMatrix::new_unchecked(&zeta.mat * w * zeta.mat.adjoint());
        let sum: f64 = eigh(&m)
            .eigenvalues
            .iter()
            .map(|&l| l.max(0.0).powf(p / 2.0))
            .sum();
        sum.powf(1.0 / p)
    };
    Ok(LpNormResult {
        value,
        p,
        reference_state: psi.clone(),
    })
}

/// Sampled-sup evaluation of the variational Lp definition for p >= 2,
/// `||zeta||_{p,psi} = sup_{||phi||=1} ||Delta_{phi,psi}^{(1/2)-(1/p)} zeta||`.
///
/// Random unit vectors plus hill-climbing refinement; returns a lower bound
/// that converges to the norm. Oracle only, dim <= 3.
pub fn am_lp_variational_oracle(
    zeta: &StandardVector,
    psi: &DensityMatrix,
    p: f64,
    sample_budget: usize,
    seed: u64,
) -> Result<f64> {
    let d = ensure_same_dim(&zeta.mat, psi.mat())?;
    if d > 3 {
        return Err(MatrixError::Invalid(
            "variational Lp oracle is restricted to dim <= 3".into(),
        ));
    }
    if p < 2.0 {
        return Err(MatrixError::Invalid("variational oracle needs p >= 2".into()));
    }
    if !psi.is_faithful() {
        return Err(MatrixError::Singular);
    }
    let s = 0.5 - 1.0 / p;
    if s == 0.0 {
        return Ok(hs_norm(&zeta.mat));
    }
    // objective depends on phi only through omega_phi:
    // ||Delta_{phi,psi}^s zeta||^2 = Tr(omega_phi^{2s} M), M = zeta omega_psi^{-2s} zeta*
    let m = HermitianMatrix::new_unchecked(
        &zeta.mat * psi.spectral().real_power(-2.0 * s) * zeta.mat.adjoint(),
    );
    let objective = |omega: &PsdMatrix| -> f64 {
        let pw = omega.spectral().real_power(2.0 * s);
        hermlin::hs_inner(&pw.adjoint(), m.mat()).unwrap().re.max(0.0)
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let random_state = |rng: &mut ChaCha12Rng| -> PsdMatrix {
        let g = CMat::from_fn(d, d, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let w = &g * g.adjoint();
        let tr = w.trace().re;
        PsdMatrix::new(w.unscale(tr)).unwrap()
    };
    let n_random = (sample_budget / 2).max(8);
    let mut best_state = random_state(&mut rng);
    let mut best = objective(&best_state);
    for _ in 1..n_random {
        let cand = random_state(&mut rng);
        let val = objective(&cand);
        if val > best {
            best = val;
            best_state = cand;
        }
    }
    // hill climb around the best sample with shrinking step
    let mut step = 0.5;
    let mut fails = 0usize;
    let mut sqrt_cur = hermlin::sqrtm_psd(&best_state).mat().clone();
    for _ in 0..(sample_budget - n_random.min(sample_budget)) {
        let g = CMat::from_fn(d, d, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let trial_sqrt = &sqrt_cur + g.scale(step);
        let w = &trial_sqrt * trial_sqrt.adjoint();
        let tr = w.trace().re;
        if tr <= 0.0 {
            continue;
        }
        let cand = PsdMatrix::new(w.unscale(tr)).unwrap();
        let val = objective(&cand);
        if val > best {
            best = val;
            sqrt_cur = hermlin::sqrtm_psd(&cand).mat().clone();
            fails = 0;
        } else {
            fails += 1;
            if fails >= 8 {
                step *= 0.6;
                fails = 0;
            }
        }
    }
    Ok(best.sqrt())
}

/// Perturbed vector `|psi^h> = exp(log psi + h/2)` for a faithful
/// natural-cone vector; unnormalized.
pub fn perturbed_vector(psi: &StandardVector, h: &HermitianMatrix) -> Result<StandardVector> {
    ensure_same_dim(&psi.mat, h.mat())?;
    let p = PsdMatrix::new(psi.mat.clone())
        .map_err(|_| MatrixError::Invalid("perturbed vector needs a natural-cone psi".into()))?;
    let logpsi = logm_pd(&p)?;
    let exponent = HermitianMatrix::new_unchecked(logpsi.mat() + h.mat().scale(0.5));
    Ok(StandardVector {
        mat: expm_herm(&exponent).mat().clone(),
    })
}

/// Evaluates the iterated-integral expansion of the perturbed vector,
/// order by order, with nested 16-point Gauss-Legendre quadrature.
///
/// The m-th term as a function of the budget t obeys
/// `B_m(t) = int_0^t Delta^u (h B_{m-1}(t-u)) du`, `B_0 = psi`; each level
/// is integrated over [0, t] with the previous level interpolated from its
/// values at fixed Legendre nodes. The sum over m converges to
/// `perturbed_vector` as the order grows.
pub fn perturbation_series_oracle(
    psi: &StandardVector,
    h: &HermitianMatrix,
    order: usize,
) -> Result<StandardVector> {
    ensure_same_dim(&psi.mat, h.mat())?;
    if order > 20 {
        return Err(MatrixError::Invalid("series order capped at 20".into()));
    }
    let p = PsdMatrix::new(psi.mat.clone())
        .map_err(|_| MatrixError::Invalid("series oracle needs a natural-cone psi".into()))?;
    if !p.is_faithful() {
        return Err(MatrixError::Singular);
    }
    let psi_spec = p.spectral();
    // Delta^u zeta = omega^u zeta omega^{-u} with omega = psi^2
    let delta_pow = |u: f64, zeta: &CMat| -> CMat {
        psi_spec.real_power(2.0 * u) * zeta * psi_spec.real_power(-2.0 * u)
    };
    let n_gl = 16usize;
    let (x01, w01) = gl::gauss_legendre_on(n_gl, 0.0, 1.0);
    // fixed interpolation nodes on [0, 1/2]
    let tau: Vec<f64> = x01.iter().map(|&x| 0.5 * x).collect();
    let bary: Vec<f64> = (0..n_gl)
        .map(|j| {
            let mut w = 1.0;
            for k in 0..n_gl {
                if k != j {
                    w /= tau[j] - tau[k];
                }
            }
            w
        })
        .collect();
    let interp = |values: &[CMat], t: f64| -> CMat {
        for (j, &tj) in tau.iter().enumerate() {
            if (t - tj).abs() < 1e-15 {
                return values[j].clone();
            }
        }
        let mut num = CMat::zeros(psi.dim(), psi.dim());
        let mut den = 0.0;
        for j in 0..n_gl {
            let c = bary[j] / (t - tau[j]);
            num += values[j].scale(c);
            den += c;
        }
        num.unscale(den)
    };
    let mut total = psi.mat.clone(); // order-0 term
    let mut prev_nodes: Vec<CMat> = vec![psi.mat.clone(); n_gl];
    let mut prev_final = psi.mat.clone();
    for _level in 1..=order {
        let eval_level = |t: f64, prev: &[CMat], prev_f: &CMat| -> CMat {
            let mut acc = CMat::zeros(psi.dim(), psi.dim());
            for k in 0..n_gl {
                let u = t * x01[k];
                let arg = t - u;
                let b_prev = if (arg - 0.5).abs() < 1e-15 {
                    prev_f.clone()
                } else {
                    interp(prev, arg)
                };
                acc += delta_pow(u, &(h.mat() * b_prev)).scale(t * w01[k]);
            }
            acc
        };
        let new_nodes: Vec<CMat> = tau
            .iter()
            .map(|&t| eval_level(t, &prev_nodes, &prev_final))
            .collect();
        let new_final = eval_level(0.5, &prev_nodes, &prev_final);
        total += &new_final;
        prev_nodes = new_nodes;
        prev_final = new_final;
    }
    Ok(StandardVector { mat: total })
}

/// Mixing stability of the weighted Lp norm: for `psi_eps = (1-eps) psi +
/// eps eta` with faithful `eta`, the norms converge to the unmixed value as
/// eps decreases. Reports the tail deviation; the deviations must decrease
/// from their peak onward (the signed deviation can cross zero at large
/// eps, so the early transient is not held to monotonicity) and the peak
/// must not sit in the tail.
pub fn lp_mixing_convergence_check(
    zeta: &StandardVector,
    psi: &DensityMatrix,
    eta: &DensityMatrix,
    p: f64,
    eps_seq: &[f64],
    allowed_tail: f64,
    seed: u64,
) -> CheckReport {
    let instance = format!("lp_mixing d={} p={}", psi.dim(), p);
    if !eta.is_faithful() {
        return CheckReport::from_sides("lp_mixing", f64::NAN, f64::NAN, 0.0, instance, seed);
    }
    let base = match am_lp_norm(zeta, psi, p) {
        Ok(r) => r.value,
        Err(_) => {
            return CheckReport::from_sides("lp_mixing", f64::NAN, f64::NAN, 0.0, instance, seed)
        }
    };
    let mut eps_sorted: Vec<f64> = eps_seq.to_vec();
    eps_sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut devs = Vec::with_capacity(eps_sorted.len());
    for &eps in &eps_sorted {
        let mixed =
            DensityMatrix::new(psi.mat().scale(1.0 - eps) + eta.mat().scale(eps)).unwrap();
        let v = am_lp_norm(zeta, &mixed, p).unwrap().value;
        devs.push((v - base).abs());
    }
    let argmax = devs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(k, _)| k)
        .unwrap_or(0);
    let mut trend_ok = devs[argmax] <= allowed_tail || argmax + 2 < devs.len();
    for w in devs[argmax..].windows(2) {
        if w[1] > 1.5 * w[0] + 1e-12 {
            trend_ok = false;
        }
    }
    let tail = *devs.last().unwrap_or(&0.0);
    let observed = if trend_ok { tail } else { f64::INFINITY };
    CheckReport::from_sides("lp_mixing", allowed_tail, observed, 0.0, instance, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_cmat, random_density, random_herm, rng};
    use proptest::prelude::*;

    #[test]
    fn functional_of_examples() {
        let zeta = StandardVector::new(HermitianMatrix::from_diagonal(&[1.0, 0.0]).into_mat())
            .unwrap();
        let f = functional_of(&zeta);
        assert!((f.mat()[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(f.mat()[(1, 1)].norm() < 1e-14);

        let mut r = rng(1);
        let z = StandardVector::new(random_cmat(&mut r, 3)).unwrap();
        let f = functional_of(&z);
        assert!((f.mat().trace().re - z.norm().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn natural_cone_round_trip() {
        let mut r = rng(2);
        let g = random_cmat(&mut r, 4);
        let omega = PsdMatrix::new(&g * g.adjoint()).unwrap();
        let v = natural_cone_rep(&omega);
        let back = functional_of(&v);
        assert!(hs_norm(&(back.mat() - omega.mat())) <= 1e-11 * hs_norm(omega.mat()));
        let w = natural_cone_rep(&PsdMatrix::from_diagonal(&[4.0 / 5.0, 1.0 / 5.0]).unwrap());
        assert!((w.mat[(0, 0)].re - 2.0 / 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn modular_conjugation_fixes_cone_and_is_involutive() {
        let mut r = rng(3);
        let g = random_cmat(&mut r, 3);
        let p = PsdMatrix::new(&g * g.adjoint()).unwrap();
        let v = StandardVector::new(p.mat().clone()).unwrap();
        assert!(hs_norm(&(modular_conjugation(&v).mat - &v.mat)) < 1e-12);

        let z = StandardVector::new(random_cmat(&mut r, 3)).unwrap();
        let jj = modular_conjugation(&modular_conjugation(&z));
        assert!(hs_norm(&(jj.mat - &z.mat)) < 1e-14);
        // antilinearity: J(i z) = -i J(z)
        let iz = StandardVector::new(z.mat.map(|x| x * C64::new(0.0, 1.0))).unwrap();
        let lhs = modular_conjugation(&iz);
        let rhs = modular_conjugation(&z).mat.map(|x| x * C64::new(0.0, -1.0));
        assert!(hs_norm(&(lhs.mat - rhs)) < 1e-14);
    }

    #[test]
    fn rel_modular_z0_projects_to_supports() {
        let eta = StandardVector::from_natural_cone(
            &PsdMatrix::from_diagonal(&[1.0, 0.0, 2.0]).unwrap(),
        );
        let psi = StandardVector::from_natural_cone(
            &PsdMatrix::from_diagonal(&[1.0, 1.0, 0.0]).unwrap(),
        );
        let mut r = rng(4);
        let zeta = StandardVector::new(random_cmat(&mut r, 3)).unwrap();
        let out = rel_modular_apply(&eta, &psi, C64::new(0.0, 0.0), &zeta).unwrap();
        let pe = functional_of(&eta).spectral().support_projection();
        let pp = functional_of(&psi).spectral().support_projection();
        let expect = pe * &zeta.mat * pp;
        assert!(hs_norm(&(out.mat - expect)) < 1e-12);
    }

    #[test]
    fn rel_modular_fixes_defining_vector() {
        let mut r = rng(5);
        let psi_state = random_density(&mut r, 3, 0.2);
        let psi = StandardVector::from_natural_cone(psi_state.psd());
        for z in [
            C64::new(0.3, 0.0),
            C64::new(0.0, 1.1),
            C64::new(-0.4, 0.7),
        ] {
            let out = rel_modular_apply(&psi, &psi, z, &psi).unwrap();
            assert!(hs_norm(&(out.mat - &psi.mat)) < 1e-10, "z={z}");
        }
    }

    #[test]
    fn s_operator_identity() {
        // J Delta^{1/2} (m psi) = m* psi for faithful psi
        let mut r = rng(6);
        let psi_state = random_density(&mut r, 3, 0.2);
        let psi = StandardVector::from_natural_cone(psi_state.psd());
        let m = random_cmat(&mut r, 3);
        let mpsi = StandardVector::new(&m * &psi.mat).unwrap();
        let half = rel_modular_apply(&psi, &psi, C64::new(0.5, 0.0), &mpsi).unwrap();
        let s = modular_conjugation(&half);
        let expect = m.adjoint() * &psi.mat;
        assert!(hs_norm(&(s.mat - expect)) < 1e-10);
    }

    #[test]
    fn cocycle_t0_and_commuting() {
        let eta = DensityMatrix::from_diagonal(&[0.7, 0.3]).unwrap();
        let psi = DensityMatrix::from_diagonal(&[0.2, 0.8]).unwrap();
        let u0 = connes_cocycle(&eta, &psi, 0.0).unwrap();
        assert!(hs_norm(&(u0.clone() - CMat::identity(2, 2))) < 1e-12);
        let t = 0.9;
        let u = connes_cocycle(&eta, &psi, t).unwrap();
        for i in 0..2 {
            let expect = C64::new(0.0, t * (eta.mat()[(i, i)].re / psi.mat()[(i, i)].re).ln())
                .exp();
            assert!((u[(i, i)] - expect).norm() < 1e-12);
            assert!((u[(i, i)].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cocycle_chain_rule() {
        // u(t+s) = u(t) Ad(omega_psi^{it})(u(s)) for faithful pairs
        let mut r = rng(7);
        let eta = random_density(&mut r, 3, 0.1);
        let psi = random_density(&mut r, 3, 0.1);
        let (t, s) = (0.37, -0.82);
        let u_ts = connes_cocycle(&eta, &psi, t + s).unwrap();
        let u_t = connes_cocycle(&eta, &psi, t).unwrap();
        let u_s = connes_cocycle(&eta, &psi, s).unwrap();
        let flow = psi.spectral().power(C64::new(0.0, t));
        let flow_inv = psi.spectral().power(C64::new(0.0, -t));
        let rhs = u_t * flow * u_s * flow_inv;
        assert!(hs_norm(&(u_ts - rhs)) < 1e-10);
    }

    #[test]
    fn cocycle_analytic_requires_equal_supports() {
        let eta = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let psi = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        assert!(connes_cocycle_analytic(&eta, &psi, C64::new(0.5, 0.0)).is_err());
        let eta = DensityMatrix::from_diagonal(&[0.6, 0.4]).unwrap();
        assert!(connes_cocycle_analytic(&eta, &psi, C64::new(0.5, 0.0)).is_ok());
    }

    #[test]
    fn lp_norm_p2_is_hs_for_every_reference() {
        let mut r = rng(8);
        let zeta = StandardVector::new(random_cmat(&mut r, 3)).unwrap();
        let faithful = random_density(&mut r, 3, 0.2);
        let singular = DensityMatrix::from_diagonal(&[0.5, 0.5, 0.0]).unwrap();
        for psi in [&faithful, &singular] {
            let v = am_lp_norm(&zeta, psi, 2.0).unwrap().value;
            assert_eq!(v, hs_norm(&zeta.mat));
        }
    }

    #[test]
    fn lp_norm_tracial_reduces_to_schatten() {
        let mut r = rng(9);
        let d = 3usize;
        let zeta = StandardVector::new(random_cmat(&mut r, d)).unwrap();
        let tracial = DensityMatrix::maximally_mixed(d);
        for p in [1.0, 1.5, 3.0, 4.0] {
            let v = am_lp_norm(&zeta, &tracial, p).unwrap().value;
            let gram = HermitianMatrix::new_unchecked(&zeta.mat * zeta.mat.adjoint());
            let schatten: f64 = eigh(&gram)
                .eigenvalues
                .iter()
                .map(|&l| l.max(0.0).powf(p / 2.0))
                .sum::<f64>()
                .powf(1.0 / p);
            let expect = (d as f64).powf(0.5 - 1.0 / p) * schatten;
            assert!((v - expect).abs() < 1e-10 * expect, "p={p}");
        }
    }

    #[test]
    fn lp_norm_infinity_is_isometric_on_algebra_vectors() {
        let mut r = rng(10);
        let psi_state = random_density(&mut r, 3, 0.2);
        let psi = StandardVector::from_natural_cone(psi_state.psd());
        let a = random_cmat(&mut r, 3);
        let apsi = StandardVector::new(&a * &psi.mat).unwrap();
        let v = am_lp_norm(&apsi, &psi_state, f64::INFINITY).unwrap().value;
        assert!((v - op_norm(&a)).abs() <= 1e-10 * op_norm(&a).max(1.0));
        // unitary a gives exactly 1
        let herm = crate::hermlin::HermitianMatrix::new((&a + a.adjoint()).scale(0.5)).unwrap();
        let u = eigh(&herm).apply_cfn(|l| C64::new(0.0, l).exp());
        let upsi = StandardVector::new(&u * &psi.mat).unwrap();
        let v = am_lp_norm(&upsi, &psi_state, f64::INFINITY).unwrap().value;
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lp_norm_rejects_bad_parameters() {
        let psi = DensityMatrix::from_diagonal(&[0.5, 0.5, 0.0]).unwrap();
        let zeta = StandardVector::new(CMat::identity(3, 3)).unwrap();
        assert!(am_lp_norm(&zeta, &psi, 0.5).is_err());
        assert!(am_lp_norm(&zeta, &psi, 3.0).is_err());
        assert!(am_lp_norm(&zeta, &psi, 1.5).is_ok());
    }

    #[test]
    fn lp_variational_oracle_matches_closed_form_d2() {
        let mut r = rng(11);
        for trial in 0..4 {
            let zeta = StandardVector::new(random_cmat(&mut r, 2)).unwrap();
            let psi = random_density(&mut r, 2, 0.15);
            for p in [2.0, 3.0, 4.0] {
                let closed = am_lp_norm(&zeta, &psi, p).unwrap().value;
                let sampled =
                    am_lp_variational_oracle(&zeta, &psi, p, 4000, 100 + trial).unwrap();
                assert!(
                    sampled <= closed + 1e-9,
                    "oracle exceeded closed form: {sampled} vs {closed}"
                );
                assert!(
                    closed - sampled <= 1e-4 * closed.max(1.0),
                    "p={p} closed={closed} sampled={sampled}"
                );
            }
        }
    }

    #[test]
    fn lp_variational_oracle_of_reference_is_one() {
        let mut r = rng(12);
        let psi = random_density(&mut r, 2, 0.2);
        let v = StandardVector::from_natural_cone(psi.psd());
        for p in [2.0, 3.0, 5.0] {
            let val = am_lp_variational_oracle(&v, &psi, p, 3000, 7).unwrap();
            assert!((val - 1.0).abs() < 1e-6, "p={p} val={val}");
        }
    }

    #[test]
    fn perturbed_vector_examples() {
        let mut r = rng(13);
        let psi_state = random_density(&mut r, 3, 0.2);
        let psi = StandardVector::from_natural_cone(psi_state.psd());
        let zero = HermitianMatrix::zeros(3);
        let same = perturbed_vector(&psi, &zero).unwrap();
        assert!(hs_norm(&(same.mat - &psi.mat)) < 1e-10);

        // commuting case: psi diagonal, h diagonal
        let psi_d = StandardVector::from_natural_cone(
            &PsdMatrix::from_diagonal(&[0.7, 0.3]).unwrap(),
        );
        let h = HermitianMatrix::from_diagonal(&[0.5, -0.2]);
        let out = perturbed_vector(&psi_d, &h).unwrap();
        let expect = expm_herm(&HermitianMatrix::from_diagonal(&[
            0.7f64.sqrt().ln() + 0.25,
            0.3f64.sqrt().ln() - 0.1,
        ]));
        assert!(hs_norm(&(out.mat - expect.mat())) < 1e-12);

        // Golden-Thompson style bound
        let h = random_herm(&mut r, 3);
        let pv = perturbed_vector(&psi, &h).unwrap();
        let eh2 = expm_herm(&HermitianMatrix::new(h.mat().scale(0.5)).unwrap());
        let bound = hs_norm(&(eh2.mat() * &psi.mat));
        assert!(pv.norm() <= bound + 1e-10);
    }

    #[test]
    fn perturbed_vector_rejects_singular() {
        let psi = StandardVector::from_natural_cone(
            &PsdMatrix::from_diagonal(&[1.0, 0.0]).unwrap(),
        );
        assert!(perturbed_vector(&psi, &HermitianMatrix::zeros(2)).is_err());
    }

    #[test]
    fn series_oracle_trivial_orders() {
        let mut r = rng(14);
        let psi_state = random_density(&mut r, 2, 0.3);
        let psi = StandardVector::from_natural_cone(psi_state.psd());
        let h = random_herm(&mut r, 2);
        let zero_order = perturbation_series_oracle(&psi, &h, 0).unwrap();
        assert!(hs_norm(&(zero_order.mat - &psi.mat)) < 1e-14);
        let no_pert = perturbation_series_oracle(&psi, &HermitianMatrix::zeros(2), 15).unwrap();
        assert!(hs_norm(&(no_pert.mat - &psi.mat)) < 1e-13);
    }

    #[test]
    fn series_oracle_matches_closed_form() {
        let mut r = rng(15);
        for _ in 0..3 {
            let psi_state = random_density(&mut r, 2, 0.3);
            let psi = StandardVector::from_natural_cone(psi_state.psd());
            let mut h = random_herm(&mut r, 2);
            let n = op_norm(h.mat());
            if n > 1.0 {
                h = HermitianMatrix::new(h.mat().unscale(n)).unwrap();
            }
            let series = perturbation_series_oracle(&psi, &h, 12).unwrap();
            let closed = perturbed_vector(&psi, &h).unwrap();
            let dev = hs_norm(&(series.mat - closed.mat));
            assert!(dev <= 1e-8, "dev={dev:e}");
        }
    }

    #[test]
    fn mixing_check_examples() {
        let mut r = rng(16);
        let eta = random_density(&mut r, 3, 0.3);
        let zeta = StandardVector::new(random_cmat(&mut r, 3)).unwrap();
        // p = 2: zero deviation for every eps
        let psi = random_density(&mut r, 3, 0.0);
        let rep = lp_mixing_convergence_check(
            &zeta,
            &psi,
            &eta,
            2.0,
            &[0.1, 0.01, 1e-4],
            1e-12,
            0,
        );
        assert!(rep.pass && rep.rhs == 0.0);
        // singular psi, p = 1.5: the tail shrinks like eps^{2/p-1} = eps^{1/3},
        // so the sequence has to run to eps ~ 1e-12 to push it below 1e-4
        let psi_sing = DensityMatrix::from_diagonal(&[0.6, 0.4, 0.0]).unwrap();
        let eps: Vec<f64> = (1..=12).map(|k| 10f64.powi(-k)).collect();
        let rep = lp_mixing_convergence_check(&zeta, &psi_sing, &eta, 1.5, &eps, 1e-4, 0);
        assert!(rep.pass, "tail deviation {:.3e}", rep.rhs);
    }

    #[test]
    fn mixing_monotone_bound_p_ge_2() {
        // ||zeta||_{p,psi_eps} <= (1-eps)^{1/p-1/2} ||zeta||_{p,psi}
        let mut r = rng(17);
        for _ in 0..10 {
            let psi = random_density(&mut r, 3, 0.1);
            let eta = random_density(&mut r, 3, 0.3);
            let zeta = StandardVector::new(random_cmat(&mut r, 3)).unwrap();
            for p in [2.0, 2.5, 4.0] {
                for eps in [0.3, 0.05, 1e-3] {
                    let mixed = DensityMatrix::new(
                        psi.mat().scale(1.0 - eps) + eta.mat().scale(eps),
                    )
                    .unwrap();
                    let lhs = am_lp_norm(&zeta, &mixed, p).unwrap().value;
                    let rhs = (1.0 - eps).powf(1.0 / p - 0.5)
                        * am_lp_norm(&zeta, &psi, p).unwrap().value;
                    assert!(lhs <= rhs + 1e-9 * rhs.max(1.0), "p={p} eps={eps}");
                }
            }
        }
    }

    #[test]
    fn mixing_concavity_bound_p_le_2() {
        // For 1 <= p <= 2 the norm is concave in the reference state:
        // ||zeta||_{p,psi_eps} >= (1-eps)||zeta||_{p,psi} + eps||zeta||_{p,eta}.
        // The opposite direction fails already for commuting qubits
        // (zeta = I, psi = diag(.9,.1), eta = I/2, eps = 1/2, p = 1).
        let mut r = rng(18);
        for _ in 0..10 {
            let psi = random_density(&mut r, 3, 0.0);
            let eta = random_density(&mut r, 3, 0.2);
            let zeta = StandardVector::new(random_cmat(&mut r, 3)).unwrap();
            for p in [1.0, 1.3, 1.8, 2.0] {
                for eps in [0.4, 0.1, 1e-2] {
                    let mixed = DensityMatrix::new(
                        psi.mat().scale(1.0 - eps) + eta.mat().scale(eps),
                    )
                    .unwrap();
                    let lhs = am_lp_norm(&zeta, &mixed, p).unwrap().value;
                    let rhs = (1.0 - eps) * am_lp_norm(&zeta, &psi, p).unwrap().value
                        + eps * am_lp_norm(&zeta, &eta, p).unwrap().value;
                    assert!(lhs >= rhs - 1e-9 * rhs.max(1.0), "p={p} eps={eps}");
                }
            }
        }
    }

    #[test]
    fn mixing_printed_convexity_direction_has_counterexample() {
        let zeta = StandardVector::new(CMat::identity(2, 2)).unwrap();
        let psi = DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap();
        let eta = DensityMatrix::maximally_mixed(2);
        let eps = 0.5;
        let mixed =
            DensityMatrix::new(psi.mat().scale(1.0 - eps) + eta.mat().scale(eps)).unwrap();
        let lhs = am_lp_norm(&zeta, &mixed, 1.0).unwrap().value;
        let rhs = (1.0 - eps) * am_lp_norm(&zeta, &psi, 1.0).unwrap().value
            + eps * am_lp_norm(&zeta, &eta, 1.0).unwrap().value;
        assert!(lhs > rhs + 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn prop_lp_norm_is_degree_one_homogeneous(seed in 0u64..1000, scale in 0.1f64..5.0) {
            let mut r = rng(seed);
            let zeta = StandardVector::new(random_cmat(&mut r, 2)).unwrap();
            let psi = random_density(&mut r, 2, 0.2);
            let p = 1.0 + 3.0 * (seed as f64 % 7.0) / 7.0;
            let v1 = am_lp_norm(&zeta, &psi, p).unwrap().value;
            let scaled = StandardVector::new(zeta.mat.scale(scale)).unwrap();
            let v2 = am_lp_norm(&scaled, &psi, p).unwrap().value;
            prop_assert!((v2 - scale * v1).abs() <= 1e-9 * v2.max(1.0));
        }

        #[test]
        fn prop_modular_conjugation_involution(seed in 0u64..1000) {
            let mut r = rng(seed);
            let z = StandardVector::new(random_cmat(&mut r, 3)).unwrap();
            let jj = modular_conjugation(&modular_conjugation(&z));
            prop_assert!(hs_norm(&(jj.mat - &z.mat)) < 1e-13);
        }
    }
}
