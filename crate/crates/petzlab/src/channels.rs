//! Quantum channels in both pictures, Petz and rotated Petz recovery maps,
//! the weight densities with their quadrature, the integrated recovery
//! channel, and the contraction/vector-family objects behind the main bound.
//!
//! Conventions: a channel has Kraus operators of shape d_out x d_in; the
//! Schrodinger action sends states on the input algebra A to states on the
//! output algebra B, the Heisenberg dual maps B back to A and is unital.

use crate::gl;
use crate::hermlin::{
    eigh, ensure_same_dim, hs_norm, CMat, DensityMatrix, HermitianMatrix, MatrixError, Result,
    SpectralDecomposition, C64,
};
use crate::standard_form::StandardVector;
use serde::{Deserialize, Serialize};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus: Vec<CMat>,
    d_in: usize,
    d_out: usize,
}

const TP_TOL: f64 = 1e-10;

impl KrausChannel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(MatrixError::Invalid("channel needs at least one Kraus operator".into()));
        }
        let d_out = kraus[0].nrows();
        let d_in = kraus[0].ncols();
        let mut gram = CMat::zeros(d_in, d_in);
        for k in &kraus {
            if k.nrows() != d_out || k.ncols() != d_in {
                return Err(MatrixError::DimMismatch(k.nrows(), d_out));
            }
            gram += k.adjoint() * k;
        }
        let resid = hs_norm(&(gram - CMat::identity(d_in, d_in)));
        if resid > TP_TOL * (d_in as f64).sqrt() {
            return Err(MatrixError::Invalid(format!(
                "Kraus operators are not trace preserving: residual {resid:.3e}"
            )));
        }
        Ok(Self { kraus, d_in, d_out })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            kraus: vec![CMat::identity(d, d)],
            d_in: d,
            d_out: d,
        }
    }

    /// Random channel from a seeded Stinespring isometry: QR-orthonormalize
    /// a complex Gaussian (d_out * env_dim) x d_in matrix and slice the
    /// environment index into Kraus operators.
    pub fn random(d_in: usize, d_out: usize, env_dim: usize, seed: u64) -> Result<Self> {
        if d_out * env_dim < d_in {
            return Err(MatrixError::Invalid(format!(
                "Stinespring needs d_out*env_dim >= d_in, got {d_out}*{env_dim} < {d_in}"
            )));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let rows = d_out * env_dim;
        let g = CMat::from_fn(rows, d_in, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        // positive diagonal of R fixes the isometry deterministically
        for j in 0..d_in {
            let rjj = r[(j, j)];
            if rjj.norm() > 0.0 {
                let phase = rjj.conj() / C64::new(rjj.norm(), 0.0);
                for i in 0..rows {
                    q[(i, j)] *= phase;
                }
            }
        }
        let kraus = (0..env_dim)
            .map(|e| q.rows(e * d_out, d_out).clone_owned())
            .collect();
        Self::new(kraus)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// Schrodinger action on a (not necessarily normalized) operator.
    pub fn apply_schrodinger_mat(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        out
    }

    pub fn apply_schrodinger(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::new(self.apply_schrodinger_mat(rho.mat()))
            .expect("CPTP map preserves states")
    }

    /// Heisenberg (dual, unital) action.
    pub fn apply_heisenberg(&self, b: &CMat) -> CMat {
        let mut out = CMat::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            out += k.adjoint() * b * k;
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ChannelRecord::from(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: ChannelRecord = serde_json::from_str(text)
            .map_err(|e| MatrixError::Invalid(format!("channel parse error: {e}")))?;
        rec.try_into()
    }
}

/// Wire format: row-major complex entry pairs per Kraus operator.
#[derive(Serialize, Deserialize)]
struct ChannelRecord {
    d_in: usize,
    d_out: usize,
    kraus: Vec<Vec<[f64; 2]>>,
}

impl From<&KrausChannel> for ChannelRecord {
    fn from(ch: &KrausChannel) -> Self {
        let kraus = ch
            .kraus
            .iter()
            .map(|k| {
                let mut rows = Vec::with_capacity(ch.d_out * ch.d_in);
                for i in 0..ch.d_out {
                    for j in 0..ch.d_in {
                        rows.push([k[(i, j)].re, k[(i, j)].im]);
                    }
                }
                rows
            })
            .collect();
        Self {
            d_in: ch.d_in,
            d_out: ch.d_out,
            kraus,
        }
    }
}

impl TryFrom<ChannelRecord> for KrausChannel {
    type Error = MatrixError;
    fn try_from(rec: ChannelRecord) -> Result<Self> {
        let mut kraus = Vec::with_capacity(rec.kraus.len());
        for flat in &rec.kraus {
            if flat.len() != rec.d_in * rec.d_out {
                return Err(MatrixError::Invalid("kraus entry count mismatch".into()));
            }
            let m = CMat::from_fn(rec.d_out, rec.d_in, |i, j| {
                let [re, im] = flat[i * rec.d_in + j];
                C64::new(re, im)
            });
            kraus.push(m);
        }
        KrausChannel::new(kraus)
    }
}

/// Which of the two interpolation weight densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    Alpha,
    Beta,
}

/// The weight densities on the real line,
/// `alpha_theta(t) = sin(2 pi theta) / [(1-2 theta)(cosh(2 pi t) - cos(2 pi theta))]`,
/// `beta_theta(t)  = sin(2 pi theta) / [2 theta (cosh(2 pi t) + cos(2 pi theta))]`,
/// with `beta_0(t) = pi / (2 cosh^2(pi t))` as the theta -> 0 limit.
#[derive(Debug, Clone, Copy)]
pub struct WeightDensity {
    pub theta: f64,
    pub kind: DensityKind,
}

impl WeightDensity {
    pub fn beta(theta: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&theta) {
            return Err(MatrixError::Invalid(format!("beta density needs theta in [0, 1/2), got {theta}")));
        }
        Ok(Self { theta, kind: DensityKind::Beta })
    }

    pub fn alpha(theta: f64) -> Result<Self> {
        if !(0.0 < theta && theta < 0.5) {
            return Err(MatrixError::Invalid(format!("alpha density needs theta in (0, 1/2), got {theta}")));
        }
        Ok(Self { theta, kind: DensityKind::Alpha })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        match self.kind {
            DensityKind::Beta => {
                if self.theta == 0.0 {
                    std::f64::consts::PI / ((two_pi * t).cosh() + 1.0)
                } else {
                    (two_pi * self.theta).sin()
                        / (2.0 * self.theta * ((two_pi * t).cosh() + (two_pi * self.theta).cos()))
                }
            }
            DensityKind::Alpha => {
                (two_pi * self.theta).sin()
                    / ((1.0 - 2.0 * self.theta)
                        * ((two_pi * t).cosh() - (two_pi * self.theta).cos()))
            }
        }
    }
}

/// Nodes and weights approximating integrals against a weight density.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub t_max: f64,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Analytic bound on the mass beyond +-t_max.
    pub fn tail_bound(&self) -> f64 {
        2.0 * (-2.0 * std::f64::consts::PI * self.t_max).exp()
    }

    /// Degenerate single-node rule (the theta -> 1/2 delta limit of beta).
    pub fn point_mass() -> Self {
        Self {
            nodes: vec![0.0],
            weights: vec![1.0],
            t_max: 0.0,
        }
    }
}

/// Composite Gauss-Legendre quadrature for a weight density on
/// `[-t_max, t_max]`, with `n_nodes` per panel.
///
/// The density has poles at `+- i w` (w = 1/2 - theta for beta, w = theta
/// for alpha), so a single rule on the whole interval converges slowly once
/// theta leaves the middle of its range. Geometric panels `[0, w], [w, 2w],
/// [2w, 4w], ...`, mirrored to the negative axis, keep the panel width
/// comparable to the distance from the poles and restore spectral accuracy
/// uniformly in theta.
fn density_quadrature(density: WeightDensity, n_nodes: usize, t_max: f64) -> Result<QuadratureRule> {
    if n_nodes < 8 {
        return Err(MatrixError::Invalid("need at least 8 quadrature nodes".into()));
    }
    if t_max <= 0.0 {
        return Err(MatrixError::Invalid("t_max must be positive".into()));
    }
    let w_pole = match density.kind {
        DensityKind::Beta => 0.5 - density.theta,
        DensityKind::Alpha => density.theta,
    }
    .min(0.5);
    let mut bounds = vec![0.0];
    let mut b = w_pole.min(t_max);
    loop {
        bounds.push(b);
        if b >= t_max {
            break;
        }
        b = (2.0 * b).min(t_max);
    }
    let mut pos_nodes = Vec::new();
    let mut pos_weights = Vec::new();
    for panel in bounds.windows(2) {
        let (ts, ws) = gl::gauss_legendre_on(n_nodes, panel[0], panel[1]);
        for (&t, &w) in ts.iter().zip(&ws) {
            pos_nodes.push(t);
            pos_weights.push(w * density.eval(t));
        }
    }
    let mut nodes: Vec<f64> = pos_nodes.iter().rev().map(|&t| -t).collect();
    let mut weights: Vec<f64> = pos_weights.iter().rev().copied().collect();
    nodes.extend(&pos_nodes);
    weights.extend(&pos_weights);
    Ok(QuadratureRule { nodes, weights, t_max })
}

/// Quadrature for the beta density; theta in [0, 1/2).
pub fn beta_quadrature(theta: f64, n_nodes: usize, t_max: f64) -> Result<QuadratureRule> {
    density_quadrature(WeightDensity::beta(theta)?, n_nodes, t_max)
}

/// Quadrature for the alpha density; theta in (0, 1/2).
pub fn alpha_quadrature(theta: f64, n_nodes: usize, t_max: f64) -> Result<QuadratureRule> {
    density_quadrature(WeightDensity::alpha(theta)?, n_nodes, t_max)
}

/// Linear map between matrix spaces stored as an explicit
/// (d_out^2 x d_in^2) matrix acting on column-stacked operators.
#[derive(Debug, Clone)]
pub struct SuperOp {
    pub mat: CMat,
    pub d_in: usize,
    pub d_out: usize,
}

pub fn vec_mat(x: &CMat) -> CMat {
    let d2 = x.nrows() * x.ncols();
    CMat::from_column_slice(d2, 1, x.as_slice())
}

pub fn unvec(v: &CMat, rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v.as_slice())
}

impl SuperOp {
    /// The map `X -> A X B` (A: d_out x d_in, B: d_in x d_out).
    pub fn from_left_right(a: &CMat, b: &CMat) -> Self {
        let d_in = a.ncols();
        let d_out = a.nrows();
        Self {
            mat: b.transpose().kronecker(a),
            d_in,
            d_out,
        }
    }

    pub fn zeros(d_in: usize, d_out: usize) -> Self {
        Self {
            mat: CMat::zeros(d_out * d_out, d_in * d_in),
            d_in,
            d_out,
        }
    }

    /// Schrodinger action of a Kraus channel as an explicit matrix.
    pub fn from_kraus_schrodinger(ch: &KrausChannel) -> Self {
        let mut out = Self::zeros(ch.d_in(), ch.d_out());
        for k in ch.kraus() {
            out.mat += SuperOp::from_left_right(k, &k.adjoint()).mat;
        }
        out
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        let v = &self.mat * vec_mat(x);
        unvec(&v, self.d_out, self.d_out)
    }

    pub fn compose(&self, inner: &SuperOp) -> SuperOp {
        SuperOp {
            mat: &self.mat * &inner.mat,
            d_in: inner.d_in,
            d_out: self.d_out,
        }
    }

    /// Choi matrix: blocks `S(E_ij)` arranged on the (i, j) index.
    pub fn choi(&self) -> CMat {
        let (di, do_) = (self.d_in, self.d_out);
        let mut choi = CMat::zeros(di * do_, di * do_);
        for i in 0..di {
            for j in 0..di {
                let mut e = CMat::zeros(di, di);
                e[(i, j)] = C64::new(1.0, 0.0);
                let block = self.apply(&e);
                for k in 0..do_ {
                    for l in 0..do_ {
                        choi[(i * do_ + k, j * do_ + l)] = block[(k, l)];
                    }
                }
            }
        }
        choi
    }

    pub fn choi_min_eig(&self) -> f64 {
        let h = HermitianMatrix::new_unchecked(self.choi());
        eigh(&h).eigenvalues.first().copied().unwrap_or(0.0)
    }
}

/// Reference state data shared by the Petz-map constructions.
struct PetzContext {
    spec_a: SpectralDecomposition,
    spec_b: SpectralDecomposition,
}

fn petz_context(channel: &KrausChannel, sigma_a: &DensityMatrix) -> Result<PetzContext> {
    if sigma_a.dim() != channel.d_in() {
        return Err(MatrixError::DimMismatch(sigma_a.dim(), channel.d_in()));
    }
    if !sigma_a.is_faithful() {
        return Err(MatrixError::Singular);
    }
    let sigma_b = channel.apply_schrodinger(sigma_a);
    if !sigma_b.is_faithful() {
        return Err(MatrixError::Singular);
    }
    Ok(PetzContext {
        spec_a: sigma_a.spectral(),
        spec_b: sigma_b.spectral(),
    })
}

/// Rotated Petz map at parameter t, Schrodinger picture (states on the
/// channel output back to states on its input):
/// `rho -> sigma_A^{1/2-it} T(sigma_B^{-1/2+it} rho sigma_B^{-1/2-it}) sigma_A^{1/2+it}`.
pub fn rotated_petz(channel: &KrausChannel, sigma_a: &DensityMatrix, t: f64) -> Result<SuperOp> {
    let ctx = petz_context(channel, sigma_a)?;
    rotated_petz_with(channel, &ctx, t)
}

fn rotated_petz_with(channel: &KrausChannel, ctx: &PetzContext, t: f64) -> Result<SuperOp> {
    let pre = SuperOp::from_left_right(
        &ctx.spec_b.power(C64::new(-0.5, t)),
        &ctx.spec_b.power(C64::new(-0.5, -t)),
    );
    // Heisenberg action of the channel as a superoperator
    let mut heis = SuperOp::zeros(channel.d_out(), channel.d_in());
    for k in channel.kraus() {
        heis.mat += SuperOp::from_left_right(&k.adjoint(), k).mat;
    }
    let post = SuperOp::from_left_right(
        &ctx.spec_a.power(C64::new(0.5, -t)),
        &ctx.spec_a.power(C64::new(0.5, t)),
    );
    Ok(post.compose(&heis.compose(&pre)))
}

/// Heisenberg form of the rotated Petz map applied to one observable:
/// `a -> sigma_B^{-1/2-it} T~(sigma_A^{1/2+it} a sigma_A^{1/2-it}) sigma_B^{-1/2+it}`.
pub fn rotated_petz_heisenberg(
    channel: &KrausChannel,
    sigma_a: &DensityMatrix,
    t: f64,
    a: &CMat,
) -> Result<CMat> {
    let ctx = petz_context(channel, sigma_a)?;
    ensure_same_dim(a, sigma_a.mat())?;
    let inner = ctx.spec_a.power(C64::new(0.5, t)) * a * ctx.spec_a.power(C64::new(0.5, -t));
    let pushed = channel.apply_schrodinger_mat(&inner);
    Ok(ctx.spec_b.power(C64::new(-0.5, -t)) * pushed * ctx.spec_b.power(C64::new(-0.5, t)))
}

/// A recovery channel stored as a weighted mixture of rotated-Petz
/// superoperator evaluations.
#[derive(Debug)]
pub struct RecoveryChannel {
    pub components: Vec<(f64, SuperOp)>,
    pub d_in: usize,
    pub d_out: usize,
}

impl RecoveryChannel {
    pub fn apply_mat(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for (w, s) in &self.components {
            out += s.apply(x).scale(*w);
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let raw = self.apply_mat(rho.mat());
        // quadrature leaves a tiny trace defect; renormalize within tolerance
        let tr = raw.trace().re;
        if (tr - 1.0).abs() > 1e-6 {
            return Err(MatrixError::NotUnitTrace(tr));
        }
        let herm = (&raw + raw.adjoint()).scale(0.5);
        DensityMatrix::new(herm.unscale(tr))
    }

    pub fn total_superop(&self) -> SuperOp {
        let mut acc = SuperOp::zeros(self.d_in, self.d_out);
        for (w, s) in &self.components {
            acc.mat += s.mat.scale(*w);
        }
        acc
    }

    pub fn trace_preservation_residual(&self) -> f64 {
        let d = self.d_in;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut e = CMat::zeros(d, d);
                e[(i, j)] = C64::new(1.0, 0.0);
                let out = self.apply_mat(&e);
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((out.trace() - C64::new(expect, 0.0)).norm());
            }
        }
        worst
    }
}

/// The Petz map: the t = 0 rotated component alone.
pub fn petz_map(channel: &KrausChannel, sigma_a: &DensityMatrix) -> Result<RecoveryChannel> {
    let s = rotated_petz(channel, sigma_a, 0.0)?;
    Ok(RecoveryChannel {
        d_in: channel.d_out(),
        d_out: channel.d_in(),
        components: vec![(1.0, s)],
    })
}

/// The integrated recovery channel: the beta_0-weighted quadrature mixture
/// of rotated Petz maps.
pub fn integrated_recovery(
    channel: &KrausChannel,
    sigma_a: &DensityMatrix,
    rule: &QuadratureRule,
) -> Result<RecoveryChannel> {
    let ctx = petz_context(channel, sigma_a)?;
    let mut components = Vec::with_capacity(rule.nodes.len());
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        components.push((w, rotated_petz_with(channel, &ctx, t)?));
    }
    Ok(RecoveryChannel {
        d_in: channel.d_out(),
        d_out: channel.d_in(),
        components,
    })
}

/// Rotated-Petz evaluations without materializing superoperators; this is
/// the hot path when a recovery channel is applied to a single state.
pub struct PetzFamily<'a> {
    channel: &'a KrausChannel,
    spec_a: SpectralDecomposition,
    spec_b: SpectralDecomposition,
}

impl<'a> PetzFamily<'a> {
    pub fn new(channel: &'a KrausChannel, sigma_a: &DensityMatrix) -> Result<Self> {
        let ctx = petz_context(channel, sigma_a)?;
        Ok(Self {
            channel,
            spec_a: ctx.spec_a,
            spec_b: ctx.spec_b,
        })
    }

    /// `alpha^t` applied to one operator on the output side.
    pub fn apply_rotated(&self, t: f64, x: &CMat) -> CMat {
        let pre_l = self.spec_b.power(C64::new(-0.5, t));
        let pre_r = self.spec_b.power(C64::new(-0.5, -t));
        let mid = self.channel.apply_heisenberg(&(pre_l * x * pre_r));
        let post_l = self.spec_a.power(C64::new(0.5, -t));
        let post_r = self.spec_a.power(C64::new(0.5, t));
        post_l * mid * post_r
    }

    /// Quadrature mixture applied to one operator.
    pub fn integrated_apply(&self, rule: &QuadratureRule, x: &CMat) -> CMat {
        let d = self.channel.d_in();
        let mut acc = CMat::zeros(d, d);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            acc += self.apply_rotated(t, x).scale(w);
        }
        acc
    }

    /// Recovered density from the integrated channel, symmetrized and
    /// renormalized within the quadrature tolerance.
    pub fn recover(&self, rule: &QuadratureRule, rho_b: &DensityMatrix) -> Result<DensityMatrix> {
        let raw = self.integrated_apply(rule, rho_b.mat());
        let tr = raw.trace().re;
        if (tr - 1.0).abs() > 1e-6 {
            return Err(MatrixError::NotUnitTrace(tr));
        }
        let herm = (&raw + raw.adjoint()).scale(0.5);
        DensityMatrix::new(herm.unscale(tr))
    }
}

/// Generator of the pulled-back cocycle: `k = T(log rho_B - log sigma_B)`,
/// the derivative at t = 0 of the Heisenberg image of the Connes cocycle.
/// Satisfies `Tr(rho k) = S(rho_B | sigma_B)` by channel duality.
pub fn cocycle_generator(
    channel: &KrausChannel,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<HermitianMatrix> {
    ensure_same_dim(rho.mat(), sigma.mat())?;
    if !rho.is_faithful() || !sigma.is_faithful() {
        return Err(MatrixError::Singular);
    }
    let rho_b = channel.apply_schrodinger(rho);
    let sigma_b = channel.apply_schrodinger(sigma);
    if !rho_b.is_faithful() || !sigma_b.is_faithful() {
        return Err(MatrixError::Singular);
    }
    let diff = rho_b.spectral().apply_fn(f64::ln) - sigma_b.spectral().apply_fn(f64::ln);
    HermitianMatrix::new(channel.apply_heisenberg(&diff))
}

/// The contraction `V_psi`: on vectors of the cyclic subspace,
/// `b xi_psi^B -> T(b) xi_psi^A`; zero on the orthogonal complement.
pub fn v_contraction(channel: &KrausChannel, psi: &DensityMatrix) -> Result<SuperOp> {
    if psi.dim() != channel.d_in() {
        return Err(MatrixError::DimMismatch(psi.dim(), channel.d_in()));
    }
    let (da, db) = (channel.d_in(), channel.d_out());
    let rho_b = channel.apply_schrodinger(psi);
    let xi_a = crate::hermlin::sqrtm_psd(psi.psd());
    let xi_b = crate::hermlin::sqrtm_psd(rho_b.psd());
    let n = db * db;
    let mut domain = CMat::zeros(n, n);
    let mut image = CMat::zeros(da * da, n);
    let mut col = 0usize;
    for i in 0..db {
        for j in 0..db {
            let mut e = CMat::zeros(db, db);
            e[(i, j)] = C64::new(1.0, 0.0);
            domain.set_column(col, &vec_mat(&(&e * xi_b.mat())).column(0));
            image.set_column(
                col,
                &vec_mat(&(channel.apply_heisenberg(&e) * xi_a.mat())).column(0),
            );
            col += 1;
        }
    }
    // minimal-norm extension: V = image * pinv(domain)
    let gram = HermitianMatrix::new_unchecked(domain.adjoint() * &domain);
    let spec = eigh(&gram);
    let thresh = spec.support_threshold().max(1e-13 * spec.lambda_max().abs());
    let pinv_gram = spec.apply_cfn(|l| {
        if l > thresh {
            C64::new(1.0 / l, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let v = image * pinv_gram * domain.adjoint();
    Ok(SuperOp {
        mat: v,
        d_in: db,
        d_out: da,
    })
}

/// The vector family `Gamma_psi(z) = Delta^z_{eta_A, psi_A} V_psi
/// Delta^{-z}_{eta_B, psi_B} xi_psi^B` on the closed strip Re z in [0, 1/2],
/// with the contraction and spectral data precomputed once.
pub struct GammaFamily {
    v: SuperOp,
    spec_psi_a: SpectralDecomposition,
    spec_eta_a: SpectralDecomposition,
    spec_psi_b: SpectralDecomposition,
    spec_eta_b: SpectralDecomposition,
    xi_b: CMat,
    d_a: usize,
}

impl GammaFamily {
    pub fn new(
        channel: &KrausChannel,
        psi: &DensityMatrix,
        eta: &DensityMatrix,
    ) -> Result<Self> {
        if !eta.is_faithful() {
            return Err(MatrixError::Singular);
        }
        ensure_same_dim(psi.mat(), eta.mat())?;
        let v = v_contraction(channel, psi)?;
        let rho_b = channel.apply_schrodinger(psi);
        let eta_b = channel.apply_schrodinger(eta);
        let xi_b = crate::hermlin::sqrtm_psd(rho_b.psd()).mat().clone();
        Ok(Self {
            v,
            spec_psi_a: psi.spectral(),
            spec_eta_a: eta.spectral(),
            spec_psi_b: rho_b.spectral(),
            spec_eta_b: eta_b.spectral(),
            xi_b,
            d_a: channel.d_in(),
        })
    }

    pub fn eval(&self, z: C64) -> Result<StandardVector> {
        if !(-1e-12..=0.5 + 1e-12).contains(&z.re) {
            return Err(MatrixError::Invalid(format!(
                "Gamma is defined on the closed strip Re z in [0, 1/2], got {}",
                z.re
            )));
        }
        let inner = self.spec_eta_b.power(-z) * &self.xi_b * self.spec_psi_b.power(z);
        let mid = unvec(&(&self.v.mat * vec_mat(&inner)), self.d_a, self.d_a);
        let outer = self.spec_eta_a.power(z) * mid * self.spec_psi_a.power(-z);
        StandardVector::new(outer)
    }
}

/// One-shot evaluation of the Gamma family.
pub fn gamma_vector(
    channel: &KrausChannel,
    psi: &DensityMatrix,
    eta: &DensityMatrix,
    z: C64,
) -> Result<StandardVector> {
    GammaFamily::new(channel, psi, eta)?.eval(z)
}
