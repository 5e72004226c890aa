//! Photon-number statistics of the light sources: vacuum, weak-coherent
//! (Poisson) and modified-coherent (squeezed coherent) states, plus the
//! calibration that pins a modified-coherent source to a target mean photon
//! number under the elimination constraint `alpha^2 = C * gamma * xi`.

use thiserror::Error;

/// Default truncation for protocol-level use; the per-pulse photon cutoff
/// applied downstream is stricter.
pub const DEFAULT_N_MAX: usize = 40;
/// Truncation used for moments and normalization checks.
pub const MOMENT_N_MAX: usize = 60;

#[derive(Debug, Error, PartialEq)]
pub enum SourceError {
    #[error("degenerate squeezing (xi = 0): use a Poisson distribution instead")]
    DegenerateSqueezing,
    #[error("tail mass {tail:.3e} too heavy for a reliable moment (limit {limit:.1e})")]
    TailTooHeavy { tail: f64, limit: f64 },
    #[error("mean photon number {target} not bracketed by xi in (0, {xi_max}]")]
    NoRoot { target: f64, xi_max: f64 },
    #[error("invalid source parameters: {0}")]
    InvalidSpec(String),
}

/// Which physical source a party uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Vacuum,
    WeakCoherent,
    ModifiedCoherent,
}

/// A source family plus the intensity it is driven at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKind,
    /// Mean photon number (mu or nu).
    pub mean_photon: f64,
    /// Elimination parameter C in alpha^2 = C * gamma * xi (modified-coherent only).
    pub elimination_c: Option<f64>,
}

impl SourceSpec {
    pub fn vacuum() -> Self {
        SourceSpec { kind: SourceKind::Vacuum, mean_photon: 0.0, elimination_c: None }
    }

    pub fn weak_coherent(mean_photon: f64) -> Self {
        SourceSpec { kind: SourceKind::WeakCoherent, mean_photon, elimination_c: None }
    }

    pub fn modified_coherent(mean_photon: f64, c: f64) -> Self {
        SourceSpec { kind: SourceKind::ModifiedCoherent, mean_photon, elimination_c: Some(c) }
    }

    pub fn validate(&self) -> Result<(), SourceError> {
        if !self.mean_photon.is_finite() || self.mean_photon < 0.0 {
            return Err(SourceError::InvalidSpec(format!(
                "mean photon number must be finite and >= 0, got {}",
                self.mean_photon
            )));
        }
        match self.kind {
            SourceKind::Vacuum => {
                if self.mean_photon != 0.0 {
                    return Err(SourceError::InvalidSpec(
                        "vacuum source must have mean photon number 0".into(),
                    ));
                }
            }
            SourceKind::ModifiedCoherent => match self.elimination_c {
                Some(c) if c > 0.0 && c.is_finite() => {}
                _ => {
                    return Err(SourceError::InvalidSpec(
                        "modified-coherent source needs elimination parameter C > 0".into(),
                    ))
                }
            },
            SourceKind::WeakCoherent => {}
        }
        Ok(())
    }

    /// Same family at a different intensity.
    pub fn with_mean(&self, mean_photon: f64) -> Self {
        let mut s = *self;
        s.mean_photon = mean_photon;
        // intensity zero is plain vacuum for every family
        if mean_photon == 0.0 {
            s.kind = SourceKind::Vacuum;
            s.elimination_c = None;
        }
        s
    }

    /// Photon-number distribution of this source, truncated at `n_max`.
    pub fn distribution(&self, n_max: usize) -> Result<PhotonDistribution, SourceError> {
        self.validate()?;
        match self.kind {
            SourceKind::Vacuum => Ok(PhotonDistribution::vacuum(n_max)),
            SourceKind::WeakCoherent => Ok(poisson_distribution(self.mean_photon, n_max)),
            SourceKind::ModifiedCoherent => {
                let params =
                    calibrate_mcs(self.mean_photon, self.elimination_c.expect("validated"))?;
                mcs_distribution(&params, n_max)
            }
        }
    }
}

/// Squeezed-coherent source parameters, all real and non-negative:
/// `gamma = cosh|zeta|`, `xi = sinh|zeta|`, `alpha` the coherent amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McsParams {
    pub alpha: f64,
    pub gamma: f64,
    pub xi: f64,
}

impl McsParams {
    /// Manual construction. The hyperbolic relation gamma^2 = 1 + xi^2 is
    /// checked loosely (1e-4) so that literature values rounded to six
    /// digits are accepted; calibrated outputs satisfy it to 1e-10.
    pub fn new(alpha: f64, gamma: f64, xi: f64) -> Result<Self, SourceError> {
        if !(alpha >= 0.0 && gamma >= 1.0 && xi >= 0.0) {
            return Err(SourceError::InvalidSpec(format!(
                "require alpha >= 0, gamma >= 1, xi >= 0 (got {alpha}, {gamma}, {xi})"
            )));
        }
        let defect = (gamma * gamma - 1.0 - xi * xi).abs();
        if defect > 1e-4 {
            return Err(SourceError::InvalidSpec(format!(
                "gamma^2 - 1 - xi^2 = {defect:.3e} violates the hyperbolic relation"
            )));
        }
        Ok(McsParams { alpha, gamma, xi })
    }

    /// Parameters on the elimination curve alpha^2 = c * gamma * xi with
    /// gamma derived exactly from xi.
    pub fn from_elimination(c: f64, xi: f64) -> Self {
        let gamma = (1.0 + xi * xi).sqrt();
        McsParams { alpha: (c * gamma * xi).sqrt(), gamma, xi }
    }

    /// Residual of the hyperbolic relation, zero for consistent parameters.
    pub fn hyperbolic_defect(&self) -> f64 {
        self.gamma * self.gamma - 1.0 - self.xi * self.xi
    }
}

/// Truncated photon-number distribution. `probs[n]` is the probability of
/// the n-photon state; whatever is not covered by the truncation sits in
/// `tail_mass`, so the total is one by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    probs: Vec<f64>,
    tail_mass: f64,
}

impl PhotonDistribution {
    fn from_probs(probs: Vec<f64>) -> Self {
        debug_assert!(!probs.is_empty());
        let sum: f64 = probs.iter().sum();
        let tail_mass = 1.0 - sum;
        debug_assert!(tail_mass >= -1e-12, "negative tail mass {tail_mass:.3e}");
        PhotonDistribution { probs, tail_mass }
    }

    pub fn vacuum(n_max: usize) -> Self {
        let mut probs = vec![0.0; n_max + 1];
        probs[0] = 1.0;
        PhotonDistribution { probs, tail_mass: 0.0 }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Restriction to photon numbers <= `cutoff`; the removed mass moves
    /// into the tail. Probabilities are kept as-is, not renormalized.
    pub fn truncated(&self, cutoff: usize) -> Self {
        if cutoff >= self.n_max() {
            return self.clone();
        }
        Self::from_probs(self.probs[..=cutoff].to_vec())
    }
}

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence
/// H_{n+1} = 2x H_n - 2n H_{n-1}. Total over the domain; large n at large x
/// overflows to infinity like any direct f64 evaluation would.
pub fn hermite(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * (k as f64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Hermite value in scaled form: returns (sign, ln|H_n(x)|), with sign 0
/// when the value is exactly zero. Rescales on the fly so n up to a few
/// hundred never overflows.
fn hermite_log(n: u32, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    const BIG: f64 = 1e150;
    let mut shift = 0.0;
    let mut prev = 1.0;
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * (k as f64) * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG || prev.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            shift += BIG.ln();
        }
    }
    if cur == 0.0 {
        (0.0, f64::NEG_INFINITY)
    } else {
        (cur.signum(), cur.abs().ln() + shift)
    }
}

/// Poisson photon-number distribution of a phase-randomized weak coherent
/// pulse, probs[n] = mu^n e^{-mu} / n! by stable forward recursion.
pub fn poisson_distribution(mu: f64, n_max: usize) -> PhotonDistribution {
    assert!(mu >= 0.0 && mu.is_finite(), "mean photon number must be >= 0");
    let mut probs = vec![0.0; n_max + 1];
    probs[0] = (-mu).exp();
    for n in 1..=n_max {
        probs[n] = probs[n - 1] * mu / n as f64;
    }
    PhotonDistribution::from_probs(probs)
}

/// Photon-number distribution of the modified coherent state
/// |Psi> = U(zeta)|alpha> with real non-negative parameters:
/// P_n = (1/(n! gamma)) (xi/2gamma)^n exp(xi alpha^2/gamma - alpha^2) H_n(x)^2,
/// x = alpha / sqrt(2 gamma xi). Evaluated in log space so factorial and
/// Hermite growth cancel without overflow well past n = 60.
pub fn mcs_distribution(
    params: &McsParams,
    n_max: usize,
) -> Result<PhotonDistribution, SourceError> {
    let McsParams { alpha, gamma, xi } = *params;
    if xi <= 0.0 {
        return Err(SourceError::DegenerateSqueezing);
    }
    let a2 = alpha * alpha;
    let x = alpha / (2.0 * gamma * xi).sqrt();
    let log_ratio = (xi / (2.0 * gamma)).ln();
    let base = xi * a2 / gamma - a2 - gamma.ln();
    let mut probs = vec![0.0; n_max + 1];
    let mut ln_fact = 0.0;
    for (n, p) in probs.iter_mut().enumerate() {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let (sign, ln_h) = hermite_log(n as u32, x);
        if sign == 0.0 {
            continue;
        }
        *p = (base - ln_fact + n as f64 * log_ratio + 2.0 * ln_h).exp();
    }
    Ok(PhotonDistribution::from_probs(probs))
}

/// Loose enough to admit distributions built from literature parameters
/// rounded to six digits (their normalization defect lands in the tail).
const TAIL_LIMIT: f64 = 1e-5;

/// First moment sum(n * probs[n]); refuses distributions whose tail is too
/// heavy for the moment to be trustworthy.
pub fn mean_photon_number(dist: &PhotonDistribution) -> Result<f64, SourceError> {
    let tail = dist.tail_mass();
    if tail >= TAIL_LIMIT {
        return Err(SourceError::TailTooHeavy { tail, limit: TAIL_LIMIT });
    }
    Ok(dist.probs().iter().enumerate().map(|(n, p)| n as f64 * p).sum())
}

/// Distribution with the truncation extended until the tail drops below
/// `tail_target` (or `n_cap` is reached).
pub(crate) fn mcs_distribution_adaptive(
    params: &McsParams,
    tail_target: f64,
    n_cap: usize,
) -> Result<PhotonDistribution, SourceError> {
    let mut n_max = MOMENT_N_MAX;
    loop {
        let dist = mcs_distribution(params, n_max)?;
        if dist.tail_mass() < tail_target || n_max >= n_cap {
            return Ok(dist);
        }
        n_max += 40;
    }
}

const XI_MAX: f64 = 4.0;
const XI_TOL: f64 = 1e-12;

/// Solve for the squeezing that gives `target_mu` on the elimination curve
/// alpha^2 = c * gamma * xi, by bisection over xi in (0, 4]. The map
/// xi -> mean photon number is monotone on the range of interest
/// (target_mu <= 2).
pub fn calibrate_mcs(target_mu: f64, c: f64) -> Result<McsParams, SourceError> {
    if !(target_mu > 0.0 && target_mu <= 2.0) {
        return Err(SourceError::InvalidSpec(format!(
            "calibration target mean photon number must be in (0, 2], got {target_mu}"
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(SourceError::InvalidSpec(format!(
            "elimination parameter must be > 0, got {c}"
        )));
    }
    let mean_at = |xi: f64| -> Result<f64, SourceError> {
        let params = McsParams::from_elimination(c, xi);
        mean_photon_number(&mcs_distribution_adaptive(&params, 1e-10, 400)?)
    };
    let mut lo = 1e-9;
    // The upper end needs no evaluation: the mean is at least xi^2 = 16
    // there, beyond any admissible target, and the map is monotone.
    let mut hi = XI_MAX;
    if mean_at(lo)? > target_mu {
        return Err(SourceError::NoRoot { target: target_mu, xi_max: XI_MAX });
    }
    while hi - lo > XI_TOL {
        let mid = 0.5 * (lo + hi);
        if mean_at(mid)? < target_mu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(McsParams::from_elimination(c, 0.5 * (lo + hi)))
}
