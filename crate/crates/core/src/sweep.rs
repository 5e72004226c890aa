//! Experiment orchestration: distance sweeps, maximum-distance search,
//! decoy-intensity optimization, elimination-parameter scans and
//! finite-size (fluctuation) studies.

use rayon::prelude::*;
use thiserror::Error;

use crate::bsm::{
    exact_single_photon_stats_with_model, Basis, BsmError, ChannelDetector, ClickModel, YieldTable,
};
use crate::decoy::{
    apply_fluctuation, build_constraints, solve_bounds, DecoyConfig, DecoyError, LpBounds,
    LpStatus, ObservedGains, PairObservation,
};
use crate::keyrate::{key_rate, KeyRateError, KeyRateInputs};
use crate::sources::{PhotonDistribution, SourceError, SourceKind, SourceSpec};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid experiment configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Decoy(#[from] DecoyError),
    #[error(transparent)]
    Bsm(#[from] BsmError),
    #[error(transparent)]
    KeyRate(#[from] KeyRateError),
    #[error("decoy linear program reported {0:?}")]
    LpFailed(LpStatus),
    #[error("no positive key rate at zero distance")]
    NoPositiveRate,
}

/// How the distance axis maps onto per-arm channel loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceConvention {
    /// Distances are the total Alice-Bob separation with the relay at the
    /// midpoint: each arm spans half the distance.
    #[default]
    TotalMidpoint,
    /// Distances are each arm's length (relay loss quoted per arm).
    PerArm,
}

/// Which rate the searches optimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateMode {
    #[default]
    LpBounded,
    InfiniteDecoy,
}

/// Full sweep configuration; the defaults are the published simulation
/// setup (vacuum+decoy+signal at 0/0.1/0.5, 0.2 dB/km, dark count 6e-6,
/// unit detector efficiency, reconciliation efficiency 1.2).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source_kind: SourceKind,
    /// Elimination parameter for modified-coherent sources.
    pub elimination_c: Option<f64>,
    pub signal_mu: f64,
    pub decoy_nu: f64,
    pub loss_db_per_km: f64,
    pub dark: f64,
    pub det_eff: f64,
    pub f_ec: f64,
    pub distances_km: Vec<f64>,
    pub pulses_n: Option<u64>,
    pub k_sigma: f64,
    pub mode: RateMode,
    pub click_model: ClickModel,
    pub distance_convention: DistanceConvention,
    /// LP yield-variable cutoff.
    pub n_cut: usize,
    /// Per-pulse photon cutoff of the gain sums.
    pub cutoff: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            source_kind: SourceKind::WeakCoherent,
            elimination_c: None,
            signal_mu: 0.5,
            decoy_nu: 0.1,
            loss_db_per_km: 0.2,
            dark: 6e-6,
            det_eff: 1.0,
            f_ec: 1.2,
            distances_km: (0..=60).map(|k| 5.0 * k as f64).collect(),
            pulses_n: None,
            k_sigma: 5.0,
            mode: RateMode::LpBounded,
            click_model: ClickModel::Literal,
            distance_convention: DistanceConvention::TotalMidpoint,
            n_cut: DecoyConfig::DEFAULT_N_CUT,
            cutoff: crate::bsm::PROTOCOL_CUTOFF,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        if !(self.signal_mu > 0.0 && self.decoy_nu > 0.0 && self.decoy_nu < self.signal_mu) {
            return Err(SweepError::BadConfig(format!(
                "need 0 < decoy ({}) < signal ({})",
                self.decoy_nu, self.signal_mu
            )));
        }
        if self.loss_db_per_km < 0.0 {
            return Err(SweepError::BadConfig("loss coefficient must be >= 0".into()));
        }
        if !(self.det_eff > 0.0 && self.det_eff <= 1.0) {
            return Err(SweepError::BadConfig("detector efficiency must be in (0, 1]".into()));
        }
        if !(0.0..0.01).contains(&self.dark) {
            return Err(SweepError::BadConfig("dark count outside the model regime".into()));
        }
        if self.f_ec < 1.0 {
            return Err(SweepError::BadConfig("reconciliation efficiency must be >= 1".into()));
        }
        if self.distances_km.iter().any(|&d| d < 0.0 || !d.is_finite()) {
            return Err(SweepError::BadConfig("distances must be finite and >= 0".into()));
        }
        if self.source_kind == SourceKind::ModifiedCoherent && self.elimination_c.is_none() {
            return Err(SweepError::BadConfig(
                "modified-coherent runs need the elimination parameter".into(),
            ));
        }
        Ok(())
    }

    pub fn signal_spec(&self) -> SourceSpec {
        SourceSpec { kind: self.source_kind, mean_photon: self.signal_mu, elimination_c: self.elimination_c }
    }

    pub fn decoy_config(&self) -> Result<DecoyConfig, SweepError> {
        let mut cfg = DecoyConfig::new(
            vec![0.0, self.decoy_nu, self.signal_mu],
            self.signal_spec(),
        )?;
        cfg.n_cut = self.n_cut;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same experiment with a different source family.
    pub fn with_source(&self, kind: SourceKind, c: Option<f64>) -> Self {
        let mut cfg = self.clone();
        cfg.source_kind = kind;
        cfg.elimination_c = c;
        cfg
    }
}

/// Per-arm transmittance-times-efficiency for a distance on the sweep axis.
pub fn channel_from_distance(cfg: &ExperimentConfig, distance_km: f64) -> ChannelDetector {
    let arm_km = match cfg.distance_convention {
        DistanceConvention::TotalMidpoint => distance_km / 2.0,
        DistanceConvention::PerArm => distance_km,
    };
    let eta = cfg.det_eff * 10f64.powf(-cfg.loss_db_per_km * arm_km / 10.0);
    ChannelDetector { eta, dark: cfg.dark }
}

/// One evaluated sweep point. The LP-bounded fields are present only in
/// LP-bounded mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRatePoint {
    pub distance_km: f64,
    pub rate_lp: Option<f64>,
    pub rate_infinite: f64,
    pub y11_lower: Option<f64>,
    pub e11_upper: Option<f64>,
    pub q_z: f64,
    pub e_z: f64,
}

impl KeyRatePoint {
    /// The rate the configured mode optimizes.
    pub fn rate(&self, mode: RateMode) -> f64 {
        match mode {
            RateMode::LpBounded => self.rate_lp.expect("LP rate requested from LP-bounded run"),
            RateMode::InfiniteDecoy => self.rate_infinite,
        }
    }
}

/// Prepared sweep state: the intensity distributions are calibrated once
/// and shared by every point.
pub struct SweepContext {
    cfg: ExperimentConfig,
    decoy_cfg: DecoyConfig,
    dists_full: Vec<PhotonDistribution>,
    dists_cut: Vec<PhotonDistribution>,
}

impl SweepContext {
    pub fn new(cfg: ExperimentConfig) -> Result<Self, SweepError> {
        cfg.validate()?;
        let decoy_cfg = cfg.decoy_config()?;
        let dists_full = decoy_cfg.distributions()?;
        let dists_cut: Vec<_> = dists_full.iter().map(|d| d.truncated(cfg.cutoff)).collect();
        Ok(SweepContext { cfg, decoy_cfg, dists_full, dists_cut })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn signal_index(&self) -> usize {
        self.decoy_cfg.intensities.len() - 1
    }

    fn p1_signal(&self) -> f64 {
        self.dists_full[self.signal_index()].prob(1)
    }
}

/// Forward-model gain table for every intensity pair in both bases.
pub fn simulate_gains(
    decoy_cfg: &DecoyConfig,
    cd: &ChannelDetector,
    model: ClickModel,
    cutoff: usize,
) -> Result<ObservedGains, SweepError> {
    let dists: Vec<_> = decoy_cfg
        .distributions()?
        .into_iter()
        .map(|d| d.truncated(cutoff))
        .collect();
    Ok(gains_from_tables(&decoy_cfg.intensities, &dists, cd, model, cutoff)?)
}

fn gains_from_tables(
    intensities: &[f64],
    dists_cut: &[PhotonDistribution],
    cd: &ChannelDetector,
    model: ClickModel,
    cutoff: usize,
) -> Result<ObservedGains, BsmError> {
    let z_table = YieldTable::z_basis(cd, model, cutoff);
    let x_table = YieldTable::x_basis(cd, model, cutoff)?;
    let mut obs = ObservedGains::new(intensities.to_vec());
    for (i, da) in dists_cut.iter().enumerate() {
        for (j, db) in dists_cut.iter().enumerate() {
            let (qz, eqz) = z_table.intensity_gain(da, db);
            let (qx, eqx) = x_table.intensity_gain(da, db);
            obs.set(i, j, Basis::Z, PairObservation::point(qz, eqz));
            obs.set(i, j, Basis::X, PairObservation::point(qx, eqx));
        }
    }
    Ok(obs)
}

/// Evaluate one distance: gains, bounds (in LP-bounded mode) and rates.
pub fn simulate_point(ctx: &SweepContext, distance_km: f64) -> Result<KeyRatePoint, SweepError> {
    let cfg = &ctx.cfg;
    let cd = channel_from_distance(cfg, distance_km);
    let sig = ctx.signal_index();

    let z_table = YieldTable::z_basis(&cd, cfg.click_model, cfg.cutoff);
    let (q_z, eq_z) = z_table.intensity_gain(&ctx.dists_cut[sig], &ctx.dists_cut[sig]);
    if q_z <= 0.0 {
        return Err(SweepError::Bsm(BsmError::ZeroGain));
    }
    let e_z = eq_z / q_z;
    let p1 = ctx.p1_signal();

    let exact = exact_single_photon_stats_with_model(&cd, cfg.click_model);
    let rate_infinite = key_rate(&KeyRateInputs {
        p1_a: p1,
        p1_b: p1,
        y11_z: exact.y11_z.min(1.0),
        e11_x: exact.e11_x,
        q_z: q_z.min(1.0),
        e_z,
        f_ec: cfg.f_ec,
    })?;

    let mut point = KeyRatePoint {
        distance_km,
        rate_lp: None,
        rate_infinite,
        y11_lower: None,
        e11_upper: None,
        q_z,
        e_z,
    };
    if cfg.mode == RateMode::LpBounded {
        let bounds = lp_bounds_at(ctx, &cd)?;
        let rate_lp = key_rate(&KeyRateInputs {
            p1_a: p1,
            p1_b: p1,
            y11_z: bounds.y11_lower,
            e11_x: bounds.e11_upper,
            q_z: q_z.min(1.0),
            e_z,
            f_ec: cfg.f_ec,
        })?;
        point.rate_lp = Some(rate_lp);
        point.y11_lower = Some(bounds.y11_lower);
        point.e11_upper = Some(bounds.e11_upper);
    }
    Ok(point)
}

fn lp_bounds_at(ctx: &SweepContext, cd: &ChannelDetector) -> Result<LpBounds, SweepError> {
    let cfg = &ctx.cfg;
    let mut obs = gains_from_tables(
        &ctx.decoy_cfg.intensities,
        &ctx.dists_cut,
        cd,
        cfg.click_model,
        cfg.cutoff,
    )?;
    if let Some(n) = cfg.pulses_n {
        obs = apply_fluctuation(&obs, n, cfg.k_sigma);
    }
    let z_system = build_constraints(&ctx.decoy_cfg, &obs, Basis::Z)?;
    let x_system = build_constraints(&ctx.decoy_cfg, &obs, Basis::X)?;
    let bounds = solve_bounds(&z_system, &x_system);
    if bounds.status != LpStatus::Optimal {
        return Err(SweepError::LpFailed(bounds.status));
    }
    Ok(bounds)
}

/// Evaluate the configured distance grid; points are independent and run in
/// parallel, output order follows the grid.
pub fn sweep_distances(ctx: &SweepContext) -> Result<Vec<KeyRatePoint>, SweepError> {
    ctx.cfg
        .distances_km
        .par_iter()
        .map(|&d| simulate_point(ctx, d))
        .collect()
}

const COARSE_STEP_KM: f64 = 5.0;
const BISECT_TOL_KM: f64 = 0.1;
const MAX_SEARCH_KM: f64 = 500.0;

/// Largest distance with positive rate: coarse 5 km ascent, then bisection
/// to 0.1 km.
pub fn find_max_distance(cfg: &ExperimentConfig) -> Result<f64, SweepError> {
    let ctx = SweepContext::new(cfg.clone())?;
    let rate_at = |km: f64| -> Result<f64, SweepError> {
        Ok(simulate_point(&ctx, km)?.rate(cfg.mode))
    };
    if rate_at(0.0)? <= 0.0 {
        return Err(SweepError::NoPositiveRate);
    }
    // coarse scan in parallel batches until the rate dies
    let mut lo = 0.0;
    let mut hi = None;
    let mut base = 0.0;
    'scan: while base < MAX_SEARCH_KM {
        let batch: Vec<f64> = (1..=16).map(|k| base + COARSE_STEP_KM * k as f64).collect();
        let rates: Vec<(f64, f64)> = batch
            .par_iter()
            .map(|&km| simulate_point(&ctx, km).map(|p| (km, p.rate(cfg.mode))))
            .collect::<Result<_, _>>()?;
        for (km, r) in rates {
            if r > 0.0 {
                lo = km;
            } else {
                hi = Some(km);
                break 'scan;
            }
        }
        base += COARSE_STEP_KM * 16.0;
    }
    let mut hi = hi.ok_or_else(|| {
        SweepError::BadConfig(format!("rate still positive at {MAX_SEARCH_KM} km"))
    })?;
    while hi - lo > BISECT_TOL_KM {
        let mid = 0.5 * (lo + hi);
        if rate_at(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Decoy intensities scanned by [`optimize_decoy`]: 0.005 to 0.2 in steps
/// of 0.005.
pub fn decoy_grid() -> Vec<f64> {
    (1..=40).map(|k| 0.005 * k as f64).collect()
}

/// Grid-search the decoy intensity maximizing the LP-bounded rate at one
/// distance; ties break toward the smaller intensity.
pub fn optimize_decoy(cfg: &ExperimentConfig, distance_km: f64) -> Result<f64, SweepError> {
    let rates: Vec<(f64, f64)> = decoy_grid()
        .par_iter()
        .map(|&nu| {
            let mut c = cfg.clone();
            c.decoy_nu = nu;
            c.mode = RateMode::LpBounded;
            let ctx = SweepContext::new(c)?;
            Ok((nu, simulate_point(&ctx, distance_km)?.rate(RateMode::LpBounded)))
        })
        .collect::<Result<_, SweepError>>()?;
    let mut best = rates[0];
    for &(nu, r) in &rates[1..] {
        if r > best.1 {
            best = (nu, r);
        }
    }
    Ok(best.0)
}

/// One point of the elimination-parameter scan.
#[derive(Debug)]
pub struct EliminationPoint {
    pub c: f64,
    /// Max-distance increment of the calibrated modified source over the
    /// weak-coherent baseline, or the per-point failure.
    pub increment_km: Result<f64, SweepError>,
}

/// Scan the elimination parameter: for each C, calibrate the modified
/// source at the signal intensity, find its maximum distance and subtract
/// the weak-coherent baseline (computed once with the same configuration).
pub fn sweep_elimination(cfg: &ExperimentConfig, c_grid: &[f64]) -> Result<Vec<EliminationPoint>, SweepError> {
    let wcs_cfg = cfg.with_source(SourceKind::WeakCoherent, None);
    let baseline = find_max_distance(&wcs_cfg)?;
    Ok(c_grid
        .iter()
        .map(|&c| {
            let mcs_cfg = cfg.with_source(SourceKind::ModifiedCoherent, Some(c));
            EliminationPoint {
                c,
                increment_km: find_max_distance(&mcs_cfg).map(|d| d - baseline),
            }
        })
        .collect())
}

/// Rate-vs-distance curves for a family of pulse counts (`None` = the
/// asymptotic, fluctuation-free case).
pub fn finite_size_sweep(
    cfg: &ExperimentConfig,
    n_grid: &[Option<u64>],
) -> Result<Vec<(Option<u64>, Vec<KeyRatePoint>)>, SweepError> {
    n_grid
        .iter()
        .map(|&n| {
            let mut c = cfg.clone();
            c.pulses_n = n;
            c.mode = RateMode::LpBounded;
            let ctx = SweepContext::new(c)?;
            Ok((n, sweep_distances(&ctx)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_examples() {
        let cfg = ExperimentConfig::default();
        assert_eq!(channel_from_distance(&cfg, 0.0).eta, 1.0);
        assert!((channel_from_distance(&cfg, 100.0).eta - 0.1).abs() < 1e-12);
        assert!((channel_from_distance(&cfg, 147.0).eta - 0.033884).abs() < 1e-6);
        let mut per_arm = cfg.clone();
        per_arm.distance_convention = DistanceConvention::PerArm;
        assert!((channel_from_distance(&per_arm, 50.0).eta - 0.1).abs() < 1e-12);
    }

    #[test]
    fn zero_distance_produces_key() {
        let mut cfg = ExperimentConfig::default();
        cfg.distances_km = vec![0.0];
        let ctx = SweepContext::new(cfg).unwrap();
        let p = simulate_point(&ctx, 0.0).unwrap();
        assert!(p.rate_lp.unwrap() > 0.0, "rate_lp = {:?}", p.rate_lp);
        assert!(p.rate_infinite >= p.rate_lp.unwrap());
        assert!(p.q_z > 0.0 && p.e_z >= 0.0);
    }

    #[test]
    fn infinite_rate_dominates_lp_rate() {
        let cfg = ExperimentConfig::default();
        let ctx = SweepContext::new(cfg).unwrap();
        for km in [0.0, 40.0, 120.0, 200.0] {
            let p = simulate_point(&ctx, km).unwrap();
            assert!(
                p.rate_infinite >= p.rate_lp.unwrap() - 1e-15,
                "km={km}: {} < {:?}",
                p.rate_infinite,
                p.rate_lp
            );
        }
    }

    #[test]
    fn sweep_preserves_grid_order_and_is_deterministic() {
        let mut cfg = ExperimentConfig::default();
        cfg.distances_km = vec![0.0, 30.0, 60.0, 90.0];
        let ctx = SweepContext::new(cfg.clone()).unwrap();
        let a = sweep_distances(&ctx).unwrap();
        let b = sweep_distances(&ctx).unwrap();
        assert_eq!(a.len(), 4);
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.distance_km, q.distance_km);
            assert_eq!(p.rate_lp, q.rate_lp);
            assert_eq!(p.rate_infinite, q.rate_infinite);
        }
        assert_eq!(a[2].distance_km, 60.0);
    }

    #[test]
    fn mcs_context_reuses_calibration() {
        let mut cfg = ExperimentConfig::default();
        cfg.source_kind = SourceKind::ModifiedCoherent;
        cfg.elimination_c = Some(3.0);
        cfg.distances_km = vec![0.0, 10.0];
        let ctx = SweepContext::new(cfg).unwrap();
        let pts = sweep_distances(&ctx).unwrap();
        assert!(pts[0].rate_lp.unwrap() > 0.0);
        // the 3-photon component of the signal distribution is eliminated
        assert!(ctx.dists_full[2].prob(3) < 1e-9);
    }

    #[test]
    fn validation_rejects_nonsense() {
        let mut cfg = ExperimentConfig::default();
        cfg.decoy_nu = 0.7;
        assert!(matches!(SweepContext::new(cfg), Err(SweepError::BadConfig(_))));
        let mut cfg = ExperimentConfig::default();
        cfg.source_kind = SourceKind::ModifiedCoherent;
        assert!(matches!(SweepContext::new(cfg), Err(SweepError::BadConfig(_))));
    }

    #[test]
    fn no_positive_rate_is_reported() {
        let mut cfg = ExperimentConfig::default();
        cfg.det_eff = 1e-3; // hopeless channel
        cfg.mode = RateMode::LpBounded;
        assert!(matches!(find_max_distance(&cfg), Err(SweepError::NoPositiveRate)));
    }
}
