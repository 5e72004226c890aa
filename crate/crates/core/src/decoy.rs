//! Decoy-state analysis: turn gain tables into truncated linear constraint
//! systems over the per-photon-number yields and extract a certified lower
//! bound on Y11 (Z basis) and upper bound on e11 (X basis) by linear
//! programming.

use std::io::BufRead;

use thiserror::Error;

use crate::bsm::Basis;
use crate::simplex::{self, Constraint, Relation, Sense, SolveStatus};
use crate::sources::{PhotonDistribution, SourceError, SourceSpec, DEFAULT_N_MAX};

/// Coefficients below this are absorbed into the tail bound instead of
/// entering the matrix; keeps the systems solvable without weakening them
/// (every dropped product is covered by T because the yields are <= 1).
const COEFF_PRUNE: f64 = 1e-16;
/// Photon-number pairs whose coefficient stays below this in every
/// intensity row get no LP variable at all: they are indistinguishable
/// junk columns that only make the bases near-singular, and their whole
/// possible contribution is covered by the tail bounds.
const VARIABLE_KEEP: f64 = 1e-14;
/// Absolute widening of every observation interval, inside the solver's
/// 1e-10 feasibility-tolerance contract. Forward-model data otherwise
/// produces feasible regions of width ~1e-16 around vacuum rows.
const FEASIBILITY_PAD: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DecoyError {
    #[error("invalid decoy configuration: {0}")]
    BadConfig(String),
    #[error("missing observation for intensity pair ({mu}, {nu}) in basis {basis:?}")]
    MissingPair { mu: f64, nu: f64, basis: Basis },
    #[error("source error: {0}")]
    Source(#[from] SourceError),
    #[error("malformed gains table: {0}")]
    Csv(String),
}

/// Closed interval, a point when low == high.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn point(v: f64) -> Self {
        Interval { low: v, high: v }
    }

    pub fn is_valid(&self) -> bool {
        self.low.is_finite() && self.high.is_finite() && 0.0 <= self.low && self.low <= self.high
    }
}

/// Observed gain Q and error product E*Q for one intensity pair in one basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairObservation {
    pub q: Interval,
    pub eq: Interval,
}

impl PairObservation {
    pub fn point(q: f64, eq: f64) -> Self {
        PairObservation { q: Interval::point(q), eq: Interval::point(eq) }
    }
}

/// Gains for every ordered intensity pair, both bases.
#[derive(Debug, Clone)]
pub struct ObservedGains {
    intensities: Vec<f64>,
    z: Vec<Option<PairObservation>>,
    x: Vec<Option<PairObservation>>,
}

impl ObservedGains {
    pub fn new(intensities: Vec<f64>) -> Self {
        let n = intensities.len() * intensities.len();
        ObservedGains { intensities, z: vec![None; n], x: vec![None; n] }
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    fn index(&self, i: usize, j: usize) -> usize {
        i * self.intensities.len() + j
    }

    pub fn set(&mut self, i: usize, j: usize, basis: Basis, obs: PairObservation) {
        let idx = self.index(i, j);
        match basis {
            Basis::Z => self.z[idx] = Some(obs),
            Basis::X => self.x[idx] = Some(obs),
        }
    }

    pub fn get(&self, i: usize, j: usize, basis: Basis) -> Option<PairObservation> {
        let idx = self.index(i, j);
        match basis {
            Basis::Z => self.z[idx],
            Basis::X => self.x[idx],
        }
    }

    /// Parse a gains table with header `mu_a,nu_b,basis,Q,EQ`. The intensity
    /// list is derived from the distinct values seen; every pair must be
    /// covered in both bases before the result can be solved.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self, DecoyError> {
        let mut rows: Vec<(f64, f64, Basis, f64, f64)> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| DecoyError::Csv(e.to_string()))?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if lineno == 0 && trimmed.starts_with("mu_a") {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(DecoyError::Csv(format!(
                    "line {}: expected 5 columns, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let parse = |s: &str, what: &str| -> Result<f64, DecoyError> {
                s.parse::<f64>()
                    .map_err(|_| DecoyError::Csv(format!("line {}: bad {what} '{s}'", lineno + 1)))
            };
            let basis = match fields[2] {
                "Z" | "z" => Basis::Z,
                "X" | "x" => Basis::X,
                other => {
                    return Err(DecoyError::Csv(format!(
                        "line {}: basis must be Z or X, got '{other}'",
                        lineno + 1
                    )))
                }
            };
            rows.push((
                parse(fields[0], "mu_a")?,
                parse(fields[1], "nu_b")?,
                basis,
                parse(fields[3], "Q")?,
                parse(fields[4], "EQ")?,
            ));
        }
        let mut intensities: Vec<f64> = rows
            .iter()
            .flat_map(|&(mu, nu, _, _, _)| [mu, nu])
            .collect();
        intensities.sort_by(|a, b| a.partial_cmp(b).expect("finite intensities"));
        intensities.dedup();
        if intensities.is_empty() {
            return Err(DecoyError::Csv("no data rows".into()));
        }
        let mut gains = ObservedGains::new(intensities);
        for (mu, nu, basis, q, eq) in rows {
            let find = |v: f64| -> usize {
                gains.intensities.iter().position(|&x| x == v).expect("value came from the list")
            };
            let obs = PairObservation::point(q, eq);
            if !obs.q.is_valid() || !obs.eq.is_valid() || eq > q {
                return Err(DecoyError::Csv(format!(
                    "inconsistent observation for pair ({mu}, {nu}): Q={q}, EQ={eq}"
                )));
            }
            gains.set(find(mu), find(nu), basis, obs);
        }
        Ok(gains)
    }
}

/// Pulse pairs a single (intensity pair, basis) cell observes when each
/// party emits `n` pulses per intensity with uniform intensity and basis
/// choices. Kept in one place so alternative bookkeeping is a local change.
pub fn pulses_per_pair_per_basis(n: u64) -> f64 {
    n as f64 / 6.0
}

/// Widen point observations into k-sigma Gaussian intervals with a Poisson
/// guard on the high edge (so vacuum cells are not treated as exact).
pub fn apply_fluctuation(obs: &ObservedGains, pulses_n: u64, k_sigma: f64) -> ObservedGains {
    assert!(pulses_n > 0, "pulse count must be positive");
    let n_pair = pulses_per_pair_per_basis(pulses_n);
    let widen = |iv: Interval| -> Interval {
        let half_low = k_sigma * (iv.low / n_pair).sqrt();
        let half_high = k_sigma * (iv.high / n_pair).sqrt();
        Interval {
            low: (iv.low - half_low).max(0.0),
            high: (iv.high + half_high + k_sigma * k_sigma / n_pair).min(1.0),
        }
    };
    let mut out = ObservedGains::new(obs.intensities.clone());
    for i in 0..obs.intensities.len() {
        for j in 0..obs.intensities.len() {
            for basis in [Basis::Z, Basis::X] {
                if let Some(p) = obs.get(i, j, basis) {
                    out.set(i, j, basis, PairObservation { q: widen(p.q), eq: widen(p.eq) });
                }
            }
        }
    }
    out
}

/// Decoy protocol configuration: the intensity ladder (vacuum first), the
/// source family template, and the yield-variable cutoff of the LP.
#[derive(Debug, Clone)]
pub struct DecoyConfig {
    pub intensities: Vec<f64>,
    pub source: SourceSpec,
    pub n_cut: usize,
}

impl DecoyConfig {
    /// Cutoff matching the protocol photon cutoff, so the tail bound only
    /// carries true beyond-protocol mass.
    pub const DEFAULT_N_CUT: usize = 12;

    pub fn new(intensities: Vec<f64>, source: SourceSpec) -> Result<Self, DecoyError> {
        let cfg = DecoyConfig { intensities, source, n_cut: Self::DEFAULT_N_CUT };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), DecoyError> {
        if self.intensities.len() < 2 {
            return Err(DecoyError::BadConfig("need at least two intensities".into()));
        }
        if self.intensities[0] != 0.0 {
            return Err(DecoyError::BadConfig("first intensity must be the vacuum state".into()));
        }
        if !self.intensities.windows(2).all(|w| w[0] < w[1]) {
            return Err(DecoyError::BadConfig("intensities must be strictly increasing".into()));
        }
        if self.n_cut < 2 {
            return Err(DecoyError::BadConfig("n_cut must be at least 2".into()));
        }
        Ok(())
    }

    /// Photon-number distribution of each intensity, untruncated.
    pub fn distributions(&self) -> Result<Vec<PhotonDistribution>, DecoyError> {
        self.validate()?;
        self.intensities
            .iter()
            .map(|&mu| Ok(self.source.with_mean(mu).distribution(DEFAULT_N_MAX)?))
            .collect()
    }
}

/// One basis's constraint system over yield variables Y_nm and error
/// variables X_nm = e_nm Y_nm, all in [0, 1] with X <= Y. Only photon
/// pairs that are observable at the configured intensities carry
/// variables; everything else is covered by the per-row tail bounds.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    kept: Vec<(usize, usize)>,
    constraints: Vec<Constraint>,
    tails: Vec<f64>,
    y11: usize,
}

impl ConstraintSystem {
    fn num_vars(&self) -> usize {
        2 * self.kept.len()
    }

    /// LP variable index of Y_nm, if the pair carries one.
    pub fn var_index(&self, n: usize, m: usize) -> Option<usize> {
        self.kept.iter().position(|&p| p == (n, m))
    }

    /// Tail bound T of the pair at (intensity index i, j): the probability
    /// mass outside the LP variable block (including pruned coefficients).
    pub fn tail(&self, i: usize, j: usize, num_intensities: usize) -> f64 {
        self.tails[i * num_intensities + j]
    }

    /// Raw rows, for diagnostics and tests.
    pub fn constraints_for_inspection(&self) -> &[Constraint] {
        &self.constraints
    }

    fn minimize_y11(&self) -> simplex::Solution {
        let mut obj = vec![0.0; self.num_vars()];
        obj[self.y11] = 1.0;
        simplex::solve(&obj, &self.constraints, Sense::Minimize)
    }

    fn maximize_x11(&self) -> simplex::Solution {
        let mut obj = vec![0.0; self.num_vars()];
        obj[self.kept.len() + self.y11] = 1.0;
        simplex::solve(&obj, &self.constraints, Sense::Maximize)
    }
}

/// Build the truncated constraint system for one basis: for every intensity
/// pair, sum P_mu(n) P_nu(m) Y_nm is bracketed by [Q_low - T, Q_high] and
/// the same structure holds for X_nm against E*Q, where T is the exact tail
/// mass not covered by the kept coefficients (valid because every yield is
/// <= 1).
pub fn build_constraints(
    config: &DecoyConfig,
    obs: &ObservedGains,
    basis: Basis,
) -> Result<ConstraintSystem, DecoyError> {
    config.validate()?;
    let dists = config.distributions()?;
    let k = config.intensities.len();
    if obs.intensities().len() != k
        || obs
            .intensities()
            .iter()
            .zip(&config.intensities)
            .any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(DecoyError::BadConfig(
            "observation intensities do not match the configuration".into(),
        ));
    }
    let dim = config.n_cut + 1;
    // keep the photon pairs some intensity pair can actually see
    let mut kept = Vec::new();
    for n in 0..dim {
        for m in 0..dim {
            let best = (0..k)
                .flat_map(|i| (0..k).map(move |j| (i, j)))
                .map(|(i, j)| dists[i].prob(n) * dists[j].prob(m))
                .fold(0.0f64, f64::max);
            if best >= VARIABLE_KEEP {
                kept.push((n, m));
            }
        }
    }
    let y11 = kept
        .iter()
        .position(|&p| p == (1, 1))
        .ok_or_else(|| DecoyError::BadConfig("single-photon pair is unobservable".into()))?;
    let nv = kept.len();
    let mut system = ConstraintSystem {
        kept: kept.clone(),
        constraints: Vec::with_capacity(4 * k * k + 2 * nv),
        tails: vec![0.0; k * k],
        y11,
    };
    for i in 0..k {
        for j in 0..k {
            let obs_pair = obs.get(i, j, basis).ok_or(DecoyError::MissingPair {
                mu: config.intensities[i],
                nu: config.intensities[j],
                basis,
            })?;
            let mut coeffs = vec![0.0; nv];
            let mut covered = 0.0;
            for (v, &(n, m)) in kept.iter().enumerate() {
                let c = dists[i].prob(n) * dists[j].prob(m);
                if c >= COEFF_PRUNE {
                    coeffs[v] = c;
                    covered += c;
                }
            }
            let tail = 1.0 - covered;
            system.tails[i * k + j] = tail;
            let scale = 1.0 / coeffs.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
            let scaled: Vec<f64> = coeffs.iter().map(|&c| c * scale).collect();
            let mut y_row = vec![0.0; 2 * nv];
            y_row[..nv].copy_from_slice(&scaled);
            let mut x_row = vec![0.0; 2 * nv];
            x_row[nv..].copy_from_slice(&scaled);
            for (row, iv) in [(y_row, obs_pair.q), (x_row, obs_pair.eq)] {
                system.constraints.push(Constraint {
                    coeffs: row.clone(),
                    relation: Relation::LessEq,
                    rhs: (iv.high + FEASIBILITY_PAD) * scale,
                });
                system.constraints.push(Constraint {
                    coeffs: row,
                    relation: Relation::GreaterEq,
                    rhs: (iv.low - tail - FEASIBILITY_PAD) * scale,
                });
            }
        }
    }
    // X_nm <= Y_nm and Y_nm <= 1 (X <= 1 follows)
    for v in 0..nv {
        let mut coupling = vec![0.0; 2 * nv];
        coupling[nv + v] = 1.0;
        coupling[v] = -1.0;
        system.constraints.push(Constraint { coeffs: coupling, relation: Relation::LessEq, rhs: 0.0 });
        let mut cap = vec![0.0; 2 * nv];
        cap[v] = 1.0;
        system.constraints.push(Constraint { coeffs: cap, relation: Relation::LessEq, rhs: 1.0 });
    }
    Ok(system)
}

/// Solver verdict for a bounds extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Certified single-photon bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpBounds {
    pub y11_lower: f64,
    pub e11_upper: f64,
    pub status: LpStatus,
}

fn classify(status: SolveStatus) -> LpStatus {
    match status {
        SolveStatus::Optimal => LpStatus::Optimal,
        SolveStatus::Infeasible => LpStatus::Infeasible,
        SolveStatus::Unbounded => LpStatus::Unbounded,
        // the pivot budget is far beyond anything these systems need; treat
        // an exhausted budget as a failed (inconsistent) solve
        SolveStatus::PivotLimit => LpStatus::Infeasible,
    }
}

/// Extract the bounds: minimize Y11 over the Z system; over the X system,
/// maximize X11 and divide by its own minimized Y11 (guarded at zero).
pub fn solve_bounds(z_system: &ConstraintSystem, x_system: &ConstraintSystem) -> LpBounds {
    let y_sol = z_system.minimize_y11();
    if classify(y_sol.status) != LpStatus::Optimal {
        return LpBounds { y11_lower: 0.0, e11_upper: 1.0, status: classify(y_sol.status) };
    }
    let yx_sol = x_system.minimize_y11();
    if classify(yx_sol.status) != LpStatus::Optimal {
        return LpBounds { y11_lower: 0.0, e11_upper: 1.0, status: classify(yx_sol.status) };
    }
    let x_sol = x_system.maximize_x11();
    if classify(x_sol.status) != LpStatus::Optimal {
        return LpBounds { y11_lower: 0.0, e11_upper: 1.0, status: classify(x_sol.status) };
    }
    let y11_lower = y_sol.objective.clamp(0.0, 1.0);
    let y11x_lower = yx_sol.objective;
    let e11_upper = if y11x_lower > 1e-15 {
        (x_sol.objective / y11x_lower).clamp(0.0, 1.0)
    } else {
        1.0
    };
    LpBounds { y11_lower, e11_upper, status: LpStatus::Optimal }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bsm::{ChannelDetector, ClickModel};
    use crate::sweep;

    fn wcs_config() -> DecoyConfig {
        DecoyConfig::new(vec![0.0, 0.1, 0.5], SourceSpec::weak_coherent(0.5)).unwrap()
    }

    fn forward_obs(cfg: &DecoyConfig, eta: f64) -> ObservedGains {
        let cd = ChannelDetector { eta, dark: 6e-6 };
        sweep::simulate_gains(cfg, &cd, ClickModel::Literal, 12).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(DecoyConfig::new(vec![0.1, 0.5], SourceSpec::weak_coherent(0.5)).is_err());
        assert!(DecoyConfig::new(vec![0.0, 0.5, 0.1], SourceSpec::weak_coherent(0.5)).is_err());
        assert!(DecoyConfig::new(vec![0.0], SourceSpec::weak_coherent(0.5)).is_err());
        assert!(wcs_config().validate().is_ok());
    }

    #[test]
    fn vacuum_pair_pins_y00() {
        let cfg = wcs_config();
        let obs = forward_obs(&cfg, 0.5);
        let sys = build_constraints(&cfg, &obs, Basis::Z).unwrap();
        // vacuum-vacuum tail is exactly zero: the constraint is Y00 = Q00
        assert_eq!(sys.tail(0, 0, 3), 0.0);
        let q00 = obs.get(0, 0, Basis::Z).unwrap().q.low;
        let sol = {
            let mut obj = vec![0.0; sys.num_vars()];
            obj[sys.var_index(0, 0).unwrap()] = 1.0;
            simplex::solve(&obj, &sys.constraints, Sense::Minimize)
        };
        assert!((sol.objective - q00).abs() < 1e-10);
    }

    #[test]
    fn tail_matches_direct_summation() {
        let mut cfg = wcs_config();
        cfg.n_cut = 7;
        let obs = forward_obs(&cfg, 0.8);
        let sys = build_constraints(&cfg, &obs, Basis::Z).unwrap();
        // product-Poisson oracle: T = 1 - (sum_{n<=7} P_0.5(n))^2
        let dist = crate::sources::poisson_distribution(0.5, 7);
        let partial: f64 = dist.probs().iter().sum();
        let expect = 1.0 - partial * partial;
        assert!((sys.tail(2, 2, 3) - expect).abs() < 1e-12);
    }

    #[test]
    fn sandwich_against_exact_stats() {
        let cfg = wcs_config();
        for eta in [1.0, 0.3, 0.05] {
            let cd = ChannelDetector { eta, dark: 6e-6 };
            let obs = forward_obs(&cfg, eta);
            let z = build_constraints(&cfg, &obs, Basis::Z).unwrap();
            let x = build_constraints(&cfg, &obs, Basis::X).unwrap();
            let bounds = solve_bounds(&z, &x);
            assert_eq!(bounds.status, LpStatus::Optimal);
            let exact = crate::bsm::exact_single_photon_stats(&cd);
            assert!(
                bounds.y11_lower <= exact.y11_z + 1e-12,
                "eta={eta}: {} vs {}",
                bounds.y11_lower,
                exact.y11_z
            );
            assert!(
                bounds.e11_upper >= exact.e11_x - 1e-12,
                "eta={eta}: {} vs {}",
                bounds.e11_upper,
                exact.e11_x
            );
        }
    }

    #[test]
    fn vacuum_only_data_gives_trivial_lower_bound() {
        let cfg = DecoyConfig::new(vec![0.0, 0.1], SourceSpec::weak_coherent(0.1)).unwrap();
        let mut obs = ObservedGains::new(vec![0.0, 0.1]);
        // cover only the vacuum-vacuum pair properly; mark the rest with the
        // full interval so they constrain nothing
        for i in 0..2 {
            for j in 0..2 {
                for basis in [Basis::Z, Basis::X] {
                    let iv = if i == 0 && j == 0 {
                        PairObservation::point(1.44e-10, 7.2e-11)
                    } else {
                        PairObservation {
                            q: Interval { low: 0.0, high: 1.0 },
                            eq: Interval { low: 0.0, high: 1.0 },
                        }
                    };
                    obs.set(i, j, basis, iv);
                }
            }
        }
        let z = build_constraints(&cfg, &obs, Basis::Z).unwrap();
        let x = build_constraints(&cfg, &obs, Basis::X).unwrap();
        let bounds = solve_bounds(&z, &x);
        assert_eq!(bounds.status, LpStatus::Optimal);
        assert!(bounds.y11_lower <= 1e-12);
        assert!((bounds.e11_upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_data_is_reported_infeasible() {
        let cfg = DecoyConfig::new(vec![0.0, 0.1], SourceSpec::weak_coherent(0.1)).unwrap();
        let mut obs = ObservedGains::new(vec![0.0, 0.1]);
        for i in 0..2 {
            for j in 0..2 {
                for basis in [Basis::Z, Basis::X] {
                    obs.set(i, j, basis, PairObservation::point(0.8, 0.1));
                }
            }
        }
        // vacuum pair forces Y00 = 0.8 but P_0.1(0) ~ 0.905 makes the
        // (0, 0.1) gain at least 0.72 from Y00 alone; observing 0.1 there
        // cannot be explained
        let mut broken = obs.clone();
        broken.set(0, 1, Basis::Z, PairObservation::point(0.1, 0.05));
        let z = build_constraints(&cfg, &broken, Basis::Z).unwrap();
        let x = build_constraints(&cfg, &broken, Basis::X).unwrap();
        let bounds = solve_bounds(&z, &x);
        assert_eq!(bounds.status, LpStatus::Infeasible);
    }

    #[test]
    fn missing_pair_is_a_coverage_error() {
        let cfg = wcs_config();
        let mut obs = forward_obs(&cfg, 0.5);
        obs.z[4] = None; // drop (0.1, 0.1) in Z
        match build_constraints(&cfg, &obs, Basis::Z) {
            Err(DecoyError::MissingPair { mu, nu, basis: Basis::Z }) => {
                assert_eq!((mu, nu), (0.1, 0.1));
            }
            other => panic!("expected missing-pair error, got {other:?}"),
        }
    }

    #[test]
    fn monotone_tightening_with_more_intensities() {
        // the two-intensity subset of the same forward data never gives a
        // better bound than the full three-intensity ladder
        let full_cfg = wcs_config();
        let full_obs = forward_obs(&full_cfg, 0.3);
        let sub_cfg = DecoyConfig::new(vec![0.0, 0.5], SourceSpec::weak_coherent(0.5)).unwrap();
        let mut sub_obs = ObservedGains::new(vec![0.0, 0.5]);
        for (si, fi) in [(0usize, 0usize), (1, 2)] {
            for (sj, fj) in [(0usize, 0usize), (1, 2)] {
                for basis in [Basis::Z, Basis::X] {
                    sub_obs.set(si, sj, basis, full_obs.get(fi, fj, basis).unwrap());
                }
            }
        }
        let full = solve_bounds(
            &build_constraints(&full_cfg, &full_obs, Basis::Z).unwrap(),
            &build_constraints(&full_cfg, &full_obs, Basis::X).unwrap(),
        );
        let sub = solve_bounds(
            &build_constraints(&sub_cfg, &sub_obs, Basis::Z).unwrap(),
            &build_constraints(&sub_cfg, &sub_obs, Basis::X).unwrap(),
        );
        assert!(full.y11_lower >= sub.y11_lower - 1e-10);
        assert!(full.e11_upper <= sub.e11_upper + 1e-10);
    }

    #[test]
    fn fluctuation_examples() {
        let mut obs = ObservedGains::new(vec![0.0, 0.5]);
        for i in 0..2 {
            for j in 0..2 {
                for basis in [Basis::Z, Basis::X] {
                    obs.set(i, j, basis, PairObservation::point(if i + j == 0 { 0.0 } else { 1e-5 }, 0.0));
                }
            }
        }
        let n = 6_000_000_000_u64; // N_pair = 1e9
        let wide = apply_fluctuation(&obs, n, 5.0);
        let zero = wide.get(0, 0, Basis::Z).unwrap();
        assert_eq!(zero.q.low, 0.0);
        assert!((zero.q.high - 25.0 / 1e9).abs() < 1e-18); // the k^2/N guard
        let q = wide.get(1, 1, Basis::Z).unwrap().q;
        let n10 = 60_000_000_000_u64; // N_pair = 1e10
        let wide10 = apply_fluctuation(&obs, n10, 5.0);
        let q10 = wide10.get(1, 1, Basis::Z).unwrap().q;
        let half = 5.0 * (1e-5f64 / 1e10).sqrt();
        assert!((q10.high - (1e-5 + half + 25.0 / 1e10)).abs() < 1e-12);
        assert!(((1e-5 - q10.low) - half).abs() < 1e-12);
        assert!((half - 1.58e-7).abs() < 1e-9);
        // larger N nests inside smaller N
        assert!(q10.low >= q.low && q10.high <= q.high);
    }

    #[test]
    fn fluctuation_monotonicity_of_bounds() {
        let cfg = wcs_config();
        let obs = forward_obs(&cfg, 0.3);
        let solve = |o: &ObservedGains| {
            solve_bounds(
                &build_constraints(&cfg, o, Basis::Z).unwrap(),
                &build_constraints(&cfg, o, Basis::X).unwrap(),
            )
        };
        let exact = solve(&obs);
        let n13 = solve(&apply_fluctuation(&obs, 10u64.pow(13), 5.0));
        let n11 = solve(&apply_fluctuation(&obs, 10u64.pow(11), 5.0));
        assert!(n13.y11_lower <= exact.y11_lower + 1e-12);
        assert!(n11.y11_lower <= n13.y11_lower + 1e-12);
        assert!(n13.e11_upper >= exact.e11_upper - 1e-12);
        assert!(n11.e11_upper >= n13.e11_upper - 1e-12);
    }

    #[test]
    fn csv_round_trip_and_coverage() {
        let cfg = wcs_config();
        let obs = forward_obs(&cfg, 0.5);
        let mut text = String::from("mu_a,nu_b,basis,Q,EQ\n");
        for (i, &mu) in cfg.intensities.iter().enumerate() {
            for (j, &nu) in cfg.intensities.iter().enumerate() {
                for basis in [Basis::Z, Basis::X] {
                    let p = obs.get(i, j, basis).unwrap();
                    let b = if basis == Basis::Z { "Z" } else { "X" };
                    text.push_str(&format!("{mu},{nu},{b},{:.17e},{:.17e}\n", p.q.low, p.eq.low));
                }
            }
        }
        let parsed = ObservedGains::from_csv(text.as_bytes()).unwrap();
        assert_eq!(parsed.intensities(), cfg.intensities.as_slice());
        let before = solve_bounds(
            &build_constraints(&cfg, &obs, Basis::Z).unwrap(),
            &build_constraints(&cfg, &obs, Basis::X).unwrap(),
        );
        let after = solve_bounds(
            &build_constraints(&cfg, &parsed, Basis::Z).unwrap(),
            &build_constraints(&cfg, &parsed, Basis::X).unwrap(),
        );
        assert!((before.y11_lower - after.y11_lower).abs() < 1e-12);
        assert!((before.e11_upper - after.e11_upper).abs() < 1e-12);
        // dropping a row is a coverage error
        let partial: String = text.lines().take(10).collect::<Vec<_>>().join("\n");
        let short = ObservedGains::from_csv(partial.as_bytes()).unwrap();
        assert!(matches!(
            build_constraints(&cfg, &short, Basis::X),
            Err(DecoyError::MissingPair { .. })
        ));
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(ObservedGains::from_csv("mu_a,nu_b,basis,Q,EQ\n0,0,Y,1,1\n".as_bytes()).is_err());
        assert!(ObservedGains::from_csv("0,0,Z,0.5\n".as_bytes()).is_err());
        assert!(ObservedGains::from_csv("0,0,Z,1e-3,2e-3\n".as_bytes()).is_err()); // EQ > Q
    }
}
