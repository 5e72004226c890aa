//! Charlie's Bell-state measurement: Fock states through a 50:50
//! beamsplitter and polarizing beamsplitters onto four threshold detectors
//! with dark counts.
//!
//! Rectangular-basis inputs have closed forms (distinguishable polarization
//! modes split binomially; same-polarization inputs interfere on one mode
//! pair). Diagonal inputs go through a generic second-quantized
//! mode-propagation engine. The engine reproduces the closed forms exactly,
//! which is how it is validated.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use thiserror::Error;

use crate::sources::PhotonDistribution;

/// Per-pulse photon cutoff used by the protocol-level sums.
pub const PROTOCOL_CUTOFF: usize = 12;
/// The mode-propagation engine supports inputs with n + m up to this total.
pub const ENGINE_PHOTON_BUDGET: usize = 24;

#[derive(Debug, Error, PartialEq)]
pub enum BsmError {
    #[error("subset index out of range: p <= n and q <= m required")]
    IndexOutOfRange,
    #[error("photon budget exceeded: n + m = {total} > {budget}")]
    PhotonBudget { total: usize, budget: usize },
    #[error("polarizations from different bases have no error classification")]
    MixedBasis,
    #[error("zero gain: error rate undefined (eta = dark = 0)")]
    ZeroGain,
}

/// Single-pulse polarization; Plus/Minus are the diagonal basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    H,
    V,
    Plus,
    Minus,
}

impl Polarization {
    pub fn basis(self) -> Basis {
        match self {
            Polarization::H | Polarization::V => Basis::Z,
            Polarization::Plus | Polarization::Minus => Basis::X,
        }
    }

    /// (H, V) components of the unit polarization vector.
    fn components(self) -> (f64, f64) {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Polarization::H => (1.0, 0.0),
            Polarization::V => (0.0, 1.0),
            Polarization::Plus => (r, r),
            Polarization::Minus => (r, -r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
}

/// The four accepted two-detector coincidences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoincidencePattern {
    /// D1H and D1V
    D1hD1v,
    /// D2H and D2V
    D2hD2v,
    /// D1H and D2V
    D1hD2v,
    /// D2H and D1V
    D2hD1v,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellClass {
    PsiPlus,
    PsiMinus,
}

impl CoincidencePattern {
    pub const ALL: [CoincidencePattern; 4] = [
        CoincidencePattern::D1hD1v,
        CoincidencePattern::D2hD2v,
        CoincidencePattern::D1hD2v,
        CoincidencePattern::D2hD1v,
    ];

    /// Same-arm coincidences announce psi+, cross-arm psi-.
    pub fn bell_class(self) -> BellClass {
        match self {
            CoincidencePattern::D1hD1v | CoincidencePattern::D2hD2v => BellClass::PsiPlus,
            CoincidencePattern::D1hD2v | CoincidencePattern::D2hD1v => BellClass::PsiMinus,
        }
    }
}

/// Threshold-detector click factor. `Literal` is the published form
/// 1 - (1-eta)^k + d with silence ((1-eta)(1-d))^k; `Normalized` is the
/// exactly normalized 1 - (1-d)(1-eta)^k with silence (1-d)(1-eta)^k.
/// They differ by O(d).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClickModel {
    #[default]
    Literal,
    Normalized,
}

/// Per-arm transmittance-times-efficiency and dark count probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDetector {
    pub eta: f64,
    pub dark: f64,
}

impl ChannelDetector {
    pub fn new(eta: f64, dark: f64) -> Self {
        assert!((0.0..=1.0).contains(&eta), "eta must be in [0,1]");
        assert!((0.0..1e-2).contains(&dark) || dark == 0.0, "dark count out of model regime");
        ChannelDetector { eta, dark }
    }

    #[inline]
    fn click(&self, k: usize, model: ClickModel) -> f64 {
        let miss = (1.0 - self.eta).powi(k as i32);
        match model {
            ClickModel::Literal => 1.0 - miss + self.dark,
            ClickModel::Normalized => 1.0 - (1.0 - self.dark) * miss,
        }
    }

    #[inline]
    fn silence(&self, k: usize, model: ClickModel) -> f64 {
        match model {
            ClickModel::Literal => ((1.0 - self.eta) * (1.0 - self.dark)).powi(k as i32),
            ClickModel::Normalized => (1.0 - self.dark) * (1.0 - self.eta).powi(k as i32),
        }
    }
}

/// Accepted-coincidence probability and the share of it classified as error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGain {
    pub gain: f64,
    pub error_fraction: f64,
}

impl PairGain {
    pub fn error_gain(&self) -> f64 {
        self.gain * self.error_fraction
    }
}

/// Exact single-photon statistics used by the infinite-decoy reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglePhotonStats {
    pub y11_z: f64,
    pub y11_x: f64,
    pub e11_x: f64,
}

// ---------------------------------------------------------------------------
// binomials

const BINOM_MAX: usize = 64;

fn binomial_table() -> &'static Vec<[f64; BINOM_MAX + 1]> {
    static TABLE: OnceLock<Vec<[f64; BINOM_MAX + 1]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![[0.0; BINOM_MAX + 1]; BINOM_MAX + 1];
        for n in 0..=BINOM_MAX {
            t[n][0] = 1.0;
            for k in 1..=n {
                t[n][k] = t[n - 1][k - 1] + if k <= n - 1 { t[n - 1][k] } else { 0.0 };
            }
        }
        t
    })
}

#[inline]
fn binom(n: usize, k: usize) -> f64 {
    binomial_table()[n][k]
}

// ---------------------------------------------------------------------------
// closed forms for rectangular inputs

/// Probability that the splitter sends the orthogonally polarized pair
/// (n photons / m photons) into the subset |p, q, n-p, m-q> over the
/// detector modes (D1H, D1V, D2H, D2V): Binom(n,p) Binom(m,q) / 2^{n+m}.
pub fn subset_probability(n: usize, m: usize, p: usize, q: usize) -> Result<f64, BsmError> {
    if p > n || q > m {
        return Err(BsmError::IndexOutOfRange);
    }
    if n + m > ENGINE_PHOTON_BUDGET {
        return Err(BsmError::PhotonBudget { total: n + m, budget: ENGINE_PHOTON_BUDGET });
    }
    Ok(binom(n, p) * binom(m, q) * 0.5f64.powi((n + m) as i32))
}

/// The four published closed-form yields of subset |p, q, n-p, m-q>, in the
/// order (D1H&D1V, D2H&D2V, D1H&D2V, D2H&D1V).
pub fn subset_yields(p: usize, q: usize, n: usize, m: usize, cd: &ChannelDetector) -> [f64; 4] {
    subset_yields_with_model(p, q, n, m, cd, ClickModel::Literal)
}

pub fn subset_yields_with_model(
    p: usize,
    q: usize,
    n: usize,
    m: usize,
    cd: &ChannelDetector,
    model: ClickModel,
) -> [f64; 4] {
    assert!(p <= n && q <= m, "subset indices out of range");
    pattern_yields(&[p, q, n - p, m - q], cd, model)
}

/// Yields of the four accepted patterns for a given occupation of the
/// detector modes (D1H, D1V, D2H, D2V): the two pattern detectors click,
/// the other two stay silent.
#[inline]
fn pattern_yields(t: &[usize; 4], cd: &ChannelDetector, model: ClickModel) -> [f64; 4] {
    let c: [f64; 4] = std::array::from_fn(|i| cd.click(t[i], model));
    let s: [f64; 4] = std::array::from_fn(|i| cd.silence(t[i], model));
    [
        c[0] * c[1] * s[2] * s[3],
        c[2] * c[3] * s[0] * s[1],
        c[0] * c[3] * s[1] * s[2],
        c[2] * c[1] * s[0] * s[3],
    ]
}

/// Total yield of |n>_H |m>_V (orthogonal rectangular inputs): the double
/// sum over subsets of the four accepted patterns. Valid for any n, m that
/// fit the binomial table.
fn yield_ortho(n: usize, m: usize, cd: &ChannelDetector, model: ClickModel) -> f64 {
    let half_pow = 0.5f64.powi((n + m) as i32);
    let mut total = 0.0;
    for p in 0..=n {
        let bp = binom(n, p);
        for q in 0..=m {
            let prob = bp * binom(m, q) * half_pow;
            let y = pattern_yields(&[p, q, n - p, m - q], cd, model);
            total += prob * (y[0] + y[1] + y[2] + y[3]);
        }
    }
    total
}

/// Total yield when both pulses share one polarization mode (H,H): the two
/// output occupations interfere, with amplitude coefficients
/// sum_p (-1)^p Binom(n,p) Binom(m,k-p) for k photons on the D1 side.
fn yield_same_pol(n: usize, m: usize, cd: &ChannelDetector, model: ClickModel) -> f64 {
    let total_photons = n + m;
    let half_pow = 0.5f64.powi(total_photons as i32);
    let ln_nm = ln_factorial(n) + ln_factorial(m);
    let mut total = 0.0;
    for k in 0..=total_photons {
        let mut coeff = 0.0;
        let p_lo = k.saturating_sub(m);
        let p_hi = k.min(n);
        for p in p_lo..=p_hi {
            let term = binom(n, p) * binom(m, k - p);
            coeff += if p % 2 == 0 { term } else { -term };
        }
        if coeff == 0.0 {
            continue;
        }
        let ln_prob = 2.0 * coeff.abs().ln() + ln_factorial(k) + ln_factorial(total_photons - k)
            - ln_nm;
        let prob = ln_prob.exp() * half_pow;
        let y = pattern_yields(&[k, 0, total_photons - k, 0], cd, model);
        total += prob * (y[0] + y[1] + y[2] + y[3]);
    }
    total
}

fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let t = TABLE.get_or_init(|| {
        let mut v = vec![0.0; BINOM_MAX + 1];
        for n in 1..=BINOM_MAX {
            v[n] = v[n - 1] + (n as f64).ln();
        }
        v
    });
    t[n]
}

// ---------------------------------------------------------------------------
// generic mode-propagation engine

/// Fock occupation of the four detector modes (D1H, D1V, D2H, D2V).
type Occupation = [u8; 4];

/// Exact output distribution over detector-mode occupations for Alice
/// sending n photons at `pol_a` and Bob m photons at `pol_b`.
///
/// Beamsplitter convention a_A -> (a_1 + i a_2)/sqrt2,
/// a_B -> (i a_1 + a_2)/sqrt2; diagonal modes a_+- = (a_H +- a_V)/sqrt2.
pub fn mode_output_distribution(
    n: usize,
    pol_a: Polarization,
    m: usize,
    pol_b: Polarization,
) -> Result<Arc<Vec<(Occupation, f64)>>, BsmError> {
    if n + m > ENGINE_PHOTON_BUDGET {
        return Err(BsmError::PhotonBudget { total: n + m, budget: ENGINE_PHOTON_BUDGET });
    }
    type Cache = RwLock<HashMap<(usize, usize, Polarization, Polarization), Arc<Vec<(Occupation, f64)>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (n, m, pol_a, pol_b);
    if let Some(hit) = cache.read().expect("engine cache poisoned").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let dist = Arc::new(compute_output_distribution(n, pol_a, m, pol_b));
    cache.write().expect("engine cache poisoned").insert(key, Arc::clone(&dist));
    Ok(dist)
}

fn compute_output_distribution(
    n: usize,
    pol_a: Polarization,
    m: usize,
    pol_b: Polarization,
) -> Vec<(Occupation, f64)> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::i();
    let (ah, av) = pol_a.components();
    let (bh, bv) = pol_b.components();
    // creation-operator coefficients over (D1H, D1V, D2H, D2V)
    let ca = [
        Complex64::new(ah * r, 0.0),
        Complex64::new(av * r, 0.0),
        i * (ah * r),
        i * (av * r),
    ];
    let cb = [
        i * (bh * r),
        i * (bv * r),
        Complex64::new(bh * r, 0.0),
        Complex64::new(bv * r, 0.0),
    ];
    let alice = multinomial_expansion(n, &ca);
    let bob = multinomial_expansion(m, &cb);
    let mut monomials: HashMap<Occupation, Complex64> = HashMap::new();
    for (ta, va) in &alice {
        for (tb, vb) in &bob {
            let t: Occupation = std::array::from_fn(|k| ta[k] + tb[k]);
            *monomials.entry(t).or_insert(Complex64::new(0.0, 0.0)) += va * vb;
        }
    }
    let ln_nm = ln_factorial(n) + ln_factorial(m);
    let mut out: Vec<(Occupation, f64)> = monomials
        .into_iter()
        .filter_map(|(t, coeff)| {
            let norm = coeff.norm_sqr();
            if norm == 0.0 {
                return None;
            }
            let ln_fac: f64 = t.iter().map(|&k| ln_factorial(k as usize)).sum();
            Some((t, norm * (ln_fac - ln_nm).exp()))
        })
        .collect();
    out.sort_unstable_by_key(|(t, _)| *t);
    out
}

/// Terms of (sum_j c_j a_j^dag)^n as occupation -> multinomial coefficient
/// times the product of mode coefficients.
fn multinomial_expansion(n: usize, coeffs: &[Complex64; 4]) -> Vec<(Occupation, Complex64)> {
    let mut out = Vec::new();
    let fac_n = ln_factorial(n);
    for k1 in 0..=n {
        for k2 in 0..=(n - k1) {
            for k3 in 0..=(n - k1 - k2) {
                let k4 = n - k1 - k2 - k3;
                let ks = [k1, k2, k3, k4];
                let mut v = Complex64::new(
                    (fac_n - ks.iter().map(|&k| ln_factorial(k)).sum::<f64>()).exp(),
                    0.0,
                );
                for (c, &k) in coeffs.iter().zip(&ks) {
                    if k > 0 {
                        v *= c.powu(k as u32);
                    }
                }
                if v.norm_sqr() > 0.0 {
                    out.push(([k1 as u8, k2 as u8, k3 as u8, k4 as u8], v));
                }
            }
        }
    }
    out
}

/// Gain and same-arm/cross-arm split computed with the generic engine.
fn engine_gain_split(
    n: usize,
    pol_a: Polarization,
    m: usize,
    pol_b: Polarization,
    cd: &ChannelDetector,
    model: ClickModel,
) -> Result<(f64, f64, f64), BsmError> {
    let dist = mode_output_distribution(n, pol_a, m, pol_b)?;
    let mut same_arm = 0.0;
    let mut cross_arm = 0.0;
    for (t, p) in dist.iter() {
        let occ = [t[0] as usize, t[1] as usize, t[2] as usize, t[3] as usize];
        let y = pattern_yields(&occ, cd, model);
        same_arm += p * (y[0] + y[1]);
        cross_arm += p * (y[2] + y[3]);
    }
    Ok((same_arm + cross_arm, same_arm, cross_arm))
}

/// Yield and error share for fixed photon numbers and polarizations.
///
/// Rectangular orthogonal inputs are error-free; rectangular parallel
/// inputs are all error. Diagonal inputs classify by Bell state: same
/// diagonal expects psi+ (cross-arm clicks are errors), opposite diagonal
/// expects psi-.
pub fn yield_pair(
    n: usize,
    m: usize,
    pol_a: Polarization,
    pol_b: Polarization,
    cd: &ChannelDetector,
) -> Result<PairGain, BsmError> {
    yield_pair_with_model(n, m, pol_a, pol_b, cd, ClickModel::Literal)
}

pub fn yield_pair_with_model(
    n: usize,
    m: usize,
    pol_a: Polarization,
    pol_b: Polarization,
    cd: &ChannelDetector,
    model: ClickModel,
) -> Result<PairGain, BsmError> {
    if pol_a.basis() != pol_b.basis() {
        return Err(BsmError::MixedBasis);
    }
    match pol_a.basis() {
        Basis::Z => {
            if n + m > 2 * BINOM_MAX {
                return Err(BsmError::PhotonBudget { total: n + m, budget: 2 * BINOM_MAX });
            }
            let gain = if pol_a == pol_b {
                yield_same_pol(n, m, cd, model)
            } else {
                yield_ortho(n, m, cd, model)
            };
            let error_fraction = if pol_a == pol_b && gain > 0.0 { 1.0 } else { 0.0 };
            Ok(PairGain { gain, error_fraction })
        }
        Basis::X => {
            let (gain, same_arm, cross_arm) = engine_gain_split(n, pol_a, m, pol_b, cd, model)?;
            let error_gain = if pol_a == pol_b { cross_arm } else { same_arm };
            let error_fraction = if gain > 0.0 { error_gain / gain } else { 0.0 };
            Ok(PairGain { gain, error_fraction })
        }
    }
}

// ---------------------------------------------------------------------------
// per-photon-number yield tables and intensity-level gains

/// Polarization-averaged yields Y_nm and error products e_nm * Y_nm for one
/// basis, for all photon numbers up to a cutoff. Both parties' polarization
/// choices are uniform, so the basis average is
/// (1/4)(2 * orthogonal + 2 * parallel) for Z and the same structure for X.
#[derive(Debug, Clone)]
pub struct YieldTable {
    cutoff: usize,
    yields: Vec<f64>,
    error_products: Vec<f64>,
}

impl YieldTable {
    /// Z-basis table from the closed forms; any cutoff the binomial table
    /// supports.
    pub fn z_basis(cd: &ChannelDetector, model: ClickModel, cutoff: usize) -> Self {
        assert!(cutoff <= BINOM_MAX, "cutoff beyond binomial table");
        let dim = cutoff + 1;
        let mut yields = vec![0.0; dim * dim];
        let mut error_products = vec![0.0; dim * dim];
        for n in 0..dim {
            for m in 0..dim {
                let hv = yield_ortho(n, m, cd, model);
                let hh = yield_same_pol(n, m, cd, model);
                yields[n * dim + m] = 0.5 * (hv + hh);
                error_products[n * dim + m] = 0.5 * hh;
            }
        }
        YieldTable { cutoff, yields, error_products }
    }

    /// X-basis table from the mode engine; cutoff limited by the engine
    /// photon budget.
    pub fn x_basis(
        cd: &ChannelDetector,
        model: ClickModel,
        cutoff: usize,
    ) -> Result<Self, BsmError> {
        let dim = cutoff + 1;
        let mut yields = vec![0.0; dim * dim];
        let mut error_products = vec![0.0; dim * dim];
        for n in 0..dim {
            for m in 0..dim {
                let (g_pp, _, cross_pp) =
                    engine_gain_split(n, Polarization::Plus, m, Polarization::Plus, cd, model)?;
                let (g_pm, same_pm, _) =
                    engine_gain_split(n, Polarization::Plus, m, Polarization::Minus, cd, model)?;
                yields[n * dim + m] = 0.5 * (g_pp + g_pm);
                error_products[n * dim + m] = 0.5 * (cross_pp + same_pm);
            }
        }
        Ok(YieldTable { cutoff, yields, error_products })
    }

    pub fn basis_table(
        basis: Basis,
        cd: &ChannelDetector,
        model: ClickModel,
        cutoff: usize,
    ) -> Result<Self, BsmError> {
        match basis {
            Basis::Z => Ok(Self::z_basis(cd, model, cutoff)),
            Basis::X => Self::x_basis(cd, model, cutoff),
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Polarization-averaged yield for the (n, m) photon-number pair.
    pub fn yield_nm(&self, n: usize, m: usize) -> f64 {
        self.yields[n * (self.cutoff + 1) + m]
    }

    /// e_nm * Y_nm for the (n, m) pair.
    pub fn error_product_nm(&self, n: usize, m: usize) -> f64 {
        self.error_products[n * (self.cutoff + 1) + m]
    }

    /// Intensity-level gain Q and error product E*Q for the given photon
    /// number distributions (already truncated by the caller).
    pub fn intensity_gain(&self, dist_a: &PhotonDistribution, dist_b: &PhotonDistribution) -> (f64, f64) {
        let na = dist_a.n_max().min(self.cutoff);
        let nb = dist_b.n_max().min(self.cutoff);
        let mut q = 0.0;
        let mut eq = 0.0;
        for n in 0..=na {
            let pa = dist_a.prob(n);
            if pa == 0.0 {
                continue;
            }
            for m in 0..=nb {
                let w = pa * dist_b.prob(m);
                q += w * self.yield_nm(n, m);
                eq += w * self.error_product_nm(n, m);
            }
        }
        (q, eq)
    }
}

/// Intensity-level gain Q and error rate E for the given basis, photon sums
/// stopping at the protocol cutoff.
pub fn gain_and_qber(
    dist_a: &PhotonDistribution,
    dist_b: &PhotonDistribution,
    basis: Basis,
    cd: &ChannelDetector,
) -> Result<PairGain, BsmError> {
    gain_and_qber_with_model(dist_a, dist_b, basis, cd, ClickModel::Literal, PROTOCOL_CUTOFF)
}

pub fn gain_and_qber_with_model(
    dist_a: &PhotonDistribution,
    dist_b: &PhotonDistribution,
    basis: Basis,
    cd: &ChannelDetector,
    model: ClickModel,
    cutoff: usize,
) -> Result<PairGain, BsmError> {
    if basis == Basis::X && 2 * cutoff > ENGINE_PHOTON_BUDGET {
        return Err(BsmError::PhotonBudget { total: 2 * cutoff, budget: ENGINE_PHOTON_BUDGET });
    }
    let table = YieldTable::basis_table(basis, cd, model, cutoff)?;
    let (q, eq) = table.intensity_gain(&dist_a.truncated(cutoff), &dist_b.truncated(cutoff));
    if q <= 0.0 {
        return Err(BsmError::ZeroGain);
    }
    Ok(PairGain { gain: q, error_fraction: eq / q })
}

/// Exact yields and X error rate for single photons on both sides, the
/// quantities the infinite-decoy reference plugs into the key rate.
pub fn exact_single_photon_stats(cd: &ChannelDetector) -> SinglePhotonStats {
    exact_single_photon_stats_with_model(cd, ClickModel::Literal)
}

pub fn exact_single_photon_stats_with_model(
    cd: &ChannelDetector,
    model: ClickModel,
) -> SinglePhotonStats {
    let hv = yield_ortho(1, 1, cd, model);
    let hh = yield_same_pol(1, 1, cd, model);
    let y11_z = 0.5 * (hv + hh);
    let (g_pp, _same_pp, cross_pp) =
        engine_gain_split(1, Polarization::Plus, 1, Polarization::Plus, cd, model)
            .expect("within engine budget");
    let (g_pm, same_pm, _cross_pm) =
        engine_gain_split(1, Polarization::Plus, 1, Polarization::Minus, cd, model)
            .expect("within engine budget");
    let y11_x = 0.5 * (g_pp + g_pm);
    let error = 0.5 * (cross_pp + same_pm);
    let e11_x = if y11_x > 0.0 { error / y11_x } else { 0.5 };
    SinglePhotonStats { y11_z, y11_x, e11_x }
}
