//! Monte Carlo simulation of the two-phase exchange over Rician fading.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::netmap::{catalog_for, BcSignalSet, MapCatalog, NetworkMap};
use crate::quantizer::{RegionAssignment, RegionSelector};
use crate::{Error, Result};

/// Trials drawn from one RNG stream.
const CHUNK: u64 = 8192;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapPolicy {
    /// Map chosen per fade state from the catalog.
    #[default]
    AdaptiveCatalog,
    /// The bitwise-XOR (or cyclic) square regardless of the fade state.
    FixedXor,
}

impl fmt::Display for MapPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MapPolicy::AdaptiveCatalog => "adaptive_catalog",
            MapPolicy::FixedXor => "fixed_xor",
        })
    }
}

impl FromStr for MapPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "adaptive_catalog" | "adaptive" => Ok(MapPolicy::AdaptiveCatalog),
            "fixed_xor" | "xor" => Ok(MapPolicy::FixedXor),
            other => Err(Error::InvalidConfig(format!("unknown map policy {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub constellation: Constellation,
    /// Rician factor `K`; 0 is Rayleigh fading.
    pub rician_k: f64,
    /// `E / σ²` in dB with unit symbol energy; `+inf` means noiseless.
    pub snr_db_grid: Vec<f64>,
    pub trials_per_point: u64,
    pub seed: u64,
    /// Largest BC alphabet the relay may use.
    pub relay_bc_size_cap: Option<usize>,
    pub map_policy: MapPolicy,
    /// Holds the MA-phase fades `(h_A, h_B)` fixed instead of drawing them.
    pub fixed_fades: Option<(Complex64, Complex64)>,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl SimConfig {
    pub fn new(constellation: Constellation) -> Self {
        SimConfig {
            constellation,
            rician_k: 0.0,
            snr_db_grid: vec![10.0],
            trials_per_point: 10_000,
            seed: 0,
            relay_bc_size_cap: None,
            map_policy: MapPolicy::AdaptiveCatalog,
            fixed_fades: None,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.trials_per_point == 0 {
            return bad("trials_per_point must be at least 1".into());
        }
        if self.snr_db_grid.is_empty() {
            return bad("the SNR grid is empty".into());
        }
        if let Some(s) = self.snr_db_grid.iter().find(|s| s.is_nan() || **s == f64::NEG_INFINITY) {
            return bad(format!("invalid SNR point {s}"));
        }
        if !(self.rician_k.is_finite() && self.rician_k >= 0.0) {
            return bad(format!("Rician factor must be finite and nonnegative, got {}", self.rician_k));
        }
        if let Some(cap) = self.relay_bc_size_cap {
            if cap < self.constellation.len() {
                return bad(format!(
                    "BC size cap {cap} is below the constellation size {}",
                    self.constellation.len()
                ));
            }
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if let Some((a, b)) = self.fixed_fades {
            if !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite())
                || a.norm() == 0.0
            {
                return bad("fixed fades must be finite with h_A nonzero".into());
            }
        }
        Ok(())
    }
}

/// Flat fades of one exchange.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelRealization {
    pub h_a: Complex64,
    pub h_b: Complex64,
    /// R→A fade in the BC phase.
    pub h_a_bc: Complex64,
    /// R→B fade in the BC phase.
    pub h_b_bc: Complex64,
}

/// Circularly symmetric complex Gaussian with total variance `var`.
pub fn sample_cn<R: Rng + ?Sized>(var: f64, rng: &mut R) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Unit-power Rician fade with factor `k`.
pub fn sample_rician<R: Rng + ?Sized>(k: f64, rng: &mut R) -> Complex64 {
    let los = (k / (k + 1.0)).sqrt();
    Complex64::new(los, 0.0) + sample_cn(1.0 / (k + 1.0), rng)
}

/// Joint ML estimate `(i, j)` of the pair sent by A and B.
pub fn ma_phase_ml(c: &Constellation, y: Complex64, h_a: Complex64, h_b: Complex64) -> (usize, usize) {
    let p = c.points();
    let mut best = (0, 0);
    let mut best_d = f64::INFINITY;
    for (i, &a) in p.iter().enumerate() {
        let r = y - h_a * a;
        for (j, &b) in p.iter().enumerate() {
            let d = (r - h_b * b).norm_sqr();
            if d < best_d {
                best_d = d;
                best = (i, j);
            }
        }
    }
    best
}

/// Which end node is decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    /// Knows the row index.
    A,
    /// Knows the column index.
    B,
}

/// ML estimate of the partner's index from the relay broadcast.
pub fn bc_decode(
    map: &NetworkMap,
    bc: &BcSignalSet,
    end: End,
    own: usize,
    y: Complex64,
    h: Complex64,
) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for j in 0..map.size() {
        let symbol = match end {
            End::A => map.get(own, j),
            End::B => map.get(j, own),
        };
        let d = (y - h * bc.point(symbol)).norm_sqr();
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

/// Relay-side state: the map policy and the BC set of every usable map.
#[derive(Clone, Debug)]
pub struct Relay {
    constellation: Constellation,
    selector: RegionSelector,
    bc_sets: Vec<BcSignalSet>,
    fixed: Option<(NetworkMap, BcSignalSet)>,
}

impl Relay {
    pub fn new(
        c: &Constellation,
        catalog: &MapCatalog,
        policy: MapPolicy,
        bc_cap: Option<usize>,
    ) -> Self {
        let selector = RegionSelector::with_max_t(c, catalog, bc_cap.unwrap_or(usize::MAX));
        let bc_sets = catalog
            .entries()
            .iter()
            .map(|e| BcSignalSet::for_map(c, e.map.t()))
            .collect();
        let fixed = match policy {
            MapPolicy::AdaptiveCatalog => None,
            MapPolicy::FixedXor => {
                let xor = NetworkMap::xor(c.len());
                let bc = BcSignalSet::for_map(c, xor.t());
                Some((xor, bc))
            }
        };
        Relay {
            constellation: c.clone(),
            selector,
            bc_sets,
            fixed,
        }
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn catalog(&self) -> &MapCatalog {
        self.selector.catalog()
    }

    /// Region of `z` and the map and BC set the relay uses there.
    pub fn select(&self, z: Complex64) -> (RegionAssignment, &NetworkMap, &BcSignalSet) {
        let region = self.selector.assign(z);
        if let Some((map, bc)) = &self.fixed {
            return (region, map, bc);
        }
        let k = match region {
            RegionAssignment::Dependent(k) => k,
            _ => self.selector.independent_entry(),
        };
        (region, &self.catalog().entries()[k].map, &self.bc_sets[k])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub cluster_correct: bool,
    pub a_correct: bool,
    pub b_correct: bool,
    pub region: RegionAssignment,
}

/// One exchange at noise variance `sigma2`.
pub fn run_trial<R: Rng + ?Sized>(
    relay: &Relay,
    rician_k: f64,
    sigma2: f64,
    fixed_fades: Option<(Complex64, Complex64)>,
    rng: &mut R,
) -> TrialOutcome {
    let c = relay.constellation();
    let m = c.len();
    let xa = rng.random_range(0..m);
    let xb = rng.random_range(0..m);
    let mut ch = ChannelRealization {
        h_a: sample_rician(rician_k, rng),
        h_b: sample_rician(rician_k, rng),
        h_a_bc: sample_rician(rician_k, rng),
        h_b_bc: sample_rician(rician_k, rng),
    };
    if let Some((a, b)) = fixed_fades {
        ch.h_a = a;
        ch.h_b = b;
    }
    let p = c.points();
    let y_r = ch.h_a * p[xa] + ch.h_b * p[xb] + sample_cn(sigma2, rng);
    let (ea, eb) = ma_phase_ml(c, y_r, ch.h_a, ch.h_b);

    let (region, map, bc) = relay.select(ch.h_b / ch.h_a);
    let sent = map.get(ea, eb);
    let x_r = bc.point(sent);
    let y_a = ch.h_a_bc * x_r + sample_cn(sigma2, rng);
    let y_b = ch.h_b_bc * x_r + sample_cn(sigma2, rng);
    TrialOutcome {
        cluster_correct: sent == map.get(xa, xb),
        a_correct: bc_decode(map, bc, End::A, xa, y_a, ch.h_a_bc) == xb,
        b_correct: bc_decode(map, bc, End::B, xb, y_b, ch.h_b_bc) == xa,
        region,
    }
}

/// Integer counts for one SNR point; merging is order-independent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub trials: u64,
    /// Partner-symbol errors summed over both ends.
    pub symbol_errors: u64,
    pub cluster_errors: u64,
    /// End errors in trials where the relay sent the right cluster.
    pub bc_only_errors: u64,
    pub ext_uses: u64,
    pub int_uses: u64,
    pub state_uses: Vec<u64>,
}

impl Tally {
    fn new(states: usize) -> Self {
        Tally {
            state_uses: vec![0; states],
            ..Tally::default()
        }
    }

    fn record(&mut self, t: &TrialOutcome) {
        self.trials += 1;
        let end_errors = u64::from(!t.a_correct) + u64::from(!t.b_correct);
        self.symbol_errors += end_errors;
        if t.cluster_correct {
            self.bc_only_errors += end_errors;
        } else {
            self.cluster_errors += 1;
        }
        match t.region {
            RegionAssignment::ClusteringIndependentExt => self.ext_uses += 1,
            RegionAssignment::ClusteringIndependentInt => self.int_uses += 1,
            RegionAssignment::Dependent(k) => self.state_uses[k] += 1,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.trials += other.trials;
        self.symbol_errors += other.symbol_errors;
        self.cluster_errors += other.cluster_errors;
        self.bc_only_errors += other.bc_only_errors;
        self.ext_uses += other.ext_uses;
        self.int_uses += other.int_uses;
        for (a, b) in self.state_uses.iter_mut().zip(other.state_uses) {
            *a += b;
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub end_to_end_ser: f64,
    pub cluster_error_rate: f64,
    /// End-node error rate restricted to trials with a correct cluster.
    pub bc_only_error_rate: f64,
    pub lambda_ext: f64,
    pub lambda_int: f64,
    /// Usage fraction of each catalog state's region, by state index.
    pub lambda_states: Vec<f64>,
    pub tally: Tally,
}

impl SerPoint {
    pub fn from_tally(snr_db: f64, tally: Tally) -> Self {
        let n = tally.trials as f64;
        SerPoint {
            snr_db,
            trials: tally.trials,
            end_to_end_ser: tally.symbol_errors as f64 / (2.0 * n),
            cluster_error_rate: tally.cluster_errors as f64 / n,
            bc_only_error_rate: tally.bc_only_errors as f64 / (2.0 * n),
            lambda_ext: tally.ext_uses as f64 / n,
            lambda_int: tally.int_uses as f64 / n,
            lambda_states: tally.state_uses.iter().map(|&u| u as f64 / n).collect(),
            tally,
        }
    }

    pub fn lambda_sum(&self) -> f64 {
        self.lambda_ext + self.lambda_int + self.lambda_states.iter().sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SerSweepResult {
    pub constellation: String,
    pub rician_k: f64,
    pub seed: u64,
    pub map_policy: MapPolicy,
    pub relay_bc_size_cap: Option<usize>,
    pub points: Vec<SerPoint>,
}

impl SerSweepResult {
    /// CSV with columns `snr_db, ser, cluster_err, trials`, then the usage
    /// fractions `lambda_ext, lambda_int, lambda_<idx>`.
    pub fn to_csv(&self) -> String {
        let states = self.points.first().map_or(0, |p| p.lambda_states.len());
        let mut out = String::from("snr_db,ser,cluster_err,trials,lambda_ext,lambda_int");
        for k in 0..states {
            let _ = write!(out, ",lambda_{k}");
        }
        out.push('\n');
        for p in &self.points {
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                p.snr_db, p.end_to_end_ser, p.cluster_error_rate, p.trials, p.lambda_ext, p.lambda_int
            );
            for l in &p.lambda_states {
                let _ = write!(out, ",{l}");
            }
            out.push('\n');
        }
        out
    }

    /// SNR at which the SER curve crosses `target`, see [`snr_at_ser`].
    pub fn snr_at_ser(&self, target: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self.points.iter().map(|p| (p.snr_db, p.end_to_end_ser)).collect();
        snr_at_ser(&pts, target)
    }
}

/// First crossing of `target` by `(snr_db, ser)` points sorted by SNR,
/// interpolating `log10(ser)` linearly in dB.
pub fn snr_at_ser(points: &[(f64, f64)], target: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 >= target && y1 <= target && y0 > 0.0 && y1 > 0.0 {
            if y0 == y1 {
                return Some(x0);
            }
            let t = (y0.log10() - target.log10()) / (y0.log10() - y1.log10());
            Some(x0 + t * (x1 - x0))
        } else {
            None
        }
    })
}

pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Runs `trials` exchanges at one SNR, split into fixed RNG streams so the
/// counts do not depend on the number of workers.
pub fn run_point(relay: &Relay, cfg: &SimConfig, snr_index: usize, trials: u64) -> Tally {
    let sigma2 = noise_variance(cfg.snr_db_grid[snr_index]);
    let states = relay.catalog().len();
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(((snr_index as u64) << 40) | chunk);
            let n = CHUNK.min(trials - chunk * CHUNK);
            let mut tally = Tally::new(states);
            for _ in 0..n {
                let t = run_trial(relay, cfg.rician_k, sigma2, cfg.fixed_fades, &mut rng);
                tally.record(&t);
            }
            tally
        })
        .reduce(|| Tally::new(states), Tally::merge)
}

/// Sweep with a prebuilt catalog.
pub fn run_ser_sweep_with(cfg: &SimConfig, catalog: &MapCatalog) -> Result<SerSweepResult> {
    cfg.validate()?;
    let relay = Relay::new(&cfg.constellation, catalog, cfg.map_policy, cfg.relay_bc_size_cap);
    let sweep = || {
        (0..cfg.snr_db_grid.len())
            .map(|s| SerPoint::from_tally(cfg.snr_db_grid[s], run_point(&relay, cfg, s, cfg.trials_per_point)))
            .collect::<Vec<_>>()
    };
    let points = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {w} workers: {e}")))?
            .install(sweep),
        None => sweep(),
    };
    Ok(SerSweepResult {
        constellation: cfg.constellation.label().to_string(),
        rician_k: cfg.rician_k,
        seed: cfg.seed,
        map_policy: cfg.map_policy,
        relay_bc_size_cap: cfg.relay_bc_size_cap,
        points,
    })
}

pub fn run_ser_sweep(cfg: &SimConfig) -> Result<SerSweepResult> {
    cfg.validate()?;
    let (_, catalog) = catalog_for(&cfg.constellation)?;
    run_ser_sweep_with(cfg, &catalog)
}
