//! Batch configuration: a TOML document with one `[[scenario]]` table per job.
//!
//! ```toml
//! seed = 7
//! output_dir = "reports"
//!
//! [[scenario]]
//! id = "decay"
//! kind = "simulate"
//! [scenario.params]
//! alpha = 0.5
//! t_final = 200.0
//! ```

use std::collections::BTreeSet;
use std::path::PathBuf;

use oseen_core::estimates::SweepGrid;
use oseen_core::solver::{GridSpec, SolverMode, WallClosure};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 20240917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    VerifyLemma21,
    VerifyLemma22,
    Constants,
    Decompose,
    Simulate,
    StokesCheck,
    Lemma51,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::VerifyLemma21 => "verify-lemma21",
            Kind::VerifyLemma22 => "verify-lemma22",
            Kind::Constants => "constants",
            Kind::Decompose => "decompose",
            Kind::Simulate => "simulate",
            Kind::StokesCheck => "stokes-check",
            Kind::Lemma51 => "lemma51",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBatch {
    #[serde(default = "default_seed")]
    seed: u64,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    scenario: Vec<RawScenario>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    id: Spanned<String>,
    kind: Kind,
    seed: Option<u64>,
    params: Option<Spanned<toml::Table>>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub scenarios: Vec<Scenario>,
    /// sha256 of the config text, hex encoded.
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub id: String,
    pub kind: Kind,
    /// Scenario seed, or the batch seed when none is given.
    pub seed: u64,
    pub spec: ScenarioSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ScenarioSpec {
    Lemma21(Lemma21Params),
    Lemma22(SweepParams),
    Constants,
    Decompose(DecomposeParams),
    Simulate(SimulateParams),
    StokesCheck(StokesParams),
    Lemma51(Lemma51Params),
}

/// Sweep grid shared by the truncated-vortex estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepParams {
    pub times: Vec<f64>,
    pub rhos: Vec<f64>,
    /// `inf` selects the sup norm.
    pub exponents: Vec<f64>,
    pub test_fields: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        let g = SweepGrid::default();
        Self {
            times: g.times,
            rhos: g.rhos,
            exponents: g.exponents,
            test_fields: g.test_fields,
        }
    }
}

impl SweepParams {
    pub fn grid(&self, seed: u64) -> SweepGrid {
        SweepGrid {
            times: self.times.clone(),
            rhos: self.rhos.clone(),
            exponents: self.exponents.clone(),
            seed,
            test_fields: self.test_fields,
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.times.is_empty() || self.rhos.is_empty() || self.exponents.is_empty() {
            return Err("times, rhos and exponents must be non-empty".into());
        }
        if self.times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err("times must be finite and non-negative".into());
        }
        if self.rhos.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err("rhos must be positive".into());
        }
        if self.exponents.iter().any(|p| !(*p >= 1.0)) {
            return Err("exponents must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lemma21Params {
    pub times: Vec<f64>,
    pub rhos: Vec<f64>,
    pub exponents: Vec<f64>,
    /// Times of the 5 x 5 `(t, s)` grid of the exact identities.
    pub identity_times: Vec<f64>,
}

impl Default for Lemma21Params {
    fn default() -> Self {
        let s = SweepParams::default();
        Self {
            times: s.times,
            rhos: s.rhos,
            exponents: s.exponents,
            identity_times: vec![0.0, 1.0, 3.0, 10.0, 100.0],
        }
    }
}

impl Lemma21Params {
    pub fn sweep(&self) -> SweepParams {
        SweepParams {
            times: self.times.clone(),
            rhos: self.rhos.clone(),
            exponents: self.exponents.clone(),
            ..SweepParams::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecomposeParams {
    /// Multiple of `Ξ(·,0)` in the initial vorticity.
    pub alpha: f64,
    pub rho: f64,
    /// Zero-mean perturbation `A ∂₁ exp(-|x - c|²/a²)`.
    pub dipole_amplitude: f64,
    pub dipole_center: [f64; 2],
    pub dipole_width: f64,
    pub half_width: f64,
    pub h: f64,
    pub q_values: Vec<f64>,
    /// Points of the `BS(Ξ) = Θ₀` round trip.
    pub round_trip_points: usize,
}

impl Default for DecomposeParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            rho: 2.0,
            dipole_amplitude: 1.0,
            dipole_center: [0.5, -0.3],
            dipole_width: 1.0,
            half_width: 12.0,
            h: 0.1,
            q_values: vec![1.2, 1.5, 1.9],
            round_trip_points: 100,
        }
    }
}

/// Initial perturbation given by its streamfunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "shape", rename_all = "kebab-case")]
pub enum InitialData {
    Zero,
    /// Compact dipole `A (x₂ - c₂) bump(|x - c|/a)`.
    Dipole {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "dipole_center")]
        center: [f64; 2],
        #[serde(default = "dipole_radius")]
        radius: f64,
        /// Rescales the amplitude so that `‖v₀‖_{L²}` takes this value.
        target_l2: Option<f64>,
    },
    /// `f(r) sin θ` with a `|x|^{-1.9}` velocity tail cut off beyond `taper`.
    SlowTail {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "slow_tail_taper")]
        taper: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn dipole_center() -> [f64; 2] {
    [3.0, 0.0]
}

fn dipole_radius() -> f64 {
    1.5
}

fn slow_tail_taper() -> f64 {
    40.0
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Dipole {
            amplitude: 1.0,
            center: dipole_center(),
            radius: dipole_radius(),
            target_l2: None,
        }
    }
}

/// Optional overrides of the default mesh.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub r_outer: Option<f64>,
    pub n_r: Option<usize>,
    pub n_theta: Option<usize>,
    pub stretching: Option<f64>,
}

impl GridParams {
    pub fn spec(&self, rho: f64, t_final: f64) -> GridSpec {
        let d = GridSpec::for_run(rho, t_final);
        GridSpec::new(
            self.r_outer.unwrap_or(d.r_outer),
            self.n_r.unwrap_or(d.n_r),
            self.n_theta.unwrap_or(d.n_theta),
        )
        .with_stretching(self.stretching.unwrap_or(d.stretching))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub alpha: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_mode")]
    pub mode: SolverMode,
    #[serde(default = "default_closure")]
    pub closure: WallClosure,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default = "default_outputs")]
    pub outputs: usize,
    #[serde(default = "default_first_output")]
    pub first_output: f64,
    /// Decay-fit window; defaults to the last decade with `t >= 20`.
    pub fit_window: Option<[f64; 2]>,
    /// Target `q` of the decay statement, recorded as `μ = 1/q - 1/2`.
    pub q: Option<f64>,
    pub max_decay_exponent: Option<f64>,
    pub max_gradient_exponent: Option<f64>,
    pub min_r_squared: Option<f64>,
    /// Relative tolerance of the energy equality; only for `alpha = 0`.
    pub energy_tolerance: Option<f64>,
    #[serde(default)]
    pub log_growth: bool,
    /// Check the polynomial Gronwall envelope with measured `b_∞`, `κ₂`.
    #[serde(default)]
    pub gronwall: bool,
    pub b_inf: Option<f64>,
    pub kappa2: Option<f64>,
    #[serde(default = "default_slip_tolerance")]
    pub slip_tolerance: f64,
}

fn default_rho() -> f64 {
    2.0
}

fn default_dt() -> f64 {
    0.05
}

fn default_mode() -> SolverMode {
    SolverMode::Full
}

fn default_closure() -> WallClosure {
    WallClosure::InfluenceMatrix
}

fn default_outputs() -> usize {
    48
}

fn default_first_output() -> f64 {
    0.1
}

fn default_slip_tolerance() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StokesParams {
    pub q: f64,
    #[serde(default = "default_stokes_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub grid: GridParams,
    pub initial: Option<InitialData>,
    /// Whole-plane reference for `q < 2`.
    #[serde(default)]
    pub reference: ReferenceParams,
}

fn default_stokes_times() -> Vec<f64> {
    (0..16).map(|k| 10f64.powf(2.0 * k as f64 / 15.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceParams {
    pub enabled: bool,
    pub box_size: f64,
    pub n: usize,
}

impl Default for ReferenceParams {
    fn default() -> Self {
        Self {
            enabled: true,
            box_size: 160.0,
            n: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lemma51Params {
    pub q_values: Vec<f64>,
    pub family_size: usize,
    pub n: usize,
    pub support: f64,
    /// Largest accepted relative change of the quotient under dilation.
    pub dilation_tolerance: f64,
}

impl Default for Lemma51Params {
    fn default() -> Self {
        Self {
            q_values: vec![1.2, 1.5, 1.9],
            family_size: 10,
            n: 128,
            support: 1.0,
            dilation_tolerance: 1e-3,
        }
    }
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn parse_params<T: serde::de::DeserializeOwned + Default>(
    params: Option<Spanned<toml::Table>>,
    text: &str,
    id: &str,
) -> Result<T> {
    match params {
        None => Ok(T::default()),
        Some(p) => parse_required(Some(p), text, id),
    }
}

fn parse_required<T: serde::de::DeserializeOwned>(
    params: Option<Spanned<toml::Table>>,
    text: &str,
    id: &str,
) -> Result<T> {
    let Some(p) = params else {
        return Err(Error::Config(format!("scenario `{id}`: missing [scenario.params]")));
    };
    let line = line_of(text, p.span().start);
    toml::Value::Table(p.into_inner())
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(format!("scenario `{id}` params (line {line}): {}", e.message())))
}

fn invalid(id: &str, line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("scenario `{id}` (line {line}): {msg}"))
}

fn validate_initial(init: &InitialData) -> std::result::Result<(), String> {
    match init {
        InitialData::Zero => Ok(()),
        InitialData::Dipole { radius, target_l2, .. } => {
            if !(*radius > 0.0) {
                return Err("dipole radius must be positive".into());
            }
            if target_l2.is_some_and(|v| !(v > 0.0)) {
                return Err("target_l2 must be positive".into());
            }
            Ok(())
        }
        InitialData::SlowTail { taper, .. } => {
            if !(*taper > 3.0) {
                return Err("taper must exceed 3".into());
            }
            Ok(())
        }
    }
}

impl BatchConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawBatch = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut seen = BTreeSet::new();
        let mut scenarios = Vec::with_capacity(raw.scenario.len());
        for s in raw.scenario {
            let line = line_of(text, s.id.span().start);
            let id = s.id.into_inner();
            if id.is_empty() || id.contains(['/', '\\']) {
                return Err(invalid(&id, line, "id must be non-empty and free of path separators"));
            }
            if !seen.insert(id.clone()) {
                return Err(invalid(&id, line, "duplicate scenario id"));
            }
            let spec = match s.kind {
                Kind::VerifyLemma21 => {
                    let p: Lemma21Params = parse_params(s.params, text, &id)?;
                    p.sweep().validate().map_err(|m| invalid(&id, line, m))?;
                    if p.identity_times.len() < 2 {
                        return Err(invalid(&id, line, "identity_times needs two or more times"));
                    }
                    ScenarioSpec::Lemma21(p)
                }
                Kind::VerifyLemma22 => {
                    let p: SweepParams = parse_params(s.params, text, &id)?;
                    p.validate().map_err(|m| invalid(&id, line, m))?;
                    ScenarioSpec::Lemma22(p)
                }
                Kind::Constants => {
                    if s.params.as_ref().is_some_and(|p| !p.get_ref().is_empty()) {
                        return Err(invalid(&id, line, "constants takes no params"));
                    }
                    ScenarioSpec::Constants
                }
                Kind::Decompose => {
                    let p: DecomposeParams = parse_params(s.params, text, &id)?;
                    if !(p.h > 0.0) || !(p.half_width > 4.0 * p.rho) || !(p.dipole_width > 0.0) {
                        return Err(invalid(
                            &id,
                            line,
                            "need h > 0, dipole_width > 0 and half_width > 4 rho",
                        ));
                    }
                    ScenarioSpec::Decompose(p)
                }
                Kind::Simulate => {
                    let p: SimulateParams = parse_required(s.params, text, &id)?;
                    if !(p.t_final > p.first_output) || !(p.first_output > 0.0) || p.outputs < 2 {
                        return Err(invalid(&id, line, "need 0 < first_output < t_final and outputs >= 2"));
                    }
                    if p.energy_tolerance.is_some() && p.alpha != 0.0 {
                        return Err(invalid(&id, line, "energy_tolerance applies to alpha = 0 only"));
                    }
                    validate_initial(&p.initial).map_err(|m| invalid(&id, line, m))?;
                    ScenarioSpec::Simulate(p)
                }
                Kind::StokesCheck => {
                    let p: StokesParams = parse_required(s.params, text, &id)?;
                    if !(p.q > 1.0 && p.q <= 2.0) {
                        return Err(invalid(&id, line, "q must lie in (1, 2]"));
                    }
                    if p.times.is_empty() || p.times.windows(2).any(|w| !(w[1] > w[0])) || !(p.times[0] > 0.0) {
                        return Err(invalid(&id, line, "times must be positive and increasing"));
                    }
                    if let Some(init) = &p.initial {
                        validate_initial(init).map_err(|m| invalid(&id, line, m))?;
                    }
                    ScenarioSpec::StokesCheck(p)
                }
                Kind::Lemma51 => {
                    let p: Lemma51Params = parse_params(s.params, text, &id)?;
                    if p.q_values.iter().any(|q| !(*q > 1.0 && *q < 2.0)) || p.family_size == 0 {
                        return Err(invalid(&id, line, "q_values must lie in (1, 2) and family_size > 0"));
                    }
                    ScenarioSpec::Lemma51(p)
                }
            };
            scenarios.push(Scenario {
                id,
                kind: s.kind,
                seed: s.seed.unwrap_or(raw.seed),
                spec,
            });
        }
        Ok(Self {
            seed: raw.seed,
            output_dir: raw.output_dir,
            scenarios,
            hash: config_hash(text),
        })
    }
}

/// Hex sha256 of the config text.
pub fn config_hash(text: &str) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_has_no_scenarios() {
        let c = BatchConfig::parse("").unwrap();
        assert!(c.scenarios.is_empty());
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.hash.len(), 64);
    }

    #[test]
    fn defaults_fill_missing_params() {
        let c = BatchConfig::parse("seed = 3\n[[scenario]]\nid = \"a\"\nkind = \"lemma51\"\n").unwrap();
        assert_eq!(c.scenarios[0].seed, 3);
        assert_eq!(c.scenarios[0].spec, ScenarioSpec::Lemma51(Lemma51Params::default()));
    }

    #[test]
    fn infinite_exponent_parses() {
        let text = "[[scenario]]\nid = \"s\"\nkind = \"verify-lemma22\"\n[scenario.params]\nexponents = [2.0, inf]\n";
        let c = BatchConfig::parse(text).unwrap();
        match &c.scenarios[0].spec {
            ScenarioSpec::Lemma22(p) => assert!(p.exponents[1].is_infinite()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_reported_with_line() {
        let text = "[[scenario]]\nid = \"s\"\nkind = \"simulate\"\n[scenario.params]\nalpha = 0.1\nt_final = 10.0\nalhpa = 2\n";
        let msg = BatchConfig::parse(text).unwrap_err().to_string();
        assert!(msg.contains("alhpa") && msg.contains("line 4"), "{msg}");
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let text = "[[scenario]]\nid = \"a\"\nkind = \"constants\"\n[[scenario]]\nid = \"a\"\nkind = \"constants\"\n";
        let msg = BatchConfig::parse(text).unwrap_err().to_string();
        assert!(msg.contains("duplicate") && msg.contains("line 5"), "{msg}");
    }

    #[test]
    fn unknown_kind_is_reported() {
        let msg = BatchConfig::parse("[[scenario]]\nid = \"a\"\nkind = \"nope\"\n")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn initial_data_shapes_parse() {
        let text = "[[scenario]]\nid = \"s\"\nkind = \"stokes-check\"\n[scenario.params]\nq = 1.5\n[scenario.params.initial]\nshape = \"slow-tail\"\ntaper = 30.0\n";
        let c = BatchConfig::parse(text).unwrap();
        match &c.scenarios[0].spec {
            ScenarioSpec::StokesCheck(p) => assert_eq!(
                p.initial,
                Some(InitialData::SlowTail {
                    amplitude: 1.0,
                    taper: 30.0
                })
            ),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_depends_on_text() {
        assert_ne!(config_hash("a"), config_hash("b"));
        assert_eq!(config_hash("a"), config_hash("a"));
    }
}
