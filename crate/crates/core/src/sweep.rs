//! Scenario files, sweep orchestration and report emission.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! [turbulence]
//! preset = "weak"              # or: alpha = 8.1, beta = 4.0
//!                              # or: [turbulence.physical] cn2, wavelength, aperture, path_length
//! [geometry.sr]                # LinkGeometry fields, all optional
//! [geometry.rd]
//! [noise]                      # NoiseEnvironment overrides
//! [relay]
//! spectral_efficiency = 1.0
//! derive_from_physics = false  # γ̄ from geometry → noise (required for distance sweeps)
//! transmit_power = 1.0         # W, when derived from physics
//! snr_sr_db = 20.0             # optional: hold one hop fixed
//! [sweep]
//! axis = "snr_db"              # or "distance_m" (R–D distance)
//! points = [0.0, 10.0, 20.0]   # or start/stop/step
//! [sim]
//! sample_count = 1000000
//! master_seed = 1
//! modes = ["min"]
//! [report]
//! out_dir = "out"
//! format = "csv"
//! discrepancy = true
//! ```
//!
//! Every grid point uses the same master seed (common random numbers), so
//! Monte Carlo curves inherit the monotonicity of the underlying draws.

use crate::analytic::{
    discrepancy_report, ergodic_capacity_paper, ergodic_capacity_quadrature, outage_probability,
    DiscrepancyGrid, DiscrepancyRow, Evaluator, RelayScenario, SnrMode,
};
use crate::channel::{AvgSnr, LinkGeometry, PhysicalTurbulence, Regime, TurbulenceParams};
use crate::montecarlo::{simulate, SimConfig, DEFAULT_SAMPLES};
use crate::noise::{link_budget, NoiseEnvironment};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;
use toml::Spanned;

pub const SCHEMA_VERSION: u32 = 1;

/// Largest accepted `sim.sample_count`.
pub const MAX_SAMPLES: u64 = 100_000_000;

pub const CSV_HEADER: [&str; 14] = [
    "sweep_value",
    "alpha",
    "beta",
    "snr_sr_db",
    "snr_rd_db",
    "outage_paper",
    "outage_ref",
    "outage_mc",
    "outage_mc_se",
    "cap_paper",
    "cap_quad",
    "cap_mc",
    "cap_mc_se",
    "status",
];

pub const DISCREPANCY_HEADER: [&str; 7] = [
    "gamma",
    "regime",
    "metric",
    "paper_value",
    "reference_value",
    "abs_dev",
    "rel_dev",
];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{}[{section}] {message}", line_prefix(*.line))]
    Invalid {
        section: String,
        line: Option<usize>,
        message: String,
    },

    #[error("{}{message}", line_prefix(*.line))]
    Syntax { line: Option<usize>, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Model(#[from] crate::Error),
}

fn line_prefix(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    turbulence: Spanned<RawTurbulence>,
    #[serde(default)]
    geometry: RawGeometry,
    #[serde(default)]
    noise: Option<Spanned<NoiseEnvironment>>,
    #[serde(default)]
    relay: Option<Spanned<RawRelay>>,
    sweep: Spanned<RawSweep>,
    #[serde(default)]
    sim: Option<Spanned<RawSim>>,
    #[serde(default)]
    report: Option<Spanned<RawReport>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTurbulence {
    preset: Option<String>,
    alpha: Option<f64>,
    beta: Option<f64>,
    physical: Option<PhysicalTurbulence>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    #[serde(default)]
    sr: Option<Spanned<LinkGeometry>>,
    #[serde(default)]
    rd: Option<Spanned<LinkGeometry>>,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawRelay {
    spectral_efficiency: f64,
    derive_from_physics: bool,
    transmit_power: f64,
    snr_sr_db: Option<f64>,
    snr_rd_db: Option<f64>,
}

impl Default for RawRelay {
    fn default() -> Self {
        Self {
            spectral_efficiency: 1.0,
            derive_from_physics: false,
            transmit_power: 1.0,
            snr_sr_db: None,
            snr_rd_db: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: SweepAxis,
    points: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSim {
    sample_count: u64,
    master_seed: u64,
    modes: Vec<SnrMode>,
}

impl Default for RawSim {
    fn default() -> Self {
        Self {
            sample_count: DEFAULT_SAMPLES,
            master_seed: 1,
            modes: vec![SnrMode::Min],
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawReport {
    out_dir: PathBuf,
    format: Format,
    discrepancy: bool,
}

impl Default for RawReport {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("out"),
            format: Format::Csv,
            discrepancy: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SnrDb,
    DistanceM,
}

impl SweepAxis {
    pub fn default_points(self) -> Vec<f64> {
        match self {
            SweepAxis::SnrDb => (0..=20).map(|i| 2.0 * i as f64).collect(),
            SweepAxis::DistanceM => vec![5.0, 10.0, 20.0, 40.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaySettings {
    pub spectral_efficiency: f64,
    pub derive_from_physics: bool,
    pub transmit_power: f64,
    pub snr_sr_db: Option<f64>,
    pub snr_rd_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub sample_count: u64,
    pub master_seed: u64,
    pub modes: Vec<SnrMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportSettings {
    pub out_dir: PathBuf,
    pub format: Format,
    pub discrepancy: bool,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub turbulence: TurbulenceParams,
    pub geometry_sr: LinkGeometry,
    pub geometry_rd: LinkGeometry,
    pub noise: NoiseEnvironment,
    pub relay: RelaySettings,
    pub axis: SweepAxis,
    pub points: Vec<f64>,
    pub sim: SimSettings,
    pub report: ReportSettings,
}

struct Locator<'a>(&'a str);

impl Locator<'_> {
    fn line(&self, offset: usize) -> usize {
        self.0[..offset.min(self.0.len())].matches('\n').count() + 1
    }

    fn invalid<T>(&self, section: &str, span: Option<std::ops::Range<usize>>, message: impl Into<String>) -> Result<T, ScenarioError> {
        Err(ScenarioError::Invalid {
            section: section.to_string(),
            line: span.map(|s| self.line(s.start)),
            message: message.into(),
        })
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let loc = Locator(text);
        let raw: RawScenario = toml::from_str(text).map_err(|e| ScenarioError::Syntax {
            line: e.span().map(|s| loc.line(s.start)),
            message: e.message().trim().to_string(),
        })?;

        let tspan = Some(raw.turbulence.span());
        let t = raw.turbulence.into_inner();
        let chosen = [t.preset.is_some(), t.alpha.is_some() || t.beta.is_some(), t.physical.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        if chosen != 1 {
            return loc.invalid(
                "turbulence",
                tspan,
                "give exactly one of `preset`, `alpha`/`beta`, or a `physical` table",
            );
        }
        let turbulence = if let Some(name) = &t.preset {
            match Regime::from_name(name) {
                Some(r) => r.params(),
                None => {
                    return loc.invalid(
                        "turbulence",
                        tspan,
                        format!("unknown preset `{name}` (expected weak, moderate or strong)"),
                    )
                }
            }
        } else if let Some(phys) = t.physical {
            match TurbulenceParams::from_physics(phys) {
                Ok((p, _)) => p,
                Err(e) => return loc.invalid("turbulence.physical", tspan, e.to_string()),
            }
        } else {
            let (Some(a), Some(b)) = (t.alpha, t.beta) else {
                return loc.invalid("turbulence", tspan, "`alpha` and `beta` must be given together");
            };
            match TurbulenceParams::new(a, b) {
                Ok(p) => p,
                Err(e) => return loc.invalid("turbulence", tspan, e.to_string()),
            }
        };

        let mut geoms = [LinkGeometry::default(); 2];
        for (slot, (name, g)) in geoms
            .iter_mut()
            .zip([("geometry.sr", raw.geometry.sr), ("geometry.rd", raw.geometry.rd)])
        {
            if let Some(g) = g {
                let span = g.span();
                let g = g.into_inner();
                if let Err(e) = g.validate() {
                    return loc.invalid(name, Some(span), e.to_string());
                }
                *slot = g;
            }
        }

        let (noise, nspan) = match raw.noise {
            Some(n) => (*n.get_ref(), Some(n.span())),
            None => (NoiseEnvironment::default(), None),
        };
        if let Err(e) = noise.validate() {
            return loc.invalid("noise", nspan, e.to_string());
        }

        let (relay, rspan) = match raw.relay {
            Some(r) => {
                let span = r.span();
                (r.into_inner(), Some(span))
            }
            None => (RawRelay::default(), None),
        };
        if !(relay.spectral_efficiency > 0.0 && relay.spectral_efficiency.is_finite()) {
            return loc.invalid("relay", rspan, "`spectral_efficiency` must be positive");
        }
        if !(relay.transmit_power > 0.0 && relay.transmit_power.is_finite()) {
            return loc.invalid("relay", rspan, "`transmit_power` must be positive");
        }
        for v in [relay.snr_sr_db, relay.snr_rd_db].into_iter().flatten() {
            if !v.is_finite() {
                return loc.invalid("relay", rspan, "SNR overrides must be finite");
            }
        }

        let sspan = Some(raw.sweep.span());
        let sw = raw.sweep.into_inner();
        let points = match (&sw.points, sw.start, sw.stop, sw.step) {
            (Some(p), None, None, None) => p.clone(),
            (None, Some(a), Some(b), Some(h)) => {
                if !(h > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
                    return loc.invalid("sweep", sspan, "need start <= stop and step > 0");
                }
                let n = ((b - a) / h + 1e-9).floor() as usize;
                if n > 100_000 {
                    return loc.invalid("sweep", sspan, "grid too large");
                }
                (0..=n).map(|i| a + i as f64 * h).collect()
            }
            (None, None, None, None) => sw.axis.default_points(),
            _ => return loc.invalid("sweep", sspan, "give either `points` or all of `start`, `stop`, `step`"),
        };
        if points.is_empty() {
            return loc.invalid("sweep", sspan, "grid is empty");
        }
        if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[1] <= w[0]) {
            return loc.invalid("sweep", sspan, "grid must be finite and strictly increasing");
        }
        match sw.axis {
            SweepAxis::SnrDb => {
                if relay.derive_from_physics {
                    return loc.invalid("relay", rspan, "`derive_from_physics` conflicts with an snr_db sweep");
                }
                if relay.snr_sr_db.is_some() && relay.snr_rd_db.is_some() {
                    return loc.invalid("relay", rspan, "both hop SNRs fixed; nothing left to sweep");
                }
            }
            SweepAxis::DistanceM => {
                if !relay.derive_from_physics {
                    return loc.invalid("relay", rspan, "a distance_m sweep needs `derive_from_physics = true`");
                }
                if relay.snr_rd_db.is_some() {
                    return loc.invalid("relay", rspan, "`snr_rd_db` conflicts with a distance_m sweep");
                }
                if points[0] <= 0.0 {
                    return loc.invalid("sweep", sspan, "distances must be positive");
                }
            }
        }

        let (sim, simspan) = match raw.sim {
            Some(s) => {
                let span = s.span();
                (s.into_inner(), Some(span))
            }
            None => (RawSim::default(), None),
        };
        if sim.sample_count == 0 || sim.sample_count > MAX_SAMPLES {
            return loc.invalid("sim", simspan, format!("`sample_count` must lie in 1..={MAX_SAMPLES}"));
        }
        if sim.modes.is_empty() {
            return loc.invalid("sim", simspan, "`modes` is empty");
        }
        let mut seen = Vec::new();
        for m in &sim.modes {
            if seen.contains(m) {
                return loc.invalid("sim", simspan, format!("mode `{m}` listed twice"));
            }
            seen.push(*m);
        }

        let report = raw.report.map(Spanned::into_inner).unwrap_or_default();

        Ok(Scenario {
            turbulence,
            geometry_sr: geoms[0],
            geometry_rd: geoms[1],
            noise,
            relay: RelaySettings {
                spectral_efficiency: relay.spectral_efficiency,
                derive_from_physics: relay.derive_from_physics,
                transmit_power: relay.transmit_power,
                snr_sr_db: relay.snr_sr_db,
                snr_rd_db: relay.snr_rd_db,
            },
            axis: sw.axis,
            points,
            sim: SimSettings {
                sample_count: sim.sample_count,
                master_seed: sim.master_seed,
                modes: sim.modes,
            },
            report: ReportSettings {
                out_dir: report.out_dir,
                format: report.format,
                discrepancy: report.discrepancy,
            },
        })
    }

    /// Average SNRs (S→R, R→D) at one grid value.
    pub fn point_snrs(&self, value: f64) -> crate::Result<(AvgSnr, AvgSnr)> {
        let derive = |g: &LinkGeometry| {
            link_budget(g, &self.noise, self.relay.transmit_power).map(|b| b.avg_snr)
        };
        let sr = match (self.relay.snr_sr_db, self.axis) {
            (Some(db), _) => AvgSnr::from_db(db)?,
            (None, SweepAxis::SnrDb) => AvgSnr::from_db(value)?,
            (None, SweepAxis::DistanceM) => derive(&self.geometry_sr)?,
        };
        let rd = match (self.relay.snr_rd_db, self.axis) {
            (Some(db), _) => AvgSnr::from_db(db)?,
            (None, SweepAxis::SnrDb) => AvgSnr::from_db(value)?,
            (None, SweepAxis::DistanceM) => derive(&self.geometry_rd.with_distance(value))?,
        };
        Ok((sr, rd))
    }

    pub fn relay_scenario(&self, value: f64) -> crate::Result<RelayScenario> {
        let (sr, rd) = self.point_snrs(value)?;
        RelayScenario::shared(self.turbulence, sr, rd, self.relay.spectral_efficiency)
    }
}

/// A report cell: a number, or the marker of the failure that replaced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Value(f64),
    Marker(&'static str),
}

impl Cell {
    pub fn value(self) -> Option<f64> {
        match self {
            Cell::Value(v) => Some(v),
            Cell::Marker(_) => None,
        }
    }

    fn render(self) -> String {
        match self {
            Cell::Value(v) => format_number(v),
            Cell::Marker(m) => m.to_string(),
        }
    }
}

impl From<crate::Result<f64>> for Cell {
    fn from(r: crate::Result<f64>) -> Self {
        match r {
            Ok(v) => Cell::Value(v),
            Err(e) => Cell::Marker(e.marker()),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Cell::Value(v) if v.is_finite() => s.serialize_f64(v),
            Cell::Value(v) => s.serialize_str(&format_number(v)),
            Cell::Marker(m) => s.serialize_str(m),
        }
    }
}

/// Shortest round-trip representation; scientific outside [1e-4, 1e6).
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v == 0.0 || (1e-4..1e6).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub alpha: f64,
    pub beta: f64,
    pub snr_sr_db: Cell,
    pub snr_rd_db: Cell,
    pub outage_paper: Cell,
    pub outage_ref: Cell,
    pub outage_mc: Cell,
    pub outage_mc_se: Cell,
    pub cap_paper: Cell,
    pub cap_quad: Cell,
    pub cap_mc: Cell,
    pub cap_mc_se: Cell,
    pub status: String,
}

impl SweepRow {
    fn record(&self) -> Vec<String> {
        vec![
            format_number(self.sweep_value),
            format_number(self.alpha),
            format_number(self.beta),
            self.snr_sr_db.render(),
            self.snr_rd_db.render(),
            self.outage_paper.render(),
            self.outage_ref.render(),
            self.outage_mc.render(),
            self.outage_mc_se.render(),
            self.cap_paper.render(),
            self.cap_quad.render(),
            self.cap_mc.render(),
            self.cap_mc_se.render(),
            self.status.clone(),
        ]
    }
}

/// One mode's table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub mode: SnrMode,
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tables: Vec<SweepTable>,
    pub discrepancy: Vec<DiscrepancyRow>,
}

struct Analytic {
    outage_paper: Cell,
    outage_ref: Cell,
    cap_paper: Cell,
    cap_quad: Cell,
}

fn status_of(cells: &[(&str, Cell)]) -> String {
    cells
        .iter()
        .filter_map(|(name, c)| match c {
            Cell::Marker(m) => Some(format!("{name}:{m}")),
            Cell::Value(_) => None,
        })
        .collect::<Vec<_>>()
        .join(";")
}

/// Evaluate every grid point for every mode.
///
/// Numeric failures mark the affected cells and the status column; they
/// never abort the sweep.
pub fn run_sweep(scen: &Scenario, workers: usize) -> Result<RunReport, ScenarioError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| crate::Error::InvalidParameter(format!("thread pool: {e}")))?;
    let modes = &scen.sim.modes;
    let points: Vec<(f64, crate::Result<RelayScenario>)> =
        scen.points.iter().map(|&v| (v, scen.relay_scenario(v))).collect();

    // closed forms and quadrature: independent per point
    let analytic: Vec<Vec<Analytic>> = pool.install(|| {
        points
            .par_iter()
            .map(|(_, rs)| {
                let paper_outage: Cell = rs.as_ref().map_err(Clone::clone).and_then(|s| outage_probability(s, Evaluator::Paper)).into();
                let paper_cap: Cell = rs.as_ref().map_err(Clone::clone).and_then(ergodic_capacity_paper).into();
                modes
                    .iter()
                    .map(|&mode| Analytic {
                        outage_paper: paper_outage,
                        outage_ref: rs
                            .as_ref()
                            .map_err(Clone::clone)
                            .and_then(|s| outage_probability(s, Evaluator::Reference(mode)))
                            .into(),
                        cap_paper: paper_cap,
                        cap_quad: rs
                            .as_ref()
                            .map_err(Clone::clone)
                            .and_then(|s| ergodic_capacity_quadrature(s, mode).map(|c| c.value))
                            .into(),
                    })
                    .collect()
            })
            .collect()
    });

    let mut tables: Vec<SweepTable> = modes
        .iter()
        .map(|&mode| SweepTable {
            mode,
            axis: scen.axis,
            rows: Vec::with_capacity(points.len()),
        })
        .collect();
    for ((value, rs), an) in points.iter().zip(analytic) {
        let mc = rs.as_ref().map_err(Clone::clone).and_then(|s| {
            let cfg = SimConfig {
                scenario: *s,
                sample_count: scen.sim.sample_count,
                master_seed: scen.sim.master_seed,
                worker_count: workers.max(1),
            };
            simulate(&cfg, &[s.outage_threshold()], modes)
        });
        for (k, (table, a)) in tables.iter_mut().zip(an).enumerate() {
            let (snr_sr, snr_rd) = match rs {
                Ok(s) => (Cell::Value(s.avg_sr.db()), Cell::Value(s.avg_rd.db())),
                Err(e) => (Cell::Marker(e.marker()), Cell::Marker(e.marker())),
            };
            let (om, ose, cm, cse) = match &mc {
                Ok(summary) => {
                    let m = &summary[k];
                    (
                        Cell::Value(m.outage[0].estimate),
                        Cell::Value(m.outage[0].std_error),
                        Cell::Value(m.capacity.estimate),
                        Cell::Value(m.capacity.std_error),
                    )
                }
                Err(e) => {
                    let c = Cell::Marker(e.marker());
                    (c, c, c, c)
                }
            };
            let status = status_of(&[
                ("snr", snr_sr),
                ("outage_paper", a.outage_paper),
                ("outage_ref", a.outage_ref),
                ("outage_mc", om),
                ("cap_paper", a.cap_paper),
                ("cap_quad", a.cap_quad),
                ("cap_mc", cm),
            ]);
            table.rows.push(SweepRow {
                sweep_value: *value,
                alpha: scen.turbulence.alpha,
                beta: scen.turbulence.beta,
                snr_sr_db: snr_sr,
                snr_rd_db: snr_rd,
                outage_paper: a.outage_paper,
                outage_ref: a.outage_ref,
                outage_mc: om,
                outage_mc_se: ose,
                cap_paper: a.cap_paper,
                cap_quad: a.cap_quad,
                cap_mc: cm,
                cap_mc_se: cse,
                status,
            });
        }
    }

    let discrepancy = if scen.report.discrepancy {
        pool.install(|| discrepancy_report(&DiscrepancyGrid::default()))?
    } else {
        Vec::new()
    };
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        tables,
        discrepancy,
    })
}

fn csv_text(header: &[&str], records: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    // writing into memory cannot fail
    w.write_record(header).expect("in-memory csv");
    for r in records {
        w.write_record(&r).expect("in-memory csv");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8");
    let mut out = String::new();
    writeln!(out, "# schema_version={SCHEMA_VERSION}").unwrap();
    out.push_str(&body);
    out
}

/// Sweep table as CSV text, schema comment first.
pub fn sweep_csv(table: &SweepTable) -> String {
    csv_text(&CSV_HEADER, table.rows.iter().map(SweepRow::record))
}

fn opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

fn cell_text(c: &std::result::Result<f64, &'static str>) -> String {
    match c {
        Ok(v) => format_number(*v),
        Err(m) => m.to_string(),
    }
}

/// Discrepancy rows as CSV text.
pub fn discrepancy_csv(rows: &[DiscrepancyRow]) -> String {
    csv_text(
        &DISCREPANCY_HEADER,
        rows.iter().map(|r| {
            vec![
                opt(r.gamma),
                r.regime.clone(),
                r.metric.to_string(),
                cell_text(&r.paper_value),
                cell_text(&r.reference_value),
                opt(r.abs_dev()),
                opt(r.rel_dev()),
            ]
        }),
    )
}

#[derive(Serialize)]
struct JsonDiscrepancy<'a> {
    gamma: Option<f64>,
    regime: &'a str,
    metric: &'a str,
    paper_value: Cell,
    reference_value: Cell,
    abs_dev: Option<f64>,
    rel_dev: Option<f64>,
}

fn as_cell(c: &std::result::Result<f64, &'static str>) -> Cell {
    match c {
        Ok(v) => Cell::Value(*v),
        Err(m) => Cell::Marker(m),
    }
}

/// The whole report as JSON text.
pub fn report_json(report: &RunReport) -> String {
    let discrepancy: Vec<JsonDiscrepancy> = report
        .discrepancy
        .iter()
        .map(|r| JsonDiscrepancy {
            gamma: r.gamma,
            regime: &r.regime,
            metric: r.metric,
            paper_value: as_cell(&r.paper_value),
            reference_value: as_cell(&r.reference_value),
            abs_dev: r.abs_dev().filter(|v| v.is_finite()),
            rel_dev: r.rel_dev().filter(|v| v.is_finite()),
        })
        .collect();
    let doc = serde_json::json!({
        "schema_version": report.schema_version,
        "tables": report.tables,
        "discrepancy": discrepancy,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("report is serialisable");
    s.push('\n');
    s
}

/// Write the report into `dir`; returns the files written.
///
/// CSV: `sweep_<mode>.csv` per mode plus `discrepancy.csv`.
/// JSON: a single `report.json`.
pub fn emit_report(report: &RunReport, dir: &Path, format: Format) -> Result<Vec<PathBuf>, ScenarioError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ScenarioError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    match format {
        Format::Csv => {
            for t in &report.tables {
                files.push((dir.join(format!("sweep_{}.csv", t.mode)), sweep_csv(t)));
            }
            if !report.discrepancy.is_empty() {
                files.push((dir.join("discrepancy.csv"), discrepancy_csv(&report.discrepancy)));
            }
        }
        Format::Json => files.push((dir.join("report.json"), report_json(report))),
    }
    let mut written = Vec::new();
    for (path, text) in files {
        std::fs::write(&path, text).map_err(io(&path))?;
        written.push(path);
    }
    Ok(written)
}
