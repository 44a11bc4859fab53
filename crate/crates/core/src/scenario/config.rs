use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dynamics::{DynamicsParams, ForceSource};
use crate::error::HarnessError;
use crate::maze::{BifurcationParams, MazePhysics, RingMazeParams};

#[derive(Clone, Debug, PartialEq)]
pub enum MazeSource {
    File(PathBuf),
    Ring(RingMazeParams),
    Bifurcation(BifurcationParams),
    Straight {
        length_mm: f64,
        channel_width_mm: f64,
        physics: MazePhysics,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Artifact {
    /// potential.csv, current.csv
    Fields,
    /// potential.pgm, joule.pgm
    Heatmap,
    /// trajectory.csv
    Trajectory,
    /// path.csv
    Oracle,
    /// comparison.json
    Comparison,
    /// report.json
    Report,
}

impl Artifact {
    pub const ALL: [Artifact; 6] = [
        Artifact::Fields,
        Artifact::Heatmap,
        Artifact::Trajectory,
        Artifact::Oracle,
        Artifact::Comparison,
        Artifact::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Artifact::Fields => "fields",
            Artifact::Heatmap => "heatmap",
            Artifact::Trajectory => "trajectory",
            Artifact::Oracle => "oracle",
            Artifact::Comparison => "comparison",
            Artifact::Report => "report",
        }
    }
}

impl FromStr for Artifact {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Artifact::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown artifact `{s}`"))
    }
}

/// One scenario: where the maze comes from, how to solve and simulate it,
/// and what to write.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    /// Seeds the ring layout and the force noise.
    pub seed: u64,
    pub maze: MazeSource,
    /// Replace wall cells at convex corners with coated cells.
    pub coated_corners: bool,
    pub solver_tol: Option<f64>,
    pub solver_max_iter: Option<usize>,
    pub dynamics: DynamicsParams,
    pub out_dir: Option<PathBuf>,
    pub artifacts: BTreeSet<Artifact>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "scenario".into(),
            seed: 7,
            maze: MazeSource::Ring(RingMazeParams::new(3, 70.0, 4.0, 7)),
            coated_corners: false,
            solver_tol: None,
            solver_max_iter: None,
            dynamics: DynamicsParams::default(),
            out_dir: None,
            artifacts: Artifact::ALL.into_iter().collect(),
        }
    }
}

fn fmt_opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref()
        .map_or_else(|| "auto".to_string(), |v| v.to_string())
}

fn physics_entries(p: &MazePhysics, out: &mut Vec<(String, String)>) {
    out.push(("cell_size_mm".into(), p.cell_size_mm.to_string()));
    out.push(("sigma_electrolyte".into(), p.sigma_electrolyte.to_string()));
    out.push(("sigma_wall".into(), p.sigma_wall.to_string()));
    out.push(("sigma_coating".into(), p.sigma_coating.to_string()));
    out.push(("voltage".into(), p.applied_voltage.to_string()));
}

impl ScenarioConfig {
    /// Same scenario with a different seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.dynamics.noise_seed = seed;
        if let MazeSource::Ring(r) = &mut self.maze {
            r.seed = seed;
        }
        self
    }

    /// Every setting, defaults included, as `(key, value)` pairs in the
    /// order [`ScenarioConfig::to_text`] writes them.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut e: Vec<(String, String)> = Vec::new();
        let mut kv = |k: &str, v: String| e.push((k.to_string(), v));
        kv("name", self.name.clone());
        kv("seed", self.seed.to_string());
        match &self.maze {
            MazeSource::File(p) => kv("maze_file", p.display().to_string()),
            MazeSource::Ring(r) => {
                kv("generator", "ring".into());
                kv("rings", r.rings.to_string());
                kv("diameter_mm", r.diameter_mm.to_string());
                kv("channel_width_mm", r.channel_width_mm.to_string());
                kv(
                    "gaps_per_ring",
                    r.gaps_per_ring
                        .iter()
                        .map(|g| g.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                );
            }
            MazeSource::Bifurcation(b) => {
                kv("generator", "bifurcation".into());
                kv("len_a_mm", b.len_a_mm.to_string());
                kv("len_b_mm", b.len_b_mm.to_string());
                kv("channel_width_mm", b.channel_width_mm.to_string());
            }
            MazeSource::Straight {
                length_mm,
                channel_width_mm,
                ..
            } => {
                kv("generator", "straight".into());
                kv("length_mm", length_mm.to_string());
                kv("channel_width_mm", channel_width_mm.to_string());
            }
        }
        let physics = match &self.maze {
            MazeSource::File(_) => None,
            MazeSource::Ring(r) => Some(r.physics),
            MazeSource::Bifurcation(b) => Some(b.physics),
            MazeSource::Straight { physics, .. } => Some(*physics),
        };
        if let Some(p) = physics {
            physics_entries(&p, &mut e);
        }
        let d = &self.dynamics;
        let mut kv = |k: &str, v: String| e.push((k.to_string(), v));
        kv("coated_corners", self.coated_corners.to_string());
        kv("solver_tol", fmt_opt(&self.solver_tol));
        kv("solver_max_iter", fmt_opt(&self.solver_max_iter));
        kv("radius_mm", fmt_opt(&d.radius_mm));
        kv("mobility", d.mobility.to_string());
        kv("static_threshold", fmt_opt(&d.static_threshold));
        kv("threshold_fraction", d.threshold_fraction.to_string());
        kv("induction_steps", d.induction_steps.to_string());
        kv("dt", fmt_opt(&d.dt));
        kv("max_steps", d.max_steps.to_string());
        kv("lock_window", d.lock_window.to_string());
        kv("lock_epsilon_mm", d.lock_epsilon_mm.to_string());
        let source = match d.force_source {
            ForceSource::DiskMeanJ => "j",
            ForceSource::DiskMeanGradSpeedJ => "grad_speed_j",
        };
        kv("force_source", source.into());
        kv("force_gain", d.force_gain.to_string());
        kv("noise_amplitude", d.noise_amplitude.to_string());
        kv(
            "artifacts",
            self.artifacts
                .iter()
                .map(|a| a.name())
                .collect::<Vec<_>>()
                .join(","),
        );
        if let Some(o) = &self.out_dir {
            kv("out_dir", o.display().to_string());
        }
        e
    }

    /// Settings that determine the results; the output location is left out.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.entries()
            .into_iter()
            .filter(|(k, _)| k != "out_dir")
            .collect()
    }

    /// Canonical config text; parsing it gives back an equal config.
    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn err(line: usize, message: impl Into<String>) -> HarnessError {
        HarnessError::Config {
            line,
            message: message.into(),
        }
    }

    fn take_raw(&mut self, key: &str) -> Option<(String, usize)> {
        self.map.remove(key)
    }

    fn take<T: FromStr>(
        &mut self,
        key: &str,
        check: impl Fn(&T) -> bool,
        want: &str,
    ) -> Result<Option<T>, HarnessError> {
        let Some((v, line)) = self.take_raw(key) else {
            return Ok(None);
        };
        match v.parse::<T>() {
            Ok(t) if check(&t) => Ok(Some(t)),
            _ => Err(Self::err(
                line,
                format!("`{key}` must be {want}, got `{v}`"),
            )),
        }
    }

    /// Like [`Entries::take`] but `auto` means unset.
    fn take_auto<T: FromStr>(
        &mut self,
        key: &str,
        check: impl Fn(&T) -> bool,
        want: &str,
    ) -> Result<Option<Option<T>>, HarnessError> {
        match self.map.get(key) {
            Some((v, _)) if v == "auto" => {
                self.map.remove(key);
                Ok(Some(None))
            }
            _ => self.take(key, check, want).map(|o| o.map(Some)),
        }
    }
}

fn positive(v: &f64) -> bool {
    *v > 0.0 && v.is_finite()
}
fn non_negative(v: &f64) -> bool {
    *v >= 0.0 && v.is_finite()
}
fn finite(v: &f64) -> bool {
    v.is_finite()
}
fn any<T>(_: &T) -> bool {
    true
}

const POSITIVE: &str = "a positive number";
const NON_NEGATIVE: &str = "a non-negative number";

fn take_physics(e: &mut Entries) -> Result<MazePhysics, HarnessError> {
    let mut p = MazePhysics::default();
    if let Some(v) = e.take("cell_size_mm", positive, POSITIVE)? {
        p.cell_size_mm = v;
    }
    if let Some(v) = e.take("sigma_electrolyte", positive, POSITIVE)? {
        p.sigma_electrolyte = v;
    }
    if let Some(v) = e.take("sigma_wall", non_negative, NON_NEGATIVE)? {
        p.sigma_wall = v;
    }
    if let Some(v) = e.take("sigma_coating", non_negative, NON_NEGATIVE)? {
        p.sigma_coating = v;
    }
    if let Some(v) = e.take(
        "voltage",
        |v: &f64| *v != 0.0 && v.is_finite(),
        "a non-zero number",
    )? {
        p.applied_voltage = v;
    }
    Ok(p)
}

/// Parse flat `key = value` config text. Blank lines and lines starting
/// with `#` are ignored; keys may not repeat, and unknown keys are errors.
/// Relative `maze_file` and `out_dir` paths are kept as written; see
/// [`load_config`] for resolution against the config's directory.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, HarnessError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| Entries::err(line, "expected `key = value`"))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Entries::err(line, format!("bad key `{k}`")));
        }
        if v.is_empty() {
            return Err(Entries::err(line, format!("`{k}` has no value")));
        }
        if map.insert(k.to_string(), (v.to_string(), line)).is_some() {
            return Err(Entries::err(line, format!("duplicate key `{k}`")));
        }
    }
    let mut e = Entries { map };
    let mut cfg = ScenarioConfig::default();

    if let Some(n) = e.take::<String>("name", any, "")? {
        cfg.name = n;
    }
    let seed = e
        .take::<u64>("seed", any, "a non-negative integer")?
        .unwrap_or(cfg.seed);

    let file = e.take_raw("maze_file");
    let generator = e.take_raw("generator");
    cfg.maze = match (file, generator) {
        (Some(_), Some((_, line))) => {
            return Err(Entries::err(
                line,
                "give either `maze_file` or `generator`, not both",
            ))
        }
        (None, None) => {
            return Err(Entries::err(
                0,
                "no maze source: set `maze_file` or `generator`",
            ))
        }
        (Some((path, _)), None) => MazeSource::File(PathBuf::from(path)),
        (None, Some((kind, line))) => {
            let width = e
                .take("channel_width_mm", positive, POSITIVE)?
                .unwrap_or(4.0);
            let source = match kind.as_str() {
                "ring" => {
                    let mut r = RingMazeParams::new(3, 70.0, width, seed);
                    if let Some(v) = e.take("rings", |&n: &usize| n >= 1, "a positive integer")? {
                        r.rings = v;
                    }
                    if let Some(v) = e.take("diameter_mm", positive, POSITIVE)? {
                        r.diameter_mm = v;
                    }
                    if let Some((v, l)) = e.take_raw("gaps_per_ring") {
                        r.gaps_per_ring = v
                            .split(',')
                            .map(|g| g.trim().parse::<usize>().ok().filter(|&g| g >= 1))
                            .collect::<Option<Vec<_>>>()
                            .ok_or_else(|| Entries::err(l, format!("`gaps_per_ring` must be a list of positive integers, got `{v}`")))?;
                    }
                    r.physics = take_physics(&mut e)?;
                    MazeSource::Ring(r)
                }
                "bifurcation" => {
                    let mut b = BifurcationParams::new(38.0, 42.0, width);
                    if let Some(v) = e.take("len_a_mm", positive, POSITIVE)? {
                        b.len_a_mm = v;
                    }
                    if let Some(v) = e.take("len_b_mm", positive, POSITIVE)? {
                        b.len_b_mm = v;
                    }
                    b.physics = take_physics(&mut e)?;
                    MazeSource::Bifurcation(b)
                }
                "straight" => {
                    let length_mm = e.take("length_mm", positive, POSITIVE)?.unwrap_or(40.0);
                    MazeSource::Straight {
                        length_mm,
                        channel_width_mm: width,
                        physics: take_physics(&mut e)?,
                    }
                }
                other => return Err(Entries::err(line, format!("unknown generator `{other}`"))),
            };
            source
        }
    };

    if let Some(v) = e.take("coated_corners", any, "true or false")? {
        cfg.coated_corners = v;
    }
    if let Some(v) = e.take_auto("solver_tol", positive, POSITIVE)? {
        cfg.solver_tol = v;
    }
    if let Some(v) = e.take_auto("solver_max_iter", |&n: &usize| n >= 1, "a positive integer")? {
        cfg.solver_max_iter = v;
    }
    let d = &mut cfg.dynamics;
    if let Some(v) = e.take_auto("radius_mm", positive, POSITIVE)? {
        d.radius_mm = v;
    }
    if let Some(v) = e.take("mobility", positive, POSITIVE)? {
        d.mobility = v;
    }
    if let Some(v) = e.take_auto("static_threshold", non_negative, NON_NEGATIVE)? {
        d.static_threshold = v;
    }
    if let Some(v) = e.take("threshold_fraction", non_negative, NON_NEGATIVE)? {
        d.threshold_fraction = v;
    }
    if let Some(v) = e.take("induction_steps", non_negative, NON_NEGATIVE)? {
        d.induction_steps = v;
    }
    if let Some(v) = e.take_auto("dt", positive, POSITIVE)? {
        d.dt = v;
    }
    if let Some(v) = e.take("max_steps", any, "a non-negative integer")? {
        d.max_steps = v;
    }
    if let Some(v) = e.take("lock_window", |&n: &usize| n >= 1, "a positive integer")? {
        d.lock_window = v;
    }
    if let Some(v) = e.take("lock_epsilon_mm", non_negative, NON_NEGATIVE)? {
        d.lock_epsilon_mm = v;
    }
    if let Some((v, line)) = e.take_raw("force_source") {
        d.force_source = match v.as_str() {
            "j" => ForceSource::DiskMeanJ,
            "grad_speed_j" => ForceSource::DiskMeanGradSpeedJ,
            _ => {
                return Err(Entries::err(
                    line,
                    format!("`force_source` must be `j` or `grad_speed_j`, got `{v}`"),
                ))
            }
        };
    }
    if let Some(v) = e.take("force_gain", finite, "a finite number")? {
        d.force_gain = v;
    }
    if let Some(v) = e.take("noise_amplitude", non_negative, NON_NEGATIVE)? {
        d.noise_amplitude = v;
    }
    if let Some((v, line)) = e.take_raw("artifacts") {
        cfg.artifacts = if v == "none" {
            BTreeSet::new()
        } else {
            v.split(',')
                .map(|a| a.trim().parse::<Artifact>())
                .collect::<Result<_, _>>()
                .map_err(|m| Entries::err(line, m))?
        };
    }
    if let Some((v, _)) = e.take_raw("out_dir") {
        cfg.out_dir = Some(PathBuf::from(v));
    }
    if let Some((k, (_, line))) = e.map.into_iter().min_by_key(|(_, (_, l))| *l) {
        return Err(Entries::err(
            line,
            format!("unknown key `{k}` for this maze source"),
        ));
    }
    cfg.dynamics
        .validate()
        .map_err(|err| Entries::err(0, err.to_string()))?;
    Ok(cfg.with_seed(seed))
}

/// Read and parse a config file. Relative `maze_file` and `out_dir` paths
/// are taken relative to the file's directory, and the scenario name
/// defaults to the file stem.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut cfg = parse_config(&text)?;
    let base = path.parent().unwrap_or(Path::new(""));
    if let MazeSource::File(p) = &mut cfg.maze {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    if let Some(o) = &mut cfg.out_dir {
        if o.is_relative() {
            *o = base.join(&*o);
        }
    }
    if !text.lines().any(|l| l.trim_start().starts_with("name")) {
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            cfg.name = stem.to_string();
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_ring_config() {
        let c = parse_config("generator = ring\n").unwrap();
        assert_eq!(
            c.maze,
            MazeSource::Ring(RingMazeParams::new(3, 70.0, 4.0, 7))
        );
        assert_eq!(c.artifacts.len(), 6);
    }

    #[test]
    fn full_config_round_trips() {
        let text = "# edge study\nname = coated\nseed = 3\ngenerator = ring\nrings = 2\ngaps_per_ring = 1, 2\n\
                    voltage = 2.5\ncoated_corners = true\nsolver_tol = 1e-10\nstatic_threshold = 40\n\
                    force_source = grad_speed_j\nartifacts = report,fields\nout_dir = out/x\n";
        let c = parse_config(text).unwrap();
        let MazeSource::Ring(r) = &c.maze else {
            panic!()
        };
        assert_eq!(
            (
                r.rings,
                r.seed,
                &r.gaps_per_ring[..],
                r.physics.applied_voltage
            ),
            (2, 3, &[1, 2][..], 2.5)
        );
        assert_eq!(c.dynamics.noise_seed, 3);
        assert_eq!(c.dynamics.static_threshold, Some(40.0));
        assert_eq!(
            c.artifacts,
            [Artifact::Fields, Artifact::Report].into_iter().collect()
        );
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
        assert!(!c.echo().contains_key("out_dir"));
    }

    #[test]
    fn other_sources_round_trip() {
        for text in [
            "maze_file = m.txt\ndt = 0.5\n",
            "generator = bifurcation\nlen_a_mm = 40\nlen_b_mm = 40\n",
            "generator = straight\nlength_mm = 20\ncell_size_mm = 0.25\n",
        ] {
            let c = parse_config(text).unwrap();
            assert_eq!(parse_config(&c.to_text()).unwrap(), c, "{text}");
        }
    }

    #[test]
    fn seed_override_reaches_generator() {
        let c = parse_config("generator = ring\nseed = 1\n")
            .unwrap()
            .with_seed(9);
        let MazeSource::Ring(r) = &c.maze else {
            panic!()
        };
        assert_eq!((c.seed, r.seed, c.dynamics.noise_seed), (9, 9, 9));
    }

    #[test]
    fn errors_carry_line_numbers() {
        for (text, line) in [
            ("generator = ring\nbogus\n", 2),
            ("generator = ring\nrings = 0\n", 2),
            ("generator = ring\n\nmobility = -1\n", 3),
            ("generator = ring\nseed = 1\nseed = 2\n", 3),
            ("maze_file = a\ngenerator = ring\n", 2),
            ("", 0),
            ("generator = spiral\n", 1),
            ("maze_file = a\nvoltage = 5\n", 2),
            ("generator = straight\nrings = 3\n", 2),
            ("generator = ring\nartifacts = report,movie\n", 2),
            ("generator = ring\nforce_source = e\n", 2),
            ("generator = ring\nsolver_tol = NaN\n", 2),
            ("generator = ring\nkey with space = 1\n", 2),
            ("generator = ring\nname =\n", 2),
        ] {
            match parse_config(text) {
                Err(HarnessError::Config { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
