//! Line-oriented scenario files: `key = value` entries grouped under
//! `[section]` headers. Sections: one optional `[global]`, one or more
//! `[ris]` (one per surface), optional `[modulation]`, `[mc]` and
//! `[optimize]`. Unknown sections or keys are rejected; `#` starts a
//! comment. Missing optional values fall back to the defaults documented
//! in the README (2.4 GHz carrier, 5 dB hop gains, unit efficiency and
//! spread, 0 dB outage threshold, BPSK, a 60..120 dB sweep).

use std::collections::BTreeMap;
use std::path::Path;

use riscalc_core::channel::db_to_linear;
use riscalc_core::{
    GlobalConfig, McRun, ModulationScheme, RisLinkConfig, Scenario, Tolerance,
};

use crate::error::{CliError, Result};

/// Optimization inputs shared by the element-count and placement commands.
#[derive(Debug, Clone)]
pub struct OptimizeBlock {
    pub n_max: u32,
    /// Outage targets; the element commands solve one problem per entry.
    pub p_out_th: Vec<f64>,
    pub avg_snr_db: f64,
    pub d_min_m: f64,
    pub total_distance_m: Option<f64>,
    /// Element-count start point; defaults to n_max / 2 per surface.
    pub start_point: Option<Vec<f64>>,
    /// Placement start distances; default D / 4 per surface.
    pub start_distances_m: Option<Vec<f64>>,
}

/// A fully parsed and validated scenario file.
#[derive(Debug, Clone)]
pub struct ScenarioFile {
    pub scenario: Scenario,
    pub modulation: ModulationScheme,
    pub mc: McRun,
    pub optimize: Option<OptimizeBlock>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        parse(&text)
    }

    /// The sweep grid in linear scale.
    pub fn snr_grid_linear(&self) -> Vec<f64> {
        self.scenario.global().avg_snr_grid_db.iter().map(|&db| db_to_linear(db)).collect()
    }

    pub fn element_problem(&self, p_out_th: f64) -> Result<riscalc_core::ElementProblem> {
        let opt = self.optimize_block()?;
        let k = self.scenario.k();
        Ok(riscalc_core::ElementProblem {
            links: self.scenario.links().to_vec(),
            global: self.scenario.global().clone(),
            n_max: opt.n_max,
            p_out_th,
            avg_snr: db_to_linear(opt.avg_snr_db),
            start_point: opt
                .start_point
                .clone()
                .unwrap_or_else(|| vec![f64::from(opt.n_max) / 2.0; k]),
            tol: Tolerance::new(1e-9, 1e-9, 500).expect("static tolerance"),
        })
    }

    pub fn placement_problem(&self) -> Result<riscalc_core::PlacementProblem> {
        let opt = self.optimize_block()?;
        let total = opt.total_distance_m.ok_or_else(|| CliError::Validation {
            section: "optimize".into(),
            key: Some("total_distance_m".into()),
            line: None,
            msg: "required for placement optimization".into(),
        })?;
        let k = self.scenario.k();
        Ok(riscalc_core::PlacementProblem {
            links: self.scenario.links().to_vec(),
            global: self.scenario.global().clone(),
            total_distance_m: total,
            d_min_m: opt.d_min_m,
            avg_snr: db_to_linear(opt.avg_snr_db),
            start_point: opt.start_distances_m.clone().unwrap_or_else(|| vec![total / 4.0; k]),
            tol: Tolerance::new(1e-9, 1e-9, 100).expect("static tolerance"),
        })
    }

    pub fn optimize_block(&self) -> Result<&OptimizeBlock> {
        self.optimize.as_ref().ok_or_else(|| CliError::Validation {
            section: "optimize".into(),
            key: None,
            line: None,
            msg: "this subcommand requires an [optimize] block".into(),
        })
    }
}

/// One raw `key = value` entry with its source line.
struct Entry {
    value: String,
    line: usize,
    used: bool,
}

struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| CliError::Parse {
                line: line_no,
                msg: format!("malformed section header `{line}`"),
            })?;
            sections.push(Section {
                name: name.trim().to_string(),
                line: line_no,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CliError::Parse {
            line: line_no,
            msg: format!("expected `key = value`, got `{line}`"),
        })?;
        let section = sections.last_mut().ok_or_else(|| CliError::Parse {
            line: line_no,
            msg: "entry before any [section] header".into(),
        })?;
        let key = key.trim().to_string();
        if section
            .entries
            .insert(key.clone(), Entry { value: value.trim().to_string(), line: line_no, used: false })
            .is_some()
        {
            return Err(CliError::Parse {
                line: line_no,
                msg: format!("duplicate key `{key}` in [{}]", section.name),
            });
        }
    }
    Ok(sections)
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn parse_f64(&mut self, key: &str) -> Result<Option<(f64, usize)>> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => {
                let parsed = v.parse::<f64>().map_err(|_| CliError::Parse {
                    line,
                    msg: format!("`{key}` must be a number, got `{v}`"),
                })?;
                Ok(Some((parsed, line)))
            }
        }
    }

    fn parse_u64(&mut self, key: &str) -> Result<Option<(u64, usize)>> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => {
                let parsed = v.parse::<u64>().map_err(|_| CliError::Parse {
                    line,
                    msg: format!("`{key}` must be a nonnegative integer, got `{v}`"),
                })?;
                Ok(Some((parsed, line)))
            }
        }
    }

    fn parse_f64_list(&mut self, key: &str) -> Result<Option<(Vec<f64>, usize)>> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => {
                let parsed = v
                    .split(',')
                    .map(|part| part.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<f64>, _>>()
                    .map_err(|_| CliError::Parse {
                        line,
                        msg: format!("`{key}` must be a comma-separated list of numbers"),
                    })?;
                Ok(Some((parsed, line)))
            }
        }
    }

    fn reject_unknown(&self) -> Result<()> {
        for (key, entry) in &self.entries {
            if !entry.used {
                return Err(CliError::Validation {
                    section: self.name.clone(),
                    key: Some(key.clone()),
                    line: Some(entry.line),
                    msg: "unknown key".into(),
                });
            }
        }
        Ok(())
    }
}

fn validation(section: &Section, key: &str, line: Option<usize>, msg: String) -> CliError {
    CliError::Validation { section: section.name.clone(), key: Some(key.into()), line, msg }
}

pub fn parse(text: &str) -> Result<ScenarioFile> {
    let mut sections = split_sections(text)?;

    for s in &sections {
        if !matches!(s.name.as_str(), "global" | "ris" | "modulation" | "mc" | "optimize") {
            return Err(CliError::Parse {
                line: s.line,
                msg: format!("unknown section [{}]", s.name),
            });
        }
    }
    for name in ["global", "modulation", "mc", "optimize"] {
        if sections.iter().filter(|s| s.name == name).count() > 1 {
            let dup = sections.iter().filter(|s| s.name == name).nth(1).unwrap();
            return Err(CliError::Parse {
                line: dup.line,
                msg: format!("section [{name}] may appear at most once"),
            });
        }
    }

    // [global] with sweep defaults 60..120 dB in 1 dB steps.
    let mut carrier = 2.4e9;
    let mut outage_db = 0.0;
    let (mut start, mut stop, mut step) = (60.0, 120.0, 1.0);
    if let Some(g) = sections.iter_mut().find(|s| s.name == "global") {
        if let Some((v, _)) = g.parse_f64("carrier_frequency_hz")? {
            carrier = v;
        }
        if let Some((v, _)) = g.parse_f64("outage_threshold_db")? {
            outage_db = v;
        }
        if let Some((v, _)) = g.parse_f64("snr_start_db")? {
            start = v;
        }
        if let Some((v, _)) = g.parse_f64("snr_stop_db")? {
            stop = v;
        }
        let step_line = g.parse_f64("snr_step_db")?;
        if let Some((v, line)) = step_line {
            if !(v > 0.0) {
                return Err(validation(g, "snr_step_db", Some(line), "must be positive".into()));
            }
            step = v;
        }
        if stop < start {
            return Err(validation(g, "snr_stop_db", None, "must be at least snr_start_db".into()));
        }
        g.reject_unknown()?;
    }
    let n_points = ((stop - start) / step).round() as usize + 1;
    let grid: Vec<f64> = (0..n_points).map(|i| start + step * i as f64).collect();
    let global = GlobalConfig {
        carrier_frequency_hz: carrier,
        outage_threshold_linear: db_to_linear(outage_db),
        avg_snr_grid_db: grid,
    };

    // [ris] sections, one surface each.
    let mut links = Vec::new();
    for s in sections.iter_mut().filter(|s| s.name == "ris") {
        let n = s
            .parse_u64("n_elements")?
            .ok_or_else(|| validation(s, "n_elements", Some(s.line), "required".into()))?;
        let d1 = s
            .parse_f64("d1_m")?
            .ok_or_else(|| validation(s, "d1_m", Some(s.line), "required".into()))?;
        let d2 = s
            .parse_f64("d2_m")?
            .ok_or_else(|| validation(s, "d2_m", Some(s.line), "required".into()))?;
        let lookup = |v: Option<(f64, usize)>, default: f64| v.map_or(default, |(x, _)| x);
        let m1_entry = s.parse_f64("m1")?;
        let m2_entry = s.parse_f64("m2")?;
        let link = RisLinkConfig {
            n_elements: u32::try_from(n.0)
                .map_err(|_| validation(s, "n_elements", Some(n.1), "too large".into()))?,
            m1: lookup(m1_entry, 1.0),
            m2: lookup(m2_entry, 1.0),
            omega1: lookup(s.parse_f64("omega1")?, 1.0),
            omega2: lookup(s.parse_f64("omega2")?, 1.0),
            d1_m: d1.0,
            d2_m: d2.0,
            g1_db: lookup(s.parse_f64("g1_db")?, 5.0),
            g2_db: lookup(s.parse_f64("g2_db")?, 5.0),
            efficiency: lookup(s.parse_f64("efficiency")?, 1.0),
        };
        if let Err(e) = link.validate() {
            let line = match &e {
                riscalc_core::Error::InvalidConfig(msg) if msg.starts_with("m1") => {
                    m1_entry.map(|(_, l)| l)
                }
                riscalc_core::Error::InvalidConfig(msg) if msg.starts_with("m2") => {
                    m2_entry.map(|(_, l)| l)
                }
                _ => Some(s.line),
            };
            return Err(CliError::Validation {
                section: "ris".into(),
                key: None,
                line,
                msg: e.to_string(),
            });
        }
        s.reject_unknown()?;
        links.push(link);
    }
    if links.is_empty() {
        return Err(CliError::Validation {
            section: "ris".into(),
            key: None,
            line: None,
            msg: "at least one [ris] section is required".into(),
        });
    }

    // [modulation]; defaults to BPSK.
    let mut modulation = ModulationScheme::bpsk();
    if let Some(s) = sections.iter_mut().find(|s| s.name == "modulation") {
        let p = s.parse_f64("p")?.map_or(1.0, |(v, _)| v);
        let q = s.parse_f64("q")?.map_or(1.0, |(v, _)| v);
        let label = s.take("label").map_or_else(|| "custom".to_string(), |(v, _)| v);
        s.reject_unknown()?;
        modulation = ModulationScheme::new(p, q, label).map_err(|e| CliError::Validation {
            section: "modulation".into(),
            key: None,
            line: Some(s.line),
            msg: e.to_string(),
        })?;
    }

    // [mc]; defaults sized for the bundled sweeps.
    let mut mc = McRun::new(1_000_000, 1, 65_536).expect("static defaults");
    if let Some(s) = sections.iter_mut().find(|s| s.name == "mc") {
        let trials = s.parse_u64("trials")?.map_or(mc.trials, |(v, _)| v);
        let seed = s.parse_u64("seed")?.map_or(mc.seed, |(v, _)| v);
        let chunk = s.parse_u64("chunk_size")?.map_or(mc.chunk_size, |(v, _)| v);
        s.reject_unknown()?;
        mc = McRun::new(trials, seed, chunk).map_err(|e| CliError::Validation {
            section: "mc".into(),
            key: None,
            line: Some(s.line),
            msg: e.to_string(),
        })?;
    }

    // [optimize]; optional, needed only by the optimization subcommands.
    let mut optimize = None;
    if let Some(s) = sections.iter_mut().find(|s| s.name == "optimize") {
        let n_max = s
            .parse_u64("n_max")?
            .ok_or_else(|| validation(s, "n_max", Some(s.line), "required".into()))?;
        let p_list = s
            .parse_f64_list("p_out_th")?
            .ok_or_else(|| validation(s, "p_out_th", Some(s.line), "required".into()))?;
        for &p in &p_list.0 {
            if !(p > 0.0 && p < 1.0) {
                return Err(validation(
                    s,
                    "p_out_th",
                    Some(p_list.1),
                    format!("targets must lie in (0, 1), got {p}"),
                ));
            }
        }
        let avg_snr_db = s
            .parse_f64("avg_snr_db")?
            .ok_or_else(|| validation(s, "avg_snr_db", Some(s.line), "required".into()))?;
        let d_min = s.parse_f64("d_min_m")?.map_or(0.1, |(v, _)| v);
        let total = s.parse_f64("total_distance_m")?.map(|(v, _)| v);
        let start_point = s.parse_f64_list("start_point")?.map(|(v, _)| v);
        let start_d = s.parse_f64_list("start_distances_m")?.map(|(v, _)| v);
        s.reject_unknown()?;
        optimize = Some(OptimizeBlock {
            n_max: u32::try_from(n_max.0)
                .map_err(|_| validation(s, "n_max", Some(n_max.1), "too large".into()))?,
            p_out_th: p_list.0,
            avg_snr_db,
            d_min_m: d_min,
            total_distance_m: total,
            start_point,
            start_distances_m: start_d,
        });
    }

    let scenario = Scenario::new(global, links).map_err(|e| CliError::Validation {
        section: "global".into(),
        key: None,
        line: None,
        msg: e.to_string(),
    })?;
    Ok(ScenarioFile { scenario, modulation, mc, optimize })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let f = parse("[ris]\nn_elements = 5\nd1_m = 5\nd2_m = 5\n").unwrap();
        assert_eq!(f.scenario.k(), 1);
        assert_eq!(f.scenario.global().carrier_frequency_hz, 2.4e9);
        assert_eq!(f.scenario.global().outage_threshold_linear, 1.0);
        assert_eq!(f.scenario.links()[0].g1_db, 5.0);
        assert_eq!(f.scenario.links()[0].efficiency, 1.0);
        assert_eq!(f.modulation.label, "BPSK");
        assert_eq!(f.mc.trials, 1_000_000);
        assert_eq!(f.scenario.global().avg_snr_grid_db.len(), 61);
    }

    #[test]
    fn invalid_shape_names_rule_and_line() {
        let err = parse("[ris]\nn_elements = 5\nd1_m = 5\nd2_m = 5\nm1 = 0.3\n").unwrap_err();
        match err {
            CliError::Validation { section, line, msg, .. } => {
                assert_eq!(section, "ris");
                assert_eq!(line, Some(5));
                assert!(msg.contains("m >= 0.5"), "message must cite the rule: {msg}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected_with_location() {
        let err =
            parse("[ris]\nn_elements = 5\nd1_m = 5\nd2_m = 5\nbogus = 1\n").unwrap_err();
        match err {
            CliError::Validation { section, key, line, .. } => {
                assert_eq!(section, "ris");
                assert_eq!(key.as_deref(), Some("bogus"));
                assert_eq!(line, Some(5));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse("[ris]\nn_elements\n").unwrap_err() {
            CliError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse("noise = 1\n").unwrap_err() {
            CliError::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse("[nonsense]\nx = 1\n").unwrap_err() {
            CliError::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn optimize_block_round_trip() {
        let text = "\
[ris]
n_elements = 1
d1_m = 1
d2_m = 9

[optimize]
n_max = 100
p_out_th = 1e-6, 1e-4
avg_snr_db = 100
total_distance_m = 10
start_point = 50
";
        let f = parse(text).unwrap();
        let opt = f.optimize.as_ref().unwrap();
        assert_eq!(opt.p_out_th, vec![1e-6, 1e-4]);
        assert_eq!(opt.d_min_m, 0.1);
        let problem = f.element_problem(1e-6).unwrap();
        assert_eq!(problem.start_point, vec![50.0]);
        let placement = f.placement_problem().unwrap();
        assert_eq!(placement.start_point, vec![2.5]);
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let f = parse("# header\n\n[ris] # trailing\nn_elements = 2 # inline\nd1_m = 3\nd2_m = 4\n")
            .unwrap();
        assert_eq!(f.scenario.links()[0].n_elements, 2);
    }
}
