//! Flat `key = value` search configuration files.
//!
//! Keys: `n`, `m`, `symmetry` (`full`, `diagonal`, `bi-radial:r,s`),
//! `target` (`full-mse`, `top-equation`), `degrees` (comma list),
//! `normalization` (`auto`, `none`, or a comma list of degrees), `restarts`,
//! `seed`, `threshold`, `solution_threshold`, `max_iterations`,
//! `trace_every`. Blank lines and `#` comments are ignored.

use std::collections::BTreeMap;

use mse_core::search::{Ansatz, Normalization, SearchConfig, Target};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchFile {
    pub n: usize,
    pub m: u32,
    pub symmetry: String,
    pub target: Target,
    pub degrees: Vec<u32>,
    pub normalization: String,
    pub search: SearchConfig,
}

const KEYS: &[&str] = &[
    "n",
    "m",
    "symmetry",
    "target",
    "degrees",
    "normalization",
    "restarts",
    "seed",
    "threshold",
    "solution_threshold",
    "max_iterations",
    "trace_every",
];

fn parse_list(key: &str, v: &str) -> Result<Vec<u32>, String> {
    v.split(',')
        .map(|d| {
            d.trim()
                .parse::<u32>()
                .map_err(|_| format!("{key}: bad integer {d:?}"))
        })
        .collect()
}

fn number<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, String> {
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| format!("{key}: cannot parse {v:?}"))
        })
        .transpose()
}

pub fn parse_search_file(text: &str) -> Result<SearchFile, String> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(format!("line {}: unknown key {k:?}", lineno + 1));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(format!("line {}: duplicate key {k:?}", lineno + 1));
        }
    }
    let n: usize = number(&map, "n")?.ok_or("missing key n")?;
    let m: u32 = number(&map, "m")?.ok_or("missing key m")?;
    let target = match map.get("target").map(String::as_str).unwrap_or("full-mse") {
        "full-mse" => Target::FullMse,
        "top-equation" => Target::TopEquation,
        other => return Err(format!("target: unknown value {other:?}")),
    };
    let degrees = match map.get("degrees") {
        Some(v) => parse_list("degrees", v)?,
        None if target == Target::TopEquation => vec![m],
        None => (1..=m).collect(),
    };
    let defaults = SearchConfig::default();
    let search = SearchConfig {
        restarts: number(&map, "restarts")?.unwrap_or(defaults.restarts),
        max_iterations: number(&map, "max_iterations")?.unwrap_or(defaults.max_iterations),
        stall_threshold: number(&map, "threshold")?.unwrap_or(defaults.stall_threshold),
        solution_threshold: number(&map, "solution_threshold")?
            .unwrap_or(defaults.solution_threshold),
        seed: number(&map, "seed")?.unwrap_or(defaults.seed),
        trace_every: number(&map, "trace_every")?.unwrap_or(defaults.trace_every),
    };
    Ok(SearchFile {
        n,
        m,
        symmetry: map
            .get("symmetry")
            .cloned()
            .unwrap_or_else(|| "full".into()),
        target,
        degrees,
        normalization: map
            .get("normalization")
            .cloned()
            .unwrap_or_else(|| "auto".into()),
        search,
    })
}

impl SearchFile {
    pub fn ansatz(&self) -> Result<Ansatz, String> {
        if self.degrees.iter().any(|&d| d > self.m) {
            return Err(format!("degrees {:?} exceed m = {}", self.degrees, self.m));
        }
        let ansatz = match self.symmetry.as_str() {
            "full" => Ansatz::full(self.n, &self.degrees),
            "diagonal" => Ansatz::diagonal(self.n, &self.degrees),
            other => {
                let spec = other
                    .strip_prefix("bi-radial:")
                    .ok_or_else(|| format!("symmetry: unknown value {other:?}"))?;
                let parts = parse_list("symmetry", spec)?;
                let [r, s] = parts[..] else {
                    return Err("symmetry: bi-radial needs r,s".into());
                };
                if (r + s) as usize != self.n {
                    return Err(format!("symmetry: r + s = {} but n = {}", r + s, self.n));
                }
                Ansatz::bi_radial(r as usize, s as usize, &self.degrees)
            }
        }
        .map_err(|e| e.to_string())?;
        if ansatz.m != self.m {
            return Err(format!(
                "basis has top degree {} but m = {}",
                ansatz.m, self.m
            ));
        }
        let normalization = match self.normalization.as_str() {
            "auto" => Normalization::Auto,
            "none" => Normalization::None,
            list => Normalization::Degrees(parse_list("normalization", list)?),
        };
        ansatz
            .with_normalization(normalization)
            .map_err(|e| e.to_string())
    }
}
