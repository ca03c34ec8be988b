//! The JSON run configuration and its merge with command-line overrides.
//!
//! ```json
//! {
//!   "lattice":    { "lx": 5, "ly": 3, "boundary": "open", "trunc": 2 },
//!   "coupling":   { "g2": 10 },
//!   "charges":    { "convention": "qed", "sites": [{ "m": 1, "n": 1, "q": 1 }] },
//!   "experiment": { "kind": "potential", "r_list": [2, 4] },
//!   "solver":     { "tol": 1e-10, "max_iter": 5000, "k": 4, "seed": 1 },
//!   "output":     { "dir": "out" }
//! }
//! ```
//!
//! `coupling` is either `{ "g2" }` or `{ "lambda", "mu", "omega" }`. Every
//! section is optional and unknown keys are errors.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::basis::Picture;
use crate::error::{Error, Result};
use crate::experiments::{ChargeSpec, ExperimentConfig, ExperimentKind, LatticeSpec, DEFAULT_TRUNCATION};
use crate::hamiltonian::CouplingParams;
use crate::lattice::Boundary;

pub const DEFAULT_LX: usize = 5;
pub const DEFAULT_LY: usize = 3;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub lattice: LatticeSection,
    #[serde(default)]
    pub coupling: CouplingSection,
    #[serde(default)]
    pub charges: ChargesSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub lx: Option<usize>,
    pub ly: Option<usize>,
    pub boundary: Option<Boundary>,
    pub trunc: Option<u8>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub g2: Option<f64>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub omega: Option<f64>,
}

impl CouplingSection {
    fn has_rotor(&self) -> bool {
        self.lambda.is_some() || self.mu.is_some() || self.omega.is_some()
    }

    fn is_empty(&self) -> bool {
        self.g2.is_none() && !self.has_rotor()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Site {
    pub m: usize,
    pub n: usize,
    pub q: i32,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargesSection {
    #[serde(default)]
    pub convention: Picture,
    #[serde(default)]
    pub sites: Vec<Site>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: Option<ExperimentKind>,
    pub r_list: Option<Vec<usize>>,
    pub levels: Option<usize>,
    pub force_regime: Option<bool>,
    pub regime_ratio: Option<f64>,
    pub validity_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub krylov_dim: Option<usize>,
    pub dense_cap: Option<usize>,
    pub max_states: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// Values given on the command line; each replaces its config-file
/// counterpart.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub g2: Option<f64>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub omega: Option<f64>,
    pub lx: Option<usize>,
    pub ly: Option<usize>,
    pub boundary: Option<Boundary>,
    pub trunc: Option<u8>,
    pub r_list: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
    pub force_regime: bool,
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))
}

/// Reads and parses a config file. Physical validation happens in
/// [`resolve`].
pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn merge_coupling(file: CouplingSection, o: &Overrides) -> Result<Option<CouplingParams>> {
    if file.g2.is_some() && file.has_rotor() {
        return Err(Error::Config(
            "coupling sets both g2 and lambda/mu/omega; use one form".to_string(),
        ));
    }
    let flags_rotor = o.lambda.is_some() || o.mu.is_some() || o.omega.is_some();
    if o.g2.is_some() && flags_rotor {
        return Err(Error::Config(
            "--g2 cannot be combined with --lambda/--mu/--omega".to_string(),
        ));
    }
    let merged = if let Some(g2) = o.g2 {
        CouplingSection {
            g2: Some(g2),
            ..Default::default()
        }
    } else if flags_rotor {
        if file.g2.is_some() && !(o.lambda.is_some() && o.mu.is_some() && o.omega.is_some()) {
            return Err(Error::Config(
                "config uses g2; replacing it needs all of --lambda, --mu, --omega".to_string(),
            ));
        }
        CouplingSection {
            g2: None,
            lambda: o.lambda.or(file.lambda),
            mu: o.mu.or(file.mu),
            omega: o.omega.or(file.omega),
        }
    } else {
        file
    };
    if merged.is_empty() {
        return Ok(None);
    }
    if let Some(g2) = merged.g2 {
        return CouplingParams::qed(g2).map(Some);
    }
    match (merged.lambda, merged.mu, merged.omega) {
        (Some(l), Some(m), Some(w)) => CouplingParams::micro(l, m, w).map(Some),
        _ => Err(Error::Config(
            "rotor coupling needs all of lambda, mu and omega".to_string(),
        )),
    }
}

/// Builds the run description for `kind` from a config file and flag
/// overrides. A config naming a different experiment kind is rejected.
pub fn resolve(file: ConfigFile, overrides: &Overrides, kind: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let kind = match (kind, file.experiment.kind) {
        (Some(k), Some(f)) if k != f => {
            return Err(Error::Config(format!(
                "config is for {}, not {}",
                f.name(),
                k.name()
            )))
        }
        (Some(k), _) => k,
        (None, Some(f)) => f,
        (None, None) => ExperimentKind::SectorCount,
    };
    let lattice = LatticeSpec {
        lx: overrides.lx.or(file.lattice.lx).unwrap_or(DEFAULT_LX),
        ly: overrides.ly.or(file.lattice.ly).unwrap_or(DEFAULT_LY),
        boundary: overrides.boundary.or(file.lattice.boundary).unwrap_or_default(),
        trunc: overrides.trunc.or(file.lattice.trunc).unwrap_or(DEFAULT_TRUNCATION),
    };
    let mut config = ExperimentConfig::new(kind, lattice);
    config.coupling = merge_coupling(file.coupling, overrides)?;
    config.charges = ChargeSpec {
        convention: file.charges.convention,
        sites: file.charges.sites.iter().map(|s| (s.m, s.n, s.q)).collect(),
    };
    let e = &file.experiment;
    if let Some(r) = overrides.r_list.clone().or_else(|| e.r_list.clone()) {
        config.r_list = r;
    }
    if let Some(v) = e.levels {
        config.levels = v;
    }
    config.force_regime = overrides.force_regime || e.force_regime.unwrap_or(false);
    if let Some(v) = e.regime_ratio {
        config.regime_ratio = v;
    }
    if let Some(v) = e.validity_fraction {
        config.validity_fraction = v;
    }
    let s = &file.solver;
    let opts = &mut config.solver;
    opts.tol = s.tol.unwrap_or(opts.tol);
    opts.max_iter = s.max_iter.unwrap_or(opts.max_iter);
    opts.k = s.k.unwrap_or(opts.k);
    opts.seed = s.seed.unwrap_or(opts.seed);
    opts.krylov_dim = s.krylov_dim.unwrap_or(opts.krylov_dim);
    opts.dense_cap = s.dense_cap.unwrap_or(opts.dense_cap);
    if let Some(v) = s.max_states {
        config.max_states = v;
    }
    config.output_dir = overrides.out.clone().or(file.output.dir);
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let file =
            parse_config(r#"{"lattice":{"lx":3,"ly":3},"coupling":{"g2":2},"experiment":{"kind":"ground-state"}}"#)
                .unwrap();
        let c = resolve(file, &Overrides::default(), None).unwrap();
        assert_eq!(c.kind, ExperimentKind::GroundState);
        assert_eq!(c.lattice.trunc, 2);
        assert_eq!(c.solver.tol, 1e-10);
        assert_eq!(c.solver.max_iter, 5000);
        assert_eq!(c.solver.k, 4);
        assert_eq!(c.coupling, Some(CouplingParams::Qed { g2: 2.0 }));
    }

    #[test]
    fn unknown_keys_are_errors() {
        let err = parse_config(r#"{"lattice":{"lx":3,"width":3}}"#).unwrap_err();
        assert!(err.to_string().contains("width"), "{err}");
        assert!(err.to_string().contains("line 1"), "{err}");
        assert!(parse_config(r#"{"plot":{}}"#).is_err());
        assert!(parse_config(r#"{"experiment":{"kind":"movie"}}"#).is_err());
    }

    #[test]
    fn coupling_forms_are_exclusive() {
        let both = parse_config(r#"{"coupling":{"g2":10,"omega":0.01}}"#).unwrap();
        assert!(resolve(both, &Overrides::default(), None).is_err());

        let g2 = || parse_config(r#"{"coupling":{"g2":10}}"#).unwrap();
        let mixed = Overrides {
            g2: Some(1.0),
            mu: Some(1.0),
            ..Default::default()
        };
        assert!(resolve(g2(), &mixed, None).is_err());
        let partial = Overrides {
            lambda: Some(1.0),
            ..Default::default()
        };
        assert!(resolve(g2(), &partial, None).is_err());
        let full = Overrides {
            lambda: Some(1.0),
            mu: Some(1e-3),
            omega: Some(1e-3),
            ..Default::default()
        };
        assert!(resolve(g2(), &full, None).unwrap().coupling.unwrap().is_micro());

        let rotor = parse_config(r#"{"coupling":{"lambda":1,"mu":0.001,"omega":0.01}}"#).unwrap();
        let o = Overrides {
            omega: Some(0.005),
            ..Default::default()
        };
        let c = resolve(rotor.clone(), &o, None).unwrap();
        assert_eq!(
            c.coupling,
            Some(CouplingParams::Micro {
                lambda: 1.0,
                mu: 0.001,
                omega: 0.005
            })
        );
        let o = Overrides {
            g2: Some(3.0),
            ..Default::default()
        };
        assert_eq!(
            resolve(rotor, &o, None).unwrap().coupling,
            Some(CouplingParams::Qed { g2: 3.0 })
        );

        let missing = parse_config(r#"{"coupling":{"lambda":1,"mu":0.001}}"#).unwrap();
        assert!(resolve(missing, &Overrides::default(), None).is_err());
    }

    #[test]
    fn flags_take_precedence() {
        let file = parse_config(r#"{"lattice":{"lx":3,"ly":3,"trunc":1},"output":{"dir":"a"}}"#).unwrap();
        let o = Overrides {
            lx: Some(4),
            trunc: Some(2),
            out: Some("b".into()),
            ..Default::default()
        };
        let c = resolve(file, &o, Some(ExperimentKind::SectorCount)).unwrap();
        assert_eq!((c.lattice.lx, c.lattice.ly, c.lattice.trunc), (4, 3, 2));
        assert_eq!(c.output_dir, Some(PathBuf::from("b")));
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let file = parse_config(r#"{"experiment":{"kind":"potential"}}"#).unwrap();
        assert!(resolve(file, &Overrides::default(), Some(ExperimentKind::GroundState)).is_err());
    }
}
