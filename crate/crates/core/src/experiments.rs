//! Config-driven runs: sector counts, ground states with field maps,
//! potential scans, the effective-theory comparison and the stagger check.
//!
//! Each `run_*` function is pure: it returns a [`RunRecord`] holding the
//! numbers and the CSV artifacts in memory. [`RunRecord::write`] puts them
//! on disk.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::basis::{
    enumerate_full, enumerate_gauss_sector, full_size, validate_charges, ChargeConfig, EnumerationLimits,
    GaugeSectorBasis, Picture, DEFAULT_MAX_STATES, MAX_TRUNCATION,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_kogut_susskind, build_microscopic_rotor, derive_effective, stagger_equivalent, CouplingParams,
    KsCoefficients, DEFAULT_REGIME_RATIO,
};
use crate::lattice::{Boundary, LatticeGeometry};
use crate::observables::{
    csv_number, field_map, flux_tube_report, ks_ground_state, place_pair, static_potential, validity_bound_check,
    DEFAULT_VALIDITY_FRACTION,
};
use crate::solver::{dense_eigenvalues, low_spectrum, EigenResult, SolverOptions};
use crate::sparse::SparseOperator;

/// Raw configuration count below which sector counts are cross-checked by
/// brute force.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;
pub const DEFAULT_TRUNCATION: u8 = 2;
pub const DEFAULT_LEVELS: usize = 3;
pub const EFFECTIVE_COMPARE_HEADER: &str =
    "level,rotor,effective,kogut_susskind,rotor_minus_effective,effective_minus_kogut_susskind";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SectorCount,
    GroundState,
    Potential,
    EffectiveCompare,
    StaggerCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SectorCount => "sector-count",
            ExperimentKind::GroundState => "ground-state",
            ExperimentKind::Potential => "potential",
            ExperimentKind::EffectiveCompare => "effective-compare",
            ExperimentKind::StaggerCheck => "stagger-check",
        }
    }

    fn needs_micro(self) -> bool {
        matches!(self, ExperimentKind::EffectiveCompare | ExperimentKind::StaggerCheck)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatticeSpec {
    pub lx: usize,
    pub ly: usize,
    pub boundary: Boundary,
    pub trunc: u8,
}

impl LatticeSpec {
    pub fn geometry(&self) -> Result<LatticeGeometry> {
        LatticeGeometry::new(self.lx, self.ly, self.boundary)
    }
}

/// Charges as `(m, n, q)` records in one convention.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ChargeSpec {
    pub convention: Picture,
    pub sites: Vec<(usize, usize, i32)>,
}

impl ChargeSpec {
    pub fn resolve(&self, geom: &LatticeGeometry) -> Result<ChargeConfig> {
        ChargeConfig::from_sites(geom, self.convention, self.sites.iter().copied())
    }
}

/// A fully resolved run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub lattice: LatticeSpec,
    pub coupling: Option<CouplingParams>,
    pub charges: ChargeSpec,
    /// Separations for potential scans.
    pub r_list: Vec<usize>,
    /// Levels compared in effective-compare.
    pub levels: usize,
    pub force_regime: bool,
    pub regime_ratio: f64,
    pub validity_fraction: f64,
    pub solver: SolverOptions,
    pub max_states: usize,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, lattice: LatticeSpec) -> Self {
        Self {
            kind,
            lattice,
            coupling: None,
            charges: ChargeSpec::default(),
            r_list: vec![2, 4],
            levels: DEFAULT_LEVELS,
            force_regime: false,
            regime_ratio: DEFAULT_REGIME_RATIO,
            validity_fraction: DEFAULT_VALIDITY_FRACTION,
            solver: SolverOptions::default(),
            max_states: DEFAULT_MAX_STATES,
            output_dir: None,
        }
    }

    pub fn limits(&self) -> EnumerationLimits {
        EnumerationLimits {
            max_states: self.max_states,
        }
    }

    /// Checks every physical constraint before anything is allocated and
    /// reports all violations together.
    pub fn validate(&self) -> Result<()> {
        let mut bad: Vec<String> = Vec::new();
        let geom = match self.lattice.geometry() {
            Ok(g) => Some(g),
            Err(e) => {
                bad.push(e.to_string());
                None
            }
        };
        if self.lattice.trunc > MAX_TRUNCATION {
            bad.push(format!("truncation {} exceeds {MAX_TRUNCATION}", self.lattice.trunc));
        }
        if let Err(e) = self.solver.validate() {
            bad.push(e.to_string());
        }
        if self.max_states == 0 {
            bad.push("max_states must be positive".to_string());
        }
        if !(self.regime_ratio.is_finite() && self.regime_ratio > 0.0) {
            bad.push(format!("regime_ratio must be positive, got {}", self.regime_ratio));
        }
        if !(self.validity_fraction.is_finite() && self.validity_fraction > 0.0) {
            bad.push(format!(
                "validity_fraction must be positive, got {}",
                self.validity_fraction
            ));
        }
        if self.levels == 0 {
            bad.push("levels must be at least 1".to_string());
        }

        match (self.kind, &self.coupling) {
            (ExperimentKind::SectorCount, _) => {}
            (kind, None) => bad.push(format!("{} needs a coupling", kind.name())),
            (kind, Some(c)) if kind.needs_micro() && !c.is_micro() => {
                bad.push(format!("{} needs the rotor couplings lambda, mu, omega", kind.name()))
            }
            (ExperimentKind::GroundState | ExperimentKind::Potential, Some(c)) => {
                if let Err(e) = c.g2() {
                    bad.push(e.to_string());
                }
            }
            _ => {}
        }
        if self.kind == ExperimentKind::EffectiveCompare {
            if let Some(check) = self.coupling.and_then(|c| c.regime(self.regime_ratio)) {
                if !check.ok && !self.force_regime {
                    bad.push(format!("{check}; pass --force-regime to run anyway"));
                }
            }
        }

        if let Some(geom) = &geom {
            match self.charges.resolve(geom) {
                Err(e) => bad.push(e.to_string()),
                Ok(q) => {
                    let strict = self.kind.needs_micro() || q.picture() == Picture::Micro;
                    let report = if strict {
                        if geom.is_bipartite() {
                            validate_charges(&q.to_picture(geom, Picture::Micro), geom)
                        } else {
                            bad.push("microscopic charges need an even periodic lattice".to_string());
                            validate_charges(&q, geom)
                        }
                    } else {
                        validate_charges(&q, geom)
                    };
                    bad.extend(report.violations.iter().map(|v| v.to_string()));
                }
            }
            if self.kind == ExperimentKind::Potential {
                if let Err(e) = crate::observables::check_separations(geom, &self.r_list) {
                    bad.push(e.to_string());
                }
                if !self.charges.sites.is_empty() {
                    bad.push("potential scans place their own charges; remove charges.sites".to_string());
                }
            }
        }

        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("\n  ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    pub iterations: usize,
    pub converged: bool,
    pub max_residual: f64,
}

impl From<&EigenResult> for Convergence {
    fn from(r: &EigenResult) -> Self {
        Self {
            iterations: r.iterations,
            converged: r.converged,
            max_residual: r.residuals.iter().fold(0.0, |m: f64, x| m.max(*x)),
        }
    }
}

/// Everything a run produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub basis_sizes: BTreeMap<String, u128>,
    pub energies: BTreeMap<String, f64>,
    pub results: Value,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    pub convergence: BTreeMap<String, Convergence>,
    pub warnings: Vec<String>,
    /// Files written by [`RunRecord::write`].
    pub artifacts: Vec<PathBuf>,
    #[serde(skip)]
    pub files: Vec<(String, String)>,
}

impl RunRecord {
    fn new(config: &ExperimentConfig) -> Self {
        Self {
            kind: config.kind,
            config: config.clone(),
            basis_sizes: BTreeMap::new(),
            energies: BTreeMap::new(),
            results: Value::Null,
            timings: BTreeMap::new(),
            convergence: BTreeMap::new(),
            warnings: Vec::new(),
            artifacts: Vec::new(),
            files: Vec::new(),
        }
    }

    fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f();
        self.timings.insert(phase.to_string(), start.elapsed().as_secs_f64());
        out
    }

    /// CSV artifact contents by file name.
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|f| f.0 == name).map(|f| f.1.as_str())
    }

    /// Writes the CSV artifacts and `run.json` into `dir`, creating it.
    pub fn write(&mut self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.artifacts.clear();
        for (name, contents) in &self.files {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
            self.artifacts.push(path);
        }
        let path = dir.join("run.json");
        self.artifacts.push(path.clone());
        let mut text = serde_json::to_string_pretty(self).expect("run record serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }
}

/// Validates `config` and runs the experiment it names.
pub fn run(config: &ExperimentConfig) -> Result<RunRecord> {
    config.validate()?;
    match config.kind {
        ExperimentKind::SectorCount => run_sector_count(config),
        ExperimentKind::GroundState => run_ground_state(config),
        ExperimentKind::Potential => run_potential_scan(config),
        ExperimentKind::EffectiveCompare => run_effective_compare(config),
        ExperimentKind::StaggerCheck => run_stagger_check(config),
    }
}

fn coupling(config: &ExperimentConfig) -> Result<CouplingParams> {
    config
        .coupling
        .ok_or_else(|| Error::Config(format!("{} needs a coupling", config.kind.name())))
}

/// Full and projected basis sizes, cross-checked by brute force when the
/// full space is small.
pub fn run_sector_count(config: &ExperimentConfig) -> Result<RunRecord> {
    let mut rec = RunRecord::new(config);
    let geom = config.lattice.geometry()?;
    let charges = config.charges.resolve(&geom)?;
    validate_charges(&charges.to_picture(&geom, Picture::Qed), &geom).into_result()?;
    let trunc = config.lattice.trunc;
    let raw = full_size(geom.n_links(), trunc);
    let sector = rec.timed("enumerate", || {
        enumerate_gauss_sector(&geom, &charges, trunc, config.limits())
    })?;
    rec.basis_sizes.insert("full".into(), raw);
    rec.basis_sizes.insert("projected".into(), sector.len() as u128);

    let brute = if raw <= BRUTE_FORCE_LIMIT {
        let count = rec.timed("brute_force", || {
            let full = enumerate_full(&geom, trunc, EnumerationLimits::default())?;
            let filtered: Vec<&[i8]> = full.states().filter(|s| sector.satisfies_gauss(&geom, s)).collect();
            let same =
                filtered.len() == sector.len() && filtered.iter().enumerate().all(|(i, s)| *s == sector.state(i));
            Ok((filtered.len(), same))
        })?;
        if !count.1 {
            return Err(Error::Unsupported(format!(
                "sector enumeration disagrees with brute force ({} vs {})",
                sector.len(),
                count.0
            )));
        }
        Some(count.0)
    } else {
        None
    };
    rec.results = json!({
        "projected": sector.len(),
        "full": raw.to_string(),
        "brute_force": brute,
    });
    Ok(rec)
}

/// Kogut-Susskind ground state of the configured sector with its field map
/// and, for a colinear pair, the flux-tube report.
pub fn run_ground_state(config: &ExperimentConfig) -> Result<RunRecord> {
    let mut rec = RunRecord::new(config);
    let params = coupling(config)?;
    let geom = config.lattice.geometry()?;
    let charges = config.charges.resolve(&geom)?;
    let g2 = params.g2()?;
    let gs = rec.timed("solve", || {
        ks_ground_state(
            &geom,
            &charges,
            config.lattice.trunc,
            KsCoefficients::from_g2(g2),
            config.limits(),
            &config.solver,
        )
    })?;
    rec.basis_sizes.insert("projected".into(), gs.basis.len() as u128);
    rec.convergence.insert("ks".into(), Convergence::from(&gs.spectrum));
    for (i, e) in gs.spectrum.eigenvalues.iter().enumerate() {
        rec.energies.insert(format!("level_{i}"), *e);
    }
    let map = field_map(gs.spectrum.ground_state().expect("k ≥ 1"), &gs.basis, &geom)?.with_g2(g2);
    let tube = match charges.colinear_pair(&geom) {
        Some(pair) => {
            if let Some(w) = (params.is_micro())
                .then(|| validity_bound_check(&params, pair.separation, config.validity_fraction))
                .transpose()?
                .flatten()
            {
                rec.warnings.push(w);
            }
            Some(flux_tube_report(&map, &geom, &charges)?)
        }
        None if charges.is_empty() => Some(flux_tube_report(&map, &geom, &charges)?),
        None => None,
    };
    let energy_scale = params.energy_scale()?;
    rec.results = json!({
        "g2": g2,
        "energy_scale": energy_scale,
        "eigenvalues": gs.spectrum.eigenvalues,
        "flux_tube": tube,
    });
    rec.files.push(("field_map.csv".into(), map.to_csv()));
    Ok(rec)
}

/// Static potential over the configured separations.
pub fn run_potential_scan(config: &ExperimentConfig) -> Result<RunRecord> {
    let mut rec = RunRecord::new(config);
    let params = coupling(config)?;
    let geom = config.lattice.geometry()?;
    let table = rec.timed("scan", || {
        static_potential(
            &geom,
            &params,
            config.lattice.trunc,
            &config.r_list,
            config.limits(),
            &config.solver,
        )
    })?;
    rec.basis_sizes.insert("vacuum".into(), table.vacuum_size as u128);
    for &(r, n) in &table.sector_sizes {
        rec.basis_sizes.insert(format!("R{r}"), n as u128);
    }
    if let Some(row) = table.rows.first() {
        rec.energies.insert("vacuum".into(), row.e_vacuum);
    }
    for row in &table.rows {
        rec.energies.insert(format!("charged_R{}", row.r), row.e_charged);
        rec.energies.insert(format!("V_R{}", row.r), row.v);
    }
    rec.warnings.extend(table.warnings.iter().cloned());
    if params.is_micro() {
        for row in &table.rows {
            if let Some(w) = validity_bound_check(&params, row.r, config.validity_fraction)? {
                rec.warnings.push(w);
            }
        }
    }
    let slope = table.slope();
    rec.results = json!({
        "g2": table.g2,
        "energy_scale": params.energy_scale()?,
        "slope": slope,
        "slope_strong": table.g2 / 2.0,
        "slope_rel_dev": slope.map(|s| (s - table.g2 / 2.0) / (table.g2 / 2.0)),
        "rows": table.rows,
    });
    rec.files.push(("potential.csv".into(), table.to_csv()));
    Ok(rec)
}

fn lowest_levels(h: &SparseOperator, n: usize, opts: &SolverOptions) -> Result<Vec<f64>> {
    if h.dim() <= opts.dense_cap {
        let mut all = dense_eigenvalues(h, opts.dense_cap)?;
        all.truncate(n);
        Ok(all)
    } else {
        Ok(low_spectrum(h, &opts.with_k(n))?.require_converged()?.eigenvalues)
    }
}

fn aligned(levels: &[f64]) -> Vec<f64> {
    levels.iter().map(|e| e - levels[0]).collect()
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    aligned(a)
        .iter()
        .zip(aligned(b))
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Lowest levels of the full rotor model and of its second-order effective
/// theory on one sector, at the given rotor couplings.
fn rotor_and_effective(
    geom: &LatticeGeometry,
    full_micro: &GaugeSectorBasis,
    sector: &GaugeSectorBasis,
    charges: &ChargeConfig,
    params: &CouplingParams,
    n: usize,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let rotor = build_microscopic_rotor(full_micro, geom, params, charges)?;
    let effective = derive_effective(sector, geom, params)?;
    Ok((lowest_levels(&rotor, n, opts)?, lowest_levels(&effective, n, opts)?))
}

/// Offset-aligned comparison of (a) the full rotor model, (b) the derived
/// effective Hamiltonian and (c) the Kogut-Susskind Hamiltonian with the
/// bridged couplings, all in rotor energy units. Repeats (a) and (b) at
/// `Ω/2` to measure the scaling of the discrepancy.
pub fn run_effective_compare(config: &ExperimentConfig) -> Result<RunRecord> {
    let mut rec = RunRecord::new(config);
    let params = coupling(config)?;
    let (lambda, mu, omega) = params.rotor("effective-compare")?;
    if let Some(check) = params.regime(config.regime_ratio) {
        if !check.ok {
            rec.warnings.push(format!("{check} (forced)"));
        }
    }
    let geom = config.lattice.geometry()?;
    let charges = config.charges.resolve(&geom)?;
    let trunc = config.lattice.trunc;
    let (full, sector) = rec.timed("enumerate", || {
        let full = enumerate_full(&geom, trunc, config.limits())?.convert_picture(&geom);
        let sector = enumerate_gauss_sector(&geom, &charges, trunc, config.limits())?;
        Ok((full, sector))
    })?;
    if sector.is_empty() {
        return Err(Error::EmptyBasis);
    }
    rec.basis_sizes.insert("full".into(), full.len() as u128);
    rec.basis_sizes.insert("projected".into(), sector.len() as u128);
    let n = config.levels.min(sector.len());

    let (rotor, effective) = rec.timed("rotor_and_effective", || {
        rotor_and_effective(&geom, &full, &sector, &charges, &params, n, &config.solver)
    })?;
    let ks = rec.timed("kogut_susskind", || {
        let h = build_kogut_susskind(&sector, &geom, KsCoefficients::rotor_effective(lambda, mu, omega))?;
        lowest_levels(&h, n, &config.solver)
    })?;
    let half = if omega > 0.0 {
        let p = CouplingParams::micro(lambda, mu, omega / 2.0)?;
        Some(rec.timed("half_omega", || {
            rotor_and_effective(&geom, &full, &sector, &charges, &p, n, &config.solver)
        })?)
    } else {
        None
    };

    let discrepancy = max_gap(&rotor, &effective);
    let discrepancy_half = half.as_ref().map(|(a, b)| max_gap(a, b));
    let ratio = discrepancy_half.filter(|d| *d > 0.0).map(|d| discrepancy / d);
    let (ar, ae, ak) = (aligned(&rotor), aligned(&effective), aligned(&ks));
    let mut csv = String::from(EFFECTIVE_COMPARE_HEADER);
    csv.push('\n');
    for i in 0..n {
        csv.push_str(&format!(
            "{i},{},{},{},{},{}\n",
            csv_number(ar[i]),
            csv_number(ae[i]),
            csv_number(ak[i]),
            csv_number(ar[i] - ae[i]),
            csv_number(ae[i] - ak[i])
        ));
    }
    rec.energies.insert("rotor_ground".into(), rotor[0]);
    rec.energies.insert("effective_ground".into(), effective[0]);
    rec.energies.insert("kogut_susskind_ground".into(), ks[0]);
    let g2 = (mu > 0.0 && omega > 0.0).then(|| params.g2()).transpose()?;
    rec.results = json!({
        "levels": n,
        "rotor": rotor,
        "effective": effective,
        "kogut_susskind": ks,
        "plaquette_coupling": 2.0 * omega * omega / lambda,
        "g2": g2,
        "energy_scale": g2.map(|g| 2.0 * mu / g),
        "discrepancy": discrepancy,
        "discrepancy_half_omega": discrepancy_half,
        "scaling_ratio": ratio,
        "effective_vs_kogut_susskind": max_gap(&effective, &ks),
    });
    rec.files.push(("effective_compare.csv".into(), csv));
    Ok(rec)
}

/// Spectra of the rotor model in the `δ` and staggered `E` pictures.
pub fn run_stagger_check(config: &ExperimentConfig) -> Result<RunRecord> {
    let mut rec = RunRecord::new(config);
    let params = coupling(config)?;
    let geom = config.lattice.geometry()?;
    let charges = config.charges.resolve(&geom)?;
    let trunc = config.lattice.trunc;
    let (micro, staggered) = rec.timed("assemble", || {
        let full = enumerate_full(&geom, trunc, config.limits())?;
        let micro_basis = full.convert_picture(&geom);
        Ok((
            build_microscopic_rotor(&micro_basis, &geom, &params, &charges)?,
            stagger_equivalent(&full, &geom, &params, &charges)?,
        ))
    })?;
    rec.basis_sizes.insert("full".into(), micro.dim() as u128);
    let n = if micro.dim() <= config.solver.dense_cap {
        micro.dim()
    } else {
        config.solver.k.min(micro.dim())
    };
    let (a, b) = rec.timed("spectra", || {
        Ok((
            lowest_levels(&micro, n, &config.solver)?,
            lowest_levels(&staggered, n, &config.solver)?,
        ))
    })?;
    let diff = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    rec.energies.insert("micro_ground".into(), a[0]);
    rec.energies.insert("staggered_ground".into(), b[0]);
    if diff > 1e-10 {
        rec.warnings.push(format!("spectra differ by {diff:e}"));
    }
    rec.results = json!({
        "levels_compared": n,
        "max_abs_diff": diff,
        "agree": diff <= 1e-10,
    });
    let mut csv = String::from("level,micro,staggered\n");
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        csv.push_str(&format!("{i},{},{}\n", csv_number(*x), csv_number(*y)));
    }
    rec.files.push(("stagger_check.csv".into(), csv));
    Ok(rec)
}

/// The default flux-tube setup: 5×3 open lattice, `Λ = 2`.
pub fn flux_tube_config(kind: ExperimentKind, g2: f64) -> Result<ExperimentConfig> {
    let mut c = ExperimentConfig::new(
        kind,
        LatticeSpec {
            lx: 5,
            ly: 3,
            boundary: Boundary::Open,
            trunc: DEFAULT_TRUNCATION,
        },
    );
    c.coupling = Some(CouplingParams::qed(g2)?);
    if kind == ExperimentKind::GroundState {
        let geom = c.lattice.geometry()?;
        let p = place_pair(&geom, 2)?;
        let sites = p
            .charges
            .charges()
            .iter()
            .map(|&(v, q)| {
                let (m, n) = geom.vertex_coords(v);
                (m, n, q)
            })
            .collect();
        c.charges = ChargeSpec {
            convention: Picture::Qed,
            sites,
        };
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plaquette(kind: ExperimentKind, trunc: u8) -> ExperimentConfig {
        ExperimentConfig::new(
            kind,
            LatticeSpec {
                lx: 2,
                ly: 2,
                boundary: Boundary::Open,
                trunc,
            },
        )
    }

    #[test]
    fn sector_counts() {
        for (t, want) in [(1u8, 3usize), (0, 1)] {
            let rec = run(&plaquette(ExperimentKind::SectorCount, t)).unwrap();
            assert_eq!(rec.basis_sizes["projected"], want as u128);
            assert_eq!(rec.results["brute_force"], json!(want));
        }
        let mut c = plaquette(ExperimentKind::SectorCount, 1);
        c.lattice.lx = 3;
        let rec = run(&c).unwrap();
        assert_eq!(rec.basis_sizes["full"], 2187);
    }

    #[test]
    fn validation_collects_every_problem() {
        let mut c = plaquette(ExperimentKind::EffectiveCompare, 1);
        c.coupling = Some(CouplingParams::qed(1.0).unwrap());
        c.charges.sites = vec![(0, 0, 1)];
        let msg = run(&c).unwrap_err().to_string();
        assert!(msg.contains("lambda, mu, omega"), "{msg}");
        assert!(msg.contains("sublattice A sum to 1"), "{msg}");

        let mut c = plaquette(ExperimentKind::EffectiveCompare, 1);
        c.coupling = Some(CouplingParams::micro(1.0, 1e-5, 0.1).unwrap());
        let msg = run(&c).unwrap_err().to_string();
        assert!(msg.contains("--force-regime"), "{msg}");
        c.force_regime = true;
        let rec = run(&c).unwrap();
        assert!(rec.warnings[0].contains("forced"));
    }

    #[test]
    fn potential_refuses_odd_separation() {
        let mut c = flux_tube_config(ExperimentKind::Potential, 10.0).unwrap();
        c.r_list = vec![2, 3];
        let err = run(&c).unwrap_err();
        assert!(err.to_string().contains("only even R"), "{err}");
    }

    #[test]
    fn stagger_check_on_a_plaquette() {
        let mut c = plaquette(ExperimentKind::StaggerCheck, 1);
        c.coupling = Some(CouplingParams::micro(1.0, 0.05, 0.2).unwrap());
        let rec = run(&c).unwrap();
        assert_eq!(rec.results["agree"], json!(true));
        assert!((rec.energies["micro_ground"] - rec.energies["staggered_ground"]).abs() < 1e-12);
        c.charges = ChargeSpec {
            convention: Picture::Micro,
            sites: vec![(0, 0, 1), (1, 0, 1)],
        };
        assert!(matches!(run(&c), Err(Error::Config(_))));
    }

    #[test]
    fn no_hopping_reduces_everything_to_the_electric_term() {
        let mut c = plaquette(ExperimentKind::EffectiveCompare, 2);
        c.coupling = Some(CouplingParams::micro(1.0, 1e-3, 0.0).unwrap());
        let rec = run(&c).unwrap();
        assert_eq!(rec.results["discrepancy"], json!(0.0));
        assert_eq!(rec.results["effective_vs_kogut_susskind"], json!(0.0));
        assert!(rec
            .file("effective_compare.csv")
            .unwrap()
            .starts_with(EFFECTIVE_COMPARE_HEADER));
    }
}
