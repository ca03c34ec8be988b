//! Measurements on eigenstates: link-field maps, flux tubes and the static
//! potential between two opposite charges.

use serde::Serialize;

use crate::basis::{
    enumerate_gauss_sector, validate_charges, ChargeConfig, EnumerationLimits, GaugeSectorBasis, Picture,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_kogut_susskind, CouplingParams, KsCoefficients};
use crate::lattice::{Boundary, Direction, LatticeGeometry, LinkId, VertexId};
use crate::solver::{low_spectrum, EigenResult, SolverOptions};

pub const FIELD_MAP_HEADER: &str = "m,n,k,E_mean,E2_mean,delta_mean";
pub const POTENTIAL_HEADER: &str = "R,E_charged,E_vacuum,V,V_strong,rel_dev";
pub const DEFAULT_VALIDITY_FRACTION: f64 = 0.1;
const NORM_TOL: f64 = 1e-8;

/// CSV number: shortest round-trip form, no negative zero.
pub fn csv_number(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldMapMeta {
    /// QED-picture charges as `(m, n, q)`.
    pub charges: Vec<(usize, usize, i32)>,
    pub trunc: u8,
    pub g2: Option<f64>,
}

/// Per-link expectation values of a state, indexed by link ordinal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldMap {
    /// `(m, n, k)` of each link.
    pub links: Vec<(usize, usize, u8)>,
    pub e_mean: Vec<f64>,
    pub e2_mean: Vec<f64>,
    /// `⟨δ⟩ = (−1)^{m+n} ⟨E⟩` with `(m, n)` the link anchor.
    pub delta_mean: Vec<f64>,
    pub meta: FieldMapMeta,
}

impl FieldMap {
    pub fn with_g2(mut self, g2: f64) -> Self {
        self.meta.g2 = Some(g2);
        self
    }

    /// `Σ_{l∋v} ± ⟨E_l⟩`, the measured divergence at `v`.
    pub fn divergence(&self, geom: &LatticeGeometry, v: VertexId) -> f64 {
        geom.incident_links(v)
            .iter()
            .map(|&(l, s)| f64::from(s) * self.e_mean[l.0])
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(FIELD_MAP_HEADER);
        out.push('\n');
        for (i, &(m, n, k)) in self.links.iter().enumerate() {
            out.push_str(&format!(
                "{m},{n},{k},{},{},{}\n",
                csv_number(self.e_mean[i]),
                csv_number(self.e2_mean[i]),
                csv_number(self.delta_mean[i])
            ));
        }
        out
    }
}

/// Diagonal link observables of the unit-norm `state` over `basis`.
pub fn field_map(state: &[f64], basis: &GaugeSectorBasis, geom: &LatticeGeometry) -> Result<FieldMap> {
    if state.len() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: state.len(),
        });
    }
    if basis.n_links() != geom.n_links() {
        return Err(Error::LengthMismatch {
            expected: geom.n_links(),
            got: basis.n_links(),
        });
    }
    let norm2: f64 = state.iter().map(|a| a * a).sum();
    if (norm2 - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized((norm2 - 1.0).abs()));
    }
    let n_links = geom.n_links();
    let signs: Vec<f64> = geom.links().map(|l| f64::from(geom.link_stagger_sign(l))).collect();
    // a micro-picture basis stores δ; convert each entry to E
    let to_e: Vec<f64> = match basis.picture() {
        Picture::Qed => vec![1.0; n_links],
        Picture::Micro => signs.clone(),
    };
    let mut e = vec![0.0; n_links];
    let mut e2 = vec![0.0; n_links];
    for (amp, s) in state.iter().zip(basis.states()) {
        let p = amp * amp;
        if p == 0.0 {
            continue;
        }
        for l in 0..n_links {
            let v = f64::from(s[l]) * to_e[l];
            e[l] += p * v;
            e2[l] += p * v * v;
        }
    }
    let charges = basis
        .charges()
        .map(|c| {
            c.to_picture(geom, Picture::Qed)
                .charges()
                .iter()
                .map(|&(v, q)| {
                    let (m, n) = geom.vertex_coords(v);
                    (m, n, q)
                })
                .collect()
        })
        .unwrap_or_default();
    Ok(FieldMap {
        links: geom
            .links()
            .map(|l| {
                let c = geom.link_coords(l);
                (c.m, c.n, c.dir.k())
            })
            .collect(),
        delta_mean: e.iter().zip(&signs).map(|(a, s)| a * s).collect(),
        e_mean: e,
        e2_mean: e2,
        meta: FieldMapMeta {
            charges,
            trunc: basis.trunc(),
            g2: None,
        },
    })
}

/// Straight-line flux between a `±1` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxTubeReport {
    /// Tube links from the positive to the negative charge.
    pub tube: Vec<(usize, usize, u8)>,
    /// `⟨E⟩` along the tube, oriented from the positive charge.
    pub on_tube: Vec<f64>,
    pub off_tube_max: f64,
    /// `⟨δ⟩` is nonzero and changes sign from each tube link to the next.
    pub alternates: bool,
}

impl FluxTubeReport {
    pub fn on_tube_min(&self) -> Option<f64> {
        self.on_tube.iter().copied().reduce(f64::min)
    }
}

/// Links on the straight segment joining the charges of `pair`, ordered
/// from the positive charge, with the sign of the flux direction.
pub fn tube_links(geom: &LatticeGeometry, charges: &ChargeConfig) -> Result<Vec<(LinkId, f64)>> {
    if charges.is_empty() {
        return Ok(Vec::new());
    }
    let pair = charges
        .colinear_pair(geom)
        .ok_or_else(|| Error::Unsupported("flux-tube report needs a single colinear ±1 pair".to_string()))?;
    let (pm, pn) = geom.vertex_coords(pair.positive);
    let (nm, nn) = geom.vertex_coords(pair.negative);
    let mut out = Vec::with_capacity(pair.separation);
    if pair.horizontal {
        let forward = nm > pm;
        for step in 0..pair.separation {
            let m = if forward { pm + step } else { pm - step - 1 };
            let l = geom.link(m, pn, Direction::X).expect("tube inside the lattice");
            out.push((l, if forward { 1.0 } else { -1.0 }));
        }
    } else {
        let forward = nn > pn;
        for step in 0..pair.separation {
            let n = if forward { pn + step } else { pn - step - 1 };
            let l = geom.link(pm, n, Direction::Y).expect("tube inside the lattice");
            out.push((l, if forward { 1.0 } else { -1.0 }));
        }
    }
    Ok(out)
}

pub fn flux_tube_report(map: &FieldMap, geom: &LatticeGeometry, charges: &ChargeConfig) -> Result<FluxTubeReport> {
    if map.e_mean.len() != geom.n_links() {
        return Err(Error::LengthMismatch {
            expected: geom.n_links(),
            got: map.e_mean.len(),
        });
    }
    let tube = tube_links(geom, charges)?;
    let mut on = vec![false; geom.n_links()];
    for &(l, _) in &tube {
        on[l.0] = true;
    }
    let off_tube_max = map
        .e_mean
        .iter()
        .zip(&on)
        .filter(|(_, &t)| !t)
        .fold(0.0f64, |m, (e, _)| m.max(e.abs()));
    let deltas: Vec<f64> = tube.iter().map(|&(l, _)| map.delta_mean[l.0]).collect();
    let alternates = deltas.iter().all(|d| *d != 0.0) && deltas.windows(2).all(|w| w[0].signum() != w[1].signum());
    Ok(FluxTubeReport {
        tube: tube.iter().map(|&(l, _)| map.links[l.0]).collect(),
        on_tube: tube.iter().map(|&(l, s)| s * map.e_mean[l.0]).collect(),
        off_tube_max,
        alternates,
    })
}

/// `Some(warning)` when the tube length `r` is not small against `λ/μ`,
/// i.e. `r ≥ fraction · λ/μ`.
pub fn validity_bound_check(params: &CouplingParams, r: usize, fraction: f64) -> Result<Option<String>> {
    let (lambda, mu, _) = params.rotor("flux-tube validity bound")?;
    if mu == 0.0 {
        return Ok(None);
    }
    let ratio = lambda / mu;
    let limit = fraction * ratio;
    if r as f64 >= limit * (1.0 - 1e-12) {
        Ok(Some(format!(
            "tube length R = {r} is not small against λ/μ = {ratio} (limit {fraction}·λ/μ = {limit})"
        )))
    } else {
        Ok(None)
    }
}

/// Ground state of the Kogut-Susskind Hamiltonian on one Gauss sector.
#[derive(Debug, Clone)]
pub struct SectorGroundState {
    pub basis: GaugeSectorBasis,
    pub spectrum: EigenResult,
}

pub fn ks_ground_state(
    geom: &LatticeGeometry,
    charges: &ChargeConfig,
    trunc: u8,
    coefficients: KsCoefficients,
    limits: EnumerationLimits,
    opts: &SolverOptions,
) -> Result<SectorGroundState> {
    let basis = enumerate_gauss_sector(geom, charges, trunc, limits)?;
    if basis.is_empty() {
        return Err(Error::EmptyBasis);
    }
    let h = build_kogut_susskind(&basis, geom, coefficients)?;
    let spectrum = low_spectrum(&h, opts)?.require_converged()?;
    Ok(SectorGroundState { basis, spectrum })
}

/// Placement of a `+1` at `(m0, n0)` and `−1` at `(m0 + r, n0)`, centred
/// on the middle row.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPlacement {
    pub charges: ChargeConfig,
    pub origin: (usize, usize),
    pub touches_boundary: bool,
}

pub fn place_pair(geom: &LatticeGeometry, r: usize) -> Result<PairPlacement> {
    if r == 0 {
        return Err(Error::InvalidParams("charge separation must be at least 1".to_string()));
    }
    if r >= geom.lx() {
        return Err(Error::InvalidParams(format!(
            "separation R = {r} does not fit in a row of {} vertices",
            geom.lx()
        )));
    }
    let n0 = geom.ly() / 2;
    let m0 = (geom.lx() - 1 - r) / 2;
    let charges = ChargeConfig::pair(geom, m0, n0, r)?;
    let touches_boundary =
        geom.boundary() == Boundary::Open && (m0 == 0 || m0 + r == geom.lx() - 1 || n0 == 0 || n0 == geom.ly() - 1);
    Ok(PairPlacement {
        charges,
        origin: (m0, n0),
        touches_boundary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialRow {
    pub r: usize,
    pub e_charged: f64,
    pub e_vacuum: f64,
    pub v: f64,
    pub v_strong: f64,
    pub rel_dev: f64,
}

/// `V(R) = E_charged − E_vacuum` in units where the electric coupling is
/// `g²/2`, against the strong-coupling line `g² R / 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialTable {
    pub g2: f64,
    pub rows: Vec<PotentialRow>,
    pub warnings: Vec<String>,
    pub sector_sizes: Vec<(usize, usize)>,
    pub vacuum_size: usize,
}

impl PotentialTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(POTENTIAL_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.r,
                csv_number(row.e_charged),
                csv_number(row.e_vacuum),
                csv_number(row.v),
                csv_number(row.v_strong),
                csv_number(row.rel_dev)
            ));
        }
        out
    }

    /// Least-squares slope of `V` against `R`.
    pub fn slope(&self) -> Option<f64> {
        if self.rows.len() < 2 {
            return None;
        }
        let n = self.rows.len() as f64;
        let mr = self.rows.iter().map(|r| r.r as f64).sum::<f64>() / n;
        let mv = self.rows.iter().map(|r| r.v).sum::<f64>() / n;
        let sxy: f64 = self.rows.iter().map(|r| (r.r as f64 - mr) * (r.v - mv)).sum();
        let sxx: f64 = self.rows.iter().map(|r| (r.r as f64 - mr).powi(2)).sum();
        Some(sxy / sxx)
    }
}

/// Checks every separation before any diagonalization: each must be even
/// (both charges on one sublattice) and fit in a row.
pub fn check_separations(geom: &LatticeGeometry, r_list: &[usize]) -> Result<Vec<PairPlacement>> {
    if r_list.is_empty() {
        return Err(Error::InvalidParams("empty list of separations".to_string()));
    }
    let mut placements = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let p = place_pair(geom, r)?;
        validate_charges(&p.charges.to_picture(geom, Picture::Micro), geom).into_result()?;
        placements.push(p);
    }
    Ok(placements)
}

/// Static potential for each separation in `r_list` (sorted ascending,
/// duplicates removed). Rotor-form couplings enter through the bridge
/// `g⁴ = λμ/(2Ω²)`, so energies are in units of `U₀`.
pub fn static_potential(
    geom: &LatticeGeometry,
    params: &CouplingParams,
    trunc: u8,
    r_list: &[usize],
    limits: EnumerationLimits,
    opts: &SolverOptions,
) -> Result<PotentialTable> {
    let g2 = params.g2()?;
    let mut rs = r_list.to_vec();
    rs.sort_unstable();
    rs.dedup();
    let placements = check_separations(geom, &rs)?;
    let coefficients = KsCoefficients::from_g2(g2);
    let opts = opts.with_k(1);

    let vacuum = ks_ground_state(
        geom,
        &ChargeConfig::neutral(Picture::Qed),
        trunc,
        coefficients,
        limits,
        &opts,
    )?;
    let e_vacuum = vacuum.spectrum.eigenvalues[0];
    let mut rows = Vec::with_capacity(rs.len());
    let mut warnings = Vec::new();
    let mut sector_sizes = Vec::with_capacity(rs.len());
    for (&r, p) in rs.iter().zip(&placements) {
        if p.touches_boundary {
            warnings.push(format!(
                "R = {r}: flux tube from ({}, {}) touches the open boundary",
                p.origin.0, p.origin.1
            ));
        }
        let charged = ks_ground_state(geom, &p.charges, trunc, coefficients, limits, &opts)?;
        let e_charged = charged.spectrum.eigenvalues[0];
        let v = e_charged - e_vacuum;
        let v_strong = g2 * r as f64 / 2.0;
        sector_sizes.push((r, charged.basis.len()));
        rows.push(PotentialRow {
            r,
            e_charged,
            e_vacuum,
            v,
            v_strong,
            rel_dev: (v - v_strong) / v_strong,
        });
    }
    Ok(PotentialTable {
        g2,
        rows,
        warnings,
        sector_sizes,
        vacuum_size: vacuum.basis.len(),
    })
}
