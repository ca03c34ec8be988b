//! Static charges, link-field configurations and truncated bases.
//!
//! Two pictures coexist. In the QED picture link values are electric
//! fields `E` and charges `Q` obey `div E = Q`. In the microscopic picture
//! link values are condensate number deviations `δ` and charges `Δ` obey a
//! plain sum over incident links. They are related by the stagger sign of
//! the link's anchor vertex, `E = (-1)^(m+n) δ`, `Q = (-1)^(m+n) Δ`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, Sublattice, VertexId};

/// Upper bound on the number of stored basis states.
pub const DEFAULT_MAX_STATES: usize = 50_000_000;
/// Largest supported truncation; link values are stored as `i8`.
pub const MAX_TRUNCATION: u8 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    /// Electric field `E` and charge `Q`.
    #[default]
    Qed,
    /// Number deviation `δ` and trap offset `Δ`.
    Micro,
}

impl Picture {
    pub fn other(self) -> Self {
        match self {
            Picture::Qed => Picture::Micro,
            Picture::Micro => Picture::Qed,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Picture::Qed => "QED",
            Picture::Micro => "microscopic",
        }
    }
}

/// Integer static charges on vertices, sorted by vertex.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChargeConfig {
    picture: Picture,
    charges: Vec<(VertexId, i32)>,
}

impl ChargeConfig {
    pub fn neutral(picture: Picture) -> Self {
        Self {
            picture,
            charges: Vec::new(),
        }
    }

    /// Builds a configuration from `(m, n, value)` records. Zero values are
    /// dropped; repeated vertices are an error.
    pub fn from_sites(
        geom: &LatticeGeometry,
        picture: Picture,
        sites: impl IntoIterator<Item = (usize, usize, i32)>,
    ) -> Result<Self> {
        let mut charges = Vec::new();
        for (m, n, q) in sites {
            let v = geom.vertex(m, n).ok_or_else(|| {
                Error::InvalidParams(format!(
                    "charge at ({m},{n}) lies outside the {}x{} lattice",
                    geom.lx(),
                    geom.ly()
                ))
            })?;
            charges.push((v, q));
        }
        charges.sort_by_key(|c| c.0);
        if let Some(w) = charges.windows(2).find(|w| w[0].0 == w[1].0) {
            let (m, n) = geom.vertex_coords(w[0].0);
            return Err(Error::InvalidParams(format!(
                "vertex ({m},{n}) is listed more than once"
            )));
        }
        charges.retain(|c| c.1 != 0);
        Ok(Self { picture, charges })
    }

    /// A `+1`/`-1` pair on row `n`, `separation` links apart, starting at `m`.
    pub fn pair(geom: &LatticeGeometry, m: usize, n: usize, separation: usize) -> Result<Self> {
        Self::from_sites(geom, Picture::Qed, [(m, n, 1), (m + separation, n, -1)])
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    /// Nonzero charges, sorted by vertex.
    pub fn charges(&self) -> &[(VertexId, i32)] {
        &self.charges
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    pub fn total(&self) -> i64 {
        self.charges.iter().map(|c| i64::from(c.1)).sum()
    }

    pub fn at(&self, v: VertexId) -> i32 {
        self.charges
            .binary_search_by_key(&v, |c| c.0)
            .map_or(0, |i| self.charges[i].1)
    }

    /// Dense per-vertex charge vector.
    pub fn density(&self, geom: &LatticeGeometry) -> Vec<i32> {
        let mut q = vec![0; geom.n_vertices()];
        for &(v, c) in &self.charges {
            q[v.0] = c;
        }
        q
    }

    /// Flips every charge: `Q -> -Q`.
    pub fn conjugate(&self) -> Self {
        Self {
            picture: self.picture,
            charges: self.charges.iter().map(|&(v, q)| (v, -q)).collect(),
        }
    }

    /// Converts to `picture` via `Q = (-1)^(m+n) Δ`.
    pub fn to_picture(&self, geom: &LatticeGeometry, picture: Picture) -> Self {
        if picture == self.picture {
            return self.clone();
        }
        Self {
            picture,
            charges: self
                .charges
                .iter()
                .map(|&(v, q)| (v, i32::from(geom.stagger_sign(v)) * q))
                .collect(),
        }
    }

    /// `Some(separation)` if the QED charges are a single `±1` pair on a
    /// common row or column.
    pub fn colinear_pair(&self, geom: &LatticeGeometry) -> Option<PairGeometry> {
        let qed = self.to_picture(geom, Picture::Qed);
        let [(a, qa), (b, qb)] = qed.charges[..] else {
            return None;
        };
        let (positive, negative) = match (qa, qb) {
            (1, -1) => (a, b),
            (-1, 1) => (b, a),
            _ => return None,
        };
        let (pm, pn) = geom.vertex_coords(positive);
        let (nm, nn) = geom.vertex_coords(negative);
        if pn == nn {
            Some(PairGeometry {
                positive,
                negative,
                horizontal: true,
                separation: pm.abs_diff(nm),
            })
        } else if pm == nm {
            Some(PairGeometry {
                positive,
                negative,
                horizontal: false,
                separation: pn.abs_diff(nn),
            })
        } else {
            None
        }
    }
}

/// A `+1`/`-1` pair on a common row or column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairGeometry {
    pub positive: VertexId,
    pub negative: VertexId,
    pub horizontal: bool,
    pub separation: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ChargeViolation {
    /// The charges do not sum to zero.
    NotNeutral { total: i64 },
    /// Trap offsets on one sublattice do not sum to zero.
    SublatticeSum { sublattice: char, sum: i64 },
    /// A lone `±1` pair at odd separation: both ends land on different
    /// sublattices with equal-sign offsets.
    OddSeparation { separation: usize },
}

impl fmt::Display for ChargeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChargeViolation::NotNeutral { total } => {
                write!(f, "total charge is {total}; it has to be zero")
            }
            ChargeViolation::SublatticeSum { sublattice, sum } => write!(
                f,
                "trap offsets on sublattice {sublattice} sum to {sum}; each sublattice sum must be zero"
            ),
            ChargeViolation::OddSeparation { separation } => write!(
                f,
                "charge pair separated by R = {separation}: an odd R puts the charges on opposite \
                 sublattices with same-sign offsets, so only even R can be realized"
            ),
        }
    }
}

/// Outcome of [`validate_charges`]; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ChargeReport {
    pub picture: Picture,
    pub violations: Vec<ChargeViolation>,
}

impl ChargeReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::Charges(self))
        }
    }
}

impl fmt::Display for ChargeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "{} charges valid", self.picture.name());
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Checks neutrality (QED picture), or both sublattice sums (microscopic
/// picture). Violations are returned as data.
pub fn validate_charges(cfg: &ChargeConfig, geom: &LatticeGeometry) -> ChargeReport {
    let mut violations = Vec::new();
    match cfg.picture {
        Picture::Qed => {
            let total = cfg.total();
            if total != 0 {
                violations.push(ChargeViolation::NotNeutral { total });
            }
        }
        Picture::Micro => {
            let (mut a, mut b) = (0i64, 0i64);
            for &(v, d) in &cfg.charges {
                match geom.sublattice(v) {
                    Sublattice::A => a += i64::from(d),
                    Sublattice::B => b += i64::from(d),
                }
            }
            // Q = (-1)^(m+n) Δ
            if a != b {
                violations.push(ChargeViolation::NotNeutral { total: a - b });
            }
            if a != 0 {
                violations.push(ChargeViolation::SublatticeSum {
                    sublattice: 'A',
                    sum: a,
                });
            }
            if b != 0 {
                violations.push(ChargeViolation::SublatticeSum {
                    sublattice: 'B',
                    sum: b,
                });
            }
            if !violations.is_empty() {
                if let Some(pair) = cfg.colinear_pair(geom) {
                    if pair.separation % 2 == 1 {
                        violations.push(ChargeViolation::OddSeparation {
                            separation: pair.separation,
                        });
                    }
                }
            }
        }
    }
    ChargeReport {
        picture: cfg.picture,
        violations,
    }
}

/// One link-field configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinkConfig {
    pub picture: Picture,
    pub values: Vec<i8>,
}

impl LinkConfig {
    pub fn zeros(picture: Picture, n_links: usize) -> Self {
        Self {
            picture,
            values: vec![0; n_links],
        }
    }

    /// `E_l = (-1)^(m+n) δ_l` with `(m, n)` the anchor of `l`; an involution.
    pub fn convert(&self, geom: &LatticeGeometry) -> Self {
        let mut values = self.values.clone();
        stagger_in_place(geom, &mut values);
        Self {
            picture: self.picture.other(),
            values,
        }
    }
}

fn stagger_in_place(geom: &LatticeGeometry, values: &mut [i8]) {
    for l in geom.links() {
        values[l.0] *= geom.link_stagger_sign(l);
    }
}

/// Limits applied while enumerating a basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub max_states: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self {
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

/// An ordered set of truncated link configurations, either the full
/// product space or one Gauss-law sector.
///
/// States are stored row-major in one flat buffer and kept in lexicographic
/// order over link ordinals, so lookups are binary searches.
#[derive(Debug, Clone)]
pub struct GaugeSectorBasis {
    n_links: usize,
    trunc: u8,
    picture: Picture,
    charges: Option<ChargeConfig>,
    data: Vec<i8>,
}

impl GaugeSectorBasis {
    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.n_links).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn n_links(&self) -> usize {
        self.n_links
    }

    pub fn trunc(&self) -> u8 {
        self.trunc
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    /// The sector's charges; `None` for the unconstrained product basis.
    pub fn charges(&self) -> Option<&ChargeConfig> {
        self.charges.as_ref()
    }

    pub fn is_projected(&self) -> bool {
        self.charges.is_some()
    }

    pub fn state(&self, i: usize) -> &[i8] {
        &self.data[i * self.n_links..(i + 1) * self.n_links]
    }

    pub fn link_config(&self, i: usize) -> LinkConfig {
        LinkConfig {
            picture: self.picture,
            values: self.state(i).to_vec(),
        }
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &[i8]> + '_ {
        self.data.chunks_exact(self.n_links.max(1))
    }

    /// Ordinal of `config`, or `None` if it is not in the basis.
    pub fn index_of(&self, config: &[i8]) -> Option<usize> {
        if config.len() != self.n_links {
            return None;
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            match self.state(mid).cmp(config) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Picture-aware lookup of an owned configuration.
    pub fn state_index(&self, config: &LinkConfig) -> Option<usize> {
        if config.picture != self.picture {
            return None;
        }
        self.index_of(&config.values)
    }

    /// The same basis in the other picture, re-sorted.
    pub fn convert_picture(&self, geom: &LatticeGeometry) -> Self {
        let mut rows: Vec<Vec<i8>> = self
            .states()
            .map(|s| {
                let mut s = s.to_vec();
                stagger_in_place(geom, &mut s);
                s
            })
            .collect();
        rows.sort_unstable();
        let picture = self.picture.other();
        Self {
            n_links: self.n_links,
            trunc: self.trunc,
            picture,
            charges: self.charges.as_ref().map(|c| c.to_picture(geom, picture)),
            data: rows.concat(),
        }
    }

    /// Whether a configuration satisfies the sector's Gauss law.
    pub fn satisfies_gauss(&self, geom: &LatticeGeometry, config: &[i8]) -> bool {
        let Some(charges) = &self.charges else {
            return true;
        };
        gauss_holds(geom, self.picture, &charges.density(geom), config)
    }
}

pub(crate) fn gauss_holds(geom: &LatticeGeometry, picture: Picture, density: &[i32], config: &[i8]) -> bool {
    geom.vertices().all(|v| {
        let lhs = match picture {
            Picture::Qed => geom.divergence(v, config),
            Picture::Micro => geom.incident_sum(v, config),
        };
        lhs == density[v.0]
    })
}

fn check_trunc(trunc: u8) -> Result<()> {
    if trunc > MAX_TRUNCATION {
        return Err(Error::InvalidParams(format!(
            "truncation {trunc} exceeds the supported maximum {MAX_TRUNCATION}"
        )));
    }
    Ok(())
}

/// `(2Λ + 1)^n_links`, saturating.
pub fn full_size(n_links: usize, trunc: u8) -> u128 {
    let base = 2 * u128::from(trunc) + 1;
    let mut size: u128 = 1;
    for _ in 0..n_links {
        size = size.saturating_mul(base);
    }
    size
}

/// Every configuration with `|value| ≤ Λ` on every link, in QED picture.
pub fn enumerate_full(geom: &LatticeGeometry, trunc: u8, limits: EnumerationLimits) -> Result<GaugeSectorBasis> {
    check_trunc(trunc)?;
    let n_links = geom.n_links();
    let size = full_size(n_links, trunc);
    if size > limits.max_states as u128 {
        return Err(Error::Capacity {
            needed: size,
            cap: limits.max_states,
        });
    }
    let size = size as usize;
    let t = trunc as i8;
    let mut data = Vec::with_capacity(size * n_links);
    let mut current = vec![-t; n_links];
    for _ in 0..size {
        data.extend_from_slice(&current);
        // odometer, last link fastest
        for slot in current.iter_mut().rev() {
            if *slot < t {
                *slot += 1;
                break;
            }
            *slot = -t;
        }
    }
    Ok(GaugeSectorBasis {
        n_links,
        trunc,
        picture: Picture::Qed,
        charges: None,
        data,
    })
}

/// All configurations with `|E_l| ≤ Λ` and `div E = Q` at every vertex.
///
/// Charges given in the microscopic picture are converted first; the
/// returned basis is always in the QED picture. Search is depth-first over
/// link ordinals with ascending values, pruning any branch where a vertex
/// can no longer reach its charge with the links it has left.
pub fn enumerate_gauss_sector(
    geom: &LatticeGeometry,
    charges: &ChargeConfig,
    trunc: u8,
    limits: EnumerationLimits,
) -> Result<GaugeSectorBasis> {
    check_trunc(trunc)?;
    if charges.picture() == Picture::Micro {
        geom.require_bipartite("microscopic charges")?;
    }
    let charges = charges.to_picture(geom, Picture::Qed);
    let n_links = geom.n_links();
    let mut search = SectorSearch {
        geom,
        t: trunc as i32,
        target: charges.density(geom),
        partial: vec![0; geom.n_vertices()],
        remaining: geom.vertices().map(|v| geom.incident_links(v).len() as i32).collect(),
        current: vec![0; n_links],
        data: Vec::new(),
        count: 0,
        max_states: limits.max_states,
    };
    search.descend(0)?;
    Ok(GaugeSectorBasis {
        n_links,
        trunc,
        picture: Picture::Qed,
        charges: Some(charges),
        data: search.data,
    })
}

struct SectorSearch<'a> {
    geom: &'a LatticeGeometry,
    t: i32,
    target: Vec<i32>,
    partial: Vec<i32>,
    remaining: Vec<i32>,
    current: Vec<i8>,
    data: Vec<i8>,
    count: usize,
    max_states: usize,
}

impl SectorSearch<'_> {
    fn feasible(&self, v: usize) -> bool {
        (self.target[v] - self.partial[v]).abs() <= self.t * self.remaining[v]
    }

    fn descend(&mut self, link: usize) -> Result<()> {
        if link == self.current.len() {
            self.count += 1;
            if self.count > self.max_states {
                return Err(Error::Capacity {
                    needed: self.count as u128,
                    cap: self.max_states,
                });
            }
            self.data.extend_from_slice(&self.current);
            return Ok(());
        }
        let (tail, head) = self.geom.link_endpoints(crate::lattice::LinkId(link));
        let (tail, head) = (tail.0, head.0);
        self.remaining[tail] -= 1;
        self.remaining[head] -= 1;
        for value in -self.t..=self.t {
            self.partial[tail] += value;
            self.partial[head] -= value;
            if self.feasible(tail) && self.feasible(head) {
                self.current[link] = value as i8;
                self.descend(link + 1)?;
            }
            self.partial[tail] -= value;
            self.partial[head] += value;
        }
        self.remaining[tail] += 1;
        self.remaining[head] += 1;
        self.current[link] = 0;
        Ok(())
    }
}
