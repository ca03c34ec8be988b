//! Two-dimensional square lattice: vertices, oriented links and plaquettes.
//!
//! Vertex `(m, n)` has ordinal `n * lx + m`. Every link is named by the
//! vertex it emanates from and its direction: `X` points to `(m + 1, n)`,
//! `Y` to `(m, n + 1)`. Link ordinals follow vertex order, `X` before `Y`.
//! A plaquette is anchored at its lower-left vertex.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Open => f.write_str("open"),
            Boundary::Periodic => f.write_str("periodic"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaquetteId(pub usize);

/// Link direction; `X` is `k = 1`, `Y` is `k = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    X,
    Y,
}

impl Direction {
    /// The `k` label, 1 for horizontal and 2 for vertical links.
    pub fn k(self) -> u8 {
        match self {
            Direction::X => 1,
            Direction::Y => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sublattice {
    /// `m + n` even.
    A,
    /// `m + n` odd.
    B,
}

/// Coordinates of a link: its anchor vertex and direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinkCoord {
    pub m: usize,
    pub n: usize,
    pub dir: Direction,
}

/// A link together with an orientation sign.
pub type SignedLink = (LinkId, i8);

/// Two orthogonal links meeting at a plaquette corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Corner {
    pub x_link: LinkId,
    pub y_link: LinkId,
    pub vertex: VertexId,
}

#[derive(Debug, Clone)]
pub struct LatticeGeometry {
    lx: usize,
    ly: usize,
    boundary: Boundary,
    links: Vec<LinkCoord>,
    // per vertex: [X link, Y link] emanating from it
    outgoing: Vec<[Option<LinkId>; 2]>,
    incident: Vec<Vec<SignedLink>>,
    endpoints: Vec<(VertexId, VertexId)>,
    plaquette_anchor: Vec<(usize, usize)>,
    plaquettes: Vec<[SignedLink; 4]>,
}

impl LatticeGeometry {
    /// Builds an `lx × ly` vertex lattice.
    pub fn new(lx: usize, ly: usize, boundary: Boundary) -> Result<Self> {
        if lx < 2 || ly < 2 {
            return Err(Error::InvalidGeometry(format!(
                "lattice must be at least 2x2 vertices, got {lx}x{ly}"
            )));
        }
        let n_vertices = lx * ly;
        let periodic = boundary == Boundary::Periodic;

        let mut links = Vec::new();
        let mut outgoing = vec![[None, None]; n_vertices];
        let mut endpoints = Vec::new();
        for n in 0..ly {
            for m in 0..lx {
                let v = n * lx + m;
                if periodic || m + 1 < lx {
                    let id = LinkId(links.len());
                    links.push(LinkCoord {
                        m,
                        n,
                        dir: Direction::X,
                    });
                    endpoints.push((VertexId(v), VertexId(n * lx + (m + 1) % lx)));
                    outgoing[v][0] = Some(id);
                }
                if periodic || n + 1 < ly {
                    let id = LinkId(links.len());
                    links.push(LinkCoord {
                        m,
                        n,
                        dir: Direction::Y,
                    });
                    endpoints.push((VertexId(v), VertexId(((n + 1) % ly) * lx + m)));
                    outgoing[v][1] = Some(id);
                }
            }
        }

        let mut incident = Vec::with_capacity(n_vertices);
        for n in 0..ly {
            for m in 0..lx {
                let v = n * lx + m;
                let mut list = Vec::with_capacity(4);
                for l in outgoing[v].iter().flatten() {
                    list.push((*l, 1));
                }
                // incoming from -x, then from -y
                if m > 0 || periodic {
                    let left = n * lx + (m + lx - 1) % lx;
                    if let Some(l) = outgoing[left][0] {
                        list.push((l, -1));
                    }
                }
                if n > 0 || periodic {
                    let below = ((n + ly - 1) % ly) * lx + m;
                    if let Some(l) = outgoing[below][1] {
                        list.push((l, -1));
                    }
                }
                incident.push(list);
            }
        }

        let (px, py) = if periodic { (lx, ly) } else { (lx - 1, ly - 1) };
        let mut plaquette_anchor = Vec::with_capacity(px * py);
        let mut plaquettes = Vec::with_capacity(px * py);
        for n in 0..py {
            for m in 0..px {
                let v = |mm: usize, nn: usize| (nn % ly) * lx + mm % lx;
                let bottom = outgoing[v(m, n)][0].expect("bottom link");
                let right = outgoing[v(m + 1, n)][1].expect("right link");
                let top = outgoing[v(m, n + 1)][0].expect("top link");
                let left = outgoing[v(m, n)][1].expect("left link");
                plaquette_anchor.push((m, n));
                plaquettes.push([(bottom, 1), (right, 1), (top, -1), (left, -1)]);
            }
        }

        Ok(Self {
            lx,
            ly,
            boundary,
            links,
            outgoing,
            incident,
            endpoints,
            plaquette_anchor,
            plaquettes,
        })
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn n_vertices(&self) -> usize {
        self.lx * self.ly
    }

    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn n_plaquettes(&self) -> usize {
        self.plaquettes.len()
    }

    pub fn vertex(&self, m: usize, n: usize) -> Option<VertexId> {
        (m < self.lx && n < self.ly).then(|| VertexId(n * self.lx + m))
    }

    pub fn vertex_coords(&self, v: VertexId) -> (usize, usize) {
        (v.0 % self.lx, v.0 / self.lx)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.n_vertices()).map(VertexId)
    }

    pub fn links(&self) -> impl Iterator<Item = LinkId> {
        (0..self.n_links()).map(LinkId)
    }

    pub fn plaquettes(&self) -> impl Iterator<Item = PlaquetteId> {
        (0..self.n_plaquettes()).map(PlaquetteId)
    }

    /// The link emanating from `(m, n)` in direction `dir`, if it exists.
    pub fn link(&self, m: usize, n: usize, dir: Direction) -> Option<LinkId> {
        let v = self.vertex(m, n)?;
        self.outgoing[v.0][match dir {
            Direction::X => 0,
            Direction::Y => 1,
        }]
    }

    pub fn link_coords(&self, l: LinkId) -> LinkCoord {
        self.links[l.0]
    }

    /// `(tail, head)`: the anchor vertex and the vertex the link points to.
    pub fn link_endpoints(&self, l: LinkId) -> (VertexId, VertexId) {
        self.endpoints[l.0]
    }

    pub fn link_anchor(&self, l: LinkId) -> VertexId {
        self.endpoints[l.0].0
    }

    /// Links touching `v` with divergence signs: `+1` for links leaving in
    /// `+x`/`+y`, `-1` for links arriving from `-x`/`-y`.
    pub fn incident_links(&self, v: VertexId) -> &[SignedLink] {
        &self.incident[v.0]
    }

    /// `(bottom, +1), (right, +1), (top, -1), (left, -1)`.
    pub fn plaquette_links(&self, p: PlaquetteId) -> &[SignedLink; 4] {
        &self.plaquettes[p.0]
    }

    pub fn plaquette_anchor(&self, p: PlaquetteId) -> (usize, usize) {
        self.plaquette_anchor[p.0]
    }

    pub fn plaquette_at(&self, m: usize, n: usize) -> Option<PlaquetteId> {
        self.plaquette_anchor.iter().position(|&a| a == (m, n)).map(PlaquetteId)
    }

    /// The four corners of a plaquette, pairing each horizontal link with
    /// each vertical link it meets.
    pub fn plaquette_corners(&self, p: PlaquetteId) -> [Corner; 4] {
        let [(bottom, _), (right, _), (top, _), (left, _)] = self.plaquettes[p.0];
        let corner = |x_link: LinkId, y_link: LinkId| {
            let (xa, xb) = self.endpoints[x_link.0];
            let (ya, yb) = self.endpoints[y_link.0];
            let vertex = [xa, xb]
                .into_iter()
                .find(|v| *v == ya || *v == yb)
                .expect("corner links share a vertex");
            Corner { x_link, y_link, vertex }
        };
        [
            corner(bottom, left),
            corner(bottom, right),
            corner(top, left),
            corner(top, right),
        ]
    }

    /// Every plaquette corner, in plaquette order.
    pub fn corners(&self) -> Vec<Corner> {
        self.plaquettes().flat_map(|p| self.plaquette_corners(p)).collect()
    }

    pub fn sublattice(&self, v: VertexId) -> Sublattice {
        let (m, n) = self.vertex_coords(v);
        if (m + n) % 2 == 0 {
            Sublattice::A
        } else {
            Sublattice::B
        }
    }

    /// `(-1)^(m+n)`.
    pub fn stagger_sign(&self, v: VertexId) -> i8 {
        match self.sublattice(v) {
            Sublattice::A => 1,
            Sublattice::B => -1,
        }
    }

    /// Stagger sign of the link's anchor vertex.
    pub fn link_stagger_sign(&self, l: LinkId) -> i8 {
        self.stagger_sign(self.link_anchor(l))
    }

    /// Whether nearest neighbours always sit on opposite sublattices.
    /// Fails only for periodic lattices with an odd side.
    pub fn is_bipartite(&self) -> bool {
        self.boundary == Boundary::Open || (self.lx.is_multiple_of(2) && self.ly.is_multiple_of(2))
    }

    pub(crate) fn require_bipartite(&self, what: &str) -> Result<()> {
        if self.is_bipartite() {
            Ok(())
        } else {
            Err(Error::InvalidGeometry(format!(
                "{what} needs a bipartite lattice; periodic sides must be even, got {}x{}",
                self.lx, self.ly
            )))
        }
    }

    /// Lattice divergence of a link field at `v`.
    pub fn divergence(&self, v: VertexId, field: &[i8]) -> i32 {
        self.incident[v.0]
            .iter()
            .map(|&(l, s)| i32::from(s) * i32::from(field[l.0]))
            .sum()
    }

    /// Plain (unsigned) sum of a link field over the links touching `v`.
    pub fn incident_sum(&self, v: VertexId, field: &[i8]) -> i32 {
        self.incident[v.0].iter().map(|&(l, _)| i32::from(field[l.0])).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open(lx: usize, ly: usize) -> LatticeGeometry {
        LatticeGeometry::new(lx, ly, Boundary::Open).unwrap()
    }

    #[test]
    fn counts() {
        let g = open(2, 2);
        assert_eq!((g.n_vertices(), g.n_links(), g.n_plaquettes()), (4, 4, 1));
        let g = open(3, 3);
        assert_eq!((g.n_links(), g.n_plaquettes()), (12, 4));
        let g = LatticeGeometry::new(2, 2, Boundary::Periodic).unwrap();
        assert_eq!((g.n_links(), g.n_plaquettes()), (8, 4));
        for (lx, ly) in [(2, 5), (4, 3), (6, 6)] {
            let g = open(lx, ly);
            assert_eq!(g.n_links(), lx * (ly - 1) + (lx - 1) * ly);
            assert_eq!(g.n_plaquettes(), (lx - 1) * (ly - 1));
            let g = LatticeGeometry::new(lx, ly, Boundary::Periodic).unwrap();
            assert_eq!(g.n_links(), 2 * lx * ly);
            assert_eq!(g.n_plaquettes(), lx * ly);
        }
    }

    #[test]
    fn rejects_small() {
        assert!(matches!(
            LatticeGeometry::new(1, 3, Boundary::Open),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(LatticeGeometry::new(3, 0, Boundary::Periodic).is_err());
    }

    #[test]
    fn link_ids_are_a_bijection() {
        let g = LatticeGeometry::new(3, 4, Boundary::Periodic).unwrap();
        for l in g.links() {
            let c = g.link_coords(l);
            assert_eq!(g.link(c.m, c.n, c.dir), Some(l));
        }
        for v in g.vertices() {
            let (m, n) = g.vertex_coords(v);
            assert_eq!(g.vertex(m, n), Some(v));
        }
    }

    #[test]
    fn incident_stencil() {
        let g = open(3, 3);
        let centre = g.vertex(1, 1).unwrap();
        let signs: Vec<i8> = g.incident_links(centre).iter().map(|x| x.1).collect();
        assert_eq!(signs, [1, 1, -1, -1]);

        let g = open(2, 2);
        let corner = g.incident_links(g.vertex(0, 0).unwrap());
        assert_eq!(corner.len(), 2);
        assert!(corner.iter().all(|&(_, s)| s == 1));

        let g = LatticeGeometry::new(2, 2, Boundary::Periodic).unwrap();
        for v in g.vertices() {
            assert_eq!(g.incident_links(v).len(), 4);
        }
    }

    #[test]
    fn edge_vertices_have_three_links() {
        let g = open(3, 3);
        assert_eq!(g.incident_links(g.vertex(1, 0).unwrap()).len(), 3);
        assert_eq!(g.incident_links(g.vertex(2, 2).unwrap()).len(), 2);
    }

    #[test]
    fn each_link_appears_twice_with_opposite_signs() {
        for g in [open(4, 3), LatticeGeometry::new(2, 4, Boundary::Periodic).unwrap()] {
            let mut net = vec![0i32; g.n_links()];
            let mut hits = vec![0u32; g.n_links()];
            for v in g.vertices() {
                for &(l, s) in g.incident_links(v) {
                    net[l.0] += i32::from(s);
                    hits[l.0] += 1;
                }
            }
            assert!(net.iter().all(|&x| x == 0));
            assert!(hits.iter().all(|&x| x == 2));
        }
    }

    #[test]
    fn plaquette_anchoring() {
        let g = open(2, 2);
        let p = g.plaquette_links(PlaquetteId(0));
        assert_eq!(p.map(|x| x.1), [1, 1, -1, -1]);

        let g = open(3, 3);
        let p0 = g.plaquette_at(0, 0).unwrap();
        let [bottom, _, _, left] = *g.plaquette_links(p0);
        assert_eq!(bottom.0, g.link(0, 0, Direction::X).unwrap());
        assert_eq!(left.0, g.link(0, 0, Direction::Y).unwrap());

        let g = LatticeGeometry::new(2, 2, Boundary::Periodic).unwrap();
        let p = g.plaquette_at(1, 1).unwrap();
        let [_, right, top, _] = *g.plaquette_links(p);
        assert_eq!(
            g.link_coords(right.0),
            LinkCoord {
                m: 0,
                n: 1,
                dir: Direction::Y
            }
        );
        assert_eq!(
            g.link_coords(top.0),
            LinkCoord {
                m: 1,
                n: 0,
                dir: Direction::X
            }
        );
    }

    #[test]
    fn plaquette_signs_sum_to_zero() {
        let g = LatticeGeometry::new(4, 4, Boundary::Periodic).unwrap();
        for p in g.plaquettes() {
            assert_eq!(g.plaquette_links(p).iter().map(|x| i32::from(x.1)).sum::<i32>(), 0);
        }
    }

    #[test]
    fn stagger_and_sublattice() {
        let g = open(3, 3);
        let at = |m, n| g.vertex(m, n).unwrap();
        assert_eq!((g.stagger_sign(at(0, 0)), g.sublattice(at(0, 0))), (1, Sublattice::A));
        assert_eq!((g.stagger_sign(at(1, 0)), g.sublattice(at(1, 0))), (-1, Sublattice::B));
        assert_eq!((g.stagger_sign(at(1, 1)), g.sublattice(at(1, 1))), (1, Sublattice::A));
    }

    #[test]
    fn neighbours_have_opposite_stagger() {
        for g in [open(5, 3), LatticeGeometry::new(4, 2, Boundary::Periodic).unwrap()] {
            assert!(g.is_bipartite());
            for l in g.links() {
                let (a, b) = g.link_endpoints(l);
                assert_eq!(g.stagger_sign(a) * g.stagger_sign(b), -1);
            }
        }
        assert!(!LatticeGeometry::new(3, 2, Boundary::Periodic).unwrap().is_bipartite());
    }

    #[test]
    fn corners_are_distinct_and_share_vertices() {
        for g in [open(3, 3), LatticeGeometry::new(2, 2, Boundary::Periodic).unwrap()] {
            let corners = g.corners();
            assert_eq!(corners.len(), 4 * g.n_plaquettes());
            let mut pairs: Vec<_> = corners.iter().map(|c| (c.x_link, c.y_link)).collect();
            pairs.sort();
            pairs.dedup();
            assert_eq!(pairs.len(), corners.len());
            for c in corners {
                assert!(g.incident_links(c.vertex).iter().any(|x| x.0 == c.x_link));
                assert!(g.incident_links(c.vertex).iter().any(|x| x.0 == c.y_link));
            }
        }
    }
}
