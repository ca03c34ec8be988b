//! Second-order effective Hamiltonian of the rotor model on a Gauss sector.
//!
//! `H_eff = P (μ Σ E²) P − P H_R (H_G)⁻¹ (1 − P) H_R P`. One hop out of the
//! sector always violates Gauss's law at exactly the two far endpoints of
//! the hopping links, so the resolvent is diagonal in the link basis and
//! the sum over intermediate states runs over single hops. Nothing outside
//! the sector is stored.

use std::sync::atomic::{AtomicBool, Ordering};

use crate::basis::{validate_charges, GaugeSectorBasis, Picture};
use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, VertexId};
use crate::sparse::SparseOperator;

use super::rotor::hop;
use super::{require_qed, CouplingParams};

/// Effective operator on the projected QED-picture basis `sector`, built
/// from the rotor couplings `(λ, μ, Ω)`.
///
/// Off-diagonal elements are the two-hop plaquette processes of strength
/// `−2Ω²/λ`; the diagonal collects `μ Σ E²` and the hop-and-return shifts,
/// which are state independent except where the truncation window clips a
/// hop. Periodic lattices as small as 2×2 also produce two-hop processes
/// that are not single plaquettes.
pub fn derive_effective(
    sector: &GaugeSectorBasis,
    geom: &LatticeGeometry,
    params: &CouplingParams,
) -> Result<SparseOperator> {
    const WHAT: &str = "effective Hamiltonian";
    geom.require_bipartite(WHAT)?;
    require_qed(sector, WHAT)?;
    let charges = sector
        .charges()
        .ok_or_else(|| Error::Unsupported(format!("{WHAT} needs a Gauss-sector basis")))?;
    let (lambda, mu, omega) = params.rotor(WHAT)?;
    validate_charges(&charges.to_picture(geom, Picture::Micro), geom).into_result()?;

    let density = charges.to_picture(geom, Picture::Qed).density(geom);
    let signs: Vec<i8> = geom.links().map(|l| geom.link_stagger_sign(l)).collect();
    let corners = geom.corners();
    let touched: Vec<Vec<VertexId>> = corners
        .iter()
        .map(|c| {
            let (a, b) = geom.link_endpoints(c.x_link);
            let (d, e) = geom.link_endpoints(c.y_link);
            let mut vs = vec![a, b, d, e];
            vs.sort();
            vs.dedup();
            vs
        })
        .collect();
    let t = sector.trunc() as i8;
    let singular = AtomicBool::new(false);
    let gauss = |state: &[i8], v: VertexId| i64::from(geom.divergence(v, state) - density[v.0]);

    let op = SparseOperator::from_rows(sector.len(), |i, out| {
        let state = sector.state(i);
        let e2: i64 = state.iter().map(|&e| i64::from(e) * i64::from(e)).sum();
        out.push((i, mu * e2 as f64));
        if omega == 0.0 {
            return;
        }
        let mut mid = state.to_vec();
        let mut end = state.to_vec();
        for (c1, corner1) in corners.iter().enumerate() {
            for d1 in [1i8, -1] {
                mid.copy_from_slice(state);
                if !hop(&mut mid, corner1, d1, &signs, t) {
                    continue;
                }
                let hg: i64 = touched[c1].iter().map(|&v| gauss(&mid, v).pow(2)).sum();
                if hg == 0 {
                    singular.store(true, Ordering::Relaxed);
                    return;
                }
                let amplitude = -omega * omega / (lambda * hg as f64);
                for (c2, corner2) in corners.iter().enumerate() {
                    for d2 in [1i8, -1] {
                        end.copy_from_slice(&mid);
                        if !hop(&mut end, corner2, d2, &signs, t) {
                            continue;
                        }
                        let back = touched[c1].iter().chain(&touched[c2]).all(|&v| gauss(&end, v) == 0);
                        if !back {
                            continue;
                        }
                        let j = sector.index_of(&end);
                        debug_assert!(j.is_some(), "two-hop process left the window");
                        if let Some(j) = j {
                            out.push((j, amplitude));
                        }
                    }
                }
            }
        }
    });
    if singular.load(Ordering::Relaxed) {
        return Err(Error::SingularResolvent);
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{enumerate_gauss_sector, ChargeConfig, EnumerationLimits};
    use crate::hamiltonian::{build_kogut_susskind, KsCoefficients};
    use crate::lattice::{Boundary, PlaquetteId};

    fn sector(g: &LatticeGeometry, q: &ChargeConfig, t: u8) -> GaugeSectorBasis {
        enumerate_gauss_sector(g, q, t, EnumerationLimits::default()).unwrap()
    }

    fn loop_state(g: &LatticeGeometry, c: i8) -> Vec<i8> {
        let mut s = vec![0; g.n_links()];
        for &(l, sign) in g.plaquette_links(PlaquetteId(0)) {
            s[l.0] = c * sign;
        }
        s
    }

    #[test]
    fn plaquette_coefficient() {
        let g = LatticeGeometry::new(2, 2, Boundary::Open).unwrap();
        let b = sector(&g, &ChargeConfig::neutral(Picture::Qed), 2);
        assert_eq!(b.len(), 5);
        let omega = 1e-2;
        let p = CouplingParams::micro(1.0, 0.0, omega).unwrap();
        let h = derive_effective(&b, &g, &p).unwrap();
        assert!(h.is_symmetric());
        let zero = b.index_of(&[0; 4]).unwrap();
        for c in [1, -1] {
            let l = b.index_of(&loop_state(&g, c)).unwrap();
            assert!((h.get(zero, l) + 2.0 * omega * omega).abs() < 1e-18);
        }
        // eight hops leave the zero state, each returns with −Ω²/(2λ)
        assert!((h.get(zero, zero) + 4.0 * omega * omega).abs() < 1e-18);
        // at |E| = Λ half of the hops are clipped
        let edge = b.index_of(&loop_state(&g, 2)).unwrap();
        assert!(h.get(edge, edge) > h.get(zero, zero));
    }

    #[test]
    fn no_hopping_leaves_the_electric_term() {
        let g = LatticeGeometry::new(3, 2, Boundary::Open).unwrap();
        let q = ChargeConfig::pair(&g, 0, 0, 2).unwrap();
        let b = sector(&g, &q, 2);
        let p = CouplingParams::micro(1.0, 0.3, 0.0).unwrap();
        let h = derive_effective(&b, &g, &p).unwrap();
        assert_eq!(h.nnz(), b.len());
        for (i, s) in b.states().enumerate() {
            let e2: i32 = s.iter().map(|&e| i32::from(e).pow(2)).sum();
            assert_eq!(h.get(i, i), 0.3 * f64::from(e2));
        }
    }

    #[test]
    fn off_diagonal_matches_kogut_susskind_on_open_lattices() {
        let g = LatticeGeometry::new(3, 3, Boundary::Open).unwrap();
        let b = sector(&g, &ChargeConfig::neutral(Picture::Qed), 1);
        let (lambda, mu, omega) = (1.0, 1e-3, 1e-2);
        let p = CouplingParams::micro(lambda, mu, omega).unwrap();
        let h = derive_effective(&b, &g, &p).unwrap();
        let ks = build_kogut_susskind(&b, &g, KsCoefficients::rotor_effective(lambda, mu, omega)).unwrap();
        for (i, j, v) in ks.entries().filter(|e| e.0 != e.1) {
            assert!((h.get(i, j) - v).abs() < 1e-18, "({i},{j})");
        }
        let off = |m: &SparseOperator| m.entries().filter(|e| e.0 != e.1).count();
        assert_eq!(off(&h), off(&ks));
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = LatticeGeometry::new(2, 2, Boundary::Open).unwrap();
        let p = CouplingParams::micro(1.0, 0.0, 1e-2).unwrap();
        let odd = ChargeConfig::pair(&g, 0, 0, 1).unwrap();
        let b = sector(&g, &odd, 1);
        assert!(matches!(derive_effective(&b, &g, &p), Err(Error::Charges(_))));
        let zero = sector(&g, &ChargeConfig::neutral(Picture::Qed), 1);
        let qed = CouplingParams::qed(1.0).unwrap();
        assert!(derive_effective(&zero, &g, &qed).is_err());
        let odd_periodic = LatticeGeometry::new(3, 2, Boundary::Periodic).unwrap();
        let b = sector(&odd_periodic, &ChargeConfig::neutral(Picture::Qed), 1);
        assert!(derive_effective(&b, &odd_periodic, &p).is_err());
    }
}
