//! The cold-atom rotor model on the full truncated link space.
//!
//! `H = λ Σ_v G_v² + μ Σ_l δ_l² + H_R`, with `G_v = Σ_{l∋v} δ_l − Δ_v` and
//! `H_R = Ω Σ_corners (ã_x b̃†_y + h.c.)`, one term for each pair of
//! orthogonal links meeting at a plaquette corner. The phase operators are
//! exactly unitary: `ã|δ⟩ = |δ − 1⟩` with unit amplitude.

use crate::basis::{validate_charges, ChargeConfig, GaugeSectorBasis, Picture};
use crate::error::{Error, Result};
use crate::lattice::{Corner, LatticeGeometry};
use crate::sparse::SparseOperator;

use super::CouplingParams;

/// Checks shared by both pictures; returns `(λ, μ, Ω)` and the per-vertex
/// charges in the basis picture.
fn prepare(
    basis: &GaugeSectorBasis,
    geom: &LatticeGeometry,
    params: &CouplingParams,
    charges: &ChargeConfig,
    picture: Picture,
    what: &'static str,
) -> Result<((f64, f64, f64), Vec<i32>)> {
    geom.require_bipartite(what)?;
    if basis.picture() != picture {
        return Err(Error::PictureMismatch {
            what,
            expected: picture.name(),
        });
    }
    if basis.is_projected() {
        return Err(Error::Unsupported(format!("{what} acts on the full link basis")));
    }
    let rotor = params.rotor(what)?;
    validate_charges(&charges.to_picture(geom, Picture::Micro), geom).into_result()?;
    Ok((rotor, charges.to_picture(geom, picture).density(geom)))
}

/// One hop of `H_R` at `corner`, in place. `dir = +1` moves one unit from
/// the horizontal link to the vertical one (`ã_x b̃†_y`), `dir = −1` back.
/// `signs` are the per-link factors of the picture: all `+1` for `δ`, the
/// anchor stagger signs for `E`. Returns false if the hop leaves the window.
pub(crate) fn hop(state: &mut [i8], corner: &Corner, dir: i8, signs: &[i8], trunc: i8) -> bool {
    let x = corner.x_link.0;
    let y = corner.y_link.0;
    state[x] -= dir * signs[x];
    state[y] += dir * signs[y];
    (-trunc..=trunc).contains(&state[x]) && (-trunc..=trunc).contains(&state[y])
}

fn assemble(
    basis: &GaugeSectorBasis,
    geom: &LatticeGeometry,
    (lambda, mu, omega): (f64, f64, f64),
    density: &[i32],
    signs: &[i8],
    gauss: impl Fn(&[i8], crate::lattice::VertexId) -> i32 + Sync,
) -> SparseOperator {
    let corners = geom.corners();
    let t = basis.trunc() as i8;
    SparseOperator::from_rows(basis.len(), |i, out| {
        let state = basis.state(i);
        let g2: i64 = geom
            .vertices()
            .map(|v| {
                let g = i64::from(gauss(state, v) - density[v.0]);
                g * g
            })
            .sum();
        let e2: i64 = state.iter().map(|&d| i64::from(d) * i64::from(d)).sum();
        out.push((i, lambda * g2 as f64 + mu * e2 as f64));
        if omega == 0.0 {
            return;
        }
        let mut next = state.to_vec();
        for corner in &corners {
            for dir in [1i8, -1] {
                next.copy_from_slice(state);
                if hop(&mut next, corner, dir, signs, t) {
                    let j = basis.index_of(&next).expect("full basis is closed under hops");
                    out.push((j, omega));
                }
            }
        }
    })
}

/// The rotor Hamiltonian in the `δ` picture, on the full basis converted to
/// the microscopic picture. Charges must satisfy both sublattice sums.
pub fn build_microscopic_rotor(
    basis: &GaugeSectorBasis,
    geom: &LatticeGeometry,
    params: &CouplingParams,
    charges: &ChargeConfig,
) -> Result<SparseOperator> {
    let (rotor, density) = prepare(basis, geom, params, charges, Picture::Micro, "microscopic rotor")?;
    let ones = vec![1i8; geom.n_links()];
    Ok(assemble(basis, geom, rotor, &density, &ones, |s, v| {
        geom.incident_sum(v, s)
    }))
}

/// The same Hamiltonian rewritten in `E` variables on a QED-picture full
/// basis: `G_v² = (div E − Q)²`, and on links anchored on sublattice B the
/// hop raises where the `δ` form lowers. Related to
/// [`build_microscopic_rotor`] by the basis permutation of
/// [`GaugeSectorBasis::convert_picture`].
pub fn stagger_equivalent(
    basis: &GaugeSectorBasis,
    geom: &LatticeGeometry,
    params: &CouplingParams,
    charges: &ChargeConfig,
) -> Result<SparseOperator> {
    let (rotor, density) = prepare(basis, geom, params, charges, Picture::Qed, "staggered rotor")?;
    let signs: Vec<i8> = geom.links().map(|l| geom.link_stagger_sign(l)).collect();
    Ok(assemble(basis, geom, rotor, &density, &signs, |s, v| {
        geom.divergence(v, s)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{enumerate_full, EnumerationLimits};
    use crate::lattice::{Boundary, Direction};

    fn setup(lx: usize, ly: usize, t: u8) -> (LatticeGeometry, GaugeSectorBasis, GaugeSectorBasis) {
        let g = LatticeGeometry::new(lx, ly, Boundary::Open).unwrap();
        let full = enumerate_full(&g, t, EnumerationLimits::default()).unwrap();
        let micro = full.convert_picture(&g);
        (g, full, micro)
    }

    #[test]
    fn diagonal_when_hopping_is_off() {
        let (g, _, micro) = setup(2, 2, 1);
        let p = CouplingParams::micro(1.0, 0.0, 0.0).unwrap();
        let h = build_microscopic_rotor(&micro, &g, &p, &ChargeConfig::neutral(Picture::Micro)).unwrap();
        // the three Gauss-sector states cost nothing at μ = 0
        assert_eq!(h.nnz(), micro.len() - 3);
        let zero = micro.index_of(&[0; 4]).unwrap();
        assert_eq!(h.get(zero, zero), 0.0);
        let mut one = vec![0i8; 4];
        one[g.link(0, 0, Direction::X).unwrap().0] = 1;
        let i = micro.index_of(&one).unwrap();
        assert_eq!(h.get(i, i), 2.0);
    }

    #[test]
    fn gauss_sector_is_ground_manifold_without_hopping() {
        let (g, _, micro) = setup(2, 2, 1);
        let mu = 0.3;
        let p = CouplingParams::micro(5.0, mu, 0.0).unwrap();
        let h = build_microscopic_rotor(&micro, &g, &p, &ChargeConfig::neutral(Picture::Micro)).unwrap();
        let diag = h.diagonal();
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(min, 0.0);
        for (i, s) in micro.states().enumerate() {
            let in_sector = g.vertices().all(|v| g.incident_sum(v, s) == 0);
            let e2: i32 = s.iter().map(|&d| i32::from(d).pow(2)).sum();
            if in_sector {
                assert_eq!(diag[i], mu * f64::from(e2));
            } else {
                assert!(diag[i] >= 5.0);
            }
        }
    }

    #[test]
    fn hopping_connects_orthogonal_links() {
        let (g, _, micro) = setup(2, 2, 1);
        let p = CouplingParams::micro(1.0, 0.0, 0.25).unwrap();
        let h = build_microscopic_rotor(&micro, &g, &p, &ChargeConfig::neutral(Picture::Micro)).unwrap();
        assert!(h.is_symmetric());
        let zero = micro.index_of(&[0; 4]).unwrap();
        // every corner: δ_x − 1, δ_y + 1 and the reverse, all inside Λ = 1
        assert_eq!(h.row(zero).filter(|(j, _)| *j != zero).count(), 8);
        for (j, v) in h.row(zero) {
            if j != zero {
                assert_eq!(v, 0.25);
                let s = micro.state(j);
                assert_eq!(s.iter().map(|&d| i32::from(d)).sum::<i32>(), 0);
            }
        }
    }

    #[test]
    fn staggered_form_is_a_permutation() {
        let (g, full, micro) = setup(2, 2, 1);
        let p = CouplingParams::micro(1.0, 0.1, 0.3).unwrap();
        let q = ChargeConfig::neutral(Picture::Qed);
        let hm = build_microscopic_rotor(&micro, &g, &p, &q).unwrap();
        let hs = stagger_equivalent(&full, &g, &p, &q).unwrap();
        for (i, j, v) in hs.entries() {
            let mi = micro.index_of(&full.link_config(i).convert(&g).values).unwrap();
            let mj = micro.index_of(&full.link_config(j).convert(&g).values).unwrap();
            assert_eq!(hm.get(mi, mj), v);
        }
        assert_eq!(hm.nnz(), hs.nnz());
    }

    #[test]
    fn invalid_micro_charges_rejected() {
        let (g, full, micro) = setup(2, 2, 1);
        let p = CouplingParams::micro(1.0, 0.1, 0.3).unwrap();
        let odd = ChargeConfig::from_sites(&g, Picture::Qed, [(0, 0, 1), (1, 0, -1)]).unwrap();
        assert!(matches!(
            build_microscopic_rotor(&micro, &g, &p, &odd),
            Err(Error::Charges(_))
        ));
        assert!(matches!(
            stagger_equivalent(&full, &g, &p, &odd),
            Err(Error::Charges(_))
        ));
        assert!(matches!(
            build_microscopic_rotor(&full, &g, &p, &ChargeConfig::neutral(Picture::Qed)),
            Err(Error::PictureMismatch { .. })
        ));
        let qed = CouplingParams::qed(1.0).unwrap();
        assert!(build_microscopic_rotor(&micro, &g, &qed, &ChargeConfig::neutral(Picture::Qed)).is_err());
    }
}
