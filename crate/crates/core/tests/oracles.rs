//! Independent dense builders checked against the library.

use fluxlat::basis::{enumerate_full, enumerate_gauss_sector, ChargeConfig, EnumerationLimits, Picture};
use fluxlat::hamiltonian::{build_kogut_susskind, KsCoefficients};
use fluxlat::lattice::{Boundary, LatticeGeometry};
use fluxlat::solver::{dense_eigenvalues, low_spectrum, SolverOptions};
use nalgebra::{DMatrix, SymmetricEigen};

fn geom(lx: usize, ly: usize, b: Boundary) -> LatticeGeometry {
    LatticeGeometry::new(lx, ly, b).unwrap()
}

/// Every vector in `[-t, t]^n`, lexicographic.
fn odometer(n: usize, t: i8) -> Vec<Vec<i8>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-t..=t).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

fn divergence_ok(g: &LatticeGeometry, q: &[i32], s: &[i8]) -> bool {
    g.vertices().all(|v| {
        let div: i32 = g
            .incident_links(v)
            .iter()
            .map(|&(l, sign)| i32::from(sign) * i32::from(s[l.0]))
            .sum();
        div == q[v.0]
    })
}

fn dense_ks(g: &LatticeGeometry, states: &[Vec<i8>], t: i8, c: KsCoefficients) -> DMatrix<f64> {
    let n = states.len();
    let mut h = DMatrix::zeros(n, n);
    for (i, s) in states.iter().enumerate() {
        h[(i, i)] = c.electric * s.iter().map(|&e| f64::from(e) * f64::from(e)).sum::<f64>();
        for p in g.plaquettes() {
            for raise in [1i8, -1] {
                let mut u = s.clone();
                let mut inside = true;
                for &(l, sign) in g.plaquette_links(p) {
                    u[l.0] += raise * sign;
                    inside &= u[l.0].abs() <= t;
                }
                if inside {
                    if let Some(j) = states.iter().position(|x| *x == u) {
                        h[(i, j)] -= c.plaquette / 2.0;
                    }
                }
            }
        }
    }
    h
}

fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

type Case = (LatticeGeometry, u8, Vec<(usize, usize, i32)>);

fn cases() -> Vec<Case> {
    vec![
        (geom(2, 2, Boundary::Open), 1, vec![]),
        (geom(2, 2, Boundary::Open), 2, vec![(0, 0, 1), (1, 1, -1)]),
        (geom(3, 2, Boundary::Open), 1, vec![]),
        (geom(3, 2, Boundary::Open), 1, vec![(0, 0, 1), (2, 0, -1)]),
        (geom(3, 2, Boundary::Open), 2, vec![(0, 1, -1), (2, 0, 1)]),
        (geom(2, 2, Boundary::Periodic), 1, vec![]),
        (geom(2, 2, Boundary::Periodic), 1, vec![(0, 0, 1), (1, 0, -1)]),
        (geom(3, 3, Boundary::Open), 1, vec![(0, 1, 1), (2, 1, -1)]),
    ]
}

#[test]
fn gauss_sector_matches_brute_force_filter() {
    for (g, t, sites) in cases() {
        let q = ChargeConfig::from_sites(&g, Picture::Qed, sites.iter().copied()).unwrap();
        let density = q.density(&g);
        let brute: Vec<Vec<i8>> = odometer(g.n_links(), t as i8)
            .into_iter()
            .filter(|s| divergence_ok(&g, &density, s))
            .collect();
        let sector = enumerate_gauss_sector(&g, &q, t, EnumerationLimits::default()).unwrap();
        let got: Vec<Vec<i8>> = sector.states().map(<[i8]>::to_vec).collect();
        assert_eq!(got, brute, "{}x{} Λ={t} {sites:?}", g.lx(), g.ly());
    }
}

#[test]
fn kogut_susskind_matches_dense_oracle() {
    for (g, t, sites) in cases().into_iter().filter(|c| c.0.n_links() <= 8) {
        let q = ChargeConfig::from_sites(&g, Picture::Qed, sites.iter().copied()).unwrap();
        let density = q.density(&g);
        let states: Vec<Vec<i8>> = odometer(g.n_links(), t as i8)
            .into_iter()
            .filter(|s| divergence_ok(&g, &density, s))
            .collect();
        for g2 in [0.7, 2.0, 10.0] {
            let c = KsCoefficients::from_g2(g2);
            let want = dense_ks(&g, &states, t as i8, c);
            let sector = enumerate_gauss_sector(&g, &q, t, EnumerationLimits::default()).unwrap();
            let h = build_kogut_susskind(&sector, &g, c).unwrap();
            let got = h.to_dense();
            assert!(
                (&got - &want).abs().max() < 1e-14,
                "{}x{} Λ={t} g²={g2}",
                g.lx(),
                g.ly()
            );
            let ev = sorted_eigenvalues(want);
            let lib = dense_eigenvalues(&h, 5000).unwrap();
            for (a, b) in ev.iter().zip(&lib) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn unconstrained_spectrum_contains_every_sector() {
    // the full-space Hamiltonian is block diagonal over Gauss sectors
    let g = geom(2, 2, Boundary::Open);
    let c = KsCoefficients::from_g2(1.3);
    let full = enumerate_full(&g, 1, EnumerationLimits::default()).unwrap();
    let all = dense_eigenvalues(&build_kogut_susskind(&full, &g, c).unwrap(), 5000).unwrap();
    let vacuum = enumerate_gauss_sector(
        &g,
        &ChargeConfig::neutral(Picture::Qed),
        1,
        EnumerationLimits::default(),
    )
    .unwrap();
    for e in dense_eigenvalues(&build_kogut_susskind(&vacuum, &g, c).unwrap(), 5000).unwrap() {
        assert!(all.iter().any(|x| (x - e).abs() < 1e-10), "{e} missing");
    }
}

#[test]
fn single_plaquette_closed_form() {
    // Λ=1 vacuum: {0, +loop, -loop}; the symmetric combination mixes with 0
    let g = geom(2, 2, Boundary::Open);
    let vacuum = enumerate_gauss_sector(
        &g,
        &ChargeConfig::neutral(Picture::Qed),
        1,
        EnumerationLimits::default(),
    )
    .unwrap();
    for g2 in [0.5, 1.0, 4.0] {
        let c = KsCoefficients::from_g2(g2);
        let (e, b) = (4.0 * c.electric, c.plaquette / 2.0);
        let ground = 0.5 * (e - (e * e + 8.0 * b * b).sqrt());
        let h = build_kogut_susskind(&vacuum, &g, c).unwrap();
        let ev = dense_eigenvalues(&h, 10).unwrap();
        assert!((ev[0] - ground).abs() < 1e-12);
        assert!((ev[1] - e).abs() < 1e-12);
        let lanczos = low_spectrum(&h, &SolverOptions::default().with_k(1)).unwrap();
        assert!((lanczos.eigenvalues[0] - ground).abs() < 1e-10);
    }
}
