use poro_hdg::fe::affine::AffineMap;
use poro_hdg::global::DofMap;
use poro_hdg::hdg::Stabilization;
use poro_hdg::materials::{
    anisotropic_stiffness, compliance, isotropic_stiffness, matmul, MaterialField, MaterialParams,
};
use poro_hdg::mesh::{BoundarySpec, Mesh};
use poro_hdg::timestep::{Homogeneous, Solver};
use poro_hdg::verification::{eoc, fitted_slope, oracle_compare, unit_square};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

fn check_topology(mesh: &Mesh) -> Result<(), TestCaseError> {
    let boundary = mesh.faces.iter().filter(|f| f.is_boundary()).count();
    prop_assert_eq!(2 * mesh.num_faces(), 3 * mesh.num_elements() + boundary);
    for (e, faces) in mesh.element_faces.iter().enumerate() {
        for (i, &f) in faces.iter().enumerate() {
            let face = &mesh.faces[f];
            let side = face.elements.iter().position(|&x| x == Some(e));
            prop_assert!(side.is_some());
            prop_assert_eq!(face.local_index[side.unwrap()], i);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn structured_mesh_covers_rectangle(
        x0 in -5.0..5.0f64, w in 0.1..10.0f64, y0 in -5.0..5.0f64, hgt in 0.1..10.0f64,
        nx in 1usize..9, ny in 1usize..9,
    ) {
        let mesh = Mesh::structured_rect([x0, x0 + w], [y0, y0 + hgt], nx, ny, &BoundarySpec::default()).unwrap();
        prop_assert_eq!(mesh.num_elements(), 2 * nx * ny);
        let area: f64 = (0..mesh.num_elements()).map(|e| mesh.affine_map(e).area()).sum();
        prop_assert!(close(area, w * hgt, 1e-12));
        check_topology(&mesh)?;
    }

    #[test]
    fn local_refinement_is_conforming(cx in 0.0..1.0f64, cy in 0.0..1.0f64, r in 0.01..0.4f64, levels in 1usize..3) {
        let mesh = unit_square(4).refine_near_point([cx, cy], r, levels);
        let area: f64 = (0..mesh.num_elements()).map(|e| mesh.affine_map(e).area()).sum();
        prop_assert!(close(area, 1.0, 1e-12));
        prop_assert!(mesh.num_elements() >= 32);
        check_topology(&mesh)?;
    }

    #[test]
    fn affine_map_round_trip(
        p in prop::array::uniform6(-3.0..3.0f64), xi in 0.0..1.0f64, eta in 0.0..1.0f64,
    ) {
        let tri = [[p[0], p[1]], [p[2], p[3]], [p[4], p[5]]];
        if let Ok(map) = AffineMap::new(tri) {
            let (a, b) = (xi * (1.0 - eta), eta);
            let back = map.to_reference(map.to_physical([a, b]));
            prop_assert!((back[0] - a).abs() < 1e-8 && (back[1] - b).abs() < 1e-8);
        }
    }

    #[test]
    fn isotropic_compliance_inverts_stiffness(e in 0.01..100.0f64, nu in 0.0..0.4999f64) {
        let c = isotropic_stiffness(e, nu).unwrap();
        let a = compliance(&c).unwrap();
        let ac = matmul(&a, &c);
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((ac[i][j] - delta(i, j)).abs() < 1e-12);
            }
        }
        let cc = compliance(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!(close(cc[i][j], c[i][j], 1e-10));
            }
        }
    }

    #[test]
    fn anisotropic_compliance_inverts_stiffness(
        c11 in 1.0..50.0f64, c33 in 1.0..50.0f64, frac in -0.95..0.95f64, c55 in 0.5..20.0f64,
    ) {
        let c13 = frac * (c11 * c33).sqrt();
        let c = anisotropic_stiffness(c11, c13, c33, c55).unwrap();
        let a = compliance(&c).unwrap();
        let ca = matmul(&c, &a);
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((ca[i][j] - delta(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eoc_recovers_exact_powers(c in 0.01..100.0f64, rate in 0.5..6.0f64, n in 3usize..7) {
        let hs: Vec<f64> = (1..=n).map(|i| 0.5f64.powi(i as i32)).collect();
        let errors: Vec<f64> = hs.iter().map(|h| c * h.powf(rate)).collect();
        for r in eoc(&errors, &hs).unwrap().into_iter().skip(1) {
            prop_assert!((r - rate).abs() < 1e-9);
        }
        prop_assert!((fitted_slope(&errors, &hs, 3).unwrap() - rate).abs() < 1e-9);
    }

    #[test]
    fn dofmap_counts(n in 1usize..6, k in 1usize..4) {
        let mesh = unit_square(n);
        let dm = DofMap::new(&mesh, k);
        prop_assert_eq!(dm.len(), mesh.num_faces() * 3 * (k + 1));
        let boundary = mesh.faces.iter().filter(|f| f.is_boundary()).count();
        prop_assert_eq!(dm.n_free(), (mesh.num_faces() - boundary) * 3 * (k + 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn condensed_step_matches_monolithic(
        n in 1usize..4, k in 1usize..4, log_dt in -3.0..0.0f64, nu in 0.2..0.499f64, seed in any::<u64>(),
    ) {
        let m = MaterialParams::example1(3.0, nu).unwrap();
        let d = oracle_compare(&unit_square(n), k, &m, 10f64.powf(log_dt), seed).unwrap();
        prop_assert!(d <= 1e-9, "difference {}", d);
    }

    #[test]
    fn one_step_energy_balance(n in 1usize..4, k in 1usize..3, log_dt in -3.0..0.0f64, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mesh = unit_square(n);
        let mats = MaterialField::uniform(MaterialParams::example1(3.0, 0.3).unwrap(), mesh.num_elements());
        let stab = Stabilization::scaled(&mesh, 1.0, 1.0);
        let solver = Solver::new(mesh, mats, k, stab, 10f64.powf(log_dt)).unwrap();
        let mut st = solver.zero_state(0.0);
        st.interior.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        for (g, v) in st.traces.iter_mut().enumerate() {
            *v = if solver.dofmap().essential[g] { 0.0 } else { rng.gen_range(-1.0..1.0) };
        }
        let next = solver.advance(&st, &Homogeneous).unwrap();
        let x0 = solver.energy(&st);
        let x1 = solver.energy(&next);
        let z = solver.step_dissipation(&st, &next);
        prop_assert!((x1 + 2.0 * solver.dt() * z - x0).abs() <= 1e-10 * x0);
    }
}
