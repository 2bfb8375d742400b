use poro_hdg::hdg::Stabilization;
use poro_hdg::materials::{drag_matrix, isotropic_stiffness, MaterialField, MaterialParams};
use poro_hdg::mesh::Mesh;
use poro_hdg::timestep::{Homogeneous, Solver, State};
use poro_hdg::verification::{energy_defect, energy_series, unit_square};
use rand::{Rng, SeedableRng};

fn random_state(solver: &Solver, seed: u64) -> State {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut st = solver.zero_state(0.0);
    st.interior.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
    let ess = vec![0.0; solver.dofmap().len()];
    st.traces = solver.compatible_traces(&st.interior, &ess).unwrap();
    st
}

fn solver(mesh: Mesh, material: MaterialParams, k: usize, stab: Stabilization, dt: f64) -> Solver {
    let mats = MaterialField::uniform(material, mesh.num_elements());
    Solver::new(mesh, mats, k, stab, dt).unwrap()
}

#[test]
fn energy_balance_over_many_steps() {
    let mesh = unit_square(4);
    let stab = Stabilization::scaled(&mesh, 1.0, 1.0);
    let s = solver(mesh, MaterialParams::example1(3.0, 0.3).unwrap(), 2, stab, 0.01);
    let series = energy_series(&s, random_state(&s, 7), 200, &Homogeneous).unwrap();
    assert_eq!(series.len(), 201);
    assert!(energy_defect(&series) <= 1e-9, "{}", energy_defect(&series));
    for w in series.windows(2) {
        assert!(w[1].x2 <= w[0].x2 * (1.0 + 1e-12));
    }
    assert!(series[200].x2 < series[0].x2);
}

#[test]
fn energy_balance_nearly_incompressible() {
    let mesh = unit_square(3);
    let stab = Stabilization::scaled(&mesh, 1.0, 1.0);
    let s = solver(mesh, MaterialParams::example1(3.0, 0.499).unwrap(), 1, stab, 0.05);
    let series = energy_series(&s, random_state(&s, 3), 50, &Homogeneous).unwrap();
    assert!(energy_defect(&series) <= 1e-9);
}

#[test]
fn undamped_unstabilized_run_is_reversible() {
    let c = isotropic_stiffness(3.0, 0.3).unwrap();
    let material = MaterialParams::new(c, 1.0, 1.0, 1.0, 1.0, [2.0, 2.0], drag_matrix(0.0, [1.0, 1.0]).unwrap()).unwrap();
    let mesh = unit_square(3);
    let n = mesh.num_elements();
    let stab = Stabilization { tau_s: vec![[0.0; 3]; n], tau_f: vec![[0.0; 3]; n] };
    let s = solver(mesh, material, 1, stab, 0.02);
    let mut st = s.zero_state(0.0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    st.interior.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
    let series = energy_series(&s, st, 100, &Homogeneous).unwrap();
    let x0 = series[0].x2;
    for sample in &series {
        assert!((sample.x2 - x0).abs() <= 1e-9 * x0, "{} vs {}", sample.x2, x0);
        assert!(sample.y2.abs() <= 1e-9 * x0);
    }
}

#[test]
fn zero_data_gives_exact_zero() {
    let mesh = unit_square(3);
    let stab = Stabilization::scaled(&mesh, 1.0, 1.0);
    let s = solver(mesh, MaterialParams::example1(3.0, 0.3).unwrap(), 3, stab, 0.1);
    let out = s.run(s.zero_state(0.0), 5, &Homogeneous, |_, _| {}).unwrap();
    assert!(out.interior.iter().chain(&out.traces).all(|v| v.abs() <= 1e-14));
    assert!((out.t - 0.5).abs() < 1e-12);
}

#[test]
fn physical_units_stay_balanced() {
    let material = MaterialParams::library("sandstone-iso").unwrap();
    let mesh = Mesh::structured_rect([-100.0, 100.0], [-100.0, 100.0], 4, 4, &Default::default()).unwrap();
    let stab = Stabilization::scaled(&mesh, 1e7, 1e-7);
    let dt = 0.2 * mesh.mesh_size().unwrap() / material.max_wave_speed();
    let s = solver(mesh, material, 1, stab, dt);
    let series = energy_series(&s, random_state(&s, 5), 20, &Homogeneous).unwrap();
    assert!(energy_defect(&series) <= 1e-9, "{}", energy_defect(&series));
}
