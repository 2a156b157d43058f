use tvp::diagnostics::total_energy;
use tvp::mesh::NodalScalar;
use tvp::scenario::Scenario;
use tvp::stepper::Simulation;

const HEAD: &str = "mesh.nx = 4\nmesh.ny = 4\ntime.t_final = 0.2\ntime.dt = 0.02\n";

fn sim(body: &str) -> Simulation {
    Simulation::new(&Scenario::from_toml_str(&format!("{HEAD}{body}")).unwrap()).unwrap()
}

#[test]
fn without_flux_and_initial_heat_the_lifting_vanishes() {
    let s = sim("[boundary.displacement]\nkind = \"affine\"\nmatrix = [0.3, 0.0, 0.0, -0.3]\nprofile = \"ramp\"\n");
    assert!(s.lifting().values.iter().all(|v| v.amax() == 0.0));
    let out = s.run().unwrap();
    for st in &out.states {
        assert_eq!(s.theta_hat(st), st.theta);
    }
}

#[test]
fn energy_ignores_rigid_translation() {
    let s = sim("[initial.u0]\nkind = \"bubble\"\namplitude = [0.1, 0.05]\n");
    let st = s.initial_state().unwrap();
    let mut moved = st.u.clone();
    for n in 0..s.mesh().n_nodes() {
        moved[2 * n] += 0.7;
        moved[2 * n + 1] -= 1.3;
    }
    let stress = |u| tvp::stepper::stress_of(s.material(), &s.mesh().strain_of(u), &st.eps_p);
    let theta = NodalScalar::zeros(s.mesh().n_nodes());
    let a = total_energy(s.mesh(), s.material(), &theta, &stress(&st.u));
    let b = total_energy(s.mesh(), s.material(), &theta, &stress(&moved));
    assert!((a.total - b.total).abs() < 1e-15);
    assert!(a.elastic > 0.0);
}

#[test]
fn inner_contraction_improves_with_smaller_steps() {
    let body = "material.coupling = \"linear\"\nmaterial.coupling_alpha = 0.1\n\
        [boundary.displacement]\nkind = \"affine\"\nmatrix = [0.5, 0.2, 0.0, -0.5]\nprofile = \"ramp\"\n\
        [initial.u0]\nkind = \"bubble\"\namplitude = [0.05, 0.02]\n";
    let ratio = |dt: &str| {
        let src = format!("{HEAD}{body}").replace("time.dt = 0.02", dt);
        let s = Simulation::new(&Scenario::from_toml_str(&src).unwrap()).unwrap();
        let st = s.initial_state().unwrap();
        s.picard_p(&st.theta, &st, 1, None).unwrap().contraction
    };
    let coarse = ratio("time.dt = 0.04");
    let fine = ratio("time.dt = 0.02");
    assert!(fine < coarse, "{fine} vs {coarse}");
    assert!(coarse < 1.0);
}

#[test]
fn heat_flux_enters_the_temperature() {
    let s = sim(
        "[boundary.heat_flux]\nkind = \"constant\"\nvalue = 2.0\nsides = [\"bottom\", \"top\"]\n",
    );
    let out = s.run().unwrap();
    let last = out.states.last().unwrap();
    let total = s.heat().integral(&s.theta_hat(last));
    // two unit sides at flux 2 for 0.2 time units
    assert!((total - 0.8).abs() < 1e-12, "{total}");
    assert!(last.theta.amax() < 1e-12);
}
