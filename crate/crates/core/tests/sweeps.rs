//! Time-dependent squeezing sweeps.

use rabi_sense::dynamics::{self, DensityMatrix, EvolveConfig};
use rabi_sense::hilbert::{fock_state, pauli, spin_minus, spin_op, tensor_vec, HilbertSpec};
use rabi_sense::presets;
use rabi_sense::protocol::{self, SqueezeProtocolParams, DELTA_SIGMA_Z, SIGMA_Z};
use rabi_sense::units::{khz_to_rad_s, xn};

fn cfg(p: &SqueezeProtocolParams) -> EvolveConfig {
    EvolveConfig::new(p.t_final, p.t_final / 20.0)
}

#[test]
fn state_vector_and_density_paths_agree() {
    let p = presets::fig5(1.0);
    let spec = HilbertSpec::full(30);
    let c = cfg(&p).with_tolerances(1e-10, 1e-12);
    let fast = protocol::simulate_sweep(&p, spec, &c).unwrap();

    let h = protocol::sweep_hamiltonian(&p, spec).unwrap();
    let jump = dynamics::jump_operator(spec).unwrap();
    let psi0 = tensor_vec(&spin_minus(), &fock_state(30, 0));
    let obs = vec![(SIGMA_Z.to_string(), spin_op(&pauli().z, spec))];
    let slow = dynamics::evolve(&DensityMatrix::pure(&psi0), &h, 0.0, &jump, spec, &c, &obs).unwrap();

    let a = fast.series(SIGMA_Z).unwrap();
    let b = slow.series(SIGMA_Z).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < 1e-6, "{x} vs {y}");
    }
}

#[test]
fn state_vector_norm_is_preserved() {
    let p = presets::fig5(1.0);
    let c = cfg(&p).with_tolerances(1e-10, 1e-12);
    let r = protocol::simulate_sweep(&p, HilbertSpec::full(30), &c).unwrap();
    assert!(r.norm_drift < 1e-8, "drift {}", r.norm_drift);
}

#[test]
fn reported_spread_is_the_pure_state_value() {
    let p = presets::fig5(0.5);
    let r = protocol::simulate_sweep(&p, HilbertSpec::full(24), &cfg(&p)).unwrap();
    let s = r.series(SIGMA_Z).unwrap();
    let d = r.series(DELTA_SIGMA_Z).unwrap();
    for (z, dz) in s.iter().zip(d) {
        assert!((dz - (1.0 - z * z).sqrt()).abs() < 1e-6);
    }
}

#[test]
fn final_signal_is_odd_in_force() {
    let p = presets::fig5(0.0).with_force(xn(300.0));
    let spec = HilbertSpec::full(20);
    let plus = protocol::final_sigma_z(&p, spec, &cfg(&p)).unwrap();
    let minus = protocol::final_sigma_z(&p.with_force(-p.base.force), spec, &cfg(&p)).unwrap();
    assert!(plus.abs() > 0.1, "{plus} {minus}");
    assert!((plus + minus).abs() < 1e-3, "{plus} {minus}");
}

#[test]
fn slower_sweep_follows_the_two_state_kappa_dependence() {
    // halving κ at fixed depth doubles the Demkov argument
    let p = presets::fig5(0.0).with_force(xn(150.0));
    let mut slow = p;
    slow.kappa *= 0.5;
    slow.t_final *= 2.0;
    let spec = HilbertSpec::full(20);
    let fast_num = protocol::final_sigma_z(&p, spec, &cfg(&p)).unwrap();
    let slow_num = protocol::final_sigma_z(&slow, spec, &cfg(&slow)).unwrap();
    let fast_two = protocol::demkov_sigma_z(&p).unwrap();
    let slow_two = protocol::demkov_sigma_z(&slow).unwrap();
    assert!((fast_num - fast_two).abs() < 0.02, "{fast_num} vs {fast_two}");
    assert!((slow_num - slow_two).abs() < 0.02, "{slow_num} vs {slow_two}");
    let ratio = slow_num.atanh() / fast_num.atanh();
    assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn damping_reduces_the_signal() {
    // shortened damped sweep: a larger γ gives a smaller final signal at fixed F
    let mut p = presets::damped_sweep().with_force(1.5e-24);
    p.t_final = 0.06;
    p.kappa *= 2.0;
    p.omega0 = khz_to_rad_s(200.0);
    let spec = HilbertSpec::full(10);
    let run = |gamma_khz: f64| {
        let mut q = p;
        q.base.gamma = khz_to_rad_s(gamma_khz);
        protocol::final_sigma_z(&q, spec, &cfg(&q).with_tolerances(1e-6, 1e-9)).unwrap()
    };
    let s0 = run(1e-3);
    let s1 = run(1e-2);
    assert!(s0.abs() > s1.abs(), "{s0} vs {s1}");
}
