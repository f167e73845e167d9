//! The `levitosim check` invariant suite: fast deterministic self-checks
//! spanning every stage of the pipeline, one PASS/FAIL line each.

use rand::rngs::StdRng;
use rand::SeedableRng;

use levitodyn::bell_swap::{conditioned_cm, conditioned_cm_oracle, JointCm, SwapSetup};
use levitodyn::dynamics::build_model;
use levitodyn::ellipsoid::{
    axis_polarizabilities, depolarization_factors, depolarization_factors_quadrature,
    rotated_polarizability, EllipsoidGeometry,
};
use levitodyn::gaussian_tools::{random_physical_cm, two_mode_squeezed_vacuum, PairCm};
use levitodyn::output_filter::{output_cm, FilterKind};

struct Check {
    name: &'static str,
    run: fn() -> Result<(), String>,
}

fn depolarization_sum_and_quadrature() -> Result<(), String> {
    let mut rng = StdRng::seed_from_u64(101);
    use rand::Rng;
    for _ in 0..20 {
        let a = rng.random_range(60e-9..300e-9);
        let ratio = rng.random_range(0.2..0.95);
        let geom = EllipsoidGeometry::prolate(a, a * ratio, 2200.0).map_err(|e| e.to_string())?;
        let closed = depolarization_factors(&geom).map_err(|e| e.to_string())?;
        let quad = depolarization_factors_quadrature(&geom).map_err(|e| e.to_string())?;
        let sum = closed[0] + closed[1] + closed[2];
        if (sum - 1.0).abs() > 1e-10 {
            return Err(format!("factor sum {sum} deviates from 1"));
        }
        for j in 0..3 {
            if (closed[j] - quad[j]).abs() > 1e-8 * closed[j] {
                return Err(format!(
                    "closed form {} vs quadrature {} at axis {j}",
                    closed[j], quad[j]
                ));
            }
        }
    }
    Ok(())
}

fn rotation_preserves_spectrum() -> Result<(), String> {
    let geom = EllipsoidGeometry::prolate(100e-9, 50e-9, 2200.0).map_err(|e| e.to_string())?;
    let pol = axis_polarizabilities(&geom, 2.1).map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(102);
    use rand::Rng;
    for _ in 0..50 {
        let theta = rng.random_range(-3.2..3.2);
        let phi = rng.random_range(-3.2..3.2);
        let rot = rotated_polarizability(&pol, theta, phi);
        let tr = pol.alpha_a + pol.alpha_b + pol.alpha_c;
        if (rot.trace() - tr).abs() > 1e-12 * tr {
            return Err(format!("trace drift at theta={theta}, phi={phi}"));
        }
    }
    Ok(())
}

fn lyapunov_residuals() -> Result<(), String> {
    let mut rng = StdRng::seed_from_u64(103);
    use rand::Rng;
    let mut checked = 0;
    while checked < 50 {
        let omega = rng.random_range(0.5..2.0);
        let model = build_model(
            omega,
            rng.random_range(1e-4..0.3),
            rng.random_range(0.0..0.5) * omega,
            rng.random_range(0.2..2.0) * omega,
            rng.random_range(0.5..8.0),
            rng.random_range(0.0..100.0),
        )
        .map_err(|e| e.to_string())?;
        if !model.is_stable() {
            continue;
        }
        checked += 1;
        let v = model.steady_state_cm().map_err(|e| e.to_string())?;
        let a = model.drift();
        let d = model.diffusion();
        let mut r_norm = 0.0f64;
        let mut d_norm = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let mut res = d[(i, j)];
                for k in 0..4 {
                    res += a[(i, k)] * v.matrix()[(k, j)] + v.matrix()[(i, k)] * a[(j, k)];
                }
                r_norm = r_norm.max(res.abs());
                d_norm = d_norm.max(d[(i, j)].abs());
            }
        }
        if r_norm > 1e-12 * d_norm {
            return Err(format!("residual {r_norm:.3e} above 1e-12 of {d_norm:.3e}"));
        }
    }
    Ok(())
}

fn decoupled_output_is_vacuum() -> Result<(), String> {
    let model = build_model(1.0, 0.05, 0.0, 1.0, 3.0, 0.0).map_err(|e| e.to_string())?;
    let out = output_cm(&model, 0.2, 1e-8).map_err(|e| e.to_string())?;
    for i in 0..6 {
        for j in 0..6 {
            let expect = if i == j { 0.5 } else { 0.0 };
            if (out.cm().matrix()[(i, j)] - expect).abs() > 1e-7 {
                return Err(format!("entry ({i},{j}) = {}", out.cm().matrix()[(i, j)]));
            }
        }
    }
    Ok(())
}

fn output_state_is_physical() -> Result<(), String> {
    let model = build_model(1.0, 1e-6, 0.4, 1.0, 3.0, 5e7).map_err(|e| e.to_string())?;
    let out = output_cm(&model, 0.19, 1e-6).map_err(|e| e.to_string())?;
    let nu = out
        .cm()
        .min_symplectic_eigenvalue()
        .map_err(|e| e.to_string())?;
    if nu < 0.5 - 1e-6 {
        return Err(format!("nu_min = {nu}"));
    }
    Ok(())
}

fn tmsv_log_negativity() -> Result<(), String> {
    for r in [0.2, 0.8, 1.5] {
        let en = two_mode_squeezed_vacuum(r)
            .log_negativity()
            .map_err(|e| e.to_string())?;
        if (en - 2.0 * r).abs() > 1e-9 {
            return Err(format!("En({r}) = {en}, expected {}", 2.0 * r));
        }
    }
    Ok(())
}

fn partial_transpose_equivalence() -> Result<(), String> {
    let mut rng = StdRng::seed_from_u64(104);
    for _ in 0..50 {
        let v = random_physical_cm(&mut rng, 2, 0.9, 1.5);
        let en = PairCm::new(v.clone())
            .and_then(|p| p.log_negativity())
            .map_err(|e| e.to_string())?;
        let nu = v
            .partial_transpose(1)
            .and_then(|pt| pt.min_symplectic_eigenvalue())
            .map_err(|e| e.to_string())?;
        let en_pt = (-(2.0 * nu).ln()).max(0.0);
        if (en - en_pt).abs() > 1e-10 {
            return Err(format!("block form {en} vs partial transpose {en_pt}"));
        }
    }
    Ok(())
}

fn bell_detection_routes_agree() -> Result<(), String> {
    let mut rng = StdRng::seed_from_u64(105);
    for eta in [1.0, 0.9, 0.8, 0.5] {
        for _ in 0..25 {
            let joint =
                JointCm::from_cm(random_physical_cm(&mut rng, 4, 0.7, 1.2)).map_err(|e| e.to_string())?;
            let setup = SwapSetup::new(0.5, eta, eta, FilterKind::Bs).map_err(|e| e.to_string())?;
            let a = conditioned_cm(&joint, &setup).map_err(|e| e.to_string())?;
            let b = conditioned_cm_oracle(&joint, &setup).map_err(|e| e.to_string())?;
            let scale = a.matrix().iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for i in 0..4 {
                for j in 0..4 {
                    let diff = (a.matrix()[(i, j)] - b.matrix()[(i, j)]).abs();
                    if diff > 1e-9 * scale {
                        return Err(format!("eta={eta}: routes differ by {diff:.3e}"));
                    }
                }
            }
        }
    }
    Ok(())
}

const CHECKS: &[Check] = &[
    Check {
        name: "depolarization factors: closed form vs quadrature, sum = 1",
        run: depolarization_sum_and_quadrature,
    },
    Check {
        name: "rotated polarizability preserves the spectrum",
        run: rotation_preserves_spectrum,
    },
    Check {
        name: "Lyapunov residual below 1e-12 on random stable models",
        run: lyapunov_residuals,
    },
    Check {
        name: "decoupled cavity output is exact vacuum",
        run: decoupled_output_is_vacuum,
    },
    Check {
        name: "output covariance matrix is physical",
        run: output_state_is_physical,
    },
    Check {
        name: "two-mode squeezed vacuum log-negativity closed form",
        run: tmsv_log_negativity,
    },
    Check {
        name: "log-negativity equals the partial-transpose route",
        run: partial_transpose_equivalence,
    },
    Check {
        name: "Bell detection: closed form equals the ancilla oracle",
        run: bell_detection_routes_agree,
    },
];

/// Run the suite, printing one line per check. Returns the failure count.
pub fn run_checks() -> usize {
    let mut failures = 0;
    for check in CHECKS {
        match (check.run)() {
            Ok(()) => println!("PASS {}", check.name),
            Err(msg) => {
                failures += 1;
                println!("FAIL {}: {msg}", check.name);
            }
        }
    }
    failures
}
