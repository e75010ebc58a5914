//! End-to-end acceptance checks, one PASS/FAIL line per criterion.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use phonon_gauge::couplings::wrap_phase;
use phonon_gauge::dynamics::{
    evolve, link_transfer_point, link_transfer_scan, plaquette_coupling_matrix,
    plaquette_experiment, tuned_plaquette_spacing, DrivenSetup, EffectiveModel, EvolveSettings,
    LinkPoint, PlaquetteFlux, PlaquetteParams,
};
use phonon_gauge::spectra::{
    edge_state_report, eigenvalues, flat_band_report, flux_sweep, gap_windows,
    rhombic_ladder_matrix, square_lattice_matrix,
};
use phonon_gauge::{
    bessel_j, dressed_factor, plaquette_flux, Boundary, Complex64, FockSpace, LadderKind,
    ModelKind, Result,
};

type Outcome = Result<(bool, String)>;
type Check = fn() -> Outcome;

fn bessel_oracle(order: i64, x: f64) -> f64 {
    // Power series, adequate for the moderate arguments used here.
    let n = order.unsigned_abs() as i32;
    let half = 0.5 * x;
    let mut term = half.powi(n) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..200 {
        term *= -half * half / (k as f64 * (k as f64 + n as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    if order < 0 && n % 2 == 1 {
        -sum
    } else {
        sum
    }
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    for eta in [0.1, 0.3, 0.6, 1.0, 2.0] {
        worst = worst.max(dressed_factor(1, eta, TAU)?.norm());
    }
    Ok((worst < 1e-12, format!("max |F_1(eta, 2pi)| = {worst:.2e}")))
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for r in 0..3u32 {
        for a in 0..50 {
            let eta = 2.0 * a as f64 / 49.0;
            for b in 0..50 {
                let dphi = TAU * b as f64 / 49.0;
                let oracle = bessel_oracle(r as i64, 2.0 * eta * (0.5 * dphi).sin()).abs();
                worst = worst.max((dressed_factor(r, eta, dphi)?.norm() - oracle).abs());
            }
        }
    }
    Ok((
        worst < 1e-10,
        format!("max deviation from |J_r(2 eta sin(dphi/2))| = {worst:.2e}"),
    ))
}

fn criterion_3() -> Outcome {
    let setup = DrivenSetup::link_preset();
    let grid: Vec<f64> = (0..21).map(|k| TAU * k as f64 / 20.0).collect();
    let scan = link_transfer_scan(&setup, &grid)?;
    let at_pi = &scan.points[10];
    let (eff, exact) = (
        at_pi.transfer_effective.unwrap_or(0.0),
        at_pi.transfer_exact.unwrap_or(0.0),
    );
    let defined = scan.points.iter().filter(|p| p.is_defined()).count();
    let disagreement = scan.max_disagreement();
    let ok = eff >= 0.9 && exact >= 0.9 && disagreement <= 0.1;
    Ok((
        ok,
        format!("n2*(pi): effective {eff:.5}, laser {exact:.5}; max disagreement {disagreement:.4} over {defined} points"),
    ))
}

fn pi_plaquette_checks(d_y: f64) -> Result<(f64, f64, f64)> {
    let mut params = PlaquetteParams::new(DrivenSetup::plaquette_preset(), PlaquetteFlux::Pi);
    params.d_y = Some(d_y);
    let run = plaquette_experiment(&params)?;
    let p3_eff = run.effective.site_series(2).into_iter().fold(0.0, f64::max);
    let n3_exact = run.exact.site_series(2).into_iter().fold(0.0, f64::max);
    Ok((p3_eff, n3_exact, run.exact.max_norm_drift()))
}

fn criterion_4() -> Outcome {
    let drive = DrivenSetup::plaquette_preset().drive.with_phases(PI, PI);
    let f = dressed_factor(drive.order, drive.strength, drive.phase_x)?.norm();
    let stated = f.powf(-2.0 / 3.0);
    let tuned = tuned_plaquette_spacing(&drive)?;
    let (p3_a, n3_a, _) = pi_plaquette_checks(stated)?;
    let (p3_b, n3_b, _) = pi_plaquette_checks(tuned)?;
    let ok = p3_a < 1e-10 && n3_a < 0.05 && p3_b < 1e-10 && n3_b < 0.05;
    Ok((
        ok,
        format!(
            "d_y={stated:.4}: max P3 {p3_a:.1e}, laser max n3 {n3_a:.4}; d_y={tuned:.4}: max P3 {p3_b:.1e}, laser max n3 {n3_b:.4}"
        ),
    ))
}

fn criterion_5() -> Outcome {
    let run = plaquette_experiment(&PlaquetteParams::new(
        DrivenSetup::plaquette_preset(),
        PlaquetteFlux::Zero,
    ))?;
    let p3 = run.effective.site_series(2).into_iter().fold(0.0, f64::max);
    let n3 = run.exact.site_series(2).into_iter().fold(0.0, f64::max);
    Ok((
        p3 > 0.9,
        format!("d_y={:.4}: max P3 {p3:.4} (laser {n3:.4})", run.d_y),
    ))
}

fn criterion_6() -> Outcome {
    let open = rhombic_ladder_matrix(10, 1.0, 1.0, PI, Boundary::Open)?;
    let periodic = rhombic_ladder_matrix(10, 1.0, 1.0, PI, Boundary::Periodic)?;
    let (open, bulk) = (open.spectrum()?, periodic.spectrum()?);
    let clusters = flat_band_report(&bulk, Some(1e-6));
    let centres: Vec<f64> = clusters.iter().map(|c| c.energy).collect();
    let spread = clusters.iter().fold(0.0f64, |m, c| m.max(c.spread));
    let flat = clusters.len() == 3
        && [-2.0, 0.0, 2.0]
            .iter()
            .zip(&centres)
            .all(|(e, c)| (e - c).abs() < 1e-10)
        && spread < 1e-10;
    let windows = gap_windows(&bulk.eigenvalues, 1e-6);
    let edges = edge_state_report(&open, &windows);
    let per_gap = windows.iter().all(|&(lo, hi)| {
        edges
            .iter()
            .any(|s| s.energy > lo && s.energy < hi && s.boundary_weight > 0.9)
    });
    let ok = open.len() == 31 && flat && windows.len() == 2 && per_gap;
    Ok((
        ok,
        format!(
            "{} sites; bulk clusters {centres:.6?} spread {spread:.1e}; {} edge states in {} gaps",
            open.len(),
            edges.len(),
            windows.len()
        ),
    ))
}

fn criterion_7() -> Outcome {
    let grid: Vec<f64> = (0..41).map(|k| -PI + TAU * k as f64 / 40.0).collect();
    let sweep = flux_sweep(
        |phi| Ok(rhombic_ladder_matrix(10, 1.0, 1.0, phi, Boundary::Periodic)?.hamiltonian),
        &grid,
        Some(3),
    )?;
    let gaps: Vec<f64> = sweep
        .iter()
        .map(|p| p.min_gap.unwrap_or(f64::NAN))
        .collect();
    let at_zero = gaps[20];
    let tol = 1e-12;
    let right = gaps[20..].windows(2).all(|w| w[1] >= w[0] - tol);
    let left = gaps[..=20].windows(2).all(|w| w[0] >= w[1] - tol);
    let ok = at_zero < 1e-6 && right && left;
    Ok((
        ok,
        format!(
            "gap(0) = {at_zero:.1e}, gap(+-pi) = {:.4}/{:.4}, monotone {}",
            gaps[0],
            gaps[40],
            left && right
        ),
    ))
}

fn total_number(space: &FockSpace) -> Result<DMatrix<Complex64>> {
    let mut n = DMatrix::zeros(space.dim(), space.dim());
    for s in 0..space.n_sites() {
        n += space.ladder_matrix(s, LadderKind::Number)?;
    }
    Ok(n)
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // Gauge invariance of spectra and of the plaquette flux.
    let tb = rhombic_ladder_matrix(6, 1.0, 0.7, 2.1, Boundary::Open)?;
    let theta: Vec<f64> = (0..tb.dim())
        .map(|k| (k as f64 * 1.37).sin() * 3.0)
        .collect();
    let m = tb.coupling_matrix()?;
    let e0 = eigenvalues(m.matrix())?;
    let e1 = eigenvalues(m.gauge_transform(&theta).matrix())?;
    let gauge_spec = e0
        .iter()
        .zip(&e1)
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let plaquette = plaquette_coupling_matrix(&PlaquetteParams::new(
        DrivenSetup::plaquette_preset(),
        PlaquetteFlux::Pi,
    ))?;
    let phases = [0.3, -1.2, 2.5, 0.9];
    let f0 = plaquette_flux(&plaquette, &[0, 1, 2, 3])?;
    let f1 = plaquette_flux(&plaquette.gauge_transform(&phases), &[0, 1, 2, 3])?;
    let gauge_flux = wrap_phase(f0 - f1).abs();
    ok &= gauge_spec < 1e-10 && gauge_flux < 1e-10;
    notes.push(format!("gauge {gauge_spec:.1e}/{gauge_flux:.1e}"));

    // Norm drift of the preset evolutions, step halving, truncation doubling.
    let setup = DrivenSetup::link_preset();
    let base = link_transfer_point(&setup, PI)?;
    let mut fine = setup.clone();
    fine.steps_per_period *= 2.0;
    let halved = link_transfer_point(&fine, PI)?;
    let mut wide = setup.clone();
    wide.n_max *= 2;
    let doubled = link_transfer_point(&wide, PI)?;
    let drift_of = |p: &LinkPoint| {
        p.norm_drift_effective
            .unwrap_or(1.0)
            .max(p.norm_drift_exact.unwrap_or(1.0))
    };
    let pi_run = plaquette_experiment(&PlaquetteParams::new(
        DrivenSetup::plaquette_preset(),
        PlaquetteFlux::Pi,
    ))?;
    let drift = drift_of(&base)
        .max(pi_run.exact.max_norm_drift())
        .max(pi_run.effective.max_norm_drift());
    let diff = |a: &LinkPoint, b: &LinkPoint| {
        let e = (a.transfer_effective.unwrap_or(0.0) - b.transfer_effective.unwrap_or(1.0)).abs();
        let x = (a.transfer_exact.unwrap_or(0.0) - b.transfer_exact.unwrap_or(1.0)).abs();
        e.max(x)
    };
    let halving = diff(&base, &halved);
    let doubling = diff(&base, &doubled);
    ok &= drift < 1e-8 && halving < 1e-6 && doubling < 1e-3;
    notes.push(format!(
        "drift {drift:.1e}, halving {halving:.1e}, n_max doubling {doubling:.1e}"
    ));

    // Total number is conserved by the effective generator.
    let space = FockSpace::new(4, 2)?;
    let effective = EffectiveModel::new(&plaquette, &space)?;
    let h = phonon_gauge::dynamics::effective_hamiltonian(&plaquette, &space)?;
    let n = total_number(&space)?;
    let commutator = (&n * &h - &h * &n)
        .iter()
        .fold(0.0f64, |a, c| a.max(c.norm()));
    let psi0 = space.single_excitation(0)?;
    let t = PI / plaquette.get(1, 0).norm();
    let dt = phonon_gauge::dynamics::default_time_step(&effective, 40.0);
    let r = evolve(
        &effective,
        &space,
        &psi0,
        &EvolveSettings {
            t_final: t,
            dt,
            samples: 50,
        },
        ModelKind::Effective,
    )?;
    let leak = r
        .total_population()
        .iter()
        .zip(&r.norms)
        .fold(0.0f64, |a, (tot, nrm)| a.max((tot - nrm).abs()));
    ok &= commutator < 1e-15 && leak < 1e-12;
    notes.push(format!("[N,H] {commutator:.1e}, number leak {leak:.1e}"));

    Ok((ok, notes.join("; ")))
}

fn criterion_9() -> Outcome {
    let (lx, ly, jx, jy) = (7, 5, 1.0, 0.45);
    let tb = square_lattice_matrix(lx, ly, 0.0, jx, jy, 1, Boundary::Open)?;
    let e = eigenvalues(&tb.hamiltonian)?;
    let mut analytic: Vec<f64> = (1..=lx)
        .flat_map(|k| {
            (1..=ly).map(move |l| {
                2.0 * jx * (k as f64 * PI / (lx + 1) as f64).cos()
                    + 2.0 * jy * (l as f64 * PI / (ly + 1) as f64).cos()
            })
        })
        .collect();
    analytic.sort_by(f64::total_cmp);
    let separable = e
        .iter()
        .zip(&analytic)
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let tb = square_lattice_matrix(12, 12, PI, 1.0, 1.0, 1, Boundary::Open)?;
    let e = eigenvalues(&tb.hamiltonian)?;
    let chiral = e
        .iter()
        .zip(e.iter().rev())
        .fold(0.0f64, |a, (x, y)| a.max((x + y).abs()));
    Ok((
        separable < 1e-10 && chiral < 1e-10,
        format!("separable {separable:.1e}, E -> -E {chiral:.1e}"),
    ))
}

fn main() -> ExitCode {
    // Keep the oracle honest against the library's own Bessel routine.
    assert!((bessel_oracle(3, 1.7) - bessel_j(3, 1.7).unwrap()).abs() < 1e-14);

    let criteria: [(&str, Check); 9] = [
        ("dressed-factor suppression", criterion_1),
        ("closed-form dressed factor", criterion_2),
        ("link transfer scan", criterion_3),
        ("pi-flux plaquette", criterion_4),
        ("zero-flux plaquette", criterion_5),
        ("ladder flat bands and edge states", criterion_6),
        ("ladder flux sweep", criterion_7),
        ("property suite", criterion_8),
        ("square-lattice sanity", criterion_9),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!pass);
        println!(
            "{} {}: {name} ({detail}) [{:.2} s]",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed().as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
