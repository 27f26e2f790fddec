//! Experiment drivers: each maps a config onto library calls and emits a
//! RunRecord with oracle comparisons.

use std::f64::consts::PI;
use std::time::Instant;

use anyhow::{Context, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::json;

use holobec_core::evolution::{
    adiabatic_holonomy, berry_adiabatic, detection_protocol, ProtocolVariant,
};
use holobec_core::geometry::{
    berry_phase_closed, berry_phase_flux, holonomy_closed_form, holonomy_path_ordered,
    holonomy_stokes, holonomy_transport, ConnectionField, DegenerateSubspace, HolonomyRectangle,
    LoopPath,
};
use holobec_core::hamiltonian::{build_h0, degeneracy_ratio};
use holobec_core::linalg::{max_abs_diff, I};
use holobec_core::operator::commutator;
use holobec_core::perturbation::{first_order_check, generator_resummed, generator_truncated};
use holobec_core::{wrap_angle, SpinSystem};

use crate::config::{
    BerryConfig, DetectConfig, HolonomyConfig, PerturbationConfig, StokesConfig, TransferConfig,
};
use crate::record::{matrix_entries, Comparison, RunRecord};

fn rho_of(sys: &SpinSystem, m: f64) -> f64 {
    let j = sys.j();
    ((j - m) * (j + m + 1.0)).sqrt()
}

pub fn run_berry(cfg: &BerryConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let sys = SpinSystem::new(cfg.j)?;
    let closed = berry_phase_closed(cfg.m, cfg.theta);
    let flux = berry_phase_flux(cfg.m, cfg.theta, cfg.quadrature_steps)?;
    let conn = ConnectionField::AnalyticAbelian { m: cfg.m };
    let path = LoopPath::berry_circle(cfg.theta, cfg.loop_segments)?;
    let po = holonomy_path_ordered(&conn, &path)?;
    let meas = berry_adiabatic(
        &sys, cfg.m, cfg.theta, cfg.alpha0, cfg.beta0, cfg.t_final, cfg.steps,
    )?;

    let comparisons = vec![
        Comparison::matches(
            "flux_vs_closed_wrapped",
            flux.wrapped,
            closed.wrapped,
            cfg.tol_oracles,
        ),
        Comparison::matches(
            "path_ordered_vs_closed_wrapped",
            wrap_angle(po.phase() - closed.wrapped),
            0.0,
            cfg.tol_oracles,
        ),
        Comparison::matches(
            "adiabatic_vs_closed_wrapped",
            wrap_angle(meas.geometric - closed.wrapped),
            0.0,
            cfg.tol_adiabatic,
        ),
    ];
    let results = json!({
        "closed_form": {"raw": closed.raw, "wrapped": closed.wrapped},
        "flux": {"raw": flux.raw, "wrapped": flux.wrapped},
        "path_ordered_phase": po.phase(),
        "adiabatic": {
            "forward": {
                "total": meas.forward.total,
                "dynamical": meas.forward.dynamical,
                "geometric": meas.forward.geometric,
            },
            "reversed": {
                "total": meas.reversed.total,
                "dynamical": meas.reversed.dynamical,
                "geometric": meas.reversed.geometric,
            },
            "correction": meas.correction,
            "geometric": meas.geometric,
        },
    });
    RunRecord::new(
        "berry",
        serde_json::to_value(cfg)?,
        results,
        comparisons,
        start.elapsed().as_secs_f64(),
    )
}

pub fn run_detect(cfg: &DetectConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let sys = SpinSystem::new(cfg.j)?;
    let mut comparisons = Vec::new();
    let mut variants = serde_json::Map::new();
    for (label, variant) in [
        ("adiabatic_ramps", ProtocolVariant::AdiabaticRamps),
        ("instantaneous_rotations", ProtocolVariant::InstantaneousRotations),
    ] {
        let rep = detection_protocol(&sys, cfg.theta, cfg.alpha0, cfg.t_final, cfg.steps, variant)?;
        comparisons.push(Comparison::upper_bound(
            &format!("{label}_overlap_with_top"),
            rep.overlap_with_top,
            cfg.tol_overlap,
        ));
        comparisons.push(Comparison::lower_bound(
            &format!("{label}_mode_b_population"),
            rep.mode_b_population,
            0.5 * 2.0 * cfg.j,
        ));
        variants.insert(
            label.to_string(),
            json!({
                "overlap_with_top": rep.overlap_with_top,
                "mode_b_population": rep.mode_b_population,
                "populations": rep.populations,
                "fock_states": rep.fock_states.iter()
                    .map(|f| json!({"n_a": f.n_a, "n_b": f.n_b}))
                    .collect::<Vec<_>>(),
                "dynamical_phase_warning": rep.dynamical_phase_warning,
            }),
        );
    }
    RunRecord::new(
        "detect",
        serde_json::to_value(cfg)?,
        serde_json::Value::Object(variants),
        comparisons,
        start.elapsed().as_secs_f64(),
    )
}

pub fn run_holonomy(cfg: &HolonomyConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let sys = SpinSystem::new(cfg.j)?;
    let rho = rho_of(&sys, cfg.m);
    let theta1 = cfg.theta1.unwrap_or(cfg.theta0 + PI / (2.0 * rho));
    let tol_cf = cfg.tol_closed_form.unwrap_or(3.0 / rho);
    let alpha0 = degeneracy_ratio(cfg.m) * cfg.beta0;

    let rect = HolonomyRectangle::paper_geometry(&sys, cfg.m, cfg.theta0, theta1)?;
    let sub = DegenerateSubspace::find_pair(&sys, alpha0, cfg.beta0, cfg.m)?;
    let conn = ConnectionField::analytic(&sys, &sub)?;
    let ccw = LoopPath::rectangle(&rect, cfg.loop_segments)?;

    let po = holonomy_path_ordered(&conn, &ccw)?;
    let st = holonomy_stokes(&conn, &rect, (cfg.stokes_grid, cfg.stokes_grid))?;
    let cf = holonomy_closed_form(&sys, cfg.m, cfg.theta0, theta1)?;
    let transport = holonomy_transport(&conn, &ccw.reversed())?;
    let meas = adiabatic_holonomy(
        &sys,
        alpha0,
        cfg.beta0,
        cfg.m,
        &rect,
        cfg.t_final,
        cfg.steps,
        cfg.leakage_threshold,
    )?;

    let comparisons = vec![
        Comparison::matches(
            "stokes_vs_path_ordered_frobenius",
            po.frobenius_distance(&st.matrix),
            0.0,
            cfg.tol_stokes,
        ),
        Comparison::matches(
            "path_ordered_vs_closed_form_frobenius",
            po.frobenius_distance(&cf.matrix),
            0.0,
            tol_cf,
        ),
        Comparison::matches(
            "adiabatic_vs_transport_frobenius",
            meas.holonomy.frobenius_distance(&transport.matrix),
            0.0,
            cfg.tol_adiabatic,
        ),
        Comparison::upper_bound(
            "path_ordered_unitarity_deviation",
            po.unitarity_deviation(),
            1e-8,
        ),
        Comparison::upper_bound("leakage", meas.leakage, cfg.leakage_threshold),
    ];
    let results = json!({
        "rho": rho,
        "rectangle": {
            "phi0": rect.phi0, "phi1": rect.phi1,
            "theta0": rect.theta0, "theta1": rect.theta1,
        },
        "path_ordered": matrix_entries(&po.matrix),
        "stokes": matrix_entries(&st.matrix),
        "closed_form": matrix_entries(&cf.matrix),
        "transport": matrix_entries(&transport.matrix),
        "adiabatic": matrix_entries(&meas.holonomy.matrix),
        "leakage": meas.leakage,
    });
    RunRecord::new(
        "holonomy",
        serde_json::to_value(cfg)?,
        results,
        comparisons,
        start.elapsed().as_secs_f64(),
    )
}

pub fn run_transfer(cfg: &TransferConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let sys = SpinSystem::new(cfg.j)?;
    let rho = rho_of(&sys, cfg.m);
    let theta1 = cfg.theta0 + cfg.half_periods * PI / (2.0 * rho);
    let alpha0 = degeneracy_ratio(cfg.m) * cfg.beta0;
    let rect = HolonomyRectangle::paper_geometry(&sys, cfg.m, cfg.theta0, theta1)?;

    let cf = holonomy_closed_form(&sys, cfg.m, cfg.theta0, theta1)?;
    let meas = adiabatic_holonomy(
        &sys,
        alpha0,
        cfg.beta0,
        cfg.m,
        &rect,
        cfg.t_final,
        cfg.steps,
        cfg.leakage_threshold,
    )?;
    let p_cf = [
        cf.matrix[(0, 0)].norm_sqr(),
        cf.matrix[(1, 0)].norm_sqr(),
    ];
    let p_ad = [
        meas.holonomy.matrix[(0, 0)].norm_sqr(),
        meas.holonomy.matrix[(1, 0)].norm_sqr(),
    ];

    let mut comparisons = vec![
        Comparison::matches("transfer_closed_vs_adiabatic", p_ad[1], p_cf[1], cfg.tol_closed_vs_adiabatic),
        Comparison::upper_bound("leakage", meas.leakage, cfg.leakage_threshold),
    ];
    if (cfg.half_periods - 1.0).abs() < 1e-9 {
        comparisons.push(Comparison::lower_bound("closed_form_transfer", p_cf[1], 0.95));
        comparisons.push(Comparison::lower_bound("adiabatic_transfer", p_ad[1], 0.9));
    }
    if (cfg.half_periods - 0.5).abs() < 1e-9 {
        for (name, p) in [
            ("closed_form_stay", p_cf[0]),
            ("closed_form_transfer", p_cf[1]),
            ("adiabatic_stay", p_ad[0]),
            ("adiabatic_transfer", p_ad[1]),
        ] {
            comparisons.push(Comparison::matches(name, p, 0.55, 0.1));
        }
    }
    let results = json!({
        "rho": rho,
        "theta1": theta1,
        "closed_form": matrix_entries(&cf.matrix),
        "adiabatic": matrix_entries(&meas.holonomy.matrix),
        "closed_form_populations": {"stay": p_cf[0], "transfer": p_cf[1]},
        "adiabatic_populations": {"stay": p_ad[0], "transfer": p_ad[1]},
        "leakage": meas.leakage,
    });
    RunRecord::new(
        "transfer",
        serde_json::to_value(cfg)?,
        results,
        comparisons,
        start.elapsed().as_secs_f64(),
    )
}

pub fn run_stokes(cfg: &StokesConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let sys = SpinSystem::new(cfg.j)?;
    let rho = rho_of(&sys, cfg.m);
    let theta1 = cfg.theta1.unwrap_or(cfg.theta0 + PI / (2.0 * rho));
    let rect = HolonomyRectangle::paper_geometry(&sys, cfg.m, cfg.theta0, theta1)?;
    let sub = DegenerateSubspace::pair(&sys, cfg.m, 0.0)?;
    let conn = ConnectionField::analytic(&sys, &sub)?;
    let po = holonomy_path_ordered(&conn, &LoopPath::rectangle(&rect, cfg.loop_segments)?)?;
    let st = holonomy_stokes(&conn, &rect, (cfg.grid_sigma, cfg.grid_tau))?;
    let dist = po.frobenius_distance(&st.matrix);
    let comparisons = vec![
        Comparison::matches("stokes_vs_path_ordered_frobenius", dist, 0.0, cfg.tol),
        Comparison::upper_bound("stokes_unitarity_deviation", st.unitarity_deviation(), 1e-6),
    ];
    let results = json!({
        "rho": rho,
        "theta1": theta1,
        "path_ordered": matrix_entries(&po.matrix),
        "stokes": matrix_entries(&st.matrix),
        "frobenius_distance": dist,
    });
    RunRecord::new(
        "stokes",
        serde_json::to_value(cfg)?,
        results,
        comparisons,
        start.elapsed().as_secs_f64(),
    )
}

pub fn run_perturbation(cfg: &PerturbationConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let sys = SpinSystem::new(cfg.j)?;

    // residual scaling under gamma halving
    let r_full = first_order_check(&sys, cfg.alpha0, cfg.beta0, cfg.gamma)?;
    let r_half = first_order_check(&sys, cfg.alpha0, cfg.beta0, cfg.gamma / 2.0)?;
    let ratio = r_full / r_half;

    // truncated series against the resummed oracle
    let resummed = generator_resummed(&sys, cfg.alpha0, cfg.beta0)?;
    let truncated = generator_truncated(&sys, cfg.alpha0, cfg.beta0, cfg.n_max)?;
    let trunc_err = max_abs_diff(truncated.operator.matrix(), resummed.matrix());

    // commutator identity over seeded random draws
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut worst_comm = 0.0_f64;
    let mut draws = 0usize;
    while draws < cfg.draws {
        let twice_j = rng.gen_range(2..=20u32);
        let sys_d = SpinSystem::new(twice_j as f64 / 2.0)?;
        let a0 = rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let b0: f64 = rng.gen_range(-0.3..0.3);
        if sys_d
            .m_values()
            .windows(2)
            .any(|w| (a0 + b0 * (w[0] + w[1])).abs() < 1e-3)
        {
            continue;
        }
        draws += 1;
        let g = generator_resummed(&sys_d, a0, b0)?;
        let h0 = build_h0(&sys_d, a0, b0);
        let comm = commutator(&g, &h0)?.scaled(I);
        worst_comm = worst_comm.max(max_abs_diff(comm.matrix(), sys_d.jx().matrix()));
    }

    let comparisons = vec![
        Comparison::matches("residual_halving_ratio", ratio, 4.0, cfg.ratio_window),
        Comparison::upper_bound("truncation_error_at_n_max", trunc_err, cfg.tol_truncation),
        Comparison::upper_bound("commutator_identity_worst", worst_comm, cfg.tol_commutator),
    ];
    let results = json!({
        "residual_gamma": r_full,
        "residual_gamma_half": r_half,
        "residual_ratio": ratio,
        "truncation_error": trunc_err,
        "divergence_warning": truncated.divergence_warning,
        "commutator_identity_worst": worst_comm,
        "draws": draws,
    });
    RunRecord::new(
        "perturbation",
        serde_json::to_value(cfg)?,
        results,
        comparisons,
        start.elapsed().as_secs_f64(),
    )
}

/// Dispatch an experiment by name over its JSON config (used by sweeps).
pub fn run_named(experiment: &str, config: &serde_json::Value) -> Result<RunRecord> {
    match experiment {
        "berry" => run_berry(&parse(config)?),
        "detect" => run_detect(&parse(config)?),
        "holonomy" => run_holonomy(&parse(config)?),
        "transfer" => run_transfer(&parse(config)?),
        "stokes" => run_stokes(&parse(config)?),
        "perturbation" => run_perturbation(&parse(config)?),
        other => anyhow::bail!("unknown experiment `{other}`"),
    }
}

fn parse<T: serde::de::DeserializeOwned>(v: &serde_json::Value) -> Result<T> {
    serde_json::from_value(v.clone()).context("invalid config")
}
