//! One runner per experiment kind. Each fills the artifacts and returns;
//! nothing touches the file system here.

use solitonq_core::bethe::{self, eval_eigenamplitude, eval_time_amplitude};
use solitonq_core::classical::{
    self, fit_soliton_width, propagate_with, ramp_stability_probe, snapshot, ProbeConfig,
};
use solitonq_core::eigencheck::{self, ordering_label, orderings};
use solitonq_core::epr::{epr_metrics_analytic, epr_metrics_sampled, epr_witness, EprMetrics};
use solitonq_core::model::{derive_scales, shot_noise_dp};
use solitonq_core::protocol::{self, classify, enhancement_model};
use solitonq_core::sampler::{estimate_q, pair_covariances, sample_positions};
use solitonq_core::{
    AdiabaticSchedule, Configuration, Segment, Estimate, Field2, GridSpec, MomentEstimates, PulseCenterState,
    SolitonParams, StepPlan,
};

use crate::config::{ClassicalMode, EprSource, ExperimentConfig, Stage};
use crate::output::{Artifacts, Csv, Provenance};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// q for the shot-noise construction: exact for N = 2, otherwise it must be
/// configured (see the q-table experiment).
fn resolve_q(params: &SolitonParams, q: Option<f64>) -> Result<f64> {
    match (q, params.total()) {
        (Some(q), _) if q >= 1.0 && q.is_finite() => Ok(q),
        (Some(q), _) => Err(invalid(format!("q = {q} must be >= 1"))),
        (None, 2) => Ok(2.0),
        (None, n) => Err(invalid(format!("q has no closed form for N = {n}; set q (see q-table)"))),
    }
}

fn build_schedule(c: f64, gamma: f64, duration: f64, segments: &[Segment]) -> Result<AdiabaticSchedule> {
    if !segments.is_empty() {
        return Ok(AdiabaticSchedule::new(segments.to_vec())?);
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(invalid(format!("gamma = {gamma} must be positive")));
    }
    Ok(AdiabaticSchedule::linear(duration, c, c / gamma)?)
}

fn default_b_prime(params: &SolitonParams, b_prime: Option<f64>) -> f64 {
    b_prime.unwrap_or(-params.b)
}

pub fn bethe_eval(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let params = cfg.params;
    let sec = cfg.bethe.clone().unwrap_or_default();
    params.validate()?;
    let conf = Configuration::new(sec.xs.clone(), sec.ys.clone());
    conf.check(&params)?;
    let amp = eval_eigenamplitude(&conf, &params, sec.p)?;
    let r = &mut art.results;
    r.analytic("log_modulus", amp.log_modulus);
    r.analytic("phase", amp.phase);
    r.analytic("modulus", amp.modulus());
    r.info("eigenstate", amp.eigenstate);
    r.info("normalized", amp.normalized);
    if !amp.eigenstate {
        art.log(format!("B = {} is outside {{0, 1}}: amplitude is not an eigenstate", params.xpm));
    }
    if params.eigenstate_valid() {
        art.results.analytic("energy", bethe::energy(&params, sec.p)?);
    }
    if amp.normalized {
        art.results.analytic("norm_constant", bethe::norm_constant(&params)?);
    }
    if let Some(dp) = sec.dp {
        let state = PulseCenterState::new(dp, sec.phase_accum, params.total())?;
        let t = eval_time_amplitude(&conf, &params, &state)?;
        art.results.analytic("time_log_modulus", t.log_modulus);
        art.results.analytic("time_phase", t.phase);
        art.results.analytic("dz2", state.dz2());
    }

    if sec.profile_points >= 2 {
        // Scan the first photon's coordinate with the others held fixed.
        let mut zs = conf.zs();
        let mut csv = Csv::new(&["z", "log_modulus", "phase"]);
        let h = sec.profile_halfwidth;
        for k in 0..sec.profile_points {
            zs[0] = -h + 2.0 * h * k as f64 / (sec.profile_points - 1) as f64;
            let c = Configuration::from_flat(&zs, params.n);
            let a = eval_eigenamplitude(&c, &params, sec.p)?;
            csv.floats(&[zs[0], a.log_modulus, a.phase]);
        }
        art.csv("profile.csv", csv);
    }
    Ok(())
}

pub fn eigencheck(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let params = cfg.params;
    let sec = cfg.eigencheck.clone().unwrap_or_default();
    params.validate_bound()?;
    let report = eigencheck::residual(&params, &cfg.grid, sec.p)?;
    let analytic = eigencheck::region_energies_analytic(&params, sec.p)?;
    let r = &mut art.results;
    r.analytic("global_residual", report.global_residual);
    r.analytic("bulk_residual", report.bulk_residual);
    r.analytic("rayleigh_energy", report.rayleigh_energy);
    r.analytic("region_spread", report.region_spread());
    r.analytic("analytic_spread", eigencheck::analytic_spread(&params, sec.p)?);
    r.analytic("dz", report.dz);
    if params.eigenstate_valid() {
        r.analytic("energy", bethe::energy(&params, sec.p)?);
    }
    r.info("points_per_axis", report.points_per_axis);
    r.info("eigenstate", params.eigenstate_valid());

    let mut csv = Csv::new(&["ordering", "grid_energy", "analytic_energy"]);
    for ord in orderings(params.total()) {
        let label = ordering_label(&params, &ord);
        let grid = report.region_energies.get(&label).copied().unwrap_or(f64::NAN);
        let exact = analytic.get(&label).copied().unwrap_or(f64::NAN);
        csv.row(&[label.clone(), grid.to_string(), exact.to_string()]);
        art.results.analytic(format!("region.{label}"), grid);
        art.results.analytic(format!("region_analytic.{label}"), exact);
    }
    art.csv("regions.csv", csv);

    let mut sizes = sec.refine.clone();
    sizes.push(cfg.grid.points_per_axis);
    sizes.sort_unstable();
    sizes.dedup();
    let mut conv = Csv::new(&["points_per_axis", "dz", "global_residual", "bulk_residual", "region_spread"]);
    for pts in sizes {
        let rep = if pts == cfg.grid.points_per_axis {
            report.clone()
        } else {
            let grid = GridSpec::new(pts, cfg.grid.box_halfwidth)?;
            eigencheck::residual(&params, &grid, sec.p)?
        };
        art.log(format!("grid {pts}: residual {:e}, bulk {:e}", rep.global_residual, rep.bulk_residual));
        conv.floats(&[pts as f64, rep.dz, rep.global_residual, rep.bulk_residual, rep.region_spread()]);
    }
    art.csv("convergence.csv", conv);
    Ok(())
}

fn record_moments(art: &mut Artifacts, est: &MomentEstimates) {
    let mut csv = Csv::new(&["name", "value", "se"]);
    let mut put = |art: &mut Artifacts, name: &str, e: Estimate| {
        csv.row(&[name.to_string(), e.value.to_string(), e.se.to_string()]);
        art.results.sampled(name, e);
    };
    put(art, "mean_abs_distance", est.mean_abs_distance);
    put(art, "mean_sq_distance", est.mean_sq_distance);
    put(art, "q", est.q);
    put(art, "var_sum", est.var_sum);
    put(art, "cov_same", est.cov_same);
    put(art, "cov_cross", est.cov_cross);
    put(art, "p_minus_var", est.p_minus_var);
    if let Some(e) = est.var_sum_half {
        put(art, "var_sum_half", e);
    }
    if let Some(e) = est.var_diff_half {
        put(art, "var_diff_half", e);
    }
    art.results.info("ess", est.ess);
    art.results.info("acceptance_rate", est.acceptance_rate);
    art.results.info("samples", est.samples);
    art.results.info("exploratory", est.exploratory);
    art.csv("moments.csv", csv);
}

pub fn sample(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let params = cfg.params;
    let sec = cfg.sample.clone().unwrap_or_default();
    params.validate_bound()?;
    let q = sec.q.unwrap_or(2.0);
    let dp = match sec.dp {
        Some(dp) => dp,
        None => shot_noise_dp(&params, q)?,
    };
    let state = PulseCenterState::at_rest(dp, params.total())?;
    let est = sample_positions(&params, &state, &cfg.mcmc)?;
    art.results.analytic("dp", dp);
    record_moments(art, &est);
    if est.exploratory {
        art.log(format!("B = {}: no exact theory, estimates are exploratory", params.xpm));
    }
    if params.xpm == 1.0 {
        // The exact pair-distance and covariance model for the Manakov soliton.
        let (same, cross) = protocol::covariances(&params, &state, est.q.value);
        art.results.analytic("cov_same_model", same);
        art.results.analytic("cov_cross_model", cross);
        if params.total() == 2 {
            art.results.analytic("mean_abs_distance_exact", (params.b / params.c).abs());
        }
    }
    if sec.pair_covariances {
        let pairs = pair_covariances(&params, &state, &cfg.mcmc)?;
        let mut csv = Csv::new(&["i", "j", "value", "se"]);
        for p in pairs {
            csv.floats(&[p.i as f64, p.j as f64, p.value.value, p.value.se]);
        }
        art.csv("pair_covariances.csv", csv);
    }
    art.log(format!(
        "sampled {} positions, ess {:.0}, acceptance {:.3}",
        est.samples, est.ess, est.acceptance_rate
    ));
    Ok(())
}

pub fn q_table(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let sec = cfg.q_table.clone().unwrap_or_default();
    let base = cfg.params;
    if base.xpm != 1.0 {
        return Err(invalid(format!("q-table needs B = 1 (got B = {})", base.xpm)));
    }
    let mut csv = Csv::new(&["N", "q", "se", "ess"]);
    let mut errors = std::collections::BTreeMap::new();
    for &big_n in &sec.ns {
        let params = SolitonParams::new(base.b, base.c, 1.0, big_n.div_ceil(2), big_n / 2);
        let row = if big_n < 2 {
            Err(solitonq_core::Error::InvalidParameter(format!("N = {big_n} has no pair distance")))
        } else {
            estimate_q(&params, &cfg.mcmc, sec.tolerance)
        };
        match row {
            Ok(fp) => {
                csv.floats(&[big_n as f64, fp.q.value, fp.q.se, fp.estimates.ess]);
                art.results.sampled(format!("q.N{big_n}"), fp.q);
                art.log(format!("N = {big_n}: q = {} +- {} after {} iterations", fp.q.value, fp.q.se, fp.iterations));
            }
            Err(e) => {
                csv.row(&[big_n.to_string(), String::new(), String::new(), String::new()]);
                art.log(format!("N = {big_n}: {e}"));
                errors.insert(format!("N{big_n}"), e.to_string());
            }
        }
    }
    art.results.info("row_errors", errors);
    art.csv("q_table.csv", csv);
    Ok(())
}

pub fn protocol(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let params = cfg.params;
    let sec = cfg.protocol.clone().unwrap_or_default();
    params.validate_bound()?;
    let q = resolve_q(&params, sec.q)?;
    let dp = match sec.dp {
        Some(dp) => dp,
        None => shot_noise_dp(&params, q)?,
    };
    let state = PulseCenterState::at_rest(dp, params.total())?;
    let schedule = build_schedule(params.c, sec.gamma, sec.duration, &sec.segments)?;
    let b_prime = default_b_prime(&params, sec.b_prime);
    let out = protocol::run_scheme(&params, &state, &schedule, b_prime, q)?;
    let rep = &out.report;

    let r = &mut art.results;
    r.analytic("q", q);
    r.analytic("dp", dp);
    r.analytic("gamma", rep.gamma);
    r.analytic("bandwidth_initial", rep.bandwidth_initial);
    r.analytic("bandwidth_final", rep.bandwidth_final);
    r.analytic("phase_accum_after_ramp", out.after_ramp.state.phase_accum);
    r.analytic("t_prime", out.t_prime);
    r.analytic("dz2_after_ramp", out.after_ramp.state.dz2());
    r.analytic("dz2_final", out.compensated.dz2());
    r.analytic("dz2_target", 1.0 / (4.0 * dp * dp));
    r.analytic("dz_final", rep.dz_final);
    r.analytic("margin", rep.margin.unwrap_or(f64::NAN));
    r.model("enhancement", rep.enhancement);
    r.model("enhancement_cap", rep.enhancement_cap);
    r.model("sql_final", rep.sql_final);
    let (same, cross) = protocol::covariances(&out.after_ramp.params, &out.compensated, q);
    r.analytic("cov_same_final", same);
    r.analytic("cov_cross_final", cross);
    r.info("regime", rep.regime);
    art.log(format!(
        "gamma = {}, t' = {}, enhancement {} (model), regime {:?}",
        rep.gamma, out.t_prime, rep.enhancement, rep.regime
    ));

    // Spread of the pulse center against the length of the compensating medium.
    let n_scan = sec.scan_points.max(3);
    let t_end = if out.t_prime > 0.0 { 2.0 * out.t_prime } else { 1.0 };
    let mut scan = Csv::new(&["t_prime", "dz2"]);
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..n_scan {
        let t = t_end * k as f64 / (n_scan - 1) as f64;
        let st = protocol::apply_dispersion_management(&out.after_ramp.state, b_prime, t)?.state;
        if st.dz2() < best.0 {
            best = (st.dz2(), t);
        }
        scan.floats(&[t, st.dz2()]);
    }
    art.results.analytic("scan_min_t_prime", best.1);
    art.csv("dispersion_scan.csv", scan);

    let mut curve = Csv::new(&["gamma", "enhancement", "regime"]);
    let steps = 60;
    let g_max = sec.gamma_max.max(1.0);
    for k in 0..=steps {
        let g = g_max.powf(k as f64 / steps as f64);
        let e = enhancement_model(g, params.total(), q);
        let regime = serde_json::to_value(classify(g, params.total())).expect("regime serializes");
        curve.row(&[g.to_string(), e.to_string(), regime.as_str().unwrap_or_default().to_string()]);
    }
    art.csv("enhancement.csv", curve);
    Ok(())
}

fn record_epr(art: &mut Artifacts, prefix: &str, m: &EprMetrics, prov: Provenance, se: Option<&ProductSe>) {
    let se = se.copied().unwrap_or_default();
    let r = &mut art.results;
    r.put(format!("{prefix}product_dd"), m.product_dd, se.dd, prov);
    r.put(format!("{prefix}product_diff_sum"), m.product_diff_sum, se.diff_sum, prov);
    r.put(format!("{prefix}product_sum_diff"), m.product_sum_diff, se.sum_diff, prov);
    r.put(format!("{prefix}var_sum_half"), m.var_sum_half, se.var_sum_half, prov);
    r.put(format!("{prefix}var_diff_half"), m.var_diff_half, se.var_diff_half, prov);
    r.put(format!("{prefix}p_diff_var"), m.p_diff_var, se.p_diff_var, prov);
    r.analytic(format!("{prefix}p_sum_var"), m.p_sum_var);
    let w = epr_witness(m);
    r.info(format!("{prefix}entangled"), w.entangled);
    r.info(format!("{prefix}witness_pair"), w.pair);
    r.info(format!("{prefix}p_diff_source"), m.p_diff_source);
}

/// Standard errors of the sampled EPR quantities (first-order propagation,
/// ignoring correlation between the factors).
#[derive(Debug, Clone, Copy, Default)]
struct ProductSe {
    dd: f64,
    diff_sum: f64,
    sum_diff: f64,
    var_sum_half: f64,
    var_diff_half: f64,
    p_diff_var: f64,
}

fn product_se(est: &MomentEstimates, m: &EprMetrics) -> ProductSe {
    let rel = |e: Option<Estimate>| e.map(|e| e.se / e.value.abs()).unwrap_or(0.0);
    let rs = rel(est.var_sum_half);
    let rd = rel(est.var_diff_half);
    let rp = est.p_minus_var.se / est.p_minus_var.value.abs();
    ProductSe {
        dd: m.product_dd * rd.hypot(rp),
        diff_sum: m.product_diff_sum * rd,
        sum_diff: m.product_sum_diff * rs.hypot(rp),
        var_sum_half: est.var_sum_half.map(|e| e.se).unwrap_or(0.0),
        var_diff_half: est.var_diff_half.map(|e| e.se).unwrap_or(0.0),
        p_diff_var: est.p_minus_var.se,
    }
}

fn gamma_key(g: f64) -> String {
    format!("gamma_{g}.")
}

pub fn epr(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let params = cfg.params;
    let sec = cfg.epr.clone().unwrap_or_default();
    params.validate_bound()?;
    let q = resolve_q(&params, sec.q)?;
    let dp = shot_noise_dp(&params, q)?;
    let state = PulseCenterState::at_rest(dp, params.total())?;
    let b_prime = -params.b;
    art.results.analytic("q", q);
    art.results.analytic("dp", dp);
    let mut csv = Csv::new(&["gamma", "product_dd", "product_diff_sum", "product_sum_diff", "entangled"]);
    for &g in &sec.gammas {
        let schedule = build_schedule(params.c, g, sec.duration, &[])?;
        let out = protocol::run_scheme(&params, &state, &schedule, b_prime, q)?;
        let fin = out.after_ramp.params;
        let (m, prov, se) = match sec.source {
            EprSource::Analytic => (epr_metrics_analytic(&fin, &out.compensated, q, None)?, Provenance::Analytic, None),
            EprSource::Sampled => {
                let est = sample_positions(&fin, &out.compensated, &cfg.mcmc)?;
                let m = epr_metrics_sampled(&est, fin.total())?;
                let se = product_se(&est, &m);
                (m, Provenance::Sampled, Some(se))
            }
        };
        record_epr(art, &gamma_key(g), &m, prov, se.as_ref());
        let w = epr_witness(&m);
        csv.row(&[
            g.to_string(),
            m.product_dd.to_string(),
            m.product_diff_sum.to_string(),
            m.product_sum_diff.to_string(),
            w.entangled.to_string(),
        ]);
        art.log(format!("gamma = {g}: product_dd {}, product_sum_diff {}", m.product_dd, m.product_sum_diff));
    }
    art.csv("epr_vs_gamma.csv", csv);
    Ok(())
}

fn profile_csv(field: &Field2) -> Csv {
    let mut csv = Csv::new(&["z", "intensity_u", "intensity_v"]);
    for k in 0..field.len() {
        csv.floats(&[field.z(k), field.u[k].norm_sqr(), field.v[k].norm_sqr()]);
    }
    csv
}

fn snapshot_bytes(field: &Field2) -> Vec<u8> {
    let mut buf = Vec::new();
    snapshot::write_snapshot(&mut buf, field).expect("writing to memory");
    buf
}

pub fn classical(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let params = cfg.params;
    let sec = cfg.classical.clone().unwrap_or_default();
    params.validate_bound()?;
    let power = sec.power.unwrap_or(params.total() as f64);
    if !(power > 0.0) {
        return Err(invalid(format!("power = {power} must be positive")));
    }
    let width = classical::soliton_width_for_power(&params, power);
    let t_sol = classical::soliton_period(&params, width);
    art.results.analytic("width_expected", width);
    art.results.analytic("t_sol", t_sol);
    if let Ok(scales) = derive_scales(&params) {
        art.results.analytic("w0", scales.w0);
    }

    match sec.mode {
        ClassicalMode::Ramp => {
            if sec.dt.is_some() || sec.snapshots > 0 || sec.power.is_some() {
                return Err(invalid("ramp mode chooses its own step and power; remove dt, snapshots and power"));
            }
            let probe = ProbeConfig { points: sec.points, halfwidth: sec.halfwidth, absorber: sec.absorber };
            let rep = ramp_stability_probe(&params, sec.gamma, sec.periods * t_sol, &probe)?;
            let r = &mut art.results;
            r.analytic("gamma", rep.gamma);
            r.analytic("duration", rep.duration);
            r.analytic("width_initial", rep.width_initial);
            r.analytic("width_final", rep.width_final);
            r.analytic("width_predicted", rep.width_predicted);
            r.analytic("width_ratio", rep.width_ratio);
            r.analytic("radiation_fraction", rep.radiation_fraction);
            r.info("stable", rep.stable);
            r.info("steps", rep.steps);
            art.csv("profile_final.csv", profile_csv(&rep.final_field));
            art.file("data/final.bin", snapshot_bytes(&rep.final_field));
            art.log(format!(
                "ramp gamma = {}: width ratio {}, radiation {}",
                rep.gamma, rep.width_ratio, rep.radiation_fraction
            ));
        }
        ClassicalMode::Soliton => {
            let field = Field2::soliton_with_power(&params, power, sec.points, sec.halfwidth * width)?;
            let duration = sec.periods * t_sol;
            let plan = match sec.dt {
                Some(dt) => StepPlan { dt, steps: (duration / dt).ceil() as usize },
                None => StepPlan::covering(&params, width, field.dz(), duration),
            };
            plan.validate(&params, field.dz())?;
            art.csv("profile_initial.csv", profile_csv(&field));
            art.file("data/initial.bin", snapshot_bytes(&field));
            let chunks = sec.snapshots + 1;
            let mut cur = field.clone();
            let mut done = 0;
            for k in 0..chunks {
                let steps = plan.steps * (k + 1) / chunks - done;
                cur = propagate_with(&cur, &params, &StepPlan { dt: plan.dt, steps }, None, sec.absorber.as_ref())?;
                done += steps;
                if k + 1 < chunks {
                    art.file(&format!("data/snapshot_{:03}.bin", k + 1), snapshot_bytes(&cur));
                }
            }
            let exact = Field2::soliton_at(&params, width, cur.len(), cur.halfwidth, cur.t)?;
            let r = &mut art.results;
            r.analytic("dt", plan.dt);
            r.analytic("t_final", cur.t);
            r.analytic("power_initial", field.power());
            r.analytic("power_final", cur.power());
            r.analytic("power_drift", (cur.power() - field.power()) / field.power());
            r.analytic("momentum_initial", field.momentum());
            r.analytic("momentum_final", cur.momentum());
            r.analytic("width_fit_initial", fit_soliton_width(&field)?);
            r.analytic("width_fit_final", fit_soliton_width(&cur)?);
            r.analytic("linf_error", cur.max_abs_diff(&exact));
            r.info("steps", plan.steps);
            art.csv("profile_final.csv", profile_csv(&cur));
            art.file("data/final.bin", snapshot_bytes(&cur));
            art.log(format!("propagated {} steps of dt = {}", plan.steps, plan.dt));
        }
    }
    Ok(())
}

pub fn full_pipeline(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let params = cfg.params;
    let sec = cfg.pipeline.clone().unwrap_or_default();
    params.validate_bound()?;
    if sec.stages.is_empty() {
        return Err(invalid("pipeline.stages is empty"));
    }
    let order = |s: &Stage| *s as usize;
    if sec.stages.windows(2).any(|w| order(&w[0]) >= order(&w[1])) {
        return Err(invalid(
            "pipeline.stages must be an increasing subsequence of adiabatic, dispersion-management, epr",
        ));
    }
    let q = resolve_q(&params, sec.q)?;
    let dp = shot_noise_dp(&params, q)?;
    let mut cur_params = params;
    let mut state = PulseCenterState::at_rest(dp, params.total())?;
    let mut trace = Csv::new(&["stage", "c", "phase_accum", "dz2"]);
    let mut trace_row = |name: &str, p: &SolitonParams, s: &PulseCenterState| {
        trace.row(&[name.to_string(), p.c.to_string(), s.phase_accum.to_string(), s.dz2().to_string()]);
    };
    trace_row("input", &cur_params, &state);
    art.results.analytic("q", q);
    art.results.analytic("dp", dp);

    for stage in &sec.stages {
        match stage {
            Stage::Adiabatic => {
                let schedule = build_schedule(params.c, sec.gamma, sec.duration, &sec.segments)?;
                let out = protocol::apply_adiabatic(&cur_params, &schedule, &state)?;
                cur_params = out.params;
                state = out.state;
                art.results.analytic("margin", out.margin);
                trace_row("adiabatic", &cur_params, &state);
                art.log(format!("adiabatic: c -> {}, margin {}", cur_params.c, out.margin));
            }
            Stage::DispersionManagement => {
                let b_prime = default_b_prime(&params, sec.b_prime);
                let (t_prime, managed) = protocol::compensate(&state, b_prime)?;
                state = managed;
                let rep = protocol::enhancement_report(&params, &cur_params, &state, q)?;
                let r = &mut art.results;
                r.analytic("t_prime", t_prime);
                r.analytic("gamma", rep.gamma);
                r.analytic("dz_final", rep.dz_final);
                r.model("enhancement", rep.enhancement);
                r.model("enhancement_cap", rep.enhancement_cap);
                r.model("sql_final", rep.sql_final);
                r.info("regime", rep.regime);
                trace_row("dispersion-management", &cur_params, &state);
                art.log(format!("dispersion management: t' = {t_prime}, enhancement {} (model)", rep.enhancement));
            }
            Stage::Epr => {
                let m = epr_metrics_analytic(&cur_params, &state, q, None)?;
                record_epr(art, "epr.", &m, Provenance::Analytic, None);
                let w = epr_witness(&m);
                art.results.info("epr.ratio", w.ratio);
                art.log(format!("epr: entangled = {}, ratio {}", w.entangled, w.ratio));
            }
        }
    }
    art.csv("stages.csv", trace);
    Ok(())
}
