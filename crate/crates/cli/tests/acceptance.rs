//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use serde_json::Value;
use solitonq_core::classical::{self, fit_soliton_width, propagate};
use solitonq_core::eigencheck::{analytic_spread, residual};
use solitonq_core::epr::{epr_metrics_analytic, epr_metrics_sampled, epr_witness};
use solitonq_core::model::shot_noise_dp;
use solitonq_core::protocol::{self, apply_dispersion_management, compensation_length, enhancement_model};
use solitonq_core::sampler::{estimate_q, sample_positions};
use solitonq_core::{
    AdiabaticSchedule, Complex64, Field2, GridSpec, McmcConfig, PulseCenterState, SolitonParams, StepPlan,
};

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, &'static str, Box<dyn Fn() -> Check + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn at_rest(params: &SolitonParams, q: f64) -> PulseCenterState {
    let dp = shot_noise_dp(params, q).unwrap();
    PulseCenterState::at_rest(dp, params.total()).unwrap()
}

fn ac1() -> Check {
    let start = Instant::now();
    let params = SolitonParams::manakov(1, 1);
    let mcmc = McmcConfig::default();
    let est = sample_positions(&params, &at_rest(&params, 2.0), &mcmc).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let (r, q) = (est.mean_abs_distance, est.q);
    ensure(est.samples >= 1_000_000, || format!("only {} samples", est.samples))?;
    ensure(r.z_score(1.0, 0.0) <= 3.0, || format!("<|r|> = {} +- {}", r.value, r.se))?;
    ensure(q.z_score(2.0, 0.0) <= 3.0, || format!("q = {} +- {}", q.value, q.se))?;
    ensure(r.se <= 0.01 && q.se <= 0.02, || format!("se too large: {} / {}", r.se, q.se))?;
    ensure(secs < 60.0, || format!("runtime {secs:.1} s"))?;
    Ok(format!(
        "<|r|> = {:.4} +- {:.4}, q = {:.4} +- {:.4}, {} samples, {secs:.1} s",
        r.value, r.se, q.value, q.se, est.samples
    ))
}

fn ac2() -> Check {
    let mut out = Vec::new();
    for big_n in [2, 4, 6] {
        let params = SolitonParams::manakov(big_n / 2, big_n / 2);
        let state = at_rest(&params, 2.0);
        let est = sample_positions(&params, &state, &McmcConfig::default()).map_err(|e| e.to_string())?;
        let (same, cross) = protocol::covariances(&params, &state, est.q.value);
        let n = big_n as f64;
        // Both predictions are linear in q; carry the q uncertainty along.
        let slope = 2.0 * params.b * params.b / (n.powi(3) * params.c * params.c);
        let z_same = est.cov_same.z_score(same, (n - 1.0) * slope * est.q.se);
        let z_cross = est.cov_cross.z_score(cross, slope * est.q.se);
        ensure(z_same <= 3.0 && z_cross <= 3.0, || {
            format!("N = {big_n}: z = {z_same:.2} (same), {z_cross:.2} (cross)")
        })?;
        let closure = n * est.cov_same.value + n * (n - 1.0) * est.cov_cross.value;
        let pair = 2.0 * (est.cov_same.value - est.cov_cross.value);
        let tol = 1e-10 * est.var_sum.value.abs().max(1.0);
        ensure((closure - est.var_sum.value).abs() <= tol, || {
            format!("N = {big_n}: sum identity off by {:e}", closure - est.var_sum.value)
        })?;
        ensure((pair - est.mean_sq_distance.value).abs() <= 1e-10 * pair.abs().max(1.0), || {
            format!("N = {big_n}: pair identity off by {:e}", pair - est.mean_sq_distance.value)
        })?;
        out.push(format!("N={big_n}: z {z_same:.2}/{z_cross:.2}"));
    }
    Ok(out.join(", "))
}

fn ac3() -> Check {
    let mut out = Vec::new();
    for big_n in [2, 4] {
        let params = SolitonParams::manakov(big_n / 2, big_n / 2);
        let fp = estimate_q(&params, &McmcConfig::default(), 0.01).map_err(|e| e.to_string())?;
        let c = fp.estimates.cov_cross;
        let z = c.z_score(0.0, 0.0);
        ensure(z <= 3.0, || format!("N = {big_n}: <z_i z_j> = {} +- {}", c.value, c.se))?;
        out.push(format!("N={big_n}: q {:.3}, <zizj> {:.2e} +- {:.1e}", fp.q.value, c.value, c.se));
    }
    Ok(out.join(", "))
}

fn ac4() -> Check {
    let start = Instant::now();
    let with = |b: f64| SolitonParams::new(-1.0, 1.0, b, 2, 1);
    for b in [0.0, 1.0] {
        let s = analytic_spread(&with(b), 0.0).map_err(|e| e.to_string())?;
        ensure(s == 0.0, || format!("analytic spread {s:e} for B = {b}"))?;
    }
    for b in [2.0 / 3.0, 2.0] {
        let s = analytic_spread(&with(b), 0.0).map_err(|e| e.to_string())?;
        ensure(s > 0.0, || format!("analytic spread zero for B = {b}"))?;
    }
    let res = |b: f64, pts: usize| -> Result<f64, String> {
        let grid = GridSpec::new(pts, 8.0).map_err(|e| e.to_string())?;
        residual(&with(b), &grid, 0.0).map(|r| r.bulk_residual).map_err(|e| e.to_string())
    };
    let sizes = [48, 64, 96];
    let mut exact = Vec::new();
    let mut broken = Vec::new();
    for pts in sizes {
        exact.push(res(1.0, pts)?);
        broken.push(res(2.0 / 3.0, pts)?);
    }
    let ratio = broken[2] / exact[2];
    ensure(ratio >= 10.0, || format!("residual ratio {ratio:.2} at 96 points"))?;
    ensure(exact.windows(2).all(|w| w[1] < w[0]), || format!("B = 1 not decreasing: {exact:?}"))?;
    // Plateau: refinement changes the B = 2/3 residual by far less than it
    // shrinks the B = 1 one.
    let gain_exact = exact[0] / exact[2];
    let gain_broken = broken[0] / broken[2];
    ensure(gain_broken < 1.25 && gain_exact > 1.5 * gain_broken, || {
        format!("B = 2/3 does not plateau: {broken:?} vs {exact:?}")
    })?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("runtime {secs:.0} s"))?;
    Ok(format!(
        "B=1 {:.2e} -> {:.2e}, B=2/3 {:.3} -> {:.3}, ratio {ratio:.0} at 96, {secs:.1} s",
        exact[0], exact[2], broken[0], broken[2]
    ))
}

fn ac5(dir: &Path) -> Check {
    let mut worst: f64 = 0.0;
    for (dp, b, t, b_prime) in [(0.35, -1.0, 10.0, 1.0), (0.1, -2.0, 3.5, 0.7), (1.3, 0.5, 40.0, -3.0)] {
        let st = PulseCenterState::new(dp, b * t, 2).unwrap();
        let t_prime = -b * t / b_prime;
        let m = apply_dispersion_management(&st, b_prime, t_prime).map_err(|e| e.to_string())?;
        let target = 1.0 / (4.0 * dp * dp);
        worst = worst.max((m.state.dz2() - target).abs() / target);
        let tc = compensation_length(&st, b_prime).map_err(|e| e.to_string())?;
        ensure((tc - t_prime).abs() <= 1e-12 * t_prime, || format!("compensation length {tc} vs {t_prime}"))?;
    }
    ensure(worst <= 1e-12, || format!("relative dz^2 error {worst:e}"))?;
    let r = run_cli("protocol", "[protocol]\ngamma = 3.0\nduration = 40.0\nscan_points = 201\n", dir, "ac5", &[])?;
    let t = number(&r, "t_prime")?;
    let t_min = number(&r, "scan_min_t_prime")?;
    ensure((t_min - t).abs() <= 1e-9 * t, || format!("scan minimum at {t_min}, compensation at {t}"))?;
    Ok(format!("max rel dz^2 error {worst:.1e}; scan minimum at t' = {t_min} (predicted {t})"))
}

fn ac6(dir: &Path) -> Check {
    let mut out = Vec::new();
    for g in [2.0, 4.0, 8.0] {
        let cfg = format!("[params]\nn = 50\nm = 50\n[protocol]\ngamma = {g:?}\nduration = 100.0\nq = 2.0\n");
        let r = run_cli("protocol", &cfg, dir, &format!("ac6-{g}"), &[])?;
        let e = number(&r, "enhancement")?;
        ensure(e == g, || format!("gamma = {g}: enhancement {e}"))?;
        for key in ["enhancement", "enhancement_cap"] {
            let prov = &r["values"][key]["provenance"];
            ensure(prov == "model", || format!("{key} provenance {prov}"))?;
        }
        out.push(format!("{g}->{e}"));
    }
    // sqrt(2/q) sqrt(N) with q = 2, N = 100.
    let cap = 10.0;
    let mut prev = (0.0, f64::INFINITY);
    for k in 0..=300 {
        let g = 1000f64.powf(k as f64 / 300.0);
        let e = enhancement_model(g, 100, 2.0);
        ensure(e >= prev.0 && e / g <= prev.1 + 1e-15 && e <= cap, || format!("not monotone saturating at gamma = {g}"))?;
        prev = (e, e / g);
    }
    ensure(prev.0 == cap, || format!("enhancement at gamma = 1000 is {} not the cap {cap}", prev.0))?;
    Ok(format!("N=100 enhancement {}; saturates at cap {cap} (model)", out.join(", ")))
}

fn ac7() -> Check {
    let sampled_dd = |c: f64| -> Result<(f64, f64), String> {
        let params = SolitonParams::new(-1.0, c, 1.0, 1, 1);
        let est = sample_positions(&params, &at_rest(&params, 2.0), &McmcConfig::default()).map_err(|e| e.to_string())?;
        let m = epr_metrics_sampled(&est, 2).map_err(|e| e.to_string())?;
        let d = est.var_diff_half.unwrap();
        let rel = (d.se / d.value).hypot(est.p_minus_var.se / est.p_minus_var.value);
        Ok((m.product_dd, m.product_dd * rel))
    };
    let two = SolitonParams::manakov(1, 1);
    let analytic = epr_metrics_analytic(&two, &at_rest(&two, 2.0), 2.0, None).map_err(|e| e.to_string())?;
    ensure((analytic.product_dd - 2.0).abs() <= 1e-12, || format!("analytic product_dd {}", analytic.product_dd))?;
    let mut dds = Vec::new();
    for c in [1.0, 0.5, 0.25] {
        let (dd, se) = sampled_dd(c)?;
        ensure((dd / 2.0 - 1.0).abs() <= 0.02, || format!("|b/c| = {}: product_dd {dd} +- {se}", 1.0 / c))?;
        dds.push(dd);
    }
    let (lo, hi) = dds.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    ensure(hi / lo - 1.0 <= 0.05, || format!("product_dd varies over |b/c|: {dds:?}"))?;

    let st = at_rest(&two, 2.0);
    let mut scaled = Vec::new();
    for g in [1.0, 2.0, 4.0, 8.0] {
        let schedule = AdiabaticSchedule::linear(100.0, 1.0, 1.0 / g).unwrap();
        let out = protocol::run_scheme(&two, &st, &schedule, 1.0, 2.0).map_err(|e| e.to_string())?;
        let m = epr_metrics_analytic(&out.after_ramp.params, &out.compensated, 2.0, None).map_err(|e| e.to_string())?;
        let w = epr_witness(&m);
        ensure(w.entangled == (g >= 2.0), || format!("gamma = {g}: witness {}", w.entangled))?;
        scaled.push(m.product_sum_diff * g * g);
    }
    ensure(scaled.iter().all(|v| (v / scaled[0] - 1.0).abs() <= 1e-9), || format!("product * gamma^2 = {scaled:?}"))?;
    Ok(format!(
        "sampled product_dd {:?} over |b/c| = 1,2,4; product_sum_diff = {:.3}/gamma^2, witness fires for gamma >= 2",
        dds.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
        scaled[0]
    ))
}

fn ac8() -> Check {
    let mut notes = Vec::new();
    for b in [1.0, 2.0 / 3.0] {
        let params = SolitonParams::new(-1.0, 1.0, b, 1, 1);
        let f = Field2::vector_soliton(&params, 1.0, 2048, 40.0).map_err(|e| e.to_string())?;
        let t = 5.0 * classical::soliton_period(&params, 1.0);
        let plan = StepPlan::covering(&params, 1.0, f.dz(), t);
        let out = propagate(&f, &params, &plan, None).map_err(|e| e.to_string())?;
        let exact = Field2::soliton_at(&params, 1.0, 2048, 40.0, out.t).map_err(|e| e.to_string())?;
        let linf = out.max_abs_diff(&exact);
        let drift = (out.power() - f.power()).abs() / f.power();
        ensure(linf < 1e-3, || format!("B = {b}: L_inf {linf:e}"))?;
        ensure(drift <= 1e-10, || format!("B = {b}: power drift {drift:e}"))?;
        notes.push(format!("B={b:.3} Linf {linf:.1e} drift {drift:.0e}"));
    }

    let params = SolitonParams::manakov(1, 1);
    // Perturbed soliton, so the splitting error is visible.
    let f = Field2::from_fn(256, 20.0, |z| {
        let s = Complex64::new(0.9 / z.cosh(), 0.0);
        (s, 1.2 * s)
    })
    .map_err(|e| e.to_string())?;
    let run = |steps: usize| propagate(&f, &params, &StepPlan { dt: 2.0 / steps as f64, steps }, None).unwrap();
    let reference = run(8000);
    let ratio = run(500).max_abs_diff(&reference) / run(1000).max_abs_diff(&reference);
    ensure((3.5..4.5).contains(&ratio), || format!("dt-halving ratio {ratio}"))?;
    notes.push(format!("dt-halving ratio {ratio:.2}"));

    for big_n in [2usize, 4, 8] {
        let p = SolitonParams::manakov(big_n / 2, big_n / 2);
        let w = (2.0 * p.b / (big_n as f64 * p.c)).abs();
        let f = Field2::soliton_with_power(&p, big_n as f64, 2048, 40.0 * w).map_err(|e| e.to_string())?;
        let fit = fit_soliton_width(&f).map_err(|e| e.to_string())?;
        ensure((fit / w - 1.0).abs() <= 0.02, || format!("N = {big_n}: fitted width {fit} vs {w}"))?;
    }
    notes.push("fitted widths |2b/(Nc)| for N = 2,4,8".into());
    Ok(notes.join("; "))
}

fn ac9(dir: &Path) -> Check {
    let configs = [
        ("sample", "seed = 11\n[mcmc]\nchains = 4\nsamples_per_chain = 100000\nburn_in = 10000\n[sample]\npair_covariances = true\n"),
        ("eigencheck", "[params]\nn = 2\nm = 1\nB = 0.6666666666666666\n[grid]\npoints_per_axis = 40\n"),
    ];
    for (kind, cfg) in configs {
        let mut outputs = Vec::new();
        for threads in ["1", "2", "8"] {
            let tag = format!("ac9-{kind}-{threads}");
            run_cli(kind, cfg, dir, &tag, &[("RAYON_NUM_THREADS", threads)])?;
            outputs.push(fs::read(dir.join(&tag).join("results.json")).map_err(|e| e.to_string())?);
        }
        ensure(outputs.windows(2).all(|w| w[0] == w[1]), || format!("{kind}: results.json differs across thread counts"))?;
    }
    // Same check in-process through explicit pools.
    let cfg = solitonq::config::ExperimentConfig::parse(configs[0].1)
        .and_then(|c| c.resolve(solitonq::config::Kind::Sample, None))
        .map_err(|e| e.to_string())?;
    let mut docs = Vec::new();
    for threads in [1, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let art = pool.install(|| solitonq::execute(&cfg)).map_err(|e| e.to_string())?;
        docs.push(art.results.to_json());
    }
    ensure(docs.windows(2).all(|w| w[0] == w[1]), || "in-process results differ across pools".into())?;
    Ok("results.json byte-identical for 1, 2, 8 threads (sample, eigencheck)".into())
}

fn run_cli(kind: &str, cfg: &str, dir: &Path, tag: &str, env: &[(&str, &str)]) -> Result<Value, String> {
    let cfg_path = dir.join(format!("{tag}.toml"));
    fs::write(&cfg_path, cfg).map_err(|e| e.to_string())?;
    let out = dir.join(tag);
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_solitonq"));
    cmd.arg(kind).arg("--config").arg(&cfg_path).arg("--out").arg(&out);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let o = cmd.output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("solitonq {kind} failed: {}", String::from_utf8_lossy(&o.stderr)));
    }
    let text = fs::read_to_string(out.join("results.json")).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn number(r: &Value, key: &str) -> Result<f64, String> {
    r["values"][key]["value"].as_f64().ok_or_else(|| format!("results.json lacks {key}"))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path();
    let checks: Vec<Criterion> = vec![
        ("AC1", "N=2 Manakov pair distance and q vs exponential oracle", Box::new(ac1)),
        ("AC2", "covariance closure for N = 2, 4, 6", Box::new(ac2)),
        ("AC3", "shot-noise construction: <z_i z_j> = 0 for N = 2, 4", Box::new(ac3)),
        ("AC4", "eigenstate falsification for B outside {0, 1}", Box::new(ac4)),
        ("AC5", "dispersion management restores dz^2", Box::new(move || ac5(d))),
        ("AC6", "enhancement model for N = 100", Box::new(move || ac6(d))),
        ("AC7", "EPR products under expansion", Box::new(ac7)),
        ("AC8", "classical split-step solver", Box::new(ac8)),
        ("AC9", "thread-count independent results", Box::new(move || ac9(d))),
    ];
    let mut failed = 0;
    for (id, what, check) in &checks {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>().map(String::as_str).or(p.downcast_ref::<&str>().copied()))));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {id} {what}: {detail} ({secs:.1} s)"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {what}: {detail} ({secs:.1} s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
