use std::path::Path;

use chaoslab_core::bounds::{dejong_bound, kolmogorov_bound, wasserstein_bound, BoundReport};
use chaoslab_core::chaos::evaluate_integral;
use chaoslab_core::construct::{
    biased_counterexample, product_chaos_sequence, symmetric_counterexample, Branch,
};
use chaoslab_core::distance::{empirical_distances, exact_distances};
use chaoslab_core::io::{kernel_to_json, parse_kernel, parse_model};
use chaoslab_core::moments::{fourth_moment, Engine};
use chaoslab_core::numeric::factorial;
use chaoslab_core::{ChaosVector, Kernel, RademacherModel};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::report::Report;
use crate::verify::{self, VerifyConfig};
use crate::{BranchArg, DistanceArg, EngineArg, Finished, Global, Input, KindArg};

const AGREEMENT_TOL: f64 = 1e-9;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn input_error(path: &Path) -> impl Fn(chaoslab_core::ChaosError) -> CliError + '_ {
    move |source| CliError::Input {
        path: path.display().to_string(),
        source,
    }
}

fn apply_caps(model: RademacherModel, g: &Global) -> RademacherModel {
    match g.cap_enum {
        Some(cap) => {
            let mut caps = model.caps();
            caps.enumeration = cap;
            model.with_caps(caps)
        }
        None => model,
    }
}

fn describe_model(model: &RademacherModel) -> Value {
    if model.is_symmetric() {
        json!(format!("symmetric n={}", model.horizon()))
    } else if model.is_homogeneous() && model.horizon() > 0 {
        json!(format!(
            "homogeneous p={} n={}",
            model.p(0),
            model.horizon()
        ))
    } else {
        json!(model.probs())
    }
}

/// Loads the kernel and its model, rescaling when `--normalize` is set.
fn load(input: &Input, g: &Global) -> Result<(Kernel, RademacherModel), CliError> {
    let (f, embedded) = parse_kernel(&read(&input.kernel)?).map_err(input_error(&input.kernel))?;
    let model = match &input.model {
        Some(p) => parse_model(&read(p)?).map_err(input_error(p))?,
        None => embedded.unwrap_or_else(|| RademacherModel::symmetric(f.horizon())),
    };
    if model.horizon() != f.horizon() {
        return Err(CliError::Usage(format!(
            "kernel has horizon {} but the model has {}",
            f.horizon(),
            model.horizon()
        )));
    }
    let f = if input.normalize { f.normalized()? } else { f };
    Ok((f, apply_caps(model, g)))
}

fn require_unit_variance(f: &Kernel) -> Result<(), CliError> {
    let var = f.second_moment();
    if (var - 1.0).abs() > 1e-9 {
        return Err(CliError::Usage(format!(
            "kernel has E[F^2] = {var}, not 1; rerun with --normalize"
        )));
    }
    Ok(())
}

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Enumerate => "enumerate",
        Engine::Factorized => "factorized",
        Engine::SymmetricFast => "symmetric-fast",
    }
}

fn feasible(f: &Kernel, model: &RademacherModel) -> Vec<Engine> {
    let mut out = Vec::new();
    if model.check_enumerable().is_ok() {
        out.push(Engine::Enumerate);
    }
    if f.support_len() <= model.caps().factorized_support {
        out.push(Engine::Factorized);
    }
    if model.is_symmetric() {
        out.push(Engine::SymmetricFast);
    }
    out
}

/// Fourth moment by the requested engine(s); the first value is the one
/// reported, the second the largest relative disagreement when several
/// engines ran.
fn fourth_with(
    f: &Kernel,
    model: &RademacherModel,
    choice: EngineArg,
    report: &mut Report,
) -> Result<(f64, Option<f64>), CliError> {
    let engines = match choice {
        EngineArg::Enumerate => vec![Engine::Enumerate],
        EngineArg::Factorized => vec![Engine::Factorized],
        EngineArg::SymmetricFast => vec![Engine::SymmetricFast],
        EngineArg::Auto => {
            let all = feasible(f, model);
            match all.first() {
                Some(&e) => vec![e],
                None => vec![Engine::Factorized],
            }
        }
        EngineArg::Both => {
            let all = feasible(f, model);
            if all.len() < 2 {
                return Err(CliError::Usage(
                    "--engine both needs at least two feasible engines".into(),
                ));
            }
            all
        }
    };
    let mut values = Vec::new();
    for e in &engines {
        let v = fourth_moment(f, model, *e)?;
        report.push(format!("fourth_moment[{}]", engine_name(*e)), v);
        values.push(v);
    }
    let gap = (values.len() > 1).then(|| {
        values
            .iter()
            .map(|v| (v - values[0]).abs() / values[0].abs())
            .fold(0.0, f64::max)
    });
    if let Some(gap) = gap {
        report.push("engine_agreement_residual", gap);
    }
    Ok((values[0], gap))
}

fn finish(report: &Report, g: &Global, ok: bool) -> Finished {
    Finished {
        text: report.render(g.json),
        ok,
    }
}

pub fn verify(g: &Global, config: Option<&Path>) -> Result<Finished, CliError> {
    let mut cfg = match config {
        Some(p) => VerifyConfig::parse(&read(p)?).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", p.display())),
            other => other,
        })?,
        None => VerifyConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(cap) = g.cap_enum {
        cfg.caps.enumeration = cap;
    }
    let rep = verify::run(&cfg)?;
    let text = if g.json {
        serde_json::to_string_pretty(&rep).expect("report serializes") + "\n"
    } else {
        rep.to_text()
    };
    for c in rep.failed() {
        eprintln!("failed check: {}", c.check);
    }
    Ok(Finished {
        text,
        ok: rep.passed,
    })
}

fn push_bound(report: &mut Report, prefix: &str, b: &BoundReport) {
    for (k, v) in &b.constants {
        report.push(format!("{prefix}.constant.{k}"), *v);
    }
    report.push(format!("{prefix}.moment_term"), b.terms["moment_term"]);
    report.push(
        format!("{prefix}.influence_term"),
        b.terms["influence_term"],
    );
    report.push(format!("{prefix}.bound"), b.value);
}

pub fn bound(
    g: &Global,
    input: &Input,
    which: DistanceArg,
    engine: EngineArg,
) -> Result<Finished, CliError> {
    let (f, model) = load(input, g)?;
    require_unit_variance(&f)?;
    let m = f.order();
    let mut r = Report::new();
    r.push("order", m)
        .push("horizon", f.horizon())
        .push("model", describe_model(&model));
    let (fourth, gap) = fourth_with(&f, &model, engine, &mut r)?;
    let inf = f.sup_influence();
    r.push("fourth_moment_excess", fourth - 3.0)
        .push("sup_influence", inf);

    let exact = match model.check_enumerable() {
        Ok(()) => Some(exact_distances(
            &ChaosVector::integral(&f).to_table(&model)?,
            &model,
        )?),
        Err(_) => None,
    };
    let mut ok = gap.is_none_or(|x| x <= AGREEMENT_TOL);
    let want_w = which != DistanceArg::Kolmogorov;
    let want_k = which != DistanceArg::Wasserstein;
    for (wanted, prefix, b, d) in [
        (
            want_w,
            "wasserstein",
            wasserstein_bound(fourth, inf, m)?,
            exact.map(|d| d.wasserstein),
        ),
        (
            want_k,
            "kolmogorov",
            kolmogorov_bound(fourth, inf, m)?,
            exact.map(|d| d.kolmogorov),
        ),
    ] {
        if !wanted {
            continue;
        }
        push_bound(&mut r, prefix, &b);
        r.push(format!("{prefix}.exact"), d);
        let slack = d.map(|d| b.value - d);
        r.push(format!("{prefix}.slack"), slack);
        ok &= slack.is_none_or(|s| s >= 0.0);
    }
    Ok(finish(&r, g, ok))
}

pub fn counterexample(
    g: &Global,
    kind: KindArg,
    m: usize,
    n: usize,
    branch: BranchArg,
    tol: f64,
    out: Option<&Path>,
) -> Result<Finished, CliError> {
    let mut r = Report::new();
    let (f, model, provenance) = match kind {
        KindArg::Inhomogeneous => {
            let b = match branch {
                BranchArg::Upper => Branch::Upper,
                BranchArg::Lower => Branch::Lower,
            };
            let (f, model) = biased_counterexample(m, b)?;
            r.push("kind", "inhomogeneous")
                .push("m", m)
                .push("p", model.p(0));
            let prov = json!({"kind": "inhomogeneous", "m": m, "p": model.p(0)});
            (f, model, prov)
        }
        KindArg::Symmetric => {
            let c = symmetric_counterexample(m, n, tol)?;
            r.push("kind", "symmetric")
                .push("m", m)
                .push("n", n)
                .push("g_uniform", c.g_uniform)
                .push("g_star", c.g_star)
                .push("theta", c.theta)
                .push("bisection_steps", c.trace.len())
                .push("fourth_moment_residual", c.residual.abs());
            let prov = json!({
                "kind": "symmetric",
                "m": m,
                "n": n,
                "g_uniform": c.g_uniform,
                "g_star": c.g_star,
                "theta": c.theta,
                "residual": c.residual.abs(),
                "trace": c.trace,
            });
            let model = c.model();
            (c.kernel, model, prov)
        }
        KindArg::Product => {
            let f = product_chaos_sequence(m, n)?;
            r.push("kind", "product").push("m", m).push("n", n);
            let prov = json!({"kind": "product", "m": m, "n": n});
            (f, RademacherModel::symmetric(n), prov)
        }
    };
    let model = apply_caps(model, g);
    r.push("horizon", f.horizon())
        .push("variance", f.second_moment())
        .push("sup_influence", f.sup_influence());
    fourth_with(&f, &model, EngineArg::Auto, &mut r)?;
    if model.check_enumerable().is_ok() {
        let d = exact_distances(&ChaosVector::integral(&f).to_table(&model)?, &model)?;
        r.push("kolmogorov", d.kolmogorov)
            .push("wasserstein", d.wasserstein);
    }
    let file = kernel_to_json(&f, Some(&model), Some(provenance)) + "\n";
    match out {
        Some(path) => {
            std::fs::write(path, file).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            r.push("kernel_file", path.display().to_string());
            Ok(finish(&r, g, true))
        }
        None => {
            eprint!("{}", r.render(g.json));
            Ok(Finished {
                text: file,
                ok: true,
            })
        }
    }
}

pub fn moments(g: &Global, input: &Input, engine: EngineArg) -> Result<Finished, CliError> {
    let (f, model) = load(input, g)?;
    let mut r = Report::new();
    r.push("order", f.order())
        .push("horizon", f.horizon())
        .push("model", describe_model(&model))
        .push("second_moment", f.second_moment());
    let (fourth, gap) = fourth_with(&f, &model, engine, &mut r)?;
    let var = f.second_moment();
    r.push("fourth_moment_excess", fourth - 3.0 * var * var)
        .push("sup_influence", f.sup_influence())
        .push("influences", f.influences());
    Ok(finish(&r, g, gap.is_none_or(|x| x <= AGREEMENT_TOL)))
}

pub fn distance(
    g: &Global,
    input: &Input,
    samples: usize,
    confidence: f64,
) -> Result<Finished, CliError> {
    let (f, model) = load(input, g)?;
    let mut r = Report::new();
    r.push("order", f.order())
        .push("horizon", f.horizon())
        .push("model", describe_model(&model));
    if model.check_enumerable().is_ok() {
        let d = exact_distances(&ChaosVector::integral(&f).to_table(&model)?, &model)?;
        r.push("method", "exact")
            .push("atoms", d.atoms)
            .push("kolmogorov", d.kolmogorov)
            .push("kolmogorov_at", d.kolmogorov_at)
            .push("wasserstein", d.wasserstein);
    } else {
        let seed = g.seed.unwrap_or(0);
        let values = model
            .sample_indices(seed, samples)
            .into_par_iter()
            .map(|w| evaluate_integral(&f, w, &model))
            .collect::<chaoslab_core::Result<Vec<f64>>>()?;
        let e = empirical_distances(&values, confidence)?;
        r.push("method", "empirical")
            .push("seed", seed)
            .push("samples", e.samples)
            .push("kolmogorov", e.kolmogorov)
            .push("wasserstein", e.wasserstein)
            .push("dkw_half_width", e.dkw_half_width)
            .push("confidence", e.confidence);
    }
    Ok(finish(&r, g, true))
}

pub fn dejong(g: &Global, input: &Input, kappa: f64) -> Result<Finished, CliError> {
    let (f, model) = load(input, g)?;
    require_unit_variance(&f)?;
    let t = ChaosVector::integral(&f).to_table(&model)?;
    let rep = dejong_bound(&t, &model, kappa)?;
    let scaled = factorial(rep.order).powi(2) * f.sup_influence();
    let d = exact_distances(&t, &model)?;
    let mut r = Report::new();
    r.push("order", rep.order)
        .push("horizon", f.horizon())
        .push("model", describe_model(&model))
        .push("rho_squared", rep.rho_squared)
        .push("scaled_sup_influence", scaled)
        .push("ratio", rep.rho_squared / scaled)
        .push("fourth_moment", rep.fourth_moment)
        .push("kappa_m", rep.kappa)
        .push("moment_term", rep.moment_term)
        .push("rho_term", rep.rho_term)
        .push("bound", rep.value)
        .push("wasserstein", d.wasserstein)
        .push("slack", rep.value - d.wasserstein);
    Ok(finish(&r, g, rep.value >= d.wasserstein))
}
