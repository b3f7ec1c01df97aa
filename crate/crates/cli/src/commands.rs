//! The six commands. Each builds its artifacts in memory; nothing here
//! touches the file system or the clock.

use rayon::prelude::*;
use schroflow::angular::Direction;
use schroflow::flow::{
    decay_fit, evolve_mode_closed_form, free_gaussian, heat_residual, kernel_eval, propagate_representation,
    weighted_sup_closed_form, KernelPath, KernelSpec, SelfSimilarHeat, SeparatedState,
};
use schroflow::oscillator::{make_mode, NormalizedMode, SpectralTable};
use schroflow::quad::{RadialGrid, RadialQuadrature};
use schroflow::radialfd::{
    compare_routes, heat_fd_vs_self_similar, step_count, RadialSchema, Route, RouteTables, SchrodingerStepper,
};
use schroflow::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    experiment, CompareExp, Datum, DecayExp, EvolveExp, HeatExp, KernelExp, PathSel, RouteSel, RunConfig, SpectrumExp,
};
use crate::output::{json_doc, num, Artifacts, Csv, Provenance};
use crate::{CliError, Command};

pub fn dispatch(cmd: Command, cfg: &RunConfig) -> Result<Artifacts, CliError> {
    match cmd {
        Command::Spectrum => spectrum(cfg),
        Command::Evolve => evolve(cfg),
        Command::Decay => decay(cfg),
        Command::Kernel => kernel(cfg),
        Command::Heat => heat(cfg),
        Command::Compare => compare(cfg),
    }
}

fn provenance<E: Serialize>(cmd: Command, cfg: &RunConfig, exp: &E) -> Provenance {
    let resolved = json!({
        "problem": cfg.problem,
        "experiment": exp,
        "output": cfg.output,
    });
    Provenance::new(cmd.name(), resolved)
}

fn hardy(table: &SpectralTable) -> Result<(), CliError> {
    table.require_hardy().map_err(|e| CliError::Hardy(e.to_string()))
}

fn spectrum(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let exp: SpectrumExp = experiment(&cfg.experiment)?;
    let prov = provenance(Command::Spectrum, cfg, &exp);
    let table = cfg.problem.table()?;
    let mut csv = Csv::new(&prov, &["k", "mu", "alpha", "beta"]);
    for r in table.rows() {
        csv.row(&[r.k.to_string(), num(r.mu), num(r.alpha), num(r.beta)]);
    }
    let class = table.decay_class().as_str();
    let first = table.rows()[0];
    let summary = json!({
        "classification": class,
        "hardy_ok": table.hardy_ok(),
        "mu_1": first.mu,
        "alpha_1": first.alpha,
        "beta_1": first.beta,
        "k_max": table.k_max(),
    });
    Ok(Artifacts {
        files: vec![
            ("spectrum.csv".into(), csv.finish()),
            ("spectrum.json".into(), json_doc(&prov, summary.clone())),
        ],
        summary,
        messages: vec![format!("classification: {class}")],
        status: hardy(&table),
    })
}

fn l2_rel(a: &[Complex64], b: &[Complex64], radii: &[f64], dim: usize) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((x, y), r) in a.iter().zip(b).zip(radii) {
        let w = r.powi(dim as i32 - 1);
        num += w * (x - y).norm_sqr();
        den += w * y.norm_sqr();
    }
    (num / den).sqrt()
}

/// Linear interpolation in `w = r^{(N-1)/2} u` between FD cell centres.
fn sample_fd(schema: &RadialSchema, w: &[Complex64], r: f64) -> Complex64 {
    let x = r / schema.h - 0.5;
    let i = (x.floor().max(0.0) as usize).min(schema.m - 2);
    let f = (x - i as f64).clamp(0.0, 1.0);
    let wi = w[i] * (1.0 - f) + w[i + 1] * f;
    wi / r.powf(0.5 * (schema.dim as f64 - 1.0))
}

fn evolve(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let exp: EvolveExp = experiment(&cfg.experiment)?;
    let prov = provenance(Command::Evolve, cfg, &exp);
    let table = cfg.problem.table()?;
    hardy(&table)?;
    let dim = table.dim();
    let j = exp.mode.j;
    let row = *table.row(j)?;
    let radii = exp.radii.values()?;
    let times = exp.times.values();
    if times.is_empty() || times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(CliError::Config(
            "evolve needs a non-empty list of finite times >= 0".into(),
        ));
    }
    let mode: Option<NormalizedMode> = match exp.datum {
        Datum::Mode => Some(make_mode(exp.mode.into(), &table, &RadialQuadrature::default())?),
        Datum::Gaussian => None,
    };
    let datum = |r: f64| match &mode {
        Some(m) => m.radial(r),
        None => (-r * r / 4.0).exp(),
    };
    // closed-form reference: the mode itself, or the free Gaussian when μ_j = 0
    let reference = |r: f64, t: f64| -> Result<Option<Complex64>, CliError> {
        match &mode {
            Some(m) => Ok(Some(evolve_mode_closed_form(m, r, t)?)),
            None if row.mu == 0.0 => Ok(Some(free_gaussian(dim, r, t))),
            None => Ok(None),
        }
    };
    if exp.route == RouteSel::Closed && exp.datum == Datum::Gaussian && row.mu != 0.0 {
        return Err(CliError::Config(
            "the closed route evolves oscillator modes (or the Gaussian when mu_j = 0)".into(),
        ));
    }

    let profiles: Vec<Vec<Complex64>> = match exp.route {
        RouteSel::Closed => times
            .par_iter()
            .map(|&t| {
                radii
                    .iter()
                    .map(|&r| Ok(reference(r, t)?.expect("checked above")))
                    .collect()
            })
            .collect::<Result<_, CliError>>()?,
        RouteSel::Kernel => {
            if times.contains(&0.0) {
                return Err(CliError::Config("the kernel route needs t > 0".into()));
            }
            let spec = KernelSpec::new(&table, 1, table.k_max(), KernelPath::ModeSum)?;
            let grid = exp.kernel_quad.grid()?;
            let state = SeparatedState::from_fn(dim, grid, j, |r| Complex64::new(datum(r), 0.0));
            let out_grid = RadialGrid::new(radii.clone(), vec![1.0; radii.len()])?;
            times
                .par_iter()
                .map(|&t| {
                    let u = propagate_representation(&state, t, &spec, &out_grid)?;
                    Ok(u.profile(j).map(<[_]>::to_vec).unwrap_or_default())
                })
                .collect::<Result<_, CliError>>()?
        }
        RouteSel::Fd => {
            if times.windows(2).any(|p| p[1] < p[0]) {
                return Err(CliError::Config("the fd route needs ascending times".into()));
            }
            if radii.last().copied().unwrap_or(0.0) >= exp.fd.r_max {
                return Err(CliError::Config("output radii must stay inside the FD domain".into()));
            }
            let schema = RadialSchema::new(dim, row.mu, exp.fd.r_max, exp.fd.cells, exp.fd.dt)?;
            let f0: Vec<Complex64> = (0..schema.m)
                .map(|i| Complex64::new(datum(schema.radius(i)), 0.0))
                .collect();
            let mut w = schema.substitute(&f0);
            let stepper = SchrodingerStepper::new(schema)?;
            let mut now = 0.0;
            let mut out = Vec::new();
            for &t in &times {
                stepper.advance(&mut w, step_count(t - now, schema.dt)?)?;
                now = t;
                out.push(radii.iter().map(|&r| sample_fd(&schema, &w, r)).collect());
            }
            out
        }
    };

    let mut csv = Csv::new(&prov, &["t", "r", "j", "re_u", "im_u"]);
    let mut diffs = Vec::new();
    for (t, prof) in times.iter().zip(&profiles) {
        for (r, u) in radii.iter().zip(prof) {
            csv.row(&[num(*t), num(*r), j.to_string(), num(u.re), num(u.im)]);
        }
        let refs: Option<Vec<Complex64>> = radii
            .iter()
            .map(|&r| reference(r, *t))
            .collect::<Result<Option<Vec<_>>, _>>()?;
        diffs.push(refs.map(|rv| l2_rel(prof, &rv, &radii, dim)));
    }
    let max_diff = diffs
        .iter()
        .copied()
        .collect::<Option<Vec<f64>>>()
        .map(|v| v.into_iter().fold(0.0, f64::max));
    let summary = json!({
        "route": exp.route,
        "datum": exp.datum,
        "times": times,
        "reference_rel_l2": diffs,
        "max_reference_rel_l2": max_diff,
    });
    Ok(Artifacts {
        files: vec![
            ("profiles.csv".into(), csv.finish()),
            ("evolve.json".into(), json_doc(&prov, summary.clone())),
        ],
        summary,
        messages: vec![],
        status: Ok(()),
    })
}

fn decay(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let exp: DecayExp = experiment(&cfg.experiment)?;
    let prov = provenance(Command::Decay, cfg, &exp);
    let times = exp.times.values();
    let (samples, weight, theory) = match &exp.synthetic {
        Some(s) => {
            let samples: Vec<(f64, f64)> = times.iter().map(|&t| (t, s.scale * t.powf(s.exponent))).collect();
            (samples, exp.weight.unwrap_or(0.0), s.exponent)
        }
        None => {
            let table = cfg.problem.table()?;
            hardy(&table)?;
            let mode = make_mode(exp.mode.into(), &table, &RadialQuadrature::default())?;
            let w = exp.weight.unwrap_or(mode.alpha);
            let samples = times
                .par_iter()
                .map(|&t| {
                    Ok((
                        t,
                        weighted_sup_closed_form(&mode, &table, t, w, exp.window, exp.samples)?,
                    ))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            (samples, w, -0.5 * table.dim() as f64 + mode.alpha)
        }
    };
    let report = decay_fit(&samples, weight)?;
    let mut csv = Csv::new(&prov, &["t", "norm"]);
    for (t, n) in &samples {
        csv.row(&[num(*t), num(*n)]);
    }
    let summary = json!({
        "fitted_slope": report.fitted_slope,
        "fitted_intercept": report.fitted_intercept,
        "r_squared": report.r_squared,
        "weight_exponent": report.weight_exponent,
        "theory": {"fitted_slope": theory},
    });
    let mut doc = serde_json::to_value(&report).expect("report serializes");
    doc["theory"] = summary["theory"].clone();
    Ok(Artifacts {
        files: vec![
            ("decay.json".into(), json_doc(&prov, doc)),
            ("samples.csv".into(), csv.finish()),
        ],
        summary,
        messages: vec![format!("fitted slope {:.6} (theory {theory:.6})", report.fitted_slope)],
        status: Ok(()),
    })
}

fn directions(dim: usize, angle: f64) -> Result<(Direction, Direction), CliError> {
    match dim {
        2 => Ok((Direction::Circle(0.0), Direction::Circle(angle))),
        3 => Ok((
            Direction::Sphere { theta: 0.0, phi: 0.0 },
            Direction::Sphere { theta: angle, phi: 0.0 },
        )),
        _ => Err(CliError::Config("kernel sweeps need dim 2 or 3".into())),
    }
}

fn kernel(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let exp: KernelExp = experiment(&cfg.experiment)?;
    let prov = provenance(Command::Kernel, cfg, &exp);
    let rhos = exp.rho.values()?;
    if exp.angles.is_empty() {
        return Err(CliError::Config("kernel sweep has no angles".into()));
    }
    let table = match exp.l_max {
        Some(l) => cfg.problem.table_through_degree(l)?,
        None => cfg.problem.table()?,
    };
    hardy(&table)?;
    let path = match exp.path {
        PathSel::ModeSum => KernelPath::ModeSum,
        PathSel::LegendreCollapsed => KernelPath::LegendreCollapsed,
    };
    let spec = KernelSpec::new(&table, exp.k_start, table.k_max(), path)?;
    let dim = table.dim();
    let norm = (2.0 * std::f64::consts::PI).powf(0.5 * dim as f64);
    let pairs: Vec<(f64, f64)> = rhos
        .iter()
        .flat_map(|&r| exp.angles.iter().map(move |&a| (r, a)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|&(rho, angle)| {
            let (x, y) = directions(dim, angle)?;
            let k = kernel_eval(&spec, x, y, rho)?;
            Ok((
                rho,
                angle,
                k.value,
                spec.weighted_modulus(k.value, rho),
                k.tail,
                k.warning.is_some(),
            ))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut csv = Csv::new(
        &prov,
        &[
            "rho",
            "angle",
            "re_k",
            "im_k",
            "weighted_modulus",
            "scaled_modulus",
            "tail",
            "truncation_warning",
        ],
    );
    let mut wmax = 0.0f64;
    let (mut smin, mut smax) = (f64::INFINITY, 0.0f64);
    let mut warnings = 0usize;
    for &(rho, angle, v, wm, tail, warn) in &rows {
        let scaled = v.norm() * norm;
        wmax = wmax.max(wm);
        smin = smin.min(scaled);
        smax = smax.max(scaled);
        warnings += warn as usize;
        csv.row(&[
            num(rho),
            num(angle),
            num(v.re),
            num(v.im),
            num(wm),
            num(scaled),
            num(tail),
            (warn as u8).to_string(),
        ]);
    }
    let summary = json!({
        "k_start": exp.k_start,
        "k_trunc": table.k_max(),
        "samples": rows.len(),
        "max_weighted_modulus": wmax,
        "min_scaled_modulus": smin,
        "max_scaled_modulus": smax,
        "truncation_warnings": warnings,
    });
    Ok(Artifacts {
        files: vec![
            ("kernel.csv".into(), csv.finish()),
            ("kernel.json".into(), json_doc(&prov, summary.clone())),
        ],
        summary,
        messages: vec![],
        status: Ok(()),
    })
}

fn heat(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let exp: HeatExp = experiment(&cfg.experiment)?;
    let prov = provenance(Command::Heat, cfg, &exp);
    let table = cfg.problem.table()?;
    hardy(&table)?;
    let sol = SelfSimilarHeat::from_table(&table, exp.k)?;
    let dim = table.dim() as f64;
    let res = heat_residual(&sol, exp.r_window, exp.t_window, exp.dr, exp.dt)?;

    let fit_samples = exp
        .fit_times
        .values()
        .into_iter()
        .map(|t| Ok((t, sol.weighted(exp.xi * t.sqrt(), t)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let fit = decay_fit(&fit_samples, sol.alpha)?;

    let radii = exp.radii.values()?;
    let mut csv = Csv::new(&prov, &["t", "r", "v", "weighted_v"]);
    let mut free_diff = 0.0f64;
    for t in exp.times.values() {
        for &r in &radii {
            let v = sol.value(r, t)?;
            let free = t.powf(-0.5 * dim) * (-r * r / (4.0 * t)).exp();
            free_diff = free_diff.max((v - free).abs() / free.max(f64::MIN_POSITIVE));
            csv.row(&[num(t), num(r), num(v), num(sol.weighted(r, t)?)]);
        }
    }
    let fd_err = match &exp.fd {
        Some(fd) => {
            let schema = RadialSchema::new(table.dim(), sol.mu, fd.r_max, fd.cells, fd.dt)?;
            let window = schroflow::flow::Window::new(0.0, fd.r_max)?;
            Some(heat_fd_vs_self_similar(
                &schema, sol.alpha, fd.t0, fd.t1, fd.scheme, window,
            )?)
        }
        None => None,
    };
    let summary = json!({
        "k": exp.k,
        "alpha": sol.alpha,
        "max_residual": res.max_residual,
        "max_value": res.max_value,
        "relative_residual": res.relative,
        "time_exponent": fit.fitted_slope,
        "free_profile_rel_diff": if sol.mu == 0.0 { Some(free_diff) } else { None },
        "fd_rel_l2": fd_err,
        "theory": {"time_exponent": sol.time_exponent()},
    });
    Ok(Artifacts {
        files: vec![
            ("heat.csv".into(), csv.finish()),
            ("residual.json".into(), json_doc(&prov, summary.clone())),
        ],
        summary,
        messages: vec![],
        status: Ok(()),
    })
}

fn compare(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let exp: CompareExp = experiment(&cfg.experiment)?;
    let prov = provenance(Command::Compare, cfg, &exp);
    let table = cfg.problem.table()?;
    hardy(&table)?;
    let rep = compare_routes(
        exp.mode.into(),
        RouteTables {
            closed: &table,
            kernel: &table,
            fd: &table,
        },
        &exp.params,
    )?;
    for o in &rep.outcomes {
        eprintln!(
            "route {}: {:.3}s",
            json!(o.route).as_str().unwrap_or_default(),
            o.runtime.as_secs_f64()
        );
    }
    let failures: Vec<Value> = rep
        .outcomes
        .iter()
        .filter_map(|o| o.failure.as_ref().map(|f| json!({"route": o.route, "failure": f})))
        .collect();
    let mut csv = Csv::new(&prov, &["r", "route", "re_u", "im_u"]);
    for route in [Route::Closed, Route::Kernel, Route::Fd] {
        if let Some(v) = &rep.outcome(route).values {
            let name = serde_json::to_value(route).expect("route serializes");
            for (r, u) in rep.radii.iter().zip(v) {
                csv.row(&[num(*r), name.as_str().unwrap_or_default().into(), num(u.re), num(u.im)]);
            }
        }
    }
    let summary = json!({
        "t": rep.t,
        "mode": rep.mode,
        "points": rep.radii.len(),
        "pairs": rep.pairs,
        "max_l2_rel": rep.max_l2_rel(),
        "failures": failures,
    });
    let status = if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numeric(format!("{} route(s) failed", failures.len())))
    };
    Ok(Artifacts {
        files: vec![
            ("compare.json".into(), json_doc(&prov, summary.clone())),
            ("compare.csv".into(), csv.finish()),
        ],
        summary,
        messages: vec![],
        status,
    })
}
