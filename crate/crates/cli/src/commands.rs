//! Subcommand implementations. Each writes its artifacts into the run and
//! returns a summary for stdout and the manifest.

use serde_json::{json, Value};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use firey_core::acceptance::{run_criterion, CriterionResult, CRITERIA};
use firey_core::construct::{
    build_counterexample, glue_central_symmetric, glue_spherical_caps, tangency_glue, verify_counterexample, GlueSpec,
    COUNTEREXAMPLE_GRID,
};
use firey_core::gclass::{check_an, GFunction, DEFAULT_SAMPLES};
use firey_core::geometry_core::body::{AxisymBody, Body, ProfileSupport};
use firey_core::geometry_core::duality::{polar_support, radial_samples};
use firey_core::geometry_core::grid::CircleGrid;
use firey_core::geometry_core::spectral::{resample, spectral_derivative};
use firey_core::io::{parse_body, BodyFile, GSource, LoadedBody};
use firey_core::measure_calculus::{density, monge_ampere_residual, volume, DiffMode, ResidualOptions};
use firey_core::solve2d::{solve_periodic, BvpProblem, DEFAULT_NODES, NEWTON_TOL};
use firey_core::symmetrize::{
    polar_volume_convexity_probe, santalo_point, shadow_body, shadow_derivative_integrals, uniform_ts, ShadowFamily,
};
use firey_core::FireyError;

use crate::args::*;
use crate::run::{CmdResult, Failure, Run, MANIFEST};

/// Grid used when neither the input nor --grid-n fixes one.
pub const DEFAULT_GRID: usize = 1024;

/// Checks the shared flags: grid a power of two of at least 256, positive tolerance.
pub fn validate(common: &Common) -> CmdResult<()> {
    if let Some(n) = common.grid_n {
        if n < 256 || !n.is_power_of_two() {
            return Err(Failure::usage(format!("--grid-n must be a power of two >= 256, got {n}")));
        }
    }
    if let Some(t) = common.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::usage(format!("--tol must be positive and finite, got {t}")));
        }
    }
    Ok(())
}

pub fn dispatch(cmd: &Command, common: &Common, run: &mut Run) -> CmdResult<Value> {
    match cmd {
        Command::Body(a) => body(a, common, run),
        Command::Density(a) => density_cmd(a, common, run),
        Command::Polar(a) => polar(a, common, run),
        Command::Steiner(a) => steiner(a, common, run),
        Command::Santalo(a) => santalo(a, common, run),
        Command::CheckAn(a) => check_an_cmd(a, run),
        Command::Glue(a) => glue(a, common, run),
        Command::Counterexample(a) => counterexample(a, common, run),
        Command::Solve2d(a) => solve2d(a, common, run),
        Command::Verify(a) => verify(a, common, run),
        Command::ProbeMr(a) => probe_mr(a, common, run),
        Command::Report(a) => report(a, common, run),
    }
}

fn grid(common: &Common) -> CmdResult<CircleGrid> {
    Ok(CircleGrid::new(common.grid_n.unwrap_or(DEFAULT_GRID))?)
}

/// Loads a body file, resampling to --grid-n when it differs.
fn load_body(path: &Path, common: &Common, run: &mut Run) -> CmdResult<LoadedBody> {
    let text = run.read_input(path)?;
    let body = parse_body(&text, common.grid_n.unwrap_or(DEFAULT_GRID))?;
    match common.grid_n {
        Some(n) if n != body.profile().grid().len() => {
            let prof = ProfileSupport::new(CircleGrid::new(n)?, resample(body.profile().values(), n))?;
            Ok(match body {
                LoadedBody::Planar(_) => LoadedBody::Planar(prof),
                LoadedBody::Axisym(b) => LoadedBody::Axisym(AxisymBody::new(b.dim(), prof)?),
            })
        }
        _ => Ok(body),
    }
}

fn planar(body: &LoadedBody, what: &str) -> CmdResult<ProfileSupport> {
    match body {
        LoadedBody::Planar(p) => Ok(p.clone()),
        LoadedBody::Axisym(b) => {
            Err(FireyError::Precondition(format!("{what} needs a planar body, got dimension {}", b.dim())).into())
        }
    }
}

fn with_dim(n: usize, prof: ProfileSupport) -> CmdResult<LoadedBody> {
    Ok(if n == 2 { LoadedBody::Planar(prof) } else { LoadedBody::Axisym(AxisymBody::new(n, prof)?) })
}

fn unit(angle: f64) -> [f64; 2] {
    [angle.cos(), angle.sin()]
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn parse_point(s: &Option<String>, flag: &str) -> CmdResult<[f64; 2]> {
    let s = s.as_deref().ok_or_else(|| Failure::usage(format!("--{flag} is required in this mode")))?;
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [x, y] => match (x.trim().parse(), y.trim().parse()) {
            (Ok(x), Ok(y)) => Ok([x, y]),
            _ => Err(Failure::usage(format!("--{flag} expects x,y, got '{s}'"))),
        },
        _ => Err(Failure::usage(format!("--{flag} expects x,y, got '{s}'"))),
    }
}

fn require<T: Copy>(v: Option<T>, flag: &str) -> CmdResult<T> {
    v.ok_or_else(|| Failure::usage(format!("--{flag} is required in this mode")))
}

fn diff_mode(d: Diff) -> DiffMode {
    match d {
        Diff::Spectral => DiffMode::Spectral,
        Diff::Fd => DiffMode::FiniteDifference,
    }
}

fn body(a: &BodyArgs, common: &Common, run: &mut Run) -> CmdResult<Value> {
    let g = grid(common)?;
    let body = match a.shape {
        Shape::Ball => with_dim(a.n, ProfileSupport::disc(g, a.r, [0.0, a.shift])?)?,
        Shape::Ellipse => {
            if a.n != 2 {
                return Err(Failure::usage("ellipses are planar; use --n 2"));
            }
            LoadedBody::Planar(ProfileSupport::ellipse(g, a.a, a.b, 0.0, [0.0, a.shift])?)
        }
    };
    run.json("body.json", &BodyFile::from_body(&body))?;
    Ok(json!({ "n": body.dim(), "grid_N": g.len(), "volume": volume(&body)? }))
}

fn density_cmd(a: &DensityArgs, common: &Common, run: &mut Run) -> CmdResult<Value> {
    let body = load_body(&a.input.body, common, run)?;
    let field = density(&body, diff_mode(a.diff))?;
    let phi = field.grid.angles();
    run.table("density", &field, &["phi", "f"], phi.iter().zip(&field.f).map(|(&p, &f)| [p, f]))?;
    let (lo, hi) = field.f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    Ok(json!({ "n": field.n, "grid_N": phi.len(), "min_f": lo, "max_f": hi, "clamped": field.clamped.len() }))
}

fn polar(a: &BodyInput, common: &Common, run: &mut Run) -> CmdResult<Value> {
    let tol = common.tol.unwrap_or(1e-6);
    run.tolerance("duality", tol);
    let body = load_body(&a.body, common, run)?;
    let l = body.profile();
    l.require_origin_interior()?;
    let p = polar_support(l)?;
    let rho = radial_samples(l)?;
    let product = rho.iter().zip(p.values()).map(|(r, h)| (r * h - 1.0).abs()).fold(0.0, f64::max);
    let back = polar_support(&p)?;
    let involution = max_abs_diff(back.values(), l.values());
    let out = with_dim(body.dim(), p)?;
    run.json("polar.json", &BodyFile::from_body(&out))?;
    let summary = json!({ "max_abs_rho_h_polar_minus_1": product, "max_abs_bipolar_minus_h": involution, "tol": tol });
    if product > tol || involution > tol {
        return Err(Failure::verification("polar duality check exceeds tolerance", summary));
    }
    Ok(summary)
}

fn steiner(a: &SteinerArgs, common: &Common, run: &mut Run) -> CmdResult<Value> {
    if !(-1.0..=1.0).contains(&a.t) {
        return Err(Failure::usage(format!("--t must lie in [-1, 1], got {}", a.t)));
    }
    let body = load_body(&a.input.body, common, run)?;
    let l = planar(&body, "steiner")?;
    let s = shadow_body(&l, unit(a.direction), a.t)?;
    run.json("steiner.json", &BodyFile::from_body(&s))?;
    Ok(json!({ "direction": unit(a.direction), "t": a.t, "area_in": volume(&l)?, "area_out": volume(&s)? }))
}

fn santalo(a: &BodyInput, common: &Common, run: &mut Run) -> CmdResult<Value> {
    let tol = common.tol.unwrap_or(1e-8);
    run.tolerance("volume_product_slack", tol);
    let body = load_body(&a.body, common, run)?;
    let l = planar(&body, "santalo")?;
    let rep = santalo_point(&l)?;
    let area = volume(&l)?;
    let product = area * rep.polar_area;
    let bound = PI * PI;
    let summary = json!({
        "santalo_point": rep.point,
        "area": area,
        "polar_area": rep.polar_area,
        "volume_product": product,
        "ball_product": bound,
        "ratio": product / bound,
        "grad_norm": rep.grad_norm,
        "iterations": rep.iterations,
        "polar_barycentre_offset": rep.polar_barycentre_offset,
    });
    run.json("santalo.json", &summary)?;
    if product > bound + tol {
        return Err(Failure::verification("volume product exceeds the ball value", summary));
    }
    Ok(summary)
}

fn check_an_cmd(a: &CheckAnArgs, run: &mut Run) -> CmdResult<Value> {
    let src = GSource::parse(&a.g)?;
    if let GSource::Table(_) = src {
        run.read_input(Path::new(&a.g))?;
    }
    let tab = src.table(a.n, a.c1, a.c2, a.samples)?;
    let cert = check_an(&tab);
    run.json("gtab.json", &tab)?;
    run.json("an_certificate.json", &cert)?;
    let summary = serde_json::to_value(&cert).map_err(FireyError::from)?;
    if !cert.pass {
        return Err(Failure {
            kind: "an_violation".into(),
            message: format!("{} is not in the class for n = {}", src.name(), a.n),
            details: Some(summary),
            usage: false,
        });
    }
    Ok(summary)
}

fn glue(a: &GlueArgs, common: &Common, run: &mut Run) -> CmdResult<Value> {
    let body = load_body(&a.input.body, common, run)?;
    match a.mode {
        GlueMode::Central => {
            let k = match &body {
                LoadedBody::Axisym(b) => b.clone(),
                LoadedBody::Planar(p) => AxisymBody::new(2, p.clone())?,
            };
            let out = glue_central_symmetric(&k)?;
            run.json("glued.json", &BodyFile::from_body(&out))?;
            Ok(json!({ "mode": "central", "n": out.dim() }))
        }
        GlueMode::Tangency => {
            let path = a.body2.as_ref().ok_or_else(|| Failure::usage("--body2 is required in tangency mode"))?;
            let other = load_body(path, common, run)?;
            let (t1, t2) = (planar(&body, "tangency glue")?, planar(&other, "tangency glue")?);
            let (p, q) = (parse_point(&a.p, "p")?, parse_point(&a.q, "q")?);
            let out = tangency_glue(&t1, &t2, p, q)?;
            run.json("glued.json", &BodyFile::from_body(&out))?;
            Ok(json!({ "mode": "tangency", "area": volume(&out)? }))
        }
        GlueMode::Caps => {
            let (nu1, nu2, r1, r2) =
                (require(a.nu1, "nu1")?, require(a.nu2, "nu2")?, require(a.r1, "r1")?, require(a.r2, "r2")?);
            let gspec = a.g.as_deref().ok_or_else(|| Failure::usage("--G is required in caps mode"))?;
            let src = GSource::parse(gspec)?;
            if let GSource::Table(_) = src {
                run.read_input(Path::new(gspec))?;
            }
            let n = body.dim();
            let tab = src.table(n, r1, r2, DEFAULT_SAMPLES)?;
            let spec = GlueSpec { profile: body.profile().clone(), nu1, nu2, r1, r2 };
            let caps = glue_spherical_caps(&spec, n, &tab, a.eps)?;
            run.json("glued.json", &BodyFile::from_body(&caps.body))?;
            run.json("g_eps.json", &caps.g_eps.g)?;
            let res = &caps.residual;
            run.table("residual", res, &["phi", "h", "f", "G", "r"], res.csv_rows())?;
            Ok(json!({
                "mode": "caps",
                "u_eps_measure": caps.u_eps_measure,
                "residual_max_abs": res.max_abs,
                "residual_max_abs_all": res.max_abs_all,
                "g_eps_certificate": caps.g_eps.certificate,
                "g_eps_sup": caps.g_eps.sup,
                "seams": caps.seams,
            }))
        }
    }
}

fn counterexample(a: &CounterexampleArgs, common: &Common, run: &mut Run) -> CmdResult<Value> {
    let tol = common.tol.unwrap_or(1e-6);
    run.tolerance("residual", tol);
    if let Some(n) = common.grid_n.filter(|&n| n != COUNTEREXAMPLE_GRID) {
        log::warn!("counterexample bodies use a fixed {COUNTEREXAMPLE_GRID}-node grid; ignoring --grid-n {n}");
    }
    let c = build_counterexample(a.n, a.r, a.lambda, a.m)?;
    let rep = verify_counterexample(&c)?;
    run.json("body.json", &BodyFile::from_body(&c.shifted))?;
    run.json("body_centred.json", &BodyFile::from_body(&c.body))?;
    run.json("g_m.json", &c.g_m)?;
    run.csv("residual.csv", &["phi", "h", "f", "G", "r"], rep.residual.csv_rows())?;
    run.json("certificates.json", &json!({ "build": c.certificates, "m_search": c.search }))?;
    let summary = json!({
        "n": rep.n,
        "m": rep.m,
        "residual_max_abs": rep.residual.max_abs,
        "residual_l2": rep.residual.l2,
        "an_pass": rep.an.pass,
        "sufficient_min": rep.sufficient_min,
        "non_sphericity": rep.non_sphericity,
        "central_symmetry": rep.central_symmetry,
        "barycentre": rep.barycentre,
        "translation_identity": rep.translation_identity,
        "deviation_from_constant": rep.deviation_from_constant,
        "outer_density": rep.outer_density,
        "outer_matches": rep.outer_matches,
        "witness": rep.witness,
    });
    run.json("report.json", &summary)?;
    let mut failed = Vec::new();
    if rep.residual.max_abs > tol {
        failed.push("residual");
    }
    if !(rep.an.pass && rep.sufficient_min > 0.0) {
        failed.push("class certificate");
    }
    if rep.non_sphericity <= tol {
        failed.push("non-sphericity");
    }
    if rep.central_symmetry > tol {
        failed.push("central symmetry");
    }
    if !failed.is_empty() {
        return Err(Failure::verification(format!("counterexample checks failed: {}", failed.join(", ")), summary));
    }
    Ok(summary)
}

fn solve2d(a: &Solve2dArgs, common: &Common, run: &mut Run) -> CmdResult<Value> {
    let tol = common.tol.unwrap_or(NEWTON_TOL);
    run.tolerance("newton", tol);
    let src = GSource::parse(&a.g)?;
    if let GSource::Table(_) = src {
        run.read_input(Path::new(&a.g))?;
    }
    let nodes = common.grid_n.unwrap_or(DEFAULT_NODES);
    let mut prob = BvpProblem::with_nodes(&src, nodes, a.seeds, common.seed);
    prob.newton_tol = tol;
    prob.max_iter = a.max_iter;
    let set = solve_periodic(&prob)?;
    run.json("solutions.json", &set)?;
    let grid = CircleGrid::new(nodes)?;
    let phi = grid.angles();
    for (i, s) in set.solutions.iter().enumerate() {
        let d2 = spectral_derivative(&s.h, 2);
        let rows = (0..nodes).map(|k| [phi[k], s.h[k], d2[k] + s.h[k], src.eval(s.h[k])]);
        run.csv(&format!("solution_{i:02}.csv"), &["phi", "h", "h2_plus_h", "G"], rows)?;
    }
    let tags: Vec<_> = set.solutions.iter().map(|s| json!({ "seed": s.seed, "tag": s.classification.tag })).collect();
    Ok(json!({ "G": src.name(), "nodes": nodes, "solutions": set.solutions.len(), "tags": tags }))
}

fn verify(a: &VerifyArgs, common: &Common, run: &mut Run) -> CmdResult<Value> {
    let tol = common.tol.unwrap_or(1e-6);
    run.tolerance("residual", tol);
    let body = load_body(&a.input.body, common, run)?;
    let src = GSource::parse(&a.g)?;
    if let GSource::Table(_) = src {
        run.read_input(Path::new(&a.g))?;
    }
    let opts = ResidualOptions { mode: diff_mode(a.diff), ..Default::default() };
    let rep = monge_ampere_residual(&body, &src, &opts)?;
    run.table("residual", &rep, &["phi", "h", "f", "G", "r"], rep.csv_rows())?;
    let summary =
        json!({ "G": src.name(), "n": rep.n, "max_abs": rep.max_abs, "l2": rep.l2, "argmax_phi": rep.argmax_phi });
    if rep.max_abs > tol {
        return Err(Failure::verification(format!("residual {:.3e} exceeds {tol:.3e}", rep.max_abs), summary));
    }
    Ok(summary)
}

fn probe_mr(a: &ProbeMrArgs, common: &Common, run: &mut Run) -> CmdResult<Value> {
    let tol = common.tol.unwrap_or(1e-7);
    run.tolerance("second_difference", tol);
    if a.samples < 3 {
        return Err(Failure::usage("--samples must be at least 3"));
    }
    let body = load_body(&a.input.body, common, run)?;
    let l = planar(&body, "probe-mr")?;
    let e = unit(a.direction);
    let fam = ShadowFamily::new(&l, e)?;
    let rep = polar_volume_convexity_probe(&fam, &uniform_ts(a.samples))?;
    let series = |i: usize| -> Vec<[f64; 3]> {
        rep.rows
            .iter()
            .map(|r| [r.t, [r.inv_santalo, r.inv_half_plus, r.inv_half_minus][i], r.second_diff[i]])
            .collect()
    };
    let doc = json!({
        "direction": rep.direction,
        "min_second_diff": rep.min_second_diff,
        "santalo": series(0),
        "half_plus": series(1),
        "half_minus": series(2),
    });
    let rows = rep.rows.iter().map(|r| {
        [r.t, r.inv_santalo, r.second_diff[0], r.inv_half_plus, r.second_diff[1], r.inv_half_minus, r.second_diff[2]]
    });
    let header = ["t", "inv_santalo", "d2_santalo", "inv_half_plus", "d2_half_plus", "inv_half_minus", "d2_half_minus"];
    run.table("convexity", &doc, &header, rows)?;
    let mut summary = json!({ "direction": rep.direction, "min_second_diff": rep.min_second_diff, "tol": tol });
    if let Some(gspec) = &a.g {
        let src = GSource::parse(gspec)?;
        if let GSource::Table(_) = src {
            run.read_input(Path::new(gspec))?;
        }
        let ints = shadow_derivative_integrals(&l, e, &src)?;
        run.json("integrals.json", &ints)?;
        summary["integrals"] = json!({ "G": src.name(), "weighted": ints.weighted, "surface": ints.surface });
    }
    if rep.min_second_diff.iter().any(|&d| d < -tol) {
        return Err(Failure::verification("reciprocal polar volume is not convex in t", summary));
    }
    Ok(summary)
}

/// Markdown table of criterion results.
pub fn render_table(results: &[CriterionResult]) -> String {
    let mut s = String::from("| # | criterion | result | seconds | budget | detail |\n|---|---|---|---|---|---|\n");
    for r in results {
        s.push_str(&format!(
            "| {} | {} | {} | {:.2} | {} | {} |\n",
            r.id,
            r.title,
            if r.pass { "PASS" } else { "FAIL" },
            r.seconds,
            r.budget_seconds,
            r.detail.replace('|', "/")
        ));
    }
    s
}

fn find_manifests(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            find_manifests(&p, out)?;
        } else if p.file_name().is_some_and(|n| n == MANIFEST) {
            out.push(p);
        }
    }
    Ok(())
}

/// Latest result per criterion from report manifests under `dir`.
fn collect_results(dir: &Path, run: &mut Run) -> CmdResult<Vec<CriterionResult>> {
    let mut manifests = Vec::new();
    find_manifests(dir, &mut manifests)?;
    let mut by_id = std::collections::BTreeMap::new();
    for m in manifests {
        let text = run.read_input(&m)?;
        let v: Value = serde_json::from_str(&text).map_err(FireyError::from)?;
        if v["command"]["subcommand"] != "report" {
            continue;
        }
        let path = m.with_file_name("acceptance.json");
        if !path.exists() {
            continue;
        }
        let text = run.read_input(&path)?;
        let results: Vec<CriterionResult> = serde_json::from_str(&text).map_err(FireyError::from)?;
        for r in results {
            by_id.insert(r.id, r);
        }
    }
    if by_id.is_empty() {
        return Err(FireyError::InvalidInput(format!("no report manifests under {}", dir.display())).into());
    }
    Ok(by_id.into_values().collect())
}

fn report(a: &ReportArgs, common: &Common, run: &mut Run) -> CmdResult<Value> {
    let results = match &a.from {
        Some(dir) => {
            if dir.canonicalize().ok() == run.out_dir().canonicalize().ok() {
                return Err(Failure::usage("--from must differ from --out"));
            }
            collect_results(dir, run)?
        }
        None => {
            let ids: Vec<u32> =
                if a.criteria.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { a.criteria.clone() };
            if let Some(bad) = ids.iter().find(|id| !(1..=10).contains(*id)) {
                return Err(Failure::usage(format!("no criterion {bad}; ids run from 1 to 10")));
            }
            ids.iter()
                .map(|&id| {
                    let r = run_criterion(id, common.seed);
                    println!("{}", r.line());
                    r
                })
                .collect()
        }
    };
    if a.from.is_some() {
        for r in &results {
            println!("{}", r.line());
        }
    }
    run.json("acceptance.json", &results)?;
    run.write("acceptance.md", &render_table(&results))?;
    let failed: Vec<u32> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    let summary = json!({ "criteria": results.len(), "passed": results.len() - failed.len(), "failed": failed });
    if !failed.is_empty() {
        return Err(Failure::verification(format!("criteria failed: {failed:?}"), summary));
    }
    Ok(summary)
}
