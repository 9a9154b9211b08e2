use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use hubline::auxgraph::build_aux_graph;
use hubline::geo::geojson_string;
use hubline::milp::{
    add_cuts, build_milp, import_solution, write_lp, write_mps, CutFlags, MilpModel, SecCut,
};
use hubline::model::{load_instance, InstanceFormat};
use hubline::model::{metric_closure, sparsify, RevenueSpec, SparsifyConfig};
use hubline::paths::{compute_bounds, enumerate_all, write_candidates_csv, Enumeration, PathType, DEFAULT_K_CAP};
use hubline::solver::{
    evaluate_line, solve_bnb, solve_enumerate, write_solution_csv, BnbConfig, EnumerateConfig, HubLine, MetricsMode,
    Solution,
};
use hubline::{Commodity, Params, Problem};

use crate::report::{OutDir, RunReport, Timings};
use crate::{Command, CommonArgs, Format, Method, MilpArgs};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Paths { common, dot } => cmd_paths(&common, dot.as_deref()),
        Command::Solve {
            common,
            method,
            unweighted_metrics,
            line_cap,
            node_cap,
        } => {
            let metrics = if unweighted_metrics {
                MetricsMode::Unweighted
            } else {
                MetricsMode::DemandWeighted
            };
            cmd_solve(&common, method, metrics, line_cap, node_cap)
        }
        Command::ExportMilp { common, milp } => cmd_export_milp(&common, &milp),
        Command::CutLoop {
            common,
            milp,
            solution,
            sec_file,
        } => cmd_cut_loop(&common, &milp, &solution, sec_file.as_deref()),
        Command::Geojson { common, solution } => cmd_geojson(&common, solution.as_deref()),
    }
}

struct Prepared {
    problem: Problem,
    workers: usize,
    parameters: BTreeMap<String, Value>,
    rerun: Vec<String>,
    t_prep: f64,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| (n.get() / 2).max(1))
}

fn prepare(command: &str, args: &CommonArgs) -> Result<Prepared> {
    let start = Instant::now();
    let format = args.format.unwrap_or(if args.instance.is_dir() {
        Format::CsvBundle
    } else {
        Format::Cab
    });
    let loader = match format {
        Format::Cab => InstanceFormat::Cab {
            subset: args.subset,
            populations: None,
        },
        Format::CsvBundle => {
            if args.subset.is_some() {
                bail!("--subset only applies to CAB files");
            }
            InstanceFormat::CsvBundle
        }
    };
    let raw = load_instance(&args.instance, &loader)
        .with_context(|| format!("loading {}", args.instance.display()))?;
    let file_params = raw.params().clone();
    let base_seed = args.seed.unwrap_or(match file_params.revenue {
        RevenueSpec::Gamma { seed } => seed.wrapping_sub(1),
        RevenueSpec::Explicit(_) => 0,
    });
    let revenue = match (&file_params.revenue, args.seed) {
        (RevenueSpec::Explicit(v), _) => RevenueSpec::Explicit(v.clone()),
        (RevenueSpec::Gamma { .. }, _) => RevenueSpec::Gamma {
            seed: base_seed.wrapping_add(1),
        },
    };
    let params = Params {
        p: args.p.unwrap_or(file_params.p),
        alpha: args.alpha.unwrap_or(file_params.alpha),
        r: args.r.unwrap_or(file_params.r),
        vartheta: args.vartheta.unwrap_or(file_params.vartheta),
        revenue,
        strict_filter: args.strict_filter.unwrap_or(file_params.strict_filter),
        selfloop_dominance_exempt: file_params.selfloop_dominance_exempt,
    };
    let mut instance = metric_closure(&raw.with_params(params.clone())?);
    if let Some(fraction) = args.sparsify {
        instance = sparsify(&instance, &SparsifyConfig::new(fraction), base_seed.wrapping_add(2))?;
    }
    let problem = Problem::prepare(instance)?;
    let workers = args.workers.unwrap_or_else(default_workers).max(1);

    let format_name = match format {
        Format::Cab => "cab",
        Format::CsvBundle => "csv-bundle",
    };
    let mut parameters = BTreeMap::new();
    parameters.insert("instance".into(), json!(args.instance.display().to_string()));
    parameters.insert("format".into(), json!(format_name));
    parameters.insert("subset".into(), json!(args.subset));
    parameters.insert("n".into(), json!(problem.instance.n()));
    parameters.insert("edges".into(), json!(problem.instance.edges().len()));
    parameters.insert("commodities".into(), json!(problem.instance.commodities().len()));
    parameters.insert("p".into(), json!(params.p));
    parameters.insert("alpha".into(), json!(params.alpha));
    parameters.insert("r".into(), json!(params.r));
    parameters.insert("vartheta".into(), json!(params.vartheta));
    parameters.insert("seed".into(), json!(base_seed));
    parameters.insert(
        "revenue".into(),
        match &params.revenue {
            RevenueSpec::Gamma { seed } => json!({ "rule": "gamma", "seed": seed }),
            RevenueSpec::Explicit(_) => json!({ "rule": "explicit" }),
        },
    );
    parameters.insert("sparsify".into(), json!(args.sparsify));
    parameters.insert("workers".into(), json!(workers));
    parameters.insert("strict_filter".into(), json!(params.strict_filter));
    parameters.insert("access_time".into(), json!(problem.derived.access.first().copied()));

    let mut rerun: Vec<String> = vec![
        command.into(),
        "--instance".into(),
        args.instance.display().to_string(),
        "--format".into(),
        format_name.into(),
    ];
    if let Some(s) = args.subset {
        rerun.extend(["--subset".into(), s.to_string()]);
    }
    rerun.extend([
        "--p".into(),
        params.p.to_string(),
        "--alpha".into(),
        format!("{:?}", params.alpha),
        "--r".into(),
        format!("{:?}", params.r),
        "--vartheta".into(),
        format!("{:?}", params.vartheta),
        "--seed".into(),
        base_seed.to_string(),
    ]);
    if let Some(f) = args.sparsify {
        rerun.extend(["--sparsify".into(), format!("{f:?}")]);
    }
    rerun.extend([
        "--workers".into(),
        workers.to_string(),
        "--strict-filter".into(),
        params.strict_filter.to_string(),
        "--out".into(),
        args.out.display().to_string(),
    ]);
    Ok(Prepared {
        problem,
        workers,
        parameters,
        rerun,
        t_prep: start.elapsed().as_secs_f64(),
    })
}

fn report(command: &str, prep: &Prepared, timings: Timings) -> RunReport {
    RunReport {
        command: command.into(),
        parameters: prep.parameters.clone(),
        rerun: prep.rerun.clone(),
        timings,
        result: BTreeMap::new(),
        outputs: BTreeMap::new(),
        exit_status: 0,
    }
}

fn candidates_csv(candidates: &Enumeration) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_candidates_csv(&mut buf, candidates)?;
    Ok(buf)
}

fn solution_csv(problem: &Problem, solution: &Solution) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_solution_csv(&mut buf, problem, solution)?;
    Ok(buf)
}

fn parse_commodity(text: &str) -> Result<Commodity> {
    let (o, d) = text
        .split_once(',')
        .ok_or_else(|| anyhow!("expected `O,D`, got `{text}`"))?;
    Ok(Commodity::new(o.trim().parse()?, d.trim().parse()?))
}

fn cmd_paths(args: &CommonArgs, dot: Option<&str>) -> Result<()> {
    let prep = prepare("paths", args)?;
    let problem = &prep.problem;
    let candidates = enumerate_all(problem, prep.workers);
    let mut out = OutDir::create(&args.out)?;
    out.write("candidates.csv", &candidates_csv(&candidates)?)?;

    let mut rep = report(
        "paths",
        &prep,
        Timings {
            t_prep: prep.t_prep,
            t_path: Some(candidates.t_path.as_secs_f64()),
            t_solve: None,
        },
    );
    if let Some(spec) = dot {
        let commodity = parse_commodity(spec)?;
        let aux = build_aux_graph(problem, commodity)?;
        out.write(&format!("aux_{}_{}.dot", commodity.origin, commodity.destination), aux.to_dot().as_bytes())?;
        rep.rerun.extend(["--dot".into(), spec.into()]);
    }
    let mut by_type = BTreeMap::new();
    for t in [PathType::Odh, PathType::Oh, PathType::Dh, PathType::Odnh] {
        by_type.insert(t.as_str().to_string(), candidates.iter().filter(|c| c.ptype == t).count());
    }
    println!("n_path {}", candidates.n_path);
    println!("t_path {:.3}s", candidates.t_path.as_secs_f64());
    for (t, count) in &by_type {
        println!("{t} {count}");
    }
    rep.result.insert("n_path".into(), json!(candidates.n_path));
    rep.result.insert("by_type".into(), json!(by_type));
    out.finish(rep)
}

fn cmd_solve(args: &CommonArgs, method: Method, metrics: MetricsMode, line_cap: u64, node_cap: u64) -> Result<()> {
    let prep = prepare("solve", args)?;
    let problem = &prep.problem;
    let candidates = enumerate_all(problem, prep.workers);
    let start = Instant::now();
    let mut result = BTreeMap::new();
    let solution = match method {
        Method::Enum => {
            let config = EnumerateConfig {
                line_cap,
                workers: prep.workers,
                metrics,
            };
            solve_enumerate(problem, &candidates, &config)?
        }
        Method::Bnb => {
            let bounds = compute_bounds(problem, prep.workers, DEFAULT_K_CAP)?;
            let config = BnbConfig {
                node_cap,
                metrics,
                trace: false,
            };
            let (solution, stats) = solve_bnb(problem, &candidates, &bounds, &config)?;
            result.insert("root_bound".into(), json!(stats.root_bound));
            result.insert("expanded".into(), json!(stats.expanded));
            result.insert("capped_bounds".into(), json!(bounds.iter().filter(|b| b.capped).count()));
            solution
        }
    };
    let t_solve = start.elapsed().as_secs_f64();
    let mut out = OutDir::create(&args.out)?;
    out.write("solution.csv", &solution_csv(problem, &solution)?)?;

    println!("objective {:?}", solution.objective);
    println!("line {:?}", solution.line.nodes());
    println!(
        "served {:.2}% demand {:.2}% time saved {:.2}%",
        solution.metrics.pct_od_served, solution.metrics.pct_demand_served, solution.metrics.pct_time_saved
    );
    let mut rep = report(
        "solve",
        &prep,
        Timings {
            t_prep: prep.t_prep,
            t_path: Some(candidates.t_path.as_secs_f64()),
            t_solve: Some(t_solve),
        },
    );
    let method_name = match method {
        Method::Enum => "enum",
        Method::Bnb => "bnb",
    };
    rep.parameters.insert("method".into(), json!(method_name));
    rep.rerun.extend([
        "--method".into(),
        method_name.into(),
        "--line-cap".into(),
        line_cap.to_string(),
        "--node-cap".into(),
        node_cap.to_string(),
    ]);
    if metrics == MetricsMode::Unweighted {
        rep.rerun.push("--unweighted-metrics".into());
    }
    result.insert("objective".into(), json!(solution.objective));
    result.insert("line".into(), json!(solution.line.nodes()));
    result.insert("n_path".into(), json!(candidates.n_path));
    result.insert("pct_od_served".into(), json!(solution.metrics.pct_od_served));
    result.insert("pct_demand_served".into(), json!(solution.metrics.pct_demand_served));
    result.insert("pct_time_saved".into(), json!(solution.metrics.pct_time_saved));
    rep.result = result;
    out.finish(rep)
}

fn parse_cuts(text: &str) -> Result<CutFlags> {
    let mut flags = CutFlags::default();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part {
            "none" => {}
            "desthub_orhub" => flags.desthub_orhub = true,
            "ineq_new" => flags.ineq_new = true,
            "all" => {
                flags.desthub_orhub = true;
                flags.ineq_new = true;
            }
            other => bail!("unknown cut family `{other}` (expected desthub_orhub, ineq_new, all or none)"),
        }
    }
    Ok(flags)
}

fn milp_rerun(rep: &mut RunReport, milp: &MilpArgs) {
    rep.parameters.insert("variant".into(), json!(milp.variant.as_str()));
    rep.parameters.insert("cuts".into(), json!(milp.cuts));
    rep.rerun.extend([
        "--variant".into(),
        milp.variant.as_str().into(),
        "--cuts".into(),
        milp.cuts.clone(),
    ]);
    if milp.lp {
        rep.rerun.push("--lp".into());
    }
}

fn write_model(out: &mut OutDir, model: &MilpModel, lp: bool) -> Result<()> {
    out.write("model.mps", write_mps(&model.lp).as_bytes())?;
    if lp {
        out.write("model.lp", write_lp(&model.lp).as_bytes())?;
    }
    Ok(())
}

fn cmd_export_milp(args: &CommonArgs, milp: &MilpArgs) -> Result<()> {
    let prep = prepare("export-milp", args)?;
    let problem = &prep.problem;
    let candidates = enumerate_all(problem, prep.workers);
    let model = build_milp(problem, &candidates, milp.variant, parse_cuts(&milp.cuts)?)?;
    let mut out = OutDir::create(&args.out)?;
    write_model(&mut out, &model, milp.lp)?;
    println!(
        "{}: {} variables, {} rows, {} candidates",
        milp.variant,
        model.lp.variables.len(),
        model.lp.rows.len(),
        candidates.n_path
    );
    let mut rep = report(
        "export-milp",
        &prep,
        Timings {
            t_prep: prep.t_prep,
            t_path: Some(candidates.t_path.as_secs_f64()),
            t_solve: None,
        },
    );
    milp_rerun(&mut rep, milp);
    rep.result.insert("variables".into(), json!(model.lp.variables.len()));
    rep.result.insert("rows".into(), json!(model.lp.rows.len()));
    rep.result.insert("n_path".into(), json!(candidates.n_path));
    out.finish(rep)
}

fn read_sec_file(path: &Path) -> Result<Vec<SecCut>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cuts = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let set: Vec<usize> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .with_context(|| format!("{}:{}: expected node ids", path.display(), no + 1))?;
        if set.len() < 2 {
            bail!("{}:{}: a subtour cut needs at least two nodes", path.display(), no + 1);
        }
        cuts.push(SecCut::new(set));
    }
    Ok(cuts)
}

fn sec_file_text(cuts: &[SecCut]) -> String {
    cuts.iter()
        .map(|c| c.set.iter().map(usize::to_string).collect::<Vec<_>>().join(" ") + "\n")
        .collect()
}

fn cmd_cut_loop(args: &CommonArgs, milp: &MilpArgs, solution: &Path, sec_file: Option<&Path>) -> Result<()> {
    let prep = prepare("cut-loop", args)?;
    let problem = &prep.problem;
    let candidates = enumerate_all(problem, prep.workers);
    let mut model = build_milp(problem, &candidates, milp.variant, parse_cuts(&milp.cuts)?)?;
    if let Some(path) = sec_file {
        let earlier = read_sec_file(path)?;
        add_cuts(&mut model, problem, &earlier);
    }
    let values = import_solution(&model, solution)?;
    let start = Instant::now();
    let check = hubline::milp::verify_solution(&model, problem, &candidates, &values);
    let mut out = OutDir::create(&args.out)?;
    let mut rep = report(
        "cut-loop",
        &prep,
        Timings {
            t_prep: prep.t_prep,
            t_path: Some(candidates.t_path.as_secs_f64()),
            t_solve: None,
        },
    );
    milp_rerun(&mut rep, milp);
    rep.rerun.extend(["--solution".into(), solution.display().to_string()]);
    if let Some(path) = sec_file {
        rep.rerun.extend(["--sec-file".into(), path.display().to_string()]);
    }
    rep.result.insert("model_objective".into(), json!(check.model_objective));
    rep.result.insert("recomputed_objective".into(), json!(check.recomputed_objective));

    if !check.violations.is_empty() || !check.bad_values.is_empty() {
        let mut text = String::from("row,activity,rhs,slack\n");
        for v in &check.violations {
            text += &format!("{},{:?},{:?},{:?}\n", v.row, v.activity, v.rhs, v.slack);
        }
        for name in &check.bad_values {
            text += &format!("{name},,,\n");
        }
        out.write("violations.csv", text.as_bytes())?;
        rep.result.insert("status".into(), json!("infeasible"));
        rep.result.insert("violations".into(), json!(check.violations.len()));
        rep.exit_status = 2;
        out.finish(rep)?;
        let worst = check
            .violations
            .iter()
            .min_by(|a, b| a.slack.total_cmp(&b.slack))
            .map(|v| format!("; worst row {} slack {:?}", v.row, v.slack))
            .unwrap_or_default();
        bail!(
            "solution violates {} rows and {} variable bounds{worst}",
            check.violations.len(),
            check.bad_values.len()
        );
    }
    if check.has_subtour() {
        let added = add_cuts(&mut model, problem, &check.cuts);
        write_model(&mut out, &model, milp.lp)?;
        out.write("sec_cuts.txt", sec_file_text(&model.sec_cuts).as_bytes())?;
        println!("subtours found: {added} new cuts, {} in total", model.sec_cuts.len());
        rep.result.insert("status".into(), json!("cuts_added"));
        rep.result.insert("new_cuts".into(), json!(added));
        rep.result.insert("total_cuts".into(), json!(model.sec_cuts.len()));
    } else {
        let sol = check
            .solution
            .ok_or_else(|| anyhow!("hub variables do not describe a line with {} hubs", problem.params().p))?;
        out.write("solution.csv", &solution_csv(problem, &sol)?)?;
        println!("converged: objective {:?}, line {:?}", sol.objective, sol.line.nodes());
        rep.result.insert("status".into(), json!("converged"));
        rep.result.insert("objective".into(), json!(sol.objective));
        rep.result.insert("line".into(), json!(sol.line.nodes()));
    }
    rep.timings.t_solve = Some(start.elapsed().as_secs_f64());
    out.finish(rep)
}

/// The `line` entry of a solution CSV.
fn read_solution_line(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let raw = text
        .lines()
        .find_map(|l| l.strip_prefix("line,"))
        .ok_or_else(|| anyhow!("{} has no `line,` entry", path.display()))?;
    raw.split(';')
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse::<usize>().map_err(Into::into))
        .collect()
}

fn cmd_geojson(args: &CommonArgs, solution: Option<&Path>) -> Result<()> {
    let prep = prepare("geojson", args)?;
    let problem = &prep.problem;
    let evaluated = match solution {
        None => None,
        Some(path) => {
            let nodes = read_solution_line(path)?;
            let candidates = enumerate_all(problem, prep.workers);
            let line = HubLine::new(&problem.instance, nodes)?;
            Some(evaluate_line(problem, &candidates, &line, MetricsMode::default()))
        }
    };
    let text = geojson_string(&problem.instance, evaluated.as_ref())?;
    let mut out = OutDir::create(&args.out)?;
    out.write("network.geojson", text.as_bytes())?;
    let mut rep = report(
        "geojson",
        &prep,
        Timings {
            t_prep: prep.t_prep,
            ..Timings::default()
        },
    );
    if let Some(path) = solution {
        rep.rerun.extend(["--solution".into(), path.display().to_string()]);
    }
    rep.result.insert(
        "line".into(),
        json!(evaluated.as_ref().map(|s| s.line.nodes().to_vec())),
    );
    println!("wrote {} features", problem.instance.n() + usize::from(evaluated.is_some()));
    out.finish(rep)
}
