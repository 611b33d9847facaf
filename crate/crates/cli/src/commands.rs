use std::fmt::Write as _;
use std::path::Path;

use dish_core::{
    neighbor_constants, optimize_sigma, p_co, BandwidthProblem, HopMode, ModelParams, NeighborConstants,
    SigmaSweep, SolverOptions,
};
use dish_experiments::{reproduce, sweep_dataset, FigureDataset, FigureId, Param, ReproduceOptions, Scale, Sweep};
use dish_sim::{run, topology_seed, trace_csv, CoopMode, Scenario, SimMetrics, Topology};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::{
    AnalyzeArgs, BandwidthArgs, Cli, Command, Format, GeometryArgs, NetworkArgs, ReproduceArgs, ScenarioArgs,
    SimulateArgs, SweepArgs,
};

pub fn dispatch(cli: &Cli) -> Result<()> {
    let text = match &cli.command {
        Command::Analyze(a) => analyze(a, cli.format)?,
        Command::Bandwidth(a) => bandwidth(a, cli.format)?,
        Command::Simulate(a) => simulate(a, cli.format)?,
        Command::Sweep(a) => sweep(a, cli.format)?,
        Command::Reproduce(a) => return reproduce_cmd(a, cli),
        Command::Geometry(a) => geometry(a, cli.format)?,
    };
    emit(cli.output.as_deref(), &text)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

/// Renders `(name, value)` pairs as a header + row CSV or as report lines.
fn table(format: Format, header: &[String], fields: &[(&str, String)]) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            for h in header {
                let _ = writeln!(out, "# {h}");
            }
            let names: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let values: Vec<&str> = fields.iter().map(|(_, v)| v.as_str()).collect();
            let _ = writeln!(out, "{}\n{}", names.join(","), values.join(","));
        }
        Format::Report => {
            for h in header {
                let _ = writeln!(out, "# {h}");
            }
            for (k, v) in fields {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
    }
    out
}

fn hop_mode(n: &NetworkArgs) -> HopMode {
    if n.single_hop {
        HopMode::SingleHop
    } else {
        HopMode::MultiHop
    }
}

fn analyze(a: &AnalyzeArgs, format: Format) -> Result<String> {
    let data_rate = a.data_rate.unwrap_or(a.rate);
    let control_rate = a.control_rate.unwrap_or(a.rate);
    let params = ModelParams::from_frames(
        hop_mode(&a.network),
        a.network.n,
        a.network.lambda,
        a.data_bytes,
        a.network.control_bytes,
        data_rate,
        control_rate,
    )
    .with_ack(a.ack, data_rate);
    params.validate()?;
    let opts = SolverOptions { tol: a.tol, max_iter: a.max_iter, damping: a.damping };
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(CliError::Usage(format!("--damping must lie in (0, 1], got {}", opts.damping)));
    }
    let r = p_co(&params, &NeighborConstants::standard(), &opts)?;
    let mut header = vec![
        "dish analyze".to_string(),
        format!("params: {}", json(&params)),
        format!("solver: {}", json(&opts)),
    ];
    header.extend(params.warnings().into_iter().map(|w| format!("warning: {w}")));
    let s = r.state;
    let fields = [
        ("hop_mode", params.hop_mode.to_string()),
        ("n", params.node_density.to_string()),
        ("lambda", params.packet_rate.to_string()),
        ("data_time_s", params.data_time.to_string()),
        ("control_time_s", params.control_time.to_string()),
        ("p_ctrl", s.p_ctrl.to_string()),
        ("p_oh", s.p_oh.to_string()),
        ("p_succ", s.p_succ.to_string()),
        ("lambda_c", s.lambda_c.to_string()),
        ("p_ni_oh", s.p_ni_oh.to_string()),
        ("p_ni_cts", s.p_ni_cts.to_string()),
        ("iterations", s.iterations.to_string()),
        ("p_ctrl_star", r.p_ctrl_star.to_string()),
        ("weight", r.weight.to_string()),
        ("lambda_w", r.lambda_w.to_string()),
        ("p_co_xy_star", r.p_co_xy_star.to_string()),
        ("p_co", r.p_co.to_string()),
    ];
    Ok(table(format, &header, &fields))
}

fn bandwidth(a: &BandwidthArgs, format: Format) -> Result<String> {
    let sweep = SigmaSweep::parse(&a.sweep).map_err(|e| CliError::Usage(e.to_string()))?;
    if a.m.iter().any(|&m| m == 0) {
        return Err(CliError::Usage("data-channel counts must be at least 1".into()));
    }
    let problem = BandwidthProblem {
        total_bw: a.total_bw,
        data_bytes: a.data_bytes,
        control_bytes: a.network.control_bytes,
        node_density: a.network.n,
        packet_rate: a.network.lambda,
        hop_mode: hop_mode(&a.network),
    };
    let geom = NeighborConstants::standard();
    let results = a
        .m
        .iter()
        .map(|&m| optimize_sigma(&problem, m, &sweep, &geom))
        .collect::<dish_core::error::Result<Vec<_>>>()?;
    let mut out = format!(
        "# dish bandwidth\n# problem: {}\n# sigma_sweep: {}:{}:{}\n",
        json(&problem),
        sweep.min,
        sweep.max,
        sweep.step
    );
    match (a.curves, format) {
        (true, _) => {
            out.push_str("m,sigma,p_co\n");
            for r in &results {
                for (s, p) in &r.curve {
                    let _ = writeln!(out, "{},{s},{}", r.data_channels, p.map(|p| p.to_string()).unwrap_or_default());
                }
            }
        }
        (false, Format::Csv) => {
            out.push_str("m,sigma_star,p_co_max,flat\n");
            for r in &results {
                let _ = writeln!(out, "{},{},{},{}", r.data_channels, r.sigma_star, r.p_co_max, r.flat);
            }
        }
        (false, Format::Report) => {
            for r in &results {
                let _ = writeln!(out, "m = {}: sigma_star = {:.4}, p_co_max = {:.6}", r.data_channels, r.sigma_star, r.p_co_max);
            }
        }
    }
    Ok(out)
}

fn load_scenario(args: &ScenarioArgs) -> Result<Scenario> {
    let mut scenario = match &args.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str::<Scenario>(&text)
                .map_err(|e| CliError::Usage(format!("invalid scenario {}: {e}", path.display())))?
        }
        None => Scenario::default(),
    };
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    if let Some(p) = args.packets {
        scenario.stop.packets = p;
    }
    Ok(scenario)
}

fn parse_mode(s: &str) -> Result<CoopMode> {
    s.parse::<CoopMode>().map_err(CliError::Usage)
}

fn simulate(a: &SimulateArgs, format: Format) -> Result<String> {
    let mut scenario = load_scenario(&a.scenario)?;
    if let Some(m) = &a.mode {
        scenario.mode = parse_mode(m)?;
    }
    let mut config = scenario.sim_config();
    config.trace = a.trace.is_some();
    config.validate()?;
    let topo_seed = topology_seed(scenario.seed);
    let topology = Topology::from_spec(&scenario.topology, topo_seed)?;
    let out = run(&topology, &config)?;
    if let (Some(path), Some(trace)) = (&a.trace, &out.trace) {
        std::fs::write(path, trace_csv(trace))
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    let header = [
        "dish simulate".to_string(),
        format!("scenario: {}", json(&scenario)),
        format!("topology_seed: {topo_seed}"),
        format!("nodes: {}", topology.len()),
        format!("mean_degree: {:.3}", topology.mean_degree()),
    ];
    Ok(metrics_table(format, &header, &out.metrics))
}

fn metrics_table(format: Format, header: &[String], m: &SimMetrics) -> String {
    let values = m.csv_row();
    let fields: Vec<(&str, String)> = SimMetrics::CSV_COLUMNS
        .iter()
        .copied()
        .zip(values.split(',').map(str::to_string))
        .collect();
    table(format, header, &fields)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Usage(format!("grid must be comma separated numbers or min:max:step, got {spec:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0 && hi >= lo) {
            return Err(bad());
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| lo + k as f64 * step).collect())
    } else {
        spec.split(',').filter(|s| !s.trim().is_empty()).map(num).collect()
    }
}

fn sweep(a: &SweepArgs, format: Format) -> Result<String> {
    if format == Format::Report {
        return Err(CliError::Usage("sweep emits CSV only".into()));
    }
    let scenario = load_scenario(&a.scenario)?;
    let varying: Param = a.param.parse().map_err(CliError::Usage)?;
    let modes = a.modes.iter().map(|m| parse_mode(m)).collect::<Result<Vec<_>>>()?;
    let config = scenario.sim_config();
    config.validate()?;
    let sweep = Sweep {
        varying,
        grid: parse_grid(&a.grid)?,
        topology: scenario.topology.clone(),
        config,
        replications: a.replications,
        root_seed: scenario.seed,
    };
    let ds = sweep_dataset(&sweep, &modes)?;
    Ok(with_command(&ds, "dish sweep"))
}

fn with_command(ds: &FigureDataset, command: &str) -> String {
    format!("# {command}\n{}", ds.to_csv())
}

fn reproduce_cmd(a: &ReproduceArgs, cli: &Cli) -> Result<()> {
    let scale: Scale = a.scale.parse().map_err(CliError::Usage)?;
    let figures: Vec<FigureId> = if a.figure == "all" {
        FigureId::ALL.to_vec()
    } else {
        vec![a.figure.parse()?]
    };
    let opts = ReproduceOptions {
        scale,
        root_seed: a.seed,
        packet_sizes: a.sizes.clone(),
        packets: a.packets,
        replications: a.replications,
    };
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    let mut stdout = String::new();
    for f in figures {
        let ds = reproduce(f, &opts)?;
        let csv = with_command(&ds, &format!("dish reproduce {f}"));
        match &a.out {
            Some(dir) => {
                emit(Some(&dir.join(format!("{f}.csv"))), &csv)?;
                emit(Some(&dir.join(format!("{f}.summary.json"))), &(ds.summary_json() + "\n"))?;
                for c in &ds.checks {
                    let _ = writeln!(stdout, "{f}: {}", c.describe());
                }
            }
            None => match cli.format {
                Format::Csv => stdout.push_str(&csv),
                Format::Report => {
                    stdout.push_str(&ds.summary_json());
                    stdout.push('\n');
                }
            },
        }
    }
    emit(cli.output.as_deref(), &stdout)
}

fn geometry(a: &GeometryArgs, format: Format) -> Result<String> {
    if !(a.tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", a.tol)));
    }
    let c = neighbor_constants(a.tol)?;
    let header = ["dish geometry".to_string(), format!("quadrature_tol: {}", a.tol)];
    let fields = [
        ("excl_given_neighbor", c.excl_given_neighbor.to_string()),
        ("excl_given_common", c.excl_given_common.to_string()),
        ("common", c.common.to_string()),
    ];
    Ok(table(format, &header, &fields))
}
