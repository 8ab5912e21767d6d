use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use ordinal_mms::covering::{
    bbfs_allocation, cover_share, ell_approx_allocation, BagFillingOracle, FillDirection,
};
use ordinal_mms::experiments::{
    experiment_ordinal, experiment_thresholds, render_svg, Distribution, ExperimentReport, GoodsGrid,
    OrdinalConfig, ThresholdConfig, ThresholdMode,
};
use ordinal_mms::fixtures::{all_fixtures, fixture};
use ordinal_mms::lone_divider::{ordinal_d, solve_ordinal_with, WitnessMethod};
use ordinal_mms::mms::{row_greedy_lower_bound, row_mms_bounds};
use ordinal_mms::responsive::verify_counterexample_report;
use ordinal_mms::{Allocation, Bundle, Instance, MmsSolver};

use crate::{
    BbfsArgs, Cli, Command, Experiment, FixturesArgs, Format, MmsArgs, MmsMethod, Mode, Oracle, SimulateArgs,
    SolveArgs, SolveMethod, VerifyArgs,
};

pub fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Mms(a) => mms(cli, a),
        Command::Solve(a) => solve(cli, a),
        Command::Bbfs(a) => bbfs(cli, a),
        Command::Simulate(a) => simulate(cli, a),
        Command::VerifyResponsive(a) => verify(cli, a),
        Command::Fixtures(a) => fixtures(cli, a),
    }
}

/// A file path if it exists, otherwise a fixture name (a trailing `.json` is ignored).
fn load_instance(cli: &Cli) -> Result<Instance> {
    let Some(input) = &cli.input else {
        bail!("--in is required: an instance file or one of the fixtures");
    };
    if Path::new(input).exists() {
        let text = fs::read_to_string(input).with_context(|| format!("reading {input}"))?;
        return Instance::from_json(&text).with_context(|| format!("parsing {input}"));
    }
    let name = input.strip_suffix(".json").unwrap_or(input);
    match fixture(name) {
        Some(f) => Ok(f.instance),
        None => bail!("{input} is neither a file nor a fixture name"),
    }
}

fn emit(cli: &Cli, text: String) -> Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn csv_rows<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn goods_list(b: &Bundle) -> String {
    b.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" ")
}

fn direction(o: Oracle) -> FillDirection {
    match o {
        Oracle::Bidirectional => FillDirection::Bidirectional,
        Oracle::Unidirectional => FillDirection::Unidirectional,
    }
}

#[derive(Serialize)]
struct MmsOutput {
    agent: usize,
    ell: usize,
    d: usize,
    method: &'static str,
    value: Option<u64>,
    lower: Option<u64>,
    upper: Option<u64>,
    partition: Option<Vec<Bundle>>,
}

fn mms(cli: &Cli, a: &MmsArgs) -> Result<ExitCode> {
    let inst = load_instance(cli)?;
    if a.agent >= inst.n() {
        bail!("agent {} out of range for {} agents", a.agent, inst.n());
    }
    let d = a.d.unwrap_or_else(|| ordinal_d(a.ell, inst.n()));
    let row = inst.row(a.agent);
    let solver = MmsSolver::with_max_goods(a.max_goods);
    let mut out = MmsOutput {
        agent: a.agent,
        ell: a.ell,
        d,
        method: "",
        value: None,
        lower: None,
        upper: None,
        partition: None,
    };
    match a.method {
        MmsMethod::Exact | MmsMethod::Greedy => {
            let w = if a.method == MmsMethod::Exact {
                out.method = "exact";
                solver.solve(row, a.ell, d)?
            } else {
                out.method = "greedy";
                row_greedy_lower_bound(row, a.ell, d)?
            };
            out.value = Some(w.value);
            out.partition = Some(w.partition);
        }
        MmsMethod::Bounds => {
            out.method = "bounds";
            let (lo, hi) = row_mms_bounds(row, a.ell, d, &solver)?;
            out.lower = Some(lo);
            out.upper = Some(hi);
        }
    }
    let text = match cli.format {
        Some(Format::Csv) => csv_rows([(
            out.agent,
            out.ell,
            out.d,
            out.method,
            out.value,
            out.lower,
            out.upper,
        )])
        .map(|body| format!("agent,ell,d,method,value,lower,upper\n{body}"))?,
        _ => json(&out)?,
    };
    emit(cli, text)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct AgentReport {
    agent: usize,
    bundle: Bundle,
    value: u64,
    guarantee: u64,
}

#[derive(Serialize)]
struct SolveOutput {
    method: &'static str,
    ell: usize,
    d: usize,
    allocation: Allocation,
    agents: Vec<AgentReport>,
}

fn solve(cli: &Cli, a: &SolveArgs) -> Result<ExitCode> {
    let inst = load_instance(cli)?;
    let n = inst.n();
    let (method, d, allocation, guarantees) = match a.method {
        SolveMethod::Exact | SolveMethod::GreedyThresholds => {
            let (name, wm) = if a.method == SolveMethod::Exact {
                ("exact", WitnessMethod::Exact)
            } else {
                ("greedy-thresholds", WitnessMethod::Greedy)
            };
            let sol = solve_ordinal_with(&inst, a.ell, wm, &MmsSolver::with_max_goods(a.max_goods))?;
            (name, sol.d, sol.allocation, sol.guarantees)
        }
        SolveMethod::Bbfs => {
            if a.ell != 1 {
                bail!("--method bbfs computes 1-out-of-⌈3n/2⌉ allocations; use --ell 1");
            }
            let out = bbfs_allocation(&inst)?;
            ("bbfs", n, out.allocation, out.shares)
        }
        SolveMethod::CoverShare => {
            let sol = ell_approx_allocation(&inst, a.ell, &BagFillingOracle(direction(a.oracle)))?;
            let g = (0..n).map(|i| sol.guarantee(i)).collect();
            ("cover-share", sol.d, sol.allocation, g)
        }
    };
    let values = allocation.values(&inst);
    let agents: Vec<AgentReport> = (0..n)
        .map(|i| AgentReport {
            agent: i,
            bundle: allocation.bundles[i].clone(),
            value: values[i],
            guarantee: guarantees[i],
        })
        .collect();
    let text = match cli.format {
        Some(Format::Csv) => {
            let body = csv_rows(agents.iter().map(|r| (r.agent, goods_list(&r.bundle), r.value, r.guarantee)))?;
            format!("agent,bundle,value,guarantee\n{body}")
        }
        _ => json(&SolveOutput {
            method,
            ell: a.ell,
            d,
            allocation,
            agents,
        })?,
    };
    emit(cli, text)?;
    if values.iter().zip(&guarantees).any(|(v, g)| v < g) {
        eprintln!("error: some agent received less than its guarantee");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ShareReport {
    agent: usize,
    share: u64,
    partition: Vec<Bundle>,
}

#[derive(Serialize)]
struct BbfsOutput {
    d: usize,
    oracle: &'static str,
    shares: Vec<ShareReport>,
}

fn bbfs(cli: &Cli, a: &BbfsArgs) -> Result<ExitCode> {
    let inst = load_instance(cli)?;
    let d = a.d.unwrap_or(inst.n());
    let oracle = BagFillingOracle(direction(a.oracle));
    let shares = (0..inst.n())
        .map(|i| {
            let s = cover_share(inst.row(i), d, &oracle)?;
            Ok(ShareReport {
                agent: i,
                share: s.value,
                partition: s.partition(d),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let text = match cli.format {
        Some(Format::Csv) => {
            let body = csv_rows(shares.iter().map(|s| (s.agent, s.share)))?;
            format!("agent,share\n{body}")
        }
        _ => json(&BbfsOutput {
            d,
            oracle: match a.oracle {
                Oracle::Bidirectional => "bidirectional",
                Oracle::Unidirectional => "unidirectional",
            },
            shares,
        })?,
    };
    emit(cli, text)?;
    Ok(ExitCode::SUCCESS)
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<ExitCode> {
    let dist: Distribution = a.dist.parse()?;
    let ms = match (&a.ms, &a.m_per_agent) {
        (Some(ms), _) => GoodsGrid::Absolute(ms.clone()),
        (None, Some(fs)) => GoodsGrid::PerAgent(fs.clone()),
        (None, None) => match a.experiment {
            Experiment::Ordinal => GoodsGrid::PerAgent(vec![4, 10, 20, 40, 80]),
            Experiment::Thresholds => GoodsGrid::PerAgent(vec![1, 2, 3, 5, 8, 12]),
        },
    };
    let report: ExperimentReport = match a.experiment {
        Experiment::Ordinal => experiment_ordinal(&OrdinalConfig {
            ns: a.ns.clone(),
            ms,
            ells: a.ells.clone(),
            dist,
            trials: a.trials,
            seed: cli.seed,
        })?,
        Experiment::Thresholds => experiment_thresholds(&ThresholdConfig {
            ns: a.ns.clone(),
            ms,
            max_m: a.max_m.or(Some(100)),
            dist,
            trials: a.trials,
            seed: cli.seed,
            mode: match a.mode {
                Mode::Individual => ThresholdMode::Individual,
                Mode::Common => ThresholdMode::Common,
            },
        })?,
    };
    if let Some(path) = &a.svg {
        let title = format!("{:?} experiment, {dist}, {} trials", a.experiment, a.trials).to_lowercase();
        fs::write(path, render_svg(&report, &a.metric, &title)).with_context(|| format!("writing {}", path.display()))?;
    }
    let text = match cli.format {
        Some(Format::Json) => json(&report)?,
        _ => report.to_csv()?,
    };
    emit(cli, text)?;
    Ok(ExitCode::SUCCESS)
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Result<ExitCode> {
    let v = verify_counterexample_report(a.d)?;
    let text = match cli.format {
        Some(Format::Json) => json(&serde_json::json!({ "verified": v.verified(), "report": v }))?,
        Some(Format::Csv) => format!(
            "d,goods,bipartitions,witnesses_hold,fair_bipartitions,verified\n{},{},{},{},{},{}\n",
            v.d,
            v.goods,
            v.bipartitions,
            v.witnesses_hold,
            v.fair_bipartitions,
            v.verified()
        ),
        None if v.verified() => format!(
            "verified: d = {}, {} goods, {} bipartitions, none gives both agents their 1-out-of-{} share\n",
            v.d, v.goods, v.bipartitions, v.d
        ),
        None => format!(
            "not verified: witnesses hold = {}, {} bipartitions satisfy both agents\n",
            v.witnesses_hold, v.fair_bipartitions
        ),
    };
    emit(cli, text)?;
    Ok(if v.verified() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn fixtures(cli: &Cli, a: &FixturesArgs) -> Result<ExitCode> {
    let text = match &a.name {
        Some(name) => match fixture(name) {
            Some(f) => f.instance.to_json() + "\n",
            None => bail!("unknown fixture {name}"),
        },
        None => match cli.format {
            Some(Format::Json) => json(&all_fixtures())?,
            _ => all_fixtures()
                .iter()
                .map(|f| format!("{:<12} n={:<3} m={:<3} {}\n", f.name, f.instance.n(), f.instance.m(), f.description))
                .collect(),
        },
    };
    emit(cli, text)?;
    Ok(ExitCode::SUCCESS)
}
