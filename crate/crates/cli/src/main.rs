use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use atinf::cayley::{build_ball_with_budget, build_complex, CayleyBall, DEFAULT_MAX_VERTICES};
use atinf::combiner::{amalgam_pinch, britton_reduce, parse_combination, CombinationModel};
use atinf::ends::{dead_ends, end_depth_table_on, rough_equiv, window_radius, Grid, GrowthTable, Mode, TableKind};
use atinf::error::Error;
use atinf::filling::{sci_growth_table_on, semistability_table_on, FillBudget, ProbeSettings, SciParams, SemiParams};
use atinf::hyperbolic::{build_fan, cp_table, estimate_delta, ray_constant, verify_fan_filling, DeltaSampling, FanParams};
use atinf::model::{GroupModel, ModelMeta};
use atinf::presentation::parse_presentation;
use atinf::rewriting::{knuth_bendix_complete, CompletionBudget};
use atinf::zoo::zoo_group;

const OUT_DIR_VAR: &str = "ATINF_OUT_DIR";

#[derive(Parser, Serialize)]
#[command(name = "atinf", version, about = "Coarse invariants of finitely presented groups on Cayley balls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output file; defaults to $ATINF_OUT_DIR/<subcommand>.<ext>, else stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Recorded for provenance; computations run on one thread.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Serialize, Clone)]
struct GroupArg {
    /// Zoo name (Zd:2, free:2, surface2, racg:pentagon, bs12, lamplighter,
    /// trefoil) or a presentation file.
    #[arg(long)]
    group: String,
    /// Mark a presentation file group as one-ended.
    #[arg(long)]
    one_ended: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_VERTICES)]
    max_vertices: usize,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Build a ball and export it.
    Ball {
        #[command(flatten)]
        g: GroupArg,
        #[arg(long)]
        radius: u32,
    },
    /// End-depth table.
    EndDepth {
        #[command(flatten)]
        g: GroupArg,
        #[arg(long)]
        rmax: u32,
        #[arg(long, default_value_t = 2.0)]
        window_factor: f64,
    },
    /// Dead ends in a ball.
    DeadEnds {
        #[command(flatten)]
        g: GroupArg,
        #[arg(long)]
        radius: u32,
    },
    /// Slimness of geodesic triangles.
    Delta {
        #[command(flatten)]
        g: GroupArg,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        rho: u32,
        /// Sample this many triangles instead of all.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Connecting paths outside balls.
    Cpm {
        #[command(flatten)]
        g: GroupArg,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        c: u32,
        #[arg(long)]
        level: u32,
    },
    /// Sci growth by loop filling.
    SciFill {
        #[command(flatten)]
        g: GroupArg,
        /// Largest inner radius.
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 8)]
        window: u32,
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
    },
    /// Semistability growth by pushing loops along rays.
    Semistab {
        #[command(flatten)]
        g: GroupArg,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 8)]
        window: u32,
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
    },
    /// Build and verify a fan over an edge.
    Fan {
        #[command(flatten)]
        g: GroupArg,
        #[arg(long)]
        radius: u32,
        /// Word of the edge's first vertex; its sphere is the fan base.
        #[arg(long)]
        p: Option<String>,
        /// Letter from p to q.
        #[arg(long)]
        edge: Option<String>,
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value_t = 1)]
        inner: u32,
        #[arg(long, default_value_t = 300)]
        samples: usize,
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
    },
    /// Britton reduction or pinch detection on a syllable word.
    Reduce {
        /// trefoil, bs12 or a combination file.
        #[arg(long)]
        model: String,
        /// Syllables separated by '|', e.g. "1 | t^-1 | a | t | A^2".
        #[arg(long)]
        word: String,
    },
    /// Search rough-equivalence constants between two CSV tables.
    RoughEquiv {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long, default_value_t = 8)]
        bound: i64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ball { .. } => "ball",
            Command::EndDepth { .. } => "end-depth",
            Command::DeadEnds { .. } => "dead-ends",
            Command::Delta { .. } => "delta",
            Command::Cpm { .. } => "cpm",
            Command::SciFill { .. } => "sci-fill",
            Command::Semistab { .. } => "semistab",
            Command::Fan { .. } => "fan",
            Command::Reduce { .. } => "reduce",
            Command::RoughEquiv { .. } => "rough-equiv",
        }
    }
}

/// What a subcommand produced.
struct Output {
    json: Value,
    csv: Option<String>,
    summary: String,
    unknowns: bool,
}

enum Failure {
    Config(anyhow::Error),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Failure {
        match e.downcast_ref::<Error>() {
            Some(Error::UnsoundOracle(_)) => Failure::Internal(e),
            _ => Failure::Config(e),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::from(anyhow::Error::new(e))
    }
}

fn load_group(g: &GroupArg) -> anyhow::Result<GroupModel> {
    if let Ok(m) = zoo_group(&g.group) {
        return Ok(m);
    }
    let path = Path::new(&g.group);
    if !path.exists() {
        return Err(anyhow!(Error::UnknownModel(g.group.clone())));
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let p = parse_presentation(&text)?;
    let sys = knuth_bendix_complete(&p, CompletionBudget::default());
    if !sys.confluent {
        return Err(anyhow!(Error::NotConfluent));
    }
    let meta = ModelMeta {
        one_ended: g.one_ended,
        finitely_presented: true,
        sci_candidate: false,
        hyperbolic: false,
    };
    Ok(GroupModel::from_rewriting(p, sys, meta))
}

fn ball(g: &GroupArg, radius: u32) -> anyhow::Result<CayleyBall> {
    let m = load_group(g)?;
    Ok(build_ball_with_budget(&m, radius, g.max_vertices)?)
}

fn table_output(t: &GrowthTable, summary: String, unknowns: bool) -> Output {
    Output {
        json: serde_json::to_value(t).expect("table serializes"),
        csv: Some(t.to_csv()),
        summary,
        unknowns,
    }
}

fn read_table(path: &Path) -> anyhow::Result<GrowthTable> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text)?;
        let t = v.get("result").cloned().unwrap_or(v);
        return Ok(serde_json::from_value(t)?);
    }
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let kind = text
        .lines()
        .find_map(|l| l.strip_prefix("# kind: "))
        .map(|k| serde_json::from_value(json!(k.trim())))
        .transpose()?
        .unwrap_or(TableKind::EndDepth);
    let model = text
        .lines()
        .find_map(|l| l.strip_prefix("# model: "))
        .unwrap_or("table")
        .trim()
        .to_string();
    Ok(GrowthTable::from_csv(kind, &model, &body)?)
}

fn run(cmd: &Command, seed: u64) -> Result<Output, Failure> {
    Ok(match cmd {
        Command::Ball { g, radius } => {
            let b = ball(g, *radius)?;
            let sizes = b.sphere_sizes();
            let mut csv = String::from("r,sphere_size\n");
            for (r, s) in sizes.iter().enumerate() {
                csv.push_str(&format!("{r},{s}\n"));
            }
            Output {
                json: serde_json::to_value(b.export()).map_err(anyhow::Error::from)?,
                csv: Some(csv),
                summary: format!("{} vertices in B({radius}) of {}", b.len(), b.model.name),
                unknowns: false,
            }
        }
        Command::EndDepth { g, rmax, window_factor } => {
            let b = ball(g, window_radius(*rmax, *window_factor))?;
            let t = end_depth_table_on(&b, *rmax, *window_factor)?;
            let inexact = t.samples.iter().filter(|s| s.mode != Mode::Exact).count();
            let summary = format!("end-depth of {} for r <= {rmax}; {inexact} inexact sample(s)", b.model.name);
            table_output(&t, summary, false)
        }
        Command::DeadEnds { g, radius } => {
            let b = ball(g, *radius)?;
            let list = dead_ends(&b);
            let mut csv = String::from("vertex,word,dist,depth,exact\n");
            for d in &list {
                csv.push_str(&format!("{},{},{},{},{}\n", d.vertex, d.word, d.dist, d.depth, d.exact));
            }
            Output {
                summary: format!("{} dead end(s) in B({radius})", list.len()),
                json: serde_json::to_value(&list).map_err(anyhow::Error::from)?,
                csv: Some(csv),
                unknowns: false,
            }
        }
        Command::Delta { g, radius, rho, samples } => {
            let b = ball(g, *radius)?;
            let sampling = match samples {
                Some(count) => DeltaSampling::Sampled { rho: *rho, count: *count, seed },
                None => DeltaSampling::Exhaustive { rho: *rho },
            };
            let d = estimate_delta(&b, sampling)?;
            Output {
                summary: format!("delta estimate {} over {} triangles", d.value, d.triangles),
                csv: Some(format!("rho,delta,triangles\n{rho},{},{}\n", d.value, d.triangles)),
                json: serde_json::to_value(&d).map_err(anyhow::Error::from)?,
                unknowns: false,
            }
        }
        Command::Cpm { g, radius, m, c, level } => {
            let b = ball(g, *radius)?;
            let rep = cp_table(&b, *m, *c, *level)?;
            let mut csv = String::from("x,y,distance,path_len\n");
            for p in &rep.pairs {
                let l = p.path_len.map_or("NA".to_string(), |l| l.to_string());
                csv.push_str(&format!("{},{},{},{l}\n", p.x, p.y, p.distance));
            }
            Output {
                summary: format!(
                    "L = {} over {} pair(s), {} failure(s)",
                    rep.l_hat,
                    rep.pairs.len(),
                    rep.failures.len()
                ),
                json: serde_json::to_value(&rep).map_err(anyhow::Error::from)?,
                csv: Some(csv),
                unknowns: false,
            }
        }
        Command::SciFill { g, r, window, budget } => {
            let m = load_group(g)?;
            let c = build_complex(build_ball_with_budget(&m, *window, g.max_vertices)?)?;
            let params = SciParams {
                window: *window,
                probes: ProbeSettings {
                    seed,
                    ..Default::default()
                },
                budget: FillBudget {
                    max_expansions: *budget,
                    max_len: None,
                },
            };
            let t = sci_growth_table_on(&c, *r, &params)?;
            let unknowns = t
                .samples
                .iter()
                .any(|s| s.mode == Mode::LowerBound && s.note.as_deref().is_some_and(|n| n.contains("unknown")));
            let obstructed = t.samples.iter().filter(|s| s.value.is_none()).count();
            let summary = format!("sci growth of {}: {obstructed} level(s) without a filling bound", m.name);
            table_output(&t, summary, unknowns)
        }
        Command::Semistab { g, r, window, budget } => {
            let m = load_group(g)?;
            let c = build_complex(build_ball_with_budget(&m, *window, g.max_vertices)?)?;
            let params = SemiParams {
                probes: ProbeSettings {
                    seed,
                    ..Default::default()
                },
                budget: FillBudget {
                    max_expansions: *budget,
                    max_len: None,
                },
                target: None,
            };
            let t = semistability_table_on(&c, *r, &params)?;
            let unknowns = t.samples.iter().any(|s| s.value.is_none());
            table_output(&t, format!("semistability growth of {}", m.name), unknowns)
        }
        Command::Fan {
            g,
            radius,
            p,
            edge,
            depth,
            inner,
            samples,
            budget,
        } => {
            let c2 = build_complex(ball(g, *radius)?)?;
            let b = &c2.ball;
            let margin = 2.min(radius.saturating_sub(1));
            let c = ray_constant(b, margin)?.value;
            let rho = radius / 2;
            let delta = estimate_delta(b, DeltaSampling::Sampled { rho, count: *samples, seed })?.value;
            let mm = 6 * c + 2 * delta + 4;
            let (pv, qv) = match (p, edge) {
                (Some(p), Some(e)) => {
                    let pw = b.model.parse_word(p)?;
                    let pv = b.find(&b.model.normal_form(&pw)?).ok_or_else(|| anyhow!("p is outside the ball"))?;
                    let ew = b.model.parse_word(e)?;
                    let &[l] = ew.letters() else {
                        return Err(Failure::Config(anyhow!("--edge must be a single letter")));
                    };
                    let qv = b.neighbor(pv, l).ok_or_else(|| anyhow!("q is outside the ball"))?;
                    (pv, qv)
                }
                _ => {
                    let base = radius / 2;
                    b.sphere(base)?
                        .flat_map(|p| b.neighbors(p).map(move |(_, q)| (p, q)))
                        .find(|&(p, q)| b.dist(q) >= b.dist(p) && b.parent(q) != Some(p))
                        .ok_or_else(|| anyhow!("no edge found on sphere {base}"))?
                }
            };
            let level = b.dist(pv).min(b.dist(qv));
            let l = cp_table(b, mm, c, level)?.l_hat.max(2 * c + 5);
            let fan = build_fan(&c2, pv, qv, *depth, FanParams { m: mm, c, l, delta })?;
            let budget = FillBudget {
                max_expansions: *budget,
                max_len: None,
            };
            let ver = verify_fan_filling(&c2, &fan, *inner, &budget)?;
            let mut csv = String::from("cell,length,min_dist,within_bounds,outcome\n");
            for s in &ver.cells {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.label, s.length, s.min_dist, s.within_bounds, s.outcome
                ));
            }
            Output {
                summary: format!(
                    "fan over r = {} with c = {c}, delta = {delta}, M = {mm}, L = {l}: {}",
                    fan.r, ver.verdict
                ),
                unknowns: !ver.all_filled,
                json: json!({ "fan": fan, "verification": ver }),
                csv: Some(csv),
            }
        }
        Command::Reduce { model, word } => {
            let m = match CombinationModel::by_name(model) {
                Ok(m) => m,
                Err(_) => {
                    let text = std::fs::read_to_string(model).with_context(|| format!("reading {model}"))?;
                    parse_combination(&text)?
                }
            };
            let sw = m.parse_syllables(word)?;
            match &m {
                CombinationModel::Hnn(h) => {
                    let run = britton_reduce(h, &sw)?;
                    let out = m.format_syllables(&run.result);
                    let mut csv = String::from("step,index,kind,weight_before,weight_after\n");
                    for (i, s) in run.steps.iter().enumerate() {
                        csv.push_str(&format!(
                            "{i},{},{},{},{}\n",
                            s.index,
                            serde_json::to_value(s.kind).expect("kind").as_str().unwrap_or(""),
                            s.weight_before,
                            s.weight_after
                        ));
                    }
                    Output {
                        summary: format!("{} step(s); reduced form {out}", run.steps.len()),
                        json: json!({ "run": run, "reduced": out, "trivial": run.result.is_empty() }),
                        csv: Some(csv),
                        unknowns: false,
                    }
                }
                CombinationModel::Amalgam(a) => {
                    let i = amalgam_pinch(a, &sw)?;
                    Output {
                        summary: format!("pinch at syllable {i}"),
                        json: json!({ "syllables": sw, "pinch": i }),
                        csv: Some(format!("pinch\n{i}\n")),
                        unknowns: false,
                    }
                }
            }
        }
        Command::RoughEquiv { f, g, bound } => {
            let tf = read_table(f)?;
            let tg = read_table(g)?;
            let w = rough_equiv(&tf, &tg, Grid { bound: *bound })?;
            let csv = match &w {
                Some(w) => {
                    let t: Vec<String> = w.tuple().iter().map(|r| r.to_string()).collect();
                    format!("c1,c2,c3,C1,C2,C3\n{}\n", t.join(","))
                }
                None => "c1,c2,c3,C1,C2,C3\n".to_string(),
            };
            Output {
                summary: match &w {
                    Some(_) => "rough-equivalence witness found".to_string(),
                    None => format!("no witness within grid bound {bound}"),
                },
                unknowns: w.is_none(),
                json: json!({ "witness": w }),
                csv: Some(csv),
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let name = cli.command.name();
    let config = serde_json::to_value(&cli).expect("config serializes");
    let version = env!("CARGO_PKG_VERSION");
    let out = match run(&cli.command, cli.seed) {
        Ok(o) => o,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let format = cli.format.unwrap_or(if out.csv.is_some() { Format::Csv } else { Format::Json });
    let body = match (format, &out.csv) {
        (Format::Csv, Some(csv)) => {
            let kind = out.json.get("kind").and_then(Value::as_str);
            let model = out.json.get("model").and_then(Value::as_str);
            let mut s = format!("# atinf {version}\n# config: {config}\n");
            if let (Some(k), Some(m)) = (kind, model) {
                s.push_str(&format!("# kind: {k}\n# model: {m}\n"));
            }
            s.push_str(csv);
            s
        }
        _ => {
            let doc = json!({ "version": version, "config": config, "result": out.json });
            serde_json::to_string_pretty(&doc).expect("output serializes") + "\n"
        }
    };
    let ext = if format == Format::Csv && out.csv.is_some() { "csv" } else { "json" };
    let path = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_VAR).map(|d| PathBuf::from(d).join(format!("{name}.{ext}"))));
    match path {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, &body) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{body}"),
    }
    eprintln!("{}", out.summary);
    if out.unknowns {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}
