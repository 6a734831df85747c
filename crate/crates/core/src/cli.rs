//! Experiment driver: one subcommand per pipeline, each emitting a reproducible artifact.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;

use crate::circuits::{expansion_table, table_json};
use crate::crystal::{lr_csv, lr_table, CrystalType};
use crate::error::{Error, Result};
use crate::gaussian::{default_cutoff, limiting_spectrum, spectrum_csv};
use crate::geometry::{build_geometric_graph, trial_rng, SpaceKind, SpaceSpec};
use crate::moments::{limiting_moments, SimulationBudget};
use crate::poisson::{bs_compare, Estimate};
use crate::rankone::{rankone_table, table_csv, RankOneSpace};
use crate::rootdata::{Family, RootSystem};
use crate::spectra::{empirical_moments, gk_delta, SpectralMeasure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Gaussian,
    Poisson,
}

#[derive(Parser, Debug)]
#[command(name = "liegraph", version, about = "Random geometric graphs on compact Lie groups: limits, simulations, tables")]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GroupArgs {
    /// Group as a space name (su2, su3, so5, usp2)
    #[arg(long)]
    pub space: Option<String>,
    /// Root system family, used together with --n
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Limiting eigenvalues c_λ and multiplicities at a fixed level L
    LimitSpectrum {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long = "L")]
        level: f64,
        #[arg(long)]
        cutoff: Option<f64>,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Graphs at a fixed level: top eigenvalue over N and distance to the limit spectrum
    SimulateGaussian {
        #[arg(long)]
        space: String,
        #[arg(long = "N")]
        n_points: usize,
        #[arg(long = "L")]
        level: f64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        cutoff: Option<f64>,
    },
    /// Eigenvalue table of a compact rank-one symmetric space
    RankoneTable {
        #[arg(long)]
        space: String,
        #[arg(long = "L")]
        level: f64,
        /// Largest degree k listed
        #[arg(long, default_value_t = 10)]
        cutoff: usize,
    },
    /// Poissonian regime: neighbourhood statistics against the Boolean model and empirical moments
    SimulatePoisson {
        #[arg(long)]
        space: String,
        #[arg(long = "N")]
        n_points: usize,
        #[arg(long)]
        ell: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        radius: usize,
        #[arg(long, default_value_t = 5)]
        s_max: usize,
    },
    /// Reduced-circuit expansion table of tr A^s
    CircuitTable {
        #[arg(long)]
        s: usize,
    },
    /// Limiting moments M_2..M_s for SU(2) in the Poissonian regime
    Moments {
        #[arg(long)]
        ell: f64,
        #[arg(long, default_value_t = 7)]
        s_max: usize,
        /// Boolean-model samples for terms without a quadrature
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
    },
    /// Littlewood–Richardson coefficients from relative string polytopes
    Lr {
        #[arg(long, default_value = "A2")]
        family: String,
        #[arg(long, default_value_t = 3)]
        max_coord: i64,
    },
    /// Volume consistency report for classical root systems
    Volumes,
}

/// Everything that determines an artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub regime: Option<Regime>,
    pub space: Option<String>,
    pub family: Option<String>,
    pub n: Option<usize>,
    #[serde(rename = "N")]
    pub n_points: Option<usize>,
    #[serde(rename = "L")]
    pub level: Option<f64>,
    pub ell: Option<f64>,
    pub trials: Option<usize>,
    pub cutoff: Option<f64>,
    pub extra: Value,
    pub seed: u64,
    pub format: Format,
}

impl ExperimentConfig {
    fn new(command: &str, seed: u64, format: Format) -> Self {
        ExperimentConfig {
            command: command.into(),
            regime: None,
            space: None,
            family: None,
            n: None,
            n_points: None,
            level: None,
            ell: None,
            trials: None,
            cutoff: None,
            extra: Value::Null,
            seed,
            format,
        }
    }
}

/// Output text plus the summary embedded in it.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub text: String,
    pub summary: Value,
}

/// Git-style object hash (SHA-256 of "blob <len>\0<content>").
pub fn content_hash(content: &str) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content.as_bytes());
    hex::encode(h.finalize())
}

fn root_system_for(group: &GroupArgs) -> Result<RootSystem> {
    match (&group.space, &group.family, group.n) {
        (Some(s), None, None) => {
            let kind: SpaceKind = s.parse()?;
            match kind {
                SpaceKind::SU(n) if n >= 2 => RootSystem::new(Family::A, n - 1),
                SpaceKind::USp(1) => RootSystem::new(Family::A, 1),
                SpaceKind::USp(n) => RootSystem::new(Family::C, n),
                SpaceKind::SO(n) if n >= 5 && n % 2 == 1 => RootSystem::new(Family::B, n / 2),
                SpaceKind::SO(n) if n >= 6 => RootSystem::new(Family::D, n / 2),
                other => Err(Error::Config(format!("{other} has no simply connected root datum here; use --family/--n"))),
            }
        }
        (None, Some(f), Some(n)) => RootSystem::new(f.parse()?, n),
        (None, Some(_), None) => Err(Error::Config("--family needs --n".into())),
        (None, None, _) => Err(Error::Config("give --space, or --family with --n".into())),
        _ => Err(Error::Config("--space cannot be combined with --family/--n".into())),
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("--{name} must be a positive number, got {v}")))
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

fn csv_rows(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

/// Run one command; identical (command, seed) give byte-identical artifacts.
pub fn run(cli: &Cli) -> Result<Artifact> {
    let mut cfg = ExperimentConfig::new("", cli.seed, cli.format);
    let (result, csv): (Value, String) = match &cli.command {
        Command::LimitSpectrum { group, level, cutoff, top } => {
            cfg.command = "limit-spectrum".into();
            cfg.regime = Some(Regime::Gaussian);
            cfg.space = group.space.clone();
            cfg.family = group.family.clone();
            cfg.n = group.n;
            cfg.level = Some(*level);
            let rs = root_system_for(group)?;
            let cut = cutoff.unwrap_or_else(|| default_cutoff(*level));
            cfg.cutoff = Some(cut);
            cfg.extra = json!({ "top": top });
            let mut lines = limiting_spectrum(&rs, *level, cut)?;
            if let Some(t) = top {
                lines.truncate(*t);
            }
            (serde_json::to_value(&lines)?, spectrum_csv(&lines))
        }
        Command::SimulateGaussian { space, n_points, level, trials, cutoff } => {
            cfg.command = "simulate-gaussian".into();
            cfg.regime = Some(Regime::Gaussian);
            cfg.space = Some(space.clone());
            cfg.n_points = Some(*n_points);
            cfg.level = Some(*level);
            cfg.trials = Some(*trials);
            if *trials == 0 || *n_points < 2 {
                return Err(Error::Config("--trials must be positive and --N at least 2".into()));
            }
            let sp = SpaceSpec::new(space.parse()?)?;
            let lines = match sp.kind {
                SpaceKind::SU(n) => {
                    let rs = RootSystem::new(Family::A, n - 1)?;
                    let cut = cutoff.unwrap_or_else(|| default_cutoff(*level));
                    cfg.cutoff = Some(cut);
                    Some(limiting_spectrum(&rs, *level, cut)?)
                }
                SpaceKind::Sphere(_) => None,
                other => return Err(Error::Config(format!("simulate-gaussian supports su(n) and spheres, not {other}"))),
            };
            let c0 = match (&lines, sp.kind) {
                (Some(l), _) => l.iter().find(|x| x.lambda.coords.iter().all(|&c| c == 0)).map(|x| x.c).unwrap_or(f64::NAN),
                (None, SpaceKind::Sphere(n)) => crate::rankone::rankone_eigenvalue(&RankOneSpace::SphereR(n), 0, *level)?,
                _ => unreachable!(),
            };
            let per_trial = (0..*trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(cli.seed, t as u64);
                    let g = build_geometric_graph(&sp, *n_points, *level, &mut rng)?;
                    let sm = SpectralMeasure::from_adjacency(&g.adj)?.scaled(1.0 / *n_points as f64);
                    let top = sm.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    Ok((top, lines.as_ref().map(|l| gk_delta(&sm, l))))
                })
                .collect::<Result<Vec<_>>>()?;
            let tops: Vec<f64> = per_trial.iter().map(|p| p.0).collect();
            let deltas: Vec<Option<f64>> = per_trial.iter().map(|p| p.1).collect();
            let csv = csv_rows(
                "trial,top_over_n,gk_delta",
                per_trial.iter().enumerate().map(|(i, (t, d))| format!("{i},{t:.15e},{}", d.map_or("".into(), |d| format!("{d:.15e}")))),
            );
            (json!({ "c0": c0, "top_over_n": tops, "mean_top_over_n": mean(&tops), "gk_delta": deltas }), csv)
        }
        Command::RankoneTable { space, level, cutoff } => {
            cfg.command = "rankone-table".into();
            cfg.regime = Some(Regime::Gaussian);
            cfg.space = Some(space.clone());
            cfg.level = Some(*level);
            cfg.cutoff = Some(*cutoff as f64);
            let sp: RankOneSpace = space.parse()?;
            let rows = rankone_table(&sp, *level, *cutoff)?;
            (serde_json::to_value(&rows)?, table_csv(&rows))
        }
        Command::SimulatePoisson { space, n_points, ell, trials, radius, s_max } => {
            cfg.command = "simulate-poisson".into();
            cfg.regime = Some(Regime::Poisson);
            cfg.space = Some(space.clone());
            cfg.n_points = Some(*n_points);
            cfg.ell = Some(*ell);
            cfg.trials = Some(*trials);
            positive("ell", *ell)?;
            let sp = SpaceSpec::new(space.parse()?)?;
            let level = sp.poisson_level(*ell, *n_points);
            cfg.level = Some(level);
            cfg.extra = json!({ "radius": radius, "s_max": s_max });
            let cmp = bs_compare(&sp, *n_points, *ell, *radius, *trials, cli.seed)?;
            let moments: Vec<Vec<f64>> = (0..*trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(cli.seed ^ 0x9e37_79b9, t as u64);
                    let g = build_geometric_graph(&sp, *n_points, level, &mut rng)?;
                    Ok(empirical_moments(&SpectralMeasure::from_adjacency(&g.adj)?, *s_max))
                })
                .collect::<Result<Vec<_>>>()?;
            let est: Vec<Estimate> = (0..*s_max).map(|s| Estimate::from_samples(&moments.iter().map(|m| m[s]).collect::<Vec<_>>())).collect();
            let csv = csv_rows("s,moment,stderr", est.iter().enumerate().map(|(s, e)| format!("{},{:.15e},{:.15e}", s + 1, e.mean, e.stderr)));
            (json!({ "level": level, "tv_distance": cmp.tv_distance, "neighbourhoods": cmp, "moments": est }), csv)
        }
        Command::CircuitTable { s } => {
            cfg.command = "circuit-table".into();
            cfg.extra = json!({ "s": s });
            let rows = expansion_table(*s)?;
            let csv = csv_rows(
                "reduction,multiplicity,k",
                rows.iter().map(|r| format!("\"{}\",{},{}", r.reduced, r.multiplicity, r.k)),
            );
            (json!({ "total": rows.iter().map(|r| r.multiplicity).sum::<usize>(), "rows": table_json(&rows) }), csv)
        }
        Command::Moments { ell, s_max, trials } => {
            cfg.command = "moments".into();
            cfg.regime = Some(Regime::Poisson);
            cfg.space = Some("su2".into());
            cfg.ell = Some(*ell);
            cfg.trials = Some(*trials);
            cfg.extra = json!({ "s_max": s_max });
            positive("ell", *ell)?;
            let table = limiting_moments(*ell, *s_max, SimulationBudget { trials: *trials, seed: cli.seed })?;
            let csv = csv_rows(
                "s,moment,stderr,provenance",
                table.moments.iter().map(|m| {
                    let sim = m.terms.iter().any(|t| t.provenance == crate::moments::Provenance::Simulated);
                    format!("{},{:.15e},{:.15e},{}", m.s, m.value, m.stderr, if sim { "simulated" } else { "quadrature" })
                }),
            );
            (serde_json::to_value(&table)?, csv)
        }
        Command::Lr { family, max_coord } => {
            cfg.command = "lr".into();
            cfg.family = Some(family.clone());
            cfg.extra = json!({ "max_coord": max_coord });
            if *max_coord < 0 {
                return Err(Error::Config("--max-coord must be non-negative".into()));
            }
            let kind: CrystalType = family.parse()?;
            let rows = lr_table(kind, *max_coord)?;
            (serde_json::to_value(&rows)?, lr_csv(&rows))
        }
        Command::Volumes => {
            cfg.command = "volumes".into();
            let mut rows = Vec::new();
            for (f, n) in [(Family::A, 1), (Family::A, 2), (Family::A, 3), (Family::B, 2), (Family::C, 2), (Family::C, 3), (Family::D, 3), (Family::D, 4)] {
                let rs = RootSystem::new(f, n)?;
                let v = rs.volumes();
                rows.push(json!({
                    "root_system": format!("{f}{n}"),
                    "vol_t": v.vol_t_mod_tz,
                    "vol_t_closed_form": rs.torus_volume_closed_form(),
                    "vol_g_macdonald": v.vol_g_macdonald,
                    "vol_g_kp": v.vol_g_kp,
                    "relative_difference": (v.vol_g_kp / v.vol_g_macdonald - 1.0).abs(),
                }));
            }
            let su2 = SpaceSpec::new(SpaceKind::SU(2))?;
            let csv = csv_rows(
                "root_system,vol_t,vol_t_closed_form,vol_g_macdonald,vol_g_kp,relative_difference",
                rows.iter().map(|r| {
                    format!(
                        "{},{:.15e},{:.15e},{:.15e},{:.15e},{:.3e}",
                        r["root_system"].as_str().unwrap_or(""),
                        r["vol_t"].as_f64().unwrap_or(f64::NAN),
                        r["vol_t_closed_form"].as_f64().unwrap_or(f64::NAN),
                        r["vol_g_macdonald"].as_f64().unwrap_or(f64::NAN),
                        r["vol_g_kp"].as_f64().unwrap_or(f64::NAN),
                        r["relative_difference"].as_f64().unwrap_or(f64::NAN)
                    )
                }),
            );
            (json!({ "rows": rows, "su2_volume": su2.vol, "su2_volume_closed_form": 32.0 * 2f64.sqrt() * PI * PI }), csv)
        }
    };
    let hash = content_hash(&serde_json::to_string(&result)?);
    let summary = json!({ "config": cfg, "seed": cli.seed, "hash": hash, "result": result });
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&summary)? + "\n",
        Format::Csv => format!("# config: {}\n# hash: {hash}\n{csv}", serde_json::to_string(&cfg)?),
    };
    Ok(Artifact { text, summary })
}

/// Size the global worker pool from LIEGRAPH_THREADS, if set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("LIEGRAPH_THREADS") {
        let n: usize = v.parse().map_err(|_| Error::Config(format!("LIEGRAPH_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Error::Config("LIEGRAPH_THREADS must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("liegraph").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn circuit_table_six_has_nine_rows() {
        let a = run(&parse(&["circuit-table", "--s", "6"])).unwrap();
        let rows = a.summary["result"]["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 9);
        assert_eq!(a.summary["result"]["total"], 41);
    }

    #[test]
    fn su2_limit_spectrum_top_lines() {
        let a = run(&parse(&["limit-spectrum", "--space", "su2", "--L", "1.5708", "--top", "5"])).unwrap();
        let lines = a.summary["result"].as_array().unwrap();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0]["multiplicity"], 1);
        assert_eq!(lines[1]["multiplicity"], 4);
        assert!(lines[0]["c"].as_f64().unwrap() > lines[1]["c"].as_f64().unwrap());
    }

    #[test]
    fn identical_seeds_identical_bytes() {
        let args = ["--seed", "9", "--format", "csv", "simulate-poisson", "--space", "su2", "--N", "200", "--ell", "40", "--trials", "6"];
        let a = run(&parse(&args)).unwrap();
        let b = run(&parse(&args)).unwrap();
        assert_eq!(a.text, b.text);
        let c = run(&parse(&["--seed", "10", "--format", "csv", "simulate-poisson", "--space", "su2", "--N", "200", "--ell", "40", "--trials", "6"])).unwrap();
        assert_ne!(a.text, c.text);
    }

    #[test]
    fn config_round_trips() {
        let a = run(&parse(&["--seed", "3", "simulate-poisson", "--space", "su2", "--N", "100", "--ell", "10", "--trials", "2"])).unwrap();
        let cfg: ExperimentConfig = serde_json::from_value(a.summary["config"].clone()).unwrap();
        assert_eq!(serde_json::to_value(&cfg).unwrap(), a.summary["config"]);
        let sp = SpaceSpec::new(SpaceKind::SU(2)).unwrap();
        assert_eq!(cfg.level, Some(sp.poisson_level(10.0, 100)));
        assert_eq!(cfg.regime, Some(Regime::Poisson));
    }

    #[test]
    fn bad_combinations_are_explained() {
        let e = run(&parse(&["limit-spectrum", "--space", "su2", "--family", "A", "--n", "1", "--L", "1"])).unwrap_err();
        assert!(e.to_string().contains("cannot be combined"));
        let e = run(&parse(&["limit-spectrum", "--family", "A", "--L", "1"])).unwrap_err();
        assert!(e.to_string().contains("--n"));
        assert!(run(&parse(&["limit-spectrum", "--space", "su2", "--L", "4"])).is_err());
        assert!(run(&parse(&["moments", "--ell=-1"])).is_err());
    }

    #[test]
    fn hash_matches_result() {
        let a = run(&parse(&["volumes"])).unwrap();
        let h = content_hash(&serde_json::to_string(&a.summary["result"]).unwrap());
        assert_eq!(a.summary["hash"], h);
        assert_eq!(content_hash("").len(), 64);
    }
}
