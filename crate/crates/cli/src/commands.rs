use std::path::PathBuf;

use anyhow::{Context, Result};
use orbitlab_core::census::{build_census, growth_stats, zeta_truncation, CensusConfig};
use orbitlab_core::classify::classify_report;
use orbitlab_core::degenerate::{
    demand_schedule, persistence_count, split, DemandSequence, NormalForm, SplitConfig,
};
use orbitlab_core::eliminate::{eliminate, lambda0_slice, GaussianRational};
use orbitlab_core::genericity::{
    default_lambda0, margin_scaling, parabolic_control, run_sampler, CoefficientLaw, OrbitField,
    SampleConfig,
};
use orbitlab_core::solver::{solve, Method};
use orbitlab_core::{Error, Field, PolyMap, C64};
use serde_json::{json, Value};

use crate::record::{sha256_hex, RunRecord};
use crate::{
    render, CensusArgs, Cli, Command, EliminateArgs, Lemma2Args, ReplayArgs, SampleArgs,
    ScheduleArgs, SequenceArg, SplitArgs, SplitParams,
};

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    AssertionFailed(String),
}

/// Result of one command: the JSON document, side files, and provenance.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: String,
    pub json: Value,
    pub files: Vec<(PathBuf, String)>,
    pub status: Status,
    pub config: Value,
    pub map_hash: Option<String>,
    pub rng_seed: Option<u64>,
}

impl Outcome {
    fn new(command: &str, json: Value, config: Value) -> Self {
        Outcome {
            command: command.into(),
            json,
            files: Vec::new(),
            status: Status::Ok,
            config,
            map_hash: None,
            rng_seed: None,
        }
    }

    fn fail_if(mut self, failed: bool, msg: impl FnOnce() -> String) -> Self {
        if failed && self.status == Status::Ok {
            self.status = Status::AssertionFailed(msg());
        }
        self
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Census(a) => census(cli, a),
        Command::Sample(a) => sample(cli, a),
        Command::Split(a) => split_cmd(cli, a),
        Command::Schedule(a) => schedule(cli, a),
        Command::Lemma2(a) => lemma2(cli, a),
        Command::Eliminate(a) => eliminate_cmd(a),
        Command::Replay(a) => replay(a),
    }
}

fn census(cli: &Cli, args: &CensusArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&args.map)
        .with_context(|| format!("reading {}", args.map.display()))?;
    let map = PolyMap::from_json(&text)?;
    let mut solve_cfg = cli.tol.solve_config();
    if map.dim() >= 2 {
        solve_cfg.fallback_plan = Some(args.seeds.plan());
    }
    let config = CensusConfig {
        solve: solve_cfg,
        eta: cli.tol.eta,
    };
    let n_max = args.n_max as usize;
    let table = build_census(&map, n_max, &config)?;
    let order = args.zeta_order.map_or(n_max, |o| o as usize);
    let (zeta, zeta_error) = match zeta_truncation(&table, order) {
        Ok(z) => (Some(z), None),
        Err(e @ (Error::FlaggedRow { .. } | Error::InvalidConfig(_))) => {
            (None, Some(e.to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    let growth = growth_stats(&table);
    let flagged: Vec<String> = table
        .rows
        .iter()
        .filter(|r| !r.flags.is_empty() || r.unavailable.is_some())
        .map(|r| match &r.unavailable {
            Some(why) => format!("n={} unavailable: {why}", r.n),
            None => format!("n={} flagged {:?}", r.n, r.flags),
        })
        .collect();
    let bezout = table.bezout_violation();
    let mobius = table.mobius_violation();
    let json = json!({
        "schema": "orbitlab/census/v1",
        "table": table,
        "zeta": zeta,
        "zeta_error": zeta_error,
        "growth": growth,
    });
    let mut out = Outcome::new(
        "census",
        json,
        json!({"map": map.to_file(), "n_max": n_max, "zeta_order": order, "strict": args.strict, "census": config}),
    );
    out.map_hash = Some(map.hash());
    if let Some(path) = &args.csv {
        out.files.push((path.clone(), table.to_csv()));
    }
    Ok(out
        .fail_if(bezout.is_some(), || {
            format!(
                "census exceeds the Bezout bound at n = {}",
                bezout.unwrap_or(0)
            )
        })
        .fail_if(mobius.is_some(), || {
            format!("Mobius identity fails at n = {}", mobius.unwrap_or(0))
        })
        .fail_if(args.strict && !flagged.is_empty(), || flagged.join("; ")))
}

fn parse_lambda0(token: &str) -> Result<C64> {
    let t = token.trim();
    let v = match t {
        "i" => C64::new(0.0, 1.0),
        "-i" => C64::new(0.0, -1.0),
        _ => {
            let g = GaussianRational::parse(t)?;
            let (re, im) = g.to_f64();
            C64::new(re, im)
        }
    };
    Ok(v)
}

fn sample(cli: &Cli, args: &SampleArgs) -> Result<Outcome> {
    let lambda0 = if args.lambda0.is_empty() {
        default_lambda0()
    } else {
        args.lambda0
            .iter()
            .map(|s| parse_lambda0(s))
            .collect::<Result<Vec<_>>>()?
    };
    let mut solve_cfg = cli.tol.solve_config();
    solve_cfg.method = Method::Auto;
    let config = SampleConfig {
        dimension: args.n,
        degree: args.degree,
        k_max: args.k_max,
        trials: args.trials as usize,
        rng_seed: args.seed,
        law: CoefficientLaw::Uniform {
            low: -1.0,
            high: 1.0,
        },
        eps_ladder: args.eps.clone(),
        lambda0,
        lambda0_tol: args.lambda0_tol,
        eta: cli.tol.eta,
        orbit_field: if args.real_orbits {
            OrbitField::Real
        } else {
            OrbitField::Complex
        },
        seed_plan: (args.n >= 2).then(|| args.seeds.plan()),
        planted: if args.no_control {
            Vec::new()
        } else {
            vec![parabolic_control()]
        },
        solve: solve_cfg,
    };
    let report = run_sampler(&config)?;
    let scaling = margin_scaling(&report);
    let missed = report.controls.iter().any(|c| !c.detected);
    let mut out = Outcome::new(
        "sample",
        json!({
            "schema": "orbitlab/sample/v1",
            "report": report,
            "scaling": scaling,
        }),
        serde_json::to_value(&config)?,
    );
    out.rng_seed = Some(args.seed);
    if let Some(path) = &args.csv {
        out.files.push((path.clone(), report.to_csv()));
    }
    Ok(out.fail_if(missed, || {
        "a planted parabolic control was not detected".into()
    }))
}

fn split_config(cli: &Cli, p: &SplitParams) -> SplitConfig {
    SplitConfig {
        cap: p.cap,
        eta: cli.tol.eta,
        spacing: p.spacing,
        solve: cli.tol.solve_config(),
        ..SplitConfig::default()
    }
}

fn split_cmd(cli: &Cli, args: &SplitArgs) -> Result<Outcome> {
    let seed = NormalForm::new(args.order, args.params.leading, args.params.window)?;
    let config = split_config(cli, &args.params);
    let plan = split(&seed, args.count, &config)?;
    let kept = persistence_count(&plan, args.persistence, args.seed, &config)?;
    let mut out = Outcome::new(
        "split",
        json!({
            "schema": "orbitlab/split/v1",
            "plan": plan,
            "persistence": {
                "fraction": args.persistence,
                "count": kept,
                "preserved": kept == plan.target,
            },
        }),
        json!({"seed": seed, "count": args.count, "persistence": args.persistence, "split": config}),
    );
    out.map_hash = Some(plan.map.hash());
    out.rng_seed = Some(args.seed);
    Ok(out.fail_if(kept != plan.target, || {
        format!(
            "perturbation changed the count from {} to {kept}",
            plan.target
        )
    }))
}

fn schedule(cli: &Cli, args: &ScheduleArgs) -> Result<Outcome> {
    let seed = NormalForm::new(args.order, args.params.leading, args.params.window)?;
    let config = split_config(cli, &args.params);
    let seq = match args.sequence {
        SequenceArg::One => DemandSequence::One,
        SequenceArg::Linear => DemandSequence::Linear,
        SequenceArg::SelfPower => DemandSequence::SelfPower,
    };
    let outcome = demand_schedule(|n| seq.value(n), args.n1, &seed, &config)?;
    let satisfied = outcome.satisfied;
    let (got, need) = (outcome.p_n1, outcome.required);
    let mut out = Outcome::new(
        "schedule",
        json!({"schema": "orbitlab/schedule/v1", "outcome": outcome}),
        json!({"sequence": seq, "n1": args.n1, "seed": seed, "split": config}),
    );
    out.map_hash = Some(outcome.plan.map.hash());
    Ok(out.fail_if(!satisfied, || format!("P_n1 = {got} < {need}")))
}

fn lemma2(cli: &Cli, args: &Lemma2Args) -> Result<Outcome> {
    let n = args.n as usize;
    let k = args.period as usize;
    let map = PolyMap::power_map(n, args.degree, Field::Complex)?;
    let mut cfg = cli.tol.solve_config();
    if n >= 2 {
        cfg.method = Method::Newton {
            plan: args.seeds.plan(),
            rng_seed: args.seed,
        };
    }
    let expected = (args.degree as u128)
        .checked_pow((k * n) as u32)
        .ok_or(Error::DegreeCap {
            degree: u128::MAX,
            cap: cfg.degree_cap,
        })?;
    let mut report = solve(&map, k, &cfg)?;
    report.orbits = classify_report(&map, &report, cli.tol.eta)?;
    let found = report.points.len() as u128;
    let isolated = report.isolated_count() as u128;
    let all_hyperbolic = report.orbits.iter().all(|o| o.is_hyperbolic());
    let min_margin = report
        .orbits
        .iter()
        .map(|o| o.margin)
        .fold(f64::INFINITY, f64::min);
    let max_residual = report.points.iter().map(|p| p.residual).fold(0.0, f64::max);
    let ok = found == expected
        && isolated == expected
        && all_hyperbolic
        && min_margin >= args.min_margin
        && max_residual <= cfg.tolerances.residual;
    let mut out = Outcome::new(
        "lemma2",
        json!({
            "schema": "orbitlab/lemma2/v1",
            "n": n,
            "degree": args.degree,
            "period": k,
            "expected": expected.to_string(),
            "found": found.to_string(),
            "all_hyperbolic": all_hyperbolic,
            "min_margin": min_margin,
            "max_residual": max_residual,
            "passed": ok,
            "report": report,
        }),
        json!({"n": n, "degree": args.degree, "period": k, "min_margin": args.min_margin, "solve": cfg, "eta": cli.tol.eta}),
    );
    out.map_hash = Some(map.hash());
    out.rng_seed = (n >= 2).then_some(args.seed);
    Ok(out.fail_if(!ok, || {
        format!(
            "expected {expected} hyperbolic points with margin >= {}, found {found} \
             ({isolated} isolated, all hyperbolic: {all_hyperbolic}, min margin {min_margin}, \
             max residual {max_residual:e})",
            args.min_margin
        )
    }))
}

fn eliminate_cmd(args: &EliminateArgs) -> Result<Outcome> {
    let lambda0 = GaussianRational::parse(&args.lambda0)?;
    let (system, result) = eliminate(args.degree, args.period)?;
    let slice = lambda0_slice(&result, &lambda0)?;
    let certified = result.certificate.validates(&result.resultant) && slice.validates();
    let out = Outcome::new(
        "eliminate",
        json!({
            "schema": "orbitlab/eliminate/v1",
            "degree": args.degree,
            "period": args.period,
            "f1": system.f1.to_text(),
            "f2": system.f2.to_text(),
            "resultant_text": result.resultant.to_text(),
            "slice_text": {"re": slice.re.to_text(), "im": slice.im.to_text(), "scale": slice.scale},
            "result": result,
            "slice": slice,
        }),
        json!({"degree": args.degree, "period": args.period, "lambda0": lambda0.text()}),
    );
    Ok(out.fail_if(!certified, || {
        "nonzero certificate failed to validate".into()
    }))
}

fn replay(args: &ReplayArgs) -> Result<Outcome> {
    use clap::Parser;
    let rec = RunRecord::load(&args.record, args.index)?;
    let argv = std::iter::once("orbitlab".to_string()).chain(rec.args.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(Error::InvalidConfig("cannot replay a replay".into()).into());
    }
    let rerun = execute(&cli)?;
    let actual = sha256_hex(&render(&rerun)?);
    let matches = actual == rec.output_sha256;
    let out = Outcome::new(
        "replay",
        json!({
            "schema": "orbitlab/replay/v1",
            "command": rec.command,
            "args": rec.args,
            "expected_sha256": rec.output_sha256,
            "actual_sha256": actual,
            "matches": matches,
        }),
        json!({"record": args.record.display().to_string(), "index": args.index}),
    );
    Ok(out.fail_if(!matches, || {
        "replayed output differs from the record".into()
    }))
}
