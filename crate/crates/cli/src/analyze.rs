//! `analyze` subcommands. Every report is a single JSON document.

use std::collections::BTreeSet;

use popsim::analysis::gen::{random_spec, try_instance, OrderingInstance};
use popsim::analysis::reach::ReachGraph;
use popsim::analysis::{
    export_trace, output_dominance_check, reachable, scan_bottlenecks, suffix_ordering, validate_ordering, Counts, Expr,
    OrderingError, ProtocolSpec, SpecProtocol, Transition, TransitionSeq,
};
use popsim::experiment::{default_budget, run_spec_trial, SpecTrial};
use popsim::RngStream;
use serde_json::{json, Value};

use crate::args::{AnalyzeCommand, BottleneckArgs, DominanceArgs, OrderingArgs, ReachArgs};
use crate::run::{emit, load_spec, Failure};

const MAX_GENERATE_ATTEMPTS: usize = 10_000;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn write_json(path: Option<&std::path::Path>, v: &Value) -> Result<(), Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(runtime)?;
    s.push('\n');
    emit(path, s.as_bytes())
}

fn transition_name(spec: &ProtocolSpec, t: &Transition) -> String {
    format!("{},{}->{},{}", spec.name(t.r1), spec.name(t.r2), spec.name(t.p1), spec.name(t.p2))
}

fn init_counts(spec: &ProtocolSpec, text: &str) -> Result<Counts, Failure> {
    spec.parse_counts(text).map_err(usage)
}

pub fn analyze(cmd: &AnalyzeCommand) -> Result<u8, Failure> {
    match cmd {
        AnalyzeCommand::Reach(a) => reach(a),
        AnalyzeCommand::Decisions(a) => decisions(a),
        AnalyzeCommand::Dominance(a) => dominance(a),
        AnalyzeCommand::Bottlenecks(a) => bottlenecks(a),
        AnalyzeCommand::Ordering(a) => ordering(a),
    }
}

fn reach(a: &ReachArgs) -> Result<u8, Failure> {
    let spec = load_spec(&a.file)?;
    let c0 = init_counts(&spec, &a.init)?;
    let configs = reachable(&c0, &spec, a.cap).map_err(runtime)?;
    let report = json!({
        "protocol": a.file.display().to_string(),
        "init": spec.format_counts(&c0),
        "n": c0.size(),
        "count": configs.len(),
        "configurations": configs.iter().map(|c| spec.format_counts(c)).collect::<Vec<_>>(),
    });
    write_json(a.output.as_deref(), &report)?;
    Ok(0)
}

fn decisions(a: &ReachArgs) -> Result<u8, Failure> {
    let spec = load_spec(&a.file)?;
    let c0 = init_counts(&spec, &a.init)?;
    let graph = ReachGraph::explore(&c0, &spec, a.cap).map_err(runtime)?;
    let stable = graph.stable(&spec);
    let outputs: BTreeSet<u16> = stable.iter().flatten().copied().collect();
    let report = json!({
        "protocol": a.file.display().to_string(),
        "init": spec.format_counts(&c0),
        "reachable": graph.nodes.len(),
        "stable_configurations": stable.iter().filter(|s| s.is_some()).count(),
        "stable_decisions": outputs.iter().map(|&o| spec.symbol(o)).collect::<Vec<_>>(),
    });
    write_json(a.output.as_deref(), &report)?;
    Ok(0)
}

fn dominance(a: &DominanceArgs) -> Result<u8, Failure> {
    let spec = load_spec(&a.file)?;
    if a.n_max < 2 {
        return Err(usage("--n-max must be at least 2"));
    }
    let r = output_dominance_check(&spec, a.n_max, a.cap).map_err(runtime)?;
    let cx = r.counterexample.as_ref().map(|c| {
        json!({
            "c": spec.format_counts(&c.c),
            "decision": spec.symbol(c.decision),
            "c_prime": spec.format_counts(&c.c_prime),
            "c_double_prime": spec.format_counts(&c.c_double_prime),
            "other_decision": spec.symbol(c.other_decision),
        })
    });
    let report = json!({
        "protocol": a.file.display().to_string(),
        "n_max": a.n_max,
        "holds": r.holds,
        "initial_configs": r.initial_configs,
        "stable_configs": r.stable_configs,
        "derived_configs": r.derived_configs,
        "counterexample": cx,
    });
    write_json(a.output.as_deref(), &report)?;
    Ok(0)
}

/// Simulates `spec` from `c0` with a trace and converts it to a transition
/// sequence.
fn simulate_seq(
    spec: &ProtocolSpec,
    c0: &Counts,
    seed: u64,
    budget: Option<f64>,
) -> Result<(TransitionSeq, Option<String>), Failure> {
    let protocol = SpecProtocol { spec: spec.clone() };
    let start = protocol.population(c0).map_err(usage)?;
    let max_parallel_time = budget.unwrap_or_else(|| default_budget("file", c0.size()));
    let cfg = SpecTrial {
        protocol: &protocol,
        init: c0,
        max_parallel_time,
        trace: true,
    };
    let run = run_spec_trial(&cfg, seed).map_err(usage)?;
    let q = export_trace(spec.k(), start.agents(), run.trace.as_deref(), |s| *s).map_err(runtime)?;
    Ok((q, run.record.certificate_output))
}

fn bottlenecks(a: &BottleneckArgs) -> Result<u8, Failure> {
    let spec = load_spec(&a.file)?;
    let c0 = init_counts(&spec, &a.init)?;
    let f: Expr = a.f.parse().map_err(|e| usage(format!("--f: {e}")))?;
    let (q, output) = simulate_seq(&spec, &c0, a.seed, a.max_parallel_time)?;
    let hits = scan_bottlenecks(&q, |m| f.eval(m));
    let configs = q.configurations();
    let listed: Vec<Value> = hits
        .iter()
        .take(a.limit)
        .map(|(i, t)| {
            json!({
                "step": i,
                "transition": transition_name(&spec, t),
                "counts": [configs[*i].get(t.r1), configs[*i].get(t.r2)],
            })
        })
        .collect();
    let report = json!({
        "protocol": a.file.display().to_string(),
        "init": spec.format_counts(&c0),
        "seed": a.seed,
        "f": f.to_string(),
        "f_at_n": f.eval(c0.size()),
        "steps": q.len(),
        "certificate_output": output,
        "bottleneck_count": hits.len(),
        "bottlenecks": listed,
    });
    write_json(a.output.as_deref(), &report)?;
    Ok(0)
}

/// Runs the constructor and the independent validator on one instance.
fn ordering_report(inst: &OrderingInstance) -> (bool, Value) {
    let spec = &inst.spec;
    let k = spec.k();
    let mut report = json!({
        "protocol": spec.to_string(),
        "a": spec.name(inst.a),
        "b": inst.b,
        "x": spec.format_counts(&inst.x),
        "y": spec.format_counts(&inst.y),
        "steps": inst.q.len(),
    });
    let valid = match suffix_ordering(&inst.x, &inst.y, &inst.q, inst.b, k, inst.a) {
        Ok(res) => {
            let v = validate_ordering(&res, &inst.q, inst.b, &inst.y, inst.a);
            report["result"] = json!({
                "beta": res.beta,
                "order": res.order.iter().map(|&s| spec.name(s)).collect::<Vec<_>>(),
                "delta": res.delta.iter().map(|&s| spec.name(s)).collect::<Vec<_>>(),
                "witnesses": res.witnesses.iter().map(|w| json!({
                    "state": spec.name(w.state),
                    "transition": transition_name(spec, &w.transition),
                    "occurrences": w.occurrences,
                })).collect::<Vec<_>>(),
            });
            report["validation"] = json!(v);
            v.valid
        }
        Err(e) => {
            report["error"] = match &e {
                OrderingError::Precondition { clause, detail } => {
                    json!({ "kind": "precondition", "clause": clause, "detail": detail })
                }
                OrderingError::Invariant(m) => json!({ "kind": "invariant", "detail": m }),
            };
            false
        }
    };
    (valid, report)
}

fn ordering(a: &OrderingArgs) -> Result<u8, Failure> {
    let mut instances = Vec::new();
    if a.generate {
        if !(2..=16).contains(&a.k) {
            return Err(usage("--k must lie in 2..=16"));
        }
        if a.n < 2 {
            return Err(usage("--n must be at least 2"));
        }
        let mut rng = RngStream::new(a.seed);
        for i in 0..a.count {
            let inst = (0..MAX_GENERATE_ATTEMPTS)
                .find_map(|_| {
                    let spec = random_spec(a.k, 0.6, &mut rng);
                    try_instance(&spec, a.n, a.b, &mut rng)
                })
                .ok_or_else(|| {
                    runtime(format!(
                        "instance {i}: no precondition-satisfying instance with k={}, n={}, b={} in {MAX_GENERATE_ATTEMPTS} attempts",
                        a.k, a.n, a.b
                    ))
                })?;
            instances.push(inst);
        }
    } else {
        let path = a.file.as_ref().expect("clap requires --file without --generate");
        let spec = load_spec(path)?;
        let init = a.init.as_deref().ok_or_else(|| usage("--file needs --init"))?;
        let c0 = init_counts(&spec, init)?;
        let state = match &a.state {
            Some(name) => spec.state(name).ok_or_else(|| usage(format!("unknown state '{name}'")))?,
            None => spec.inputs()[0],
        };
        let (q, _) = simulate_seq(&spec, &c0, a.seed, a.max_parallel_time)?;
        // Cut the trace where the designated state first runs out.
        let configs = q.configurations();
        let cut = configs.iter().position(|c| c.get(state) == 0).unwrap_or(q.len());
        let q = TransitionSeq::new(c0.clone(), q.steps()[..cut].to_vec()).map_err(runtime)?;
        instances.push(OrderingInstance {
            y: q.final_config(),
            x: c0,
            q,
            spec,
            b: a.b,
            a: state,
        });
    }
    let mut reports = Vec::new();
    let mut valid = 0usize;
    for inst in &instances {
        let (ok, r) = ordering_report(inst);
        valid += ok as usize;
        reports.push(r);
    }
    let report = json!({
        "instances": instances.len(),
        "validated": valid,
        "reports": reports,
    });
    write_json(a.output.as_deref(), &report)?;
    Ok(if valid == instances.len() { 0 } else { 1 })
}
