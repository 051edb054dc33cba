//! Command implementations. Each returns JSON results, a CSV table and a
//! plain-text rendering.

use serde::Deserialize;
use serde_json::{json, Value};

use symbell::analysis::{geometric_measure, maximize_violation, OptimizeOptions};
use symbell::bell::BellExpression;
use symbell::lhv::{grouped_lhv_bound, lhv_bound_exhaustive};
use symbell::measurement::{BoxDistribution, SettingsProfile};
use symbell::monogamy::{
    build_monogamy_sum, build_monogamy_sum_q, lp_max_monogamy_sum, nonsignaling_check,
    strict_monogamy_audit,
};
use symbell::prescription::{dicke_sigma_settings, prescribe, v_g, v_l, w_settings_value};
use symbell::reference::{classify, TestKind};
use symbell::symstate::{majorana_points, StateSpec, SymmetricState, DEFAULT_CLUSTER_TOL};
use symbell::{Error, Result};

use crate::output::{cell, Report, Table};
use crate::parse::{
    analytic_settings, dicke_k, parse_groups, parse_range, ExprName, Family, SettingsSource,
};
use crate::{
    AuditArgs, ClassifyArgs, Command, EvalArgs, LhvArgs, MonogamyCommand, OptArgs, OptimizeArgs,
    ScanCommand, ScanNArgs, ScanThetaArgs, StateArgs, SumArgs,
};

pub fn run(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::State(a) => state(a),
        Command::Eval(a) => eval(a),
        Command::Optimize(a) => optimize(a),
        Command::Scan(ScanCommand::Theta(a)) => scan_theta(a),
        Command::Scan(ScanCommand::N(a)) => scan_n(a),
        Command::Lhv(a) => lhv(a),
        Command::Monogamy(MonogamyCommand::Audit(a)) => audit(a),
        Command::Monogamy(MonogamyCommand::Sum(a)) => sum(a),
        Command::Classify(a) => classify_cmd(a),
    }
}

fn keyed(results: Value, text: String) -> Report {
    Report {
        table: Table::flatten(&results),
        results,
        text,
    }
}

fn options(o: &OptArgs) -> OptimizeOptions {
    OptimizeOptions {
        symmetric_restriction: o.symmetric,
        starts: o.starts,
        seed: o.seed,
        tol: o.tol,
        max_iters: o.max_iters,
    }
}

fn load_state(text: &str) -> Result<(StateSpec, SymmetricState)> {
    let spec: StateSpec = text.parse()?;
    let state = SymmetricState::from_spec(&spec)?;
    Ok((spec, state))
}

fn state(a: &StateArgs) -> Result<Report> {
    let (spec, s) = load_state(&a.spec)?;
    let mut results = json!({
        "state": spec.to_string(),
        "n": s.n(),
        "coefficients": s.coeffs().iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
    });
    let mut text = format!("state {spec} (n = {})\n", s.n());
    for (k, c) in s.coeffs().iter().enumerate() {
        text += &format!("  D({},{k}): {:.10} {:+.10}i\n", s.n(), c.re, c.im);
    }
    let set = majorana_points(&s, DEFAULT_CLUSTER_TOL);
    if a.majorana {
        let pts: Vec<Value> = set
            .entries()
            .iter()
            .map(|e| json!({"theta": e.point.theta, "phi": e.point.phi, "multiplicity": e.multiplicity}))
            .collect();
        results["majorana"] = Value::Array(pts);
        text += "majorana points:\n";
        for e in set.entries() {
            text += &format!(
                "  theta {:.10} phi {:.10} x{}\n",
                e.point.theta, e.point.phi, e.multiplicity
            );
        }
    }
    if a.degeneracy {
        results["degeneracy"] = json!(set.degeneracy_profile());
        text += &format!("degeneracy: {:?}\n", set.degeneracy_profile());
    }
    if a.geometric {
        let g = geometric_measure(&s);
        results["geometric"] = json!({
            "e_g": g.e_g,
            "max_overlap_sq": g.max_overlap_sq,
            "theta": g.point.theta,
            "phi": g.point.phi,
        });
        text += &format!(
            "E_g: {:.10} (max overlap^2 {:.10})\n",
            g.e_g, g.max_overlap_sq
        );
    }
    Ok(keyed(results, text))
}

fn settings_for(
    source: &SettingsSource,
    spec: &StateSpec,
    state: &SymmetricState,
    expr: &BellExpression,
    opt: &OptArgs,
) -> Result<SettingsProfile> {
    let n = state.n();
    match source {
        SettingsSource::Prescribe => Ok(prescribe(state)?.settings),
        SettingsSource::Analytic => analytic_settings(spec, state),
        SettingsSource::Sigma => Ok(dicke_sigma_settings(n)),
        SettingsSource::Optimize => {
            Ok(maximize_violation(state, expr, &options(opt))?.best_settings)
        }
        SettingsSource::Angles(g) => SettingsSource::explicit(g, n),
    }
}

fn eval(a: &EvalArgs) -> Result<Report> {
    let (spec, s) = load_state(&a.state)?;
    let name: ExprName = a.expr.parse()?;
    let expr = name.build(s.n(), dicke_k(&spec))?;
    let source: SettingsSource = a.settings.parse()?;
    let sp = settings_for(&source, &spec, &s, &expr, &a.opt)?;
    let rep = expr.evaluate_state(&s, &sp)?;
    if !rep.value.is_finite() {
        return Err(Error::Numerical("non-finite expression value".into()));
    }
    let results = json!({
        "state": spec.to_string(),
        "expr": expr.name,
        "value": rep.value,
        "classical_bound": expr.classical_bound,
        "violation": rep.value > expr.classical_bound,
        "settings": sp.angles(),
        "terms": rep.terms.iter().map(|t| json!({"coefficient": t.coefficient, "probability": t.probability})).collect::<Vec<_>>(),
    });
    let text = format!(
        "{} on {spec}: {:.12} (classical bound {})\n",
        expr.name, rep.value, expr.classical_bound
    );
    Ok(keyed(results, text))
}

fn optimize(a: &OptimizeArgs) -> Result<Report> {
    let (spec, s) = load_state(&a.state)?;
    let expr = a.expr.parse::<ExprName>()?.build(s.n(), dicke_k(&spec))?;
    let r = maximize_violation(&s, &expr, &options(&a.opt))?;
    let cap = geometric_measure(&s).max_overlap_sq;
    let mut results = json!({
        "state": spec.to_string(),
        "expr": expr.name,
        "value": r.best_value,
        "classical_bound": expr.classical_bound,
        "entanglement_cap": cap,
        "settings": r.best_settings.angles(),
        "starts": r.starts.len(),
    });
    if a.all_starts {
        results["start_summaries"] = serde_json::to_value(&r.starts).unwrap_or(Value::Null);
    }
    let text = format!(
        "max {} on {spec}: {:.12} over {} starts (1/2^E_g = {:.10})\n",
        expr.name,
        r.best_value,
        r.starts.len(),
        cap
    );
    Ok(keyed(results, text))
}

fn csv_report(results: Value, table: Table) -> Report {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(&table.header);
    for r in &table.rows {
        let _ = w.write_record(r);
    }
    let text = w
        .into_inner()
        .map(|b| String::from_utf8_lossy(&b).into_owned())
        .unwrap_or_default();
    Report {
        results,
        table,
        text,
    }
}

fn scan_theta(a: &ScanThetaArgs) -> Result<Report> {
    if a.steps == 0 || !a.from.is_finite() || !a.to.is_finite() {
        return Err(Error::InvalidParameter(
            "need steps >= 1 and finite endpoints".into(),
        ));
    }
    let names = a
        .expr
        .iter()
        .map(|e| e.parse::<ExprName>())
        .collect::<Result<Vec<_>>>()?;
    let opts = options(&a.opt);
    let mut table = Table::new(&["theta", "expr", "value", "entanglement_cap"]);
    let mut rows = Vec::new();
    for i in 0..a.steps {
        let theta = if a.steps == 1 {
            a.from
        } else {
            a.from + (a.to - a.from) * i as f64 / (a.steps - 1) as f64
        };
        let s = SymmetricState::zzz_theta(theta)?;
        let cap = geometric_measure(&s).max_overlap_sq;
        for name in &names {
            let expr = name.build(s.n(), None)?;
            let v = maximize_violation(&s, &expr, &opts)?.best_value;
            table.push(vec![cell(theta), expr.name.clone(), cell(v), cell(cap)]);
            rows.push(
                json!({"theta": theta, "expr": expr.name, "value": v, "entanglement_cap": cap}),
            );
        }
    }
    Ok(csv_report(json!({ "rows": rows }), table))
}

/// Closed form attached to the named bases of a family, when one exists.
fn closed_form(family: Family, spec: &StateSpec, expr: &ExprName, n: usize) -> Option<f64> {
    match (family, expr) {
        (Family::W, ExprName::P) => Some(w_settings_value(n)),
        (Family::Ghz, ExprName::P) => Some(v_g(n)),
        (_, ExprName::L(k)) => {
            let sk = dicke_k(spec)?;
            if k.is_none_or(|k| k == sk) {
                v_l(n, sk).ok()
            } else {
                None
            }
        }
        _ => None,
    }
}

fn scan_n(a: &ScanNArgs) -> Result<Report> {
    let family: Family = a.state.parse()?;
    let name: ExprName = a.expr.parse()?;
    let source: SettingsSource = a.settings.parse()?;
    if matches!(source, SettingsSource::Angles(_)) {
        return Err(Error::Parse(
            "scan n takes prescribe, analytic, sigma or optimize".into(),
        ));
    }
    let (lo, hi) = parse_range(&a.n)?;
    let mut table = Table::new(&[
        "n",
        "state",
        "expr",
        "settings",
        "value",
        "closed_form",
        "entanglement_cap",
    ]);
    let mut rows = Vec::new();
    for n in lo..=hi {
        let spec = family.spec(n);
        let s = SymmetricState::from_spec(&spec)?;
        let expr = name.build(n, dicke_k(&spec))?;
        let sp = settings_for(&source, &spec, &s, &expr, &a.opt)?;
        let v = expr.evaluate_state(&s, &sp)?.value;
        if !v.is_finite() {
            return Err(Error::Numerical(format!("non-finite value at n = {n}")));
        }
        let cf = closed_form(family, &spec, &name, n);
        let cap = geometric_measure(&s).max_overlap_sq;
        table.push(vec![
            n.to_string(),
            spec.to_string(),
            expr.name.clone(),
            a.settings.clone(),
            cell(v),
            cf.map(cell).unwrap_or_default(),
            cell(cap),
        ]);
        rows.push(json!({
            "n": n, "state": spec.to_string(), "expr": expr.name, "settings": a.settings,
            "value": v, "closed_form": cf, "entanglement_cap": cap,
        }));
    }
    Ok(csv_report(json!({ "rows": rows }), table))
}

fn lhv(a: &LhvArgs) -> Result<Report> {
    let expr = a.expr.parse::<ExprName>()?.build(a.n, None)?;
    let (results, text) = match &a.groups {
        None => {
            let (v, st) = lhv_bound_exhaustive(&expr)?;
            let outcomes: Vec<[u8; 2]> = (0..a.n)
                .map(|i| [st.outcome(i, 0), st.outcome(i, 1)])
                .collect();
            (
                json!({
                    "expr": expr.name, "value": v, "classical_bound": expr.classical_bound,
                    "algebraic_max": expr.algebraic_max, "strategy_code": st.code, "outcomes": outcomes,
                }),
                format!(
                    "LHV bound of {}: {v} (strategy code {})\n",
                    expr.name, st.code
                ),
            )
        }
        Some(g) => {
            let blocks = parse_groups(g)?;
            let (v, st) = grouped_lhv_bound(&expr, &blocks)?;
            (
                json!({
                    "expr": expr.name, "value": v, "classical_bound": expr.classical_bound,
                    "algebraic_max": expr.algebraic_max, "blocks": st.blocks, "tables": st.tables,
                }),
                format!("grouped LHV bound of {} for {g}: {v}\n", expr.name),
            )
        }
    };
    Ok(keyed(results, text))
}

#[derive(Deserialize)]
struct BoxFile {
    n: usize,
    table: Vec<f64>,
}

fn load_box(spec: &str) -> Result<BoxDistribution> {
    let lower = spec.trim().to_ascii_lowercase();
    let parse_f = |x: &str| {
        x.parse::<f64>()
            .map_err(|_| Error::Parse(format!("invalid number '{x}'")))
    };
    if lower == "pr" {
        return Ok(BoxDistribution::pr_box());
    }
    if lower == "shared" {
        return BoxDistribution::from_fn(2, |_, o| if o == 0 || o == 3 { 0.5 } else { 0.0 });
    }
    if let Some(v) = lower.strip_prefix("pr:") {
        let v = parse_f(v)?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(
                "visibility must lie in [0, 1]".into(),
            ));
        }
        return BoxDistribution::pr_box().mix(&BoxDistribution::uniform(2)?, v);
    }
    if let Some(n) = lower.strip_prefix("uniform:") {
        let n = n
            .parse()
            .map_err(|_| Error::Parse(format!("invalid party count '{n}'")))?;
        return BoxDistribution::uniform(n);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| {
        Error::Parse(format!(
            "box '{spec}' is neither a named box nor a readable file: {e}"
        ))
    })?;
    let f: BoxFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("box file: {e}")))?;
    BoxDistribution::new(f.n, f.table)
}

fn audit(a: &AuditArgs) -> Result<Report> {
    let b = load_box(&a.box_spec)?;
    let r = strict_monogamy_audit(&b)?;
    let w = r.witness;
    let results = json!({
        "box": a.box_spec,
        "n": b.n(),
        "nonsignaling_error": nonsignaling_check(&b),
        "max_abs_correlation": r.max_abs_correlation,
        "monogamous": r.monogamous,
        "witness": {"settings": w.settings, "outcomes": w.outcomes, "extension_outcome": w.extension_outcome},
        "lp_count": r.lp_count,
    });
    let text = format!(
        "max |D| over nonsignaling extensions: {:.10} ({})\n",
        r.max_abs_correlation,
        if r.monogamous {
            "monogamous"
        } else {
            "shareable"
        }
    );
    Ok(keyed(results, text))
}

fn sum(a: &SumArgs) -> Result<Report> {
    let expr = match a.d {
        None => build_monogamy_sum(a.n, a.k, a.copies)?,
        Some(d) => build_monogamy_sum_q(a.n, d, a.k, a.copies)?,
    };
    let m = lp_max_monogamy_sum(&expr)?;
    let results = json!({
        "expr": expr.name,
        "parties": expr.n,
        "value": m.value,
        "bound": m.bound,
        "within_bound": m.within_bound,
    });
    let text = format!(
        "nonsignaling max of {}: {:.10} (bound {}; {})\n",
        expr.name,
        m.value,
        m.bound,
        if m.within_bound { "within" } else { "exceeded" }
    );
    Ok(keyed(results, text))
}

fn classify_cmd(a: &ClassifyArgs) -> Result<Report> {
    let test: TestKind = a.test.parse()?;
    let verdicts = classify(test, a.value)?;
    let mut table = Table::new(&["state", "bound", "excluded", "conditional", "message"]);
    let mut text = String::new();
    for v in &verdicts {
        table.push(vec![
            v.state.clone(),
            cell(v.bound),
            v.excluded.to_string(),
            v.conditional.to_string(),
            v.message.clone(),
        ]);
        text += &v.message;
        text.push('\n');
    }
    let results = json!({
        "test": test.to_string(),
        "value": a.value,
        "verdict": verdicts,
    });
    Ok(Report {
        results,
        table,
        text,
    })
}
