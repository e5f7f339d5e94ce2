//! Text, JSON and DOT renderings of an [`Evaluation`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::acceptability::Status;
use crate::graph::export_dot;
use crate::Evaluation;

fn paint(status: Status, color: bool) -> String {
    if !color {
        return status.name().to_string();
    }
    let code = match status {
        Status::Assured => "32",
        Status::Unchallenged => "36",
        Status::Weakened => "33",
        Status::Rejected => "31",
    };
    format!("\x1b[{code}m{}\x1b[0m", status.name())
}

/// Claims in key order with their labels and statuses, then the status sets
/// of every algebra.
pub fn render_text(eval: &Evaluation, color: bool) -> String {
    let labeling = &eval.labeling;
    let algebras = labeling.algebras();
    let mut out = String::new();
    if labeling.keys().is_empty() {
        out.push_str("no claims\n");
        return out;
    }

    let mut header = vec!["claim".to_string()];
    for alg in algebras {
        header.push(format!("{} mu+", alg.name));
        header.push(format!("{} mu-", alg.name));
        header.push(format!("{} status", alg.name));
    }
    header.push("combined".to_string());

    let mut rows = Vec::new();
    for (i, key) in labeling.keys().iter().enumerate() {
        let statuses = &eval.statuses.nodes[key];
        let mut row = vec![(key.clone(), None)];
        for (a, alg) in algebras.iter().enumerate() {
            row.push((alg.render(labeling.plus_at(a, i)), None));
            row.push((alg.render(labeling.minus_at(a, i)), None));
            let s = statuses.per_algebra[a];
            row.push((s.name().to_string(), Some(s)));
        }
        match statuses.combined {
            Some(s) => row.push((s.name().to_string(), Some(s))),
            None => row.push(("-".to_string(), None)),
        }
        rows.push(row);
    }

    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].0.chars().count()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<(String, Option<Status>)>| {
        let last = cells.len() - 1;
        let mut s = String::new();
        for (c, (text, status)) in cells.into_iter().enumerate() {
            let pad = widths[c] - text.chars().count();
            match status {
                Some(st) => s.push_str(&paint(st, color)),
                None => s.push_str(&text),
            }
            if c != last {
                s.push_str(&" ".repeat(pad + 2));
            }
        }
        s.push('\n');
        s
    };
    out.push_str(&line(header.into_iter().map(|h| (h, None)).collect()));
    for row in rows {
        out.push_str(&line(row));
    }

    for (alg, partition) in algebras.iter().zip(&eval.statuses.partitions) {
        let _ = writeln!(out, "\nstatus sets ({}):", alg.name);
        for status in Status::ALL {
            let members: Vec<&str> = partition.get(status).iter().map(String::as_str).collect();
            let _ = writeln!(out, "  {:<12} {{{}}}", status.name(), members.join(", "));
        }
    }
    let _ = writeln!(
        out,
        "\nsolver: converged, {} sweep(s) over cyclic components, {} component(s)",
        eval.solver.iterations,
        eval.solver.evaluation_order.len()
    );
    out
}

/// Labels, statuses and the solver report as one JSON document.
pub fn render_json(eval: &Evaluation) -> String {
    let doc = serde_json::json!({
        "labels": eval.labeling.to_json(),
        "statuses": eval.statuses.to_json(),
        "solver": eval.solver,
    });
    serde_json::to_string_pretty(&doc).expect("report serializes")
}

/// DOT with `mu+`/`mu-` per algebra and the combined status on each I-node.
pub fn render_dot(eval: &Evaluation) -> String {
    let labeling = &eval.labeling;
    let mut lines: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, key) in labeling.keys().iter().enumerate() {
        let mut text = Vec::new();
        for (a, alg) in labeling.algebras().iter().enumerate() {
            text.push(format!(
                "{}: +{} -{}",
                alg.name,
                alg.render(labeling.plus_at(a, i)),
                alg.render(labeling.minus_at(a, i))
            ));
        }
        if let Some(s) = eval.statuses.nodes[key].combined {
            text.push(s.name().to_string());
        }
        lines.insert(key.clone(), text);
    }
    export_dot(&eval.graph, Some(&lines))
}
