//! Synthetic knowledge bases for benchmarking.

use std::fmt::Write as _;

/// A layered knowledge base with `width` presumptions per layer and `depth`
/// layers of rules. Every second layer also derives the complement of one
/// literal, so the graph carries conflict nodes.
pub fn layered_kb(width: usize, depth: usize) -> String {
    let mut src = String::from("algebra relevance fuzzy;\nalgebra intuition tags { A > B > C > D };\n");
    let tags = ["A", "B", "C", "D"];
    for w in 0..width {
        let v = 0.5 + 0.5 * (w as f64 + 1.0) / (width as f64 + 1.0);
        let _ = writeln!(src, "fact l0_{w} labels [{v}, {{{}}}];", tags[w % 4]);
    }
    for d in 1..=depth {
        for w in 0..width {
            let a = (w + d) % width;
            let b = (w + 2 * d) % width;
            let _ = writeln!(
                src,
                "rule r{d}_{w}: l{d}_{w} <- l{}_{a}, l{}_{b} labels [0.9, {{{}}}];",
                d - 1,
                d - 1,
                tags[(w + d) % 4]
            );
        }
        if d % 2 == 0 {
            let _ = writeln!(src, "rule c{d}: ~l{d}_0 <- l{}_1 labels [0.4, {{D}}];", d - 1);
        }
    }
    src
}

/// A chain of `n` conflicts that each feed back into the next claim.
pub fn conflict_chain(n: usize) -> String {
    let mut src = String::from("algebra relevance fuzzy;\n");
    for i in 0..n {
        let _ = writeln!(src, "fact ~p{i} labels [0.8];");
        let _ = writeln!(src, "rule r{i}: p{i} <- ~p{i} labels [0.6];");
        if i > 0 {
            let _ = writeln!(src, "rule s{i}: ~p{i} <- p{} labels [0.5];", i - 1);
        }
    }
    src
}
