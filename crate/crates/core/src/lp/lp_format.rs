use std::fmt::Write as _;

use super::{LinearProgram, Sense};

fn term(out: &mut String, first: &mut bool, coef: f64, name: &str) {
    if coef == 0.0 {
        return;
    }
    let sign = match (coef < 0.0, *first) {
        (true, true) => " -",
        (true, false) => " - ",
        (false, true) => " ",
        (false, false) => " + ",
    };
    let mag = coef.abs();
    if mag == 1.0 {
        let _ = write!(out, "{sign}{name}");
    } else {
        let _ = write!(out, "{sign}{mag} {name}");
    }
    *first = false;
}

/// Renders the program in CPLEX LP text format.
pub fn write_lp_format(lp: &LinearProgram) -> String {
    let mut out = String::from("\\ PCRPP relaxation\nMinimize\n obj:");
    let mut first = true;
    for (j, &c) in lp.objective.iter().enumerate() {
        term(&mut out, &mut first, c, &lp.names[j]);
    }
    if lp.constant != 0.0 || first {
        let _ = write!(out, " + {} constant", lp.constant);
    }
    out.push_str("\nSubject To\n");
    for (i, row) in lp.rows.iter().enumerate() {
        let name = row.name.clone().unwrap_or_else(|| format!("c{i}"));
        let _ = write!(out, " {name}:");
        let mut first = true;
        for &(j, v) in &row.coefs {
            term(&mut out, &mut first, v, &lp.names[j]);
        }
        if first {
            out.push_str(" 0 constant");
        }
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    if lp.constant != 0.0 || lp.objective.iter().all(|&c| c == 0.0) {
        let _ = writeln!(out, " constant = 1");
    }
    out.push_str("End\n");
    out
}
