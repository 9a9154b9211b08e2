//! MPS and CPLEX LP text formats.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::MilpError;

use super::lp::{fmt_num, LinearProgram, Sense, VarKind};

/// Written in place of an infinite bound.
pub const MPS_INFINITY: f64 = 1e20;

const OBJ_ROW: &str = "obj";

fn bound_value(v: f64) -> f64 {
    if v.is_infinite() {
        MPS_INFINITY.copysign(v)
    } else {
        v
    }
}

fn field(out: &mut String, code: &str, a: &str, b: &str, c: &str) {
    let _ = writeln!(out, " {code:<2} {a:<12} {b:<12} {c:>16}");
}

/// Fixed-column MPS text; sections and entries in natural name order.
pub fn write_mps(lp: &LinearProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", lp.name);
    out.push_str("OBJSENSE\n    MAX\n");
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJ_ROW}");
    let rows = lp.sorted_rows();
    for &i in &rows {
        let code = match lp.rows[i].sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        let _ = writeln!(out, " {code:<2} {}", lp.rows[i].name);
    }

    // Column-major view in row order.
    let mut rank = vec![0usize; lp.rows.len()];
    for (r, &i) in rows.iter().enumerate() {
        rank[i] = r;
    }
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.variables.len()];
    for (i, row) in lp.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            columns[j].push((i, a));
        }
    }
    let mut obj = vec![0.0; lp.variables.len()];
    for &(j, c) in &lp.objective {
        obj[j] += c;
    }

    out.push_str("COLUMNS\n");
    let mut in_marker = false;
    let mut markers = 0usize;
    for j in lp.sorted_vars() {
        let var = &lp.variables[j];
        let integer = var.kind == VarKind::Binary;
        if integer != in_marker {
            let tag = if integer { "'INTORG'" } else { "'INTEND'" };
            field(&mut out, "", &format!("MARKER{markers}"), "'MARKER'", tag);
            if !integer {
                markers += 1;
            }
            in_marker = integer;
        }
        let mut entries = columns[j].clone();
        entries.sort_by_key(|&(i, _)| rank[i]);
        if obj[j] != 0.0 {
            field(&mut out, "", &var.name, OBJ_ROW, &fmt_num(obj[j]));
        }
        for (i, a) in entries {
            field(&mut out, "", &var.name, &lp.rows[i].name, &fmt_num(a));
        }
        if columns[j].is_empty() && obj[j] == 0.0 {
            field(&mut out, "", &var.name, OBJ_ROW, "0");
        }
    }
    if in_marker {
        field(&mut out, "", &format!("MARKER{markers}"), "'MARKER'", "'INTEND'");
    }

    out.push_str("RHS\n");
    for &i in &rows {
        let row = &lp.rows[i];
        if row.rhs != 0.0 {
            field(&mut out, "", "RHS", &row.name, &fmt_num(row.rhs));
        }
    }

    out.push_str("BOUNDS\n");
    for j in lp.sorted_vars() {
        let var = &lp.variables[j];
        match var.kind {
            VarKind::Binary => {
                let _ = writeln!(out, " BV BND          {}", var.name);
            }
            VarKind::Continuous => {
                if var.lower != 0.0 {
                    field(&mut out, "LO", "BND", &var.name, &fmt_num(bound_value(var.lower)));
                }
                field(&mut out, "UP", "BND", &var.name, &fmt_num(bound_value(var.upper)));
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

fn parse_bound(v: f64) -> f64 {
    if v >= MPS_INFINITY {
        f64::INFINITY
    } else if v <= -MPS_INFINITY {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Read MPS text (fixed or free layout, names without spaces).
pub fn read_mps(text: &str, path: &Path) -> Result<LinearProgram, MilpError> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        ObjSense,
        Rows,
        Columns,
        Rhs,
        Bounds,
    }
    let mut lp = LinearProgram::new("");
    let mut section = Section::None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut row_coeffs: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut row_meta: Vec<(String, Sense, f64)> = Vec::new();
    let mut objective: Vec<(usize, f64)> = Vec::new();
    let mut obj_name = String::from(OBJ_ROW);
    let mut integer = false;
    let mut maximize = false;
    let err = |line: usize, msg: &str| MilpError::parse(path, line, msg);
    let num = |line: usize, s: &str| -> Result<f64, MilpError> {
        s.parse::<f64>().map_err(|_| err(line, &format!("bad number `{s}`")))
    };

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = match tokens[0] {
                "NAME" => {
                    lp.name = tokens.get(1).unwrap_or(&"").to_string();
                    Section::None
                }
                "OBJSENSE" => {
                    if let Some(s) = tokens.get(1) {
                        maximize = *s == "MAX" || *s == "MAXIMIZE";
                    }
                    Section::ObjSense
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "RANGES" => return Err(err(line, "RANGES are not supported")),
                "ENDATA" => break,
                other => return Err(err(line, &format!("unknown section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::None => return Err(err(line, "data outside a section")),
            Section::ObjSense => maximize = tokens[0] == "MAX" || tokens[0] == "MAXIMIZE",
            Section::Rows => {
                if tokens.len() != 2 {
                    return Err(err(line, "row line needs a type and a name"));
                }
                let sense = match tokens[0] {
                    "N" => {
                        obj_name = tokens[1].to_string();
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    t => return Err(err(line, &format!("unknown row type `{t}`"))),
                };
                row_index.insert(tokens[1].to_string(), row_meta.len());
                row_meta.push((tokens[1].to_string(), sense, 0.0));
                row_coeffs.push(Vec::new());
            }
            Section::Columns => {
                if tokens.len() >= 3 && tokens[1] == "'MARKER'" {
                    integer = tokens[2] == "'INTORG'";
                    continue;
                }
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(err(line, "column line needs 3 or 5 fields"));
                }
                let name = tokens[0];
                let j = match lp.var(name) {
                    Some(j) => j,
                    None => {
                        let kind = if integer { VarKind::Binary } else { VarKind::Continuous };
                        let upper = if integer { 1.0 } else { f64::INFINITY };
                        lp.add_var(name.to_string(), kind, 0.0, upper)
                    }
                };
                for pair in tokens[1..].chunks(2) {
                    let a = num(line, pair[1])?;
                    if pair[0] == obj_name {
                        if a != 0.0 {
                            objective.push((j, a));
                        }
                    } else {
                        let &i = row_index
                            .get(pair[0])
                            .ok_or_else(|| err(line, &format!("unknown row `{}`", pair[0])))?;
                        row_coeffs[i].push((j, a));
                    }
                }
            }
            Section::Rhs => {
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(err(line, "rhs line needs 3 or 5 fields"));
                }
                for pair in tokens[1..].chunks(2) {
                    let &i = row_index
                        .get(pair[0])
                        .ok_or_else(|| err(line, &format!("unknown row `{}`", pair[0])))?;
                    row_meta[i].2 = num(line, pair[1])?;
                }
            }
            Section::Bounds => {
                if tokens.len() < 3 {
                    return Err(err(line, "bound line too short"));
                }
                let j = lp
                    .var(tokens[2])
                    .ok_or_else(|| err(line, &format!("unknown column `{}`", tokens[2])))?;
                let value = || -> Result<f64, MilpError> {
                    let s = tokens.get(3).ok_or_else(|| err(line, "missing bound value"))?;
                    num(line, s).map(parse_bound)
                };
                let var = &mut lp.variables[j];
                match tokens[0] {
                    "BV" => {
                        var.kind = VarKind::Binary;
                        var.lower = 0.0;
                        var.upper = 1.0;
                    }
                    "UP" => {
                        var.upper = value()?;
                        var.kind = VarKind::Continuous;
                    }
                    "LO" => var.lower = value()?,
                    "FX" => {
                        let v = value()?;
                        var.lower = v;
                        var.upper = v;
                    }
                    "FR" => {
                        var.lower = f64::NEG_INFINITY;
                        var.upper = f64::INFINITY;
                    }
                    "MI" => var.lower = f64::NEG_INFINITY,
                    "PL" => var.upper = f64::INFINITY,
                    t => return Err(err(line, &format!("unknown bound type `{t}`"))),
                }
            }
        }
    }
    if !maximize {
        return Err(err(0, "only maximisation models are supported"));
    }
    for ((name, sense, rhs), coeffs) in row_meta.into_iter().zip(row_coeffs) {
        lp.add_row(name, coeffs, sense, rhs);
    }
    lp.objective = objective;
    Ok(lp)
}

/// CPLEX LP text.
pub fn write_lp(lp: &LinearProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", lp.name);
    out.push_str("Maximize\n");
    let mut objective: Vec<(usize, f64)> = lp.objective.clone();
    let order = lp.sorted_vars();
    let mut rank = vec![0usize; lp.variables.len()];
    for (r, &j) in order.iter().enumerate() {
        rank[j] = r;
    }
    objective.sort_by_key(|&(j, _)| rank[j]);
    write_expr(&mut out, &format!(" {OBJ_ROW}:"), lp, &objective, order.first().copied());
    out.push('\n');
    out.push_str("Subject To\n");
    for i in lp.sorted_rows() {
        let row = &lp.rows[i];
        let mut coeffs = row.coeffs.clone();
        coeffs.sort_by_key(|&(j, _)| rank[j]);
        write_expr(&mut out, &format!(" {}:", row.name), lp, &coeffs, order.first().copied());
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", fmt_num(row.rhs));
    }
    out.push_str("Bounds\n");
    for &j in &order {
        let var = &lp.variables[j];
        if var.kind == VarKind::Continuous {
            let _ = writeln!(
                out,
                " {} <= {} <= {}",
                fmt_num(bound_value(var.lower)),
                var.name,
                fmt_num(bound_value(var.upper))
            );
        }
    }
    out.push_str("Binaries\n");
    for &j in &order {
        if lp.variables[j].kind == VarKind::Binary {
            let _ = writeln!(out, " {}", lp.variables[j].name);
        }
    }
    out.push_str("End\n");
    out
}

fn write_expr(out: &mut String, label: &str, lp: &LinearProgram, terms: &[(usize, f64)], filler: Option<usize>) {
    out.push_str(label);
    if terms.is_empty() {
        if let Some(j) = filler {
            let _ = write!(out, " 0 {}", lp.variables[j].name);
        }
        return;
    }
    for (k, &(j, a)) in terms.iter().enumerate() {
        if k > 0 && k % 8 == 0 {
            out.push_str("\n   ");
        }
        let sign = if a < 0.0 { "-" } else { "+" };
        let mag = a.abs();
        if mag == 1.0 {
            let _ = write!(out, " {sign} {}", lp.variables[j].name);
        } else {
            let _ = write!(out, " {sign} {} {}", fmt_num(mag), lp.variables[j].name);
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), MilpError> {
    std::fs::write(path, text).map_err(|e| MilpError::io(path, e))
}

pub fn read_mps_file(path: &Path) -> Result<LinearProgram, MilpError> {
    let text = std::fs::read_to_string(path).map_err(|e| MilpError::io(path, e))?;
    read_mps(&text, path)
}
