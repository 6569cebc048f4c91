//! Domain text for the built-in benchmark problems.

use std::fmt::Write;

use crate::solver::{DiagKind, Diagnostic, Pos};

pub const NAMES: [&str; 3] = ["mars1d", "mars2d", "inventory"];

/// Bounds used where the problem statement gives none.
pub const MARS1D_BOX: (f64, f64) = (-100.0, 100.0);
pub const MARS1D_MOVE: (f64, f64) = (-20.0, 20.0);
pub const MARS2D_BOX: (f64, f64) = (-100.0, 100.0);
pub const INVENTORY_BOX: (f64, f64) = (0.0, 400.0);

/// Text of builtin `name`; `n` is the resource count for `inventory`.
pub fn builtin(name: &str, n: Option<usize>) -> Result<String, Diagnostic> {
    match (name, n) {
        ("mars1d", None) => Ok(mars1d()),
        ("mars2d", None) => Ok(mars2d()),
        ("inventory", Some(n)) if n >= 1 => Ok(inventory(n)),
        ("inventory", None) => Ok(inventory(1)),
        _ => Err(Diagnostic::new(
            DiagKind::UnknownBuiltin,
            Pos::default(),
            format!(
                "unknown builtin `{}`{}",
                name,
                n.map(|n| format!("({})", n)).unwrap_or_default()
            ),
        )),
    }
}

/// Resolve `mars1d`, `mars2d`, `inventory` or `inventory(n)` / `inventoryN`.
pub fn builtin_by_spec(spec: &str) -> Result<String, Diagnostic> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("inventory") {
        let digits = rest.trim_start_matches('(').trim_end_matches(')');
        if digits.is_empty() {
            return builtin("inventory", None);
        }
        if let Ok(n) = digits.parse::<usize>() {
            return builtin("inventory", Some(n));
        }
    }
    builtin(spec, None)
}

pub fn mars1d() -> String {
    format!(
        "domain mars1d

cvariables {{
  x in [{}, {}]
}}

bvariables {{
  tp1
  tp2
}}

discount 1;
horizon 6;

action move(a_x in [{}, {}]) {{
  tp1' = bernoulli(if tp1 | (x > 40 & x < 60) then 1.0 else 0.0);
  tp2' = bernoulli(if tp2 | (x > -60 & x < -40) then 1.0 else 0.0);
  x' = x + a_x;
}}

reward = (if tp1' & !tp1 & x > 50 then 40 - 0.2 * (x - 50)
          else if tp1' & !tp1 & x < 50 then 40 - 0.2 * (50 - x)
          else if tp1' & tp1 then 1.1
          else -2)
       + (if tp2' & !tp2 & x > -50 then 60 - 0.2 * (-x + 50)
          else if tp2' & !tp2 & x < -50 then 60 - 0.2 * (x + 50)
          else if tp2' & tp2 then 1.2
          else -1)
       - 0.1 * abs(a_x);
",
        MARS1D_BOX.0, MARS1D_BOX.1, MARS1D_MOVE.0, MARS1D_MOVE.1
    )
}

pub fn mars2d() -> String {
    format!(
        "domain mars2d

cvariables {{
  x in [{lo}, {hi}]
  y in [{lo}, {hi}]
}}

discount 1;
horizon 4;

action move(a_x in [-10, 10], a_y in [-10, 10]) {{
  x' = x + a_x;
  y' = y + a_y;
}}

reward = if x > y + 25 & x > -y + 25 & y > 0 then -10 + x - y
         else if x > y + 25 & x > -y + 25 & y < 0 then -10 + x + y
         else -1;
",
        lo = MARS2D_BOX.0,
        hi = MARS2D_BOX.1
    )
}

pub fn inventory(n: usize) -> String {
    let (lo, hi) = INVENTORY_BOX;
    let mut s = format!("domain inventory{}\n\ncvariables {{\n", n);
    for i in 1..=n {
        let _ = writeln!(s, "  x{} in [{}, {}]", i, lo, hi);
    }
    s.push_str("}\n\nbvariables {\n  d\n}\n\ndiscount 1;\nhorizon 4;\n");
    for i in 1..=n {
        let _ = write!(s, "\naction order{}() {{\n  d' = bernoulli(0.6);\n", i);
        for j in 1..=n {
            let x = format!("x{}", j);
            if i == j {
                let _ = writeln!(
                    s,
                    "  {x}' = if d' then (if {x} > 150 then {x} + 200 - 150 else 200) \
                     else (if {x} > 50 then {x} + 200 - 50 else 200);"
                );
            } else {
                let _ = writeln!(
                    s,
                    "  {x}' = if d' then (if {x} > 150 then {x} - 150 else 0) \
                     else (if {x} > 50 then {x} - 50 else 0);"
                );
            }
        }
        s.push_str("}\n");
    }
    // amount sold per resource: what the transition removes from stock
    let sold: Vec<String> = (1..=n)
        .map(|j| {
            let x = format!("x{}", j);
            format!("(if d' then (if {x} > 150 then 150 else {x}) else (if {x} > 50 then 50 else {x}))")
        })
        .collect();
    let _ = writeln!(s, "\nreward = {};", sold.join("\n       + "));
    s
}
