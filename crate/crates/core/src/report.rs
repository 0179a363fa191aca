//! Plot-ready CSV renderings of a pseudo-time trace.
//!
//! Floats are written with 17 significant digits in scientific notation so
//! the files are bit-exact and reproducible.

use std::fmt::Write;

use crate::euler::GasModel;
use crate::shockfit::{PseudoStep, PseudoTimeTrace};
use crate::xdg::XdgField;

pub const HISTORY_HEADER: &str = "l,x_interface,bracket_lo,bracket_hi,i_p0,i_rho,i_mom,direction,euler_steps,residual_norm";
pub const SOLUTION_HEADER: &str = "x,species,rho,u,p,rho_p0";
pub const SUMMARY_HEADER: &str = "x_interface,shock_pos,error,converged,pseudo_steps,termination";

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn history_csv(trace: &PseudoTimeTrace) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for s in &trace.steps {
        let (i_p0, i_rho, i_mom) = match &s.indicators {
            Some(r) => (fmt_f64(r.i_p0), fmt_f64(r.i_rho), fmt_f64(r.i_mom)),
            None => ("nan".into(), "nan".into(), "nan".into()),
        };
        let direction = s.direction.map_or("none", |d| d.name());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            s.l,
            fmt_f64(s.x_interface),
            fmt_f64(s.bracket.lo),
            fmt_f64(s.bracket.hi),
            i_p0,
            i_rho,
            i_mom,
            direction,
            s.steady.euler_steps,
            fmt_f64(s.steady.residual_norm)
        )
        .unwrap();
    }
    out
}

/// Samples `points_per_element` equispaced points on every cut-cell,
/// endpoints included, so edges and the interface appear with both one-sided
/// limits.
pub fn solution_csv(field: &XdgField, gas: &GasModel, points_per_element: usize) -> String {
    let mut out = String::from(SOLUTION_HEADER);
    out.push('\n');
    let n = points_per_element.max(2);
    let space = field.space();
    for (e, el) in space.grid().elements().iter().enumerate() {
        let rho_p0 = field.element_mean(e)[0];
        for k in 0..n {
            let x = if k == n - 1 {
                el.x_hi
            } else {
                el.x_lo + (el.x_hi - el.x_lo) * k as f64 / (n - 1) as f64
            };
            let [rho, mom, energy] = field.element_value(e, x);
            let u = mom / rho;
            let p = (gas.gamma - 1.0) * (energy - 0.5 * mom * u);
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_f64(x),
                el.species.label(),
                fmt_f64(rho),
                fmt_f64(u),
                fmt_f64(p),
                fmt_f64(rho_p0)
            )
            .unwrap();
        }
    }
    out
}

pub fn step_solution_csv(step: &PseudoStep, gas: &GasModel, points_per_element: usize) -> String {
    solution_csv(&step.field, gas, points_per_element)
}

pub fn summary_csv(trace: &PseudoTimeTrace, shock_pos: f64) -> String {
    format!(
        "{SUMMARY_HEADER}\n{},{},{},{},{},{:?}\n",
        fmt_f64(trace.final_x),
        fmt_f64(shock_pos),
        fmt_f64((trace.final_x - shock_pos).abs()),
        trace.converged,
        trace.steps.len(),
        trace.termination
    )
}

/// One parsed row of `history.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub l: usize,
    pub x_interface: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub i_p0: f64,
    pub i_rho: f64,
    pub i_mom: f64,
    pub direction: String,
    pub euler_steps: usize,
    pub residual_norm: f64,
}

pub fn parse_history(text: &str) -> Result<Vec<HistoryRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == HISTORY_HEADER => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(format!("expected 10 fields in '{line}'"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| format!("{s}: {e}"));
            let int = |s: &str| s.parse::<usize>().map_err(|e| format!("{s}: {e}"));
            Ok(HistoryRow {
                l: int(f[0])?,
                x_interface: num(f[1])?,
                bracket_lo: num(f[2])?,
                bracket_hi: num(f[3])?,
                i_p0: num(f[4])?,
                i_rho: num(f[5])?,
                i_mom: num(f[6])?,
                direction: f[7].to_string(),
                euler_steps: int(f[8])?,
                residual_norm: num(f[9])?,
            })
        })
        .collect()
}
