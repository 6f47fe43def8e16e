//! CSV, JSON-lines and table writers.

use std::io::Write;

use serde_json::json;

use crate::classical::TransientSample;
use crate::feasibility::{FeasibilityReport, Grade};
use crate::protocol::{HyperfineLevel, ProtocolResult};
use crate::Result;

pub const TRANSIENT_HEADER: &str = "t,x_harmonic,p_harmonic,x_freefall,p_freefall,dphi_harmonic,dphi_grav,rel_error";

pub fn write_transient_csv<W: Write>(w: &mut W, samples: &[TransientSample]) -> Result<()> {
    writeln!(w, "{TRANSIENT_HEADER}")?;
    for s in samples {
        let row = [s.t, s.x_harmonic, s.p_harmonic, s.x_freefall, s.p_freefall, s.dphi_harmonic, s.dphi_grav, s.rel_error];
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

fn level_name(l: HyperfineLevel) -> &'static str {
    match l {
        HyperfineLevel::Down => "down",
        HyperfineLevel::Up => "up",
    }
}

/// One JSON object per protocol step, components as parallel arrays.
pub fn write_steps_jsonl<W: Write>(w: &mut W, index: usize, run: &ProtocolResult) -> Result<()> {
    for rec in &run.steps {
        let c = &rec.state.components;
        let line = json!({
            "run": index,
            "step": rec.step,
            "label": rec.label,
            "levels": c.iter().map(|x| level_name(x.level)).collect::<Vec<_>>(),
            "re_alpha": c.iter().map(|x| x.motion.alpha.re).collect::<Vec<_>>(),
            "im_alpha": c.iter().map(|x| x.motion.alpha.im).collect::<Vec<_>>(),
            "re_weight": c.iter().map(|x| x.motion.weight.re).collect::<Vec<_>>(),
            "im_weight": c.iter().map(|x| x.motion.weight.im).collect::<Vec<_>>(),
        });
        writeln!(w, "{}", serde_json::to_string(&line)?)?;
    }
    Ok(())
}

pub fn write_protocol_summary_csv<W: Write>(w: &mut W, runs: &[ProtocolResult]) -> Result<()> {
    writeln!(w, "run,re_alpha,im_alpha,phi_grav,phi3,p_down,visibility,residual,squeeze_modulus")?;
    for (i, r) in runs.iter().enumerate() {
        let vals = [r.initial_alpha.re, r.initial_alpha.im, r.phi_grav, r.phi3, r.p_down, r.visibility, r.residual, r.squeeze_modulus];
        let cells: Vec<String> = vals.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{i},{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_feasibility_csv<W: Write>(w: &mut W, r: &FeasibilityReport) -> Result<()> {
    writeln!(w, "constraint,relation,lhs,rhs,margin,grade")?;
    for v in &r.verdicts {
        writeln!(w, "{},{},{:.16e},{:.16e},{:.16e},{}", v.name.replace(',', ";"), v.relation.symbol(), v.lhs, v.rhs, v.margin, v.grade)?;
    }
    Ok(())
}

/// Human-readable constraint table.
pub fn feasibility_table(r: &FeasibilityReport) -> String {
    let mut out = String::new();
    let width = r.verdicts.iter().map(|v| v.name.len()).max().unwrap_or(10);
    out.push_str(&format!("{:<width$}  {:>11}    {:>11}  {:>10}  grade\n", "constraint", "lhs", "rhs", "margin"));
    for v in &r.verdicts {
        out.push_str(&format!(
            "{:<width$}  {:>11.4e} {} {:>11.4e}  {:>10.3e}  {}\n",
            v.name,
            v.lhs,
            v.relation.symbol(),
            v.rhs,
            v.margin,
            v.grade
        ));
    }
    out.push('\n');
    for (k, v) in [
        ("omega_a [rad/s]", r.omega_a),
        ("trap width [m]", r.trap_width),
        ("tau_trap [s]", r.tau_trap),
        ("tau_exp [s]", r.tau_exp),
        ("eta", r.eta),
        ("Omega_gg [rad/s]", r.omega_gg),
        ("delta_x beam [m]", r.delta_x_beam),
        ("delta_x [m]", r.delta_x),
        ("phi_grav [rad]", r.phi_grav),
        ("phi3 [rad]", r.phi3),
    ] {
        out.push_str(&format!("{k:<18} {v:.6e}\n"));
    }
    for n in &r.notes {
        out.push_str(&format!("note: {n}\n"));
    }
    let worst = r.worst();
    out.push_str(&format!("overall: {}\n", if worst == Grade::Info { Grade::Pass } else { worst }));
    out
}

/// Sweep row: swept value, overall grade, then one margin per verdict.
pub fn write_sweep_csv<W: Write>(w: &mut W, parameter: &str, rows: &[(f64, FeasibilityReport)]) -> Result<()> {
    let names: Vec<String> = rows.first().map(|(_, r)| r.verdicts.iter().map(|v| v.name.replace(',', ";")).collect()).unwrap_or_default();
    let mut header = vec![parameter.to_string(), "grade".into(), "phi_grav".into()];
    header.extend(names.iter().map(|n| format!("margin[{n}]")));
    writeln!(w, "{}", header.join(","))?;
    for (value, r) in rows {
        let mut cells = vec![format!("{value:.16e}"), r.worst().to_string(), format!("{:.16e}", r.phi_grav)];
        cells.extend(r.verdicts.iter().map(|v| format!("{:.16e}", v.margin)));
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}
