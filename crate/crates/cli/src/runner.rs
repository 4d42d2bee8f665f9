//! Executes a scenario into CSV tables.

use calr_core::{
    calr_diagnostic, dissipated_energy, dual_bound_r1, dual_bound_r2, eta_sweep, primal_bound_crc,
    primal_bound_nr1, BoundKind, BoundPart, BoundReport, Coupling, CrcMode, Error, FieldEvaluator,
    SourceSpectrum, SphericalPoint, SweepTemplate,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::scenario::{BoundFamily, Output, Scenario};

pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointStatus {
    pub output: &'static str,
    pub eta: f64,
    pub status: String,
}

#[derive(Default, Serialize)]
pub struct Summary {
    pub verdict: Option<String>,
    pub growth_slope: Option<f64>,
    pub calr_trend: Option<String>,
    pub probe_radius: Option<f64>,
}

pub struct RunOutput {
    pub tables: Vec<(Output, Table)>,
    pub points: Vec<PointStatus>,
    pub warnings: Vec<String>,
    pub summary: Summary,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Precondition(m) => RunError::Precondition(m),
            other => RunError::Invalid(other.to_string()),
        }
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

struct Context<'a> {
    scenario: &'a Scenario,
    template: SweepTemplate,
    coupling: Coupling,
    src: SourceSpectrum,
    etas: Vec<f64>,
}

/// Validates the scenario against the library and the requested bound
/// families without running the sweeps.
pub fn check(scenario: &Scenario, k_max: Option<usize>) -> Result<(), RunError> {
    let ctx = context(scenario, k_max)?;
    for family in &scenario.bounds {
        evaluate_bound(&ctx, *family, ctx.etas[0])?;
    }
    Ok(())
}

fn context(scenario: &Scenario, k_max: Option<usize>) -> Result<Context<'_>, RunError> {
    let (template, coupling) = scenario.template()?;
    let src = scenario.spectrum(k_max)?;
    let etas = scenario.etas();
    template.config_at(etas[0], coupling)?.0.validate()?;
    Ok(Context {
        scenario,
        template,
        coupling,
        src,
        etas,
    })
}

pub fn run(scenario: &Scenario, k_max: Option<usize>) -> Result<RunOutput, RunError> {
    check(scenario, k_max)?;
    let ctx = context(scenario, k_max)?;
    let mut out = RunOutput {
        tables: Vec::new(),
        points: Vec::new(),
        warnings: Vec::new(),
        summary: Summary::default(),
    };
    for output in &scenario.outputs {
        let table = match output {
            Output::EnergySweep => energy_table(&ctx, &mut out)?,
            Output::Bounds => bounds_table(&ctx, &mut out),
            Output::FieldProfile => profile_table(&ctx, &mut out)?,
            Output::CalrDiagnostic => calr_table(&ctx, &mut out)?,
        };
        out.tables.push((*output, table));
    }
    Ok(out)
}

fn record(out: &mut RunOutput, output: Output, eta: f64, status: &str) {
    if status != "ok" {
        out.warnings.push(format!("{} at eta = {eta:e}: {status}", output.file_name()));
    }
    out.points.push(PointStatus {
        output: output.file_name(),
        eta,
        status: status.to_string(),
    });
}

fn energy_table(ctx: &Context, out: &mut RunOutput) -> Result<Table, RunError> {
    let sweep = eta_sweep(&ctx.template, &ctx.src, &ctx.etas, ctx.coupling)?;
    let slope = sweep.growth_fit.map(|f| f.slope);
    out.summary.verdict = Some(sweep.verdict.to_string());
    out.summary.growth_slope = slope;
    let mut rows = Vec::new();
    for p in &sweep.points {
        let (energy, tail, status) = match &p.result {
            Ok(b) => (num(b.total_f64()), num(b.tail_bound), "ok".to_string()),
            Err(e) => (String::new(), String::new(), e.to_string()),
        };
        record(out, Output::EnergySweep, p.eta, &status);
        rows.push(vec![
            num(p.eta),
            p.selection.map(|s| s.k.to_string()).unwrap_or_default(),
            energy,
            tail,
            opt(slope),
            sweep.verdict.to_string(),
            status,
        ]);
    }
    Ok(Table {
        header: &["eta", "k_eta", "energy", "tail_bound", "growth_slope", "verdict", "status"],
        rows,
    })
}

fn evaluate_bound(ctx: &Context, family: BoundFamily, eta: f64) -> Result<BoundReport, Error> {
    let (cfg, sel) = ctx.template.config_at(eta, ctx.coupling)?;
    let lambda = ctx.scenario.lambda.into();
    match family {
        BoundFamily::PrimalNr1 => primal_bound_nr1(&cfg, &ctx.src, eta),
        BoundFamily::PrimalCrcFixed => primal_bound_crc(&cfg, &ctx.src, eta, CrcMode::FixedK0),
        BoundFamily::PrimalCrcAdaptive => primal_bound_crc(&cfg, &ctx.src, eta, CrcMode::AdaptiveK),
        BoundFamily::DualR1 => {
            let k0 = match (ctx.coupling, sel) {
                (Coupling::Fixed(k), _) => k,
                (_, Some(s)) => s.k,
                _ => 1,
            };
            dual_bound_r1(&cfg, &ctx.src, k0, eta, lambda)
        }
        BoundFamily::DualR2 => dual_bound_r2(&cfg, &ctx.src, eta, lambda),
    }
}

fn bounds_table(ctx: &Context, out: &mut RunOutput) -> Table {
    let mut rows = Vec::new();
    for family in &ctx.scenario.bounds {
        let results: Vec<(f64, Result<BoundReport, Error>, Option<f64>)> = ctx
            .etas
            .par_iter()
            .map(|&eta| {
                let energy = ctx
                    .template
                    .config_at(eta, ctx.coupling)
                    .and_then(|(cfg, _)| dissipated_energy(&cfg, &ctx.src))
                    .ok()
                    .map(|b| b.total_f64());
                (eta, evaluate_bound(ctx, *family, eta), energy)
            })
            .collect();
        for (eta, result, energy) in results {
            let row = match &result {
                Ok(r) => {
                    record(out, Output::Bounds, eta, "ok");
                    vec![
                        num(eta),
                        family.name().to_string(),
                        match r.kind {
                            BoundKind::Primal => "primal",
                            BoundKind::Dual => "dual",
                        }
                        .to_string(),
                        r.k_eta.map(|k| k.to_string()).unwrap_or_default(),
                        num(r.value),
                        num(r.part(BoundPart::SourcePairing)),
                        num(r.part(BoundPart::VEnergy)),
                        num(r.part(BoundPart::WEnergy)),
                        num(r.part(BoundPart::PsiEnergy)),
                        num(r.max_constraint_residual),
                        opt(r.optimal_lambda),
                        opt(r.optimal_value),
                        opt(r.envelope.map(|e| e.value)),
                        opt(energy),
                        "ok".to_string(),
                    ]
                }
                Err(e) => {
                    let status = e.to_string();
                    record(out, Output::Bounds, eta, &status);
                    let mut row = vec![num(eta), family.name().to_string()];
                    row.extend(std::iter::repeat(String::new()).take(11));
                    row.push(opt(energy));
                    row.push(status);
                    row
                }
            };
            rows.push(row);
        }
    }
    Table {
        header: &[
            "eta",
            "family",
            "kind",
            "k_eta",
            "value",
            "source_pairing",
            "v_energy",
            "w_energy",
            "psi_energy",
            "max_residual",
            "optimal_lambda",
            "optimal_value",
            "envelope",
            "energy",
            "status",
        ],
        rows,
    }
}

fn profile_table(ctx: &Context, out: &mut RunOutput) -> Result<Table, RunError> {
    let p = ctx.scenario.profile.expect("validated");
    let eta = p.eta.unwrap_or(*ctx.etas.last().expect("nonempty grid"));
    let (cfg, _) = ctx.template.config_at(eta, ctx.coupling)?;
    let ev = FieldEvaluator::new(&cfg, &ctx.src)?;
    let rows: Vec<Vec<String>> = (0..p.points)
        .into_par_iter()
        .map(|i| {
            let r = p.r_min + (p.r_max - p.r_min) * i as f64 / (p.points - 1) as f64;
            let head = vec![num(eta), num(r), num(p.theta), num(p.phi)];
            match ev.eval(SphericalPoint::new(r, p.theta, p.phi)) {
                Ok(s) => {
                    let mut row = head;
                    row.extend([
                        num(s.value.re),
                        num(s.value.im),
                        num(s.value.norm()),
                        num(s.anomaly.norm()),
                        "ok".to_string(),
                    ]);
                    row
                }
                Err(e) => {
                    let mut row = head;
                    row.extend(std::iter::repeat(String::new()).take(4));
                    row.push(e.to_string());
                    row
                }
            }
        })
        .collect();
    let bad = rows.iter().filter(|r| r[8] != "ok").count();
    record(
        out,
        Output::FieldProfile,
        eta,
        &if bad == 0 {
            "ok".to_string()
        } else {
            format!("{bad} sample(s) skipped")
        },
    );
    Ok(Table {
        header: &["eta", "r", "theta", "phi", "re_u", "im_u", "abs_u", "abs_anomaly", "status"],
        rows,
    })
}

fn calr_table(ctx: &Context, out: &mut RunOutput) -> Result<Table, RunError> {
    let d = calr_diagnostic(&ctx.template, ctx.coupling, &ctx.src, &ctx.etas, ctx.scenario.probe_radius)?;
    out.summary.calr_trend = Some(d.trend.to_string());
    out.summary.probe_radius = Some(d.probe_radius);
    let mut rows = Vec::new();
    for p in &d.points {
        let status = p.error.clone().unwrap_or_else(|| {
            if p.ratio.is_some() {
                "ok".to_string()
            } else {
                "zero energy".to_string()
            }
        });
        record(out, Output::CalrDiagnostic, p.eta, &status);
        rows.push(vec![
            num(p.eta),
            p.k_eta.map(|k| k.to_string()).unwrap_or_default(),
            num(d.probe_radius),
            num(p.energy),
            num(p.sup_field),
            opt(p.ratio),
            d.trend.to_string(),
            status,
        ]);
    }
    Ok(Table {
        header: &["eta", "k_eta", "probe_radius", "energy", "sup_field", "ratio", "trend", "status"],
        rows,
    })
}

pub fn write_csv(path: &std::path::Path, table: &Table) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()
}
