//! Every reproduction in one directory: coefficient excerpts, approximant
//! sweeps, VPT sequences with their Richardson tables, large-order fits,
//! the sign analysis and the continuum references.

use std::path::{Path, PathBuf};

use anyhow::bail;
use serde::Serialize;
use serde_json::json;
use strongcoupling::accel::{report_to_csv, RichardsonRow};
use strongcoupling::exact::{format_rational, parse_rational};
use strongcoupling::large_order::{
    best_phase_free, fit_growth, normalize_row, sign_grid_search, zeta_consistency_k, GridSearch, SignFit,
};
use strongcoupling::oracles::{blasius_shoot, instanton_slope, ShootingConfig};
use strongcoupling::pade::sweep_to_csv;
use strongcoupling::vpt::{sequence_to_csv, Strategy, VptSequence};
use strongcoupling::{BigFloat, CoefficientTable, ModelId};

use crate::commands::{float_row, load, pade_sweep, parse_real, richardson_rows, vpt_run, write_file, Context, SweepSummary};
use crate::{Outcome, ReportArgs};

const COEFFICIENT_ROWS: usize = 20;
const RICHARDSON_ORDERS: usize = 6;
/// Approximants fed to the Blasius Richardson table, and its order.
const BLASIUS_PADE_WINDOW: usize = 70;
const BLASIUS_PADE_ORDER: usize = 3;

struct Writer<'a> {
    dir: &'a Path,
    digits: usize,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn put(&mut self, name: &str, text: &str) -> anyhow::Result<()> {
        let p = self.dir.join(name);
        write_file(&p, text)?;
        self.written.push(p);
        Ok(())
    }

    fn rows(&mut self, name: &str, rows: &[RichardsonRow]) -> anyhow::Result<()> {
        let csv = report_to_csv(rows, self.digits);
        self.put(name, &csv)
    }
}

fn coefficient_csv(table: &CoefficientTable) -> String {
    let mut csv = String::from("j,a_1j\n");
    for j in 0..=COEFFICIENT_ROWS.min(table.max_order) {
        csv.push_str(&format!("{j},{}\n", format_rational(&table.coeff(1, j))));
    }
    csv
}

fn expect_model(table: &CoefficientTable, model: ModelId, path: &Path) -> anyhow::Result<()> {
    if table.model != model {
        bail!("{} holds a {} table, expected {model}", path.display(), table.model);
    }
    Ok(())
}

/// Derivative order matching the approach-to-scaling power `q`.
fn strategy_for(q: u32) -> Strategy {
    Strategy::for_derivative(q as usize).expect("q >= 1")
}

fn vpt_summary(seq: &VptSequence, rows: &[RichardsonRow]) -> serde_json::Value {
    let last = seq.results.last();
    json!({
        "strategy": last.map(|r| r.strategy.to_string()),
        "n": last.map(|r| r.n),
        "k0": last.map(|r| r.k0.to_string_sig(20)),
        "b0": last.map(|r| r.b0.to_string_sig(20)),
        "skipped": seq.gaps.iter().map(|(n, e)| json!({"n": n, "reason": e.to_string()})).collect::<Vec<_>>(),
        "richardson": rows.iter().map(|r| json!({"k": r.k, "value": r.value.to_string_sig(22), "flag": r.flag})).collect::<Vec<_>>(),
    })
}

fn relative_percent(value: &BigFloat, reference: &BigFloat) -> f64 {
    ((value - reference) / reference).to_f64() * 100.0
}

fn vpt_with_richardson(
    table: &CoefficientTable,
    p: i64,
    q: u32,
    orders: usize,
    ctx: &Context,
) -> anyhow::Result<(VptSequence, Vec<RichardsonRow>)> {
    let n = orders.min(table.max_order);
    let seq = vpt_run(table, 1, p, q, n, strategy_for(q), ctx)?;
    if !seq.gaps.is_empty() {
        bail!("VPT skipped orders {:?}", seq.gaps.iter().map(|g| g.0).collect::<Vec<_>>());
    }
    let rows = richardson_rows(1, seq.b0_values(), RICHARDSON_ORDERS)?;
    Ok((seq, rows))
}

fn instanton(args: &ReportArgs, ctx: &Context, w: &mut Writer) -> anyhow::Result<serde_json::Value> {
    let table = load(&args.instanton)?;
    expect_model(&table, ModelId::Instanton, &args.instanton)?;
    let prec = ctx.prec;
    w.put("instanton_coefficients.csv", &coefficient_csv(&table))?;

    eprintln!("instanton: approximant sweep");
    let slope = instanton_slope(&BigFloat::one(prec))?;
    let n = args.pade_orders.min(table.max_order);
    let half = parse_rational("1/2").expect("literal");
    let sweep = pade_sweep(&table, 1, &half, n, Some(&slope), prec)?;
    w.put("instanton_pade.csv", &sweep_to_csv(&sweep.records, w.digits))?;

    eprintln!("instanton: VPT");
    let (seq, rows) = vpt_with_richardson(&table, -1, 2, args.vpt_orders, ctx)?;
    w.put("instanton_vpt.csv", &sequence_to_csv(&seq.results, w.digits))?;
    w.rows("instanton_vpt_richardson.csv", &rows)?;
    let limit = &rows.last().expect("non-empty").value;

    eprintln!("instanton: large-order fits");
    let a = parse_real(&args.assume_a, prec)?;
    let k = parse_real(&args.assume_k, prec)?;
    let mut fits = serde_json::Map::new();
    let mut b_values = Vec::new();
    for site in [1, 2] {
        let row = float_row(&table.site_row(site), prec);
        let fit = fit_growth(&row, site, RICHARDSON_ORDERS, Some(a.clone()), Some(k.clone()))?;
        let free = fit_growth(&row, site, RICHARDSON_ORDERS, None, None)?;
        w.rows(&format!("instanton_site{site}_a.csv"), &fit.a_table)?;
        w.rows(&format!("instanton_site{site}_k.csv"), &fit.k_table)?;
        w.rows(&format!("instanton_site{site}_b.csv"), &fit.b_table)?;
        let top = |t: &[RichardsonRow]| t.last().map(|r| r.value.to_string_sig(14));
        fits.insert(
            format!("site{site}"),
            json!({
                "A": top(&fit.a_table),
                "K_assuming_A": top(&fit.k_table),
                "B_assuming_A_K": top(&fit.b_table),
                "K_free": top(&free.k_table),
                "B_free": top(&free.b_table),
            }),
        );
        b_values.push(fit.b_table.last().expect("non-empty").value.clone());
    }
    let zeta_k = zeta_consistency_k(&b_values[0], &b_values[1])?;

    Ok(json!({
        "order": table.max_order,
        "pade": SweepSummary::new(&sweep, n),
        "vpt": vpt_summary(&seq, &rows),
        "vpt_limit_vs_exact_percent": relative_percent(limit, &slope),
        "exact_slope": slope.to_string_sig(20),
        "large_order": {
            "assumed_A": args.assume_a,
            "assumed_K": args.assume_k,
            "fits": fits,
            "zeta_consistent_K": zeta_k.to_string_sig(10),
        },
    }))
}

#[derive(Serialize)]
struct SignSummary {
    order: usize,
    peaks: Vec<SignFit>,
    phase_free: SignFit,
    oscillation_onset: Option<usize>,
}

fn blasius(args: &ReportArgs, ctx: &Context, w: &mut Writer) -> anyhow::Result<serde_json::Value> {
    let table = load(&args.blasius)?;
    expect_model(&table, ModelId::Blasius, &args.blasius)?;
    let prec = ctx.prec;
    w.put("blasius_coefficients.csv", &coefficient_csv(&table))?;

    eprintln!("blasius: wall shear by shooting");
    let shear = blasius_shoot(&ShootingConfig::default())?;
    let shear_big = BigFloat::from_f64(shear, prec);

    eprintln!("blasius: approximant sweep");
    let n = args.pade_orders.min(table.max_order);
    let half = parse_rational("1/2").expect("literal");
    let sweep = pade_sweep(&table, 1, &half, n, Some(&shear_big), prec)?;
    w.put("blasius_pade.csv", &sweep_to_csv(&sweep.records, w.digits))?;
    let early: Vec<BigFloat> =
        sweep.records.iter().take_while(|r| r.n <= BLASIUS_PADE_WINDOW).map(|r| r.s_n.re.clone()).collect();
    let pade_rows = richardson_rows(1, early, BLASIUS_PADE_ORDER)?;
    w.rows("blasius_pade_richardson.csv", &pade_rows)?;

    eprintln!("blasius: VPT");
    let (seq, rows) = vpt_with_richardson(&table, -2, 4, args.vpt_orders, ctx)?;
    w.put("blasius_vpt.csv", &sequence_to_csv(&seq.results, w.digits))?;
    w.rows("blasius_vpt_richardson.csv", &rows)?;
    let limit = &rows.last().expect("non-empty").value;

    eprintln!("blasius: sign structure");
    let row = table.site_row(1);
    let mut peaks = Vec::new();
    for a_range in [(1.0, 2.0), (7.0, 8.0)] {
        let mut search = GridSearch::new(a_range, (2.8, 3.3));
        search.resolution = args.grid_resolution;
        search.jobs = ctx.jobs;
        peaks.extend(sign_grid_search(&row, &search)?);
    }
    let phase_free = best_phase_free(&row, (1.0, 2.0), args.grid_resolution * 10, 3)?;
    let onset = match peaks.first() {
        Some(p) => normalize_row(&row, p.a, p.b, prec)?.oscillation_onset,
        None => None,
    };
    let signs = SignSummary { order: table.max_order, peaks, phase_free, oscillation_onset: onset };
    w.put("blasius_signs.json", &(serde_json::to_string_pretty(&signs)? + "\n"))?;

    Ok(json!({
        "order": table.max_order,
        "pade": SweepSummary::new(&sweep, n),
        "pade_richardson": pade_rows.iter().map(|r| json!({"k": r.k, "value": r.value.to_string_sig(12)})).collect::<Vec<_>>(),
        "vpt": vpt_summary(&seq, &rows),
        "vpt_limit_vs_shooting_percent": relative_percent(limit, &shear_big),
        "shooting_wall_shear": shear,
        "sign_peaks": signs.peaks.len(),
    }))
}

pub fn run(args: &ReportArgs, ctx: &Context) -> anyhow::Result<Outcome> {
    std::fs::create_dir_all(&args.out_dir)?;
    let mut w = Writer { dir: &args.out_dir, digits: ctx.digits(args.digits), written: Vec::new() };
    let inst = instanton(args, ctx, &mut w)?;
    let blas = blasius(args, ctx, &mut w)?;
    let summary = json!({ "instanton": inst, "blasius": blas });
    w.put("summary.json", &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(Outcome {
        inputs: vec![args.instanton.clone(), args.blasius.clone()],
        outputs: w.written,
        manifest: Some(args.out_dir.join("manifest.json")),
    })
}
