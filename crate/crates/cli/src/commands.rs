use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _};
use serde::Serialize;
use strongcoupling::accel::{report_to_csv, richardson_report, RichardsonRow, SequenceData};
use strongcoupling::exact::{parse_rational, PowerSeries};
use strongcoupling::large_order::{
    best_phase_free, fit_growth, normalize_row, sign_grid_search, sign_score, zeta_consistency_k, GridSearch, SignFit,
};
use strongcoupling::lattice::{load_table, save_table};
use strongcoupling::oracles::{blasius_profile, blasius_shoot, instanton_slope, ShootingConfig};
use strongcoupling::pade::{approximant_sweep, sweep_to_csv, FrobeniusSeries, Sweep};
use strongcoupling::vpt::{sequence_to_csv, vpt_sequence, VptProblem, VptSequence};
use strongcoupling::{BigFloat, CoefficientTable, Rational};

use crate::{
    GenerateArgs, LargeOrderArgs, OracleArgs, OracleCommand, Outcome, PadeArgs, RichardsonArgs, SignfitArgs, VptArgs,
};

pub struct Context {
    pub prec: usize,
    pub jobs: usize,
}

impl Context {
    /// Decimal digits carried by the working precision.
    pub fn digits(&self, requested: Option<usize>) -> usize {
        requested.unwrap_or(self.prec * 30103 / 100000).max(1)
    }
}

pub fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Write to `path` or print to stdout; returns the written path.
fn emit(path: Option<&PathBuf>, text: &str) -> anyhow::Result<Option<PathBuf>> {
    match path {
        Some(p) => {
            write_file(p, text)?;
            Ok(Some(p.clone()))
        }
        None => {
            print!("{text}");
            Ok(None)
        }
    }
}

pub fn load(path: &Path) -> anyhow::Result<CoefficientTable> {
    load_table(path).with_context(|| format!("loading {}", path.display()))
}

/// Accepts "num/den", integers and decimals.
pub fn parse_real(s: &str, prec: usize) -> anyhow::Result<BigFloat> {
    if let Ok(r) = parse_rational(s) {
        return Ok(BigFloat::from_rational(&r, prec));
    }
    BigFloat::parse(s, prec).ok_or_else(|| anyhow!("not a number: {s:?}"))
}

fn parse_pair(s: &str, sep: char) -> anyhow::Result<(f64, f64)> {
    let (a, b) = s.split_once(sep).ok_or_else(|| anyhow!("expected two values separated by {sep:?}, got {s:?}"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn site_row(table: &CoefficientTable, site: usize, order: Option<usize>) -> anyhow::Result<Vec<Rational>> {
    let n = order.unwrap_or(table.max_order);
    if n > table.max_order {
        bail!("order {n} exceeds the table order {}", table.max_order);
    }
    let mut row = table.site_row(site);
    row.truncate(n + 1);
    Ok(row)
}

pub fn generate(args: &GenerateArgs) -> anyhow::Result<Outcome> {
    let table = CoefficientTable::generate(args.model, args.order);
    save_table(&table, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!("{} table to order {} written to {}", args.model, args.order, args.out.display());
    Ok(Outcome { outputs: vec![args.out.clone()], ..Default::default() })
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub n_max: usize,
    pub argmin: Option<usize>,
    pub local_minima: Vec<usize>,
    pub crossings: Vec<(usize, String)>,
    pub complex_windows: Vec<(usize, usize)>,
    pub gaps: Vec<usize>,
}

impl SweepSummary {
    pub fn new(sweep: &Sweep, n_max: usize) -> Self {
        Self {
            n_max,
            argmin: sweep.argmin,
            local_minima: sweep.local_minima.clone(),
            crossings: sweep.crossings.iter().map(|c| (c.n, format!("{:?}", c.direction).to_lowercase())).collect(),
            complex_windows: sweep.complex_windows.iter().map(|w| (w.start, w.end)).collect(),
            gaps: sweep.gaps.clone(),
        }
    }
}

pub fn pade_sweep(
    table: &CoefficientTable,
    site: usize,
    m: &Rational,
    n_max: usize,
    reference: Option<&BigFloat>,
    prec: usize,
) -> anyhow::Result<Sweep> {
    let series = PowerSeries::new(site_row(table, site, Some(n_max))?);
    let series = FrobeniusSeries::new(series, m.clone())?;
    Ok(approximant_sweep(&series, n_max, reference, prec)?)
}

pub fn pade(args: &PadeArgs, ctx: &Context) -> anyhow::Result<Outcome> {
    let table = load(&args.coeffs)?;
    let m = parse_rational(&args.m).map_err(|e| anyhow!("--M: {e}"))?;
    let n_max = args.n_max.unwrap_or(table.max_order);
    let reference = args.reference.as_deref().map(|s| parse_real(s, ctx.prec)).transpose()?;
    let sweep = pade_sweep(&table, args.site, &m, n_max, reference.as_ref(), ctx.prec)?;
    let mut out = Outcome { inputs: vec![args.coeffs.clone()], ..Default::default() };
    out.outputs.extend(emit(args.out.as_ref(), &sweep_to_csv(&sweep.records, ctx.digits(args.digits)))?);
    let summary = serde_json::to_string_pretty(&SweepSummary::new(&sweep, n_max))? + "\n";
    match &args.summary {
        Some(p) => {
            write_file(p, &summary)?;
            out.outputs.push(p.clone());
        }
        None => eprint!("{summary}"),
    }
    Ok(out)
}

pub fn vpt_run(
    table: &CoefficientTable,
    site: usize,
    p: i64,
    q: u32,
    n_max: usize,
    strategy: strongcoupling::vpt::Strategy,
    ctx: &Context,
) -> anyhow::Result<VptSequence> {
    let problem = VptProblem::new(site_row(table, site, Some(n_max))?, p, q)?;
    Ok(vpt_sequence(&problem, n_max, strategy, ctx.prec, ctx.jobs)?)
}

/// Richardson table over a contiguous run of values; `k_max` is clipped to
/// what the run supports.
pub fn richardson_rows(start: usize, values: Vec<BigFloat>, k_max: usize) -> anyhow::Result<Vec<RichardsonRow>> {
    let len = values.len();
    let k = k_max.min(len.saturating_sub(strongcoupling::accel::FLAG_WINDOW));
    if k < k_max {
        eprintln!("note: {len} values support Richardson orders up to {k} only");
    }
    if k == 0 {
        bail!("{len} values are too few for Richardson extrapolation");
    }
    Ok(richardson_report(&SequenceData::new(start, values)?, k)?)
}

pub fn print_rows(title: &str, rows: &[RichardsonRow], digits: usize) {
    println!("{title}");
    for r in rows {
        println!("  {:>2}  {:<width$}  {}", r.k, r.value.to_string_sig(digits), r.flag, width = digits + 3);
    }
}

pub fn vpt(args: &VptArgs, ctx: &Context) -> anyhow::Result<Outcome> {
    let table = load(&args.coeffs)?;
    let n_max = args.n_max.unwrap_or(table.max_order.min(200));
    let seq = vpt_run(&table, args.site, args.p, args.q, n_max, args.strategy, ctx)?;
    for (n, e) in &seq.gaps {
        eprintln!("note: order {n} skipped: {e}");
    }
    let digits = ctx.digits(args.digits);
    let mut out = Outcome { inputs: vec![args.coeffs.clone()], ..Default::default() };
    let csv = sequence_to_csv(&seq.results, digits);
    if let Some(p) = &args.out {
        write_file(p, &csv)?;
        out.outputs.push(p.clone());
    }
    if let Some(last) = seq.results.last() {
        println!("N = {}: k0 = {}, b0 = {}", last.n, last.k0.to_string_sig(20), last.b0.to_string_sig(20));
    }
    if let Some(k_max) = args.richardson {
        let contiguous = seq.results.windows(2).all(|w| w[1].n == w[0].n + 1);
        if !contiguous || seq.results.is_empty() {
            bail!("Richardson extrapolation needs a gap-free VPT sequence");
        }
        let rows = richardson_rows(seq.results[0].n, seq.b0_values(), k_max)?;
        print_rows("Richardson extrapolation of b0", &rows, 20);
        if let Some(p) = &args.report_out {
            write_file(p, &report_to_csv(&rows, digits))?;
            out.outputs.push(p.clone());
        }
    } else if args.out.is_none() {
        print!("{csv}");
    }
    Ok(out)
}

/// Reads `(index, value)` pairs from a CSV written by one of the other
/// subcommands.
pub fn read_column(path: &Path, column: &str, index_column: Option<&str>, prec: usize) -> anyhow::Result<(usize, Vec<BigFloat>)> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| anyhow!("no column {name:?} in {}", path.display()))
    };
    let vi = find(column)?;
    let ii = index_column.map(find).transpose()?.unwrap_or(0);
    let mut start = None;
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let idx: usize = record[ii].trim().parse().with_context(|| format!("row {}: bad index", line + 2))?;
        match start {
            None => start = Some(idx),
            Some(s) if idx != s + values.len() => bail!("row {}: index {idx} breaks the contiguous run", line + 2),
            _ => {}
        }
        values.push(parse_real(record[vi].trim(), prec).with_context(|| format!("row {}", line + 2))?);
    }
    let start = start.ok_or_else(|| anyhow!("{} has no data rows", path.display()))?;
    Ok((start, values))
}

pub fn richardson(args: &RichardsonArgs, ctx: &Context) -> anyhow::Result<Outcome> {
    let (start, values) = read_column(&args.input, &args.column, args.index_column.as_deref(), ctx.prec)?;
    if start == 0 {
        bail!("the sequence index must start at 1 or later");
    }
    let rows = richardson_rows(start, values, args.k_max)?;
    let digits = ctx.digits(args.digits);
    let mut out = Outcome { inputs: vec![args.input.clone()], ..Default::default() };
    out.outputs.extend(emit(args.out.as_ref(), &report_to_csv(&rows, digits))?);
    if args.out.is_some() {
        print_rows(&format!("Richardson extrapolation of {}", args.column), &rows, 20);
    }
    Ok(out)
}

pub fn float_row(row: &[Rational], prec: usize) -> Vec<BigFloat> {
    row.iter().map(|r| BigFloat::from_rational(r, prec)).collect()
}

pub fn large_order(args: &LargeOrderArgs, ctx: &Context) -> anyhow::Result<Outcome> {
    let mut out = Outcome::default();
    if let Some(z) = &args.zeta {
        let b1 = parse_real(&z[0], ctx.prec)?;
        let b2 = parse_real(&z[1], ctx.prec)?;
        let k = zeta_consistency_k(&b1, &b2)?;
        println!("zeta-consistent K = {}", k.to_string_sig(12));
    }
    let Some(coeffs) = &args.coeffs else {
        return Ok(out);
    };
    out.inputs.push(coeffs.clone());
    let table = load(coeffs)?;
    let row = float_row(&site_row(&table, args.site, None)?, ctx.prec);
    let assume_a = args.assume_a.as_deref().map(|s| parse_real(s, ctx.prec)).transpose()?;
    let assume_k = args.assume_k.as_deref().map(|s| parse_real(s, ctx.prec)).transpose()?;
    let fit = fit_growth(&row, args.site, args.k_max, assume_a, assume_k)?;
    for g in &fit.a_estimates.gaps {
        eprintln!("note: order {} excluded ({:?})", g.j, g.reason);
    }
    print_rows("exponent A", &fit.a_table, 16);
    print_rows(&format!("K (A = {})", fit.assumed_a.to_string_sig(12)), &fit.k_table, 16);
    print_rows(
        &format!("B_{} (A = {}, K = {})", args.site, fit.assumed_a.to_string_sig(12), fit.assumed_k.to_string_sig(12)),
        &fit.b_table,
        16,
    );
    if let Some(dir) = &args.out_dir {
        let digits = ctx.digits(args.digits);
        for (name, est, rows) in [
            ("a", &fit.a_estimates, &fit.a_table),
            ("k", &fit.k_estimates, &fit.k_table),
            ("b", &fit.b_estimates, &fit.b_table),
        ] {
            let p = dir.join(format!("{name}_estimates.csv"));
            write_file(&p, &est.to_csv(digits))?;
            out.outputs.push(p);
            let p = dir.join(format!("{name}_richardson.csv"));
            write_file(&p, &report_to_csv(rows, digits))?;
            out.outputs.push(p);
        }
        out.manifest = Some(dir.join("manifest.json"));
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct SignReport {
    order: usize,
    scored: Vec<SignFit>,
    peaks: Vec<SignFit>,
    phase_free: Option<SignFit>,
    oscillation_onset: Option<usize>,
}

pub fn signfit(args: &SignfitArgs, ctx: &Context) -> anyhow::Result<Outcome> {
    let table = load(&args.coeffs)?;
    let row = site_row(&table, args.site, args.order)?;
    let order = row.len() - 1;
    let mut report = SignReport { order, scored: vec![], peaks: vec![], phase_free: None, oscillation_onset: None };
    for at in &args.at {
        let (a, b) = parse_pair(at, ',')?;
        let fit = sign_score(&row, a, b)?;
        println!("score({a}, {b}) = {}/{order}, mismatches {:?}", fit.score, fit.mismatches);
        report.scored.push(fit);
    }
    let a_range = parse_pair(&args.a_range, ':')?;
    if args.at.is_empty() {
        let mut search = GridSearch::new(a_range, parse_pair(&args.b_range, ':')?);
        search.resolution = args.resolution;
        search.refine_depth = args.refine_depth;
        search.jobs = ctx.jobs;
        report.peaks = sign_grid_search(&row, &search)?;
        for p in &report.peaks {
            println!("peak a = {:.6}, b = {:.6}: score {}/{order}", p.a, p.b, p.score);
        }
    }
    if args.phase_free {
        let fit = best_phase_free(&row, a_range, args.resolution * 10, args.refine_depth)?;
        println!("phase-free a = {:.6}, b = {:.6}: mismatches {:?}", fit.a, fit.b, fit.mismatches);
        report.phase_free = Some(fit);
    }
    let mut out = Outcome { inputs: vec![args.coeffs.clone()], ..Default::default() };
    if let Some(at) = &args.normalize {
        let (a, b) = parse_pair(at, ',')?;
        let norm = normalize_row(&row, a, b, ctx.prec)?;
        report.oscillation_onset = norm.oscillation_onset;
        println!("ratio b_(j+1)/b_j starts oscillating at j = {:?}", norm.oscillation_onset);
        if let Some(p) = &args.normalized_out {
            let digits = ctx.digits(None).min(30);
            let mut csv = String::from("j,aprime,b,ratio\n");
            for j in 0..norm.aprime.len() {
                let ratio = norm.ratios.get(j).map(|r| r.to_string_sig(digits)).unwrap_or_default();
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    j + 1,
                    norm.aprime[j].to_string_sig(digits),
                    norm.bnorm[j].to_string_sig(digits),
                    ratio
                ));
            }
            write_file(p, &csv)?;
            out.outputs.push(p.clone());
        }
    }
    if let Some(p) = &args.out {
        write_file(p, &(serde_json::to_string_pretty(&report)? + "\n"))?;
        out.outputs.insert(0, p.clone());
    }
    Ok(out)
}

pub fn oracle(args: &OracleArgs, ctx: &Context) -> anyhow::Result<Outcome> {
    match &args.which {
        OracleCommand::Instanton { epsilon } => {
            let eps = parse_real(epsilon, ctx.prec)?;
            println!("{}", instanton_slope(&eps)?.to_string_sig(ctx.digits(None)));
            Ok(Outcome::default())
        }
        OracleCommand::Blasius { epsilon, length, step, tolerance, max_iter, profile, samples } => {
            let base = ShootingConfig::for_epsilon(*epsilon);
            let cfg = ShootingConfig {
                domain_length: length.unwrap_or(base.domain_length),
                step: step.unwrap_or(base.step),
                tolerance: *tolerance,
                max_iter: *max_iter,
                ..base
            };
            let mut out = Outcome::default();
            match profile {
                Some(p) => {
                    let prof = blasius_profile(&cfg, *samples)?;
                    let mut csv = String::from("x,y,dy,d2y\n");
                    for i in 0..prof.x.len() {
                        csv.push_str(&format!("{:e},{:e},{:e},{:e}\n", prof.x[i], prof.y[i], prof.dy[i], prof.d2y[i]));
                    }
                    write_file(p, &csv)?;
                    out.outputs.push(p.clone());
                    println!("{:.12}", prof.wall_shear);
                }
                None => println!("{:.12}", blasius_shoot(&cfg)?),
            }
            Ok(out)
        }
    }
}
