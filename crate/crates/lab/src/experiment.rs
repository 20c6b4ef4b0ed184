//! The four experiment commands.

use std::fmt::Write as _;
use std::path::PathBuf;

use libor_core::fpm::FpmModel;
use libor_core::lmm::LmmModel;
use libor_core::mfm::{black_digital_price, calibrate_backward, FunctionalGrid};
use libor_core::pricing::{accumulate, quote_from, CapletQuote, McAccumulator};
use libor_core::schemes::simulate_scheme_on;
use libor_core::{InitialCurve, LiborPathSet, PathRange, Scheme, TimeGrid};

use crate::config::{ExperimentConfig, ModelKind};
use crate::error::LabError;
use crate::io::{fmt, fmt_opt, CsvOut};
use crate::runner::{merge_books, par_chunks, path_chunks, CapletBook};

/// Result of a command: a plain-text report, the files written and whether
/// an invariant check failed.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub report: String,
    pub files: Vec<PathBuf>,
    pub failed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failed {
            1
        } else {
            0
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.report.push_str(s.as_ref());
        self.report.push('\n');
    }
}

fn prepare(cfg: &ExperimentConfig) -> Result<(), LabError> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output.dir)?;
    Ok(())
}

fn lmm_grid(cfg: &ExperimentConfig, curve: &InitialCurve) -> Result<TimeGrid, LabError> {
    let n = curve.n();
    Ok(TimeGrid::refine(
        curve.tenor(),
        cfg.pricing.steps_per_period,
        n.saturating_sub(1).max(1),
    )?)
}

fn chunks(cfg: &ExperimentConfig) -> Vec<PathRange> {
    path_chunks(cfg.pricing.n_paths, cfg.pricing.chunk_size)
}

/// LIBOR market model schemes requested in the config, exact first.
fn lmm_schemes(cfg: &ExperimentConfig) -> Vec<Scheme> {
    let mut out = vec![Scheme::Exact];
    for m in &cfg.models.list {
        if let Some(s) = m.lmm_scheme() {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

fn lmm_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Exact => "lmm-exact",
        Scheme::Frozen => "lmm-frozen",
        Scheme::Picard1 => "lmm-picard1",
        Scheme::Taylor => "lmm-taylor",
        other => other.as_str(),
    }
}

fn non_positive(paths: &LiborPathSet) -> u64 {
    let mut bad = 0;
    for p in 0..paths.n_paths() {
        if (0..paths.n_dates()).any(|j| paths.rates_at(p, j).iter().any(|l| !(*l > 0.0))) {
            bad += 1;
        }
    }
    bad
}

fn dump_paths(
    cfg: &ExperimentConfig,
    name: &str,
    paths: &LiborPathSet,
    out: &mut Outcome,
) -> Result<(), LabError> {
    let m = cfg.output.dump_paths.min(paths.n_paths());
    if m == 0 {
        return Ok(());
    }
    let path = cfg.output.dir.join(format!("paths_{name}.csv"));
    let mut w = CsvOut::create(&path, &["path_id", "t", "k", "L"])?;
    let dates = cfg.tenor()?.dates().to_vec();
    for p in 0..m {
        for j in 0..paths.n_dates() {
            for k in 0..paths.n() {
                w.row(&[
                    (paths.range.start + p as u64).to_string(),
                    fmt(dates[j]),
                    k.to_string(),
                    fmt(paths.rate(p, j, k)),
                ])?;
            }
        }
    }
    w.finish()?;
    out.files.push(path);
    Ok(())
}

struct LmmChunk {
    books: Vec<CapletBook>,
    violations: Vec<u64>,
    dump: Option<Vec<LiborPathSet>>,
}

/// Simulates every scheme on one shared driver per block.
fn run_lmm(
    cfg: &ExperimentConfig,
    schemes: &[Scheme],
) -> Result<(InitialCurve, LmmChunk), LabError> {
    let curve = cfg.curve()?;
    let model = LmmModel::new(curve.clone(), cfg.vols()?, cfg.chars()?)?;
    let grid = lmm_grid(cfg, &curve)?;
    let seed = cfg.driver.seed;
    let strikes = cfg.pricing.strikes.clone();
    let anti = cfg.pricing.antithetic;
    let want_dump = cfg.output.dump_paths > 0;
    let parts = par_chunks(&chunks(cfg), |range| {
        let driver = model.chars().simulate_range(&grid, range, seed, anti)?;
        let mut books = Vec::with_capacity(schemes.len());
        let mut violations = Vec::with_capacity(schemes.len());
        let mut dump = Vec::new();
        for &s in schemes {
            let paths = simulate_scheme_on(&model, &driver, s)?;
            books.push(CapletBook::from_paths(&paths, &curve, &strikes)?);
            violations.push(non_positive(&paths));
            if want_dump && range.start == 0 {
                dump.push(paths.without_weights());
            }
        }
        Ok(LmmChunk {
            books,
            violations,
            dump: (range.start == 0 && want_dump).then_some(dump),
        })
    })?;
    let mut merged = LmmChunk {
        books: Vec::new(),
        violations: vec![0; schemes.len()],
        dump: None,
    };
    let mut per_scheme: Vec<Vec<CapletBook>> = vec![Vec::new(); schemes.len()];
    for part in parts {
        for (i, b) in part.books.into_iter().enumerate() {
            per_scheme[i].push(b);
        }
        for (v, add) in merged.violations.iter_mut().zip(&part.violations) {
            *v += add;
        }
        if part.dump.is_some() {
            merged.dump = part.dump;
        }
    }
    merged.books = per_scheme
        .into_iter()
        .map(|b| merge_books(b).expect("at least one block"))
        .collect();
    Ok((curve, merged))
}

/// Implied-vol differences of every requested scheme against the exact
/// drift on shared driver paths.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    prepare(cfg)?;
    let mut out = Outcome::default();
    let schemes = lmm_schemes(cfg);
    let (curve, res) = run_lmm(cfg, &schemes)?;
    let exact = res.books[0].quotes(&curve);
    out.line(format!(
        "compare: {} paths, seed {}, {} steps per period",
        cfg.pricing.n_paths, cfg.driver.seed, cfg.pricing.steps_per_period
    ));
    for (i, &s) in schemes.iter().enumerate() {
        if res.violations[i] > 0 {
            out.failed = true;
            out.line(format!(
                "{}: {} paths with non-positive rates",
                lmm_name(s),
                res.violations[i]
            ));
        }
    }
    let mut summary = String::from("scheme,max_abs_iv_diff,mean_abs_iv_diff,undefined\n");
    for (i, &s) in schemes.iter().enumerate().skip(1) {
        let quotes = res.books[i].quotes(&curve);
        let name = lmm_name(s);
        let path = cfg.output.dir.join(format!("compare_{name}.csv"));
        let mut w = CsvOut::create(
            &path,
            &[
                "k",
                "strike",
                "price_exact",
                "price_scheme",
                "iv_exact",
                "iv_scheme",
                "iv_diff",
            ],
        )?;
        let (mut max_abs, mut sum_abs, mut count, mut undefined) = (0.0f64, 0.0, 0usize, 0usize);
        for (e, q) in exact.iter().zip(&quotes) {
            let diff = match (e.implied_vol, q.implied_vol) {
                (Some(a), Some(b)) => Some(b - a),
                _ => None,
            };
            match diff {
                Some(d) => {
                    max_abs = max_abs.max(d.abs());
                    sum_abs += d.abs();
                    count += 1;
                }
                None => undefined += 1,
            }
            w.row(&[
                e.k.to_string(),
                fmt(e.strike),
                fmt(e.price),
                fmt(q.price),
                fmt_opt(e.implied_vol),
                fmt_opt(q.implied_vol),
                fmt_opt(diff),
            ])?;
        }
        w.finish()?;
        out.files.push(path);
        let mean_abs = if count > 0 {
            sum_abs / count as f64
        } else {
            0.0
        };
        writeln!(
            summary,
            "{name},{},{},{undefined}",
            fmt(max_abs),
            fmt(mean_abs)
        )
        .ok();
        out.line(format!(
            "{name} vs lmm-exact: max-abs iv diff {max_abs:.3e}, mean-abs {mean_abs:.3e}"
        ));
    }
    let path = cfg.output.dir.join("summary.txt");
    std::fs::write(&path, summary)?;
    out.files.push(path);
    if let Some(dump) = &res.dump {
        for (s, paths) in schemes.iter().zip(dump) {
            dump_paths(cfg, lmm_name(*s), paths, &mut out)?;
        }
    }
    Ok(out)
}

fn quote_rows(
    w: &mut CsvOut,
    model: &str,
    scheme: &str,
    quotes: &[CapletQuote],
) -> Result<(), LabError> {
    for q in quotes {
        w.row(&[
            model.to_string(),
            scheme.to_string(),
            q.k.to_string(),
            fmt(q.strike),
            fmt(q.price),
            fmt_opt(q.stderr),
            fmt_opt(q.implied_vol),
        ])?;
    }
    Ok(())
}

fn analytic_quote(curve: &InitialCurve, k: usize, strike: f64, price: f64) -> CapletQuote {
    let mut acc = McAccumulator::default();
    acc.push(price);
    let mut q = quote_from(acc, k, strike, curve);
    q.stderr = None;
    q
}

fn fpm_books(
    cfg: &ExperimentConfig,
    model: &FpmModel,
    grid: &TimeGrid,
) -> Result<(CapletBook, u64), LabError> {
    let seed = cfg.driver.seed;
    let anti = cfg.pricing.antithetic;
    let parts = par_chunks(&chunks(cfg), |range| {
        let driver = model.chars().simulate_range(grid, range, seed, anti)?;
        let paths = model.simulate_fpm_on(&driver)?;
        Ok((
            CapletBook::from_paths(&paths, model.curve(), &cfg.pricing.strikes)?,
            non_positive(&paths),
        ))
    })?;
    let negatives = parts.iter().map(|p| p.1).sum();
    let book = merge_books(parts.into_iter().map(|p| p.0).collect()).expect("at least one block");
    Ok((book, negatives))
}

fn affine_books(cfg: &ExperimentConfig) -> Result<CapletBook, LabError> {
    let model = cfg.affine_model()?;
    let grid = TimeGrid::refine(model.curve().tenor(), 1, model.n().saturating_sub(1).max(1))?;
    let seed = cfg.driver.seed;
    let parts = par_chunks(&chunks(cfg), |range| {
        let paths = model.simulate_range(&grid, range, seed)?;
        CapletBook::from_paths(&paths, model.curve(), &cfg.pricing.strikes)
    })?;
    Ok(merge_books(parts).expect("at least one block"))
}

/// Caplet quotes for every requested model.
pub fn run_price(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    prepare(cfg)?;
    let mut out = Outcome::default();
    let path = cfg.output.dir.join("quotes.csv");
    let mut w = CsvOut::create(
        &path,
        &[
            "model",
            "scheme",
            "k",
            "strike",
            "price",
            "stderr",
            "implied_vol",
        ],
    )?;
    let curve = cfg.curve()?;
    let lmm: Vec<Scheme> = cfg
        .models
        .list
        .iter()
        .filter_map(|m| m.lmm_scheme())
        .collect();
    if !lmm.is_empty() {
        let (_, res) = run_lmm(cfg, &lmm)?;
        for (i, s) in lmm.iter().enumerate() {
            quote_rows(&mut w, "lmm", s.as_str(), &res.books[i].quotes(&curve))?;
            if res.violations[i] > 0 {
                out.failed = true;
                out.line(format!(
                    "{}: {} paths with non-positive rates",
                    lmm_name(*s),
                    res.violations[i]
                ));
            }
        }
        out.line(format!("lmm: {} schemes priced", lmm.len()));
    }
    if cfg.has(ModelKind::Fpm) {
        let model = FpmModel::new(curve.clone(), cfg.vols()?, cfg.chars()?)?;
        let grid = lmm_grid(cfg, &curve)?;
        let (book, _) = fpm_books(cfg, &model, &grid)?;
        quote_rows(&mut w, "fpm", "mc", &book.quotes(&curve))?;
        let fpath = cfg.output.dir.join("fpm_caplets.csv");
        let mut fw = CsvOut::create(&fpath, &["k", "strike", "price", "implied_vol"])?;
        let mut fourier = Vec::new();
        for k in 1..curve.n() {
            for &strike in &cfg.pricing.strikes {
                let q = analytic_quote(&curve, k, strike, model.fpm_caplet_fourier(k, strike)?);
                fw.row(&[
                    k.to_string(),
                    fmt(strike),
                    fmt(q.price),
                    fmt_opt(q.implied_vol),
                ])?;
                fourier.push(q);
            }
        }
        fw.finish()?;
        out.files.push(fpath);
        quote_rows(&mut w, "fpm", "fourier", &fourier)?;
        out.line("fpm: Monte Carlo and Fourier caplets priced");
    }
    if cfg.has(ModelKind::Affine) {
        let model = cfg.affine_model()?;
        let book = affine_books(cfg)?;
        quote_rows(&mut w, "affine", "mc", &book.quotes(&curve))?;
        let mut fourier = Vec::new();
        for k in 1..curve.n() {
            for &strike in &cfg.pricing.strikes {
                fourier.push(analytic_quote(
                    &curve,
                    k,
                    strike,
                    model.caplet_price_affine(k, strike)?,
                ));
            }
        }
        quote_rows(&mut w, "affine", "fourier", &fourier)?;
        let upath = cfg.output.dir.join("affine_u.csv");
        let mut uw = CsvOut::create(&upath, &["k", "u_k", "M0"])?;
        for k in 1..=model.n() {
            uw.row(&[k.to_string(), fmt(model.u(k)), fmt(model.m0(k)?)])?;
        }
        uw.finish()?;
        out.files.push(upath);
        out.line("affine: Monte Carlo and Fourier caplets priced");
    }
    if cfg.has(ModelKind::Mfm) {
        let grid = calibrate_backward(&curve, &cfg.vols()?, cfg.mfm_settings())?;
        let mut quotes = Vec::new();
        for k in 1..curve.n() {
            for &strike in &cfg.pricing.strikes {
                quotes.push(analytic_quote(&curve, k, strike, grid.caplet(k, strike)?));
            }
        }
        quote_rows(&mut w, "mfm", "functional", &quotes)?;
        out.line("mfm: caplets priced from the calibrated functionals");
    }
    w.finish()?;
    out.files.push(path);
    Ok(out)
}

/// Worst relative error of the model digitals against their Black inputs
/// over all calibrated nodes.
pub fn mfm_repricing_error(grid: &FunctionalGrid) -> Result<f64, LabError> {
    let curve = grid.curve();
    let mut worst = 0.0f64;
    for i in 1..grid.n() {
        let d = grid.date(i);
        if d.x.len() == 1 {
            continue;
        }
        let l0 = curve.libor(i)?;
        for (q, &x) in d.x.iter().enumerate() {
            let market =
                black_digital_price(l0, d.libor[q], d.market_total_vol, curve.bond(i + 1))?;
            let model = grid.model_digital(i, x)?;
            if market > 0.0 {
                worst = worst.max((model - market).abs() / market);
            }
        }
    }
    Ok(worst)
}

/// Calibrates the Markov-functional model and writes its functionals.
pub fn run_calibrate_mfm(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    prepare(cfg)?;
    let mut out = Outcome::default();
    let curve = cfg.curve()?;
    let grid = calibrate_backward(&curve, &cfg.vols()?, cfg.mfm_settings())?;
    let path = cfg.output.dir.join("mfm_grid.csv");
    let mut w = CsvOut::create(&path, &["i", "x", "L_functional", "numeraire_functional"])?;
    for i in 0..grid.n() {
        let d = grid.date(i);
        for q in 0..d.x.len() {
            w.row(&[
                i.to_string(),
                fmt(d.x[q]),
                fmt(d.libor[q]),
                fmt(d.numeraire[q]),
            ])?;
        }
    }
    w.finish()?;
    out.files.push(path);
    let worst = mfm_repricing_error(&grid)?;
    out.line(format!(
        "mfm: {} dates calibrated, quad order {}, worst digital repricing error {worst:.3e}",
        grid.n(),
        cfg.mfm_settings().quad_order
    ));
    if worst > 1e-7 {
        out.failed = true;
        out.line("mfm: repricing error above 1e-7");
    }
    Ok(out)
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub model: &'static str,
    pub axiom: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The model is known not to satisfy the axiom and the run shows it.
    Witness,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Witness => "witness",
        }
    }
}

fn three_se(acc: &McAccumulator, target: f64) -> bool {
    (acc.mean() - target).abs() <= 3.0 * acc.stderr() + 1e-14 * target.abs().max(1.0)
}

/// Runs the axiom checks for every requested model.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    prepare(cfg)?;
    let checks = verify_checks(cfg)?;
    let mut out = Outcome::default();
    let mut text = String::from("model,axiom,status,detail\n");
    for c in &checks {
        out.line(format!(
            "{:<7} {} {:<7} {}",
            c.model,
            c.axiom,
            c.status.as_str(),
            c.detail
        ));
        writeln!(
            text,
            "{},{},{},\"{}\"",
            c.model,
            c.axiom,
            c.status.as_str(),
            c.detail.replace('"', "'")
        )
        .ok();
        if c.status == Status::Fail {
            out.failed = true;
        }
    }
    let path = cfg.output.dir.join("verify.csv");
    std::fs::write(&path, text)?;
    out.files.push(path);
    Ok(out)
}

/// The axiom checks of `verify` without writing any files.
pub fn verify_checks(cfg: &ExperimentConfig) -> Result<Vec<Check>, LabError> {
    cfg.validate()?;
    let mut checks = Vec::new();
    let curve = cfg.curve()?;
    if cfg.models.list.iter().any(|m| m.lmm_scheme().is_some()) {
        checks.extend(verify_lmm(cfg, &curve)?);
    }
    if cfg.has(ModelKind::Fpm) {
        checks.extend(verify_fpm(cfg, &curve)?);
    }
    if cfg.has(ModelKind::Mfm) {
        checks.extend(verify_mfm(cfg, &curve)?);
    }
    if cfg.has(ModelKind::Affine) {
        checks.extend(verify_affine(cfg)?);
    }
    Ok(checks)
}

fn martingale_check(
    model: &'static str,
    accs: &[(usize, McAccumulator)],
    target: impl Fn(usize) -> f64,
) -> Check {
    let mut worst = 0.0f64;
    let mut ok = true;
    for (k, acc) in accs {
        let t = target(*k);
        let se = acc.stderr();
        let z = if se > 0.0 {
            (acc.mean() - t).abs() / se
        } else {
            0.0
        };
        worst = worst.max(z);
        ok &= three_se(acc, t);
    }
    Check {
        model,
        axiom: "A2",
        status: if ok { Status::Pass } else { Status::Fail },
        detail: format!(
            "density-weighted means at T_k within {worst:.2} SE of time-zero values ({} rates)",
            accs.len()
        ),
    }
}

fn sample_variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (v.len() - 1) as f64
}

fn merge_indexed(parts: Vec<Vec<McAccumulator>>) -> Vec<McAccumulator> {
    let mut it = parts.into_iter();
    let mut first = it.next().unwrap_or_default();
    for p in it {
        for (a, b) in first.iter_mut().zip(&p) {
            a.merge(b);
        }
    }
    first
}

fn weighted_rate_accs(
    paths: &LiborPathSet,
    value: impl Fn(f64) -> f64,
) -> Result<Vec<McAccumulator>, LabError> {
    (1..paths.n())
        .map(|k| {
            Ok(accumulate(paths, |p| {
                Ok(paths.weight(p, k, k)? * value(paths.rate(p, k, k)))
            })?)
        })
        .collect()
}

fn verify_lmm(cfg: &ExperimentConfig, curve: &InitialCurve) -> Result<Vec<Check>, LabError> {
    let schemes = lmm_schemes(cfg);
    let model = LmmModel::new(curve.clone(), cfg.vols()?, cfg.chars()?)?;
    let grid = lmm_grid(cfg, curve)?;
    let seed = cfg.driver.seed;
    let anti = cfg.pricing.antithetic;
    let n = curve.n();
    let parts = par_chunks(&chunks(cfg), |range| {
        let driver = model.chars().simulate_range(&grid, range, seed, anti)?;
        let mut bad = Vec::new();
        let mut accs = Vec::new();
        let mut witness = Vec::new();
        for &s in &schemes {
            let paths = simulate_scheme_on(&model, &driver, s)?;
            bad.push(non_positive(&paths));
            if s == Scheme::Exact {
                accs = weighted_rate_accs(&paths, |l| l)?;
                if range.start == 0 && n >= 2 {
                    let j = 1.min(paths.n_dates() - 1);
                    let s_time = curve.tenor().date(j);
                    for p in 0..paths.n_paths().min(2000) {
                        let fc = model.forward_measure_characteristics(
                            paths.rates_at(p, j),
                            s_time,
                            0,
                        )?;
                        witness.push(if model.chars().has_jumps() {
                            fc.compensator_factor(0.25)
                        } else {
                            fc.brownian_shift
                        });
                    }
                }
            }
        }
        Ok((bad, accs, witness))
    })?;
    let mut bad = vec![0u64; schemes.len()];
    let mut acc_parts = Vec::new();
    let mut witness = Vec::new();
    for (b, a, w) in parts {
        for (x, y) in bad.iter_mut().zip(&b) {
            *x += y;
        }
        acc_parts.push(a);
        witness.extend(w);
    }
    let accs: Vec<(usize, McAccumulator)> = merge_indexed(acc_parts)
        .into_iter()
        .enumerate()
        .map(|(i, a)| (i + 1, a))
        .collect();
    let mut checks = Vec::new();
    let total_bad: u64 = bad.iter().sum();
    checks.push(Check {
        model: "lmm",
        axiom: "A1",
        status: if total_bad == 0 {
            Status::Pass
        } else {
            Status::Fail
        },
        detail: format!(
            "{} paths with non-positive rates across schemes [{}]",
            total_bad,
            schemes
                .iter()
                .map(|s| lmm_name(*s))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    });
    let l0 = curve.libors();
    checks.push(martingale_check("lmm", &accs, |k| l0[k]));
    let var = sample_variance(&witness);
    let what = if model.chars().has_jumps() {
        "compensator factor at x = 0.25"
    } else {
        "Brownian shift"
    };
    checks.push(Check {
        model: "lmm",
        axiom: "A3",
        status: if var > 0.0 {
            Status::Witness
        } else {
            Status::Pass
        },
        detail: format!(
            "forward-measure {what} for k = 0 at T_1 has sample variance {var:.3e} across paths"
        ),
    });
    Ok(checks)
}

fn verify_fpm(cfg: &ExperimentConfig, curve: &InitialCurve) -> Result<Vec<Check>, LabError> {
    let model = FpmModel::new(curve.clone(), cfg.vols()?, cfg.chars()?)?;
    let grid = lmm_grid(cfg, curve)?;
    let seed = cfg.driver.seed;
    let anti = cfg.pricing.antithetic;
    let delta = curve.delta();
    let n = curve.n();
    let parts = par_chunks(&chunks(cfg), |range| {
        let driver = model.chars().simulate_range(&grid, range, seed, anti)?;
        let paths = model.simulate_fpm_on(&driver)?;
        let accs = weighted_rate_accs(&paths, |l| 1.0 + delta * l)?;
        let mut dev = 0.0f64;
        for p in 0..paths.n_paths() {
            for j in 1..paths.n_dates() {
                for k in 0..n {
                    let stoch: f64 = (0..grid.tenor_step(j))
                        .map(|s| model.tail_loading(k, grid.period(s)) * driver.dh(p, s))
                        .sum();
                    let rest = paths.weight(p, j, k)?.ln() - stoch;
                    dev = dev.max((rest + model.log_density_compensator(k, j)).abs());
                }
            }
        }
        Ok((non_positive(&paths), accs, dev))
    })?;
    let negatives: u64 = parts.iter().map(|p| p.0).sum();
    let dev = parts.iter().map(|p| p.2).fold(0.0f64, f64::max);
    let accs: Vec<(usize, McAccumulator)> = merge_indexed(parts.into_iter().map(|p| p.1).collect())
        .into_iter()
        .enumerate()
        .map(|(i, a)| (i + 1, a))
        .collect();
    let l0 = curve.libors();
    let mut checks = vec![Check {
        model: "fpm",
        axiom: "A1",
        status: if negatives > 0 {
            Status::Witness
        } else {
            Status::Pass
        },
        detail: format!(
            "non-positive rates on {negatives} of {} paths",
            cfg.pricing.n_paths
        ),
    }];
    checks.push(martingale_check("fpm", &accs, |k| 1.0 + delta * l0[k]));
    checks.push(Check {
        model: "fpm",
        axiom: "A3",
        status: if dev < 1e-10 { Status::Pass } else { Status::Fail },
        detail: format!("density exponent minus its driver integral deviates from the deterministic compensator by at most {dev:.3e}"),
    });
    Ok(checks)
}

fn verify_mfm(cfg: &ExperimentConfig, curve: &InitialCurve) -> Result<Vec<Check>, LabError> {
    let grid = calibrate_backward(curve, &cfg.vols()?, cfg.mfm_settings())?;
    let mut positive = true;
    let mut monotone = true;
    for i in 0..grid.n() {
        let d = grid.date(i);
        positive &= d.libor.iter().all(|l| *l >= 0.0) && d.numeraire.iter().all(|b| *b > 0.0);
        monotone &= d.libor.windows(2).all(|w| w[1] > w[0]);
    }
    let worst = mfm_repricing_error(&grid)?;
    let mut bond_err = 0.0f64;
    for s in 1..=grid.n() {
        let (b, _) = grid.mfm_bond(0, s, 0.0)?;
        bond_err = bond_err.max((b - curve.bond(s)).abs());
    }
    let a2 = worst <= 1e-7 && bond_err <= 1e-9;
    Ok(vec![
        Check {
            model: "mfm",
            axiom: "A1",
            status: if positive { Status::Pass } else { Status::Fail },
            detail: "LIBOR and numeraire functionals non-negative at every node".into(),
        },
        Check {
            model: "mfm",
            axiom: "A2",
            status: if a2 { Status::Pass } else { Status::Fail },
            detail: format!("digital repricing error {worst:.3e} (relative), time-zero bond error {bond_err:.3e}"),
        },
        Check {
            model: "mfm",
            axiom: "A3",
            status: if monotone { Status::Pass } else { Status::Fail },
            detail: "every rate is a monotone function of the Gaussian driver".into(),
        },
    ])
}

fn verify_affine(cfg: &ExperimentConfig) -> Result<Vec<Check>, LabError> {
    let model = cfg.affine_model()?;
    let curve = model.curve().clone();
    let n = model.n();
    let grid = TimeGrid::refine(curve.tenor(), 1, n.saturating_sub(1).max(1))?;
    let seed = cfg.driver.seed;
    let parts = par_chunks(&chunks(cfg), |range| {
        let paths = model.simulate_range(&grid, range, seed)?;
        let neg = (0..paths.n_paths())
            .filter(|&p| {
                (0..paths.n_dates()).any(|j| paths.rates_at(p, j).iter().any(|l| *l < 0.0))
            })
            .count() as u64;
        Ok((neg, weighted_rate_accs(&paths, |l| l)?))
    })?;
    let negatives: u64 = parts.iter().map(|p| p.0).sum();
    let accs: Vec<(usize, McAccumulator)> = merge_indexed(parts.into_iter().map(|p| p.1).collect())
        .into_iter()
        .enumerate()
        .map(|(i, a)| (i + 1, a))
        .collect();
    let horizon = model.horizon();
    let mut dev = 0.0f64;
    for k in 1..=n {
        for &(s, r) in &[
            (0.0, 0.5 * horizon),
            (0.25 * horizon, 0.75 * horizon),
            (0.0, horizon),
        ] {
            for &v in &[-1.0, 0.5] {
                let Ok((c0, c1)) = model.forward_measure_log_coeffs(k, v, s, r) else {
                    continue;
                };
                for &x in &[0.0, 0.02, 0.1, 0.5] {
                    let got = model.forward_measure_mgf(k, v, s, r, x)?.ln();
                    dev = dev.max((got - (c0 + c1 * x)).abs());
                }
            }
        }
    }
    let l0 = curve.libors();
    Ok(vec![
        Check {
            model: "affine",
            axiom: "A1",
            status: if negatives == 0 {
                Status::Pass
            } else {
                Status::Fail
            },
            detail: format!(
                "negative rates on {negatives} of {} paths",
                cfg.pricing.n_paths
            ),
        },
        martingale_check("affine", &accs, |k| l0[k]),
        Check {
            model: "affine",
            axiom: "A3",
            status: if dev <= 1e-10 {
                Status::Pass
            } else {
                Status::Fail
            },
            detail: format!("forward-measure log-MGF is affine in the state within {dev:.3e}"),
        },
    ])
}
