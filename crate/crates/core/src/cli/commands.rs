use std::io::Write;
use std::path::{Path, PathBuf};

use crate::cycles::{find_limit_cycle, period_function, CycleError, CycleOptions, CycleRecord, PeriodStatus, Ray};
use crate::equiv::{
    compare_fields, compare_periods, delta_pair, format_sig, guard_cycle, make_declared_pair, make_pair,
    ComparisonReport, EquivError, SystemPair,
};
use crate::flow::EvaluableField;
use crate::polycore::Poly;
use crate::symmetry::{alpha_from_delta, check_compatible, check_declared, classify, is_sigma_odd, ExactCheck};

use super::system::{NamedInvolution, System};
use super::{CliError, EXIT_FAILURE, EXIT_OK};

pub struct Settings {
    pub cycle: CycleOptions,
    pub radii: Vec<f64>,
    pub ray: Vec<f64>,
    pub threshold: f64,
    pub out: Option<PathBuf>,
}

type CmdResult = Result<i32, CliError>;

fn residual_lines(label: &str, residuals: &[Poly], names: &[&str]) -> Vec<String> {
    residuals
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(i, p)| format!("{label}[{i}] = {}", p.display_with(names)))
        .collect()
}

fn exact_part(
    what: &str,
    check: &ExactCheck,
    good: &str,
    bad: &str,
    names: &[&str],
    parts: &mut Vec<String>,
    details: &mut Vec<String>,
) -> bool {
    if check.holds {
        parts.push(format!("{what} {good}"));
    } else {
        parts.push(format!("{what} {bad}"));
        details.push(format!("{what} residual = {}", check.residual.display_with(names)));
    }
    check.holds
}

pub fn check(sys: &System, out: &mut dyn Write) -> CmdResult {
    let names = sys.var_names();
    if sys.involutions.is_empty() {
        writeln!(out, "{}: no involutions declared", sys.name)?;
        return Ok(EXIT_OK);
    }
    let mut all_ok = true;
    for inv in &sys.involutions {
        let mut parts = Vec::new();
        let mut details = Vec::new();
        match inv.kind {
            Some(kind) => {
                let report = check_declared(&sys.field, &inv.sigma, kind)?;
                if report.holds() {
                    parts.push(kind.to_string());
                } else {
                    all_ok = false;
                    parts.push(format!("NOT {kind}"));
                    details.extend(residual_lines("residual", &report.residuals, &names));
                }
            }
            None => parts.push(format!("{} (classified)", classify(&sys.field, &inv.sigma)?.kind)),
        }
        let delta = inv.delta.as_ref().or(sys.delta.as_ref());
        if let Some(d) = delta {
            all_ok &= exact_part(
                "delta",
                &is_sigma_odd(d, &inv.sigma)?,
                "sigma-odd",
                "NOT sigma-odd",
                &names,
                &mut parts,
                &mut details,
            );
        }
        let alpha =
            inv.alpha.as_ref().or(sys.alpha.as_ref()).map(|a| a.to_ratfn()).or_else(|| delta.map(alpha_from_delta));
        if let Some(a) = &alpha {
            let c = check_compatible(a, &inv.sigma)?;
            all_ok &= exact_part("alpha", &c, "compatible", "NOT compatible", &names, &mut parts, &mut details);
        }
        if inv.scaled.is_some() || sys.scaled.is_some() {
            match build_pair(sys, inv) {
                Some(Ok(_)) => parts.push("scaled field verified".into()),
                Some(Err(e)) => {
                    all_ok = false;
                    parts.push("scaled field MISMATCH".into());
                    details.push(e.to_string());
                }
                None => {}
            }
        }
        writeln!(out, "{}: {}: {}", sys.name, inv.name, parts.join(", "))?;
        for d in details {
            writeln!(out, "  {d}")?;
        }
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_FAILURE })
}

/// Pair for one involution entry, if it (or the file) supplies a scaler.
fn build_pair(sys: &System, inv: &NamedInvolution) -> Option<Result<SystemPair, EquivError>> {
    let delta = inv.delta.as_ref().or(sys.delta.as_ref());
    let alpha = inv.alpha.as_ref().or(sys.alpha.as_ref());
    if delta.is_none() && alpha.is_none() {
        return None;
    }
    let pair = (|| {
        let pair = match (delta, inv.kind) {
            (Some(d), Some(kind)) => delta_pair(&sys.field, d, &inv.sigma, kind)?,
            (Some(d), None) => delta_pair(&sys.field, d, &inv.sigma, classify(&sys.field, &inv.sigma)?.kind)?,
            (None, Some(kind)) => make_declared_pair(&sys.field, &alpha.unwrap().to_ratfn(), &inv.sigma, kind)?,
            (None, None) => make_pair(&sys.field, &alpha.unwrap().to_ratfn(), &inv.sigma)?,
        };
        match inv.scaled.as_ref().or(sys.scaled.as_ref()) {
            Some(s) => pair.with_scaled_field(s.field.clone(), s.den.clone()),
            None => Ok(pair),
        }
    })();
    Some(pair)
}

fn pairs(sys: &System, only: Option<&str>) -> Vec<(String, Result<SystemPair, EquivError>)> {
    sys.involutions
        .iter()
        .filter(|inv| only.is_none_or(|n| n == inv.name))
        .filter_map(|inv| build_pair(sys, inv).map(|p| (inv.name.clone(), p)))
        .collect()
}

/// `αV` from the file-level scaler, for systems without involutions.
fn unpaired_scaled_field(sys: &System) -> Result<Option<EvaluableField>, CliError> {
    if let Some(s) = &sys.scaled {
        return Ok(Some(EvaluableField::rational(&s.field, &s.den).map_err(EquivError::from)?));
    }
    let alpha = sys.alpha.as_ref().map(|a| a.to_ratfn()).or_else(|| sys.delta.as_ref().map(alpha_from_delta));
    match alpha {
        Some(a) => Ok(Some(EvaluableField::scaled(&sys.field, &a).map_err(EquivError::from)?)),
        None => Ok(None),
    }
}

fn ray(sys: &System, spec: &[f64]) -> Result<Ray, CliError> {
    let n = sys.dim();
    if spec.len() != 2 * n {
        return Err(CliError::Usage(format!(
            "--ray needs {} numbers (origin then direction), got {}",
            2 * n,
            spec.len()
        )));
    }
    Ray::new(spec[..n].to_vec(), spec[n..].to_vec()).map_err(|e| CliError::Usage(format!("--ray: {e}")))
}

fn numbered(path: &Path, k: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{k}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{k}"),
    };
    path.with_file_name(name)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Output { path: path.to_path_buf(), source })
}

pub fn period(sys: &System, settings: &Settings, scaled: bool, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let field = if scaled {
        match pairs(sys, None).into_iter().next() {
            Some((_, pair)) => pair?.scaled_field()?,
            None => unpaired_scaled_field(sys)?
                .ok_or_else(|| CliError::Usage("--scaled needs alpha, delta or scaled in the system file".into()))?,
        }
    } else {
        EvaluableField::polynomial(&sys.field).map_err(EquivError::from)?
    };
    let ray = ray(sys, &settings.ray)?;
    let samples = period_function(&field, &ray, &settings.radii, &settings.cycle);

    let mut csv = String::from("r");
    for v in &sys.vars {
        csv.push_str(&format!(",{v}0"));
    }
    csv.push_str(",T,status\n");
    for s in &samples {
        csv.push_str(&format_sig(s.r));
        for x in &s.point {
            csv.push(',');
            csv.push_str(&format_sig(*x));
        }
        csv.push_str(&format!(",{},{}\n", format_sig(s.period), s.status));
    }
    let ok: Vec<f64> = samples.iter().filter(|s| s.status == PeriodStatus::Ok).map(|s| s.period).collect();
    let summary = if ok.is_empty() {
        format!("{}: 0/{} samples ok", sys.name, samples.len())
    } else {
        let lo = ok.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ok.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        format!(
            "{}: {}/{} samples ok, T in [{}, {}]",
            sys.name,
            ok.len(),
            samples.len(),
            format_sig(lo),
            format_sig(hi)
        )
    };
    match &settings.out {
        Some(path) => {
            write_file(path, &csv)?;
            writeln!(out, "{summary}")?;
        }
        None => {
            out.write_all(csv.as_bytes())?;
            writeln!(err, "{summary}")?;
        }
    }
    Ok(if ok.is_empty() { EXIT_FAILURE } else { EXIT_OK })
}

pub fn compare(
    sys: &System,
    settings: &Settings,
    only: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let ray = ray(sys, &settings.ray)?;
    let mut reports: Vec<ComparisonReport> = Vec::new();
    let mut scaled_fields = Vec::new();
    let found = pairs(sys, only);
    if found.is_empty() {
        if let Some(name) = only {
            return Err(CliError::Usage(format!("no involution named `{name}` with alpha or delta")));
        }
        let scaled = unpaired_scaled_field(sys)?
            .ok_or_else(|| CliError::Usage("system file has no alpha, delta or scaled field".into()))?;
        let base = EvaluableField::polynomial(&sys.field).map_err(EquivError::from)?;
        reports.push(compare_fields(&sys.name, &base, &scaled, &ray, &settings.radii, &settings.cycle));
    }
    for (name, pair) in found {
        let pair = match pair {
            Ok(p) => p,
            Err(e) => {
                writeln!(out, "{} [{name}]: {e}", sys.name)?;
                return Ok(EXIT_FAILURE);
            }
        };
        let mut report = compare_periods(&pair, &ray, &settings.radii, &settings.cycle)?;
        report.label = format!("{} [{name}]", sys.name);
        if !report.hypotheses_hold() {
            writeln!(err, "warning: {}: hypotheses do not hold; comparing anyway", report.label)?;
        }
        scaled_fields.push((name, pair.scaled_field()?));
        reports.push(report);
    }
    for i in 0..scaled_fields.len() {
        for j in i + 1..scaled_fields.len() {
            let label = format!("{} [{} vs {}]", sys.name, scaled_fields[i].0, scaled_fields[j].0);
            reports.push(compare_fields(
                &label,
                &scaled_fields[i].1,
                &scaled_fields[j].1,
                &ray,
                &settings.radii,
                &settings.cycle,
            ));
        }
    }

    let mut all_ok = true;
    for (k, report) in reports.iter().enumerate() {
        let agree = report.periods_agree(settings.threshold);
        all_ok &= agree;
        let csv = report.to_csv();
        match &settings.out {
            Some(path) if reports.len() == 1 => write_file(path, &csv)?,
            Some(path) => write_file(&numbered(path, k + 1), &csv)?,
            None => {
                if reports.len() > 1 {
                    writeln!(out, "# {}", report.label)?;
                }
                out.write_all(csv.as_bytes())?;
            }
        }
        let verdict = if agree { "periods agree" } else { "periods DIFFER" };
        let line = format!("{report}: {verdict} (threshold {})", format_sig(settings.threshold));
        if settings.out.is_some() {
            writeln!(out, "{line}")?;
        } else {
            writeln!(err, "{line}")?;
        }
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_FAILURE })
}

fn describe(cycle: &CycleRecord, names: &[String]) -> String {
    let amp: Vec<String> =
        cycle.amplitude().iter().zip(names).map(|(a, v)| format!("{v}={}", format_sig(*a))).collect();
    let anchor: Vec<String> = cycle.anchor.iter().map(|x| format_sig(*x)).collect();
    format!(
        "{}, period {}, amplitude {}, anchor ({})",
        cycle.classification,
        format_sig(cycle.period),
        amp.join(" "),
        anchor.join(", ")
    )
}

pub fn limit_cycle(sys: &System, settings: &Settings, out: &mut dyn Write) -> CmdResult {
    let lc =
        sys.limit_cycle.as_ref().ok_or_else(|| CliError::Usage("system file has no limit_cycle section".into()))?;
    let section = lc.section();
    let base = EvaluableField::polynomial(&sys.field).map_err(EquivError::from)?;
    let cycle = match find_limit_cycle(&base, &lc.seed, &section, &settings.cycle) {
        Ok(c) => c,
        Err(CycleError::NoConvergence { classification, .. }) => {
            writeln!(out, "{}: no isolated cycle (classification: {classification})", sys.name)?;
            return Ok(EXIT_FAILURE);
        }
        Err(e) => {
            writeln!(out, "{}: {e}", sys.name)?;
            return Ok(EXIT_FAILURE);
        }
    };
    writeln!(out, "{}: {}", sys.name, describe(&cycle, &sys.vars))?;
    if let Some(path) = &settings.out {
        let mut csv = String::from("t");
        for v in &sys.vars {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
        let n = 256;
        for k in 0..n {
            let t = cycle.period * k as f64 / n as f64;
            csv.push_str(&format_sig(t));
            for x in cycle.state_at(t) {
                csv.push(',');
                csv.push_str(&format_sig(x));
            }
            csv.push('\n');
        }
        write_file(path, &csv)?;
    }

    let mut all_ok = true;
    for (name, pair) in pairs(sys, None) {
        let pair = pair?;
        let label = format!("{} [{name}]", sys.name);
        let guard = guard_cycle(&cycle, &pair.scaler());
        let scaled = pair.scaled_field()?;
        match find_limit_cycle(&scaled, &lc.seed, &section, &settings.cycle) {
            Ok(c) => {
                let rel = (c.period - cycle.period).abs() / cycle.period;
                let agree = rel <= settings.threshold && guard.ok;
                all_ok &= agree;
                writeln!(
                    out,
                    "{label} scaled: period {}, rel dT {}, guard min(1+delta) {} {}",
                    format_sig(c.period),
                    format_sig(rel),
                    format_sig(guard.min_one_plus_delta),
                    if guard.ok { "ok" } else { "VIOLATED" }
                )?;
            }
            Err(e) => {
                all_ok = false;
                writeln!(out, "{label} scaled: {e}")?;
            }
        }
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_FAILURE })
}
