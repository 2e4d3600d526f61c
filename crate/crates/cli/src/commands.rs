use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use losmimo::channel::{channel_matrix_with, ChannelOptions};
use losmimo::design::{evaluate, ArchitectureType, DesignConstraint, DesignOptions};
use losmimo::formulas::{
    dof_geometric, dof_geometric_capped, dof_infinite_rx, dof_orthogonal_max, dof_paraxial,
    dof_paraxial_capped, rank_upper_bound,
};
use losmimo::geometry::{classify_region_with, fraunhofer_distance};
use losmimo::modes::{decompose, effective_dof, singular_values, ModeProfile};
use losmimo::{synthesize, Error};

use crate::output::{emit, num, to_json, Table};
use crate::params::{LinkParams, Spacing};
use crate::{
    ArchitectureArg, CliError, DesignArgs, Format, LinkArgs, Metric, ModesArgs, Needs, Scale,
    SweepArgs, SweepVariable,
};

const ALL_NEEDED: Needs = Needs {
    band: true,
    distance: true,
    lengths: true,
};

fn channel_options(args: &LinkArgs) -> ChannelOptions {
    ChannelOptions {
        max_entries: args.max_entries,
        ..Default::default()
    }
}

fn design_options(args: &LinkArgs) -> DesignOptions {
    DesignOptions {
        sample_spacing: args.sample_spacing,
        threshold_db: args.threshold_db,
        kappa: args.kappa,
        channel: channel_options(args),
        ..Default::default()
    }
}

fn check_threshold(args: &LinkArgs) -> Result<(), CliError> {
    if args.threshold_db.is_finite() && args.threshold_db > 0.0 {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "threshold must be a positive number of dB, got {}",
            args.threshold_db
        )))
    }
}

/// Renders a serialized report in the requested format. Objects become
/// two-column `key,value` tables, arrays of objects one row per element.
fn render(value: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("json value");
            s.push('\n');
            s
        }
        Format::Csv | Format::Table => {
            let table = value_table(value);
            if format == Format::Csv {
                table.to_csv()
            } else {
                table.to_text()
            }
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => "NaN".into(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

fn value_table(value: &Value) -> Table {
    match value {
        Value::Array(items) => {
            let header: Vec<String> = match items.first() {
                Some(Value::Object(obj)) => obj.keys().cloned().collect(),
                _ => vec!["value".into()],
            };
            let mut table = Table::new(header.clone());
            for item in items {
                let row = match item {
                    Value::Object(obj) => header.iter().map(|k| obj.get(k).map_or(String::new(), cell)).collect(),
                    other => vec![cell(other)],
                };
                table.push(row);
            }
            table
        }
        Value::Object(obj) => {
            let mut table = Table::new(["key", "value"]);
            for (k, v) in obj {
                table.push(vec![k.clone(), cell(v)]);
            }
            table
        }
        other => {
            let mut table = Table::new(["value"]);
            table.push(vec![cell(other)]);
            table
        }
    }
}

fn finish<T: Serialize>(report: &T, args: &LinkArgs, default: Format) -> Result<(), CliError> {
    let format = args.format.unwrap_or(default);
    let text = if format == Format::Json {
        to_json(report)
    } else {
        render(&serde_json::to_value(report).expect("report serializes"), format)
    };
    emit(&text, args.output.as_deref())?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct DofReport {
    wavelength_m: f64,
    frequency_hz: f64,
    distance_m: f64,
    l_tx_m: f64,
    l_rx_m: f64,
    n_tx: usize,
    n_rx: usize,
    region: String,
    fraunhofer_distance_m: f64,
    eq2: f64,
    eq3: f64,
    eq7: usize,
    eq8: f64,
    eq9: f64,
    eq10: f64,
    eq12: f64,
    dof_numerical: usize,
    participation_ratio: f64,
    threshold_db: f64,
    warnings: Vec<String>,
}

pub fn dof(args: &LinkArgs) -> Result<(), CliError> {
    check_threshold(args)?;
    let p = args.resolve(ALL_NEEDED)?;
    let geom = p.geometry()?;
    let (tx, rx) = p.apertures()?;
    let (lam, d, lt, lr) = (p.wavelength, p.distance, p.l_tx, p.l_rx);
    let (n, m) = (tx.count(), rx.count());

    let formulas = [
        dof_paraxial(lt, lr, lam, d)?,
        dof_geometric(lt, lr, lam, d)?,
        dof_paraxial_capped(lt, lr, lam, d, n, m)?,
        dof_geometric_capped(lt, lr, lam, d, n, m)?,
        dof_infinite_rx(lt, lam, n)?,
        dof_orthogonal_max(lt, lr, lam, d)?,
    ];
    let mut warnings: Vec<String> = Vec::new();
    for w in formulas.iter().flat_map(|f| f.warnings.iter()) {
        if !warnings.contains(w) {
            warnings.push(w.clone());
        }
    }

    let channel = channel_matrix_with(&tx, &rx, &geom, &channel_options(args))?;
    let estimate = effective_dof(&singular_values(&channel)?, args.threshold_db)?;
    let report = DofReport {
        wavelength_m: lam,
        frequency_hz: geom.frequency(),
        distance_m: d,
        l_tx_m: lt,
        l_rx_m: lr,
        n_tx: n,
        n_rx: m,
        region: classify_region_with(&geom, lt, lr, args.kappa).to_string(),
        fraunhofer_distance_m: fraunhofer_distance(lt + lr, lam)?,
        eq2: formulas[0].value,
        eq3: formulas[1].value,
        eq7: rank_upper_bound(n, m)?,
        eq8: formulas[2].value,
        eq9: formulas[3].value,
        eq10: formulas[4].value,
        eq12: formulas[5].value,
        dof_numerical: estimate.strong_count,
        participation_ratio: estimate.participation_ratio,
        threshold_db: args.threshold_db,
        warnings,
    };
    finish(&report, args, Format::Json)
}

fn architecture_for(args: &DesignArgs) -> Result<ArchitectureType, CliError> {
    Ok(match (args.architecture, args.link.spacing) {
        (Some(ArchitectureArg::Line), _) => ArchitectureType::MimoLine,
        (Some(ArchitectureArg::Half), _) => ArchitectureType::HalfWavelengthArray,
        (Some(ArchitectureArg::Optimal), _) => ArchitectureType::OptimallySpacedArray,
        (Some(ArchitectureArg::Subarray), _) => ArchitectureType::SubArrayOfArrays,
        (None, Some(Spacing::Half)) => ArchitectureType::HalfWavelengthArray,
        (None, Some(Spacing::Optimal)) | (None, None) => ArchitectureType::OptimallySpacedArray,
        (None, Some(Spacing::Custom(_))) => {
            return Err(CliError::Usage(
                "design supports --spacing half|optimal; use --architecture for other layouts".into(),
            ))
        }
    })
}

pub fn design(args: &DesignArgs) -> Result<(), CliError> {
    check_threshold(&args.link)?;
    let arch = architecture_for(args)?;
    let needs = Needs {
        lengths: args.modes.is_none(),
        ..ALL_NEEDED
    };
    let p = args.link.resolve(needs)?;
    let geom = p.geometry()?;
    let constraint = match args.modes {
        Some(r) => DesignConstraint::FixedModes(r),
        None => DesignConstraint::FixedLengths {
            l_tx: p.l_tx,
            l_rx: p.l_rx,
        },
    };
    let options = DesignOptions {
        elements_per_subarray: args.subarray_elements,
        ..design_options(&args.link)
    };
    let built = synthesize(arch, &geom, constraint, &options)?;
    let report = evaluate(&built, &geom, &options)?;
    finish(&report, &args.link, Format::Json)
}

pub fn compare(args: &LinkArgs) -> Result<(), CliError> {
    check_threshold(args)?;
    let p = args.resolve(ALL_NEEDED)?;
    let reports = losmimo::compare(&p.geometry()?, p.l_tx, p.l_rx, &design_options(args))?;
    finish(&reports, args, Format::Json)
}

#[derive(Debug, Serialize)]
struct RegionReport {
    wavelength_m: f64,
    distance_m: f64,
    l_tx_m: f64,
    l_rx_m: f64,
    r_ff_tx_m: f64,
    r_ff_rx_m: f64,
    r_ff_combined_m: f64,
    geometric_threshold_m: f64,
    kappa: f64,
    region: String,
}

pub fn regions(args: &LinkArgs) -> Result<(), CliError> {
    let p = args.resolve(ALL_NEEDED)?;
    let geom = p.geometry()?;
    let (lt, lr, lam) = (p.l_tx, p.l_rx, p.wavelength);
    let report = RegionReport {
        wavelength_m: lam,
        distance_m: p.distance,
        l_tx_m: lt,
        l_rx_m: lr,
        r_ff_tx_m: fraunhofer_distance(lt, lam)?,
        r_ff_rx_m: fraunhofer_distance(lr, lam)?,
        r_ff_combined_m: fraunhofer_distance(lt + lr, lam)?,
        geometric_threshold_m: args.kappa * lt.max(lr),
        kappa: args.kappa,
        region: classify_region_with(&geom, lt, lr, args.kappa).to_string(),
    };
    finish(&report, args, Format::Json)
}

fn write_profile(path: &Path, profile: &ModeProfile) -> std::io::Result<()> {
    let mut text = String::from("coord,re,im\n");
    for (x, v) in profile.coords.iter().zip(&profile.values) {
        text.push_str(&format!("{},{},{}\n", x, v.re, v.im));
    }
    fs::write(path, text)
}

#[derive(Debug, Serialize)]
struct ModesSummary {
    n_tx: usize,
    n_rx: usize,
    modes: usize,
    strong_count: usize,
    participation_ratio: f64,
    threshold_db: f64,
    /// `20 log10(c_n / c_1)` of the strongly coupled modes.
    strong_intensities_db: Vec<f64>,
    exported: usize,
}

pub fn modes(args: &ModesArgs) -> Result<(), CliError> {
    check_threshold(&args.link)?;
    let p = args.link.resolve(ALL_NEEDED)?;
    let geom = p.geometry()?;
    let (tx, rx) = p.apertures()?;
    let channel = channel_matrix_with(&tx, &rx, &geom, &channel_options(&args.link))?;
    let dec = decompose(&channel)?;
    let est = dec.effective_dof(args.link.threshold_db)?;
    let c = dec.intensities();
    let rel_db = |x: f64| 20.0 * (x / c[0]).log10();

    let exported = match (&args.export, args.all, args.count) {
        (None, ..) => 0,
        (Some(_), true, _) => dec.len(),
        (Some(_), false, Some(k)) => k.min(dec.len()),
        (Some(_), false, None) => est.strong_count,
    };
    if let Some(dir) = &args.export {
        fs::create_dir_all(dir).map_err(|e| CliError::Failed(format!("cannot create {}: {e}", dir.display())))?;
        let mut table = Table::new(["n", "c_n", "rel_db"]);
        for (i, &cn) in c.iter().enumerate() {
            table.push(vec![(i + 1).to_string(), num(cn), num(rel_db(cn))]);
        }
        let fail = |path: &Path, e: std::io::Error| CliError::Failed(format!("cannot write {}: {e}", path.display()));
        let path = dir.join("intensities.csv");
        fs::write(&path, table.to_csv()).map_err(|e| fail(&path, e))?;
        for k in 1..=exported {
            let (a, b, _) = dec.mode_fields(k)?;
            let path = dir.join(format!("tx_mode_{k:04}.csv"));
            write_profile(&path, &a).map_err(|e| fail(&path, e))?;
            let path = dir.join(format!("rx_mode_{k:04}.csv"));
            write_profile(&path, &b).map_err(|e| fail(&path, e))?;
        }
    }
    let summary = ModesSummary {
        n_tx: tx.count(),
        n_rx: rx.count(),
        modes: dec.len(),
        strong_count: est.strong_count,
        participation_ratio: est.participation_ratio,
        threshold_db: est.threshold_db,
        strong_intensities_db: c[..est.strong_count].iter().map(|&x| rel_db(x)).collect(),
        exported,
    };
    finish(&summary, &args.link, Format::Json)
}

fn sweep_values(args: &SweepArgs) -> Result<Vec<f64>, CliError> {
    let (a, b, n) = (args.start, args.stop, args.points as usize);
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(CliError::Usage(format!("sweep needs start < stop, got {a} and {b}")));
    }
    if args.scale == Scale::Log && a <= 0.0 {
        return Err(CliError::Usage("log sweeps need a positive start".into()));
    }
    let last = (n - 1) as f64;
    let mut values: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / last;
            match args.scale {
                Scale::Linear => a + (b - a) * t,
                Scale::Log => (a.ln() + (b.ln() - a.ln()) * t).exp(),
            }
        })
        .collect();
    values[0] = a;
    values[n - 1] = b;
    Ok(values)
}

fn variable_name(v: SweepVariable) -> &'static str {
    match v {
        SweepVariable::Distance => "distance",
        SweepVariable::Wavelength => "wavelength",
        SweepVariable::LTx => "l_tx",
        SweepVariable::LRx => "l_rx",
    }
}

fn metric_name(m: Metric) -> &'static str {
    match m {
        Metric::Eq2 => "eq2",
        Metric::Eq3 => "eq3",
        Metric::Eq8 => "eq8",
        Metric::Eq9 => "eq9",
        Metric::Eq10 => "eq10",
        Metric::Eq12 => "eq12",
        Metric::RankBound => "rank_bound",
        Metric::Rff => "r_ff",
        Metric::Region => "region",
        Metric::NTx => "n_tx",
        Metric::NRx => "n_rx",
        Metric::DofNumerical => "dof_numerical",
        Metric::ParticipationRatio => "participation_ratio",
    }
}

enum Cell {
    Number(f64),
    Text(String),
}

fn point_metrics(p: &LinkParams, args: &SweepArgs, point: f64) -> Result<Vec<Cell>, CliError> {
    let link = &args.link;
    let geom = p.geometry()?;
    let (tx, rx) = p.apertures()?;
    let (lam, d, lt, lr) = (p.wavelength, p.distance, p.l_tx, p.l_rx);
    let (n, m) = (tx.count(), rx.count());
    let needs_svd = args
        .metrics
        .iter()
        .any(|m| matches!(m, Metric::DofNumerical | Metric::ParticipationRatio));
    let numerical = if needs_svd {
        let computed = channel_matrix_with(&tx, &rx, &geom, &channel_options(link))
            .and_then(|h| singular_values(&h))
            .and_then(|s| effective_dof(&s, link.threshold_db));
        match computed {
            Ok(e) => Some(e),
            Err(Error::Resource { rows, cols, budget, .. }) => {
                eprintln!(
                    "warning: {}={}: {rows}x{cols} channel exceeds the {budget}-entry budget; metric set to NaN",
                    variable_name(args.variable),
                    num(point)
                );
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    args.metrics
        .iter()
        .map(|metric| {
            Ok(match metric {
                Metric::Eq2 => Cell::Number(dof_paraxial(lt, lr, lam, d)?.value),
                Metric::Eq3 => Cell::Number(dof_geometric(lt, lr, lam, d)?.value),
                Metric::Eq8 => Cell::Number(dof_paraxial_capped(lt, lr, lam, d, n, m)?.value),
                Metric::Eq9 => Cell::Number(dof_geometric_capped(lt, lr, lam, d, n, m)?.value),
                Metric::Eq10 => Cell::Number(dof_infinite_rx(lt, lam, n)?.value),
                Metric::Eq12 => Cell::Number(dof_orthogonal_max(lt, lr, lam, d)?.value),
                Metric::RankBound => Cell::Number(rank_upper_bound(n, m)? as f64),
                Metric::Rff => Cell::Number(fraunhofer_distance(lt + lr, lam)?),
                Metric::Region => Cell::Text(classify_region_with(&geom, lt, lr, link.kappa).to_string()),
                Metric::NTx => Cell::Number(n as f64),
                Metric::NRx => Cell::Number(m as f64),
                Metric::DofNumerical => {
                    Cell::Number(numerical.map_or(f64::NAN, |e| e.strong_count as f64))
                }
                Metric::ParticipationRatio => {
                    Cell::Number(numerical.map_or(f64::NAN, |e| e.participation_ratio))
                }
            })
        })
        .collect()
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    check_threshold(&args.link)?;
    let needs = Needs {
        band: args.variable != SweepVariable::Wavelength,
        distance: args.variable != SweepVariable::Distance,
        lengths: args.variable != SweepVariable::LTx,
    };
    let base = args.link.resolve(needs)?;
    // without --lr the receive aperture follows the transmit one
    let tied = args.link.lr.is_none();
    let values = sweep_values(args)?;

    let name = variable_name(args.variable);
    let mut header = vec![name.to_string()];
    header.extend(args.metrics.iter().map(|&m| metric_name(m).to_string()));
    let mut table = Table::new(header.clone());
    let mut records = Vec::with_capacity(values.len());
    for &v in &values {
        let mut p = base;
        match args.variable {
            SweepVariable::Distance => p.distance = v,
            SweepVariable::Wavelength => p.wavelength = v,
            SweepVariable::LTx => {
                p.l_tx = v;
                if tied {
                    p.l_rx = v;
                }
            }
            SweepVariable::LRx => p.l_rx = v,
        }
        let cells = point_metrics(&p, args, v)?;
        let mut row = vec![num(v)];
        let mut record = Map::new();
        record.insert(name.into(), Value::from(v));
        for (key, c) in header[1..].iter().zip(cells) {
            match c {
                Cell::Number(x) => {
                    row.push(num(x));
                    record.insert(key.clone(), serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number));
                }
                Cell::Text(s) => {
                    row.push(s.clone());
                    record.insert(key.clone(), Value::String(s));
                }
            }
        }
        table.push(row);
        records.push(Value::Object(record));
    }
    let text = match args.link.format.unwrap_or(Format::Csv) {
        Format::Csv => table.to_csv(),
        Format::Table => table.to_text(),
        Format::Json => render(&Value::Array(records), Format::Json),
    };
    emit(&text, args.link.output.as_deref())?;
    Ok(())
}
