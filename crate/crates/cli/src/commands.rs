use std::path::Path;

use bo3_core::flow::{self, default_speed_tolerance, traveling_wave_speed, FlowSpec};
use bo3_core::hierarchy::HierarchyTable;
use bo3_core::potentials::{self, rational_potential, reconstruct_symbol};
use bo3_core::spectral::{default_dt, integrate, Frame, IntegrationSpec};
use bo3_core::wave_lab::{
    classify_two_gap, illposedness_sequence, instability_experiment, stability_demo, three_gap_scan,
    weak_discontinuity_sequence, DecayProfile, ExperimentReport, ThreeGapScan,
};
use bo3_core::{ActionSpectrum, Error, GapSequence, TorusGrid};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{
    emit_json, has_extension, parse_indices, parse_times, read_json, require, to_value, write_file, CliError,
    CliResult,
};
use crate::{
    ClassifyArgs, EvolveArgs, FreqArgs, IllposedArgs, InstabilityArgs, PdeCompareArgs, ReconstructArgs,
    StabilityArgs, ThreeGapArgs, WeakArgs,
};

const DEFAULT_ORDER: usize = 4;
const DEFAULT_RECONSTRUCT_GRID: usize = 512;
const DEFAULT_PDE_GRID: usize = 256;
const DEFAULT_SNAPSHOTS: usize = 10;

fn read_gaps(source: Option<String>) -> CliResult<GapSequence> {
    read_json(&require(source, "gaps")?, "gaps")
}

fn nonempty(g: GapSequence) -> CliResult<GapSequence> {
    if g.is_empty() {
        return Err(Error::NoSupport.into());
    }
    Ok(g)
}

pub fn freq(args: FreqArgs) -> CliResult<()> {
    let actions: ActionSpectrum = read_json(&require(args.actions, "actions")?, "actions")?;
    let k = args.k.unwrap_or(DEFAULT_ORDER);
    if k < 1 {
        return Err(CliError::validation("--k must be at least 1"));
    }
    let indices = match args.n {
        Some(spec) => parse_indices(&spec)?,
        None => actions.support().collect(),
    };
    let table = HierarchyTable::new(&actions, k);
    let rows: Vec<Value> =
        indices.iter().map(|&n| json!({ "n": n, "omega": table.frequency(k, n) })).collect();
    emit_json(&Value::Array(rows), args.out.as_deref())
}

pub fn evolve(args: EvolveArgs) -> CliResult<()> {
    let g = nonempty(read_gaps(args.gaps)?)?;
    let k = args.k.unwrap_or(DEFAULT_ORDER);
    let times = parse_times(&require(args.t, "t")?)?;
    let spec = |t: f64| if args.experimental { FlowSpec::experimental(k, t) } else { FlowSpec::new(k, t) };
    let records: Vec<Value> = times
        .iter()
        .map(|&t| -> CliResult<Value> {
            let flowed = flow::evolve(&g, &spec(t)?)?;
            Ok(json!({ "t": t, "gaps": to_value(&flowed)? }))
        })
        .collect::<CliResult<_>>()?;
    emit_json(&Value::Array(records), args.out.as_deref())
}

fn grid_size(n: usize) -> CliResult<usize> {
    if n < 8 || !n.is_power_of_two() {
        return Err(CliError::validation(format!("grid size {n} must be a power of two >= 8")));
    }
    Ok(n)
}

fn save_grid(u: &TorusGrid, path: &Path) -> CliResult<()> {
    if has_extension(path, "csv") {
        let mut text = String::from("x,u\n");
        for (j, v) in u.samples().iter().enumerate() {
            text.push_str(&format!("{},{}\n", TorusGrid::node(j, u.size()), v));
        }
        return write_file(path, text.as_bytes());
    }
    Ok(u.save(path)?)
}

pub fn reconstruct(args: ReconstructArgs) -> CliResult<()> {
    let n = grid_size(args.n.unwrap_or(DEFAULT_RECONSTRUCT_GRID))?;
    let g = match args.gaps {
        Some(source) => read_json(&source, "gaps")?,
        None => {
            let p = require(args.p, "p")?;
            let gamma_p = require(args.gamma_p, "gamma-p")?;
            let coord = |gamma: f64, phase: Option<f64>| -> CliResult<Complex64> {
                if !(gamma > 0.0) || !gamma.is_finite() {
                    return Err(CliError::validation("actions must be positive and finite"));
                }
                Ok(Complex64::from_polar(gamma.sqrt(), phase.unwrap_or(0.0)))
            };
            let mut entries = vec![(p, coord(gamma_p, args.phase_p)?)];
            if let Some(q) = args.q {
                entries.push((q, coord(require(args.gamma_q, "gamma-q")?, args.phase_q)?));
            } else if args.gamma_q.is_some() {
                return Err(CliError::validation("--gamma-q given without --q"));
            }
            GapSequence::new(entries)?
        }
    };
    let symbol = reconstruct_symbol(&g)?;
    let u = rational_potential(&symbol, n)?;
    match args.out {
        None => emit_json(&to_value(&u)?, None),
        Some(path) => {
            save_grid(&u, &path)?;
            let summary = json!({
                "a": [symbol.a().re, symbol.a().im],
                "b": [symbol.b().re, symbol.b().im],
                "n": n,
                "out": path.display().to_string(),
                "p": symbol.p(),
                "q": symbol.q(),
            });
            emit_json(&summary, None)
        }
    }
}

pub fn classify(args: ClassifyArgs) -> CliResult<()> {
    let record = classify_two_gap(require(args.p, "p")?, require(args.q, "q")?, require(args.gamma_p, "gamma-p")?)?;
    let out = json!({ "gamma_q": record.gamma_q, "speed": record.speed, "valid": record.valid });
    emit_json(&out, args.out.as_deref())
}

fn parse_frame(name: Option<&str>) -> CliResult<Frame> {
    match name {
        None | Some("hamiltonian") => Ok(Frame::Hamiltonian),
        Some("literal") => Ok(Frame::Literal),
        Some(other) => Err(CliError::validation(format!("unknown frame `{other}`; use hamiltonian or literal"))),
    }
}

pub fn pde_compare(args: PdeCompareArgs) -> CliResult<()> {
    let g = nonempty(read_gaps(args.gaps)?)?;
    let n = grid_size(args.grid.unwrap_or(DEFAULT_PDE_GRID))?;
    let spec = IntegrationSpec {
        n,
        dt: args.dt.unwrap_or_else(|| default_dt(n)),
        t_final: args.t_final.unwrap_or(1.0),
        snapshots: args.snapshots.unwrap_or(DEFAULT_SNAPSHOTS),
        frame: parse_frame(args.frame.as_deref())?,
    };
    if !(spec.dt > 0.0) || !spec.dt.is_finite() {
        return Err(CliError::validation("--dt must be positive"));
    }
    let u0 = potentials::reconstruct(&g, n)?;
    let trajectory = integrate(&u0, &spec)?;
    let deviations: Vec<(f64, f64)> = trajectory
        .snapshots
        .par_iter()
        .map(|(t, u)| -> CliResult<(f64, f64)> {
            let exact = potentials::reconstruct(&flow::evolve(&g, &FlowSpec::new(4, *t)?)?, n)?;
            Ok((*t, u.l2_distance(&exact)?))
        })
        .collect::<CliResult<_>>()?;
    let max_deviation = deviations.iter().map(|&(_, d)| d).fold(0.0, f64::max);
    let scale = {
        let table = HierarchyTable::new(&g.actions(), 4);
        g.support().map(|m| (table.frequency(4, m) / m as f64).abs()).fold(0.0, f64::max)
    };
    let speed = traveling_wave_speed(&g, default_speed_tolerance(scale))?;
    let report = json!({
        "conservation": to_value(&trajectory.conservation)?,
        "dt": trajectory.dt,
        "frame": to_value(&spec.frame)?,
        "max_deviation": max_deviation,
        "n": n,
        "snapshots": deviations.iter().map(|&(t, d)| json!({ "l2_deviation": d, "t": t })).collect::<Vec<_>>(),
        "steps": trajectory.steps,
        "t_final": spec.t_final,
        "traveling_wave_speed": speed,
    });
    emit_json(&report, args.report.as_deref())
}

fn emit_report(report: &ExperimentReport, out: Option<&Path>) -> CliResult<()> {
    if let Some(path) = out.filter(|p| has_extension(p, "csv")) {
        let mut text = String::from("k,value_re,value_im\n");
        for point in &report.series {
            text.push_str(&format!("{},{},{}\n", point.k, point.value_re, point.value_im));
        }
        return write_file(path, text.as_bytes());
    }
    emit_json(&to_value(report)?, out)
}

pub fn instability(args: InstabilityArgs) -> CliResult<()> {
    let report = instability_experiment(
        args.p.unwrap_or(1),
        args.q.unwrap_or(2),
        args.gamma_p.unwrap_or(1.0),
        args.eps.unwrap_or(1e-3),
    )?;
    emit_report(&report, args.out.as_deref())
}

pub fn weak(args: WeakArgs) -> CliResult<()> {
    let g = read_gaps(args.gaps)?;
    let report =
        weak_discontinuity_sequence(&g, require(args.alpha, "alpha")?, args.t.unwrap_or(1.0), args.kmax.unwrap_or(1000))?;
    emit_report(&report, args.out.as_deref())
}

pub fn illposed(args: IllposedArgs) -> CliResult<()> {
    let profile = DecayProfile::Power { exponent: args.exponent.unwrap_or(1.75) };
    let (_, report) =
        illposedness_sequence(&profile, args.s.unwrap_or(0.25), args.t.unwrap_or(1.0), args.kmax.unwrap_or(20))?;
    emit_report(&report, args.out.as_deref())
}

pub fn threegap(args: ThreeGapArgs) -> CliResult<()> {
    let defaults = ThreeGapScan::default();
    let scan = ThreeGapScan {
        max_index: args.max_index.unwrap_or(defaults.max_index),
        lattice: args.lattice.unwrap_or(defaults.lattice),
        gamma_max: args.gamma_max.unwrap_or(defaults.gamma_max),
    };
    let (_, report) = three_gap_scan(&scan)?;
    emit_report(&report, args.out.as_deref())
}

pub fn stability(args: StabilityArgs) -> CliResult<()> {
    let zeta = Complex64::new(args.zeta_re.unwrap_or(1.0), args.zeta_im.unwrap_or(0.0));
    let times = parse_times(args.t.as_deref().unwrap_or("0:0.5:5"))?;
    let report = stability_demo(args.p.unwrap_or(1), zeta, args.delta.unwrap_or(1e-3), &times)?;
    emit_report(&report, args.out.as_deref())
}
