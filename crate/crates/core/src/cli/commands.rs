//! The six subcommands. Each builds a payload table and its metadata.

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::config::{Config, SCAN_MAX_PERIOD, SWEEP_MAX_PERIOD};
use super::output::{ratio_cells, Cell, Table};
use crate::bifurcation::{scan_range, segment, sweep_2d, window_segment, CurveKind, CurveSolver, ScanOptions, ScanSeries};
use crate::error::{Error, Result};
use crate::flow::hybrid_flow_with;
use crate::model::SystemParams;
use crate::strobo::StroboMap;
use crate::symbolic::{
    adding_check, check_endpoints, detect_orbit_with, empirical_firing_rate, farey_tree, firing_rate, staircase,
    summarize, Detection, OrbitSummary, Ratio,
};

/// Payload table plus command-specific metadata.
pub type CommandOutput = (Table, Map<String, Value>);

fn map_for(cfg: &Config, sys: &SystemParams) -> Result<StroboMap> {
    StroboMap::with_numerics(sys, cfg.numerics.numerics())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Samples of the stroboscopic map on a uniform grid of `[0, theta)` followed
/// by the boundary and its lateral images.
pub fn cmd_map(cfg: &Config) -> Result<CommandOutput> {
    let sys = cfg.validated_system()?;
    let map = map_for(cfg, &sys)?;
    let points = cfg.map.points;
    let theta = sys.theta;
    let samples: Vec<(f64, f64, u32)> = (0..points)
        .into_par_iter()
        .map(|i| {
            let x = theta * i as f64 / points as f64;
            map.step(x).map(|(y, s)| (x, y, s))
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(&["kind", "x", "s_of_x", "spikes"]);
    for (x, y, s) in samples {
        table.push(vec!["sample".into(), x.into(), y.into(), s.into()]);
    }
    let mut extra = Map::new();
    if let Some((n, sigma)) = map.active_boundary()? {
        let (s_minus, s_plus) = map.lateral_values();
        table.push(vec!["sigma".into(), sigma.into(), Cell::Empty, n.into()]);
        table.push(vec!["s_minus".into(), sigma.into(), s_minus.into(), (n - 1).into()]);
        table.push(vec!["s_plus".into(), sigma.into(), s_plus.into(), n.into()]);
        extra.insert("boundary".into(), json!({ "n": n, "sigma": sigma, "s_minus": s_minus, "s_plus": s_plus }));
    }
    Ok((table, extra))
}

const ORBIT_COLUMNS: [&str; 15] = [
    "section", "index", "t", "x", "spikes", "status", "period", "n", "word", "rho_num", "rho_den", "eta_num",
    "eta_den", "rate", "empirical_rate",
];

fn orbit_row(section: &str, index: usize) -> Vec<Cell> {
    let mut row = vec![Cell::Empty; ORBIT_COLUMNS.len()];
    row[0] = section.into();
    row[1] = index.into();
    row
}

/// Orbit reached from `orbit.x0`: summary, orbit points, one map-period of
/// the continuous-time trajectory, and its spike times.
pub fn cmd_orbit(cfg: &Config) -> Result<CommandOutput> {
    let sys = cfg.validated_system()?;
    let map = map_for(cfg, &sys)?;
    let opts = cfg.numerics.detect(SCAN_MAX_PERIOD);
    let x0 = cfg.orbit.x0;
    if !(0.0..sys.theta).contains(&x0) {
        return Err(Error::Config(format!("orbit.x0 = {x0} outside [0, theta)")));
    }
    let summary = summarize(&map, x0, &opts, None);
    if let crate::symbolic::PointStatus::Failed(msg) = &summary.status {
        return Err(Error::Numerical(format!("orbit detection failed: {msg}")));
    }
    let t_per = sys.forcing.t;
    let empirical = empirical_firing_rate(&sys, x0, cfg.numerics.horizon_periods * t_per)?;

    let mut table = Table::new(&ORBIT_COLUMNS);
    let mut row = orbit_row("summary", 0);
    row[5] = summary.status.label().into();
    row[6] = summary.period.into();
    row[7] = summary.branch_n.into();
    row[8] = summary.word.as_ref().map(|w| w.as_str().to_string()).into();
    let [a, b] = ratio_cells(summary.rho);
    row[9] = a;
    row[10] = b;
    let [a, b] = ratio_cells(summary.eta);
    row[11] = a;
    row[12] = b;
    row[13] = summary.eta.map(|e| firing_rate(e, t_per)).into();
    row[14] = empirical.into();
    table.push(row);

    let mut extra = Map::new();
    if let Detection::Periodic(orbit) = detect_orbit_with(&map, x0, &opts)? {
        for (i, (&x, &s)) in orbit.points.iter().zip(&orbit.per_point_spikes).enumerate() {
            let mut row = orbit_row("point", i);
            row[2] = (i as f64 * t_per).into();
            row[3] = x.into();
            row[4] = s.into();
            table.push(row);
        }
        if orbit.period == 1 {
            if let Some(fp) = map.fixed_point_with_tol(cfg.numerics.fp_tol)? {
                extra.insert(
                    "fixed_point".into(),
                    json!({ "x_bar": fp.x_bar, "branch_n": fp.branch_n, "multiplier": fp.multiplier }),
                );
            }
        }
        let horizon = orbit.period as f64 * t_per;
        let tr = hybrid_flow_with(&sys, orbit.points[0], horizon, cfg.orbit.samples_per_period, map.numerics())?;
        for (i, &(t, x)) in tr.samples.iter().enumerate() {
            let mut row = orbit_row("trajectory", i);
            row[2] = t.into();
            row[3] = x.into();
            table.push(row);
        }
        for (i, &t) in tr.spike_times.iter().enumerate() {
            let mut row = orbit_row("spike", i);
            row[2] = t.into();
            table.push(row);
        }
    }
    Ok((table, extra))
}

/// Curve kinds in output order: `A0`, then `AnR, AnC, AnL` for each `n`.
fn curve_columns(n_max: u32) -> Vec<CurveKind> {
    let mut v = vec![CurveKind::A0];
    for n in 1..=n_max {
        v.extend([CurveKind::AnR(n), CurveKind::AnC(n), CurveKind::AnL(n)]);
    }
    v
}

/// Bifurcation curves on a grid of duty cycles. Unsolvable entries are left
/// empty; solved entries must be strictly ordered within each row.
pub fn cmd_curves(cfg: &Config) -> Result<CommandOutput> {
    let sys = cfg.validated_system()?;
    let job = cfg.curves;
    if !(0.0 < job.d_min && job.d_min <= job.d_max && job.d_max < 1.0) {
        return Err(Error::Config(format!("curves: need 0 < d_min <= d_max < 1, got ({}, {})", job.d_min, job.d_max)));
    }
    let kinds = curve_columns(job.n_max);
    let mut names = vec!["d".to_string()];
    for k in &kinds {
        names.push(k.to_string());
        names.push(format!("inv{k}"));
    }
    let num = cfg.numerics.numerics();
    let rows: Vec<Vec<Option<f64>>> = linspace(job.d_min, job.d_max, job.d_points)
        .into_par_iter()
        .map(|d| {
            let solver = CurveSolver::with_numerics(&sys, d, num)?;
            let mut vals = Vec::with_capacity(kinds.len());
            for &k in &kinds {
                vals.push(match solver.solve(k) {
                    Ok(a) => Some(a),
                    Err(Error::NoRoot { .. }) => None,
                    Err(e) => return Err(e),
                });
            }
            let present: Vec<(CurveKind, f64)> =
                kinds.iter().zip(&vals).filter_map(|(k, v)| v.map(|a| (*k, a))).collect();
            for w in present.windows(2) {
                if !(w[0].1 < w[1].1) {
                    return Err(Error::OrderingViolation {
                        d,
                        detail: format!("{}={} is not below {}={}", w[0].0, w[0].1, w[1].0, w[1].1),
                    });
                }
            }
            let mut row = vec![Some(d)];
            for v in vals {
                row.push(v);
                row.push(v.map(|a| 1.0 / a));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut table = Table { columns: names, rows: Vec::new() };
    for r in rows {
        table.push(r.into_iter().map(Cell::from).collect());
    }
    Ok((table, Map::new()))
}

fn summary_cells(s: &OrbitSummary) -> Vec<Cell> {
    let [rn, rd] = ratio_cells(s.rho);
    let [en, ed] = ratio_cells(s.eta);
    vec![
        s.period.into(),
        s.branch_n.into(),
        rn,
        rd,
        en,
        ed,
        s.word.as_ref().map(|w| w.as_str().to_string()).into(),
        s.status.label().into(),
    ]
}

/// Long-format `(d, 1/A)` grid of orbit classifications.
pub fn cmd_sweep(cfg: &Config) -> Result<CommandOutput> {
    let sys = cfg.validated_system()?;
    let job = cfg.sweep;
    let opts = ScanOptions {
        detect: cfg.numerics.detect(SWEEP_MAX_PERIOD),
        window: None,
        x0: 0.0,
        numerics: cfg.numerics.numerics(),
    };
    let grid = sweep_2d(
        &sys,
        (job.d_min, job.d_max),
        (job.inv_a_min, job.inv_a_max),
        (job.d_points, job.inv_a_points),
        &opts,
    )
    .map_err(|e| Error::Config(e.to_string()))?;
    let mut table = Table::new(&[
        "d", "invA", "period", "n", "rho_num", "rho_den", "eta_num", "eta_den", "word", "status",
    ]);
    let mut failed = 0usize;
    for (i_d, &d) in grid.d_axis.iter().enumerate() {
        for (i_a, &inv_a) in grid.inv_a_axis.iter().enumerate() {
            let cell = grid.cell(i_d, i_a);
            failed += matches!(cell.status, crate::symbolic::PointStatus::Failed(_)) as usize;
            let mut row = vec![d.into(), inv_a.into()];
            row.extend(summary_cells(cell));
            table.push(row);
        }
    }
    let mut extra = Map::new();
    extra.insert("failed_cells".into(), json!(failed));
    Ok((table, extra))
}

fn window_curve(sys: &SystemParams, n: u32, d0: f64, d1: f64) -> Result<impl Fn(f64) -> (f64, f64) + Sync + Copy> {
    let (start, _) = window_segment(sys, n, d0)?;
    let (_, end) = window_segment(sys, n, d1)?;
    Ok(segment((d0, start), (d1, end)))
}

/// Devil's staircase across one or more consecutive adding windows. Each
/// window is checked for monotonicity, endpoints and the adding rule.
pub fn cmd_staircase(cfg: &Config) -> Result<CommandOutput> {
    let sys = cfg.validated_system()?;
    let job = cfg.staircase;
    if job.windows == 0 {
        return Err(Error::Config("staircase.windows must be at least 1".into()));
    }
    let mut table = Table::new(&[
        "lambda", "d", "invA", "window", "period", "n", "rho_num", "rho_den", "eta_num", "eta_den", "word",
        "status",
    ]);
    let mut extra = Map::new();
    if job.steps == 0 {
        return Ok((table, extra));
    }
    let mut windows_meta = Vec::new();
    let mut previous_last: Option<Ratio> = None;
    for k in 0..job.windows {
        let n = job.window + k;
        let opts = ScanOptions {
            detect: cfg.numerics.detect(SCAN_MAX_PERIOD),
            window: Some(n),
            x0: 0.0,
            numerics: cfg.numerics.numerics(),
        };
        let curve = window_curve(&sys, n, job.d_start, job.d_end)?;
        let series = scan_range(&sys, &curve, 0.0, 1.0, job.steps, &opts)?;
        for i in 0..series.len() {
            let (d, inv_a) = series.points[i];
            let lambda = (k as f64 + series.lambda[i]) / job.windows as f64;
            let mut row = vec![lambda.into(), d.into(), inv_a.into(), n.into()];
            row.extend(summary_cells(&series.summaries[i]));
            table.push(row);
        }
        let plateaus = staircase(&series)?;
        check_endpoints(&plateaus)?;
        let first = plateaus.first().map(|p| p.eta);
        if let (Some(prev), Some(first)) = (previous_last, first) {
            if prev != first {
                return Err(Error::MonotonicityViolation {
                    detail: format!("window {n} starts at eta={first}, previous ended at eta={prev}"),
                });
            }
        }
        previous_last = plateaus.last().map(|p| p.eta);
        let refine = |l0: f64, l1: f64| -> Result<ScanSeries> {
            scan_range(&sys, &curve, l0, l1, job.refine_steps, &opts)
        };
        let report = adding_check(&series, &refine, job.adding_depth)?;
        windows_meta.push(json!({
            "window": n,
            "plateaus": plateaus.len(),
            "adding_steps": report.steps.len(),
            "refined_steps": report.steps.iter().filter(|s| s.refined).count(),
        }));
    }
    extra.insert("windows".into(), Value::Array(windows_meta));
    Ok((table, extra))
}

/// Farey tree of adding words.
pub fn cmd_farey(cfg: &Config) -> Result<CommandOutput> {
    let nodes = farey_tree(cfg.farey.depth);
    let mut table = Table::new(&["depth", "word", "rho_num", "rho_den", "parent_left", "parent_right"]);
    for node in &nodes {
        let (pl, pr) = match node.parents {
            Some((a, b)) => (nodes[a].word.as_str().into(), nodes[b].word.as_str().into()),
            None => (Cell::Empty, Cell::Empty),
        };
        let [rn, rd] = ratio_cells(Some(node.rho));
        table.push(vec![node.depth.into(), node.word.as_str().into(), rn, rd, pl, pr]);
    }
    Ok((table, Map::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{rotation_number, SymbolicSequence};

    fn cfg(overrides: &[&str]) -> Config {
        let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        Config::from_json_with_overrides(None, &o).unwrap()
    }

    fn col(t: &Table, name: &str) -> usize {
        t.column(name).unwrap()
    }

    #[test]
    fn map_shows_the_jump() {
        let (t, extra) = cmd_map(&cfg(&["map.points=1000"])).unwrap();
        assert_eq!(t.rows.len(), 1003);
        let b = &extra["boundary"];
        assert_eq!(b["n"], json!(1));
        assert!((b["sigma"].as_f64().unwrap() - 0.5242871).abs() < 1e-6);
        assert!((b["s_minus"].as_f64().unwrap() - 0.6933705).abs() < 1e-6);
        assert!((b["s_plus"].as_f64().unwrap() - 0.3066295).abs() < 1e-6);
        // monotone increasing inside each branch, one downward jump overall
        let ys: Vec<f64> = t.rows[..1000]
            .iter()
            .map(|r| match r[2] {
                Cell::Float(v) => v,
                _ => panic!(),
            })
            .collect();
        assert_eq!(ys.windows(2).filter(|w| w[1] < w[0]).count(), 1);
    }

    #[test]
    fn map_without_forcing_is_continuous() {
        let (t, extra) = cmd_map(&cfg(&["forcing.A=0", "map.points=200"])).unwrap();
        assert!(extra.get("boundary").is_none());
        assert_eq!(t.rows.len(), 200);
    }

    #[test]
    fn orbit_lr_cycle() {
        let (t, extra) = cmd_orbit(&cfg(&[])).unwrap();
        let s = &t.rows[0];
        assert_eq!(s[col(&t, "word")], Cell::Text("LR".into()));
        assert_eq!(s[col(&t, "eta_num")], Cell::Int(1));
        assert_eq!(s[col(&t, "eta_den")], Cell::Int(2));
        match s[col(&t, "rate")] {
            Cell::Float(r) => assert!((r - 0.2631579).abs() < 1e-6),
            _ => panic!(),
        }
        let spikes = t.rows.iter().filter(|r| r[0] == Cell::Text("spike".into())).count();
        assert_eq!(spikes, 1);
        assert!(extra.get("fixed_point").is_none());
    }

    #[test]
    fn orbit_subthreshold_reads_l() {
        let (t, extra) = cmd_orbit(&cfg(&["forcing.A=0.3"])).unwrap();
        assert_eq!(t.rows[0][col(&t, "word")], Cell::Text("L".into()));
        assert_eq!(t.rows[0][col(&t, "eta_num")], Cell::Int(0));
        assert_eq!(extra["fixed_point"]["branch_n"], json!(0));
    }

    #[test]
    fn curves_row_matches_solver() {
        let c = cfg(&["curves.d_min=0.5", "curves.d_max=0.5", "curves.d_points=1"]);
        let (t, _) = cmd_curves(&c).unwrap();
        let sys = c.validated_system().unwrap();
        let a1r = crate::bifurcation::solve_curve(&sys, CurveKind::AnR(1), 0.5).unwrap();
        assert_eq!(t.rows[0][col(&t, "A1R")], Cell::Float(a1r));
        assert_eq!(t.columns.len(), 1 + 2 * 10);
    }

    #[test]
    fn sweep_layout() {
        let c = cfg(&["sweep.d_points=3", "sweep.inv_a_points=4"]);
        let (t, _) = cmd_sweep(&c).unwrap();
        assert_eq!(t.rows.len(), 12);
        for chunk in t.rows.chunks(4) {
            assert!(chunk.iter().all(|r| r[0] == chunk[0][0]));
        }
    }

    #[test]
    fn empty_staircase_is_header_only() {
        let (t, _) = cmd_staircase(&cfg(&["staircase.steps=0"])).unwrap();
        assert!(t.rows.is_empty());
    }

    #[test]
    fn farey_rows() {
        let (t, _) = cmd_farey(&cfg(&["farey.depth=0"])).unwrap();
        assert_eq!(t.rows.len(), 2);
        let (t, _) = cmd_farey(&cfg(&[])).unwrap();
        let words: Vec<String> = t.rows.iter().map(|r| match &r[1] {
            Cell::Text(s) => s.clone(),
            _ => panic!(),
        }).collect();
        for w in ["LLLLR", "LLRLR", "LRLRR", "LRRRR"] {
            assert!(words.iter().any(|x| x == w), "{w}");
        }
        for (r, w) in t.rows.iter().zip(&words) {
            let rho = rotation_number(&SymbolicSequence::parse(w).unwrap());
            assert_eq!(r[2], Cell::Int(*rho.numer()));
            assert_eq!(r[3], Cell::Int(*rho.denom()));
        }
    }
}
