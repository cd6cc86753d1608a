use std::path::Path;

use anyhow::Result;
use num_complex::Complex64 as C64;
use qcs_core::bands::{self, kappa_grid, solve_band_structure};
use qcs_core::evolution::{
    default_times, hold_time_scan, BalanceDiagnostics, Experiment, InductiveExperiment, Snapshot,
};
use qcs_core::fluxonium::harmonic_spacing_profile;
use qcs_core::{CircuitParams, ZakField};

use crate::config::{RunConfig, Shunt};
use crate::output::{write_json, Csv, Metadata};

/// Fraction of `t_2π` at which snapshots are written.
const SNAPSHOT_FRACTIONS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn zak_csv(field: &ZakField) -> Csv {
    let mut csv = Csv::new(&["k", "phi", "re", "im", "density"]);
    let g = field.grid();
    for i in 0..g.n_k() {
        for j in 0..g.n_phi() {
            let z = field.values()[[i, j]];
            csv.row(vec![
                g.k(i).into(),
                g.phi(j).into(),
                z.re.into(),
                z.im.into(),
                z.norm_sqr().into(),
            ]);
        }
    }
    csv
}

fn line_csv(phi: &[f64], values: &[C64]) -> Csv {
    let mut csv = Csv::new(&["phi", "re", "im", "density"]);
    for (p, z) in phi.iter().zip(values) {
        csv.row(vec![
            (*p).into(),
            z.re.into(),
            z.im.into(),
            z.norm_sqr().into(),
        ]);
    }
    csv
}

fn finish(out: &Path, cfg: &RunConfig, mut meta: Metadata) -> Result<Vec<String>> {
    write_json(
        &out.join("config.json"),
        &ConfigEcho {
            schema_version: crate::output::SCHEMA_VERSION,
            config: cfg,
        },
    )?;
    meta.write(&out.join("metadata.json"))?;
    Ok(meta.failed_checks().to_vec())
}

#[derive(serde::Serialize)]
struct ConfigEcho<'a> {
    schema_version: u32,
    #[serde(flatten)]
    config: &'a RunConfig,
}

pub fn bands(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let p = cfg.base_params();
    let kappas = kappa_grid(cfg.n_kappa);
    let bs = solve_band_structure(&p, &kappas, cfg.n_bands, cfg.cutoff)?;
    let mut csv = Csv::new(&["kappa", "band", "energy"]);
    for (i, k) in kappas.iter().enumerate() {
        for b in 0..cfg.n_bands {
            csv.row(vec![(*k).into(), b.into(), bs.energy(i, b).into()]);
        }
    }
    csv.write(&out.join("bands.csv"))?;

    let phis = cfg.zak_grid()?.phi_values();
    for (label, kappa) in [("center", 0.0), ("edge", 0.5)] {
        for b in 0..2 {
            let f = bands::bloch_wavefunction(&p, kappa, b, &phis, cfg.cutoff)?;
            line_csv(&phis, &f.values).write(&out.join(format!("bloch_{label}_b{b}.csv")))?;
        }
    }

    let mut meta = Metadata::new("bands");
    let at = solve_band_structure(&p, &[0.0, 0.5], 2, cfg.cutoff)?;
    let doubled = solve_band_structure(&p, &[0.0, 0.5], 2, 2 * cfg.cutoff)?;
    let drift = at
        .energies
        .iter()
        .flatten()
        .zip(doubled.energies.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    meta.number("cutoff_doubling_change", drift);
    meta.check("cutoff_converged", drift < 1e-10);
    if p.e_j > 0.0 {
        meta.number(
            "plasma_ratio",
            (at.energy(0, 1) - at.energy(0, 0)) / (2.0 * p.e_j * p.e_c).sqrt(),
        );
    }
    meta.number("z_splitting", at.energy(1, 0) - at.energy(0, 0));
    meta.number("e_center_0", at.energy(0, 0));
    meta.number("e_center_1", at.energy(0, 1));
    meta.number("e_edge_0", at.energy(1, 0));
    meta.number("e_edge_1", at.energy(1, 1));
    finish(out, cfg, meta)
}

fn inductive_experiment(cfg: &RunConfig) -> Result<InductiveExperiment> {
    let settings = cfg.experiment_settings()?;
    Ok(InductiveExperiment::new(
        &cfg.inductive_params(),
        settings.inductive,
    )?)
}

pub fn fluxonium_modes(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let x = inductive_experiment(cfg)?;
    let p = cfg.inductive_params();
    let e_ho = p.oscillator_spacing();
    let spacing = if x.modes.len() >= qcs_core::fluxonium::MIN_SPACING_MODES {
        Some(harmonic_spacing_profile(&x.modes)?)
    } else {
        None
    };
    let mut csv = Csv::new(&["j", "energy", "spacing", "spacing_over_e_ho"]);
    for (j, e) in x.modes.energies.iter().enumerate() {
        let s = x.modes.energies.get(j + 1).map(|n| n - e);
        let cells = match s {
            Some(s) => vec![j.into(), (*e).into(), s.into(), (s / e_ho).into()],
            None => vec![j.into(), (*e).into(), "".into(), "".into()],
        };
        csv.row(cells);
    }
    csv.write(&out.join("energies.csv"))?;

    let modes_dir = crate::output::ensure_dir(&out.join("modes"))?;
    for (j, z) in x.zak_modes.iter().enumerate().take(cfg.gallery_modes) {
        zak_csv(z).write(&modes_dir.join(format!("mode_{j}.csv")))?;
    }

    let mut weights = Csv::new(&["j", "energy", "re", "im", "weight"]);
    for (j, (a, e)) in x
        .projection
        .amplitudes
        .iter()
        .zip(&x.modes.energies)
        .enumerate()
    {
        weights.row(vec![
            j.into(),
            (*e).into(),
            a.re.into(),
            a.im.into(),
            a.norm_sqr().into(),
        ]);
    }
    weights.write(&out.join("mode_weights.csv"))?;

    let mut meta = Metadata::new("fluxonium-modes");
    meta.number("e_ho", e_ho);
    meta.number("capture", x.projection.capture);
    meta.number("ground_edge_ratio", x.modes.edge_ratios[0]);
    meta.number("orthonormality_defect", x.orthonormality_defect());
    let w = x.projection.weights();
    let odd = w
        .iter()
        .skip(1)
        .step_by(2)
        .map(|v| v.sqrt())
        .fold(0.0, f64::max);
    meta.number("max_odd_amplitude", odd);
    if w.len() > 2 {
        meta.number("weight_0_plus_2", w[0] + w[2]);
    }
    if let Some(s) = &spacing {
        let tail: Vec<f64> = s.iter().skip(30).map(|v| (v / e_ho - 1.0).abs()).collect();
        if let Some(max) = tail.iter().cloned().reduce(f64::max) {
            meta.number("max_spacing_deviation_from_j30", max);
        }
    }
    meta.check("capture", x.projection.capture >= cfg.capture_threshold);
    meta.check(
        "ground_mode_confined",
        x.modes.edge_ratios[0] < qcs_core::fluxonium::EDGE_LIMIT,
    );
    meta.check("zak_orthonormality", x.orthonormality_defect() < 1e-5);
    finish(out, cfg, meta)
}

fn write_trace(out: &Path, r: &qcs_core::evolution::EvolutionResult) -> Result<()> {
    let mut csv = Csv::new(&["t", "p_center", "p_edge", "residual", "theta", "norm"]);
    for i in 0..r.times.len() {
        csv.row(vec![
            r.times[i].into(),
            r.p_center[i].into(),
            r.p_edge[i].into(),
            r.residual[i].into(),
            r.theta[i].into(),
            r.norms[i].into(),
        ]);
    }
    csv.write(&out.join("trace.csv"))
}

pub fn evolve(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let shunt = cfg.shunt.unwrap_or(Shunt::Inductive);
    let params = match shunt {
        Shunt::Inductive => cfg.inductive_params(),
        Shunt::FourPi => cfg.fourpi_params(),
    };
    let x = Experiment::new(&params, &cfg.experiment_settings()?)?;
    let d = x.dynamics();
    let t_2pi = d.t_2pi();
    let times = default_times(t_2pi, cfg.time_points, cfg.time_span);
    let snap_times: Vec<f64> = SNAPSHOT_FRACTIONS.iter().map(|f| f * t_2pi).collect();
    let r = x.evolve(&times, &snap_times)?;
    write_trace(out, &r)?;

    for (i, (_, s)) in r.snapshots.iter().enumerate() {
        let csv = match s {
            Snapshot::Zak(z) => zak_csv(z),
            Snapshot::Extended { phi, values } => line_csv(phi, values),
        };
        csv.write(&out.join(format!("snapshot_{i}.csv")))?;
    }

    let mut amps = Csv::new(&["j", "energy", "re", "im", "weight"]);
    for (j, (a, e)) in r.amplitudes.iter().zip(&r.energies).enumerate() {
        amps.row(vec![
            j.into(),
            (*e).into(),
            a.re.into(),
            a.im.into(),
            a.norm_sqr().into(),
        ]);
    }
    amps.write(&out.join("amplitudes.csv"))?;

    let mut meta = Metadata::new("evolve");
    meta.set(
        "shunt",
        if shunt == Shunt::Inductive {
            "ind"
        } else {
            "4pi"
        },
    );
    meta.number("t_2pi", r.t_2pi);
    meta.number("t_2pi_lowest_gap", r.t_2pi_lowest_gap);
    meta.number("capture", r.capture);
    meta.number("max_residual", r.max_residual());
    meta.number(
        "min_residual",
        r.residual.iter().cloned().fold(f64::MAX, f64::min),
    );
    meta.number("norm_drift", r.norm_drift());
    for (f, key) in SNAPSHOT_FRACTIONS
        .iter()
        .zip(["0", "quarter", "half", "three_quarter", "full"])
    {
        let o = d.observables(f * t_2pi);
        meta.number(&format!("p_center_{key}"), o.p_center);
        meta.number(&format!("p_edge_{key}"), o.p_edge);
    }
    for (i, f) in SNAPSHOT_FRACTIONS.iter().enumerate() {
        meta.number(&format!("snapshot_{i}_t"), f * t_2pi);
        if let Snapshot::Zak(z) = &r.snapshots[i].1 {
            let peaks: Vec<String> = z
                .k_marginal_peaks(0.3)
                .iter()
                .map(|k| crate::output::float(*k))
                .collect();
            meta.set(&format!("snapshot_{i}_k_peaks"), peaks.join(" "));
        }
    }
    meta.check("capture", r.capture >= x.capture_threshold());
    meta.check("unitarity", r.norm_drift() < 1e-6);
    meta.number("target_overlap", r.target_overlap);
    // overlapping targets let the residual dip to minus their overlap
    meta.check(
        "residual_bounded",
        r.residual.iter().all(|&v| v >= -r.target_overlap - 1e-6),
    );
    finish(out, cfg, meta)
}

pub fn protocol(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let mut meta = Metadata::new("protocol");
    let settings = cfg.experiment_settings()?;
    let shunts: Vec<Shunt> = match cfg.shunt {
        Some(s) => vec![s],
        None => vec![Shunt::Inductive, Shunt::FourPi],
    };
    let mut gates = Csv::new(&[
        "shunt",
        "fraction",
        "t_hold",
        "p_center",
        "p_edge",
        "residual",
        "theta",
        "imbalance",
    ]);
    for shunt in shunts {
        let (name, params) = match shunt {
            Shunt::Inductive => ("ind", cfg.inductive_params()),
            Shunt::FourPi => ("4pi", cfg.fourpi_params()),
        };
        let x = Experiment::new(&params, &settings)?;
        let d = x.dynamics();
        let t = d.t_2pi();
        let fractions = [0.25, 0.5, 0.75, 1.0];
        let holds: Vec<f64> = fractions.iter().map(|f| f * t).collect();
        for (f, row) in fractions.iter().zip(hold_time_scan(d, &holds)) {
            let o = row.observables;
            gates.row(vec![
                name.into(),
                (*f).into(),
                row.t_hold.into(),
                o.p_center.into(),
                o.p_edge.into(),
                o.residual.into(),
                o.theta.into(),
                (o.p_center - o.p_edge).abs().into(),
            ]);
        }
        let b = BalanceDiagnostics::new(d);
        meta.number(&format!("{name}_t_2pi"), t);
        meta.number(&format!("{name}_quarter_imbalance"), b.quarter_imbalance());
        meta.number(
            &format!("{name}_three_quarter_imbalance"),
            b.three_quarter_imbalance(),
        );
        meta.number(&format!("{name}_theta_jump"), b.theta_jump());
        meta.check(
            &format!("{name}_capture"),
            d.capture() >= x.capture_threshold(),
        );
    }
    gates.write(&out.join("x_gates.csv"))?;

    let mut z = Csv::new(&["ej_over_ec", "e_c", "e_j", "z_splitting", "z_over_ec"]);
    let mut splits = Vec::new();
    for &ratio in &cfg.sweep {
        let p = if ratio > 0.0 {
            CircuitParams::transmon(1.0 / ratio, 1.0)?
        } else {
            CircuitParams::transmon(cfg.e_c, 0.0)?
        };
        let s = bands::z_splitting(&p)?;
        splits.push((ratio, s / p.e_c));
        z.row(vec![
            ratio.into(),
            p.e_c.into(),
            p.e_j.into(),
            s.into(),
            (s / p.e_c).into(),
        ]);
    }
    z.write(&out.join("z_splitting.csv"))?;
    let mut sorted = splits.clone();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let monotone = sorted.windows(2).all(|w| w[1].1 >= w[0].1);
    meta.check("z_splitting_monotone", monotone);
    if let Some((_, s)) = splits.iter().find(|(r, _)| *r == 0.0) {
        meta.number("free_rotor_z_over_ec", *s);
    }
    finish(out, cfg, meta)
}
