//! Sweeps and tables behind the command-line subcommands.
//!
//! CSV columns:
//!
//! * noise study: `clifford_infidelity, t_infidelity, rs_error, fidelity,
//!   antisym_probability, t_count, clifford_count, peak_qubits`. The row with
//!   `rs_error = 0` keeps rotations exact and runs without noise.
//! * resources: `n, n_comp, n_ctrl, ratio, crossover, avg_corrections,
//!   avg_corrections_ratio`.
//! * synth: `axis, theta, epsilon, t_count, total_count, error, reference_t,
//!   reference_total, word`. The reference columns are filled for `Ry` at
//!   `2 arccos √(1/3)` on tabulated tolerances only.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::builder::{build, particle_wires, BuildOptions, BuildTrace, OrbitalSet, Variant};
use crate::circuit::{Circuit, GateCounts};
use crate::config::{BuildConfig, NoiseStudyConfig, ResourcesConfig, SynthConfig};
use crate::error::{Error, Result};
use crate::lower::{lower_circuit_with_cache, Lowered, LoweringOptions};
use crate::resources::{hybrid_cost, resource_row, ResourceRow};
use crate::sim::{fidelity_with_pure, DensityOptions, DensitySimulator, NoiseModel, StateVector};
use crate::synth::{Axis, SynthCache, REFERENCE_RY_COUNTS};
use crate::verify::{antisymmetrizer_oracle, with_antisym_test};

/// Writes `rows` as CSV with a header row.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidArgument(format!("csv: {other:?}")),
    }
}

/// Output of the build subcommand.
#[derive(Debug, Clone)]
pub struct BuildArtifact {
    pub circuit: Circuit,
    pub trace: BuildTrace,
    pub lowered: Option<Lowered>,
}

impl BuildArtifact {
    /// The circuit to write: lowered if lowering was requested.
    pub fn output_circuit(&self) -> &Circuit {
        self.lowered.as_ref().map_or(&self.circuit, |l| &l.circuit)
    }

    /// `key=value` lines: structure, raw counts, and lowered counts.
    pub fn report(&self) -> String {
        let l = self.circuit.layout();
        let mut s = String::new();
        let _ = writeln!(s, "particles={}", l.n_particles);
        let _ = writeln!(s, "eta={}", l.eta);
        let _ = writeln!(s, "ancillas={}", l.ancillas);
        let _ = writeln!(s, "cbits={}", l.cbits);
        let t = &self.trace;
        let _ = writeln!(s, "u_blocks={}", t.u_blocks);
        let _ = writeln!(s, "u_dagger_blocks={}", t.u_dagger_blocks);
        let _ = writeln!(s, "cswaps={}", t.cswaps);
        let _ = writeln!(s, "cnx={}", t.cnx);
        let _ = writeln!(s, "phase_corrections={}", t.phase_corrections);
        prefixed(&mut s, "gates.", &self.circuit.counts());
        if let Some(low) = &self.lowered {
            let _ = writeln!(s, "lowered.work={}", low.circuit.layout().work);
            let _ = writeln!(s, "lowered.absorbed_x={}", low.absorbed_x);
            prefixed(&mut s, "lowered.", &low.counts);
            prefixed(&mut s, "lowered.unconditioned.", &low.unconditioned);
        }
        s
    }
}

fn prefixed(s: &mut String, prefix: &str, c: &GateCounts) {
    for line in c.to_report().lines() {
        let _ = writeln!(s, "{prefix}{line}");
    }
}

pub fn run_build(cfg: &BuildConfig, seed: u64, base: &Path) -> Result<BuildArtifact> {
    let orbitals = cfg.orbital_set(seed, base)?;
    let out = build(&orbitals, &cfg.options)?;
    let lowered = match &cfg.lowering {
        Some(opts) => Some(lower_circuit_with_cache(
            &out.circuit,
            opts,
            &mut SynthCache::new(),
        )?),
        None => None,
    };
    Ok(BuildArtifact {
        circuit: out.circuit,
        trace: out.trace,
        lowered,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseRow {
    pub clifford_infidelity: f64,
    pub t_infidelity: f64,
    pub rs_error: f64,
    pub fidelity: f64,
    pub antisym_probability: f64,
    pub t_count: usize,
    pub clifford_count: usize,
    pub peak_qubits: usize,
}

/// State preparation followed by swap tests, lowered as two parts.
#[derive(Debug, Clone)]
pub struct NoiseCircuit {
    pub circuit: Circuit,
    /// First gate of the swap tests.
    pub split: usize,
    pub test_bits: Vec<usize>,
    /// Counts of the preparation part.
    pub prep_counts: GateCounts,
}

/// Lowers `prep` and its swap tests separately so the prepared state can
/// be inspected before the tests run.
pub fn noise_circuit(
    prep: &Circuit,
    opts: &LoweringOptions,
    cache: &mut SynthCache,
) -> Result<NoiseCircuit> {
    let (full, start, test_bits) = with_antisym_test(prep)?;
    let layout = *full.layout();
    let head = Circuit::from_gates(layout, full.gates()[..start].to_vec())?;
    let tail = Circuit::from_gates(layout, full.gates()[start..].to_vec())?;
    let head = lower_circuit_with_cache(&head, opts, cache)?;
    let tail = lower_circuit_with_cache(&tail, opts, cache)?;
    let work = head.circuit.layout().work.max(tail.circuit.layout().work);
    let wide = layout.with_work(work);
    let mut circuit = head.circuit.widened(wide)?;
    let split = circuit.len();
    circuit.append(&tail.circuit.widened(wide)?)?;
    Ok(NoiseCircuit {
        circuit,
        split,
        test_bits,
        prep_counts: head.counts,
    })
}

/// Noisy run of `nc`: fidelity of the particle registers with `sigma`
/// right after preparation, and the probability that every swap test
/// reports antisymmetry.
pub fn noise_point(
    nc: &NoiseCircuit,
    sigma: &StateVector,
    noise: NoiseModel,
    qubit_cap: usize,
) -> Result<(f64, f64, usize)> {
    let particles = particle_wires(nc.circuit.layout());
    let opts = DensityOptions {
        keep: Some(Vec::new()),
        tracked_bits: nc.test_bits.clone(),
        qubit_cap,
    };
    let mut sim = DensitySimulator::new(&nc.circuit, noise, &opts)?;
    sim.run_to(nc.split)?;
    let rho = sim.snapshot(&particles)?;
    let fidelity = fidelity_with_pure(&rho, sigma)?;
    let run = sim.finish()?;
    let p = run.probability_all(true) / run.total_probability();
    Ok((fidelity, p, run.peak_qubits))
}

/// Full sweep over the configured grid, rows sorted by
/// `(clifford_infidelity, t_infidelity, rs_error)`.
pub fn run_noise_study(
    cfg: &NoiseStudyConfig,
    seed: u64,
    base: &Path,
    cache: &mut SynthCache,
) -> Result<Vec<NoiseRow>> {
    cfg.validate()?;
    let orbitals = cfg.orbitals.resolve(cfg.eta, seed, base)?;
    if orbitals.len() != cfg.n {
        return Err(Error::Config {
            field: "orbitals".into(),
            message: format!("{} orbitals given for n = {}", orbitals.len(), cfg.n),
        });
    }
    noise_study(cfg, &orbitals, cache)
}

pub fn noise_study(
    cfg: &NoiseStudyConfig,
    orbitals: &OrbitalSet,
    cache: &mut SynthCache,
) -> Result<Vec<NoiseRow>> {
    let prep = build(
        orbitals,
        &BuildOptions {
            variant: Variant::Measurement,
            reuse_ancillas: cfg.reuse_ancillas,
            sort_by_cost: false,
        },
    )?
    .circuit;
    let sigma = antisymmetrizer_oracle(orbitals)?;

    let mut circuits = Vec::new();
    let mut points = Vec::new();
    for &eps in &cfg.rs_errors {
        let opts = LoweringOptions {
            keep_rotations: false,
            rotation_epsilon: eps,
            synth: cfg.synth,
            ..LoweringOptions::default()
        };
        circuits.push(noise_circuit(&prep, &opts, cache)?);
        for &c in &cfg.clifford_infidelities {
            for &t in &cfg.t_infidelities {
                points.push((c, t, eps, circuits.len() - 1));
            }
        }
    }
    if cfg.include_ideal {
        circuits.push(noise_circuit(&prep, &LoweringOptions::default(), cache)?);
        points.push((0.0, 0.0, 0.0, circuits.len() - 1));
    }

    let mut rows = points
        .par_iter()
        .map(|&(c, t, eps, k)| {
            let nc = &circuits[k];
            let (fidelity, p, peak) =
                noise_point(nc, &sigma, NoiseModel::new(c, t)?, cfg.qubit_cap)?;
            Ok(NoiseRow {
                clifford_infidelity: c,
                t_infidelity: t,
                rs_error: eps,
                fidelity,
                antisym_probability: p,
                t_count: nc.prep_counts.t_like,
                clifford_count: nc.prep_counts.clifford,
                peak_qubits: peak,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.clifford_infidelity
            .total_cmp(&b.clifford_infidelity)
            .then(a.t_infidelity.total_cmp(&b.t_infidelity))
            .then(a.rs_error.total_cmp(&b.rs_error))
    });
    Ok(rows)
}

/// Rows for `min_n..=max_n`.
pub fn resource_table(cfg: &ResourcesConfig) -> Result<Vec<ResourceRow>> {
    cfg.validate()?;
    (cfg.min_n..=cfg.max_n).map(resource_row).collect()
}

/// Aligned text rendering of the resource table plus hybrid costs.
pub fn resource_text(rows: &[ResourceRow], hybrid: &[(u64, u64)]) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>5} {:>8} {:>8} {:>8} {:>9} {:>12} {:>9}",
        "N", "n_comp", "n_ctrl", "ratio", "crossover", "avg_corr", "corr/ctrl"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>5} {:>8} {:>8} {:>8.4} {:>9} {:>12.4} {:>9.4}",
            r.n,
            r.n_comp,
            r.n_ctrl,
            r.ratio,
            if r.crossover { "yes" } else { "no" },
            r.avg_corrections,
            r.avg_corrections_ratio
        );
    }
    for &(n, split) in hybrid {
        let (comp, cnx) = hybrid_cost(n, split)?;
        let _ = writeln!(
            s,
            "hybrid N={n} split={split}: comparators={comp} cnx={cnx}"
        );
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthRow {
    pub axis: Axis,
    pub theta: f64,
    pub epsilon: f64,
    pub t_count: usize,
    pub total_count: usize,
    pub error: f64,
    pub reference_t: Option<usize>,
    pub reference_total: Option<usize>,
    pub word: String,
}

/// Tabulated `(T, total)` for `Ry(θ)` at `epsilon`, if any.
pub fn reference_counts(axis: Axis, theta: f64, epsilon: f64) -> Option<(usize, usize)> {
    let angle = 2.0 * (1.0f64 / 3.0).sqrt().acos();
    if axis != Axis::Y || (theta - angle).abs() > 1e-12 {
        return None;
    }
    REFERENCE_RY_COUNTS
        .iter()
        .find(|(e, _, _)| (e - epsilon).abs() <= 1e-9 * e)
        .map(|&(_, t, total)| (t, total))
}

pub fn synth_table(cfg: &SynthConfig, cache: &mut SynthCache) -> Result<Vec<SynthRow>> {
    cfg.validate()?;
    let mut eps = cfg.epsilons.clone();
    eps.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    eps.iter()
        .map(|&e| {
            let r = cache.synthesize(cfg.axis, cfg.theta, e, &cfg.synth)?;
            let reference = reference_counts(cfg.axis, cfg.theta, e);
            Ok(SynthRow {
                axis: cfg.axis,
                theta: cfg.theta,
                epsilon: e,
                t_count: r.t_count,
                total_count: r.total_count,
                error: r.error,
                reference_t: reference.map(|x| x.0),
                reference_total: reference.map(|x| x.1),
                word: r.word_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::OrbitalSpec;

    fn small_noise_config() -> NoiseStudyConfig {
        NoiseStudyConfig {
            n: 2,
            eta: 2,
            orbitals: OrbitalSpec::Integers(vec![0, 3]),
            clifford_infidelities: vec![0.0, 1e-3],
            t_infidelities: vec![0.0, 1e-2],
            rs_errors: vec![0.1],
            include_ideal: true,
            reuse_ancillas: true,
            synth: crate::synth::SynthOptions::default(),
            qubit_cap: 12,
            synth_cache: None,
        }
    }

    #[test]
    fn small_sweep_is_sorted_and_sane() {
        let cfg = small_noise_config();
        let rows = run_noise_study(&cfg, 0, Path::new("."), &mut SynthCache::new()).unwrap();
        assert_eq!(rows.len(), 5);
        let ideal = rows.iter().find(|r| r.rs_error == 0.0).unwrap();
        assert!((ideal.fidelity - 1.0).abs() < 1e-9);
        assert!((ideal.antisym_probability - 1.0).abs() < 1e-9);
        for w in rows.windows(2) {
            let key = |r: &NoiseRow| (r.clifford_infidelity, r.t_infidelity, r.rs_error);
            assert!(key(&w[0]) <= key(&w[1]));
        }
        for r in &rows {
            assert!(r.fidelity <= 1.0 + 1e-9 && r.fidelity >= 0.0);
            assert!(r.antisym_probability <= r.fidelity + 0.02, "{r:?}");
        }
    }

    #[test]
    fn noise_circuit_split_separates_tests() {
        let o = OrbitalSet::from_integers(2, &[0, 1, 2]).unwrap();
        let prep = crate::builder::build_full_measurement(&o, true).unwrap();
        let nc = noise_circuit(&prep, &LoweringOptions::default(), &mut SynthCache::new()).unwrap();
        assert_eq!(nc.test_bits.len(), 3);
        let tail = &nc.circuit.gates()[nc.split..];
        assert_eq!(
            tail.iter()
                .filter(|g| g.kind.is_measurement_or_reset())
                .count(),
            5
        );
    }

    #[test]
    fn csv_header_is_stable() {
        let row = NoiseRow {
            clifford_infidelity: 1e-3,
            t_infidelity: 0.0,
            rs_error: 0.1,
            fidelity: 0.5,
            antisym_probability: 0.25,
            t_count: 7,
            clifford_count: 9,
            peak_qubits: 4,
        };
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "clifford_infidelity,t_infidelity,rs_error,fidelity,antisym_probability,\
             t_count,clifford_count,peak_qubits"
        );
        assert_eq!(lines.next().unwrap(), "0.001,0.0,0.1,0.5,0.25,7,9,4");
    }

    #[test]
    fn resource_text_lists_rows() {
        let cfg = ResourcesConfig {
            min_n: 2,
            max_n: 5,
            hybrid: vec![(65, 64)],
        };
        let rows = resource_table(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        let text = resource_text(&rows, &cfg.hybrid).unwrap();
        assert!(text.contains("comparators=543 cnx=64"));
        assert_eq!(text.lines().count(), 6);
    }

    #[test]
    fn reference_lookup() {
        let angle = 2.0 * (1.0f64 / 3.0).sqrt().acos();
        assert_eq!(reference_counts(Axis::Y, angle, 0.1), Some((8, 28)));
        assert_eq!(reference_counts(Axis::Y, angle, 0.2), None);
        assert_eq!(reference_counts(Axis::Z, angle, 0.1), None);
    }
}
