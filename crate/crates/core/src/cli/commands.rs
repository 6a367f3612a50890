use std::io::BufReader;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::Digest;

use super::config::{
    load, resolve, BasisSelection, CircuitConfig, ConvertConfig, CutSelection, EdConfig, EntropyConfig, EntropySource,
    GsConfig, TomoCliConfig, TomoMode, TomoTarget,
};
use super::{input_hasher, write_file, CommonArgs, Summary};
use crate::bm::{BoltzmannModel, RbmState};
use crate::circuit::{statevector_oracle, write_amplitudes_csv, Circuit, DbmCircuitGraph, InitialState};
use crate::entanglement::{reduced_density, renyi_entropy, von_neumann_entropy, Bipartition};
use crate::error::{NqsError, Result};
use crate::exact::{ground_state_exact, materialize, DenseState, MAX_SITES};
use crate::hamiltonian::PauliStringHamiltonian;
use crate::spin::SpinConfiguration;
use crate::state::{NqsState, C64};
use crate::tensor::{mps_amplitude, rbm_to_mps};
use crate::tomo::{
    all_pauli_bases, read_records, records_from_state, tomo_mixed, tomo_pure, write_records,
    MeasuredState, MeasurementRecord, PauliBasis, PurifiedRbm,
};
use crate::vmc::{solve_ground_state, write_trace_csv};

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn seed_of(args: &CommonArgs, config_seed: u64) -> u64 {
    args.seed.unwrap_or(config_seed)
}

pub(super) fn gs(args: &CommonArgs) -> Result<Summary> {
    let (cfg, bytes): (GsConfig, _) = load(&args.config)?;
    if cfg.model.family != "rbm" {
        return Err(NqsError::Config(format!(
            "model.family: \"{}\" is not trainable; expected \"rbm\"",
            cfg.model.family
        )));
    }
    let seed = seed_of(args, cfg.seed);
    let h = cfg.hamiltonian.build()?;
    let n = cfg.hamiltonian.n;
    let hidden = cfg.model.hidden.unwrap_or(2 * n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi0 = RbmState::random(n, hidden, cfg.model.scale, &mut rng);
    let mut train = cfg.train.clone();
    train.seed = seed;
    train.validate()?;

    let result = solve_ground_state(&h, &psi0, &train)?;
    write_file(&args.out, "trace.csv", &csv_bytes(|b| write_trace_csv(&result.trace, b))?)?;
    let model = BoltzmannModel::Rbm(result.best.clone()).to_json()?;
    write_file(&args.out, "model.json", model.as_bytes())?;

    let mut s = Summary::new("gs", seed, args.oracle_enabled(), input_hasher(&bytes, seed));
    s.metric("n_sites", n);
    s.metric("n_hidden", hidden);
    s.metric("best_energy", result.best_energy);
    s.metric("final_energy", result.trace.last().map(|r| r.mean.re));
    s.metric("final_stderr", result.trace.last().map(|r| r.stderr));
    if args.oracle_enabled() {
        if n <= MAX_SITES {
            let (exact, _) = ground_state_exact(&h)?;
            let rel = (result.best_energy - exact).abs() / exact.abs().max(f64::MIN_POSITIVE);
            s.metric("exact_energy", exact);
            s.metric("relative_error", rel);
            s.metric("rel_tolerance", cfg.rel_tolerance);
            s.check(rel <= cfg.rel_tolerance);
        } else {
            s.metric("oracle_skipped", format!("n = {n} exceeds {MAX_SITES} sites"));
        }
    }
    Ok(s)
}

pub(super) fn circuit(args: &CommonArgs) -> Result<Summary> {
    let (cfg, bytes): (CircuitConfig, _) = load(&args.config)?;
    let seed = seed_of(args, cfg.seed);
    let mut hasher = input_hasher(&bytes, seed);
    let initial: InitialState = cfg
        .initial
        .parse()
        .map_err(|e| NqsError::Config(format!("initial: {e}")))?;
    if initial.0.len() != cfg.n_qubits {
        return Err(NqsError::Config(format!(
            "initial has {} qubits, n_qubits is {}",
            initial.0.len(),
            cfg.n_qubits
        )));
    }
    let circuit = match (&cfg.circuit_file, &cfg.random) {
        (Some(path), None) => {
            let full = resolve(&args.config, path);
            let text = std::fs::read_to_string(&full)
                .map_err(|e| NqsError::Config(format!("circuit_file {}: {e}", full.display())))?;
            hasher.update(text.as_bytes());
            Circuit::parse(cfg.n_qubits, &text)?
        }
        (None, Some(r)) => Circuit::random(cfg.n_qubits, r.depth, &mut ChaCha8Rng::seed_from_u64(seed)),
        _ => return Err(NqsError::Config("exactly one of circuit_file and [random] is required".into())),
    };
    let graph = DbmCircuitGraph::from_circuit(&circuit, &initial)?;
    let amps = graph.amplitudes()?;
    write_file(&args.out, "amplitudes.csv", &csv_bytes(|b| write_amplitudes_csv(&amps, b))?)?;
    write_file(&args.out, "circuit.txt", circuit.to_text().as_bytes())?;

    let mut s = Summary::new("circuit", seed, args.oracle_enabled(), hasher);
    s.metric("n_qubits", cfg.n_qubits);
    s.metric("n_gates", circuit.gates().len());
    s.metric("n_vertices", graph.vertices().len());
    s.metric("n_hidden", graph.hidden_units().len());
    if args.oracle_enabled() {
        let reference = statevector_oracle(&circuit, &initial)?;
        let scale = reference.amplitudes().iter().map(|a| a.norm()).fold(0.0, f64::max);
        let dev = amps
            .amplitudes()
            .iter()
            .zip(reference.amplitudes().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale;
        s.metric("max_rel_deviation", dev);
        s.metric("tolerance", cfg.tolerance);
        s.check(dev <= cfg.tolerance);
    }
    Ok(s)
}

fn ghz(n: usize) -> Result<DenseState> {
    let mut v = DVector::from_element(1 << n, C64::new(0.0, 0.0));
    let h = std::f64::consts::FRAC_1_SQRT_2;
    v[0] = C64::new(h, 0.0);
    v[(1 << n) - 1] = C64::new(h, 0.0);
    DenseState::new(v)
}

fn w_state(n: usize) -> Result<DenseState> {
    let mut v = DVector::from_element(1 << n, C64::new(0.0, 0.0));
    let a = 1.0 / (n as f64).sqrt();
    for k in 0..n {
        v[1 << k] = C64::new(a, 0.0);
    }
    DenseState::new(v)
}

fn projector(psi: &DenseState) -> DMatrix<C64> {
    let a = psi.amplitudes();
    a * a.adjoint()
}

enum Target {
    Pure(DenseState),
    Mixed(DMatrix<C64>),
}

impl Target {
    fn n_sites(&self) -> usize {
        match self {
            Target::Pure(p) => p.n_sites(),
            Target::Mixed(r) => r.nrows().trailing_zeros() as usize,
        }
    }

    fn measured(&self) -> MeasuredState<'_> {
        match self {
            Target::Pure(p) => MeasuredState::Pure(p),
            Target::Mixed(r) => MeasuredState::Mixed(r),
        }
    }
}

fn build_target(t: &TomoTarget) -> Result<Target> {
    let check_n = |n: usize| {
        if n == 0 || n > 10 {
            Err(NqsError::Config(format!("target.n must be in 1..=10, got {n}")))
        } else {
            Ok(())
        }
    };
    Ok(match t {
        TomoTarget::Bell => Target::Pure(ghz(2)?),
        TomoTarget::Ghz { n } => {
            check_n(*n)?;
            Target::Pure(ghz(*n)?)
        }
        TomoTarget::W { n } => {
            check_n(*n)?;
            Target::Pure(w_state(*n)?)
        }
        TomoTarget::MaximallyMixed { n } => {
            check_n(*n)?;
            let d = 1usize << n;
            Target::Mixed(DMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0))
        }
        TomoTarget::DepolarizedBell { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(NqsError::Config(format!("target.p must lie in [0, 1], got {p}")));
            }
            let rho = projector(&ghz(2)?) * C64::new(1.0 - p, 0.0)
                + DMatrix::identity(4, 4) * C64::new(p / 4.0, 0.0);
            Target::Mixed(rho)
        }
    })
}

fn parse_bases(sel: &Option<BasisSelection>, n: usize) -> Result<Vec<PauliBasis>> {
    match sel {
        None => Ok(all_pauli_bases(n)),
        Some(BasisSelection::Named(s)) if s == "all" => Ok(all_pauli_bases(n)),
        Some(BasisSelection::Named(s)) => Err(NqsError::Config(format!("bases: expected \"all\" or a list, got \"{s}\""))),
        Some(BasisSelection::List(list)) => list
            .iter()
            .map(|b| {
                let basis: PauliBasis = b.parse().map_err(|e| NqsError::Config(format!("bases: {e}")))?;
                if basis.len() != n {
                    return Err(NqsError::Config(format!("bases: \"{b}\" has {} sites, expected {n}", basis.len())));
                }
                Ok(basis)
            })
            .collect(),
    }
}

fn model_json(m: &PurifiedRbm) -> Result<String> {
    let v = serde_json::json!({
        "n_visible": m.n_visible(),
        "n_env": m.n_env(),
        "amplitude": m.amplitude.params(),
        "phase": m.phase.params(),
    });
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

pub(super) fn tomo(args: &CommonArgs) -> Result<Summary> {
    let (cfg, bytes): (TomoCliConfig, _) = load(&args.config)?;
    let seed = seed_of(args, cfg.seed);
    let mut hasher = input_hasher(&bytes, seed);
    let target = cfg.target.as_ref().map(build_target).transpose()?;
    let records: Vec<MeasurementRecord> = match (&target, &cfg.records_file) {
        (Some(t), None) => records_from_state(t.measured(), &parse_bases(&cfg.bases, t.n_sites())?)?,
        (None, Some(path)) => {
            let full = resolve(&args.config, path);
            let text = std::fs::read(&full)
                .map_err(|e| NqsError::Config(format!("records_file {}: {e}", full.display())))?;
            hasher.update(&text);
            read_records(BufReader::new(text.as_slice()))?
        }
        _ => return Err(NqsError::Config("exactly one of target and records_file is required".into())),
    };
    let n = records
        .first()
        .map(|r| r.basis.len())
        .ok_or_else(|| NqsError::Config("no measurement records".into()))?;
    if cfg.mode == TomoMode::Pure && cfg.model.env != 0 {
        return Err(NqsError::Config("model.env must be 0 in pure mode".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = PurifiedRbm::random(n, cfg.model.hidden, cfg.model.env, cfg.model.scale, &mut rng)
        .map_err(|e| NqsError::Config(format!("model: {e}")))?;
    let oracle = args.oracle_enabled();
    let result = match cfg.mode {
        TomoMode::Pure => {
            let pure = match &target {
                Some(Target::Pure(p)) => Some(p),
                Some(Target::Mixed(_)) => {
                    return Err(NqsError::Config("pure mode needs a pure target".into()));
                }
                None => None,
            };
            tomo_pure(&records, &model, &cfg.train, pure.filter(|_| oracle))?
        }
        TomoMode::Mixed => {
            let rho = match &target {
                Some(Target::Pure(p)) => Some(projector(p)),
                Some(Target::Mixed(r)) => Some(r.clone()),
                None => None,
            };
            tomo_mixed(&records, &model, &cfg.train, rho.as_ref().filter(|_| oracle))?
        }
    };

    write_file(&args.out, "records.jsonl", &csv_bytes(|b| write_records(&records, b))?)?;
    let curve = csv_bytes(|b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["epoch", "divergence", "fidelity", "trace_distance"])?;
        for (i, d) in result.divergence.iter().enumerate() {
            let opt = |v: Option<&f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
            w.write_record([
                i.to_string(),
                format!("{d:.12e}"),
                opt(result.fidelity.get(i)),
                opt(result.trace_distance.get(i)),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    write_file(&args.out, "divergence.csv", &curve)?;
    write_file(&args.out, "model.json", model_json(&result.model)?.as_bytes())?;

    let mut s = Summary::new("tomo", seed, oracle, hasher);
    s.metric("n_sites", n);
    s.metric("n_records", records.len());
    s.metric("epochs_run", result.divergence.len().saturating_sub(1));
    s.metric("final_divergence", result.divergence.last());
    if let Some(f) = result.fidelity.last() {
        s.metric("fidelity", f);
        s.metric("min_fidelity", cfg.min_fidelity);
        s.check(*f >= cfg.min_fidelity);
    }
    if let Some(t) = result.trace_distance.last() {
        s.metric("trace_distance", t);
        s.metric("max_trace_distance", cfg.max_trace_distance);
        s.check(*t <= cfg.max_trace_distance);
    }
    Ok(s)
}

fn cuts_for(sel: &Option<CutSelection>, n: usize) -> Result<Vec<Bipartition>> {
    match sel {
        None => (1..n).map(|k| Bipartition::left(n, k)).collect(),
        Some(CutSelection::Named(s)) if s == "left" => (1..n).map(|k| Bipartition::left(n, k)).collect(),
        Some(CutSelection::Named(s)) => Err(NqsError::Config(format!("cuts: expected \"left\" or a list, got \"{s}\""))),
        Some(CutSelection::List(list)) => list
            .iter()
            .map(|a| Bipartition::new(n, a).map_err(|e| NqsError::Config(format!("cuts: {e}"))))
            .collect(),
    }
}

pub(super) fn entropy(args: &CommonArgs) -> Result<Summary> {
    let (cfg, bytes): (EntropyConfig, _) = load(&args.config)?;
    let seed = seed_of(args, cfg.seed);
    let mut hasher = input_hasher(&bytes, seed);
    let (state, rbm) = match &cfg.source {
        EntropySource::Rbm { model } => {
            if let Some(p) = model.file() {
                hasher.update(std::fs::read(resolve(&args.config, p)).unwrap_or_default());
            }
            let rbm = model.build(seed, &args.config)?;
            (materialize(&rbm, rbm.n_visible())?, Some(rbm))
        }
        EntropySource::Bell => (ghz(2)?, None),
        EntropySource::Ghz { n } => {
            if *n < 2 || *n > MAX_SITES {
                return Err(NqsError::Config(format!("source.n must be in 2..={MAX_SITES}, got {n}")));
            }
            (ghz(*n)?, None)
        }
    };
    let n = state.n_sites();
    let cuts = cuts_for(&cfg.cuts, n)?;
    let oracle = args.oracle_enabled();
    let mut rows = Vec::new();
    let mut max_excess = f64::NEG_INFINITY;
    let mut max_gap: f64 = 0.0;
    for cut in &cuts {
        let side = if cut.size_a() <= n - cut.size_a() { cut.clone() } else { cut.flipped() };
        let rho = reduced_density(&state, &side)?;
        let s2 = renyi_entropy(&rho, 2.0)?;
        let vn = von_neumann_entropy(&rho)?;
        let crossings = rbm.as_ref().map(|r| cut.crossings(r));
        let bound = crossings.map(|c| c as f64 * std::f64::consts::LN_2);
        if let Some(b) = bound {
            max_excess = max_excess.max(s2 - b);
        }
        if oracle {
            let other = renyi_entropy(&reduced_density(&state, &side.flipped())?, 2.0)?;
            max_gap = max_gap.max((other - s2).abs());
        }
        rows.push((cut.label(), cut.size_a(), crossings, s2, bound, vn));
    }
    let report = csv_bytes(|b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["cut", "a_size", "crossings", "s2", "bound", "vn"])?;
        for (label, size, c, s2, bound, vn) in &rows {
            w.write_record([
                label.clone(),
                size.to_string(),
                c.map(|c| c.to_string()).unwrap_or_default(),
                format!("{s2:.12e}"),
                bound.map(|b| format!("{b:.12e}")).unwrap_or_default(),
                format!("{vn:.12e}"),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    write_file(&args.out, "report.csv", &report)?;

    let mut s = Summary::new("entropy", seed, oracle, hasher);
    s.metric("n_sites", n);
    s.metric("n_cuts", rows.len());
    s.metric("max_s2", rows.iter().map(|r| r.3).fold(0.0, f64::max));
    if rbm.is_some() && !rows.is_empty() {
        s.metric("max_s2_minus_bound", max_excess);
        s.check(max_excess <= 1e-10);
    }
    if oracle {
        s.metric("max_complement_gap", max_gap);
        s.check(max_gap <= 1e-10);
    }
    Ok(s)
}

pub(super) fn convert(args: &CommonArgs) -> Result<Summary> {
    let (cfg, bytes): (ConvertConfig, _) = load(&args.config)?;
    let seed = seed_of(args, cfg.seed);
    let mut hasher = input_hasher(&bytes, seed);
    if let Some(p) = cfg.model.file() {
        hasher.update(std::fs::read(resolve(&args.config, p)).unwrap_or_default());
    }
    let rbm = cfg.model.build(seed, &args.config)?;
    let conv = rbm_to_mps(&rbm, cfg.max_bond)?;
    write_file(&args.out, "mps.json", (conv.mps.to_json()? + "\n").as_bytes())?;

    let n = rbm.n_visible();
    let bonds = conv.mps.bond_dims();
    let mut s = Summary::new("convert", seed, args.oracle_enabled(), hasher);
    s.metric("n_sites", n);
    s.metric("n_hidden", rbm.n_hidden());
    s.metric("bond_dims", &bonds);
    s.metric("crossings", &conv.crossings);
    s.metric("log_constant", [conv.log_constant.re, conv.log_constant.im]);
    let within_rank = bonds
        .iter()
        .zip(&conv.crossings)
        .all(|(&d, &c)| c >= usize::BITS as usize || d <= 1usize << c);
    s.metric("bonds_within_crossing_bound", within_rank);
    if args.oracle_enabled() && n <= MAX_SITES {
        let exact = materialize(&rbm, n)?;
        let scale = exact.amplitudes().iter().map(|a| a.norm()).fold(0.0, f64::max);
        let c = conv.log_constant.exp();
        let mut dev: f64 = 0.0;
        for (i, a) in exact.amplitudes().iter().enumerate() {
            let v = SpinConfiguration::from_index(i, n, conv.mps.visible_convention());
            dev = dev.max((a - c * mps_amplitude(&conv.mps, &v)?).norm());
        }
        let dev = dev / scale;
        s.metric("max_rel_deviation", dev);
        s.metric("tolerance", cfg.tolerance);
        s.check(dev <= cfg.tolerance && within_rank);
    }
    Ok(s)
}

/// H psi from the Pauli-string rows.
fn apply(h: &PauliStringHamiltonian, psi: &DVector<C64>) -> DVector<C64> {
    let n = h.n_sites();
    DVector::from_fn(psi.len(), |i, _| {
        let v = SpinConfiguration::from_index(i, n, Default::default());
        h.row(&v)
            .into_iter()
            .map(|(mask, c)| {
                let mut j = i;
                for site in 0..n {
                    if mask >> site & 1 == 1 {
                        j ^= 1 << (n - 1 - site);
                    }
                }
                c * psi[j]
            })
            .sum()
    })
}

pub(super) fn ed(args: &CommonArgs) -> Result<Summary> {
    let (cfg, bytes): (EdConfig, _) = load(&args.config)?;
    let seed = seed_of(args, cfg.seed);
    let h = cfg.hamiltonian.build()?;
    let (energy, state) = ground_state_exact(&h)?;
    // fix the global phase: largest amplitude (first on ties) real positive
    let amps = state.amplitudes();
    let mut k = 0;
    for (i, a) in amps.iter().enumerate() {
        if a.norm() > amps[k].norm() * (1.0 + 1e-12) {
            k = i;
        }
    }
    let phase = amps[k].conj() / amps[k].norm();
    let fixed = DenseState::new(amps * phase)?;
    if cfg.write_state {
        write_file(&args.out, "ground_state.csv", &csv_bytes(|b| fixed.write_csv(b))?)?;
    }
    let n = cfg.hamiltonian.n;
    let mut s = Summary::new("ed", seed, args.oracle_enabled(), input_hasher(&bytes, seed));
    s.metric("n_sites", n);
    s.metric("energy", energy);
    s.metric("energy_per_site", energy / n as f64);
    if args.oracle_enabled() {
        let psi = fixed.amplitudes();
        let residual = (apply(&h, psi) - psi * C64::new(energy, 0.0)).norm() / psi.norm();
        s.metric("residual", residual);
        s.check(residual <= 1e-8);
    }
    Ok(s)
}
