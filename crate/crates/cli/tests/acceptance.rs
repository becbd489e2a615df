//! Acceptance criteria 1-10. Runs without the libtest harness so that every criterion
//! prints exactly one PASS/FAIL line; the process fails if any criterion does.

use std::path::PathBuf;
use std::process::Command as Process;
use std::time::{Duration, Instant};

use qhide_cli::commands::chains::{c2q_report, multiparty_report, q2c_report, ChainMode};
use qhide_cli::commands::identities::{identity_checks, norm_sweep};
use qhide_cli::commands::multiparty::{marginal_spread, reconstruction_infidelity, shared_secret};
use qhide_cli::commands::sweep::sweep_row;
use qhide_core::bit_hiding::{perfect_oracle, BitHidingScheme, SchemeSelector};
use qhide_core::channels::LoccProtocol;
use qhide_core::dual_hiding::{bits_from_qubits, qubits_from_bits, QubitHidingScheme};
use qhide_core::operators::linalg::trace_product;
use qhide_core::operators::DensityOperator;
use qhide_core::pauli::{pm_decomposition_on, PauliIndex};
use qhide_core::random::{pure_test_set, seeded};
use qhide_core::resources::{entropy_audit, pauli_pad, uniform_ensemble};
use qhide_core::security::{
    dist_global, dist_locc_seesaw, dist_ppt, random_one_way_attack, ChainSettings, Cut, SeesawDirection,
    SeesawSettings,
};

const SEED: u64 = 42;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn werner_core(n: usize) -> BitHidingScheme {
    SchemeSelector::werner_power(2, 2 * n).build().expect("Werner core")
}

fn identity_suite() -> Outcome {
    let start = Instant::now();
    let mut checks = identity_checks(1, SEED, 1e-10).map_err(err)?;
    checks.extend(identity_checks(2, SEED, 1e-10).map_err(err)?);
    let elapsed = start.elapsed();
    let worst = checks.iter().map(|c| c.value).fold(0.0, f64::max);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    ensure(
        failed.is_empty() && elapsed <= Duration::from_secs(120),
        format!("{} checks, worst deviation {worst:.2e}, failed {failed:?}, {elapsed:.1?}", checks.len()),
    )
}

fn norm_properties() -> Outcome {
    let sweep = norm_sweep(300, SEED, 1e-10).map_err(err)?;
    ensure(
        sweep.violations == 0 && sweep.instances >= 300,
        format!(
            "{} instances, {} violations, max excess {:.2e} / {:.2e} / {:.2e}",
            sweep.instances,
            sweep.violations,
            sweep.projection_excess,
            sweep.subadditivity_excess,
            sweep.partial_trace_excess
        ),
    )
}

fn round_trips() -> Outcome {
    let qs = qubits_from_bits(&werner_core(1)).map_err(err)?;
    let fidelity = qs.process_fidelity().map_err(err)?;
    let bits = bits_from_qubits(&qs).map_err(err)?;
    let states = bits.states().map_err(err)?;
    let mut off_diagonal = 0.0f64;
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            off_diagonal = off_diagonal.max(trace_product(states[i].matrix(), states[j].matrix()).norm());
        }
    }
    let mut success = 1.0f64;
    for i in 0..bits.num_states() {
        success = success.min(bits.success_probability(i).map_err(err)?);
    }
    ensure(
        fidelity >= 1.0 - 1e-9 && off_diagonal <= 1e-9 && success >= 1.0 - 1e-9,
        format!("process fidelity {fidelity:.12}, max Gram off-diagonal {off_diagonal:.2e}, min success {success:.12}"),
    )
}

/// Seesaw protocols for each pair plus random one-way protocols in both directions.
fn attack_family(pairs: &[(DensityOperator, DensityOperator)], cut: &Cut) -> qhide_core::Result<Vec<LoccProtocol>> {
    let layout = pairs[0].0.layout().clone();
    let settings = SeesawSettings {
        seed: SEED,
        ..SeesawSettings::default()
    };
    let mut family = Vec::new();
    for (rho, sigma) in pairs {
        family.push(dist_locc_seesaw(rho, sigma, cut, &settings)?.protocol);
    }
    let mut rng = seeded(SEED);
    for direction in [SeesawDirection::AliceFirst, SeesawDirection::BobFirst] {
        for _ in 0..3 {
            family.push(random_one_way_attack(&layout, cut, direction, &mut rng)?);
        }
    }
    Ok(family)
}

fn worst_output_distance(family: &[LoccProtocol], states: &[DensityOperator]) -> qhide_core::Result<f64> {
    let mut worst = 0.0f64;
    for attack in family {
        let channel = attack.compile()?;
        let outputs = states.iter().map(|s| channel.apply(s)).collect::<qhide_core::Result<Vec<_>>>()?;
        for i in 0..outputs.len() {
            for j in i + 1..outputs.len() {
                worst = worst.max(dist_global(&outputs[i], &outputs[j])?);
            }
        }
    }
    Ok(worst)
}

fn qubit_encodings(qs: &QubitHidingScheme) -> qhide_core::Result<Vec<DensityOperator>> {
    pure_test_set(qs.input_layout(), SEED)?
        .iter()
        .map(|psi| qs.encode(&psi.projector()))
        .collect()
}

fn perfect_security() -> Outcome {
    let qs = qubits_from_bits(&perfect_oracle(2).map_err(err)?).map_err(err)?;
    let cut = Cut::of_qubit_scheme(&qs);
    let mut pairs = Vec::new();
    for idx in PauliIndex::all(1).map_err(err)?.skip(1) {
        let pm = pm_decomposition_on(&idx.string(), qs.input_layout().clone()).map_err(err)?;
        pairs.push((qs.encode(&pm.plus).map_err(err)?, qs.encode(&pm.minus).map_err(err)?));
    }
    let family = attack_family(&pairs, &cut).map_err(err)?;
    let qubit_gap = worst_output_distance(&family, &qubit_encodings(&qs).map_err(err)?).map_err(err)?;

    let bits = bits_from_qubits(&qs).map_err(err)?;
    let states = bits.states().map_err(err)?;
    let bit_cut = Cut::of_scheme(&bits);
    let bit_pairs: Vec<_> = (1..states.len()).map(|j| (states[0].clone(), states[j].clone())).collect();
    let bit_family = attack_family(&bit_pairs, &bit_cut).map_err(err)?;
    let bit_gap = worst_output_distance(&bit_family, &states).map_err(err)?;
    ensure(
        qubit_gap <= 1e-10 && bit_gap <= 1e-10,
        format!(
            "{} attacks on the qubit scheme: max distance {qubit_gap:.2e}; {} on the derived bits: {bit_gap:.2e}",
            family.len(),
            bit_family.len()
        ),
    )
}

fn bound_chains() -> Outcome {
    let start = Instant::now();
    let settings = ChainSettings::default();
    let mut reports = vec![
        c2q_report(ChainMode::Werner, 1, SEED, &settings).map_err(err)?,
        q2c_report(ChainMode::Werner, 1, SEED, &settings).map_err(err)?,
    ];
    for k in [1, 2] {
        reports.push(multiparty_report(ChainMode::Werner, k, SEED, &settings).map_err(err)?);
    }
    let elapsed = start.elapsed();
    let mut lines = Vec::new();
    let mut violations = 0;
    for r in &reports {
        violations += r.checks.iter().filter(|c| !c.passed).count();
        let margins: Vec<String> = r.checks.iter().map(|c| format!("{}={:.3e}", c.name, c.margin)).collect();
        lines.push(format!("{} [{}]: {}", r.chain, r.instance, margins.join(" ")));
    }
    for line in &lines {
        println!("    {line}");
    }
    ensure(
        violations == 0 && elapsed <= Duration::from_secs(600),
        format!("{} chains, {violations} violations, {elapsed:.1?}", reports.len()),
    )
}

fn estimator_sandwich() -> Outcome {
    let mut instances: Vec<(String, DensityOperator, DensityOperator, Cut)> = Vec::new();
    for d in [2, 3, 4] {
        let cs = qhide_core::bit_hiding::werner_pair(d).map_err(err)?;
        instances.push((format!("werner d={d}"), cs.state(0).map_err(err)?, cs.state(1).map_err(err)?, Cut::of_scheme(&cs)));
    }
    let pair = werner_core(1);
    for j in [1, 3] {
        instances.push((
            format!("werner d=2 x2 (0,{j})"),
            pair.state(0).map_err(err)?,
            pair.state(j).map_err(err)?,
            Cut::of_scheme(&pair),
        ));
    }
    let qs = qubits_from_bits(&pair).map_err(err)?;
    for idx in [1usize, 3] {
        let s = PauliIndex::new(1, idx).map_err(err)?.string();
        let pm = pm_decomposition_on(&s, qs.input_layout().clone()).map_err(err)?;
        instances.push((
            format!("qubit scheme sigma_{s}"),
            qs.encode(&pm.plus).map_err(err)?,
            qs.encode(&pm.minus).map_err(err)?,
            Cut::of_qubit_scheme(&qs),
        ));
    }
    let settings = SeesawSettings {
        seed: SEED,
        ..SeesawSettings::default()
    };
    let mut failures = Vec::new();
    let mut worst_gap = 0.0f64;
    for (name, rho, sigma, cut) in &instances {
        let mut visible = cut.alice.clone();
        visible.extend(cut.bob.iter().cloned());
        let global = dist_global(&rho.partial_trace(&visible).map_err(err)?, &sigma.partial_trace(&visible).map_err(err)?)
            .map_err(err)?;
        let ppt = dist_ppt(rho, sigma, cut).map_err(err)?;
        let seesaw = dist_locc_seesaw(rho, sigma, cut, &settings).map_err(err)?.value;
        worst_gap = worst_gap.max(ppt.gap());
        println!("    {name}: seesaw {seesaw:.9} ppt {:.9} global {global:.9} gap {:.2e}", ppt.upper, ppt.gap());
        if seesaw > ppt.upper + 1e-6 || ppt.upper > global + 1e-6 || ppt.gap() > 1e-6 {
            failures.push(name.clone());
        }
    }
    ensure(
        failures.is_empty(),
        format!("{} instances, worst duality gap {worst_gap:.2e}, failed {failures:?}", instances.len()),
    )
}

fn werner_sweep() -> Outcome {
    let mut rows = Vec::new();
    let mut slowest = Duration::ZERO;
    for d in [2, 3, 4] {
        let start = Instant::now();
        let cs = qhide_core::bit_hiding::werner_pair(d).map_err(err)?;
        dist_ppt(&cs.state(0).map_err(err)?, &cs.state(1).map_err(err)?, &Cut::of_scheme(&cs)).map_err(err)?;
        slowest = slowest.max(start.elapsed());
        rows.push(sweep_row(d, SEED));
    }
    let values: Vec<f64> = rows.iter().map(|r| r.epsilon_ppt).collect();
    let monotone = rows.iter().all(|r| r.ok()) && values.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    ensure(
        monotone && slowest <= Duration::from_secs(60),
        format!("epsilon_ppt over d=2,3,4: {values:.6?}, slowest SDP {slowest:.1?}"),
    )
}

fn five_qubit_code() -> Outcome {
    let secret = shared_secret("five-qubit", None).map_err(err)?;
    let mut worst_infidelity = 0.0f64;
    let mut triples = 0;
    for a in 1..=5 {
        for b in a + 1..=5 {
            for c in b + 1..=5 {
                worst_infidelity = worst_infidelity.max(reconstruction_infidelity(&secret, &[a, b, c], SEED).map_err(err)?);
                triples += 1;
            }
        }
    }
    let mut worst_spread = 0.0f64;
    let mut pairs = 0;
    for a in 1..=5 {
        for b in a + 1..=5 {
            worst_spread = worst_spread.max(marginal_spread(&secret, &[a, b], SEED).map_err(err)?);
            pairs += 1;
        }
    }
    ensure(
        worst_infidelity <= 1e-9 && worst_spread <= 1e-10,
        format!("{triples} triples: worst infidelity {worst_infidelity:.2e}; {pairs} pairs: worst marginal spread {worst_spread:.2e}"),
    )
}

fn resource_counting() -> Outcome {
    let audit = entropy_audit(&pauli_pad(1).map_err(err)?, &uniform_ensemble(1)).map_err(err)?;
    let tol = 1e-9;
    let ok = audit.s_m_k.abs() <= tol
        && audit.s_m_c.abs() <= tol
        && (audit.s_m_c_given_k - audit.s_m).abs() <= tol
        && (audit.s_m - 2.0).abs() <= tol
        && (audit.s_k - 2.0).abs() <= tol
        && audit.s_k >= audit.s_m - tol
        && audit.passed();
    ensure(
        ok,
        format!(
            "S(M)={:.12} S(K)={:.12} S(M:K)={:.2e} S(M:B2B3)={:.2e} S(M:B2B3|K)={:.12}",
            audit.s_m, audit.s_k, audit.s_m_k, audit.s_m_c, audit.s_m_c_given_k
        ),
    )
}

fn scratch_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).expect("scratch directory");
    dir
}

fn run_binary(args: &[&str], out: &PathBuf) -> Result<String, String> {
    let status = Process::new(env!("CARGO_BIN_EXE_qhide"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .map_err(err)?;
    if !status.success() {
        return Err(format!("`qhide {}` exited with {status}", args.join(" ")));
    }
    std::fs::read_to_string(out).map_err(err)
}

fn strip_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\":"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Outcome {
    let dir = scratch_dir();
    let config = dir.join("determinism.conf");
    std::fs::write(&config, "seed = 7\n").map_err(err)?;
    let config = config.to_string_lossy().into_owned();
    let runs: [&[&str]; 3] = [
        &["pqc", "--n", "1", "--audit", "--config", &config],
        &["sweep", "--dims", "2,3", "--config", &config],
        &["multiparty", "--authorized", "4,5", "--config", &config],
    ];
    let mut compared = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        // Same output path both times: the path is part of the echoed configuration.
        let out = dir.join(format!("run{i}.json"));
        let first = run_binary(args, &out)?;
        let second = run_binary(args, &out)?;
        if strip_timestamp(&first) != strip_timestamp(&second) {
            return Err(format!("`qhide {}` reports differ", args.join(" ")));
        }
        if first.matches("\"timestamp\":").count() != 1 {
            return Err("report must carry exactly one timestamp field".into());
        }
        compared.push(args[0]);
    }
    Ok(format!("byte-identical reports modulo timestamp for {compared:?}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("identity suite", identity_suite),
        ("norm properties", norm_properties),
        ("construction round trips", round_trips),
        ("perfect-security reproduction", perfect_security),
        ("bound chains", bound_chains),
        ("estimator sandwich", estimator_sandwich),
        ("Werner sweep", werner_sweep),
        ("five-qubit code", five_qubit_code),
        ("resource counting", resource_counting),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {title} ({detail}) [{elapsed:.1?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {title} ({detail}) [{elapsed:.1?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
