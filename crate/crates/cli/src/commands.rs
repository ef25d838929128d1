use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use phigamma::coeff::{phi_orbit_transitivity, tensor_idempotents};
use phigamma::descent::{
    functor_d_rank1, roundtrip_v_of_d, Character, CharacterJson, FixedOperator, FrobFixedSystem,
};
use phigamma::endo::{verify_commutation, Generator, OperatorWord};
use phigamma::module::{
    dplusplus_certified_lattice, in_dplus, in_dplusplus, matrix_from_json, matrix_to_json,
    MatrixJson,
};
use phigamma::{
    oracles, FiniteFieldSpec, Lattice, LaurentJson, ModuleJson, PhiGammaModule, RingSpec,
    TensorAlgebra,
};

use crate::jobs::{self, Task};
use crate::report::{Failure, Outcome, Status};

type CmdResult = Result<Outcome, Failure>;

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

#[derive(Debug, Clone, Deserialize)]
pub struct IdempotentCase {
    pub p: u64,
    pub n: Vec<usize>,
}

/// One case, or a list of cases under `cases`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum IdempotentsConfig {
    Many { cases: Vec<IdempotentCase> },
    One(IdempotentCase),
}

fn idempotent_case(case: &IdempotentCase) -> Result<(bool, Value), Failure> {
    if case.n.is_empty() {
        return Err(Failure::input("n must list at least one degree"));
    }
    let specs = case
        .n
        .iter()
        .map(|&n| FiniteFieldSpec::standard(case.p, n))
        .collect::<Result<Vec<_>, _>>()?;
    let alg = TensorAlgebra::new(specs.clone())?;
    let dec = tensor_idempotents(&alg)?;
    let orbits = phi_orbit_transitivity(&dec);
    let mut sorted = dec.idempotents.clone();
    sorted.sort();
    let oracle_agrees = oracles::crt_split(&specs)
        .map(|o| o == sorted)
        .unwrap_or(false);
    let passed = orbits.transitive && oracle_agrees;
    Ok((
        passed,
        json!({
            "p": case.p,
            "n": case.n,
            "ell": dec.idempotents.len(),
            "transitive": orbits.transitive,
            "orbits": orbits.orbits,
            "component_degrees": dec.component_degrees,
            "idempotents": dec.idempotents,
            "frobenius_permutations": dec.frobenius_permutations,
            "oracle_agrees": oracle_agrees,
        }),
    ))
}

pub fn idempotents(config: &IdempotentsConfig, jobs: usize) -> CmdResult {
    let (cases, single) = match config {
        IdempotentsConfig::One(c) => (vec![c.clone()], true),
        IdempotentsConfig::Many { cases } => (cases.clone(), false),
    };
    let tasks: Vec<Task<_>> = cases
        .iter()
        .map(|c| Box::new(move || idempotent_case(c)) as Task<_>)
        .collect();
    let results = jobs::run(tasks, jobs)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let passed = results.iter().all(|(ok, _)| *ok);
    let n_pass = results.iter().filter(|(ok, _)| *ok).count();
    let values: Vec<Value> = results.into_iter().map(|(_, v)| v).collect();
    let summary = if single {
        format!(
            "ell = {}, transitive = {}",
            values[0]["ell"], values[0]["transitive"]
        )
    } else {
        format!(
            "{n_pass}/{} cases transitive and oracle-consistent",
            values.len()
        )
    };
    let result = if single {
        values.into_iter().next().unwrap()
    } else {
        json!({ "cases": values })
    };
    Ok(Outcome {
        status: Status::from_check(passed),
        summary,
        result,
    })
}

fn module_generators(d: &PhiGammaModule) -> Vec<(usize, Generator)> {
    let ring = d.ring();
    let labels = ring.coeffs().labels();
    let mut out: Vec<(usize, Generator)> = (0..ring.nvars())
        .map(|a| {
            (
                a,
                Generator::Phi {
                    alpha: labels[a].clone(),
                },
            )
        })
        .collect();
    for g in d.gamma_generators() {
        out.push((
            g.alpha,
            Generator::Gamma {
                alpha: labels[g.alpha].clone(),
                chi: g.chi.residue as i128,
            },
        ));
    }
    for g in d.delta_generators() {
        let mut b = vec![0; ring.coeffs().group(g.alpha).len()];
        b[g.index - 1] = 1;
        out.push((
            g.alpha,
            Generator::Delta {
                alpha: labels[g.alpha].clone(),
                b,
            },
        ));
    }
    out
}

/// Seeded random commutation checks of the ring maps behind the module's
/// operators (all pairs except `γ_α`, `δ_α` on the same factor).
fn ring_commutation(d: &PhiGammaModule, digits: u32, seed: u64, trials: usize) -> Vec<Value> {
    use rand_chacha::rand_core::SeedableRng;
    let gens = module_generators(d);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let semidirect = gens[i].0 == gens[j].0
                && !matches!(gens[i].1, Generator::Phi { .. })
                && !matches!(gens[j].1, Generator::Phi { .. })
                && std::mem::discriminant(&gens[i].1) != std::mem::discriminant(&gens[j].1);
            if semidirect {
                continue;
            }
            let a = OperatorWord::identity().then(gens[i].1.clone(), 1);
            let b = OperatorWord::identity().then(gens[j].1.clone(), 1);
            let name = format!("{a} <-> {b}");
            let entry = match verify_commutation(
                &a.concat(&b),
                &b.concat(&a),
                d.ring(),
                digits,
                trials,
                &mut rng,
            ) {
                Ok(rep) => {
                    json!({ "name": name, "passed": rep.passed(), "failures": rep.failures })
                }
                Err(e) => json!({ "name": name, "passed": false, "failures": [e.to_string()] }),
            };
            out.push(entry);
        }
    }
    out
}

pub fn check_module(j: &ModuleJson, jobs: usize, seed: u64, trials: usize) -> CmdResult {
    let d = j.to_module_unchecked()?;
    let digits = j.ring.digits_for(d.ring());
    enum Part {
        Etale(phigamma::module::EtaleReport),
        Relations(phigamma::module::RelationReport),
        Ring(Vec<Value>),
    }
    let dref = &d;
    let tasks: Vec<Task<Part>> = vec![
        Box::new(move || Part::Etale(dref.check_etale())),
        Box::new(move || Part::Relations(dref.check_relations())),
        Box::new(move || Part::Ring(ring_commutation(dref, digits, seed, trials))),
    ];
    let mut etale = None;
    let mut relations = None;
    let mut ring = Vec::new();
    for part in jobs::run(tasks, jobs) {
        match part {
            Part::Etale(r) => etale = Some(r),
            Part::Relations(r) => relations = Some(r),
            Part::Ring(r) => ring = r,
        }
    }
    let (etale, relations) = (etale.unwrap(), relations.unwrap());
    let ring_ok = ring.iter().all(|v| v["passed"] == json!(true));
    let passed = etale.passed() && relations.passed() && ring_ok;
    let first_failure = etale
        .checks
        .iter()
        .find(|c| c.status != "etale")
        .map(|c| format!("phi_{} is {}", c.alpha, c.status))
        .or_else(|| relations.first_failure().map(|c| c.name.clone()))
        .or_else(|| {
            ring.iter()
                .find(|v| v["passed"] != json!(true))
                .map(|v| v["name"].to_string())
        });
    let summary = match &first_failure {
        None => format!(
            "{} etale checks and {} relations pass",
            etale.checks.len(),
            relations.checks.len()
        ),
        Some(f) => format!("failed: {f}"),
    };
    Ok(Outcome {
        status: Status::from_check(passed),
        summary,
        result: json!({
            "rank": d.rank(),
            "passed": passed,
            "first_failure": first_failure,
            "etale": to_value(&etale),
            "relations": to_value(&relations),
            "ring_commutation": ring,
        }),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedMode {
    /// All partial Frobenii on `E_Δ⁺`.
    #[default]
    Frobenius,
    /// `φ_α` on `E_Δ⁺ / X_α^r`.
    Quotient,
    /// Explicit operator list and subwindow.
    Custom,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPointsConfig {
    #[serde(default)]
    pub schema_version: Option<u32>,
    pub ring: RingSpec,
    #[serde(default)]
    pub mode: FixedMode,
    /// Cap on `W′` for the frobenius and quotient modes.
    #[serde(default = "default_subwindow_cap")]
    pub subwindow_cap: i64,
    #[serde(default)]
    pub subwindow: Option<Vec<i64>>,
    #[serde(default)]
    pub operators: Option<Vec<FixedOperator>>,
    /// Quotient factor label.
    #[serde(default)]
    pub alpha: Option<String>,
    #[serde(default)]
    pub r: Option<i64>,
    #[serde(default)]
    pub t_degree_cap: Option<u32>,
    #[serde(default)]
    pub expect_dim: Option<usize>,
}

fn default_subwindow_cap() -> i64 {
    4
}

pub fn fixed_points(cfg: &FixedPointsConfig, expect_dim: Option<usize>) -> CmdResult {
    let ring = cfg.ring.build()?;
    let mut sys = match cfg.mode {
        FixedMode::Frobenius => FrobFixedSystem::all_frobenii(&ring, cfg.subwindow_cap)?,
        FixedMode::Quotient => {
            let label = cfg
                .alpha
                .as_deref()
                .ok_or_else(|| Failure::input("quotient mode needs alpha"))?;
            let alpha = ring
                .coeffs()
                .label_index(label)
                .ok_or_else(|| Failure::input(format!("unknown factor label {label}")))?;
            let r = cfg
                .r
                .ok_or_else(|| Failure::input("quotient mode needs r"))?;
            FrobFixedSystem::quotient(&ring, alpha, r, cfg.subwindow_cap)?
        }
        FixedMode::Custom => {
            let sub = cfg
                .subwindow
                .clone()
                .ok_or_else(|| Failure::input("custom mode needs subwindow"))?;
            FrobFixedSystem::new(&ring, cfg.operators.clone().unwrap_or_default(), sub)?
        }
    };
    if let Some(cap) = cfg.t_degree_cap {
        sys = sys.with_t_degree_cap(cap);
    }
    let sol = sys.solve()?;
    let report = sys.report(&sol)?;
    let expected = expect_dim.or(cfg.expect_dim);
    let passed = match expected {
        Some(e) => report.dimension == e,
        None => report.checks.iter().all(|c| c.passed),
    };
    let summary = match expected {
        Some(e) => format!("dimension {} (expected {e})", report.dimension),
        None => format!("dimension {}", report.dimension),
    };
    let mut result = to_value(&report);
    result["expected_dimension"] = json!(expected);
    result["raw_dimension"] = json!(sol.raw_dimension());
    result["equation_window"] = json!(sol.equation_window);
    Ok(Outcome {
        status: Status::from_check(passed),
        summary,
        result,
    })
}

pub fn dplusplus(
    j: &ModuleJson,
    lattice: Option<&MatrixJson>,
    elements: &[Vec<LaurentJson>],
    k_max: usize,
) -> CmdResult {
    let d = j.to_module()?;
    let ring = d.ring().clone();
    let m = match lattice {
        Some(g) => Lattice::new(&d, matrix_from_json(&ring, g)?)?,
        None => Lattice::standard(&d),
    };
    let cert = dplusplus_certified_lattice(&d, &m)?;
    let mut memberships = Vec::new();
    for (i, v) in elements.iter().enumerate() {
        if v.len() != d.rank() {
            return Err(Failure::input(format!(
                "element {i} has {} entries, rank is {}",
                v.len(),
                d.rank()
            )));
        }
        let x = v
            .iter()
            .map(|e| ring.from_json(e))
            .collect::<Result<Vec<_>, _>>()?;
        memberships.push(json!({
            "index": i,
            "dplusplus": to_value(&in_dplusplus(&d, &m, &x, k_max)?),
            "dplus": to_value(&in_dplus(&d, &m, &x, k_max)?),
        }));
    }
    let summary = format!(
        "r = {}, k = {}, containment {}",
        cert.r, cert.k, cert.containment
    );
    Ok(Outcome {
        status: Status::from_check(cert.containment),
        summary,
        result: json!({
            "r": cert.r,
            "k": cert.k,
            "containment": cert.containment,
            "lattice": matrix_to_json(&ring, cert.lattice.generator_matrix()),
            "memberships": memberships,
        }),
    })
}

pub fn roundtrip(j: &CharacterJson) -> CmdResult {
    let ring = j.ring.build()?;
    let eta = Character::from_json(&ring, j)?;
    let d = functor_d_rank1(&ring, &eta)?;
    let report = roundtrip_v_of_d(&d, &eta)?;
    let summary = if report.matched {
        "recovered character matches".to_string()
    } else {
        "recovered character differs".to_string()
    };
    Ok(Outcome {
        status: Status::from_check(report.matched),
        summary,
        result: to_value(&report),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApplyConfig {
    #[serde(default)]
    pub schema_version: Option<u32>,
    pub ring: RingSpec,
    #[serde(default)]
    pub word: Option<String>,
    pub series: LaurentJson,
}

pub fn apply_op(cfg: &ApplyConfig, word: Option<&str>) -> CmdResult {
    let ring = cfg.ring.build()?;
    let text = word
        .or(cfg.word.as_deref())
        .ok_or_else(|| Failure::input("no operator word given"))?;
    let w = OperatorWord::parse(text, ring.p())?;
    let x = ring.from_json(&cfg.series)?;
    let digits = cfg.ring.digits_for(&ring);
    let y = w.apply(&ring, &x, digits)?;
    Ok(Outcome {
        status: Status::Pass,
        summary: format!("applied {w}"),
        result: json!({ "word": w.to_string(), "output": to_value(&ring.to_json(&y)) }),
    })
}
