//! Command implementations behind the `threesum-lab` binary. Each command
//! returns the JSON document it prints, or a [`CliError`] carrying the exit
//! code.

use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use threesum_lab::adversary::{construct_input, PatternTarget};
use threesum_lab::butterfly::{ButterflySpec, EdgeSet};
use threesum_lab::butterfly_reduction::{reduce, GroupKind};
use threesum_lab::lsd::{simulate_protocol, BlockParams, LsdInstance};
use threesum_lab::refuter::{
    bitvector_scheme, build_certificate_seeded, find_weakness, random_scheme, verify_certificate,
    RefutationCertificate, TwoProbeScheme,
};
use threesum_lab::threesum::{BitVectorIndex, CellProbeStructure, SortedSumsetIndex};
use threesum_lab::{Error, GroupElement, GroupSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_NO_RESULT: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

/// Name recorded in reports for the generator every seed feeds.
pub const RNG_NAME: &str = "ChaCha8 (rand_chacha 0.3)";

/// Largest `B^N · 2^{N·B}` an exhaustive LSD check will enumerate.
const MAX_EXHAUSTIVE_LSD: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoWeaknessFound => EXIT_NO_RESULT,
            _ => EXIT_PARSE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a command produced: a JSON document and the exit code to end with.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: Value,
    pub code: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Failure {
    pub case: String,
    pub expected: String,
    pub got: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub parameters: Value,
    pub rng: String,
    pub checks_passed: u64,
    pub checks_failed: u64,
    pub failures: Vec<Failure>,
    pub wall_time_ms: u64,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl RunReport {
    fn new(command: &str, parameters: Value) -> Self {
        RunReport {
            command: command.to_string(),
            parameters,
            rng: RNG_NAME.to_string(),
            checks_passed: 0,
            checks_failed: 0,
            failures: Vec::new(),
            wall_time_ms: 0,
            details: Value::Null,
        }
    }

    fn record(&mut self, ok: bool, failure: impl FnOnce() -> Failure) {
        if ok {
            self.checks_passed += 1;
        } else {
            self.checks_failed += 1;
            self.failures.push(failure());
        }
    }

    fn finish(mut self, start: Instant) -> Outcome {
        self.failures.sort();
        self.wall_time_ms = start.elapsed().as_millis() as u64;
        let code = if self.checks_failed == 0 { EXIT_OK } else { EXIT_VERIFY_FAILED };
        Outcome {
            output: serde_json::to_value(&self).expect("report serializes"),
            code,
        }
    }
}

/// Accepts `{"cyclic": m}` / `{"xor_bits": k}` JSON or `cyclic:m` / `xor:k`.
pub fn parse_group(text: &str) -> CliResult<GroupSpec> {
    let text = text.trim();
    if text.starts_with('{') {
        serde_json::from_str(text).map_err(|e| CliError::parse(format!("bad group {text}: {e}")))
    } else {
        text.parse().map_err(|e: Error| CliError::parse(e.to_string()))
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(format!("cannot parse {}: {e}", path.display())))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("value serializes");
    fs::write(path, text + "\n").map_err(|e| CliError::parse(format!("cannot write {}: {e}", path.display())))
}

pub fn butterfly_check(degree: u64, depth: u32, kind: GroupKind, trials: u64, seed: u64) -> CliResult<Outcome> {
    let start = Instant::now();
    let spec = ButterflySpec::new(degree, depth)?;
    let mut report = RunReport::new(
        "butterfly-check",
        json!({"B": degree, "d": depth, "group": kind.to_string(), "trials": trials, "seed": seed}),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sets = vec![("full".to_string(), EdgeSet::full(spec)), ("empty".to_string(), EdgeSet::empty(spec))];
    for trial in 0..trials {
        sets.push((format!("trial {trial}"), spec.random_edge_subset(0.5, rng.gen())?));
    }
    let nodes = spec.nodes_per_layer();
    let mut group = None;
    for (name, edges) in &sets {
        let red = reduce(spec, edges, kind)?;
        group = Some(red.instance().group());
        let table = red.answer_table()?;
        for s in 0..nodes {
            for t in 0..nodes {
                let reachable = spec.reachable(edges, s, t)?;
                let answer = table[(s * nodes + t) as usize];
                report.record(answer != reachable, || Failure {
                    case: format!("{name} (s={s}, t={t})"),
                    expected: (!reachable).to_string(),
                    got: answer.to_string(),
                });
            }
        }
        let audit = red.audit()?;
        report.record(audit.violations() == 0, || Failure {
            case: format!("{name} digit audit"),
            expected: "0 violations".into(),
            got: format!("{audit:?}"),
        });
    }
    report.details = json!({
        "edge_sets": sets.len(),
        "pairs_checked": sets.len() as u64 * nodes * nodes,
        "group": group.map(|g| g.to_string()),
    });
    Ok(report.finish(start))
}

pub fn lsd_check(
    indices: u64,
    block_width: u64,
    ell: u64,
    exhaustive: bool,
    trials: u64,
    seed: u64,
) -> CliResult<Outcome> {
    let start = Instant::now();
    let params = BlockParams::minimal(indices, block_width, ell)?;
    let mut report = RunReport::new(
        "lsd-check",
        json!({"N": indices, "B": block_width, "ell": ell, "exhaustive": exhaustive, "trials": trials, "seed": seed}),
    );
    let check = |inst: &LsdInstance, case: String, report: &mut RunReport| -> CliResult<()> {
        let red = params.reduce(inst)?;
        let expected = inst.brute_force_disjoint();
        let got = red.disjoint()?;
        report.record(got == expected, || Failure {
            case: case.clone(),
            expected: expected.to_string(),
            got: got.to_string(),
        });
        let audit = red.audit();
        report.record(audit.violations() == 0, || Failure {
            case: format!("{case} audit"),
            expected: "0 violations".into(),
            got: format!("{audit:?}"),
        });
        Ok(())
    };
    if exhaustive {
        let bits = indices * block_width;
        let vectors = block_width.checked_pow(indices as u32);
        let total = vectors.and_then(|v| if bits < 63 { v.checked_mul(1 << bits) } else { None });
        let Some(vectors) = vectors.filter(|_| total.is_some_and(|t| t <= MAX_EXHAUSTIVE_LSD)) else {
            return Err(CliError::parse(format!(
                "exhaustive check over N = {indices}, B = {block_width} exceeds {MAX_EXHAUSTIVE_LSD} cases"
            )));
        };
        for mask in 0..1u64 << bits {
            for v in 0..vectors {
                let inst = LsdInstance::from_codes(indices, block_width, mask, v)?;
                check(&inst, format!("mask {mask} vector {v}"), &mut report)?;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for trial in 0..trials {
            let inst = LsdInstance::random(indices, block_width, rng.gen())?;
            check(&inst, format!("trial {trial}"), &mut report)?;
        }
    }
    report.details = json!({"modulus": params.modulus(), "n": params.n(), "blocks": params.blocks()});
    Ok(report.finish(start))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    Bitvector,
    Sorted,
}

pub fn lsd_protocol(structure: StructureKind, indices: u64, block_width: u64, ell: u64, seed: u64) -> CliResult<Outcome> {
    let params = BlockParams::minimal(indices, block_width, ell)?;
    let inst = LsdInstance::random(indices, block_width, seed)?;
    let red = params.reduce(&inst)?;
    let (transcript, cells, word_bits, name) = match structure {
        StructureKind::Bitvector => {
            let st = BitVectorIndex::build(red.instance())?;
            (simulate_protocol(&st, red.queries(), st.max_probes())?, st.cells(), st.word_bits(), "bitvector")
        }
        StructureKind::Sorted => {
            let st = SortedSumsetIndex::build(red.instance(), red.instance().group().element_bits())?;
            (simulate_protocol(&st, red.queries(), st.max_probes())?, st.cells(), st.word_bits(), "sorted")
        }
    };
    let expected = inst.brute_force_disjoint();
    let output = json!({
        "command": "lsd-protocol",
        "parameters": {"structure": name, "N": indices, "B": block_width, "ell": ell, "seed": seed},
        "rng": RNG_NAME,
        "modulus": params.modulus(),
        "cells": cells,
        "word_bits": word_bits,
        "rounds": transcript.rounds,
        "alice_bits": transcript.alice_bits,
        "bob_bits": transcript.bob_bits,
        "answer": transcript.answer,
        "expected": expected,
        "per_round": transcript.per_round,
    });
    let code = if transcript.answer == expected { EXIT_OK } else { EXIT_VERIFY_FAILED };
    Ok(Outcome { output, code })
}

pub fn refute(scheme: &TwoProbeScheme, group: GroupSpec, seed: u64) -> CliResult<(RefutationCertificate, Value)> {
    let weakness = find_weakness(scheme, &group)?;
    let cert = build_certificate_seeded(scheme, &group, &weakness, seed)?;
    if !verify_certificate(scheme, &group, &cert) {
        return Err(CliError {
            code: EXIT_VERIFY_FAILED,
            message: "built certificate failed verification".into(),
        });
    }
    let summary = json!({
        "command": "refute",
        "group": group.to_string(),
        "seed": seed,
        "rng": RNG_NAME,
        "weakness": weakness,
        "queries": cert.queries.len(),
        "cells": cert.cells.len(),
        "verified": true,
    });
    Ok((cert, summary))
}

/// Checks a certificate against the scheme; the group comes from the witness.
pub fn verify_cert(scheme: &TwoProbeScheme, cert: &RefutationCertificate) -> Outcome {
    let group = cert.witness.group();
    let verified = verify_certificate(scheme, &group, cert);
    Outcome {
        output: json!({"command": "verify-cert", "group": group.to_string(), "verified": verified}),
        code: if verified { EXIT_OK } else { EXIT_VERIFY_FAILED },
    }
}

pub fn parse_queries(text: &str) -> CliResult<Vec<GroupElement>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map(GroupElement)
                .map_err(|e| CliError::parse(format!("bad query element {s:?}: {e}")))
        })
        .collect()
}

/// Pattern string of `0`/`1`, character `i` for query `i`.
pub fn parse_pattern(text: &str, queries: usize) -> CliResult<u64> {
    if text.len() != queries {
        return Err(CliError::parse(format!(
            "pattern has {} characters but there are {queries} queries",
            text.len()
        )));
    }
    if queries > 63 {
        return Err(CliError::parse("at most 63 queries are supported"));
    }
    text.chars().enumerate().try_fold(0u64, |mask, (i, c)| match c {
        '0' => Ok(mask),
        '1' => Ok(mask | 1 << i),
        other => Err(CliError::parse(format!("pattern character {other:?} is not 0 or 1"))),
    })
}

pub fn adversary_build(group: GroupSpec, queries: &str, pattern: &str, n: usize, seed: u64) -> CliResult<Outcome> {
    let queries = parse_queries(queries)?;
    let mask = parse_pattern(pattern, queries.len())?;
    let target = PatternTarget::from_mask(queries, mask)?;
    let inst = construct_input(group, &target, n, seed)?;
    Ok(Outcome {
        output: serde_json::to_value(&inst).expect("instance serializes"),
        code: EXIT_OK,
    })
}

pub fn scheme_gen(group: GroupSpec, cells: Option<u64>, bitvector: bool, seed: u64) -> CliResult<TwoProbeScheme> {
    if bitvector {
        return Ok(bitvector_scheme(group)?);
    }
    let cells = cells.ok_or_else(|| CliError::parse("--cells is required unless --bitvector is given"))?;
    Ok(random_scheme(group, cells, seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_forms() {
        assert_eq!(parse_group("{\"cyclic\": 41}").unwrap(), GroupSpec::cyclic(41).unwrap());
        assert_eq!(parse_group("xor:6").unwrap(), GroupSpec::xor(6).unwrap());
        assert_eq!(parse_group("cyclic:1").unwrap_err().code, EXIT_PARSE);
        assert!(parse_group("{\"ring\": 3}").is_err());
    }

    #[test]
    fn pattern_parsing() {
        assert_eq!(parse_pattern("101", 3).unwrap(), 0b101);
        assert_eq!(parse_pattern("01", 2).unwrap(), 0b10);
        assert!(parse_pattern("10", 3).is_err());
        assert!(parse_pattern("1x1", 3).is_err());
        assert_eq!(parse_queries("5, 9,").unwrap(), vec![GroupElement(5), GroupElement(9)]);
        assert!(parse_queries("5,a").is_err());
    }

    #[test]
    fn butterfly_counts() {
        let out = butterfly_check(2, 2, GroupKind::Cyclic, 20, 0).unwrap();
        assert_eq!(out.code, EXIT_OK);
        let report: RunReport = serde_json::from_value(out.output).unwrap();
        // 22 edge sets, 16 pairs and one audit each
        assert_eq!(report.checks_passed, 22 * 16 + 22);
        assert!(report.failures.is_empty());
    }

    #[test]
    fn report_round_trip() {
        let out = lsd_check(2, 2, 2, true, 0, 0).unwrap();
        let report: RunReport = serde_json::from_value(out.output).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        let again: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&again).unwrap(), text);
        assert_eq!(report.checks_failed, report.failures.len() as u64);
    }

    #[test]
    fn lsd_errors() {
        assert_eq!(lsd_check(3, 2, 2, true, 0, 0).unwrap_err().code, EXIT_PARSE);
        assert!(lsd_check(12, 4, 2, true, 0, 0).is_err());
    }

    #[test]
    fn no_weakness_code() {
        let group = GroupSpec::cyclic(64).unwrap();
        let scheme = bitvector_scheme(group).unwrap();
        assert_eq!(refute(&scheme, group, 0).unwrap_err().code, EXIT_NO_RESULT);
    }
}
