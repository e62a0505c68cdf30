//! Subcommand implementations.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use num::bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use abelian::criticality::{alpha_crit_scaling, CriticalityReport};
use abelian::distribution::AbelianParams;
use abelian::error::Error;
use abelian::estimation::{fit_alpha, fit_joint, FitReport, SizeDataset};
use abelian::exact::{
    check_expectation_identity, check_normalization_identity, lemma_coefficient, rational,
    theorem_coefficient,
};
use abelian::sampling::{SampleMethod, Sampler, GENERATOR_NAME};

use crate::meta::MetaBlock;
use crate::CliError;

/// Rational evaluation points for `check` are drawn from this fixed seed so
/// that repeated runs test (and print) the identical grid.
const CHECK_POINT_SEED: u64 = 424242;

/// Random rational points tested per system size by `check`.
const CHECK_POINTS_PER_N: u32 = 50;

fn usage(err: Error) -> CliError {
    CliError::Usage(err.to_string())
}

fn data(err: Error) -> CliError {
    CliError::Data(err.to_string())
}

/// Errors surfacing after flag validation: tolerance or step misuse is an
/// argument error; anything data-dependent is a data error.
fn computation_error(err: Error) -> CliError {
    match err {
        Error::InvalidTolerance { .. } => usage(err),
        other => data(other),
    }
}

/// Tabulate the mass function (or its log-log transform) as CSV.
pub fn pmf(alpha: f64, n: u64, log_log: bool) -> Result<(), CliError> {
    let params = AbelianParams::new(alpha, n).map_err(usage)?;
    let mut block = MetaBlock::new("pmf");
    block.push("alpha", alpha);
    block.push("n", n);
    block.push("log-log", log_log);

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    block.write_comments(&mut out)?;
    if log_log {
        writeln!(out, "log10_L,log10_pmf")?;
        for l in 1..=n {
            let log10_l = (l as f64).log10();
            let log10_p = params.log_pmf(l) * std::f64::consts::LOG10_E;
            writeln!(out, "{log10_l},{log10_p}")?;
        }
    } else {
        writeln!(out, "L,pmf")?;
        for l in 1..=n {
            writeln!(out, "{},{}", l, params.pmf(l))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Stream seeded draws, one per line, after a metadata header.
pub fn sample(
    alpha: Option<f64>,
    n: u64,
    count: u64,
    seed: u64,
    method: SampleMethod,
) -> Result<(), CliError> {
    let alpha = match alpha {
        Some(value) => value,
        // A single-unit system puts all mass on L = 1, so any admissible
        // coupling yields the same stream; 0.5 keeps the metadata concrete.
        None if n == 1 => 0.5,
        None => {
            return Err(CliError::Usage(
                "--alpha is required when --n is 2 or more".into(),
            ))
        }
    };
    let params = AbelianParams::new(alpha, n).map_err(usage)?;
    let mut sampler = Sampler::new(params, seed, method).map_err(usage)?;

    let mut block = MetaBlock::new("sample");
    block.push("alpha", alpha);
    block.push("n", n);
    block.push("count", count);
    block.push("seed", seed);
    block.push("method", method.name());
    block.push("generator", GENERATOR_NAME);

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    block.write_comments(&mut out)?;
    for _ in 0..count {
        writeln!(out, "{}", sampler.draw())?;
    }
    out.flush()?;
    Ok(())
}

/// How an input file's rows are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InputFormat {
    /// One decimal size per line.
    Plain,
    /// CSV rows `size,count` under a `size,count` header.
    SizeCount,
}

impl InputFormat {
    fn name(self) -> &'static str {
        match self {
            InputFormat::Plain => "sizes",
            InputFormat::SizeCount => "size,count",
        }
    }
}

/// Parse observation rows, auto-detecting the format from the first
/// significant line. Blank lines and `#` comments are skipped everywhere,
/// so `sample` output pipes straight in. Errors cite 1-based row numbers.
fn parse_observations(text: &str) -> Result<(SizeDataset, InputFormat), CliError> {
    let mut format: Option<InputFormat> = None;
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let row = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if format.is_none() {
            if line.eq_ignore_ascii_case("size,count") {
                format = Some(InputFormat::SizeCount);
                continue;
            }
            format = Some(InputFormat::Plain);
        }
        match format.expect("format fixed above") {
            InputFormat::Plain => {
                let size: u64 = line.parse().map_err(|_| {
                    CliError::Data(format!("malformed row {row}: {line:?} is not a decimal size"))
                })?;
                if size == 0 {
                    return Err(CliError::Data(format!(
                        "malformed row {row}: sizes must be positive"
                    )));
                }
                pairs.push((size, 1));
            }
            InputFormat::SizeCount => {
                let (s, c) = line.split_once(',').ok_or_else(|| {
                    CliError::Data(format!("malformed row {row}: expected size,count"))
                })?;
                let size: u64 = s.trim().parse().map_err(|_| {
                    CliError::Data(format!("malformed row {row}: {s:?} is not a decimal size"))
                })?;
                let count: u64 = c.trim().parse().map_err(|_| {
                    CliError::Data(format!("malformed row {row}: {c:?} is not a decimal count"))
                })?;
                if size == 0 || count == 0 {
                    return Err(CliError::Data(format!(
                        "malformed row {row}: sizes and counts must be positive"
                    )));
                }
                pairs.push((size, count));
            }
        }
    }
    let dataset = SizeDataset::from_counts(pairs).map_err(data)?;
    Ok((dataset, format.expect("non-empty dataset implies a format")))
}

fn parse_range(raw: &str) -> Result<(u64, u64), CliError> {
    let parsed = raw.split_once(':').and_then(|(lo, hi)| {
        Some((lo.trim().parse::<u64>().ok()?, hi.trim().parse::<u64>().ok()?))
    });
    match parsed {
        Some((lo, hi)) if lo <= hi => Ok((lo, hi)),
        Some((lo, hi)) => Err(CliError::Usage(format!(
            "--n-range must be LO:HI with LO <= HI, got {lo}:{hi}"
        ))),
        None => Err(CliError::Usage(format!(
            "--n-range must be LO:HI (two decimal integers), got {raw:?}"
        ))),
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hex = String::with_capacity(bytes.len() * 2);
    for byte in bytes {
        use std::fmt::Write as _;
        write!(hex, "{byte:02x}").expect("writing to a String cannot fail");
    }
    hex
}

/// Maximum-likelihood fit from a file of observations; JSON report.
pub fn fit(
    input: &Path,
    n: Option<u64>,
    n_range: Option<&str>,
    tol: f64,
) -> Result<(), CliError> {
    let bytes = fs::read(input)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", input.display())))?;
    let digest = hex_digest(&Sha256::digest(&bytes));
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Data(format!("{} is not valid UTF-8", input.display())))?;
    let (dataset, input_format) = parse_observations(&text)?;

    let mut block = MetaBlock::new("fit");
    block.push("input", input.display());
    block.push("format", input_format.name());
    block.push("observations", dataset.total());
    block.push("tol", tol);

    let report = match (n, n_range) {
        (Some(n), None) => {
            block.push("n", n);
            fit_alpha(&dataset, n, tol).map_err(computation_error)?
        }
        (None, Some(range)) => {
            let (lo, hi) = parse_range(range)?;
            block.push("n-range", format!("{lo}:{hi}"));
            fit_joint(&dataset, lo, hi, tol).map_err(computation_error)?
        }
        _ => unreachable!("clap enforces exactly one of --n / --n-range"),
    };

    #[derive(Serialize)]
    struct Payload {
        #[serde(flatten)]
        fit: FitReport,
        input_sha256: String,
    }
    let envelope = serde_json::json!({
        "metadata": block.to_json(),
        "report": Payload { fit: report, input_sha256: digest },
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&envelope).expect("report serialization cannot fail")
    );
    Ok(())
}

/// Criticality analysis: JSON report for one size, or a CSV scaling table.
pub fn critical(
    n: Option<u64>,
    scaling: Option<&[u64]>,
    tol: f64,
    step: f64,
) -> Result<(), CliError> {
    match (n, scaling) {
        (Some(n), None) => {
            if n < 2 {
                return Err(CliError::Usage(format!("N >= 2 required, got {n}")));
            }
            let report = CriticalityReport::analyze(n, tol, step).map_err(computation_error)?;
            let mut block = MetaBlock::new("critical");
            block.push("n", n);
            block.push("tol", tol);
            block.push("step", step);
            let envelope = serde_json::json!({
                "metadata": block.to_json(),
                "report": report,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&envelope)
                    .expect("report serialization cannot fail")
            );
        }
        (None, Some(ns)) => {
            if ns.is_empty() {
                return Err(CliError::Usage(
                    "--scaling needs at least one system size".into(),
                ));
            }
            if let Some(bad) = ns.iter().find(|&&m| m < 2) {
                return Err(CliError::Usage(format!("N >= 2 required, got {bad}")));
            }
            let rows = alpha_crit_scaling(ns, tol).map_err(computation_error)?;
            let mut block = MetaBlock::new("critical");
            let listed: Vec<String> = ns.iter().map(u64::to_string).collect();
            block.push("scaling", listed.join(","));
            block.push("tol", tol);

            let stdout = io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            block.write_comments(&mut out)?;
            writeln!(out, "n,alpha_crit,one_minus_inv_sqrt_n,deviation")?;
            for row in &rows {
                writeln!(
                    out,
                    "{},{},{},{}",
                    row.n, row.alpha_crit, row.one_minus_inv_sqrt_n, row.deviation
                )?;
            }
            out.flush()?;
        }
        _ => unreachable!("clap enforces exactly one of --n / --scaling"),
    }
    Ok(())
}

/// Outcome of the identity suite: one line per law, plus a witness for the
/// first failing instance, if any.
struct CheckReport {
    lines: Vec<String>,
    witness: Option<String>,
}

/// Run every exact identity on the configured grid.
///
/// `corrupt` deliberately shifts the expected coefficient at one `(i, n)`
/// so tests can exercise the failure path; the binary always passes `None`.
fn run_identity_suite(
    max_i: u32,
    max_n: u64,
    points_per_n: u32,
    corrupt: Option<(u32, u64)>,
) -> CheckReport {
    let mut lines = Vec::new();

    let mut cases = 0u64;
    for i in 0..=max_i {
        for n in 1..=max_n {
            let mut expected = if i == 0 {
                BigInt::from(1)
            } else {
                BigInt::from(n).pow(i - 1)
            };
            if corrupt == Some((i, n)) {
                expected += BigInt::from(1);
            }
            if lemma_coefficient(i, n) != expected {
                return CheckReport {
                    lines,
                    witness: Some(format!("scaled expansion coefficient at i={i}, n={n}")),
                };
            }
            cases += 1;
        }
    }
    lines.push(format!(
        "scaled expansion coefficients match n^(i-1): ok ({cases} cases)"
    ));

    let mut cases = 0u64;
    for i in 0..=max_i {
        for n in 1..=max_n {
            if theorem_coefficient(i, n) != BigInt::from(n).pow(i) {
                return CheckReport {
                    lines,
                    witness: Some(format!("direct expansion coefficient at i={i}, n={n}")),
                };
            }
            cases += 1;
        }
    }
    lines.push(format!(
        "direct expansion coefficients match n^i: ok ({cases} cases)"
    ));

    // Both rational-point identities share one deterministic point stream.
    let mut rng = ChaCha8Rng::seed_from_u64(CHECK_POINT_SEED);
    let mut normalization_cases = 0u64;
    let mut expectation_cases = 0u64;
    for n in 1..=max_n {
        for _ in 0..points_per_n {
            // x = u/v strictly inside (0, 1/n).
            let u = rng.gen_range(1..=9u64);
            let v = u * n + rng.gen_range(1..=500u64);
            let x = rational(u as i64, v as i64);
            match check_normalization_identity(n, &x) {
                Ok(true) => normalization_cases += 1,
                _ => {
                    return CheckReport {
                        lines,
                        witness: Some(format!("normalization identity at n={n}, x={u}/{v}")),
                    }
                }
            }
            match check_expectation_identity(n, &x) {
                Ok(true) => expectation_cases += 1,
                _ => {
                    return CheckReport {
                        lines,
                        witness: Some(format!("expectation identity at n={n}, x={u}/{v}")),
                    }
                }
            }
        }
    }
    lines.push(format!(
        "normalization identity: ok ({normalization_cases} rational points)"
    ));
    lines.push(format!(
        "expectation identity: ok ({expectation_cases} rational points)"
    ));

    CheckReport {
        lines,
        witness: None,
    }
}

/// Run the exact identity suite; exit 0 only if every instance holds.
pub fn check(max_i: u32, max_n: u64) -> Result<(), CliError> {
    let mut block = MetaBlock::new("check");
    block.push("max-i", max_i);
    block.push("max-n", max_n);
    block.push("points-per-n", CHECK_POINTS_PER_N);
    block.push("point-seed", CHECK_POINT_SEED);

    let report = run_identity_suite(max_i, max_n, CHECK_POINTS_PER_N, None);

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    block.write_comments(&mut out)?;
    for line in &report.lines {
        writeln!(out, "{line}")?;
    }
    match report.witness {
        None => {
            writeln!(out, "all identities hold on the configured grid")?;
            out.flush()?;
            Ok(())
        }
        Some(witness) => {
            out.flush()?;
            eprintln!("FAIL: {witness}");
            Err(CliError::CheckFailed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_suite_passes_on_a_small_grid() {
        let report = run_identity_suite(3, 5, 5, None);
        assert!(report.witness.is_none());
        assert_eq!(report.lines.len(), 4);
        assert!(report.lines[0].contains("20 cases"));
        assert!(report.lines[2].contains("25 rational points"));
    }

    #[test]
    fn identity_suite_reports_a_witness_when_corrupted() {
        let report = run_identity_suite(3, 5, 5, Some((2, 3)));
        let witness = report.witness.expect("corruption must surface");
        assert!(witness.contains("i=2, n=3"), "witness: {witness}");
    }

    #[test]
    fn range_parsing_accepts_exactly_lo_colon_hi() {
        assert_eq!(parse_range("80:130").unwrap(), (80, 130));
        assert_eq!(parse_range(" 5 : 5 ").unwrap(), (5, 5));
        assert!(matches!(parse_range("130:80"), Err(CliError::Usage(_))));
        assert!(matches!(parse_range("80-130"), Err(CliError::Usage(_))));
        assert!(matches!(parse_range("80:x"), Err(CliError::Usage(_))));
    }

    #[test]
    fn observation_parser_detects_both_formats() {
        let (plain, format) = parse_observations("# comment\n7\n7\n9\n").unwrap();
        assert_eq!(format, InputFormat::Plain);
        assert_eq!(plain.total(), 3);
        assert_eq!(plain.counts()[&7], 2);

        let (csv, format) = parse_observations("size,count\n1,5\n2,3\n1,2\n").unwrap();
        assert_eq!(format, InputFormat::SizeCount);
        assert_eq!(csv.total(), 10);
        assert_eq!(csv.counts()[&1], 7);
    }

    #[test]
    fn observation_parser_cites_the_offending_row() {
        let err = parse_observations("7\nbanana\n").unwrap_err();
        assert!(matches!(&err, CliError::Data(msg) if msg.contains("row 2")));

        let err = parse_observations("size,count\n3,4\n5\n").unwrap_err();
        assert!(matches!(&err, CliError::Data(msg) if msg.contains("row 3")));

        let err = parse_observations("0\n").unwrap_err();
        assert!(matches!(&err, CliError::Data(msg) if msg.contains("row 1")));

        let err = parse_observations("\n# only comments\n").unwrap_err();
        assert!(matches!(&err, CliError::Data(msg) if msg.contains("no observations")));
    }

    #[test]
    fn digest_matches_the_well_known_empty_hash() {
        assert_eq!(
            hex_digest(&Sha256::digest(b"")),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
