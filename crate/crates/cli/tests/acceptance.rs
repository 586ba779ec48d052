//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use horolab::verify::{
    dual_checks, flow_checks, identity_chain_checks, laplacian_checks, light_cone_checks,
    nirenberg_checks, round_trip, sphere_oracle_checks, weingarten_checks, Check, VerifyConfig,
};
use horolab::Result;

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    /// Only checks whose name contains one of these count; empty keeps all.
    select: &'static [&'static str],
    run: fn(&VerifyConfig) -> Result<Vec<Check>>,
}

fn determinism(_: &VerifyConfig) -> Result<Vec<Check>> {
    let dir = tempfile::tempdir()?;
    let cfg = dir.path().join("verify.cfg");
    fs::write(&cfg, "L = 16\n")?;
    let mut outputs = Vec::new();
    for threads in ["1", "4", "1", "4"] {
        let out = dir.path().join(format!("out{}", outputs.len()));
        let status = Command::new(env!("CARGO_BIN_EXE_horolab"))
            .args([
                "verify",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ])
            .env("HOROLAB_THREADS", threads)
            .output()?
            .status;
        if !status.success() {
            return Ok(vec![Check::holds(
                format!("verify run with {threads} threads"),
                false,
            )]);
        }
        outputs.push(read_dir(&out)?);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    Ok(vec![
        Check::at_least("output files", outputs[0].len() as f64, 7.0),
        Check::holds("byte-identical outputs", same),
    ])
}

fn read_dir(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    for e in fs::read_dir(dir)? {
        let e = e?;
        files.push((
            e.file_name().to_string_lossy().into_owned(),
            fs::read(e.path())?,
        ));
    }
    files.sort();
    Ok(files)
}

fn main() {
    let cfg = VerifyConfig::default();
    let criteria = [
        Criterion {
            name: "geodesic-sphere oracle",
            limit: Some(Duration::from_secs(1)),
            select: &[],
            run: sphere_oracle_checks,
        },
        Criterion {
            name: "identity chain",
            limit: Some(Duration::from_secs(10)),
            select: &[],
            run: identity_chain_checks,
        },
        Criterion {
            name: "light-cone metric and mixed form",
            limit: None,
            select: &["light-cone metric", "mixed form"],
            run: light_cone_checks,
        },
        Criterion {
            name: "laplacian representation",
            limit: None,
            select: &[],
            run: laplacian_checks,
        },
        Criterion {
            name: "parallel flow",
            limit: None,
            select: &[],
            run: flow_checks,
        },
        Criterion {
            name: "nirenberg solver",
            limit: Some(Duration::from_secs(30)),
            select: &["constant 1/2", "monotone"],
            run: nirenberg_checks,
        },
        Criterion {
            name: "solution round trip",
            limit: None,
            select: &["christoffel mean", "horospherical metric", "identity chain"],
            run: |c| round_trip(c).map(|r| r.0),
        },
        Criterion {
            name: "schouten inversion",
            limit: None,
            select: &[],
            run: |c| dual_checks(c).map(|r| r.0),
        },
        Criterion {
            name: "weingarten suite",
            limit: None,
            select: &[],
            run: weingarten_checks,
        },
        Criterion {
            name: "determinism across thread counts",
            limit: None,
            select: &[],
            run: determinism,
        },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)(&cfg);
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(checks) => {
                let kept: Vec<&Check> = checks
                    .iter()
                    .filter(|k| c.select.is_empty() || c.select.iter().any(|s| k.name.contains(s)))
                    .collect();
                let bad: Vec<String> = kept
                    .iter()
                    .filter(|k| !k.passed())
                    .map(|k| {
                        format!(
                            "{} = {:e} (needs {} {:e})",
                            k.name,
                            k.value,
                            k.relation.symbol(),
                            k.bound
                        )
                    })
                    .collect();
                let worst = kept
                    .iter()
                    .filter(|k| k.relation == horolab::verify::Relation::AtMost && k.bound > 0.0)
                    .map(|k| k.value / k.bound)
                    .fold(0.0f64, f64::max);
                if bad.is_empty() {
                    (
                        true,
                        format!(
                            "{} checks, worst deviation/tolerance {:.2e}",
                            kept.len(),
                            worst
                        ),
                    )
                } else {
                    (false, bad.join("; "))
                }
            }
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = c.limit.is_none_or(|l| elapsed <= l);
        let pass = ok && in_time;
        let timing = match c.limit {
            Some(l) => format!("{:.2}s, limit {}s", elapsed.as_secs_f64(), l.as_secs()),
            None => format!("{:.2}s", elapsed.as_secs_f64()),
        };
        println!(
            "[{}] {}: {} ({timing})",
            if pass { "PASS" } else { "FAIL" },
            c.name,
            detail
        );
        if !pass {
            failed += 1;
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
