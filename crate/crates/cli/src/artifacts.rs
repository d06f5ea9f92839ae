//! On-disk artifacts: translation vector, coefficient tables, reports and
//! run metadata.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_bigint::BigInt;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use slowmix::arithmetic::{Axis, PartialQuotients, Relation, TranslationVector};
use slowmix::ceiling::CeilingFunction;
use slowmix::report::{fmt_f64, CriterionReport};

use crate::config::RunConfig;
use crate::exit::Failure;

pub const VECTOR_FILE: &str = "vector.txt";
pub const CONVERGENTS_FILE: &str = "convergents.csv";
pub const GROWTH_FILE: &str = "growth.csv";
pub const COEFFICIENTS_FILE: &str = "coefficients.csv";
pub const CEILING_FILE: &str = "ceiling.txt";
const VECTOR_FORMAT: &str = "slowmix-vector-1";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("missing artifact {}: {e}", path.display())))
}

fn join(a: &PartialQuotients) -> String {
    a.as_slice().iter().map(BigInt::to_string).collect::<Vec<_>>().join(" ")
}

/// Partial quotients of both coordinates and the precision.
pub fn vector_text(tv: &TranslationVector) -> String {
    format!(
        "format={VECTOR_FORMAT}\nbits={}\nalpha={}\nalpha_prime={}\n",
        tv.bits,
        join(&tv.cf(Axis::X).quotients),
        join(&tv.cf(Axis::Y).quotients)
    )
}

pub fn parse_vector(text: &str, origin: &str) -> Result<TranslationVector, Failure> {
    let bad = |why: &str| Failure::usage(format!("corrupted vector file {origin}: {why}"));
    let pairs = crate::config::parse_pairs(text, origin).map_err(|e| bad(&e))?;
    let field = |k: &str| pairs.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str()).ok_or_else(|| bad(&format!("missing '{k}'")));
    if field("format")? != VECTOR_FORMAT {
        return Err(bad("unknown format"));
    }
    let bits: u64 = field("bits")?.parse().map_err(|_| bad("bad bits"))?;
    let quotients = |k: &str| -> Result<PartialQuotients, Failure> {
        let v: Vec<BigInt> = field(k)?.split_whitespace().map(|t| t.parse().map_err(|_| bad(&format!("bad quotient '{t}'")))).collect::<Result<_, _>>()?;
        PartialQuotients::new(v).map_err(|e| bad(&e.to_string()))
    };
    TranslationVector::from_quotients(quotients("alpha")?, quotients("alpha_prime")?, bits).map_err(|e| bad(&e.to_string()))
}

/// `axis,n,p,q` for both coordinates.
pub fn convergents_csv(tv: &TranslationVector) -> String {
    let mut s = String::from("axis,n,p,q\n");
    for axis in [Axis::X, Axis::Y] {
        for r in &tv.cf(axis).table.rows {
            s.push_str(&format!("{},{},{},{}\n", axis.as_str(), r.n, r.p, r.q));
        }
    }
    s
}

pub fn growth_csv(tv: &TranslationVector) -> String {
    let mut s = String::from("n,relation,lhs,bound,holds\n");
    for g in &tv.growth {
        let rel = match g.relation {
            Relation::PrimeOverBase => "qp_n>=G(q_n)",
            Relation::NextOverPrime => "q_n+1>=G(qp_n)",
        };
        s.push_str(&format!("{},{rel},{},{},{}\n", g.n, g.lhs, g.bound, g.holds));
    }
    s
}

/// `level,axis,k1,k2,re,im` with 17 significant digits.
pub fn coefficients_csv(cf: &CeilingFunction) -> String {
    let mut s = String::from("level,axis,k1,k2,re,im\n");
    for (n, axis, k1, k2, re, im) in cf.coefficient_rows() {
        s.push_str(&format!("{n},{},{k1},{k2},{},{}\n", axis.as_str(), fmt_f64(re), fmt_f64(im)));
    }
    s
}

pub fn ceiling_text(cf: &CeilingFunction, coeff_digest: &str, vector_digest: &str) -> String {
    format!(
        "n0={}\nn_max={}\ninf_bound={}\nsup_bound={}\nregime={}\ncoefficients_sha256={coeff_digest}\nvector_sha256={vector_digest}\n",
        cf.n0,
        cf.n_max,
        fmt_f64(cf.inf_bound),
        fmt_f64(cf.sup_bound),
        cf.regime.summary()
    )
}

/// Reads the recorded digest from `ceiling.txt` and checks the stored table against it.
pub fn check_ceiling_artifacts(dir: &Path) -> Result<(String, String), Failure> {
    let text = read(&dir.join(CEILING_FILE))?;
    let pairs = crate::config::parse_pairs(&text, CEILING_FILE).map_err(Failure::usage)?;
    let get = |k: &str| pairs.iter().find(|(key, _)| key == k).map(|(_, v)| v.clone()).ok_or_else(|| Failure::usage(format!("{CEILING_FILE}: missing '{k}'")));
    let (coeff, vector) = (get("coefficients_sha256")?, get("vector_sha256")?);
    let table = read(&dir.join(COEFFICIENTS_FILE))?;
    if sha256_hex(table.as_bytes()) != coeff {
        return Err(Failure::usage(format!("{COEFFICIENTS_FILE} does not match the digest recorded in {CEILING_FILE}")));
    }
    Ok((coeff, vector))
}

fn report_json(r: &CriterionReport) -> Value {
    json!({
        "id": r.id,
        "status": r.status.as_str(),
        "margin": fmt_f64(r.margin),
        "tolerance": fmt_f64(r.tolerance),
        "samples": r.samples,
        "witness": r.witness,
        "params": r.params.iter().map(|(k, v)| json!([k, v])).collect::<Vec<_>>(),
        "notes": r.notes,
    })
}

/// `<command>.report.txt` and `<command>.report.json`; both are free of timestamps.
pub fn write_reports(dir: &Path, command: &str, cfg: &RunConfig, reports: &[CriterionReport], digests: &[(String, String)]) -> Result<(), Failure> {
    let mut text = format!("# {command}\n");
    for r in reports {
        text.push_str(&r.to_text());
        text.push('\n');
    }
    write(dir, &format!("{command}.report.txt"), &text)?;
    write(dir, &format!("{command}.config.txt"), &cfg.echo())?;
    let doc = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg.pairs(),
        "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
        "digests": digests.iter().map(|(k, v)| json!([k, v])).collect::<Vec<_>>(),
    });
    let body = serde_json::to_string_pretty(&doc).expect("report serializes");
    write(dir, &format!("{command}.report.json"), &(body + "\n"))?;
    Ok(())
}

/// Timestamps and environment of one run, kept apart from the reports.
pub struct Metadata {
    command: String,
    started: SystemTime,
}

impl Metadata {
    pub fn start(command: &str) -> Self {
        Self { command: command.to_string(), started: SystemTime::now() }
    }

    pub fn finish(self, dir: &Path, exit_code: u8) -> Result<(), Failure> {
        let secs = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let now = SystemTime::now();
        let doc = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "started_unix": secs(self.started),
            "finished_unix": secs(now),
            "elapsed_seconds": now.duration_since(self.started).map(|d| d.as_secs_f64()).unwrap_or(0.0),
            "threads": rayon::current_num_threads(),
            "exit_code": exit_code,
        });
        write(dir, &format!("{}.metadata.json", self.command), &(serde_json::to_string_pretty(&doc).expect("metadata serializes") + "\n"))?;
        Ok(())
    }
}
