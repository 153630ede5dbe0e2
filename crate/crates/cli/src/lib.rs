//! Configuration loading and table emission for the `ctilde` command line.

use std::fs;
use std::path::{Path, PathBuf};

use ctilde::koornwinder::compute_p_detailed;
use ctilde::linalg::{eigenvalues, sort_spectrum, spectrum_distance};
use ctilde::numerics::params::{lattice_ball, psin_for_mcondition, Constraint, ParamSetJson};
use ctilde::numerics::sample_generic;
use ctilde::spinrep::{build_spin_rep, BasisTag, LinOp, LinOpJson};
use ctilde::suites::SuiteConfig;
use ctilde::transfer::{hamiltonian, HamiltonianForm};
use ctilde::{Error, Exact, ParamSet, Precision, Result};
use serde::{Deserialize, Serialize};

/// Flag values; `None` leaves the config file or default in place.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub precision: Option<Precision>,
    pub tolerance: Option<f64>,
    pub samples: Option<usize>,
    pub params: Option<PathBuf>,
    pub m: Option<i32>,
    pub constrain: bool,
    pub degree: Option<i32>,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes pretty JSON with a trailing newline to `path`, or to stdout.
pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Flag over config file over default.
pub fn load_config(file: Option<&Path>, o: &Overrides) -> Result<SuiteConfig> {
    let mut cfg = match file {
        Some(f) => read_json::<SuiteConfig>(f)?,
        None => SuiteConfig::default(),
    };
    if let Some(n) = o.n {
        cfg.n = Some(n);
    }
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(p) = o.precision {
        cfg.precision = p;
    }
    if let Some(t) = o.tolerance {
        cfg.tolerance = t;
    }
    if let Some(s) = o.samples {
        cfg.samples = Some(s);
    }
    if let Some(path) = &o.params {
        cfg.params = Some(read_json::<ParamSetJson>(path)?);
    }
    if let Some(m) = o.m {
        cfg.m = Some(m);
    }
    cfg.constrain |= o.constrain;
    if let Some(d) = o.degree {
        cfg.degree = Some(d);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parameters for a single computation at chain length `n`.
pub fn params_for(cfg: &SuiteConfig, n: usize, constraint: Option<Constraint>) -> Result<ParamSet<f64>> {
    match &cfg.params {
        Some(j) => {
            let p = ParamSet::from_json(j, 1e-12)?.with_n(n)?;
            match constraint {
                Some(Constraint::MCondition { m }) => p.with_psin(psin_for_mcondition(&p, m)),
                None => Ok(p),
            }
        }
        None => sample_generic(cfg.seed, n, constraint),
    }
}

/// Parses `"a,b,c"`.
pub fn parse_lambda(s: &str) -> Result<Vec<i32>> {
    let s = s.trim().trim_start_matches('(').trim_end_matches(')');
    if s.is_empty() {
        return Err(Error::Invalid("lambda is empty".into()));
    }
    s.split(',').map(|x| x.trim().parse::<i32>().map_err(|e| Error::Invalid(format!("bad lambda entry '{x}': {e}")))).collect()
}

/// File stem for a weight, e.g. `(1,-2)` becomes `1_m2`.
pub fn lambda_tag(lambda: &[i32]) -> String {
    lambda.iter().map(|x| if *x < 0 { format!("m{}", -x) } else { x.to_string() }).collect::<Vec<_>>().join("_")
}

/// `P_λ` with metadata, at the configured precision.
pub fn koornwinder_json(lambda: &[i32], p: &ParamSet<f64>, precision: Precision) -> Result<serde_json::Value> {
    let j = match precision {
        Precision::Double => compute_p_detailed(lambda, p)?.to_json(),
        Precision::Extended => {
            let pe: ParamSet<Exact> = ctilde::suites::exact_params(p)?;
            compute_p_detailed(lambda, &pe)?.to_json()
        }
    };
    Ok(serde_json::to_value(j)?)
}

/// The spin operators `ρ(T_i)` and `ρ̂(e_i)` at one parameter set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OpsDump {
    pub params: ParamSetJson,
    pub rho_t: Vec<LinOpJson>,
    pub rho_hat_e: Vec<LinOpJson>,
}

pub fn dump_ops(cfg: &SuiteConfig) -> Result<OpsDump> {
    let n = cfg.n.unwrap_or(2);
    let p = params_for(cfg, n, None)?;
    let spin = build_spin_rep(&p)?;
    let ops = |ms: &[ctilde::Mat<f64>]| ms.iter().map(|m| LinOp::new(BasisTag::Spin { n }, m.clone()).map(|op| op.to_json())).collect::<Result<Vec<_>>>();
    Ok(OpsDump { params: p.to_json(), rho_t: ops(&spin.hecke.t)?, rho_hat_e: ops(&spin.e)? })
}

/// List of files written by `emit tables`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<String>,
}

/// Table kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum TableKind {
    Koornwinder,
    #[value(name = "hamiltonian_spectrum")]
    HamiltonianSpectrum,
}

/// Sorted eigenvalues of the requested forms and their pairwise distances.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub n: usize,
    pub params_fingerprint: String,
    pub spectra: Vec<FormSpectrum>,
    pub pairwise_distance: Vec<PairDistance>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormSpectrum {
    pub form: HamiltonianForm,
    pub eigenvalues: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairDistance {
    pub a: HamiltonianForm,
    pub b: HamiltonianForm,
    pub distance: f64,
}

pub fn spectrum_table(p: &ParamSet<f64>, forms: &[HamiltonianForm]) -> Result<SpectrumTable> {
    let mut spectra = Vec::new();
    let mut raw = Vec::new();
    for &form in forms {
        let mut ev = eigenvalues(&hamiltonian(p, form)?.mat)?;
        sort_spectrum(&mut ev);
        spectra.push(FormSpectrum { form, eigenvalues: ev.iter().map(|z| [z.re, z.im]).collect() });
        raw.push(ev);
    }
    let mut pairwise_distance = Vec::new();
    for a in 0..forms.len() {
        for b in a + 1..forms.len() {
            pairwise_distance.push(PairDistance { a: forms[a], b: forms[b], distance: spectrum_distance(&raw[a], &raw[b]) });
        }
    }
    Ok(SpectrumTable { n: p.n(), params_fingerprint: p.fingerprint(), spectra, pairwise_distance })
}

/// Writes the requested tables into `dir` and returns the manifest.
pub fn emit_tables(kinds: &[TableKind], cfg: &SuiteConfig, forms: &[HamiltonianForm], dir: &Path) -> Result<Manifest> {
    let mut manifest = Manifest::default();
    fs::create_dir_all(dir)?;
    for kind in kinds {
        match kind {
            TableKind::Koornwinder => {
                let n = cfg.n.unwrap_or(1);
                let p = params_for(cfg, n, None)?;
                for lambda in lattice_ball(n, cfg.degree.unwrap_or(2)) {
                    let name = format!("koornwinder_n{n}_{}.json", lambda_tag(&lambda));
                    write_json(Some(&dir.join(&name)), &koornwinder_json(&lambda, &p, cfg.precision)?)?;
                    manifest.files.push(name);
                }
            }
            TableKind::HamiltonianSpectrum => {
                let n = cfg.n.unwrap_or(2);
                let p = params_for(cfg, n, None)?;
                let name = format!("hamiltonian_spectrum_n{n}.json");
                write_json(Some(&dir.join(&name)), &spectrum_table(&p, forms)?)?;
                manifest.files.push(name);
            }
        }
    }
    write_json(Some(&dir.join("manifest.json")), &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_parsing() {
        assert_eq!(parse_lambda("1,-2,0").unwrap(), vec![1, -2, 0]);
        assert_eq!(parse_lambda("(3)").unwrap(), vec![3]);
        assert!(parse_lambda("").is_err());
        assert!(parse_lambda("1,x").is_err());
        assert_eq!(lambda_tag(&[1, -2]), "1_m2");
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("ctilde-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let f = dir.join("c.json");
        fs::write(&f, r#"{"n": 3, "seed": 9, "tolerance": 1e-7}"#).unwrap();
        let cfg = load_config(Some(&f), &Overrides { seed: Some(4), ..Overrides::default() }).unwrap();
        assert_eq!((cfg.n, cfg.seed, cfg.tolerance), (Some(3), 4, 1e-7));
        let cfg = load_config(None, &Overrides::default()).unwrap();
        assert_eq!(cfg, SuiteConfig::default());
    }

    #[test]
    fn dumped_operators_round_trip() {
        let cfg = SuiteConfig { n: Some(3), seed: 2, ..SuiteConfig::default() };
        let d = dump_ops(&cfg).unwrap();
        assert_eq!((d.rho_t.len(), d.rho_hat_e.len()), (4, 4));
        let p = params_for(&cfg, 3, None).unwrap();
        let spin = build_spin_rep(&p).unwrap();
        assert_eq!(LinOp::<f64>::from_json(&d.rho_t[1]).unwrap().mat, spin.hecke.t[1]);
        assert_eq!(d.rho_hat_e[0].basis_tag, BasisTag::Spin { n: 3 });
    }
}
