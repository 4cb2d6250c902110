use std::fs;
use std::path::Path;

use lpm_shapley::simulation::DEFAULT_SAMPLES;
use lpm_shapley::{Link, RngSpec, StudyConfig};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::args::StudyArgs;
use crate::failure::{Classify, CmdResult, Failure};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CmdResult<T> {
    let text = fs::read_to_string(path).input_err(format!("reading {}", path.display()))?;
    serde_json::from_str(&text).input_err(format!("parsing {}", path.display()))
}

/// Several studies sharing link, threshold, budget and seed. Study `i` draws
/// from stream `i` of the seed.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Bundle {
    #[serde(default)]
    link: Option<Link>,
    #[serde(default)]
    eta_star: Option<f64>,
    #[serde(default)]
    n_samples: Option<u64>,
    #[serde(default)]
    seed: Option<u64>,
    studies: Vec<BundleEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleEntry {
    expected_eta: f64,
    scaled_sigmas: [f64; 2],
}

pub struct Studies {
    pub seed: u64,
    pub samples: u64,
    pub configs: Vec<StudyConfig>,
}

pub fn resolve_seed(cli: Option<u64>, config: Option<u64>) -> u64 {
    cli.or(config).unwrap_or_else(|| {
        let seed = rand::random::<u64>();
        eprintln!("no seed given; drew seed {seed}");
        seed
    })
}

/// Load a single study or a bundle and apply flag overrides.
pub fn load_studies(args: &StudyArgs) -> CmdResult<Studies> {
    let value: serde_json::Value = read_json(&args.config)?;
    let context = || format!("parsing {}", args.config.display());
    let (config_seed, mut configs) = if value.get("studies").is_some() {
        let b: Bundle = serde_json::from_value(value).input_err(context())?;
        if b.studies.is_empty() {
            return Err(Failure::input("config bundle lists no studies"));
        }
        let configs = b
            .studies
            .iter()
            .enumerate()
            .map(|(i, s)| StudyConfig {
                expected_eta: s.expected_eta,
                scaled_sigmas: s.scaled_sigmas,
                link: b.link.unwrap_or_default(),
                eta_star: b.eta_star.unwrap_or(0.0),
                n_samples: b.n_samples.unwrap_or(DEFAULT_SAMPLES),
                rng: RngSpec::new(0, i as u64),
            })
            .collect();
        (b.seed, configs)
    } else {
        let seeded = value.get("rng").is_some();
        let c: StudyConfig = serde_json::from_value(value).input_err(context())?;
        (seeded.then_some(c.rng.seed), vec![c])
    };

    let seed = resolve_seed(args.seed, config_seed);
    for c in &mut configs {
        c.rng.seed = seed;
        if let Some(n) = args.samples {
            c.n_samples = n;
        }
        if let Some(link) = args.link {
            c.link = link.into();
        }
        if let Some(e) = args.eta_star {
            c.eta_star = e;
        }
        c.validate().input_err("study config")?;
    }
    eprintln!("seed: {seed}");
    Ok(Studies {
        seed,
        samples: configs[0].n_samples,
        configs,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub expected_eta: f64,
    #[serde(default)]
    pub link: Link,
    pub variances: Vec<f64>,
}
