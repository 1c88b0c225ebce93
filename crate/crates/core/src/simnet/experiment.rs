//! Experiment suites: train the networks a suite requires, probe them all on
//! one shared stimulus set, and persist activations + accuracies.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::{evaluate_accuracy, forward_collect, train};
use super::{NetSpec, Params, Recipe, Task, TrainConfig};
use crate::error::{Error, Result};
use crate::io::{write_manifest, write_matrix};
use crate::matrix::ActivationSet;
use crate::numfmt::g9;

/// Which family of networks to train and compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Untrained net vs standard and transfer-freeze nets.
    UntrainedVsTrained,
    /// Two standard nets (tasks A and B) plus the B-to-A transfer-freeze net.
    TransferFreeze,
    /// Standard net plus random-above-n nets for every n in 1..L.
    RandomFeatures,
}

impl Suite {
    pub fn id(self) -> &'static str {
        match self {
            Suite::UntrainedVsTrained => "untrained_vs_trained",
            Suite::TransferFreeze => "transfer_freeze",
            Suite::RandomFeatures => "random_features",
        }
    }

    pub const ALL: [Suite; 3] = [
        Suite::UntrainedVsTrained,
        Suite::TransferFreeze,
        Suite::RandomFeatures,
    ];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.id() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown suite {s:?} (expected untrained_vs_trained, transfer_freeze, or random_features)"
                ))
            })
    }
}

/// Desk-scale experiment configuration: one architecture, two related tasks
/// standing in for two languages, shared SGD settings, and a probe set drawn
/// from task A (every network is probed on the same inputs).
#[derive(Debug, Clone)]
pub struct DeskConfig {
    pub net: NetSpec,
    pub task_a: Task,
    pub task_b: Task,
    pub train: TrainConfig,
    pub probe_samples: usize,
    pub eval_samples: usize,
    pub seed: u64,
}

// Stream tags for per-network seeds.
const NET_STANDARD_A: u64 = 11;
const NET_STANDARD_B: u64 = 12;
const NET_TRANSFER: u64 = 13;
const NET_UNTRAINED: u64 = 14;
const NET_RANDOM_BASE: u64 = 100;
const PROBE_TAG: u64 = 900;
const EVAL_TAG: u64 = 901;

fn derived_seed(base: u64, tag: u64) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(tag)
}

impl DeskConfig {
    /// The development-fixed desk-scale setup: 6 weight layers, tapering
    /// widths, two half-mixed 12-class Gaussian tasks in 16 dimensions.
    pub fn desk_default(seed: u64) -> Self {
        let net = NetSpec::new(vec![16, 48, 40, 32, 24, 16, 12]).expect("valid widths");
        let task_a = Task::with_params(12, 16, derived_seed(seed, 1), 1.6, 1.0).expect("valid task");
        let task_b = task_a
            .related(derived_seed(seed, 2), 0.5)
            .expect("valid mix");
        let train = TrainConfig::new(36, 32, 0.05, 3000, seed).expect("valid config");
        Self {
            net,
            task_a,
            task_b,
            train,
            probe_samples: 768,
            eval_samples: 2000,
            seed,
        }
    }

    fn cfg_for(&self, tag: u64) -> TrainConfig {
        self.train.clone().with_seed(derived_seed(self.seed, tag))
    }
}

/// One trained (or untrained) network with its probe activations.
#[derive(Debug, Clone)]
pub struct NetworkRun {
    pub name: String,
    pub recipe_label: &'static str,
    pub n_random_layers: usize,
    pub top1: f64,
    pub activations: ActivationSet,
}

/// Everything a suite produced.
#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub suite: Suite,
    pub runs: Vec<NetworkRun>,
}

impl SuiteResult {
    pub fn run(&self, name: &str) -> Option<&NetworkRun> {
        self.runs.iter().find(|r| r.name == name)
    }

    /// Accuracy report: one row per network, `%.9g` values.
    pub fn accuracy_csv(&self) -> String {
        let mut out = String::from("network,recipe,n_random_layers,top1\n");
        for r in &self.runs {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.name,
                r.recipe_label,
                r.n_random_layers,
                g9(r.top1)
            ));
        }
        out
    }
}

struct SuiteContext<'a> {
    cfg: &'a DeskConfig,
    probe_inputs: ndarray::Array2<f64>,
    probe_id: String,
}

impl<'a> SuiteContext<'a> {
    fn new(cfg: &'a DeskConfig) -> Self {
        let (probe_inputs, _) = cfg
            .task_a
            .sample(cfg.probe_samples, derived_seed(cfg.seed, PROBE_TAG));
        let probe_id = format!("task-a-probe-n{}-s{}", cfg.probe_samples, cfg.seed);
        Self {
            cfg,
            probe_inputs,
            probe_id,
        }
    }

    fn measure(
        &self,
        name: &str,
        recipe: &Recipe,
        params: &Params,
        eval_task: &Task,
    ) -> Result<NetworkRun> {
        let layers = forward_collect(params, &self.probe_inputs)?;
        let named = layers
            .into_iter()
            .map(|m| (m.label().expect("labeled by forward_collect").to_string(), m))
            .collect();
        let activations = ActivationSet::new(self.probe_id.clone(), named)?;
        let top1 = evaluate_accuracy(
            params,
            eval_task,
            self.cfg.eval_samples,
            derived_seed(self.cfg.seed, EVAL_TAG),
        )?;
        Ok(NetworkRun {
            name: name.to_string(),
            recipe_label: recipe.label(),
            n_random_layers: recipe.n_random_layers(),
            top1,
            activations,
        })
    }

    fn standard(&self, name: &str, task: &Task, tag: u64) -> Result<(NetworkRun, Params)> {
        let recipe = Recipe::Standard;
        let params = train(&self.cfg.net, task, &recipe, &self.cfg.cfg_for(tag))?;
        Ok((self.measure(name, &recipe, &params, task)?, params))
    }

    fn transfer(&self, source: Params) -> Result<NetworkRun> {
        let recipe = Recipe::TransferFreeze { source };
        let params = train(
            &self.cfg.net,
            &self.cfg.task_a,
            &recipe,
            &self.cfg.cfg_for(NET_TRANSFER),
        )?;
        self.measure("transfer_freeze", &recipe, &params, &self.cfg.task_a)
    }
}

/// A single recipe to run outside a suite. Transfer-freeze trains its own
/// source network on task B first, matching what the suites do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecipeKind {
    Standard,
    Untrained,
    Freeze,
    RandomAbove(usize),
    TransferFreeze,
}

/// Train one network under the given recipe and probe it.
pub fn run_recipe(kind: RecipeKind, cfg: &DeskConfig) -> Result<NetworkRun> {
    let ctx = SuiteContext::new(cfg);
    match kind {
        RecipeKind::Standard => Ok(ctx.standard("standard", &cfg.task_a, NET_STANDARD_A)?.0),
        RecipeKind::Untrained => {
            let recipe = Recipe::Untrained;
            let params = train(&cfg.net, &cfg.task_a, &recipe, &cfg.cfg_for(NET_UNTRAINED))?;
            ctx.measure("untrained", &recipe, &params, &cfg.task_a)
        }
        RecipeKind::Freeze => {
            let recipe = Recipe::Freeze {
                epochs_per_freeze: None,
            };
            let params = train(&cfg.net, &cfg.task_a, &recipe, &cfg.cfg_for(NET_TRANSFER))?;
            ctx.measure("freeze", &recipe, &params, &cfg.task_a)
        }
        RecipeKind::RandomAbove(n) => {
            let recipe = Recipe::RandomAbove { n };
            let params = train(
                &cfg.net,
                &cfg.task_a,
                &recipe,
                &cfg.cfg_for(NET_RANDOM_BASE + n as u64),
            )?;
            ctx.measure(&format!("random_above_{n}"), &recipe, &params, &cfg.task_a)
        }
        RecipeKind::TransferFreeze => {
            let (_, source) = ctx.standard("standard_b", &cfg.task_b, NET_STANDARD_B)?;
            ctx.transfer(source)
        }
    }
}

/// Persist one network's activations: RSAM files plus a manifest under
/// `<out_dir>/activations/<network>/`.
pub fn write_run(out_dir: impl AsRef<Path>, run: &NetworkRun) -> Result<()> {
    let net_dir = out_dir.as_ref().join("activations").join(&run.name);
    fs::create_dir_all(&net_dir)?;
    let mut entries = Vec::new();
    for (name, m) in run.activations.layers() {
        let file = format!("{name}.rsam");
        write_matrix(net_dir.join(&file), m)?;
        entries.push((name.clone(), file));
    }
    write_manifest(
        net_dir.join("manifest.json"),
        run.activations.probe_id(),
        &entries,
    )
}

/// Train and probe the networks a suite requires. Pure: no files touched.
pub fn run_suite(suite: Suite, cfg: &DeskConfig) -> Result<SuiteResult> {
    let ctx = SuiteContext::new(cfg);
    let runs = match suite {
        Suite::UntrainedVsTrained => {
            let recipe = Recipe::Untrained;
            let params = train(
                &cfg.net,
                &cfg.task_a,
                &recipe,
                &cfg.cfg_for(NET_UNTRAINED),
            )?;
            let untrained = ctx.measure("untrained", &recipe, &params, &cfg.task_a)?;
            let (standard_a, _) = ctx.standard("standard_a", &cfg.task_a, NET_STANDARD_A)?;
            let (_, source) = ctx.standard("standard_b", &cfg.task_b, NET_STANDARD_B)?;
            vec![untrained, standard_a, ctx.transfer(source)?]
        }
        Suite::TransferFreeze => {
            let (standard_a, _) = ctx.standard("standard_a", &cfg.task_a, NET_STANDARD_A)?;
            let (standard_b, source) = ctx.standard("standard_b", &cfg.task_b, NET_STANDARD_B)?;
            vec![standard_a, standard_b, ctx.transfer(source)?]
        }
        Suite::RandomFeatures => {
            let mut runs = vec![ctx.standard("standard_a", &cfg.task_a, NET_STANDARD_A)?.0];
            for n in 1..cfg.net.n_layers() {
                let recipe = Recipe::RandomAbove { n };
                let params = train(
                    &cfg.net,
                    &cfg.task_a,
                    &recipe,
                    &cfg.cfg_for(NET_RANDOM_BASE + n as u64),
                )?;
                runs.push(ctx.measure(
                    &format!("random_above_{n}"),
                    &recipe,
                    &params,
                    &cfg.task_a,
                )?);
            }
            runs
        }
    };
    Ok(SuiteResult { suite, runs })
}

/// Run a suite and persist everything: one RSAM file per layer plus a
/// manifest per network under `<out_dir>/activations/<network>/`, and an
/// accuracy CSV at `<out_dir>/accuracy.csv`.
pub fn run_experiment(suite: Suite, out_dir: impl AsRef<Path>, cfg: &DeskConfig) -> Result<SuiteResult> {
    let out_dir = out_dir.as_ref();
    let result = run_suite(suite, cfg)?;
    fs::create_dir_all(out_dir)?;
    for run in &result.runs {
        write_run(out_dir, run)?;
    }
    fs::write(out_dir.join("accuracy.csv"), result.accuracy_csv())?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast_cfg(seed: u64) -> DeskConfig {
        let mut cfg = DeskConfig::desk_default(seed);
        cfg.train.epochs = 2;
        cfg.train.n_train = 200;
        cfg.probe_samples = 40;
        cfg.eval_samples = 200;
        cfg
    }

    #[test]
    fn suite_ids_parse() {
        assert_eq!(
            "untrained_vs_trained".parse::<Suite>().unwrap(),
            Suite::UntrainedVsTrained
        );
        assert_eq!("transfer_freeze".parse::<Suite>().unwrap(), Suite::TransferFreeze);
        assert_eq!("random_features".parse::<Suite>().unwrap(), Suite::RandomFeatures);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn untrained_vs_trained_contract() {
        let cfg = fast_cfg(5);
        let res = run_suite(Suite::UntrainedVsTrained, &cfg).unwrap();
        assert_eq!(res.runs.len(), 3);
        let names: Vec<&str> = res.runs.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["untrained", "standard_a", "transfer_freeze"]);
        let probe_ids: Vec<&str> = res
            .runs
            .iter()
            .map(|r| r.activations.probe_id())
            .collect();
        assert!(probe_ids.iter().all(|&p| p == probe_ids[0]));
        assert!(res.runs.iter().all(|r| r.activations.n_obs() == 40));
        assert!(res
            .runs
            .iter()
            .all(|r| (0.0..=1.0).contains(&r.top1)));
    }

    #[test]
    fn random_features_contract() {
        let cfg = fast_cfg(6);
        let res = run_suite(Suite::RandomFeatures, &cfg).unwrap();
        // L = 6: standard plus n in 1..=5.
        assert_eq!(res.runs.len(), 6);
        assert_eq!(res.runs[0].n_random_layers, 0);
        for (i, run) in res.runs.iter().skip(1).enumerate() {
            assert_eq!(run.n_random_layers, i + 1);
            assert_eq!(run.name, format!("random_above_{}", i + 1));
        }
        let csv = res.accuracy_csv();
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.starts_with("network,recipe,n_random_layers,top1\n"));
    }

    #[test]
    fn experiment_writes_loadable_sets() {
        let cfg = fast_cfg(7);
        let dir = tempfile::tempdir().unwrap();
        let res = run_experiment(Suite::TransferFreeze, dir.path(), &cfg).unwrap();
        assert_eq!(res.runs.len(), 3);
        for run in &res.runs {
            let manifest = dir
                .path()
                .join("activations")
                .join(&run.name)
                .join("manifest.json");
            let set = crate::io::load_activation_set(&manifest).unwrap();
            assert_eq!(set.len(), 6);
            assert_eq!(set.n_obs(), 40);
            assert_eq!(set.names(), run.activations.names());
            // activations round-trip bit-exactly
            for ((_, disk), (_, mem)) in set.layers().iter().zip(run.activations.layers()) {
                assert_eq!(disk.values(), mem.values());
            }
        }
        assert!(dir.path().join("accuracy.csv").exists());
    }
}
