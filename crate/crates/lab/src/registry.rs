use std::sync::Arc;

use diffprod_core::convolution::{kernel_by_name, CyclicKernel};
use diffprod_core::structured::{generate_structured_set, random_subset, trial_rng, SetSpec};
use diffprod_core::{build_field, FieldTower, FqSet, Rational};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::RunError;
use crate::experiments;

/// Rows for `detail.csv`.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// What an experiment hands back to the driver.
#[derive(Debug)]
pub struct Outcome {
    /// `None` for descriptive scans with nothing to assert.
    pub passed: Option<bool>,
    pub summary: Value,
    pub detail: Table,
}

/// Run-wide state shared by every experiment.
pub struct Context {
    pub config: ExperimentConfig,
    pub field: Arc<FieldTower>,
    pub kernel: Box<dyn CyclicKernel>,
}

/// Pool a random set spec draws from.
pub enum Pool<'a> {
    Field,
    Units,
    Within(&'a FqSet),
}

impl Context {
    pub fn new(config: ExperimentConfig) -> Result<Self, RunError> {
        let field = build_field(config.field.p, config.field.r)?;
        let kernel = kernel_by_name(&config.kernel)?;
        Ok(Context { config, field, kernel })
    }

    pub fn rng(&self, trial: u64) -> ChaCha8Rng {
        trial_rng(self.config.seed, trial)
    }

    pub fn trials(&self, default: u64) -> u64 {
        self.config.trials.unwrap_or(default)
    }

    pub fn size(&self, default: usize) -> usize {
        self.config.size.unwrap_or(default)
    }

    pub fn lambda(&self) -> Rational {
        self.config.lambda.unwrap_or(Rational::new(1, 2))
    }

    /// Builds a set from `spec`, drawing random specs from `pool`.
    pub fn build(&self, spec: &SetSpec, pool: Pool<'_>, rng: &mut ChaCha8Rng) -> Result<FqSet, RunError> {
        let set = match (spec, pool) {
            (SetSpec::Random { n }, Pool::Field) => random_subset(&FqSet::full(&self.field), *n, rng)?,
            (SetSpec::Random { n }, Pool::Units) => random_subset(&FqSet::full(&self.field).without_zero(), *n, rng)?,
            (SetSpec::Random { n }, Pool::Within(p)) => random_subset(p, *n, rng)?,
            (spec, _) => generate_structured_set(&self.field, spec, rng)?,
        };
        Ok(set)
    }
}

/// A named, independently runnable check.
pub trait Experiment: Sync {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    fn run(&self, ctx: &Context) -> Result<Outcome, RunError>;
}

pub struct Registry {
    entries: Vec<Box<dyn Experiment>>,
}

impl Registry {
    pub fn new() -> Self {
        Registry { entries: Vec::new() }
    }

    pub fn register(&mut self, e: Box<dyn Experiment>) {
        assert!(self.get(e.name()).is_none(), "duplicate experiment {}", e.name());
        self.entries.push(e);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Experiment> {
        self.entries.iter().find(|e| e.name() == name).map(|e| e.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|e| e.name())
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Experiment> {
        self.entries.iter().map(|e| e.as_ref())
    }
}

impl Default for Registry {
    /// Every built-in experiment.
    fn default() -> Self {
        let mut r = Registry::new();
        experiments::register_all(&mut r);
        r
    }
}
