//! Seeded synthetic populations.
//!
//! Uptake probabilities are Beta distributed per group. Click probabilities
//! follow a power law on [0, 1] with density `k p^(k - 1)`, sampled as
//! `p = u^(1/k)` for `u ~ Uniform(0, 1)`; its mean is `k / (1 + k)`.

use std::io::{Read, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Group, Population, UserRecord};

/// Identifies the random stream so outputs can be tied to a release.
pub const RNG_STREAM_ID: &str = "chacha8 (rand_chacha 0.9); Beta via rand_distr 0.5; p = u^(1/k)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UptakeConfig {
    /// `(shape1, shape2)` of the group-A uptake Beta.
    pub beta_a: (f64, f64),
    pub beta_b: (f64, f64),
}

impl UptakeConfig {
    pub fn validate(&self) -> Result<()> {
        for (a, b) in [self.beta_a, self.beta_b] {
            check_shapes(a, b)?;
        }
        Ok(())
    }

    pub fn shapes(&self, group: Group) -> (f64, f64) {
        match group {
            Group::A => self.beta_a,
            Group::B => self.beta_b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClickConfig {
    pub k_a: f64,
    pub k_b: f64,
}

impl Default for ClickConfig {
    fn default() -> Self {
        Self { k_a: 0.05, k_b: 0.05 }
    }
}

impl ClickConfig {
    pub fn validate(&self) -> Result<()> {
        for k in [self.k_a, self.k_b] {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "power-law coefficient must be > 0, got {k}"
                )));
            }
        }
        Ok(())
    }

    pub fn coefficient(&self, group: Group) -> f64 {
        match group {
            Group::A => self.k_a,
            Group::B => self.k_b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    pub n_a: usize,
    pub n_b: usize,
    pub uptake: UptakeConfig,
    pub click: ClickConfig,
    pub seed: u64,
}

pub const DEFAULT_GROUP_SIZE: usize = 1000;

impl PopulationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_a == 0 || self.n_b == 0 {
            return Err(Error::InvalidInput(format!(
                "group sizes must be >= 1, got n_a={} n_b={}",
                self.n_a, self.n_b
            )));
        }
        self.uptake.validate()?;
        self.click.validate()
    }
}

fn check_shapes(a: f64, b: f64) -> Result<()> {
    if a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDistribution(format!(
            "Beta shapes must be > 0, got ({a}, {b})"
        )))
    }
}

fn beta_dist(a: f64, b: f64) -> Result<Beta<f64>> {
    check_shapes(a, b)?;
    Beta::new(a, b).map_err(|e| Error::InvalidDistribution(e.to_string()))
}

/// One Beta(shape1, shape2) variate.
pub fn beta_sample<R: RngCore + ?Sized>(shape1: f64, shape2: f64, rng: &mut R) -> Result<f64> {
    Ok(beta_dist(shape1, shape2)?.sample(rng))
}

/// One power-law click probability with coefficient `k`.
pub fn power_law_sample<R: RngCore + ?Sized>(k: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    u.powf(1.0 / k).clamp(0.0, 1.0)
}

/// Deterministic population: all group-A users, then group-B. Per user the
/// uptake is drawn before the click probability.
pub fn sample_population(spec: &PopulationSpec) -> Result<Population> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut users = Vec::with_capacity(spec.n_a + spec.n_b);
    for (group, n) in [(Group::A, spec.n_a), (Group::B, spec.n_b)] {
        let (s1, s2) = spec.uptake.shapes(group);
        let uptake = beta_dist(s1, s2)?;
        let k = spec.click.coefficient(group);
        for _ in 0..n {
            let rho = uptake.sample(&mut rng).clamp(0.0, 1.0);
            let p = power_law_sample(k, &mut rng);
            users.push(UserRecord::new(group, p, rho)?);
        }
    }
    Population::new(users)
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replication `i` under base seed `base`: `base XOR mix64(i)`.
pub fn replication_seed(base: u64, replication: u64) -> u64 {
    base ^ mix64(replication)
}

/// Read a population from CSV with header `group,p,rho`.
pub fn read_population_csv<R: Read>(reader: R) -> Result<Population> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let expected = ["group", "p", "rho"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header 'group,p,rho', got '{}'", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut users = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let parse_prob = |i: usize, name: &str| -> Result<f64> {
            field(i).parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("{name} '{}' is not a number", field(i)),
            })
        };
        let group: Group = field(0).parse().map_err(|_| Error::Parse {
            line,
            message: format!("group '{}' must be A or B", field(0)),
        })?;
        let p = parse_prob(1, "p")?;
        let rho = parse_prob(2, "rho")?;
        let user = UserRecord::new(group, p, rho).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        users.push(user);
    }
    if users.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "population file has no users".into(),
        });
    }
    Population::new(users)
}

pub fn write_population_csv<W: Write>(writer: W, pop: &Population) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["group", "p", "rho"])?;
    for u in pop.users() {
        wtr.write_record([u.group.to_string(), u.p.to_string(), u.rho.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
