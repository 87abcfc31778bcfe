//! Built-in problems, addressed by name.
//!
//! Two small fixtures (`TOY-CIRCLE`, `TOY-EQ`) plus a set of Hock–Schittkowski
//! problems written from their standard published definitions. Where the
//! published start point lies outside the bounds it is projected onto them,
//! since every solver here needs `x0` inside the linear/bound region.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::problem::Problem;

pub struct ProblemEntry {
    pub name: &'static str,
    /// Best known objective value, when published.
    pub known_optimum: Option<f64>,
    build: fn() -> Result<Problem>,
}

impl ProblemEntry {
    pub fn build(&self) -> Result<Problem> {
        (self.build)()
    }
}

pub struct ProblemRegistry {
    entries: BTreeMap<&'static str, ProblemEntry>,
}

impl Default for ProblemRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl ProblemRegistry {
    pub fn empty() -> Self {
        ProblemRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("TOY-CIRCLE", Some(-std::f64::consts::SQRT_2), toy_circle);
        r.register("TOY-EQ", Some(0.5), toy_eq);
        r.register("HS12", Some(-30.0), hs12);
        r.register("HS13", Some(1.0), hs13);
        r.register("HS16", Some(0.25), hs16);
        r.register("HS19", Some(-6961.81387558015), hs19);
        r.register("HS20", Some(81.5 - 25.0 * 3f64.sqrt()), hs20);
        r.register("HS21", Some(-99.96), hs21);
        r.register("HS23", Some(2.0), hs23);
        r.register("HS30", Some(1.0), hs30);
        r.register("HS43", Some(-44.0), hs43);
        r.register("HS65", Some(0.9535288567), hs65);
        r.register("HS74", Some(5126.4981), hs74);
        r.register("HS75", Some(5174.4129), hs75);
        r
    }

    pub fn register(
        &mut self,
        name: &'static str,
        known_optimum: Option<f64>,
        build: fn() -> Result<Problem>,
    ) {
        self.entries.insert(
            name,
            ProblemEntry {
                name,
                known_optimum,
                build,
            },
        );
    }

    pub fn get(&self, name: &str) -> Result<Problem> {
        self.entry(name)?.build()
    }

    pub fn entry(&self, name: &str) -> Result<&ProblemEntry> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::UnknownProblem(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = &ProblemEntry> {
        self.entries.values()
    }
}

/// Looks a problem up in the built-in registry.
pub fn lookup(name: &str) -> Result<Problem> {
    ProblemRegistry::builtin().get(name)
}

pub const TOY_SUITE: &[&str] = &["TOY-CIRCLE", "TOY-EQ"];
pub const HS2D_SUITE: &[&str] = &["HS12", "HS13", "HS16", "HS19", "HS20", "HS21", "HS23"];

/// Problem names of a named suite: `toy`, `hs2d` or `all`.
pub fn suite(name: &str) -> Result<Vec<String>> {
    let names: Vec<String> = match name {
        "toy" => TOY_SUITE.iter().map(|s| s.to_string()).collect(),
        "hs2d" => HS2D_SUITE.iter().map(|s| s.to_string()).collect(),
        "all" => {
            let mut v: Vec<String> = TOY_SUITE.iter().map(|s| s.to_string()).collect();
            v.extend(
                ProblemRegistry::builtin()
                    .names()
                    .filter(|n| !TOY_SUITE.contains(n))
                    .map(str::to_string),
            );
            v
        }
        other => return Err(Error::UnknownSuite(other.to_string())),
    };
    Ok(names)
}

fn toy_circle() -> Result<Problem> {
    Problem::builder("TOY-CIRCLE", 2)
        .objective(|x| x[0] + x[1])
        .ineq(|x| x[0] * x[0] + x[1] * x[1] - 1.0)
        .uniform_bounds(-2.0, 2.0)
        .x0(vec![0.0, 0.0])
        .build()
}

fn toy_eq() -> Result<Problem> {
    Problem::builder("TOY-EQ", 2)
        .objective(|x| x[0] * x[0] + x[1] * x[1])
        .ineq(|x| -x[0])
        .eq(|x| x[0] + x[1] - 1.0)
        .uniform_bounds(-2.0, 2.0)
        .x0(vec![1.0, 1.0])
        .build()
}

fn hs12() -> Result<Problem> {
    Problem::builder("HS12", 2)
        .objective(|x| 0.5 * x[0] * x[0] + x[1] * x[1] - x[0] * x[1] - 7.0 * x[0] - 7.0 * x[1])
        .ineq(|x| 4.0 * x[0] * x[0] + x[1] * x[1] - 25.0)
        .x0(vec![0.0, 0.0])
        .build()
}

fn hs13() -> Result<Problem> {
    Problem::builder("HS13", 2)
        .objective(|x| (x[0] - 2.0).powi(2) + x[1] * x[1])
        .ineq(|x| x[1] - (1.0 - x[0]).powi(3))
        .bounds(vec![0.0, 0.0], vec![f64::INFINITY, f64::INFINITY])
        .x0(vec![0.0, 0.0])
        .build()
}

fn rosenbrock(x: &[f64]) -> f64 {
    100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
}

fn hs16() -> Result<Problem> {
    Problem::builder("HS16", 2)
        .objective(rosenbrock)
        .ineq(|x| -(x[0] + x[1] * x[1]))
        .ineq(|x| -(x[0] * x[0] + x[1]))
        .bounds(vec![-0.5, f64::NEG_INFINITY], vec![0.5, 1.0])
        .x0(vec![-0.5, 1.0])
        .build()
}

fn hs19() -> Result<Problem> {
    Problem::builder("HS19", 2)
        .objective(|x| (x[0] - 10.0).powi(3) + (x[1] - 20.0).powi(3))
        .ineq(|x| 100.0 - (x[0] - 5.0).powi(2) - (x[1] - 5.0).powi(2))
        .ineq(|x| (x[1] - 5.0).powi(2) + (x[0] - 6.0).powi(2) - 82.81)
        .bounds(vec![13.0, 0.0], vec![100.0, 100.0])
        .x0(vec![20.1, 5.84])
        .build()
}

fn hs20() -> Result<Problem> {
    Problem::builder("HS20", 2)
        .objective(rosenbrock)
        .ineq(|x| -(x[0] + x[1] * x[1]))
        .ineq(|x| -(x[0] * x[0] + x[1]))
        .ineq(|x| 1.0 - x[0] * x[0] - x[1] * x[1])
        .bound(0, -0.5, 0.5)
        .x0(vec![-0.5, 1.0])
        .build()
}

fn hs21() -> Result<Problem> {
    Problem::builder("HS21", 2)
        .objective(|x| 0.01 * x[0] * x[0] + x[1] * x[1] - 100.0)
        .linear(vec![-10.0, 1.0], -10.0)
        .bounds(vec![2.0, -50.0], vec![50.0, 50.0])
        .x0(vec![2.0, -1.0])
        .build()
}

fn hs23() -> Result<Problem> {
    Problem::builder("HS23", 2)
        .objective(|x| x[0] * x[0] + x[1] * x[1])
        .linear(vec![-1.0, -1.0], -1.0)
        .ineq(|x| 1.0 - x[0] * x[0] - x[1] * x[1])
        .ineq(|x| 9.0 - 9.0 * x[0] * x[0] - x[1] * x[1])
        .ineq(|x| x[1] - x[0] * x[0])
        .ineq(|x| x[0] - x[1] * x[1])
        .uniform_bounds(-50.0, 50.0)
        .x0(vec![3.0, 1.0])
        .build()
}

fn hs30() -> Result<Problem> {
    Problem::builder("HS30", 3)
        .objective(|x| x.iter().map(|v| v * v).sum())
        .ineq(|x| 1.0 - x[0] * x[0] - x[1] * x[1])
        .bounds(vec![1.0, -10.0, -10.0], vec![10.0, 10.0, 10.0])
        .x0(vec![1.0, 1.0, 1.0])
        .build()
}

fn hs43() -> Result<Problem> {
    Problem::builder("HS43", 4)
        .objective(|x| {
            x[0] * x[0] + x[1] * x[1] + 2.0 * x[2] * x[2] + x[3] * x[3] - 5.0 * x[0] - 5.0 * x[1]
                - 21.0 * x[2]
                + 7.0 * x[3]
        })
        .ineq(|x| {
            x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3] + x[0] - x[1] + x[2] - x[3] - 8.0
        })
        .ineq(|x| {
            x[0] * x[0] + 2.0 * x[1] * x[1] + x[2] * x[2] + 2.0 * x[3] * x[3] - x[0] - x[3] - 10.0
        })
        .ineq(|x| 2.0 * x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + 2.0 * x[0] - x[1] - x[3] - 5.0)
        .x0(vec![0.0; 4])
        .build()
}

fn hs65() -> Result<Problem> {
    Problem::builder("HS65", 3)
        .objective(|x| {
            (x[0] - x[1]).powi(2) + (x[0] + x[1] - 10.0).powi(2) / 9.0 + (x[2] - 5.0).powi(2)
        })
        .ineq(|x| x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 48.0)
        .bounds(vec![-4.5, -4.5, -5.0], vec![4.5, 4.5, 5.0])
        .x0(vec![-4.5, 4.5, 0.0])
        .build()
}

fn hs74_family(name: &str, a: f64) -> Result<Problem> {
    Problem::builder(name, 4)
        .objective(|x| {
            3.0 * x[0] + 1e-6 * x[0].powi(3) + 2.0 * x[1] + (2e-6 / 3.0) * x[1].powi(3)
        })
        .linear(vec![0.0, 0.0, 1.0, -1.0], a)
        .linear(vec![0.0, 0.0, -1.0, 1.0], a)
        .eq(|x| 1000.0 * (-x[2] - 0.25).sin() + 1000.0 * (-x[3] - 0.25).sin() + 894.8 - x[0])
        .eq(|x| 1000.0 * (x[2] - 0.25).sin() + 1000.0 * (x[2] - x[3] - 0.25).sin() + 894.8 - x[1])
        .eq(|x| 1000.0 * (x[3] - 0.25).sin() + 1000.0 * (x[3] - x[2] - 0.25).sin() + 1294.8)
        .bounds(vec![0.0, 0.0, -a, -a], vec![1200.0, 1200.0, a, a])
        .x0(vec![0.0; 4])
        .build()
}

fn hs74() -> Result<Problem> {
    hs74_family("HS74", 0.55)
}

fn hs75() -> Result<Problem> {
    hs74_family("HS75", 0.48)
}
