//! Deterministic sequence generators.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use polydisc::hardy::{gleason_distance, Point, PointSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::LabError;

/// Largest coordinate modulus drawn by the random-separated family.
pub const RANDOM_RADIUS: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `1 − r^k` on the diagonal.
    Radial,
    /// Tensor grid of the one-variable radial sequence; `count` is the side.
    Lattice,
    /// Rejection sampling under a minimum Gleason distance.
    RandomSeparated,
    /// Radial base points, each with a partner at Gleason distance `shrink^k`.
    Colliding,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Radial, Family::Lattice, Family::RandomSeparated, Family::Colliding];

    pub fn name(self) -> &'static str {
        match self {
            Family::Radial => "radial",
            Family::Lattice => "lattice",
            Family::RandomSeparated => "random-separated",
            Family::Colliding => "colliding",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown family `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub count: usize,
    pub dim: usize,
    pub seed: u64,
    /// Geometric ratio `r` of the radial profile.
    pub ratio: f64,
    /// Partner distance ratio of the colliding family.
    pub shrink: f64,
    /// Minimum Gleason distance of the random-separated family.
    pub min_distance: f64,
    /// Attempts per requested point before rejection sampling gives up.
    pub budget: usize,
}

impl GeneratorSpec {
    pub fn new(family: Family, count: usize, dim: usize) -> Self {
        Self {
            family,
            count,
            dim,
            seed: 1,
            ratio: 0.5,
            shrink: 0.5,
            min_distance: 0.5,
            budget: 1000,
        }
    }

    /// Points the spec will produce.
    pub fn point_count(&self) -> usize {
        match self.family {
            Family::Lattice => self.count.pow(self.dim as u32),
            _ => self.count,
        }
    }
}

fn radial_profile(ratio: f64, count: usize) -> Vec<f64> {
    (1..=count as i32).map(|k| 1.0 - ratio.powi(k)).collect()
}

fn diagonal(t: f64, dim: usize) -> Result<Point, LabError> {
    Ok(Point::new(vec![Complex64::new(t, 0.0); dim])?)
}

fn check_spec(spec: &GeneratorSpec) -> Result<(), LabError> {
    if spec.dim == 0 {
        return Err(LabError::Generate("dimension must be positive".into()));
    }
    if !(spec.ratio > 0.0 && spec.ratio < 1.0) {
        return Err(LabError::Generate(format!("ratio {} is outside (0, 1)", spec.ratio)));
    }
    if !(spec.shrink > 0.0 && spec.shrink < 1.0) {
        return Err(LabError::Generate(format!("shrink {} is outside (0, 1)", spec.shrink)));
    }
    if !(spec.min_distance >= 0.0 && spec.min_distance < 1.0) {
        return Err(LabError::Generate(format!("min distance {} is outside [0, 1)", spec.min_distance)));
    }
    Ok(())
}

/// Builds the sequence described by `spec`; the output depends only on `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<PointSequence, LabError> {
    check_spec(spec)?;
    if spec.count == 0 {
        return Err(LabError::Generate("count must be positive".into()));
    }
    let points = match spec.family {
        Family::Radial => radial_profile(spec.ratio, spec.count)
            .into_iter()
            .map(|t| diagonal(t, spec.dim))
            .collect::<Result<Vec<_>, _>>()?,
        Family::Lattice => {
            let profile = radial_profile(spec.ratio, spec.count);
            let mut points = Vec::with_capacity(spec.point_count());
            let mut idx = vec![0usize; spec.dim];
            loop {
                points.push(Point::new(idx.iter().map(|&i| Complex64::new(profile[i], 0.0)).collect())?);
                let mut j = spec.dim;
                loop {
                    if j == 0 {
                        return Ok(PointSequence::new(points)?);
                    }
                    j -= 1;
                    idx[j] += 1;
                    if idx[j] < spec.count {
                        break;
                    }
                    idx[j] = 0;
                }
            }
        }
        Family::RandomSeparated => random_separated(spec)?,
        Family::Colliding => {
            let bases = radial_profile(spec.ratio, spec.count.div_ceil(2));
            let mut points = Vec::with_capacity(spec.count);
            for (k, b) in bases.iter().enumerate() {
                points.push(diagonal(*b, spec.dim)?);
                if points.len() < spec.count {
                    // the disc automorphism moving 0 to b carries δ to a point at distance δ from b
                    let delta = spec.shrink.powi(k as i32 + 1);
                    points.push(diagonal((b + delta) / (1.0 + b * delta), spec.dim)?);
                }
            }
            points
        }
    };
    Ok(PointSequence::new(points)?)
}

fn random_separated(spec: &GeneratorSpec) -> Result<Vec<Point>, LabError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut points: Vec<Point> = Vec::with_capacity(spec.count);
    let budget = spec.budget.saturating_mul(spec.count);
    let mut attempts = 0;
    while points.len() < spec.count {
        if attempts == budget {
            return Err(LabError::Generate(format!(
                "placed {} of {} points at Gleason distance {} within {budget} attempts",
                points.len(),
                spec.count,
                spec.min_distance
            )));
        }
        attempts += 1;
        let coords = (0..spec.dim)
            .map(|_| {
                // uniform in the disc of radius RANDOM_RADIUS
                let r = RANDOM_RADIUS * rng.random::<f64>().sqrt();
                let theta = std::f64::consts::TAU * rng.random::<f64>();
                Complex64::from_polar(r, theta)
            })
            .collect();
        let candidate = Point::new(coords)?;
        let mut ok = true;
        for p in &points {
            if gleason_distance(p, &candidate)? < spec.min_distance {
                ok = false;
                break;
            }
        }
        if ok {
            points.push(candidate);
        }
    }
    let seq = PointSequence::new(points.clone())?;
    if seq.len() > 1 && seq.min_separation() < spec.min_distance {
        return Err(LabError::Generate("separation check failed after sampling".into()));
    }
    Ok(points)
}
