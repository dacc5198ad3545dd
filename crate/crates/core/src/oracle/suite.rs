//! Random problem instances for exhaustive certification runs.

use rand::Rng;

use crate::designs::{Design, EnumeratedDesign, InclusionProbabilities};
use crate::error::Result;
use crate::popmodel::PopulationBounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    /// Random listed subsets with random weights; generally dependent.
    Listed,
    /// Independent Bernoulli inclusion written out as a subset listing.
    ListedProduct,
    /// Fixed-size simple random sampling written out as a subset listing.
    ListedSrswor,
    /// Independent Bernoulli inclusion, some units certain.
    Poisson,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 4] = [
        InstanceKind::Listed,
        InstanceKind::ListedProduct,
        InstanceKind::ListedSrswor,
        InstanceKind::Poisson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::Listed => "listed",
            InstanceKind::ListedProduct => "listed-product",
            InstanceKind::ListedSrswor => "listed-srswor",
            InstanceKind::Poisson => "poisson",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub kind: InstanceKind,
    pub bounds: PopulationBounds,
    pub design: Design,
}

/// Bounds with lower ends in `[-5, 5]` and radii in `[0.1, 3]`.
pub fn random_bounds<R: Rng + ?Sized>(rng: &mut R, units: usize) -> Result<PopulationBounds> {
    let midpoints: Vec<f64> = (0..units).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let radii: Vec<f64> = (0..units).map(|_| rng.gen_range(0.1..3.0)).collect();
    PopulationBounds::from_midpoints_radii(&midpoints, &radii)
}

/// A point drawn uniformly from the rectangle.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, bounds: &PopulationBounds) -> Vec<f64> {
    bounds
        .units()
        .iter()
        .map(|u| u.lower + rng.gen::<f64>() * (u.upper - u.lower))
        .collect()
}

fn random_pi<R: Rng + ?Sized>(rng: &mut R, units: usize, allow_certain: bool) -> Result<InclusionProbabilities> {
    InclusionProbabilities::new(
        (0..units)
            .map(|_| {
                if allow_certain && rng.gen_bool(0.2) {
                    1.0
                } else {
                    rng.gen_range(0.05..0.95)
                }
            })
            .collect(),
    )
}

pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, kind: InstanceKind, units: usize) -> Result<Instance> {
    let bounds = random_bounds(rng, units)?;
    let design = match kind {
        InstanceKind::Listed => {
            let support = rng.gen_range(2..=(1usize << units).clamp(2, 24));
            Design::Enumerated(EnumeratedDesign::random(rng, units, support)?)
        }
        InstanceKind::ListedProduct => {
            let poisson = Design::poisson(random_pi(rng, units, false)?)?;
            Design::Enumerated(poisson.enumerate(usize::MAX)?.into_owned())
        }
        InstanceKind::ListedSrswor => {
            let size = rng.gen_range(1..=units);
            let srs = Design::srswor(units, size)?;
            Design::Enumerated(srs.enumerate(usize::MAX)?.into_owned())
        }
        InstanceKind::Poisson => Design::poisson(random_pi(rng, units, true)?)?,
    };
    Ok(Instance { kind, bounds, design })
}
