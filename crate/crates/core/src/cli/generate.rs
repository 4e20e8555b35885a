//! Synthetic 2-D datasets: a mouse-like union of discs, a T shape, four
//! Gaussian blobs and a canvas of circles and thin ellipses.
//!
//! Geometry constants are fixed here; only the sampling depends on the seed.

use std::f64::consts::PI;

use clap::ValueEnum;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::DataMatrix;
use crate::error::{CecError, Result};
use crate::init::{rng_from_seed, CecRng};

pub const MIN_POINTS: usize = 100;

/// Head disc radius of the mouse set; ears have half this radius and touch
/// the head at +-45 degrees from the vertical.
pub const MOUSE_HEAD_RADIUS: f64 = 1.0;
pub const MOUSE_EAR_RADIUS: f64 = 0.5;

/// Blob centers and standard deviation of the four-Gaussians set.
pub const FOUR_GAUSS_CENTERS: [[f64; 2]; 4] = [[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]];
pub const FOUR_GAUSS_SD: f64 = 0.05;

/// Variance of the circles in the mixed-shapes set (disc radius `2 sqrt(350)`).
pub const MIXSHAPES_CIRCLE_VARIANCE: f64 = 350.0;
/// Principal variances of the ellipses in the mixed-shapes set.
pub const MIXSHAPES_ELLIPSE_VARIANCES: [f64; 2] = [9000.0, 8.0];
/// Components `0..MIXSHAPES_CIRCLES` of the mixed-shapes set are circles.
pub const MIXSHAPES_CIRCLES: usize = 2;
const MIXSHAPES_CIRCLE_CENTERS: [[f64; 2]; 2] = [[850.0, 850.0], [150.0, 150.0]];
/// (center, angle in degrees) of each ellipse.
const MIXSHAPES_ELLIPSES: [([f64; 2], f64); 5] = [
    ([500.0, 150.0], 0.0),
    ([150.0, 550.0], 90.0),
    ([500.0, 500.0], 45.0),
    ([850.0, 450.0], 90.0),
    ([500.0, 850.0], 0.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DatasetName {
    Mouse,
    Tset,
    Fourgauss,
    Mixshapes,
}

impl DatasetName {
    pub fn name(self) -> &'static str {
        match self {
            DatasetName::Mouse => "mouse",
            DatasetName::Tset => "tset",
            DatasetName::Fourgauss => "fourgauss",
            DatasetName::Mixshapes => "mixshapes",
        }
    }
}

impl std::str::FromStr for DatasetName {
    type Err = CecError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mouse" => Ok(DatasetName::Mouse),
            "tset" => Ok(DatasetName::Tset),
            "fourgauss" => Ok(DatasetName::Fourgauss),
            "mixshapes" => Ok(DatasetName::Mixshapes),
            other => Err(CecError::InvalidParameter(format!("unknown dataset '{other}'"))),
        }
    }
}

/// Generated points with the index of the component that produced each.
#[derive(Debug, Clone)]
pub struct LabeledData {
    pub data: DataMatrix,
    pub labels: Vec<usize>,
}

pub fn generate(name: DatasetName, seed: u64, n: usize) -> Result<DataMatrix> {
    Ok(generate_labeled(name, seed, n)?.data)
}

pub fn generate_labeled(name: DatasetName, seed: u64, n: usize) -> Result<LabeledData> {
    if n < MIN_POINTS {
        return Err(CecError::InvalidParameter(format!(
            "generated datasets need at least {MIN_POINTS} points, got {n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let (points, labels) = match name {
        DatasetName::Mouse => mouse(&mut rng, n),
        DatasetName::Tset => tset(&mut rng, n),
        DatasetName::Fourgauss => four_gauss(&mut rng, n),
        DatasetName::Mixshapes => mix_shapes(&mut rng, n),
    };
    let values = points.into_iter().flatten().collect();
    Ok(LabeledData {
        data: DataMatrix::new(n, 2, values)?,
        labels,
    })
}

/// Uniform point in a disc.
fn in_disc(rng: &mut CecRng, center: [f64; 2], radius: f64) -> [f64; 2] {
    let r = radius * rng.random::<f64>().sqrt();
    let t = 2.0 * PI * rng.random::<f64>();
    [center[0] + r * t.cos(), center[1] + r * t.sin()]
}

/// Uniform sample on a disc of the given radius, in polar form.
pub fn uniform_disc(seed: u64, n: usize, radius: f64) -> DataMatrix {
    let mut rng = rng_from_seed(seed);
    let values = (0..n).flat_map(|_| in_disc(&mut rng, [0.0, 0.0], radius)).collect();
    DataMatrix::new(n, 2, values).expect("finite samples")
}

fn mouse(rng: &mut CecRng, n: usize) -> (Vec<[f64; 2]>, Vec<usize>) {
    let d = MOUSE_HEAD_RADIUS + MOUSE_EAR_RADIUS;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let discs = [
        ([0.0, 0.0], MOUSE_HEAD_RADIUS),
        ([-d * s, d * s], MOUSE_EAR_RADIUS),
        ([d * s, d * s], MOUSE_EAR_RADIUS),
    ];
    let x_max = d * s + MOUSE_EAR_RADIUS;
    let y_max = d * s + MOUSE_EAR_RADIUS;
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    while points.len() < n {
        let p = [
            rng.random_range(-x_max..x_max),
            rng.random_range(-MOUSE_HEAD_RADIUS..y_max),
        ];
        let hit = discs.iter().position(|(c, r)| {
            let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
            dx * dx + dy * dy <= r * r
        });
        if let Some(label) = hit {
            points.push(p);
            labels.push(label);
        }
    }
    (points, labels)
}

fn tset(rng: &mut CecRng, n: usize) -> (Vec<[f64; 2]>, Vec<usize>) {
    // horizontal bar on top of a vertical stem, inside the unit square
    let bar = ([0.1, 0.9], [0.7, 0.9]);
    let stem = ([0.4, 0.6], [0.1, 0.7]);
    let inside = |p: [f64; 2], r: ([f64; 2], [f64; 2])| {
        (r.0[0]..=r.0[1]).contains(&p[0]) && (r.1[0]..=r.1[1]).contains(&p[1])
    };
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    while points.len() < n {
        let p = [rng.random_range(0.1..0.9), rng.random_range(0.1..0.9)];
        if inside(p, bar) {
            points.push(p);
            labels.push(0);
        } else if inside(p, stem) {
            points.push(p);
            labels.push(1);
        }
    }
    (points, labels)
}

fn four_gauss(rng: &mut CecRng, n: usize) -> (Vec<[f64; 2]>, Vec<usize>) {
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let label = rng.random_range(0..FOUR_GAUSS_CENTERS.len());
        let c = FOUR_GAUSS_CENTERS[label];
        let dx: f64 = StandardNormal.sample(rng);
        let dy: f64 = StandardNormal.sample(rng);
        points.push([c[0] + FOUR_GAUSS_SD * dx, c[1] + FOUR_GAUSS_SD * dy]);
        labels.push(label);
    }
    (points, labels)
}

fn mix_shapes(rng: &mut CecRng, n: usize) -> (Vec<[f64; 2]>, Vec<usize>) {
    let shapes = MIXSHAPES_CIRCLES + MIXSHAPES_ELLIPSES.len();
    // a uniform disc or ellipse with semi-axis a has variance a^2 / 4 along it
    let circle_radius = 2.0 * MIXSHAPES_CIRCLE_VARIANCE.sqrt();
    let semi_major = 2.0 * MIXSHAPES_ELLIPSE_VARIANCES[0].sqrt();
    let semi_minor = 2.0 * MIXSHAPES_ELLIPSE_VARIANCES[1].sqrt();
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for s in 0..shapes {
        let count = n * (s + 1) / shapes - n * s / shapes;
        for _ in 0..count {
            let p = if s < MIXSHAPES_CIRCLES {
                in_disc(rng, MIXSHAPES_CIRCLE_CENTERS[s], circle_radius)
            } else {
                let (center, angle) = MIXSHAPES_ELLIPSES[s - MIXSHAPES_CIRCLES];
                let u = in_disc(rng, [0.0, 0.0], 1.0);
                let (x, y) = (semi_major * u[0], semi_minor * u[1]);
                let (sin, cos) = angle.to_radians().sin_cos();
                [center[0] + cos * x - sin * y, center[1] + sin * x + cos * y]
            };
            points.push(p);
            labels.push(s);
        }
    }
    (points, labels)
}
