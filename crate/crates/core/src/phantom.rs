//! Synthetic thorax phantom: analytic shapes rasterized at voxel centres into
//! a CT volume and an overlapping label volume.
//!
//! Layout follows the projection convention: axis 0 is left-right with the
//! patient's right at low indices, axis 1 runs anterior (low) to posterior,
//! axis 2 is axial with superior at high indices. Lengths in the standard
//! layout are given for a 256-voxel grid and scale with the grid size.

use ndarray::{s, Array3, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{ClassMask, GridSpec, LabelVolume, Volume};

/// Vertebra classes of the standard spine, superior to inferior.
pub const SPINE_LEVELS: [&str; 17] = [
    "T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8", "T9", "T10", "T11", "T12", "L1", "L2", "L3", "L4", "L5",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    pub center: [f64; 3],
    pub radii: [f64; 3],
}

/// Cylinder along the axial axis with an elliptic cross-section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticCylinder {
    pub center: [f64; 2],
    pub radii: [f64; 2],
    pub z: [f64; 2],
}

/// Cylinder of constant radius around a segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tube {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cuboid {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spine {
    /// Axial position of the top of the first vertebra.
    pub top: f64,
    pub height: f64,
    pub gap: f64,
    pub radius: f64,
    /// Straight-spine centre in the (x, y) plane.
    pub center: [f64; 2],
    pub levels: Vec<String>,
    /// Lateral offset of each level from `center`.
    pub offsets: Vec<f64>,
}

impl Spine {
    /// Axial extent `[bottom, top]` of level `i`.
    pub fn z_range(&self, i: usize) -> [f64; 2] {
        let top = self.top - i as f64 * (self.height + self.gap);
        [top - self.height, top]
    }

    pub fn length(&self) -> f64 {
        let n = self.levels.len();
        if n == 0 {
            return 0.0;
        }
        self.top - self.z_range(n - 1)[0]
    }
}

/// Posterior rib arcs hugging the body wall, one pair per upper spine level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ribs {
    pub pairs: usize,
    /// Semi-axes of the elliptic arc in the axial plane.
    pub arc: [f64; 2],
    pub thickness: f64,
    /// No rib voxel lies closer than this to the midline.
    pub clearance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trachea {
    pub center: [f64; 2],
    pub radius: f64,
    pub top: f64,
    pub bifurcation: f64,
    pub branch_end: f64,
    /// Lateral distance of each bronchus end from the midline.
    pub spread: f64,
    pub branch_radius: f64,
}

impl Trachea {
    fn tubes(&self) -> [Tube; 3] {
        let [x, y] = self.center;
        let fork = [x, y, self.bifurcation];
        [
            Tube {
                a: fork,
                b: [x, y, self.top],
                radius: self.radius,
            },
            Tube {
                a: fork,
                b: [x - self.spread, y, self.branch_end],
                radius: self.branch_radius,
            },
            Tube {
                a: fork,
                b: [x + self.spread, y, self.branch_end],
                radius: self.branch_radius,
            },
        ]
    }
}

/// Ascending limb, arch over the top, descending limb, all in one coronal plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aorta {
    pub ascending_x: f64,
    pub descending_x: f64,
    pub y: f64,
    pub arch_z: f64,
    pub ascending_bottom: f64,
    pub descending_bottom: f64,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TissueHu {
    pub air: f32,
    pub soft_tissue: f32,
    pub lung: f32,
    pub heart: f32,
    pub vertebra: f32,
    pub rib: f32,
    pub clavicle: f32,
    pub table: f32,
}

impl Default for TissueHu {
    fn default() -> Self {
        TissueHu {
            air: -1000.0,
            soft_tissue: 40.0,
            lung: -800.0,
            heart: 40.0,
            vertebra: 700.0,
            rib: 500.0,
            clavicle: 600.0,
            table: 300.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub grid: GridSpec,
    pub seed: u64,
    /// Half-width of the uniform additive noise; 0 disables it.
    pub noise_hu: f32,
    pub hu: TissueHu,
    pub body: EllipticCylinder,
    pub lung_right: Ellipsoid,
    pub lung_left: Ellipsoid,
    pub heart: Ellipsoid,
    pub spine: Spine,
    pub ribs: Ribs,
    pub clavicle_right: Tube,
    pub clavicle_left: Tube,
    pub trachea: Trachea,
    pub aorta: Option<Aorta>,
    pub mediastinum: Cuboid,
    pub subdiaphragm: Cuboid,
    /// Detached scanner table under the patient.
    pub table: Option<Cuboid>,
}

impl PhantomSpec {
    /// Standard adult-like layout on an `n`³ grid.
    pub fn standard(n: usize) -> PhantomSpec {
        let k = n as f64 / 256.0;
        let c = (n as f64 - 1.0) / 2.0;
        let at = |dx: f64, dy: f64, z: f64| [c + dx * k, c + dy * k, z * k];
        let spine_levels: Vec<String> = SPINE_LEVELS.iter().map(|l| format!("vertebrae_{l}")).collect();
        let offsets = vec![0.0; spine_levels.len()];
        PhantomSpec {
            grid: GridSpec::isotropic([n; 3]),
            seed: 0,
            noise_hu: 0.0,
            hu: TissueHu::default(),
            body: EllipticCylinder {
                center: [c, c],
                radii: [127.0 * k, 95.0 * k],
                z: [0.0, n as f64 - 1.0],
            },
            lung_right: Ellipsoid {
                center: at(-70.0, 0.0, 150.0),
                radii: [55.0 * k, 60.0 * k, 80.0 * k],
            },
            lung_left: Ellipsoid {
                center: at(70.0, 0.0, 150.0),
                radii: [55.0 * k, 60.0 * k, 80.0 * k],
            },
            heart: Ellipsoid {
                center: at(0.0, -27.5, 120.0),
                radii: [50.0 * k, 40.0 * k, 45.0 * k],
            },
            spine: Spine {
                top: 240.0 * k,
                height: 12.0 * k,
                gap: 1.0 * k,
                radius: 12.0 * k,
                center: [c, c + 60.0 * k],
                levels: spine_levels,
                offsets,
            },
            ribs: Ribs {
                pairs: 12,
                arc: [117.0 * k, 85.0 * k],
                thickness: 3.0 * k,
                clearance: 20.0 * k,
            },
            clavicle_right: Tube {
                a: at(-100.0, -50.0, 220.0),
                b: at(-15.0, -50.0, 220.0),
                radius: 5.0 * k,
            },
            clavicle_left: Tube {
                a: at(15.0, -50.0, 220.0),
                b: at(100.0, -50.0, 220.0),
                radius: 5.0 * k,
            },
            trachea: Trachea {
                center: [c, c - 17.5 * k],
                radius: 8.0 * k,
                top: 240.0 * k,
                bifurcation: 175.0 * k,
                branch_end: 145.0 * k,
                spread: 30.0 * k,
                branch_radius: 6.0 * k,
            },
            aorta: Some(Aorta {
                ascending_x: c - 18.0 * k,
                descending_x: c + 18.0 * k,
                y: c + 2.5 * k,
                arch_z: 195.0 * k,
                ascending_bottom: 130.0 * k,
                descending_bottom: 40.0 * k,
                radius: 7.0 * k,
            }),
            mediastinum: Cuboid {
                lo: at(-25.0, -67.0, 60.0),
                hi: at(25.0, 52.0, 230.0),
            },
            subdiaphragm: Cuboid {
                lo: at(-100.0, -55.0, 30.0),
                hi: at(100.0, 55.0, 65.0),
            },
            table: None,
        }
    }

    /// Heart with the given half-width (in voxels) along the left-right axis.
    pub fn with_heart_half_width(mut self, half_width: f64) -> Self {
        self.heart.radii[0] = half_width;
        self
    }

    /// Detached table slab posterior to the body.
    pub fn with_table(mut self) -> Self {
        let b = self.body;
        let k = self.grid.dims[0] as f64 / 256.0;
        let y0 = b.center[1] + b.radii[1] + 8.0 * k;
        self.table = Some(Cuboid {
            lo: [b.center[0] - 100.0 * k, y0, b.z[0]],
            hi: [b.center[0] + 100.0 * k, y0 + 7.0 * k, b.z[1]],
        });
        self
    }

    pub fn with_noise(mut self, seed: u64, half_width_hu: f32) -> Self {
        self.seed = seed;
        self.noise_hu = half_width_hu;
        self
    }

    /// Left-right mirror-symmetric variant (no aorta).
    pub fn symmetric(mut self) -> Self {
        self.aorta = None;
        self
    }

    fn shapes(&self) -> Vec<(String, Shape)> {
        let mut out = vec![
            ("heart".to_string(), Shape::Ellipsoid(self.heart)),
            ("lung_right".to_string(), Shape::Ellipsoid(self.lung_right)),
            ("lung_left".to_string(), Shape::Ellipsoid(self.lung_left)),
        ];
        for (i, level) in self.spine.levels.iter().enumerate() {
            out.push((level.clone(), Shape::Cylinder(self.vertebra(i))));
        }
        for side in [Side::Right, Side::Left] {
            for i in 0..self.ribs.pairs {
                let name = format!("rib_posterior_{}_{}", side.name(), i + 1);
                out.push((name, self.rib(side, i)));
            }
        }
        out.push(("clavicle_right".into(), Shape::Tube(self.clavicle_right)));
        out.push(("clavicle_left".into(), Shape::Tube(self.clavicle_left)));
        out.push((
            "trachea".into(),
            Shape::Union(self.trachea.tubes().iter().map(|&t| Shape::Tube(t)).collect()),
        ));
        if let Some(a) = self.aorta {
            out.push(("aorta".into(), aorta_shape(&a)));
        }
        out.push(("mediastinum".into(), Shape::Cuboid(self.mediastinum)));
        out.push(("subdiaphragm".into(), Shape::Cuboid(self.subdiaphragm)));
        out
    }

    fn vertebra(&self, i: usize) -> EllipticCylinder {
        let sp = &self.spine;
        EllipticCylinder {
            center: [sp.center[0] + sp.offsets.get(i).copied().unwrap_or(0.0), sp.center[1]],
            radii: [sp.radius; 2],
            z: sp.z_range(i),
        }
    }

    fn rib(&self, side: Side, i: usize) -> Shape {
        let [lo, hi] = self.spine.z_range(i);
        Shape::Rib {
            center: self.body.center,
            arc: self.ribs.arc,
            z: (lo + hi) / 2.0,
            thickness: self.ribs.thickness,
            clearance: self.ribs.clearance,
            side,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.spine.offsets.len() != self.spine.levels.len() {
            return Err(Error::PhantomSpec {
                shape: "spine".into(),
                message: "one lateral offset per level required".into(),
            });
        }
        if self.ribs.pairs > self.spine.levels.len() {
            return Err(Error::PhantomSpec {
                shape: "ribs".into(),
                message: "more rib pairs than spine levels".into(),
            });
        }
        let mut all = self.shapes();
        all.push(("body".into(), Shape::Cylinder(self.body)));
        if let Some(t) = self.table {
            all.push(("table".into(), Shape::Cuboid(t)));
        }
        for (name, shape) in &all {
            let bbox = shape.bbox();
            for axis in 0..3 {
                // Voxel i covers [i - 0.5, i + 0.5].
                let limit = self.grid.dims[axis] as f64 - 0.5;
                let [lo, hi] = bbox[axis];
                if !(lo >= -0.5 && hi <= limit && lo <= hi) {
                    return Err(Error::PhantomSpec {
                        shape: name.clone(),
                        message: format!("extent [{lo:.2}, {hi:.2}] on axis {axis} leaves the grid [-0.5, {limit}]"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Apply a sinusoidal lateral displacement to every vertebra centre.
///
/// The phase starts at the top of the spine, so `wavelength = 2 * length`
/// bends the spine into a single arc. Amplitude 0 returns the spec unchanged.
pub fn scoliosis_variant(spec: &PhantomSpec, amplitude: f64, wavelength: f64) -> Result<PhantomSpec> {
    if !(amplitude >= 0.0) {
        return Err(Error::Argument(format!("scoliosis amplitude must be >= 0, got {amplitude}")));
    }
    if amplitude == 0.0 {
        return Ok(spec.clone());
    }
    if !(wavelength > 0.0) {
        return Err(Error::Argument(format!("scoliosis wavelength must be > 0, got {wavelength}")));
    }
    let mut out = spec.clone();
    let top = spec.spine.top;
    for (i, off) in out.spine.offsets.iter_mut().enumerate() {
        let [lo, hi] = spec.spine.z_range(i);
        let depth = top - (lo + hi) / 2.0;
        *off += amplitude * (2.0 * std::f64::consts::PI * depth / wavelength).sin();
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Right,
    Left,
}

impl Side {
    fn name(self) -> &'static str {
        match self {
            Side::Right => "right",
            Side::Left => "left",
        }
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Ellipsoid(Ellipsoid),
    Cylinder(EllipticCylinder),
    Tube(Tube),
    Cuboid(Cuboid),
    /// Upper half of a torus in the coronal plane.
    Arch {
        center: [f64; 3],
        radius: f64,
        tube: f64,
    },
    Rib {
        center: [f64; 2],
        arc: [f64; 2],
        z: f64,
        thickness: f64,
        clearance: f64,
        side: Side,
    },
    Union(Vec<Shape>),
}

fn aorta_shape(a: &Aorta) -> Shape {
    let mid = (a.ascending_x + a.descending_x) / 2.0;
    let arch_r = (a.descending_x - a.ascending_x).abs() / 2.0;
    Shape::Union(vec![
        Shape::Tube(Tube {
            a: [a.ascending_x, a.y, a.ascending_bottom],
            b: [a.ascending_x, a.y, a.arch_z],
            radius: a.radius,
        }),
        Shape::Arch {
            center: [mid, a.y, a.arch_z],
            radius: arch_r,
            tube: a.radius,
        },
        Shape::Tube(Tube {
            a: [a.descending_x, a.y, a.descending_bottom],
            b: [a.descending_x, a.y, a.arch_z],
            radius: a.radius,
        }),
    ])
}

fn sq(v: f64) -> f64 {
    v * v
}

impl Shape {
    fn contains(&self, p: [f64; 3]) -> bool {
        match self {
            Shape::Ellipsoid(e) => (0..3).map(|i| sq((p[i] - e.center[i]) / e.radii[i])).sum::<f64>() <= 1.0,
            Shape::Cylinder(c) => {
                p[2] >= c.z[0] && p[2] <= c.z[1] && sq((p[0] - c.center[0]) / c.radii[0]) + sq((p[1] - c.center[1]) / c.radii[1]) <= 1.0
            }
            Shape::Tube(t) => {
                let d = [t.b[0] - t.a[0], t.b[1] - t.a[1], t.b[2] - t.a[2]];
                let w = [p[0] - t.a[0], p[1] - t.a[1], p[2] - t.a[2]];
                let len2 = d.iter().map(|v| v * v).sum::<f64>();
                let u = if len2 == 0.0 {
                    0.0
                } else {
                    ((w[0] * d[0] + w[1] * d[1] + w[2] * d[2]) / len2).clamp(0.0, 1.0)
                };
                (0..3).map(|i| sq(w[i] - u * d[i])).sum::<f64>() <= t.radius * t.radius
            }
            Shape::Cuboid(b) => (0..3).all(|i| p[i] >= b.lo[i] && p[i] <= b.hi[i]),
            Shape::Arch { center, radius, tube } => {
                if p[2] < center[2] {
                    return false;
                }
                let ring = (sq(p[0] - center[0]) + sq(p[2] - center[2])).sqrt() - radius;
                sq(ring) + sq(p[1] - center[1]) <= tube * tube
            }
            Shape::Rib {
                center,
                arc,
                z,
                thickness,
                clearance,
                side,
            } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                let on_side = match side {
                    Side::Right => dx <= -clearance,
                    Side::Left => dx >= *clearance,
                };
                if !on_side || dy < 0.0 || (p[2] - z).abs() > *thickness {
                    return false;
                }
                let rho = (sq(dx / arc[0]) + sq(dy / arc[1])).sqrt();
                (rho - 1.0).abs() * arc[1] <= *thickness
            }
            Shape::Union(parts) => parts.iter().any(|s| s.contains(p)),
        }
    }

    /// Continuous per-axis extent `[lo, hi]`.
    fn bbox(&self) -> [[f64; 2]; 3] {
        match self {
            Shape::Ellipsoid(e) => std::array::from_fn(|i| [e.center[i] - e.radii[i], e.center[i] + e.radii[i]]),
            Shape::Cylinder(c) => [
                [c.center[0] - c.radii[0], c.center[0] + c.radii[0]],
                [c.center[1] - c.radii[1], c.center[1] + c.radii[1]],
                c.z,
            ],
            Shape::Tube(t) => std::array::from_fn(|i| [t.a[i].min(t.b[i]) - t.radius, t.a[i].max(t.b[i]) + t.radius]),
            Shape::Cuboid(b) => std::array::from_fn(|i| [b.lo[i], b.hi[i]]),
            Shape::Arch { center, radius, tube } => [
                [center[0] - radius - tube, center[0] + radius + tube],
                [center[1] - tube, center[1] + tube],
                [center[2] - tube, center[2] + radius + tube],
            ],
            Shape::Rib {
                center,
                arc,
                z,
                thickness,
                side,
                ..
            } => {
                let reach = arc[0] + thickness * arc[0] / arc[1];
                let x = match side {
                    Side::Right => [center[0] - reach, center[0]],
                    Side::Left => [center[0], center[0] + reach],
                };
                [x, [center[1], center[1] + arc[1] + thickness], [z - thickness, z + thickness]]
            }
            Shape::Union(parts) => {
                let mut out = [[f64::INFINITY, f64::NEG_INFINITY]; 3];
                for part in parts {
                    let b = part.bbox();
                    for i in 0..3 {
                        out[i][0] = out[i][0].min(b[i][0]);
                        out[i][1] = out[i][1].max(b[i][1]);
                    }
                }
                out
            }
        }
    }

    /// Voxel-centre rasterization as a crop over the clamped bounding box.
    fn rasterize(&self, dims: [usize; 3]) -> ClassMask {
        let bbox = self.bbox();
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for i in 0..3 {
            let max = dims[i] as f64 - 1.0;
            let (a, b) = (bbox[i][0].ceil().max(0.0), bbox[i][1].floor().min(max));
            if a > b {
                return ClassMask::empty();
            }
            lo[i] = a as usize;
            hi[i] = b as usize;
        }
        let shape = (hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1);
        let crop = Array3::from_shape_fn(shape, |(x, y, z)| {
            self.contains([(x + lo[0]) as f64, (y + lo[1]) as f64, (z + lo[2]) as f64])
        });
        ClassMask::from_crop(lo, crop)
    }
}

fn paint(data: &mut Array3<f32>, mask: &ClassMask, hu: f32) {
    if mask.is_empty() {
        return;
    }
    let o = mask.origin();
    let (cx, cy, cz) = mask.crop().dim();
    let mut window = data.slice_mut(s![o[0]..o[0] + cx, o[1]..o[1] + cy, o[2]..o[2] + cz]);
    Zip::from(&mut window).and(mask.crop()).for_each(|v, &m| {
        if m {
            *v = hu;
        }
    });
}

/// Rasterize a spec into a volume and its labels. Deterministic per spec.
pub fn generate_phantom(spec: &PhantomSpec) -> Result<(Volume, LabelVolume)> {
    spec.validate()?;
    let dims = spec.grid.dims;
    let hu = &spec.hu;
    let mut data = Array3::from_elem((dims[0], dims[1], dims[2]), hu.air);

    paint(&mut data, &Shape::Cylinder(spec.body).rasterize(dims), hu.soft_tissue);
    if let Some(t) = spec.table {
        paint(&mut data, &Shape::Cuboid(t).rasterize(dims), hu.table);
    }

    let mut labels = LabelVolume::new(spec.grid);
    for (name, shape) in spec.shapes() {
        labels.insert(name, shape.rasterize(dims))?;
    }
    let class = |name: &str| labels.get(name).expect("phantom class present");

    // Later layers win; the heart goes last so its voxels keep heart HU.
    paint(&mut data, class("lung_right"), hu.lung);
    paint(&mut data, class("lung_left"), hu.lung);
    paint(&mut data, class("trachea"), hu.air);
    if spec.aorta.is_some() {
        paint(&mut data, class("aorta"), hu.soft_tissue);
    }
    for level in &spec.spine.levels {
        paint(&mut data, class(level), hu.vertebra);
    }
    for (name, mask) in labels.iter() {
        if name.starts_with("rib_") {
            paint(&mut data, mask, hu.rib);
        }
    }
    paint(&mut data, class("clavicle_right"), hu.clavicle);
    paint(&mut data, class("clavicle_left"), hu.clavicle);
    paint(&mut data, class("heart"), hu.heart);

    if spec.noise_hu > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let a = spec.noise_hu;
        data.iter_mut().for_each(|v| *v += rng.random_range(-a..=a));
    }
    Ok((Volume::new(spec.grid, data)?, labels))
}
