//! Layered orthogonal grid scans for photogrammetry capture.
//!
//! A scan flies three height layers. Each layer sweeps the area twice, once
//! with legs along the grid x axis and once along the grid y axis, in a
//! serpentine pattern. Leg spacing and capture spacing are derived from the
//! requested cross-track and in-track overlaps at the layer height and are
//! then tightened so that the legs land exactly on the area boundary.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::geometry::{
    bearing_deg, ground_footprint, CameraIntrinsics, EnuPoint, GroundFootprint, Pose, GIMBAL_MAX_DEG, GIMBAL_MIN_DEG,
};

pub const MAX_OVERLAP: f64 = 0.95;
pub const LANDSCAPE_THRESHOLD: f64 = 0.70;
pub const DETAIL_THRESHOLD: f64 = 0.80;

/// Slack applied when comparing achieved overlap against a threshold so that
/// spacing quantised exactly onto the requested value does not warn.
pub const OVERLAP_TOLERANCE: f64 = 1e-9;

/// Containment slack for capture points after the grid rotation.
const AREA_TOLERANCE: f64 = 1e-9;

/// Rectangular survey area. The grid frame is rotated counter-clockwise from
/// east by `rotation` degrees about the origin corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanArea {
    pub origin_corner: EnuPoint,
    pub length_x: f64,
    pub length_y: f64,
    #[serde(default)]
    pub rotation: f64,
}

impl ScanArea {
    pub fn square(side: f64) -> Self {
        ScanArea {
            origin_corner: EnuPoint::ORIGIN,
            length_x: side,
            length_y: side,
            rotation: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.origin_corner.validate("area.origin_corner")?;
        ensure_positive("area.length_x", self.length_x)?;
        ensure_positive("area.length_y", self.length_y)?;
        ensure_finite("area.rotation", self.rotation)
    }

    fn axes(&self) -> (EnuPoint, EnuPoint) {
        let (s, c) = self.rotation.to_radians().sin_cos();
        (EnuPoint::new(c, s, 0.0), EnuPoint::new(-s, c, 0.0))
    }

    /// Maps grid-frame coordinates to ENU on the ground plane.
    pub fn to_enu(&self, x: f64, y: f64) -> EnuPoint {
        let (ex, ey) = self.axes();
        EnuPoint::new(
            self.origin_corner.east + x * ex.east + y * ey.east,
            self.origin_corner.north + x * ex.north + y * ey.north,
            0.0,
        )
    }

    /// Grid-frame coordinates of an ENU point (height ignored).
    pub fn to_local(&self, p: &EnuPoint) -> (f64, f64) {
        let (ex, ey) = self.axes();
        let d = EnuPoint::new(
            p.east - self.origin_corner.east,
            p.north - self.origin_corner.north,
            0.0,
        );
        (d.dot(&ex), d.dot(&ey))
    }

    /// Horizontal containment with an inclusive boundary.
    pub fn contains(&self, p: &EnuPoint) -> bool {
        let (x, y) = self.to_local(p);
        (-AREA_TOLERANCE..=self.length_x + AREA_TOLERANCE).contains(&x)
            && (-AREA_TOLERANCE..=self.length_y + AREA_TOLERANCE).contains(&y)
    }

    /// Extent along the legs for a pass in `direction`.
    pub fn leg_length(&self, direction: GridDirection) -> f64 {
        match direction {
            GridDirection::X => self.length_x,
            GridDirection::Y => self.length_y,
        }
    }

    /// Extent across the legs for a pass in `direction`.
    pub fn sweep_width(&self, direction: GridDirection) -> f64 {
        match direction {
            GridDirection::X => self.length_y,
            GridDirection::Y => self.length_x,
        }
    }

    fn local_point(&self, direction: GridDirection, along: f64, across: f64) -> EnuPoint {
        match direction {
            GridDirection::X => self.to_enu(along, across),
            GridDirection::Y => self.to_enu(across, along),
        }
    }
}

/// Axis of the grid frame the legs of a pass run along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridDirection {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub base_height: f64,
    pub avg_building_height: f64,
    pub max_building_height: f64,
    pub in_track_overlap: f64,
    pub cross_track_overlap: f64,
    /// Gimbal pitch for the highest, middle and lowest layer, in that order.
    pub gimbal_pitch_per_layer: [f64; 3],
    pub camera: CameraIntrinsics,
    pub cruise_speed: f64,
    /// Fly the orthogonal y-direction pass as well as the x-direction pass.
    #[serde(default = "default_true")]
    pub both_directions: bool,
}

fn default_true() -> bool {
    true
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            base_height: 20.0,
            avg_building_height: 0.0,
            max_building_height: 0.0,
            in_track_overlap: 0.80,
            cross_track_overlap: 0.70,
            gimbal_pitch_per_layer: [85.0, 60.0, 35.0],
            camera: CameraIntrinsics::reference(),
            cruise_speed: 5.0,
            both_directions: true,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("config.base_height", self.base_height)?;
        ensure_finite("config.avg_building_height", self.avg_building_height)?;
        ensure_finite("config.max_building_height", self.max_building_height)?;
        if self.avg_building_height < 0.0 {
            return Err(Error::invalid("config.avg_building_height", "must be >= 0"));
        }
        if self.avg_building_height > self.max_building_height {
            return Err(Error::invalid(
                "config.max_building_height",
                "must be >= avg_building_height",
            ));
        }
        for (field, value) in [
            ("config.in_track_overlap", self.in_track_overlap),
            ("config.cross_track_overlap", self.cross_track_overlap),
        ] {
            if !(0.0..=MAX_OVERLAP).contains(&value) {
                return Err(Error::invalid(field, format!("{value} outside [0, {MAX_OVERLAP}]")));
            }
        }
        for (i, pitch) in self.gimbal_pitch_per_layer.iter().enumerate() {
            if !(GIMBAL_MIN_DEG..=GIMBAL_MAX_DEG).contains(pitch) {
                return Err(Error::invalid(
                    format!("config.gimbal_pitch_per_layer[{i}]"),
                    format!("{pitch} outside [{GIMBAL_MIN_DEG}, {GIMBAL_MAX_DEG}]"),
                ));
            }
        }
        ensure_positive("config.cruise_speed", self.cruise_speed)
    }
}

/// Straight leg of a grid pass on the ground plane, in travel order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridLeg {
    pub start: EnuPoint,
    pub end: EnuPoint,
    /// Offset of the leg across the sweep, metres from the first leg.
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanLeg {
    /// Travel direction, degrees clockwise from north.
    pub heading: f64,
    pub captures: Vec<Pose>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPass {
    pub direction: GridDirection,
    /// Actual distance between neighbouring legs after quantisation.
    pub leg_spacing: f64,
    /// Actual distance between consecutive captures after quantisation.
    pub capture_spacing: f64,
    pub legs: Vec<ScanLeg>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanLayer {
    pub height: f64,
    pub gimbal_pitch: f64,
    /// Requested leg spacing from the cross-track overlap.
    pub cross_track_spacing: f64,
    /// Requested capture spacing from the in-track overlap.
    pub in_track_spacing: f64,
    pub passes: Vec<GridPass>,
}

impl ScanLayer {
    pub fn image_count(&self) -> usize {
        self.passes.iter().flat_map(|p| &p.legs).map(|l| l.captures.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPlan {
    pub area: ScanArea,
    pub config: ScanConfig,
    /// Ordered by increasing height.
    pub layers: Vec<ScanLayer>,
    pub total_image_count: usize,
}

impl ScanPlan {
    pub fn captures(&self) -> impl Iterator<Item = &Pose> {
        self.layers
            .iter()
            .flat_map(|l| &l.passes)
            .flat_map(|p| &p.legs)
            .flat_map(|l| &l.captures)
    }
}

/// Heights of the three layers: base, base + average building height,
/// base + maximum building height.
pub fn layer_heights(config: &ScanConfig) -> [f64; 3] {
    [
        config.base_height,
        config.base_height + config.avg_building_height,
        config.base_height + config.max_building_height,
    ]
}

/// Distance between exposures that yields `overlap` for a footprint extent.
pub fn spacing_from_overlap(footprint_extent: f64, overlap: f64) -> Result<f64> {
    ensure_positive("footprint_extent", footprint_extent)?;
    if !overlap.is_finite() || !(0.0..1.0).contains(&overlap) {
        return Err(Error::invalid("overlap", format!("{overlap} outside [0, 1)")));
    }
    Ok(footprint_extent * (1.0 - overlap))
}

/// Number of intervals needed to cover `length` with steps no longer than
/// `max_step`.
fn interval_count(length: f64, max_step: f64) -> usize {
    ((length / max_step).ceil() as usize).max(1)
}

/// Evenly spaced stations over `[0, length]`, endpoints exact.
fn stations(length: f64, intervals: usize) -> impl Iterator<Item = f64> {
    (0..=intervals).map(move |i| {
        if i == intervals {
            length
        } else {
            i as f64 * length / intervals as f64
        }
    })
}

/// Serpentine set of parallel legs covering the area, the first and last on
/// the boundary and the rest spaced uniformly no further apart than
/// `cross_spacing`.
pub fn generate_grid(area: &ScanArea, cross_spacing: f64, direction: GridDirection) -> Result<Vec<GridLeg>> {
    area.validate()?;
    ensure_positive("cross_spacing", cross_spacing)?;
    let width = area.sweep_width(direction);
    let length = area.leg_length(direction);
    let intervals = interval_count(width, cross_spacing);
    Ok(stations(width, intervals)
        .enumerate()
        .map(|(i, offset)| {
            let a = area.local_point(direction, 0.0, offset);
            let b = area.local_point(direction, length, offset);
            let (start, end) = if i % 2 == 0 { (a, b) } else { (b, a) };
            GridLeg { start, end, offset }
        })
        .collect())
}

fn build_pass(
    area: &ScanArea,
    direction: GridDirection,
    height: f64,
    gimbal_pitch: f64,
    cross_spacing: f64,
    in_spacing: f64,
) -> Result<GridPass> {
    let grid = generate_grid(area, cross_spacing, direction)?;
    let length = area.leg_length(direction);
    let width = area.sweep_width(direction);
    let along_intervals = interval_count(length, in_spacing);
    let leg_spacing = width / interval_count(width, cross_spacing) as f64;
    let capture_spacing = length / along_intervals as f64;

    let legs = grid
        .iter()
        .enumerate()
        .map(|(i, leg)| {
            let heading = bearing_deg(leg.end.east - leg.start.east, leg.end.north - leg.start.north);
            let mut along: Vec<f64> = stations(length, along_intervals).collect();
            if i % 2 == 1 {
                along.reverse();
            }
            let captures = along
                .into_iter()
                .map(|a| {
                    let mut p = area.local_point(direction, a, leg.offset);
                    p.up = height;
                    Pose::new(p, heading, gimbal_pitch)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ScanLeg { heading, captures })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(GridPass {
        direction,
        leg_spacing,
        capture_spacing,
        legs,
    })
}

/// Full layered scan mission for an area.
pub fn plan_scan(area: &ScanArea, config: &ScanConfig) -> Result<ScanPlan> {
    area.validate()?;
    config.validate()?;
    let heights = layer_heights(config);
    let mut layers = Vec::with_capacity(3);
    for (i, &height) in heights.iter().enumerate() {
        // pitches are listed highest layer first
        let gimbal_pitch = config.gimbal_pitch_per_layer[2 - i];
        let fp = ground_footprint(&config.camera, height)?;
        let cross_track_spacing = spacing_from_overlap(fp.cross_track_extent, config.cross_track_overlap)?;
        let in_track_spacing = spacing_from_overlap(fp.in_track_extent, config.in_track_overlap)?;
        let mut directions = vec![GridDirection::X];
        if config.both_directions {
            directions.push(GridDirection::Y);
        }
        let passes = directions
            .into_iter()
            .map(|d| build_pass(area, d, height, gimbal_pitch, cross_track_spacing, in_track_spacing))
            .collect::<Result<Vec<_>>>()?;
        layers.push(ScanLayer {
            height,
            gimbal_pitch,
            cross_track_spacing,
            in_track_spacing,
            passes,
        });
    }
    let mut plan = ScanPlan {
        area: *area,
        config: config.clone(),
        layers,
        total_image_count: 0,
    };
    plan.total_image_count = estimate_image_count(&plan);
    Ok(plan)
}

/// Exact number of capture points in the plan.
pub fn estimate_image_count(plan: &ScanPlan) -> usize {
    plan.layers.iter().map(ScanLayer::image_count).sum()
}

/// Closed-form capture count of one pass over an axis-aligned rectangle.
pub fn closed_form_pass_count(leg_length: f64, sweep_width: f64, in_spacing: f64, cross_spacing: f64) -> usize {
    (interval_count(leg_length, in_spacing) + 1) * (interval_count(sweep_width, cross_spacing) + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlapMode {
    Landscape,
    #[default]
    Detail,
}

impl OverlapMode {
    pub fn threshold(self) -> f64 {
        match self {
            OverlapMode::Landscape => LANDSCAPE_THRESHOLD,
            OverlapMode::Detail => DETAIL_THRESHOLD,
        }
    }
}

impl std::str::FromStr for OverlapMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "landscape" => Ok(OverlapMode::Landscape),
            "detail" | "details" => Ok(OverlapMode::Detail),
            other => Err(Error::invalid("mode", format!("unknown overlap mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerOverlap {
    pub height: f64,
    pub min_in_track: f64,
    pub min_cross_track: Option<f64>,
    pub in_track_pairs: usize,
    pub cross_track_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub mode: OverlapMode,
    pub threshold: f64,
    pub requested_in_track: f64,
    pub requested_cross_track: f64,
    pub layers: Vec<LayerOverlap>,
    pub min_in_track: f64,
    pub min_cross_track: Option<f64>,
    pub warnings: Vec<String>,
}

/// Intersection of two equally oriented footprint rectangles divided by the
/// area of the first. Centres are separated by `along` / `across` metres in
/// the footprint frame.
fn rectangle_overlap(a: &GroundFootprint, b: &GroundFootprint, along: f64, across: f64) -> f64 {
    let axis = |ea: f64, eb: f64, offset: f64| {
        let lo = (-ea / 2.0).max(offset - eb / 2.0);
        let hi = (ea / 2.0).min(offset + eb / 2.0);
        (hi - lo).max(0.0)
    };
    let in_track = axis(a.in_track_extent, b.in_track_extent, along);
    let cross = axis(a.cross_track_extent, b.cross_track_extent, across);
    (in_track * cross) / (a.in_track_extent * a.cross_track_extent)
}

/// Nadir-equivalent footprint of a capture over flat ground at height zero.
fn capture_footprint(camera: &CameraIntrinsics, pose: &Pose) -> Result<GroundFootprint> {
    ground_footprint(camera, pose.position.up)
        .map_err(|_| Error::invalid("plan", "capture point at or below ground level"))
}

fn leg_frame(leg: &ScanLeg) -> (EnuPoint, EnuPoint) {
    let (s, c) = leg.heading.to_radians().sin_cos();
    (EnuPoint::new(s, c, 0.0), EnuPoint::new(c, -s, 0.0))
}

fn pair_overlap(camera: &CameraIntrinsics, frame: &(EnuPoint, EnuPoint), a: &Pose, b: &Pose) -> Result<f64> {
    let fa = capture_footprint(camera, a)?;
    let fb = capture_footprint(camera, b)?;
    let mut d = b.position - a.position;
    d.up = 0.0;
    Ok(rectangle_overlap(&fa, &fb, d.dot(&frame.0), d.dot(&frame.1)))
}

/// Achieved ground overlap between consecutive captures on each leg and
/// between each capture and its nearest neighbour on the adjacent leg,
/// assuming flat terrain at height zero.
pub fn verify_overlap(plan: &ScanPlan, camera: &CameraIntrinsics, mode: OverlapMode) -> Result<OverlapReport> {
    let mut layers = Vec::with_capacity(plan.layers.len());
    for layer in &plan.layers {
        let mut min_in = f64::INFINITY;
        let mut min_cross: Option<f64> = None;
        let mut in_pairs = 0;
        let mut cross_pairs = 0;
        for pass in &layer.passes {
            for (li, leg) in pass.legs.iter().enumerate() {
                if leg.captures.len() < 2 {
                    return Err(Error::InsufficientData(format!(
                        "layer at {} m, leg {li} has {} capture point(s); at least 2 are needed",
                        layer.height,
                        leg.captures.len()
                    )));
                }
                let frame = leg_frame(leg);
                for w in leg.captures.windows(2) {
                    min_in = min_in.min(pair_overlap(camera, &frame, &w[0], &w[1])?);
                    in_pairs += 1;
                }
            }
            for pair in pass.legs.windows(2) {
                let frame = leg_frame(&pair[0]);
                // neighbour captures indexed by their along-track coordinate
                let mut along: Vec<(f64, usize)> = pair[1]
                    .captures
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (p.position.dot(&frame.0), i))
                    .collect();
                along.sort_by(|a, b| a.0.total_cmp(&b.0));
                for capture in &pair[0].captures {
                    let key = capture.position.dot(&frame.0);
                    let idx = along.partition_point(|(v, _)| *v < key);
                    let nearest = [idx.checked_sub(1), Some(idx)]
                        .into_iter()
                        .flatten()
                        .filter_map(|i| along.get(i))
                        .min_by(|a, b| (a.0 - key).abs().total_cmp(&(b.0 - key).abs()))
                        .map(|(_, i)| &pair[1].captures[*i]);
                    if let Some(other) = nearest {
                        let ratio = pair_overlap(camera, &frame, capture, other)?;
                        min_cross = Some(min_cross.map_or(ratio, |m: f64| m.min(ratio)));
                        cross_pairs += 1;
                    }
                }
            }
        }
        if in_pairs == 0 {
            return Err(Error::InsufficientData(format!(
                "layer at {} m has no capture legs",
                layer.height
            )));
        }
        layers.push(LayerOverlap {
            height: layer.height,
            min_in_track: min_in,
            min_cross_track: min_cross,
            in_track_pairs: in_pairs,
            cross_track_pairs: cross_pairs,
        });
    }
    if layers.is_empty() {
        return Err(Error::InsufficientData("plan has no layers".into()));
    }

    let threshold = mode.threshold();
    let warnings = layers
        .iter()
        .filter(|l| l.min_in_track < threshold - OVERLAP_TOLERANCE)
        .map(|l| {
            format!(
                "layer at {:.2} m: in-track overlap {:.1}% is below the {:.0}% {} threshold",
                l.height,
                l.min_in_track * 100.0,
                threshold * 100.0,
                match mode {
                    OverlapMode::Landscape => "landscape",
                    OverlapMode::Detail => "detail",
                }
            )
        })
        .collect();
    let min_in_track = layers.iter().map(|l| l.min_in_track).fold(f64::INFINITY, f64::min);
    let min_cross_track = layers.iter().filter_map(|l| l.min_cross_track).reduce(f64::min);

    Ok(OverlapReport {
        mode,
        threshold,
        requested_in_track: plan.config.in_track_overlap,
        requested_cross_track: plan.config.cross_track_overlap,
        layers,
        min_in_track,
        min_cross_track,
        warnings,
    })
}
