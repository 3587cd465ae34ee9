use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "dronecine",
    version,
    about = "Plan, rehearse and export drone cinematography and scan missions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan a layered grid scan and write the plan and capture manifest.
    PlanScan(PlanScanArgs),
    /// Generate a cinematic shot trajectory.
    Shot(ShotArgs),
    /// Run a project headlessly and write the trace and events.
    Simulate(SimulateArgs),
    /// Report achieved image overlap of a scan plan.
    VerifyOverlap(VerifyOverlapArgs),
    /// Convert plans between formats.
    Export(ExportArgs),
    /// Start the HTTP/JSON service.
    Serve(ServeArgs),
    /// Talk to a running service.
    Remote(RemoteArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OriginArgs {
    /// Geodetic origin of the local ENU frame.
    #[arg(long, default_value_t = 51.45, allow_negative_numbers = true)]
    pub origin_latitude_deg: f64,
    #[arg(long, default_value_t = -2.6, allow_negative_numbers = true)]
    pub origin_longitude_deg: f64,
    /// Home altitude above mean sea level.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub origin_altitude_m: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CameraArgs {
    #[arg(long, allow_negative_numbers = true, default_value_t = 23.66)]
    pub sensor_width_mm: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 13.3)]
    pub sensor_height_mm: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 35.0)]
    pub focal_length_mm: f64,
}

#[derive(Debug, Args)]
pub struct PlanScanArgs {
    /// Area corner (the grid origin) in the local frame.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub origin_corner_east_m: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub origin_corner_north_m: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub origin_corner_up_m: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 50.0)]
    pub length_x_m: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 50.0)]
    pub length_y_m: f64,
    /// Area rotation, counter-clockwise from east.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub rotation_deg: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 20.0)]
    pub base_height_m: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub avg_building_height_m: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub max_building_height_m: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.8)]
    pub in_track_overlap: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.7)]
    pub cross_track_overlap: f64,
    /// Gimbal pitch below the horizon for the highest, middle and lowest
    /// layer.
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',', num_args = 3, default_values_t = [85.0, 60.0, 35.0])]
    pub gimbal_pitch_per_layer_deg: Vec<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 5.0)]
    pub cruise_speed_mps: f64,
    /// Fly the orthogonal y-direction pass as well.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub both_directions: bool,
    #[command(flatten)]
    pub camera: CameraArgs,
    #[command(flatten)]
    pub origin: OriginArgs,
    /// Write the scan plan (JSON).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write the capture manifest (CSV).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShotKind {
    Establish,
    Chase,
    Flyby,
    Elevator,
    Orbit,
}

#[derive(Debug, Args)]
pub struct ShotArgs {
    #[arg(long = "type", value_enum)]
    pub shot_type: ShotKind,
    /// Static target point.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub target_east_m: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub target_north_m: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub target_up_m: f64,
    /// Frame an actor from --project instead of a static point.
    #[arg(long, requires = "project")]
    pub target_actor: Option<u32>,
    /// Project supplying actors for --target-actor.
    #[arg(long)]
    pub project: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 5.0)]
    pub speed_mps: f64,
    /// Sample interval.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.05)]
    pub dt_s: f64,
    #[arg(long, allow_negative_numbers = true, visible_alias = "radius")]
    pub radius_m: Option<f64>,
    #[arg(long, allow_negative_numbers = true, visible_alias = "height")]
    pub height_m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub start_azimuth_deg: Option<f64>,
    #[arg(long, allow_negative_numbers = true, visible_alias = "arc")]
    pub arc_deg: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub follow_distance_m: Option<f64>,
    #[arg(long, allow_negative_numbers = true, visible_alias = "duration")]
    pub duration_s: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub offset_m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub leg_length_m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub bearing_deg: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub distance_m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub start_distance_m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub end_distance_m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub start_height_m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub end_height_m: Option<f64>,
    #[command(flatten)]
    pub camera: CameraArgs,
    #[command(flatten)]
    pub origin: OriginArgs,
    /// Write the shot (spec and trajectory, JSON); input to `simulate --shot`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write the trajectory as a QGroundControl plan.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Waypoint spacing for --plan.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub plan_interval_s: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Project document to simulate.
    #[arg(long)]
    pub project: Option<PathBuf>,
    /// Shot file from `shot --output`; flown by an extra drone. Repeatable.
    #[arg(long)]
    pub shot: Vec<PathBuf>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 60.0)]
    pub seconds: f64,
    /// Control log CSV: tick,drone_id,forward,right,climb,yaw_rate,gimbal_rate
    #[arg(long)]
    pub controls: Option<PathBuf>,
    /// Write one snapshot per tick (JSON lines).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write the event list (JSON).
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Write the run summary (JSON).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Landscape,
    Detail,
}

#[derive(Debug, Args)]
pub struct VerifyOverlapArgs {
    /// Scan plan from `plan-scan --output`.
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Detail)]
    pub mode: Mode,
    /// Write the report (JSON).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Exit with status 1 when any threshold warning fires.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// QGroundControl plan.
    Qgc,
    /// Scan plan from `plan-scan`.
    Scan,
    /// Shot file from `shot`.
    Shot,
    /// Project document; pick a drone or scan.
    Project,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Qgc,
    Litchi,
    Manifest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    Trajectory,
    FlightPlan,
    Recorded,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub from: InputFormat,
    #[arg(long, value_enum)]
    pub to: OutputFormat,
    #[arg(long)]
    pub output: PathBuf,
    /// Drone to export from a project.
    #[arg(long)]
    pub drone: Option<u32>,
    /// Scan to export from a project.
    #[arg(long)]
    pub scan: Option<u32>,
    #[arg(long, value_enum, default_value_t = Source::Trajectory)]
    pub source: Source,
    /// Waypoint spacing when resampling a trajectory.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub interval_s: f64,
    /// Origin for scan and shot inputs, which carry none.
    #[command(flatten)]
    pub origin: OriginArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
}

#[derive(Debug, Args)]
pub struct RemoteArgs {
    /// Service root URL.
    #[arg(long, default_value = "http://127.0.0.1:8080")]
    pub url: String,
    #[command(subcommand)]
    pub command: RemoteCommand,
}

#[derive(Debug, Subcommand)]
pub enum RemoteCommand {
    /// Check the service is up.
    Health,
    /// List session ids.
    Sessions,
    /// Create a session, optionally from a project document; prints its id.
    Create {
        #[arg(long)]
        project: Option<PathBuf>,
    },
    /// Save a session's project document.
    Save {
        #[arg(long)]
        session: uuid::Uuid,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run a session's project headlessly and print the summary.
    Run {
        #[arg(long)]
        session: uuid::Uuid,
        #[arg(long, allow_negative_numbers = true, default_value_t = 60.0)]
        seconds: f64,
    },
}
