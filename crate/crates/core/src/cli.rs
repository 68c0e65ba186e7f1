//! Command-line front end.
//!
//! Exit codes: 0 success, 1 domain error from the models, 2 usage error.
//! Quantities take an optional unit suffix glued to the number (`50nm`,
//! `1MHz`, `4.2K`); a bare number is read in SI base units.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::devices::{
    self, DeviceKind, DeviceOptions, DeviceSpec, ModeCounting, QpcGeometry, SetGeometry,
    SnrResult, WireGeometry,
};
use crate::error::Error;
use crate::montecarlo::{self, SimConfig};
use crate::report;
use crate::sweep::{self, Spacing, SweepAxis, SweepBase, SweepRow, SweepSpec};
use crate::units::{codata2018, effective_scales, joule_to_ev, Material, MaterialTable, CONSTANTS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Length,
    Frequency,
    Temperature,
    Voltage,
    Current,
    Conductance,
    Dimensionless,
}

impl Quantity {
    /// Accepted suffixes with their decimal exponent, longest first where
    /// one ends another.
    fn suffixes(self) -> &'static [(&'static str, i32)] {
        match self {
            Quantity::Length => &[("nm", -9), ("um", -6), ("m", 0)],
            Quantity::Frequency => &[("THz", 12), ("GHz", 9), ("MHz", 6), ("kHz", 3), ("Hz", 0)],
            Quantity::Temperature => &[("K", 0)],
            Quantity::Voltage => &[("mV", -3), ("V", 0)],
            Quantity::Current => &[("pA", -12), ("nA", -9), ("uA", -6), ("mA", -3), ("A", 0)],
            Quantity::Conductance => &[("uS", -6), ("mS", -3), ("S", 0)],
            Quantity::Dimensionless => &[],
        }
    }

    fn for_axis(axis: SweepAxis) -> Self {
        match axis {
            SweepAxis::Radius | SweepAxis::Width | SweepAxis::IslandRadius => Quantity::Length,
            SweepAxis::Bandwidth => Quantity::Frequency,
            SweepAxis::Temperature => Quantity::Temperature,
            SweepAxis::EpsilonR | SweepAxis::MStarRatio => Quantity::Dimensionless,
        }
    }
}

/// Parse `<number><suffix>` into SI.
pub fn parse_quantity(text: &str, quantity: Quantity) -> Result<f64, String> {
    let text = text.trim();
    let (number, exponent) = quantity
        .suffixes()
        .iter()
        .find_map(|&(suffix, exp)| text.strip_suffix(suffix).map(|n| (n, exp)))
        .unwrap_or((text, 0));
    let accepted: Vec<&str> = quantity.suffixes().iter().map(|s| s.0).collect();
    number
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        // divide for sub-units so "50nm" is bit-identical to 50e-9
        .map(|v| {
            if exponent >= 0 {
                v * 10f64.powi(exponent)
            } else {
                v / 10f64.powi(-exponent)
            }
        })
        .ok_or_else(|| {
            if accepted.is_empty() {
                format!("'{text}' is not a number")
            } else {
                format!("'{text}' is not a number with optional suffix {}", accepted.join("|"))
            }
        })
}

fn length(s: &str) -> Result<f64, String> {
    parse_quantity(s, Quantity::Length)
}
fn frequency(s: &str) -> Result<f64, String> {
    parse_quantity(s, Quantity::Frequency)
}
fn temperature(s: &str) -> Result<f64, String> {
    parse_quantity(s, Quantity::Temperature)
}
fn voltage(s: &str) -> Result<f64, String> {
    parse_quantity(s, Quantity::Voltage)
}
fn current(s: &str) -> Result<f64, String> {
    parse_quantity(s, Quantity::Current)
}
fn conductance(s: &str) -> Result<f64, String> {
    parse_quantity(s, Quantity::Conductance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "charge-limit", version, about = "Single-electron detection speed limits")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "table")]
    pub format: Format,
    /// Omit timestamps so repeated runs are byte-identical.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Extra material table (defaults to $CHARGE_LIMIT_MATERIALS).
    #[arg(long, global = true)]
    pub materials: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the pinned physical constants.
    Constants,
    /// Inspect the material table.
    Material {
        #[command(subcommand)]
        action: MaterialAction,
    },
    /// Cylindrical-wire FET.
    Wire(WireArgs),
    /// Quantum point contact.
    Qpc(QpcArgs),
    /// Single-electron transistor.
    Set(SetArgs),
    /// Sweep one parameter of a device.
    Sweep {
        #[command(subcommand)]
        device: SweepDevice,
    },
    /// Monte Carlo counting simulation.
    Simulate(SimulateArgs),
    /// Headline numbers against their published figures.
    Report,
}

#[derive(Debug, Subcommand)]
pub enum MaterialAction {
    List,
    Show { name: String },
}

#[derive(Debug, Clone, Args)]
pub struct MaterialArgs {
    /// Material name from the table.
    #[arg(long, default_value = "gaas")]
    pub material: String,
    /// Override m*/m.
    #[arg(long)]
    pub mstar: Option<f64>,
    /// Override the relative dielectric constant.
    #[arg(long)]
    pub epsr: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OperatingArgs {
    /// Measurement bandwidth.
    #[arg(long, value_parser = frequency, default_value = "1Hz")]
    pub df: f64,
    /// Temperature.
    #[arg(long, value_parser = temperature, default_value = "0K")]
    pub temp: f64,
    /// Fraction of the sense current switched by the charge.
    #[arg(long, default_value_t = 1.0)]
    pub modulation: f64,
    /// Shot-noise Fano factor.
    #[arg(long, default_value_t = 1.0)]
    pub fano: f64,
}

#[derive(Debug, Clone, Args)]
pub struct WireArgs {
    /// Channel radius.
    #[arg(long, value_parser = length, default_value = "50nm")]
    pub radius: f64,
    /// Bias override; defaults to the optimal bias.
    #[arg(long, value_parser = voltage)]
    pub bias: Option<f64>,
    /// Use floor(N_m) modes.
    #[arg(long)]
    pub floor_modes: bool,
    #[command(flatten)]
    pub material: MaterialArgs,
    #[command(flatten)]
    pub op: OperatingArgs,
}

#[derive(Debug, Clone, Args)]
pub struct QpcArgs {
    /// Constriction width.
    #[arg(long, value_parser = length, default_value = "20nm")]
    pub width: f64,
    #[command(flatten)]
    pub material: MaterialArgs,
    #[command(flatten)]
    pub op: OperatingArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SetArgs {
    /// Island radius.
    #[arg(long, value_parser = length, default_value = "50nm")]
    pub radius: f64,
    #[command(flatten)]
    pub material: MaterialArgs,
    #[command(flatten)]
    pub op: OperatingArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// R, W, R_island, delta_f, epsilon_r, m_star_ratio or T.
    #[arg(long)]
    pub axis: String,
    #[arg(long, allow_hyphen_values = true)]
    pub start: String,
    #[arg(long, allow_hyphen_values = true)]
    pub stop: String,
    #[arg(long, default_value_t = 31)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "log")]
    pub spacing: SpacingArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpacingArg {
    Linear,
    Log,
}

#[derive(Debug, Subcommand)]
pub enum SweepDevice {
    Wire {
        #[command(flatten)]
        device: WireArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    Qpc {
        #[command(flatten)]
        device: QpcArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    Set {
        #[command(flatten)]
        device: SetArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Open-state current; alternatively give --device.
    #[arg(long = "I", value_parser = current)]
    pub current: Option<f64>,
    /// Take the current from a device at its ideal operating point.
    #[arg(long)]
    pub device: Option<String>,
    /// Bandwidth; sets the integration window 1/(2*df).
    #[arg(long, value_parser = frequency)]
    pub df: f64,
    #[arg(long, value_parser = temperature, default_value = "0K")]
    pub temp: f64,
    /// Conductance for Johnson noise.
    #[arg(long, value_parser = conductance, default_value = "0S")]
    pub conductance: f64,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Decision threshold in electrons.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value_t = 1.0)]
    pub fano: f64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Comma-separated thresholds to scan for error rates.
    #[arg(long, value_delimiter = ',')]
    pub scan: Vec<f64>,
    /// Device geometry (with --device): wire/set radius.
    #[arg(long, value_parser = length, default_value = "50nm")]
    pub radius: f64,
    /// Device geometry (with --device): QPC width.
    #[arg(long, value_parser = length, default_value = "20nm")]
    pub width: f64,
    #[command(flatten)]
    pub material: MaterialArgs,
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Domain(Error::Io(e))
    }
}

type CmdResult<T> = Result<T, Failure>;

/// Run the CLI; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let rendered = e.render().to_string();
                let line = rendered.lines().find(|l| !l.trim().is_empty()).unwrap_or("usage error");
                let _ = writeln!(err, "{line}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Domain(Error::Io(e))) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(Failure::Domain(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DOMAIN
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> CmdResult<()> {
    let table = MaterialTable::with_user_table(cli.materials.as_deref())?;
    let ctx = Context { cli, table: &table };
    match &cli.command {
        Command::Constants => ctx.constants(out),
        Command::Material { action } => ctx.material(action, out),
        Command::Wire(args) => {
            let (device, opts) = ctx.wire(args)?;
            ctx.device("wire", &device, args.op.df, &opts, out)
        }
        Command::Qpc(args) => {
            let (device, opts) = ctx.qpc(args)?;
            ctx.device("qpc", &device, args.op.df, &opts, out)
        }
        Command::Set(args) => {
            let (device, opts) = ctx.set(args)?;
            ctx.device("set", &device, args.op.df, &opts, out)
        }
        Command::Sweep { device } => ctx.sweep(device, out),
        Command::Simulate(args) => ctx.simulate(args, out),
        Command::Report => ctx.report(out),
    }
}

struct Context<'a> {
    cli: &'a Cli,
    table: &'a MaterialTable,
}

#[derive(Serialize)]
struct Record<'a> {
    command: &'a str,
    inputs: Value,
    outputs: Value,
    flags: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    generator: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp_unix: Option<u64>,
}

fn sig(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.5e}")
    } else {
        x.to_string()
    }
}

fn print_table(out: &mut dyn Write, rows: &[(String, String, &str)]) -> std::io::Result<()> {
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    for (name, value, unit) in rows {
        writeln!(out, "{name:<width$}  {value} {unit}")?;
    }
    Ok(())
}

/// Flatten a JSON object into `key,value` CSV lines.
fn write_kv_csv(out: &mut dyn Write, value: &Value) -> CmdResult<()> {
    fn walk(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, v, rows);
                }
            }
            Value::Array(items) => {
                for (i, v) in items.iter().enumerate() {
                    walk(&format!("{prefix}.{i}"), v, rows);
                }
            }
            Value::String(s) => rows.push((prefix.to_owned(), s.clone())),
            Value::Null => rows.push((prefix.to_owned(), String::new())),
            other => rows.push((prefix.to_owned(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk("", value, &mut rows);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["key", "value"]).map_err(Error::from)?;
    for (k, v) in rows {
        w.write_record([k, v]).map_err(Error::from)?;
    }
    w.flush()?;
    Ok(())
}

impl Context<'_> {
    fn flags(&self) -> Value {
        json!({
            "format": self.cli.format,
            "deterministic": self.cli.deterministic,
        })
    }

    fn record<'a>(&self, command: &'a str, inputs: Value, outputs: Value) -> Record<'a> {
        Record {
            command,
            inputs,
            outputs,
            flags: self.flags(),
            generator: None,
            seed: None,
            timestamp_unix: if self.cli.deterministic {
                None
            } else {
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .ok()
                    .map(|d| d.as_secs())
            },
        }
    }

    fn emit_json(&self, out: &mut dyn Write, record: &Record) -> CmdResult<()> {
        serde_json::to_writer_pretty(&mut *out, record).map_err(|e| {
            if e.is_io() {
                Error::Io(e.into())
            } else {
                Error::from(e)
            }
        })?;
        writeln!(out)?;
        Ok(())
    }

    fn resolve_material(&self, args: &MaterialArgs) -> CmdResult<Material> {
        let mut material = self.table.get(&args.material)?.clone();
        if args.mstar.is_some() || args.epsr.is_some() {
            material.m_star_ratio = args.mstar.unwrap_or(material.m_star_ratio);
            material.epsilon_r = args.epsr.unwrap_or(material.epsilon_r);
            material.name = format!("{}+override", material.name);
        }
        material.validate()?;
        Ok(material)
    }

    fn options(op: &OperatingArgs) -> DeviceOptions {
        DeviceOptions {
            temperature: op.temp,
            modulation_depth: op.modulation,
            fano: op.fano,
            ..DeviceOptions::default()
        }
    }

    fn wire(&self, args: &WireArgs) -> CmdResult<(DeviceSpec, DeviceOptions)> {
        let device = DeviceSpec::Wire {
            geometry: WireGeometry::new(args.radius)?,
            material: self.resolve_material(&args.material)?,
        };
        let opts = DeviceOptions {
            wire_bias: args.bias,
            mode_counting: if args.floor_modes {
                ModeCounting::Floor
            } else {
                ModeCounting::Continuous
            },
            ..Self::options(&args.op)
        };
        Ok((device, opts))
    }

    fn qpc(&self, args: &QpcArgs) -> CmdResult<(DeviceSpec, DeviceOptions)> {
        let device = DeviceSpec::Qpc {
            geometry: QpcGeometry::new(args.width)?,
            material: self.resolve_material(&args.material)?,
        };
        Ok((device, Self::options(&args.op)))
    }

    fn set(&self, args: &SetArgs) -> CmdResult<(DeviceSpec, DeviceOptions)> {
        let device = DeviceSpec::Set {
            geometry: SetGeometry::new(args.radius)?,
            epsilon_r: self.resolve_material(&args.material)?.epsilon_r,
        };
        Ok((device, Self::options(&args.op)))
    }

    fn constants(&self, out: &mut dyn Write) -> CmdResult<()> {
        let k = CONSTANTS;
        let rows: Vec<(&str, f64, &str)> = vec![
            ("e", k.e, "C"),
            ("h", k.h, "J s"),
            ("hbar", k.hbar, "J s"),
            ("m_e", k.m_e, "kg"),
            ("c", k.c, "m/s"),
            ("k_B", k.k_b, "J/K"),
            ("eps0", k.eps0, "F/m"),
            ("alpha", k.alpha, ""),
            ("ry_energy", k.ry_energy, "J"),
            ("ry_energy_eV", joule_to_ev(k.ry_energy), "eV"),
            ("ry_freq", k.ry_freq, "Hz"),
            ("a0", k.a0, "m"),
            ("codata_alpha", codata2018::ALPHA, ""),
            ("codata_ry_freq", codata2018::RYDBERG_FREQUENCY, "Hz"),
            ("codata_a0", codata2018::BOHR_RADIUS, "m"),
        ];
        match self.cli.format {
            Format::Table => {
                let rows: Vec<_> = rows.iter().map(|(n, v, u)| (n.to_string(), sig(*v), *u)).collect();
                print_table(out, &rows)?;
            }
            Format::Json | Format::Csv => {
                let outputs = json!({ "constants": k, "units": {
                    "e": "C", "h": "J s", "hbar": "J s", "m_e": "kg", "c": "m/s", "k_b": "J/K",
                    "eps0": "F/m", "alpha": "1", "ry_energy": "J", "ry_freq": "Hz", "a0": "m"
                }, "source": "CODATA 2018" });
                let record = self.record("constants", json!({}), outputs);
                if self.cli.format == Format::Json {
                    self.emit_json(out, &record)?;
                } else {
                    write_kv_csv(out, &serde_json::to_value(&record).map_err(Error::from)?)?;
                }
            }
        }
        Ok(())
    }

    fn material_value(m: &Material) -> CmdResult<Value> {
        let s = effective_scales(m)?;
        Ok(json!({
            "name": m.name,
            "m_star_ratio": m.m_star_ratio,
            "epsilon_r": m.epsilon_r,
            "ry_star_energy_J": s.ry_star_energy,
            "ry_star_energy_eV": joule_to_ev(s.ry_star_energy),
            "ry_star_freq_Hz": s.ry_star_freq,
            "a_star_m": s.a_star,
            "scale_factor": s.scale_factor,
        }))
    }

    fn material(&self, action: &MaterialAction, out: &mut dyn Write) -> CmdResult<()> {
        let materials: Vec<&Material> = match action {
            MaterialAction::List => self.table.iter().collect(),
            MaterialAction::Show { name } => vec![self.table.get(name)?],
        };
        match self.cli.format {
            Format::Table => {
                writeln!(
                    out,
                    "{:<16} {:>12} {:>12} {:>14} {:>14} {:>14}",
                    "name", "m*/m", "eps_r", "Ry* [meV]", "Ry*/h [Hz]", "a* [nm]"
                )?;
                for m in materials {
                    let s = effective_scales(m)?;
                    writeln!(
                        out,
                        "{:<16} {:>12} {:>12} {:>14} {:>14} {:>14}",
                        m.name,
                        sig(m.m_star_ratio),
                        sig(m.epsilon_r),
                        sig(joule_to_ev(s.ry_star_energy) * 1e3),
                        sig(s.ry_star_freq),
                        sig(s.a_star * 1e9)
                    )?;
                }
            }
            Format::Json | Format::Csv => {
                let list = materials
                    .into_iter()
                    .map(Self::material_value)
                    .collect::<CmdResult<Vec<_>>>()?;
                let record = self.record("material", json!({}), json!({ "materials": list }));
                if self.cli.format == Format::Json {
                    self.emit_json(out, &record)?;
                } else {
                    write_kv_csv(out, &serde_json::to_value(&record).map_err(Error::from)?)?;
                }
            }
        }
        Ok(())
    }

    fn device(
        &self,
        command: &str,
        device: &DeviceSpec,
        bandwidth: f64,
        opts: &DeviceOptions,
        out: &mut dyn Write,
    ) -> CmdResult<()> {
        let result = devices::evaluate(device, bandwidth, opts)?;
        match self.cli.format {
            Format::Table => render_result(out, device, &result)?,
            Format::Csv => {
                let row = SweepRow::new(None, f64::NAN, device, opts, &result);
                sweep::write_csv(&[row], out)?;
            }
            Format::Json => {
                let inputs = json!({ "device": device, "bandwidth_Hz": bandwidth, "options": opts });
                let outputs = serde_json::to_value(&result).map_err(Error::from)?;
                self.emit_json(out, &self.record(command, inputs, outputs))?;
            }
        }
        Ok(())
    }

    fn sweep(&self, which: &SweepDevice, out: &mut dyn Write) -> CmdResult<()> {
        let (device, opts, bandwidth, args) = match which {
            SweepDevice::Wire { device, sweep } => {
                let (d, o) = self.wire(device)?;
                (d, o, device.op.df, sweep)
            }
            SweepDevice::Qpc { device, sweep } => {
                let (d, o) = self.qpc(device)?;
                (d, o, device.op.df, sweep)
            }
            SweepDevice::Set { device, sweep } => {
                let (d, o) = self.set(device)?;
                (d, o, device.op.df, sweep)
            }
        };
        let axis: SweepAxis = args.axis.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
        let quantity = Quantity::for_axis(axis);
        let start = parse_quantity(&args.start, quantity).map_err(Failure::Usage)?;
        let stop = parse_quantity(&args.stop, quantity).map_err(Failure::Usage)?;
        let spec = SweepSpec {
            axis,
            start,
            stop,
            points: args.points,
            spacing: match args.spacing {
                SpacingArg::Linear => Spacing::Linear,
                SpacingArg::Log => Spacing::Log,
            },
        };
        spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        if !axis.applies_to(device.kind()) {
            return Err(Failure::Usage(format!(
                "axis {axis} does not apply to a {} device",
                device.kind()
            )));
        }
        let base = SweepBase {
            device,
            bandwidth,
            options: opts,
        };
        let rows = sweep::run_sweep(&base, &spec)?;
        match self.cli.format {
            Format::Csv => sweep::write_csv(&rows, out)?,
            Format::Json => {
                let inputs = json!({
                    "device": base.device, "bandwidth_Hz": bandwidth,
                    "options": base.options, "sweep": spec,
                });
                let outputs = json!({ "rows": rows });
                self.emit_json(out, &self.record("sweep", inputs, outputs))?;
            }
            Format::Table => {
                writeln!(
                    out,
                    "{:>14} {:>14} {:>14} {:>16}",
                    format!("{} [{}]", axis.name(), axis.unit()),
                    "SNR",
                    "f_unity [Hz]",
                    "sens [e/rtHz]"
                )?;
                for r in &rows {
                    writeln!(
                        out,
                        "{:>14} {:>14} {:>14} {:>16}",
                        sig(r.axis_value),
                        sig(r.snr),
                        sig(r.f_unity_hz),
                        sig(r.sensitivity_e_per_rt_hz)
                    )?;
                }
            }
        }
        Ok(())
    }

    fn simulate(&self, args: &SimulateArgs, out: &mut dyn Write) -> CmdResult<()> {
        let device = match (&args.device, args.current) {
            (Some(_), Some(_)) => {
                return Err(Failure::Usage("give either --I or --device, not both".into()))
            }
            (None, None) => return Err(Failure::Usage("one of --I or --device is required".into())),
            (Some(kind), None) => {
                let kind: DeviceKind = kind.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
                let material = self.resolve_material(&args.material)?;
                Some(match kind {
                    DeviceKind::Wire => DeviceSpec::Wire {
                        geometry: WireGeometry::new(args.radius)?,
                        material,
                    },
                    DeviceKind::Qpc => DeviceSpec::Qpc {
                        geometry: QpcGeometry::new(args.width)?,
                        material,
                    },
                    DeviceKind::Set => DeviceSpec::Set {
                        geometry: SetGeometry::new(args.radius)?,
                        epsilon_r: material.epsilon_r,
                    },
                })
            }
            (None, Some(_)) => None,
        };

        let pool = {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(n) = args.threads {
                builder = builder.num_threads(n as usize);
            }
            builder
                .build()
                .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?
        };

        let (inputs, outputs) = pool.install(|| -> CmdResult<(Value, Value)> {
            if let Some(device) = &device {
                let rec = montecarlo::validate_device(device, args.df, args.trials, args.seed)?;
                let inputs = json!({
                    "device": device, "bandwidth_Hz": args.df,
                    "trials": args.trials, "seed": args.seed,
                });
                Ok((inputs, serde_json::to_value(&rec).map_err(Error::from)?))
            } else {
                let cfg = SimConfig {
                    current: args.current.unwrap_or_default(),
                    temperature: args.temp,
                    conductance: args.conductance,
                    bandwidth: args.df,
                    trials: args.trials,
                    seed: args.seed,
                    threshold: args.threshold,
                    fano: args.fano,
                };
                let outcome = montecarlo::simulate_detection(&cfg)?;
                let scan = if args.scan.is_empty() {
                    Value::Null
                } else {
                    serde_json::to_value(montecarlo::threshold_scan(&cfg, &args.scan)?)
                        .map_err(Error::from)?
                };
                let inputs = json!({
                    "current_A": cfg.current, "temperature_K": cfg.temperature,
                    "conductance_S": cfg.conductance, "bandwidth_Hz": cfg.bandwidth,
                    "trials": cfg.trials, "seed": cfg.seed, "threshold_e": cfg.threshold,
                    "fano": cfg.fano,
                });
                let mut outputs = serde_json::to_value(&outcome).map_err(Error::from)?;
                if !scan.is_null() {
                    outputs["threshold_scan"] = scan;
                }
                Ok((inputs, outputs))
            }
        })?;

        match self.cli.format {
            Format::Json | Format::Csv => {
                let mut record = self.record("simulate", inputs, outputs);
                record.generator = Some(montecarlo::GENERATOR);
                record.seed = Some(args.seed);
                if self.cli.format == Format::Json {
                    self.emit_json(out, &record)?;
                } else {
                    write_kv_csv(out, &serde_json::to_value(&record).map_err(Error::from)?)?;
                }
            }
            Format::Table => {
                let o = if device.is_some() { &outputs["outcome"] } else { &outputs };
                let num = |v: &Value| v.as_f64().map(sig).unwrap_or_else(|| v.to_string());
                let rows = vec![
                    ("mean count".to_string(), num(&o["mean_count"]), "e"),
                    ("analytic SNR".to_string(), num(&o["analytic_snr"]), ""),
                    ("empirical SNR".to_string(), num(&o["empirical_snr"]), ""),
                    ("SNR 95% half-width".to_string(), num(&o["ci95"]["empirical_snr"]), ""),
                    ("within 3 sigma".to_string(), o["within_3sigma"].to_string(), ""),
                    ("err open".to_string(), num(&o["err_open"]), ""),
                    ("err blocked".to_string(), num(&o["err_blocked"]), ""),
                    ("balanced err".to_string(), num(&o["balanced_err"]), ""),
                    ("gaussian fallback".to_string(), o["gaussian_fallback"].to_string(), ""),
                    ("seed".to_string(), args.seed.to_string(), ""),
                    ("generator".to_string(), montecarlo::GENERATOR.to_string(), ""),
                ];
                print_table(out, &rows)?;
            }
        }
        Ok(())
    }

    fn report(&self, out: &mut dyn Write) -> CmdResult<()> {
        let rows = report::headline_report()?;
        match self.cli.format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                for r in &rows {
                    w.serialize(r).map_err(Error::from)?;
                }
                w.flush()?;
            }
            Format::Json => {
                let record = self.record("report", json!({}), json!({ "rows": rows }));
                self.emit_json(out, &record)?;
            }
            Format::Table => {
                for r in &rows {
                    writeln!(
                        out,
                        "[{}] {:<36} {} = {} (claim {}, band {} .. {})",
                        if r.within_claim { "PASS" } else { "FAIL" },
                        r.label,
                        r.checked,
                        sig(r.value),
                        r.paper_claim,
                        sig(r.band_low),
                        sig(r.band_high)
                    )?;
                }
            }
        }
        Ok(())
    }
}

fn render_result(out: &mut dyn Write, device: &DeviceSpec, r: &SnrResult) -> CmdResult<()> {
    let mut rows: Vec<(String, String, &str)> = Vec::new();
    match device {
        DeviceSpec::Wire { geometry, material } => {
            rows.push(("radius".into(), sig(geometry.radius), "m"));
            rows.push(("material".into(), material.name.clone(), ""));
            rows.push(("m*/m".into(), sig(material.m_star_ratio), ""));
            rows.push(("eps_r".into(), sig(material.epsilon_r), ""));
        }
        DeviceSpec::Qpc { geometry, material } => {
            rows.push(("width".into(), sig(geometry.width), "m"));
            rows.push(("material".into(), material.name.clone(), ""));
            rows.push(("m*/m".into(), sig(material.m_star_ratio), ""));
            rows.push(("eps_r".into(), sig(material.epsilon_r), ""));
        }
        DeviceSpec::Set {
            geometry,
            epsilon_r,
        } => {
            rows.push(("island radius".into(), sig(geometry.island_radius), "m"));
            rows.push(("eps_r".into(), sig(*epsilon_r), ""));
        }
    }
    rows.push(("bandwidth".into(), sig(r.bandwidth), "Hz"));
    rows.push(("SNR".into(), sig(r.snr), ""));
    rows.push(("unity-SNR bandwidth".into(), sig(r.f_unity), "Hz"));
    rows.push(("closed-form bandwidth".into(), sig(r.closed_form_f_unity), "Hz"));
    rows.push(("sensitivity".into(), sig(r.sensitivity), "e/rtHz"));
    rows.push(("modes".into(), sig(r.transport.modes), ""));
    rows.push(("bias".into(), sig(r.transport.bias), "V"));
    rows.push(("conductance".into(), sig(r.transport.conductance), "S"));
    rows.push(("current".into(), sig(r.transport.current), "A"));
    if let Some(es) = &r.electrostatics {
        rows.push(("capacitance".into(), sig(es.capacitance), "F"));
        rows.push(("charging energy".into(), sig(es.charging_energy), "J"));
        rows.push(("blockade voltage".into(), sig(es.blockade_voltage), "V"));
    }
    rows.push(("shot noise variance".into(), sig(r.breakdown.shot_sq), "A^2"));
    rows.push(("thermal noise variance".into(), sig(r.breakdown.thermal_sq), "A^2"));
    rows.push(("total noise".into(), sig(r.breakdown.total_rms), "A rms"));
    print_table(out, &rows)?;
    for flag in &r.validity {
        writeln!(
            out,
            "warning: {}",
            serde_json::to_string(flag).map_err(Error::from)?
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_suffixes() {
        assert_eq!(parse_quantity("50nm", Quantity::Length).unwrap(), 50e-9);
        assert_eq!(parse_quantity("2um", Quantity::Length).unwrap(), 2e-6);
        assert_eq!(parse_quantity("1e-9m", Quantity::Length).unwrap(), 1e-9);
        assert_eq!(parse_quantity("0.3", Quantity::Length).unwrap(), 0.3);
        assert_eq!(parse_quantity("5e4Hz", Quantity::Frequency).unwrap(), 5e4);
        assert_eq!(parse_quantity("3MHz", Quantity::Frequency).unwrap(), 3e6);
        assert_eq!(parse_quantity("1THz", Quantity::Frequency).unwrap(), 1e12);
        assert_eq!(parse_quantity("4.2K", Quantity::Temperature).unwrap(), 4.2);
        assert_eq!(parse_quantity("10mV", Quantity::Voltage).unwrap(), 10e-3);
        assert_eq!(parse_quantity("1.5V", Quantity::Voltage).unwrap(), 1.5);
        assert_eq!(parse_quantity("1.602177e-13A", Quantity::Current).unwrap(), 1.602177e-13);
        assert!(parse_quantity("5mm", Quantity::Length).is_err());
        assert!(parse_quantity("5 nm", Quantity::Length).is_err());
        assert!(parse_quantity("nm", Quantity::Length).is_err());
        assert!(parse_quantity("5Hz", Quantity::Length).is_err());
        assert!(parse_quantity("12.9x", Quantity::Dimensionless).is_err());
    }

    #[test]
    fn kv_csv_flattens_nested_json() {
        let mut buf = Vec::new();
        assert!(write_kv_csv(&mut buf, &json!({"a": {"b": 1.5, "c": [true, null]}, "d": "x"})).is_ok());
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "key,value\na.b,1.5\na.c.0,true\na.c.1,\nd,x\n");
    }
}
