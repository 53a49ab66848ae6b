//! Uniformly sampled records and their on-disk forms.
//!
//! Text form: `#`-prefixed `key = value` header lines followed by one sample
//! per line, written with shortest round-trip formatting:
//!
//! ```text
//! # torsion-noise series v1
//! # channel = angle
//! # dt = 5e-2
//! # seed = 42
//! # fingerprint = 3f2a…
//! # length = 3
//! 1.2e-7
//! -3.4e-8
//! 5.6e-9
//! ```
//!
//! Additional `#` lines (for example the echoed run configuration) are kept
//! verbatim in [`TimeSeries::notes`].
//!
//! Binary form (all little-endian): magic `TNSR`, `u16` version (1), `u8`
//! channel code, `u8` reserved, `f64` dt, `u64` seed, `u16` fingerprint
//! length plus UTF-8 bytes, `u64` sample count, then the `f64` samples.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TEXT_MAGIC: &str = "# torsion-noise series v1";
pub const BINARY_MAGIC: &[u8; 4] = b"TNSR";
pub const BINARY_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// rad
    Angle,
    /// rad/s
    AngularVelocity,
    /// dyne·cm, the integrator output κ∫θ dt
    IntegratorTorque,
}

impl Channel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Channel::Angle => "angle",
            Channel::AngularVelocity => "angular_velocity",
            Channel::IntegratorTorque => "integrator_torque",
        }
    }

    fn code(&self) -> u8 {
        match self {
            Channel::Angle => 0,
            Channel::AngularVelocity => 1,
            Channel::IntegratorTorque => 2,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Channel::Angle),
            1 => Some(Channel::AngularVelocity),
            2 => Some(Channel::IntegratorTorque),
            _ => None,
        }
    }
}

impl FromStr for Channel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "angle" => Ok(Channel::Angle),
            "angular_velocity" => Ok(Channel::AngularVelocity),
            "integrator_torque" => Ok(Channel::IntegratorTorque),
            other => Err(format!("unknown channel `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    dt: f64,
    values: Vec<f64>,
    channel: Channel,
    seed: u64,
    params_fingerprint: String,
    notes: Vec<String>,
}

impl TimeSeries {
    pub fn new(
        channel: Channel,
        dt: f64,
        values: Vec<f64>,
        seed: u64,
        params_fingerprint: impl Into<String>,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("must be finite and > 0, got {dt}"),
            });
        }
        if values.is_empty() {
            return Err(Error::InsufficientData("time series needs at least one sample".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Unstable(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            dt,
            values,
            channel,
            seed,
            params_fingerprint: params_fingerprint.into(),
            notes: Vec::new(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn channel(&self) -> Channel {
        self.channel
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn fingerprint(&self) -> &str {
        &self.params_fingerprint
    }
    pub fn notes(&self) -> &[String] {
        &self.notes
    }
    pub fn duration(&self) -> f64 {
        self.dt * self.values.len() as f64
    }

    /// Attaches free-form header lines (without the leading `#`).
    pub fn with_notes(mut self, notes: Vec<String>) -> Self {
        self.notes = notes;
        self
    }

    /// Same record with every sample multiplied by `factor` (e.g. torque → force).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Population (1/N) variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.values.len() as f64
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 24 + 256);
        out.push_str(TEXT_MAGIC);
        out.push('\n');
        let _ = writeln!(out, "# channel = {}", self.channel.as_str());
        let _ = writeln!(out, "# dt = {:e}", self.dt);
        let _ = writeln!(out, "# seed = {}", self.seed);
        let _ = writeln!(out, "# fingerprint = {}", self.params_fingerprint);
        let _ = writeln!(out, "# length = {}", self.values.len());
        for note in &self.notes {
            let _ = writeln!(out, "# {note}");
        }
        for v in &self.values {
            let _ = writeln!(out, "{v:e}");
        }
        out
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_text().as_bytes())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, l)) if l.trim_end() == TEXT_MAGIC => {}
            Some((n, l)) => {
                return Err(Error::Parse {
                    line: n,
                    message: format!("expected `{TEXT_MAGIC}`, found `{l}`"),
                })
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        }
        let (mut channel, mut dt, mut seed, mut fingerprint, mut length) =
            (None, None, None, None, None);
        let mut notes = Vec::new();
        let mut values = Vec::new();
        for (n, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(body) = line.strip_prefix('#') {
                let body = body.trim();
                let parsed = body.split_once('=').map(|(k, v)| (k.trim(), v.trim()));
                let bad = |m: String| Error::Parse { line: n, message: m };
                match parsed {
                    Some(("channel", v)) => channel = Some(v.parse::<Channel>().map_err(bad)?),
                    Some(("dt", v)) => {
                        dt = Some(v.parse::<f64>().map_err(|e| bad(format!("dt: {e}")))?)
                    }
                    Some(("seed", v)) => {
                        seed = Some(v.parse::<u64>().map_err(|e| bad(format!("seed: {e}")))?)
                    }
                    Some(("fingerprint", v)) => fingerprint = Some(v.to_string()),
                    Some(("length", v)) => {
                        length = Some(v.parse::<usize>().map_err(|e| bad(format!("length: {e}")))?)
                    }
                    _ => notes.push(body.to_string()),
                }
                continue;
            }
            let v = line.parse::<f64>().map_err(|e| Error::Parse {
                line: n,
                message: format!("bad sample `{line}`: {e}"),
            })?;
            values.push(v);
        }
        let missing = |what: &str| Error::Parse {
            line: 1,
            message: format!("header is missing `{what}`"),
        };
        let channel = channel.ok_or_else(|| missing("channel"))?;
        let dt = dt.ok_or_else(|| missing("dt"))?;
        let seed = seed.ok_or_else(|| missing("seed"))?;
        let fingerprint = fingerprint.ok_or_else(|| missing("fingerprint"))?;
        if let Some(len) = length {
            if len != values.len() {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("header declares {len} samples, file has {}", values.len()),
                });
            }
        }
        Ok(Self::new(channel, dt, values, seed, fingerprint)?.with_notes(notes))
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&BINARY_VERSION.to_le_bytes())?;
        w.write_all(&[self.channel.code(), 0])?;
        w.write_all(&self.dt.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        let fp = self.params_fingerprint.as_bytes();
        w.write_all(&(fp.len() as u16).to_le_bytes())?;
        w.write_all(fp)?;
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        fn take<const N: usize, R: Read>(r: &mut R, what: &str) -> Result<[u8; N]> {
            let mut buf = [0u8; N];
            r.read_exact(&mut buf).map_err(|e| Error::Parse {
                line: 0,
                message: format!("truncated binary series while reading {what}: {e}"),
            })?;
            Ok(buf)
        }
        let magic = take::<4, _>(&mut r, "magic")?;
        if &magic != BINARY_MAGIC {
            return Err(Error::Parse {
                line: 0,
                message: "not a binary torsion-noise series".into(),
            });
        }
        let version = u16::from_le_bytes(take::<2, _>(&mut r, "version")?);
        if version != BINARY_VERSION {
            return Err(Error::Parse {
                line: 0,
                message: format!("unsupported binary version {version}"),
            });
        }
        let [code, _] = take::<2, _>(&mut r, "channel")?;
        let channel = Channel::from_code(code).ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("unknown channel code {code}"),
        })?;
        let dt = f64::from_le_bytes(take::<8, _>(&mut r, "dt")?);
        let seed = u64::from_le_bytes(take::<8, _>(&mut r, "seed")?);
        let fp_len = u16::from_le_bytes(take::<2, _>(&mut r, "fingerprint length")?) as usize;
        let mut fp = vec![0u8; fp_len];
        r.read_exact(&mut fp).map_err(|e| Error::Parse {
            line: 0,
            message: format!("truncated fingerprint: {e}"),
        })?;
        let fingerprint = String::from_utf8(fp).map_err(|e| Error::Parse {
            line: 0,
            message: format!("fingerprint is not UTF-8: {e}"),
        })?;
        let n = u64::from_le_bytes(take::<8, _>(&mut r, "length")?) as usize;
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(f64::from_le_bytes(take::<8, _>(&mut r, "sample")?));
        }
        Self::new(channel, dt, values, seed, fingerprint)
    }
}
