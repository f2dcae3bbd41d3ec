use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{PathError, PathLabel, PathRecord, ScenarioSpec, TerminalReason, TimedSample};
use crate::features::{StressPattern, PATTERN_LEN};
use crate::geometry::{RobotState, Vec2};
use crate::stokes::RigidMotion;

pub const PATH_FORMAT_VERSION: u32 = 1;

const FIXED_COLUMNS: usize = 7;

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    scenario: ScenarioSpec,
    label: PathLabel,
    terminal_reason: TerminalReason,
    sample_ms: f64,
    robot_radius: f64,
    samples: usize,
}

impl PathRecord {
    /// Line-oriented text: a JSON header, a column comment, then one CSV
    /// row per sample.
    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let header = Header {
            format_version: PATH_FORMAT_VERSION,
            scenario: self.scenario.clone(),
            label: self.label,
            terminal_reason: self.terminal_reason,
            sample_ms: self.sample_ms,
            robot_radius: self
                .samples
                .first()
                .map_or(RobotState::DEFAULT_RADIUS, |s| s.robot.radius),
            samples: self.samples.len(),
        };
        writeln!(out, "{}", serde_json::to_string(&header)?)?;
        write!(out, "# t_ms,x_um,y_um,theta_rad,vx_um_s,vy_um_s,omega_rad_s")?;
        for c in ["n", "t"] {
            write!(out, ",{c}0")?;
            for k in 1..=6 {
                write!(out, ",{c}{k}_re,{c}{k}_im")?;
            }
        }
        writeln!(out, ",contact")?;
        for s in &self.samples {
            write!(
                out,
                "{},{},{},{},{},{},{}",
                s.t,
                s.robot.center.x,
                s.robot.center.y,
                s.robot.orientation,
                s.motion.velocity.x,
                s.motion.velocity.y,
                s.motion.angular_velocity
            )?;
            for v in &s.pattern.coeffs {
                write!(out, ",{v}")?;
            }
            writeln!(out, ",{}", u8::from(s.contact))?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, PathError> {
        let mut lines = input.lines();
        let first = lines
            .next()
            .ok_or_else(|| PathError::Format("empty path file".into()))??;
        let header: Header = serde_json::from_str(&first).map_err(|e| PathError::Format(e.to_string()))?;
        if header.format_version != PATH_FORMAT_VERSION {
            return Err(PathError::Format(format!(
                "unsupported path format version {}",
                header.format_version
            )));
        }
        let mut samples = Vec::with_capacity(header.samples);
        for line in lines {
            let line = line?;
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| PathError::Format(format!("bad number in {line:?}: {e}")))?;
            if vals.len() != FIXED_COLUMNS + PATTERN_LEN + 1 {
                return Err(PathError::Format(format!(
                    "expected {} columns, got {}",
                    FIXED_COLUMNS + PATTERN_LEN + 1,
                    vals.len()
                )));
            }
            samples.push(TimedSample {
                t: vals[0],
                robot: RobotState {
                    center: Vec2::new(vals[1], vals[2]),
                    orientation: vals[3],
                    radius: header.robot_radius,
                },
                motion: RigidMotion {
                    velocity: Vec2::new(vals[4], vals[5]),
                    angular_velocity: vals[6],
                },
                pattern: StressPattern::from_slice(&vals[FIXED_COLUMNS..FIXED_COLUMNS + PATTERN_LEN])
                    .map_err(|e| PathError::Format(e.to_string()))?,
                contact: vals[FIXED_COLUMNS + PATTERN_LEN] != 0.0,
                raw_traction: None,
            });
        }
        if samples.len() != header.samples {
            return Err(PathError::Format(format!(
                "header announces {} samples, found {}",
                header.samples,
                samples.len()
            )));
        }
        Ok(PathRecord {
            scenario: header.scenario,
            label: header.label,
            terminal_reason: header.terminal_reason,
            sample_ms: header.sample_ms,
            samples,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), PathError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, PathError> {
        let f = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{draw_scenario, ScenarioKind};

    #[test]
    fn round_trip_is_exact() {
        let spec = draw_scenario(ScenarioKind::Branch, 12);
        let mut p = StressPattern::zeros();
        for (i, v) in p.coeffs.iter_mut().enumerate() {
            *v = (i as f64 + 0.1).sqrt() * 1e-3 - 0.01;
        }
        let rec = PathRecord {
            label: spec.label(),
            scenario: spec,
            terminal_reason: TerminalReason::StepLimit,
            sample_ms: 1.0,
            samples: (0..3)
                .map(|i| TimedSample {
                    t: i as f64,
                    robot: RobotState::new(8.0 + 0.123456789 * i as f64, -1.0 / 3.0, 5.5),
                    motion: RigidMotion {
                        velocity: Vec2::new(812.25, 1e-17),
                        angular_velocity: -3.0,
                    },
                    pattern: p,
                    contact: i == 1,
                    raw_traction: None,
                })
                .collect(),
        };
        let mut buf = Vec::new();
        rec.write(&mut buf).unwrap();
        let back = PathRecord::read(buf.as_slice()).unwrap();
        assert_eq!(back, rec);
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn rejects_other_versions() {
        let text = "{\"format_version\":9}\n";
        assert!(PathRecord::read(text.as_bytes()).is_err());
    }
}
