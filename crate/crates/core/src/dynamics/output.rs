use std::io::{self, Write};

use super::Trajectory;

/// 17 significant digits, enough to round-trip any double.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Columns `time,ring_label,radius,mass,origin_mass`, one row per ring per snapshot.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> io::Result<()> {
    writeln!(w, "time,ring_label,radius,mass,origin_mass")?;
    for s in &traj.snapshots {
        let t = format_number(s.time);
        let m0 = format_number(s.measure.origin_mass());
        for (ring, label) in s.measure.rings().iter().zip(&s.initial_radii) {
            writeln!(
                w,
                "{t},{},{},{},{m0}",
                format_number(*label),
                format_number(ring.radius),
                format_number(ring.mass)
            )?;
        }
    }
    w.flush()
}

/// Columns `time,kind,label`.
pub fn write_events_csv<W: Write>(traj: &Trajectory, mut w: W) -> io::Result<()> {
    writeln!(w, "time,kind,label")?;
    for e in &traj.events {
        writeln!(w, "{},{},{}", format_number(e.time), e.kind.as_str(), format_number(e.label))?;
    }
    w.flush()
}
