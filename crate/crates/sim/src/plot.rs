//! Plot-ready tables. Each file is long-format CSV so any plotting tool can
//! facet on the `series` column without further reshaping.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::engine::RunOutput;
use crate::trace::num;

/// Writes `planar.csv`, `timeseries.csv` and `actuation.csv` into `dir`.
pub fn emit_plot_data(dir: &Path, run: &RunOutput) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    write_planar(&mut BufWriter::new(File::create(dir.join("planar.csv"))?), run)?;
    write_timeseries(&mut BufWriter::new(File::create(dir.join("timeseries.csv"))?), run)?;
    write_actuation(&mut BufWriter::new(File::create(dir.join("actuation.csv"))?), run)?;
    Ok(())
}

/// Ego and target tracks plus every candidate of the engage and replan passes,
/// tagged `selected`, `rejected` or `candidate`.
pub fn write_planar<W: Write>(out: &mut W, run: &RunOutput) -> io::Result<()> {
    writeln!(out, "series,role,t,x,y")?;
    for r in &run.rows {
        writeln!(out, "ego,track,{},{},{}", num(r.t), num(r.x), num(r.y))?;
    }
    for (j, id) in run.target_ids.iter().enumerate() {
        for r in &run.rows {
            let (x, y) = r.target_positions[j];
            writeln!(out, "target_{id},track,{},{},{}", num(r.t), num(x), num(y))?;
        }
    }
    for snap in &run.snapshots {
        for (i, rp) in snap.ranked.iter().enumerate() {
            let role = if Some(i) == snap.best {
                "selected"
            } else if rp.rejected.is_some() {
                "rejected"
            } else {
                "candidate"
            };
            let series = format!("{}@{:.2}:{}:{}", snap.phase.as_str(), snap.t, rp.side.as_str(), rp.n);
            for (k, s) in rp.path.samples.iter().enumerate() {
                let p = rp.path.world_pose(k);
                writeln!(out, "{series},{role},{},{},{}", num(snap.t + s.t), num(p.x), num(p.y))?;
            }
        }
    }
    out.flush()
}

pub fn write_timeseries<W: Write>(out: &mut W, run: &RunOutput) -> io::Result<()> {
    writeln!(out, "t,state,ttc,tte,y_e,psi_e,min_distance")?;
    for r in &run.rows {
        let (y_e, psi_e) = match r.errors {
            Some(e) => (num(e[0]), num(e[2])),
            None => Default::default(),
        };
        let d = r.distances.iter().copied().fold(f64::INFINITY, f64::min);
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(r.t),
            r.state.as_str(),
            num(r.ttc),
            r.tte.map(num).unwrap_or_default(),
            y_e,
            psi_e,
            num(d)
        )?;
    }
    out.flush()
}

pub fn write_actuation<W: Write>(out: &mut W, run: &RunOutput) -> io::Result<()> {
    writeln!(out, "t,r,delta_g,delta_ff,m_z,m_ff,f_fl,f_fr,f_rl,f_rr")?;
    for r in &run.rows {
        let [fl, fr, rl, rr] = r.brakes;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            num(r.t),
            num(r.r),
            num(r.delta_g),
            num(r.delta_ff),
            num(r.m_z),
            num(r.m_ff),
            num(fl),
            num(fr),
            num(rl),
            num(rr)
        )?;
    }
    out.flush()
}
