//! CSV export of trajectories, laws and reports. RFC-4180-style output:
//! header row, '.' decimal point, no locale, shortest round-trip floats.

use std::io::Write;

use crate::coupling::CoupledTrajectory;
use crate::extremal::ExtremalPath;
use crate::joint::JointRecordLaw;
use crate::scheme::{RecordLawSummary, Trajectory};

pub fn write_trajectory_csv<W: Write>(w: W, t: &Trajectory) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["n", "X", "M", "I", "N"])?;
    for i in 0..t.horizon() {
        wtr.write_record(&[
            (i + 1).to_string(),
            t.values[i].to_string(),
            t.maxima[i].to_string(),
            u8::from(t.indicators[i]).to_string(),
            t.counts[i].to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_coupled_csv<W: Write>(w: W, c: &CoupledTrajectory) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["n", "X", "M", "I", "N", "X_alpha", "M_alpha", "I_alpha", "N_alpha"])?;
    let (a, b) = (&c.observed, &c.scheme);
    for i in 0..a.horizon() {
        wtr.write_record(&[
            (i + 1).to_string(),
            a.values[i].to_string(),
            a.maxima[i].to_string(),
            u8::from(a.indicators[i]).to_string(),
            a.counts[i].to_string(),
            b.values[i].to_string(),
            b.maxima[i].to_string(),
            u8::from(b.indicators[i]).to_string(),
            b.counts[i].to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_pmf_csv<W: Write>(w: W, pmf: &[f64]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["k", "prob"])?;
    for (k, &p) in pmf.iter().enumerate() {
        wtr.write_record(&[k.to_string(), p.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_record_law_csv<W: Write>(w: W, law: &RecordLawSummary) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["n", "p", "E", "V"])?;
    for i in 0..law.p.len() {
        wtr.write_record(&[
            (i + 1).to_string(),
            law.p[i].to_string(),
            law.mean[i].to_string(),
            law.variance[i].to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_extremal_csv<W: Write>(w: W, p: &ExtremalPath) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["t", "level"])?;
    for i in 0..p.times.len() {
        wtr.write_record(&[p.times[i].to_string(), p.levels[i].to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_joint_table_csv<W: Write>(w: W, rows: &[JointRecordLaw]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["m", "n", "P1", "joint_lo", "joint_hi", "ratio_lo", "ratio_hi"])?;
    for r in rows {
        wtr.write_record(&[
            r.m.to_string(),
            r.n.to_string(),
            r.p1.to_string(),
            r.joint.lo.to_string(),
            r.joint.hi.to_string(),
            r.ratio.lo.to_string(),
            r.ratio.hi.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
