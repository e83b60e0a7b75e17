//! Per-time-step diagnostics of a run and their CSV form.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectral::{gevrey_norm, sobolev_norm, GevreyParams, SpectralField};

pub const RUN_COLUMNS: [&str; 8] = [
    "t",
    "W_t",
    "phi_t",
    "l2_norm",
    "sobolev_norm_sigma_s",
    "gevrey_norm",
    "div_residual",
    "overflow_flag",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub t: f64,
    #[serde(rename = "W_t")]
    pub w_t: f64,
    pub phi_t: f64,
    pub l2_norm: f64,
    pub sobolev_norm_sigma_s: f64,
    /// Gevrey norm at radius `φ(t) + δ`; NaN when the weight would overflow.
    pub gevrey_norm: f64,
    pub div_residual: f64,
    pub overflow_flag: bool,
}

impl RunRow {
    pub fn measure(u: &SpectralField, t: f64, w_t: f64, params: &GevreyParams) -> Self {
        let (gevrey, overflow) =
            match gevrey_norm(u, params.shifted_radius(t), params.sigma, params.s) {
                Ok(g) => (g, false),
                Err(_) => (f64::NAN, true),
            };
        RunRow {
            t,
            w_t,
            phi_t: params.radius(t),
            l2_norm: u.l2_norm(),
            sobolev_norm_sigma_s: sobolev_norm(u, params.sigma * params.s),
            gevrey_norm: gevrey,
            div_residual: u.divergence_residual(),
            overflow_flag: overflow,
        }
    }

    fn fields(&self) -> [String; 8] {
        [
            fmt_f64(self.t),
            fmt_f64(self.w_t),
            fmt_f64(self.phi_t),
            fmt_f64(self.l2_norm),
            fmt_f64(self.sobolev_norm_sigma_s),
            fmt_f64(self.gevrey_norm),
            fmt_f64(self.div_residual),
            u8::from(self.overflow_flag).to_string(),
        ]
    }
}

/// Shortest round-trip scientific notation, e.g. `1.5e-3`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:e}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    /// A step was rejected or a weight overflowed; rows stop early.
    Terminated,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub rows: Vec<RunRow>,
    pub status: RunStatus,
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn new(rows: Vec<RunRow>) -> Self {
        RunRecord {
            config_hash: String::new(),
            rows,
            status: RunStatus::Ok,
            wall_time_s: 0.0,
        }
    }

    pub fn write_csv(&self, out: impl std::io::Write) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(RUN_COLUMNS)?;
        for row in &self.rows {
            w.write_record(row.fields())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{beltrami_z, WaveLattice};

    #[test]
    fn csv_layout() {
        let p = GevreyParams::new(1.8, 1.0, 1.0, 0.25, 0.0).unwrap();
        let b = beltrami_z(WaveLattice::unit(2).unwrap());
        let rec = RunRecord::new(vec![RunRow::measure(&b, 0.0, 0.0, &p)]);
        let text = String::from_utf8(rec.to_csv_bytes().unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), RUN_COLUMNS.join(","));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "0e0");
        assert_eq!(row[3].parse::<f64>().unwrap(), b.l2_norm());
        assert_eq!(row[7], "0");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn overflow_is_flagged() {
        let p = GevreyParams::new(1.8, 1.0, 100.0, 0.0, 0.0).unwrap();
        let b = beltrami_z(WaveLattice::unit(8).unwrap());
        let row = RunRow::measure(&b, 0.0, 0.0, &p);
        assert!(row.overflow_flag && row.gevrey_norm.is_nan());
    }

    #[test]
    fn float_format_roundtrips() {
        for x in [0.1, -2.5e-300, 1.0 / 3.0, 6.02e23] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
