//! Energies, volume errors and CSV output of per-step diagnostics.

use std::io::Write;

use crate::cluster::{Cluster, EnergyModel, Point};
use crate::error::{Error, Result};
use crate::geometry::{gather, orientation_vector};

#[derive(Clone, Debug, PartialEq)]
pub struct StepDiagnostics {
    pub t: f64,
    pub energy_surface: f64,
    pub energy_contact: f64,
    pub energy_total: f64,
    pub volumes: Vec<f64>,
    pub v_delta: f64,
    pub mesh_ratio: f64,
    pub picard_iters: usize,
    /// Largest vertex displacement of the step.
    pub max_displacement: f64,
}

/// Total (possibly anisotropic) surface energy of the configuration `pos`.
pub fn surface_energy(cluster: &Cluster, pos: &[Vec<Point>]) -> f64 {
    let d = cluster.dim;
    let fact = if d == 3 { 0.5 } else { 1.0 };
    let mut total = 0.0;
    for (s, patch) in cluster.patches.iter().enumerate() {
        let mut e = 0.0;
        for simplex in &patch.simplices {
            let (q, n) = gather(&pos[s], simplex);
            let a = orientation_vector(&q[..n]);
            e += match &cluster.energy_model {
                EnergyModel::Isotropic => a.norm(),
                EnergyModel::Anisotropic(an) => an.gamma(&a),
            };
        }
        let weight = match cluster.energy_model {
            EnergyModel::Isotropic => patch.sigma,
            EnergyModel::Anisotropic(_) => 1.0,
        };
        total += weight * fact * e;
    }
    total
}

/// `max_l |vol_l - vol0_l| / vol0_l`.
pub fn relative_volume_error(volumes: &[f64], initial: &[f64]) -> Result<f64> {
    if volumes.len() != initial.len() {
        return Err(Error::Domain("volume vectors differ in length".into()));
    }
    let mut out: f64 = 0.0;
    for (l, (v, v0)) in volumes.iter().zip(initial).enumerate() {
        if *v0 == 0.0 {
            return Err(Error::Domain(format!("initial volume of region {l} is zero")));
        }
        out = out.max(((v - v0) / v0).abs());
    }
    Ok(out)
}

/// Format a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one CSV row per step.
pub struct CsvWriter<W: Write> {
    out: W,
    regions: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, regions: usize) -> Result<Self> {
        let mut header = vec!["t", "energy_surface", "energy_contact", "energy_total"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        header.extend((1..=regions).map(|l| format!("vol_{l}")));
        header.extend(["v_delta", "mesh_ratio", "picard_iters"].map(String::from));
        out.write_all(header.join(",").as_bytes())?;
        out.write_all(b"\n")?;
        Ok(Self { out, regions })
    }

    pub fn write(&mut self, d: &StepDiagnostics) -> Result<()> {
        if d.volumes.len() != self.regions {
            return Err(Error::Domain("diagnostics have the wrong number of regions".into()));
        }
        let mut fields = vec![fmt_f64(d.t), fmt_f64(d.energy_surface), fmt_f64(d.energy_contact), fmt_f64(d.energy_total)];
        fields.extend(d.volumes.iter().map(|v| fmt_f64(*v)));
        fields.push(fmt_f64(d.v_delta));
        fields.push(fmt_f64(d.mesh_ratio));
        fields.push(d.picard_iters.to_string());
        self.out.write_all(fields.join(",").as_bytes())?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_error_requires_nonzero_initial() {
        assert!(relative_volume_error(&[1.0], &[0.0]).is_err());
        let e = relative_volume_error(&[1.1, 1.9], &[1.0, 2.0]).unwrap();
        assert!((e - 0.1).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let mut w = CsvWriter::new(Vec::new(), 2).unwrap();
        w.write(&StepDiagnostics {
            t: 0.5,
            energy_surface: 1.0,
            energy_contact: 0.0,
            energy_total: 1.0,
            volumes: vec![1.0, 2.0],
            v_delta: 0.0,
            mesh_ratio: 1.5,
            picard_iters: 3,
            max_displacement: 0.0,
        })
        .unwrap();
        let s = String::from_utf8(w.into_inner()).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "t,energy_surface,energy_contact,energy_total,vol_1,vol_2,v_delta,mesh_ratio,picard_iters");
        let cells: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(cells.len(), 9);
        assert_eq!(cells[0], "5.0000000000000000e-1");
        assert_eq!(cells[8], "3");
        assert_eq!(cells[0].parse::<f64>().unwrap(), 0.5);
        assert!(!s.contains('\r'));
    }
}
