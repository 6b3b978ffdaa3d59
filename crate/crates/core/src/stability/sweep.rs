use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{verify_condition_d, StabilityReport, Verdict, VerifyOptions};
use crate::params::{build_params, q_max, DetonationParams, ParamsError};

fn default_u_i_fraction() -> f64 {
    0.5
}

/// Cartesian grid of parameter points. `q` is given as a fraction of
/// `q_max(u_plus, u_star)` and the ignition threshold as a fraction of the
/// way from `u_plus` to `u_minus`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub u_plus: Vec<f64>,
    pub u_star: Vec<f64>,
    pub q_fraction: Vec<f64>,
    pub k: Vec<f64>,
    #[serde(default = "default_u_i_fraction")]
    pub u_i_fraction: f64,
}

impl SweepSpec {
    /// 27 points around the first reference set.
    pub fn reference() -> Self {
        SweepSpec {
            u_plus: vec![0.0, 0.2, 0.5],
            u_star: vec![2.0],
            q_fraction: vec![0.1, 0.5, 0.9],
            k: vec![0.1, 1.0, 10.0],
            u_i_fraction: 0.5,
        }
    }

    pub fn len(&self) -> usize {
        self.u_plus.len() * self.u_star.len() * self.q_fraction.len() * self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in row-major order, `k` varying fastest.
    pub fn points(&self) -> Vec<(f64, f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for &up in &self.u_plus {
            for &us in &self.u_star {
                for &qf in &self.q_fraction {
                    for &k in &self.k {
                        out.push((up, us, qf, k));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub u_plus: f64,
    pub u_star: f64,
    pub q_fraction: f64,
    pub k: f64,
    pub report: Option<StabilityReport>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn verdict(&self) -> Option<Verdict> {
        self.report.as_ref().map(|r| r.verdict)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub stable: usize,
    pub total: usize,
}

impl SweepTable {
    pub fn all_stable(&self) -> bool {
        self.stable == self.total
    }
}

/// Resolves one grid point to a parameter set.
pub fn sweep_point(
    u_plus: f64,
    u_star: f64,
    q_fraction: f64,
    k: f64,
    u_i_fraction: f64,
) -> Result<DetonationParams, ParamsError> {
    let q = q_fraction * q_max(u_plus, u_star)?;
    let s = 0.5 * (u_plus + u_star);
    let rad = (s - u_plus).powi(2) - 2.0 * q * s;
    // Out-of-range q still yields a finite threshold so the q check reports it.
    let u_minus = if rad > 0.0 { s + rad.sqrt() } else { s };
    let u_i = u_plus + u_i_fraction * (u_minus - u_plus);
    build_params(u_plus, u_star, q, k, u_i)
}

/// Verifies every grid point in parallel; rows come back in grid order.
pub fn parameter_sweep(spec: &SweepSpec, opts: &VerifyOptions) -> SweepTable {
    let rows: Vec<SweepRow> = spec
        .points()
        .into_par_iter()
        .enumerate()
        .map(|(index, (u_plus, u_star, q_fraction, k))| {
            let (report, error) =
                match sweep_point(u_plus, u_star, q_fraction, k, spec.u_i_fraction) {
                    Ok(p) => (Some(verify_condition_d(&p, opts)), None),
                    Err(e) => (None, Some(e.to_string())),
                };
            SweepRow {
                index,
                u_plus,
                u_star,
                q_fraction,
                k,
                report,
                error,
            }
        })
        .collect();
    let stable = rows
        .iter()
        .filter(|r| r.verdict() == Some(Verdict::StableConditionD))
        .count();
    SweepTable {
        total: rows.len(),
        stable,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_grid() {
        let spec = SweepSpec {
            u_plus: vec![],
            ..SweepSpec::reference()
        };
        let t = parameter_sweep(&spec, &VerifyOptions::default());
        assert!(t.rows.is_empty());
        assert_eq!(t.total, 0);
    }

    #[test]
    fn inadmissible_point_isolated() {
        let spec = SweepSpec {
            u_plus: vec![0.0],
            u_star: vec![2.0],
            q_fraction: vec![0.5, 1.2],
            k: vec![1.0],
            u_i_fraction: 0.5,
        };
        let t = parameter_sweep(&spec, &VerifyOptions::default());
        assert_eq!(t.total, 2);
        assert_eq!(t.rows[0].verdict(), Some(Verdict::StableConditionD));
        assert!(t.rows[1].report.is_none());
        assert!(t.rows[1].error.as_ref().unwrap().contains("heat release"));
        assert_eq!(t.stable, 1);
    }

    #[test]
    fn grid_order_is_k_fastest() {
        let pts = SweepSpec::reference().points();
        assert_eq!(pts.len(), 27);
        assert_eq!(pts[0], (0.0, 2.0, 0.1, 0.1));
        assert_eq!(pts[1], (0.0, 2.0, 0.1, 1.0));
        assert_eq!(pts[3], (0.0, 2.0, 0.5, 0.1));
        assert_eq!(pts[26], (0.5, 2.0, 0.9, 10.0));
    }

    #[test]
    fn sweep_point_reproduces_p0() {
        // q_max(0, 2) = 0.5, so a 0.6 fraction gives q = 0.3.
        let p = sweep_point(0.0, 2.0, 0.6, 1.0, 0.5).unwrap();
        assert!((p.q() - 0.3).abs() < 1e-15);
        assert!((p.u_i() - 0.5 * p.u_minus()).abs() < 1e-15);
    }
}
