//! Dense LU solve with partial pivoting (nalgebra), plus a pivot check that
//! names the unknown whose column collapsed.

use nalgebra::{ComplexField, DVector};

use super::mna::MnaSystem;
use crate::error::{Error, Result};

/// Pivots below this fraction of the largest matrix entry count as zero.
const PIVOT_FLOOR: f64 = 1e-14;

pub fn solve_linear<T: ComplexField<RealField = f64> + Copy>(
    system: &MnaSystem<T>,
) -> Result<DVector<T>> {
    let n = system.dimension();
    if n == 0 {
        return Ok(DVector::zeros(0));
    }
    let scale = system
        .matrix
        .iter()
        .map(|v| v.modulus())
        .fold(0.0_f64, f64::max);
    let lu = system.matrix.clone().lu();
    let u = lu.u();
    let floor = PIVOT_FLOOR * scale;
    // Row pivoting leaves columns in place, so a collapsed pivot in column j
    // points at unknown j.
    if let Some(j) = (0..n).find(|&j| !(u[(j, j)].modulus() > floor)) {
        return Err(Error::Singular {
            node: system.layout.describe(j).to_owned(),
        });
    }
    lu.solve(&system.rhs).ok_or_else(|| Error::Singular {
        node: system.layout.describe(n - 1).to_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{Circuit, ElementKind};
    use crate::solver::{stamp_linear, Layout, StampMode, StampState};

    fn solve(text: &str) -> (Circuit, DVector<f64>) {
        let c = Circuit::from_source(text, "t").unwrap();
        let mut sys = MnaSystem::<f64>::new(Layout::new(&c));
        let sources: Vec<f64> = c
            .elements()
            .iter()
            .map(|e| match &e.kind {
                ElementKind::VoltageSource { waveform, .. } | ElementKind::CurrentSource { waveform, .. } => {
                    waveform.dc_value()
                }
                _ => 0.0,
            })
            .collect();
        let mem = vec![0.0; c.elements().len()];
        let state = StampState {
            memristor_x: &mem,
            source_values: &sources,
        };
        stamp_linear(&c, &mut sys, StampMode::Real, &state).unwrap();
        let x = solve_linear(&sys).unwrap();
        let residual = (&sys.matrix * &x - &sys.rhs).amax();
        assert!(residual <= 1e-9 * sys.rhs.amax());
        (c, x)
    }

    fn v(c: &Circuit, x: &DVector<f64>, node: &str) -> f64 {
        x[c.node(node).unwrap().0 - 1]
    }

    #[test]
    fn equal_divider_midpoint() {
        let (c, x) = solve("d\nV1 a 0 1\nR1 a m 1k\nR2 m 0 1k\n");
        assert!((v(&c, &x, "m") - 0.5).abs() < 1e-12);
        assert_eq!(x.len(), 3);
    }

    #[test]
    fn balanced_bridge() {
        let (c, x) = solve("b\nV1 t 0 1\nR1 t a 1k\nR2 a 0 2k\nR3 t b 3k\nR4 b 0 6k\nR5 a b 5k\n");
        assert!((v(&c, &x, "a") - v(&c, &x, "b")).abs() < 1e-12);
        assert!((v(&c, &x, "a") - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn three_stage_ladder() {
        let (c, x) = solve("l\nV1 in 0 1\nR1 in a 1k\nR2 a 0 1k\nR3 a b 1k\nR4 b 0 1k\nR5 b c 1k\nR6 c 0 1k\n");
        for (node, expect) in [("a", 5.0 / 13.0), ("b", 2.0 / 13.0), ("c", 1.0 / 13.0)] {
            assert!((v(&c, &x, node) / expect - 1.0).abs() < 1e-12, "{node}");
        }
    }

    #[test]
    fn singular_system_names_column() {
        let (c, _) = solve("d\nV1 a 0 1\nR1 a 0 1k\n");
        let mut sys = MnaSystem::<f64>::new(Layout::new(&c));
        sys.add(Some(1), Some(0), 1.0);
        let err = solve_linear(&sys).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }
}
