//! HP linear ion-drift memristor.

/// Memristor parameters. `x` is the normalized doped-region width: `x = 1`
/// is fully ON (`ron`), `x = 0` fully OFF (`roff`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemristorParams {
    pub ron: f64,
    pub roff: f64,
    /// Film thickness (m).
    pub d: f64,
    /// Dopant mobility (m²/(s·V)).
    pub uv: f64,
    pub x0: f64,
    /// Joglekar window exponent; 0 disables the window.
    pub p: u32,
}

impl Default for MemristorParams {
    fn default() -> Self {
        MemristorParams {
            ron: 100.0,
            roff: 10e3,
            d: 10e-9,
            uv: 1e-14,
            x0: 0.0,
            p: 0,
        }
    }
}

impl MemristorParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.ron > 0.0 && self.ron < self.roff) {
            return Err(format!(
                "memristor requires 0 < RON < ROFF (got RON={}, ROFF={})",
                self.ron, self.roff
            ));
        }
        if !(self.d > 0.0) || !(self.uv > 0.0) {
            return Err("memristor requires D > 0 and UV > 0".into());
        }
        if !(0.0..=1.0).contains(&self.x0) {
            return Err(format!("memristor X0={} outside [0, 1]", self.x0));
        }
        Ok(())
    }

    /// Drift coefficient UV·RON/D² (1/(A·s)).
    pub fn drift_coefficient(&self) -> f64 {
        self.uv * self.ron / (self.d * self.d)
    }
}

/// Resistance at state `x`.
///
/// Panics if `x` is outside `[0, 1]`.
pub fn memristance(params: &MemristorParams, x: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x), "memristor state {x} outside [0, 1]");
    params.ron * x + params.roff * (1.0 - x)
}

pub fn window(p: u32, x: f64) -> f64 {
    if p == 0 {
        1.0
    } else {
        1.0 - (2.0 * x - 1.0).powi(2 * p as i32)
    }
}

/// dx/dt for a current `i` (A) flowing from the positive terminal.
pub fn memristor_state_rate(params: &MemristorParams, x: f64, i: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x), "memristor state {x} outside [0, 1]");
    params.drift_coefficient() * i * window(params.p, x)
}
