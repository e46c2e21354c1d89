//! Level-1 (square-law) MOSFET without body effect.

/// Temperature at which model card values are specified (°C).
pub const REFERENCE_TEMP_C: f64 = 27.0;

const KELVIN: f64 = 273.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Nmos,
    Pmos,
}

impl Polarity {
    pub fn keyword(self) -> &'static str {
        match self {
            Polarity::Nmos => "NMOS",
            Polarity::Pmos => "PMOS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Cutoff,
    Triode,
    Saturation,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Cutoff => "cutoff",
            Region::Triode => "triode",
            Region::Saturation => "saturation",
        }
    }
}

/// Model card values merged with instance geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosfetParams {
    pub polarity: Polarity,
    /// µ·Cox (A/V²).
    pub kp: f64,
    /// Zero-bias threshold (V); negative for PMOS.
    pub vto: f64,
    pub lambda: f64,
    /// Slope factor used only by [`triode_form_current`].
    pub n_n: f64,
    /// Gate oxide capacitance per area (F/m²).
    pub coxa: f64,
    /// Overlap capacitances per gate width (F/m).
    pub cgso: f64,
    pub cgdo: f64,
    /// Threshold temperature coefficient (V/°C).
    pub tcv: f64,
    /// Mobility temperature exponent.
    pub bex: f64,
    pub w: f64,
    pub l: f64,
}

impl MosfetParams {
    /// Generic 180 nm-class card for the given polarity, with zero geometry.
    pub fn default_card(polarity: Polarity) -> Self {
        let (kp, vto, lambda) = match polarity {
            Polarity::Nmos => (170e-6, 0.45, 0.06),
            Polarity::Pmos => (60e-6, -0.45, 0.08),
        };
        MosfetParams {
            polarity,
            kp,
            vto,
            lambda,
            n_n: 1.0,
            coxa: 8.5e-3,
            cgso: 0.35e-9,
            cgdo: 0.35e-9,
            tcv: 1e-3,
            bex: -1.5,
            w: 0.0,
            l: 0.0,
        }
    }

    pub fn with_geometry(mut self, w: f64, l: f64) -> Self {
        self.w = w;
        self.l = l;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.kp > 0.0) {
            return Err(format!("KP must be positive (got {})", self.kp));
        }
        if !(self.w > 0.0 && self.l > 0.0) {
            return Err(format!("W and L must be positive (got W={}, L={})", self.w, self.l));
        }
        if !(self.lambda >= 0.0) {
            return Err(format!("LAMBDA must be non-negative (got {})", self.lambda));
        }
        if !(self.bex < 0.0) {
            return Err(format!("BEX must be negative (got {})", self.bex));
        }
        Ok(())
    }

    pub fn aspect(&self) -> f64 {
        self.w / self.l
    }

    /// KP at `temp_c`.
    pub fn kp_at(&self, temp_c: f64) -> f64 {
        let tk = temp_c + KELVIN;
        self.kp * (tk / (REFERENCE_TEMP_C + KELVIN)).powf(self.bex)
    }

    /// Threshold magnitude at `temp_c`; shrinks by TCV per degree.
    pub fn vth_magnitude_at(&self, temp_c: f64) -> f64 {
        self.vto.abs() - self.tcv * (temp_c - REFERENCE_TEMP_C)
    }

    /// Signed threshold at `temp_c`.
    pub fn vto_at(&self, temp_c: f64) -> f64 {
        match self.polarity {
            Polarity::Nmos => self.vth_magnitude_at(temp_c),
            Polarity::Pmos => -self.vth_magnitude_at(temp_c),
        }
    }

    /// Bias-independent (C_gs, C_gd).
    pub fn capacitances(&self) -> (f64, f64) {
        let cgs = 2.0 / 3.0 * self.coxa * self.w * self.l + self.cgso * self.w;
        let cgd = self.cgdo * self.w;
        (cgs, cgd)
    }
}

/// Drain current and its partial derivatives, in the device's own terminal
/// orientation: `id` flows into the drain, `gm = ∂id/∂vgs`, `gds = ∂id/∂vds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosfetEval {
    pub id: f64,
    pub gm: f64,
    pub gds: f64,
    pub region: Region,
}

/// Forward-mode n-channel equations (vds ≥ 0).
fn forward(beta: f64, vth: f64, lambda: f64, vgs: f64, vds: f64) -> MosfetEval {
    let vov = vgs - vth;
    if vov <= 0.0 {
        return MosfetEval {
            id: 0.0,
            gm: 0.0,
            gds: 0.0,
            region: Region::Cutoff,
        };
    }
    let clm = 1.0 + lambda * vds;
    if vds < vov {
        let core = vov * vds - 0.5 * vds * vds;
        MosfetEval {
            id: beta * core * clm,
            gm: beta * vds * clm,
            gds: beta * ((vov - vds) * clm + lambda * core),
            region: Region::Triode,
        }
    } else {
        let core = 0.5 * vov * vov;
        MosfetEval {
            id: beta * core * clm,
            gm: beta * vov * clm,
            gds: beta * core * lambda,
            region: Region::Saturation,
        }
    }
}

/// n-channel equations for either sign of vds; a negative vds swaps the
/// roles of drain and source.
fn nchannel(beta: f64, vth: f64, lambda: f64, vgs: f64, vds: f64) -> MosfetEval {
    if vds >= 0.0 {
        forward(beta, vth, lambda, vgs, vds)
    } else {
        let r = forward(beta, vth, lambda, vgs - vds, -vds);
        MosfetEval {
            id: -r.id,
            gm: -r.gm,
            gds: r.gm + r.gds,
            region: r.region,
        }
    }
}

/// Level-1 DC evaluation at terminal voltages `vgs`, `vds` and `temp_c`.
/// PMOS devices are handled by sign symmetry, so `id` is negative for a
/// conducting p-channel device.
pub fn mosfet_dc(params: &MosfetParams, vgs: f64, vds: f64, temp_c: f64) -> MosfetEval {
    let beta = params.kp_at(temp_c) * params.aspect();
    let vth = params.vth_magnitude_at(temp_c);
    match params.polarity {
        Polarity::Nmos => nchannel(beta, vth, params.lambda, vgs, vds),
        Polarity::Pmos => {
            let r = nchannel(beta, vth, params.lambda, -vgs, -vds);
            MosfetEval {
                id: -r.id,
                ..r
            }
        }
    }
}

/// Idealized triode expression µ·Cox·(W/L)·Vds·(V_G − V_T − (n/2)·Vds) for a
/// grounded-source n-channel device, at the card's reference temperature.
pub fn triode_form_current(params: &MosfetParams, v_gate: f64, vds: f64) -> f64 {
    params.kp * params.aspect() * vds * (v_gate - params.vto - 0.5 * params.n_n * vds)
}
