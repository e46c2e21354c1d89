//! Device constitutive equations.

mod memristor;
mod mosfet;
mod source;

pub use memristor::{memristance, memristor_state_rate, window, MemristorParams};
pub use mosfet::{
    mosfet_dc, triode_form_current, MosfetEval, MosfetParams, Polarity, Region, REFERENCE_TEMP_C,
};
pub use source::{source_value, Sine, SourceWaveform};
