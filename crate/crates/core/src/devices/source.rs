use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sine {
    pub offset: f64,
    pub amplitude: f64,
    pub frequency: f64,
}

/// Independent source description: DC value, optional sinusoid, and an
/// optional small-signal AC magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SourceWaveform {
    pub dc: Option<f64>,
    pub sin: Option<Sine>,
    pub ac: Option<f64>,
}

impl SourceWaveform {
    pub fn dc(value: f64) -> Self {
        SourceWaveform {
            dc: Some(value),
            ..Default::default()
        }
    }

    pub fn sine(offset: f64, amplitude: f64, frequency: f64) -> Self {
        SourceWaveform {
            dc: None,
            sin: Some(Sine {
                offset,
                amplitude,
                frequency,
            }),
            ac: None,
        }
    }

    /// Value used for operating-point analysis.
    pub fn dc_value(&self) -> f64 {
        self.dc
            .or(self.sin.map(|s| s.offset))
            .unwrap_or(0.0)
    }
}

/// Instantaneous source value at time `t` (seconds).
pub fn source_value(waveform: &SourceWaveform, t: f64) -> f64 {
    match waveform.sin {
        Some(s) => s.offset + s.amplitude * (2.0 * PI * s.frequency * t).sin(),
        None => waveform.dc_value(),
    }
}
