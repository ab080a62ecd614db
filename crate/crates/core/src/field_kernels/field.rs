use num_complex::Complex64;

/// Complex field amplitudes, one per grid channel (node, polarization).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeField {
    pub amplitudes: Vec<Complex64>,
}

impl ModeField {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        debug_assert!(amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self { amplitudes }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            amplitudes: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}
