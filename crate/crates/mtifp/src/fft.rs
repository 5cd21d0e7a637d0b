//! rustfft behind the core [`Transform`] trait.

use std::sync::{Arc, Mutex};

use mtifp_core::fft::{Transform, TransformFactory};
use mtifp_core::C64;
use rustfft::{Fft, FftPlanner};

pub struct RustFft {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
}

impl RustFft {
    pub fn new(n: usize) -> RustFft {
        RustFftFactory::default().plan(n)
    }
}

impl Transform for RustFft {
    fn len(&self) -> usize {
        self.forward.len()
    }
    fn forward(&mut self, data: &mut [C64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }
    fn inverse(&mut self, data: &mut [C64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
    }
}

/// Shares one planner, so plans of equal length are built once.
pub struct RustFftFactory {
    planner: Mutex<FftPlanner<f64>>,
}

impl Default for RustFftFactory {
    fn default() -> Self {
        RustFftFactory { planner: Mutex::new(FftPlanner::new()) }
    }
}

impl TransformFactory for RustFftFactory {
    type Plan = RustFft;

    fn plan(&self, n: usize) -> RustFft {
        let mut p = self.planner.lock().expect("planner lock poisoned");
        let forward = p.plan_fft_forward(n);
        let inverse = p.plan_fft_inverse(n);
        let len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        RustFft { forward, inverse, scratch: vec![C64::new(0.0, 0.0); len] }
    }
}
