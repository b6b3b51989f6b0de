//! Seeded fixtures shared by the benchmarks.

use slope_core::{
    gen_design, gen_noise, gen_signal, gen_weights, DesignKind, DesignSpec, LinearModelInstance, SignalKind,
    SignalSpec, WeightKind, WeightSpec, WeightVector,
};

/// A dense prox input of length `p` with BH weights.
pub fn prox_input(p: usize, seed: u64) -> (Vec<f64>, WeightVector) {
    let u: Vec<f64> = gen_noise(p, 2.0, seed).expect("valid noise spec");
    let w = gen_weights(&WeightSpec::new(WeightKind::Bh, p)).expect("valid weight spec");
    (u, w)
}

/// Gaussian design with a 10%-sparse signal and unit noise.
pub fn instance(n: usize, p: usize, seed: u64) -> LinearModelInstance {
    let a = gen_design(&DesignSpec::new(DesignKind::IidGaussian, n, p), seed).expect("valid design spec");
    let x = gen_signal(&SignalSpec::new(SignalKind::BernoulliScaled, 0.1, p), seed).expect("valid signal spec");
    let z = gen_noise(n, 1.0, seed).expect("valid noise spec");
    LinearModelInstance::from_parts(a, x, z, 1.0).expect("consistent dimensions")
}

pub fn bh_weights(p: usize) -> WeightVector {
    gen_weights(&WeightSpec::new(WeightKind::Bh, p)).expect("valid weight spec")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_requested_shapes() {
        let (u, w) = prox_input(17, 1);
        assert_eq!((u.len(), w.p()), (17, 17));
        let inst = instance(30, 20, 1);
        assert_eq!((inst.n(), inst.p()), (30, 20));
    }
}
