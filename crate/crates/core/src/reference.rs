//! Hand-set networks that reproduce generator equations exactly. They serve
//! as oracles for evaluation and extraction.

use crate::error::Result;
use crate::network::{EqlNetwork, Layer, LayerSpec, NetworkSpec};

/// The toy surface on inputs `[γ, s]` with `s = t / 10`, as one hidden
/// layer of one unit per family. The product pair carries the quadratic
/// part, `(−0.024 t − 0.016 γ + 0.064)(t + 4 γ)`; identity and sech units
/// are unused.
pub fn toy_network() -> Result<EqlNetwork> {
    let spec = NetworkSpec::new(2, vec![LayerSpec::uniform(1)], 1)?;
    let mut hidden = Layer::zeros(7, 2);
    let rows: [([f64; 2], f64); 7] = [
        ([0.0, 0.0], 0.0),
        ([-1.4, 0.0], -0.8),
        ([-0.15, 12.0], -1.8),
        ([0.5, 14.0], 0.0),
        ([-0.016, -0.24], 0.064),
        ([4.0, 10.0], 0.0),
        ([0.0, 0.0], 0.0),
    ];
    for (r, (w, b)) in rows.iter().enumerate() {
        hidden.weights[[r, 0]] = w[0];
        hidden.weights[[r, 1]] = w[1];
        hidden.bias[r] = *b;
    }
    let mut out = Layer::zeros(1, 6);
    for (j, w) in [0.0, -0.2, -0.5, 1.3, 1.0, 0.0].into_iter().enumerate() {
        out.weights[[0, j]] = w;
    }
    EqlNetwork::from_layers(spec, vec![hidden, out])
}

/// The open-box task on inputs `[γ, s]` with `s = t / 400`:
/// `y = (0.15 + γ)(1 − cos πs)`, `z = (0.15 + γ) sin πs`, `x = 0`.
pub fn open_box_network() -> Result<EqlNetwork> {
    use std::f64::consts::PI;
    let first = LayerSpec {
        identity: 1,
        sin: 1,
        cos: 1,
        ..Default::default()
    };
    let second = LayerSpec {
        product: 2,
        ..Default::default()
    };
    let spec = NetworkSpec::new(2, vec![first, second], 3)?;
    let mut l0 = Layer::zeros(3, 2);
    l0.weights[[0, 0]] = 1.0;
    l0.bias[0] = 0.15;
    l0.weights[[1, 1]] = PI;
    l0.weights[[2, 1]] = PI;
    // Post slots of the first layer: identity, sin, cos.
    let mut l1 = Layer::zeros(4, 3);
    l1.weights[[0, 0]] = 1.0;
    l1.weights[[1, 2]] = -1.0;
    l1.bias[1] = 1.0;
    l1.weights[[2, 0]] = 1.0;
    l1.weights[[3, 1]] = 1.0;
    let mut l2 = Layer::zeros(3, 2);
    l2.weights[[1, 0]] = 1.0;
    l2.weights[[2, 1]] = 1.0;
    EqlNetwork::from_layers(spec, vec![l0, l1, l2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::toy_function;
    use rand::{Rng, SeedableRng};

    #[test]
    fn toy_matches_surface() {
        let net = toy_network().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let t = rng.random_range(0.0..10.0);
            let g = rng.random_range(0.0..3.0);
            let y = net.forward(&[g, t / 10.0]).unwrap()[0];
            assert!((y - toy_function(t, g)).abs() < 1e-12);
        }
        assert!((net.forward(&[0.0, 0.0]).unwrap()[0] - 0.9071).abs() < 1e-4);
    }

    #[test]
    fn open_box_matches_law() {
        let net = open_box_network().unwrap();
        for g in [0.06, 0.36, 0.6] {
            let end = net.forward(&[g, 1.0]).unwrap();
            assert!(end[0] == 0.0 && (end[1] - 2.0 * (0.15 + g)).abs() < 1e-12 && end[2].abs() < 1e-12);
        }
        let mid = net.forward(&[0.36, 0.5]).unwrap();
        assert!((mid[1] - 0.51).abs() < 1e-12 && (mid[2] - 0.51).abs() < 1e-12);
    }
}
