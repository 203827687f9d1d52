use crate::error::{Error, Result};
use crate::network::{EqlNetwork, Gradient};

/// First and second moment estimates, flattened in parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(net: &EqlNetwork) -> Self {
        let n = net.param_count();
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update. Masked parameters are left untouched and
/// their moments are cleared.
pub fn adam_step(
    net: &mut EqlNetwork,
    grad: &Gradient,
    state: &mut AdamState,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> Result<()> {
    let n = net.param_count();
    if grad.len() != n {
        return Err(Error::dim("gradient length", n, grad.len()));
    }
    if state.m.len() != n || state.v.len() != n {
        return Err(Error::dim("optimizer state length", n, state.m.len()));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    let moments = state.m.iter_mut().zip(state.v.iter_mut());
    for (((theta, masked), g), (m, v)) in net.params_mut().zip(grad.values()).zip(moments) {
        if *masked {
            *m = 0.0;
            *v = 0.0;
            continue;
        }
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        *theta -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{LayerSpec, NetworkSpec};

    fn scalar_net() -> EqlNetwork {
        // Smallest network: 1 identity unit, 1 output. Four parameters.
        let spec = NetworkSpec::new(1, vec![LayerSpec { identity: 1, ..Default::default() }], 1).unwrap();
        EqlNetwork::zeros(spec).unwrap()
    }

    fn grad_with(net: &EqlNetwork, first: f64) -> Gradient {
        let mut g = Gradient::zeros_like(net);
        *g.values_mut().next().unwrap() = first;
        g
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut net = scalar_net();
        net.layers_mut()[0].weights[[0, 0]] = 0.3;
        let before = net.clone();
        let mut st = AdamState::new(&net);
        let g = Gradient::zeros_like(&net);
        adam_step(&mut net, &g, &mut st, 4e-3, 0.9, 0.999, 1e-8).unwrap();
        assert_eq!(net, before);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m̂ = g, v̂ = g², so the step is lr · g / (|g| + ε).
        let mut net = scalar_net();
        let mut st = AdamState::new(&net);
        let g = grad_with(&net, 1.0);
        adam_step(&mut net, &g, &mut st, 4e-3, 0.9, 0.999, 1e-8).unwrap();
        let theta = net.layers()[0].weights[[0, 0]];
        let expect = -4e-3 / (1.0 + 1e-8);
        assert!((theta - expect).abs() < 1e-15, "{theta}");
    }

    #[test]
    fn masked_parameter_is_frozen() {
        let mut net = scalar_net();
        net.layers_mut()[0].weight_mask[[0, 0]] = true;
        let mut st = AdamState::new(&net);
        let g = grad_with(&net, 1.0);
        adam_step(&mut net, &g, &mut st, 4e-3, 0.9, 0.999, 1e-8).unwrap();
        assert_eq!(net.layers()[0].weights[[0, 0]], 0.0);
        assert_eq!(st.m[0], 0.0);
    }

    #[test]
    fn shape_mismatch() {
        let mut net = scalar_net();
        let other = EqlNetwork::zeros(NetworkSpec::new(2, vec![LayerSpec::uniform(1)], 1).unwrap()).unwrap();
        let mut st = AdamState::new(&net);
        let g = Gradient::zeros_like(&other);
        assert!(adam_step(&mut net, &g, &mut st, 1e-3, 0.9, 0.999, 1e-8).is_err());
    }
}
