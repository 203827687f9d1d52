use super::expr::{default_var_names, Expression, Node};
use crate::error::{Error, Result};
use crate::network::{Activation, EqlNetwork, Layer};

/// One expression per output dimension, over the default input names.
pub fn extract(net: &EqlNetwork) -> Vec<Expression> {
    extract_nodes(net)
        .into_iter()
        .map(|root| Expression {
            vars: default_var_names(net.input_dim()),
            root,
        })
        .collect()
}

/// Like [`extract`] with caller-supplied input names.
pub fn extract_with_vars(net: &EqlNetwork, vars: &[String]) -> Result<Vec<Expression>> {
    if vars.len() != net.input_dim() {
        return Err(Error::dim("variable names", net.input_dim(), vars.len()));
    }
    Ok(extract_nodes(net)
        .into_iter()
        .map(|root| Expression {
            vars: vars.to_vec(),
            root,
        })
        .collect())
}

fn extract_nodes(net: &EqlNetwork) -> Vec<Node> {
    let layers = net.layers();
    let hidden = layers.len() - 1;
    // The first layer acts on raw inputs, so its rows are affine maps.
    let mut pre: Vec<Node> = (0..layers[0].rows())
        .map(|r| Node::Affine {
            weights: layers[0].weights.row(r).to_vec(),
            bias: layers[0].bias[r],
        })
        .collect();
    for l in 0..hidden {
        let post = activate(net, l, &pre);
        pre = combine(&layers[l + 1], &post);
    }
    pre
}

fn activate(net: &EqlNetwork, layer: usize, pre: &[Node]) -> Vec<Node> {
    net.hidden_units(layer)
        .iter()
        .map(|u| {
            let a = || Box::new(pre[u.input].clone());
            match u.kind {
                Activation::Identity => pre[u.input].clone(),
                Activation::Sin => Node::Sin(a()),
                Activation::Cos => Node::Cos(a()),
                Activation::Sigmoid => Node::Sigmoid(a()),
                Activation::Sech => Node::Sech(a()),
                Activation::Product => Node::Product(vec![pre[u.input].clone(), pre[u.input + 1].clone()]),
            }
        })
        .collect()
}

/// `W·post + b` row by row; zero weights drop their term, unit weights
/// skip the scaling, single-term sums collapse.
fn combine(layer: &Layer, post: &[Node]) -> Vec<Node> {
    (0..layer.rows())
        .map(|r| {
            let mut terms = Vec::new();
            for (j, &w) in layer.weights.row(r).iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                terms.push(if w == 1.0 {
                    post[j].clone()
                } else {
                    Node::scaled(w, post[j].clone())
                });
            }
            let b = layer.bias[r];
            if b != 0.0 {
                terms.push(Node::Constant(b));
            }
            match terms.len() {
                0 => Node::Constant(0.0),
                1 => terms.pop().expect("one term"),
                _ => Node::Sum(terms),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{LayerSpec, NetworkSpec};

    #[test]
    fn identity_net_is_t() {
        let spec = NetworkSpec::new(1, vec![LayerSpec { identity: 1, ..Default::default() }], 1).unwrap();
        let mut net = EqlNetwork::zeros(spec).unwrap();
        net.layers_mut()[0].weights[[0, 0]] = 1.0;
        net.layers_mut()[1].weights[[0, 0]] = 1.0;
        let e = extract(&net);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].to_text(), "t");
        assert_eq!(e[0].evaluate(&[3.5]).unwrap(), 3.5);
    }

    #[test]
    fn masked_weight_drops_term() {
        let spec = NetworkSpec::new(2, vec![LayerSpec::uniform(1)], 1).unwrap();
        let mut net = EqlNetwork::init(spec, 4).unwrap();
        let count = |n: &EqlNetwork| {
            let mut k = 0;
            extract(n)[0].root.visit(&mut |x| k += matches!(x, Node::Sin(_)) as usize);
            k
        };
        assert_eq!(count(&net), 1);
        net.layers_mut()[1].weight_mask[[0, 1]] = true;
        net.enforce_mask();
        assert_eq!(count(&net), 0);
    }

    #[test]
    fn wrong_name_count() {
        let spec = NetworkSpec::new(2, vec![LayerSpec::uniform(1)], 1).unwrap();
        let net = EqlNetwork::init(spec, 4).unwrap();
        assert!(extract_with_vars(&net, &["t".to_string()]).is_err());
    }
}
