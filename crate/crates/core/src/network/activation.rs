use serde::{Deserialize, Serialize};

/// The unit families of an equation learner layer, in slot order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Sin,
    Cos,
    Sigmoid,
    Product,
    Sech,
}

impl Activation {
    pub const ALL: [Activation; 6] = [
        Activation::Identity,
        Activation::Sin,
        Activation::Cos,
        Activation::Sigmoid,
        Activation::Product,
        Activation::Sech,
    ];

    /// Index in the `f0..f5` naming used for ablation labels.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Parses `f3`, `3`, `sigmoid`, `σ` and similar spellings.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim().to_ascii_lowercase();
        if let Some(rest) = s.strip_prefix('f') {
            if let Ok(i) = rest.parse::<usize>() {
                return Self::from_index(i);
            }
        }
        if let Ok(i) = s.parse::<usize>() {
            return Self::from_index(i);
        }
        match s.as_str() {
            "identity" | "id" | "i" => Some(Activation::Identity),
            "sin" => Some(Activation::Sin),
            "cos" => Some(Activation::Cos),
            "sigmoid" | "sigma" | "σ" => Some(Activation::Sigmoid),
            "product" | "prod" | "mul" | "x" | "×" => Some(Activation::Product),
            "sech" => Some(Activation::Sech),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Sin => "sin",
            Activation::Cos => "cos",
            Activation::Sigmoid => "sigmoid",
            Activation::Product => "product",
            Activation::Sech => "sech",
        }
    }
}

/// Logistic function, evaluated without overflow for large `|z|`.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Hyperbolic secant `2 / (e^z + e^-z)`, evaluated without overflow.
#[inline]
pub fn sech(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sech(0.0), 1.0);
        assert!((sigmoid(2.0) - 1.0 / (1.0 + (-2.0f64).exp())).abs() < 1e-15);
        assert!((sech(1.5) - 1.0 / 1.5f64.cosh()).abs() < 1e-15);
    }

    #[test]
    fn no_overflow_far_out() {
        for z in [-800.0, -40.0, 40.0, 800.0] {
            assert!(sigmoid(z).is_finite());
            assert!(sech(z).is_finite());
        }
        assert_eq!(sigmoid(-800.0), 0.0);
        assert_eq!(sigmoid(800.0), 1.0);
        assert_eq!(sech(800.0), 0.0);
    }

    #[test]
    fn parse_spellings() {
        assert_eq!(Activation::parse("f2"), Some(Activation::Cos));
        assert_eq!(Activation::parse("σ"), Some(Activation::Sigmoid));
        assert_eq!(Activation::parse("5"), Some(Activation::Sech));
        assert_eq!(Activation::parse("f9"), None);
    }
}
