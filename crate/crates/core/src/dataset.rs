//! Labelled feature vectors shared by the classifiers.

use crate::features::FeatureVector;
use crate::signal_io::Label;

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub x: Vec<f64>,
    pub label: Label,
}

impl Example {
    pub fn new(x: Vec<f64>, label: Label) -> Example {
        Example { x, label }
    }
}

impl From<&FeatureVector> for Example {
    fn from(fv: &FeatureVector) -> Example {
        Example {
            x: fv.values.to_vec(),
            label: fv.label,
        }
    }
}

pub fn examples_from_features(rows: &[FeatureVector]) -> Vec<Example> {
    rows.iter().map(Example::from).collect()
}
