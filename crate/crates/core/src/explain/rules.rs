use std::fmt;

use serde::{Deserialize, Serialize};

use super::cart::{CartNode, ExplanationTree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: String,
    /// `true` for `>=`, `false` for `<`.
    pub at_least: bool,
    pub threshold: f64,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.at_least { ">=" } else { "<" };
        write!(f, "phi({}) {op} {}", self.feature, short(self.threshold))
    }
}

/// One root-to-leaf path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub class: u8,
    pub purity: f64,
    pub coverage: usize,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("IF ")?;
        if self.conditions.is_empty() {
            f.write_str("TRUE")?;
        }
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{c}")?;
        }
        write!(
            f,
            " THEN class={} (purity {:.2}, coverage {})",
            self.class, self.purity, self.coverage
        )
    }
}

fn short(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = (3 - x.abs().log10().floor() as i32).max(0) as usize;
    let s = format!("{x:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Leaves in left-to-right order.
pub fn extract_rules(t: &ExplanationTree) -> Vec<Rule> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    walk(&t.root, &t.feature_names, &mut path, &mut out);
    out
}

fn walk(node: &CartNode, names: &[String], path: &mut Vec<Condition>, out: &mut Vec<Rule>) {
    match node {
        CartNode::Leaf { counts, class } => {
            let coverage = counts[0] + counts[1];
            out.push(Rule {
                conditions: path.clone(),
                class: *class,
                purity: counts[*class as usize] as f64 / coverage.max(1) as f64,
                coverage,
            });
        }
        CartNode::Split { feature, threshold, left, right, .. } => {
            for (child, at_least) in [(left, false), (right, true)] {
                path.push(Condition {
                    feature: names[*feature].clone(),
                    at_least,
                    threshold: *threshold,
                });
                walk(child, names, path, out);
                path.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::CartConfig;

    fn tree(root: CartNode) -> ExplanationTree {
        ExplanationTree {
            feature_names: vec!["credit_value_total".into(), "x".into()],
            config: CartConfig::default(),
            root,
            n_train: 0,
            training_accuracy: 0.0,
            fidelity: 0.0,
            cv_accuracy: None,
        }
    }

    #[test]
    fn single_leaf_rule() {
        let r = extract_rules(&tree(CartNode::Leaf { counts: [7, 3], class: 0 }));
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].to_string(), "IF TRUE THEN class=0 (purity 0.70, coverage 10)");
    }

    #[test]
    fn depth_one_rules_partition() {
        let root = CartNode::Split {
            feature: 0,
            threshold: 0.069,
            counts: [800, 120],
            class: 0,
            left: Box::new(CartNode::Leaf { counts: [788, 24], class: 0 }),
            right: Box::new(CartNode::Leaf { counts: [12, 96], class: 1 }),
        };
        let r = extract_rules(&tree(root));
        assert_eq!(r.len(), 2);
        assert_eq!(r.iter().map(|x| x.coverage).sum::<usize>(), 920);
        assert_eq!(
            r[0].to_string(),
            "IF phi(credit_value_total) < 0.069 THEN class=0 (purity 0.97, coverage 812)"
        );
        assert!(r[1].to_string().starts_with("IF phi(credit_value_total) >= 0.069 THEN class=1"));
    }

    #[test]
    fn threshold_formatting() {
        assert_eq!(short(0.069), "0.069");
        assert_eq!(short(0.0123456), "0.01235");
        assert_eq!(short(-1.5), "-1.5");
        assert_eq!(short(1234.7), "1235");
    }
}
