//! Versioned plain-text policy files.
//!
//! ```text
//! icorpp-policy v1
//! model <sha256 hex>
//! discount <real>
//! kind mdp            | kind alpha
//! states <n>          | states <n>
//! <action> <value>    | vectors <k>
//! ...                 | <action> <v_0> ... <v_n-1>
//! ```

use std::fmt::Write as _;

use super::{AlphaVector, AlphaVectorPolicy, MdpPolicy, PlanError, Result};

const MAGIC: &str = "icorpp-policy v1";

#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Mdp(MdpPolicy),
    Alpha(AlphaVectorPolicy),
}

pub fn save_policy(policy: &Policy, model_hash: &str, discount: f64) -> String {
    let mut out = format!("{MAGIC}\nmodel {model_hash}\ndiscount {discount:?}\n");
    match policy {
        Policy::Mdp(p) => {
            let _ = writeln!(out, "kind mdp\nstates {}", p.actions.len());
            for (a, v) in p.actions.iter().zip(&p.values) {
                let _ = writeln!(out, "{a} {v:?}");
            }
        }
        Policy::Alpha(p) => {
            let n = p.vectors.first().map_or(0, |v| v.values.len());
            let _ = writeln!(out, "kind alpha\nstates {n}\nvectors {}", p.vectors.len());
            for v in &p.vectors {
                let _ = write!(out, "{}", v.action);
                for x in &v.values {
                    let _ = write!(out, " {x:?}");
                }
                out.push('\n');
            }
        }
    }
    out
}

/// Parses a policy file, refusing one solved for a different model.
pub fn load_policy(text: &str, expected_hash: &str) -> Result<Policy> {
    let bad = |m: &str| PlanError::PolicyFormat(m.to_string());
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let mut field = |key: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| bad(&format!("missing `{key}`")))?;
        line.strip_prefix(key)
            .map(|v| v.trim().to_string())
            .ok_or_else(|| bad(&format!("expected `{key}`, found `{line}`")))
    };
    if field("icorpp-policy")? != "v1" {
        return Err(bad("unsupported version"));
    }
    let hash = field("model")?;
    if hash != expected_hash {
        return Err(PlanError::HashMismatch { expected: expected_hash.to_string(), found: hash });
    }
    let discount: f64 = field("discount")?.parse().map_err(|_| bad("discount"))?;
    let kind = field("kind")?;
    let n: usize = field("states")?.parse().map_err(|_| bad("states"))?;
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("number `{s}`")));
    let idx = |s: &str| s.parse::<usize>().map_err(|_| bad(&format!("action `{s}`")));
    match kind.as_str() {
        "mdp" => {
            let (mut actions, mut values) = (Vec::with_capacity(n), Vec::with_capacity(n));
            for _ in 0..n {
                let line = lines.next().ok_or_else(|| bad("truncated table"))?;
                let mut it = line.split_whitespace();
                actions.push(idx(it.next().unwrap_or(""))?);
                values.push(num(it.next().unwrap_or(""))?);
            }
            Ok(Policy::Mdp(MdpPolicy { actions, values }))
        }
        "alpha" => {
            let k: usize = field("vectors")?.parse().map_err(|_| bad("vectors"))?;
            let mut vectors = Vec::with_capacity(k);
            for _ in 0..k {
                let line = lines.next().ok_or_else(|| bad("truncated vectors"))?;
                let mut it = line.split_whitespace();
                let action = idx(it.next().unwrap_or(""))?;
                let values = it.map(num).collect::<Result<Vec<_>>>()?;
                if values.len() != n {
                    return Err(bad("vector length"));
                }
                vectors.push(AlphaVector { values, action });
            }
            Ok(Policy::Alpha(AlphaVectorPolicy { vectors, discount }))
        }
        other => Err(bad(&format!("unknown kind `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_hash_check() {
        let p = Policy::Alpha(AlphaVectorPolicy {
            vectors: vec![AlphaVector { values: vec![0.1, -2.5e-7], action: 3 }],
            discount: 0.95,
        });
        let text = save_policy(&p, "abc", 0.95);
        assert_eq!(load_policy(&text, "abc").unwrap(), p);
        assert!(matches!(load_policy(&text, "abd"), Err(PlanError::HashMismatch { .. })));

        let p = Policy::Mdp(MdpPolicy { actions: vec![1, 0], values: vec![3.0, 1.0 / 3.0] });
        let text = save_policy(&p, "h", 0.9);
        assert_eq!(load_policy(&text, "h").unwrap(), p);
    }
}
