//! Plain-text snapshot of [`VariationalParams`].
//!
//! ```text
//! vparams v1
//! sizes <n_0> <n_1> ... <n_L>
//! prior_std <f>
//! obs_std <f>
//! layer <l> <count>
//! <mu> <rho>            one line per parameter of layer l
//! ...
//! ```
//!
//! Parameters within a layer are the weights in row-major `out × in` order
//! followed by the biases. Numbers are written in shortest round-trip `f64`
//! form, so write-then-read reproduces the parameters exactly.

use std::fmt::Write as _;

use super::VariationalParams;
use crate::error::{Error, Result};
use crate::mlp::Layout;
use crate::scalar::Scalar;

const MAGIC: &str = "vparams v1";

pub fn to_text<T: Scalar>(params: &VariationalParams<T>) -> String {
    let mut out = String::new();
    let layout = params.layout();
    writeln!(out, "{MAGIC}").unwrap();
    let sizes: Vec<String> = layout.sizes().iter().map(|s| s.to_string()).collect();
    writeln!(out, "sizes {}", sizes.join(" ")).unwrap();
    writeln!(out, "prior_std {}", params.prior_std().as_f64()).unwrap();
    writeln!(out, "obs_std {}", params.obs_std().as_f64()).unwrap();
    for l in 0..layout.layers() {
        let (a, b) = layout.layer_range(l);
        writeln!(out, "layer {l} {}", b - a).unwrap();
        for j in a..b {
            writeln!(out, "{} {}", params.mu()[j].as_f64(), params.rho()[j].as_f64()).unwrap();
        }
    }
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidArchitecture(format!("snapshot: {}", msg.into()))
}

fn parse_f64(tok: Option<&str>) -> Result<f64> {
    tok.ok_or_else(|| bad("missing number"))?.parse::<f64>().map_err(|e| bad(e.to_string()))
}

fn field<'a>(lines: &mut impl Iterator<Item = &'a str>, name: &str) -> Result<String> {
    let line = lines.next().ok_or_else(|| bad(format!("missing `{name}`")))?;
    line.strip_prefix(name)
        .map(|rest| rest.trim().to_string())
        .ok_or_else(|| bad(format!("expected `{name}`, got `{line}`")))
}

pub fn from_text<T: Scalar>(text: &str) -> Result<VariationalParams<T>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(MAGIC) {
        return Err(bad("missing header"));
    }
    let sizes: Vec<usize> = field(&mut lines, "sizes")?
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| bad(format!("bad size `{s}`"))))
        .collect::<Result<_>>()?;
    let prior_std = parse_f64(Some(&field(&mut lines, "prior_std")?))?;
    let obs_std = parse_f64(Some(&field(&mut lines, "obs_std")?))?;
    let layout = Layout::new(&sizes, true)?;
    let mut mu = Vec::with_capacity(layout.param_count());
    let mut rho = Vec::with_capacity(layout.param_count());
    for l in 0..layout.layers() {
        let (a, b) = layout.layer_range(l);
        let header = field(&mut lines, "layer")?;
        let mut it = header.split_whitespace();
        let idx: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad layer index"))?;
        let count: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad layer count"))?;
        if idx != l || count != b - a {
            return Err(bad(format!("layer {l}: expected {} parameters", b - a)));
        }
        for _ in 0..count {
            let line = lines.next().ok_or_else(|| bad("truncated layer"))?;
            let mut it = line.split_whitespace();
            mu.push(T::c(parse_f64(it.next())?));
            rho.push(T::c(parse_f64(it.next())?));
        }
    }
    Ok(VariationalParams::from_parts(layout, mu, rho, T::c(prior_std), T::c(obs_std)))
}
