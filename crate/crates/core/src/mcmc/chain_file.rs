//! Plain-text chain files.
//!
//! ```text
//! # chain groups G classes K order O family cauchy
//! # columns iteration sigma_0..sigma_O s[g,k] (row-major by group)
//! 755 5 0.08 ... 0 -1.25 ...
//! ```
//!
//! Other `#` lines are ignored. Values are written in shortest round-trip
//! form, so reading a chain back gives bit-identical states.

use std::io::{BufRead, Write};

use super::{ChainSample, ModelState};
use crate::error::{Error, Result};
use crate::prior::{Family, HyperparameterVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainHeader {
    pub n_groups: usize,
    pub n_classes: usize,
    pub order: usize,
    pub family: Family,
}

impl ChainHeader {
    fn n_columns(&self) -> usize {
        1 + self.order + 1 + self.n_groups * self.n_classes
    }
}

pub fn write_chain_header<W: Write>(w: &mut W, h: &ChainHeader) -> std::io::Result<()> {
    writeln!(
        w,
        "# chain groups {} classes {} order {} family {}",
        h.n_groups, h.n_classes, h.order, h.family
    )?;
    writeln!(w, "# columns iteration sigma_0..sigma_{} s[g,k] (row-major by group)", h.order)
}

pub fn write_chain_record<W: Write>(w: &mut W, sample: &ChainSample) -> std::io::Result<()> {
    let mut line = sample.iteration.to_string();
    for v in sample.state.sigma.as_slice().iter().chain(sample.state.s_values()) {
        line.push(' ');
        line.push_str(&v.to_string());
    }
    line.push('\n');
    w.write_all(line.as_bytes())
}

fn parse_header(line: &str) -> Result<ChainHeader> {
    let words: Vec<&str> = line.split_whitespace().collect();
    let field = |name: &str| -> Result<&str> {
        words
            .iter()
            .position(|w| *w == name)
            .and_then(|i| words.get(i + 1).copied())
            .ok_or_else(|| Error::ChainFormat(format!("header lacks `{name}`")))
    };
    let num = |name: &str| -> Result<usize> {
        field(name)?
            .parse()
            .map_err(|_| Error::ChainFormat(format!("bad `{name}` in header")))
    };
    Ok(ChainHeader {
        n_groups: num("groups")?,
        n_classes: num("classes")?,
        order: num("order")?,
        family: field("family")?.parse()?,
    })
}

pub fn read_chain<R: BufRead>(reader: R) -> Result<(ChainHeader, Vec<ChainSample>)> {
    let mut header = None;
    let mut samples = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if rest.trim_start().starts_with("chain ") {
                header = Some(parse_header(rest)?);
            }
            continue;
        }
        let h = header.ok_or_else(|| Error::ChainFormat("record before chain header".into()))?;
        let cols: Vec<&str> = trimmed.split_whitespace().collect();
        if cols.len() != h.n_columns() {
            return Err(Error::ChainFormat(format!(
                "line {}: {} columns, expected {}",
                n + 1,
                cols.len(),
                h.n_columns()
            )));
        }
        let iteration: usize = cols[0]
            .parse()
            .map_err(|_| Error::ChainFormat(format!("line {}: bad iteration", n + 1)))?;
        let values = cols[1..]
            .iter()
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::ChainFormat(format!("line {}: {e}", n + 1)))?;
        let (sigma, s) = values.split_at(h.order + 1);
        let state = ModelState::from_parts(h.n_classes, s.to_vec(), HyperparameterVector::new(sigma.to_vec())?)?;
        samples.push(ChainSample { iteration, state });
    }
    let header = header.ok_or_else(|| Error::ChainFormat("missing chain header".into()))?;
    Ok((header, samples))
}
