//! Plain-text edge lists.
//!
//! ```text
//! n m
//! i j w      (m lines, 0-based agents, decimal weight)
//! ```
//!
//! Weights are written in shortest round-trip form, so reading a written
//! file reproduces every weight bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dsgpa_core::Network;

use crate::error::{Result, SimError};

pub fn format_graph(net: &Network) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", net.n(), net.edges().len());
    for e in net.edges() {
        let _ = writeln!(out, "{} {} {}", e.i, e.j, e.weight);
    }
    out
}

pub fn write_graph(net: &Network, path: &Path) -> Result<()> {
    fs::write(path, format_graph(net)).map_err(|e| SimError::io(path, e))
}

pub fn read_graph(path: &Path) -> Result<Network> {
    let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_graph(&text, path)
}

/// `origin` only labels error messages.
pub fn parse_graph(text: &str, origin: &Path) -> Result<Network> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| SimError::format(origin, 1, "empty graph file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [n, m] = fields[..] else {
        return Err(SimError::format(
            origin,
            header_line,
            "header must be `n m`",
        ));
    };
    let parse_count = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| SimError::format(origin, header_line, format!("`{s}` is not a count")))
    };
    let (n, m) = (parse_count(n)?, parse_count(m)?);

    let mut edges = Vec::with_capacity(m);
    for (line, content) in lines {
        let fields: Vec<&str> = content.split_whitespace().collect();
        let [i, j, w] = fields[..] else {
            return Err(SimError::format(origin, line, "edge line must be `i j w`"));
        };
        let index = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| SimError::format(origin, line, format!("`{s}` is not an agent index")))
        };
        let weight: f64 = w
            .parse()
            .map_err(|_| SimError::format(origin, line, format!("`{w}` is not a number")))?;
        edges.push((index(i)?, index(j)?, weight));
    }
    if edges.len() != m {
        return Err(SimError::format(
            origin,
            header_line,
            format!("header announces {m} edges, found {}", edges.len()),
        ));
    }
    Network::new(n, &edges).map_err(SimError::from)
}
