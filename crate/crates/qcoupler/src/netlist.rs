//! Netlist file parsing and serialization.
//!
//! A network is described by a line-based text format:
//!
//! ```text
//! # two qubits coupled through pads
//! node Q1 junction ejb=9.02GHz ejs=9.02GHz
//! node P1 passive
//! gcap Q1 72.5fF
//! cap Q1 P1 11.5fF
//! ```
//!
//! Tokens are whitespace separated, `#` starts a comment, and every value
//! carries its unit suffix (`GHz` for energies, `fF` for capacitances).
//! Junction lines take `ejb=`/`ejs=` for the two Josephson energies of the
//! SQUID (a single fixed junction is entered as `ejb = ejs`, half the total
//! each) and an optional shunt capacitance `cj=` that is added to the node's
//! ground capacitance during matrix assembly.

use std::collections::BTreeMap;
use std::collections::VecDeque;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NetlistError {
    #[error("line {line}, col {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: duplicate node `{name}`")]
    DuplicateNode { line: usize, name: String },
    #[error("line {line}: reference to undeclared node `{name}`")]
    UndeclaredNode { line: usize, name: String },
    #[error("line {line}, col {col}: negative value {value}")]
    NegativeValue { line: usize, col: usize, value: f64 },
    #[error("line {line}, col {col}: `{token}` is missing its `{unit}` unit suffix")]
    MissingUnit {
        line: usize,
        col: usize,
        token: String,
        unit: &'static str,
    },
    #[error("line {line}: junction node `{name}` is missing `{field}`")]
    MissingJunctionParam {
        line: usize,
        name: String,
        field: &'static str,
    },
    #[error("line {line}: junction node `{name}` needs ejb >= ejs")]
    JunctionOrdering { line: usize, name: String },
    #[error("line {line}: capacitor endpoints must differ (`{name}` paired with itself)")]
    SelfPair { line: usize, name: String },
    #[error("network has no junction node")]
    NoJunction,
    #[error("node `{name}` is not reachable from any junction through the capacitance graph")]
    Unreachable { name: String },
    #[error("flux assigned to `{name}`, which is not a junction node")]
    FluxTarget { name: String },
    #[error("flux value for `{name}` is not finite")]
    FluxValue { name: String },
}

/// Josephson parameters of a junction node, energies in GHz, `cj` in fF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionParams {
    /// Larger Josephson energy of the SQUID pair.
    pub ejb: f64,
    /// Smaller Josephson energy of the SQUID pair.
    pub ejs: f64,
    /// Junction shunt capacitance, added to the node's ground capacitance.
    pub cj: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    Junction(JunctionParams),
    Passive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub name: String,
    pub kind: NodeKind,
}

impl NodeSpec {
    pub fn is_junction(&self) -> bool {
        matches!(self.kind, NodeKind::Junction(_))
    }
}

/// A validated lumped-element network: ordered nodes, ground capacitances
/// and mutual capacitances, all in fF.
///
/// Mutual capacitance keys are stored with the two node names in
/// lexicographic order, so files that list `cap A B` and `cap B A` produce
/// structurally equal networks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CircuitNetwork {
    pub nodes: Vec<NodeSpec>,
    pub ground_caps: BTreeMap<String, f64>,
    pub mutual_caps: BTreeMap<(String, String), f64>,
}

impl CircuitNetwork {
    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// Indices of junction nodes in declaration order.
    pub fn junction_indices(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_junction())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn junction_names(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| n.is_junction())
            .map(|n| n.name.as_str())
            .collect()
    }

    pub fn junction_params(&self, name: &str) -> Option<JunctionParams> {
        self.nodes.iter().find(|n| n.name == name).and_then(|n| match n.kind {
            NodeKind::Junction(p) => Some(p),
            NodeKind::Passive => None,
        })
    }

    pub fn ground_cap(&self, name: &str) -> f64 {
        self.ground_caps.get(name).copied().unwrap_or(0.0)
    }

    pub fn mutual_cap(&self, a: &str, b: &str) -> f64 {
        self.mutual_caps.get(&pair_key(a, b)).copied().unwrap_or(0.0)
    }

    /// Structural validation beyond per-line syntax: at least one junction,
    /// and every node connected to a junction through nonzero mutual caps.
    pub fn validate(&self) -> Result<(), NetlistError> {
        if !self.nodes.iter().any(|n| n.is_junction()) {
            return Err(NetlistError::NoJunction);
        }
        let n = self.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for ((a, b), &c) in &self.mutual_caps {
            if c > 0.0 {
                let (i, j) = (
                    self.node_index(a).expect("validated ref"),
                    self.node_index(b).expect("validated ref"),
                );
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        let mut seen = vec![false; n];
        let mut queue: VecDeque<usize> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, nd)| nd.is_junction())
            .map(|(i, _)| i)
            .collect();
        for &i in &queue {
            seen[i] = true;
        }
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(NetlistError::Unreachable {
                name: self.nodes[i].name.clone(),
            });
        }
        Ok(())
    }
}

/// External flux per junction node, in units of the flux quantum.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FluxAssignment {
    values: BTreeMap<String, f64>,
}

impl FluxAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: &str, flux: f64) {
        self.values.insert(name.to_string(), flux);
    }

    pub fn with(mut self, name: &str, flux: f64) -> Self {
        self.set(name, flux);
        self
    }

    /// Flux for a junction; unassigned junctions sit at zero flux.
    pub fn get(&self, name: &str) -> f64 {
        self.values.get(name).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Parse a comma separated `name=value` list, e.g. `C=0.23,Q1=0.0`.
    pub fn parse_list(text: &str) -> Result<Self, String> {
        let mut out = Self::new();
        for part in text.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected name=value, got `{part}`"))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| format!("bad flux value `{value}`"))?;
            out.set(name.trim(), v);
        }
        Ok(out)
    }

    pub fn validate(&self, network: &CircuitNetwork) -> Result<(), NetlistError> {
        for (name, v) in self.iter() {
            let is_junction = network
                .node_index(name)
                .map(|i| network.nodes[i].is_junction())
                .unwrap_or(false);
            if !is_junction {
                return Err(NetlistError::FluxTarget { name: name.into() });
            }
            if !v.is_finite() {
                return Err(NetlistError::FluxValue { name: name.into() });
            }
        }
        Ok(())
    }
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    col: line[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            col: line[..s].chars().count() + 1,
        });
    }
    out
}

/// Parse `<number><unit>` such as `72.5fF` or `9.02e0GHz`.
fn parse_valued(
    tok: &Token<'_>,
    body: &str,
    unit: &'static str,
    line: usize,
) -> Result<f64, NetlistError> {
    let missing = || NetlistError::MissingUnit {
        line,
        col: tok.col,
        token: tok.text.to_string(),
        unit,
    };
    let number = body.strip_suffix(unit).ok_or_else(missing)?;
    let bad = |msg: String| NetlistError::Syntax {
        line,
        col: tok.col,
        msg,
    };
    if number.is_empty() {
        return Err(bad(format!("`{}` has no numeric part", tok.text)));
    }
    // Only plain decimal notation: reject anything alphabetic that f64
    // parsing would otherwise accept (inf, NaN).
    if number.chars().any(|c| c.is_alphabetic() && c != 'e' && c != 'E') {
        return Err(bad(format!("cannot parse number in `{}`", tok.text)));
    }
    let v: f64 = number
        .parse()
        .map_err(|_| bad(format!("cannot parse number in `{}`", tok.text)))?;
    if !v.is_finite() {
        return Err(bad(format!("non-finite value in `{}`", tok.text)));
    }
    if v < 0.0 {
        return Err(NetlistError::NegativeValue {
            line,
            col: tok.col,
            value: v,
        });
    }
    Ok(v)
}

/// Parse the netlist text into a validated [`CircuitNetwork`].
pub fn parse_netlist(text: &str) -> Result<CircuitNetwork, NetlistError> {
    let mut net = CircuitNetwork::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim_end_matches('\r');
        let toks = tokenize(content);
        if toks.is_empty() {
            continue;
        }
        match toks[0].text {
            "node" => parse_node(&toks, line, &mut net)?,
            "gcap" => parse_gcap(&toks, line, &mut net)?,
            "cap" => parse_cap(&toks, line, &mut net)?,
            other => {
                return Err(NetlistError::Syntax {
                    line,
                    col: toks[0].col,
                    msg: format!("unknown directive `{other}`"),
                })
            }
        }
    }
    net.validate()?;
    Ok(net)
}

fn expect_arity(toks: &[Token<'_>], line: usize, n: usize, usage: &str) -> Result<(), NetlistError> {
    if toks.len() != n {
        return Err(NetlistError::Syntax {
            line,
            col: toks.last().map(|t| t.col).unwrap_or(1),
            msg: format!("expected `{usage}`"),
        });
    }
    Ok(())
}

fn parse_node(toks: &[Token<'_>], line: usize, net: &mut CircuitNetwork) -> Result<(), NetlistError> {
    if toks.len() < 3 {
        return Err(NetlistError::Syntax {
            line,
            col: toks[0].col,
            msg: "expected `node <NAME> junction|passive ...`".into(),
        });
    }
    let name = toks[1].text.to_string();
    if net.node_index(&name).is_some() {
        return Err(NetlistError::DuplicateNode { line, name });
    }
    let kind = match toks[2].text {
        "passive" => {
            expect_arity(toks, line, 3, "node <NAME> passive")?;
            NodeKind::Passive
        }
        "junction" => {
            let mut ejb = None;
            let mut ejs = None;
            let mut cj = None;
            for tok in &toks[3..] {
                let (key, body) = tok.text.split_once('=').ok_or_else(|| NetlistError::Syntax {
                    line,
                    col: tok.col,
                    msg: format!("expected key=value, got `{}`", tok.text),
                })?;
                let slot = match key {
                    "ejb" => &mut ejb,
                    "ejs" => &mut ejs,
                    "cj" => &mut cj,
                    _ => {
                        return Err(NetlistError::Syntax {
                            line,
                            col: tok.col,
                            msg: format!("unknown junction parameter `{key}`"),
                        })
                    }
                };
                if slot.is_some() {
                    return Err(NetlistError::Syntax {
                        line,
                        col: tok.col,
                        msg: format!("duplicate junction parameter `{key}`"),
                    });
                }
                let unit = if key == "cj" { "fF" } else { "GHz" };
                *slot = Some(parse_valued(tok, body, unit, line)?);
            }
            let ejb = ejb.ok_or(NetlistError::MissingJunctionParam {
                line,
                name: name.clone(),
                field: "ejb",
            })?;
            let ejs = ejs.ok_or(NetlistError::MissingJunctionParam {
                line,
                name: name.clone(),
                field: "ejs",
            })?;
            if ejb < ejs {
                return Err(NetlistError::JunctionOrdering { line, name });
            }
            NodeKind::Junction(JunctionParams {
                ejb,
                ejs,
                cj: cj.unwrap_or(0.0),
            })
        }
        other => {
            return Err(NetlistError::Syntax {
                line,
                col: toks[2].col,
                msg: format!("node kind must be `junction` or `passive`, got `{other}`"),
            })
        }
    };
    net.nodes.push(NodeSpec { name, kind });
    Ok(())
}

fn check_declared(net: &CircuitNetwork, name: &str, line: usize) -> Result<(), NetlistError> {
    if net.node_index(name).is_none() {
        return Err(NetlistError::UndeclaredNode {
            line,
            name: name.to_string(),
        });
    }
    Ok(())
}

fn parse_gcap(toks: &[Token<'_>], line: usize, net: &mut CircuitNetwork) -> Result<(), NetlistError> {
    expect_arity(toks, line, 3, "gcap <NAME> <value>fF")?;
    let name = toks[1].text;
    check_declared(net, name, line)?;
    let v = parse_valued(&toks[2], toks[2].text, "fF", line)?;
    if net.ground_caps.insert(name.to_string(), v).is_some() {
        return Err(NetlistError::Syntax {
            line,
            col: toks[1].col,
            msg: format!("duplicate ground capacitance for `{name}`"),
        });
    }
    Ok(())
}

fn parse_cap(toks: &[Token<'_>], line: usize, net: &mut CircuitNetwork) -> Result<(), NetlistError> {
    expect_arity(toks, line, 4, "cap <NAME> <NAME> <value>fF")?;
    let a = toks[1].text;
    let b = toks[2].text;
    if a == b {
        return Err(NetlistError::SelfPair {
            line,
            name: a.to_string(),
        });
    }
    check_declared(net, a, line)?;
    check_declared(net, b, line)?;
    let v = parse_valued(&toks[3], toks[3].text, "fF", line)?;
    if net.mutual_caps.insert(pair_key(a, b), v).is_some() {
        return Err(NetlistError::Syntax {
            line,
            col: toks[1].col,
            msg: format!("duplicate mutual capacitance `{a}`-`{b}`"),
        });
    }
    Ok(())
}

/// Render a network back to the file format. `parse_netlist` of the output
/// reproduces the input network structurally.
pub fn serialize_netlist(network: &CircuitNetwork) -> String {
    let mut out = String::new();
    for node in &network.nodes {
        match node.kind {
            NodeKind::Junction(p) => {
                let _ = write!(out, "node {} junction ejb={}GHz ejs={}GHz", node.name, p.ejb, p.ejs);
                if p.cj != 0.0 {
                    let _ = write!(out, " cj={}fF", p.cj);
                }
                out.push('\n');
            }
            NodeKind::Passive => {
                let _ = writeln!(out, "node {} passive", node.name);
            }
        }
    }
    for node in &network.nodes {
        if let Some(v) = network.ground_caps.get(&node.name) {
            let _ = writeln!(out, "gcap {} {}fF", node.name, v);
        }
    }
    let mut pairs: Vec<(&(String, String), &f64)> = network.mutual_caps.iter().collect();
    pairs.sort_by_key(|((a, b), _)| {
        (
            network.node_index(a).unwrap_or(usize::MAX),
            network.node_index(b).unwrap_or(usize::MAX),
        )
    });
    for ((a, b), v) in pairs {
        let _ = writeln!(out, "cap {} {} {}fF", a, b, v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_PAD: &str = "\
# two-pad example
node Q1 junction ejb=9GHz ejs=9GHz
node P1 passive
node C junction ejb=8.9GHz ejs=8.9GHz
node P2 passive
node Q2 junction ejb=9GHz ejs=9GHz
gcap Q1 72.5fF
gcap P1 61.7fF
gcap C 25.1fF
gcap P2 61.7fF
gcap Q2 72.5fF
cap Q1 P1 11.5fF
cap P1 C 17.8fF
cap C P2 17.8fF
cap P2 Q2 11.5fF
cap P1 P2 21fF
";

    #[test]
    fn parses_two_pad_file() {
        let net = parse_netlist(TWO_PAD).unwrap();
        assert_eq!(net.nodes.len(), 5);
        assert_eq!(net.junction_names(), vec!["Q1", "C", "Q2"]);
        assert_eq!(net.ground_cap("C"), 25.1);
        assert_eq!(net.mutual_cap("P2", "P1"), 21.0);
        assert_eq!(net.mutual_cap("Q1", "Q2"), 0.0);
    }

    #[test]
    fn self_pair_rejected() {
        let text = format!("{TWO_PAD}cap Q1 Q1 3fF\n");
        assert!(matches!(
            parse_netlist(&text),
            Err(NetlistError::SelfPair { line: 17, .. })
        ));
    }

    #[test]
    fn undeclared_reference_rejected() {
        let text = format!("{TWO_PAD}gcap Q9 10fF\n");
        assert_eq!(
            parse_netlist(&text),
            Err(NetlistError::UndeclaredNode {
                line: 17,
                name: "Q9".into()
            })
        );
    }

    #[test]
    fn missing_unit_rejected() {
        let err = parse_netlist("node Q junction ejb=9GHz ejs=9GHz\ngcap Q 10\n").unwrap_err();
        assert!(matches!(err, NetlistError::MissingUnit { line: 2, .. }));
    }

    #[test]
    fn negative_value_rejected() {
        let err = parse_netlist("node Q junction ejb=9GHz ejs=9GHz\ngcap Q -1fF\n").unwrap_err();
        assert!(matches!(err, NetlistError::NegativeValue { line: 2, .. }));
    }

    #[test]
    fn duplicate_node_rejected() {
        let err = parse_netlist("node Q passive\nnode Q junction ejb=1GHz ejs=1GHz\n").unwrap_err();
        assert!(matches!(err, NetlistError::DuplicateNode { line: 2, .. }));
    }

    #[test]
    fn junction_params_required() {
        let err = parse_netlist("node Q junction ejb=9GHz\n").unwrap_err();
        assert!(matches!(
            err,
            NetlistError::MissingJunctionParam { field: "ejs", .. }
        ));
    }

    #[test]
    fn junction_ordering_enforced() {
        let err = parse_netlist("node Q junction ejb=5GHz ejs=6GHz\n").unwrap_err();
        assert!(matches!(err, NetlistError::JunctionOrdering { .. }));
    }

    #[test]
    fn disconnected_node_rejected() {
        let err = parse_netlist(
            "node Q junction ejb=9GHz ejs=9GHz\nnode P passive\ngcap Q 50fF\ngcap P 10fF\n",
        )
        .unwrap_err();
        assert_eq!(err, NetlistError::Unreachable { name: "P".into() });
    }

    #[test]
    fn no_junction_rejected() {
        let err = parse_netlist("node P passive\ngcap P 10fF\n").unwrap_err();
        assert_eq!(err, NetlistError::NoJunction);
    }

    #[test]
    fn round_trip_two_pad() {
        let net = parse_netlist(TWO_PAD).unwrap();
        let text = serialize_netlist(&net);
        let again = parse_netlist(&text).unwrap();
        assert_eq!(net, again);
    }

    #[test]
    fn cj_token_round_trips() {
        let net = parse_netlist("node Q junction ejb=9GHz ejs=8GHz cj=2.5fF\ngcap Q 60fF\n").unwrap();
        let text = serialize_netlist(&net);
        assert!(text.contains("cj=2.5fF"));
        assert_eq!(parse_netlist(&text).unwrap(), net);
    }

    #[test]
    fn cap_line_order_is_irrelevant() {
        let reordered = TWO_PAD
            .lines()
            .rev()
            .filter(|l| l.starts_with("cap") || l.starts_with("gcap"))
            .chain(TWO_PAD.lines().filter(|l| l.starts_with("node")))
            .collect::<Vec<_>>();
        // nodes first, then caps in reversed order
        let mut text = String::new();
        for l in TWO_PAD.lines().filter(|l| l.starts_with("node")) {
            text.push_str(l);
            text.push('\n');
        }
        for l in reordered.iter().filter(|l| !l.starts_with("node")) {
            text.push_str(l);
            text.push('\n');
        }
        assert_eq!(parse_netlist(&text).unwrap(), parse_netlist(TWO_PAD).unwrap());
    }

    #[test]
    fn crlf_and_comments_accepted() {
        let text = TWO_PAD.replace('\n', "\r\n");
        assert_eq!(parse_netlist(&text).unwrap(), parse_netlist(TWO_PAD).unwrap());
    }

    #[test]
    fn flux_assignment_list() {
        let f = FluxAssignment::parse_list("C=0.23,Q1=0.0").unwrap();
        assert_eq!(f.get("C"), 0.23);
        assert_eq!(f.get("Q1"), 0.0);
        assert_eq!(f.get("Q2"), 0.0);
        let net = parse_netlist(TWO_PAD).unwrap();
        f.validate(&net).unwrap();
        let bad = FluxAssignment::new().with("P1", 0.1);
        assert!(bad.validate(&net).is_err());
    }
}
