//! Line-oriented circuit text format.
//!
//! ```text
//! circuit N=2 eta=1 ancilla=1 work=0 cbits=0
//! H targets=2
//! Z targets=2
//! CSWAP targets=0,1 controls=2:+
//! RY(1.5707963267948966e0) targets=0
//! X targets=0 cond=0=1
//! ```
//!
//! One gate per line, flat wire indices, `#` starts a comment. Angles are
//! written with 17 significant digits. Dense gates carry their label and
//! row-major matrix as `DENSE(label|re,im,re,im,...)`.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::gate::{Condition, Control, DenseGate, Gate, GateKind, Polarity};
use super::ir::Circuit;
use super::layout::Layout;
use crate::error::{Error, Result};
use crate::C64;

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_gate(g: &Gate) -> String {
    let mut s = String::from(g.kind.name());
    match &g.kind {
        GateKind::Ry(t) | GateKind::Rz(t) | GateKind::ControlledRy(t) => {
            let _ = write!(s, "({})", fmt_f64(*t));
        }
        GateKind::Measure(bit) => {
            let _ = write!(s, "({bit})");
        }
        GateKind::Dense(d) => {
            let entries: Vec<String> = (0..d.matrix.nrows())
                .flat_map(|r| (0..d.matrix.ncols()).map(move |c| (r, c)))
                .map(|(r, c)| {
                    let v = d.matrix[(r, c)];
                    format!("{},{}", fmt_f64(v.re), fmt_f64(v.im))
                })
                .collect();
            let _ = write!(s, "({}|{})", d.label, entries.join(","));
        }
        _ => {}
    }
    let targets: Vec<String> = g.targets.iter().map(usize::to_string).collect();
    let _ = write!(s, " targets={}", targets.join(","));
    if !g.controls.is_empty() {
        let controls: Vec<String> = g
            .controls
            .iter()
            .map(|c| {
                let p = if c.polarity == Polarity::Closed {
                    '+'
                } else {
                    '-'
                };
                format!("{}:{p}", c.wire)
            })
            .collect();
        let _ = write!(s, " controls={}", controls.join(","));
    }
    for c in &g.conditions {
        let _ = write!(s, " cond={}={}", c.bit, u8::from(c.value));
    }
    s
}

pub fn to_text(c: &Circuit) -> String {
    let l = c.layout();
    let mut s = format!(
        "circuit N={} eta={} ancilla={} work={} cbits={}\n",
        l.n_particles, l.eta, l.ancillas, l.work, l.cbits
    );
    for g in c.gates() {
        s.push_str(&format_gate(g));
        s.push('\n');
    }
    s
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("invalid number `{tok}`")))
}

fn parse_header(text: &str, line: usize) -> Result<Layout> {
    let mut toks = text.split_whitespace();
    if toks.next() != Some("circuit") {
        return Err(parse_err(line, "expected header starting with `circuit`"));
    }
    let mut layout = Layout::new(0, 0);
    let mut seen = [false; 5];
    for tok in toks {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("malformed header field `{tok}`")))?;
        let v = parse_usize(value, line, key)?;
        let slot = match key {
            "N" => {
                layout.n_particles = v;
                0
            }
            "eta" => {
                layout.eta = v;
                1
            }
            "ancilla" => {
                layout.ancillas = v;
                2
            }
            "work" => {
                layout.work = v;
                3
            }
            "cbits" => {
                layout.cbits = v;
                4
            }
            _ => return Err(parse_err(line, format!("unknown header field `{key}`"))),
        };
        seen[slot] = true;
    }
    if !seen.iter().all(|s| *s) {
        return Err(parse_err(
            line,
            "header must set N, eta, ancilla, work and cbits",
        ));
    }
    Ok(layout)
}

fn parse_kind(tok: &str, line: usize, n_controls: usize) -> Result<GateKind> {
    let (name, arg) = match tok.find('(') {
        Some(open) => {
            if !tok.ends_with(')') {
                return Err(parse_err(
                    line,
                    format!("unterminated parameter in `{tok}`"),
                ));
            }
            (&tok[..open], Some(&tok[open + 1..tok.len() - 1]))
        }
        None => (tok, None),
    };
    let need_arg = |line| arg.ok_or_else(|| parse_err(line, format!("`{name}` needs a parameter")));
    let kind = match name {
        "X" => GateKind::X,
        "Y" => GateKind::Y,
        "Z" => GateKind::Z,
        "H" => GateKind::H,
        "S" => GateKind::S,
        "SDG" => GateKind::Sdg,
        "T" => GateKind::T,
        "TDG" => GateKind::Tdg,
        "SX" => GateKind::Sx,
        "SXDG" => GateKind::Sxdg,
        "CNOT" => GateKind::Cnot,
        "CZ" => GateKind::Cz,
        "SWAP" => GateKind::Swap,
        "CCX" => GateKind::Toffoli,
        "CCZ" => GateKind::Ccz,
        "MCX" => GateKind::Mcx(n_controls),
        "MCZ" => GateKind::Mcz(n_controls),
        "CSWAP" => GateKind::Cswap,
        "RESET" => GateKind::Reset,
        "RY" => GateKind::Ry(parse_f64(need_arg(line)?, line)?),
        "RZ" => GateKind::Rz(parse_f64(need_arg(line)?, line)?),
        "CRY" => GateKind::ControlledRy(parse_f64(need_arg(line)?, line)?),
        "MEASURE" => GateKind::Measure(parse_usize(need_arg(line)?, line, "classical bit")?),
        "DENSE" => {
            let arg = need_arg(line)?;
            let (label, body) = arg
                .split_once('|')
                .ok_or_else(|| parse_err(line, "DENSE parameter must be `label|entries`"))?;
            let nums = body
                .split(',')
                .map(|t| parse_f64(t, line))
                .collect::<Result<Vec<f64>>>()?;
            if nums.len() % 2 != 0 {
                return Err(parse_err(line, "DENSE entries must be re,im pairs"));
            }
            let count = nums.len() / 2;
            let dim = (count as f64).sqrt().round() as usize;
            if dim * dim != count {
                return Err(parse_err(
                    line,
                    format!("DENSE has {count} entries, not a square"),
                ));
            }
            let entries: Vec<C64> = nums.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
            GateKind::Dense(Arc::new(DenseGate {
                label: label.to_string(),
                matrix: DMatrix::from_row_slice(dim, dim, &entries),
            }))
        }
        _ => return Err(parse_err(line, format!("unknown gate `{name}`"))),
    };
    Ok(kind)
}

fn parse_gate(text: &str, line: usize) -> Result<Gate> {
    let mut toks = text.split_whitespace();
    let kind_tok = toks
        .next()
        .ok_or_else(|| parse_err(line, "empty gate line"))?;
    let mut targets = None;
    let mut controls = Vec::new();
    let mut conditions = Vec::new();
    for tok in toks {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("malformed field `{tok}`")))?;
        match key {
            "targets" => {
                targets = Some(
                    value
                        .split(',')
                        .map(|w| parse_usize(w, line, "wire"))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            "controls" => {
                for c in value.split(',') {
                    let (w, p) = c
                        .split_once(':')
                        .ok_or_else(|| parse_err(line, format!("malformed control `{c}`")))?;
                    let wire = parse_usize(w, line, "wire")?;
                    let polarity = match p {
                        "+" => Polarity::Closed,
                        "-" => Polarity::Open,
                        _ => return Err(parse_err(line, format!("bad polarity `{p}`"))),
                    };
                    controls.push(Control { wire, polarity });
                }
            }
            "cond" => {
                let (b, v) = value
                    .split_once('=')
                    .ok_or_else(|| parse_err(line, format!("malformed condition `{value}`")))?;
                let bit = parse_usize(b, line, "classical bit")?;
                let value = match v {
                    "0" => false,
                    "1" => true,
                    _ => return Err(parse_err(line, format!("condition value `{v}` is not 0/1"))),
                };
                conditions.push(Condition { bit, value });
            }
            _ => return Err(parse_err(line, format!("unknown field `{key}`"))),
        }
    }
    let targets = targets.ok_or_else(|| parse_err(line, "missing `targets=`"))?;
    let kind = parse_kind(kind_tok, line, controls.len())?;
    Ok(Gate {
        kind,
        targets,
        controls,
        conditions,
    })
}

pub fn from_text(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        match circuit.as_mut() {
            None => circuit = Some(Circuit::new(parse_header(content, line)?)),
            Some(c) => {
                let gate = parse_gate(content, line)?;
                c.push(gate).map_err(|e| parse_err(line, e.to_string()))?;
            }
        }
    }
    circuit.ok_or_else(|| parse_err(1, "missing `circuit` header"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_gate_round_trips_byte_identically() {
        let c = Circuit::from_gates(Layout::register(2), vec![Gate::cnot(0, 1)]).unwrap();
        let text = to_text(&c);
        assert_eq!(
            text,
            "circuit N=1 eta=2 ancilla=0 work=0 cbits=0\nCNOT targets=1 controls=0:+\n"
        );
        let back = from_text(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(to_text(&back), text);
    }

    #[test]
    fn unknown_gate_names_token_and_line() {
        let err =
            from_text("circuit N=1 eta=1 ancilla=0 work=0 cbits=0\n\nFOO targets=0\n").unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("FOO"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_and_conditions() {
        let text = "# header follows\ncircuit N=1 eta=1 ancilla=1 work=0 cbits=2\nX targets=0 cond=0=1 cond=1=0 # fix\nMEASURE(1) targets=1\n";
        let c = from_text(text).unwrap();
        assert_eq!(c.gates()[0].conditions.len(), 2);
        assert_eq!(c.gates()[1].kind, GateKind::Measure(1));
    }

    #[test]
    fn invalid_gate_reports_line() {
        let err =
            from_text("circuit N=1 eta=1 ancilla=0 work=0 cbits=0\nX targets=4\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn dense_gate_round_trips() {
        let m = GateKind::H.base_matrix().unwrap();
        let c = Circuit::from_gates(Layout::register(1), vec![Gate::dense("Hlike", m, vec![0])])
            .unwrap();
        assert_eq!(from_text(&to_text(&c)).unwrap(), c);
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        let wires = proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 3).prop_shuffle();
        (0usize..8, wires, -10.0f64..10.0, any::<bool>()).prop_map(move |(k, w, theta, open)| {
            let pol = if open {
                Control::open(w[1])
            } else {
                Control::closed(w[1])
            };
            match k {
                0 => Gate::h(w[0]),
                1 => Gate::ry(theta, w[0]),
                2 => Gate::rz(theta, w[0]),
                3 => Gate::cry(theta, pol, w[0]),
                4 => Gate::new(GateKind::Cswap, vec![w[0], w[2]], vec![pol]),
                5 => Gate::mcx(vec![pol, Control::closed(w[2])], w[0]),
                6 => Gate::single(GateKind::Tdg, w[0]).with_conditions(vec![Condition {
                    bit: 0,
                    value: open,
                }]),
                _ => Gate::measure(w[0], 1),
            }
        })
    }

    proptest! {
        #[test]
        fn text_round_trip(gates in proptest::collection::vec(arb_gate(4), 0..20)) {
            let layout = Layout::new(2, 2).with_cbits(2);
            let c = Circuit::from_gates(layout, gates).unwrap();
            let text = to_text(&c);
            let back = from_text(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.counts(), c.counts());
        }
    }
}
