//! Line-oriented text form of a [`StageNetwork`].
//!
//! ```text
//! EMUNET 1
//! LINES 2
//! FREQ 1000
//! STAGE amp0 AMP 10000 10000
//! IN 1 amp0.0
//! OUT 0 in.0
//! OUT 1 amp0.0
//! ```
//!
//! Stage kinds: `DIV r1 r2`, `AMP r_in r_f`, `SUM k w1..wk`,
//! `RCPS r c swapped(0|1)`, `PERM i->j,...`. `EDGE src[.port] dst[.port]`
//! wires a stage output to a stage input, `IN line stage.port` drives a stage
//! input from a network input, and `OUT line src.port` drives a network
//! output; the reserved source name `in` refers to network input lines.
//! Values accept the suffixes `p n u k M`. Blank lines and `#` comments are
//! skipped.
//!
//! [`export`] writes the canonical form: stage labels `<kind><index>`,
//! explicit ports, and shortest round-trip decimals.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::network::{NetworkBuilder, Source, StageId, StageNetwork};
use super::stage::Stage;
use crate::error::{Error, Result};

pub const HEADER: &str = "EMUNET 1";
const INPUT_NAME: &str = "in";

fn label(net: &StageNetwork, id: usize) -> String {
    format!("{}{}", net.stages()[id].tag(), id)
}

fn source_text(net: &StageNetwork, src: Source) -> String {
    match src {
        Source::Line(l) => format!("{INPUT_NAME}.{l}"),
        Source::Port { stage, port } => format!("{}.{}", label(net, stage.0), port),
    }
}

/// Canonical netlist text for `net`.
pub fn export(net: &StageNetwork) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "LINES {}", net.lines()).unwrap();
    writeln!(out, "FREQ {}", net.frequency()).unwrap();
    for (i, stage) in net.stages().iter().enumerate() {
        write!(out, "STAGE {} ", label(net, i)).unwrap();
        match stage {
            Stage::VoltageDivider { r1, r2 } => write!(out, "DIV {r1} {r2}"),
            Stage::InvertingAmp { r_in, r_f } => write!(out, "AMP {r_in} {r_f}"),
            Stage::Summer { weights } => {
                write!(out, "SUM {}", weights.len()).unwrap();
                weights.iter().try_for_each(|w| write!(out, " {w}"))
            }
            Stage::RcPhaseShifter { r, c, swapped } => {
                write!(out, "RCPS {r} {c} {}", u8::from(*swapped))
            }
            Stage::WirePermutation { map } => {
                let pairs: Vec<String> = map
                    .iter()
                    .enumerate()
                    .map(|(i, j)| format!("{i}->{j}"))
                    .collect();
                write!(out, "PERM {}", pairs.join(","))
            }
        }
        .unwrap();
        out.push('\n');
    }
    for i in 0..net.stages().len() {
        let dst = label(net, i);
        for (port, src) in net.drivers(StageId(i)).iter().enumerate() {
            match *src {
                Source::Line(l) => writeln!(out, "IN {l} {dst}.{port}"),
                s @ Source::Port { .. } => {
                    writeln!(out, "EDGE {} {dst}.{port}", source_text(net, s))
                }
            }
            .unwrap();
        }
    }
    for (line, src) in net.outputs().iter().enumerate() {
        writeln!(out, "OUT {line} {}", source_text(net, *src)).unwrap();
    }
    out
}

/// Parses a decimal with an optional `p n u k M` suffix.
pub fn parse_value(token: &str) -> std::result::Result<f64, String> {
    let (mantissa, exp) = match token.chars().last() {
        Some('p') => (&token[..token.len() - 1], "e-12"),
        Some('n') => (&token[..token.len() - 1], "e-9"),
        Some('u') => (&token[..token.len() - 1], "e-6"),
        Some('k') => (&token[..token.len() - 1], "e3"),
        Some('M') => (&token[..token.len() - 1], "e6"),
        _ => (token, ""),
    };
    if mantissa.is_empty() || (!exp.is_empty() && mantissa.contains(['e', 'E'])) {
        return Err(format!("malformed value {token:?}"));
    }
    // Rebuilding the literal keeps suffixed values correctly rounded.
    let v: f64 = format!("{mantissa}{exp}")
        .parse()
        .map_err(|_| format!("malformed value {token:?}"))?;
    if !v.is_finite() {
        return Err(format!("non-finite value {token:?}"));
    }
    Ok(v)
}

enum Endpoint {
    Input(usize),
    Stage { label: String, port: usize },
}

fn parse_endpoint(token: &str) -> std::result::Result<Endpoint, String> {
    let (name, port) = match token.split_once('.') {
        Some((n, p)) => (
            n,
            p.parse::<usize>()
                .map_err(|_| format!("bad port in {token:?}"))?,
        ),
        None => (token, 0),
    };
    if name.is_empty() {
        return Err(format!("missing stage name in {token:?}"));
    }
    Ok(if name == INPUT_NAME {
        Endpoint::Input(port)
    } else {
        Endpoint::Stage {
            label: name.to_string(),
            port,
        }
    })
}

fn parse_stage(kind: &str, args: &[&str]) -> std::result::Result<Stage, String> {
    let values = |n: usize| -> std::result::Result<Vec<f64>, String> {
        if args.len() != n {
            return Err(format!("{kind} expects {n} values, got {}", args.len()));
        }
        args.iter().map(|a| parse_value(a)).collect()
    };
    match kind {
        "DIV" => {
            let v = values(2)?;
            Ok(Stage::VoltageDivider { r1: v[0], r2: v[1] })
        }
        "AMP" => {
            let v = values(2)?;
            Ok(Stage::InvertingAmp {
                r_in: v[0],
                r_f: v[1],
            })
        }
        "RCPS" => {
            if args.len() != 3 {
                return Err(format!("RCPS expects 3 values, got {}", args.len()));
            }
            let swapped = match args[2] {
                "0" => false,
                "1" => true,
                other => return Err(format!("swapped flag must be 0 or 1, got {other:?}")),
            };
            Ok(Stage::RcPhaseShifter {
                r: parse_value(args[0])?,
                c: parse_value(args[1])?,
                swapped,
            })
        }
        "SUM" => {
            let (count, weights) = args.split_first().ok_or("SUM needs an input count")?;
            let k: usize = count
                .parse()
                .map_err(|_| format!("bad SUM count {count:?}"))?;
            if weights.len() != k {
                return Err(format!("SUM declares {k} weights, got {}", weights.len()));
            }
            Ok(Stage::Summer {
                weights: weights
                    .iter()
                    .map(|w| parse_value(w))
                    .collect::<std::result::Result<_, _>>()?,
            })
        }
        "PERM" => {
            if args.len() != 1 {
                return Err("PERM expects one comma-separated map".into());
            }
            let mut pairs = Vec::new();
            for item in args[0].split(',') {
                let (i, j) = item
                    .split_once("->")
                    .ok_or_else(|| format!("bad PERM entry {item:?}"))?;
                let i: usize = i.parse().map_err(|_| format!("bad PERM entry {item:?}"))?;
                let j: usize = j.parse().map_err(|_| format!("bad PERM entry {item:?}"))?;
                pairs.push((i, j));
            }
            let mut map = vec![usize::MAX; pairs.len()];
            for (i, j) in pairs {
                match map.get_mut(i) {
                    Some(slot) if *slot == usize::MAX => *slot = j,
                    _ => return Err(format!("PERM source {i} repeated or out of range")),
                }
            }
            let stage = Stage::WirePermutation { map };
            stage.validate().map_err(|e| e.to_string())?;
            Ok(stage)
        }
        other => Err(format!("unknown stage kind {other:?}")),
    }
}

enum Wire {
    Edge { from: Endpoint, to: Endpoint },
    In { line: usize, to: Endpoint },
    Out { line: usize, from: Endpoint },
}

/// Parses netlist text; errors carry the 1-based line number.
pub fn import(text: &str) -> Result<StageNetwork> {
    let mut lines_decl: Option<usize> = None;
    let mut freq: Option<f64> = None;
    let mut seen_header = false;
    let mut stages: Vec<(usize, Stage)> = Vec::new();
    let mut labels: HashMap<String, usize> = HashMap::new();
    let mut wires: Vec<(usize, Wire)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if !seen_header {
            if content != HEADER {
                return Err(err(format!("expected header {HEADER:?}")));
            }
            seen_header = true;
            continue;
        }
        let arity = |n: usize| {
            if toks.len() == n {
                Ok(())
            } else {
                Err(err(format!(
                    "{} expects {} fields, got {}",
                    toks[0],
                    n - 1,
                    toks.len() - 1
                )))
            }
        };
        let usize_at = |i: usize| {
            toks[i]
                .parse::<usize>()
                .map_err(|_| err(format!("expected integer, got {:?}", toks[i])))
        };
        match toks[0] {
            "LINES" => {
                arity(2)?;
                if lines_decl.replace(usize_at(1)?).is_some() {
                    return Err(err("duplicate LINES".into()));
                }
            }
            "FREQ" => {
                arity(2)?;
                let f = parse_value(toks[1]).map_err(err)?;
                if freq.replace(f).is_some() {
                    return Err(err("duplicate FREQ".into()));
                }
            }
            "STAGE" => {
                if toks.len() < 3 {
                    return Err(err("STAGE needs an id and a kind".into()));
                }
                let name = toks[1];
                if name == INPUT_NAME || name.contains('.') {
                    return Err(err(format!("invalid stage id {name:?}")));
                }
                let stage = parse_stage(toks[2], &toks[3..]).map_err(err)?;
                stage.validate().map_err(|e| err(e.to_string()))?;
                if labels.insert(name.to_string(), stages.len()).is_some() {
                    return Err(err(format!("duplicate stage id {name:?}")));
                }
                stages.push((lineno, stage));
            }
            "EDGE" => {
                arity(3)?;
                let from = parse_endpoint(toks[1]).map_err(err)?;
                let to = parse_endpoint(toks[2]).map_err(err)?;
                wires.push((lineno, Wire::Edge { from, to }));
            }
            "IN" => {
                arity(3)?;
                let line = usize_at(1)?;
                let to = parse_endpoint(toks[2]).map_err(err)?;
                wires.push((lineno, Wire::In { line, to }));
            }
            "OUT" => {
                arity(3)?;
                let line = usize_at(1)?;
                let from = parse_endpoint(toks[2]).map_err(err)?;
                wires.push((lineno, Wire::Out { line, from }));
            }
            other => return Err(err(format!("unknown directive {other:?}"))),
        }
    }

    let last = text.lines().count().max(1);
    if !seen_header {
        return Err(Error::Parse {
            line: last,
            message: format!("missing header {HEADER:?}"),
        });
    }
    let n_lines = lines_decl.ok_or(Error::Parse {
        line: last,
        message: "missing LINES".into(),
    })?;
    let freq = freq.ok_or(Error::Parse {
        line: last,
        message: "missing FREQ".into(),
    })?;

    let mut b = NetworkBuilder::new(n_lines, freq);
    for (_, stage) in &stages {
        b.add(stage.clone());
    }
    let resolve = |ep: &Endpoint, lineno: usize| -> Result<Source> {
        match ep {
            Endpoint::Input(l) if *l < n_lines => Ok(Source::Line(*l)),
            Endpoint::Input(l) => Err(Error::Parse {
                line: lineno,
                message: format!("input line {l} out of range"),
            }),
            Endpoint::Stage { label, port } => labels
                .get(label)
                .map(|&i| Source::port(StageId(i), *port))
                .ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: format!("unknown stage {label:?}"),
                }),
        }
    };
    let as_input = |ep: &Endpoint, lineno: usize| -> Result<(StageId, usize)> {
        match resolve(ep, lineno)? {
            Source::Port { stage, port } if port < stages[stage.0].1.input_count() => {
                Ok((stage, port))
            }
            Source::Port { .. } => Err(Error::Parse {
                line: lineno,
                message: "destination port out of range".into(),
            }),
            Source::Line(_) => Err(Error::Parse {
                line: lineno,
                message: "network inputs cannot be driven".into(),
            }),
        }
    };
    let as_output = |src: Source, lineno: usize| -> Result<Source> {
        match src {
            Source::Port { stage, port } if port >= stages[stage.0].1.output_count() => {
                Err(Error::Parse {
                    line: lineno,
                    message: "source port out of range".into(),
                })
            }
            s => Ok(s),
        }
    };
    let mut driven_in = HashMap::new();
    let mut driven_out = HashMap::new();
    for (lineno, wire) in &wires {
        let lineno = *lineno;
        match wire {
            Wire::Edge { from, to } => {
                let src = as_output(resolve(from, lineno)?, lineno)?;
                if matches!(src, Source::Line(_)) {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "use IN to drive from an input line".into(),
                    });
                }
                let (dst, port) = as_input(to, lineno)?;
                if driven_in.insert((dst, port), lineno).is_some() {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "stage input driven more than once".into(),
                    });
                }
                b.connect(src, dst, port);
            }
            Wire::In { line, to } => {
                if *line >= n_lines {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("input line {line} out of range"),
                    });
                }
                let (dst, port) = as_input(to, lineno)?;
                if driven_in.insert((dst, port), lineno).is_some() {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "stage input driven more than once".into(),
                    });
                }
                b.connect(Source::Line(*line), dst, port);
            }
            Wire::Out { line, from } => {
                if *line >= n_lines {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("output line {line} out of range"),
                    });
                }
                if driven_out.insert(*line, lineno).is_some() {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("output line {line} driven more than once"),
                    });
                }
                b.output(*line, as_output(resolve(from, lineno)?, lineno)?);
            }
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# one inverter on line 1
EMUNET 1
LINES 2
FREQ 1k
STAGE x AMP 10k 10k
IN 1 x
OUT 0 in.0
OUT 1 x.0
";

    #[test]
    fn parses_suffixes() {
        assert_eq!(parse_value("10k").unwrap(), 10_000.0);
        assert_eq!(parse_value("100n").unwrap(), 100e-9);
        assert_eq!(parse_value("2.2u").unwrap(), 2.2e-6);
        assert_eq!(parse_value("1M").unwrap(), 1e6);
        assert_eq!(parse_value("-0.25").unwrap(), -0.25);
        assert!(parse_value("k").is_err());
        assert!(parse_value("1e3k").is_err());
        assert!(parse_value("inf").is_err());
    }

    #[test]
    fn imports_and_canonicalizes() {
        let net = import(SAMPLE).unwrap();
        assert_eq!(net.lines(), 2);
        let text = export(&net);
        assert_eq!(
            text,
            "EMUNET 1\nLINES 2\nFREQ 1000\nSTAGE amp0 AMP 10000 10000\nIN 1 amp0.0\nOUT 0 in.0\nOUT 1 amp0.0\n"
        );
        assert_eq!(export(&import(&text).unwrap()), text);
    }

    fn parse_line_of(text: &str) -> usize {
        match import(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_report_position() {
        let bad_stage = SAMPLE.replace("STAGE x AMP 10k 10k", "STAGE x AMP 10k");
        assert_eq!(parse_line_of(&bad_stage), 5);
        let bad_kind = SAMPLE.replace("AMP 10k 10k", "FOO 1");
        assert_eq!(parse_line_of(&bad_kind), 5);
        let unknown = SAMPLE.replace("IN 1 x", "IN 1 y");
        assert_eq!(parse_line_of(&unknown), 6);
        assert_eq!(parse_line_of("LINES 2\n"), 1);
        let dup = format!("{SAMPLE}OUT 1 in.1\n");
        assert_eq!(parse_line_of(&dup), 9);
    }

    #[test]
    fn missing_driver_is_structural() {
        let text = SAMPLE.replace("IN 1 x\n", "");
        assert!(matches!(import(&text), Err(Error::Structural(_))));
    }

    #[test]
    fn perm_and_sum_round_trip() {
        let text = "EMUNET 1\nLINES 2\nFREQ 50\n\
            STAGE p PERM 1->0,0->1\nSTAGE s SUM 2 0.5 -1.25\n\
            IN 0 p.0\nIN 1 p.1\nEDGE p.0 s.0\nEDGE p.1 s.1\nOUT 0 s.0\nOUT 1 p.1\n";
        let net = import(text).unwrap();
        let canon = export(&net);
        assert!(canon.contains("STAGE perm0 PERM 0->1,1->0"));
        assert!(canon.contains("STAGE sum1 SUM 2 0.5 -1.25"));
        assert_eq!(import(&canon).unwrap(), net);
        assert_eq!(export(&import(&canon).unwrap()), canon);
    }
}
