//! Line-oriented text model format.
//!
//! ```text
//! SSNN 1
//! input <maps> <length>
//! seed <u64>
//! l2 <f64>
//! layers <count>
//! conv <in> <out> <k>          then a kernels line and a biases line
//! subsample <factor>
//! flatten
//! tanh | sigmoid
//! batchnorm <units> <eps> <momentum> <0|1>
//!                              then gamma, beta and, if 1, running mean and var lines
//! dense <in> <out>             then a weights line and a biases line
//! end
//! ```
//!
//! Floats are written with 17 significant digits, so a load reproduces every
//! parameter bit-for-bit.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::layers::{Activation, BatchNormLayer, ConvLayer, DenseLayer, Layer, SubsampleLayer};
use super::{NetError, Network};

pub const MODEL_HEADER: &str = "SSNN 1";

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_values(values: &[f64]) -> String {
    values.iter().map(|v| fmt_f(*v)).collect::<Vec<_>>().join(" ")
}

pub fn write_model<W: Write>(mut w: W, net: &Network) -> Result<(), NetError> {
    let mut s = String::new();
    let _ = writeln!(s, "{MODEL_HEADER}");
    let _ = writeln!(s, "input {} {}", net.input_shape.0, net.input_shape.1);
    let _ = writeln!(s, "seed {}", net.rng_seed);
    let _ = writeln!(s, "l2 {}", fmt_f(net.l2));
    let _ = writeln!(s, "layers {}", net.layers.len());
    for layer in &net.layers {
        match layer {
            Layer::Conv(c) => {
                let _ = writeln!(s, "conv {} {} {}", c.in_maps, c.out_maps, c.kernel_len);
                let _ = writeln!(s, "{}", fmt_values(&c.kernels));
                let _ = writeln!(s, "{}", fmt_values(&c.biases));
            }
            Layer::Subsample(sub) => {
                let _ = writeln!(s, "subsample {}", sub.factor);
            }
            Layer::Flatten => {
                let _ = writeln!(s, "flatten");
            }
            Layer::Activation(a) => {
                let _ = writeln!(s, "{}", a.name());
            }
            Layer::BatchNorm(b) => {
                let _ = writeln!(
                    s,
                    "batchnorm {} {} {} {}",
                    b.units,
                    fmt_f(b.eps),
                    fmt_f(b.momentum),
                    u8::from(b.running.is_some())
                );
                let _ = writeln!(s, "{}", fmt_values(&b.gamma));
                let _ = writeln!(s, "{}", fmt_values(&b.beta));
                if let Some((m, v)) = &b.running {
                    let _ = writeln!(s, "{}", fmt_values(m));
                    let _ = writeln!(s, "{}", fmt_values(v));
                }
            }
            Layer::Dense(d) => {
                let _ = writeln!(s, "dense {} {}", d.in_units, d.out_units);
                let _ = writeln!(s, "{}", fmt_values(&d.weights));
                let _ = writeln!(s, "{}", fmt_values(&d.biases));
            }
        }
    }
    let _ = writeln!(s, "end");
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub fn save_model(path: impl AsRef<Path>, net: &Network) -> Result<(), NetError> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_model(&mut w, net)?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Network, NetError> {
    read_model(std::fs::File::open(path)?)
}

struct Lines {
    lines: Vec<String>,
    pos: usize,
}

impl Lines {
    fn bad(&self, reason: impl Into<String>) -> NetError {
        NetError::MalformedModelFile {
            line: self.pos,
            reason: reason.into(),
        }
    }

    fn next_line(&mut self) -> Result<&str, NetError> {
        if self.pos >= self.lines.len() {
            self.pos += 1;
            return Err(self.bad("unexpected end of file"));
        }
        self.pos += 1;
        Ok(&self.lines[self.pos - 1])
    }

    fn tokens(&mut self) -> Result<Vec<String>, NetError> {
        Ok(self.next_line()?.split_whitespace().map(str::to_string).collect())
    }

    fn keyed(&mut self, key: &str, n_args: usize) -> Result<Vec<String>, NetError> {
        let t = self.tokens()?;
        if t.first().map(String::as_str) != Some(key) || t.len() != n_args + 1 {
            return Err(self.bad(format!("expected `{key}` with {n_args} values")));
        }
        Ok(t[1..].to_vec())
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T, NetError> {
        s.parse().map_err(|_| self.bad(format!("cannot parse {s:?}")))
    }

    fn values(&mut self, n: usize) -> Result<Vec<f64>, NetError> {
        let t = self.tokens()?;
        if t.len() != n {
            return Err(self.bad(format!("expected {n} values, got {}", t.len())));
        }
        t.iter().map(|s| self.parse::<f64>(s)).collect()
    }
}

pub fn read_model<R: Read>(r: R) -> Result<Network, NetError> {
    let lines = BufReader::new(r).lines().collect::<Result<Vec<_>, _>>()?;
    let mut rd = Lines { lines, pos: 0 };

    let header = rd.next_line()?.trim().to_string();
    match header.strip_prefix("SSNN ") {
        Some("1") => {}
        Some(v) => return Err(NetError::VersionMismatch(v.to_string())),
        None => return Err(rd.bad("missing SSNN header")),
    }
    let input = rd.keyed("input", 2)?;
    let input_shape = (rd.parse(&input[0])?, rd.parse(&input[1])?);
    let seed_tok = rd.keyed("seed", 1)?;
    let seed = rd.parse(&seed_tok[0])?;
    let l2_tok = rd.keyed("l2", 1)?;
    let l2 = rd.parse(&l2_tok[0])?;
    let layers_tok = rd.keyed("layers", 1)?;
    let n_layers: usize = rd.parse(&layers_tok[0])?;

    let mut layers = Vec::with_capacity(n_layers.min(1024));
    for _ in 0..n_layers {
        let t = rd.tokens()?;
        let kind = t.first().cloned().unwrap_or_default();
        let args: Vec<usize> = match kind.as_str() {
            "batchnorm" => vec![],
            _ => t[1..].iter().map(|s| rd.parse(s)).collect::<Result<_, _>>()?,
        };
        let line = rd.pos;
        let arity = |n: usize| -> Result<(), NetError> {
            if t.len() != n + 1 {
                Err(NetError::MalformedModelFile {
                    line,
                    reason: format!("`{kind}` takes {n} values"),
                })
            } else {
                Ok(())
            }
        };
        let layer = match kind.as_str() {
            "conv" => {
                arity(3)?;
                let (in_maps, out_maps, kernel_len) = (args[0], args[1], args[2]);
                let kernels = rd.values(in_maps * out_maps * kernel_len)?;
                let biases = rd.values(out_maps)?;
                Layer::Conv(ConvLayer {
                    in_maps,
                    out_maps,
                    kernel_len,
                    kernels,
                    biases,
                })
            }
            "subsample" => {
                arity(1)?;
                Layer::Subsample(SubsampleLayer { factor: args[0] })
            }
            "flatten" => {
                arity(0)?;
                Layer::Flatten
            }
            "tanh" => {
                arity(0)?;
                Layer::Activation(Activation::Tanh)
            }
            "sigmoid" => {
                arity(0)?;
                Layer::Activation(Activation::Sigmoid)
            }
            "batchnorm" => {
                arity(4)?;
                let units: usize = rd.parse(&t[1])?;
                let eps: f64 = rd.parse(&t[2])?;
                let momentum: f64 = rd.parse(&t[3])?;
                let has_running = match t[4].as_str() {
                    "0" => false,
                    "1" => true,
                    _ => return Err(rd.bad("running-stats flag must be 0 or 1")),
                };
                let gamma = rd.values(units)?;
                let beta = rd.values(units)?;
                let running = if has_running {
                    Some((rd.values(units)?, rd.values(units)?))
                } else {
                    None
                };
                Layer::BatchNorm(BatchNormLayer {
                    units,
                    gamma,
                    beta,
                    eps,
                    momentum,
                    running,
                })
            }
            "dense" => {
                arity(2)?;
                let (in_units, out_units) = (args[0], args[1]);
                let weights = rd.values(in_units * out_units)?;
                let biases = rd.values(out_units)?;
                Layer::Dense(DenseLayer {
                    in_units,
                    out_units,
                    weights,
                    biases,
                })
            }
            other => return Err(rd.bad(format!("unknown layer kind {other:?}"))),
        };
        layers.push(layer);
    }
    if rd.next_line()?.trim() != "end" {
        return Err(rd.bad("expected `end`"));
    }
    Network::new(input_shape, layers, seed, l2).map_err(|e| match e {
        e @ NetError::MalformedModelFile { .. } => e,
        other => NetError::MalformedModelFile {
            line: rd.pos,
            reason: other.to_string(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Example;
    use crate::neuralnet::{build_paper_cnn, build_paper_mlp};
    use crate::signal_io::Label;

    fn trained_cnn() -> Network {
        let mut net = build_paper_cnn(11);
        let data: Vec<Example> = (0..4)
            .map(|i| {
                Example::new(
                    (0..24).map(|j| ((i * 24 + j) as f64 * 0.7).sin()).collect(),
                    if i % 2 == 0 { Label::Normal } else { Label::Stroke },
                )
            })
            .collect();
        let batch: Vec<&Example> = data.iter().collect();
        net.backward_and_update(&batch, 0.05).unwrap();
        net
    }

    fn round_trip(net: &Network) -> Network {
        let mut buf = Vec::new();
        write_model(&mut buf, net).unwrap();
        read_model(buf.as_slice()).unwrap()
    }

    #[test]
    fn bit_exact_round_trip() {
        for net in [trained_cnn(), build_paper_mlp(4)] {
            let back = round_trip(&net);
            assert_eq!(back, net);
            let x: Vec<f64> = (0..24).map(|i| i as f64 / 10.0 - 1.0).collect();
            assert_eq!(back.forward(&x).unwrap(), net.forward(&x).unwrap());
        }
    }

    #[test]
    fn running_stats_restored() {
        let net = trained_cnn();
        let back = round_trip(&net);
        let stats = |n: &Network| {
            n.layers.iter().find_map(|l| match l {
                Layer::BatchNorm(b) => b.running.clone(),
                _ => None,
            })
        };
        assert!(stats(&net).is_some());
        assert_eq!(stats(&back), stats(&net));
    }

    #[test]
    fn truncated_file_is_malformed() {
        let mut buf = Vec::new();
        write_model(&mut buf, &trained_cnn()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: String = text.lines().take(6).collect::<Vec<_>>().join("\n");
        assert!(matches!(read_model(cut.as_bytes()), Err(NetError::MalformedModelFile { .. })));
        let half = &text[..text.len() / 2];
        assert!(matches!(read_model(half.as_bytes()), Err(NetError::MalformedModelFile { .. })));
    }

    #[test]
    fn version_checked() {
        let text = "SSNN 2\n";
        assert!(matches!(read_model(text.as_bytes()), Err(NetError::VersionMismatch(v)) if v == "2"));
        assert!(matches!(read_model("hello\n".as_bytes()), Err(NetError::MalformedModelFile { line: 1, .. })));
    }

    #[test]
    fn floats_have_17_significant_digits() {
        assert_eq!(fmt_f(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f(-0.1).parse::<f64>().unwrap(), -0.1);
    }
}
