//! Versioned plain-text parameter dump: a header line, the architecture and
//! loss, then one `tensor,<index>,<rows>,<cols>` line per parameter tensor
//! followed by its row-major values on a single comma-separated line.

use std::io::{BufRead, Write};

use super::network::Network;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const FORMAT_HEADER: &str = "funbench-params,v1";

pub fn save_params<T: Real, W: Write>(net: &Network<T>, mut out: W) -> Result<()> {
    writeln!(out, "{FORMAT_HEADER}")?;
    writeln!(out, "architecture,{}", net.architecture.name())?;
    writeln!(out, "tensors,{}", net.params().len())?;
    for (k, (p, (r, c))) in net.params().iter().zip(net.param_shapes()).enumerate() {
        writeln!(out, "tensor,{k},{r},{c}")?;
        let line: Vec<String> = p.iter().map(|v| format!("{:e}", v.to_f64_lossy())).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// Loads values into a network whose layer structure matches the dump.
pub fn load_params<T: Real, R: BufRead>(net: &mut Network<T>, input: R) -> Result<()> {
    let mut lines = input.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, line)) => Ok((i + 1, line?)),
            None => Err(Error::Schema {
                row: 0,
                message: format!("unexpected end of file, expected {what}"),
            }),
        }
    };
    let (row, header) = next("header")?;
    if header.trim() != FORMAT_HEADER {
        return Err(Error::Schema {
            row,
            message: format!("unknown header {header:?}"),
        });
    }
    let (row, arch) = next("architecture")?;
    let expected = format!("architecture,{}", net.architecture.name());
    if arch.trim() != expected {
        return Err(Error::Schema {
            row,
            message: format!("expected {expected:?}, got {arch:?}"),
        });
    }
    let shapes = net.param_shapes();
    let (row, count) = next("tensor count")?;
    if count.trim() != format!("tensors,{}", shapes.len()) {
        return Err(Error::Schema {
            row,
            message: format!("expected {} tensors, got {count:?}", shapes.len()),
        });
    }
    let mut values = Vec::with_capacity(shapes.len());
    for (k, (r, c)) in shapes.iter().enumerate() {
        let (row, head) = next("tensor header")?;
        if head.trim() != format!("tensor,{k},{r},{c}") {
            return Err(Error::Schema {
                row,
                message: format!("expected tensor {k} of shape {r}x{c}, got {head:?}"),
            });
        }
        let (row, body) = next("tensor values")?;
        let parsed = body
            .split(',')
            .enumerate()
            .map(|(col, s)| {
                s.trim().parse::<f64>().map_err(|e| Error::Parse {
                    row,
                    column: col + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if parsed.len() != r * c {
            return Err(Error::Schema {
                row,
                message: format!("expected {} values, got {}", r * c, parsed.len()),
            });
        }
        values.push(parsed);
    }
    for (dst, src) in net.params_mut().into_iter().zip(values) {
        for (d, s) in dst.iter_mut().zip(src) {
            *d = T::lit(s);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuro::network::{Head, Widths};

    #[test]
    fn dump_and_reload_reproduces_parameters() {
        let w = Widths {
            hidden: 2,
            dense: 3,
            cr_head: 3,
        };
        let net = Network::<f64>::snn(Head::Binary, w, 17);
        let mut buf = Vec::new();
        save_params(&net, &mut buf).unwrap();
        let mut other = Network::<f64>::snn(Head::Binary, w, 99);
        assert_ne!(other, net);
        load_params(&mut other, buf.as_slice()).unwrap();
        assert_eq!(other, net);
    }

    #[test]
    fn mismatched_architecture_is_rejected() {
        let w = Widths {
            hidden: 2,
            dense: 3,
            cr_head: 3,
        };
        let net = Network::<f64>::snn(Head::Regression, w, 1);
        let mut buf = Vec::new();
        save_params(&net, &mut buf).unwrap();
        let mut fnn = Network::<f64>::fnn(4, Head::Regression, w, 1);
        assert!(matches!(
            load_params(&mut fnn, buf.as_slice()),
            Err(Error::Schema { .. })
        ));
    }
}
