use std::io::Write;

use super::{sos_eval, SumOfSquares};
use crate::error::{Error, Result};

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidArgument(format!("write failed: {e}"))
}

fn coord_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|k| format!("x{k}")).collect()
}

/// `index,lambda` rows with 1-based indices.
pub fn write_eigenvalues_csv<W: Write>(mut out: W, eigenvalues: &[f64]) -> Result<()> {
    writeln!(out, "index,lambda").map_err(io_err)?;
    for (i, l) in eigenvalues.iter().enumerate() {
        writeln!(out, "{},{l:e}", i + 1).map_err(io_err)?;
    }
    Ok(())
}

/// `x1..xd,p_i` rows for eigenfunction `i` (0-based) of `sos`.
pub fn write_eigenfunction_csv<W: Write>(mut out: W, sos: &SumOfSquares, i: usize, points: &[Vec<f64>]) -> Result<()> {
    if i >= sos.len() {
        return Err(Error::InvalidArgument(format!("eigenfunction {i} not retained ({} terms)", sos.len())));
    }
    let mut header = coord_header(sos.basis().dim());
    header.push(format!("p_{}", i + 1));
    writeln!(out, "{}", header.join(",")).map_err(io_err)?;
    for x in points {
        let p = sos.eigenfunctions(x)?[i];
        let coords: Vec<String> = x.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{},{p:e}", coords.join(",")).map_err(io_err)?;
    }
    Ok(())
}

/// `x1..xd,v,dv_dx1..dv_dxd` rows.
pub fn write_value_csv<W: Write>(mut out: W, sos: &SumOfSquares, points: &[Vec<f64>]) -> Result<()> {
    let d = sos.basis().dim();
    let mut header = coord_header(d);
    header.push("v".into());
    header.extend((1..=d).map(|k| format!("dv_dx{k}")));
    writeln!(out, "{}", header.join(",")).map_err(io_err)?;
    for x in points {
        let (v, g) = sos_eval(sos, x)?;
        let fields: Vec<String> = x
            .iter()
            .chain(std::iter::once(&v))
            .chain(g.iter())
            .map(|v| format!("{v:e}"))
            .collect();
        writeln!(out, "{}", fields.join(",")).map_err(io_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn csv_layout() {
        let onb = super::super::tests::toy_basis();
        let sos = SumOfSquares::from_terms(Arc::clone(&onb), &[(1.0, vec![1.0])]).unwrap();
        let mut buf = Vec::new();
        write_value_csv(&mut buf, &sos, &[vec![0.0]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x1,v,dv_dx1\n0e0,0e0,0e0\n");
        let mut buf = Vec::new();
        write_eigenvalues_csv(&mut buf, &[0.5, 0.25]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,lambda\n1,5e-1\n2,2.5e-1\n");
        let mut buf = Vec::new();
        assert!(write_eigenfunction_csv(&mut buf, &sos, 3, &[]).is_err());
    }
}
