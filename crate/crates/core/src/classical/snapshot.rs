//! Field snapshots.
//!
//! Binary layout, all little-endian: `M: u64`, `halfwidth: f64`, `t: f64`,
//! then `M` interleaved `(re, im)` f64 pairs for `u` followed by `M` for `v`.
//! CSV profiles carry `z,intensity_u,intensity_v` rows.

use std::io::{self, Read, Write};

use num_complex::Complex64;

use super::Field2;

pub fn write_snapshot<W: Write>(mut w: W, field: &Field2) -> io::Result<()> {
    w.write_all(&(field.len() as u64).to_le_bytes())?;
    w.write_all(&field.halfwidth.to_le_bytes())?;
    w.write_all(&field.t.to_le_bytes())?;
    for c in field.u.iter().chain(&field.v) {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_snapshot<R: Read>(mut r: R) -> io::Result<Field2> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    let m = u64::from_le_bytes(b) as usize;
    if m == 0 || m > 1 << 28 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, format!("bad point count {m}")));
    }
    let halfwidth = read_f64(&mut r)?;
    let t = read_f64(&mut r)?;
    let read_comp = |r: &mut R| -> io::Result<Vec<Complex64>> {
        (0..m).map(|_| Ok(Complex64::new(read_f64(r)?, read_f64(r)?))).collect()
    };
    let u = read_comp(&mut r)?;
    let v = read_comp(&mut r)?;
    Ok(Field2 { u, v, halfwidth, t })
}

pub fn write_profile_csv<W: Write>(mut w: W, field: &Field2) -> io::Result<()> {
    writeln!(w, "z,intensity_u,intensity_v")?;
    for k in 0..field.len() {
        writeln!(w, "{},{},{}", field.z(k), field.u[k].norm_sqr(), field.v[k].norm_sqr())?;
    }
    Ok(())
}
