//! Binary checkpoints.
//!
//! Layout, all little-endian: `"Q4NL"`, version `u32`, `d u32`, `N u32`,
//! `d × u32` points per axis, `L f64`, `t f64`, `kappa u32`, `p f64`, then for
//! each component `M` complex values as `(re, im)` `f64` pairs in flat grid order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use q4nl::{Error, FieldState, Grid, Kappa, Result, SystemParams};

pub const MAGIC: [u8; 4] = *b"Q4NL";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Header {
    pub version: u32,
    pub d: u32,
    pub components: u32,
    pub points: Vec<u32>,
    pub length: f64,
    pub t: f64,
    pub kappa: u32,
    pub p: f64,
}

impl Header {
    pub fn new(state: &FieldState, grid: &Grid, sys: &SystemParams) -> Self {
        Self {
            version: VERSION,
            d: grid.dim() as u32,
            components: state.components.len() as u32,
            points: vec![grid.points() as u32; grid.dim()],
            length: grid.spec().length,
            t: state.t,
            kappa: match sys.kappa() {
                Kappa::Zero => 0,
                Kappa::One => 1,
            },
            p: sys.p(),
        }
    }

    pub fn cells(&self) -> usize {
        self.points.iter().map(|&n| n as usize).product()
    }

    /// Grid described by the header; only cubic grids are produced by this crate.
    pub fn grid(&self) -> Result<Grid> {
        let n = self.points[0];
        if self.points.iter().any(|&m| m != n) {
            return Err(Error::Format(format!("non-cubic grid {:?}", self.points)));
        }
        Grid::from_parts(self.d as usize, n as usize, self.length)
    }
}

pub fn write_to<W: Write>(mut w: W, state: &FieldState, grid: &Grid, sys: &SystemParams) -> Result<()> {
    state.check_shape(grid, state.components.len())?;
    let h = Header::new(state, grid, sys);
    w.write_all(&MAGIC)?;
    w.write_all(&h.version.to_le_bytes())?;
    w.write_all(&h.d.to_le_bytes())?;
    w.write_all(&h.components.to_le_bytes())?;
    for n in &h.points {
        w.write_all(&n.to_le_bytes())?;
    }
    w.write_all(&h.length.to_le_bytes())?;
    w.write_all(&h.t.to_le_bytes())?;
    w.write_all(&h.kappa.to_le_bytes())?;
    w.write_all(&h.p.to_le_bytes())?;
    for u in &state.components {
        for z in u {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn u32_from<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn f64_from<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_from<R: Read>(mut r: R) -> Result<(Header, FieldState)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = u32_from(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}, expected {VERSION}")));
    }
    let d = u32_from(&mut r)?;
    if !(1..=3).contains(&d) {
        return Err(Error::Format(format!("dimension {d} out of range")));
    }
    let components = u32_from(&mut r)?;
    let points = (0..d).map(|_| u32_from(&mut r)).collect::<Result<Vec<_>>>()?;
    let header = Header {
        version,
        d,
        components,
        points,
        length: f64_from(&mut r)?,
        t: f64_from(&mut r)?,
        kappa: u32_from(&mut r)?,
        p: f64_from(&mut r)?,
    };
    let cells = header.cells();
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    let expected = components as usize * cells * 16;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload has {} bytes, header implies {expected}",
            payload.len()
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let fields = values
        .chunks_exact(2 * cells.max(1))
        .map(|c| c.chunks_exact(2).map(|z| Complex64::new(z[0], z[1])).collect())
        .collect();
    Ok((header.clone(), FieldState::new(header.t, fields)))
}

pub fn save(path: &Path, state: &FieldState, grid: &Grid, sys: &SystemParams) -> Result<()> {
    write_to(BufWriter::new(File::create(path)?), state, grid, sys)
}

pub fn load(path: &Path) -> Result<(Header, FieldState)> {
    read_from(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use q4nl::initial::{make_initial, InitialKind, InitialParams};

    fn sample() -> (Grid, SystemParams, FieldState) {
        let g = Grid::from_parts(2, 32, 32.0).unwrap();
        let sys = SystemParams::single(1.5, Kappa::Zero, 1.0).unwrap();
        let p = InitialParams {
            width: 1.2,
            spectral_width: 1.3,
            ..Default::default()
        };
        let mut s = make_initial(InitialKind::RandomSchwartz, &p, &g, &sys, 9).unwrap();
        s.t = 0.123456789;
        (g, sys, s)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (g, sys, s) = sample();
        let mut buf = Vec::new();
        write_to(&mut buf, &s, &g, &sys).unwrap();
        assert_eq!(buf.len(), 4 + 4 * 3 + 4 * 2 + 8 * 2 + 4 + 8 + 16 * 1024);
        let (h, back) = read_from(buf.as_slice()).unwrap();
        assert_eq!(h.kappa, 0);
        assert_eq!(h.p.to_bits(), 1.5f64.to_bits());
        assert_eq!(back.t.to_bits(), s.t.to_bits());
        for (a, b) in back.components[0].iter().zip(s.components[0].iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        assert_eq!(h.grid().unwrap().spec(), g.spec());
    }

    #[test]
    fn version_and_length_are_checked() {
        let (g, sys, s) = sample();
        let mut buf = Vec::new();
        write_to(&mut buf, &s, &g, &sys).unwrap();
        let mut wrong = buf.clone();
        wrong[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(read_from(wrong.as_slice()), Err(Error::Format(_))));
        let mut short = buf.clone();
        short.pop();
        assert!(matches!(read_from(short.as_slice()), Err(Error::Format(_))));
        let mut magic = buf;
        magic[0] = b'X';
        assert!(matches!(read_from(magic.as_slice()), Err(Error::Format(_))));
    }
}
