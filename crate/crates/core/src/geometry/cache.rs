//! Binary graph cache.
//!
//! Layout, all integers little-endian: the magic `VCSK1`, then level, vertex
//! count and edge count as `u64`; one `(a, b, m)` triple of `i64` per vertex
//! in canonical order; one `(lo, hi, cell)` triple of `u64` per edge in edge
//! order. There are no floating-point fields.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::geometry::address::Digit;
use crate::geometry::graph::{cell_count, edge_count, vertex_count, CableGraph};

pub const MAGIC: &[u8; 5] = b"VCSK1";

pub fn write_graph<W: Write>(g: &CableGraph, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    for x in [g.level() as u64, g.vertex_count() as u64, g.edge_count() as u64] {
        out.write_all(&x.to_le_bytes())?;
    }
    let m = g.level() as i64;
    for &(a, b) in g.raw_coords() {
        for x in [a as i64, b as i64, m] {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    for e in 0..g.edge_count() {
        let (lo, hi) = g.edge_endpoints(e);
        for x in [lo as u64, hi as u64, (e / 4) as u64] {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

pub fn read_graph<R: Read>(mut input: R) -> Result<CableGraph> {
    let mut magic = [0u8; 5];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic; not a VCSK1 graph cache".into()));
    }
    let level = read_u64(&mut input)?;
    let nv = read_u64(&mut input)?;
    let ne = read_u64(&mut input)?;
    if level > 19 {
        return Err(Error::Format(format!("implausible level {level}")));
    }
    let level = level as u32;
    if nv != vertex_count(level) || ne != edge_count(level) {
        return Err(Error::Format("counts do not match the level".into()));
    }
    let mut coords = Vec::with_capacity(nv as usize);
    for _ in 0..nv {
        let a = read_u64(&mut input)? as i64;
        let b = read_u64(&mut input)? as i64;
        let m = read_u64(&mut input)? as i64;
        if m != level as i64 {
            return Err(Error::Format("vertex scale does not match the level".into()));
        }
        let (a, b) = (i32::try_from(a), i32::try_from(b));
        match (a, b) {
            (Ok(a), Ok(b)) => coords.push((a, b)),
            _ => return Err(Error::Format("vertex coordinate out of range".into())),
        }
    }
    let mut cells = Vec::with_capacity(cell_count(level) as usize);
    let mut pending = [(0u32, 0u32); 4];
    for e in 0..ne as usize {
        let lo = read_u64(&mut input)?;
        let hi = read_u64(&mut input)?;
        let cell = read_u64(&mut input)? as usize;
        if cell != e / 4 || lo >= nv || hi >= nv {
            return Err(Error::Format(format!("edge record {e} is inconsistent")));
        }
        pending[e % 4] = (lo as u32, hi as u32);
        if e % 4 == 3 {
            // the cell center is the endpoint shared by all four edges
            let (a, b) = pending[0];
            let center = if pending.iter().all(|&(u, v)| u == a || v == a) { a } else { b };
            let mut entry = [center; 5];
            for (k, &(u, v)) in pending.iter().enumerate() {
                if u != center && v != center {
                    return Err(Error::Format(format!("cell {cell} is not a star")));
                }
                entry[Digit::CORNERS[k].slot()] = if u == center { v } else { u };
            }
            cells.push(entry);
        }
    }
    CableGraph::from_parts(level, coords, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for m in 0..=3 {
            let g = CableGraph::build(m).unwrap();
            let mut buf = Vec::new();
            write_graph(&g, &mut buf).unwrap();
            assert_eq!(&buf[..5], MAGIC);
            let h = read_graph(&buf[..]).unwrap();
            assert_eq!(h.level(), m);
            assert_eq!(h.raw_coords(), g.raw_coords());
            assert_eq!(h.raw_cells(), g.raw_cells());
            assert_eq!(h.root(), g.root());
        }
    }

    #[test]
    fn corrupt_input_is_rejected() {
        assert!(read_graph(&b"NOPE!"[..]).is_err());
        let g = CableGraph::build(1).unwrap();
        let mut buf = Vec::new();
        write_graph(&g, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_graph(&buf[..]).is_err());
    }
}
