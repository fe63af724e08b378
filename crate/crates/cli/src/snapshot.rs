//! Binary field snapshots.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic      8 bytes  "FDTDSNAP"
//! version    u32      1
//! cells      3 × u64
//! spacing    3 × f64
//! scaling    u8       0 physical, 1 doubled
//! fields     ex ey ez hx hy hz, each row-major f64
//! resume     u8       0 none, 1 stepper state follows
//! [if 1]     u64 step; u8 len + scheme name; u8 len + formulation name;
//!            u8 len + magnetic update name; u64 dt bits; u8 scaling;
//!            six state arrays; six auxiliary arrays
//! ```
//!
//! The leading field block always holds physical fields at an integer step.
//! The optional resume block carries the raw stepper arrays so a run with
//! the same configuration can continue bit for bit.

use std::io::{self, Read, Write};

use fundfdtd::{AuxFieldSet, Component, FieldSet, Scaling, YeeGrid};

pub const MAGIC: &[u8; 8] = b"FDTDSNAP";
pub const VERSION: u32 = 1;

/// Raw stepper arrays and the configuration they belong to.
#[derive(Clone, Debug, PartialEq)]
pub struct ResumeState {
    pub step: u64,
    pub scheme: String,
    pub formulation: String,
    pub h_update: String,
    pub dt: f64,
    pub state: FieldSet<f64>,
    pub aux: AuxFieldSet<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub fields: FieldSet<f64>,
    pub resume: Option<ResumeState>,
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

fn scaling_tag(s: Scaling) -> u8 {
    match s {
        Scaling::Physical => 0,
        Scaling::Doubled => 1,
    }
}

fn write_arrays(w: &mut impl Write, f: &FieldSet<f64>) -> io::Result<()> {
    for c in Component::ALL {
        for v in f.component(c).iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn write_str(w: &mut impl Write, s: &str) -> io::Result<()> {
    let b = s.as_bytes();
    let n = u8::try_from(b.len()).map_err(|_| bad("name too long"))?;
    w.write_all(&[n])?;
    w.write_all(b)
}

pub fn write(w: &mut impl Write, snap: &Snapshot) -> io::Result<()> {
    let f = &snap.fields;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for n in f.grid.cells() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for h in f.grid.spacing() {
        w.write_all(&h.to_le_bytes())?;
    }
    w.write_all(&[scaling_tag(f.scaling)])?;
    write_arrays(w, f)?;
    match &snap.resume {
        None => w.write_all(&[0]),
        Some(r) => {
            w.write_all(&[1])?;
            w.write_all(&r.step.to_le_bytes())?;
            write_str(w, &r.scheme)?;
            write_str(w, &r.formulation)?;
            write_str(w, &r.h_update)?;
            w.write_all(&r.dt.to_bits().to_le_bytes())?;
            w.write_all(&[scaling_tag(r.state.scaling)])?;
            write_arrays(w, &r.state)?;
            write_arrays(w, &r.aux.clone().into_fields())
        }
    }
}

struct Reader<R> {
    r: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> io::Result<[u8; N]> {
        let mut b = [0u8; N];
        self.r.read_exact(&mut b)?;
        Ok(b)
    }

    fn u8(&mut self) -> io::Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u64(&mut self) -> io::Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> io::Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn string(&mut self) -> io::Result<String> {
        let n = self.u8()? as usize;
        let mut b = vec![0u8; n];
        self.r.read_exact(&mut b)?;
        String::from_utf8(b).map_err(|_| bad("name is not UTF-8"))
    }

    fn scaling(&mut self) -> io::Result<Scaling> {
        match self.u8()? {
            0 => Ok(Scaling::Physical),
            1 => Ok(Scaling::Doubled),
            t => Err(bad(format!("unknown scaling tag {t}"))),
        }
    }

    fn arrays(&mut self, grid: YeeGrid, scaling: Scaling) -> io::Result<FieldSet<f64>> {
        let mut f = FieldSet::zeros(grid);
        for c in Component::ALL {
            for v in f.component_mut(c).iter_mut() {
                *v = self.f64()?;
            }
        }
        f.scaling = scaling;
        Ok(f)
    }
}

pub fn read(r: impl Read) -> io::Result<Snapshot> {
    let mut rd = Reader { r };
    if &rd.bytes::<8>()? != MAGIC {
        return Err(bad("not a field snapshot (bad magic)"));
    }
    let version = u32::from_le_bytes(rd.bytes()?);
    if version != VERSION {
        return Err(bad(format!("unsupported snapshot version {version}")));
    }
    let mut cells = [0usize; 3];
    for c in cells.iter_mut() {
        *c = usize::try_from(rd.u64()?).map_err(|_| bad("grid too large"))?;
    }
    let mut spacing = [0.0; 3];
    for h in spacing.iter_mut() {
        *h = rd.f64()?;
    }
    let grid = YeeGrid::new(cells, spacing).map_err(|e| bad(e.to_string()))?;
    let scaling = rd.scaling()?;
    let fields = rd.arrays(grid, scaling)?;
    let resume = match rd.u8()? {
        0 => None,
        1 => {
            let step = rd.u64()?;
            let scheme = rd.string()?;
            let formulation = rd.string()?;
            let h_update = rd.string()?;
            let dt = f64::from_bits(rd.u64()?);
            let s = rd.scaling()?;
            let state = rd.arrays(grid, s)?;
            let aux = AuxFieldSet::from_fields(rd.arrays(grid, Scaling::Physical)?);
            Some(ResumeState {
                step,
                scheme,
                formulation,
                h_update,
                dt,
                state,
                aux,
            })
        }
        t => return Err(bad(format!("unknown resume tag {t}"))),
    };
    let mut rest = Vec::new();
    rd.r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(bad(format!("{} trailing bytes", rest.len())));
    }
    Ok(Snapshot { fields, resume })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = YeeGrid::new([3, 4, 5], [0.5, 1.0, 0.25]).unwrap();
        let mut state = FieldSet::random(g, 2);
        state.scaling = Scaling::Doubled;
        let snap = Snapshot {
            fields: FieldSet::random(g, 1),
            resume: Some(ResumeState {
                step: 17,
                scheme: "adi".into(),
                formulation: "fundamental".into(),
                h_update: "combined".into(),
                dt: 0.1 + 0.2,
                state,
                aux: AuxFieldSet::from_fields(FieldSet::random(g, 3)),
            }),
        };
        let mut buf = Vec::new();
        write(&mut buf, &snap).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(read(&buf[..]).unwrap(), snap);

        let plain = Snapshot {
            fields: FieldSet::random(g, 4),
            resume: None,
        };
        let mut buf = Vec::new();
        write(&mut buf, &plain).unwrap();
        let header = 8 + 4 + 24 + 24 + 1;
        assert_eq!(buf.len(), header + 8 * g.unknowns() + 1);
        assert_eq!(read(&buf[..]).unwrap(), plain);
    }

    #[test]
    fn rejects_corrupt_input() {
        assert!(read(&b"NOTASNAP"[..]).is_err());
        let g = YeeGrid::cube(3).unwrap();
        let mut buf = Vec::new();
        write(&mut buf, &Snapshot { fields: FieldSet::zeros(g), resume: None }).unwrap();
        buf.pop();
        assert!(read(&buf[..]).is_err());
        buf.push(0);
        buf.push(0);
        assert!(read(&buf[..]).is_err());
    }
}
