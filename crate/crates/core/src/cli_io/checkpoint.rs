//! Binary checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 7 | magic `NLCSIM1` |
//! | 4 + 4 | dim, N as `u32` |
//! | 8 | t as `f64` |
//! | 8 | completed steps as `u64` |
//! | 1 + len | scheme tag, length-prefixed |
//! | 32 | SHA-256 config digest |
//! | 88 | monitor state |
//! | (dim+3)·Nⁿ·16 | coefficients of u then d, (re, im) pairs in lattice order |

use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::diagnostics::MonitorSnapshot;
use crate::error::{Error, Result};
use crate::solver::{max_divergence, sphere_defect, State, MIN_DIRECTOR_NORM};
use crate::spectral::{Grid, SpectralField, VectorField};

pub const MAGIC: &[u8; 7] = b"NLCSIM1";

/// Largest tolerated departure from the run invariants on load. The director
/// of a dealiased run is unit only up to the filtered high modes, so its bound
/// is the one the solver itself enforces when renormalizing.
const DIVERGENCE_TOL: f64 = 1e-10;
const SPHERE_TOL: f64 = MIN_DIRECTOR_NORM;
const HERMITIAN_TOL: f64 = 1e-10;

pub type ConfigDigest = [u8; 32];

pub fn digest(text: &str) -> ConfigDigest {
    Sha256::digest(text.as_bytes()).into()
}

pub fn hex(d: &ConfigDigest) -> String {
    d.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointHeader {
    pub dim: usize,
    pub n: usize,
    pub t: f64,
    pub step: u64,
    pub scheme: String,
    pub digest: ConfigDigest,
    pub monitor: MonitorSnapshot,
}

impl CheckpointHeader {
    pub fn payload_len(&self) -> usize {
        (self.dim + 3) * self.n.pow(self.dim as u32) * 16
    }
}

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub state: State,
}

fn encode_header(h: &CheckpointHeader) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(h.dim as u32).to_le_bytes());
    out.extend_from_slice(&(h.n as u32).to_le_bytes());
    out.extend_from_slice(&h.t.to_le_bytes());
    out.extend_from_slice(&h.step.to_le_bytes());
    out.push(h.scheme.len() as u8);
    out.extend_from_slice(h.scheme.as_bytes());
    out.extend_from_slice(&h.digest);
    out.extend_from_slice(&h.monitor.to_bytes());
    out
}

/// Writes atomically: the data goes to a sibling temporary file that is then
/// renamed over `path`.
pub fn save(path: &Path, header: &CheckpointHeader, state: &State) -> Result<()> {
    let grid = state.grid();
    if grid.dim() != header.dim || grid.n() != header.n {
        return Err(Error::Checkpoint(
            "header grid does not match the state".into(),
        ));
    }
    if header.scheme.len() > u8::MAX as usize {
        return Err(Error::Checkpoint("scheme tag too long".into()));
    }
    let mut bytes = encode_header(header);
    bytes.reserve(header.payload_len());
    for c in state.u.components().iter().chain(state.d.components()) {
        for z in c.coeffs() {
            bytes.extend_from_slice(&z.re.to_le_bytes());
            bytes.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Checkpoint(format!(
                "truncated file: ends inside the {what} at byte {}",
                self.bytes.len()
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4, what)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8, what)?.try_into().expect("8 bytes"),
        ))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_bits(self.u64(what)?))
    }
}

fn decode_header(c: &mut Cursor) -> Result<CheckpointHeader> {
    if c.take(MAGIC.len(), "magic")? != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint: bad magic".into()));
    }
    let dim = c.u32("header")? as usize;
    let n = c.u32("header")? as usize;
    if !(dim == 2 || dim == 3) || n < 8 || !n.is_power_of_two() || n > 1 << 12 {
        return Err(Error::Checkpoint(format!(
            "invalid grid in header: dim {dim}, N {n}"
        )));
    }
    let t = c.f64("header")?;
    let step = c.u64("header")?;
    let len = c.take(1, "header")?[0] as usize;
    let scheme = String::from_utf8(c.take(len, "header")?.to_vec())
        .map_err(|_| Error::Checkpoint("scheme tag is not UTF-8".into()))?;
    let digest = c.take(32, "header")?.try_into().expect("32 bytes");
    let monitor = MonitorSnapshot::from_bytes(c.take(MonitorSnapshot::BYTES, "header")?)?;
    Ok(CheckpointHeader {
        dim,
        n,
        t,
        step,
        scheme,
        digest,
        monitor,
    })
}

pub fn read_header(path: &Path) -> Result<CheckpointHeader> {
    let bytes = fs::read(path)?;
    decode_header(&mut Cursor {
        bytes: &bytes,
        pos: 0,
    })
}

fn check_invariants(state: &State) -> Result<()> {
    if !state.is_finite() {
        return Err(Error::Checkpoint("state contains non-finite values".into()));
    }
    for c in state.u.components().iter().chain(state.d.components()) {
        let defect = c.hermitian_defect();
        if defect > HERMITIAN_TOL * c.max_coeff().max(1.0) {
            return Err(Error::Checkpoint(format!(
                "coefficients are not of a real field (Hermitian defect {defect:e})"
            )));
        }
    }
    let scale = state
        .u
        .components()
        .iter()
        .fold(1.0f64, |m, c| m.max(c.max_coeff()));
    let div = max_divergence(&state.u)?;
    if div > DIVERGENCE_TOL * scale {
        return Err(Error::Checkpoint(format!(
            "velocity is not divergence-free ({div:e})"
        )));
    }
    let defect = sphere_defect(&state.d)?;
    if defect > SPHERE_TOL {
        return Err(Error::Checkpoint(format!(
            "director is not unit length (max defect {defect:e})"
        )));
    }
    Ok(())
}

/// Reads a checkpoint, rejecting truncated or oversized files and states that
/// break the run invariants. Nothing is returned unless every check passes.
pub fn load(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path)?;
    let mut c = Cursor {
        bytes: &bytes,
        pos: 0,
    };
    let header = decode_header(&mut c)?;
    let remaining = bytes.len() - c.pos;
    let want = header.payload_len();
    if remaining < want {
        return Err(Error::Checkpoint(format!(
            "truncated payload: {remaining} of {want} bytes present"
        )));
    }
    if remaining > want {
        return Err(Error::Checkpoint(format!(
            "{} unexpected trailing bytes after the payload",
            remaining - want
        )));
    }
    let grid = Grid::new(header.dim, header.n)?;
    let mut comps = Vec::with_capacity(header.dim + 3);
    for chunk in c.bytes[c.pos..].chunks_exact(grid.len() * 16) {
        let coeffs: Vec<Complex64> = chunk
            .chunks_exact(16)
            .map(|z| {
                let re = f64::from_le_bytes(z[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(z[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        comps.push(SpectralField::from_coeffs(&grid, coeffs)?);
    }
    let d = comps.split_off(header.dim);
    let state = State::new(header.t, VectorField::new(comps)?, VectorField::new(d)?)?;
    check_invariants(&state)?;
    Ok(Checkpoint { header, state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::{equatorial_director, taylor_green};
    use crate::solver::SCHEME_TAG;

    fn sample() -> (CheckpointHeader, State) {
        let g = Grid::new(2, 16).unwrap();
        let theta = SpectralField::from_fn(&g, |x| 0.3 * x[0].sin() * x[1].cos());
        let state = State::new(
            0.25,
            taylor_green(&g, 0.7),
            equatorial_director(&g, &theta).unwrap(),
        )
        .unwrap();
        let header = CheckpointHeader {
            dim: 2,
            n: 16,
            t: 0.25,
            step: 250,
            scheme: SCHEME_TAG.into(),
            digest: digest("cfg"),
            monitor: MonitorSnapshot {
                accumulators: [1.0, 2.0, 3.0, 4.0],
                integrands: [0.5, 0.25, 0.125, 1.0 / 3.0],
                criterion_ok: false,
                sup_besov_u: 0.1,
                sup_besov_grad_d: 0.2,
            },
        };
        (header, state)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.bin");
        let (h, s) = sample();
        save(&path, &h, &s).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(back.header, h);
        for (a, b) in s.u.components().iter().chain(s.d.components()).zip(
            back.state
                .u
                .components()
                .iter()
                .chain(back.state.d.components()),
        ) {
            assert_eq!(a.coeffs(), b.coeffs());
        }
        let len = fs::metadata(&path).unwrap().len() as usize;
        assert_eq!(len, encode_header(&h).len() + 5 * 256 * 16);
    }

    #[test]
    fn truncated_and_corrupt_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.bin");
        let (h, s) = sample();
        save(&path, &h, &s).unwrap();
        let bytes = fs::read(&path).unwrap();

        for cut in [3, 20, bytes.len() - 1] {
            fs::write(&path, &bytes[..cut]).unwrap();
            let err = load(&path).unwrap_err().to_string();
            assert!(err.contains("truncated"), "{err}");
        }

        let mut extra = bytes.clone();
        extra.push(0);
        fs::write(&path, &extra).unwrap();
        assert!(load(&path).is_err());

        let mut magic = bytes.clone();
        magic[0] = b'X';
        fs::write(&path, &magic).unwrap();
        assert!(load(&path).unwrap_err().to_string().contains("magic"));

        let bad = State::new(s.t, s.u.clone(), s.d.scale(2.0)).unwrap();
        save(&path, &h, &bad).unwrap();
        assert!(load(&path).unwrap_err().to_string().contains("unit length"));
    }
}
