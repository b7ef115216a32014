use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::qla::{CVector, PureStateVector, SubsystemLayout, C64};

/// Writes a 16-byte header (dimension, site count as little-endian `u64`)
/// followed by interleaved little-endian `f64` real and imaginary parts.
pub fn write_amplitudes<W: Write>(psi: &PureStateVector, mut w: W) -> std::io::Result<()> {
    w.write_all(&(psi.dim() as u64).to_le_bytes())?;
    w.write_all(&(psi.layout().num_sites() as u64).to_le_bytes())?;
    for z in psi.amplitudes().iter() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

/// Reads the format of [`write_amplitudes`]; sites are taken to be of equal
/// dimension.
pub fn read_amplitudes<R: Read>(mut r: R) -> Result<PureStateVector> {
    let io = |e: std::io::Error| Error::domain(format!("amplitude file: {e}"));
    let mut word = [0u8; 8];
    r.read_exact(&mut word).map_err(io)?;
    let dim = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word).map_err(io)?;
    let sites = u64::from_le_bytes(word) as usize;
    if sites == 0 || dim > crate::qla::MAX_VECTOR_DIM {
        return Err(Error::domain("amplitude header out of range"));
    }
    let local = (dim as f64).powf(1.0 / sites as f64).round() as usize;
    if local.checked_pow(sites as u32) != Some(dim) {
        return Err(Error::domain("dimension is not a power of the site count"));
    }
    let mut amps = CVector::zeros(dim);
    for k in 0..dim {
        r.read_exact(&mut word).map_err(io)?;
        let re = f64::from_le_bytes(word);
        r.read_exact(&mut word).map_err(io)?;
        amps[k] = C64::new(re, f64::from_le_bytes(word));
    }
    PureStateVector::new(amps, SubsystemLayout::new(vec![local; sites])?)
}
