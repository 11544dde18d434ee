//! `.ssig` cohort files.
//!
//! Little-endian layout:
//!
//! ```text
//! "SSIG"  u32 version=1  u32 subject_count
//! per subject:  u16 id_len, id (UTF-8), u8 label, u16 channel_count
//! per channel:  u16 name_len, name (UTF-8), f64 sample_rate_hz, u64 sample_count, f64[sample_count]
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Channel, Cohort, CohortMeta, Label, Recording, SignalError, WORKING_RATE_HZ};

const MAGIC: &[u8; 4] = b"SSIG";
const VERSION: u32 = 1;
// samples decoded per read call; bounds allocation when a header lies about its length
const CHUNK_SAMPLES: usize = 8192;

pub fn save_cohort(cohort: &Cohort, path: impl AsRef<Path>) -> Result<(), SignalError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_cohort(cohort, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Reads a cohort exactly as stored. Channels keep their recorded rates so
/// that `load_cohort(save_cohort(c)) == c`.
pub fn load_cohort(path: impl AsRef<Path>) -> Result<Cohort, SignalError> {
    let path = path.as_ref();
    let mut r = BufReader::new(File::open(path)?);
    let mut cohort = read_cohort(&mut r)?;
    cohort.meta.source = path.display().to_string();
    Ok(cohort)
}

/// Reads a cohort and normalizes every channel to `working_rate_hz`.
pub fn load_cohort_at(path: impl AsRef<Path>, working_rate_hz: f64) -> Result<Cohort, SignalError> {
    load_cohort(path)?.at_rate(working_rate_hz)
}

pub fn write_cohort<W: Write>(cohort: &Cohort, w: &mut W) -> Result<(), SignalError> {
    cohort.validate()?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&len_u32(cohort.recordings.len(), "subject count")?.to_le_bytes())?;
    for rec in &cohort.recordings {
        write_str(w, &rec.subject_id, "subject id")?;
        w.write_all(&[rec.label.as_u8()])?;
        w.write_all(&len_u16(rec.channels.len(), "channel count")?.to_le_bytes())?;
        for ch in &rec.channels {
            write_str(w, &ch.name, "channel name")?;
            w.write_all(&ch.sample_rate_hz.to_le_bytes())?;
            w.write_all(&(ch.samples.len() as u64).to_le_bytes())?;
            let mut buf = Vec::with_capacity(CHUNK_SAMPLES * 8);
            for chunk in ch.samples.chunks(CHUNK_SAMPLES) {
                buf.clear();
                for s in chunk {
                    buf.extend_from_slice(&s.to_le_bytes());
                }
                w.write_all(&buf)?;
            }
        }
    }
    Ok(())
}

pub fn read_cohort<R: Read>(r: &mut R) -> Result<Cohort, SignalError> {
    let mut magic = [0u8; 4];
    read_exact(r, &mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(SignalError::MalformedFile(format!("bad magic {magic:?}")));
    }
    let version = read_u32(r, "version")?;
    if version != VERSION {
        return Err(SignalError::MalformedFile(format!(
            "unsupported format version {version}"
        )));
    }
    let n_subjects = read_u32(r, "subject count")? as usize;
    let mut recordings = Vec::with_capacity(n_subjects.min(1024));
    for _ in 0..n_subjects {
        let subject_id = read_str(r, "subject id")?;
        let mut label = [0u8; 1];
        read_exact(r, &mut label, "label")?;
        let label = Label::from_u8(label[0])
            .ok_or_else(|| SignalError::MalformedFile(format!("label byte {}", label[0])))?;
        let n_channels = read_u16(r, "channel count")? as usize;
        let mut channels = Vec::with_capacity(n_channels);
        for _ in 0..n_channels {
            let name = read_str(r, "channel name")?;
            let mut rate = [0u8; 8];
            read_exact(r, &mut rate, "sample rate")?;
            let sample_rate_hz = f64::from_le_bytes(rate);
            let mut count = [0u8; 8];
            read_exact(r, &mut count, "sample count")?;
            let count = u64::from_le_bytes(count);
            let samples = read_samples(r, count)?;
            channels.push(Channel {
                name,
                sample_rate_hz,
                samples,
            });
        }
        recordings.push(Recording {
            subject_id,
            label,
            channels,
        });
    }
    let mut trailing = [0u8; 1];
    match r.read(&mut trailing)? {
        0 => {}
        _ => return Err(SignalError::MalformedFile("trailing bytes after last subject".into())),
    }
    let cohort = Cohort {
        recordings,
        meta: CohortMeta {
            source: String::new(),
            working_rate_hz: WORKING_RATE_HZ,
        },
    };
    cohort.validate()?;
    Ok(cohort)
}

fn read_samples<R: Read>(r: &mut R, count: u64) -> Result<Vec<f64>, SignalError> {
    let count = usize::try_from(count)
        .map_err(|_| SignalError::MalformedFile(format!("sample count {count} too large")))?;
    let mut samples = Vec::with_capacity(count.min(1 << 20));
    let mut buf = vec![0u8; CHUNK_SAMPLES * 8];
    let mut remaining = count;
    while remaining > 0 {
        let take = remaining.min(CHUNK_SAMPLES);
        let bytes = &mut buf[..take * 8];
        read_exact(r, bytes, "samples")?;
        samples.extend(
            bytes
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk"))),
        );
        remaining -= take;
    }
    Ok(samples)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<(), SignalError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => SignalError::MalformedFile(format!("truncated while reading {what}")),
        _ => SignalError::IoFailure(e),
    })
}

fn read_u16<R: Read>(r: &mut R, what: &str) -> Result<u16, SignalError> {
    let mut b = [0u8; 2];
    read_exact(r, &mut b, what)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32, SignalError> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

fn read_str<R: Read>(r: &mut R, what: &str) -> Result<String, SignalError> {
    let len = read_u16(r, what)? as usize;
    let mut b = vec![0u8; len];
    read_exact(r, &mut b, what)?;
    String::from_utf8(b).map_err(|_| SignalError::MalformedFile(format!("{what} is not UTF-8")))
}

fn write_str<W: Write>(w: &mut W, s: &str, what: &str) -> Result<(), SignalError> {
    w.write_all(&len_u16(s.len(), what)?.to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn len_u16(n: usize, what: &str) -> Result<u16, SignalError> {
    u16::try_from(n).map_err(|_| SignalError::MalformedFile(format!("{what} {n} exceeds u16")))
}

fn len_u32(n: usize, what: &str) -> Result<u32, SignalError> {
    u32::try_from(n).map_err(|_| SignalError::MalformedFile(format!("{what} {n} exceeds u32")))
}
