//! Chunked little-endian `.snna` encoding.
//!
//! ```text
//! chunk   = tag[4] len:u32 payload[len]
//! HDRR    = magic[4] version:u16 flags:u16 inputs:u32 outputs:u32 total:u32 window:u32 clock_hz:u32
//! LAYR    = n:u32 { kind:u8 fire_once:u8 reserved:u16 in:u32 out:u32 leak_num:u32 leak_den:u32 }*n
//! WGHT    = rows:u32 cols:u32 scale:f32 values:i8[rows*cols]
//! THRS    = n:u32 values:i32[n]
//! CONN    = n_desc:u32 n_syn:u32 { offset:u32 count:u16 }*n_desc { target:u16 weight:i8 reserved:u8 }*n_syn
//! DECD    = num_classes:u32 group_size:u32 output_base:u32
//! DIGE    = sha256[32] over every preceding byte
//! ```

use std::io::{self, Read, Write};

use super::{
    artifact_digest, digest_hex, validate_artifact, ArtifactFlags, ArtifactHeader, ConnectivityTable,
    DecodeMetadata, DeploymentArtifact, DigestBytes, LayerDescriptor, LayerKind, QuantizedWeights,
    SourceDescriptor, Synapse, ThresholdVector, ValidationLevel, FORMAT_VERSION, MAGIC,
};
use crate::error::{Error, Result};

pub const CHUNK_ORDER: [[u8; 4]; 7] = [*b"HDRR", *b"LAYR", *b"WGHT", *b"THRS", *b"CONN", *b"DECD", *b"DIGE"];

const HEADER_LEN: usize = 28;
const LAYER_LEN: usize = 20;
const DESCRIPTOR_LEN: usize = 6;
const SYNAPSE_LEN: usize = 4;
const DIGEST_LEN: usize = 32;
/// Upper bound on a single chunk; well above the encodable capacity, guards
/// allocation on corrupted length fields.
const MAX_CHUNK_LEN: u32 = 64 << 20;

/// Serializes `artifact` after validating it at the encodable level.
/// Returns the number of bytes written.
pub fn write_artifact<W: Write>(artifact: &DeploymentArtifact, mut sink: W) -> Result<u64> {
    let report = validate_artifact(artifact, ValidationLevel::Encodable);
    if !report.is_valid() {
        return Err(Error::Validation(report));
    }
    let bytes = artifact.to_bytes();
    sink.write_all(&bytes)?;
    sink.flush()?;
    Ok(bytes.len() as u64)
}

/// Parses a complete `.snna` stream and checks its digest. Does not run
/// semantic validation; callers pick the level they need.
pub fn read_artifact<R: Read>(mut source: R) -> Result<DeploymentArtifact> {
    let mut consumed = Vec::new();
    let mut payloads: Vec<Vec<u8>> = Vec::with_capacity(CHUNK_ORDER.len());

    for (i, expected) in CHUNK_ORDER.iter().enumerate() {
        let mut head = [0u8; 8];
        source.read_exact(&mut head)?;
        let tag: [u8; 4] = head[..4].try_into().unwrap();
        if &tag != expected {
            return Err(Error::format(format!(
                "expected chunk {} at position {i}, found {}",
                String::from_utf8_lossy(expected),
                String::from_utf8_lossy(&tag)
            )));
        }
        let len = u32::from_le_bytes(head[4..].try_into().unwrap());
        if len > MAX_CHUNK_LEN {
            return Err(Error::format(format!("chunk {} length {len} exceeds limit", String::from_utf8_lossy(&tag))));
        }
        let mut payload = Vec::with_capacity(len as usize);
        (&mut source).take(len as u64).read_to_end(&mut payload)?;
        if payload.len() != len as usize {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "truncated chunk payload").into());
        }
        if i == 0 {
            check_magic_and_version(&payload)?;
        }
        if i + 1 < CHUNK_ORDER.len() {
            consumed.extend_from_slice(&head);
            consumed.extend_from_slice(&payload);
        }
        payloads.push(payload);
    }

    let mut trailing = [0u8; 1];
    if source.read(&mut trailing)? != 0 {
        return Err(Error::format("trailing bytes after DIGE chunk"));
    }

    let stored: DigestBytes = payloads[6]
        .as_slice()
        .try_into()
        .map_err(|_| Error::format(format!("DIGE payload must be {DIGEST_LEN} bytes")))?;
    let computed = artifact_digest(&consumed);
    if stored != computed {
        return Err(Error::Corruption { stored: digest_hex(&stored), computed: digest_hex(&computed) });
    }

    Ok(DeploymentArtifact {
        header: decode_header(&payloads[0])?,
        layers: decode_layers(&payloads[1])?,
        weights: decode_weights(&payloads[2])?,
        thresholds: decode_thresholds(&payloads[3])?,
        connectivity: decode_connectivity(&payloads[4])?,
        decode: decode_decode(&payloads[5])?,
        digest: stored,
    })
}

fn check_magic_and_version(payload: &[u8]) -> Result<()> {
    if payload.len() < 6 {
        return Err(Error::format("HDRR chunk too short"));
    }
    if payload[..4] != MAGIC {
        return Err(Error::format(format!("bad magic {:02x?}", &payload[..4])));
    }
    let version = u16::from_le_bytes([payload[4], payload[5]]);
    if version != FORMAT_VERSION {
        return Err(Error::format(format!("unsupported version {version}")));
    }
    Ok(())
}

pub(crate) fn encode_body(a: &DeploymentArtifact) -> Vec<u8> {
    let mut out = Vec::with_capacity(
        256 + a.weights.values.len() + 4 * a.thresholds.values.len() + 4 * a.connectivity.synapses.len(),
    );

    let h = &a.header;
    let mut p = Vec::with_capacity(HEADER_LEN);
    p.extend_from_slice(&h.magic);
    p.extend_from_slice(&h.version.to_le_bytes());
    p.extend_from_slice(&h.flags.0.to_le_bytes());
    for v in [h.input_count, h.output_count, h.total_neurons, h.time_window, h.clock_hz] {
        p.extend_from_slice(&v.to_le_bytes());
    }
    put_chunk(&mut out, b"HDRR", &p);

    let mut p = Vec::with_capacity(4 + LAYER_LEN * a.layers.len());
    p.extend_from_slice(&(a.layers.len() as u32).to_le_bytes());
    for l in &a.layers {
        p.push(l.kind.code());
        p.push(l.fire_once as u8);
        p.extend_from_slice(&0u16.to_le_bytes());
        for v in [l.in_dim, l.out_dim, l.leak_num, l.leak_den] {
            p.extend_from_slice(&v.to_le_bytes());
        }
    }
    put_chunk(&mut out, b"LAYR", &p);

    let w = &a.weights;
    let mut p = Vec::with_capacity(12 + w.values.len());
    p.extend_from_slice(&w.rows.to_le_bytes());
    p.extend_from_slice(&w.cols.to_le_bytes());
    p.extend_from_slice(&w.scale.to_le_bytes());
    p.extend(w.values.iter().map(|&v| v as u8));
    put_chunk(&mut out, b"WGHT", &p);

    let mut p = Vec::with_capacity(4 + 4 * a.thresholds.values.len());
    p.extend_from_slice(&(a.thresholds.values.len() as u32).to_le_bytes());
    for v in &a.thresholds.values {
        p.extend_from_slice(&v.to_le_bytes());
    }
    put_chunk(&mut out, b"THRS", &p);

    let c = &a.connectivity;
    let mut p = Vec::with_capacity(8 + DESCRIPTOR_LEN * c.descriptors.len() + SYNAPSE_LEN * c.synapses.len());
    p.extend_from_slice(&(c.descriptors.len() as u32).to_le_bytes());
    p.extend_from_slice(&(c.synapses.len() as u32).to_le_bytes());
    for d in &c.descriptors {
        p.extend_from_slice(&d.offset.to_le_bytes());
        p.extend_from_slice(&d.count.to_le_bytes());
    }
    for s in &c.synapses {
        p.extend_from_slice(&s.target.to_le_bytes());
        p.push(s.weight as u8);
        p.push(0);
    }
    put_chunk(&mut out, b"CONN", &p);

    let d = &a.decode;
    let mut p = Vec::with_capacity(12);
    for v in [d.num_classes, d.group_size, d.output_base] {
        p.extend_from_slice(&v.to_le_bytes());
    }
    put_chunk(&mut out, b"DECD", &p);

    out
}

pub(crate) fn encode_with_digest(a: &DeploymentArtifact, digest: &DigestBytes) -> Vec<u8> {
    let mut out = encode_body(a);
    put_chunk(&mut out, b"DIGE", digest);
    out
}

fn put_chunk(out: &mut Vec<u8>, tag: &[u8; 4], payload: &[u8]) {
    out.extend_from_slice(tag);
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(payload);
}

/// Little-endian cursor over one chunk payload.
struct Cursor<'a> {
    tag: &'static str,
    buf: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn new(tag: &'static str, buf: &'a [u8]) -> Self {
        Cursor { tag, buf }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::format(format!("{} chunk shorter than its declared contents", self.tag)));
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    /// Checks an element count against the remaining bytes before allocating.
    fn expect_items(&self, count: usize, item_len: usize) -> Result<()> {
        match count.checked_mul(item_len) {
            Some(n) if n <= self.buf.len() => Ok(()),
            _ => Err(Error::format(format!("{} chunk declares {count} items that do not fit", self.tag))),
        }
    }

    fn finish(self) -> Result<()> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(Error::format(format!("{} chunk has {} unexpected trailing bytes", self.tag, self.buf.len())))
        }
    }
}

fn decode_header(payload: &[u8]) -> Result<ArtifactHeader> {
    let mut c = Cursor::new("HDRR", payload);
    let magic: [u8; 4] = c.take(4)?.try_into().unwrap();
    let header = ArtifactHeader {
        magic,
        version: c.u16()?,
        flags: ArtifactFlags(c.u16()?),
        input_count: c.u32()?,
        output_count: c.u32()?,
        total_neurons: c.u32()?,
        time_window: c.u32()?,
        clock_hz: c.u32()?,
    };
    c.finish()?;
    Ok(header)
}

fn decode_layers(payload: &[u8]) -> Result<Vec<LayerDescriptor>> {
    let mut c = Cursor::new("LAYR", payload);
    let n = c.u32()? as usize;
    c.expect_items(n, LAYER_LEN)?;
    let mut layers = Vec::with_capacity(n);
    for _ in 0..n {
        let code = c.u8()?;
        let kind = LayerKind::from_code(code).ok_or_else(|| Error::format(format!("unknown layer kind {code}")))?;
        let fire_once = match c.u8()? {
            0 => false,
            1 => true,
            other => return Err(Error::format(format!("fire_once byte must be 0 or 1, found {other}"))),
        };
        if c.u16()? != 0 {
            return Err(Error::format("LAYR reserved field must be zero"));
        }
        layers.push(LayerDescriptor {
            kind,
            fire_once,
            in_dim: c.u32()?,
            out_dim: c.u32()?,
            leak_num: c.u32()?,
            leak_den: c.u32()?,
        });
    }
    c.finish()?;
    Ok(layers)
}

fn decode_weights(payload: &[u8]) -> Result<QuantizedWeights> {
    let mut c = Cursor::new("WGHT", payload);
    let rows = c.u32()?;
    let cols = c.u32()?;
    let scale = c.f32()?;
    let n = (rows as usize)
        .checked_mul(cols as usize)
        .ok_or_else(|| Error::format("WGHT dimensions overflow"))?;
    c.expect_items(n, 1)?;
    let values = c.take(n)?.iter().map(|&b| b as i8).collect();
    c.finish()?;
    Ok(QuantizedWeights { values, scale, rows, cols })
}

fn decode_thresholds(payload: &[u8]) -> Result<ThresholdVector> {
    let mut c = Cursor::new("THRS", payload);
    let n = c.u32()? as usize;
    c.expect_items(n, 4)?;
    let values = (0..n).map(|_| c.i32()).collect::<Result<_>>()?;
    c.finish()?;
    Ok(ThresholdVector { values })
}

fn decode_connectivity(payload: &[u8]) -> Result<ConnectivityTable> {
    let mut c = Cursor::new("CONN", payload);
    let n_desc = c.u32()? as usize;
    let n_syn = c.u32()? as usize;
    c.expect_items(n_desc, DESCRIPTOR_LEN)?;
    let descriptors = (0..n_desc)
        .map(|_| Ok(SourceDescriptor { offset: c.u32()?, count: c.u16()? }))
        .collect::<Result<Vec<_>>>()?;
    c.expect_items(n_syn, SYNAPSE_LEN)?;
    let mut synapses = Vec::with_capacity(n_syn);
    for _ in 0..n_syn {
        let target = c.u16()?;
        let weight = c.u8()? as i8;
        if c.u8()? != 0 {
            return Err(Error::format("synapse reserved byte must be zero"));
        }
        synapses.push(Synapse { target, weight });
    }
    c.finish()?;
    Ok(ConnectivityTable { descriptors, synapses })
}

fn decode_decode(payload: &[u8]) -> Result<DecodeMetadata> {
    let mut c = Cursor::new("DECD", payload);
    let d = DecodeMetadata { num_classes: c.u32()?, group_size: c.u32()?, output_base: c.u32()? };
    c.finish()?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artifact::testing::artifact_from_parts;

    fn identity() -> DeploymentArtifact {
        artifact_from_parts(1, 1, 1, vec![127], vec![100], 1)
    }

    #[test]
    fn minimal_identity_artifact_has_fixed_layout() {
        let a = identity();
        let bytes = a.to_bytes();
        // 7 chunk headers + payloads: 28 + 44 + 13 + 8 + 18 + 12 + 32
        assert_eq!(bytes.len(), 7 * 8 + 28 + 44 + 13 + 8 + 18 + 12 + 32);
        assert_eq!(&bytes[..12], b"HDRR\x1c\x00\x00\x00SNNA");
        assert_eq!(&bytes[12..14], &[1, 0]);
        let tags: Vec<&[u8]> = {
            let mut pos = 0;
            let mut tags = Vec::new();
            while pos < bytes.len() {
                tags.push(&bytes[pos..pos + 4]);
                let len = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
                pos += 8 + len;
            }
            tags
        };
        assert_eq!(tags, CHUNK_ORDER.iter().map(|t| &t[..]).collect::<Vec<_>>());
        // CONN: one descriptor (offset 0, count 1), one synapse to neuron 1 with weight 127.
        let conn = bytes.len() - (8 + 32) - (8 + 12) - (8 + 18);
        assert_eq!(&bytes[conn..conn + 4], b"CONN");
        assert_eq!(&bytes[conn + 8..conn + 26], &[1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 127, 0]);

        let back = read_artifact(bytes.as_slice()).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn version_two_is_a_format_error() {
        let mut bytes = identity().to_bytes();
        bytes[12] = 2;
        assert!(matches!(read_artifact(bytes.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn bad_magic_is_a_format_error() {
        let mut bytes = identity().to_bytes();
        bytes[8] = b'X';
        assert!(matches!(read_artifact(bytes.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn flipped_payload_byte_is_corruption() {
        let mut bytes = identity().to_bytes();
        // The single WGHT value.
        let wght = 8 + 28 + 8 + 44;
        assert_eq!(&bytes[wght..wght + 4], b"WGHT");
        bytes[wght + 8 + 12] ^= 0x01;
        assert!(matches!(read_artifact(bytes.as_slice()), Err(Error::Corruption { .. })));
    }

    #[test]
    fn truncation_is_an_io_error() {
        let bytes = identity().to_bytes();
        for cut in [0, 3, 8, 20, bytes.len() - 1] {
            match read_artifact(&bytes[..cut]) {
                Err(Error::Io(e)) => assert_eq!(e.kind(), io::ErrorKind::UnexpectedEof),
                other => panic!("cut {cut}: expected io error, got {other:?}"),
            }
        }
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut bytes = identity().to_bytes();
        bytes.push(0);
        assert!(matches!(read_artifact(bytes.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn write_rejects_invalid_artifacts() {
        let mut a = identity();
        a.thresholds.values[0] = 0;
        let a = a.seal();
        let mut sink = Vec::new();
        assert!(matches!(write_artifact(&a, &mut sink), Err(Error::Validation(_))));
        assert!(sink.is_empty());
    }

    #[test]
    fn write_reports_byte_count() {
        let a = identity();
        let mut sink = Vec::new();
        let n = write_artifact(&a, &mut sink).unwrap();
        assert_eq!(n as usize, sink.len());
        assert_eq!(sink, a.to_bytes());
    }
}
