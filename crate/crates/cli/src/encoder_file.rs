//! Binary network file.
//!
//! Layout, all little-endian: magic `ENC1`, u32 encoder depth, u32 layer
//! count, then per layer u32 input width, u32 output width, the
//! `in × out` weights row-major as f64 and the `out` biases as f64.

use std::io::Cursor;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use sagvic::sagvicreg::{Dense, ToyEncoder};
use sagvic::Mat;

pub const ENC_MAGIC: &[u8; 4] = b"ENC1";

pub fn encode_encoder(enc: &ToyEncoder) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(ENC_MAGIC);
    let w32 = |out: &mut Vec<u8>, v: usize| {
        out.write_u32::<LittleEndian>(u32::try_from(v).expect("layer sizes fit u32"))
            .expect("vec write")
    };
    w32(&mut out, enc.encoder_depth());
    w32(&mut out, enc.layers().len());
    for layer in enc.layers() {
        w32(&mut out, layer.in_dim());
        w32(&mut out, layer.out_dim());
        for &v in layer.weights.as_slice().iter().chain(&layer.bias) {
            out.write_f64::<LittleEndian>(v).expect("vec write");
        }
    }
    out
}

pub fn decode_encoder(bytes: &[u8]) -> Result<ToyEncoder, String> {
    if bytes.len() < 4 || &bytes[..4] != ENC_MAGIC {
        return Err("bad magic, expected \"ENC1\"".into());
    }
    let mut cur = Cursor::new(&bytes[4..]);
    let truncated = |_| "truncated encoder file".to_string();
    let depth = cur.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let count = cur.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let mut layers = Vec::new();
    for _ in 0..count {
        let i = cur.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        let o = cur.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        let remaining = bytes.len() - 4 - cur.position() as usize;
        let want = i.checked_mul(o).and_then(|w| w.checked_add(o));
        if want.is_none_or(|w| w.saturating_mul(8) > remaining) {
            return Err("truncated encoder file".into());
        }
        let mut w = vec![0.0; i * o];
        cur.read_f64_into::<LittleEndian>(&mut w).map_err(truncated)?;
        let mut b = vec![0.0; o];
        cur.read_f64_into::<LittleEndian>(&mut b).map_err(truncated)?;
        layers.push(Dense {
            weights: Mat::from_vec(i, o, w).map_err(|e| e.to_string())?,
            bias: b,
        });
    }
    if (cur.position() as usize) != bytes.len() - 4 {
        return Err("trailing bytes after the last layer".into());
    }
    ToyEncoder::from_layers(layers, depth).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let enc = ToyEncoder::with_default_shape(5, 3).unwrap();
        let bytes = encode_encoder(&enc);
        assert_eq!(decode_encoder(&bytes).unwrap(), enc);
        assert_eq!(encode_encoder(&decode_encoder(&bytes).unwrap()), bytes);
    }

    #[test]
    fn rejects_damage() {
        let bytes = encode_encoder(&ToyEncoder::with_default_shape(3, 1).unwrap());
        assert!(decode_encoder(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_encoder(&[bytes.as_slice(), &[0]].concat()).is_err());
        assert!(decode_encoder(b"ENC2").is_err());
        let mut nan = bytes.clone();
        let at = nan.len() - 8;
        nan[at..].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(decode_encoder(&nan).is_err());
    }
}
