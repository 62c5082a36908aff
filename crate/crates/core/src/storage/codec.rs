// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Block codec applied to each column chunk.
///
/// `Deflate` is raw RFC 1951 deflate. `FastLz` is the Snappy framing format:
/// a fast LZ codec that trades compression ratio for decode speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Codec {
    #[default]
    None,
    Deflate,
    FastLz,
}

impl Codec {
    pub const ALL: [Codec; 3] = [Codec::None, Codec::FastLz, Codec::Deflate];

    pub fn name(self) -> &'static str {
        match self {
            Codec::None => "none",
            Codec::Deflate => "deflate",
            Codec::FastLz => "fastlz",
        }
    }

    /// Wraps `inner` so that reading yields decompressed bytes.
    pub fn decoder<'a, R: Read + Send + 'a>(self, inner: R) -> Box<dyn Read + Send + 'a> {
        match self {
            Codec::None => Box::new(inner),
            Codec::Deflate => Box::new(DeflateDecoder::new(inner)),
            Codec::FastLz => Box::new(snap::read::FrameDecoder::new(inner)),
        }
    }
}

impl fmt::Display for Codec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Codec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "uncompressed" => Ok(Codec::None),
            "deflate" | "gzip" => Ok(Codec::Deflate),
            "fastlz" | "snappy" => Ok(Codec::FastLz),
            other => Err(Error::InvalidArgument(format!("unknown codec {other:?}"))),
        }
    }
}

pub fn compress(codec: Codec, bytes: &[u8]) -> Result<Vec<u8>> {
    match codec {
        Codec::None => Ok(bytes.to_vec()),
        Codec::Deflate => {
            let mut enc =
                DeflateEncoder::new(Vec::with_capacity(bytes.len() / 2), Compression::default());
            enc.write_all(bytes)?;
            Ok(enc.finish()?)
        }
        Codec::FastLz => {
            let mut enc = snap::write::FrameEncoder::new(Vec::with_capacity(bytes.len() / 2));
            enc.write_all(bytes)?;
            enc.into_inner()
                .map_err(|e| Error::Codec(format!("snappy frame: {}", e.error())))
        }
    }
}

/// Inverse of [`compress`]; fails unless exactly `expected_len` bytes come out.
pub fn decompress(codec: Codec, bytes: &[u8], expected_len: usize) -> Result<Vec<u8>> {
    if codec == Codec::None {
        if bytes.len() != expected_len {
            return Err(Error::Codec(format!(
                "expected {expected_len} bytes, found {}",
                bytes.len()
            )));
        }
        return Ok(bytes.to_vec());
    }
    let mut out = Vec::with_capacity(expected_len);
    // one byte of slack detects streams longer than expected
    codec
        .decoder(bytes)
        .take(expected_len as u64 + 1)
        .read_to_end(&mut out)
        .map_err(|e| Error::Codec(format!("{codec}: corrupt stream: {e}")))?;
    if out.len() != expected_len {
        return Err(Error::Codec(format!(
            "{codec}: expected {expected_len} bytes, decompressed {}{}",
            out.len().min(expected_len),
            if out.len() > expected_len { "+" } else { "" }
        )));
    }
    Ok(out)
}
