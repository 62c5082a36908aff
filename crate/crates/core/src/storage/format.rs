// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::acf::ACF_MAGIC;
use super::io::IoCounter;
use crate::error::{Error, Result};

const SNIFF_LEN: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatKind {
    Acf,
    Csv,
}

impl fmt::Display for FormatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormatKind::Acf => "acf",
            FormatKind::Csv => "csv",
        })
    }
}

impl FromStr for FormatKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "acf" => Ok(FormatKind::Acf),
            "csv" => Ok(FormatKind::Csv),
            other => Err(Error::InvalidArgument(format!(
                "unknown format name {other:?}"
            ))),
        }
    }
}

/// Classifies a file by its leading bytes: the ACF magic wins, otherwise
/// valid text containing `delimiter` (or a single line-delimited column) is
/// CSV. The file extension is ignored.
pub fn detect_format(path: impl AsRef<Path>, delimiter: u8, io: &IoCounter) -> Result<FormatKind> {
    let path = path.as_ref();
    let mut head = Vec::with_capacity(SNIFF_LEN);
    File::open(path)?
        .take(SNIFF_LEN as u64)
        .read_to_end(&mut head)?;
    io.add_metadata(head.len() as u64);
    detect_format_bytes(&head, delimiter)
        .ok_or_else(|| Error::UnknownFormat(path.display().to_string()))
}

/// [`detect_format`] over an in-memory prefix of a file.
pub fn detect_format_bytes(head: &[u8], delimiter: u8) -> Option<FormatKind> {
    if head.starts_with(ACF_MAGIC) {
        return Some(FormatKind::Acf);
    }
    let text = match std::str::from_utf8(head) {
        Ok(t) => t,
        // the prefix may end inside a multi-byte character
        Err(e) if e.error_len().is_none() && head.len() == SNIFF_LEN => {
            std::str::from_utf8(&head[..e.valid_up_to()]).ok()?
        }
        Err(_) => return None,
    };
    let printable = text
        .chars()
        .all(|c| !c.is_control() || matches!(c, '\n' | '\r' | '\t'));
    let structured = head.contains(&delimiter) || head.contains(&b'\n');
    (printable && !text.is_empty() && structured).then_some(FormatKind::Csv)
}
