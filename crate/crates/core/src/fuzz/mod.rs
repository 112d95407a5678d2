//! Differential fuzzing campaigns and bug grouping.
//!
//! A non-agreeing verdict becomes the message `"<VerdictKind>: <detail>"`.
//! Every maximal run of ASCII digits in it is replaced by `#`, and the MD5 of
//! the result names the bug group.

mod campaign;

pub use campaign::{
    program_file_name, replay, run_campaign, Budget, Campaign, CampaignError, CampaignReport, Replay, TimingSummary,
};

use std::path::PathBuf;

use md5::{Digest, Md5};

use crate::exec::VerdictKind;

/// Replaces each maximal run of ASCII decimal digits with a single `#`.
pub fn normalize_message(msg: &str) -> String {
    let mut out = String::with_capacity(msg.len());
    let mut in_digits = false;
    for c in msg.chars() {
        if c.is_ascii_digit() {
            if !in_digits {
                out.push('#');
            }
            in_digits = true;
        } else {
            out.push(c);
            in_digits = false;
        }
    }
    out
}

/// Lowercase hex MD5 of the UTF-8 bytes.
pub fn group_digest(normalized: &str) -> String {
    let hash = Md5::digest(normalized.as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BugGroup {
    pub digest: String,
    pub normalized_message: String,
    pub kind: VerdictKind,
    pub count: u64,
    pub first_seed: u64,
    pub first_index: u64,
    /// Which input vector of the first program triggered the group.
    pub first_input: usize,
    /// Relative to the campaign's output directory.
    pub representative_path: PathBuf,
}
