//! Helpers for the tab-separated, line-oriented file formats.

use crate::error::{Error, Result};

/// Free text stored in a tab-separated field.
pub(crate) fn check_field(value: &str) -> Result<()> {
    if value.contains(['\t', '\n', '\r']) {
        return Err(Error::InvalidText(value.to_owned()));
    }
    Ok(())
}

/// Returns the value of a `key<TAB>value` line.
pub(crate) fn keyed<'a>(line: &'a str, key: &str, line_no: usize) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('\t'))
        .ok_or_else(|| Error::parse(line_no, format!("expected {key:?} line")))
}
