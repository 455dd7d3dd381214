use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::ImageDims;

/// Parses a dimension index: one `image_id width height` line per image.
/// Blank lines and `#` comments are skipped.
pub fn parse_dims_index(text: &str, source_name: &str) -> Result<BTreeMap<String, ImageDims>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::parse(source_name, line_no, msg);
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(err(format!(
                "expected `image_id width height`, found {} fields",
                f.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| err(format!("dimension is not a number: {s:?}")))
        };
        let dims = ImageDims::new(parse(f[1])?, parse(f[2])?).map_err(|e| err(e.to_string()))?;
        if out.insert(f[0].to_string(), dims).is_some() {
            return Err(err(format!("duplicate image id {:?}", f[0])));
        }
    }
    Ok(out)
}
