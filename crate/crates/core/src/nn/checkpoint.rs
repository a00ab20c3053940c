//! Checkpoints: flat little-endian f32 parameters plus a text manifest with
//! the layer shapes.

use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::{Layer, ModelParams, NnError};

const MANIFEST_VERSION: u32 = 1;

/// Writes `<path>` (flat f32, layer order: weights then bias) and
/// `<path>.manifest` describing the shapes.
pub fn save_checkpoint(model: &ModelParams, path: &Path) -> Result<(), NnError> {
    let mut bin = BufWriter::new(std::fs::File::create(path)?);
    for layer in model.layers() {
        for &v in layer.w.iter().chain(&layer.b) {
            bin.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    bin.flush()?;

    let mut manifest = format!("version {MANIFEST_VERSION}\n");
    for layer in model.layers() {
        manifest.push_str(&format!("layer {} {} {}\n", layer.name, layer.in_dim, layer.out_dim));
    }
    std::fs::write(manifest_path(path), manifest)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams, NnError> {
    let manifest = std::fs::read_to_string(manifest_path(path))?;
    let mut lines = manifest.lines();
    let header = lines.next().ok_or_else(|| NnError::BadManifest("empty manifest".into()))?;
    match header.strip_prefix("version ").map(str::parse::<u32>) {
        Some(Ok(MANIFEST_VERSION)) => {}
        Some(Ok(v)) => return Err(NnError::BadManifest(format!("unsupported version {v}"))),
        _ => return Err(NnError::BadManifest("missing version line".into())),
    }
    let mut shapes = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "layer" {
            return Err(NnError::BadManifest(format!("bad line: {line}")));
        }
        let in_dim: usize = parts[2].parse().map_err(|_| NnError::BadManifest(format!("bad dims: {line}")))?;
        let out_dim: usize = parts[3].parse().map_err(|_| NnError::BadManifest(format!("bad dims: {line}")))?;
        shapes.push((parts[1].to_string(), in_dim, out_dim));
    }

    let mut file = std::fs::File::open(path)?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    let expect: usize = shapes.iter().map(|(_, i, o)| (i * o + o) * 4).sum();
    if bytes.len() != expect {
        return Err(NnError::BadManifest(format!(
            "binary is {} bytes, manifest implies {expect}",
            bytes.len()
        )));
    }

    let mut at = 0usize;
    let mut read_f32 = |n: usize| -> Vec<f64> {
        let out = bytes[at..at + 4 * n]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        at += 4 * n;
        out
    };
    let layers = shapes
        .into_iter()
        .map(|(name, in_dim, out_dim)| Layer {
            name,
            in_dim,
            out_dim,
            w: read_f32(in_dim * out_dim),
            b: read_f32(out_dim),
        })
        .collect();
    Ok(ModelParams::from_layers(layers))
}

fn manifest_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".manifest");
    s.into()
}
