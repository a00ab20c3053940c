//! Raw f32 tensor files with a one-line length sidecar.

use std::path::{Path, PathBuf};

use crate::CmdError;

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".len");
    s.into()
}

pub fn read_tensor(path: &Path) -> Result<Vec<f64>, CmdError> {
    if !path.exists() {
        return Err(CmdError::usage(format!("input file not found: {}", path.display())));
    }
    let bytes = std::fs::read(path)?;
    let n = match std::fs::read_to_string(sidecar(path)) {
        Ok(text) => text
            .trim()
            .parse::<usize>()
            .map_err(|_| CmdError::data(format!("bad sidecar {}", sidecar(path).display())))?,
        Err(_) => bytes.len() / 4,
    };
    if bytes.len() < 4 * n {
        return Err(CmdError::data(format!(
            "tensor file holds {} bytes, sidecar claims {n} f32 values",
            bytes.len()
        )));
    }
    Ok(bytes[..4 * n]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect())
}

pub fn write_tensor(path: &Path, values: &[f64]) -> Result<(), CmdError> {
    let mut bytes = Vec::with_capacity(values.len() * 4);
    for &v in values {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    std::fs::write(path, bytes)?;
    std::fs::write(sidecar(path), format!("{}\n", values.len()))?;
    Ok(())
}
