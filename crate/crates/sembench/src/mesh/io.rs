//! Self-describing mesh dumps for debugging.
//!
//! The format is a single JSON header line followed by the raw arrays:
//! node coordinates as little-endian `f64` triples, then connectivity as
//! little-endian `u32`. The header carries the counts and dtype labels,
//! so a few lines of any language can pick the file apart.

use super::HexMesh;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MeshDumpHeader {
    pub format: String,
    pub version: u32,
    pub order: usize,
    pub elems: [usize; 3],
    pub extents: [f64; 3],
    pub periodic: [bool; 3],
    pub num_elements: usize,
    pub num_nodes: usize,
    pub coord_dtype: String,
    pub connec_dtype: String,
}

/// A mesh dump read back from disk.
#[derive(Debug, Clone)]
pub struct MeshDump {
    pub header: MeshDumpHeader,
    pub coords: Vec<[f64; 3]>,
    pub connec: Vec<u32>,
}

/// Write `mesh` to `path` as header line + coordinate block + connectivity
/// block.
pub fn dump_mesh(mesh: &HexMesh, path: &Path) -> Result<()> {
    let header = MeshDumpHeader {
        format: "sembench-mesh".into(),
        version: 1,
        order: mesh.order(),
        elems: mesh.element_counts(),
        extents: mesh.extents(),
        periodic: mesh.periodic(),
        num_elements: mesh.num_elements(),
        num_nodes: mesh.num_nodes(),
        coord_dtype: "f64le".into(),
        connec_dtype: "u32le".into(),
    };
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for x in mesh.coords() {
        for &c in x {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    for &g in mesh.connectivity() {
        w.write_all(&g.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read a mesh dump back. Validates the magic, version, and that the file
/// holds exactly the arrays the header promises.
pub fn load_mesh_dump(path: &Path) -> Result<MeshDump> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header_line = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        r.read_exact(&mut byte).map_err(|_| Error::FileFormat {
            path: path.display().to_string(),
            detail: "missing header line".into(),
        })?;
        if byte[0] == b'\n' {
            break;
        }
        header_line.push(byte[0]);
    }
    let header: MeshDumpHeader = serde_json::from_slice(&header_line)?;
    if header.format != "sembench-mesh" || header.version != 1 {
        return Err(Error::FileFormat {
            path: path.display().to_string(),
            detail: format!("unsupported format {}/{}", header.format, header.version),
        });
    }

    let mut coords = vec![[0.0f64; 3]; header.num_nodes];
    let mut buf8 = [0u8; 8];
    for x in coords.iter_mut() {
        for c in x.iter_mut() {
            r.read_exact(&mut buf8).map_err(|_| Error::FileFormat {
                path: path.display().to_string(),
                detail: "truncated coordinate block".into(),
            })?;
            *c = f64::from_le_bytes(buf8);
        }
    }
    let n = header.order + 1;
    let mut connec = vec![0u32; header.num_elements * n * n * n];
    let mut buf4 = [0u8; 4];
    for g in connec.iter_mut() {
        r.read_exact(&mut buf4).map_err(|_| Error::FileFormat {
            path: path.display().to_string(),
            detail: "truncated connectivity block".into(),
        })?;
        *g = u32::from_le_bytes(buf4);
    }
    if r.read(&mut byte)? != 0 {
        return Err(Error::FileFormat {
            path: path.display().to_string(),
            detail: "trailing bytes after connectivity block".into(),
        });
    }
    Ok(MeshDump {
        header,
        coords,
        connec,
    })
}
