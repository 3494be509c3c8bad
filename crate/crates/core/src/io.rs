//! Dataset and index files.
//!
//! Binary layouts are little-endian with a 4-byte magic and a u32 version.
//! Datasets are a matrix file (`.bin`) holding the noisy points plus a JSON
//! sidecar (`.json`) with the generating model, the queries, and the ground
//! truth. Index files embed the SHA-256 of the dataset matrix they were
//! built from; loaders refuse mismatched data and newer versions.

use crate::error::{Error, Result};
use crate::genmodel::{Geometry, NoiseMode, NoisyInstance};
use crate::iterpca::{
    BuildStats, CaptureMode, IterPcaIndex, IterPcaParams, IterationRecord, Layer, Variant,
};
use crate::kdnns::build_lowdim;
use crate::linalg::{project_coords, DenseMatrix, Subspace};
use crate::pcatree::{Node, PcaTree, PcaTreeParams, TreeStats};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MATRIX_MAGIC: &[u8; 4] = b"SNNS";
pub const ITERPCA_MAGIC: &[u8; 4] = b"SNNI";
pub const TREE_MAGIC: &[u8; 4] = b"SNNT";
pub const FORMAT_VERSION: u32 = 1;

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

struct Writer<W: Write> {
    inner: W,
}

impl<W: Write> Writer<W> {
    fn u8(&mut self, v: u8) -> Result<()> {
        Ok(self.inner.write_all(&[v])?)
    }
    fn u32(&mut self, v: u32) -> Result<()> {
        Ok(self.inner.write_all(&v.to_le_bytes())?)
    }
    fn u64(&mut self, v: u64) -> Result<()> {
        Ok(self.inner.write_all(&v.to_le_bytes())?)
    }
    fn i64(&mut self, v: i64) -> Result<()> {
        Ok(self.inner.write_all(&v.to_le_bytes())?)
    }
    fn f64(&mut self, v: f64) -> Result<()> {
        Ok(self.inner.write_all(&v.to_le_bytes())?)
    }
    fn bytes(&mut self, v: &[u8]) -> Result<()> {
        Ok(self.inner.write_all(v)?)
    }
    fn usize_list(&mut self, v: &[usize]) -> Result<()> {
        self.u64(v.len() as u64)?;
        for &x in v {
            self.u64(x as u64)?;
        }
        Ok(())
    }
}

struct Reader<R: Read> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn u8(&mut self) -> Result<u8> {
        let mut b = [0u8; 1];
        self.inner.read_exact(&mut b)?;
        Ok(b[0])
    }
    fn u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.inner.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }
    fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.inner.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }
    fn i64(&mut self) -> Result<i64> {
        let mut b = [0u8; 8];
        self.inner.read_exact(&mut b)?;
        Ok(i64::from_le_bytes(b))
    }
    fn f64(&mut self) -> Result<f64> {
        let mut b = [0u8; 8];
        self.inner.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    }
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner.read_exact(&mut b)?;
        Ok(b)
    }
    fn count(&mut self, what: &str, limit: u64) -> Result<usize> {
        let v = self.u64()?;
        if v > limit {
            return Err(fmt_err(format!("{what} count {v} exceeds sanity limit {limit}")));
        }
        Ok(v as usize)
    }
    fn usize_list(&mut self, what: &str, limit: u64) -> Result<Vec<usize>> {
        let len = self.count(what, limit)?;
        (0..len).map(|_| Ok(self.u64()? as usize)).collect()
    }
}

fn check_header<R: Read>(r: &mut Reader<R>, magic: &[u8; 4], kind: &str) -> Result<()> {
    let got: [u8; 4] = r.bytes()?;
    if &got != magic {
        return Err(fmt_err(format!("not a {kind} file (magic {got:02x?})")));
    }
    let version = r.u32()?;
    if version == 0 || version > FORMAT_VERSION {
        return Err(fmt_err(format!(
            "{kind} format version {version} not supported (this build reads up to {FORMAT_VERSION})"
        )));
    }
    Ok(())
}

/// Sanity cap on row/column counts read from files.
const MAX_SIDE: u64 = 1 << 32;

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut w = Writer {
        inner: BufWriter::new(File::create(path)?),
    };
    w.bytes(MATRIX_MAGIC)?;
    w.u32(FORMAT_VERSION)?;
    w.u64(m.rows() as u64)?;
    w.u64(m.cols() as u64)?;
    for v in m.data() {
        w.f64(*v)?;
    }
    w.inner.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let mut r = Reader {
        inner: BufReader::new(File::open(path)?),
    };
    check_header(&mut r, MATRIX_MAGIC, "matrix")?;
    let rows = r.count("rows", MAX_SIDE)?;
    let cols = r.count("cols", MAX_SIDE)?;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        data.push(r.f64()?);
    }
    let mut tail = [0u8; 1];
    if r.inner.read(&mut tail)? != 0 {
        return Err(fmt_err("trailing bytes after matrix data"));
    }
    DenseMatrix::new(rows, cols, data)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SidecarModel {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub epsilon: f64,
    pub sigma: f64,
    pub seed: u64,
    pub noise_seed: u64,
    pub geometry: Geometry,
    pub noise_mode: NoiseMode,
}

/// Ground truth accompanying a dataset matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub model: SidecarModel,
    pub planted_index: usize,
    /// Clean query (inside the signal subspace).
    pub q: Vec<f64>,
    /// Noisy query, matching the noise channel of the points.
    pub q_tilde: Vec<f64>,
    /// Orthonormal rows spanning the signal subspace.
    #[serde(rename = "U_basis")]
    pub u_basis: Vec<Vec<f64>>,
}

impl DatasetSidecar {
    pub fn from_instance(noisy: &NoisyInstance) -> Self {
        let base = &noisy.base;
        Self {
            model: SidecarModel {
                n: base.n,
                d: base.d,
                k: base.k,
                epsilon: base.epsilon,
                sigma: noisy.sigma,
                seed: base.seed,
                noise_seed: noisy.noise_seed,
                geometry: base.geometry,
                noise_mode: noisy.noise_mode,
            },
            planted_index: base.planted_index,
            q: base.query.clone(),
            q_tilde: noisy.query.clone(),
            u_basis: (0..base.k)
                .map(|i| base.subspace.basis_row(i).to_vec())
                .collect(),
        }
    }

    pub fn subspace(&self) -> Result<Subspace> {
        Subspace::new(self.model.d, DenseMatrix::from_rows(&self.u_basis)?)
    }
}

/// Writes `stem.bin` (noisy points) and `stem.json` (sidecar).
pub fn write_dataset(stem: &Path, noisy: &NoisyInstance) -> Result<()> {
    write_matrix(&stem.with_extension("bin"), &noisy.points)?;
    let sidecar = DatasetSidecar::from_instance(noisy);
    let json = serde_json::to_string_pretty(&sidecar)?;
    let mut f = BufWriter::new(File::create(stem.with_extension("json"))?);
    f.write_all(json.as_bytes())?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn read_dataset(stem: &Path) -> Result<(DenseMatrix, DatasetSidecar)> {
    let points = read_matrix(&stem.with_extension("bin"))?;
    let file = File::open(stem.with_extension("json"))?;
    let sidecar: DatasetSidecar = serde_json::from_reader(BufReader::new(file))?;
    if points.rows() != sidecar.model.n || points.cols() != sidecar.model.d {
        return Err(fmt_err(format!(
            "matrix is {}x{} but sidecar declares {}x{}",
            points.rows(),
            points.cols(),
            sidecar.model.n,
            sidecar.model.d
        )));
    }
    Ok((points, sidecar))
}

pub fn file_sha256(path: &Path) -> Result<[u8; 32]> {
    let mut f = BufReader::new(File::open(path)?);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 8192];
    loop {
        let read = f.read(&mut buf)?;
        if read == 0 {
            break;
        }
        hasher.update(&buf[..read]);
    }
    Ok(hasher.finalize().into())
}

pub fn save_iterpca(path: &Path, index: &IterPcaIndex, dataset_hash: &[u8; 32]) -> Result<()> {
    let mut w = Writer {
        inner: BufWriter::new(File::create(path)?),
    };
    w.bytes(ITERPCA_MAGIC)?;
    w.u32(FORMAT_VERSION)?;
    w.bytes(dataset_hash)?;
    w.u8(match index.variant {
        Variant::Warmup => 0,
        Variant::Full => 1,
    })?;
    let p = &index.params;
    w.u64(p.k as u64)?;
    w.f64(p.epsilon)?;
    w.f64(p.sigma)?;
    w.u64(p.r as u64)?;
    w.f64(p.c_threshold)?;
    w.f64(p.c_iter)?;
    match p.capture {
        CaptureMode::Threshold => {
            w.u8(0)?;
            w.f64(0.0)?;
        }
        CaptureMode::Fraction { eta } => {
            w.u8(1)?;
            w.f64(eta)?;
        }
    }
    w.u64(p.seed)?;
    w.u64(index.n() as u64)?;
    w.u64(index.d() as u64)?;

    w.u64(index.layers.len() as u64)?;
    for layer in &index.layers {
        w.u64(layer.subspace.dim() as u64)?;
        for row in layer.subspace.basis().data() {
            w.f64(*row)?;
        }
        w.usize_list(&layer.member_ids)?;
    }
    w.usize_list(&index.leftover_ids)?;

    let s = &index.stats;
    w.u64(s.iterations as u64)?;
    w.u64(s.m_cap_hits as u64)?;
    w.u64(s.m_zero_iterations as u64)?;
    match s.capture_radius_sq {
        Some(v) => {
            w.u8(1)?;
            w.f64(v)?;
        }
        None => {
            w.u8(0)?;
            w.f64(0.0)?;
        }
    }
    w.u64(s.records.len() as u64)?;
    for rec in &s.records {
        w.u64(rec.sampled_distinct as u64)?;
        w.u64(rec.m_raw as u64)?;
        w.u64(rec.m as u64)?;
        w.u64(rec.candidates as u64)?;
        w.u64(rec.captured as u64)?;
    }
    w.inner.flush()?;
    Ok(())
}

/// Loads a layered index against the dataset it was built from. The stored
/// hash must match `dataset_hash`, and layer projections are recomputed from
/// `points` rather than trusted from the file.
pub fn load_iterpca(
    path: &Path,
    points: &DenseMatrix,
    dataset_hash: &[u8; 32],
) -> Result<IterPcaIndex> {
    let mut r = Reader {
        inner: BufReader::new(File::open(path)?),
    };
    check_header(&mut r, ITERPCA_MAGIC, "layered index")?;
    let stored_hash: [u8; 32] = r.bytes()?;
    if &stored_hash != dataset_hash {
        return Err(fmt_err(
            "index was built from a different dataset (hash mismatch)",
        ));
    }
    let variant = match r.u8()? {
        0 => Variant::Warmup,
        1 => Variant::Full,
        v => return Err(fmt_err(format!("unknown variant tag {v}"))),
    };
    let k = r.count("k", MAX_SIDE)?;
    let epsilon = r.f64()?;
    let sigma = r.f64()?;
    let rr = r.count("r", MAX_SIDE)?;
    let c_threshold = r.f64()?;
    let c_iter = r.f64()?;
    let capture = match r.u8()? {
        0 => {
            r.f64()?;
            CaptureMode::Threshold
        }
        1 => CaptureMode::Fraction { eta: r.f64()? },
        v => return Err(fmt_err(format!("unknown capture tag {v}"))),
    };
    let seed = r.u64()?;
    let n = r.count("n", MAX_SIDE)?;
    let d = r.count("d", MAX_SIDE)?;
    if n != points.rows() || d != points.cols() {
        return Err(fmt_err(format!(
            "index expects a {n}x{d} dataset, got {}x{}",
            points.rows(),
            points.cols()
        )));
    }

    let layer_count = r.count("layers", MAX_SIDE)?;
    let mut layers = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let m = r.count("subspace dim", d as u64)?;
        let mut data = Vec::with_capacity(m * d);
        for _ in 0..m * d {
            data.push(r.f64()?);
        }
        let subspace = Subspace::new(d, DenseMatrix::new(m, d, data)?)?;
        let member_ids = r.usize_list("members", n as u64)?;
        if member_ids.iter().any(|&id| id >= n) {
            return Err(fmt_err("member id out of range"));
        }
        let members = points.gather(&member_ids)?;
        let coords = project_coords(&members, &subspace)?;
        let lowdim = build_lowdim(&coords, &member_ids)?;
        layers.push(Layer {
            subspace,
            member_ids,
            lowdim,
        });
    }
    let leftover_ids = r.usize_list("leftover", n as u64)?;
    if leftover_ids.iter().any(|&id| id >= n) {
        return Err(fmt_err("leftover id out of range"));
    }

    let iterations = r.u64()? as usize;
    let m_cap_hits = r.u64()? as usize;
    let m_zero_iterations = r.u64()? as usize;
    let capture_radius_sq = {
        let some = r.u8()? == 1;
        let v = r.f64()?;
        some.then_some(v)
    };
    let rec_count = r.count("records", MAX_SIDE)?;
    let mut records = Vec::with_capacity(rec_count);
    for _ in 0..rec_count {
        records.push(IterationRecord {
            sampled_distinct: r.u64()? as usize,
            m_raw: r.u64()? as usize,
            m: r.u64()? as usize,
            candidates: r.u64()? as usize,
            captured: r.u64()? as usize,
        });
    }

    Ok(IterPcaIndex {
        variant,
        params: IterPcaParams {
            k,
            epsilon,
            sigma,
            r: rr,
            c_threshold,
            c_iter,
            capture,
            seed,
        },
        layers,
        leftover_ids,
        stats: BuildStats {
            iterations,
            m_cap_hits,
            m_zero_iterations,
            capture_radius_sq,
            records,
        },
        points: points.clone(),
    })
}

pub fn save_tree(path: &Path, tree: &PcaTree, dataset_hash: &[u8; 32]) -> Result<()> {
    let mut w = Writer {
        inner: BufWriter::new(File::create(path)?),
    };
    w.bytes(TREE_MAGIC)?;
    w.u32(FORMAT_VERSION)?;
    w.bytes(dataset_hash)?;
    w.u64(tree.params.k as u64)?;
    w.f64(tree.params.epsilon)?;
    w.u64(tree.params.stop_size as u64)?;
    w.u64(tree.n() as u64)?;
    w.u64(tree.d() as u64)?;

    w.u64(tree.nodes.len() as u64)?;
    for node in &tree.nodes {
        match node {
            Node::Leaf { removed, ids } => {
                w.u8(0)?;
                w.usize_list(removed)?;
                w.usize_list(ids)?;
            }
            Node::Internal {
                direction,
                mean,
                removed,
                children,
            } => {
                w.u8(1)?;
                w.usize_list(removed)?;
                for v in direction {
                    w.f64(*v)?;
                }
                for v in mean {
                    w.f64(*v)?;
                }
                w.u64(children.len() as u64)?;
                for &(key, child) in children {
                    w.i64(key)?;
                    w.u64(child as u64)?;
                }
            }
        }
    }

    let s = &tree.stats;
    w.u64(s.depth as u64)?;
    w.u64(s.internal_count as u64)?;
    w.u64(s.leaf_count as u64)?;
    w.u64(s.removed_total as u64)?;
    w.u8(u8::from(s.depth_warning))?;
    w.inner.flush()?;
    Ok(())
}

pub fn load_tree(path: &Path, points: &DenseMatrix, dataset_hash: &[u8; 32]) -> Result<PcaTree> {
    let mut r = Reader {
        inner: BufReader::new(File::open(path)?),
    };
    check_header(&mut r, TREE_MAGIC, "tree index")?;
    let stored_hash: [u8; 32] = r.bytes()?;
    if &stored_hash != dataset_hash {
        return Err(fmt_err(
            "index was built from a different dataset (hash mismatch)",
        ));
    }
    let k = r.count("k", MAX_SIDE)?;
    let epsilon = r.f64()?;
    let stop_size = r.count("stop_size", MAX_SIDE)?;
    let n = r.count("n", MAX_SIDE)?;
    let d = r.count("d", MAX_SIDE)?;
    if n != points.rows() || d != points.cols() {
        return Err(fmt_err(format!(
            "index expects a {n}x{d} dataset, got {}x{}",
            points.rows(),
            points.cols()
        )));
    }

    let node_count = r.count("nodes", MAX_SIDE)?;
    let mut nodes = Vec::with_capacity(node_count);
    for _ in 0..node_count {
        match r.u8()? {
            0 => {
                let removed = r.usize_list("removed", n as u64)?;
                let ids = r.usize_list("leaf ids", n as u64)?;
                if ids.iter().chain(&removed).any(|&id| id >= n) {
                    return Err(fmt_err("leaf id out of range"));
                }
                nodes.push(Node::Leaf { removed, ids });
            }
            1 => {
                let removed = r.usize_list("removed", n as u64)?;
                if removed.iter().any(|&id| id >= n) {
                    return Err(fmt_err("removed id out of range"));
                }
                let mut direction = Vec::with_capacity(d);
                for _ in 0..d {
                    direction.push(r.f64()?);
                }
                let mut mean = Vec::with_capacity(d);
                for _ in 0..d {
                    mean.push(r.f64()?);
                }
                let child_count = r.count("children", MAX_SIDE)?;
                let mut children = Vec::with_capacity(child_count);
                for _ in 0..child_count {
                    let key = r.i64()?;
                    let child = r.u64()? as usize;
                    if child >= node_count {
                        return Err(fmt_err("child index out of range"));
                    }
                    children.push((key, child));
                }
                nodes.push(Node::Internal {
                    direction,
                    mean,
                    removed,
                    children,
                });
            }
            v => return Err(fmt_err(format!("unknown node tag {v}"))),
        }
    }

    let stats = TreeStats {
        depth: r.u64()? as usize,
        internal_count: r.u64()? as usize,
        leaf_count: r.u64()? as usize,
        removed_total: r.u64()? as usize,
        depth_warning: r.u8()? == 1,
    };

    Ok(PcaTree {
        params: PcaTreeParams {
            k,
            epsilon,
            stop_size,
        },
        nodes,
        stats,
        points: points.clone(),
    })
}
