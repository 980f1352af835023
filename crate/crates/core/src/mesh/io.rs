//! OBJ and PLY readers plus binary little-endian PLY writers.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Result, SharcError};
use crate::geometry::Vec3;
use crate::mesh::{CleanedMesh, TriangleMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<MeshFormat> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("ply") => Ok(MeshFormat::Ply),
            _ => Err(SharcError::InvalidArgument(format!(
                "cannot infer mesh format from {}",
                path.display()
            ))),
        }
    }
}

/// Reads a triangle mesh and removes degenerate faces.
pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<CleanedMesh> {
    let bytes = fs::read(path).map_err(|e| SharcError::io(path, e))?;
    let (vertices, faces) = match format {
        MeshFormat::Obj => parse_obj(&bytes)?,
        MeshFormat::Ply => {
            let ply = parse_ply(&bytes)?;
            (ply.vertices, ply.faces)
        }
    };
    let cleaned = TriangleMesh::new(vertices, faces)?;
    log::info!(
        "loaded {}: {} triangles ({} degenerate removed)",
        path.display(),
        cleaned.mesh.triangle_count(),
        cleaned.removed_degenerate
    );
    Ok(cleaned)
}

pub fn parse_obj(bytes: &[u8]) -> Result<(Vec<Vec3>, Vec<[u32; 3]>)> {
    let text = std::str::from_utf8(bytes).map_err(|e| SharcError::malformed("obj", e.to_string()))?;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for slot in c.iter_mut() {
                    *slot = parts
                        .next()
                        .and_then(|s| s.parse::<f64>().ok())
                        .ok_or_else(|| SharcError::malformed("obj", format!("line {}: bad vertex", lineno + 1)))?;
                }
                vertices.push(Vec3::from(c));
            }
            Some("f") => {
                let idx: Vec<&str> = parts.collect();
                if idx.len() != 3 {
                    return Err(SharcError::malformed(
                        "obj",
                        format!("line {}: only triangular faces are supported", lineno + 1),
                    ));
                }
                let mut tri = [0u32; 3];
                for (slot, token) in tri.iter_mut().zip(&idx) {
                    let first = token.split('/').next().unwrap_or("");
                    let i: i64 = first
                        .parse()
                        .map_err(|_| SharcError::malformed("obj", format!("line {}: bad index {token}", lineno + 1)))?;
                    // 1-based, negative counts back from the latest vertex
                    let resolved = if i > 0 { i - 1 } else { vertices.len() as i64 + i };
                    if resolved < 0 {
                        return Err(SharcError::malformed(
                            "obj",
                            format!("line {}: index {i} out of range", lineno + 1),
                        ));
                    }
                    *slot = resolved as u32;
                }
                faces.push(tri);
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Ascii,
    BinaryLe,
    BinaryBe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Scalar> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { name: String, count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

/// Geometry recovered from a PLY file; normals are present only when the
/// vertex element declares `nx ny nz`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlyData {
    pub vertices: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
    pub faces: Vec<[u32; 3]>,
}

pub fn read_ply(path: &Path) -> Result<PlyData> {
    let bytes = fs::read(path).map_err(|e| SharcError::io(path, e))?;
    parse_ply(&bytes)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    encoding: Encoding,
    tokens: std::str::SplitAsciiWhitespace<'a>,
}

impl<'a> Cursor<'a> {
    fn read(&mut self, ty: Scalar) -> Result<f64> {
        if self.encoding == Encoding::Ascii {
            let tok = self
                .tokens
                .next()
                .ok_or_else(|| SharcError::malformed("ply", "unexpected end of ascii body"))?;
            return tok
                .parse::<f64>()
                .map_err(|_| SharcError::malformed("ply", format!("bad number {tok:?}")));
        }
        let n = ty.size();
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(SharcError::malformed("ply", "truncated binary body"));
        }
        let mut buf = [0u8; 8];
        buf[..n].copy_from_slice(&self.bytes[self.pos..end]);
        self.pos = end;
        if self.encoding == Encoding::BinaryBe {
            buf[..n].reverse();
        }
        Ok(match ty {
            Scalar::I8 => buf[0] as i8 as f64,
            Scalar::U8 => buf[0] as f64,
            Scalar::I16 => i16::from_le_bytes([buf[0], buf[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([buf[0], buf[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(buf[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(buf[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(buf[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(buf),
        })
    }
}

pub fn parse_ply(bytes: &[u8]) -> Result<PlyData> {
    const END: &[u8] = b"end_header";
    let header_end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| SharcError::malformed("ply", "missing end_header"))?;
    let mut body_start = header_end + END.len();
    // the header terminator line ends in \n or \r\n
    while body_start < bytes.len() && bytes[body_start] != b'\n' {
        body_start += 1;
    }
    body_start += 1;
    let header = std::str::from_utf8(&bytes[..header_end]).map_err(|e| SharcError::malformed("ply", e.to_string()))?;
    let mut lines = header.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(SharcError::malformed("ply", "missing ply signature"));
    }
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["format", f, _] => {
                encoding = Some(match *f {
                    "ascii" => Encoding::Ascii,
                    "binary_little_endian" => Encoding::BinaryLe,
                    "binary_big_endian" => Encoding::BinaryBe,
                    other => return Err(SharcError::malformed("ply", format!("unknown format {other}"))),
                })
            }
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| SharcError::malformed("ply", format!("bad element count {count}")))?,
                properties: Vec::new(),
            }),
            ["property", "list", count, item, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| SharcError::malformed("ply", "property before element"))?;
                let count =
                    Scalar::parse(count).ok_or_else(|| SharcError::malformed("ply", format!("type {count}")))?;
                let item = Scalar::parse(item).ok_or_else(|| SharcError::malformed("ply", format!("type {item}")))?;
                el.properties.push(Property::List {
                    name: name.to_string(),
                    count,
                    item,
                });
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| SharcError::malformed("ply", "property before element"))?;
                let ty = Scalar::parse(ty).ok_or_else(|| SharcError::malformed("ply", format!("type {ty}")))?;
                el.properties.push(Property::Scalar {
                    name: name.to_string(),
                    ty,
                });
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            other => {
                return Err(SharcError::malformed(
                    "ply",
                    format!("unrecognised header line {other:?}"),
                ))
            }
        }
    }
    let encoding = encoding.ok_or_else(|| SharcError::malformed("ply", "missing format line"))?;
    let body = bytes.get(body_start..).unwrap_or(&[]);
    let ascii_body = if encoding == Encoding::Ascii {
        std::str::from_utf8(body).map_err(|e| SharcError::malformed("ply", e.to_string()))?
    } else {
        ""
    };
    let mut cur = Cursor {
        bytes: body,
        pos: 0,
        encoding,
        tokens: ascii_body.split_ascii_whitespace(),
    };

    let mut out = PlyData::default();
    for el in &elements {
        match el.name.as_str() {
            "vertex" => {
                let find = |key: &str| {
                    el.properties
                        .iter()
                        .position(|p| matches!(p, Property::Scalar { name, .. } if name == key))
                };
                let (ix, iy, iz) = match (find("x"), find("y"), find("z")) {
                    (Some(a), Some(b), Some(c)) => (a, b, c),
                    _ => return Err(SharcError::malformed("ply", "vertex element lacks x/y/z")),
                };
                let normal_idx = match (find("nx"), find("ny"), find("nz")) {
                    (Some(a), Some(b), Some(c)) => Some((a, b, c)),
                    _ => None,
                };
                let mut normals = Vec::new();
                let mut row = vec![0.0; el.properties.len()];
                for _ in 0..el.count {
                    read_row(&mut cur, el, &mut row, None)?;
                    out.vertices.push(Vec3::new(row[ix], row[iy], row[iz]));
                    if let Some((a, b, c)) = normal_idx {
                        normals.push(Vec3::new(row[a], row[b], row[c]));
                    }
                }
                if normal_idx.is_some() {
                    out.normals = Some(normals);
                }
            }
            "face" => {
                let list_idx = el
                    .properties
                    .iter()
                    .position(|p| matches!(p, Property::List { name, .. } if name == "vertex_indices" || name == "vertex_index"))
                    .ok_or_else(|| SharcError::malformed("ply", "face element lacks vertex_indices"))?;
                let mut row = vec![0.0; el.properties.len()];
                let mut list = Vec::new();
                for _ in 0..el.count {
                    read_row(&mut cur, el, &mut row, Some((list_idx, &mut list)))?;
                    if list.len() != 3 {
                        return Err(SharcError::malformed("ply", "only triangular faces are supported"));
                    }
                    let mut tri = [0u32; 3];
                    for (slot, &v) in tri.iter_mut().zip(&list) {
                        if v < 0.0 || v.fract() != 0.0 {
                            return Err(SharcError::malformed("ply", format!("bad vertex index {v}")));
                        }
                        *slot = v as u32;
                    }
                    out.faces.push(tri);
                }
            }
            _ => {
                let mut row = vec![0.0; el.properties.len()];
                for _ in 0..el.count {
                    read_row(&mut cur, el, &mut row, None)?;
                }
            }
        }
    }
    Ok(out)
}

fn read_row(
    cur: &mut Cursor<'_>,
    el: &Element,
    row: &mut [f64],
    mut keep_list: Option<(usize, &mut Vec<f64>)>,
) -> Result<()> {
    for (i, p) in el.properties.iter().enumerate() {
        match p {
            Property::Scalar { ty, .. } => row[i] = cur.read(*ty)?,
            Property::List { count, item, .. } => {
                let n = cur.read(*count)?;
                if n < 0.0 || n.fract() != 0.0 {
                    return Err(SharcError::malformed("ply", format!("bad list length {n}")));
                }
                let target = match keep_list.as_mut() {
                    Some((idx, list)) if *idx == i => {
                        list.clear();
                        Some(list)
                    }
                    _ => None,
                };
                match target {
                    Some(list) => {
                        for _ in 0..n as usize {
                            list.push(cur.read(*item)?);
                        }
                    }
                    None => {
                        for _ in 0..n as usize {
                            cur.read(*item)?;
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Writes vertices as doubles so a read-back is bit-exact.
pub fn encode_mesh_ply(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + mesh.vertices().len() * 24 + mesh.triangle_count() * 13);
    write!(
        out,
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nelement face {}\nproperty list uchar uint vertex_indices\nend_header\n",
        mesh.vertices().len(),
        mesh.triangle_count()
    )
    .expect("write to Vec");
    for v in mesh.vertices() {
        for c in v.iter() {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    for t in mesh.triangles() {
        out.push(3);
        for i in t {
            out.extend_from_slice(&i.to_le_bytes());
        }
    }
    out
}

pub fn save_mesh_ply(mesh: &TriangleMesh, path: &Path) -> Result<usize> {
    let bytes = encode_mesh_ply(mesh);
    fs::write(path, &bytes).map_err(|e| SharcError::io(path, e))?;
    Ok(bytes.len())
}

pub fn save_mesh_obj(mesh: &TriangleMesh, path: &Path) -> Result<usize> {
    let mut out = String::new();
    for v in mesh.vertices() {
        out.push_str(&format!("v {:?} {:?} {:?}\n", v.x, v.y, v.z));
    }
    for t in mesh.triangles() {
        out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    fs::write(path, out.as_bytes()).map_err(|e| SharcError::io(path, e))?;
    Ok(out.len())
}

/// Oriented point cloud as `x y z nx ny nz` float records.
pub fn encode_oriented_ply(points: &[Vec3], normals: &[Vec3]) -> Vec<u8> {
    assert_eq!(points.len(), normals.len());
    let mut out = Vec::with_capacity(256 + points.len() * 24);
    write!(
        out,
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nproperty float nx\nproperty float ny\nproperty float nz\nend_header\n",
        points.len()
    )
    .expect("write to Vec");
    for (p, n) in points.iter().zip(normals) {
        for c in p.iter().chain(n.iter()) {
            out.extend_from_slice(&(*c as f32).to_le_bytes());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;

    #[test]
    fn single_triangle_obj() {
        let src = b"# tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\n";
        let (v, f) = parse_obj(src).unwrap();
        let m = TriangleMesh::new(v, f).unwrap().mesh;
        assert_eq!(m.vertices().len(), 3);
        assert_eq!(m.triangle_count(), 1);
    }

    #[test]
    fn obj_negative_indices() {
        let (_, f) = parse_obj(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n").unwrap();
        assert_eq!(f, vec![[0, 1, 2]]);
    }

    #[test]
    fn obj_quads_are_rejected() {
        let src = b"v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        assert!(parse_obj(src).is_err());
    }

    #[test]
    fn ascii_ply_with_extra_properties() {
        let src = b"ply\nformat ascii 1.0\ncomment hi\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nelement face 1\nproperty list uchar int vertex_indices\nproperty int flags\nend_header\n0 0 0 255\n1 0 0 0\n0 1 0 9\n3 0 1 2 7\n";
        let ply = parse_ply(src).unwrap();
        assert_eq!(ply.vertices.len(), 3);
        assert_eq!(ply.faces, vec![[0, 1, 2]]);
        assert!(ply.normals.is_none());
    }

    #[test]
    fn big_endian_ply() {
        let mut src = b"ply\nformat binary_big_endian 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar ushort vertex_indices\nend_header\n".to_vec();
        for v in [[0.0f32, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0]] {
            for c in v {
                src.extend_from_slice(&c.to_be_bytes());
            }
        }
        src.push(3);
        for i in [0u16, 1, 2] {
            src.extend_from_slice(&i.to_be_bytes());
        }
        let ply = parse_ply(&src).unwrap();
        assert_eq!(ply.vertices[2], Vec3::new(0.0, 2.0, 0.0));
        assert_eq!(ply.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn truncated_binary_ply_fails() {
        let mesh = shapes::icosphere(1);
        let bytes = encode_mesh_ply(&mesh);
        assert!(parse_ply(&bytes[..bytes.len() - 5]).is_err());
    }

    #[test]
    fn binary_mesh_round_trip_is_bit_exact() {
        let mesh = shapes::torus(0.7, 0.2, 20, 9);
        let once = parse_ply(&encode_mesh_ply(&mesh)).unwrap();
        let m1 = TriangleMesh::new(once.vertices, once.faces).unwrap().mesh;
        let twice = parse_ply(&encode_mesh_ply(&m1)).unwrap();
        assert_eq!(m1.vertices(), mesh.vertices());
        assert_eq!(m1.triangles(), mesh.triangles());
        assert_eq!(twice.vertices, m1.vertices());
        assert_eq!(twice.faces, m1.triangles());
    }

    #[test]
    fn icosphere_ply_file_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ico.ply");
        save_mesh_ply(&shapes::icosphere(3), &path).unwrap();
        let loaded = load_mesh(&path, MeshFormat::Ply).unwrap();
        assert_eq!(loaded.mesh.triangle_count(), 1280);
        assert_eq!(loaded.removed_degenerate, 0);
    }

    #[test]
    fn obj_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.obj");
        let cube = shapes::cube(1.0);
        save_mesh_obj(&cube, &path).unwrap();
        let loaded = load_mesh(&path, MeshFormat::from_path(&path).unwrap()).unwrap();
        assert_eq!(loaded.mesh, cube);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_mesh(Path::new("/nonexistent/x.ply"), MeshFormat::Ply).unwrap_err();
        assert!(matches!(err, SharcError::Io { .. }));
    }
}
