//! Planetoid file set: `ind.<name>.{x,y,tx,ty,allx,ally,graph,test.index}`.
//!
//! Node order follows the usual convention: `allx` rows come first, then the
//! test rows, and test rows are moved to the positions listed in
//! `test.index`. CiteSeer has test indices that point at isolated nodes
//! missing from `tx`; those get zero features and label 0.

use std::fs;
use std::path::{Path, PathBuf};

use crate::autodiff::Tensor;

use super::pickle::{self, Value, Writer};
use super::{DataError, DatasetName, GraphDataset};

/// A decoded numpy array or scipy sparse matrix, densified row-major.
#[derive(Debug, Clone, PartialEq)]
struct Array {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Array {
    fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

fn file_path(dir: &Path, name: &str, part: &str) -> PathBuf {
    dir.join(format!("ind.{name}.{part}"))
}

/// Loads Cora, CiteSeer or PubMed from a directory holding the raw files.
pub fn load_planetoid(name: DatasetName, dir: impl AsRef<Path>) -> Result<GraphDataset, DataError> {
    let dir = dir.as_ref();
    if name == DatasetName::WikiCs {
        return Err(DataError::UnknownDataset(format!("{name} is not a Planetoid dataset")));
    }
    let id = name.id();
    let read = |part: &str| -> Result<(PathBuf, Value), DataError> {
        let path = file_path(dir, id, part);
        let bytes = fs::read(&path).map_err(|e| DataError::io(&path, e))?;
        let value = pickle::from_slice(&bytes).map_err(|e| DataError::corrupt(&path, e.to_string()))?;
        Ok((path, value))
    };
    let array = |part: &str| -> Result<Array, DataError> {
        let (path, value) = read(part)?;
        to_array(&value).map_err(|m| DataError::corrupt(&path, m))
    };

    // x and y are only the labelled training subset of allx; read them so a
    // truncated file set is reported instead of silently accepted.
    let x = array("x")?;
    let _y = array("y")?;
    let tx = array("tx")?;
    let ty = array("ty")?;
    let allx = array("allx")?;
    let ally = array("ally")?;
    let (graph_path, graph) = read("graph")?;

    let index_path = file_path(dir, id, "test.index");
    let text = fs::read_to_string(&index_path).map_err(|e| DataError::io(&index_path, e))?;
    let mut test_index = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v = line.parse::<usize>().map_err(|_| {
            DataError::corrupt(&index_path, format!("line {}: '{line}' is not a node index", i + 1))
        })?;
        test_index.push(v);
    }

    let path_of = |part: &str| file_path(dir, id, part);
    let f = allx.cols;
    if x.cols != f || tx.cols != f {
        return Err(DataError::corrupt(path_of("tx"), "feature widths of x, tx and allx differ"));
    }
    if allx.rows != ally.rows || tx.rows != ty.rows {
        return Err(DataError::corrupt(path_of("ally"), "feature and label row counts differ"));
    }
    let c = ally.cols;
    if ty.cols != c || c == 0 {
        return Err(DataError::corrupt(path_of("ty"), "label widths of ty and ally differ"));
    }
    if test_index.len() != tx.rows {
        return Err(DataError::corrupt(
            &index_path,
            format!("{} test indices but tx has {} rows", test_index.len(), tx.rows),
        ));
    }

    let mut sorted = test_index.clone();
    sorted.sort_unstable();
    let (lo, hi) = match (sorted.first(), sorted.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (allx.rows, allx.rows.wrapping_sub(1)),
    };
    if !test_index.is_empty() && lo != allx.rows {
        return Err(DataError::corrupt(
            &index_path,
            format!("smallest test index {lo} does not follow the {} allx rows", allx.rows),
        ));
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(DataError::corrupt(&index_path, "duplicate test index"));
    }
    let test_span = if test_index.is_empty() { 0 } else { hi - lo + 1 };
    let n = allx.rows + test_span;

    let mut features = vec![0.0; n * f];
    let mut onehot = vec![0.0; n * c];
    for r in 0..allx.rows {
        features[r * f..(r + 1) * f].copy_from_slice(allx.row(r));
        onehot[r * c..(r + 1) * c].copy_from_slice(ally.row(r));
    }
    // tx row i describes node test_index[i]
    for (i, &node) in test_index.iter().enumerate() {
        features[node * f..(node + 1) * f].copy_from_slice(tx.row(i));
        onehot[node * c..(node + 1) * c].copy_from_slice(ty.row(i));
    }
    let labels = (0..n).map(|r| argmax(&onehot[r * c..(r + 1) * c])).collect();

    let adjacency = graph
        .as_dict_items()
        .ok_or_else(|| DataError::corrupt(&graph_path, "graph is not a dict of adjacency lists"))?;
    let mut raw_edges = Vec::new();
    for (k, neighbors) in adjacency {
        let u = node_index(&k, n).map_err(|m| DataError::corrupt(&graph_path, m))?;
        let list = neighbors
            .as_seq()
            .ok_or_else(|| DataError::corrupt(&graph_path, format!("neighbors of {u} are not a list")))?;
        for v in list {
            let v = node_index(&v, n).map_err(|m| DataError::corrupt(&graph_path, m))?;
            raw_edges.push((u, v));
        }
    }

    let features = Tensor::new(&[n, f], features).expect("sizes checked");
    let ds = GraphDataset::new(name.display_name(), features, labels, raw_edges, c)?;
    let (_, reported_edges, _, _) = name.reported_stats();
    log::info!(
        "{}: {} nodes, {} canonical undirected edges (reported {}), {} features, {} classes",
        ds.name,
        ds.num_nodes,
        ds.num_edges(),
        reported_edges,
        ds.feature_dim(),
        ds.num_classes
    );
    Ok(ds)
}

fn node_index(v: &Value, n: usize) -> Result<usize, String> {
    match v.as_int() {
        Some(i) if i >= 0 && (i as usize) < n => Ok(i as usize),
        Some(i) => Err(format!("node {i} outside 0..{n}")),
        None => Err(format!("node id {v:?} is not an integer")),
    }
}

/// First index of the maximum; an all-zero row maps to 0.
fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn to_array(v: &Value) -> Result<Array, String> {
    let (module, class) = v.class_path().ok_or("expected a numpy array or scipy matrix")?;
    if class.ends_with("_matrix") || class.ends_with("_array") && module.starts_with("scipy") {
        return sparse_to_array(v, &class);
    }
    let (shape, data) = ndarray(v)?;
    match shape.as_slice() {
        [r, c] => Ok(Array {
            rows: *r,
            cols: *c,
            data,
        }),
        [r] => Ok(Array {
            rows: *r,
            cols: 1,
            data,
        }),
        _ => Err(format!("expected a 1-D or 2-D array, got shape {shape:?}")),
    }
}

fn sparse_to_array(v: &Value, class: &str) -> Result<Array, String> {
    let Value::Object(obj) = v else {
        return Err("sparse matrix is not an object".into());
    };
    let state = obj.borrow().state.clone().ok_or("sparse matrix without state")?;
    let field = |k: &str| state.get(k).ok_or(format!("sparse matrix state lacks '{k}'"));
    let shape = state
        .get("_shape")
        .or_else(|| state.get("shape"))
        .and_then(|s| s.as_seq())
        .ok_or("sparse matrix state lacks a shape")?;
    let dims: Vec<usize> = shape.iter().filter_map(|d| d.as_int()).map(|d| d as usize).collect();
    let [rows, cols] = dims[..] else {
        return Err(format!("sparse matrix shape {dims:?} is not 2-D"));
    };
    let (_, values) = ndarray(&field("data")?)?;
    let (_, indices) = ndarray(&field("indices")?)?;
    let (_, indptr) = ndarray(&field("indptr")?)?;
    // csc stores the transpose layout
    let (outer, inner) = match class {
        "csr_matrix" | "csr_array" => (rows, cols),
        "csc_matrix" | "csc_array" => (cols, rows),
        other => return Err(format!("unsupported sparse format {other}")),
    };
    if indptr.len() != outer + 1 || indices.len() != values.len() {
        return Err("sparse matrix index arrays are inconsistent".into());
    }
    let mut data = vec![0.0; rows * cols];
    for o in 0..outer {
        let (a, b) = (indptr[o] as usize, indptr[o + 1] as usize);
        if a > b || b > indices.len() {
            return Err("sparse matrix indptr is not monotone".into());
        }
        for k in a..b {
            let i = indices[k] as usize;
            if i >= inner {
                return Err(format!("sparse column {i} outside 0..{inner}"));
            }
            let (r, c) = if class.starts_with("csr") { (o, i) } else { (i, o) };
            data[r * cols + c] += values[k];
        }
    }
    Ok(Array { rows, cols, data })
}

/// Decodes a pickled `numpy.ndarray` into (shape, row-major values).
fn ndarray(v: &Value) -> Result<(Vec<usize>, Vec<f64>), String> {
    let Value::Object(obj) = v else {
        return Err("expected a numpy array".into());
    };
    let obj = obj.borrow();
    let (_, func) = obj.class.class_path().unwrap_or_default();
    let ints = |v: &Value| -> Result<Vec<usize>, String> {
        v.as_seq()
            .ok_or("array shape is not a tuple")?
            .iter()
            .map(|d| d.as_int().map(|d| d as usize).ok_or("array dimension is not an integer".to_string()))
            .collect()
    };
    let (shape, dtype, fortran, raw) = match func.as_str() {
        "_reconstruct" | "ndarray" => {
            let state = obj.state.as_ref().and_then(|s| s.as_seq()).ok_or("array without state")?;
            // (version, shape, dtype, is_fortran, data); older pickles omit version
            let s = if state.len() == 5 { &state[1..] } else { &state[..] };
            if s.len() != 4 {
                return Err("unexpected array state layout".into());
            }
            let fortran = matches!(s[2], Value::Bool(true)) || s[2].as_int() == Some(1);
            (ints(&s[0])?, dtype(&s[1])?, fortran, s[3].as_bytes().ok_or("object arrays are not supported")?)
        }
        "_frombuffer" => {
            let [buf, dt, shape, order] = &obj.args[..] else {
                return Err("unexpected _frombuffer arguments".into());
            };
            let fortran = order.as_str().as_deref() == Some("F");
            (ints(shape)?, dtype(dt)?, fortran, buf.as_bytes().ok_or("array buffer is not bytes")?)
        }
        other => return Err(format!("unsupported array constructor {other}")),
    };
    let count: usize = shape.iter().product();
    if raw.len() != count * dtype.size {
        return Err(format!(
            "array data has {} bytes, expected {} for shape {shape:?}",
            raw.len(),
            count * dtype.size
        ));
    }
    let mut data: Vec<f64> = raw.chunks_exact(dtype.size).map(|c| dtype.decode(c)).collect();
    if fortran && shape.len() == 2 {
        let (r, c) = (shape[0], shape[1]);
        let col_major = data;
        data = (0..r * c).map(|k| col_major[(k % c) * r + k / c]).collect();
    }
    Ok((shape, data))
}

#[derive(Debug, Clone, Copy)]
struct DType {
    kind: u8,
    size: usize,
    big_endian: bool,
}

impl DType {
    fn decode(self, b: &[u8]) -> f64 {
        let mut buf = [0u8; 8];
        if self.big_endian {
            for (i, &x) in b.iter().rev().enumerate() {
                buf[i] = x;
            }
        } else {
            buf[..b.len()].copy_from_slice(b);
        }
        match (self.kind, self.size) {
            (b'f', 4) => f32::from_le_bytes(buf[..4].try_into().expect("4")) as f64,
            (b'f', 8) => f64::from_le_bytes(buf),
            (b'i', n) => {
                let shift = 64 - 8 * n as u32;
                ((i64::from_le_bytes(buf) << shift) >> shift) as f64
            }
            _ => u64::from_le_bytes(buf) as f64,
        }
    }
}

fn dtype(v: &Value) -> Result<DType, String> {
    let Value::Object(obj) = v else {
        return Err("array dtype is not a numpy.dtype".into());
    };
    let obj = obj.borrow();
    let code = obj.args.first().and_then(|a| a.as_str()).ok_or("dtype without type code")?;
    let order = obj
        .state
        .as_ref()
        .and_then(|s| s.as_seq())
        .and_then(|s| s.get(1).and_then(|o| o.as_str()))
        .unwrap_or_else(|| "<".into());
    let (kind, digits) = code.split_at(1);
    let size: usize = digits.parse().map_err(|_| format!("unsupported dtype '{code}'"))?;
    let kind = match kind {
        "f" if size == 4 || size == 8 => b'f',
        "i" | "u" if matches!(size, 1 | 2 | 4 | 8) => kind.as_bytes()[0],
        "b" if size == 1 => b'u',
        _ => return Err(format!("unsupported dtype '{code}'")),
    };
    Ok(DType {
        kind,
        size,
        big_endian: order == ">",
    })
}

/// Writes `ds` as a Planetoid file set named `name` into `dir`.
///
/// The last `min(1000, N/3)` nodes become the test block and are listed in
/// `test.index` in a scrambled order, so loaders that ignore the reordering
/// step produce different features. `x`/`y` hold the first 20 nodes per
/// class worth of rows (at most 140). Features are stored as float32 when
/// that is exact, otherwise float64.
pub fn write_planetoid(ds: &GraphDataset, dir: impl AsRef<Path>, name: &str) -> Result<(), DataError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| DataError::io(dir, e))?;
    let n = ds.num_nodes;
    let f = ds.feature_dim();
    let c = ds.num_classes;
    let num_test = (n / 3).min(1000);
    let num_all = n - num_test;
    let num_x = num_all.min(20 * c).min(140);

    // deterministic scramble: stride by a unit modulo num_test
    let stride = (num_test / 2..).find(|&s| gcd(s, num_test) == 1).unwrap_or(1);
    let test_index: Vec<usize> = (0..num_test).map(|i| num_all + (i * stride) % num_test).collect();

    let feats = ds.features.values();
    let rows_of = |nodes: &[usize]| -> Vec<f64> {
        nodes.iter().flat_map(|&r| feats[r * f..(r + 1) * f].iter().copied()).collect()
    };
    let onehot_of = |nodes: &[usize]| -> Vec<f64> {
        let mut out = vec![0.0; nodes.len() * c];
        for (i, &r) in nodes.iter().enumerate() {
            out[i * c + ds.labels[r]] = 1.0;
        }
        out
    };
    let single = feats.iter().all(|&v| (v as f32) as f64 == v);
    let all_nodes: Vec<usize> = (0..num_all).collect();
    let x_nodes: Vec<usize> = (0..num_x).collect();

    let write = |part: &str, bytes: Vec<u8>| -> Result<(), DataError> {
        let path = file_path(dir, name, part);
        fs::write(&path, bytes).map_err(|e| DataError::io(&path, e))
    };
    let csr = |nodes: &[usize]| csr_pickle(nodes.len(), f, &rows_of(nodes), single);
    write("x", csr(&x_nodes))?;
    write("tx", csr(&test_index))?;
    write("allx", csr(&all_nodes))?;
    write("y", dense_pickle(num_x, c, &onehot_of(&x_nodes)))?;
    write("ty", dense_pickle(num_test, c, &onehot_of(&test_index)))?;
    write("ally", dense_pickle(num_all, c, &onehot_of(&all_nodes)))?;

    let mut neighbors = vec![Vec::new(); n];
    for &(u, v) in &ds.edges {
        neighbors[u].push(v);
        neighbors[v].push(u);
    }
    let mut w = Writer::new();
    w.global("collections", "defaultdict")
        .global("__builtin__", "list")
        .tuple1()
        .reduce();
    for chunk in (0..n).collect::<Vec<_>>().chunks(1000) {
        w.mark();
        for &u in chunk {
            w.int(u as i64).empty_list();
            if !neighbors[u].is_empty() {
                w.mark();
                for &v in &neighbors[u] {
                    w.int(v as i64);
                }
                w.appends();
            }
        }
        w.setitems();
    }
    write("graph", w.finish())?;

    let text: String = test_index.iter().map(|i| format!("{i}\n")).collect();
    write("test.index", text.into_bytes())?;
    Ok(())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn ndarray_pickle(w: &mut Writer, shape: &[usize], code: &str, raw: &[u8]) {
    w.global("numpy.core.multiarray", "_reconstruct")
        .global("numpy", "ndarray")
        .int(0)
        .tuple1()
        .byte_string(b"b")
        .tuple3()
        .reduce();
    w.mark().int(1).mark();
    for &d in shape {
        w.int(d as i64);
    }
    w.tuple();
    w.global("numpy", "dtype")
        .byte_string(code.as_bytes())
        .int(0)
        .int(1)
        .tuple3()
        .reduce();
    w.mark()
        .int(3)
        .byte_string(if code.ends_with('1') { b"|" } else { b"<" })
        .none()
        .none()
        .none()
        .int(-1)
        .int(-1)
        .int(0)
        .tuple()
        .build();
    w.bool(false).byte_string(raw).tuple().build();
}

fn dense_pickle(rows: usize, cols: usize, data: &[f64]) -> Vec<u8> {
    let raw: Vec<u8> = data.iter().flat_map(|&v| (v as i32).to_le_bytes()).collect();
    let mut w = Writer::new();
    ndarray_pickle(&mut w, &[rows, cols], "i4", &raw);
    w.finish()
}

fn csr_pickle(rows: usize, cols: usize, dense: &[f64], single: bool) -> Vec<u8> {
    let mut indptr = vec![0i32];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for r in 0..rows {
        for (j, &v) in dense[r * cols..(r + 1) * cols].iter().enumerate() {
            if v != 0.0 {
                indices.push(j as i32);
                values.push(v);
            }
        }
        indptr.push(indices.len() as i32);
    }
    let (code, raw): (&str, Vec<u8>) = if single {
        ("f4", values.iter().flat_map(|&v| (v as f32).to_le_bytes()).collect())
    } else {
        ("f8", values.iter().flat_map(|&v| v.to_le_bytes()).collect())
    };
    let ints = |v: &[i32]| -> Vec<u8> { v.iter().flat_map(|x| x.to_le_bytes()).collect() };

    let mut w = Writer::new();
    w.global("scipy.sparse.csr", "csr_matrix").empty_tuple().newobj();
    w.empty_dict().mark();
    w.byte_string(b"_shape").int(rows as i64).int(cols as i64);
    w.tuple2();
    w.byte_string(b"maxprint").int(50);
    w.byte_string(b"indices");
    ndarray_pickle(&mut w, &[indices.len()], "i4", &ints(&indices));
    w.byte_string(b"indptr");
    ndarray_pickle(&mut w, &[indptr.len()], "i4", &ints(&indptr));
    w.byte_string(b"data");
    ndarray_pickle(&mut w, &[values.len()], code, &raw);
    w.byte_string(b"format").byte_string(b"csr");
    w.byte_string(b"_has_sorted_indices").bool(true);
    w.setitems().build();
    w.finish()
}
