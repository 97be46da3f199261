//! Python bindings. Volumes and masks cross the boundary as flat lists in
//! x-fastest order; everything else is plain numbers, tuples and dicts.
//!
//! ```python
//! import polarcut
//! vol, truth = polarcut.sphere_phantom((64, 64, 64), (1, 1, 1), (32, 32, 32), 10.0)
//! out = polarcut.segment(vol, (32, 32, 32))
//! polarcut.dsc(out.mask, truth)
//! ```

use polarcut::mincut::Vertex;
use polarcut::volume::{generate_phantom, load_volume, save_native};
use polarcut::{
    BinaryMask, FlowNetwork, GraphParams, PhantomSpec, SeedSet, Vec3, Volume as CoreVolume,
    VolumeFormat,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

create_exception!(
    polarcut,
    PolarcutError,
    PyValueError,
    "Raised for every library error. `args[0]` is the error kind."
);

fn err(e: polarcut::Error) -> PyErr {
    PolarcutError::new_err((e.kind(), e.to_string()))
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n
                .as_f64()
                .unwrap_or(f64::NAN)
                .into_pyobject(py)?
                .into_any()
                .unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn parse_format(format: Option<&str>, path: &str) -> PyResult<VolumeFormat> {
    match format {
        None => Ok(VolumeFormat::from_path(std::path::Path::new(path))),
        Some("native") => Ok(VolumeFormat::Native),
        Some("nifti1") | Some("nifti") => Ok(VolumeFormat::Nifti1),
        Some(other) => Err(PolarcutError::new_err((
            "invalid_params",
            format!("unknown format '{other}'"),
        ))),
    }
}

/// A scalar volume with millimeter spacing.
#[pyclass(name = "Volume", module = "polarcut", frozen)]
pub struct PyVolume {
    inner: CoreVolume,
}

#[pymethods]
impl PyVolume {
    #[new]
    fn new(dims: [usize; 3], spacing: [f64; 3], data: Vec<f32>) -> PyResult<Self> {
        Ok(PyVolume {
            inner: CoreVolume::new(dims, spacing, data).map_err(err)?,
        })
    }

    /// Loads a native `.vol` or NIfTI-1 file; the format follows the extension
    /// unless given as `"native"` or `"nifti1"`.
    #[staticmethod]
    #[pyo3(signature = (path, format=None))]
    fn load(path: &str, format: Option<&str>) -> PyResult<Self> {
        let format = parse_format(format, path)?;
        Ok(PyVolume {
            inner: load_volume(path, format).map_err(err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_native(&self.inner, path).map_err(err)
    }

    #[getter]
    fn dims(&self) -> [usize; 3] {
        self.inner.dims()
    }

    #[getter]
    fn spacing(&self) -> [f64; 3] {
        self.inner.spacing()
    }

    fn data(&self) -> Vec<f32> {
        self.inner.data().to_vec()
    }

    fn get(&self, i: usize, j: usize, k: usize) -> PyResult<f32> {
        let [nx, ny, nz] = self.inner.dims();
        if i >= nx || j >= ny || k >= nz {
            return Err(pyo3::exceptions::PyIndexError::new_err((i, j, k)));
        }
        Ok(self.inner.get(i, j, k))
    }

    fn intensity_range(&self) -> (f64, f64) {
        self.inner.intensity_range()
    }

    fn sample(&self, p: [f64; 3]) -> PyResult<f64> {
        self.inner.sample_trilinear(Vec3::from(p)).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Volume(dims={:?}, spacing={:?})",
            self.inner.dims(),
            self.inner.spacing()
        )
    }
}

/// A binary mask on a voxel grid.
#[pyclass(name = "Mask", module = "polarcut", frozen)]
pub struct PyMask {
    inner: BinaryMask,
}

#[pymethods]
impl PyMask {
    #[new]
    fn new(dims: [usize; 3], spacing: [f64; 3], bits: Vec<bool>) -> PyResult<Self> {
        Ok(PyMask {
            inner: BinaryMask::from_bits(dims, spacing, bits).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyMask {
            inner: BinaryMask::load(path).map_err(err)?,
        })
    }

    /// Writes NIfTI-1 for `.nii` paths and the native format otherwise.
    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(err)
    }

    #[getter]
    fn dims(&self) -> [usize; 3] {
        self.inner.dims()
    }

    #[getter]
    fn spacing(&self) -> [f64; 3] {
        self.inner.spacing()
    }

    fn bits(&self) -> Vec<bool> {
        self.inner.bits().to_vec()
    }

    fn count(&self) -> usize {
        self.inner.count()
    }

    fn volume_cm3(&self) -> f64 {
        polarcut::volume_cm3(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Mask(dims={:?}, voxels={})",
            self.inner.dims(),
            self.inner.count()
        )
    }
}

/// Result of [`segment`].
#[pyclass(name = "Segmentation", module = "polarcut", frozen)]
pub struct PySegmentation {
    out: polarcut::SegmentOutput,
    mask: Py<PyMask>,
    dims: [usize; 3],
    spacing: [f64; 3],
}

#[pymethods]
impl PySegmentation {
    #[getter]
    fn mask(&self, py: Python<'_>) -> Py<PyMask> {
        self.mask.clone_ref(py)
    }

    /// Boundary sample index per ray.
    fn boundary(&self) -> Vec<usize> {
        self.out.boundary.indices().to_vec()
    }

    /// Boundary radius per ray in millimeters.
    fn radii(&self) -> Vec<f64> {
        self.out.boundary.radii()
    }

    /// Unit ray directions, in the same order as `boundary()`.
    fn directions(&self) -> Vec<[f64; 3]> {
        self.out
            .polyhedron
            .directions()
            .iter()
            .map(|d| d.to_array())
            .collect()
    }

    fn stats(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let v = serde_json::to_value(&self.out.stats).expect("stats serialize");
        json_to_py(py, &v)
    }

    fn timings(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let v = serde_json::to_value(self.out.timings).expect("timings serialize");
        json_to_py(py, &v)
    }

    fn mesh_obj(&self) -> String {
        self.out.mesh.to_obj()
    }

    /// Closed polylines of axial slice `z` in voxel coordinates.
    fn contours(&self, z: usize) -> PyResult<Vec<Vec<[f64; 2]>>> {
        if z >= self.dims[2] {
            return Err(pyo3::exceptions::PyIndexError::new_err(z));
        }
        Ok(polarcut::surface::slice_contours(&self.out.mesh, z, self.spacing).polylines)
    }
}

/// Segments the object around `seed` (millimeters). Each extra seed pins the
/// boundary of the ray it falls on.
#[pyfunction]
#[pyo3(signature = (volume, seed, extra_seeds=Vec::new(), level=None, samples=None, delta_r_mm=None, smoothness=None, cube_d=None))]
#[allow(clippy::too_many_arguments)]
fn segment(
    py: Python<'_>,
    volume: &PyVolume,
    seed: [f64; 3],
    extra_seeds: Vec<[f64; 3]>,
    level: Option<u32>,
    samples: Option<usize>,
    delta_r_mm: Option<f64>,
    smoothness: Option<usize>,
    cube_d: Option<usize>,
) -> PyResult<PySegmentation> {
    let d = GraphParams::default();
    let params = GraphParams {
        level: level.unwrap_or(d.level),
        samples: samples.unwrap_or(d.samples),
        delta_r_mm: delta_r_mm.or(d.delta_r_mm),
        smoothness: smoothness.unwrap_or(d.smoothness),
        cube_d: cube_d.unwrap_or(d.cube_d),
    };
    let vol = &volume.inner;
    let extras = extra_seeds.into_iter().map(Vec3::from).collect();
    let seeds = SeedSet::new(vol, Vec3::from(seed), extras).map_err(err)?;
    let out = py
        .detach(|| polarcut::segment(vol, &seeds, &params))
        .map_err(err)?;
    let mask = Py::new(
        py,
        PyMask {
            inner: out.mask.clone(),
        },
    )?;
    Ok(PySegmentation {
        out,
        mask,
        dims: vol.dims(),
        spacing: vol.spacing(),
    })
}

/// Dice similarity coefficient of two masks on the same grid.
#[pyfunction]
fn dsc(a: &PyMask, r: &PyMask) -> PyResult<f64> {
    polarcut::dsc(&a.inner, &r.inner).map_err(err)
}

/// Generates a phantom from its JSON description. Returns `(volume, mask)`.
#[pyfunction]
fn phantom(spec_json: &str) -> PyResult<(PyVolume, PyMask)> {
    let spec: PhantomSpec = serde_json::from_str(spec_json)
        .map_err(|e| PolarcutError::new_err(("malformed_json", e.to_string())))?;
    let (v, m) = generate_phantom(&spec).map_err(err)?;
    Ok((PyVolume { inner: v }, PyMask { inner: m }))
}

/// Sphere of gray value 100 on a zero background, with optional noise.
#[pyfunction]
#[pyo3(signature = (dims, spacing, center, radius, noise_sigma=0.0, rng_seed=0))]
fn sphere_phantom(
    dims: [usize; 3],
    spacing: [f64; 3],
    center: [f64; 3],
    radius: f64,
    noise_sigma: f64,
    rng_seed: u64,
) -> PyResult<(PyVolume, PyMask)> {
    let mut spec = PhantomSpec::sphere(dims, spacing, Vec3::from(center), radius);
    spec.noise_sigma = noise_sigma;
    spec.rng_seed = rng_seed;
    let (v, m) = generate_phantom(&spec).map_err(err)?;
    Ok((PyVolume { inner: v }, PyMask { inner: m }))
}

/// Maximum flow on `nodes` inner nodes plus a source and a sink. Arc ends
/// are node indices or the strings `"s"` and `"t"`. Returns the flow value
/// and the source-side flag of every inner node.
#[pyfunction]
fn max_flow(
    nodes: usize,
    arcs: Vec<(Bound<'_, PyAny>, Bound<'_, PyAny>, f64)>,
) -> PyResult<(f64, Vec<bool>)> {
    let vertex = |end: &Bound<'_, PyAny>| -> PyResult<Vertex> {
        if let Ok(s) = end.extract::<String>() {
            return match s.as_str() {
                "s" => Ok(Vertex::Source),
                "t" => Ok(Vertex::Sink),
                _ => Err(PyValueError::new_err(format!(
                    "arc end '{s}' is not 's', 't' or an index"
                ))),
            };
        }
        Ok(Vertex::Node(end.extract::<u32>()?))
    };
    let mut net = FlowNetwork::new(nodes);
    for (from, to, cap) in &arcs {
        net.add_arc(vertex(from)?, vertex(to)?, *cap).map_err(err)?;
    }
    let cut = polarcut::max_flow(&net);
    Ok((cut.max_flow_value, cut.source_side))
}

#[pymodule(name = "polarcut")]
fn polarcut_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PolarcutError", m.py().get_type::<PolarcutError>())?;
    m.add_class::<PyVolume>()?;
    m.add_class::<PyMask>()?;
    m.add_class::<PySegmentation>()?;
    m.add_function(wrap_pyfunction!(segment, m)?)?;
    m.add_function(wrap_pyfunction!(dsc, m)?)?;
    m.add_function(wrap_pyfunction!(phantom, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_phantom, m)?)?;
    m.add_function(wrap_pyfunction!(max_flow, m)?)?;
    Ok(())
}
