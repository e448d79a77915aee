//! Python bindings. Results cross the boundary as JSON text so the Python
//! side sees exactly the documents the command-line tool writes.

use std::path::PathBuf;

use pidgraph::codes::{parse_text_regions, validate_code as validate, CodeGrammar};
use pidgraph::config::Config;
use pidgraph::eval::{evaluate as score, format_percent as percent, EvalParams};
use pidgraph::flow::{query_all, query_paths as query};
use pidgraph::overlay::{render_overlay as render, save_overlay};
use pidgraph::pipeline::{extract as run_extract, ExtractInputs};
use pidgraph::raster::GrayImage;
use pidgraph::result::PidGraph;
use pidgraph::symbols::{ingest_symbol_detections, parse_symbol_detections};
use pidgraph::synth::{generate_sheet as synth_sheet, SheetSpec};
use pidgraph::Error;
use pyo3::exceptions::{PyKeyError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::OutletNotFound(_) => PyKeyError::new_err(e.to_string()),
        Error::Io { .. } | Error::ImageRead { .. } | Error::ImageWrite { .. } => {
            PyOSError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config(path: Option<PathBuf>) -> PyResult<Config> {
    Config::resolve(path.as_deref()).map_err(py_err)
}

fn graph(json: &str) -> PyResult<PidGraph> {
    PidGraph::from_json(json, "result").map_err(py_err)
}

/// Runs the full pipeline on an image file and returns the result JSON.
#[pyfunction]
#[pyo3(signature = (image_path, text_json=None, symbols_json=None, config_path=None))]
fn extract(
    py: Python<'_>,
    image_path: PathBuf,
    text_json: Option<PathBuf>,
    symbols_json: Option<PathBuf>,
    config_path: Option<PathBuf>,
) -> PyResult<String> {
    let cfg = config(config_path)?;
    py.detach(|| {
        let image = GrayImage::load(&image_path)?;
        let bounds = Some((image.width(), image.height()));
        let inputs = ExtractInputs {
            text_regions: text_json
                .map(|p| pidgraph::codes::ingest_text_regions(p, bounds))
                .transpose()?,
            symbols: symbols_json
                .map(|p| ingest_symbol_detections(p, bounds))
                .transpose()?,
        };
        Ok(run_extract(&image, &inputs, &cfg)?.to_json())
    })
    .map_err(py_err)
}

/// Like `extract`, for a row-major 8-bit grayscale buffer. Text regions and
/// symbol detections are given as JSON strings.
#[pyfunction]
#[pyo3(signature = (pixels, width, height, text_regions=None, symbols=None, config_path=None))]
fn extract_pixels(
    py: Python<'_>,
    pixels: Vec<u8>,
    width: usize,
    height: usize,
    text_regions: Option<&str>,
    symbols: Option<&str>,
    config_path: Option<PathBuf>,
) -> PyResult<String> {
    let cfg = config(config_path)?;
    let image = GrayImage::new(width, height, pixels).map_err(py_err)?;
    let bounds = Some((width, height));
    let inputs = ExtractInputs {
        text_regions: text_regions
            .map(|t| parse_text_regions(t, bounds))
            .transpose()
            .map_err(py_err)?,
        symbols: symbols
            .map(|t| parse_symbol_detections(t, bounds))
            .transpose()
            .map_err(py_err)?,
    };
    py.detach(|| run_extract(&image, &inputs, &cfg).map(|g| g.to_json()))
        .map_err(py_err)
}

/// Synthetic sheet: `(pixels, width, height, truth_json, text_regions_json)`.
#[pyfunction]
#[pyo3(signature = (seed, spec_json=None))]
fn generate_sheet<'py>(
    py: Python<'py>,
    seed: u64,
    spec_json: Option<&str>,
) -> PyResult<(Bound<'py, PyBytes>, usize, usize, String, String)> {
    let spec: SheetSpec = match spec_json {
        Some(s) => serde_json::from_str(s).map_err(json_err)?,
        None => SheetSpec::default(),
    };
    let (image, truth) = synth_sheet(&spec, seed).map_err(py_err)?;
    let text = serde_json::to_string_pretty(&truth.text_regions).map_err(json_err)?;
    Ok((
        PyBytes::new(py, image.luma()),
        image.width(),
        image.height(),
        truth.graph.to_json(),
        text,
    ))
}

/// Metrics JSON for a predicted result against ground truth.
#[pyfunction]
#[pyo3(signature = (pred_json, gt_json, iou=0.5, endpoint_tol=3.0))]
fn evaluate(pred_json: &str, gt_json: &str, iou: f64, endpoint_tol: f64) -> PyResult<String> {
    let m = score(
        &graph(pred_json)?,
        &graph(gt_json)?,
        &EvalParams { iou, endpoint_tol },
    );
    serde_json::to_string_pretty(&m).map_err(json_err)
}

/// Root-to-inlet paths as JSON, for one outlet or all of them.
#[pyfunction]
#[pyo3(signature = (result_json, outlet=None))]
fn query_paths(result_json: &str, outlet: Option<usize>) -> PyResult<String> {
    let g = graph(result_json)?;
    let forest = g.flow_forest();
    let paths = match outlet {
        Some(id) => query(&forest, id, &g.associations).map_err(py_err)?,
        None => query_all(&forest, &g.associations),
    };
    serde_json::to_string_pretty(&paths).map_err(json_err)
}

#[pyfunction]
fn render_overlay(image_path: PathBuf, result_json: &str, out_path: PathBuf) -> PyResult<()> {
    let image = GrayImage::load(&image_path).map_err(py_err)?;
    let overlay = render(&image, &graph(result_json)?).map_err(py_err)?;
    save_overlay(&overlay, out_path).map_err(py_err)
}

/// One-decimal percentage, rounded half up.
#[pyfunction]
fn format_percent(successful: u64, total: u64) -> String {
    percent(successful, total)
}

/// Checks a string against the code grammar (the default one when omitted).
#[pyfunction]
#[pyo3(signature = (text, grammar_json=None))]
fn validate_code(text: &str, grammar_json: Option<&str>) -> PyResult<bool> {
    let grammar: CodeGrammar = match grammar_json {
        Some(g) => serde_json::from_str(g).map_err(json_err)?,
        None => CodeGrammar::default(),
    };
    Ok(validate(text, &grammar))
}

#[pymodule(name = "pidgraph")]
fn pidgraph_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(extract_pixels, m)?)?;
    m.add_function(wrap_pyfunction!(generate_sheet, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(query_paths, m)?)?;
    m.add_function(wrap_pyfunction!(render_overlay, m)?)?;
    m.add_function(wrap_pyfunction!(format_percent, m)?)?;
    m.add_function(wrap_pyfunction!(validate_code, m)?)?;
    Ok(())
}
