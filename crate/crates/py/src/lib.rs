//! Python bindings: run workspace operations and get reports back as JSON.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use tormod::cli::{parse_args, run_command, run_operations, Outcome};
use tormod::io::{emit, Overrides, Workspace};
use tormod::Error;

create_exception!(tormod_py, TormodError, PyException);

fn to_py(e: Error) -> PyErr {
    TormodError::new_err((e.exit_code(), e.to_string()))
}

fn outcomes_json(outs: &[Outcome]) -> Result<String, Error> {
    let docs: Vec<serde_json::Value> = outs
        .iter()
        .map(|o| {
            let outputs: serde_json::Map<String, serde_json::Value> =
                o.outputs.iter().map(|(n, d)| Ok((n.clone(), serde_json::to_value(d)?))).collect::<Result<_, Error>>()?;
            Ok(serde_json::json!({ "report": o.report, "outputs": outputs }))
        })
        .collect::<Result<_, Error>>()?;
    emit(&docs)
}

/// Run every operation listed in a workspace document.
#[pyfunction]
#[pyo3(signature = (workspace, window=None, tower_bound=8))]
fn run_workspace(workspace: &str, window: Option<(i64, i64)>, tower_bound: u32) -> PyResult<String> {
    let window = window.map(|(lo, hi)| tormod::algebra::DegreeWindow::new(lo, hi)).transpose().map_err(to_py)?;
    let ws = Workspace::parse(workspace, &Overrides { window, preset: None }).map_err(to_py)?;
    let outs = run_operations(&ws, window, tower_bound).map_err(to_py)?;
    outcomes_json(&outs).map_err(to_py)
}

/// Run one command, given as command-line arguments, against a workspace.
#[pyfunction]
fn run(workspace: &str, args: Vec<String>) -> PyResult<String> {
    let cli = parse_args(args.iter().cloned()).map_err(to_py)?;
    let ws = Workspace::parse(workspace, &Overrides { window: cli.window, preset: cli.preset.clone() }).map_err(to_py)?;
    let out = run_command(&ws, &cli.command, &args, cli.window, cli.tower_bound).map_err(to_py)?;
    outcomes_json(&[out]).map_err(to_py)
}

#[pymodule]
fn tormod_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run_workspace, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("TormodError", m.py().get_type::<TormodError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
