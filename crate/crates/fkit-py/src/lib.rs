use pyo3::prelude::*;

#[pymodule]
fn fkit_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
