use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::ffi::CString;

use wdisplays::wdisplays;

fn run(code: &str) -> PyResult<()> {
    Python::attach(|py| {
        let globals = PyDict::new(py);
        py.run(&CString::new(code).unwrap(), Some(&globals), None)
    })
}

#[test]
fn module_works_inside_an_embedded_interpreter() {
    pyo3::append_to_inittab!(wdisplays);
    Python::initialize();
    run(r#"
import json
import wdisplays
w = wdisplays.Witt(5, 3)
assert w.add(w.from_int(4), w.from_int(1)) == w.from_int(5)
assert w.from_int(5) == [[0], [1], [0]]
assert w.ghost(w.from_int(7)) == [[2], [2], [2]]
c = json.loads(wdisplays.run_census(1, 1, 3, 2, 1))
assert c["totals"]["classes"] == 2
assert len(json.loads(wdisplays.admissible_set(3, 1))["elements"]) == 7
try:
    wdisplays.admissible_set(1, 2)
    raise AssertionError("expected WdError")
except wdisplays.WdError as e:
    assert "BadRank" in str(e)
"#)
    .unwrap();
}
