use std::path::Path;

use orbitlab::orbitlab;
use pyo3::prelude::*;

/// Runs the Python smoke test against the module registered in an embedded
/// interpreter, so the bindings are exercised by `cargo test`.
#[test]
fn smoke_test_in_embedded_interpreter() {
    pyo3::append_to_inittab!(orbitlab);
    Python::initialize();
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../python/smoke_test.py");
    Python::attach(|py| {
        let runpy = py.import("runpy").unwrap();
        let result = runpy.call_method1(
            "run_path",
            (script.to_str().unwrap(), None::<()>, "__main__"),
        );
        if let Err(e) = result {
            e.print(py);
            panic!("smoke test failed");
        }
    });
}
