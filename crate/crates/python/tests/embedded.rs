use cuspkahler_py::cuspkahler_module;
use pyo3::ffi::c_str;
use pyo3::prelude::*;

#[test]
fn module_runs_inside_embedded_interpreter() {
    pyo3::append_to_inittab!(cuspkahler_module);
    Python::initialize();
    Python::attach(|py| {
        let code = c_str!(
            r#"
import cuspkahler as ck
assert ck.topology(2, "1/10", "0", "1")["s_sol"] == "-400/9999"
assert ck.MomentumProfile.cp1(1, 1.0).simplify() == ("2*tau", "0")
assert ck.fredholm_index(3) == (1, -8, -7)
try:
    ck.MomentumProfile(1, 1)
    raise SystemExit("n = 1 accepted")
except ValueError:
    pass
"#
        );
        py.run(code, None, None).unwrap();
    });
}
