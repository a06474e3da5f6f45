//! Built-in scenario presets.

use crate::config::{parse_spec, ExperimentSpec};

/// `student-large-dof`: isotropic Student target with beta = d + 1 in d = 10
/// (degrees of freedom d + 2). Contraction margin 1, dimension-free iteration
/// counts; h is half the stability limit 0.0125.
const STUDENT_LARGE_DOF: &str = "
scenario = student-large-dof
[target]
family = isotropic-student
d = 10
beta = 11
[sampler]
algorithm = first-order
h = 0.00625
iterations = 2000
chains = 4096
seed = 42
init = point
[experiment]
epsilon = 0.5
reference_n = 200000
projections = 128
record = auto
out = runs/student-large-dof
";

/// `student-small-dof`: isotropic Student target with beta = (d+3)/2 in
/// d = 10 (3 degrees of freedom — barely finite variance). Contraction margin
/// 1/d; h is half the stability limit.
const STUDENT_SMALL_DOF: &str = "
scenario = student-small-dof
[target]
family = isotropic-student
d = 10
beta = 6.5
[sampler]
algorithm = first-order
h = 0.00275
iterations = 2000
chains = 4096
seed = 42
init = point
[experiment]
epsilon = 0.5
reference_n = 200000
projections = 128
record = auto
out = runs/student-small-dof
";

/// `smoke-small`: a seconds-scale configuration used by the golden-file test.
const SMOKE_SMALL: &str = "
scenario = smoke-small
[target]
family = isotropic-student
d = 2
beta = 3
[sampler]
algorithm = first-order
h = 0.01
iterations = 50
chains = 64
seed = 20240808
init = point
[experiment]
epsilon = 0.5
reference_n = 4096
projections = 32
record = 0,10,25,50
out = runs/smoke-small
";

/// `complexity-default`: the sweep behind `complexity-table` when no spec
/// file is given.
const COMPLEXITY_DEFAULT: &str = "
scenario = complexity-default
[target]
family = isotropic-student
d = 10
beta = 11
[sampler]
algorithm = first-order
h = 0.00625
iterations = 100
chains = 64
seed = 42
init = point
[experiment]
epsilon = 0.25
reference_n = 4096
projections = 32
record = auto
out = runs/complexity
[table]
dims = 5,10,20,40
rule = large-dof
epsilon = 0.25
w2_init = 10
batches = 1,4,16
";

pub fn preset(name: &str) -> Option<ExperimentSpec> {
    let text = match name {
        "student-large-dof" => STUDENT_LARGE_DOF,
        "student-small-dof" => STUDENT_SMALL_DOF,
        "smoke-small" => SMOKE_SMALL,
        "complexity-default" => COMPLEXITY_DEFAULT,
        _ => return None,
    };
    Some(parse_spec(text).expect("presets parse"))
}

pub const PRESET_NAMES: &[&str] =
    &["student-large-dof", "student-small-dof", "smoke-small", "complexity-default"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse_and_validate() {
        for name in PRESET_NAMES {
            let spec = preset(name).unwrap();
            assert_eq!(&spec.scenario, name);
            spec.validate_run().unwrap();
        }
    }
}
