//! Built-in example algebras and bimodules.
//!
//! These are the small exact fixtures used by the test suite and shipped
//! inside the command-line binary: an exterior algebra on one generator, a
//! cyclic quiver with zero composition, its deformation by a top-arity
//! product, and a rank-one bimodule with a scaled right action.

use std::collections::BTreeMap;

use crate::ainfty::{combo, AInftyAlgebra, Combo, MuEntry};
use crate::bimodule::AInftyBimodule;
use crate::graded::{BaseRing, BasisElement, GradedSpace, GradingMode};
use crate::scalar::{Field, Scalar};

/// Exterior algebra on one degree-1 generator: basis `e, x`, `x² = 0`,
/// weights 0 and 1.
pub fn exterior(field: Field) -> AInftyAlgebra {
    let space = GradedSpace::new(
        BaseRing::new(1).unwrap(),
        GradingMode::Z,
        vec![
            BasisElement {
                id: "e".into(),
                degree: 0,
                target: 1,
                source: 1,
                weight: Some(0),
            },
            BasisElement {
                id: "x".into(),
                degree: 1,
                target: 1,
                source: 1,
                weight: Some(1),
            },
        ],
    )
    .unwrap();
    AInftyAlgebra::new(space, field, &["e".to_string()], vec![]).unwrap()
}

/// Degree assignment for the cyclic quiver: arrow degrees must sum to
/// `i − 1`. The default puts `i − 1` on `x_0` and 0 elsewhere.
pub fn quiver_default_degrees(i: usize) -> Vec<i64> {
    let mut d = vec![0i64; i + 1];
    d[0] = i as i64 - 1;
    d
}

/// Cyclic quiver algebra on `i+1` vertices with arrows `x_k: k → k+1`
/// (indices mod `i+1`), all products of arrows zero, weights = path length.
///
/// `arrow_degrees[k]` is the degree of `x_k`; the degrees must sum to
/// `i − 1`.
pub fn cyclic_quiver(i: usize, field: Field, arrow_degrees: &[i64]) -> AInftyAlgebra {
    assert_eq!(arrow_degrees.len(), i + 1, "one degree per arrow");
    assert_eq!(
        arrow_degrees.iter().sum::<i64>(),
        i as i64 - 1,
        "degrees sum to i−1"
    );
    let space = quiver_space(i, arrow_degrees, true);
    let units: Vec<String> = (0..=i).map(|k| format!("e{k}")).collect();
    AInftyAlgebra::new(space, field, &units, vec![]).unwrap()
}

/// The deformed cyclic quiver: the same underlying space (unweighted, since
/// the deformation is weight-inhomogeneous) plus the top products
/// `μ^{i+1}(x_{k+i}, …, x_k) = e_k` for every `k`. Requires `i ≥ 1`.
pub fn deformed_quiver(i: usize, field: Field) -> AInftyAlgebra {
    assert!(i >= 1);
    let space = quiver_space(i, &quiver_default_degrees(i), false);
    let units: Vec<String> = (0..=i).map(|k| format!("e{k}")).collect();
    let m = i + 1;
    let x = |k: usize| m + (k % m);
    let mut entries = Vec::new();
    for k in 0..m {
        // Stored first-applied-first: x_k, x_{k+1}, …, x_{k+i}.
        let word: Vec<usize> = (0..=i).map(|t| x(k + t)).collect();
        entries.push(MuEntry {
            word,
            output: k,
            coeff: field.one(),
        });
    }
    AInftyAlgebra::new(space, field, &units, entries).unwrap()
}

fn quiver_space(i: usize, arrow_degrees: &[i64], weighted: bool) -> GradedSpace {
    let m = i + 1;
    let mut basis = Vec::new();
    for k in 0..m {
        basis.push(BasisElement {
            id: format!("e{k}"),
            degree: 0,
            target: k + 1,
            source: k + 1,
            weight: weighted.then_some(0),
        });
    }
    for k in 0..m {
        basis.push(BasisElement {
            id: format!("x{k}"),
            degree: arrow_degrees[k],
            target: (k + 1) % m + 1,
            source: k + 1,
            weight: weighted.then_some(1),
        });
    }
    GradedSpace::new(BaseRing::new(m).unwrap(), GradingMode::Z, basis).unwrap()
}

/// Rank-one free module over the exterior algebra with the right `x`-action
/// scaled: basis `p1` (degree 0), `px` (degree 1); `p1·x = λ·px`,
/// `x·p1 = px`, both actions kill `px`.
pub fn scaled_module(a: &AInftyAlgebra, lambda: Scalar) -> AInftyBimodule {
    let space = GradedSpace::new(
        BaseRing::new(1).unwrap(),
        GradingMode::Z,
        vec![
            BasisElement {
                id: "p1".into(),
                degree: 0,
                target: 1,
                source: 1,
                weight: Some(0),
            },
            BasisElement {
                id: "px".into(),
                degree: 1,
                target: 1,
                source: 1,
                weight: Some(1),
            },
        ],
    )
    .unwrap();
    let x = a.space().index_of("x").unwrap();
    let mut right: BTreeMap<(usize, usize), Combo> = BTreeMap::new();
    let mut left: BTreeMap<(usize, usize), Combo> = BTreeMap::new();
    let mut rx = Combo::new();
    combo::add_term(&mut rx, 1, lambda);
    right.insert((0usize, x), rx);
    let mut lx = Combo::new();
    combo::add_term(&mut lx, 1, a.field().one());
    left.insert((x, 0usize), lx);
    AInftyBimodule::from_classical_actions(a, space, &right, &left).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate_and_pass_relations() {
        let e = exterior(Field::Q);
        assert!(e.check_relations().pass);
        let q = cyclic_quiver(2, Field::Q, &quiver_default_degrees(2));
        assert!(q.check_relations().pass);
        let d = deformed_quiver(2, Field::Q);
        assert!(d.check_relations().pass);
        let p = scaled_module(&e, Field::Q.from_int(4));
        assert!(p.check_relations(&e).pass);
    }

    #[test]
    fn deformed_quiver_detects_a_dropped_top_product() {
        // Removing one of the top products breaks the structure relation;
        // the checker names a witness word.
        let i = 2;
        let m = i + 1;
        let space = super::quiver_space(i, &quiver_default_degrees(i), false);
        let units: Vec<String> = (0..=i).map(|k| format!("e{k}")).collect();
        let x = |k: usize| m + (k % m);
        let mut entries = Vec::new();
        for k in 0..m - 1 {
            let word: Vec<usize> = (0..=i).map(|t| x(k + t)).collect();
            entries.push(MuEntry {
                word,
                output: k,
                coeff: Field::Q.one(),
            });
        }
        let a = AInftyAlgebra::new(space, Field::Q, &units, entries).unwrap();
        let report = a.check_relations();
        assert!(!report.pass);
        assert!(report.failure.is_some());
    }
}
