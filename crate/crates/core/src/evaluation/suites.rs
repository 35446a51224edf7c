use serde::{Deserialize, Serialize};

use super::comembership::comembership_matrix;
use crate::draws::{Draws, ParamShape};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteTag {
    FirstMoments,
    PureSecondMoments,
    MixedSecondMoments,
    Eigenvalues,
    EigenvaluePairs,
    Comembership,
}

impl SuiteTag {
    pub const ALL: [SuiteTag; 6] = [
        SuiteTag::FirstMoments,
        SuiteTag::PureSecondMoments,
        SuiteTag::MixedSecondMoments,
        SuiteTag::Eigenvalues,
        SuiteTag::EigenvaluePairs,
        SuiteTag::Comembership,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteTag::FirstMoments => "first_moments",
            SuiteTag::PureSecondMoments => "pure_second_moments",
            SuiteTag::MixedSecondMoments => "mixed_second_moments",
            SuiteTag::Eigenvalues => "eigenvalues",
            SuiteTag::EigenvaluePairs => "eigenvalue_pairs",
            SuiteTag::Comembership => "comembership",
        }
    }
}

/// One scalar function of a parameter draw. Indices are 0-based; eigenvalue
/// indices count down from the largest eigenvalue of `Λ⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestFunction {
    Coordinate(usize),
    Square(usize),
    Product(usize, usize),
    Eigenvalue(usize),
    EigenvaluePair(usize, usize),
    Comembership(usize, usize),
}

impl TestFunction {
    pub fn name(&self) -> String {
        match *self {
            TestFunction::Coordinate(j) => format!("theta[{j}]"),
            TestFunction::Square(j) => format!("theta[{j}]^2"),
            TestFunction::Product(i, j) => format!("theta[{i}]*theta[{j}]"),
            TestFunction::Eigenvalue(j) => format!("rho[{j}]"),
            TestFunction::EigenvaluePair(i, j) => format!("rho[{i}]*rho[{j}]"),
            TestFunction::Comembership(i, j) => format!("comember[{i},{j}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionSuite {
    tag: SuiteTag,
    functions: Vec<TestFunction>,
}

impl TestFunctionSuite {
    /// Moment suites run over the flattened parameter; eigenvalue suites
    /// need PSD matrices and comembership needs cluster centers plus the
    /// number of test points.
    pub fn new(tag: SuiteTag, shape: ParamShape, test_points: usize) -> Result<Self> {
        let p = shape.flat_len();
        let functions = match (tag, shape) {
            (SuiteTag::FirstMoments, _) => (0..p).map(TestFunction::Coordinate).collect(),
            (SuiteTag::PureSecondMoments, _) => (0..p).map(TestFunction::Square).collect(),
            (SuiteTag::MixedSecondMoments, _) => pairs(p, false).map(|(i, j)| TestFunction::Product(i, j)).collect(),
            (SuiteTag::Eigenvalues, ParamShape::SymMatrix { d }) => (0..d).map(TestFunction::Eigenvalue).collect(),
            (SuiteTag::EigenvaluePairs, ParamShape::SymMatrix { d }) => {
                pairs(d, true).map(|(i, j)| TestFunction::EigenvaluePair(i, j)).collect()
            }
            (SuiteTag::Comembership, ParamShape::Clusters { .. }) => {
                if test_points < 2 {
                    return Err(Error::config("comembership needs at least two test points"));
                }
                pairs(test_points, false).map(|(i, j)| TestFunction::Comembership(i, j)).collect()
            }
            (tag, shape) => {
                return Err(Error::config(format!("suite {} does not apply to {shape:?}", tag.as_str())))
            }
        };
        Ok(TestFunctionSuite { tag, functions })
    }

    pub fn tag(&self) -> SuiteTag {
        self.tag
    }

    pub fn functions(&self) -> &[TestFunction] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

fn pairs(n: usize, diagonal: bool) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| ((if diagonal { i } else { i + 1 })..n).map(move |j| (i, j)))
}

/// Descending eigenvalues of `Λ⁻¹`.
fn inverse_spectrum(d: usize, flat: &[f64]) -> Result<Vec<f64>> {
    let m = linalg::matrix_from_flat(d, flat)?;
    let mut ev: Vec<f64> = linalg::eigenvalues_sym(&m).iter().copied().collect();
    if ev.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::domain("eigenvalue suites need positive-definite draws"));
    }
    ev.sort_by(f64::total_cmp);
    Ok(ev.into_iter().map(|v| 1.0 / v).collect())
}

/// Monte Carlo average of every function in the suite.
pub fn estimate_expectations(
    draws: &Draws,
    shape: ParamShape,
    suite: &TestFunctionSuite,
    test_points: Option<&Matrix>,
) -> Result<Vec<f64>> {
    Error::check_dim(shape.flat_len(), draws.dim())?;
    if draws.is_empty() {
        return Err(Error::config("no draws to average"));
    }
    if suite.tag == SuiteTag::Comembership {
        let points = test_points.ok_or_else(|| Error::config("comembership needs test points"))?;
        let m = comembership_matrix(draws, shape, points)?;
        return suite
            .functions
            .iter()
            .map(|f| match *f {
                TestFunction::Comembership(i, j) if i < m.nrows() && j < m.nrows() => Ok(m[(i, j)]),
                _ => Err(Error::Dimension { expected: m.nrows(), got: 0 }),
            })
            .collect();
    }
    let mut sums = vec![0.0; suite.len()];
    for row in draws.rows() {
        let spectrum = match (suite.tag, shape) {
            (SuiteTag::Eigenvalues | SuiteTag::EigenvaluePairs, ParamShape::SymMatrix { d }) => inverse_spectrum(d, row)?,
            _ => Vec::new(),
        };
        for (s, f) in sums.iter_mut().zip(&suite.functions) {
            *s += match *f {
                TestFunction::Coordinate(j) => row[j],
                TestFunction::Square(j) => row[j] * row[j],
                TestFunction::Product(i, j) => row[i] * row[j],
                TestFunction::Eigenvalue(j) => spectrum[j],
                TestFunction::EigenvaluePair(i, j) => spectrum[i] * spectrum[j],
                TestFunction::Comembership(..) => unreachable!("handled above"),
            };
        }
    }
    let t = draws.len() as f64;
    Ok(sums.into_iter().map(|s| s / t).collect())
}
